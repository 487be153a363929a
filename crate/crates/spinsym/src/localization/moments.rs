use rayon::prelude::*;
use serde::Serialize;

use super::rule::{Orientation, PiRule};
use crate::catalog::{mapping_positive_at, CharFamily};
use crate::error::{domain, Result};
use crate::spin_algebra::{diag_column_exact, diag_column_log, legendre_all, NeumaierSum, Precision, SignedLog};

/// E_l = (−1)^{k−1}⟨j m; j −m | l 0⟩√((n+1)/(2l+1)) for l = 0..=l_max,
/// zero beyond l = n. ∫P_l ρ_k = c_l·E_l.
pub fn edmonds_factors(n: usize, k: usize, l_max: usize, precision: Precision) -> Result<Vec<SignedLog>> {
    check_k(n, k)?;
    let top = l_max.min(n);
    let column: Vec<SignedLog> = if precision.is_exact_at(n) {
        diag_column_exact(n, k, top)?
            .iter()
            .map(|e| if e.is_zero() { SignedLog::ZERO } else { SignedLog::new(e.sign(), e.ln_abs()) })
            .collect()
    } else {
        diag_column_log(n, k, top)?
    };
    let flip: i8 = if (k - 1) % 2 == 1 { -1 } else { 1 };
    let mut out: Vec<SignedLog> = column
        .into_iter()
        .enumerate()
        .map(|(l, c)| {
            if c.is_zero() {
                c
            } else {
                SignedLog::new(flip * c.sign, c.ln_abs + 0.5 * ((n + 1) as f64 / (2 * l + 1) as f64).ln())
            }
        })
        .collect();
    out.resize(l_max + 1, SignedLog::ZERO);
    Ok(out)
}

/// ∫P_l ρ_k for l = 0..=l_max, in sign and log-magnitude.
pub fn rho_legendre_logs(
    n: usize,
    k: usize,
    family: &CharFamily,
    l_max: usize,
    precision: Precision,
) -> Result<Vec<SignedLog>> {
    let e = edmonds_factors(n, k, l_max, precision)?;
    let top = l_max.min(n);
    let mut out = Vec::with_capacity(l_max + 1);
    for (l, el) in e.into_iter().enumerate() {
        if l > top || el.is_zero() {
            out.push(SignedLog::ZERO);
        } else {
            out.push(family.signed_log(n, l)? * el);
        }
    }
    Ok(out)
}

/// ∫P_l ρ_k dz for l = 0..=l_max, from the closed form c_l·E_l.
pub fn rho_legendre_moments(n: usize, k: usize, family: &CharFamily, l_max: usize) -> Result<Vec<f64>> {
    rho_legendre_moments_with(n, k, family, l_max, Precision::Auto)
}

pub fn rho_legendre_moments_with(
    n: usize,
    k: usize,
    family: &CharFamily,
    l_max: usize,
    precision: Precision,
) -> Result<Vec<f64>> {
    Ok(rho_legendre_logs(n, k, family, l_max, precision)?.into_iter().map(SignedLog::to_f64).collect())
}

/// ρ_k(z) = Σ_l (2l+1)/2 · (∫P_l ρ_k) · P_l(z).
pub fn rho_eval(n: usize, k: usize, family: &CharFamily, z: f64) -> Result<f64> {
    let m = rho_legendre_moments(n, k, family, n)?;
    let p = legendre_all(n, z)?;
    let mut sum = NeumaierSum::default();
    for l in 0..=n {
        sum.add((2 * l + 1) as f64 / 2.0 * m[l] * p[l]);
    }
    Ok(sum.total())
}

/// Mean and variance of ρ_k on [−1, 1].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Moments {
    pub mu: f64,
    pub sigma2: f64,
}

/// Mean and variance from c_1, c_2 and the closed forms of the l = 1, 2
/// diagonal coefficients.
pub fn moments(n: usize, k: usize, family: &CharFamily) -> Result<Moments> {
    check_k(n, k)?;
    let nf = n as f64;
    let km = (k - 1) as f64;
    let c1 = family.value(n, 1)?;
    let x = nf - 2.0 * km;
    let mu = c1 * x / (nf * (nf + 2.0)).sqrt();
    let quad = if n >= 2 {
        let c2 = family.value(n, 2)?;
        let q = (nf - km) * (nf - km - 1.0) - 4.0 * km * (nf - km) + km * (km - 1.0);
        2.0 * c2 * q / (3.0 * ((nf - 1.0) * nf * (nf + 2.0) * (nf + 3.0)).sqrt())
    } else {
        0.0
    };
    Ok(Moments { mu, sigma2: quad + 1.0 / 3.0 - mu * mu })
}

/// Mean and variance from the spectral moments, using z = P_1 and
/// z² = (P_0 + 2P_2)/3.
pub fn spectral_moments(n: usize, k: usize, family: &CharFamily) -> Result<Moments> {
    let m = rho_legendre_moments(n, k, family, 2)?;
    let mu = m[1];
    Ok(Moments { mu, sigma2: (m[0] + 2.0 * m[2]) / 3.0 - mu * mu })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentVerdict {
    pub localizes: bool,
    pub z0: f64,
    pub mu_tail: Vec<f64>,
    pub sigma2_tail: Vec<f64>,
    pub evidence: String,
    pub warnings: Vec<String>,
}

/// Localization at z0 judged from mean and variance sequences: the last
/// three points must approach z0 and zero monotonically and end within
/// `tol`.
pub fn moment_verdict(mu: &[f64], sigma2: &[f64], z0: f64, tol: f64) -> Result<MomentVerdict> {
    if mu.len() != sigma2.len() || mu.len() < 3 {
        return domain("moment sequences need equal length of at least three");
    }
    let t = mu.len() - 3;
    let mu_tail = mu[t..].to_vec();
    let sigma2_tail = sigma2[t..].to_vec();
    let d: Vec<f64> = mu_tail.iter().map(|m| (m - z0).abs()).collect();
    let slack = 1e-15;
    let monotone = d[1] <= d[0] + slack
        && d[2] <= d[1] + slack
        && sigma2_tail[1] <= sigma2_tail[0] + slack
        && sigma2_tail[2] <= sigma2_tail[1] + slack;
    let close = d[2] < tol && sigma2_tail[2] < tol;
    let evidence = format!(
        "|mu - z0| = {:.3e}, sigma2 = {:.3e} at the last point; tail monotone: {monotone}",
        d[2], sigma2_tail[2]
    );
    Ok(MomentVerdict { localizes: monotone && close, z0, mu_tail, sigma2_tail, evidence, warnings: Vec::new() })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MomentRow {
    pub n: usize,
    pub k: usize,
    pub mu: f64,
    pub sigma2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentSweep {
    pub rows: Vec<MomentRow>,
    pub verdict: MomentVerdict,
}

/// Moments along an r-convergent sequence, with the localization verdict
/// at the oriented target. Warns when mapping-positivity of the family
/// is not confirmed at every grid level, since the verdict presumes
/// probability distributions.
pub fn moment_sweep(
    family: &CharFamily,
    rule: &PiRule,
    orientation: Orientation,
    n_grid: &[usize],
    tol: f64,
) -> Result<MomentSweep> {
    let rows = n_grid
        .par_iter()
        .map(|&n| {
            let k = rule.k(n);
            let m = moments(n, k, family)?;
            Ok(MomentRow { n, k, mu: m.mu, sigma2: m.sigma2 })
        })
        .collect::<Result<Vec<_>>>()?;
    let mu: Vec<f64> = rows.iter().map(|r| r.mu).collect();
    let s2: Vec<f64> = rows.iter().map(|r| r.sigma2).collect();
    let mut verdict = moment_verdict(&mu, &s2, orientation.target(rule), tol)?;
    for &n in n_grid {
        match mapping_positive_at(family, n)? {
            Some(true) => {}
            Some(false) => {
                verdict.warnings.push(format!("family is not mapping-positive at n = {n}"));
                break;
            }
            None => {
                verdict.warnings.push(format!("mapping-positivity undecided at n = {n}"));
                break;
            }
        }
    }
    Ok(MomentSweep { rows, verdict })
}

pub(crate) fn check_k(n: usize, k: usize) -> Result<()> {
    if n == 0 {
        return domain("level n must be at least 1");
    }
    if !(1..=n + 1).contains(&k) {
        return domain(format!("projector index k = {k} outside 1..={}", n + 1));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin_algebra::ln_factorial;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn zeroth_moment_is_one() {
        for fam in [CharFamily::standard_sw(), CharFamily::standard_toeplitz(), CharFamily::upper_middle_state()] {
            for (n, k) in [(1, 1), (5, 3), (40, 17), (300, 151)] {
                let m = rho_legendre_moments(n, k, &fam, 0).unwrap();
                assert!(close(m[0], 1.0, 1e-13), "{} n={n} k={k}", fam.name());
            }
        }
    }

    #[test]
    fn berezin_first_moment_at_two() {
        let m = rho_legendre_moments(2, 1, &CharFamily::standard_berezin(), 4).unwrap();
        assert!(close(m[1], 0.5, 1e-15));
        assert_eq!(&m[3..], &[0.0, 0.0]);
    }

    #[test]
    fn sw_reflection_between_k_and_its_mirror() {
        let sw = CharFamily::standard_sw();
        let top = rho_legendre_moments(4, 1, &sw, 4).unwrap();
        let bottom = rho_legendre_moments(4, 5, &sw, 4).unwrap();
        for l in 0..=4 {
            let sign = if l % 2 == 1 { -1.0 } else { 1.0 };
            assert!(close(bottom[l], sign * top[l], 1e-15), "l={l}");
        }
    }

    #[test]
    fn berezin_density_matches_binomial_form() {
        let fam = CharFamily::standard_berezin();
        for (n, k, z) in [(2, 1, 0.3), (7, 3, -0.6), (30, 12, 0.1), (90, 1, 0.95), (150, 76, -0.2)] {
            let got = rho_eval(n, k, &fam, z).unwrap();
            let km = k - 1;
            let ln_binom = ln_factorial(n) - ln_factorial(km) - ln_factorial(n - km);
            let want = (n + 1) as f64 / 2.0
                * (ln_binom + (n - km) as f64 * (1.0 + z).ln() + km as f64 * (1.0 - z).ln()
                    - n as f64 * std::f64::consts::LN_2)
                    .exp();
            assert!(close(got, want, 1e-10 * want.abs().max(1.0)), "n={n} k={k} z={z}: {got} vs {want}");
        }
    }

    #[test]
    fn closed_form_moments_examples() {
        let m = moments(2, 1, &CharFamily::standard_berezin()).unwrap();
        assert!(close(m.mu, 0.5, 1e-15) && close(m.sigma2, 0.15, 1e-15));
        let alt = moments(2, 1, &CharFamily::alternate_berezin()).unwrap();
        assert!(close(alt.mu, -0.5, 1e-15) && close(alt.sigma2, 0.15, 1e-15));
        for n in (2..40).step_by(2) {
            assert_eq!(moments(n, n / 2 + 1, &CharFamily::standard_sw()).unwrap().mu, 0.0);
        }
    }

    #[test]
    fn closed_form_and_spectral_moments_agree() {
        let fams = [
            CharFamily::standard_sw(),
            CharFamily::alternate_berezin(),
            CharFamily::standard_toeplitz(),
            CharFamily::lower_middle_state(),
        ];
        for fam in &fams {
            for n in [1, 2, 3, 10, 57, 201, 400] {
                for k in [1, n / 3 + 1, n + 1] {
                    let a = moments(n, k, fam).unwrap();
                    let b = spectral_moments(n, k, fam).unwrap();
                    assert!(close(a.mu, b.mu, 1e-12) && close(a.sigma2, b.sigma2, 1e-12), "{} n={n} k={k}", fam.name());
                }
            }
        }
    }

    #[test]
    fn berezin_localizes_and_upper_middle_does_not() {
        let grid = [64, 128, 256, 512, 1024];
        let r0 = PiRule::new(0.0).unwrap();
        let b = moment_sweep(&CharFamily::standard_berezin(), &r0, Orientation::Localize, &grid, 1e-2).unwrap();
        assert!(b.verdict.localizes, "{}", b.verdict.evidence);
        assert!(b.verdict.warnings.is_empty());
        let alt = moment_sweep(&CharFamily::alternate_berezin(), &r0, Orientation::AntiLocalize, &grid, 1e-2).unwrap();
        assert!(alt.verdict.localizes);
        let ums = moment_sweep(&CharFamily::upper_middle_state(), &r0, Orientation::Localize, &grid, 1e-2).unwrap();
        assert!(!ums.verdict.localizes);
        let sw = moment_sweep(&CharFamily::standard_sw(), &r0, Orientation::Localize, &[4, 8, 16], 1e-2).unwrap();
        assert!(!sw.verdict.warnings.is_empty());
    }

    #[test]
    fn rejects_bad_projector_index() {
        assert!(rho_legendre_moments(4, 0, &CharFamily::standard_sw(), 2).is_err());
        assert!(moments(4, 6, &CharFamily::standard_sw()).is_err());
    }
}
