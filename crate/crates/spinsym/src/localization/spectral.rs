use rayon::prelude::*;
use serde::Serialize;

use super::moments::edmonds_factors;
use super::rule::{Orientation, PiRule};
use super::test_function::{legendre_coeffs_quadrature, TestFunction};
use crate::catalog::CharFamily;
use crate::error::{domain, Result};
use crate::spin_algebra::{NeumaierSum, Precision, SignedLog};

/// Tail size of f's Legendre series above which a truncation is flagged.
pub const TRUNCATION_TOL: f64 = 1e-12;

/// One spectral evaluation of ∫f ρ_{k_n} against its target.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalizationOutcome {
    pub n: usize,
    pub k: usize,
    /// The point f is evaluated at: 1 − 2r or 2r − 1.
    pub z0: f64,
    pub integral: f64,
    pub target: f64,
    pub error: f64,
    /// Highest Legendre degree included in the sum.
    pub degree: usize,
    /// The summand at that degree.
    pub top_term: f64,
    /// Σ|a_l c_l E_l| over the omitted degrees, when computable.
    pub truncation_bound: Option<f64>,
    pub warnings: Vec<String>,
}

/// |∫f ρ_{k_n} − f(z0)| computed spectrally as Σ_l a_l c_l E_l.
///
/// ρ_{k_n} has degree n, so with closed-form coefficients and `l_max`
/// unset the sum over l ≤ n is the whole integral. Quadrature-based
/// functions are expanded only as far as their coefficients are
/// resolved.
pub fn localization_error(
    family: &CharFamily,
    rule: &PiRule,
    orientation: Orientation,
    f: &TestFunction,
    n: usize,
    l_max: Option<usize>,
) -> Result<LocalizationOutcome> {
    localization_error_with(family, rule, orientation, f, n, l_max, Precision::Auto)
}

pub fn localization_error_with(
    family: &CharFamily,
    rule: &PiRule,
    orientation: Orientation,
    f: &TestFunction,
    n: usize,
    l_max: Option<usize>,
    precision: Precision,
) -> Result<LocalizationOutcome> {
    if n == 0 {
        return domain("level n must be at least 1");
    }
    f.validate()?;
    let k = rule.k(n);
    let z0 = orientation.target(rule);
    let target = f.eval(z0);
    let mut warnings = Vec::new();

    let analytic = f.has_analytic_coeffs();
    let (a, natural): (Vec<SignedLog>, usize) = if analytic {
        (f.ln_coeffs(n)?, n)
    } else {
        let resolved = resolved_quadrature_degree(f, n)?;
        let mut a = f.ln_coeffs(resolved)?;
        a.resize(n + 1, SignedLog::ZERO);
        (a, resolved)
    };
    let degree = l_max.map_or(natural, |l| l.min(n));
    let tail: f64 = a[degree + 1..].iter().map(|v| v.abs().to_f64()).sum();
    if tail > TRUNCATION_TOL {
        warnings.push(format!("Legendre tail of f beyond l = {degree} is {tail:.3e}; raise L"));
    }

    let full_top = if analytic { n } else { degree };
    let e = edmonds_factors(n, k, full_top, precision)?;
    let mut sum = NeumaierSum::default();
    let mut omitted = 0.0;
    let mut top_term = 0.0;
    for l in 0..=full_top {
        if a[l].is_zero() || e[l].is_zero() {
            continue;
        }
        let term = (a[l] * family.signed_log(n, l)? * e[l]).to_f64();
        if l <= degree {
            sum.add(term);
            if l == degree {
                top_term = term;
            }
        } else {
            omitted += term.abs();
        }
    }
    let integral = sum.total();
    let truncation_bound = if analytic || degree == n { Some(omitted) } else { None };
    Ok(LocalizationOutcome {
        n,
        k,
        z0,
        integral,
        target,
        error: (integral - target).abs(),
        degree,
        top_term,
        truncation_bound,
        warnings,
    })
}

/// [`localization_error`] over a grid of levels, in parallel.
pub fn localization_sweep(
    family: &CharFamily,
    rule: &PiRule,
    orientation: Orientation,
    f: &TestFunction,
    n_grid: &[usize],
    l_max: Option<usize>,
) -> Result<Vec<LocalizationOutcome>> {
    n_grid.par_iter().map(|&n| localization_error(family, rule, orientation, f, n, l_max)).collect()
}

/// Smallest degree, doubling from 32 and capped at n, whose last eight
/// quadrature coefficients are below the truncation tolerance.
/// ln a_0..a_n of f: closed form when available, otherwise quadrature to
/// the resolved degree and zero beyond it.
pub(crate) fn level_ln_coeffs(f: &TestFunction, n: usize) -> Result<Vec<SignedLog>> {
    if f.has_analytic_coeffs() {
        return f.ln_coeffs(n);
    }
    let mut a = f.ln_coeffs(resolved_quadrature_degree(f, n)?)?;
    a.resize(n + 1, SignedLog::ZERO);
    Ok(a)
}

fn resolved_quadrature_degree(f: &TestFunction, n: usize) -> Result<usize> {
    let mut l = 32.min(n);
    loop {
        let a = legendre_coeffs_quadrature(f, l)?.a;
        let tail: f64 = a[l.saturating_sub(7)..].iter().map(|v| v.abs()).sum();
        if tail < TRUNCATION_TOL || l == n {
            return Ok(l);
        }
        l = (2 * l).min(n);
    }
}

/// Errors of one Runge-pole test function over a grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PoleRow {
    pub c: f64,
    /// Bernstein parameter |c| + √(c² − 1) of the pole.
    pub bernstein: f64,
    /// Whether f is holomorphic on the closed ellipse of parameter μ.
    pub in_class: bool,
    pub errors: Vec<f64>,
    /// Strictly decreasing over the grid.
    pub decreasing: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MuAnalyticReport {
    pub family: String,
    pub mu: f64,
    pub rule: PiRule,
    pub orientation: Orientation,
    pub n_grid: Vec<usize>,
    pub rows: Vec<PoleRow>,
}

impl MuAnalyticReport {
    /// Whether every in-class pole gave strictly decreasing errors.
    pub fn in_class_decreasing(&self) -> bool {
        self.rows.iter().filter(|r| r.in_class).all(|r| r.decreasing)
    }
}

/// Pole with Bernstein parameter p > 1.
pub fn pole_for_bernstein(p: f64) -> f64 {
    (p + 1.0 / p) / 2.0
}

pub fn bernstein_of_pole(c: f64) -> f64 {
    c.abs() + (c * c - 1.0).sqrt()
}

/// Localization errors for Runge-pole test functions whose Bernstein
/// parameters straddle μ (1 + (μ−1)/2, 2μ and 4μ), plus any `extra_poles`.
pub fn mu_analytic_suite(
    family: &CharFamily,
    mu: f64,
    rule: &PiRule,
    orientation: Orientation,
    n_grid: &[usize],
    extra_poles: &[f64],
) -> Result<MuAnalyticReport> {
    if !(mu > 1.0) || !mu.is_finite() {
        return domain(format!("Bernstein parameter mu = {mu} must exceed 1"));
    }
    if n_grid.is_empty() {
        return domain("empty n grid");
    }
    let mut poles: Vec<f64> = [1.0 + (mu - 1.0) / 2.0, 2.0 * mu, 4.0 * mu].iter().map(|p| pole_for_bernstein(*p)).collect();
    poles.extend_from_slice(extra_poles);
    let rows = poles
        .into_iter()
        .map(|c| {
            let f = TestFunction::RungePole { c };
            let errors: Vec<f64> =
                localization_sweep(family, rule, orientation, &f, n_grid, None)?.into_iter().map(|o| o.error).collect();
            let decreasing = errors.windows(2).all(|w| w[1] < w[0]);
            let bernstein = bernstein_of_pole(c);
            Ok(PoleRow { c, bernstein, in_class: bernstein > mu, errors, decreasing })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MuAnalyticReport {
        family: family.name(),
        mu,
        rule: *rule,
        orientation,
        n_grid: n_grid.to_vec(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::counterexample_family;
    use crate::localization::NamedSmooth;
    use crate::spin_algebra::legendre_eval;

    fn grid() -> Vec<usize> {
        vec![20, 40, 80, 160, 320]
    }

    #[test]
    fn legendre_functions_localize_for_poisson_families() {
        for fam in [CharFamily::standard_sw(), CharFamily::standard_berezin(), CharFamily::standard_toeplitz()] {
            for l in [1, 3] {
                let f = TestFunction::Legendre { l };
                let rule = PiRule::new(0.3).unwrap();
                let errs: Vec<f64> = localization_sweep(&fam, &rule, Orientation::Localize, &f, &grid(), None)
                    .unwrap()
                    .iter()
                    .map(|o| o.error)
                    .collect();
                // Toeplitz reproduces P_1 exactly, so its errors sit at rounding level
                assert!(errs.last().unwrap() < &errs[0] || errs[0] < 1e-14, "{} l={l}: {errs:?}", fam.name());
                assert!(errs.last().unwrap() < &0.05, "{} l={l}: {errs:?}", fam.name());
            }
        }
    }

    #[test]
    fn polynomial_integral_is_exact_for_berezin() {
        // ∫ z ρ for Berezin at n = 2, k = 1 is 1/2; ∫ z² ρ is 2/5
        let fam = CharFamily::standard_berezin();
        let rule = PiRule::new(0.0).unwrap();
        let f = TestFunction::Poly { coeffs: vec![0.0, 1.0, 1.0] };
        let o = localization_error(&fam, &rule, Orientation::Localize, &f, 2, None).unwrap();
        assert!((o.integral - 0.9).abs() < 1e-15);
        assert!((o.target - 2.0).abs() < 1e-15);
        assert_eq!(o.truncation_bound, Some(0.0));
    }

    #[test]
    fn berezin_exp_errors_decrease() {
        let fam = CharFamily::standard_berezin();
        let rule = PiRule::new(0.25).unwrap();
        let f = TestFunction::exp();
        let e: Vec<f64> = [20, 100, 800]
            .iter()
            .map(|&n| localization_error(&fam, &rule, Orientation::Localize, &f, n, None).unwrap().error)
            .collect();
        assert!(e[2] < e[1] && e[1] < e[0], "{e:?}");
    }

    #[test]
    fn reflection_is_bit_exact() {
        let f = TestFunction::exp();
        for (fam, alt) in [
            (CharFamily::standard_berezin(), CharFamily::alternate_berezin()),
            (CharFamily::standard_sw(), CharFamily::alternate_sw()),
            (CharFamily::standard_toeplitz(), CharFamily::alternate_toeplitz()),
        ] {
            for r in [0.0, 0.3, 0.5] {
                let rule = PiRule::new(r).unwrap();
                for n in [7, 50, 199, 400] {
                    let a = localization_error(&fam, &rule, Orientation::Localize, &f, n, None).unwrap();
                    let b = localization_error(&alt, &rule, Orientation::AntiLocalize, &f.reflected(), n, None).unwrap();
                    assert_eq!(a.error.to_bits(), b.error.to_bits(), "{} r={r} n={n}", fam.name());
                }
            }
        }
    }

    #[test]
    fn counterexample_blows_up_at_the_equator() {
        let fam = counterexample_family(TestFunction::exp(), false).unwrap();
        let rule = PiRule::new(0.5).unwrap();
        let f = TestFunction::exp();
        let mut prev = 0.0;
        for n in [100, 200, 400, 800] {
            let o = localization_error(&fam, &rule, Orientation::Localize, &f, n, None).unwrap();
            let nf = n as f64;
            let scale = 2.0 * nf / (std::f64::consts::PI * nf).powf(0.25);
            assert!((o.error / scale - 1.0).abs() < 0.05, "n={n}: {} vs {scale}", o.error);
            assert!(o.error > prev);
            prev = o.error;
        }
    }

    #[test]
    fn named_functions_use_resolved_quadrature() {
        let fam = CharFamily::standard_sw();
        let rule = PiRule::new(0.2).unwrap();
        let f = TestFunction::Named { name: NamedSmooth::Gaussian };
        let o = localization_error(&fam, &rule, Orientation::Localize, &f, 400, None).unwrap();
        assert!(o.degree < 400 && o.truncation_bound.is_none());
        assert!(o.warnings.is_empty());
        assert!(o.error < 5e-3, "{}", o.error);
    }

    #[test]
    fn forced_truncation_warns() {
        let fam = CharFamily::standard_sw();
        let rule = PiRule::new(0.2).unwrap();
        let o = localization_error(&fam, &rule, Orientation::Localize, &TestFunction::exp(), 100, Some(3)).unwrap();
        assert_eq!(o.degree, 3);
        assert!(!o.warnings.is_empty());
        assert!(o.truncation_bound.unwrap() > 0.0);
        // the degree-3 truncation equals the polynomial sum of P_0..P_3
        let a = TestFunction::exp().coeffs(3).unwrap().a;
        let m = crate::localization::rho_legendre_moments(100, rule.k(100), &fam, 3).unwrap();
        let want: f64 = (0..=3).map(|l| a[l] * m[l]).sum();
        assert!((o.integral - want).abs() < 1e-14);
        let _ = legendre_eval(1, 0.0);
    }

    #[test]
    fn toeplitz_localizes_runge_pole_at_three() {
        let fam = CharFamily::standard_toeplitz();
        let rule = PiRule::new(0.5).unwrap();
        let rep = mu_analytic_suite(&fam, 2.0, &rule, Orientation::Localize, &[50, 100, 200, 400], &[3.0]).unwrap();
        let row = rep.rows.iter().find(|r| r.c == 3.0).unwrap();
        assert!(row.in_class && row.decreasing, "{:?}", row.errors);
        assert!((row.bernstein - (3.0 + 8f64.sqrt())).abs() < 1e-14);
    }
}
