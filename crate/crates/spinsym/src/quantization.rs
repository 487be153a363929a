//! J₃-invariant quantization of functions on [−1, 1], normalized operator
//! norms and the classical-expectation sweep.

use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::CharFamily;
use crate::error::{domain, Error, Result};
use crate::localization::{edmonds_factors, level_ln_coeffs, LegendreCoeffs, Orientation, PiRule, TestFunction};
use crate::spin_algebra::{NeumaierSum, Precision, SignedLog};
use crate::symbols::{CoupledBasis, OperatorMatrix};

/// Pairwise spread of the last three values below which a norm sequence is
/// reported as converged.
pub const NORM_CAUCHY_TOL: f64 = 1e-8;

/// Default step tolerance for the expectation Cauchy test.
pub const EXPECTATION_TOL: f64 = 5e-3;

/// A J₃-invariant operator F = Σ_l (b_l/√(2l+1)) ê(l,0) with
/// ê(l,0) = √(n+1) e(l,0). Its standard Stratonovich–Weyl symbol is Σ b_l P_l.
#[derive(Clone, Debug, PartialEq)]
pub struct J3Operator {
    pub n: usize,
    /// Sign and log-magnitude of b_0..b_n.
    pub b: Vec<SignedLog>,
}

impl J3Operator {
    pub fn new(n: usize, b: Vec<SignedLog>) -> Result<Self> {
        if b.len() != n + 1 {
            return domain(format!("J3 operator at level {n} needs {} coefficients, got {}", n + 1, b.len()));
        }
        Ok(J3Operator { n, b })
    }

    /// χ_l = b_l/√(2l+1), the coordinates in the ê(l,0) basis.
    pub fn chi(&self) -> Vec<f64> {
        self.b.iter().enumerate().map(|(l, b)| b.to_f64() / ((2 * l + 1) as f64).sqrt()).collect()
    }

    /// ln ‖F‖² with ‖F‖² = Σ b_l²/(2l+1), summed in log space.
    pub fn ln_norm_sq(&self) -> f64 {
        let logs: Vec<f64> =
            self.b.iter().enumerate().filter(|(_, b)| !b.is_zero()).map(|(l, b)| 2.0 * b.ln_abs - ((2 * l + 1) as f64).ln()).collect();
        let peak = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if peak == f64::NEG_INFINITY {
            return peak;
        }
        let mut s = NeumaierSum::default();
        for v in &logs {
            s.add((v - peak).exp());
        }
        peak + s.total().ln()
    }

    /// √⟨F|F⟩ with ⟨A|B⟩ = tr(A*B)/(n+1).
    pub fn normalized_norm(&self) -> f64 {
        (0.5 * self.ln_norm_sq()).exp()
    }

    /// Diagonal entry F_kk = Σ_l b_l E_l(k), 1 ≤ k ≤ n+1.
    pub fn diagonal_entry(&self, k: usize, precision: Precision) -> Result<f64> {
        let e = edmonds_factors(self.n, k, self.n, precision)?;
        let mut s = NeumaierSum::default();
        for (b, e) in self.b.iter().zip(&e) {
            if !b.is_zero() && !e.is_zero() {
                s.add((*b * *e).to_f64());
            }
        }
        Ok(s.total())
    }

    /// All diagonal entries, which are also the eigenvalues.
    pub fn diagonal(&self, precision: Precision) -> Result<Vec<f64>> {
        (1..=self.n + 1).into_par_iter().map(|k| self.diagonal_entry(k, precision)).collect()
    }

    /// Largest eigenvalue magnitude.
    pub fn operator_norm(&self, precision: Precision) -> Result<f64> {
        Ok(self.diagonal(precision)?.into_iter().map(f64::abs).fold(0.0, f64::max))
    }

    /// The W-symbol Σ b_l c_l P_l under a characteristic family.
    pub fn symbol(&self, family: &CharFamily) -> Result<LegendreCoeffs> {
        let c = family.signed_logs(self.n)?;
        Ok(LegendreCoeffs { a: self.b.iter().zip(&c).map(|(b, c)| (*b * *c).to_f64()).collect() })
    }

    /// Dense matrix form, through the cached coupled basis.
    pub fn to_matrix(&self) -> Result<OperatorMatrix> {
        let basis = CoupledBasis::get(self.n)?;
        let mut out = OperatorMatrix::zeros(self.n);
        let root = ((self.n + 1) as f64).sqrt();
        for (l, chi) in self.chi().into_iter().enumerate() {
            if chi != 0.0 {
                basis.accumulate(l, 0, num_complex::Complex64::new(chi * root, 0.0), &mut out.entries);
            }
        }
        Ok(out)
    }
}

/// Quantization of f = Σ a_l P_l at level n: b_l = a_l/c_l, or a_l·c_l for
/// the dual quantization.
pub fn quantize_ln_coeffs(family: &CharFamily, a: &[SignedLog], n: usize, dual: bool) -> Result<J3Operator> {
    if n == 0 {
        return domain("level n must be at least 1");
    }
    let c = family.signed_logs(n)?;
    let mut b = Vec::with_capacity(n + 1);
    for l in 0..=n {
        let al = a.get(l).copied().unwrap_or(SignedLog::ZERO);
        let v = if dual {
            al * c[l]
        } else if c[l].is_zero() {
            return Err(Error::Singular { n, l });
        } else {
            al / c[l]
        };
        b.push(if al.is_zero() { SignedLog::ZERO } else { v });
    }
    J3Operator::new(n, b)
}

/// W- or dual W-quantization of a test function at level n.
pub fn quantize(family: &CharFamily, f: &TestFunction, n: usize, dual: bool) -> Result<J3Operator> {
    quantize_ln_coeffs(family, &level_ln_coeffs(f, n)?, n, dual)
}

/// √⟨F|F⟩ of a J₃-invariant operator.
pub fn normalized_norm(f: &J3Operator) -> f64 {
    f.normalized_norm()
}

/// ‖f_n‖ for the degree-n truncation, computed by the same log-space sum.
pub fn truncated_norm(a: &[SignedLog], n: usize) -> f64 {
    let mut b: Vec<SignedLog> = a.iter().take(n + 1).copied().collect();
    b.resize(n + 1, SignedLog::ZERO);
    J3Operator { n, b }.normalized_norm()
}

/// Evidence-based classification of a sequence's tail.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CauchyVerdict {
    Cauchy,
    NonCauchy,
    Inconclusive,
}

/// Cauchy evidence from the steps d_i = |v_{i+1} − v_i| of a sequence.
pub fn tail_cauchy(values: &[f64], tol: f64) -> CauchyVerdict {
    if values.iter().any(|v| !v.is_finite()) {
        return CauchyVerdict::Inconclusive;
    }
    let d: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    step_verdict(&d, tol)
}

/// Over the last three steps: Cauchy when the last step is below `tol` or
/// each step is at most 0.9 times the one before; non-Cauchy when the last
/// step is at least `tol` and at least 0.9 times the one before.
pub fn step_verdict(steps: &[f64], tol: f64) -> CauchyVerdict {
    if steps.len() < 3 || steps.iter().any(|v| !v.is_finite()) {
        return CauchyVerdict::Inconclusive;
    }
    let tail = &steps[steps.len() - 3..];
    let last = tail[2];
    if last < tol || (tail[1] <= 0.9 * tail[0] && tail[2] <= 0.9 * tail[1]) {
        CauchyVerdict::Cauchy
    } else if last >= 0.9 * tail[1] {
        CauchyVerdict::NonCauchy
    } else {
        CauchyVerdict::Inconclusive
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NormVerdict {
    ConvergesTo { limit: f64 },
    UpperBounded,
    Unbounded,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormRow {
    pub n: usize,
    pub norm: f64,
    /// ‖f_n‖ of the degree-n truncation.
    pub truncated_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormSequenceReport {
    pub family: String,
    pub dual: bool,
    /// ‖f‖ = (½∫f²)^{1/2}.
    pub f_norm: f64,
    pub rows: Vec<NormRow>,
    pub liminf: f64,
    pub limsup: f64,
    pub verdict: NormVerdict,
    /// |‖F_N‖ − ‖f‖| at the last grid point.
    pub final_error: f64,
}

/// Norm sequence of the quantizations of f over a grid of levels.
pub fn asymptotic_norm_report(family: &CharFamily, f: &TestFunction, n_grid: &[usize], dual: bool) -> Result<NormSequenceReport> {
    let n_max = *n_grid.iter().max().ok_or_else(|| Error::Domain("empty level grid".into()))?;
    let a = level_ln_coeffs(f, n_max)?;
    let rows = n_grid
        .par_iter()
        .map(|&n| {
            let op = quantize_ln_coeffs(family, &a[..=n], n, dual)?;
            Ok(NormRow { n, norm: op.normalized_norm(), truncated_norm: truncated_norm(&a, n) })
        })
        .collect::<Result<Vec<_>>>()?;
    let values: Vec<f64> = rows.iter().map(|r| r.norm).collect();
    let tail = &values[values.len().saturating_sub(3)..];
    let liminf = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let limsup = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let f_norm = f.norm_sq()?.sqrt();
    Ok(NormSequenceReport {
        family: family.name(),
        dual,
        f_norm,
        liminf,
        limsup,
        verdict: norm_verdict(&values),
        final_error: (values[values.len() - 1] - f_norm).abs(),
        rows,
    })
}

/// Converged when the last three values agree to [`NORM_CAUCHY_TOL`]
/// (relative above 1); unbounded when each of the last three steps grows the
/// value by more than 1; upper bounded when the steps shrink.
pub fn norm_verdict(values: &[f64]) -> NormVerdict {
    if values.len() >= 3 {
        let tail = &values[values.len() - 3..];
        let scale = tail.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let spread = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max) - tail.iter().copied().fold(f64::INFINITY, f64::min);
        if spread.is_finite() && spread < NORM_CAUCHY_TOL * scale {
            return NormVerdict::ConvergesTo { limit: tail[2] };
        }
    }
    if values.len() >= 4 {
        let steps: Vec<f64> = values[values.len() - 4..].windows(2).map(|w| w[1] - w[0]).collect();
        if steps.iter().all(|s| *s > 1.0) || values[values.len() - 1] == f64::INFINITY {
            return NormVerdict::Unbounded;
        }
    }
    match tail_cauchy(values, NORM_CAUCHY_TOL) {
        CauchyVerdict::Cauchy => NormVerdict::UpperBounded,
        _ => NormVerdict::Inconclusive,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpectationRow {
    pub n: usize,
    pub k: usize,
    /// ⟨Π_k|F̃_n⟩ with the unnormalized trace pairing, which equals ∫f ρ_k.
    pub expectation_re: f64,
    pub expectation_im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpectationReport {
    pub family: String,
    pub r: f64,
    pub rows: Vec<ExpectationRow>,
    pub verdict: CauchyVerdict,
    pub limit_estimate: f64,
    /// f(1 − 2r) and f(2r − 1).
    pub target_localize: f64,
    pub target_anti: f64,
    /// Which target the last value is closer to, when the sequence is Cauchy.
    pub matches: Option<Orientation>,
    pub warnings: Vec<String>,
}

/// ⟨Π_{k_n}|F̃_n⟩ over a grid, with F̃_n the dual quantization of f.
pub fn classical_expectation(family: &CharFamily, rule: &PiRule, f: &TestFunction, n_grid: &[usize]) -> Result<ExpectationReport> {
    classical_expectation_with(family, rule, f, n_grid, EXPECTATION_TOL)
}

pub fn classical_expectation_with(
    family: &CharFamily,
    rule: &PiRule,
    f: &TestFunction,
    n_grid: &[usize],
    tol: f64,
) -> Result<ExpectationReport> {
    let n_max = *n_grid.iter().max().ok_or_else(|| Error::Domain("empty level grid".into()))?;
    let a = level_ln_coeffs(f, n_max)?;
    let rows = n_grid
        .par_iter()
        .map(|&n| {
            let k = rule.k(n);
            let op = quantize_ln_coeffs(family, &a[..=n], n, true)?;
            Ok(ExpectationRow { n, k, expectation_re: op.diagonal_entry(k, Precision::Auto)?, expectation_im: 0.0 })
        })
        .collect::<Result<Vec<_>>>()?;
    let values: Vec<f64> = rows.iter().map(|r| r.expectation_re).collect();
    let verdict = tail_cauchy(&values, tol);
    let last = values[values.len() - 1];
    let target_localize = f.eval(Orientation::Localize.target(rule));
    let target_anti = f.eval(Orientation::AntiLocalize.target(rule));
    let matches = (verdict == CauchyVerdict::Cauchy).then(|| {
        if (last - target_localize).abs() <= (last - target_anti).abs() {
            Orientation::Localize
        } else {
            Orientation::AntiLocalize
        }
    });
    let mut warnings = Vec::new();
    let c1 = family.value(n_max, 1)?;
    if (c1.abs() - 1.0).abs() > 0.05 {
        warnings.push(format!("c_1 = {c1:.4} at n = {n_max} is far from ±1; the family does not look Poisson or anti-Poisson"));
    }
    Ok(ExpectationReport {
        family: family.name(),
        r: rule.r,
        rows,
        verdict,
        limit_estimate: last,
        target_localize,
        target_anti,
        matches,
        warnings,
    })
}

/// (⟨P|Q⟩, ⟨W̃_P|W_Q⟩) for real diagonal P, Q: the normalized trace pairing
/// and the L² pairing of the dual symbol of P with the symbol of Q.
pub fn duality_pairing(p: &[f64], q: &[f64], family: &CharFamily) -> Result<(f64, f64)> {
    if p.len() != q.len() || p.is_empty() {
        return domain("pairing needs two diagonals of equal, nonzero length");
    }
    let n = p.len() - 1;
    let c = family.char_numbers(n)?;
    let dual: Vec<f64> = c.iter().map(|v| 1.0 / v).collect();
    if dual.iter().any(|v| !v.is_finite()) {
        let l = c.iter().position(|v| *v == 0.0).unwrap_or(0);
        return Err(Error::Singular { n, l });
    }
    let wp = crate::symbols::diagonal_symbol(p, &dual)?;
    let wq = crate::symbols::diagonal_symbol(q, &c)?;
    let lhs = p.iter().zip(q).map(|(x, y)| x * y).sum::<f64>() / (n + 1) as f64;
    let rhs = wp.a.iter().zip(&wq.a).enumerate().map(|(l, (x, y))| x * y / (2 * l + 1) as f64).sum();
    Ok((lhs, rhs))
}
