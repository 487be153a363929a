//! Integer-spin states as modified Fourier coefficients on the equator,
//! with the nesting u(j,m) ↦ u(j',m) and asymptotic diagnostics.

use std::collections::BTreeMap;

use num_complex::Complex64;
use parking_lot::Mutex;
use serde::Serialize;

use crate::catalog::{CharFamily, Verdict};
use crate::error::{domain, Result};
use crate::localization::TestFunction;
use crate::quantization::{asymptotic_norm_report, step_verdict, tail_cauchy, CauchyVerdict, J3Operator, NormSequenceReport, NormVerdict};
use crate::spin_algebra::{ln_factorial, Precision};
use crate::symbols::{inverse_symbol, HarmonicCoeffs, OperatorMatrix};

/// Default tolerance of the Cauchy tests in [`convergence_diagnostics`].
pub const GROUND_TOL: f64 = 1e-8;

/// φ^j(θ) = j! Σ_m α_m e^{imθ}/√((j−m)!(j+m)!), stored as α_{−j..j}.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FourierState {
    pub j: usize,
    pub alpha: Vec<Complex64>,
}

impl FourierState {
    pub fn new(j: usize, alpha: Vec<Complex64>) -> Result<Self> {
        if alpha.len() != 2 * j + 1 {
            return domain(format!("state at j = {j} needs {} coefficients, got {}", 2 * j + 1, alpha.len()));
        }
        if alpha.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return domain("state has non-finite coefficients");
        }
        Ok(FourierState { j, alpha })
    }

    pub fn zero(j: usize) -> Self {
        FourierState { j, alpha: vec![Complex64::new(0.0, 0.0); 2 * j + 1] }
    }

    /// The basis state u(j,m).
    pub fn basis(j: usize, m: i64) -> Result<Self> {
        let mut s = Self::zero(j);
        *s.coeff_mut(m)? = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    /// Builds α_m = g(m) for |m| ≤ j.
    pub fn from_fn(j: usize, g: impl Fn(i64) -> Complex64) -> Result<Self> {
        Self::new(j, (-(j as i64)..=j as i64).map(g).collect())
    }

    fn index(&self, m: i64) -> Option<usize> {
        (m.unsigned_abs() as usize <= self.j).then(|| (m + self.j as i64) as usize)
    }

    /// α_m, zero outside |m| ≤ j.
    pub fn coeff(&self, m: i64) -> Complex64 {
        self.index(m).map_or(Complex64::new(0.0, 0.0), |i| self.alpha[i])
    }

    pub fn coeff_mut(&mut self, m: i64) -> Result<&mut Complex64> {
        match self.index(m) {
            Some(i) => Ok(&mut self.alpha[i]),
            None => domain(format!("m = {m} outside |m| <= {}", self.j)),
        }
    }

    pub fn norm_sq(&self) -> f64 {
        self.alpha.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// ⟨self|other⟩ after nesting both into the larger space.
    pub fn inner(&self, other: &Self) -> Complex64 {
        let top = self.j.min(other.j) as i64;
        (-top..=top).map(|m| self.coeff(m).conj() * other.coeff(m)).sum()
    }

    /// (j!)² Σ |α_m|²/((j−m)!(j+m)!), the squared ℓ² norm of the plain
    /// Fourier coefficients.
    pub fn fourier_norm_sq(&self) -> f64 {
        let j = self.j as i64;
        (-j..=j).map(|m| self.coeff(m).norm_sqr() * fourier_weight(self.j, m).powi(2)).sum()
    }

    /// φ^j(θ).
    pub fn eval(&self, theta: f64) -> Complex64 {
        let j = self.j as i64;
        (-j..=j).map(|m| self.coeff(m) * fourier_weight(self.j, m) * Complex64::from_polar(1.0, m as f64 * theta)).sum()
    }
}

/// j!/√((j−m)!(j+m)!).
fn fourier_weight(j: usize, m: i64) -> f64 {
    let (a, b) = ((j as i64 - m) as usize, (j as i64 + m) as usize);
    (ln_factorial(j) - 0.5 * (ln_factorial(a) + ln_factorial(b))).exp()
}

/// ι_j^{j'}: same α on |m| ≤ j, zero on the new range.
pub fn nest(state: &FourierState, j_to: usize) -> Result<FourierState> {
    if j_to < state.j {
        return domain(format!("cannot nest j = {} into smaller j' = {j_to}", state.j));
    }
    let mut out = FourierState::zero(j_to);
    let pad = j_to - state.j;
    out.alpha[pad..pad + state.alpha.len()].copy_from_slice(&state.alpha);
    Ok(out)
}

/// ‖φ − ψ‖ after nesting the lower state up.
pub fn nested_distance(phi: &FourierState, psi: &FourierState) -> f64 {
    let top = phi.j.max(psi.j) as i64;
    (-top..=top).map(|m| (phi.coeff(m) - psi.coeff(m)).norm_sqr()).sum::<f64>().sqrt()
}

/// β = Fα for an operator at level n = 2j, whose rows run over
/// descending m.
pub fn apply_operator(op: &OperatorMatrix, state: &FourierState) -> Result<FourierState> {
    if op.n != 2 * state.j {
        return domain(format!("operator at level {} cannot act at j = {}", op.n, state.j));
    }
    let j = state.j as i64;
    FourierState::from_fn(state.j, |m| {
        let p = (j - m) as usize;
        (-j..=j).map(|mp| op.entries[(p, (j - mp) as usize)] * state.coeff(mp)).sum()
    })
}

/// β_m = F_kk α_m with k = j − m + 1.
pub fn apply_j3_operator(op: &J3Operator, state: &FourierState, precision: Precision) -> Result<FourierState> {
    if op.n != 2 * state.j {
        return domain(format!("operator at level {} cannot act at j = {}", op.n, state.j));
    }
    let d = op.diagonal(precision)?;
    let j = state.j as i64;
    FourierState::from_fn(state.j, |m| state.coeff(m) * d[(j - m) as usize])
}

/// u(j,m) ↦ m·u(j,m).
pub fn j3_action(state: &FourierState) -> FourierState {
    let j = state.j as i64;
    FourierState { j: state.j, alpha: (-j..=j).map(|m| state.coeff(m) * m as f64).collect() }
}

/// The quantization of f at n = 2j acting on a state: the operator
/// [W^j]^{-1}(f), or the dual one with c_l replaced by 1/c_l.
pub fn operator_action(f: &HarmonicCoeffs, family: &CharFamily, state: &FourierState, dual: bool) -> Result<FourierState> {
    let n = 2 * state.j;
    if n == 0 {
        return domain("operator action needs j >= 1");
    }
    let mut c = family.char_numbers(n)?;
    if dual {
        c = c.iter().map(|v| 1.0 / v).collect();
    }
    let mut g = HarmonicCoeffs::zeros(n);
    let shared = (f.n.min(n) + 1).pow(2);
    g.a[..shared].copy_from_slice(&f.a[..shared]);
    apply_operator(&inverse_symbol(&g, &c)?, state)
}

type StateFn = Box<dyn Fn(usize) -> Result<FourierState> + Send + Sync>;

/// A lazily evaluated sequence j ↦ φ^j, memoized.
pub struct StateSequence {
    make: StateFn,
    cache: Mutex<BTreeMap<usize, FourierState>>,
}

impl StateSequence {
    pub fn new(make: impl Fn(usize) -> Result<FourierState> + Send + Sync + 'static) -> Self {
        StateSequence { make: Box::new(make), cache: Mutex::new(BTreeMap::new()) }
    }

    /// The constant sequence of nestings of one state.
    pub fn constant(state: FourierState) -> Self {
        Self::new(move |j| nest(&state, j))
    }

    pub fn at(&self, j: usize) -> Result<FourierState> {
        if let Some(s) = self.cache.lock().get(&j) {
            return Ok(s.clone());
        }
        let s = (self.make)(j)?;
        if s.j != j {
            return domain(format!("sequence returned j = {} for j = {j}", s.j));
        }
        self.cache.lock().insert(j, s.clone());
        Ok(s)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GroundRow {
    pub j: usize,
    pub norm: f64,
    /// (j!)² Σ|α_m|²/((j−m)!(j+m)!).
    pub fourier_norm_sq: f64,
    /// Σ_{|m| ≤ j₀} |α_m|² on the window of the first grid point.
    pub window_mass: f64,
    /// Nested distance to the previous grid state.
    pub step: Option<f64>,
    /// Largest coefficient change on the window since the previous grid state.
    pub coeff_step: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub rows: Vec<GroundRow>,
    /// α_m on the window at the last grid point, as (m, Re, Im).
    pub coefficient_limits: Vec<(i64, f64, f64)>,
    pub coefficient_verdict: CauchyVerdict,
    pub norm_verdict: CauchyVerdict,
    pub nested_verdict: CauchyVerdict,
    /// Coefficients settle and norms settle, but the states are not Cauchy
    /// in the nested norm: the coefficientwise limit loses norm.
    pub norm_discontinuous: bool,
    /// |Σ|β|² weighted − Σ|β|²| at each grid point.
    pub tannery_gaps: Vec<f64>,
}

/// Cauchy diagnostics of a state sequence over an ascending grid of j.
pub fn convergence_diagnostics(seq: &StateSequence, j_grid: &[usize]) -> Result<ConvergenceReport> {
    if j_grid.is_empty() || j_grid.windows(2).any(|w| w[1] <= w[0]) {
        return domain("j grid must be nonempty and strictly ascending");
    }
    let window = j_grid[0] as i64;
    let states = j_grid.iter().map(|&j| seq.at(j)).collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(states.len());
    for (i, s) in states.iter().enumerate() {
        let prev = i.checked_sub(1).map(|p| &states[p]);
        rows.push(GroundRow {
            j: s.j,
            norm: s.norm(),
            fourier_norm_sq: s.fourier_norm_sq(),
            window_mass: (-window..=window).map(|m| s.coeff(m).norm_sqr()).sum(),
            step: prev.map(|p| nested_distance(p, s)),
            coeff_step: prev.map(|p| (-window..=window).map(|m| (s.coeff(m) - p.coeff(m)).norm()).fold(0.0, f64::max)),
        });
    }
    let last = &states[states.len() - 1];
    let steps: Vec<f64> = rows.iter().filter_map(|r| r.step).collect();
    let coeff_steps: Vec<f64> = rows.iter().filter_map(|r| r.coeff_step).collect();
    let norms: Vec<f64> = rows.iter().map(|r| r.norm).collect();
    let coefficient_verdict = step_verdict(&coeff_steps, GROUND_TOL);
    let norm_verdict = tail_cauchy(&norms, GROUND_TOL);
    let nested_verdict = step_verdict(&steps, GROUND_TOL);
    Ok(ConvergenceReport {
        coefficient_limits: (-window..=window).map(|m| (m, last.coeff(m).re, last.coeff(m).im)).collect(),
        norm_discontinuous: coefficient_verdict == CauchyVerdict::Cauchy
            && norm_verdict == CauchyVerdict::Cauchy
            && nested_verdict == CauchyVerdict::NonCauchy,
        coefficient_verdict,
        norm_verdict,
        nested_verdict,
        tannery_gaps: states.iter().map(|s| (s.fourier_norm_sq() - s.norm_sq()).abs()).collect(),
        rows,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct UpperBoundReport {
    /// True when the norm sequence converges or its steps shrink, false when
    /// it grows without bound.
    pub upper_bounded: Verdict,
    pub norms: NormSequenceReport,
}

/// Upper-boundedness of the normalized norms of the quantizations of f, a
/// necessary condition for the sequence to act on the ground space.
pub fn upper_bounded_check(family: &CharFamily, f: &TestFunction, n_grid: &[usize], dual: bool) -> Result<UpperBoundReport> {
    let norms = asymptotic_norm_report(family, f, n_grid, dual)?;
    let upper_bounded = match norms.verdict {
        NormVerdict::ConvergesTo { .. } | NormVerdict::UpperBounded => Verdict::True,
        NormVerdict::Unbounded => Verdict::False,
        NormVerdict::Inconclusive => Verdict::Inconclusive,
    };
    Ok(UpperBoundReport { upper_bounded, norms })
}
