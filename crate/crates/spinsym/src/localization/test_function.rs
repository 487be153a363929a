use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spin_algebra::{gauss_legendre, legendre_all, ln_factorial, SignedLog};

/// Largest change tolerated between a quadrature and its node-doubled rerun.
pub const QUADRATURE_TOL: f64 = 1e-12;

/// Smooth functions on [−1, 1] with computable Legendre coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunction {
    /// P_l.
    Legendre { l: usize },
    /// Σ coeffs[i] zⁱ.
    Poly { coeffs: Vec<f64> },
    /// e^{scale·z}.
    Exp {
        #[serde(default = "one")]
        scale: f64,
    },
    /// 1/(c − z) with |c| > 1.
    RungePole { c: f64 },
    Named { name: NamedSmooth },
    /// z ↦ inner(−z).
    Reflected { inner: Box<TestFunction> },
}

fn one() -> f64 {
    1.0
}

/// Entire functions whose coefficients come from quadrature.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedSmooth {
    /// e^{−z²}
    Gaussian,
    /// cos(πz)
    CosPi,
}

/// Legendre coefficients a_0..a_L of a function on [−1, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct LegendreCoeffs {
    pub a: Vec<f64>,
}

impl LegendreCoeffs {
    pub fn degree(&self) -> usize {
        self.a.len().saturating_sub(1)
    }

    /// Σ a_l P_l(z) by Clenshaw's recurrence.
    pub fn eval(&self, z: f64) -> f64 {
        let (mut b1, mut b2) = (0.0, 0.0);
        for l in (0..self.a.len()).rev() {
            let lf = l as f64;
            let alpha = (2.0 * lf + 1.0) / (lf + 1.0) * z;
            let beta = (lf + 1.0) / (lf + 2.0);
            let b0 = self.a[l] + alpha * b1 - beta * b2;
            b2 = b1;
            b1 = b0;
        }
        b1
    }

    /// ½∫|Σ a_l P_l|² = Σ |a_l|²/(2l+1).
    pub fn norm_sq(&self) -> f64 {
        self.a.iter().enumerate().map(|(l, a)| a * a / (2 * l + 1) as f64).sum()
    }
}

impl TestFunction {
    pub fn exp() -> Self {
        TestFunction::Exp { scale: 1.0 }
    }

    pub fn reflected(&self) -> Self {
        match self {
            TestFunction::Reflected { inner } => (**inner).clone(),
            other => TestFunction::Reflected { inner: Box::new(other.clone()) },
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            TestFunction::RungePole { c } if !(c.abs() > 1.0) || !c.is_finite() => {
                Err(Error::Invalid(format!("pole {c} must lie outside [-1, 1]")))
            }
            TestFunction::Exp { scale } if !scale.is_finite() || *scale == 0.0 => {
                Err(Error::Invalid("exponential scale must be finite and nonzero".into()))
            }
            TestFunction::Poly { coeffs } if coeffs.iter().any(|c| !c.is_finite()) => {
                Err(Error::Invalid("polynomial coefficients must be finite".into()))
            }
            TestFunction::Reflected { inner } => inner.validate(),
            _ => Ok(()),
        }
    }

    pub fn eval(&self, z: f64) -> f64 {
        match self {
            TestFunction::Legendre { l } => legendre_all(*l, z.clamp(-1.0, 1.0)).map(|v| v[*l]).unwrap_or(f64::NAN),
            TestFunction::Poly { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * z + c),
            TestFunction::Exp { scale } => (scale * z).exp(),
            TestFunction::RungePole { c } => 1.0 / (c - z),
            TestFunction::Named { name } => match name {
                NamedSmooth::Gaussian => (-z * z).exp(),
                NamedSmooth::CosPi => (std::f64::consts::PI * z).cos(),
            },
            TestFunction::Reflected { inner } => inner.eval(-z),
        }
    }

    /// Polynomial degree, if the function is a polynomial.
    pub fn degree(&self) -> Option<usize> {
        match self {
            TestFunction::Legendre { l } => Some(*l),
            TestFunction::Poly { coeffs } => Some(coeffs.iter().rposition(|c| *c != 0.0).unwrap_or(0)),
            TestFunction::Reflected { inner } => inner.degree(),
            _ => None,
        }
    }

    /// True when ln|a_l| is available in closed form for every l.
    pub fn has_analytic_coeffs(&self) -> bool {
        match self {
            TestFunction::Exp { .. } | TestFunction::RungePole { .. } => true,
            TestFunction::Legendre { .. } | TestFunction::Poly { .. } => true,
            TestFunction::Named { .. } => false,
            TestFunction::Reflected { inner } => inner.has_analytic_coeffs(),
        }
    }

    /// ‖f‖² = ½∫_{−1}^{1} |f|².
    pub fn norm_sq(&self) -> Result<f64> {
        match self {
            TestFunction::Exp { scale } => Ok((2.0 * scale).sinh() / (2.0 * scale)),
            TestFunction::RungePole { c } => Ok(1.0 / (c * c - 1.0)),
            TestFunction::Reflected { inner } => inner.norm_sq(),
            _ => {
                let (x, w) = gauss_legendre(400);
                Ok(0.5 * x.iter().zip(&w).map(|(x, w)| w * self.eval(*x).powi(2)).sum::<f64>())
            }
        }
    }

    /// Sign and log-magnitude of a_0..a_L.
    pub fn ln_coeffs(&self, l_max: usize) -> Result<Vec<SignedLog>> {
        self.validate()?;
        match self {
            TestFunction::Exp { scale } => Ok((0..=l_max).map(|l| exp_coeff(*scale, l)).collect()),
            TestFunction::RungePole { c } => Ok(runge_coeffs(*c, l_max)),
            TestFunction::Reflected { inner } => Ok(inner
                .ln_coeffs(l_max)?
                .into_iter()
                .enumerate()
                .map(|(l, v)| if l % 2 == 1 { -v } else { v })
                .collect()),
            _ => Ok(self.coeffs(l_max)?.a.into_iter().map(SignedLog::from_f64).collect()),
        }
    }

    /// a_0..a_L, in closed form where available and by Gauss-Legendre
    /// quadrature otherwise.
    pub fn coeffs(&self, l_max: usize) -> Result<LegendreCoeffs> {
        self.validate()?;
        match self {
            TestFunction::Legendre { l } => {
                let mut a = vec![0.0; l_max + 1];
                if *l <= l_max {
                    a[*l] = 1.0;
                }
                Ok(LegendreCoeffs { a })
            }
            TestFunction::Poly { .. } => {
                let deg = self.degree().unwrap_or(0);
                let mut a = quadrature_coeffs(self, deg.min(l_max), deg + 2);
                a.resize(l_max + 1, 0.0);
                Ok(LegendreCoeffs { a })
            }
            TestFunction::Exp { .. } | TestFunction::RungePole { .. } | TestFunction::Reflected { .. } => {
                Ok(LegendreCoeffs { a: self.ln_coeffs(l_max)?.into_iter().map(SignedLog::to_f64).collect() })
            }
            TestFunction::Named { .. } => legendre_coeffs_quadrature(self, l_max),
        }
    }

    /// Smallest L whose coefficient tail Σ_{l>L} |a_l| is below `tol`,
    /// capped at `cap`.
    pub fn adaptive_degree(&self, tol: f64, cap: usize) -> Result<usize> {
        if let Some(d) = self.degree() {
            return Ok(d.min(cap));
        }
        let probe = (cap + 64).min(cap.max(64) * 2);
        let lc = self.ln_coeffs(probe)?;
        let mut tail = 0.0;
        for l in (0..=probe).rev() {
            tail += lc[l].abs().to_f64();
            if tail >= tol {
                return Ok(l.min(cap));
            }
        }
        Ok(0)
    }
}

/// a_l = (2l+1)/2 ∫ f P_l by Gauss-Legendre quadrature with at least L + 32
/// nodes, accepted once doubling the node count moves no coefficient by
/// more than [`QUADRATURE_TOL`].
pub fn legendre_coeffs_quadrature(f: &TestFunction, l_max: usize) -> Result<LegendreCoeffs> {
    let mut nodes = l_max + 32;
    let mut prev = quadrature_coeffs(f, l_max, nodes);
    for _ in 0..4 {
        nodes *= 2;
        let next = quadrature_coeffs(f, l_max, nodes);
        let change = prev.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if change <= QUADRATURE_TOL {
            return Ok(LegendreCoeffs { a: next });
        }
        prev = next;
    }
    Err(Error::Quadrature(format!("coefficients up to l = {l_max} still moving at {nodes} nodes")))
}

fn quadrature_coeffs(f: &TestFunction, l_max: usize, nodes: usize) -> Vec<f64> {
    let (x, w) = gauss_legendre(nodes);
    let mut a = vec![0.0; l_max + 1];
    for (xi, wi) in x.iter().zip(&w) {
        let fx = f.eval(*xi) * wi;
        let p = legendre_all(l_max, *xi).expect("nodes lie in [-1, 1]");
        for (al, pl) in a.iter_mut().zip(&p) {
            *al += fx * pl;
        }
    }
    for (l, al) in a.iter_mut().enumerate() {
        *al *= (2 * l + 1) as f64 / 2.0;
    }
    a
}

/// a_l of e^{sz}: (2l+1) i_l(s) with the modified spherical Bessel series
/// i_l(x) = x^l/(2l+1)!! Σ_k (x²/2)^k / (k! (2l+3)(2l+5)…(2l+2k+1)).
fn exp_coeff(s: f64, l: usize) -> SignedLog {
    let x = s.abs();
    let half_x2 = x * x / 2.0;
    let (mut term, mut sum) = (1.0f64, 1.0f64);
    for k in 1..200 {
        term *= half_x2 / (k as f64 * (2 * l + 2 * k + 1) as f64);
        sum += term;
        if term < sum * 1e-18 {
            break;
        }
    }
    // ln (2l+1)!! = ln (2l+1)! − l ln 2 − ln l!
    let ln_dfact = ln_factorial(2 * l + 1) - l as f64 * std::f64::consts::LN_2 - ln_factorial(l);
    let ln_abs = ((2 * l + 1) as f64).ln() + l as f64 * x.ln() - ln_dfact + sum.ln();
    let sign = if s < 0.0 && l % 2 == 1 { -1 } else { 1 };
    SignedLog::new(sign, ln_abs)
}

/// a_l of 1/(c − z) = Σ (2l+1) Q_l(c) P_l(z) (Neumann), with the ratios
/// Q_l/Q_{l−1} from the backward continued fraction.
fn runge_coeffs(c: f64, l_max: usize) -> Vec<SignedLog> {
    let x = c.abs();
    let mu = x + (x * x - 1.0).sqrt();
    let start = l_max + 60 + (40.0 / mu.ln().max(1e-3)) as usize;
    // r_l = Q_l/Q_{l−1} = l / ((2l+1)x − (l+1) r_{l+1})
    let mut ratios = vec![0.0; l_max + 1];
    let mut r = 1.0 / mu;
    for l in (1..=start).rev() {
        r = l as f64 / ((2 * l + 1) as f64 * x - (l + 1) as f64 * r);
        if l <= l_max {
            ratios[l] = r;
        }
    }
    let q0 = 0.5 * (2.0 / (x - 1.0)).ln_1p();
    let mut ln_q = q0.ln();
    let mut out = Vec::with_capacity(l_max + 1);
    for (l, ratio) in ratios.iter().enumerate() {
        if l > 0 {
            ln_q += ratio.ln();
        }
        // 1/(c − z) = −1/(|c| + z) for c < −1, i.e. minus the reflection
        let sign = if c > 0.0 { 1 } else if l % 2 == 0 { -1 } else { 1 };
        out.push(SignedLog::new(sign, ((2 * l + 1) as f64).ln() + ln_q));
    }
    out
}
