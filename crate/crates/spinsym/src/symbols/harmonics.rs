use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::basis::lm_index;
use crate::error::{domain, Result};
use crate::localization::LegendreCoeffs;
use crate::spin_algebra::gauss_legendre;

/// Index of p̄_l^m (m ≥ 0) in a triangular table.
fn tri(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

/// Orthonormal associated Legendre functions p̄_l^m(z) for 0 ≤ m ≤ l ≤ l_max,
/// with the Condon–Shortley phase and ½∫(p̄_l^m)² dz = 1. Entry (l, m) sits
/// at l(l+1)/2 + m.
pub fn normalized_assoc_legendre(l_max: usize, z: f64) -> Vec<f64> {
    let mut p = vec![0.0; tri(l_max, l_max) + 1];
    let s = (1.0 - z * z).max(0.0).sqrt();
    let mut pmm = 1.0;
    for m in 0..=l_max {
        if m > 0 {
            let mf = m as f64;
            pmm *= -s * ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt();
        }
        p[tri(m, m)] = pmm;
        if m < l_max {
            p[tri(m + 1, m)] = (2.0 * m as f64 + 3.0).sqrt() * z * pmm;
        }
        for l in m + 2..=l_max {
            let (lf, mf) = (l as f64, m as f64);
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
            p[tri(l, m)] = a * (z * p[tri(l - 1, m)] - b * p[tri(l - 2, m)]);
        }
    }
    p
}

/// d p̄_l^m / dz for |z| < 1, same layout as [`normalized_assoc_legendre`].
pub fn normalized_assoc_legendre_dz(l_max: usize, z: f64, p: &[f64]) -> Vec<f64> {
    let mut d = vec![0.0; p.len()];
    let denom = 1.0 - z * z;
    for m in 0..=l_max {
        for l in m..=l_max {
            let (lf, mf) = (l as f64, m as f64);
            let lower = if l > m {
                ((2.0 * lf + 1.0) * (lf - mf) * (lf + mf) / (2.0 * lf - 1.0)).sqrt() * p[tri(l - 1, m)]
            } else {
                0.0
            };
            d[tri(l, m)] = (-lf * z * p[tri(l, m)] + lower) / denom;
        }
    }
    d
}

/// Y_l^m(z, θ) with Y_0^0 = 1 and ⟨Y_l^m|Y_l^m⟩ = 1 under the 1/4π measure.
/// Y_l^{−m} = (−1)^m conj(Y_l^m).
pub fn ylm(l: usize, m: i64, z: f64, theta: f64) -> Complex64 {
    let mu = m.unsigned_abs() as usize;
    if mu > l {
        return Complex64::new(0.0, 0.0);
    }
    let p = normalized_assoc_legendre(l, z)[tri(l, mu)];
    let sign = if m < 0 && mu % 2 == 1 { -1.0 } else { 1.0 };
    Complex64::from_polar(sign * p, m as f64 * theta)
}

/// Sampling grid on the sphere: Gauss–Legendre nodes in z times uniform θ.
#[derive(Clone, Debug)]
pub struct SphereGrid {
    pub z: Vec<f64>,
    pub weights: Vec<f64>,
    pub theta: Vec<f64>,
}

impl SphereGrid {
    pub fn new(nz: usize, ntheta: usize) -> Self {
        let (z, weights) = gauss_legendre(nz);
        let theta = (0..ntheta).map(|i| 2.0 * std::f64::consts::PI * i as f64 / ntheta as f64).collect();
        SphereGrid { z, weights, theta }
    }

    pub fn len(&self) -> usize {
        self.z.len() * self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Mean over the sphere of samples laid out z-major.
    pub fn mean(&self, values: &[Complex64]) -> Complex64 {
        let nt = self.theta.len();
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, w) in self.weights.iter().enumerate() {
            let row: Complex64 = values[i * nt..(i + 1) * nt].iter().sum();
            acc += row * (0.5 * w / nt as f64);
        }
        acc
    }
}

impl Default for SphereGrid {
    fn default() -> Self {
        SphereGrid::new(64, 64)
    }
}

/// Samples of a function and its z- and θ-derivatives on a grid, z-major.
#[derive(Clone, Debug)]
pub struct GridSamples {
    pub value: Vec<Complex64>,
    pub dz: Vec<Complex64>,
    pub dtheta: Vec<Complex64>,
}

/// Coefficients a_l^m of Σ a_l^m Y_l^m, 0 ≤ l ≤ n, stored at l² + l + m.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HarmonicCoeffs {
    pub n: usize,
    pub a: Vec<Complex64>,
}

impl HarmonicCoeffs {
    pub fn zeros(n: usize) -> Self {
        HarmonicCoeffs { n, a: vec![Complex64::new(0.0, 0.0); (n + 1) * (n + 1)] }
    }

    /// The constant function 1.
    pub fn one(n: usize) -> Self {
        let mut out = Self::zeros(n);
        out.a[0] = Complex64::new(1.0, 0.0);
        out
    }

    /// The single harmonic Y_l^m at level n.
    pub fn unit(n: usize, l: usize, m: i64) -> Result<Self> {
        let mut out = Self::zeros(n);
        out.set(l, m, Complex64::new(1.0, 0.0))?;
        Ok(out)
    }

    /// Zonal function Σ b_l P_l(z), truncated to degree n.
    pub fn from_legendre(n: usize, f: &LegendreCoeffs) -> Self {
        let mut out = Self::zeros(n);
        for (l, b) in f.a.iter().enumerate().take(n + 1) {
            out.a[lm_index(l, 0)] = Complex64::new(b / ((2 * l + 1) as f64).sqrt(), 0.0);
        }
        out
    }

    fn check(&self, l: usize, m: i64) -> Result<usize> {
        if l > self.n || m.unsigned_abs() as usize > l {
            return domain(format!("(l, m) = ({l}, {m}) outside level {}", self.n));
        }
        Ok(lm_index(l, m))
    }

    pub fn get(&self, l: usize, m: i64) -> Result<Complex64> {
        Ok(self.a[self.check(l, m)?])
    }

    pub fn set(&mut self, l: usize, m: i64, v: Complex64) -> Result<()> {
        let i = self.check(l, m)?;
        self.a[i] = v;
        Ok(())
    }

    /// Spherical mean, which is a_0^0.
    pub fn mean(&self) -> Complex64 {
        self.a[0]
    }

    /// The m = 0 part as Legendre coefficients b_l = a_l^0·√(2l+1).
    pub fn zonal_legendre(&self) -> LegendreCoeffs {
        LegendreCoeffs { a: (0..=self.n).map(|l| self.a[lm_index(l, 0)].re * ((2 * l + 1) as f64).sqrt()).collect() }
    }

    /// Coefficients of the complex conjugate function.
    pub fn conj(&self) -> Self {
        let mut out = Self::zeros(self.n);
        for l in 0..=self.n {
            for m in -(l as i64)..=(l as i64) {
                let sign = if m.rem_euclid(2) == 1 { -1.0 } else { 1.0 };
                out.a[lm_index(l, -m)] = self.a[lm_index(l, m)].conj() * sign;
            }
        }
        out
    }

    /// Largest violation of a_l^{−m} = (−1)^m conj(a_l^m).
    pub fn reality_defect(&self) -> f64 {
        let c = self.conj();
        self.a.iter().zip(&c.a).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.a.iter().zip(&other.a).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        HarmonicCoeffs { n: self.n, a: self.a.iter().map(|x| x * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        HarmonicCoeffs { n: self.n, a: self.a.iter().zip(&other.a).map(|(x, y)| x + y).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        HarmonicCoeffs { n: self.n, a: self.a.iter().zip(&other.a).map(|(x, y)| x - y).collect() }
    }

    /// Value at (z, θ).
    pub fn eval(&self, z: f64, theta: f64) -> Complex64 {
        let p = normalized_assoc_legendre(self.n, z);
        self.eval_row(&p, theta)
    }

    fn eval_row(&self, p: &[f64], theta: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for m in -(self.n as i64)..=(self.n as i64) {
            let mu = m.unsigned_abs() as usize;
            let sign = if m < 0 && mu % 2 == 1 { -1.0 } else { 1.0 };
            let mut s = Complex64::new(0.0, 0.0);
            for l in mu..=self.n {
                s += self.a[lm_index(l, m)] * p[tri(l, mu)];
            }
            acc += s * Complex64::from_polar(sign, m as f64 * theta);
        }
        acc
    }

    /// Values on a grid, z-major.
    pub fn eval_grid(&self, grid: &SphereGrid) -> Vec<Complex64> {
        self.sample(grid, false).value
    }

    /// Values and first derivatives on a grid, z-major. Rows are evaluated
    /// in parallel.
    pub fn sample(&self, grid: &SphereGrid, derivatives: bool) -> GridSamples {
        let n = self.n;
        let rows: Vec<(Vec<Complex64>, Vec<Complex64>, Vec<Complex64>)> = grid
            .z
            .par_iter()
            .map(|&z| {
                let p = normalized_assoc_legendre(n, z);
                let dp = if derivatives { normalized_assoc_legendre_dz(n, z, &p) } else { Vec::new() };
                // per-m radial sums, then the Fourier sum for each θ
                let mut radial = vec![Complex64::new(0.0, 0.0); 2 * n + 1];
                let mut dradial = vec![Complex64::new(0.0, 0.0); 2 * n + 1];
                for m in -(n as i64)..=(n as i64) {
                    let mu = m.unsigned_abs() as usize;
                    let sign = if m < 0 && mu % 2 == 1 { -1.0 } else { 1.0 };
                    let slot = (m + n as i64) as usize;
                    for l in mu..=n {
                        let a = self.a[lm_index(l, m)] * sign;
                        radial[slot] += a * p[tri(l, mu)];
                        if derivatives {
                            dradial[slot] += a * dp[tri(l, mu)];
                        }
                    }
                }
                let mut v = Vec::with_capacity(grid.theta.len());
                let mut vz = Vec::new();
                let mut vt = Vec::new();
                for &t in &grid.theta {
                    let (mut f, mut fz, mut ft) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
                    for m in -(n as i64)..=(n as i64) {
                        let slot = (m + n as i64) as usize;
                        let e = Complex64::from_polar(1.0, m as f64 * t);
                        f += radial[slot] * e;
                        if derivatives {
                            fz += dradial[slot] * e;
                            ft += radial[slot] * e * Complex64::new(0.0, m as f64);
                        }
                    }
                    v.push(f);
                    if derivatives {
                        vz.push(fz);
                        vt.push(ft);
                    }
                }
                (v, vz, vt)
            })
            .collect();
        let mut out = GridSamples { value: Vec::new(), dz: Vec::new(), dtheta: Vec::new() };
        for (v, vz, vt) in rows {
            out.value.extend(v);
            out.dz.extend(vz);
            out.dtheta.extend(vt);
        }
        out
    }

    /// Coefficient vector in l-major order.
    pub fn as_vector(&self) -> DVector<Complex64> {
        DVector::from_vec(self.a.clone())
    }
}
