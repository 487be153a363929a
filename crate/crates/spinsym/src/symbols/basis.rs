use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use once_cell::sync::Lazy;
use parking_lot::RwLock;

use crate::error::{domain, Result};

/// Largest n for which whole coupled bases are built and cached.
pub const MAX_BASIS_N: usize = 256;

/// Flat index of (l, m) in l-major order: l² + l + m.
pub fn lm_index(l: usize, m: i64) -> usize {
    ((l * l + l) as i64 + m) as usize
}

/// The coupled basis e(l,m) at level n, stored as the nonzero diagonal of
/// each matrix. For m ≥ 0 entry p of the vector sits at row p, column
/// p + m (0-based); e(l,−m) is (−1)^m times the transpose.
#[derive(Debug)]
pub struct CoupledBasis {
    n: usize,
    diags: Vec<Vec<f64>>,
}

static CACHE: Lazy<RwLock<HashMap<usize, Arc<CoupledBasis>>>> = Lazy::new(|| RwLock::new(HashMap::new()));

/// α(c) = √(c(n+1−c)): the J+ entry at row c−1, column c (0-based).
pub(crate) fn ladder(n: usize, c: usize) -> f64 {
    ((c * (n + 1 - c)) as f64).sqrt()
}

impl CoupledBasis {
    /// The cached basis at level n.
    pub fn get(n: usize) -> Result<Arc<CoupledBasis>> {
        if n == 0 || n > MAX_BASIS_N {
            return domain(format!("coupled basis needs 1 <= n <= {MAX_BASIS_N}, got {n}"));
        }
        if let Some(b) = CACHE.read().get(&n) {
            return Ok(b.clone());
        }
        let b = Arc::new(CoupledBasis::build(n));
        CACHE.write().insert(n, b.clone());
        Ok(b)
    }

    /// e(l,l) ∝ (−1)^l J+^l, then e(l,m−1) ∝ [J−, e(l,m)]. Lowering
    /// amplifies any admixture of higher l, so each superdiagonal is
    /// re-orthogonalized from l = n downward before the next step.
    fn build(n: usize) -> Self {
        let mut diags = vec![Vec::new(); (n + 1) * (n + 1)];
        for m in (0..=n).rev() {
            let len = n - m + 1;
            let mut family: Vec<Vec<f64>> = Vec::with_capacity(len);
            for l in (m + 1..=n).rev() {
                // [J−, X] for X on superdiagonal m+1 lands on superdiagonal m
                let prev = &diags[lm_index(l, m as i64 + 1)];
                let y: Vec<f64> = (0..len)
                    .map(|r| {
                        let left = if r >= 1 { ladder(n, r) * prev[r - 1] } else { 0.0 };
                        let right = if r < prev.len() { ladder(n, r + m + 1) * prev[r] } else { 0.0 };
                        left - right
                    })
                    .collect();
                family.push(y);
            }
            // (J+^m)_{p,p+m} = ∏_{i=1}^{m} α(p+i), in logs
            let logs: Vec<f64> = (0..len).map(|p| (1..=m).map(|i| ladder(n, p + i).ln()).sum()).collect();
            let peak = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let sign = if m % 2 == 1 { -1.0 } else { 1.0 };
            family.push(logs.iter().map(|v| sign * (v - peak).exp()).collect());
            for i in 0..family.len() {
                let (done, rest) = family.split_at_mut(i);
                let x = &mut rest[0];
                for _ in 0..2 {
                    for q in done.iter() {
                        let d: f64 = x.iter().zip(q).map(|(a, b)| a * b).sum();
                        x.iter_mut().zip(q).for_each(|(a, b)| *a -= d * b);
                    }
                }
                normalize(x);
            }
            for (i, v) in family.into_iter().enumerate() {
                diags[lm_index(n - i, m as i64)] = v;
            }
        }
        CoupledBasis { n, diags }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Nonzero diagonal of e(l, |m|).
    pub fn diag(&self, l: usize, m: usize) -> &[f64] {
        &self.diags[lm_index(l, m as i64)]
    }

    /// e(l,m) as a dense matrix.
    pub fn matrix(&self, l: usize, m: i64) -> DMatrix<Complex64> {
        let n = self.n;
        let mut out = DMatrix::zeros(n + 1, n + 1);
        let mu = m.unsigned_abs() as usize;
        let d = self.diag(l, mu);
        let sign = if m < 0 && mu % 2 == 1 { -1.0 } else { 1.0 };
        for (p, v) in d.iter().enumerate() {
            if m >= 0 {
                out[(p, p + mu)] = Complex64::new(*v, 0.0);
            } else {
                out[(p + mu, p)] = Complex64::new(sign * v, 0.0);
            }
        }
        out
    }

    /// tr(e(l,m)ᵀ P), the Hilbert–Schmidt pairing with a real basis element.
    pub fn pair(&self, l: usize, m: i64, p: &DMatrix<Complex64>) -> Complex64 {
        let mu = m.unsigned_abs() as usize;
        let d = self.diag(l, mu);
        let mut acc = Complex64::new(0.0, 0.0);
        if m >= 0 {
            for (i, v) in d.iter().enumerate() {
                acc += p[(i, i + mu)] * *v;
            }
        } else {
            let sign = if mu % 2 == 1 { -1.0 } else { 1.0 };
            for (i, v) in d.iter().enumerate() {
                acc += p[(i + mu, i)] * (sign * v);
            }
        }
        acc
    }

    /// out += w·e(l,m).
    pub fn accumulate(&self, l: usize, m: i64, w: Complex64, out: &mut DMatrix<Complex64>) {
        let mu = m.unsigned_abs() as usize;
        let d = self.diag(l, mu);
        if m >= 0 {
            for (i, v) in d.iter().enumerate() {
                out[(i, i + mu)] += w * *v;
            }
        } else {
            let sign = if mu % 2 == 1 { -1.0 } else { 1.0 };
            for (i, v) in d.iter().enumerate() {
                out[(i + mu, i)] += w * (sign * v);
            }
        }
    }
}

fn normalize(x: &mut [f64]) {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    for v in x.iter_mut() {
        *v /= norm;
    }
}
