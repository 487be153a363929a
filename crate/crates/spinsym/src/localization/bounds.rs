use rayon::prelude::*;
use serde::Serialize;

use super::moments::edmonds_factors;
use super::rule::PiRule;
use crate::catalog::CharFamily;
use crate::error::{domain, Result};
use crate::spin_algebra::{legendre_eval, ln_factorial, Precision, AUTO_EXACT_MAX_N};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EdmondsRow {
    pub n: usize,
    pub k: usize,
    /// (−1)^{k−1}⟨j m; j −m | l 0⟩√((n+1)/(2l+1)) from the float path.
    pub lhs: f64,
    /// The same from exact arithmetic, for n within the exact range.
    pub exact_lhs: Option<f64>,
    pub target: f64,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EdmondsTable {
    pub l: usize,
    pub r: f64,
    pub rows: Vec<EdmondsRow>,
    /// Error at the largest n is below the error at the smallest n.
    pub converging: bool,
    /// Largest |float − exact| over rows with both.
    pub path_discrepancy: Option<f64>,
}

/// Scaled diagonal coefficients along an r-convergent sequence against
/// their limit P_l(1 − 2r).
pub fn edmonds_check(l: usize, rule: &PiRule, n_grid: &[usize]) -> Result<EdmondsTable> {
    if l == 0 {
        return domain("l must be at least 1");
    }
    if n_grid.is_empty() {
        return domain("empty n grid");
    }
    if let Some(n) = n_grid.iter().find(|n| **n < l) {
        return domain(format!("n = {n} is below l = {l}"));
    }
    let target = legendre_eval(l, rule.z0())?;
    let rows = n_grid
        .par_iter()
        .map(|&n| {
            let k = rule.k(n);
            let lhs = edmonds_factors(n, k, l, Precision::Float)?[l].to_f64();
            let exact_lhs = if n <= AUTO_EXACT_MAX_N {
                Some(edmonds_factors(n, k, l, Precision::Exact)?[l].to_f64())
            } else {
                None
            };
            Ok(EdmondsRow { n, k, lhs, exact_lhs, target, error: (lhs - target).abs() })
        })
        .collect::<Result<Vec<_>>>()?;
    let (first, last) = min_max_rows(&rows);
    let converging = last.error < first.error;
    let path_discrepancy = rows
        .iter()
        .filter_map(|r| r.exact_lhs.map(|e| (e - r.lhs).abs()))
        .reduce(f64::max);
    Ok(EdmondsTable { l, r: rule.r, rows, converging, path_discrepancy })
}

fn min_max_rows(rows: &[EdmondsRow]) -> (EdmondsRow, EdmondsRow) {
    let first = *rows.iter().min_by_key(|r| r.n).expect("nonempty");
    let last = *rows.iter().max_by_key(|r| r.n).expect("nonempty");
    (first, last)
}

/// Smallest constant in a polynomial bound on |c_l^n| (or on 1/|c_l^n|)
/// over the triangle d+1 < l ≤ n ≤ n_max.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub d: usize,
    pub n_max: usize,
    /// ln K over the whole triangle.
    pub ln_k: f64,
    /// K, possibly infinite in double precision.
    pub k: f64,
    /// (n, ln K) with K taken over levels up to n.
    pub running: Vec<(usize, f64)>,
    /// Whether the running constant settles.
    pub holds: bool,
}

/// Relative growth of K below which it counts as settled outright.
pub const BOUND_SETTLED_TOL: f64 = 1e-3;

/// Smallest K_d with |c_l^n| ≤ K_d ∏_{t=1}^{d}(2(l−t)+1) for d+1 < l ≤ n ≤ n_max.
pub fn bound_check(family: &CharFamily, d: usize, n_max: usize) -> Result<BoundReport> {
    scan_bound(family, d, n_max, 1, false)
}

/// Smallest K_{d1}, K_{d2} with
/// 1/(K_{d1}∏_{t=0}^{d1}(2(l−t)+1)) ≤ |c_l^n| ≤ K_{d2}∏_{t=0}^{d2}(2(l−t)+1)
/// for max(d1,d2)+1 < l ≤ n ≤ n_max.
pub fn two_sided_bound_check(
    family: &CharFamily,
    d1: usize,
    d2: usize,
    n_max: usize,
) -> Result<(BoundReport, BoundReport)> {
    let d = d1.max(d2);
    let lower = scan_bound_from(family, d1, d, n_max, 0, true)?;
    let upper = scan_bound_from(family, d2, d, n_max, 0, false)?;
    Ok((lower, upper))
}

fn scan_bound(family: &CharFamily, d: usize, n_max: usize, t0: usize, invert: bool) -> Result<BoundReport> {
    scan_bound_from(family, d, d, n_max, t0, invert)
}

fn scan_bound_from(
    family: &CharFamily,
    d: usize,
    l_floor: usize,
    n_max: usize,
    t0: usize,
    invert: bool,
) -> Result<BoundReport> {
    let first_l = l_floor + 2;
    if n_max < first_l + 3 {
        return domain(format!("n_max must be at least {}", first_l + 3));
    }
    let ln_poly = |l: usize| -> f64 { (t0..=d).map(|t| ((2 * (l - t) + 1) as f64).ln()).sum() };
    let levels: Vec<f64> = (first_l..=n_max)
        .into_par_iter()
        .map(|n| {
            let logs = family.signed_logs(n)?;
            Ok((first_l..=n)
                .map(|l| {
                    let ln_c = if invert { -logs[l].ln_abs } else { logs[l].ln_abs };
                    ln_c - ln_poly(l)
                })
                .fold(f64::NEG_INFINITY, f64::max))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut running = Vec::with_capacity(levels.len());
    let mut best = f64::NEG_INFINITY;
    for (i, v) in levels.iter().enumerate() {
        best = best.max(*v);
        running.push((first_l + i, best));
    }
    let at = |n: usize| running[n.max(first_l) - first_l].1;
    let upper = at(n_max) - at(n_max / 2);
    let previous = at(n_max / 2) - at(n_max / 4);
    let holds = upper.is_finite() && (upper < BOUND_SETTLED_TOL || upper <= 0.75 * previous);
    Ok(BoundReport { d, n_max, ln_k: best, k: best.exp(), running, holds })
}

/// ln t_l^l = ½ ln((2l+1)!/(l!(l+1)!)), the largest Toeplitz number at
/// degree l.
pub fn toeplitz_top(l: usize) -> f64 {
    0.5 * (ln_factorial(2 * l + 1) - ln_factorial(l) - ln_factorial(l + 1))
}

/// ln(2^{l+1/2}/(lπ)^{1/4}).
pub fn toeplitz_top_asymptotic(l: usize) -> f64 {
    let lf = l as f64;
    (lf + 0.5) * std::f64::consts::LN_2 - 0.25 * (lf * std::f64::consts::PI).ln()
}
