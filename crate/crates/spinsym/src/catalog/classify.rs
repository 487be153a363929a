use serde::Serialize;

use num_rational::BigRational;

use super::{weights_from_chars, weights_from_chars_exact, CharFamily};
use crate::error::{Error, Result};
use crate::spin_algebra::Precision;

/// Weights below −this count as negative when testing mapping-positivity.
pub const MAPPING_POSITIVE_TOL: f64 = 1e-10;
/// Largest n at which weights are recovered exactly when possible.
pub const EXACT_WEIGHTS_MAX_N: usize = 60;
/// Largest l inspected by the limit tests.
pub const LIMIT_L_MAX: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    True,
    False,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropertyVerdict {
    pub verdict: Verdict,
    pub evidence: String,
}

impl PropertyVerdict {
    fn new(verdict: Verdict, evidence: impl Into<String>) -> Self {
        PropertyVerdict { verdict, evidence: evidence.into() }
    }

    pub fn holds(&self) -> bool {
        self.verdict == Verdict::True
    }
}

/// Per-level findings.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelVerdicts {
    pub n: usize,
    pub isometric: bool,
    pub positivity_bound: bool,
    /// None when the level could not be decided.
    pub mapping_positive: Option<bool>,
    pub positive_dual: Option<bool>,
    /// Smallest kernel weight, when it was computed.
    pub min_weight: Option<f64>,
    pub min_dual_weight: Option<f64>,
    pub exact_weights: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub family: String,
    pub n_grid: Vec<usize>,
    pub tol: f64,
    pub levels: Vec<LevelVerdicts>,
    pub isometric: PropertyVerdict,
    pub positivity_bound: PropertyVerdict,
    pub mapping_positive: PropertyVerdict,
    pub positive_dual: PropertyVerdict,
    pub limiting: PropertyVerdict,
    pub poisson: PropertyVerdict,
    pub anti_poisson: PropertyVerdict,
    pub quasi_classical: PropertyVerdict,
    pub warnings: Vec<String>,
}

/// Classifies a family over a grid of levels.
///
/// Per-level properties are decided at each n. Limit properties inspect
/// the last three grid points for each l ≤ 4: the distance to the target
/// must be non-increasing and end below `tol`. A tail that is Cauchy
/// within `tol` but ends away from the target gives a negative verdict;
/// anything else is inconclusive.
pub fn classify(family: &CharFamily, n_grid: &[usize], tol: f64) -> Result<ClassificationReport> {
    if n_grid.is_empty() || n_grid.windows(2).any(|w| w[0] >= w[1]) || n_grid[0] == 0 {
        return Err(Error::Invalid("n grid must be nonempty, positive and strictly ascending".into()));
    }
    let mut levels = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        levels.push(level_verdicts(family, n, tol)?);
    }
    let all = |f: fn(&LevelVerdicts) -> Option<bool>, what: &str| -> PropertyVerdict {
        let total = levels.len();
        let hits = levels.iter().filter(|v| f(v) == Some(true)).count();
        let undecided = levels.iter().filter(|v| f(v).is_none()).count();
        if hits == total {
            PropertyVerdict::new(Verdict::True, format!("{what} at every grid level"))
        } else if hits == 0 && undecided == 0 {
            PropertyVerdict::new(Verdict::False, format!("{what} at no grid level"))
        } else {
            PropertyVerdict::new(
                Verdict::Inconclusive,
                format!("{what} at {hits} of {total} levels, {undecided} undecided"),
            )
        }
    };
    let isometric = all(|v| Some(v.isometric), "isometric");
    let positivity_bound = all(|v| Some(v.positivity_bound), "bound |c_l| <= sqrt((n+1)/(2l+1))");
    let mapping_positive = all(|v| v.mapping_positive, "mapping-positive");
    let positive_dual = all(|v| v.positive_dual, "positive-dual");

    let mut warnings = Vec::new();
    for v in &levels {
        let count = [Some(v.isometric), v.mapping_positive, v.positive_dual].iter().filter(|b| **b == Some(true)).count();
        if count > 1 {
            warnings.push(format!("n = {}: more than one of isometric/mapping-positive/positive-dual", v.n));
        }
    }

    let (limiting, poisson, anti_poisson, quasi_classical) = if n_grid.len() < 3 {
        let v = PropertyVerdict::new(Verdict::Inconclusive, "fewer than three grid levels");
        (v.clone(), v.clone(), v.clone(), v)
    } else {
        let tail = &n_grid[n_grid.len() - 3..];
        let l_max = LIMIT_L_MAX.min(tail[0]);
        let mut rows = Vec::with_capacity(l_max);
        for l in 1..=l_max {
            rows.push(tail.iter().map(|&n| family.value(n, l)).collect::<Result<Vec<f64>>>()?);
        }
        (
            limit_verdict(&rows, tol, None, "Cauchy"),
            limit_verdict(&rows, tol, Some(&|_, c| (c - 1.0).abs()), "c_l -> 1"),
            limit_verdict(&rows, tol, Some(&|l, c| (c - if l % 2 == 0 { 1.0 } else { -1.0 }).abs()), "c_l -> (-1)^l"),
            limit_verdict(&rows, tol, Some(&|_, c| (c.abs() - 1.0).abs()), "|c_l| -> 1"),
        )
    };

    Ok(ClassificationReport {
        family: family.name(),
        n_grid: n_grid.to_vec(),
        tol,
        levels,
        isometric,
        positivity_bound,
        mapping_positive,
        positive_dual,
        limiting,
        poisson,
        anti_poisson,
        quasi_classical,
        warnings,
    })
}

type Distance<'a> = &'a dyn Fn(usize, f64) -> f64;

/// rows[l−1] holds c_l at the three tail levels.
fn limit_verdict(rows: &[Vec<f64>], tol: f64, distance: Option<Distance>, what: &str) -> PropertyVerdict {
    let mut all_pass = true;
    let mut any_settled_elsewhere = false;
    let mut worst = 0.0f64;
    for (i, row) in rows.iter().enumerate() {
        let l = i + 1;
        let steps = [(row[1] - row[0]).abs(), (row[2] - row[1]).abs()];
        let cauchy = steps[1] < tol && steps[1] <= steps[0] + tol * 1e-3;
        let pass = match distance {
            None => cauchy,
            Some(d) => {
                let e: Vec<f64> = row.iter().map(|c| d(l, *c)).collect();
                let monotone = e[1] <= e[0] && e[2] <= e[1];
                worst = worst.max(e[2]);
                if cauchy && e[2] >= tol {
                    any_settled_elsewhere = true;
                }
                monotone && e[2] < tol
            }
        };
        if distance.is_none() {
            worst = worst.max(steps[1]);
        }
        all_pass &= pass;
    }
    let evidence = format!("{what}: worst tail deviation {worst:.3e} against tol {tol:.1e}");
    if all_pass {
        PropertyVerdict::new(Verdict::True, evidence)
    } else if any_settled_elsewhere {
        PropertyVerdict::new(Verdict::False, evidence)
    } else {
        PropertyVerdict::new(Verdict::Inconclusive, evidence)
    }
}

fn level_verdicts(family: &CharFamily, n: usize, tol: f64) -> Result<LevelVerdicts> {
    let logs = family.signed_logs(n)?;
    if let Some(l) = logs.iter().position(|v| v.is_zero()) {
        return Err(Error::Singular { n, l });
    }
    let isometric = logs.iter().all(|v| v.ln_abs.abs() <= tol);
    // |c_l|² ≤ (n+1)/(2l+1), tested in log space so extreme values stay honest
    let within_bound = |sign: f64| {
        logs.iter().enumerate().all(|(l, v)| {
            sign * v.ln_abs <= 0.5 * ((n + 1) as f64 / (2 * l + 1) as f64).ln() + 1e-12
        })
    };
    let positivity_bound = within_bound(1.0);
    let dual_bound = within_bound(-1.0);

    // a mapping-positive family obeys the bound, so a violation settles it
    let mut exact_weights = false;
    let (mapping_positive, min_weight) = if positivity_bound {
        match min_kernel_weight(family, n)? {
            Some((w, exact)) => {
                exact_weights |= exact;
                (Some(w >= -MAPPING_POSITIVE_TOL), Some(w))
            }
            None => (None, None),
        }
    } else {
        (Some(false), None)
    };
    let (positive_dual, min_dual_weight) = if dual_bound {
        match min_kernel_weight(&family.dual(), n)? {
            Some((w, exact)) => {
                exact_weights |= exact;
                (Some(w >= -MAPPING_POSITIVE_TOL), Some(w))
            }
            None => (None, None),
        }
    } else {
        (Some(false), None)
    };
    Ok(LevelVerdicts { n, isometric, positivity_bound, mapping_positive, positive_dual, min_weight, min_dual_weight, exact_weights })
}

/// Whether `family` is mapping-positive at level n; None when undecidable
/// in double precision.
pub fn mapping_positive_at(family: &CharFamily, n: usize) -> Result<Option<bool>> {
    let logs = family.signed_logs(n)?;
    let bound = logs
        .iter()
        .enumerate()
        .all(|(l, v)| v.ln_abs <= 0.5 * ((n + 1) as f64 / (2 * l + 1) as f64).ln() + 1e-12);
    if !bound {
        return Ok(Some(false));
    }
    Ok(min_kernel_weight(family, n)?.map(|(w, _)| w >= -MAPPING_POSITIVE_TOL))
}

/// Smallest kernel weight of `family` at level n, and whether it was exact.
/// None when the characteristic numbers leave the f64 range and no kernel
/// or exact form is available.
fn min_kernel_weight(family: &CharFamily, n: usize) -> Result<Option<(f64, bool)>> {
    if let Ok(w) = family.level_weights(n) {
        if let Some(r) = w.rational_weights() {
            let neg = r.iter().any(|v| v < &BigRational::from_integer(0.into()));
            let min = w.weights().iter().copied().fold(f64::INFINITY, f64::min);
            return Ok(Some((if neg { min.min(-f64::MIN_POSITIVE) } else { min.max(0.0) }, true)));
        }
        return Ok(Some((w.weights().iter().copied().fold(f64::INFINITY, f64::min), false)));
    }
    if n <= EXACT_WEIGHTS_MAX_N {
        let exact: Option<Vec<_>> = (0..=n).map(|l| family.exact(n, l).ok().flatten()).collect();
        if let Some(ex) = exact {
            if let Some(w) = weights_from_chars_exact(&ex)? {
                let min = w.iter().map(|v| v.to_f64()).fold(f64::INFINITY, f64::min);
                // an exactly negative weight stays negative after rounding
                let min = if w.iter().any(|v| v.sign() < 0) { min.min(-f64::MIN_POSITIVE) } else { min.max(0.0) };
                return Ok(Some((min, true)));
            }
        }
    }
    let c = family.char_numbers(n)?;
    if c.iter().any(|v| !v.is_finite() || *v == 0.0) {
        return Ok(None);
    }
    let w = weights_from_chars(&c, Precision::Auto)?;
    Ok(Some((w.iter().copied().fold(f64::INFINITY, f64::min), false)))
}
