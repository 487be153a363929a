use std::sync::atomic::{AtomicUsize, Ordering};

use num_bigint::BigUint;
use num_traits::One;
use once_cell::sync::Lazy;
use parking_lot::RwLock;

use crate::error::{Error, Result};

/// Default largest argument for which exact factorials are produced.
pub const DEFAULT_EXACT_CAP: usize = 100_000;

/// Append-only tables of exact factorials and log-factorials.
///
/// Readers take a shared lock; a miss upgrades to a write lock and extends
/// the table, so concurrent callers never observe a partial entry.
pub struct FactorialCache {
    exact: RwLock<Vec<BigUint>>,
    // (ln k!, running compensation) for Neumaier-compensated accumulation
    logf: RwLock<Vec<(f64, f64)>>,
    cap: AtomicUsize,
}

static GLOBAL: Lazy<FactorialCache> = Lazy::new(|| FactorialCache::with_cap(DEFAULT_EXACT_CAP));

impl FactorialCache {
    pub fn with_cap(cap: usize) -> Self {
        FactorialCache {
            exact: RwLock::new(vec![BigUint::one()]),
            logf: RwLock::new(vec![(0.0, 0.0)]),
            cap: AtomicUsize::new(cap),
        }
    }

    /// Process-wide cache used by the free functions of this module.
    pub fn global() -> &'static FactorialCache {
        &GLOBAL
    }

    pub fn cap(&self) -> usize {
        self.cap.load(Ordering::Relaxed)
    }

    pub fn set_cap(&self, cap: usize) {
        self.cap.store(cap, Ordering::Relaxed);
    }

    /// k! as a big integer.
    pub fn exact(&self, k: usize) -> Result<BigUint> {
        if k > self.cap() {
            return Err(Error::Resource(format!(
                "exact factorial of {k} exceeds the configured cap {}",
                self.cap()
            )));
        }
        if let Some(v) = self.exact.read().get(k) {
            return Ok(v.clone());
        }
        let mut table = self.exact.write();
        while table.len() <= k {
            let next = table.last().expect("table starts with 0!") * BigUint::from(table.len());
            table.push(next);
        }
        Ok(table[k].clone())
    }

    /// ln(k!) in double precision.
    pub fn ln(&self, k: usize) -> f64 {
        if let Some(&(s, c)) = self.logf.read().get(k) {
            return s + c;
        }
        let mut table = self.logf.write();
        while table.len() <= k {
            let i = table.len();
            let (s, c) = *table.last().expect("table starts with ln 0!");
            let x = (i as f64).ln();
            let t = s + x;
            let c = if s.abs() >= x.abs() { c + ((s - t) + x) } else { c + ((x - t) + s) };
            table.push((t, c));
        }
        let (s, c) = table[k];
        s + c
    }
}

/// k! from the global cache.
pub fn factorial(k: usize) -> Result<BigUint> {
    FactorialCache::global().exact(k)
}

/// ln(k!) from the global cache.
pub fn ln_factorial(k: usize) -> f64 {
    FactorialCache::global().ln(k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_factorials() {
        assert_eq!(factorial(0).unwrap(), BigUint::from(1u32));
        assert_eq!(factorial(10).unwrap(), BigUint::from(3_628_800u32));
        assert!((ln_factorial(10) - 3_628_800f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn cap_is_enforced() {
        let cache = FactorialCache::with_cap(5);
        assert!(cache.exact(5).is_ok());
        assert!(matches!(cache.exact(6), Err(Error::Resource(_))));
    }

    #[test]
    fn log_table_matches_exact_digits() {
        // ln(170!) from the exact integer: 170! < f64::MAX so the conversion is safe
        use num_traits::ToPrimitive;
        let exact = factorial(170).unwrap().to_f64().unwrap().ln();
        assert!((ln_factorial(170) - exact).abs() / exact < 4e-16);
    }
}
