use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::spin_algebra::{diag_column, diag_column_exact, ExactValue, HalfInt, Precision};

/// Convex weights a_1..a_{n+1} of an operator kernel Σ a_k Π_k.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelWeights {
    a: Vec<f64>,
    exact: Option<Vec<BigRational>>,
}

impl KernelWeights {
    /// Float weights; must be nonnegative and sum to 1 within 1e-12.
    pub fn new(a: Vec<f64>) -> Result<Self> {
        if a.len() < 2 {
            return Err(Error::Invalid("kernel needs n + 1 >= 2 weights".into()));
        }
        if a.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Invalid("kernel weights must be finite and nonnegative".into()));
        }
        let total: f64 = a.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Invalid(format!("kernel weights sum to {total}, not 1")));
        }
        Ok(KernelWeights { a, exact: None })
    }

    /// Rational weights; checked exactly.
    pub fn rational(a: Vec<BigRational>) -> Result<Self> {
        if a.len() < 2 {
            return Err(Error::Invalid("kernel needs n + 1 >= 2 weights".into()));
        }
        if a.iter().any(|w| w.is_negative()) {
            return Err(Error::Invalid("kernel weights must be nonnegative".into()));
        }
        let total: BigRational = a.iter().cloned().sum();
        if !total.is_one() {
            return Err(Error::Invalid(format!("kernel weights sum to {total}, not 1")));
        }
        let floats = a.iter().map(|w| w.to_f64().unwrap_or(f64::NAN)).collect();
        Ok(KernelWeights { a: floats, exact: Some(a) })
    }

    /// Π_k alone.
    pub fn projector(n: usize, k: usize) -> Result<Self> {
        if k < 1 || k > n + 1 {
            return Err(Error::Domain(format!("projector index {k} outside 1..={}", n + 1)));
        }
        let mut a = vec![BigRational::zero(); n + 1];
        a[k - 1] = BigRational::one();
        Self::rational(a)
    }

    /// I/(n+1).
    pub fn uniform(n: usize) -> Self {
        let w = BigRational::new(BigInt::one(), BigInt::from(n + 1));
        Self::rational(vec![w; n + 1]).expect("uniform weights are valid")
    }

    /// ½(Π_{⌊j+1/2⌋} + Π_{⌊j+1⌋}).
    pub fn upper_middle(n: usize) -> Self {
        let j = HalfInt::spin(n);
        let k1 = (j + HalfInt::from_twice(1)).floor() as usize;
        let k2 = (j + HalfInt::from_int(1)).floor() as usize;
        let mut a = vec![BigRational::zero(); n + 1];
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        a[k1 - 1] += &half;
        a[k2 - 1] += &half;
        Self::rational(a).expect("middle weights are valid")
    }

    pub fn n(&self) -> usize {
        self.a.len() - 1
    }

    pub fn weights(&self) -> &[f64] {
        &self.a
    }

    pub fn rational_weights(&self) -> Option<&[BigRational]> {
        self.exact.as_deref()
    }
}

/// Characteristic numbers of a kernel, with the indices where they vanish.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelChars {
    pub values: Vec<f64>,
    pub exact: Option<Vec<ExactValue>>,
    /// l with c_l = 0: the kernel only defines a pre-symbol map.
    pub vanishing: Vec<usize>,
}

impl KernelChars {
    pub fn is_injective(&self) -> bool {
        self.vanishing.is_empty()
    }
}

/// c_l = √((n+1)/(2l+1)) Σ_k (−1)^{k+1} a_k ⟨j m_k; j −m_k | l 0⟩.
///
/// Rational weights at an exact precision give exact values; every term of
/// the sum for a fixed l shares the radical √((n−l)!/(n+l+1)!), so the sum
/// closes over [`ExactValue`].
pub fn from_kernel_weights(w: &KernelWeights, precision: Precision) -> Result<KernelChars> {
    let n = w.n();
    if let (Some(ra), true) = (w.rational_weights(), precision.is_exact_at(n)) {
        let mut acc: Vec<ExactValue> = vec![ExactValue::zero(); n + 1];
        for (i, a) in ra.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let k = i + 1;
            let col = diag_column_exact(n, k, n)?;
            let sign = if k % 2 == 0 { -1 } else { 1 };
            let weight = ExactValue::from_rational(&(a * BigInt::from(sign)));
            for (l, c) in col.iter().enumerate() {
                let term = &weight * c;
                acc[l] = acc[l].try_add(&term).ok_or_else(|| {
                    Error::Invalid(format!("kernel sum at l = {l} left a single radical class"))
                })?;
            }
        }
        let exact: Vec<ExactValue> = acc
            .into_iter()
            .enumerate()
            .map(|(l, s)| {
                let scale = ExactValue::new(1, BigRational::new(BigInt::from(n + 1), BigInt::from(2 * l + 1)));
                &s * &scale
            })
            .collect();
        let vanishing = exact.iter().enumerate().filter(|(_, v)| v.is_zero()).map(|(l, _)| l).collect();
        let values = exact.iter().map(ExactValue::to_f64).collect();
        return Ok(KernelChars { values, exact: Some(exact), vanishing });
    }
    let mut values = vec![0.0; n + 1];
    for (i, &a) in w.weights().iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        let k = i + 1;
        let col = diag_column(n, k, n, precision)?;
        let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
        for (v, c) in values.iter_mut().zip(&col) {
            *v += sign * a * c;
        }
    }
    for (l, v) in values.iter_mut().enumerate() {
        *v *= ((n + 1) as f64 / (2 * l + 1) as f64).sqrt();
    }
    let vanishing = values.iter().enumerate().filter(|(_, v)| **v == 0.0).map(|(l, _)| l).collect();
    Ok(KernelChars { values, exact: None, vanishing })
}

/// Kernel weights reproducing the characteristic numbers `c` (c_0 = 1):
/// a_k = Σ_l (−1)^{k−1} ⟨j m_k; j −m_k | l 0⟩ √((2l+1)/(n+1)) c_l.
///
/// The diagonal coefficients form an orthogonal matrix in (l, k), so the
/// linear system is inverted by its transpose.
pub fn weights_from_chars(c: &[f64], precision: Precision) -> Result<Vec<f64>> {
    let n = chars_level(c.len())?;
    let scaled: Vec<f64> =
        c.iter().enumerate().map(|(l, v)| v * ((2 * l + 1) as f64 / (n + 1) as f64).sqrt()).collect();
    (1..=n + 1)
        .map(|k| {
            let col = diag_column(n, k, n, precision)?;
            let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
            Ok(sign * col.iter().zip(&scaled).map(|(a, b)| a * b).sum::<f64>())
        })
        .collect()
}

/// Exact variant of [`weights_from_chars`]; `None` when some weight is a
/// sum of unlike radicals.
pub fn weights_from_chars_exact(c: &[ExactValue]) -> Result<Option<Vec<ExactValue>>> {
    let n = chars_level(c.len())?;
    let scaled: Vec<ExactValue> = c
        .iter()
        .enumerate()
        .map(|(l, v)| v * &ExactValue::new(1, BigRational::new(BigInt::from(2 * l + 1), BigInt::from(n + 1))))
        .collect();
    let mut out = Vec::with_capacity(n + 1);
    for k in 1..=n + 1 {
        let col = diag_column_exact(n, k, n)?;
        let terms: Vec<ExactValue> = col.iter().zip(&scaled).map(|(a, b)| a * b).collect();
        let Some(s) = ExactValue::try_sum(&terms) else {
            return Ok(None);
        };
        out.push(if k % 2 == 0 { -s } else { s });
    }
    Ok(Some(out))
}

fn chars_level(len: usize) -> Result<usize> {
    if len < 2 {
        return Err(Error::Invalid("need characteristic numbers c_0..c_n with n >= 1".into()));
    }
    Ok(len - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn top_projector_gives_berezin() {
        let c = from_kernel_weights(&KernelWeights::projector(2, 1).unwrap(), Precision::Exact).unwrap();
        assert!(close(&c.values, &[1.0, 0.5f64.sqrt(), 0.1f64.sqrt()], 1e-15));
        let c = from_kernel_weights(&KernelWeights::projector(2, 3).unwrap(), Precision::Exact).unwrap();
        assert!(close(&c.values, &[1.0, -(0.5f64.sqrt()), 0.1f64.sqrt()], 1e-15));
    }

    #[test]
    fn middle_projector_is_flagged() {
        let c = from_kernel_weights(&KernelWeights::projector(2, 2).unwrap(), Precision::Exact).unwrap();
        assert_eq!(c.vanishing, vec![1]);
        assert!(!c.is_injective());
    }

    #[test]
    fn float_and_exact_paths_agree() {
        let w = KernelWeights::new(vec![0.25, 0.0, 0.5, 0.125, 0.125]).unwrap();
        let e = from_kernel_weights(&KernelWeights::upper_middle(4), Precision::Exact).unwrap();
        let f = from_kernel_weights(&KernelWeights::upper_middle(4), Precision::Float).unwrap();
        assert!(close(&e.values, &f.values, 1e-14));
        let f = from_kernel_weights(&w, Precision::Float).unwrap();
        let back = weights_from_chars(&f.values, Precision::Float).unwrap();
        assert!(close(&back, w.weights(), 1e-14));
    }

    #[test]
    fn exact_inversion_recovers_rational_weights() {
        let w = KernelWeights::upper_middle(5);
        let c = from_kernel_weights(&w, Precision::Exact).unwrap();
        let back = weights_from_chars_exact(c.exact.as_ref().unwrap()).unwrap().unwrap();
        for (b, a) in back.iter().zip(w.rational_weights().unwrap()) {
            assert_eq!(b.to_rational().unwrap(), *a);
        }
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(KernelWeights::new(vec![0.5, 0.6]).is_err());
        assert!(KernelWeights::new(vec![1.5, -0.5]).is_err());
        assert!(KernelWeights::new(vec![1.0]).is_err());
    }
}
