use std::cmp::Ordering;
use std::fmt;
use std::ops::{Mul, Neg};

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// The real number `sign · √square` with `square` a nonnegative rational.
///
/// Products and quotients stay exact. Sums are exact only when the radicands
/// differ by a rational square factor, see [`ExactValue::try_add`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExactValue {
    sign: i8,
    square: BigRational,
}

impl ExactValue {
    pub fn zero() -> Self {
        ExactValue { sign: 0, square: BigRational::zero() }
    }

    pub fn one() -> Self {
        ExactValue { sign: 1, square: BigRational::one() }
    }

    /// `sign · √square`; panics on a negative radicand.
    pub fn new(sign: i8, square: BigRational) -> Self {
        assert!(!square.is_negative(), "radicand must be nonnegative");
        if sign == 0 || square.is_zero() {
            return Self::zero();
        }
        ExactValue { sign: sign.signum(), square }
    }

    /// The rational `r` itself.
    pub fn from_rational(r: &BigRational) -> Self {
        let sign = sign_of(r);
        Self::new(sign, r * r)
    }

    /// `sgn(r) · √|r|`.
    pub fn from_signed_square(r: &BigRational) -> Self {
        Self::new(sign_of(r), r.abs())
    }

    pub fn from_integer(v: i64) -> Self {
        Self::from_rational(&BigRational::from_integer(BigInt::from(v)))
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn square(&self) -> &BigRational {
        &self.square
    }

    /// `sign · square`, the value squared with the sign kept.
    pub fn signed_square(&self) -> BigRational {
        match self.sign {
            -1 => -self.square.clone(),
            _ => self.square.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    /// The value as a rational when the radicand is a perfect square.
    pub fn to_rational(&self) -> Option<BigRational> {
        let n = exact_sqrt(self.square.numer())?;
        let d = exact_sqrt(self.square.denom())?;
        let r = BigRational::new(n, d);
        Some(if self.sign < 0 { -r } else { r })
    }

    pub fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        Some(ExactValue { sign: self.sign, square: self.square.recip() })
    }

    pub fn checked_div(&self, rhs: &Self) -> Option<Self> {
        rhs.recip().map(|r| self * &r)
    }

    /// Compares absolute values.
    pub fn cmp_abs(&self, other: &Self) -> Ordering {
        self.square.cmp(&other.square)
    }

    /// Exact sum when `other / self` is rational; `None` otherwise.
    pub fn try_add(&self, other: &Self) -> Option<Self> {
        if self.is_zero() {
            return Some(other.clone());
        }
        if other.is_zero() {
            return Some(self.clone());
        }
        let ratio = &other.square / &self.square;
        let root = BigRational::new(exact_sqrt(ratio.numer())?, exact_sqrt(ratio.denom())?);
        let lead = BigRational::from_integer(BigInt::from(self.sign));
        let coeff = lead + BigRational::from_integer(BigInt::from(other.sign)) * root;
        let sign = sign_of(&coeff);
        Some(Self::new(sign, &self.square * &coeff * &coeff))
    }

    /// Exact sum of a sequence, if every partial sum stays a single radical.
    pub fn try_sum<'a>(terms: impl IntoIterator<Item = &'a ExactValue>) -> Option<Self> {
        terms.into_iter().try_fold(Self::zero(), |acc, t| acc.try_add(t))
    }

    /// Nearest double, accurate to about one ulp.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let v = sqrt_ratio_f64(self.square.numer().magnitude(), self.square.denom().magnitude());
        if self.sign < 0 {
            -v
        } else {
            v
        }
    }

    /// ln|value|; negative infinity for zero.
    pub fn ln_abs(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        0.5 * (ln_big(self.square.numer().magnitude()) - ln_big(self.square.denom().magnitude()))
    }
}

impl Neg for ExactValue {
    type Output = ExactValue;
    fn neg(self) -> ExactValue {
        ExactValue { sign: -self.sign, square: self.square }
    }
}

impl Mul<&ExactValue> for &ExactValue {
    type Output = ExactValue;
    fn mul(self, rhs: &ExactValue) -> ExactValue {
        ExactValue::new(self.sign * rhs.sign, &self.square * &rhs.square)
    }
}

impl Mul for ExactValue {
    type Output = ExactValue;
    fn mul(self, rhs: ExactValue) -> ExactValue {
        &self * &rhs
    }
}

impl fmt::Display for ExactValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.sign {
            -1 => "-",
            _ => "",
        };
        write!(f, "{s}sqrt({})", self.square)
    }
}

fn sign_of(r: &BigRational) -> i8 {
    match r.numer().sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

fn exact_sqrt(x: &BigInt) -> Option<BigInt> {
    if x.is_negative() {
        return None;
    }
    let r = x.sqrt();
    (&r * &r == *x).then_some(r)
}

/// ln of a big integer, accurate in double precision.
pub(crate) fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    (x >> shift).to_f64().unwrap_or(f64::INFINITY).ln() + shift as f64 * std::f64::consts::LN_2
}

/// √(p/q) rounded from a 64-bit integer square root of a scaled quotient.
fn sqrt_ratio_f64(p: &BigUint, q: &BigUint) -> f64 {
    let e = p.bits() as i64 - q.bits() as i64;
    let s = (130 - e).div_euclid(2) + 1;
    let root = if s >= 0 {
        ((p << (2 * s) as u64) / q).sqrt()
    } else {
        (p / (q << (-2 * s) as u64)).sqrt()
    };
    ldexp(root.to_f64().unwrap_or(f64::INFINITY), -s)
}

/// x · 2^e without intermediate overflow or underflow of the scale factor.
pub(crate) fn ldexp(mut x: f64, mut e: i64) -> f64 {
    const STEP: i64 = 600;
    let up = 2f64.powi(STEP as i32);
    let down = 2f64.powi(-STEP as i32);
    while e > STEP {
        x *= up;
        e -= STEP;
    }
    while e < -STEP {
        x *= down;
        e += STEP;
    }
    x * 2f64.powi(e as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn normalises_zero() {
        assert_eq!(ExactValue::new(1, q(0, 1)), ExactValue::zero());
        assert_eq!(ExactValue::new(0, q(3, 1)), ExactValue::zero());
    }

    #[test]
    fn float_conversion() {
        assert!((ExactValue::new(1, q(1, 2)).to_f64() - 0.5f64.sqrt()).abs() < 1e-16);
        assert_eq!(ExactValue::new(-1, q(9, 4)).to_f64(), -1.5);
        let huge = ExactValue::new(1, BigRational::from_integer(BigInt::from(10).pow(600)));
        assert!((huge.to_f64() / 1e300 - 1.0).abs() < 1e-15);
        let tiny = ExactValue::new(1, BigRational::new(BigInt::one(), BigInt::from(10).pow(640)));
        assert!((tiny.to_f64() / 1e-320 - 1.0).abs() < 1e-3);
        assert!((huge.ln_abs() - 300.0 * 10f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn sums_of_like_radicals() {
        let a = ExactValue::new(1, q(2, 1)); // √2
        let b = ExactValue::new(-1, q(8, 1)); // −2√2
        let s = a.try_add(&b).unwrap();
        assert_eq!(s, ExactValue::new(-1, q(2, 1)));
        assert!(a.try_add(&ExactValue::new(1, q(3, 1))).is_none());
        assert_eq!(a.try_add(&-a.clone()).unwrap(), ExactValue::zero());
    }

    #[test]
    fn rational_extraction() {
        assert_eq!(ExactValue::new(-1, q(9, 16)).to_rational(), Some(q(-3, 4)));
        assert_eq!(ExactValue::new(1, q(2, 1)).to_rational(), None);
    }
}
