use std::ops::{Div, Mul, Neg};

/// A real number stored as sign and natural log of its magnitude, for
/// products whose factors overflow or underflow a double on their own.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignedLog {
    pub sign: i8,
    pub ln_abs: f64,
}

impl SignedLog {
    pub const ZERO: SignedLog = SignedLog { sign: 0, ln_abs: f64::NEG_INFINITY };
    pub const ONE: SignedLog = SignedLog { sign: 1, ln_abs: 0.0 };

    pub fn new(sign: i8, ln_abs: f64) -> Self {
        if sign == 0 || ln_abs == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        SignedLog { sign: sign.signum(), ln_abs }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            SignedLog { sign: if x < 0.0 { -1 } else { 1 }, ln_abs: x.abs().ln() }
        }
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    pub fn to_f64(self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => f64::from(s) * self.ln_abs.exp(),
        }
    }

    pub fn abs(self) -> Self {
        SignedLog { sign: self.sign.abs(), ..self }
    }

    pub fn recip(self) -> Option<Self> {
        (!self.is_zero()).then_some(SignedLog { sign: self.sign, ln_abs: -self.ln_abs })
    }

    pub fn powi(self, e: i32) -> Self {
        if self.is_zero() {
            return if e == 0 { Self::ONE } else { Self::ZERO };
        }
        let sign = if e % 2 == 0 { 1 } else { self.sign };
        SignedLog { sign, ln_abs: self.ln_abs * f64::from(e) }
    }
}

impl Mul for SignedLog {
    type Output = SignedLog;
    fn mul(self, rhs: SignedLog) -> SignedLog {
        SignedLog::new(self.sign * rhs.sign, self.ln_abs + rhs.ln_abs)
    }
}

impl Div for SignedLog {
    type Output = SignedLog;
    fn div(self, rhs: SignedLog) -> SignedLog {
        assert!(!rhs.is_zero(), "division by zero");
        SignedLog::new(self.sign * rhs.sign, self.ln_abs - rhs.ln_abs)
    }
}

impl Neg for SignedLog {
    type Output = SignedLog;
    fn neg(self) -> SignedLog {
        SignedLog { sign: -self.sign, ..self }
    }
}
