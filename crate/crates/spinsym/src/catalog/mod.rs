//! Characteristic-number families c_l^n and their classification.

mod classify;
mod kernel;
mod spec;

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use parking_lot::RwLock;

pub use classify::{classify, mapping_positive_at, ClassificationReport, LevelVerdicts, PropertyVerdict, Verdict, MAPPING_POSITIVE_TOL};
pub use kernel::{from_kernel_weights, weights_from_chars, weights_from_chars_exact, KernelChars, KernelWeights};
pub use spec::{FamilySpec, RuleSpec};

use crate::error::{domain, Error, Result};
use crate::localization::TestFunction;
use crate::spin_algebra::{ExactValue, Precision, SignedLog};

/// How kernel weights are chosen at each level n.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightRule {
    /// I/(n+1); never injective, kept as the canonical singular example.
    Uniform,
    /// Π_1.
    First,
    /// Π_{n+1}.
    Last,
    /// ½(Π_{⌊j+1/2⌋} + Π_{⌊j+1⌋}).
    UpperMiddle,
    /// Fixed weights, defined at a single n.
    Explicit(KernelWeights),
}

impl WeightRule {
    fn weights(&self, n: usize) -> Result<KernelWeights> {
        match self {
            WeightRule::Uniform => Ok(KernelWeights::uniform(n)),
            WeightRule::First => KernelWeights::projector(n, 1),
            WeightRule::Last => KernelWeights::projector(n, n + 1),
            WeightRule::UpperMiddle => Ok(KernelWeights::upper_middle(n)),
            WeightRule::Explicit(w) if w.n() == n => Ok(w.clone()),
            WeightRule::Explicit(w) => domain(format!("explicit kernel is defined at n = {} only", w.n())),
        }
    }
}

/// The kinds of family the catalog knows.
#[derive(Clone, Debug, PartialEq)]
pub enum FamilyKind {
    StandardSw,
    AlternateSw,
    StandardBerezin,
    AlternateBerezin,
    StandardToeplitz,
    AlternateToeplitz,
    UpperMiddleState,
    LowerMiddleState,
    Dual(Box<FamilyKind>),
    KernelWeights(WeightRule),
    /// c_l^l = (2l+1)/a_l, and 1 (or (−1)^l) when n > l.
    Counterexample { f: TestFunction, anti: bool },
    /// Rows c_0..c_n keyed by n.
    Custom(BTreeMap<usize, Vec<f64>>),
}

type Memo = Arc<RwLock<HashMap<usize, Arc<Vec<f64>>>>>;

/// A bi-sequence of characteristic numbers (n, l) ↦ c_l^n with c_0^n = 1.
#[derive(Clone, Debug)]
pub struct CharFamily {
    kind: FamilyKind,
    // kernel-based kinds cache their whole row per n
    memo: Memo,
}

impl PartialEq for CharFamily {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl From<FamilyKind> for CharFamily {
    fn from(kind: FamilyKind) -> Self {
        CharFamily { kind, memo: Memo::default() }
    }
}

impl CharFamily {
    pub fn standard_sw() -> Self {
        FamilyKind::StandardSw.into()
    }
    pub fn alternate_sw() -> Self {
        FamilyKind::AlternateSw.into()
    }
    pub fn standard_berezin() -> Self {
        FamilyKind::StandardBerezin.into()
    }
    pub fn alternate_berezin() -> Self {
        FamilyKind::AlternateBerezin.into()
    }
    pub fn standard_toeplitz() -> Self {
        FamilyKind::StandardToeplitz.into()
    }
    pub fn alternate_toeplitz() -> Self {
        FamilyKind::AlternateToeplitz.into()
    }
    pub fn upper_middle_state() -> Self {
        FamilyKind::UpperMiddleState.into()
    }
    pub fn lower_middle_state() -> Self {
        FamilyKind::LowerMiddleState.into()
    }
    pub fn kernel(rule: WeightRule) -> Self {
        FamilyKind::KernelWeights(rule).into()
    }

    /// Custom rows c_0..c_n; c_0 must be 1 and no entry may vanish.
    pub fn custom(rows: BTreeMap<usize, Vec<f64>>) -> Result<Self> {
        for (n, row) in &rows {
            if row.len() != n + 1 {
                return Err(Error::Invalid(format!("custom row for n = {n} must hold c_0..c_{n}")));
            }
            if row[0] != 1.0 {
                return Err(Error::Invalid(format!("custom row for n = {n} must start with c_0 = 1")));
            }
            if let Some(l) = row.iter().position(|c| *c == 0.0 || !c.is_finite()) {
                return Err(Error::Singular { n: *n, l });
            }
        }
        Ok(FamilyKind::Custom(rows).into())
    }

    pub fn kind(&self) -> &FamilyKind {
        &self.kind
    }

    /// The dual family c̃ = 1/c. Dualising twice returns the original.
    pub fn dual(&self) -> Self {
        match &self.kind {
            FamilyKind::Dual(inner) => (**inner).clone().into(),
            FamilyKind::StandardSw | FamilyKind::AlternateSw => self.kind.clone().into(),
            other => FamilyKind::Dual(Box::new(other.clone())).into(),
        }
    }

    /// The family with c_l multiplied by (−1)^l.
    pub fn alternate(&self) -> Option<Self> {
        let kind = match &self.kind {
            FamilyKind::StandardSw => FamilyKind::AlternateSw,
            FamilyKind::AlternateSw => FamilyKind::StandardSw,
            FamilyKind::StandardBerezin => FamilyKind::AlternateBerezin,
            FamilyKind::AlternateBerezin => FamilyKind::StandardBerezin,
            FamilyKind::StandardToeplitz => FamilyKind::AlternateToeplitz,
            FamilyKind::AlternateToeplitz => FamilyKind::StandardToeplitz,
            FamilyKind::UpperMiddleState => FamilyKind::LowerMiddleState,
            FamilyKind::LowerMiddleState => FamilyKind::UpperMiddleState,
            FamilyKind::Counterexample { f, anti } => FamilyKind::Counterexample { f: f.clone(), anti: !anti },
            FamilyKind::Dual(inner) => {
                let alt = CharFamily::from((**inner).clone()).alternate()?;
                FamilyKind::Dual(Box::new(alt.kind))
            }
            _ => return None,
        };
        Some(kind.into())
    }

    pub fn name(&self) -> String {
        kind_name(&self.kind)
    }

    /// True for families whose characteristic numbers are built from a
    /// convex kernel, hence mapping-positive whenever injective.
    pub fn is_kernel_based(&self) -> bool {
        matches!(
            self.kind,
            FamilyKind::StandardBerezin
                | FamilyKind::AlternateBerezin
                | FamilyKind::UpperMiddleState
                | FamilyKind::LowerMiddleState
                | FamilyKind::KernelWeights(_)
        )
    }

    /// c_l^n in double precision. May overflow to ±∞ for families that grow
    /// exponentially in l; use [`CharFamily::signed_log`] for those.
    pub fn value(&self, n: usize, l: usize) -> Result<f64> {
        check_level(n, l)?;
        Ok(match &self.kind {
            FamilyKind::StandardSw => 1.0,
            FamilyKind::AlternateSw => alt_sign(l),
            FamilyKind::StandardBerezin => berezin(n, l),
            FamilyKind::AlternateBerezin => alt_sign(l) * berezin(n, l),
            FamilyKind::StandardToeplitz => 1.0 / berezin(n, l),
            FamilyKind::AlternateToeplitz => alt_sign(l) / berezin(n, l),
            FamilyKind::Counterexample { .. } => self.signed_log(n, l)?.to_f64(),
            FamilyKind::Dual(inner) => {
                let v = CharFamily::from((**inner).clone()).value(n, l)?;
                if v == 0.0 {
                    return Err(Error::Singular { n, l });
                }
                1.0 / v
            }
            FamilyKind::Custom(rows) => rows
                .get(&n)
                .map(|r| r[l])
                .ok_or_else(|| Error::Domain(format!("custom family has no row for n = {n}")))?,
            FamilyKind::UpperMiddleState | FamilyKind::LowerMiddleState | FamilyKind::KernelWeights(_) => {
                self.kernel_row(n)?[l]
            }
        })
    }

    /// c_l^n as sign and log-magnitude.
    pub fn signed_log(&self, n: usize, l: usize) -> Result<SignedLog> {
        check_level(n, l)?;
        Ok(match &self.kind {
            FamilyKind::StandardBerezin => SignedLog::new(1, ln_berezin(n, l)),
            FamilyKind::AlternateBerezin => SignedLog::new(alt_sign(l) as i8, ln_berezin(n, l)),
            FamilyKind::StandardToeplitz => SignedLog::new(1, -ln_berezin(n, l)),
            FamilyKind::AlternateToeplitz => SignedLog::new(alt_sign(l) as i8, -ln_berezin(n, l)),
            FamilyKind::Counterexample { f, anti } => {
                let base = if *anti { alt_sign(l) as i8 } else { 1 };
                if l == n {
                    let a = f.ln_coeffs(l)?[l];
                    check_nonvanishing(f, a, l)?;
                    SignedLog::from_f64((2 * l + 1) as f64) / a
                } else {
                    SignedLog::new(base, 0.0)
                }
            }
            FamilyKind::Dual(inner) => CharFamily::from((**inner).clone())
                .signed_log(n, l)?
                .recip()
                .ok_or(Error::Singular { n, l })?,
            _ => SignedLog::from_f64(self.value(n, l)?),
        })
    }

    /// c_l^n exactly, for the kinds that have closed forms.
    pub fn exact(&self, n: usize, l: usize) -> Result<Option<ExactValue>> {
        check_level(n, l)?;
        let sign = alt_sign(l) as i8;
        Ok(match &self.kind {
            FamilyKind::StandardSw => Some(ExactValue::one()),
            FamilyKind::AlternateSw => Some(ExactValue::new(sign, BigRational::from_integer(1.into()))),
            FamilyKind::StandardBerezin => Some(berezin_exact(n, l)),
            FamilyKind::AlternateBerezin => Some(ExactValue::new(sign, berezin_exact(n, l).square().clone())),
            FamilyKind::StandardToeplitz => berezin_exact(n, l).recip(),
            FamilyKind::AlternateToeplitz => berezin_exact(n, l).recip().map(|v| ExactValue::new(sign, v.square().clone())),
            FamilyKind::UpperMiddleState | FamilyKind::LowerMiddleState | FamilyKind::KernelWeights(_) => {
                let w = self.level_weights(n)?;
                let chars = from_kernel_weights(&w, Precision::Exact)?;
                chars.exact.map(|e| {
                    let v = e[l].clone();
                    if matches!(self.kind, FamilyKind::LowerMiddleState) && l % 2 == 1 {
                        -v
                    } else {
                        v
                    }
                })
            }
            FamilyKind::Dual(inner) => match CharFamily::from((**inner).clone()).exact(n, l)? {
                Some(v) => Some(v.recip().ok_or(Error::Singular { n, l })?),
                None => None,
            },
            FamilyKind::Counterexample { .. } | FamilyKind::Custom(_) => None,
        })
    }

    /// c_0^n..c_n^n. Fails with [`Error::Singular`] when a kernel-based
    /// family has a vanishing entry.
    pub fn char_numbers(&self, n: usize) -> Result<Vec<f64>> {
        check_level(n, 0)?;
        match &self.kind {
            FamilyKind::UpperMiddleState | FamilyKind::LowerMiddleState | FamilyKind::KernelWeights(_) => {
                Ok(self.kernel_row(n)?.to_vec())
            }
            _ => (0..=n).map(|l| self.value(n, l)).collect(),
        }
    }

    /// c_0^n..c_n^n as signed logs.
    pub fn signed_logs(&self, n: usize) -> Result<Vec<SignedLog>> {
        match &self.kind {
            FamilyKind::Counterexample { f, anti } => {
                let mut out: Vec<SignedLog> =
                    (0..=n).map(|l| SignedLog::new(if *anti { alt_sign(l) as i8 } else { 1 }, 0.0)).collect();
                let a = f.ln_coeffs(n)?[n];
                check_nonvanishing(f, a, n)?;
                out[n] = SignedLog::from_f64((2 * n + 1) as f64) / a;
                Ok(out)
            }
            FamilyKind::Dual(inner) => CharFamily::from((**inner).clone())
                .signed_logs(n)?
                .into_iter()
                .enumerate()
                .map(|(l, v)| v.recip().ok_or(Error::Singular { n, l }))
                .collect(),
            FamilyKind::UpperMiddleState | FamilyKind::LowerMiddleState | FamilyKind::KernelWeights(_) => {
                Ok(self.char_numbers(n)?.into_iter().map(SignedLog::from_f64).collect())
            }
            _ => (0..=n).map(|l| self.signed_log(n, l)).collect(),
        }
    }

    /// Kernel weights at level n for kernel-based kinds.
    pub fn level_weights(&self, n: usize) -> Result<KernelWeights> {
        match &self.kind {
            FamilyKind::UpperMiddleState | FamilyKind::LowerMiddleState => Ok(KernelWeights::upper_middle(n)),
            FamilyKind::KernelWeights(rule) => rule.weights(n),
            FamilyKind::StandardBerezin => KernelWeights::projector(n, 1),
            FamilyKind::AlternateBerezin => KernelWeights::projector(n, n + 1),
            _ => domain(format!("{} is not defined by a kernel", self.name())),
        }
    }

    fn kernel_row(&self, n: usize) -> Result<Arc<Vec<f64>>> {
        if let Some(row) = self.memo.read().get(&n) {
            return Ok(row.clone());
        }
        let chars = from_kernel_weights(&self.level_weights(n)?, Precision::Auto)?;
        if let Some(&l) = chars.vanishing.first() {
            return Err(Error::Singular { n, l });
        }
        let mut values = chars.values;
        if matches!(self.kind, FamilyKind::LowerMiddleState) {
            for (l, v) in values.iter_mut().enumerate() {
                *v *= alt_sign(l);
            }
        }
        let row = Arc::new(values);
        self.memo.write().insert(n, row.clone());
        Ok(row)
    }
}

/// The family of the localization counterexample built from `f`. Its
/// Legendre coefficients must not vanish.
pub fn counterexample_family(f: TestFunction, anti: bool) -> Result<CharFamily> {
    f.validate()?;
    if f.degree().is_some() {
        return Err(Error::Domain("a polynomial has vanishing Legendre coefficients".into()));
    }
    Ok(FamilyKind::Counterexample { f, anti }.into())
}

/// Coefficients from quadrature count as vanishing below this size.
pub const VANISHING_COEFF_TOL: f64 = 1e-14;

fn check_nonvanishing(f: &TestFunction, a: SignedLog, l: usize) -> Result<()> {
    let vanishes = a.is_zero() || (!f.has_analytic_coeffs() && a.abs().to_f64() < VANISHING_COEFF_TOL);
    if vanishes {
        return domain(format!("Legendre coefficient a_{l} vanishes"));
    }
    Ok(())
}

fn check_level(n: usize, l: usize) -> Result<()> {
    if n == 0 {
        return domain("level n must be at least 1");
    }
    if l > n {
        return domain(format!("l = {l} exceeds n = {n}"));
    }
    Ok(())
}

fn alt_sign(l: usize) -> f64 {
    if l % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// b_l^n = ∏_{i=1}^{l} √((n+1−i)/(n+1+i)).
fn berezin(n: usize, l: usize) -> f64 {
    let v: f64 = (1..=l).map(|i| ((n + 1 - i) as f64 / (n + 1 + i) as f64).sqrt()).product();
    if v > 0.0 {
        v
    } else {
        ln_berezin(n, l).exp()
    }
}

fn ln_berezin(n: usize, l: usize) -> f64 {
    0.5 * (1..=l).map(|i| (-2.0 * i as f64 / (n + 1 + i) as f64).ln_1p()).sum::<f64>()
}

/// b_l^n = n!√(n+1)/√((n+l+1)!(n−l)!) as an exact value.
fn berezin_exact(n: usize, l: usize) -> ExactValue {
    let mut num = BigInt::from(1);
    let mut den = BigInt::from(1);
    for i in 1..=l {
        num *= n + 1 - i;
        den *= n + 1 + i;
    }
    ExactValue::new(1, BigRational::new(num, den))
}

fn kind_name(kind: &FamilyKind) -> String {
    match kind {
        FamilyKind::StandardSw => "standard-sw".into(),
        FamilyKind::AlternateSw => "alternate-sw".into(),
        FamilyKind::StandardBerezin => "standard-berezin".into(),
        FamilyKind::AlternateBerezin => "alternate-berezin".into(),
        FamilyKind::StandardToeplitz => "standard-toeplitz".into(),
        FamilyKind::AlternateToeplitz => "alternate-toeplitz".into(),
        FamilyKind::UpperMiddleState => "upper-middle-state".into(),
        FamilyKind::LowerMiddleState => "lower-middle-state".into(),
        FamilyKind::Dual(inner) => format!("dual({})", kind_name(inner)),
        FamilyKind::KernelWeights(rule) => match rule {
            WeightRule::Uniform => "kernel(uniform)".into(),
            WeightRule::First => "kernel(first)".into(),
            WeightRule::Last => "kernel(last)".into(),
            WeightRule::UpperMiddle => "kernel(upper-middle)".into(),
            WeightRule::Explicit(w) => format!("kernel(explicit, n = {})", w.n()),
        },
        FamilyKind::Counterexample { anti, .. } => {
            if *anti {
                "anti-counterexample".into()
            } else {
                "counterexample".into()
            }
        }
        FamilyKind::Custom(_) => "custom".into(),
    }
}
