use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the projector index k_n is chosen from r and n.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KRule {
    /// k_n = round(r·n) + 1, so that m = j − k_n + 1 is the integer or
    /// half-integer nearest to j(1 − 2r).
    #[default]
    Nearest,
    /// k_n = clamp(round(r·n), 1, n+1).
    Clamped,
    /// k_n = ⌊r·n⌋ + 1.
    Floor,
    /// k_n = clamp(⌈r·n⌉, 1, n+1).
    Ceil,
    /// k_n = round(r·n + √n) + 1, clamped; k_n/n still tends to r.
    SqrtShift,
}

/// An r-convergent choice of projector index at every level n.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiRule {
    pub r: f64,
    #[serde(default)]
    pub rule: KRule,
}

impl PiRule {
    pub fn new(r: f64) -> Result<Self> {
        PiRule::with_rule(r, KRule::default())
    }

    pub fn with_rule(r: f64, rule: KRule) -> Result<Self> {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::Invalid(format!("r = {r} must lie in [0, 1]")));
        }
        Ok(PiRule { r, rule })
    }

    /// k_n, always in 1..=n+1.
    pub fn k(&self, n: usize) -> usize {
        let rn = self.r * n as f64;
        let raw = match self.rule {
            KRule::Nearest => rn.round() + 1.0,
            KRule::Clamped => rn.round(),
            KRule::Floor => rn.floor() + 1.0,
            KRule::Ceil => rn.ceil(),
            KRule::SqrtShift => (rn + (n as f64).sqrt()).round() + 1.0,
        };
        (raw as usize).clamp(1, n + 1)
    }

    /// 1 − 2r.
    pub fn z0(&self) -> f64 {
        1.0 - 2.0 * self.r
    }
}

/// Whether a sequence is tested for localization at 1 − 2r or at 2r − 1.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    #[default]
    Localize,
    AntiLocalize,
}

impl Orientation {
    pub fn target(self, rule: &PiRule) -> f64 {
        match self {
            Orientation::Localize => rule.z0(),
            Orientation::AntiLocalize => -rule.z0(),
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Orientation::Localize => Orientation::AntiLocalize,
            Orientation::AntiLocalize => Orientation::Localize,
        }
    }
}
