use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{counterexample_family, CharFamily, FamilyKind, KernelWeights, WeightRule};
use crate::error::{Error, Result};
use crate::localization::TestFunction;

/// JSON description of a family, e.g. `{"kind": "berezin", "alternate": false}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    Sw {
        #[serde(default)]
        alternate: bool,
    },
    Berezin {
        #[serde(default)]
        alternate: bool,
    },
    Toeplitz {
        #[serde(default)]
        alternate: bool,
    },
    UpperMiddle,
    LowerMiddle,
    Dual {
        of: Box<FamilySpec>,
    },
    KernelWeights {
        rule: RuleSpec,
    },
    Counterexample {
        f: TestFunction,
        #[serde(default)]
        anti: bool,
    },
    /// Keys are n; rows hold c_1..c_n or c_0..c_n.
    Custom {
        table: BTreeMap<String, Vec<f64>>,
    },
}

/// `"uniform" | "first" | "last" | "upper_middle"` or explicit weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RuleSpec {
    Named(String),
    Weights(Vec<f64>),
}

impl FamilySpec {
    /// Parses JSON, or one of the short names `sw`, `sw-alternate`,
    /// `berezin`, `berezin-alternate`, `toeplitz`, `toeplitz-alternate`,
    /// `upper-middle`, `lower-middle`, optionally prefixed by `dual:`.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if t.starts_with('{') {
            return serde_json::from_str(t).map_err(|e| Error::Invalid(format!("family spec: {e}")));
        }
        if let Some(rest) = t.strip_prefix("dual:") {
            return Ok(FamilySpec::Dual { of: Box::new(Self::parse(rest)?) });
        }
        Ok(match t {
            "sw" | "sw-standard" | "standard-sw" => FamilySpec::Sw { alternate: false },
            "sw-alternate" | "alternate-sw" => FamilySpec::Sw { alternate: true },
            "berezin" | "berezin-standard" | "standard-berezin" => FamilySpec::Berezin { alternate: false },
            "berezin-alternate" | "alternate-berezin" => FamilySpec::Berezin { alternate: true },
            "toeplitz" | "toeplitz-standard" | "standard-toeplitz" => FamilySpec::Toeplitz { alternate: false },
            "toeplitz-alternate" | "alternate-toeplitz" => FamilySpec::Toeplitz { alternate: true },
            "upper-middle" | "upper-middle-state" => FamilySpec::UpperMiddle,
            "lower-middle" | "lower-middle-state" => FamilySpec::LowerMiddle,
            other => return Err(Error::Invalid(format!("unknown family `{other}`"))),
        })
    }

    pub fn build(&self) -> Result<CharFamily> {
        Ok(match self {
            FamilySpec::Sw { alternate: false } => CharFamily::standard_sw(),
            FamilySpec::Sw { alternate: true } => CharFamily::alternate_sw(),
            FamilySpec::Berezin { alternate: false } => CharFamily::standard_berezin(),
            FamilySpec::Berezin { alternate: true } => CharFamily::alternate_berezin(),
            FamilySpec::Toeplitz { alternate: false } => CharFamily::standard_toeplitz(),
            FamilySpec::Toeplitz { alternate: true } => CharFamily::alternate_toeplitz(),
            FamilySpec::UpperMiddle => CharFamily::upper_middle_state(),
            FamilySpec::LowerMiddle => CharFamily::lower_middle_state(),
            FamilySpec::Dual { of } => of.build()?.dual(),
            FamilySpec::KernelWeights { rule } => CharFamily::kernel(match rule {
                RuleSpec::Named(name) => match name.as_str() {
                    "uniform" => WeightRule::Uniform,
                    "first" => WeightRule::First,
                    "last" => WeightRule::Last,
                    "upper_middle" | "upper-middle" => WeightRule::UpperMiddle,
                    other => return Err(Error::Invalid(format!("unknown weight rule `{other}`"))),
                },
                RuleSpec::Weights(w) => WeightRule::Explicit(KernelWeights::new(w.clone())?),
            }),
            FamilySpec::Counterexample { f, anti } => counterexample_family(f.clone(), *anti)?,
            FamilySpec::Custom { table } => {
                let mut rows = BTreeMap::new();
                for (key, row) in table {
                    let n: usize =
                        key.parse().map_err(|_| Error::Invalid(format!("custom table key `{key}` is not an integer")))?;
                    let full = if row.len() == n { std::iter::once(1.0).chain(row.iter().copied()).collect() } else { row.clone() };
                    rows.insert(n, full);
                }
                CharFamily::custom(rows)?
            }
        })
    }
}

impl CharFamily {
    pub fn from_spec(spec: &FamilySpec) -> Result<Self> {
        spec.build()
    }

    /// JSON description, when the family has one.
    pub fn to_spec(&self) -> Option<FamilySpec> {
        Some(match self.kind() {
            FamilyKind::StandardSw => FamilySpec::Sw { alternate: false },
            FamilyKind::AlternateSw => FamilySpec::Sw { alternate: true },
            FamilyKind::StandardBerezin => FamilySpec::Berezin { alternate: false },
            FamilyKind::AlternateBerezin => FamilySpec::Berezin { alternate: true },
            FamilyKind::StandardToeplitz => FamilySpec::Toeplitz { alternate: false },
            FamilyKind::AlternateToeplitz => FamilySpec::Toeplitz { alternate: true },
            FamilyKind::UpperMiddleState => FamilySpec::UpperMiddle,
            FamilyKind::LowerMiddleState => FamilySpec::LowerMiddle,
            FamilyKind::Dual(inner) => {
                FamilySpec::Dual { of: Box::new(CharFamily::from((**inner).clone()).to_spec()?) }
            }
            FamilyKind::Counterexample { f, anti } => FamilySpec::Counterexample { f: f.clone(), anti: *anti },
            FamilyKind::KernelWeights(rule) => FamilySpec::KernelWeights {
                rule: match rule {
                    WeightRule::Uniform => RuleSpec::Named("uniform".into()),
                    WeightRule::First => RuleSpec::Named("first".into()),
                    WeightRule::Last => RuleSpec::Named("last".into()),
                    WeightRule::UpperMiddle => RuleSpec::Named("upper_middle".into()),
                    WeightRule::Explicit(w) => RuleSpec::Weights(w.weights().to_vec()),
                },
            },
            FamilyKind::Custom(rows) => {
                FamilySpec::Custom { table: rows.iter().map(|(n, r)| (n.to_string(), r.clone())).collect() }
            }
        })
    }
}
