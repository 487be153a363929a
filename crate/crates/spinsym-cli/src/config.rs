//! Parsing of the command-line mini-languages: level grids, test functions,
//! families and precision modes.

use std::fmt;

use spinsym::catalog::{CharFamily, FamilySpec};
use spinsym::localization::{KRule, NamedSmooth, Orientation, PiRule, TestFunction};
use spinsym::spin_algebra::Precision;

/// A failure to turn command-line text into a run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

/// `start:stop:xF` (geometric, factor F) or `a,b,c`; the result is
/// positive and strictly ascending.
pub fn parse_grid(text: &str) -> Result<Vec<usize>, ConfigError> {
    let text = text.trim();
    let grid = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let [start, stop, step] = parts[..] else {
            return bad(format!("grid `{text}`: expected start:stop:xF"));
        };
        let start = parse_level(start)?;
        let stop = parse_level(stop)?;
        let Some(factor) = step.strip_prefix('x').and_then(|f| f.parse::<usize>().ok()) else {
            return bad(format!("grid `{text}`: step must look like x2"));
        };
        if factor < 2 {
            return bad(format!("grid `{text}`: factor must be at least 2"));
        }
        let mut out = Vec::new();
        let mut n = start;
        while n <= stop {
            out.push(n);
            n = n.checked_mul(factor).ok_or_else(|| ConfigError(format!("grid `{text}` overflows")))?;
        }
        out
    } else {
        text.split(',').map(parse_level).collect::<Result<Vec<_>, _>>()?
    };
    if grid.is_empty() {
        return bad(format!("grid `{text}` is empty"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return bad(format!("grid `{text}` is not strictly ascending"));
    }
    Ok(grid)
}

fn parse_level(s: &str) -> Result<usize, ConfigError> {
    match s.trim().parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => bad(format!("`{s}` is not a positive integer")),
    }
}

/// `exp`, `exp:S`, `pole:C`, `legendre:L` (or `pL`), `poly:a0,a1,...`,
/// `gaussian`, `cos-pi`, `reflect:<f>` or a JSON object.
pub fn parse_function(text: &str) -> Result<TestFunction, ConfigError> {
    let t = text.trim();
    if t.starts_with('{') {
        return serde_json::from_str(t).map_err(|e| ConfigError(format!("function `{t}`: {e}")));
    }
    let (head, arg) = match t.split_once(':') {
        Some((h, a)) => (h, Some(a)),
        None => (t, None),
    };
    let number = |a: Option<&str>| -> Result<f64, ConfigError> {
        let a = a.ok_or_else(|| ConfigError(format!("function `{t}` needs an argument")))?;
        a.trim().parse().map_err(|_| ConfigError(format!("function `{t}`: `{a}` is not a number")))
    };
    let f = match head {
        "exp" => TestFunction::Exp { scale: arg.map_or(Ok(1.0), |a| number(Some(a)))? },
        "pole" => TestFunction::RungePole { c: number(arg)? },
        "legendre" => TestFunction::Legendre { l: number(arg)? as usize },
        "poly" => {
            let coeffs = arg
                .ok_or_else(|| ConfigError(format!("function `{t}` needs coefficients")))?
                .split(',')
                .map(|c| c.trim().parse().map_err(|_| ConfigError(format!("function `{t}`: bad coefficient `{c}`"))))
                .collect::<Result<Vec<f64>, _>>()?;
            TestFunction::Poly { coeffs }
        }
        "gaussian" => TestFunction::Named { name: NamedSmooth::Gaussian },
        "cos-pi" => TestFunction::Named { name: NamedSmooth::CosPi },
        "reflect" => {
            let inner = arg.ok_or_else(|| ConfigError(format!("function `{t}` needs an inner function")))?;
            TestFunction::Reflected { inner: Box::new(parse_function(inner)?) }
        }
        p if p.starts_with('p') && p[1..].parse::<usize>().is_ok() => TestFunction::Legendre { l: p[1..].parse().unwrap() },
        _ => return bad(format!("unknown function `{t}`")),
    };
    f.validate().map_err(|e| ConfigError(e.to_string()))?;
    Ok(f)
}

pub fn parse_family(text: &str) -> Result<CharFamily, ConfigError> {
    FamilySpec::parse(text).and_then(|s| s.build()).map_err(|e| ConfigError(format!("family `{text}`: {e}")))
}

pub fn parse_precision(text: &str) -> Result<Precision, ConfigError> {
    match text {
        "exact" => Ok(Precision::Exact),
        "float" => Ok(Precision::Float),
        "auto" => Ok(Precision::Auto),
        other => bad(format!("precision `{other}`: expected exact, float or auto")),
    }
}

pub fn parse_orientation(text: &str) -> Result<Orientation, ConfigError> {
    match text {
        "localize" => Ok(Orientation::Localize),
        "anti" | "anti-localize" => Ok(Orientation::AntiLocalize),
        other => bad(format!("orientation `{other}`: expected localize or anti")),
    }
}

pub fn parse_k_rule(text: &str) -> Result<KRule, ConfigError> {
    match text {
        "nearest" => Ok(KRule::Nearest),
        "clamped" => Ok(KRule::Clamped),
        "floor" => Ok(KRule::Floor),
        "ceil" => Ok(KRule::Ceil),
        "sqrt-shift" => Ok(KRule::SqrtShift),
        other => bad(format!("k rule `{other}`: expected nearest, clamped, floor, ceil or sqrt-shift")),
    }
}

pub fn pi_rule(r: f64, rule: KRule) -> Result<PiRule, ConfigError> {
    PiRule::with_rule(r, rule).map_err(|e| ConfigError(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_and_list_grids() {
        assert_eq!(parse_grid("20:800:x2").unwrap(), vec![20, 40, 80, 160, 320, 640]);
        assert_eq!(parse_grid("4,8,16").unwrap(), vec![4, 8, 16]);
        assert_eq!(parse_grid("5:5:x3").unwrap(), vec![5]);
    }

    #[test]
    fn malformed_grids_are_rejected() {
        for text in ["", "0,4", "8,4", "4,4", "1:10:2", "1:10:x1", "a,b", "10:1:x2", "1:2"] {
            assert!(parse_grid(text).is_err(), "{text}");
        }
    }

    #[test]
    fn function_short_forms() {
        assert_eq!(parse_function("exp").unwrap(), TestFunction::exp());
        assert_eq!(parse_function("exp:2").unwrap(), TestFunction::Exp { scale: 2.0 });
        assert_eq!(parse_function("pole:3").unwrap(), TestFunction::RungePole { c: 3.0 });
        assert_eq!(parse_function("p4").unwrap(), TestFunction::Legendre { l: 4 });
        assert_eq!(parse_function("poly:1,0,2").unwrap(), TestFunction::Poly { coeffs: vec![1.0, 0.0, 2.0] });
        assert_eq!(parse_function("reflect:exp").unwrap(), TestFunction::exp().reflected());
        assert_eq!(parse_function(r#"{"kind": "runge_pole", "c": 2.5}"#).unwrap(), TestFunction::RungePole { c: 2.5 });
        assert!(parse_function("pole:0.5").is_err());
        assert!(parse_function("sin").is_err());
    }

    #[test]
    fn families_and_modes() {
        assert!(parse_family("sw-standard").is_ok());
        assert!(parse_family("dual:berezin").is_ok());
        assert!(parse_family("nonsense").is_err());
        assert_eq!(parse_precision("exact").unwrap(), Precision::Exact);
        assert!(parse_precision("fast").is_err());
        assert_eq!(parse_orientation("anti").unwrap(), Orientation::AntiLocalize);
        assert_eq!(parse_k_rule("floor").unwrap(), KRule::Floor);
    }
}
