//! Parsers for the compact command-line spellings of config values.

use std::path::PathBuf;

use dyadic_lab::compactness::{DiniModulus, KernelKind, KernelSpec, Omega};
use dyadic_lab::Exponent;

use crate::config::{FunctionSource, SpaceConfig, SymbolSource, WeightSource};

fn number(text: &str, what: &str) -> Result<f64, String> {
    text.trim().parse::<f64>().map_err(|_| format!("{what}: `{text}` is not a number"))
}

/// `x` or `x;y`.
fn point(text: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = text.split(';').collect();
    match parts.as_slice() {
        [x] => Ok([number(x, "center")?, 0.0]),
        [x, y] => Ok([number(x, "center")?, number(y, "center")?]),
        _ => Err(format!("center `{text}` should be `x` or `x;y`")),
    }
}

/// `ones`, `lognormal:σ`, `power:α[@x;y]` (centre defaults to the origin) or a file path.
pub fn weight(text: &str) -> Result<WeightSource, String> {
    match text.split_once(':') {
        _ if text == "ones" => Ok(WeightSource::Ones),
        Some(("lognormal", sigma)) => Ok(WeightSource::LogNormal { sigma: number(sigma, "sigma")? }),
        Some(("power", rest)) => {
            let (alpha, center) = match rest.split_once('@') {
                Some((a, c)) => (a, point(c)?),
                None => (rest, [0.0, 0.0]),
            };
            Ok(WeightSource::Power { alpha: number(alpha, "alpha")?, center })
        }
        _ => Ok(WeightSource::File { path: PathBuf::from(text) }),
    }
}

/// `signed`, `nonnegative`, `lognormal:σ`, `constant:v` or a file path.
pub fn function(text: &str) -> Result<FunctionSource, String> {
    match text.split_once(':') {
        _ if text == "signed" => Ok(FunctionSource::Signed),
        _ if text == "nonnegative" => Ok(FunctionSource::Nonnegative),
        Some(("lognormal", sigma)) => Ok(FunctionSource::LogNormal { sigma: number(sigma, "sigma")? }),
        Some(("constant", v)) => Ok(FunctionSource::Constant { value: number(v, "constant")? }),
        _ => Ok(FunctionSource::File { path: PathBuf::from(text) }),
    }
}

/// `weighted:p=2,w=<weight>` or `variable:p=<function>,w=<weight>`; `w` is optional.
pub fn space(text: &str) -> Result<SpaceConfig, String> {
    let (kind, rest) = text.split_once(':').ok_or_else(|| format!("space `{text}` should start with `weighted:` or `variable:`"))?;
    let mut p = None;
    let mut w = None;
    for item in rest.split(',') {
        match item.split_once('=') {
            Some(("p", v)) => p = Some(v),
            Some(("w", v)) => w = Some(weight(v)?),
            _ => return Err(format!("space item `{item}` should be `p=...` or `w=...`")),
        }
    }
    let p = p.ok_or_else(|| format!("space `{text}` has no `p=`"))?;
    match kind {
        "weighted" => Ok(SpaceConfig::Weighted { p: p.parse::<Exponent>().map_err(|e| e.to_string())?, weight: w }),
        "variable" => Ok(SpaceConfig::Variable { p: function(p)?, weight: w }),
        other => Err(format!("unknown space kind `{other}`")),
    }
}

/// `a..b` (inclusive) or a comma list.
pub fn depths(text: &str) -> Result<Vec<u32>, String> {
    let parse = |s: &str| s.trim().parse::<u32>().map_err(|_| format!("depth `{s}` is not an integer"));
    match text.split_once("..") {
        Some((a, b)) => {
            let (a, b) = (parse(a)?, parse(b.trim_start_matches('='))?);
            if a > b {
                return Err(format!("empty depth range {text}"));
            }
            Ok((a..=b).collect())
        }
        None => text.split(',').map(parse).collect(),
    }
}

pub fn tails(text: &str) -> Result<Vec<usize>, String> {
    text.split(',').map(|s| s.trim().parse::<usize>().map_err(|_| format!("tail `{s}` is not an integer"))).collect()
}

/// `hilbert`, `dini` (ω(t) = t^{1/2}) or `rough` (Ω = sign in one dimension,
/// cos 2φ in two).
pub fn kernel(text: &str, dim: u32, truncation: usize) -> Result<KernelSpec, String> {
    let kind = match text {
        "hilbert" => KernelKind::Hilbert,
        "dini" => KernelKind::Dini { modulus: DiniModulus::power(0.5, 64).map_err(|e| e.to_string())? },
        "rough" if dim == 1 => KernelKind::Rough { omega: Omega::Line { plus: 1.0, minus: -1.0 } },
        "rough" => KernelKind::Rough { omega: Omega::Circle { constant: 0.0, cos: vec![0.0, 1.0], sin: vec![] } },
        other => return Err(format!("unknown kernel `{other}`, expected hilbert, dini or rough")),
    };
    Ok(KernelSpec { kind, truncation })
}

/// `bump[:width]`, `jump`, `log` or a file path. The bump is centred in the domain.
pub fn symbol(text: &str, dim: u32) -> Result<SymbolSource, String> {
    let center = [0.5, if dim == 2 { 0.5 } else { 0.0 }];
    match text.split_once(':') {
        _ if text == "bump" => Ok(SymbolSource::Bump { center, width: 0.25 }),
        _ if text == "jump" => Ok(SymbolSource::Jump),
        _ if text == "log" => Ok(SymbolSource::Log),
        Some(("bump", width)) => Ok(SymbolSource::Bump { center, width: number(width, "width")? }),
        _ => Ok(SymbolSource::File { path: PathBuf::from(text) }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spaces() {
        assert_eq!(
            space("weighted:p=3/2,w=power:0.3@0.5").unwrap(),
            SpaceConfig::Weighted { p: Exponent::ratio(3, 2), weight: Some(WeightSource::Power { alpha: 0.3, center: [0.5, 0.0] }) }
        );
        assert_eq!(
            space("variable:p=p.json,w=w.csv").unwrap(),
            SpaceConfig::Variable {
                p: FunctionSource::File { path: "p.json".into() },
                weight: Some(WeightSource::File { path: "w.csv".into() })
            }
        );
        assert_eq!(space("weighted:p=inf").unwrap(), SpaceConfig::Weighted { p: Exponent::infinity(), weight: None });
        assert!(space("weighted:q=2").is_err());
        assert!(space("banach:p=2").is_err());
    }

    #[test]
    fn ranges_and_lists() {
        assert_eq!(depths("6..10").unwrap(), vec![6, 7, 8, 9, 10]);
        assert_eq!(depths("6,8").unwrap(), vec![6, 8]);
        assert!(depths("9..6").is_err());
        assert_eq!(tails("8,16,32").unwrap(), vec![8, 16, 32]);
    }

    #[test]
    fn sources() {
        assert_eq!(weight("lognormal:0.5").unwrap(), WeightSource::LogNormal { sigma: 0.5 });
        assert_eq!(function("constant:2").unwrap(), FunctionSource::Constant { value: 2.0 });
        assert!(matches!(kernel("rough", 2, 1).unwrap().kind, KernelKind::Rough { omega: Omega::Circle { .. } }));
        assert!(kernel("riesz", 1, 1).is_err());
        assert_eq!(symbol("bump:0.1", 1).unwrap(), SymbolSource::Bump { center: [0.5, 0.0], width: 0.1 });
    }
}
