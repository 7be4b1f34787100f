use std::path::Path;

use defchoice::exact::rational::{parse_rational, to_f64};
use defchoice::exact::{parse_poly, InfPolynomial, Rational};
use defchoice::formula::{formula_from_json, Formula};
use defchoice::{Error, PipelineConfig, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Problem file as written by the user.
///
/// ```text
/// {"set": {"n": 2, "set": {"atom": "x1^2 + x2^2 - 1", "rel": "eq"}},
///  "ell": 1, "epsilon": 0.1, "rho": "2", "map": ["x1"], "config": {"grid": "1/64"}, "seed": 7}
/// ```
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub set: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<PipelineConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Command-line values that override the problem file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub epsilon: Option<f64>,
    pub ell: Option<usize>,
    pub rho: Option<String>,
    pub grid: Option<String>,
    pub eta: Option<String>,
    pub big_k: Option<u32>,
    pub seed: Option<u64>,
    pub tolerance_scale: Option<f64>,
}

/// A problem with the overrides applied and every field parsed.
#[derive(Clone, Debug)]
pub struct Problem {
    pub spec: ProblemSpec,
    pub set: Formula,
    pub ell: Option<usize>,
    pub epsilon: Option<f64>,
    pub rho: Option<Rational>,
    pub map: Option<Vec<InfPolynomial>>,
    pub config: PipelineConfig,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}

pub fn load(path: &Path, ov: &Overrides) -> Result<Problem> {
    let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    let spec: ProblemSpec = serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    resolve(spec, ov)
}

pub fn resolve(mut spec: ProblemSpec, ov: &Overrides) -> Result<Problem> {
    if ov.epsilon.is_some() {
        spec.epsilon = ov.epsilon;
    }
    if ov.ell.is_some() {
        spec.ell = ov.ell;
    }
    if ov.rho.is_some() {
        spec.rho = ov.rho.clone();
    }
    if ov.seed.is_some() {
        spec.seed = ov.seed;
    }
    let mut config = spec.config.clone().unwrap_or_default();
    if let Some(g) = &ov.grid {
        config.grid = parse_rational(g)?;
    }
    if let Some(e) = &ov.eta {
        config.eta = parse_rational(e)?;
    }
    if let Some(k) = ov.big_k {
        config.big_k = k;
    }
    if let Some(t) = ov.tolerance_scale {
        config.tolerance_scale = t;
    }
    if let Some(s) = spec.seed {
        config.seed = s;
    }
    if to_f64(&config.grid) <= 0.0 {
        return Err(invalid("grid step must be positive"));
    }
    if !(config.tolerance_scale > 0.0) {
        return Err(invalid("tolerance scale must be positive"));
    }
    spec.config = Some(config.clone());

    let set = formula_from_json(&spec.set)?;
    let n = set.ctx().n;
    if set.ctx().m != 0 {
        return Err(invalid("the set must be defined over Q (m = 0)"));
    }
    if let Some(sn) = spec.n {
        if sn != n {
            return Err(invalid(format!("spec says n = {sn} but the set has n = {n}")));
        }
    }
    let rho = spec.rho.as_deref().map(parse_rational).transpose()?;
    if let Some(r) = &rho {
        if to_f64(r) <= 0.0 {
            return Err(invalid("rho must be positive"));
        }
    }
    if let Some(e) = spec.epsilon {
        if !(e > 0.0 && e.is_finite()) {
            return Err(invalid(format!("epsilon = {e} must be positive")));
        }
    }
    let map = match &spec.map {
        None => None,
        Some(v) if v.is_empty() => return Err(invalid("the map needs at least one component")),
        Some(v) => Some(v.iter().map(|s| parse_poly(s, set.ctx())).collect::<Result<Vec<_>>>()?),
    };
    if let (Some(l), None) = (spec.ell, &map) {
        if l > n {
            return Err(invalid(format!("ell = {l} exceeds n = {n}")));
        }
    }
    Ok(Problem { ell: spec.ell, epsilon: spec.epsilon, rho, map, config, set, spec })
}

impl Problem {
    pub fn need_ell(&self) -> Result<usize> {
        self.ell.ok_or_else(|| invalid("missing ell (spec field or --ell)"))
    }

    pub fn need_epsilon(&self) -> Result<f64> {
        self.epsilon.ok_or_else(|| invalid("missing epsilon (spec field or --epsilon)"))
    }

    pub fn need_rho(&self) -> Result<&Rational> {
        self.rho.as_ref().ok_or_else(|| invalid("missing rho (spec field or --rho)"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn spec(v: Value) -> ProblemSpec {
        serde_json::from_value(v).unwrap()
    }

    #[test]
    fn overrides_win() {
        let s = spec(json!({"set": {"n": 2, "set": {"atom": "x1^2 + x2^2 - 1", "rel": "eq"}}, "epsilon": 0.2, "seed": 1}));
        let ov = Overrides { epsilon: Some(0.1), grid: Some("1/64".into()), seed: Some(9), ..Overrides::default() };
        let p = resolve(s, &ov).unwrap();
        assert_eq!(p.epsilon, Some(0.1));
        assert_eq!(p.config.grid, defchoice::exact::rational::rat(1, 64));
        assert_eq!(p.config.seed, 9);
    }

    #[test]
    fn rejects_bad_fields() {
        let base = json!({"n": 1, "set": {"atom": "x1", "rel": "le"}});
        assert!(resolve(spec(json!({"set": base, "epsilon": 0.0})), &Overrides::default()).is_err());
        assert!(resolve(spec(json!({"set": base, "ell": 2})), &Overrides::default()).is_err());
        assert!(resolve(spec(json!({"set": base, "n": 3})), &Overrides::default()).is_err());
        assert!(resolve(spec(json!({"set": base, "map": ["x1 +"]})), &Overrides::default()).is_err());
        assert!(serde_json::from_value::<ProblemSpec>(json!({"set": base, "eps": 1})).is_err());
    }
}
