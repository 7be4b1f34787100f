//! JSON form of formulas.
//!
//! ```text
//! {"n":2,"m":0,"set":{"op":"and","items":[{"atom":"x1^2+x2^2-1","rel":"le"}]}}
//! ```
//!
//! Polynomials are strings in the text grammar, or `{"sumsq":[..]}` / `{"prod":[..]}`
//! for unexpanded forms. Large expressions used more than once are written once
//! under `"defs"` and referenced as `{"ref":"p0"}`.

use std::collections::HashMap;
use std::sync::Arc;

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use super::{Atom, Formula, Node, Rel};
use crate::error::{Error, Result};
use crate::exact::{parse_poly, Ctx, PolyExpr};

fn expr_to_json(e: &PolyExpr) -> Value {
    match e {
        PolyExpr::Poly(p) => Value::String(p.to_string()),
        PolyExpr::SumSquares(v) => json!({ "sumsq": v.iter().map(expr_to_json).collect::<Vec<_>>() }),
        PolyExpr::Product(v) => json!({ "prod": v.iter().map(expr_to_json).collect::<Vec<_>>() }),
    }
}

fn worth_sharing(e: &PolyExpr) -> bool {
    match e {
        PolyExpr::Poly(p) => p.num_terms() >= 8,
        _ => true,
    }
}

pub fn formula_to_json(f: &Formula) -> Value {
    let atoms = f.atoms();
    let mut counts: HashMap<&PolyExpr, usize> = HashMap::new();
    let mut order: Vec<&PolyExpr> = Vec::new();
    for a in &atoms {
        let c = counts.entry(&*a.expr).or_insert(0);
        if *c == 0 {
            order.push(&a.expr);
        }
        *c += 1;
    }
    let mut names: HashMap<&PolyExpr, String> = HashMap::new();
    let mut defs = Map::new();
    for e in order {
        if counts[e] >= 2 && worth_sharing(e) {
            let name = format!("p{}", names.len());
            defs.insert(name.clone(), expr_to_json(e));
            names.insert(e, name);
        }
    }
    fn node(n: &Node, names: &HashMap<&PolyExpr, String>) -> Value {
        match n {
            Node::Atom(a) => {
                let poly = match names.get(&*a.expr) {
                    Some(name) => json!({ "ref": name }),
                    None => expr_to_json(&a.expr),
                };
                json!({ "atom": poly, "rel": a.rel.name() })
            }
            Node::And(v) => json!({ "op": "and", "items": v.iter().map(|c| node(c, names)).collect::<Vec<_>>() }),
            Node::Or(v) => json!({ "op": "or", "items": v.iter().map(|c| node(c, names)).collect::<Vec<_>>() }),
        }
    }
    let mut out = Map::new();
    out.insert("n".into(), json!(f.ctx().n));
    out.insert("m".into(), json!(f.ctx().m));
    if !defs.is_empty() {
        out.insert("defs".into(), Value::Object(defs));
    }
    out.insert("set".into(), node(f.root(), &names));
    Value::Object(out)
}

fn bad(path: &str, msg: impl Into<String>) -> Error {
    Error::Invalid(format!("{path}: {}", msg.into()))
}

fn expr_from_json(v: &Value, ctx: Ctx, defs: &HashMap<String, Arc<PolyExpr>>, path: &str) -> Result<Arc<PolyExpr>> {
    match v {
        Value::String(s) => {
            let p = parse_poly(s, ctx).map_err(|e| match e {
                Error::Parse { col, msg } => Error::Parse { col, msg: format!("{msg} (in {path})") },
                other => other,
            })?;
            Ok(Arc::new(PolyExpr::Poly(p)))
        }
        Value::Object(o) if o.len() == 1 => {
            let (k, inner) = o.iter().next().unwrap();
            match k.as_str() {
                "ref" => {
                    let name = inner.as_str().ok_or_else(|| bad(path, "ref must be a string"))?;
                    defs.get(name).cloned().ok_or_else(|| bad(path, format!("unknown ref {name:?}")))
                }
                "sumsq" | "prod" => {
                    let items = inner.as_array().ok_or_else(|| bad(path, format!("{k} expects an array")))?;
                    let children = items
                        .iter()
                        .enumerate()
                        .map(|(i, c)| expr_from_json(c, ctx, defs, &format!("{path}.{k}[{i}]")).map(|a| (*a).clone()))
                        .collect::<Result<Vec<_>>>()?;
                    let e = if k == "sumsq" { PolyExpr::sum_squares(children) } else { PolyExpr::product(children) };
                    Ok(Arc::new(e.map_err(|e| bad(path, e.to_string()))?))
                }
                other => Err(bad(path, format!("unknown polynomial node {other:?}"))),
            }
        }
        _ => Err(bad(path, "polynomial must be a string or a sumsq/prod/ref object")),
    }
}

fn node_from_json(v: &Value, ctx: Ctx, defs: &HashMap<String, Arc<PolyExpr>>, path: &str) -> Result<Node> {
    let o = v.as_object().ok_or_else(|| bad(path, "expected an object"))?;
    if let Some(a) = o.get("atom") {
        let rel_s = o.get("rel").and_then(|r| r.as_str()).ok_or_else(|| bad(path, "atom needs a string \"rel\""))?;
        let rel = Rel::parse(rel_s).ok_or_else(|| bad(path, format!("unknown relation {rel_s:?}")))?;
        let expr = expr_from_json(a, ctx, defs, &format!("{path}.atom"))?;
        return Ok(Node::Atom(Atom { expr, rel }));
    }
    let op = o.get("op").and_then(|r| r.as_str()).ok_or_else(|| bad(path, "node needs \"atom\" or \"op\""))?;
    let items = o.get("items").and_then(|r| r.as_array()).ok_or_else(|| bad(path, "\"items\" must be an array"))?;
    if items.is_empty() {
        return Err(bad(path, "empty \"items\""));
    }
    let children = items
        .iter()
        .enumerate()
        .map(|(i, c)| node_from_json(c, ctx, defs, &format!("{path}.items[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    match op {
        "and" => Ok(Node::And(children)),
        "or" => Ok(Node::Or(children)),
        other => Err(bad(path, format!("unknown op {other:?}"))),
    }
}

pub fn formula_from_json(v: &Value) -> Result<Formula> {
    let o = v.as_object().ok_or_else(|| bad("$", "expected an object"))?;
    let n = o.get("n").and_then(|x| x.as_u64()).ok_or_else(|| bad("$", "missing integer \"n\""))? as usize;
    let m = match o.get("m") {
        None => 0,
        Some(x) => x.as_u64().ok_or_else(|| bad("$", "\"m\" must be an integer"))? as usize,
    };
    if n == 0 {
        return Err(bad("$", "n must be at least 1"));
    }
    let ctx = Ctx::new(n, m);
    let mut defs = HashMap::new();
    if let Some(d) = o.get("defs") {
        let d = d.as_object().ok_or_else(|| bad("$.defs", "expected an object"))?;
        for (name, e) in d {
            let parsed = expr_from_json(e, ctx, &defs, &format!("$.defs.{name}"))?;
            defs.insert(name.clone(), parsed);
        }
    }
    let set = o.get("set").ok_or_else(|| bad("$", "missing \"set\""))?;
    Formula::new(ctx, node_from_json(set, ctx, &defs, "$.set")?)
}

/// SHA-256 of the canonical compact JSON.
pub fn formula_digest(f: &Formula) -> String {
    let text = serde_json::to_string(&formula_to_json(f)).expect("json serialization");
    let mut h = Sha256::new();
    h.update(text.as_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::InfPolynomial;

    #[test]
    fn parses_documented_example() {
        let v: Value = serde_json::from_str(r#"{"n":2,"m":0,"set":{"op":"and","items":[{"atom":"x1^2+x2^2-1","rel":"le"}]}}"#).unwrap();
        let f = formula_from_json(&v).unwrap();
        assert_eq!(f.ctx(), Ctx::new(2, 0));
        assert_eq!(f.diagram().unwrap().triple(), (2, 2, 2));
    }

    #[test]
    fn round_trip_with_shared_definitions() {
        let ctx = Ctx::new(2, 1);
        let big = PolyExpr::product(vec![
            PolyExpr::sum_squares(vec![parse_poly("x1^2 - z1", ctx).unwrap().into(), parse_poly("x2", ctx).unwrap().into()]).unwrap(),
            parse_poly("x1 + x2", ctx).unwrap().into(),
        ])
        .unwrap();
        let shared = Arc::new(big);
        let conj = |rel| Node::And(vec![Node::Atom(Atom { expr: shared.clone(), rel }), Node::atom(InfPolynomial::x(ctx, 1), Rel::Lt)]);
        let f = Formula::new(ctx, Node::Or(vec![conj(Rel::Eq), conj(Rel::Lt)])).unwrap();
        let v = formula_to_json(&f);
        assert!(v.get("defs").is_some());
        let back = formula_from_json(&v).unwrap();
        assert_eq!(back, f);
        assert_eq!(formula_digest(&back), formula_digest(&f));
    }

    #[test]
    fn error_paths() {
        let cases = [
            r#"{"m":0,"set":{"atom":"x1","rel":"le"}}"#,
            r#"{"n":1,"set":{"atom":"x1","rel":"lte"}}"#,
            r#"{"n":1,"set":{"op":"xor","items":[{"atom":"x1","rel":"le"}]}}"#,
            r#"{"n":1,"set":{"atom":{"ref":"nope"},"rel":"le"}}"#,
            r#"{"n":1,"set":{"atom":"x2","rel":"le"}}"#,
            r#"{"n":1,"set":{"op":"and","items":[]}}"#,
        ];
        for c in cases {
            let v: Value = serde_json::from_str(c).unwrap();
            assert!(formula_from_json(&v).is_err(), "{c}");
        }
    }
}
