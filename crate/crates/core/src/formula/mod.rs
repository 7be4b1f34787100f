//! Quantifier-free semialgebraic formulas.

mod json;

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{Ctx, InfPolynomial, PolyExpr, Rational, Sign};

pub use json::{formula_digest, formula_from_json, formula_to_json};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rel {
    Eq,
    Lt,
    Le,
    Gt,
    Ge,
    Ne,
}

impl Rel {
    pub fn negate(self) -> Rel {
        match self {
            Rel::Eq => Rel::Ne,
            Rel::Ne => Rel::Eq,
            Rel::Lt => Rel::Ge,
            Rel::Ge => Rel::Lt,
            Rel::Le => Rel::Gt,
            Rel::Gt => Rel::Le,
        }
    }

    /// Signs satisfying the relation, in DNF expansion order.
    pub fn signs(self) -> &'static [Sign] {
        match self {
            Rel::Eq => &[Sign::Zero],
            Rel::Lt => &[Sign::Neg],
            Rel::Gt => &[Sign::Pos],
            Rel::Le => &[Sign::Neg, Sign::Zero],
            Rel::Ge => &[Sign::Pos, Sign::Zero],
            Rel::Ne => &[Sign::Neg, Sign::Pos],
        }
    }

    pub fn holds(self, s: Sign) -> bool {
        self.signs().contains(&s)
    }

    pub fn from_sign(s: Sign) -> Rel {
        match s {
            Sign::Zero => Rel::Eq,
            Sign::Neg => Rel::Lt,
            Sign::Pos => Rel::Gt,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Eq => "=",
            Rel::Lt => "<",
            Rel::Le => "<=",
            Rel::Gt => ">",
            Rel::Ge => ">=",
            Rel::Ne => "!=",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Rel::Eq => "eq",
            Rel::Lt => "lt",
            Rel::Le => "le",
            Rel::Gt => "gt",
            Rel::Ge => "ge",
            Rel::Ne => "ne",
        }
    }

    pub fn parse(s: &str) -> Option<Rel> {
        Some(match s {
            "eq" | "=" | "==" => Rel::Eq,
            "lt" | "<" => Rel::Lt,
            "le" | "<=" => Rel::Le,
            "gt" | ">" => Rel::Gt,
            "ge" | ">=" => Rel::Ge,
            "ne" | "!=" => Rel::Ne,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Atom {
    pub expr: Arc<PolyExpr>,
    pub rel: Rel,
}

impl Atom {
    pub fn new(expr: impl Into<PolyExpr>, rel: Rel) -> Self {
        Atom { expr: Arc::new(expr.into()), rel }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Atom(Atom),
    And(Vec<Node>),
    Or(Vec<Node>),
}

impl Node {
    pub fn atom(expr: impl Into<PolyExpr>, rel: Rel) -> Node {
        Node::Atom(Atom::new(expr, rel))
    }

    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a Atom>) {
        match self {
            Node::Atom(a) => out.push(a),
            Node::And(v) | Node::Or(v) => v.iter().for_each(|c| c.collect_atoms(out)),
        }
    }

    pub fn map_exprs(&self, f: &mut dyn FnMut(&PolyExpr) -> Result<PolyExpr>) -> Result<Node> {
        self.map_shared(f, &mut HashMap::new())
    }

    // Atoms sharing one expression (as in an expanded sign-DNF) are mapped once
    // and keep sharing the result.
    fn map_shared(
        &self,
        f: &mut dyn FnMut(&PolyExpr) -> Result<PolyExpr>,
        seen: &mut HashMap<*const PolyExpr, Arc<PolyExpr>>,
    ) -> Result<Node> {
        Ok(match self {
            Node::Atom(a) => {
                let key = Arc::as_ptr(&a.expr);
                let expr = match seen.get(&key) {
                    Some(e) => e.clone(),
                    None => {
                        let e = Arc::new(f(&a.expr)?);
                        seen.insert(key, e.clone());
                        e
                    }
                };
                Node::Atom(Atom { expr, rel: a.rel })
            }
            Node::And(v) => Node::And(v.iter().map(|c| c.map_shared(f, seen)).collect::<Result<_>>()?),
            Node::Or(v) => Node::Or(v.iter().map(|c| c.map_shared(f, seen)).collect::<Result<_>>()?),
        })
    }

    fn eval(&self, point: &[Rational]) -> bool {
        match self {
            Node::Atom(a) => a.rel.holds(Sign::of(&a.expr.eval_unchecked(point))),
            Node::And(v) => v.iter().all(|c| c.eval(point)),
            Node::Or(v) => v.iter().any(|c| c.eval(point)),
        }
    }

    /// (number of conjuncts, longest conjunct) of the natural sign-DNF expansion.
    fn dnf_shape(&self) -> Result<(u64, u64)> {
        let overflow = || Error::Invalid("diagram size overflows u64".into());
        Ok(match self {
            Node::Atom(a) => (a.rel.signs().len() as u64, 1),
            Node::And(v) => {
                let mut a = 1u64;
                let mut b = 0u64;
                for c in v {
                    let (ca, cb) = c.dnf_shape()?;
                    a = a.checked_mul(ca).ok_or_else(overflow)?;
                    b = b.checked_add(cb).ok_or_else(overflow)?;
                }
                (a, b)
            }
            Node::Or(v) => {
                let mut a = 0u64;
                let mut b = 0u64;
                for c in v {
                    let (ca, cb) = c.dnf_shape()?;
                    a = a.checked_add(ca).ok_or_else(overflow)?;
                    b = b.max(cb);
                }
                (a, b)
            }
        })
    }
}

/// A formula together with its variable context.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Formula {
    ctx: Ctx,
    root: Node,
}

impl Formula {
    pub fn new(ctx: Ctx, root: Node) -> Result<Self> {
        for a in root.atoms() {
            if a.expr.ctx() != ctx {
                return Err(Error::Context(format!("atom in {:?} inside formula over {:?}", a.expr.ctx(), ctx)));
            }
        }
        Ok(Formula { ctx, root })
    }

    pub fn ctx(&self) -> Ctx {
        self.ctx
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn atoms(&self) -> Vec<&Atom> {
        self.root.atoms()
    }

    pub fn max_zeta(&self) -> usize {
        self.atoms().iter().map(|a| a.expr.max_zeta()).max().unwrap_or(0)
    }

    pub fn x_degree(&self) -> u32 {
        self.atoms().iter().map(|a| a.expr.x_degree()).max().unwrap_or(0)
    }

    pub fn map_exprs(&self, ctx: Ctx, f: &mut dyn FnMut(&PolyExpr) -> Result<PolyExpr>) -> Result<Formula> {
        Formula::new(ctx, self.root.map_exprs(f)?)
    }

    /// Maps every leaf polynomial; equal leaves are mapped once.
    pub fn map_polys(&self, ctx: Ctx, f: &mut dyn FnMut(&InfPolynomial) -> Result<InfPolynomial>) -> Result<Formula> {
        let mut cache: HashMap<InfPolynomial, InfPolynomial> = HashMap::new();
        self.map_exprs(ctx, &mut |e| {
            e.map_polys(&mut |p| {
                if let Some(q) = cache.get(p) {
                    return Ok(q.clone());
                }
                let q = f(p)?;
                cache.insert(p.clone(), q.clone());
                Ok(q)
            })
        })
    }

    /// Exact membership of a rational point.
    pub fn membership(&self, point: &[Rational]) -> Result<bool> {
        if self.max_zeta() > 0 {
            return Err(Error::Invalid("formula still contains infinitesimals; evaluate first".into()));
        }
        if point.len() != self.ctx.n {
            return Err(Error::Context(format!("point of dimension {} for n={}", point.len(), self.ctx.n)));
        }
        Ok(self.root.eval(point))
    }

    /// Natural sign-DNF: each atom expands into its admissible signs, conjunctions
    /// distribute. No deduplication, so the shape mirrors the formula.
    pub fn to_sign_dnf(&self) -> SignConditionDNF {
        SignConditionDNF { ctx: self.ctx, conjuncts: expand(&self.root) }
    }

    pub fn diagram(&self) -> Result<Diagram> {
        let (a, b) = self.root.dnf_shape()?;
        Ok(Diagram::from_shape(self.ctx.n, a, b, self.x_degree()))
    }

    /// Union of formulas over the same context.
    pub fn union(parts: Vec<Formula>) -> Result<Formula> {
        let ctx = parts.first().ok_or_else(|| Error::Invalid("empty union".into()))?.ctx;
        if parts.len() == 1 {
            return Ok(parts.into_iter().next().unwrap());
        }
        let mut items = Vec::new();
        for p in parts {
            if p.ctx != ctx {
                return Err(Error::Context("union of formulas over different contexts".into()));
            }
            match p.root {
                Node::Or(v) => items.extend(v),
                other => items.push(other),
            }
        }
        Formula::new(ctx, Node::Or(items))
    }
}

fn expand(node: &Node) -> Vec<Vec<(Arc<PolyExpr>, Sign)>> {
    match node {
        Node::Atom(a) => a.rel.signs().iter().map(|&s| vec![(a.expr.clone(), s)]).collect(),
        Node::Or(v) => v.iter().flat_map(expand).collect(),
        Node::And(v) => {
            let mut acc: Vec<Vec<(Arc<PolyExpr>, Sign)>> = vec![Vec::new()];
            for c in v {
                let sub = expand(c);
                let mut next = Vec::with_capacity(acc.len() * sub.len());
                for left in &acc {
                    for right in &sub {
                        let mut conj = left.clone();
                        conj.extend(right.iter().cloned());
                        next.push(conj);
                    }
                }
                acc = next;
            }
            acc
        }
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |f: &mut fmt::Formatter<'_>, v: &[Node], sep: &str| -> fmt::Result {
            write!(f, "(")?;
            for (i, c) in v.iter().enumerate() {
                if i > 0 {
                    write!(f, " {sep} ")?;
                }
                write!(f, "{c}")?;
            }
            write!(f, ")")
        };
        match self {
            Node::Atom(a) => write!(f, "[{} {} 0]", a.expr, a.rel.symbol()),
            Node::And(v) => join(f, v, "&"),
            Node::Or(v) => join(f, v, "|"),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.root)
    }
}

/// Disjunction of conjunctions of sign conditions `sign(p) = sigma`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignConditionDNF {
    pub ctx: Ctx,
    pub conjuncts: Vec<Vec<(Arc<PolyExpr>, Sign)>>,
}

impl SignConditionDNF {
    pub fn diagram(&self) -> Diagram {
        let a = self.conjuncts.len() as u64;
        let b = self.conjuncts.iter().map(|c| c.len() as u64).max().unwrap_or(0);
        let d = self.conjuncts.iter().flatten().map(|(p, _)| p.x_degree()).max().unwrap_or(0);
        Diagram::from_shape(self.ctx.n, a, b, d)
    }

    pub fn membership(&self, point: &[Rational]) -> Result<bool> {
        self.to_formula().membership(point)
    }

    pub fn to_formula(&self) -> Formula {
        let root = Node::Or(
            self.conjuncts
                .iter()
                .map(|c| Node::And(c.iter().map(|(p, s)| Node::Atom(Atom { expr: p.clone(), rel: Rel::from_sign(*s) })).collect()))
                .collect(),
        );
        Formula { ctx: self.ctx, root }
    }
}

/// `(n, c, d)` with `c = a * max b_i`; `a` and `b` are kept for composing unions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Diagram {
    pub n: usize,
    pub c: u64,
    pub d: u32,
    pub a: u64,
    pub b: u64,
}

impl Diagram {
    pub fn from_shape(n: usize, a: u64, b: u64, d: u32) -> Self {
        Diagram { n, c: a.saturating_mul(b), d, a, b }
    }

    pub fn triple(&self) -> (usize, u64, u32) {
        (self.n, self.c, self.d)
    }

    /// Union convention: conjunct counts add, conjunct lengths and degrees take the maximum.
    pub fn union(parts: &[Diagram]) -> Option<Diagram> {
        let first = parts.first()?;
        let a = parts.iter().map(|p| p.a).sum();
        let b = parts.iter().map(|p| p.b).max().unwrap_or(0);
        let d = parts.iter().map(|p| p.d).max().unwrap_or(0);
        Some(Diagram::from_shape(first.n, a, b, d))
    }
}

impl fmt::Display for Diagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.n, self.c, self.d)
    }
}

/// `Z(P) ∩ {q <= 0 : q in Q}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasicClosedSet {
    pub ctx: Ctx,
    pub eqs: Vec<PolyExpr>,
    pub ineqs: Vec<PolyExpr>,
}

impl BasicClosedSet {
    pub fn new(ctx: Ctx, eqs: Vec<PolyExpr>, ineqs: Vec<PolyExpr>) -> Result<Self> {
        if eqs.iter().chain(&ineqs).any(|p| p.ctx() != ctx) {
            return Err(Error::Context("basic set polynomial outside its context".into()));
        }
        Ok(BasicClosedSet { ctx, eqs, ineqs })
    }

    pub fn from_polys(ctx: Ctx, eqs: Vec<InfPolynomial>, ineqs: Vec<InfPolynomial>) -> Result<Self> {
        Self::new(ctx, eqs.into_iter().map(PolyExpr::from).collect(), ineqs.into_iter().map(PolyExpr::from).collect())
    }

    pub fn len(&self) -> usize {
        self.eqs.len() + self.ineqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn x_degree(&self) -> u32 {
        self.eqs.iter().chain(&self.ineqs).map(|p| p.x_degree()).max().unwrap_or(0)
    }

    pub fn to_formula(&self) -> Formula {
        let mut items: Vec<Node> = self.eqs.iter().map(|p| Node::atom(p.clone(), Rel::Eq)).collect();
        items.extend(self.ineqs.iter().map(|p| Node::atom(p.clone(), Rel::Le)));
        Formula { ctx: self.ctx, root: Node::And(items) }
    }

    /// Uniform sign-DNF with `2^L` conjuncts of length `L`: every constraint keeps
    /// its slot, equations always with sign 0, inequalities with sign 0 or -1.
    /// Conjuncts may repeat when equations are present; that keeps `a = 2^L`.
    pub fn to_sign_dnf(&self) -> Result<SignConditionDNF> {
        let l = self.len();
        if l > 20 {
            return Err(Error::Invalid(format!("{l} constraints exceed the sign-DNF budget of 20")));
        }
        let slots: Vec<(Arc<PolyExpr>, bool)> = self
            .eqs
            .iter()
            .map(|p| (Arc::new(p.clone()), true))
            .chain(self.ineqs.iter().map(|p| (Arc::new(p.clone()), false)))
            .collect();
        let mut conjuncts = Vec::with_capacity(1 << l);
        for mask in 0u32..(1u32 << l) {
            let conj = slots
                .iter()
                .enumerate()
                .map(|(i, (p, is_eq))| {
                    let zero = *is_eq || (mask >> i) & 1 == 0;
                    (p.clone(), if zero { Sign::Zero } else { Sign::Neg })
                })
                .collect();
            conjuncts.push(conj);
        }
        Ok(SignConditionDNF { ctx: self.ctx, conjuncts })
    }
}

/// Lifts a conjunction of equations and strict inequalities `C` to
/// `(p = 0) & (q + u <= 0) & (u > 0)` with a new last variable `u`.
pub fn closure_lift(c: &Formula) -> Result<Formula> {
    let atoms: Vec<&Atom> = match c.root() {
        Node::Atom(a) => vec![a],
        Node::And(v) => v
            .iter()
            .map(|n| match n {
                Node::Atom(a) => Ok(a),
                _ => Err(Error::Invalid("closure_lift expects a flat conjunction".into())),
            })
            .collect::<Result<_>>()?,
        Node::Or(_) => return Err(Error::Invalid("closure_lift expects a conjunction, found a disjunction".into())),
    };
    let ctx = c.ctx();
    let lifted = Ctx::new(ctx.n + 1, ctx.m);
    let u = InfPolynomial::x(lifted, ctx.n + 1);
    let mut items = Vec::new();
    for a in atoms {
        let e = a.expr.map_polys(&mut |p| p.embed(lifted))?;
        match a.rel {
            Rel::Eq => items.push(Node::atom(e, Rel::Eq)),
            Rel::Lt => items.push(Node::atom(&e.expand() + &u, Rel::Le)),
            Rel::Gt => items.push(Node::atom(&(-&e.expand()) + &u, Rel::Le)),
            r => return Err(Error::Invalid(format!("closure_lift accepts only =, <, > atoms, found {}", r.symbol()))),
        }
    }
    items.push(Node::atom(u, Rel::Gt));
    Formula::new(lifted, Node::And(items))
}

/// `K(x) & (y_i - F_i(x) = 0)` in variables `(x, y)`.
pub fn graph_formula(k: &Formula, f: &[InfPolynomial]) -> Result<Formula> {
    let ctx = k.ctx();
    if f.iter().any(|p| p.ctx() != ctx) {
        return Err(Error::Context("map components must share the formula's context".into()));
    }
    let l = f.len();
    let lifted = Ctx::new(ctx.n + l, ctx.m);
    let base = k.map_polys(lifted, &mut |p| p.embed(lifted))?;
    let mut items = vec![base.root];
    for (i, fi) in f.iter().enumerate() {
        let y = InfPolynomial::x(lifted, ctx.n + i + 1);
        items.push(Node::atom(&y - &fi.embed(lifted)?, Rel::Eq));
    }
    Formula::new(lifted, Node::And(items))
}

/// True if every atom is an equation or a non-strict inequality joined by a
/// single conjunction, i.e. the formula literally describes a closed basic set.
pub fn as_basic_closed(f: &Formula) -> Option<BasicClosedSet> {
    let nodes: Vec<&Node> = match f.root() {
        Node::And(v) => v.iter().collect(),
        n @ Node::Atom(_) => vec![n],
        Node::Or(v) if v.len() == 1 => return as_basic_closed(&Formula { ctx: f.ctx, root: v[0].clone() }),
        Node::Or(_) => return None,
    };
    let mut eqs = Vec::new();
    let mut ineqs = Vec::new();
    for n in nodes {
        match n {
            Node::Atom(a) => match a.rel {
                Rel::Eq => eqs.push((*a.expr).clone()),
                Rel::Le => ineqs.push((*a.expr).clone()),
                Rel::Ge => ineqs.push(negate_expr(&a.expr)),
                _ => return None,
            },
            Node::And(_) => {
                let inner = as_basic_closed(&Formula { ctx: f.ctx, root: n.clone() })?;
                eqs.extend(inner.eqs);
                ineqs.extend(inner.ineqs);
            }
            Node::Or(_) => return None,
        }
    }
    Some(BasicClosedSet { ctx: f.ctx, eqs, ineqs })
}

fn negate_expr(e: &PolyExpr) -> PolyExpr {
    PolyExpr::Poly(-&e.expand())
}
