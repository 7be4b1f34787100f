//! Lattice sampling of a formula's realization.
//!
//! Output equals a brute-force scan of every lattice point: inequality atoms are
//! decided exactly, an equation atom on a leaf polynomial `f` accepts `x` when
//! `|f(x)| <= s * h * G` where `G` is an interval upper bound of
//! `sup_{cell(x)} |grad f|_1` and `cell(x) = x + [-h/2, h/2]^n`.
//! The default `s = 1/2` is the smallest factor that keeps every lattice point
//! whose cell meets the zero set. Structured equations accept when the
//! structure vanishes in that relaxed sense: a sum of squares when every base does,
//! a product when some factor does. The scan is organised as a subdivision of
//! index boxes pruned with interval bounds, which only skips boxes whose points
//! are all decided the same way.

use std::collections::HashMap;
use std::sync::Arc;

use num_traits::Signed;
use rayon::prelude::*;

use super::cloud::{PointCloud, SampleBox};
use crate::error::{Error, Result};
use crate::exact::rational::{from_f64, to_f64};
use crate::exact::{InfPolynomial, PolyExpr, Rational, Sign};
use crate::formula::{formula_digest, Formula, Node, Rel};
use crate::interval::{FloatPoly, Interval, PowTable};

struct Leaf {
    exact: InfPolynomial,
    val: FloatPoly,
    grad: Vec<FloatPoly>,
    /// `hess[i][k]` is the derivative of `grad[i]` in `x_k`.
    hess: Vec<Vec<FloatPoly>>,
    /// `third[i][k][l]` is the derivative of `hess[i][k]` in `x_l`.
    third: Vec<Vec<Vec<FloatPoly>>>,
}

enum ENode {
    Leaf(usize),
    SumSq(Vec<ENode>),
    Prod(Vec<ENode>),
}

enum CTree {
    Atom(usize, Rel),
    And(Vec<CTree>),
    Or(Vec<CTree>),
}

/// A formula prepared for repeated interval and exact evaluation.
pub struct Compiled {
    n: usize,
    leaves: Vec<Leaf>,
    exprs: Vec<(ENode, Arc<PolyExpr>)>,
    tree: CTree,
    max_deg: Vec<u32>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Tri {
    True,
    False,
    Maybe,
}

impl Compiled {
    pub fn new(f: &Formula) -> Result<Self> {
        if f.max_zeta() > 0 {
            return Err(Error::Invalid("sampling needs a formula without infinitesimals".into()));
        }
        let n = f.ctx().n;
        let mut c = Compiled { n, leaves: Vec::new(), exprs: Vec::new(), tree: CTree::And(Vec::new()), max_deg: vec![0; n] };
        let mut leaf_ids: HashMap<InfPolynomial, usize> = HashMap::new();
        let mut expr_ids: HashMap<PolyExpr, usize> = HashMap::new();
        c.tree = c.compile_node(f.root(), &mut leaf_ids, &mut expr_ids);
        Ok(c)
    }

    fn compile_node(&mut self, node: &Node, leaf_ids: &mut HashMap<InfPolynomial, usize>, expr_ids: &mut HashMap<PolyExpr, usize>) -> CTree {
        match node {
            Node::Atom(a) => {
                let id = match expr_ids.get(&*a.expr) {
                    Some(&id) => id,
                    None => {
                        let e = self.compile_expr(&a.expr, leaf_ids);
                        self.exprs.push((e, a.expr.clone()));
                        expr_ids.insert((*a.expr).clone(), self.exprs.len() - 1);
                        self.exprs.len() - 1
                    }
                };
                CTree::Atom(id, a.rel)
            }
            Node::And(v) => CTree::And(v.iter().map(|c| self.compile_node(c, leaf_ids, expr_ids)).collect()),
            Node::Or(v) => CTree::Or(v.iter().map(|c| self.compile_node(c, leaf_ids, expr_ids)).collect()),
        }
    }

    fn compile_expr(&mut self, e: &PolyExpr, leaf_ids: &mut HashMap<InfPolynomial, usize>) -> ENode {
        match e {
            PolyExpr::Poly(p) => {
                if let Some(&id) = leaf_ids.get(p) {
                    return ENode::Leaf(id);
                }
                let val = FloatPoly::new(p);
                let exact_grad = p.gradient();
                let grad: Vec<FloatPoly> = exact_grad.iter().map(FloatPoly::new).collect();
                let exact_hess: Vec<Vec<InfPolynomial>> = exact_grad.iter().map(|g| g.gradient()).collect();
                let hess = exact_hess.iter().map(|row| row.iter().map(FloatPoly::new).collect()).collect();
                let third = exact_hess.iter().map(|row| row.iter().map(|h| h.gradient().iter().map(FloatPoly::new).collect()).collect()).collect();
                for (i, d) in val.max_degrees().into_iter().enumerate() {
                    self.max_deg[i] = self.max_deg[i].max(d);
                }
                self.leaves.push(Leaf { exact: p.clone(), val, grad, hess, third });
                leaf_ids.insert(p.clone(), self.leaves.len() - 1);
                ENode::Leaf(self.leaves.len() - 1)
            }
            PolyExpr::SumSquares(v) => ENode::SumSq(v.iter().map(|c| self.compile_expr(c, leaf_ids)).collect()),
            PolyExpr::Product(v) => ENode::Prod(v.iter().map(|c| self.compile_expr(c, leaf_ids)).collect()),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

#[derive(Clone, Copy)]
struct LeafVal {
    v: Interval,
    slack: f64,
}

/// Per-evaluation caches over one region or one point.
struct Eval<'a> {
    c: &'a Compiled,
    pows: PowTable,
    /// Powers at the chosen center point (regions only).
    center_pows: Option<PowTable>,
    /// Box minus center, for the mean-value form (regions only).
    offsets: Vec<Interval>,
    /// Powers over the cell(s) used for gradient bounds.
    grad_pows: PowTable,
    /// Cell minus the lattice point (points only). When the natural extension
    /// leaves the decision open, the gradient is bounded again by its
    /// second-order Taylor form around the point, which avoids most of the
    /// dependency loss.
    cell_offsets: Vec<Interval>,
    h_up: f64,
    leaf: Vec<Option<LeafVal>>,
}

impl<'a> Eval<'a> {
    fn leaf(&mut self, id: usize) -> LeafVal {
        if let Some(l) = self.leaf[id] {
            return l;
        }
        let lf = &self.c.leaves[id];
        let mut g1 = 0.0f64;
        let mut mv_terms = Vec::with_capacity(lf.grad.len());
        let mut natural = Vec::with_capacity(lf.grad.len());
        for (i, g) in lf.grad.iter().enumerate() {
            let gi = g.eval(&self.grad_pows);
            g1 = (g1 + gi.mag()).next_up();
            natural.push(gi);
            if self.center_pows.is_some() {
                mv_terms.push(gi.mul(&self.offsets[i]));
            }
        }
        let mut v = lf.val.eval(&self.pows);
        if let Some(cp) = &self.center_pows {
            let mut mv = lf.val.eval(cp);
            for t in &mv_terms {
                mv = mv.add(t);
            }
            v = v.intersect(&mv);
        }
        let mut slack = (self.h_up * g1).next_up();
        if !self.cell_offsets.is_empty() && v.mig() <= slack {
            slack = slack.min((self.h_up * self.taylor_grad_bound(lf, &natural)).next_up());
        }
        let out = LeafVal { v, slack: if slack.is_nan() { f64::INFINITY } else { slack } };
        self.leaf[id] = Some(out);
        out
    }

    /// `|grad f|_1` over the cell from the Taylor form at the point, each
    /// component intersected with its natural extension.
    fn taylor_grad_bound(&self, lf: &Leaf, natural: &[Interval]) -> f64 {
        let off = &self.cell_offsets;
        let mut g1 = 0.0f64;
        for (i, g) in lf.grad.iter().enumerate() {
            let mut t = g.eval(&self.pows);
            for k in 0..off.len() {
                t = t.add(&lf.hess[i][k].eval(&self.pows).mul(&off[k]));
                for l in 0..off.len() {
                    let w = if k == l { off[k].sqr() } else { off[k].mul(&off[l]) };
                    t = t.add(&lf.third[i][k][l].eval(&self.grad_pows).mul(&w).scale(0.5));
                }
            }
            g1 = (g1 + t.intersect(&natural[i]).mag()).next_up();
        }
        g1
    }

    fn value(&mut self, e: &ENode) -> Interval {
        match e {
            ENode::Leaf(id) => self.leaf(*id).v,
            ENode::SumSq(v) => v.iter().fold(Interval::point(0.0), |acc, c| {
                let x = self.value(c);
                acc.add(&x.sqr())
            }),
            ENode::Prod(v) => v.iter().fold(Interval::point(1.0), |acc, c| {
                let x = self.value(c);
                acc.mul(&x)
            }),
        }
    }

    /// Region: can any point of the region accept the relaxed equation?
    fn eq_possible(&mut self, e: &ENode) -> bool {
        match e {
            ENode::Leaf(id) => {
                let l = self.leaf(*id);
                l.v.mig() <= l.slack
            }
            ENode::SumSq(v) => v.iter().all(|c| self.eq_possible(c)),
            ENode::Prod(v) => v.iter().any(|c| self.eq_possible(c)),
        }
    }

    fn region_atom(&mut self, id: usize, rel: Rel) -> Tri {
        let c = self.c;
        let e = &c.exprs[id].0;
        if rel == Rel::Eq {
            return if self.eq_possible(e) { Tri::Maybe } else { Tri::False };
        }
        let v = self.value(e);
        let (all, none) = match rel {
            Rel::Lt => (v.hi < 0.0, v.lo >= 0.0),
            Rel::Le => (v.hi <= 0.0, v.lo > 0.0),
            Rel::Gt => (v.lo > 0.0, v.hi <= 0.0),
            Rel::Ge => (v.lo >= 0.0, v.hi < 0.0),
            Rel::Ne => (v.lo > 0.0 || v.hi < 0.0, false),
            Rel::Eq => unreachable!(),
        };
        if all {
            Tri::True
        } else if none {
            Tri::False
        } else {
            Tri::Maybe
        }
    }

    fn region_tree(&mut self, t: &CTree) -> Tri {
        match t {
            CTree::Atom(id, rel) => self.region_atom(*id, *rel),
            CTree::And(v) => {
                let mut all = true;
                for c in v {
                    match self.region_tree(c) {
                        Tri::False => return Tri::False,
                        Tri::Maybe => all = false,
                        Tri::True => {}
                    }
                }
                if all {
                    Tri::True
                } else {
                    Tri::Maybe
                }
            }
            CTree::Or(v) => {
                let mut none = true;
                for c in v {
                    match self.region_tree(c) {
                        Tri::True => return Tri::True,
                        Tri::Maybe => none = false,
                        Tri::False => {}
                    }
                }
                if none {
                    Tri::False
                } else {
                    Tri::Maybe
                }
            }
        }
    }
}

/// Exact decisions at one lattice point, with interval fast paths.
struct PointEval<'a> {
    ev: Eval<'a>,
    x: Vec<Rational>,
}

impl<'a> PointEval<'a> {
    fn leaf_accepts(&mut self, id: usize) -> bool {
        let l = self.ev.leaf(id);
        if l.v.mag() <= l.slack {
            return true;
        }
        if l.v.mig() > l.slack {
            return false;
        }
        let exact = self.ev.c.leaves[id].exact.eval_unchecked(&self.x);
        exact.abs() <= from_f64(l.slack)
    }

    fn eq_accepts(&mut self, e: &ENode) -> bool {
        match e {
            ENode::Leaf(id) => self.leaf_accepts(*id),
            ENode::SumSq(v) => v.iter().all(|c| self.eq_accepts(c)),
            ENode::Prod(v) => v.iter().any(|c| self.eq_accepts(c)),
        }
    }

    fn sign(&mut self, id: usize) -> Sign {
        let c = self.ev.c;
        let v = self.ev.value(&c.exprs[id].0);
        if v.lo > 0.0 {
            Sign::Pos
        } else if v.hi < 0.0 {
            Sign::Neg
        } else {
            Sign::of(&c.exprs[id].1.eval_unchecked(&self.x))
        }
    }

    fn tree(&mut self, t: &CTree) -> bool {
        match t {
            CTree::Atom(id, Rel::Eq) => {
                let c = self.ev.c;
                let e = &c.exprs[*id].0;
                self.eq_accepts(e)
            }
            CTree::Atom(id, rel) => {
                let s = self.sign(*id);
                rel.holds(s)
            }
            CTree::And(v) => v.iter().all(|c| self.tree(c)),
            CTree::Or(v) => v.iter().any(|c| self.tree(c)),
        }
    }
}

/// Lattice geometry shared by region and point evaluation.
pub(crate) struct Grid {
    pub n: usize,
    pub h: Rational,
    pub hf: f64,
    pub origin: Vec<Rational>,
    pub of: Vec<f64>,
}

impl Grid {
    pub fn new(h: &Rational, origin: &[Rational]) -> Self {
        Grid { n: origin.len(), h: h.clone(), hf: to_f64(h), origin: origin.to_vec(), of: origin.iter().map(to_f64).collect() }
    }

    /// Outward enclosure of the union of cells of lattice points with indices in `[lo, hi]`.
    fn cell_box(&self, lo: &[i64], hi: &[i64]) -> Vec<Interval> {
        (0..self.n)
            .map(|i| {
                let a = self.of[i] + (lo[i] as f64 - 0.5) * self.hf;
                let b = self.of[i] + (hi[i] as f64 + 0.5) * self.hf;
                let pad = 1e-12 * (1.0 + a.abs().max(b.abs()));
                Interval::new(a - pad, b + pad)
            })
            .collect()
    }

    fn exact_point(&self, idx: &[i64]) -> Vec<Rational> {
        idx.iter().zip(&self.origin).map(|(&k, o)| o + &self.h * Rational::from_integer(k.into())).collect()
    }
}

struct Sampler<'a> {
    c: &'a Compiled,
    grid: Grid,
    h_up: f64,
}

impl<'a> Sampler<'a> {
    fn region(&self, lo: &[i64], hi: &[i64]) -> Tri {
        let bx = self.grid.cell_box(lo, hi);
        let center: Vec<f64> = bx.iter().map(|iv| 0.5 * (iv.lo + iv.hi)).collect();
        let cbox: Vec<Interval> = center.iter().map(|&v| Interval::point(v)).collect();
        let offsets = bx.iter().zip(&center).map(|(iv, &c)| iv.sub(&Interval::point(c))).collect();
        let mut ev = Eval {
            c: self.c,
            pows: PowTable::new(&bx, &self.c.max_deg),
            center_pows: Some(PowTable::new(&cbox, &self.c.max_deg)),
            offsets,
            grad_pows: PowTable::new(&bx, &self.c.max_deg),
            cell_offsets: Vec::new(),
            h_up: self.h_up,
            leaf: vec![None; self.c.leaves.len()],
        };
        ev.region_tree(&self.c.tree)
    }

    fn point(&self, idx: &[i64]) -> bool {
        let x = self.grid.exact_point(idx);
        let xi: Vec<Interval> = x.iter().map(Interval::from_rational).collect();
        let cell = self.grid.cell_box(idx, idx);
        let cell_offsets = cell.iter().zip(&xi).map(|(c, p)| c.sub(p)).collect();
        let ev = Eval {
            c: self.c,
            pows: PowTable::new(&xi, &self.c.max_deg),
            center_pows: None,
            offsets: Vec::new(),
            grad_pows: PowTable::new(&cell, &self.c.max_deg),
            cell_offsets,
            h_up: self.h_up,
            leaf: vec![None; self.c.leaves.len()],
        };
        PointEval { ev, x }.tree(&self.c.tree)
    }

    fn run(&self, lo: Vec<i64>, hi: Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if lo == hi {
            if self.point(&lo) {
                out.push(lo);
            }
            return;
        }
        match self.region(&lo, &hi) {
            Tri::False => {}
            Tri::True => emit_all(&lo, &hi, out),
            Tri::Maybe => {
                let (axis, _) = (0..lo.len()).map(|i| (i, hi[i] - lo[i])).max_by_key(|&(i, w)| (w, std::cmp::Reverse(i))).unwrap();
                let mid = lo[axis] + (hi[axis] - lo[axis]) / 2;
                let mut hi1 = hi.clone();
                hi1[axis] = mid;
                let mut lo2 = lo.clone();
                lo2[axis] = mid + 1;
                self.run(lo, hi1, out);
                self.run(lo2, hi, out);
            }
        }
    }

    /// Point test for a single lattice index, exposed for membership checks.
    fn accepts(&self, idx: &[i64]) -> bool {
        self.point(idx)
    }
}

fn emit_all(lo: &[i64], hi: &[i64], out: &mut Vec<Vec<i64>>) {
    let mut cur = lo.to_vec();
    loop {
        out.push(cur.clone());
        let mut k = cur.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            if cur[k] < hi[k] {
                cur[k] += 1;
                for j in k + 1..cur.len() {
                    cur[j] = lo[j];
                }
                break;
            }
        }
    }
}

/// Default factor `s` of the equation slack.
pub const EQUATION_SLACK: f64 = 0.5;

/// Upper bound for `s * h`.
fn h_upper(h: &Rational, factor: f64) -> f64 {
    let v = to_f64(h);
    let v = if from_f64(v) >= *h { v } else { v.next_up() };
    (v * factor).next_up()
}

/// Samples the realization of `f` on the lattice `box.center + i*h` inside `bx`.
pub fn sample_cloud(f: &Formula, bx: &SampleBox, h: &Rational) -> Result<PointCloud> {
    sample_cloud_with(f, bx, h, EQUATION_SLACK)
}

/// [`sample_cloud`] with an explicit equation slack factor.
pub fn sample_cloud_with(f: &Formula, bx: &SampleBox, h: &Rational, slack: f64) -> Result<PointCloud> {
    let c = Compiled::new(f)?;
    sample_compiled(&c, &formula_digest(f), bx, h, slack)
}

pub fn sample_compiled(c: &Compiled, digest: &str, bx: &SampleBox, h: &Rational, slack: f64) -> Result<PointCloud> {
    if bx.dim() != c.n {
        return Err(Error::Context(format!("box of dimension {} for n={}", bx.dim(), c.n)));
    }
    if !(slack > 0.0 && slack.is_finite()) {
        return Err(Error::Invalid(format!("equation slack factor {slack} must be positive")));
    }
    let ranges = bx.index_ranges(h)?;
    let sampler = Sampler { c, grid: Grid::new(h, &bx.center), h_up: h_upper(h, slack) };
    // split the top box into independent chunks; results are sorted afterwards
    let chunks = split_chunks(&ranges, 64);
    let parts: Vec<Vec<Vec<i64>>> = chunks
        .into_par_iter()
        .map(|(lo, hi)| {
            let mut out = Vec::new();
            sampler.run(lo, hi, &mut out);
            out
        })
        .collect();
    let rows: Vec<Vec<i64>> = parts.into_iter().flatten().collect();
    Ok(PointCloud::from_indices(c.n, h.clone(), bx.center.clone(), rows, digest.to_string()))
}

fn split_chunks(ranges: &[(i64, i64)], target: usize) -> Vec<(Vec<i64>, Vec<i64>)> {
    let mut boxes = vec![(ranges.iter().map(|r| r.0).collect::<Vec<_>>(), ranges.iter().map(|r| r.1).collect::<Vec<_>>())];
    while boxes.len() < target {
        let mut next = Vec::new();
        let mut split_any = false;
        for (lo, hi) in boxes {
            let (axis, w) = (0..lo.len()).map(|i| (i, hi[i] - lo[i])).max_by_key(|&(i, w)| (w, std::cmp::Reverse(i))).unwrap();
            if w == 0 {
                next.push((lo, hi));
                continue;
            }
            split_any = true;
            let mid = lo[axis] + w / 2;
            let mut hi1 = hi.clone();
            hi1[axis] = mid;
            let mut lo2 = lo.clone();
            lo2[axis] = mid + 1;
            next.push((lo, hi1));
            next.push((lo2, hi));
        }
        boxes = next;
        if !split_any {
            break;
        }
    }
    boxes
}

/// Relaxed membership of a single lattice point, matching what [`sample_cloud`] emits.
pub fn lattice_accepts(f: &Formula, h: &Rational, origin: &[Rational], idx: &[i64]) -> Result<bool> {
    let c = Compiled::new(f)?;
    let sampler = Sampler { c: &c, grid: Grid::new(h, origin), h_up: h_upper(h, EQUATION_SLACK) };
    Ok(sampler.accepts(idx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::{int, rat};
    use crate::exact::{parse_poly, Ctx};

    fn formula(json: &str) -> Formula {
        crate::formula::formula_from_json(&serde_json::from_str(json).unwrap()).unwrap()
    }

    /// Brute-force reference: evaluate every lattice point independently.
    fn brute(f: &Formula, bx: &SampleBox, h: &Rational) -> Vec<Vec<i64>> {
        let ranges = bx.index_ranges(h).unwrap();
        let lo: Vec<i64> = ranges.iter().map(|r| r.0).collect();
        let hi: Vec<i64> = ranges.iter().map(|r| r.1).collect();
        let mut all = Vec::new();
        emit_all(&lo, &hi, &mut all);
        all.into_iter().filter(|idx| lattice_accepts(f, h, &bx.center, idx).unwrap()).collect()
    }

    fn rows(c: &PointCloud) -> Vec<Vec<i64>> {
        (0..c.len()).map(|i| c.index(i).to_vec()).collect()
    }

    #[test]
    fn disk_count_matches_area() {
        let f = formula(r#"{"n":2,"set":{"atom":"x1^2+x2^2-1","rel":"le"}}"#);
        let h = rat(1, 8);
        let c = sample_cloud(&f, &SampleBox::cube(2, &int(2)).unwrap(), &h).unwrap();
        let expected = std::f64::consts::PI * 64.0;
        assert!((c.len() as f64 - expected).abs() / expected < 0.1, "{}", c.len());
        for i in 0..c.len() {
            assert!(f.membership(&c.point_exact(i)).unwrap());
        }
    }

    #[test]
    fn empty_set() {
        let f = formula(r#"{"n":1,"set":{"atom":"x1^2+1","rel":"le"}}"#);
        let c = sample_cloud(&f, &SampleBox::cube(1, &int(2)).unwrap(), &rat(1, 16)).unwrap();
        assert!(c.is_empty());
    }

    #[test]
    fn circle_band_width() {
        let f = formula(r#"{"n":2,"set":{"atom":"x1^2+x2^2-1","rel":"eq"}}"#);
        let h = rat(1, 64);
        let c = sample_cloud(&f, &SampleBox::cube(2, &int(2)).unwrap(), &h).unwrap();
        let pts = c.to_points();
        assert!(!pts.is_empty());
        for p in pts.iter() {
            let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
            assert!((r - 1.0).abs() <= 2.0 / 64.0, "{r}");
        }
        // every cell the circle passes through has its center accepted
        for k in 0..400 {
            let a = k as f64 / 400.0 * std::f64::consts::TAU;
            let (x, y) = (a.cos(), a.sin());
            let idx = [(x * 64.0).round() as i64, (y * 64.0).round() as i64];
            assert!(rows(&c).binary_search(&idx.to_vec()).is_ok());
        }
    }

    #[test]
    fn pruned_scan_equals_brute_force() {
        let cases = [
            r#"{"n":2,"set":{"op":"or","items":[{"atom":"x1^2+x2^2-1","rel":"eq"},{"op":"and","items":[{"atom":"x1-x2^2","rel":"lt"},{"atom":"x1-1/2","rel":"le"}]}]}}"#,
            r#"{"n":2,"set":{"atom":{"prod":["x1-x2",{"sumsq":["x1^2-1/4","x2"]}]},"rel":"eq"}}"#,
            r#"{"n":2,"set":{"op":"and","items":[{"atom":"x1*x2-1/8","rel":"ne"},{"atom":"x1^2+x2^2-2","rel":"le"},{"atom":"x1^3-x2","rel":"ge"}]}}"#,
        ];
        for js in cases {
            let f = formula(js);
            let bx = SampleBox::new(vec![rat(1, 7), int(0)], vec![rat(3, 2), rat(3, 2)]).unwrap();
            let h = rat(1, 16);
            let c = sample_cloud(&f, &bx, &h).unwrap();
            assert_eq!(rows(&c), brute(&f, &bx, &h), "{js}");
        }
    }

    #[test]
    fn equation_slack_is_sound_for_zero_polynomial() {
        let ctx = Ctx::new(1, 0);
        let f = Formula::new(ctx, Node::atom(parse_poly("0", ctx).unwrap(), Rel::Eq)).unwrap();
        let c = sample_cloud(&f, &SampleBox::cube(1, &int(1)).unwrap(), &rat(1, 4)).unwrap();
        assert_eq!(c.len(), 9);
    }

    #[test]
    fn deterministic_output() {
        let f = formula(r#"{"n":3,"set":{"atom":"x1^2+x2^2+x3^2-1","rel":"eq"}}"#);
        let bx = SampleBox::cube(3, &rat(3, 2)).unwrap();
        let a = sample_cloud(&f, &bx, &rat(1, 16)).unwrap();
        let b = sample_cloud(&f, &bx, &rat(1, 16)).unwrap();
        assert_eq!(a, b);
    }
}
