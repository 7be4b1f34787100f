use num_traits::Zero;

use crate::error::{Error, Result};
use crate::exact::rational::int;
use crate::exact::{Ctx, InfPolynomial, Rational};
use crate::formula::BasicClosedSet;

/// `g = 1 + sum_j j * x_j^(2d+2)` in the geometric variables of `ctx`.
pub fn build_g(ctx: Ctx, d: u32) -> InfPolynomial {
    let mut g = InfPolynomial::one(ctx);
    for j in 1..=ctx.n {
        let mut e = vec![0; ctx.width()];
        e[j - 1] = 2 * d + 2;
        g = &g + &InfPolynomial::monomial(ctx, e, int(j as i64));
    }
    g
}

/// Perturbed families over `Q[x][z1, z2, z3]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Perturbed {
    pub ctx: Ctx,
    pub p: Vec<InfPolynomial>,
    pub q: Vec<InfPolynomial>,
    /// Degree `d` of the input family.
    pub d: u32,
}

impl Perturbed {
    pub fn a1(&self) -> usize {
        self.p.len().max(self.q.len())
    }

    pub fn tilde_s(&self) -> Result<BasicClosedSet> {
        BasicClosedSet::from_polys(self.ctx, self.p.clone(), self.q.clone())
    }
}

pub trait PerturbationStrategy {
    fn name(&self) -> &str;
    /// `s` lives in `Ctx(n, 0)`; the result in `Ctx(n, 3)`.
    fn build(&self, s: &BasicClosedSet, d: u32, rho: &Rational) -> Result<Perturbed>;
}

/// `P~ = {sum p^2 - z1 g}` (empty when `P` is), `Q~ = {q - z2} + {|x|^2 - 4 rho^2}`.
pub struct DefaultStrategy;

impl PerturbationStrategy for DefaultStrategy {
    fn name(&self) -> &str {
        "default"
    }

    fn build(&self, s: &BasicClosedSet, d: u32, rho: &Rational) -> Result<Perturbed> {
        let ctx = Ctx::new(s.ctx.n, 3);
        let lift = |e: &crate::exact::PolyExpr| e.expand().embed(ctx);
        let mut p = Vec::new();
        if !s.eqs.is_empty() {
            let mut sum = InfPolynomial::zero(ctx);
            for e in &s.eqs {
                sum = &sum + &lift(e)?.square();
            }
            let z1g = &InfPolynomial::z(ctx, 1) * &build_g(ctx, d);
            p.push(&sum - &z1g);
        }
        let z2 = InfPolynomial::z(ctx, 2);
        let mut q: Vec<InfPolynomial> = s.ineqs.iter().map(|e| Ok(&lift(e)? - &z2)).collect::<Result<_>>()?;
        let mut ball = InfPolynomial::constant(ctx, -(int(4) * rho * rho));
        for i in 1..=ctx.n {
            ball = &ball + &InfPolynomial::x(ctx, i).square();
        }
        q.push(ball);
        Ok(Perturbed { ctx, p, q, d })
    }
}

pub fn strategy_by_name(name: &str) -> Result<Box<dyn PerturbationStrategy>> {
    match name {
        "default" => Ok(Box::new(DefaultStrategy)),
        other => Err(Error::Invalid(format!("unknown perturbation strategy {other:?}"))),
    }
}

/// Applies `strategy` to `s`, which the caller declares to lie in the ball of radius `rho`.
pub fn build_perturbed(s: &BasicClosedSet, strategy: &dyn PerturbationStrategy, rho: &Rational) -> Result<Perturbed> {
    if *rho <= Rational::zero() {
        return Err(Error::Invalid("bounding radius must be positive".into()));
    }
    if s.ctx.m != 0 {
        return Err(Error::Context("the input set must be defined over Q".into()));
    }
    let d = s.x_degree().max(1);
    let out = strategy.build(s, d, rho)?;
    if !s.eqs.is_empty() && out.p.len() != 1 {
        return Err(Error::Invalid(format!("strategy {} produced {} equations", strategy.name(), out.p.len())));
    }
    if let Some(bad) = out.p.iter().chain(&out.q).find(|p| p.x_degree() > 2 * d + 2) {
        return Err(Error::Invalid(format!("strategy {} exceeds degree 2d+2: {bad}", strategy.name())));
    }
    Ok(out)
}
