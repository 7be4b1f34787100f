use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{InfPolynomial, PolyExpr};
use crate::formula::{BasicClosedSet, Diagram, Formula};

use super::crit::crit_expr;
use super::perturb::Perturbed;

/// Size of the minors cut out in the critical-locus polynomials.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CritRank {
    /// `(ell+1) x (ell+1)` minors, i.e. rank of the partial Jacobian at most `ell`.
    Fixed,
    /// `(s+1) x (s+1)` minors for a family of `s` polynomials: the gradient of `g`
    /// along the fiber lies in the span of the family's gradients.
    #[default]
    Lagrange,
}

#[derive(Clone, Debug)]
pub struct TildeSEll {
    /// Uniform sign-DNF over the `2 a1 + 1` padded slots.
    pub formula: Formula,
    /// The perturbed basic set itself.
    pub tilde_s: Formula,
    pub f_tilde: PolyExpr,
    pub a1: usize,
    pub claimed: Diagram,
}

pub fn a2(a1: usize) -> u64 {
    (2 * a1 as u64 + 1) << (2 * a1 + 1)
}

pub fn a3(a1: usize) -> u64 {
    (1u64 << a1) * 8 * (a1 as u64 + 2)
}

/// `S~ & (F~ = 0)` with `F~ = prod over Q' of crit(P~ + Q')`, written with `a1` equation
/// slots, `a1` inequality slots (zero polynomials as padding) and one slot for `F~`.
pub fn build_tilde_s_ell(pert: &Perturbed, ell: usize, rank: CritRank) -> Result<TildeSEll> {
    let ctx = pert.ctx;
    if ell < 1 || ell > ctx.n {
        return Err(Error::Invalid(format!("ell = {ell} outside 1..={}", ctx.n)));
    }
    let nq = pert.q.len();
    let a1 = pert.a1();
    if nq > 20 || 2 * a1 + 1 > 20 {
        return Err(Error::Invalid(format!("{nq} inequalities exceed the subset budget of 20")));
    }
    let mut factors = Vec::with_capacity(1 << nq);
    for mask in 0u32..(1u32 << nq) {
        let mut fs: Vec<InfPolynomial> = pert.p.clone();
        fs.extend((0..nq).filter(|i| mask >> i & 1 == 1).map(|i| pert.q[i].clone()));
        let r = match rank {
            CritRank::Fixed => ell,
            CritRank::Lagrange => fs.len(),
        };
        factors.push(crit_expr(ctx, &fs, ell, r, pert.d)?);
    }
    let f_tilde = PolyExpr::product(factors)?;
    let zero = || PolyExpr::from(InfPolynomial::zero(ctx));
    let mut eqs: Vec<PolyExpr> = pert.p.iter().cloned().map(PolyExpr::from).collect();
    eqs.resize_with(a1, zero);
    eqs.push(f_tilde.clone());
    let mut ineqs: Vec<PolyExpr> = pert.q.iter().cloned().map(PolyExpr::from).collect();
    ineqs.resize_with(a1, zero);
    let formula = BasicClosedSet::new(ctx, eqs, ineqs)?.to_sign_dnf()?.to_formula();
    let l = 2 * a1 as u64 + 1;
    let claimed = Diagram { n: ctx.n, c: a2(a1), d: (a3(a1) * pert.d as u64) as u32, a: 1 << l, b: l };
    Ok(TildeSEll { formula, tilde_s: pert.tilde_s()?.to_formula(), f_tilde, a1, claimed })
}
