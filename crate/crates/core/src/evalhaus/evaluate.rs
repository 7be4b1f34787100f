use crate::error::{Error, Result};
use crate::exact::{Ctx, Rational};
use crate::formula::Formula;

use super::tvector::TVector;

/// Substitutes `z_j := t_j` from the last infinitesimal down and drops them.
pub fn evaluate_formula(f: &Formula, t: &TVector) -> Result<Formula> {
    if t.m() != f.ctx().m {
        return Err(Error::Context(format!("{} parameters for m={}", t.m(), f.ctx().m)));
    }
    evaluate_suffix(f, &t.values)
}

/// Substitutes the last `suffix.len()` infinitesimals (`suffix` holds `t_k..t_m`)
/// and returns a formula over the remaining `z_1..z_{k-1}`.
pub fn evaluate_suffix(f: &Formula, suffix: &[Rational]) -> Result<Formula> {
    let ctx = f.ctx();
    if suffix.len() > ctx.m {
        return Err(Error::Order(format!("{} values for only {} infinitesimals", suffix.len(), ctx.m)));
    }
    let keep = ctx.m - suffix.len();
    let out = Ctx::new(ctx.n, keep);
    f.map_polys(out, &mut |p| {
        let mut q = p.clone();
        for (offset, t) in suffix.iter().enumerate().rev() {
            q = q.substitute_zeta_rational(keep + offset + 1, t)?;
        }
        q.drop_zetas(keep)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::rat;
    use crate::exact::{parse_poly, InfPolynomial};
    use crate::formula::{Node, Rel};

    #[test]
    fn simple_substitution() {
        let ctx = Ctx::new(1, 1);
        let f = Formula::new(ctx, Node::atom(parse_poly("x1^2 - z1", ctx).unwrap(), Rel::Le)).unwrap();
        let t = TVector::new(vec![rat(1, 100)]).unwrap();
        let e = evaluate_formula(&f, &t).unwrap();
        let expected = Formula::new(Ctx::new(1, 0), Node::atom(parse_poly("x1^2 - 1/100", Ctx::new(1, 0)).unwrap(), Rel::Le)).unwrap();
        assert_eq!(e, expected);
        assert_eq!(e.diagram().unwrap(), f.diagram().unwrap());
    }

    #[test]
    fn partial_suffix_keeps_earlier_infinitesimals() {
        let ctx = Ctx::new(1, 2);
        let p = parse_poly("x1 - z1 + z2^2", ctx).unwrap();
        let f = Formula::new(ctx, Node::atom(p, Rel::Eq)).unwrap();
        let e = evaluate_suffix(&f, &[rat(1, 2)]).unwrap();
        assert_eq!(e.ctx(), Ctx::new(1, 1));
        let q: &InfPolynomial = e.atoms()[0].expr.as_poly().unwrap();
        assert_eq!(*q, parse_poly("x1 - z1 + 1/4", Ctx::new(1, 1)).unwrap());
        assert!(evaluate_suffix(&f, &[rat(1, 2), rat(1, 3), rat(1, 4)]).is_err());
    }

    #[test]
    fn circle_perturbation_becomes_rational() {
        let ctx = Ctx::new(2, 1);
        let p = parse_poly("(x1^2 + x2^2 - 1)^2 - z1*(1 + x1^6 + 2*x2^6)", ctx).unwrap();
        let f = Formula::new(ctx, Node::atom(p, Rel::Eq)).unwrap();
        let t = TVector::schedule(1, &rat(1, 16), 8).unwrap();
        let e = evaluate_formula(&f, &t).unwrap();
        assert_eq!(e.max_zeta(), 0);
        assert_eq!(e.ctx().m, 0);
        assert_eq!(e.diagram().unwrap(), f.diagram().unwrap());
    }
}
