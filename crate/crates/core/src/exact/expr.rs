//! Unexpanded polynomial expressions.
//!
//! Products of sums of squares of Jacobian minors get enormous when expanded, so
//! formulas keep them in this factored shape. Degrees are computed exactly from
//! the structure: over an ordered domain a sum of squares of nonzero elements is
//! nonzero and a product of nonzero elements is nonzero.

use std::fmt;

use num_traits::{One, Zero};

use super::poly::{Ctx, InfPolynomial};
use super::rational::Rational;
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum PolyExpr {
    Poly(InfPolynomial),
    /// Sum of the squares of the children; never empty.
    SumSquares(Vec<PolyExpr>),
    /// Product of the children; never empty.
    Product(Vec<PolyExpr>),
}

impl From<InfPolynomial> for PolyExpr {
    fn from(p: InfPolynomial) -> Self {
        PolyExpr::Poly(p)
    }
}

impl PolyExpr {
    pub fn sum_squares(items: Vec<PolyExpr>) -> Result<Self> {
        Self::check_children(&items)?;
        Ok(PolyExpr::SumSquares(items))
    }

    pub fn product(items: Vec<PolyExpr>) -> Result<Self> {
        Self::check_children(&items)?;
        Ok(PolyExpr::Product(items))
    }

    fn check_children(items: &[PolyExpr]) -> Result<()> {
        let first = items.first().ok_or_else(|| Error::Invalid("empty structured polynomial".into()))?;
        if items.iter().any(|c| c.ctx() != first.ctx()) {
            return Err(Error::Context("children of a structured polynomial differ in context".into()));
        }
        Ok(())
    }

    pub fn ctx(&self) -> Ctx {
        match self {
            PolyExpr::Poly(p) => p.ctx(),
            PolyExpr::SumSquares(v) | PolyExpr::Product(v) => v[0].ctx(),
        }
    }

    pub fn as_poly(&self) -> Option<&InfPolynomial> {
        match self {
            PolyExpr::Poly(p) => Some(p),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            PolyExpr::Poly(p) => p.is_zero(),
            PolyExpr::SumSquares(v) => v.iter().all(|c| c.is_zero()),
            PolyExpr::Product(v) => v.iter().any(|c| c.is_zero()),
        }
    }

    /// Exact total degree in the geometric variables (0 for the zero polynomial).
    pub fn x_degree(&self) -> u32 {
        if self.is_zero() {
            return 0;
        }
        match self {
            PolyExpr::Poly(p) => p.x_degree(),
            PolyExpr::SumSquares(v) => 2 * v.iter().filter(|c| !c.is_zero()).map(|c| c.x_degree()).max().unwrap_or(0),
            PolyExpr::Product(v) => v.iter().map(|c| c.x_degree()).sum(),
        }
    }

    pub fn max_zeta(&self) -> usize {
        self.leaves().iter().map(|p| p.max_zeta()).max().unwrap_or(0)
    }

    pub fn leaves(&self) -> Vec<&InfPolynomial> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a InfPolynomial>) {
        match self {
            PolyExpr::Poly(p) => out.push(p),
            PolyExpr::SumSquares(v) | PolyExpr::Product(v) => v.iter().for_each(|c| c.collect_leaves(out)),
        }
    }

    pub fn map_polys(&self, f: &mut dyn FnMut(&InfPolynomial) -> Result<InfPolynomial>) -> Result<PolyExpr> {
        Ok(match self {
            PolyExpr::Poly(p) => PolyExpr::Poly(f(p)?),
            PolyExpr::SumSquares(v) => PolyExpr::SumSquares(v.iter().map(|c| c.map_polys(f)).collect::<Result<_>>()?),
            PolyExpr::Product(v) => PolyExpr::Product(v.iter().map(|c| c.map_polys(f)).collect::<Result<_>>()?),
        })
    }

    pub fn expand(&self) -> InfPolynomial {
        match self {
            PolyExpr::Poly(p) => p.clone(),
            PolyExpr::SumSquares(v) => {
                v.iter().fold(InfPolynomial::zero(self.ctx()), |acc, c| &acc + &c.expand().square())
            }
            PolyExpr::Product(v) => v.iter().fold(InfPolynomial::one(self.ctx()), |acc, c| &acc * &c.expand()),
        }
    }

    /// Exact value at a point; infinitesimals must already be evaluated.
    pub fn eval(&self, point: &[Rational]) -> Result<Rational> {
        if self.max_zeta() > 0 {
            return Err(Error::Invalid("evaluate infinitesimals before point evaluation".into()));
        }
        if point.len() != self.ctx().n {
            return Err(Error::Context(format!("point of dimension {} for n={}", point.len(), self.ctx().n)));
        }
        Ok(self.eval_unchecked(point))
    }

    pub(crate) fn eval_unchecked(&self, point: &[Rational]) -> Rational {
        match self {
            PolyExpr::Poly(p) => p.eval_unchecked(point),
            PolyExpr::SumSquares(v) => v.iter().fold(Rational::zero(), |acc, c| {
                let t = c.eval_unchecked(point);
                acc + &t * &t
            }),
            PolyExpr::Product(v) => {
                let mut acc = Rational::one();
                for c in v {
                    let t = c.eval_unchecked(point);
                    if t.is_zero() {
                        return t;
                    }
                    acc *= t;
                }
                acc
            }
        }
    }
}

impl fmt::Display for PolyExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, name: &str, v: &[PolyExpr]| -> fmt::Result {
            write!(f, "{name}(")?;
            for (i, c) in v.iter().enumerate() {
                if i > 0 {
                    write!(f, "; ")?;
                }
                write!(f, "{c}")?;
            }
            write!(f, ")")
        };
        match self {
            PolyExpr::Poly(p) => write!(f, "{p}"),
            PolyExpr::SumSquares(v) => list(f, "sumsq", v),
            PolyExpr::Product(v) => list(f, "prod", v),
        }
    }
}

impl fmt::Debug for PolyExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PolyExpr({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::parse::parse_poly;
    use crate::exact::rational::{int, rat};

    fn p(s: &str) -> PolyExpr {
        PolyExpr::Poly(parse_poly(s, Ctx::new(2, 1)).unwrap())
    }

    #[test]
    fn structural_degree_matches_expansion() {
        let e = PolyExpr::product(vec![
            PolyExpr::sum_squares(vec![p("x1^2 - z1*x2"), p("x2^3 + 1")]).unwrap(),
            p("x1 - x2"),
            PolyExpr::sum_squares(vec![p("z1"), p("0")]).unwrap(),
        ])
        .unwrap();
        assert_eq!(e.x_degree(), 7);
        assert_eq!(e.expand().x_degree(), 7);
    }

    #[test]
    fn zero_detection() {
        let z = PolyExpr::product(vec![p("x1"), PolyExpr::sum_squares(vec![p("0"), p("0")]).unwrap()]).unwrap();
        assert!(z.is_zero());
        assert!(z.expand().is_zero());
        assert_eq!(z.x_degree(), 0);
    }

    #[test]
    fn exact_eval_matches_expansion() {
        let ctx = Ctx::new(2, 0);
        let q = |s: &str| PolyExpr::Poly(parse_poly(s, ctx).unwrap());
        let e = PolyExpr::product(vec![PolyExpr::sum_squares(vec![q("x1 - 1"), q("x2")]).unwrap(), q("x1 + x2")]).unwrap();
        let pt = [rat(1, 3), int(-2)];
        assert_eq!(e.eval(&pt).unwrap(), e.expand().eval(&pt).unwrap());
    }

    #[test]
    fn empty_and_mismatched_children_rejected() {
        assert!(PolyExpr::sum_squares(vec![]).is_err());
        let other = PolyExpr::Poly(parse_poly("x1", Ctx::new(1, 0)).unwrap());
        assert!(PolyExpr::product(vec![p("x1"), other]).is_err());
    }
}
