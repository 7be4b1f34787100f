//! Exact arithmetic over the rationals extended by ordered infinitesimals.

pub mod expr;
pub mod parse;
pub mod poly;
pub mod rational;

pub use expr::PolyExpr;
pub use parse::parse_poly;
pub use poly::{CombineOp, Ctx, InfPolynomial, Sign, Var};
pub use rational::Rational;
