//! Text grammar: `3/2*x1^2*z3 - x2 + 1`, parentheses allowed, integer powers,
//! division only by nonzero constants.

use num_bigint::BigInt;
use num_traits::Zero;

use super::poly::{Ctx, InfPolynomial, Var};
use super::rational::Rational;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Rational),
    Var(Var),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn perr<T>(col: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse { col, msg: msg.into() })
}

fn lex(s: &str) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
            }
            '+' => {
                out.push((Tok::Plus, col));
                i += 1;
            }
            '-' | '\u{2212}' => {
                out.push((Tok::Minus, col));
                i += 1;
            }
            '*' => {
                out.push((Tok::Star, col));
                i += 1;
            }
            '/' => {
                out.push((Tok::Slash, col));
                i += 1;
            }
            '^' => {
                out.push((Tok::Caret, col));
                i += 1;
            }
            '(' => {
                out.push((Tok::LParen, col));
                i += 1;
            }
            ')' => {
                out.push((Tok::RParen, col));
                i += 1;
            }
            'x' | 'z' => {
                let start = i + 1;
                let mut j = start;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                if j == start {
                    return perr(col, format!("variable '{c}' needs an index"));
                }
                let idx: usize = chars[start..j].iter().collect::<String>().parse().map_err(|_| Error::Parse {
                    col,
                    msg: "variable index too large".into(),
                })?;
                out.push((Tok::Var(if c == 'x' { Var::X(idx) } else { Var::Z(idx) }), col));
                i = j;
            }
            d if d.is_ascii_digit() || d == '.' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_digit() || chars[j] == '.') {
                    j += 1;
                }
                let text: String = chars[i..j].iter().collect();
                let (int_part, frac) = text.split_once('.').unwrap_or((&text, ""));
                if frac.contains('.') || (int_part.is_empty() && frac.is_empty()) {
                    return perr(col, format!("malformed number {text:?}"));
                }
                let digits = format!("{int_part}{frac}");
                let num: BigInt = digits.parse().map_err(|_| Error::Parse { col, msg: format!("malformed number {text:?}") })?;
                let den = num_traits::pow(BigInt::from(10), frac.len());
                out.push((Tok::Num(Rational::new(num, den)), col));
                i = j;
            }
            other => return perr(col, format!("unexpected character {other:?}")),
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    ctx: Ctx,
    end_col: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.1).unwrap_or(self.end_col)
    }

    fn expr(&mut self) -> Result<InfPolynomial> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<InfPolynomial> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    acc = &acc * &self.unary()?;
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    let col = self.col();
                    let d = self.unary()?;
                    if d.has_x() || d.max_zeta() > 0 || d.num_terms() > 1 {
                        return perr(col, "division only by constants");
                    }
                    let c = d.constant_term();
                    if c.is_zero() {
                        return perr(col, "division by zero");
                    }
                    acc = acc.scale(&(Rational::from_integer(1.into()) / c));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<InfPolynomial> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(-&self.unary()?)
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<InfPolynomial> {
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            let col = self.col();
            match self.peek().cloned() {
                Some(Tok::Num(r)) if r.is_integer() => {
                    self.pos += 1;
                    let k: u32 = r.to_integer().try_into().map_err(|_| Error::Parse { col, msg: "exponent too large".into() })?;
                    if k > 4096 {
                        return perr(col, "exponent too large");
                    }
                    Ok(base.pow(k))
                }
                _ => perr(col, "expected a non-negative integer exponent"),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<InfPolynomial> {
        let col = self.col();
        match self.peek().cloned() {
            Some(Tok::Num(r)) => {
                self.pos += 1;
                Ok(InfPolynomial::constant(self.ctx, r))
            }
            Some(Tok::Var(v)) => {
                self.pos += 1;
                InfPolynomial::var(self.ctx, v).map_err(|_| Error::Parse {
                    col,
                    msg: format!("variable {v:?} outside context n={}, m={}", self.ctx.n, self.ctx.m),
                })
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(&Tok::RParen) {
                    return perr(self.col(), "expected ')'");
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(t) => perr(col, format!("unexpected token {t:?}")),
            None => perr(col, "unexpected end of input"),
        }
    }
}

pub fn parse_poly(s: &str, ctx: Ctx) -> Result<InfPolynomial> {
    let toks = lex(s)?;
    let mut p = Parser { toks, pos: 0, ctx, end_col: s.chars().count() + 1 };
    if p.toks.is_empty() {
        return perr(1, "empty polynomial");
    }
    let out = p.expr()?;
    if p.pos != p.toks.len() {
        return perr(p.col(), "trailing input");
    }
    Ok(out)
}
