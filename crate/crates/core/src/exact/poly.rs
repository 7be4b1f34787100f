use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::rational::{fmt_rational, Rational};
use crate::error::{Error, Result};

/// Variable context: `n` geometric variables followed by `m` infinitesimals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Ctx {
    pub n: usize,
    pub m: usize,
}

impl Ctx {
    pub fn new(n: usize, m: usize) -> Self {
        Ctx { n, m }
    }

    pub fn width(&self) -> usize {
        self.n + self.m
    }
}

/// A variable, 1-based as in the text grammar (`x1`, `z2`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Var {
    X(usize),
    Z(usize),
}

impl Var {
    fn slot(self, ctx: Ctx) -> Result<usize> {
        match self {
            Var::X(i) if i >= 1 && i <= ctx.n => Ok(i - 1),
            Var::Z(j) if j >= 1 && j <= ctx.m => Ok(ctx.n + j - 1),
            _ => Err(Error::Invalid(format!("{self:?} outside context (n={}, m={})", ctx.n, ctx.m))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Neg,
    Zero,
    Pos,
}

impl Sign {
    pub fn of(r: &Rational) -> Sign {
        if r.is_zero() {
            Sign::Zero
        } else if r.is_positive() {
            Sign::Pos
        } else {
            Sign::Neg
        }
    }

    pub fn to_i8(self) -> i8 {
        match self {
            Sign::Neg => -1,
            Sign::Zero => 0,
            Sign::Pos => 1,
        }
    }

    pub fn from_i8(v: i8) -> Sign {
        match v.signum() {
            -1 => Sign::Neg,
            0 => Sign::Zero,
            _ => Sign::Pos,
        }
    }
}

impl Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        Sign::from_i8(self.to_i8() * rhs.to_i8())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CombineOp {
    Add,
    Sub,
    Mul,
}

/// Polynomial in `x1..xn, z1..zm` with rational coefficients.
///
/// Exponent vectors have length `n + m`, geometric slots first.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct InfPolynomial {
    ctx: Ctx,
    terms: BTreeMap<Vec<u32>, Rational>,
}

impl InfPolynomial {
    pub fn zero(ctx: Ctx) -> Self {
        InfPolynomial { ctx, terms: BTreeMap::new() }
    }

    pub fn constant(ctx: Ctx, c: Rational) -> Self {
        let mut p = Self::zero(ctx);
        if !c.is_zero() {
            p.terms.insert(vec![0; ctx.width()], c);
        }
        p
    }

    pub fn one(ctx: Ctx) -> Self {
        Self::constant(ctx, Rational::one())
    }

    pub fn var(ctx: Ctx, v: Var) -> Result<Self> {
        let slot = v.slot(ctx)?;
        let mut e = vec![0; ctx.width()];
        e[slot] = 1;
        Ok(Self::monomial(ctx, e, Rational::one()))
    }

    pub fn x(ctx: Ctx, i: usize) -> Self {
        Self::var(ctx, Var::X(i)).expect("x index in range")
    }

    pub fn z(ctx: Ctx, j: usize) -> Self {
        Self::var(ctx, Var::Z(j)).expect("zeta index in range")
    }

    pub fn monomial(ctx: Ctx, exps: Vec<u32>, c: Rational) -> Self {
        assert_eq!(exps.len(), ctx.width(), "exponent vector length");
        let mut p = Self::zero(ctx);
        if !c.is_zero() {
            p.terms.insert(exps, c);
        }
        p
    }

    pub fn from_terms(ctx: Ctx, terms: impl IntoIterator<Item = (Vec<u32>, Rational)>) -> Result<Self> {
        let mut p = Self::zero(ctx);
        for (e, c) in terms {
            if e.len() != ctx.width() {
                return Err(Error::Context(format!("exponent vector of length {} in width {}", e.len(), ctx.width())));
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    fn add_term(&mut self, e: Vec<u32>, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn ctx(&self) -> Ctx {
        self.ctx
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn constant_term(&self) -> Rational {
        self.terms.get(&vec![0; self.ctx.width()]).cloned().unwrap_or_else(Rational::zero)
    }

    /// Total degree in the geometric variables; 0 for the zero polynomial.
    pub fn x_degree(&self) -> u32 {
        let n = self.ctx.n;
        self.terms.keys().map(|e| e[..n].iter().sum()).max().unwrap_or(0)
    }

    /// Degree in `z_j` (1-based).
    pub fn zeta_degree(&self, j: usize) -> u32 {
        let slot = self.ctx.n + j - 1;
        self.terms.keys().map(|e| e[slot]).max().unwrap_or(0)
    }

    pub fn degree_in_x(&self, i: usize) -> u32 {
        self.terms.keys().map(|e| e[i - 1]).max().unwrap_or(0)
    }

    /// Highest infinitesimal index present, 0 if none.
    pub fn max_zeta(&self) -> usize {
        let n = self.ctx.n;
        (1..=self.ctx.m).rev().find(|&j| self.terms.keys().any(|e| e[n + j - 1] > 0)).unwrap_or(0)
    }

    pub fn has_x(&self) -> bool {
        let n = self.ctx.n;
        self.terms.keys().any(|e| e[..n].iter().any(|&v| v > 0))
    }

    fn check_ctx(&self, other: &Self) -> Result<()> {
        if self.ctx != other.ctx {
            return Err(Error::Context(format!("{:?} vs {:?}", self.ctx, other.ctx)));
        }
        Ok(())
    }

    pub fn combine(&self, other: &Self, op: CombineOp) -> Result<Self> {
        self.check_ctx(other)?;
        Ok(match op {
            CombineOp::Add => self.add_unchecked(other, false),
            CombineOp::Sub => self.add_unchecked(other, true),
            CombineOp::Mul => self.mul_unchecked(other),
        })
    }

    fn add_unchecked(&self, other: &Self, negate: bool) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), if negate { -c.clone() } else { c.clone() });
        }
        out
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.ctx);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(self.ctx);
        }
        InfPolynomial { ctx: self.ctx, terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect() }
    }

    pub fn pow(&self, mut k: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.ctx);
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul_unchecked(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul_unchecked(&base);
            }
        }
        acc
    }

    pub fn square(&self) -> Self {
        self.mul_unchecked(self)
    }

    /// Formal partial derivative in `x_i` (1-based).
    pub fn partial_derivative(&self, i: usize) -> Result<Self> {
        if i == 0 || i > self.ctx.n {
            return Err(Error::Invalid(format!("derivative variable x{i} outside n={}", self.ctx.n)));
        }
        let slot = i - 1;
        let mut out = Self::zero(self.ctx);
        for (e, c) in &self.terms {
            if e[slot] > 0 {
                let mut e2 = e.clone();
                e2[slot] -= 1;
                out.add_term(e2, c * Rational::from_integer(e[slot].into()));
            }
        }
        Ok(out)
    }

    pub fn gradient(&self) -> Vec<InfPolynomial> {
        (1..=self.ctx.n).map(|i| self.partial_derivative(i).expect("in range")).collect()
    }

    /// Sign in the ordered ring where each later infinitesimal is infinitely
    /// smaller than every earlier one.
    pub fn inf_sign(&self) -> Result<Sign> {
        if self.has_x() {
            return Err(Error::Invalid("inf_sign on a polynomial with geometric variables".into()));
        }
        let n = self.ctx.n;
        let key = |e: &Vec<u32>| -> Vec<u32> { e[n..].iter().rev().copied().collect() };
        Ok(self
            .terms
            .iter()
            .min_by(|a, b| key(a.0).cmp(&key(b.0)))
            .map(|(_, c)| Sign::of(c))
            .unwrap_or(Sign::Zero))
    }

    /// Substitutes `z_j := value`. Requires that no infinitesimal above `j` occurs
    /// in `self` and that `value` only involves `z_1..z_{j-1}` (no geometric variables).
    /// The context keeps its width; see [`InfPolynomial::drop_zetas`].
    pub fn substitute_zeta(&self, j: usize, value: &InfPolynomial) -> Result<Self> {
        self.check_ctx(value)?;
        if j == 0 || j > self.ctx.m {
            return Err(Error::Invalid(format!("z{j} outside m={}", self.ctx.m)));
        }
        if self.max_zeta() > j {
            return Err(Error::Order(format!("z{} still present while substituting z{j}", self.max_zeta())));
        }
        if value.has_x() || value.max_zeta() >= j {
            return Err(Error::Order(format!("value for z{j} must involve only z1..z{}", j - 1)));
        }
        let slot = self.ctx.n + j - 1;
        let mut powers: Vec<InfPolynomial> = vec![Self::one(self.ctx)];
        let mut out = Self::zero(self.ctx);
        for (e, c) in &self.terms {
            let k = e[slot] as usize;
            while powers.len() <= k {
                let next = powers.last().unwrap().mul_unchecked(value);
                powers.push(next);
            }
            let mut base = e.clone();
            base[slot] = 0;
            let mono = Self::monomial(self.ctx, base, c.clone());
            out = out.add_unchecked(&mono.mul_unchecked(&powers[k]), false);
        }
        Ok(out)
    }

    pub fn substitute_zeta_rational(&self, j: usize, value: &Rational) -> Result<Self> {
        self.substitute_zeta(j, &Self::constant(self.ctx, value.clone()))
    }

    /// Limit homomorphism: `z_j := 0`, i.e. constant-term extraction in `z_j`.
    pub fn limit_hom(&self, j: usize) -> Result<Self> {
        if j == 0 || j > self.ctx.m {
            return Err(Error::Invalid(format!("z{j} outside m={}", self.ctx.m)));
        }
        if self.max_zeta() > j {
            return Err(Error::Order(format!("z{} present above z{j}", self.max_zeta())));
        }
        let slot = self.ctx.n + j - 1;
        Ok(InfPolynomial {
            ctx: self.ctx,
            terms: self.terms.iter().filter(|(e, _)| e[slot] == 0).map(|(e, c)| (e.clone(), c.clone())).collect(),
        })
    }

    /// Shrinks the context to `m = keep`, failing if a dropped infinitesimal occurs.
    pub fn drop_zetas(&self, keep: usize) -> Result<Self> {
        if keep > self.ctx.m {
            return Err(Error::Invalid("cannot grow with drop_zetas".into()));
        }
        if self.max_zeta() > keep {
            return Err(Error::Order(format!("z{} still present", self.max_zeta())));
        }
        let w = self.ctx.n + keep;
        Ok(InfPolynomial {
            ctx: Ctx::new(self.ctx.n, keep),
            terms: self.terms.iter().map(|(e, c)| (e[..w].to_vec(), c.clone())).collect(),
        })
    }

    /// Re-embeds into a context with `n2 >= n` geometric and `m2 >= m` infinitesimal
    /// variables; the new geometric variables come after the old ones.
    pub fn embed(&self, ctx: Ctx) -> Result<Self> {
        if ctx.n < self.ctx.n || ctx.m < self.ctx.m {
            return Err(Error::Context(format!("cannot embed {:?} into {:?}", self.ctx, ctx)));
        }
        let (n, m) = (self.ctx.n, self.ctx.m);
        Ok(InfPolynomial {
            ctx,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let mut e2 = vec![0; ctx.width()];
                    e2[..n].copy_from_slice(&e[..n]);
                    e2[ctx.n..ctx.n + m].copy_from_slice(&e[n..]);
                    (e2, c.clone())
                })
                .collect(),
        })
    }

    /// Substitutes `x_i := sum_k rows[i][k] * x_k` (ζ untouched).
    pub fn compose_linear(&self, rows: &[Vec<Rational>]) -> Result<Self> {
        let n = self.ctx.n;
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Invalid("linear substitution must be n x n".into()));
        }
        let images: Vec<InfPolynomial> = rows
            .iter()
            .map(|r| {
                let mut p = Self::zero(self.ctx);
                for (k, c) in r.iter().enumerate() {
                    p.add_term(unit(self.ctx, k), c.clone());
                }
                p
            })
            .collect();
        let mut cache: Vec<Vec<InfPolynomial>> = images.iter().map(|p| vec![Self::one(self.ctx), p.clone()]).collect();
        let mut out = Self::zero(self.ctx);
        for (e, c) in &self.terms {
            let mut zpart = vec![0; self.ctx.width()];
            zpart[n..].copy_from_slice(&e[n..]);
            let mut term = Self::monomial(self.ctx, zpart, c.clone());
            for i in 0..n {
                let k = e[i] as usize;
                while cache[i].len() <= k {
                    let next = cache[i].last().unwrap().mul_unchecked(&images[i]);
                    cache[i].push(next);
                }
                if k > 0 {
                    term = term.mul_unchecked(&cache[i][k]);
                }
            }
            out = out.add_unchecked(&term, false);
        }
        Ok(out)
    }

    /// Renames geometric variables: `x_i` becomes `x_{perm[i-1]+1}`.
    pub fn permute_x(&self, perm: &[usize]) -> Result<Self> {
        let n = self.ctx.n;
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::Invalid("not a permutation".into()));
        }
        Ok(InfPolynomial {
            ctx: self.ctx,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let mut e2 = e.clone();
                    for i in 0..n {
                        e2[perm[i]] = e[i];
                    }
                    (e2, c.clone())
                })
                .collect(),
        })
    }

    /// Exact value at a point; the polynomial must be free of infinitesimals.
    pub fn eval(&self, point: &[Rational]) -> Result<Rational> {
        if self.max_zeta() > 0 {
            return Err(Error::Invalid("evaluate infinitesimals before point evaluation".into()));
        }
        if point.len() != self.ctx.n {
            return Err(Error::Context(format!("point of dimension {} for n={}", point.len(), self.ctx.n)));
        }
        Ok(self.eval_unchecked(point))
    }

    pub(crate) fn eval_unchecked(&self, point: &[Rational]) -> Rational {
        let n = self.ctx.n;
        let mut pows: Vec<Vec<Rational>> = point.iter().map(|v| vec![Rational::one(), v.clone()]).collect();
        let mut acc = Rational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for i in 0..n {
                let k = e[i] as usize;
                if k == 0 {
                    continue;
                }
                while pows[i].len() <= k {
                    let next = pows[i].last().unwrap() * &point[i];
                    pows[i].push(next);
                }
                t *= &pows[i][k];
            }
            acc += t;
        }
        acc
    }

    /// Evaluates every infinitesimal at a rational value (`values[j-1]` for `z_j`),
    /// substituting from the last one down, and returns a polynomial with `m = 0`.
    pub fn eval_zetas(&self, values: &[Rational]) -> Result<Self> {
        if values.len() != self.ctx.m {
            return Err(Error::Context(format!("{} values for m={}", values.len(), self.ctx.m)));
        }
        let mut p = self.clone();
        for j in (1..=self.ctx.m).rev() {
            p = p.substitute_zeta_rational(j, &values[j - 1])?;
        }
        p.drop_zetas(0)
    }

    /// Terms in display order: descending total degree, then descending exponents.
    pub fn sorted_terms(&self) -> Vec<(&Vec<u32>, &Rational)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| {
            let da: u32 = a.0.iter().sum();
            let db: u32 = b.0.iter().sum();
            db.cmp(&da).then_with(|| b.0.cmp(a.0))
        });
        v
    }
}

fn unit(ctx: Ctx, k: usize) -> Vec<u32> {
    let mut e = vec![0; ctx.width()];
    e[k] = 1;
    e
}

impl fmt::Display for InfPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let n = self.ctx.n;
        for (idx, (e, c)) in self.sorted_terms().into_iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if idx == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            let mut factors: Vec<String> = Vec::new();
            for (slot, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let name = if slot < n { format!("x{}", slot + 1) } else { format!("z{}", slot - n + 1) };
                factors.push(if k == 1 { name } else { format!("{name}^{k}") });
            }
            if factors.is_empty() {
                write!(f, "{}", fmt_rational(&mag))?;
            } else {
                if !mag.is_one() {
                    write!(f, "{}*", fmt_rational(&mag))?;
                }
                write!(f, "{}", factors.join("*"))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for InfPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "InfPolynomial[n={}, m={}]({})", self.ctx.n, self.ctx.m, self)
    }
}

// Operator sugar for internal construction code; panics on context mismatch.
impl Add for &InfPolynomial {
    type Output = InfPolynomial;
    fn add(self, rhs: &InfPolynomial) -> InfPolynomial {
        self.combine(rhs, CombineOp::Add).expect("context mismatch in +")
    }
}

impl Sub for &InfPolynomial {
    type Output = InfPolynomial;
    fn sub(self, rhs: &InfPolynomial) -> InfPolynomial {
        self.combine(rhs, CombineOp::Sub).expect("context mismatch in -")
    }
}

impl Mul for &InfPolynomial {
    type Output = InfPolynomial;
    fn mul(self, rhs: &InfPolynomial) -> InfPolynomial {
        self.combine(rhs, CombineOp::Mul).expect("context mismatch in *")
    }
}

impl Neg for &InfPolynomial {
    type Output = InfPolynomial;
    fn neg(self) -> InfPolynomial {
        self.scale(&-Rational::one())
    }
}
