//! Outward-rounded f64 interval arithmetic and interval evaluation of
//! polynomials over boxes. Used only to prune and to fast-path decisions; every
//! borderline decision falls back to exact arithmetic.

use crate::exact::rational::to_f64;
use crate::exact::{InfPolynomial, Rational};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

const ENTIRE: Interval = Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY };

fn down(x: f64) -> f64 {
    if x.is_finite() {
        x.next_down()
    } else {
        x
    }
}

fn up(x: f64) -> f64 {
    if x.is_finite() {
        x.next_up()
    } else {
        x
    }
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        if lo.is_nan() || hi.is_nan() {
            return ENTIRE;
        }
        Interval { lo, hi }
    }

    pub fn point(v: f64) -> Self {
        Interval::new(v, v)
    }

    pub fn from_rational(r: &Rational) -> Self {
        let v = to_f64(r);
        if Rational::from_float(v).as_ref() == Some(r) {
            Interval::point(v)
        } else {
            Interval::new(down(v), up(v))
        }
    }

    pub fn hull(a: f64, b: f64) -> Self {
        Interval::new(a.min(b), a.max(b))
    }

    pub fn contains_zero(&self) -> bool {
        self.lo <= 0.0 && self.hi >= 0.0
    }

    /// Largest absolute value.
    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// Smallest absolute value.
    pub fn mig(&self) -> f64 {
        if self.contains_zero() {
            0.0
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }

    pub fn abs(&self) -> Interval {
        Interval::new(self.mig(), self.mag())
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        if lo <= hi {
            Interval::new(lo, hi)
        } else {
            // both enclose the same true range, so disjointness is rounding noise
            *self
        }
    }

    pub fn add(&self, o: &Interval) -> Interval {
        Interval::new(down(self.lo + o.lo), up(self.hi + o.hi))
    }

    pub fn sub(&self, o: &Interval) -> Interval {
        Interval::new(down(self.lo - o.hi), up(self.hi - o.lo))
    }

    pub fn neg(&self) -> Interval {
        Interval::new(-self.hi, -self.lo)
    }

    pub fn mul(&self, o: &Interval) -> Interval {
        let c = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi];
        if c.iter().any(|v| v.is_nan()) {
            return ENTIRE;
        }
        let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Interval::new(down(lo), up(hi))
    }

    pub fn sqr(&self) -> Interval {
        let a = self.abs();
        Interval::new(down(a.lo * a.lo).max(0.0), up(a.hi * a.hi))
    }

    pub fn powi(&self, k: u32) -> Interval {
        match k {
            0 => Interval::point(1.0),
            1 => *self,
            _ if k % 2 == 0 => pow_nonneg(self.abs(), k),
            _ => {
                // odd powers are monotone
                let lo = pow_pt(self.lo, k).lo;
                let hi = pow_pt(self.hi, k).hi;
                Interval::new(lo, hi)
            }
        }
    }

    pub fn scale(&self, c: f64) -> Interval {
        self.mul(&Interval::point(c))
    }
}

fn pow_nonneg(x: Interval, k: u32) -> Interval {
    let mut acc = Interval::point(1.0);
    let mut base = x;
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc.mul(&base);
        }
        e >>= 1;
        if e > 0 {
            base = base.mul(&base);
        }
    }
    Interval::new(acc.lo.max(0.0), acc.hi)
}

fn pow_pt(v: f64, k: u32) -> Interval {
    let m = pow_nonneg(Interval::point(v.abs()), k);
    if v < 0.0 {
        m.neg()
    } else {
        m
    }
}

/// Powers `x_i^k` for `k <= max_deg[i]`, precomputed for one box.
pub struct PowTable {
    pows: Vec<Vec<Interval>>,
}

impl PowTable {
    pub fn new(bx: &[Interval], max_deg: &[u32]) -> Self {
        let pows = bx
            .iter()
            .zip(max_deg)
            .map(|(x, &d)| (0..=d).map(|k| x.powi(k)).collect())
            .collect();
        PowTable { pows }
    }

    fn get(&self, i: usize, k: u32) -> Interval {
        self.pows[i][k as usize]
    }
}

/// Rational-free copy of a polynomial (no infinitesimals) for interval evaluation.
#[derive(Clone, Debug)]
pub struct FloatPoly {
    n: usize,
    terms: Vec<(Vec<(usize, u32)>, Interval)>,
}

impl FloatPoly {
    pub fn new(p: &InfPolynomial) -> Self {
        let n = p.ctx().n;
        debug_assert_eq!(p.max_zeta(), 0, "interval evaluation needs evaluated infinitesimals");
        let terms = p
            .terms()
            .map(|(e, c)| {
                let sparse: Vec<(usize, u32)> = e[..n].iter().enumerate().filter(|(_, &k)| k > 0).map(|(i, &k)| (i, k)).collect();
                (sparse, Interval::from_rational(c))
            })
            .collect();
        FloatPoly { n, terms }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn max_degrees(&self) -> Vec<u32> {
        let mut d = vec![0; self.n];
        for (e, _) in &self.terms {
            for &(i, k) in e {
                d[i] = d[i].max(k);
            }
        }
        d
    }

    pub fn eval(&self, pows: &PowTable) -> Interval {
        let mut acc = Interval::point(0.0);
        for (e, c) in &self.terms {
            let mut t = *c;
            for &(i, k) in e {
                t = t.mul(&pows.get(i, k));
            }
            acc = acc.add(&t);
        }
        acc
    }
}
