use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::rational::{fmt_rational, pow, serde_str_vec};
use crate::exact::Rational;

/// Concrete values `t_1 < t_2 < ... < t_m` substituted for the infinitesimals.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TVector {
    #[serde(with = "serde_str_vec")]
    pub values: Vec<Rational>,
}

impl TVector {
    /// Checks `0 < t_1 < ... < t_m < 1`.
    pub fn new(values: Vec<Rational>) -> Result<Self> {
        if values.iter().any(|t| *t <= Rational::zero() || *t >= Rational::one()) {
            return Err(Error::Invalid("parameters must lie in (0, 1)".into()));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invalid("parameters must increase: t1 < t2 < ... < tm".into()));
        }
        Ok(TVector { values })
    }

    /// `t_j = eta^(K^(m-j))`, so `t_m = eta` and each earlier entry is the K-th power of the next.
    pub fn schedule(m: usize, eta: &Rational, big_k: u32) -> Result<Self> {
        if *eta <= Rational::zero() || *eta >= Rational::one() || big_k < 2 {
            return Err(Error::Invalid("schedule needs 0 < eta < 1 and K >= 2".into()));
        }
        let mut values = vec![Rational::zero(); m];
        let mut t = eta.clone();
        for j in (0..m).rev() {
            values[j] = t.clone();
            t = pow(&t, big_k);
        }
        TVector::new(values)
    }

    pub fn m(&self) -> usize {
        self.values.len()
    }

    /// `t_j <= t_{j+1}^K` for all j and `t_m <= eta`.
    pub fn is_graded(&self, eta: &Rational, big_k: u32) -> bool {
        self.values.windows(2).all(|w| w[0] <= pow(&w[1], big_k)) && self.values.last().map_or(true, |t| t <= eta)
    }

    pub fn halved(&self) -> TVector {
        let half = Rational::new(1.into(), 2.into());
        TVector { values: self.values.iter().map(|t| t * &half).collect() }
    }

    /// Componentwise `self <= other` with at least one strict inequality.
    pub fn strictly_below(&self, other: &TVector) -> bool {
        self.m() == other.m()
            && self.values.iter().zip(&other.values).all(|(a, b)| a <= b)
            && self.values.iter().zip(&other.values).any(|(a, b)| a < b)
    }
}

impl fmt::Display for TVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.values.iter().map(fmt_rational).collect();
        write!(f, "({})", parts.join(", "))
    }
}

impl fmt::Debug for TVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TVector{self}")
    }
}
