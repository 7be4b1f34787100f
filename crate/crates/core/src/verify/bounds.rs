use num_bigint::BigUint;
use num_traits::{One, Pow};
use serde::{Deserialize, Serialize};

use crate::formula::Diagram;

/// The constant `B(c) = factor * c * base^c` in the component bound `B(c) d^n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThomMilnor {
    pub factor: u32,
    pub base: u32,
}

impl Default for ThomMilnor {
    fn default() -> Self {
        ThomMilnor { factor: 1, base: 4 }
    }
}

impl ThomMilnor {
    pub fn b(&self, c: u64) -> BigUint {
        BigUint::from(self.factor) * BigUint::from(c) * Pow::pow(BigUint::from(self.base), c)
    }

    /// `B(c) * d^n` for a set with diagram `(n, c, d)`.
    pub fn bound(&self, diag: &Diagram) -> BigUint {
        self.b(diag.c) * Pow::pow(BigUint::from(diag.d.max(1)), diag.n as u64)
    }

    /// `beta = B(2k) * (k d)^(1 + ell)` with `k` read off the diagram `(n, k, k d)`.
    pub fn beta(&self, kappa: u64, d: u32, ell: usize) -> BigUint {
        let kd = BigUint::from(kappa) * BigUint::from(d.max(1));
        self.b(2 * kappa) * Pow::pow(kd, 1 + ell as u64)
    }

    /// Bound `beta^e` on components of an `e`-dimensional affine slice.
    pub fn slice_bound(&self, kappa: u64, d: u32, ell: usize, e: u32) -> BigUint {
        let beta = self.beta(kappa, d, ell);
        if e == 0 {
            BigUint::one()
        } else {
            Pow::pow(beta, e)
        }
    }
}

/// Compact rendering for very large bounds: exact below 10^15, else `~2^k`.
pub fn render_big(v: &BigUint) -> String {
    if v.bits() <= 50 {
        v.to_string()
    } else {
        format!("~2^{}", v.bits() - 1)
    }
}
