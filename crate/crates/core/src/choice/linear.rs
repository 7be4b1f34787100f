use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::rational::{rat, serde_str};
use crate::exact::Rational;
use crate::rng::stream;

pub type Matrix = Vec<Vec<Rational>>;

pub fn identity(n: usize) -> Matrix {
    (0..n).map(|i| (0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect()).collect()
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let (n, k, m) = (a.len(), b.len(), b.first().map_or(0, Vec::len));
    (0..n).map(|i| (0..m).map(|j| (0..k).fold(Rational::zero(), |acc, t| acc + &a[i][t] * &b[t][j])).collect()).collect()
}

/// Exact inverse by Gauss-Jordan elimination; `None` when singular.
pub fn inverse(a: &Matrix) -> Option<Matrix> {
    let n = a.len();
    let mut m: Matrix = a.iter().zip(identity(n)).map(|(r, e)| r.iter().cloned().chain(e).collect()).collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, piv);
        let inv = Rational::one() / &m[col][col];
        for v in m[col].iter_mut() {
            *v *= &inv;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in 0..2 * n {
                    let t = &f * &m[col][c];
                    m[r][c] -= t;
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn determinant(a: &Matrix) -> Rational {
    let n = a.len();
    let mut m = a.clone();
    let mut det = Rational::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !m[r][col].is_zero()) else { return Rational::zero() };
        if piv != col {
            m.swap(col, piv);
            det = -det;
        }
        det *= &m[col][col];
        for r in col + 1..n {
            let f = &m[r][col] / &m[col][col];
            for c in col..n {
                let t = &f * &m[col][c];
                m[r][c] -= t;
            }
        }
    }
    det
}

/// Reversal of coordinate order as a permutation matrix.
pub fn reversal(n: usize) -> Matrix {
    (0..n).map(|i| (0..n).map(|j| if i + j + 1 == n { Rational::one() } else { Rational::zero() }).collect()).collect()
}

/// `L = I + delta * M` with `M` drawn from `{k/64 : -64 <= k <= 64}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearChange {
    #[serde(with = "serde_str")]
    pub delta: Rational,
    #[serde(with = "matrix_serde")]
    pub l: Matrix,
    #[serde(with = "matrix_serde")]
    pub inv: Matrix,
}

impl LinearChange {
    pub fn identity(n: usize) -> Self {
        LinearChange { delta: Rational::zero(), l: identity(n), inv: identity(n) }
    }

    pub fn is_identity(&self) -> bool {
        self.delta.is_zero()
    }

    pub fn apply_f64(&self, x: &[f64]) -> Vec<f64> {
        self.l.iter().map(|r| r.iter().zip(x).map(|(a, b)| crate::exact::rational::to_f64(a) * b).sum()).collect()
    }
}

const MAX_DRAWS: usize = 16;

/// Deterministic in `(n, seed, delta)`; singular draws are redrawn.
pub fn generic_linear_change(n: usize, seed: u64, delta: &Rational) -> Result<LinearChange> {
    if *delta < Rational::zero() {
        return Err(Error::Invalid("perturbation size must be non-negative".into()));
    }
    if delta.is_zero() {
        return Ok(LinearChange::identity(n));
    }
    let mut rng = stream(seed, &format!("linear-change/{delta}"));
    for _ in 0..MAX_DRAWS {
        let l: Matrix = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let m = rat(rng.gen_range(-64..=64), 64);
                        let e = if i == j { Rational::one() } else { Rational::zero() };
                        e + delta * m
                    })
                    .collect()
            })
            .collect();
        if determinant(&l).is_zero() {
            continue;
        }
        let inv = inverse(&l).expect("nonzero determinant");
        return Ok(LinearChange { delta: delta.clone(), l, inv });
    }
    Err(Error::Budget { stage: "linear change".into(), detail: format!("{MAX_DRAWS} singular draws") })
}

mod matrix_serde {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::Matrix;
    use crate::exact::rational::{fmt_rational, parse_rational};

    pub fn serialize<S: Serializer>(m: &Matrix, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> = m.iter().map(|r| r.iter().map(fmt_rational).collect()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Matrix, D::Error> {
        let rows: Vec<Vec<String>> = Vec::deserialize(d)?;
        rows.iter().map(|r| r.iter().map(|v| parse_rational(v).map_err(serde::de::Error::custom)).collect()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_delta_is_identity() {
        let l = generic_linear_change(3, 1, &Rational::zero()).unwrap();
        assert_eq!(l.l, identity(3));
        assert!(l.is_identity());
    }

    #[test]
    fn inverse_is_exact() {
        for seed in 0..5 {
            let l = generic_linear_change(3, seed, &rat(1, 10)).unwrap();
            assert_eq!(mat_mul(&l.l, &l.inv), identity(3));
            assert_eq!(mat_mul(&l.inv, &l.l), identity(3));
            assert_eq!(l, generic_linear_change(3, seed, &rat(1, 10)).unwrap());
        }
    }

    #[test]
    fn determinant_and_reversal() {
        assert_eq!(determinant(&reversal(2)), -Rational::one());
        assert_eq!(mat_mul(&reversal(3), &reversal(3)), identity(3));
        assert!(inverse(&vec![vec![rat(1, 1), rat(2, 1)], vec![rat(2, 1), rat(4, 1)]]).is_none());
    }

    #[test]
    fn serde_round_trip() {
        let l = generic_linear_change(2, 9, &rat(1, 64)).unwrap();
        let back: LinearChange = serde_json::from_str(&serde_json::to_string(&l).unwrap()).unwrap();
        assert_eq!(back, l);
    }
}
