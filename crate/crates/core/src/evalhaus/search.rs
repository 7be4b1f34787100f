use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::rational::{pow, rat, serde_str};
use crate::exact::Rational;

use super::tvector::TVector;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    #[serde(with = "serde_str")]
    pub eta: Rational,
    pub big_k: u32,
    /// Candidate values tried per coordinate before backing out to the enclosing one.
    pub per_level: u32,
    /// Maximum number of predicate evaluations.
    pub budget: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { eta: rat(1, 16), big_k: 8, per_level: 4, budget: 64 }
    }
}

/// Outcome of one predicate evaluation. Lower `score` is better; it is only used
/// to pick the best vector when the search fails.
#[derive(Clone, Debug)]
pub struct Verdict<R> {
    pub ok: bool,
    pub score: f64,
    pub report: R,
}

impl<R> Verdict<R> {
    pub fn new(ok: bool, score: f64, report: R) -> Self {
        Verdict { ok, score, report }
    }
}

#[derive(Clone, Debug)]
pub struct Found<R> {
    pub t: TVector,
    pub report: R,
    pub halved_report: R,
    pub evaluations: usize,
}

#[derive(Clone, Debug)]
pub struct Exhausted<R> {
    pub tried: Vec<TVector>,
    pub best: Option<(TVector, R)>,
}

impl<R> Exhausted<R> {
    pub fn into_error(self) -> Error {
        let tried: Vec<String> = self.tried.iter().map(|t| t.to_string()).collect();
        Error::Budget { stage: "parameter search".into(), detail: format!("{} vectors tried: {}", tried.len(), tried.join(" ")) }
    }
}

#[derive(Clone, Debug)]
pub enum SearchOutcome<R> {
    Found(Found<R>),
    Exhausted(Exhausted<R>),
}

impl<R> SearchOutcome<R> {
    pub fn found(self) -> Option<Found<R>> {
        match self {
            SearchOutcome::Found(f) => Some(f),
            SearchOutcome::Exhausted(_) => None,
        }
    }
}

struct State<'p, R> {
    cfg: &'p SearchConfig,
    pred: &'p mut dyn FnMut(&TVector) -> Result<Verdict<R>>,
    evals: usize,
    tried: Vec<TVector>,
    best: Option<(f64, TVector, R)>,
}

impl<R: Clone> State<'_, R> {
    fn exhausted(&self) -> bool {
        self.evals >= self.cfg.budget
    }

    fn eval(&mut self, t: &TVector) -> Result<Option<Verdict<R>>> {
        if self.exhausted() {
            return Ok(None);
        }
        self.evals += 1;
        let v = (self.pred)(t)?;
        if self.best.as_ref().map_or(true, |(s, _, _)| v.score < *s) {
            self.best = Some((v.score, t.clone(), v.report.clone()));
        }
        Ok(Some(v))
    }

    /// Fills coordinate `k` (0-based) given `values[k+1..]`, recursing downwards.
    fn level(&mut self, values: &mut Vec<Rational>, k: usize) -> Result<Option<Found<R>>> {
        let base = match values.get(k + 1) {
            Some(next) => pow(next, self.cfg.big_k),
            None => self.cfg.eta.clone(),
        };
        let two = Rational::from_integer(2.into());
        let mut v = base;
        for _ in 0..self.cfg.per_level.max(1) {
            values[k] = v.clone();
            if k == 0 {
                if let Some(found) = self.leaf(values)? {
                    return Ok(Some(found));
                }
            } else if let Some(found) = self.level(values, k - 1)? {
                return Ok(Some(found));
            }
            if self.exhausted() {
                return Ok(None);
            }
            v /= &two;
        }
        Ok(None)
    }

    fn leaf(&mut self, values: &[Rational]) -> Result<Option<Found<R>>> {
        let t = TVector::new(values.to_vec())?;
        self.tried.push(t.clone());
        let Some(first) = self.eval(&t)? else { return Ok(None) };
        if !first.ok {
            return Ok(None);
        }
        let Some(second) = self.eval(&t.halved())? else { return Ok(None) };
        if !second.ok {
            return Ok(None);
        }
        Ok(Some(Found { t, report: first.report, halved_report: second.report, evaluations: self.evals }))
    }
}

/// Searches for parameters `t_1 < ... < t_m` on which `pred` holds, both at `t` and
/// at `t` with every entry halved. `t_m` is fixed first, then `t_{m-1}` below
/// `t_m^K`, and so on; each coordinate is halved up to `per_level` times before the
/// enclosing coordinate is refined.
pub fn find_small_params<R: Clone>(
    m: usize,
    cfg: &SearchConfig,
    mut pred: impl FnMut(&TVector) -> Result<Verdict<R>>,
) -> Result<SearchOutcome<R>> {
    if cfg.eta <= rat(0, 1) || cfg.eta >= rat(1, 1) || cfg.big_k < 2 {
        return Err(Error::Invalid("search needs 0 < eta < 1 and K >= 2".into()));
    }
    let mut st = State { cfg, pred: &mut pred, evals: 0, tried: Vec::new(), best: None };
    let found = if m == 0 {
        st.leaf(&[])?
    } else {
        let mut values = vec![Rational::from_integer(0.into()); m];
        st.level(&mut values, m - 1)?
    };
    Ok(match found {
        Some(f) => SearchOutcome::Found(f),
        None => SearchOutcome::Exhausted(Exhausted { tried: st.tried, best: st.best.map(|(_, t, r)| (t, r)) }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn always_true_returns_default_schedule() {
        let out = find_small_params(3, &SearchConfig::default(), |_| Ok(Verdict::new(true, 0.0, ()))).unwrap();
        let f = out.found().unwrap();
        assert_eq!(f.t, TVector::schedule(3, &rat(1, 16), 8).unwrap());
        assert_eq!(f.evaluations, 2);
    }

    #[test]
    fn outer_coordinate_is_refined_last() {
        // t_1 <= t_2^2 / 4, also after halving; only the inner coordinate moves
        let cfg = SearchConfig { eta: rat(1, 2), big_k: 2, per_level: 4, budget: 100 };
        let out = find_small_params(2, &cfg, |t| {
            let ok = t.values[0] <= pow(&t.values[1], 2) / Rational::from_integer(4.into());
            Ok(Verdict::new(ok, 0.0, ()))
        })
        .unwrap();
        let f = out.found().unwrap();
        assert_eq!(f.t.values, vec![rat(1, 32), rat(1, 2)]);
    }

    #[test]
    fn threshold_on_last_coordinate() {
        let cfg = SearchConfig { eta: rat(1, 2), big_k: 2, per_level: 5, budget: 200 };
        let out = find_small_params(2, &cfg, |t| Ok(Verdict::new(t.values[1] <= rat(1, 8), 0.0, ()))).unwrap();
        let f = out.found().unwrap();
        assert_eq!(f.t.values[1], rat(1, 8));
    }

    #[test]
    fn unsatisfiable_lists_tried_vectors() {
        let cfg = SearchConfig { budget: 10, ..SearchConfig::default() };
        let mut calls = 0;
        let out = find_small_params(2, &cfg, |t| {
            calls += 1;
            Ok(Verdict::new(false, crate::exact::rational::to_f64(&t.values[1]), t.values.len()))
        })
        .unwrap();
        assert_eq!(calls, 10);
        match out {
            SearchOutcome::Exhausted(e) => {
                assert_eq!(e.tried.len(), 10);
                let (best, _) = e.best.clone().unwrap();
                assert!(best.values[1] < rat(1, 16));
                assert!(matches!(e.into_error(), Error::Budget { .. }));
            }
            SearchOutcome::Found(_) => panic!("should fail"),
        }
    }
}
