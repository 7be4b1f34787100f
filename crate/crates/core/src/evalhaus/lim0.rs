use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::Rational;
use crate::formula::{formula_digest, Formula};

use super::cloud::{PointCloud, SampleBox};
use super::distance::hausdorff_estimate;
use super::evaluate::evaluate_formula;
use super::sample::{sample_compiled, Compiled, EQUATION_SLACK};
use super::tvector::TVector;

#[derive(Clone, Debug, Serialize)]
pub struct Lim0Step {
    pub t: TVector,
    pub points: usize,
    /// Hausdorff distance to the previous step's cloud; absent for the first
    /// step or when either cloud is empty.
    pub distance: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct Lim0Report {
    pub cloud: PointCloud,
    pub steps: Vec<Lim0Step>,
    pub converged: bool,
    pub tolerance: f64,
}

impl Lim0Report {
    pub fn distances(&self) -> Vec<f64> {
        self.steps.iter().filter_map(|s| s.distance).collect()
    }

    /// Successive distances never grow by more than `slack`.
    pub fn is_monotone(&self, slack: f64) -> bool {
        self.distances().windows(2).all(|w| w[1] <= w[0] + slack)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(&self.steps).expect("steps serialize")
    }
}

/// Samples `f` along a decreasing schedule of parameters. `tolerance` defaults to
/// four grid steps (twice the error bar of two clouds at spacing `h`).
pub fn lim0_estimate(f: &Formula, schedule: &[TVector], bx: &SampleBox, h: &Rational, tolerance: Option<f64>) -> Result<Lim0Report> {
    if schedule.is_empty() {
        return Err(Error::Invalid("empty schedule".into()));
    }
    if let Some(w) = schedule.windows(2).find(|w| !w[1].strictly_below(&w[0])) {
        return Err(Error::Order(format!("schedule not decreasing at {} -> {}", w[0], w[1])));
    }
    let digest = formula_digest(f);
    let tolerance = tolerance.unwrap_or(4.0 * crate::exact::rational::to_f64(h));
    let mut steps = Vec::new();
    let mut prev: Option<PointCloud> = None;
    for t in schedule {
        let e = evaluate_formula(f, t)?;
        let cloud = sample_compiled(&Compiled::new(&e)?, &digest, bx, h, EQUATION_SLACK)?;
        let distance = prev.as_ref().and_then(|p| hausdorff_estimate(&p.to_points(), &cloud.to_points()).map(|d| d.value));
        steps.push(Lim0Step { t: t.clone(), points: cloud.len(), distance });
        prev = Some(cloud);
    }
    let converged = match steps.last() {
        Some(Lim0Step { distance: Some(d), .. }) => *d <= tolerance,
        // a single step or an empty cloud never counts as converged
        _ => false,
    };
    Ok(Lim0Report { cloud: prev.expect("non-empty schedule"), steps, converged, tolerance })
}

/// `t_m = eta / 2^k` for `k = 0..len`, with earlier entries derived by the K-th power rule.
pub fn halving_schedule(m: usize, eta: &Rational, big_k: u32, len: usize) -> Result<Vec<TVector>> {
    let mut out = Vec::with_capacity(len);
    let mut e = eta.clone();
    for _ in 0..len {
        out.push(TVector::schedule(m, &e, big_k)?);
        e /= Rational::from_integer(2.into());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::{int, rat};
    use crate::exact::{parse_poly, Ctx};
    use crate::formula::{Node, Rel};

    fn formula(src: &str, rel: Rel, n: usize) -> Formula {
        let ctx = Ctx::new(n, 1);
        Formula::new(ctx, Node::atom(parse_poly(src, ctx).unwrap(), rel)).unwrap()
    }

    #[test]
    fn shrinking_ball_goes_to_origin() {
        let f = formula("x1^2 + x2^2 - z1^2", Rel::Le, 2);
        let sched: Vec<TVector> = (1..=6).map(|k| TVector::new(vec![rat(1, 1 << k)]).unwrap()).collect();
        let h = rat(1, 64);
        let r = lim0_estimate(&f, &sched, &SampleBox::cube(2, &int(1)).unwrap(), &h, None).unwrap();
        // every point of the final cloud is within t + h of the origin
        assert!(r.cloud.to_points().iter().all(|p| (p[0] * p[0] + p[1] * p[1]).sqrt() <= 1.0 / 64.0 + 1.0 / 64.0));
        assert!(r.is_monotone(4.0 / 64.0));
        let d = r.distances();
        assert_eq!(d.len(), 5);
        assert!(r.converged, "{d:?}");
    }

    #[test]
    fn neighbourhood_shrinks_to_interval() {
        let f = formula("x1^2 - 1 - z1", Rel::Le, 1);
        let sched = halving_schedule(1, &rat(1, 2), 2, 6).unwrap();
        let h = rat(1, 256);
        let r = lim0_estimate(&f, &sched, &SampleBox::cube(1, &int(2)).unwrap(), &h, None).unwrap();
        let pts = r.cloud.to_points();
        let max = pts.iter().map(|p| p[0].abs()).fold(0.0, f64::max);
        let t = crate::exact::rational::to_f64(&sched.last().unwrap().values[0]);
        assert!((max - (1.0 + t).sqrt()).abs() <= 1.0 / 256.0);
        assert!(r.converged);
    }

    #[test]
    fn rejects_non_decreasing_schedule() {
        let f = formula("x1 - z1", Rel::Le, 1);
        let sched = vec![TVector::new(vec![rat(1, 4)]).unwrap(), TVector::new(vec![rat(1, 2)]).unwrap()];
        let err = lim0_estimate(&f, &sched, &SampleBox::cube(1, &int(1)).unwrap(), &rat(1, 8), None);
        assert!(matches!(err, Err(Error::Order(_))));
    }

    #[test]
    fn non_convergence_is_flagged() {
        // two-point schedule with a large jump: reported, not an error
        let f = formula("x1^2 - z1", Rel::Le, 1);
        let sched = vec![TVector::new(vec![rat(3, 4)]).unwrap(), TVector::new(vec![rat(1, 100)]).unwrap()];
        let r = lim0_estimate(&f, &sched, &SampleBox::cube(1, &int(1)).unwrap(), &rat(1, 64), None).unwrap();
        assert!(!r.converged);
        assert_eq!(r.to_json().as_array().unwrap().len(), 2);
    }
}
