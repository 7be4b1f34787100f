use rand::seq::SliceRandom;

use crate::choice::{map_records, projection_coords, ChoiceResult};
use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::evalhaus::{sample_cloud, Points};
use crate::formula::{formula_digest, Formula};
use crate::rng::stream;

use super::checks::{
    containment_record, coverage_record, diagram_record, dimension_record, fiber_record, hausdorff_record, slice_record, thom_milnor_record,
};
use super::report::Report;

/// Independent check of a choice against the set `s` it approximates: a fresh
/// cloud of `s` and random streams distinct from the producing run.
pub fn verify_choice(result: &ChoiceResult, s: &Formula, eps: f64, cfg: &PipelineConfig) -> Result<Report> {
    if result.output.is_empty() {
        return Err(Error::Invalid("the result carries no output cloud".into()));
    }
    let n = result.n();
    if s.ctx().n != n {
        return Err(Error::Context(format!("set in dimension {} for a result in dimension {n}", s.ctx().n)));
    }
    let ell = result.ell;
    let tol = cfg.distance_tolerance();
    let h = cfg.h();
    let input = sample_cloud(s, &result.sample_box, &cfg.grid)?;
    let sp = input.to_points();
    let a = result.output.to_points();
    let proj = projection_coords(n, ell);
    let mut rng = stream(cfg.seed, "verify");

    let mut report = Report::new(vec![dimension_record(&a, ell, cfg.dim_tolerance)]);
    let framed = match result.common_linear() {
        Some(l) if !l.is_identity() => a.map(n, |p| l.apply_f64(p)),
        _ => a.clone(),
    };
    report.push(fiber_record(&framed, ell, cfg.fiber_checks, cfg.n_max, &mut rng)?);
    report.push(containment_record("containment", &a, &sp, eps, tol));
    report.push(hausdorff_record("projection", &a.project(&proj), &sp.project(&proj), eps, tol));
    let measured = result.formula.diagram()?;
    report.push(diagram_record(&measured, &result.claimed));
    report.push(thom_milnor_record("thom_milnor", &a, &measured, &cfg.thom_milnor)?);
    for e in 1..=2u32 {
        if (e as usize) < n {
            let bound = cfg.thom_milnor.slice_bound(measured.c, result.degree, ell, e);
            report.push(slice_record(&a, e as usize, cfg.slices, &bound, &mut rng)?);
        }
    }
    report.push(coverage_record(&a, &fiber_targets(&sp, &proj, cfg.coverage_fibers, &mut rng), 3.0 * h));
    if let Some(info) = &result.map {
        report.extend(map_records(result, info, cfg, "map/verify")?);
    }
    report.note("formula", formula_digest(&result.formula));
    report.note("input", formula_digest(s));
    report.note("seed", cfg.seed);
    report.note("grid", &cfg.grid);
    report.note("epsilon", eps);
    for (i, t) in result.tvectors().into_iter().enumerate() {
        if let Some(t) = t {
            report.note(&format!("tvector{i}"), t);
        }
    }
    Ok(report)
}

/// Projections of random points of `s`: fibers that a choice must meet.
pub fn fiber_targets(s: &Points, proj: &[usize], count: usize, rng: &mut impl rand::Rng) -> Vec<Vec<f64>> {
    let idx: Vec<usize> = (0..s.len()).collect();
    idx.choose_multiple(rng, count.min(s.len())).map(|&i| proj.iter().map(|&c| s.get(i)[c]).collect()).collect()
}

/// Sparse Minkowski dilation: every point together with its shifts by `r` along
/// each coordinate axis.
pub fn dilate(pts: &Points, r: f64) -> Points {
    let mut data = Vec::with_capacity(pts.data.len() * (2 * pts.dim + 1));
    for p in pts.iter() {
        data.extend_from_slice(p);
        for axis in 0..pts.dim {
            for sign in [-1.0, 1.0] {
                let mut q = p.to_vec();
                q[axis] += sign * r;
                data.extend(q);
            }
        }
    }
    Points::new(pts.dim, data, pts.spacing)
}

/// Scales a cloud towards the origin.
pub fn shrink(pts: &Points, factor: f64) -> Points {
    pts.map(pts.dim, |p| p.iter().map(|x| x * factor).collect())
}

/// Containment and projection records for deliberately corrupted clouds: `A`
/// dilated by `2 eps`, and `pi(A)` shrunk to half. Both should fail.
pub fn negative_controls(result: &ChoiceResult, eps: f64, cfg: &PipelineConfig) -> (super::report::Record, super::report::Record) {
    let tol = cfg.distance_tolerance();
    let a = result.output.to_points();
    let s = result.input.to_points();
    let proj = projection_coords(result.n(), result.ell);
    let dilated = containment_record("containment_dilated", &dilate(&a, 2.0 * eps), &s, eps, tol);
    let shrunk = hausdorff_record("projection_shrunk", &shrink(&result.projection.to_points(), 0.5), &s.project(&proj), eps, tol);
    (dilated, shrunk)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dilation_moves_points_out() {
        let p = Points::new(2, vec![1.0, 0.0], 0.01);
        let d = dilate(&p, 0.2);
        assert_eq!(d.len(), 5);
        assert!(d.iter().any(|q| (q[0] - 1.2).abs() < 1e-12));
        let s = shrink(&p, 0.5);
        assert_eq!(s.get(0), &[0.5, 0.0]);
    }
}
