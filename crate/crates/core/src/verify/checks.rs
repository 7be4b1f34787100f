//! Cloud-level checks shared by the pipeline's acceptance predicate and the
//! standalone verifier.

use num_bigint::BigUint;
use rand::Rng;
use serde_json::json;

use crate::error::Result;
use crate::evalhaus::{directed_distance, hausdorff_estimate, Points};
use crate::formula::Diagram;

use super::bounds::{render_big, ThomMilnor};
use super::components::{count_components, min_link_radius};
use super::dimension::box_dimension_default;
use super::fibers::{fiber_slab, strong_dimension_check};
use super::report::Record;

pub fn dimension_record(a: &Points, ell: usize, tol: f64) -> Record {
    Record::at_most("dimension", box_dimension_default(a), ell as f64, tol)
}

/// Every point of `a` lies within `eps + tol` of `s`.
pub fn containment_record(name: &str, a: &Points, s: &Points, eps: f64, tol: f64) -> Record {
    match directed_distance(a, s) {
        Some(d) => Record::at_most(name, d, eps, tol),
        None => Record::flag(name, "empty cloud", eps, false).with_note("distance to an empty set is undefined"),
    }
}

pub fn hausdorff_record(name: &str, a: &Points, b: &Points, eps: f64, tol: f64) -> Record {
    match hausdorff_estimate(a, b) {
        Some(d) => Record::at_most(name, d.value, eps, tol),
        None => Record::flag(name, "empty cloud", eps, false).with_note("distance to an empty set is undefined"),
    }
}

/// The representation's diagram must not exceed the claimed one.
pub fn diagram_record(measured: &Diagram, claimed: &Diagram) -> Record {
    let pass = measured.n == claimed.n && measured.c <= claimed.c && measured.d <= claimed.d;
    Record::flag("diagram", measured.to_string(), claimed.to_string(), pass)
}

pub fn thom_milnor_record(name: &str, a: &Points, diag: &Diagram, tm: &ThomMilnor) -> Result<Record> {
    let count = count_components(a, min_link_radius(a))?;
    let bound = tm.bound(diag);
    Ok(Record::flag(name, count, render_big(&bound), BigUint::from(count) <= bound))
}

/// Strong-dimension check on `a` for the projection onto its last `ell` coordinates.
pub fn fiber_record(a: &Points, ell: usize, fibers: usize, n_max: usize, rng: &mut impl Rng) -> Result<Record> {
    let c = strong_dimension_check(a, ell, fibers, n_max, rng)?;
    Ok(Record::flag(
        "fiber_finiteness",
        json!({"clusters": c.worst_clusters, "wide_fibers": c.wide, "max_diameter": c.worst_diameter}),
        json!({"clusters": c.n_max}),
        c.pass,
    )
    .with_note(format!("{} fibers, point-like diameter {:.3}", c.fibers, c.diameter_bound)))
}

/// Share of the fibers over `ys` (last coordinates) that meet `a` within a slab of width `w`.
pub fn coverage_record(a: &Points, ys: &[Vec<f64>], w: f64) -> Record {
    let hit = ys.iter().filter(|y| !fiber_slab(a, y, w).is_empty()).count();
    Record::flag("fiber_coverage", hit, ys.len(), hit == ys.len())
}

/// Component counts of `count` random `e`-dimensional affine slices through cloud
/// points, compared against `bound`.
pub fn slice_record(a: &Points, e: usize, count: usize, bound: &BigUint, rng: &mut impl Rng) -> Result<Record> {
    let name = format!("slices_e{e}");
    if a.is_empty() {
        return Ok(Record::flag(&name, 0, render_big(bound), true).with_note("empty cloud"));
    }
    let w = 2.0 * a.spacing;
    let link = min_link_radius(a);
    let mut worst = 0usize;
    for _ in 0..count {
        let slab = if e >= a.dim {
            a.clone()
        } else {
            let p0 = a.get(rng.gen_range(0..a.len())).to_vec();
            let basis = random_frame(a.dim, e, rng);
            a.subset(|p| {
                let v: Vec<f64> = p.iter().zip(&p0).map(|(x, o)| x - o).collect();
                let mut r2: f64 = v.iter().map(|x| x * x).sum();
                for b in &basis {
                    let t: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                    r2 -= t * t;
                }
                r2 <= w * w
            })
        };
        worst = worst.max(count_components(&slab, link)?);
    }
    Ok(Record::flag(&name, worst, render_big(bound), BigUint::from(worst) <= *bound).with_note(format!("{count} slices, max b0")))
}

/// `e` orthonormal vectors in `R^n`.
fn random_frame(n: usize, e: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    while out.len() < e {
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for b in &out {
            let t: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= t * y);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            out.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    out
}
