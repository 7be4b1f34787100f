use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::evalhaus::Points;

use super::components::{component_labels, min_link_radius};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FiberStats {
    pub points: usize,
    pub clusters: usize,
    /// Largest bounding-box diagonal among the clusters.
    pub max_diameter: f64,
}

/// Points whose last `ell` coordinates are within `w` (Euclidean) of `y`.
pub fn fiber_slab(pts: &Points, y: &[f64], w: f64) -> Points {
    let ell = y.len();
    let off = pts.dim - ell;
    pts.subset(|p| p[off..].iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() <= w * w)
}

/// Clusters of the slab around the fiber over `y`, linked at `3h` (or `2h*sqrt(n)`
/// when that is larger, so lattice neighbours always join).
pub fn fiber_clusters(pts: &Points, y: &[f64], w: f64) -> Result<FiberStats> {
    if y.is_empty() || y.len() > pts.dim {
        return Err(Error::Invalid(format!("fiber over {} coordinates in dimension {}", y.len(), pts.dim)));
    }
    if w < 2.0 * pts.spacing * (1.0 - 1e-12) {
        return Err(Error::Invalid(format!("slab width {w} below 2h")));
    }
    let slab = fiber_slab(pts, y, w);
    if slab.is_empty() {
        return Ok(FiberStats { points: 0, clusters: 0, max_diameter: 0.0 });
    }
    let labels = component_labels(&slab, (3.0 * pts.spacing).max(min_link_radius(pts)));
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let mut lo = vec![vec![f64::INFINITY; slab.dim]; k];
    let mut hi = vec![vec![f64::NEG_INFINITY; slab.dim]; k];
    for (p, &l) in slab.iter().zip(&labels) {
        for (i, &x) in p.iter().enumerate() {
            lo[l][i] = lo[l][i].min(x);
            hi[l][i] = hi[l][i].max(x);
        }
    }
    let max_diameter = (0..k)
        .map(|l| lo[l].iter().zip(&hi[l]).map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    Ok(FiberStats { points: slab.len(), clusters: k, max_diameter })
}

/// Largest cluster diameter still read as a single point of the fiber, for a slab
/// of half-width `w` in a cloud of spacing `h`. A curve tangent to the fiber
/// direction meets a slab of half-width `w'` in an arc of length about
/// `4*sqrt(w')` at unit curvature; the cloud itself is `h*sqrt(n)` thick.
pub fn point_like_diameter(w: f64, h: f64, n: usize) -> f64 {
    let w = w + h * (n as f64).sqrt();
    4.0 * w.sqrt() + 2.0 * w
}

#[derive(Clone, Debug, Serialize)]
pub struct FiberCheck {
    pub fibers: usize,
    pub worst_clusters: usize,
    pub worst_diameter: f64,
    pub diameter_bound: f64,
    /// Fibers with a cluster wider than `diameter_bound`. Reported only: a
    /// boundary arc nearly parallel to the fiber makes finite fibers look wide.
    pub wide: usize,
    pub n_max: usize,
    pub pass: bool,
}

/// Sampled strong-dimension test for the projection onto the last `k` coordinates:
/// fibers over projections of random cloud points must split into at most
/// `n_max` clusters.
pub fn strong_dimension_check(pts: &Points, k: usize, fibers: usize, n_max: usize, rng: &mut impl Rng) -> Result<FiberCheck> {
    let w = 3.0 * pts.spacing;
    let bound = point_like_diameter(w, pts.spacing, pts.dim);
    if k >= pts.dim || pts.is_empty() {
        return Ok(FiberCheck { fibers: 0, worst_clusters: 0, worst_diameter: 0.0, diameter_bound: bound, wide: 0, n_max, pass: true });
    }
    let idx: Vec<usize> = (0..pts.len()).collect();
    let chosen: Vec<usize> = idx.choose_multiple(rng, fibers.min(pts.len())).copied().collect();
    let off = pts.dim - k;
    let mut worst_clusters = 0;
    let mut worst_diameter = 0.0f64;
    let mut wide = 0;
    for i in chosen.iter().copied() {
        let y = &pts.get(i)[off..];
        let s = fiber_clusters(pts, y, w)?;
        worst_clusters = worst_clusters.max(s.clusters);
        worst_diameter = worst_diameter.max(s.max_diameter);
        wide += usize::from(s.max_diameter > bound);
    }
    Ok(FiberCheck {
        fibers: chosen.len(),
        worst_clusters,
        worst_diameter,
        diameter_bound: bound,
        wide,
        n_max,
        pass: worst_clusters <= n_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evalhaus::{sample_cloud, SampleBox};
    use crate::exact::rational::{int, rat};
    use crate::exact::{parse_poly, Ctx};
    use crate::formula::{Formula, Node, Rel};
    use crate::rng::stream;

    fn sphere(h: i64) -> Points {
        let ctx = Ctx::new(3, 0);
        let f = Formula::new(ctx, Node::atom(parse_poly("x1^2 + x2^2 + x3^2 - 1", ctx).unwrap(), Rel::Eq)).unwrap();
        sample_cloud(&f, &SampleBox::cube(3, &rat(5, 4)).unwrap(), &rat(1, h)).unwrap().to_points()
    }

    #[test]
    fn sphere_equator_is_one_cluster() {
        let pts = sphere(32);
        let s = fiber_clusters(&pts, &[0.0], 2.0 / 32.0).unwrap();
        assert_eq!(s.clusters, 1);
        assert!(s.max_diameter > 1.9);
        assert_eq!(fiber_clusters(&pts, &[1.5], 2.0 / 32.0).unwrap().clusters, 0);
    }

    #[test]
    fn sphere_strong_dimension() {
        let pts = sphere(32);
        let mut rng = stream(1, "fibers");
        // fibers over (x2, x3) are at most two points
        let c = strong_dimension_check(&pts, 2, 40, 64, &mut rng).unwrap();
        assert!(c.pass, "{c:?}");
        assert_eq!(c.wide, 0);
        // fibers over x3 are circles: one cluster each, but none point-like
        let c = strong_dimension_check(&pts, 1, 40, 64, &mut rng).unwrap();
        assert!(c.worst_clusters <= 2 && c.wide > 30, "{c:?}");
    }

    #[test]
    fn circle_vertical_fibers() {
        let ctx = Ctx::new(2, 0);
        let f = Formula::new(ctx, Node::atom(parse_poly("x1^2 + x2^2 - 1", ctx).unwrap(), Rel::Eq)).unwrap();
        let pts = sample_cloud(&f, &SampleBox::cube(2, &int(2)).unwrap(), &rat(1, 128)).unwrap().to_points();
        let s = fiber_clusters(&pts, &[0.5], 3.0 / 128.0).unwrap();
        assert_eq!(s.clusters, 2);
        let c = strong_dimension_check(&pts, 1, 100, 64, &mut stream(3, "fibers")).unwrap();
        assert!(c.pass, "{c:?}");
    }
}
