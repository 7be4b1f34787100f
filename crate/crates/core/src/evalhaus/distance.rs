use serde::{Deserialize, Serialize};

use super::cloud::Points;

const LEAF: usize = 8;

/// Static kd-tree over a point set (implicit layout: median of each slice is the node).
pub struct KdTree<'a> {
    pts: &'a Points,
    order: Vec<u32>,
}

impl<'a> KdTree<'a> {
    pub fn new(pts: &'a Points) -> Self {
        let mut order: Vec<u32> = (0..pts.len() as u32).collect();
        build(pts, &mut order, 0);
        KdTree { pts, order }
    }

    fn coord(&self, slot: usize, axis: usize) -> f64 {
        self.pts.get(self.order[slot] as usize)[axis]
    }

    fn dist2(&self, slot: usize, q: &[f64]) -> f64 {
        self.pts.get(self.order[slot] as usize).iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum()
    }

    /// Squared distance to the nearest point (infinity for an empty tree).
    pub fn nearest2(&self, q: &[f64]) -> f64 {
        let mut best = f64::INFINITY;
        self.nearest_rec(0, self.order.len(), 0, q, &mut best);
        best
    }

    fn nearest_rec(&self, lo: usize, hi: usize, depth: usize, q: &[f64], best: &mut f64) {
        if hi - lo <= LEAF {
            for s in lo..hi {
                *best = best.min(self.dist2(s, q));
            }
            return;
        }
        let axis = depth % self.pts.dim;
        let mid = lo + (hi - lo) / 2;
        *best = best.min(self.dist2(mid, q));
        let diff = q[axis] - self.coord(mid, axis);
        let (near, far) = if diff < 0.0 { ((lo, mid), (mid + 1, hi)) } else { ((mid + 1, hi), (lo, mid)) };
        self.nearest_rec(near.0, near.1, depth + 1, q, best);
        if diff * diff < *best {
            self.nearest_rec(far.0, far.1, depth + 1, q, best);
        }
    }

    /// Is some point within squared distance `r2` of `q`?
    pub fn any_within2(&self, q: &[f64], r2: f64) -> bool {
        self.within_rec(0, self.order.len(), 0, q, r2)
    }

    fn within_rec(&self, lo: usize, hi: usize, depth: usize, q: &[f64], r2: f64) -> bool {
        if hi - lo <= LEAF {
            return (lo..hi).any(|s| self.dist2(s, q) <= r2);
        }
        let axis = depth % self.pts.dim;
        let mid = lo + (hi - lo) / 2;
        if self.dist2(mid, q) <= r2 {
            return true;
        }
        let diff = q[axis] - self.coord(mid, axis);
        let (near, far) = if diff < 0.0 { ((lo, mid), (mid + 1, hi)) } else { ((mid + 1, hi), (lo, mid)) };
        if self.within_rec(near.0, near.1, depth + 1, q, r2) {
            return true;
        }
        diff * diff <= r2 && self.within_rec(far.0, far.1, depth + 1, q, r2)
    }

    /// Indices of all points within squared distance `r2` of `q`.
    pub fn within(&self, q: &[f64], r2: f64, out: &mut Vec<usize>) {
        self.collect_rec(0, self.order.len(), 0, q, r2, out);
    }

    fn collect_rec(&self, lo: usize, hi: usize, depth: usize, q: &[f64], r2: f64, out: &mut Vec<usize>) {
        if hi - lo <= LEAF {
            out.extend((lo..hi).filter(|&s| self.dist2(s, q) <= r2).map(|s| self.order[s] as usize));
            return;
        }
        let axis = depth % self.pts.dim;
        let mid = lo + (hi - lo) / 2;
        if self.dist2(mid, q) <= r2 {
            out.push(self.order[mid] as usize);
        }
        let diff = q[axis] - self.coord(mid, axis);
        if diff <= 0.0 || diff * diff <= r2 {
            self.collect_rec(lo, mid, depth + 1, q, r2, out);
        }
        if diff >= 0.0 || diff * diff <= r2 {
            self.collect_rec(mid + 1, hi, depth + 1, q, r2, out);
        }
    }
}

fn build(pts: &Points, order: &mut [u32], depth: usize) {
    if order.len() <= LEAF {
        return;
    }
    let axis = depth % pts.dim;
    let mid = order.len() / 2;
    order.select_nth_unstable_by(mid, |&a, &b| {
        let (x, y) = (pts.get(a as usize)[axis], pts.get(b as usize)[axis]);
        x.total_cmp(&y).then(a.cmp(&b))
    });
    let (left, right) = order.split_at_mut(mid);
    build(pts, left, depth + 1);
    build(pts, &mut right[1..], depth + 1);
}

/// `sup_{a in A} min_{b in B} |a - b|`; `None` if either set is empty.
pub fn directed_distance(a: &Points, b: &Points) -> Option<f64> {
    if a.is_empty() || b.is_empty() {
        return None;
    }
    let tree = KdTree::new(b);
    let mut worst2 = 0.0f64;
    for p in a.iter() {
        // early break: most points have a neighbour closer than the running maximum
        if tree.any_within2(p, worst2) {
            continue;
        }
        worst2 = worst2.max(tree.nearest2(p));
    }
    Some(worst2.sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HausdorffEstimate {
    pub value: f64,
    /// Sampling resolution of the two clouds, `h_A + h_B`.
    pub error_bar: f64,
}

/// Symmetric Hausdorff distance between two clouds; `None` when either is empty.
pub fn hausdorff_estimate(a: &Points, b: &Points) -> Option<HausdorffEstimate> {
    assert_eq!(a.dim, b.dim, "clouds of different dimension");
    let ab = directed_distance(a, b)?;
    let ba = directed_distance(b, a)?;
    Some(HausdorffEstimate { value: ab.max(ba), error_bar: a.spacing + b.spacing })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle(r: f64, k: usize, h: f64) -> Points {
        let mut data = Vec::new();
        for i in 0..k {
            let a = i as f64 / k as f64 * std::f64::consts::TAU;
            data.push(r * a.cos());
            data.push(r * a.sin());
        }
        Points::new(2, data, h)
    }

    fn brute_directed(a: &Points, b: &Points) -> f64 {
        a.iter()
            .map(|p| b.iter().map(|q| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    }

    #[test]
    fn identical_clouds() {
        let a = circle(1.0, 300, 0.01);
        assert_eq!(hausdorff_estimate(&a, &a).unwrap().value, 0.0);
    }

    #[test]
    fn concentric_circles() {
        let a = circle(1.0, 2000, 1.0 / 128.0);
        let b = circle(2.0, 4000, 1.0 / 128.0);
        let d = hausdorff_estimate(&a, &b).unwrap();
        assert!((d.value - 1.0).abs() <= d.error_bar, "{d:?}");
        assert_eq!(d.value, hausdorff_estimate(&b, &a).unwrap().value);
    }

    #[test]
    fn matches_brute_force() {
        let a = circle(1.0, 97, 0.0);
        let b = Points::new(2, vec![0.3, 0.1, -1.2, 0.4, 0.0, -2.0, 1.5, 1.5], 0.0);
        assert_eq!(directed_distance(&a, &b).unwrap(), brute_directed(&a, &b));
        assert_eq!(directed_distance(&b, &a).unwrap(), brute_directed(&b, &a));
    }

    #[test]
    fn empty_is_undefined() {
        let a = circle(1.0, 10, 0.0);
        let e = Points::new(2, vec![], 0.0);
        assert!(hausdorff_estimate(&a, &e).is_none());
    }

    #[test]
    fn radius_query() {
        let a = circle(1.0, 360, 0.0);
        let tree = KdTree::new(&a);
        let mut out = Vec::new();
        tree.within(&[1.0, 0.0], 0.01, &mut out);
        let brute = a.iter().filter(|p| (p[0] - 1.0).powi(2) + p[1].powi(2) <= 0.01).count();
        assert_eq!(out.len(), brute);
    }
}
