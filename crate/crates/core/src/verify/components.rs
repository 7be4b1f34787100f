use crate::error::{Error, Result};
use crate::evalhaus::{KdTree, Points};

pub struct UnionFind {
    parent: Vec<u32>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n as u32).collect(), rank: vec![0; n] }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let p = self.parent[x] as usize;
            self.parent[x] = self.parent[p];
            x = p;
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb as u32,
            std::cmp::Ordering::Greater => self.parent[rb] = ra as u32,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra as u32;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

/// Component label per point (labels are `0..k` in order of first appearance).
pub fn component_labels(pts: &Points, r: f64) -> Vec<usize> {
    let tree = KdTree::new(pts);
    let mut uf = UnionFind::new(pts.len());
    let mut near = Vec::new();
    for (i, p) in pts.iter().enumerate() {
        near.clear();
        tree.within(p, r * r, &mut near);
        for &j in &near {
            if j > i {
                uf.union(i, j);
            }
        }
    }
    let mut label = vec![usize::MAX; pts.len()];
    let mut root_label = std::collections::HashMap::new();
    for (i, l) in label.iter_mut().enumerate() {
        let root = uf.find(i);
        let next = root_label.len();
        *l = *root_label.entry(root).or_insert(next);
    }
    label
}

/// Minimum link radius that keeps lattice neighbours connected.
pub fn min_link_radius(pts: &Points) -> f64 {
    2.0 * pts.spacing * (pts.dim as f64).sqrt()
}

/// Number of classes when points at distance `<= r` are linked.
pub fn count_components(pts: &Points, r: f64) -> Result<usize> {
    if r < min_link_radius(pts) * (1.0 - 1e-12) {
        return Err(Error::Invalid(format!("link radius {r} below 2h*sqrt(n) = {}", min_link_radius(pts))));
    }
    Ok(component_labels(pts, r).into_iter().max().map_or(0, |m| m + 1))
}
