use std::collections::BTreeSet;

use num_traits::Zero;

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

use crate::exact::rational::{fmt_rational, parse_rational, serde_str_vec, to_decimal, to_f64};
use crate::exact::Rational;

/// Sampling window `center ± half_widths`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleBox {
    #[serde(with = "serde_str_vec")]
    pub center: Vec<Rational>,
    #[serde(with = "serde_str_vec")]
    pub half_widths: Vec<Rational>,
}

impl SampleBox {
    pub fn new(center: Vec<Rational>, half_widths: Vec<Rational>) -> Result<Self> {
        if center.len() != half_widths.len() || center.is_empty() {
            return Err(Error::Invalid("box center and half-widths must have the same positive length".into()));
        }
        if half_widths.iter().any(|w| *w <= Rational::zero()) {
            return Err(Error::Invalid("box half-widths must be positive".into()));
        }
        Ok(SampleBox { center, half_widths })
    }

    pub fn cube(n: usize, radius: &Rational) -> Result<Self> {
        SampleBox::new(vec![Rational::zero(); n], vec![radius.clone(); n])
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// Inclusive index range per axis for lattice `center + i*h`.
    pub fn index_ranges(&self, h: &Rational) -> Result<Vec<(i64, i64)>> {
        if *h <= Rational::zero() {
            return Err(Error::Invalid("grid step must be positive".into()));
        }
        self.half_widths
            .iter()
            .map(|w| {
                let k = (w / h).floor().to_integer();
                let k: i64 = k.try_into().map_err(|_| Error::Invalid("grid too fine for the box".into()))?;
                Ok((-k, k))
            })
            .collect()
    }

    pub fn lattice_size(&self, h: &Rational) -> Result<f64> {
        Ok(self.index_ranges(h)?.iter().map(|(lo, hi)| (hi - lo + 1) as f64).product())
    }
}

/// Lattice points `origin + i*h`, stored by integer index, sorted and unique.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointCloud {
    pub n: usize,
    pub h: Rational,
    pub origin: Vec<Rational>,
    idx: Vec<i64>,
    pub source_digest: String,
}

impl PointCloud {
    pub fn from_indices(n: usize, h: Rational, origin: Vec<Rational>, rows: Vec<Vec<i64>>, source_digest: String) -> Self {
        let set: BTreeSet<Vec<i64>> = rows.into_iter().collect();
        let idx = set.into_iter().flatten().collect();
        PointCloud { n, h, origin, idx, source_digest }
    }

    pub fn len(&self) -> usize {
        if self.n == 0 {
            0
        } else {
            self.idx.len() / self.n
        }
    }

    pub fn is_empty(&self) -> bool {
        self.idx.is_empty()
    }

    pub fn index(&self, i: usize) -> &[i64] {
        &self.idx[i * self.n..(i + 1) * self.n]
    }

    pub fn point_exact(&self, i: usize) -> Vec<Rational> {
        self.index(i).iter().zip(&self.origin).map(|(&k, o)| o + &self.h * Rational::from_integer(k.into())).collect()
    }

    pub fn h_f64(&self) -> f64 {
        to_f64(&self.h)
    }

    pub fn to_points(&self) -> Points {
        let h = self.h_f64();
        let o: Vec<f64> = self.origin.iter().map(to_f64).collect();
        let mut data = Vec::with_capacity(self.idx.len());
        for row in self.idx.chunks(self.n) {
            for (k, &i) in row.iter().enumerate() {
                data.push(o[k] + i as f64 * h);
            }
        }
        Points { dim: self.n, data, spacing: h }
    }

    /// Projection onto the given coordinates (0-based), deduplicated.
    pub fn project(&self, coords: &[usize]) -> PointCloud {
        let rows: Vec<Vec<i64>> = self.idx.chunks(self.n).map(|r| coords.iter().map(|&c| r[c]).collect()).collect();
        let origin = coords.iter().map(|&c| self.origin[c].clone()).collect();
        PointCloud::from_indices(coords.len(), self.h.clone(), origin, rows, self.source_digest.clone())
    }

    /// CSV with a metadata header and one point per row at `sig` significant digits.
    pub fn to_csv(&self, sig: usize) -> String {
        let origin: Vec<String> = self.origin.iter().map(fmt_rational).collect();
        let mut s = format!(
            "# n={},h={},digest={},origin={},precision={},lossy=true\n",
            self.n,
            fmt_rational(&self.h),
            self.source_digest,
            origin.join(";"),
            sig
        );
        let cols: Vec<String> = (1..=self.n).map(|i| format!("x{i}")).collect();
        s.push_str(&cols.join(","));
        s.push('\n');
        for i in 0..self.len() {
            let row: Vec<String> = self.point_exact(i).iter().map(|v| to_decimal(v, sig)).collect();
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }

    /// Reads a CSV written by [`PointCloud::to_csv`]; rows are snapped back to the lattice.
    pub fn from_csv(text: &str) -> Result<PointCloud> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Invalid("empty cloud file".into()))?;
        let header = header.strip_prefix("# ").ok_or_else(|| Error::Invalid("cloud header missing".into()))?;
        let mut n = None;
        let mut h = None;
        let mut digest = String::new();
        let mut origin = Vec::new();
        for kv in header.split(',') {
            let (k, v) = kv.split_once('=').ok_or_else(|| Error::Invalid(format!("bad header field {kv:?}")))?;
            match k {
                "n" => n = v.parse::<usize>().ok(),
                "h" => h = Some(parse_rational(v)?),
                "digest" => digest = v.to_string(),
                "origin" => origin = v.split(';').map(parse_rational).collect::<Result<Vec<_>>>()?,
                _ => {}
            }
        }
        let n = n.ok_or_else(|| Error::Invalid("cloud header lacks n".into()))?;
        let h = h.ok_or_else(|| Error::Invalid("cloud header lacks h".into()))?;
        if origin.len() != n {
            return Err(Error::Invalid("cloud origin has wrong dimension".into()));
        }
        lines.next();
        let hf = to_f64(&h);
        let of: Vec<f64> = origin.iter().map(to_f64).collect();
        let mut rows = Vec::new();
        for (ln, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let vals: Vec<f64> = line
                .split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|_| Error::Invalid(format!("cloud row {}: bad number", ln + 3))))
                .collect::<Result<_>>()?;
            if vals.len() != n {
                return Err(Error::Invalid(format!("cloud row {} has {} columns, expected {n}", ln + 3, vals.len())));
            }
            rows.push(vals.iter().zip(&of).map(|(v, o)| ((v - o) / hf).round() as i64).collect());
        }
        Ok(PointCloud::from_indices(n, h, origin, rows, digest))
    }
}

/// Floating-point point set used for distances and geometry estimates.
#[derive(Clone, Debug, PartialEq)]
pub struct Points {
    pub dim: usize,
    pub data: Vec<f64>,
    /// Sampling resolution of the source lattice.
    pub spacing: f64,
}

impl Points {
    pub fn new(dim: usize, data: Vec<f64>, spacing: f64) -> Self {
        assert!(dim > 0 && data.len() % dim == 0, "flat data must hold whole points");
        Points { dim, data, spacing }
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.dim)
    }

    /// Projection onto coordinates (0-based), deduplicated on exact bit patterns.
    pub fn project(&self, coords: &[usize]) -> Points {
        let mut seen = BTreeSet::new();
        let mut data = Vec::new();
        for p in self.iter() {
            let key: Vec<u64> = coords.iter().map(|&c| p[c].to_bits()).collect();
            if seen.insert(key) {
                data.extend(coords.iter().map(|&c| p[c]));
            }
        }
        Points { dim: coords.len(), data, spacing: self.spacing }
    }

    pub fn map(&self, dim: usize, f: impl Fn(&[f64]) -> Vec<f64>) -> Points {
        let mut data = Vec::with_capacity(self.len() * dim);
        for p in self.iter() {
            let q = f(p);
            assert_eq!(q.len(), dim);
            data.extend(q);
        }
        Points { dim, data, spacing: self.spacing }
    }

    pub fn subset(&self, keep: impl Fn(&[f64]) -> bool) -> Points {
        let mut data = Vec::new();
        for p in self.iter() {
            if keep(p) {
                data.extend_from_slice(p);
            }
        }
        Points { dim: self.dim, data, spacing: self.spacing }
    }
}
