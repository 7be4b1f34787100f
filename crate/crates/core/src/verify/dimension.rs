use std::collections::HashSet;

use crate::evalhaus::Points;

/// Box-counting dimension: least-squares slope of `log N(s)` against `log(1/s)`.
pub fn box_dimension(pts: &Points, scales: &[f64]) -> f64 {
    if pts.len() <= 1 || scales.len() < 2 {
        return 0.0;
    }
    let samples: Vec<(f64, f64)> = scales
        .iter()
        .map(|&s| {
            let boxes: HashSet<Vec<i64>> = pts.iter().map(|p| p.iter().map(|x| (x / s).floor() as i64).collect()).collect();
            ((1.0 / s).ln(), (boxes.len() as f64).ln())
        })
        .collect();
    let k = samples.len() as f64;
    let mx = samples.iter().map(|s| s.0).sum::<f64>() / k;
    let my = samples.iter().map(|s| s.1).sum::<f64>() / k;
    let sxy: f64 = samples.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = samples.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// The scales `4h, 8h, 16h` of the sampling grid. Sampled zero sets are bands a
/// few cells wide, which inflates the slope at scales of one or two `h`; coarser
/// scales merge nearby curves into area.
pub fn default_scales(h: f64) -> Vec<f64> {
    vec![4.0 * h, 8.0 * h, 16.0 * h]
}

pub fn box_dimension_default(pts: &Points) -> f64 {
    box_dimension(pts, &default_scales(pts.spacing))
}
