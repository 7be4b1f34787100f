use num_traits::Signed;

use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::evalhaus::{sample_cloud, PointCloud, Points, SampleBox};
use crate::exact::rational::{rat, to_f64};
use crate::exact::{InfPolynomial, Rational};
use crate::formula::{graph_formula, Formula};
use crate::rng::stream;
use crate::verify::{containment_record, dimension_record, hausdorff_record, slice_record, Report};

use super::pipeline::{choice_in, validate, ChoiceResult};

#[derive(Clone, Debug)]
pub struct MapInfo {
    pub components: Vec<InfPolynomial>,
    /// Sampled bound on the spectral norm of the Jacobian over `B(2 rho)`.
    pub lipschitz: f64,
    pub lipschitz_step: f64,
    /// `2 + lipschitz`.
    pub big_l: f64,
    /// Cloud of `K` on the x-part of the lattice.
    pub domain: PointCloud,
    /// Cloud of `C_eps`: the x-projection of the choice cloud.
    pub choice: PointCloud,
}

pub(crate) fn eval_f64(p: &InfPolynomial, x: &[f64]) -> f64 {
    p.terms().map(|(e, c)| to_f64(c) * e.iter().zip(x).map(|(&k, v)| v.powi(k as i32)).product::<f64>()).sum()
}

/// Images of a cloud under the map.
pub fn map_points(f: &[InfPolynomial], pts: &Points) -> Points {
    pts.map(f.len(), |x| f.iter().map(|p| eval_f64(p, x)).collect())
}

/// Largest singular value of a `rows x cols` matrix via power iteration on `J J^T`.
fn spectral_norm(j: &[Vec<f64>]) -> f64 {
    let r = j.len();
    let m: Vec<Vec<f64>> = (0..r).map(|a| (0..r).map(|b| j[a].iter().zip(&j[b]).map(|(x, y)| x * y).sum()).collect()).collect();
    let mut v = vec![1.0; r];
    let mut lambda = 0.0;
    for _ in 0..100 {
        let w: Vec<f64> = m.iter().map(|row| row.iter().zip(&v).map(|(a, b)| a * b).sum()).collect();
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        lambda = norm;
        v = w.into_iter().map(|x| x / norm).collect();
    }
    lambda.sqrt()
}

/// Maximum of the Jacobian's spectral norm over a regular grid in the ball of
/// radius `radius`. Returns the estimate and the grid step.
pub fn lipschitz_estimate(f: &[InfPolynomial], radius: f64, per_axis: u32) -> Result<(f64, f64)> {
    let Some(first) = f.first() else { return Ok((0.0, 0.0)) };
    let n = first.ctx().n;
    let jac: Vec<Vec<InfPolynomial>> = f.iter().map(|p| (1..=n).map(|i| p.partial_derivative(i)).collect::<Result<_>>()).collect::<Result<_>>()?;
    // keep the grid below a million points
    let mut k = per_axis.max(2) as usize;
    while k.pow(n as u32) > 1_000_000 && k > 2 {
        k -= 1;
    }
    let step = 2.0 * radius / (k - 1) as f64;
    let mut best = 0.0f64;
    let mut idx = vec![0usize; n];
    loop {
        let x: Vec<f64> = idx.iter().map(|&i| -radius + i as f64 * step).collect();
        if x.iter().map(|v| v * v).sum::<f64>() <= radius * radius * (1.0 + 1e-12) {
            let j: Vec<Vec<f64>> = jac.iter().map(|row| row.iter().map(|p| eval_f64(p, &x)).collect()).collect();
            best = best.max(spectral_norm(&j));
        }
        let mut a = 0;
        loop {
            if a == n {
                return Ok((best, step));
            }
            idx[a] += 1;
            if idx[a] < k {
                break;
            }
            idx[a] = 0;
            a += 1;
        }
    }
}

/// Upper bound for `|p|` on the cube `[-r, r]^n`.
fn sup_bound(p: &InfPolynomial, r: &Rational) -> Rational {
    let one = rat(1, 1);
    let base = if *r > one { r.clone() } else { one };
    p.terms().map(|(e, c)| c.abs() * crate::exact::rational::pow(&base, e.iter().sum())).sum()
}

/// Records for the map case, computed from the choice cloud and `K`'s cloud.
pub fn map_records(result: &ChoiceResult, info: &MapInfo, cfg: &PipelineConfig, tag: &str) -> Result<Report> {
    let ell = info.components.len();
    let c = info.choice.to_points();
    let k = info.domain.to_points();
    let tol = cfg.distance_tolerance();
    let eps = result.eps;
    let mut rng = stream(cfg.seed, tag);
    let beta = cfg.thom_milnor.slice_bound(result.diagram.c, result.degree, ell, 1);
    let mut report = Report::new(vec![
        dimension_record(&c, ell, cfg.dim_tolerance),
        containment_record("map_containment", &c, &k, eps, tol),
        hausdorff_record("map_image", &map_points(&info.components, &c), &map_points(&info.components, &k), info.big_l * eps, tol)
            .with_note(format!("L = 2 + {:.4} (grid step {:.4})", info.lipschitz, info.lipschitz_step)),
    ]);
    report.records[0].name = "map_dimension".into();
    let mut slices = slice_record(&c, 1, cfg.slices, &beta, &mut rng)?;
    slices.name = "map_slices_e1".into();
    report.push(slices);
    Ok(report)
}

/// Choice for the map `F` on `K`: a choice `A` of the graph of `F` over `K` with
/// respect to the projection onto the `y` coordinates, and `C = pi_x(A)`.
pub fn choice_for_map(k: &Formula, f: &[InfPolynomial], eps: f64, rho: &Rational, cfg: &PipelineConfig) -> Result<ChoiceResult> {
    let n = k.ctx().n;
    let ell = f.len();
    if k.ctx().m != 0 {
        return Err(Error::Context("the domain must be defined over Q".into()));
    }
    validate(n + ell, ell, eps, rho)?;
    if eps >= to_f64(rho) {
        return Err(Error::Invalid(format!("epsilon = {eps} must be below rho = {rho}")));
    }
    let g = graph_formula(k, f)?;
    let margin = rho * rat(1, 4);
    let bounds: Vec<Rational> = f.iter().map(|p| sup_bound(p, rho)).collect();
    let rho_g = bounds.iter().fold(rho.clone(), |acc, b| acc + b);
    let mut half: Vec<Rational> = vec![rho + &margin; n];
    half.extend(bounds.iter().map(|b| b + &margin));
    let bx = SampleBox::new(vec![rat(0, 1); n + ell], half)?;
    let mut result = choice_in(&g, ell, eps, &rho_g, bx, cfg)?;

    let kbox = SampleBox::cube(n, &(rho + &margin))?;
    let domain = sample_cloud(k, &kbox, &cfg.grid)?;
    let choice = result.output.project(&(0..n).collect::<Vec<_>>());
    let (lipschitz, step) = lipschitz_estimate(f, 2.0 * to_f64(rho), cfg.lipschitz_grid)?;
    let info = MapInfo { components: f.to_vec(), lipschitz, lipschitz_step: step, big_l: 2.0 + lipschitz, domain, choice };
    let records = map_records(&result, &info, cfg, "map/pipeline")?;
    result.metrics.extend(records);
    result.metrics.note("lipschitz", lipschitz);
    result.map = Some(info);
    Ok(result)
}

/// Rebuilds the map information of a stored result, e.g. for independent verification.
pub fn map_info(result: &ChoiceResult, f: &[InfPolynomial], k: &Formula, cfg: &PipelineConfig, rho: &Rational) -> Result<MapInfo> {
    let n = k.ctx().n;
    let kbox = SampleBox::cube(n, &(rho + rho * rat(1, 4)))?;
    let domain = sample_cloud(k, &kbox, &cfg.grid)?;
    let choice = result.output.project(&(0..n).collect::<Vec<_>>());
    let (lipschitz, step) = lipschitz_estimate(f, 2.0 * to_f64(rho), cfg.lipschitz_grid)?;
    Ok(MapInfo { components: f.to_vec(), lipschitz, lipschitz_step: step, big_l: 2.0 + lipschitz, domain, choice })
}
