use num_traits::Zero;

use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::evalhaus::{find_small_params, hausdorff_estimate, sample_cloud, HausdorffEstimate, PointCloud, SampleBox, SearchConfig, SearchOutcome, Verdict};
use crate::exact::{InfPolynomial, PolyExpr, Rational, Sign};
use crate::formula::{BasicClosedSet, Formula};

#[derive(Clone, Debug)]
pub struct ClosedApprox {
    pub pieces: Vec<BasicClosedSet>,
    /// Shared shift of the strict atoms; zero when there was nothing to relax.
    pub r: Rational,
    pub formula: Formula,
    pub distance: Option<HausdorffEstimate>,
    pub source_cloud: PointCloud,
    pub cloud: PointCloud,
}

fn pieces_for(conjuncts: &[Vec<(std::sync::Arc<PolyExpr>, Sign)>], r: &Rational) -> Result<Vec<BasicClosedSet>> {
    let mut out = Vec::with_capacity(conjuncts.len());
    for conj in conjuncts {
        let ctx = conj.first().map(|(e, _)| e.ctx()).ok_or_else(|| Error::Invalid("empty conjunct".into()))?;
        let mut eqs = Vec::new();
        let mut ineqs = Vec::new();
        for (e, s) in conj {
            match s {
                Sign::Zero => eqs.push((**e).clone()),
                // q < 0 becomes q + r <= 0, and q > 0 becomes -q + r <= 0
                Sign::Neg => ineqs.push(shift(&e.expand(), r)),
                Sign::Pos => ineqs.push(shift(&-&e.expand(), r)),
            }
        }
        out.push(BasicClosedSet::new(ctx, eqs, ineqs)?);
    }
    Ok(out)
}

fn shift(p: &InfPolynomial, r: &Rational) -> PolyExpr {
    (p + &InfPolynomial::constant(p.ctx(), r.clone())).into()
}

fn union_of(pieces: &[BasicClosedSet]) -> Result<Formula> {
    Formula::union(pieces.iter().map(BasicClosedSet::to_formula).collect())
}

/// Replaces each conjunct of the sign-DNF of `s` by a closed basic set, shifting
/// strict atoms by one shared `r > 0` chosen so the sampled Hausdorff distance to
/// `s` stays within `eps`.
pub fn approx_closed_basic(s: &Formula, eps: f64, bx: &SampleBox, cfg: &PipelineConfig) -> Result<ClosedApprox> {
    if s.ctx().m != 0 {
        return Err(Error::Context("closed approximation needs a formula over Q".into()));
    }
    let dnf = s.to_sign_dnf();
    let source_cloud = sample_cloud(s, bx, &cfg.grid)?;
    let source = source_cloud.to_points();
    let strict = dnf.conjuncts.iter().flatten().any(|(_, sg)| *sg != Sign::Zero);
    if !strict {
        let pieces = pieces_for(&dnf.conjuncts, &Rational::zero())?;
        let formula = union_of(&pieces)?;
        let cloud = sample_cloud(&formula, bx, &cfg.grid)?;
        let distance = hausdorff_estimate(&cloud.to_points(), &source);
        return Ok(ClosedApprox { pieces, r: Rational::zero(), formula, distance, source_cloud, cloud });
    }
    let search = SearchConfig { eta: cfg.closed_r0.clone(), big_k: 2, per_level: cfg.closed_budget as u32, budget: 2 * cfg.closed_budget };
    let outcome = find_small_params(1, &search, |t| {
        let pieces = pieces_for(&dnf.conjuncts, &t.values[0])?;
        let formula = union_of(&pieces)?;
        let cloud = sample_cloud(&formula, bx, &cfg.grid)?;
        let d = hausdorff_estimate(&cloud.to_points(), &source);
        let ok = match d {
            Some(d) => d.value <= eps,
            None => cloud.is_empty() && source.is_empty(),
        };
        let score = d.map_or(f64::INFINITY, |d| d.value);
        Ok(Verdict::new(ok, score, (pieces, formula, cloud, d)))
    })?;
    match outcome {
        SearchOutcome::Found(f) => {
            let (pieces, formula, cloud, distance) = f.report;
            Ok(ClosedApprox { pieces, r: f.t.values[0].clone(), formula, distance, source_cloud, cloud })
        }
        SearchOutcome::Exhausted(e) => {
            let best = e.best.as_ref().and_then(|(t, rep)| rep.3.map(|d| format!("best r = {}, distance {:.4}", t.values[0], d.value)));
            let mut err = e.into_error();
            if let (Error::Budget { stage, detail }, Some(b)) = (&mut err, best) {
                *stage = "closed approximation".into();
                detail.push_str("; ");
                detail.push_str(&b);
            }
            Err(err)
        }
    }
}
