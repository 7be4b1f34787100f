use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::evalhaus::{evaluate_formula, find_small_params, sample_cloud, PointCloud, Points, SampleBox, SearchConfig, SearchOutcome, TVector, Verdict};
use crate::exact::rational::rat;
use crate::exact::{Rational, PolyExpr};
use crate::formula::{as_basic_closed, formula_digest, BasicClosedSet, Diagram, Formula, Node, Rel};
use crate::rng::stream;
use crate::verify::{
    box_dimension_default, containment_record, diagram_record, dimension_record, fiber_record, hausdorff_record, strong_dimension_check,
    thom_milnor_record, Record, Report,
};

use super::closed::approx_closed_basic;
use super::linear::{generic_linear_change, mat_mul, reversal, LinearChange};
use super::map::MapInfo;
use super::perturb::{build_perturbed, strategy_by_name};
use super::tilde::build_tilde_s_ell;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PieceInfo {
    /// Parameters substituted for the infinitesimals; absent when the piece was
    /// returned unchanged.
    pub tvector: Option<TVector>,
    pub linear: LinearChange,
    pub claimed: Diagram,
    pub measured: Diagram,
    pub a1: usize,
    /// Dimension used for the strong-dimension precheck.
    pub k: usize,
    pub shortcut: bool,
    pub evaluations: usize,
    pub report: Report,
}

#[derive(Clone, Debug)]
pub struct ChoiceResult {
    /// The choice over Q, a union of one evaluated construction per basic piece.
    pub formula: Formula,
    pub ell: usize,
    pub eps: f64,
    pub rho: Rational,
    /// Degree bound `d` of the input family.
    pub degree: u32,
    pub diagram: Diagram,
    pub claimed: Diagram,
    pub pieces: Vec<PieceInfo>,
    pub sample_box: SampleBox,
    pub input: PointCloud,
    pub output: PointCloud,
    /// Projection of `output` onto the last `ell` coordinates.
    pub projection: PointCloud,
    pub metrics: Report,
    pub map: Option<MapInfo>,
}

impl ChoiceResult {
    pub fn n(&self) -> usize {
        self.formula.ctx().n
    }

    pub fn tvectors(&self) -> Vec<Option<&TVector>> {
        self.pieces.iter().map(|p| p.tvector.as_ref()).collect()
    }

    /// The linear change shared by all pieces, if there is one.
    pub fn common_linear(&self) -> Option<&LinearChange> {
        let first = &self.pieces.first()?.linear;
        self.pieces.iter().all(|p| p.linear == *first).then_some(first)
    }
}

/// Coordinates kept by the projection onto the last `ell` coordinates.
pub fn projection_coords(n: usize, ell: usize) -> Vec<usize> {
    (n - ell..n).collect()
}

/// Lattice box used for every cloud of a run in `R^n` with bounding radius `rho`.
pub fn default_box(n: usize, rho: &Rational) -> Result<SampleBox> {
    SampleBox::cube(n, &(rho * rat(5, 4)))
}

pub(crate) fn validate(n: usize, ell: usize, eps: f64, rho: &Rational) -> Result<()> {
    if ell < 1 || ell > n {
        return Err(Error::Invalid(format!("ell = {ell} outside 1..={n}")));
    }
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::Invalid(format!("epsilon must be positive, got {eps}")));
    }
    if *rho <= rat(0, 1) {
        return Err(Error::Invalid("bounding radius must be positive".into()));
    }
    Ok(())
}

struct PieceRun {
    formula: Formula,
    cloud: PointCloud,
    degree: u32,
    info: PieceInfo,
}

/// Checks used both as the search predicate and as the final per-piece record.
fn piece_report(cloud: &PointCloud, target: &Points, target_proj: &Points, ell: usize, eps: f64, linear: &LinearChange, cfg: &PipelineConfig, tag: &str) -> Result<Report> {
    let a = cloud.to_points();
    if a.is_empty() {
        return Ok(Report::new(vec![Record::flag("nonempty", 0, ">0", false)]));
    }
    let tol = cfg.distance_tolerance();
    let proj = projection_coords(cloud.n, ell);
    let framed = if linear.is_identity() { a.clone() } else { a.map(a.dim, |p| linear.apply_f64(p)) };
    let mut rng = stream(cfg.seed, tag);
    Ok(Report::new(vec![
        dimension_record(&a, ell, cfg.dim_tolerance),
        fiber_record(&framed, ell, cfg.fiber_checks, cfg.n_max, &mut rng)?,
        containment_record("containment", &a, target, eps, tol),
        hausdorff_record("projection", &a.project(&proj), target_proj, eps, tol),
    ]))
}

/// Picks the first generic linear change (perturbation size doubling from
/// `linear_delta0`) under which the zero set of the
/// equations has finite fibers over the last `k` coordinates.
fn choose_linear(s: &BasicClosedSet, k: usize, bx: &SampleBox, cfg: &PipelineConfig, index: usize) -> Result<LinearChange> {
    let n = s.ctx.n;
    if k >= n || s.eqs.is_empty() {
        return Ok(LinearChange::identity(n));
    }
    let coarse = &cfg.grid * Rational::from_integer(cfg.precheck_grid_factor.into());
    let mut worst = Vec::new();
    for attempt in 0..=cfg.linear_retries {
        let delta = &cfg.linear_delta0 * Rational::from_integer((1i64 << attempt.min(40)).into());
        let lc = generic_linear_change(n, cfg.seed, &delta)?;
        // Z(P) in the coordinates u = L x
        let items = s
            .eqs
            .iter()
            .map(|e| Ok(Node::atom(e.map_polys(&mut |p| p.compose_linear(&lc.inv))?, Rel::Eq)))
            .collect::<Result<Vec<_>>>()?;
        let zp = Formula::new(s.ctx, Node::And(items))?;
        let cloud = sample_cloud(&zp, bx, &coarse)?;
        let mut rng = stream(cfg.seed, &format!("precheck/{index}/{attempt}"));
        let check = strong_dimension_check(&cloud.to_points(), k, cfg.precheck_fibers, cfg.n_max, &mut rng)?;
        if check.pass {
            return Ok(lc);
        }
        worst.push(format!("delta={} clusters={} diameter={:.3}", lc.delta, check.worst_clusters, check.worst_diameter));
    }
    Err(Error::Budget { stage: "strong dimension".into(), detail: worst.join("; ") })
}

fn map_exprs(exprs: &[PolyExpr], rows: &[Vec<Rational>]) -> Result<Vec<PolyExpr>> {
    exprs.iter().map(|e| e.map_polys(&mut |p| p.compose_linear(rows))).collect()
}

#[allow(clippy::too_many_arguments)]
fn choose_piece(s: &BasicClosedSet, target: &PointCloud, ell: usize, eps: f64, rho: &Rational, bx: &SampleBox, cfg: &PipelineConfig, index: usize) -> Result<PieceRun> {
    let n = s.ctx.n;
    let tp = target.to_points();
    let target_proj = tp.project(&projection_coords(n, ell));
    let dim_s = box_dimension_default(&tp);
    let degree = s.x_degree().max(1);

    if cfg.low_dim_shortcut && dim_s <= ell as f64 + cfg.dim_tolerance {
        let formula = s.to_sign_dnf()?.to_formula();
        let d = formula.diagram()?;
        let lc = LinearChange::identity(n);
        let report = piece_report(target, &tp, &target_proj, ell, eps, &lc, cfg, &format!("piece/{index}/shortcut"))?;
        let info = PieceInfo { tvector: None, linear: lc, claimed: d, measured: d, a1: s.len(), k: ell, shortcut: true, evaluations: 0, report };
        return Ok(PieceRun { formula, cloud: target.clone(), degree, info });
    }

    let k = (dim_s.round().max(0.0) as usize).clamp(ell, n);
    let linear = choose_linear(s, k, bx, cfg, index)?;

    // working frame w = R L x: the construction projects onto the first ell
    // coordinates, the checks onto the last ell
    let t_mat = mat_mul(&reversal(n), &linear.l);
    let t_inv = mat_mul(&linear.inv, &reversal(n));
    let s_w = BasicClosedSet::new(s.ctx, map_exprs(&s.eqs, &t_inv)?, map_exprs(&s.ineqs, &t_inv)?)?;
    let strategy = strategy_by_name(&cfg.strategy)?;
    let pert = build_perturbed(&s_w, strategy.as_ref(), rho)?;
    let tilde = build_tilde_s_ell(&pert, ell, cfg.crit_rank)?;
    let ctx3 = tilde.formula.ctx();
    let a_inf = tilde.formula.map_polys(ctx3, &mut |p| p.compose_linear(&t_mat))?;
    let measured = a_inf.diagram()?;

    let search = SearchConfig { eta: cfg.eta.clone(), big_k: cfg.big_k, per_level: cfg.search_per_level, budget: cfg.search_budget };
    let outcome = find_small_params(ctx3.m, &search, |t| {
        let e = evaluate_formula(&a_inf, t)?;
        let cloud = sample_cloud(&e, bx, &cfg.grid)?;
        let report = piece_report(&cloud, &tp, &target_proj, ell, eps, &linear, cfg, &format!("search/{index}/{t}"))?;
        Ok(Verdict::new(report.pass, report.score(), (e, cloud, report)))
    })?;
    match outcome {
        SearchOutcome::Found(f) => {
            let (formula, cloud, mut report) = f.report;
            report.push(diagram_record(&measured, &tilde.claimed));
            let info = PieceInfo {
                tvector: Some(f.t),
                linear,
                claimed: tilde.claimed,
                measured,
                a1: tilde.a1,
                k,
                shortcut: false,
                evaluations: f.evaluations,
                report,
            };
            Ok(PieceRun { formula, cloud, degree: pert.d, info })
        }
        SearchOutcome::Exhausted(e) => {
            let best = e.best.as_ref().map(|(t, (_, _, rep))| {
                let failed: Vec<String> = rep.failures().iter().map(|r| format!("{}={}>{}", r.name, r.measured, r.bound)).collect();
                format!("best t = {t}: {}", failed.join(", "))
            });
            let mut err = e.into_error();
            if let (Error::Budget { detail, .. }, Some(b)) = (&mut err, best) {
                detail.push_str("; ");
                detail.push_str(&b);
            }
            Err(err)
        }
    }
}

fn finish(runs: Vec<PieceRun>, input: PointCloud, ell: usize, eps: f64, rho: &Rational, bx: SampleBox, cfg: &PipelineConfig) -> Result<ChoiceResult> {
    let n = input.n;
    let degree = runs.iter().map(|r| r.degree).max().unwrap_or(1);
    let claimed = Diagram::union(&runs.iter().map(|r| r.info.claimed).collect::<Vec<_>>()).expect("at least one piece");
    let formula = Formula::union(runs.iter().map(|r| r.formula.clone()).collect())?;
    let diagram = formula.diagram()?;
    let rows: Vec<Vec<i64>> = runs.iter().flat_map(|r| (0..r.cloud.len()).map(|i| r.cloud.index(i).to_vec()).collect::<Vec<_>>()).collect();
    let output = PointCloud::from_indices(n, cfg.grid.clone(), bx.center.clone(), rows, formula_digest(&formula));
    let proj = projection_coords(n, ell);
    let projection = output.project(&proj);

    let a = output.to_points();
    let sp = input.to_points();
    let tol = cfg.distance_tolerance();
    let mut metrics = Report::new(vec![]);
    if runs.len() == 1 {
        metrics.extend(runs[0].info.report.clone());
    } else {
        for (i, r) in runs.iter().enumerate() {
            for rec in &r.info.report.records {
                let mut rec = rec.clone();
                rec.name = format!("piece{i}/{}", rec.name);
                metrics.push(rec);
            }
        }
        metrics.push(dimension_record(&a, ell, cfg.dim_tolerance));
        metrics.push(containment_record("containment", &a, &sp, eps, tol));
        metrics.push(hausdorff_record("projection", &projection.to_points(), &sp.project(&proj), eps, tol));
        metrics.push(diagram_record(&diagram, &claimed));
    }
    metrics.push(thom_milnor_record("thom_milnor", &a, &diagram, &cfg.thom_milnor)?);
    metrics.note("formula", formula_digest(&formula));
    metrics.note("seed", cfg.seed);
    metrics.note("grid", &cfg.grid);
    for (i, r) in runs.iter().enumerate() {
        if let Some(t) = &r.info.tvector {
            metrics.note(&format!("tvector{i}"), t);
        }
    }
    Ok(ChoiceResult {
        formula,
        ell,
        eps,
        rho: rho.clone(),
        degree,
        diagram,
        claimed,
        pieces: runs.into_iter().map(|r| r.info).collect(),
        sample_box: bx,
        input,
        output,
        projection,
        metrics,
        map: None,
    })
}

/// Choice for a closed basic set inside the ball of radius `rho`.
pub fn approximate_choice_basic(s: &BasicClosedSet, ell: usize, eps: f64, rho: &Rational, cfg: &PipelineConfig) -> Result<ChoiceResult> {
    let bx = default_box(s.ctx.n, rho)?;
    choice_basic_in(s, ell, eps, rho, bx, cfg)
}

pub(crate) fn choice_basic_in(s: &BasicClosedSet, ell: usize, eps: f64, rho: &Rational, bx: SampleBox, cfg: &PipelineConfig) -> Result<ChoiceResult> {
    validate(s.ctx.n, ell, eps, rho)?;
    if s.ctx.m != 0 {
        return Err(Error::Context("the input set must be defined over Q".into()));
    }
    let input = sample_cloud(&s.to_formula(), &bx, &cfg.grid)?;
    if input.is_empty() {
        return Err(Error::Invalid("the input set has no sample points at this grid".into()));
    }
    let run = choose_piece(s, &input, ell, eps, rho, &bx, cfg, 0)?;
    finish(vec![run], input, ell, eps, rho, bx, cfg)
}

/// Choice for a closed bounded set given by any formula. Closed basic input is
/// handled directly; otherwise the set is first replaced by a union of closed
/// basic pieces within `eps/2` and each piece gets a choice at `eps/2`.
pub fn approximate_choice(s: &Formula, ell: usize, eps: f64, rho: &Rational, cfg: &PipelineConfig) -> Result<ChoiceResult> {
    let bx = default_box(s.ctx().n, rho)?;
    choice_in(s, ell, eps, rho, bx, cfg)
}

pub(crate) fn choice_in(s: &Formula, ell: usize, eps: f64, rho: &Rational, bx: SampleBox, cfg: &PipelineConfig) -> Result<ChoiceResult> {
    validate(s.ctx().n, ell, eps, rho)?;
    if let Some(b) = as_basic_closed(s) {
        return choice_basic_in(&b, ell, eps, rho, bx, cfg);
    }
    let closed = approx_closed_basic(s, eps / 2.0, &bx, cfg)?;
    if closed.source_cloud.is_empty() {
        return Err(Error::Invalid("the input set has no sample points at this grid".into()));
    }
    let mut runs = Vec::new();
    for (i, piece) in closed.pieces.iter().enumerate() {
        let pc = sample_cloud(&piece.to_formula(), &bx, &cfg.grid)?;
        // pieces invisible at this grid contribute nothing to the distances
        if pc.is_empty() {
            continue;
        }
        runs.push(choose_piece(piece, &pc, ell, eps / 2.0, rho, &bx, cfg, i)?);
    }
    if runs.is_empty() {
        return Err(Error::Invalid("no closed basic piece has sample points at this grid".into()));
    }
    finish(runs, closed.source_cloud, ell, eps, rho, bx, cfg)
}
