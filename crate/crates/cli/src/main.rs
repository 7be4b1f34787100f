mod spec;
mod store;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use defchoice::choice::{approx_closed_basic, approximate_choice, choice_for_map, default_box, map_info};
use defchoice::evalhaus::{sample_cloud, SampleBox};
use defchoice::exact::rational::{fmt_rational, parse_rational};
use defchoice::formula::{formula_to_json, graph_formula};
use defchoice::verify::{hausdorff_record, verify_choice, Record, Report};
use defchoice::Error;
use serde_json::json;

use spec::{Overrides, Problem};
use store::{log_line, save_choice, Bundle, CSV_DIGITS};

/// Grids whose lattice would exceed this many points are refused.
const MAX_LATTICE: f64 = 1e8;

#[derive(Parser)]
#[command(name = "defchoice", version, about = "Approximate definable choices for bounded closed semialgebraic sets")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone, Default)]
struct Flags {
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    ell: Option<usize>,
    /// Radius of the ball containing the set (rational, e.g. 2 or 5/2).
    #[arg(long)]
    rho: Option<String>,
    /// Sampling grid step (rational, e.g. 1/128).
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    eta: Option<String>,
    #[arg(long = "bigK")]
    big_k: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "tolerance-scale")]
    tolerance_scale: Option<f64>,
}

impl Flags {
    fn overrides(&self) -> Overrides {
        Overrides {
            epsilon: self.epsilon,
            ell: self.ell,
            rho: self.rho.clone(),
            grid: self.grid.clone(),
            eta: self.eta.clone(),
            big_k: self.big_k,
            seed: self.seed,
            tolerance_scale: self.tolerance_scale,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample the set on the grid and write a cloud CSV (stdout without --out).
    Sample {
        spec: PathBuf,
        /// Half-width of the sampling cube; defaults to 5/4 rho.
        #[arg(long = "box")]
        half_width: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        flags: Flags,
    },
    /// Closed basic approximation of the set.
    ApproxClosed {
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Approximate choice for the projection onto the last ell coordinates.
    Choose {
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Approximate choice for the polynomial map given in the problem.
    ChooseMap {
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Re-check a result directory with fresh samples.
    Verify {
        dir: PathBuf,
        /// Problem file; defaults to the copy stored in the directory.
        spec: Option<PathBuf>,
        /// Report file; defaults to verify.json in the directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        flags: Flags,
    },
}

enum Outcome {
    Pass,
    Fail,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Budget { .. } => 3,
        _ => 2,
    }
}

fn check_grid(bx: &SampleBox, p: &Problem) -> defchoice::Result<()> {
    let size = bx.lattice_size(&p.config.grid)?;
    if size > MAX_LATTICE {
        return Err(Error::Invalid(format!("grid {} gives {size:.3e} lattice points, above the limit of {MAX_LATTICE:e}", fmt_rational(&p.config.grid))));
    }
    Ok(())
}

fn print_report(r: &Report) {
    println!("{r}");
    for f in r.failures() {
        println!("violated: {} (measured {}, bound {})", f.name, f.measured, f.bound);
    }
}

fn outcome(pass: bool) -> Outcome {
    if pass {
        Outcome::Pass
    } else {
        Outcome::Fail
    }
}

fn cmd_sample(spec: &Path, half_width: Option<&str>, out: Option<&Path>, flags: &Flags) -> defchoice::Result<Outcome> {
    let p = spec::load(spec, &flags.overrides())?;
    let n = p.set.ctx().n;
    let bx = match half_width {
        Some(w) => SampleBox::cube(n, &parse_rational(w)?)?,
        None => default_box(n, p.need_rho()?)?,
    };
    check_grid(&bx, &p)?;
    let cloud = sample_cloud(&p.set, &bx, &p.config.grid)?;
    let csv = cloud.to_csv(CSV_DIGITS);
    match out {
        Some(path) => {
            store::write_atomic(path, csv.as_bytes())?;
            println!("points: {}, h: {}", cloud.len(), fmt_rational(&cloud.h));
        }
        None => {
            print!("{csv}");
            eprintln!("points: {}, h: {}", cloud.len(), fmt_rational(&cloud.h));
        }
    }
    Ok(Outcome::Pass)
}

fn cmd_approx_closed(spec: &Path, out: &Path, flags: &Flags) -> defchoice::Result<Outcome> {
    let p = spec::load(spec, &flags.overrides())?;
    let eps = p.need_epsilon()?;
    let bx = default_box(p.set.ctx().n, p.need_rho()?)?;
    check_grid(&bx, &p)?;
    let a = approx_closed_basic(&p.set, eps, &bx, &p.config)?;
    let tol = p.config.distance_tolerance();
    let mut report = Report::new(vec![
        hausdorff_record("closed_hausdorff", &a.cloud.to_points(), &a.source_cloud.to_points(), eps, tol),
        Record::flag("degree", a.formula.x_degree(), p.set.x_degree(), a.formula.x_degree() <= p.set.x_degree()),
    ]);
    report.note("r", fmt_rational(&a.r));
    report.note("pieces", a.pieces.len());
    let mut b = Bundle::new();
    b.add_json("spec.json", &p.spec)?;
    b.add_json("formula.json", &formula_to_json(&a.formula))?;
    b.add("formula.txt", format!("{}\n", a.formula));
    b.add("input.csv", a.source_cloud.to_csv(CSV_DIGITS));
    b.add("output.csv", a.cloud.to_csv(CSV_DIGITS));
    b.add_json("report.json", &report)?;
    b.write(out)?;
    print_report(&report);
    Ok(outcome(report.pass))
}

fn cmd_choose(spec: &Path, out: &Path, flags: &Flags) -> defchoice::Result<Outcome> {
    let p = spec::load(spec, &flags.overrides())?;
    if p.map.is_some() {
        return Err(Error::Invalid("the problem has a map; use choose-map".into()));
    }
    let (ell, eps, rho) = (p.need_ell()?, p.need_epsilon()?, p.need_rho()?);
    check_grid(&default_box(p.set.ctx().n, rho)?, &p)?;
    let r = approximate_choice(&p.set, ell, eps, rho, &p.config)?;
    save_choice(out, &r, &serde_json::to_value(&p.spec)?)?;
    println!("diagram {} (claimed {}), {} points", r.diagram, r.claimed, r.output.len());
    print_report(&r.metrics);
    Ok(outcome(r.metrics.pass))
}

fn cmd_choose_map(spec: &Path, out: &Path, flags: &Flags) -> defchoice::Result<Outcome> {
    let p = spec::load(spec, &flags.overrides())?;
    let f = p.map.as_ref().ok_or_else(|| Error::Invalid("the problem has no map".into()))?;
    let eps = p.need_epsilon()?;
    let r = choice_for_map(&p.set, f, eps, p.need_rho()?, &p.config)?;
    save_choice(out, &r, &serde_json::to_value(&p.spec)?)?;
    if let Some(m) = &r.map {
        println!("L = 2 + Lip = {:.6}", m.big_l);
    }
    println!("diagram {} (claimed {}), {} points", r.diagram, r.claimed, r.output.len());
    print_report(&r.metrics);
    Ok(outcome(r.metrics.pass))
}

fn cmd_verify(dir: &Path, spec: Option<&Path>, out: Option<&Path>, flags: &Flags) -> defchoice::Result<Outcome> {
    let spec_path = spec.map(Path::to_path_buf).unwrap_or_else(|| dir.join("spec.json"));
    let p = spec::load(&spec_path, &flags.overrides())?;
    let (mut r, stored) = store::load_choice(dir)?;
    let s = match (&p.map, &stored.map) {
        (Some(f), Some(_)) => {
            r.map = Some(map_info(&r, f, &p.set, &p.config, p.need_rho()?)?);
            graph_formula(&p.set, f)?
        }
        (None, None) => p.set.clone(),
        _ => return Err(Error::Invalid("the problem and the result disagree on whether a map is present".into())),
    };
    let eps = p.epsilon.unwrap_or(stored.epsilon);
    let report = verify_choice(&r, &s, eps, &p.config)?;
    let path = out.map(Path::to_path_buf).unwrap_or_else(|| dir.join("verify.json"));
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    store::write_atomic(&path, text.as_bytes())?;
    print_report(&report);
    Ok(outcome(report.pass))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let (name, log_dir, result) = match &cli.cmd {
        Cmd::Sample { spec, half_width, out, flags } => ("sample", None, cmd_sample(spec, half_width.as_deref(), out.as_deref(), flags)),
        Cmd::ApproxClosed { spec, out, flags } => ("approx-closed", Some(out.clone()), cmd_approx_closed(spec, out, flags)),
        Cmd::Choose { spec, out, flags } => ("choose", Some(out.clone()), cmd_choose(spec, out, flags)),
        Cmd::ChooseMap { spec, out, flags } => ("choose-map", Some(out.clone()), cmd_choose_map(spec, out, flags)),
        Cmd::Verify { dir, spec, out, flags } => ("verify", Some(dir.clone()), cmd_verify(dir, spec.as_deref(), out.as_deref(), flags)),
    };
    let (code, status) = match &result {
        Ok(Outcome::Pass) => (0, "pass".to_string()),
        Ok(Outcome::Fail) => (1, "fail".to_string()),
        Err(e) => {
            eprintln!("error: {e}");
            (exit_code(e), format!("error: {e}"))
        }
    };
    if let Some(dir) = log_dir.filter(|d| d.is_dir()) {
        let args: Vec<String> = std::env::args().collect();
        let line = json!({ "command": name, "args": args, "status": status, "seconds": started.elapsed().as_secs_f64() });
        if let Err(e) = log_line(&dir, &line.to_string()) {
            eprintln!("warning: run.log: {e}");
        }
    }
    ExitCode::from(code)
}
