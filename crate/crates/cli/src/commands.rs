use std::f64::consts::PI;
use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use lightcone_core::catalog::random_spec;
use lightcone_core::global::{global_report, write_nodes_csv, GlobalReport};
use lightcone_core::quadrature::SphereGrid;
use lightcone_core::search::{search as run_search, write_trace_csv, SearchConfig};
use lightcone_core::transform::ScalarField;
use lightcone_core::verify::{sample_points, verify_surface, Check, Status, Tolerances};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::manifest::{write_json, RunManifest};
use crate::surface::{read_json, Grid, SurfaceArgs, SurfaceEcho};
use crate::Failure;

fn tolerance_help() -> String {
    let mut text = String::from("Tolerances (--tol NAME=VALUE):\n");
    for (name, value) in &Tolerances::default().0 {
        text.push_str(&format!("  {name:<18} {value:e}\n"));
    }
    text
}

#[derive(Debug, Args)]
#[command(after_help = tolerance_help())]
pub struct VerifyArgs {
    #[command(flatten)]
    surface: SurfaceArgs,
    /// Number of random sample points
    #[arg(long, default_value_t = 200)]
    points: usize,
    /// Seed for the sample points and the expansion factor
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Override a named tolerance (repeatable)
    #[arg(long = "tol", value_name = "NAME=VALUE")]
    tol: Vec<String>,
    /// Write the run manifest here
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(after_help = tolerance_help())]
pub struct GlobalArgs {
    #[command(flatten)]
    surface: SurfaceArgs,
    /// Quadrature grid, NTHETAxNPHI
    #[arg(long, default_value = "64x128")]
    grid: Grid,
    /// Skip the eigenvalue estimate
    #[arg(long)]
    no_lambda1: bool,
    /// Override a named tolerance (repeatable)
    #[arg(long = "tol", value_name = "NAME=VALUE")]
    tol: Vec<String>,
    /// Write the run manifest (with the full report) here
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// JSON search configuration; omitted keys take their defaults
    config: PathBuf,
    /// Override the configured seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the configured objective grid
    #[arg(long)]
    grid: Option<Grid>,
    /// Search report (JSON)
    #[arg(long, value_name = "FILE", default_value = "search-report.json")]
    out: PathBuf,
    /// Optimisation trace (CSV)
    #[arg(long, value_name = "FILE", default_value = "search-trace.csv")]
    trace: PathBuf,
    /// Run manifest (JSON)
    #[arg(long, value_name = "FILE")]
    manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[command(flatten)]
    surface: SurfaceArgs,
    /// Quadrature grid, NTHETAxNPHI
    #[arg(long, default_value = "64x128")]
    grid: Grid,
    /// Destination CSV
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

fn tolerances(overrides: &[String]) -> Result<Tolerances, Failure> {
    let mut tol = Tolerances::default();
    for item in overrides {
        let (name, value) = item
            .split_once('=')
            .ok_or_else(|| Failure::Config(format!("--tol expects NAME=VALUE, got `{item}`")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Failure::Config(format!("--tol {name}: `{value}` is not a number")))?;
        tol.set(name.trim(), value).map_err(|e| Failure::Config(e.to_string()))?;
    }
    Ok(tol)
}

fn finish(manifest: RunManifest, out: Option<&PathBuf>) -> Result<(), Failure> {
    manifest.print_summary();
    if let Some(path) = out {
        write_json(path, &manifest)?;
    }
    manifest.outcome()
}

#[derive(Serialize)]
struct VerifyEcho<'a> {
    #[serde(flatten)]
    surface: &'a SurfaceEcho,
    points: usize,
    tolerances: &'a Tolerances,
}

pub fn verify(args: VerifyArgs) -> Result<(), Failure> {
    let started = Instant::now();
    let tol = tolerances(&args.tol)?;
    let selected = args.surface.build()?;
    let patch = &selected.patch;
    let points = sample_points(patch, args.points, args.seed);
    let sigma = if patch.is_compact() {
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
        ScalarField::from_spec(&random_spec(&mut rng, 3, 0.1))
    } else {
        ScalarField::analytic(|x, y| (x * 0.5).sin() * y.cos() * 0.2)
    };
    let report = verify_surface(patch, &points, &tol, Some(&sigma), selected.reference)
        .map_err(|e| Failure::Input(e.to_string()))?;
    println!("{}: {} points", report.surface, report.points);
    let echo = VerifyEcho {
        surface: &selected.echo,
        points: args.points,
        tolerances: &tol,
    };
    let manifest = RunManifest::new("verify", echo, args.seed, started).with_checks(report.checks);
    finish(manifest, args.out.as_ref())
}

fn measured(name: &str, residual: f64, tolerance: f64, holds: bool, detail: Option<String>) -> Check {
    Check {
        name: name.into(),
        status: if holds { Status::Pass } else { Status::Fail },
        residual: Some(residual),
        tolerance: Some(tolerance),
        detail,
    }
}

fn global_checks(report: &GlobalReport, tol: &Tolerances) -> Vec<Check> {
    let mut checks = Vec::new();
    let t = tol.get("gauss_bonnet");
    let m = report.margins.gauss_bonnet;
    checks.push(measured("gauss_bonnet", m, t, m <= t, Some(format!("int K dA = {:.12}", report.gauss_bonnet))));
    if let Some(v) = report.gauss_bonnet_ii {
        let t = tol.get("gauss_bonnet_ii");
        let m = (v - 4.0 * PI).abs();
        checks.push(measured("gauss_bonnet_ii", m, t, m <= t, Some(format!("int K^eta dA_II = {v:.12}"))));
    }
    if let Some(a) = &report.ii_eta_area {
        checks.push(measured(
            "ii_eta_area",
            (a.area - a.bound).max(0.0),
            tol.get("ii_area"),
            a.within_bound,
            Some(format!("area {:.12}, 2 pi - area = {:.3e}", a.area, a.deficit)),
        ));
    }
    if let Some(f) = &report.keta_floor {
        let residual = (4.0 - f.value).max(f.value - 2.0 * f.k_eta).max(0.0);
        checks.push(measured(
            "keta_floor",
            residual,
            tol.get("floor"),
            f.chain_holds && f.at_least_four,
            Some(format!("K^2/d = {:.9} at d-argmax", f.value)),
        ));
    }
    if let (Some(l), Some(rhs)) = (&report.lambda1, report.bound_rhs) {
        let excess = (l.lambda1 / rhs - 1.0).max(0.0);
        checks.push(measured(
            "eigen_bound",
            excess,
            report.slack,
            l.lambda1 <= (1.0 + report.slack) * rhs,
            Some(format!("lambda1 {:.6}, rhs {:.6}, refinement gap {:.2e}", l.lambda1, rhs, l.refinement_gap)),
        ));
    }
    if let Some(u) = &report.umbilic {
        checks.push(Check {
            name: "umbilic_point".into(),
            status: Status::Info,
            residual: Some(u.gap_low.max(u.gap_high)),
            tolerance: Some(1e-6),
            detail: Some(format!("theta {:.6}, phi {:.6}", u.theta, u.phi)),
        });
    }
    checks
}

#[derive(Serialize)]
struct GlobalEcho<'a> {
    #[serde(flatten)]
    surface: &'a SurfaceEcho,
    grid: String,
    lambda1: bool,
    tolerances: &'a Tolerances,
}

pub fn global(args: GlobalArgs) -> Result<(), Failure> {
    let started = Instant::now();
    let tol = tolerances(&args.tol)?;
    let selected = args.surface.build()?;
    let input = |e: lightcone_core::GeometryError| Failure::Input(e.to_string());
    let grid = SphereGrid::build(&selected.patch, args.grid.n_theta, args.grid.n_phi, true).map_err(input)?;
    if let Some(n) = grid.nodes.iter().find(|n| !(n.geometry.dkr > 0.0)) {
        return Err(Failure::Input(format!(
            "d = {:.3e} <= 0 at grid node ({:.6}, {:.6})",
            n.geometry.dkr, n.theta, n.phi
        )));
    }
    let report = global_report(&grid, !args.no_lambda1, &tol).map_err(input)?;
    println!("{}: grid {}, area {:.12}", report.surface, args.grid, report.area);
    let echo = GlobalEcho {
        surface: &selected.echo,
        grid: args.grid.to_string(),
        lambda1: !args.no_lambda1,
        tolerances: &tol,
    };
    let checks = global_checks(&report, &tol);
    let mut manifest = RunManifest::new("global", echo, 0, started).with_checks(checks);
    manifest.report = Some(serde_json::to_value(&report).expect("report serializes"));
    finish(manifest, args.out.as_ref())
}

pub fn search(args: SearchArgs) -> Result<(), Failure> {
    let started = Instant::now();
    let mut config: SearchConfig = read_json(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(g) = args.grid {
        config.n_theta = g.n_theta;
        config.n_phi = g.n_phi;
    }
    config.validate().map_err(|e| Failure::Config(e.to_string()))?;
    let report = run_search(&config).map_err(|e| Failure::Config(e.to_string()))?;

    let io = |p: &PathBuf, e: std::io::Error| Failure::Input(format!("{}: {e}", p.display()));
    let file = std::fs::File::create(&args.trace).map_err(|e| io(&args.trace, e))?;
    let mut w = std::io::BufWriter::new(file);
    write_trace_csv(&report.trace, &mut w)
        .and_then(|()| std::io::Write::flush(&mut w))
        .map_err(|e| io(&args.trace, e))?;
    write_json(&args.out, &report)?;

    println!(
        "seed {}: {} starts, best Var(K^eta) {:.3e}, mean K^eta {:.9}, all converged umbilical: {}, candidates: {}",
        report.seed,
        report.starts.len(),
        report.final_variance,
        report.mean_k_eta,
        report.all_converged_umbilical,
        report.candidates
    );
    let mut manifest = RunManifest::new("search", &config, config.seed, started);
    manifest.report = Some(serde_json::to_value(&report).expect("report serializes"));
    if let Some(path) = &args.manifest {
        write_json(path, &manifest)?;
    }
    Ok(())
}

pub fn export(args: ExportArgs) -> Result<(), Failure> {
    let selected = args.surface.build()?;
    let input = |e: lightcone_core::GeometryError| Failure::Input(e.to_string());
    let (nt, np) = (args.grid.n_theta, args.grid.n_phi);
    // K^eta only where it is defined on the whole grid.
    let grid = match SphereGrid::build(&selected.patch, nt, np, true) {
        Ok(grid) => grid,
        Err(_) => SphereGrid::build(&selected.patch, nt, np, false).map_err(input)?,
    };
    let io = |e: std::io::Error| Failure::Input(format!("{}: {e}", args.out.display()));
    let file = std::fs::File::create(&args.out).map_err(io)?;
    let mut w = std::io::BufWriter::new(file);
    write_nodes_csv(&grid, &mut w)
        .and_then(|()| std::io::Write::flush(&mut w))
        .map_err(io)?;
    println!("wrote {} rows to {}", grid.nodes.len(), args.out.display());
    Ok(())
}
