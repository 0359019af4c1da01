//! Search of the perturbed-sphere family for surfaces with constant
//! `K^eta` that are not round, by multi-start Nelder-Mead on the
//! area-weighted variance of `K^eta`.

use std::io::Write;
use std::sync::Mutex;

use argmin::core::{CostFunction, Error as ArgminError, Executor, State};
use argmin::solver::neldermead::NelderMead;
use nalgebra::Matrix3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::perturbed_sphere;
use crate::harmonics::{index_range, real_sh, HarmonicSpec, MAX_DEGREE};
use crate::quadrature::{sphere_nodes, SphereGrid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub l_max: u32,
    /// Coefficients are confined to `|a| <= amplitude_box`.
    pub amplitude_box: f64,
    pub n_theta: usize,
    pub n_phi: usize,
    pub max_iter: u64,
    pub starts: usize,
    /// Include the round sphere (all zeros) as the first start.
    pub include_origin: bool,
    /// Edge length of the initial simplex.
    pub initial_step: f64,
    pub variance_tol: f64,
    pub umbilic_tol: f64,
    pub candidate_gap: f64,
    pub barrier_weight: f64,
    pub barrier_floor: f64,
    pub freeze_degree0: bool,
    pub freeze_degree1: bool,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            l_max: 3,
            amplitude_box: 0.15,
            n_theta: 16,
            n_phi: 32,
            max_iter: 200,
            starts: 4,
            include_origin: false,
            initial_step: 0.02,
            variance_tol: 1e-8,
            umbilic_tol: 1e-5,
            candidate_gap: 1e-3,
            barrier_weight: 1e3,
            barrier_floor: 0.02,
            freeze_degree0: true,
            freeze_degree1: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid search config: {0}")]
pub struct ConfigError(pub String);

impl SearchConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("amplitude_box", self.amplitude_box),
            ("initial_step", self.initial_step),
            ("variance_tol", self.variance_tol),
            ("umbilic_tol", self.umbilic_tol),
            ("candidate_gap", self.candidate_gap),
            ("barrier_weight", self.barrier_weight),
            ("barrier_floor", self.barrier_floor),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ConfigError(format!("{name} must be positive, got {v}")));
            }
        }
        if self.l_max == 0 || self.l_max > MAX_DEGREE {
            return Err(ConfigError(format!("l_max must be in 1..={MAX_DEGREE}")));
        }
        if self.n_theta < 2 || self.n_phi < 4 {
            return Err(ConfigError("grid too small".into()));
        }
        if self.starts == 0 && !self.include_origin {
            return Err(ConfigError("no starting points".into()));
        }
        if self.variables().is_empty() {
            return Err(ConfigError("every degree is frozen".into()));
        }
        Ok(())
    }

    /// Free `(l, m)` pairs in optimizer order.
    pub fn variables(&self) -> Vec<(u32, i32)> {
        index_range(0, self.l_max)
            .into_iter()
            .filter(|&(l, _)| !(l == 0 && self.freeze_degree0) && !(l == 1 && self.freeze_degree1))
            .collect()
    }

    pub fn spec_from(&self, x: &[f64]) -> HarmonicSpec {
        HarmonicSpec::new(self.variables().into_iter().zip(x).map(|((l, m), a)| (l, m, *a)))
    }
}

/// One objective evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub objective: f64,
    pub variance: f64,
    pub mean_k_eta: f64,
    /// `sup |K^eta - mean|`
    pub sup_deviation: f64,
    /// `sup (K^2 - 4 d)`
    pub sup_gap_low: f64,
    pub min_dkr: f64,
    pub barrier_active: bool,
}

impl Evaluation {
    fn rejected(weight: f64) -> Self {
        Self {
            objective: 2.0 * weight,
            variance: f64::NAN,
            mean_k_eta: f64::NAN,
            sup_deviation: f64::NAN,
            sup_gap_low: f64::NAN,
            min_dkr: f64::NAN,
            barrier_active: true,
        }
    }
}

/// Variance of `K^eta` over the grid in the induced area measure, plus a
/// barrier keeping `min d` above `barrier_floor`. When the barrier is
/// active the objective is at least `barrier_weight`; surfaces where the
/// pipeline fails outright (degenerate or non-Riemannian `II_eta`) score
/// `2 barrier_weight`.
pub fn keta_variance(spec: &HarmonicSpec, n_theta: usize, n_phi: usize, barrier_weight: f64, barrier_floor: f64) -> Evaluation {
    let grid = match perturbed_sphere(spec, 1.0).and_then(|p| SphereGrid::build(&p, n_theta, n_phi, true)) {
        Ok(g) => g,
        Err(_) => return Evaluation::rejected(barrier_weight),
    };
    let area = grid.area();
    let mut mean = 0.0;
    let mut min_dkr = f64::INFINITY;
    let mut sup_gap: f64 = 0.0;
    for n in &grid.nodes {
        mean += n.geometry.k_eta.unwrap_or(f64::NAN) * n.area_weight();
        min_dkr = min_dkr.min(n.geometry.dkr);
        sup_gap = sup_gap.max(n.geometry.gap_low);
    }
    mean /= area;
    let mut variance = 0.0;
    let mut sup_dev: f64 = 0.0;
    for n in &grid.nodes {
        let d = n.geometry.k_eta.unwrap_or(f64::NAN) - mean;
        variance += d * d * n.area_weight();
        sup_dev = sup_dev.max(d.abs());
    }
    variance /= area;
    let barrier_active = min_dkr < barrier_floor;
    let penalty = if barrier_active {
        barrier_weight * (1.0 + (barrier_floor - min_dkr).powi(2))
    } else {
        0.0
    };
    let objective = if variance.is_finite() { variance + penalty } else { 2.0 * barrier_weight };
    Evaluation {
        objective,
        variance,
        mean_k_eta: mean,
        sup_deviation: sup_dev,
        sup_gap_low: sup_gap,
        min_dkr,
        barrier_active,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceRow {
    pub start: usize,
    pub eval: usize,
    pub coefficients: Vec<f64>,
    pub evaluation: Evaluation,
}

struct Problem<'a> {
    config: &'a SearchConfig,
    trace: Mutex<Vec<(Vec<f64>, Evaluation)>>,
}

impl Problem<'_> {
    fn evaluate(&self, x: &[f64]) -> Evaluation {
        let c = self.config;
        let excess: f64 = x.iter().map(|a| (a.abs() - c.amplitude_box).max(0.0).powi(2)).sum();
        let mut e = if excess > 0.0 {
            Evaluation::rejected(c.barrier_weight)
        } else {
            keta_variance(&c.spec_from(x), c.n_theta, c.n_phi, c.barrier_weight, c.barrier_floor)
        };
        e.objective += c.barrier_weight * excess;
        e
    }
}

impl CostFunction for Problem<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, x: &Self::Param) -> Result<f64, ArgminError> {
        let e = self.evaluate(x);
        let value = e.objective;
        self.trace.lock().expect("trace lock").push((x.clone(), e));
        Ok(value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    /// `sup gap_low < umbilic_tol`
    Umbilical,
    /// Constant `K^eta` within tolerance but clearly not umbilical, and
    /// still so on the doubled grid.
    Candidate,
    /// Looked like a candidate on the search grid, not on the doubled one.
    Demoted,
    /// `Var(K^eta) >= variance_tol`.
    NotConverged,
    /// Converged with `umbilic_tol <= sup gap_low < candidate_gap`.
    Inconclusive,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StartResult {
    pub start: usize,
    pub initial: Vec<f64>,
    pub coefficients: HarmonicSpec,
    pub iterations: u64,
    pub evaluations: usize,
    pub evaluation: Evaluation,
    pub classification: Classification,
    /// Re-evaluation on the doubled grid, for candidates.
    pub verification: Option<Evaluation>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchReport {
    pub config: SearchConfig,
    pub seed: u64,
    pub best_coefficients: HarmonicSpec,
    pub final_variance: f64,
    pub sup_deviation: f64,
    pub sup_gap_low: f64,
    pub min_dkr: f64,
    pub mean_k_eta: f64,
    pub starts: Vec<StartResult>,
    /// Every converged minimizer is umbilical.
    pub all_converged_umbilical: bool,
    pub candidates: usize,
    /// Trace rows with `Var < variance_tol` whose mean `K^eta` is below
    /// `2 - 1e-3`.
    pub floor_violations: usize,
    /// Converged umbilical minimizers with `|mean K^eta - 2| >= 10 variance_tol`.
    pub consistency_violations: usize,
    #[serde(skip)]
    pub trace: Vec<TraceRow>,
}

fn classify(config: &SearchConfig, e: &Evaluation) -> Classification {
    if !(e.variance < config.variance_tol) || e.barrier_active {
        Classification::NotConverged
    } else if e.sup_gap_low < config.umbilic_tol {
        Classification::Umbilical
    } else if e.sup_gap_low >= config.candidate_gap {
        Classification::Candidate
    } else {
        Classification::Inconclusive
    }
}

fn initial_points(config: &SearchConfig) -> Vec<Vec<f64>> {
    let dim = config.variables().len();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut out = Vec::new();
    if config.include_origin {
        out.push(vec![0.0; dim]);
    }
    for _ in 0..config.starts {
        out.push((0..dim).map(|_| rng.gen_range(-config.amplitude_box..=config.amplitude_box)).collect());
    }
    out
}

fn run_start(config: &SearchConfig, index: usize, x0: Vec<f64>) -> (StartResult, Vec<TraceRow>) {
    let dim = x0.len();
    let mut simplex = vec![x0.clone()];
    for i in 0..dim {
        let mut v = x0.clone();
        // Step toward the interior so the simplex stays in the box.
        v[i] += if v[i] > 0.0 { -config.initial_step } else { config.initial_step };
        simplex.push(v);
    }
    let problem = Problem {
        config,
        trace: Mutex::new(Vec::new()),
    };
    let solver = NelderMead::new(simplex)
        .with_sd_tolerance(config.variance_tol * 1e-4)
        .expect("positive tolerance");
    let outcome = Executor::new(problem, solver)
        .configure(|s| s.max_iters(config.max_iter))
        .timer(false)
        .run();
    let (best, iterations, problem) = match outcome {
        Ok(res) => {
            let iterations = res.state().get_iter();
            let best = res.state().get_best_param().cloned().unwrap_or_else(|| x0.clone());
            (best, iterations, res.problem.problem.expect("problem returned"))
        }
        Err(_) => unreachable!("the objective never fails"),
    };
    let evaluation = problem.evaluate(&best);
    let mut classification = classify(config, &evaluation);
    let mut verification = None;
    let mut note = None;
    if classification == Classification::Candidate {
        let e = keta_variance(
            &config.spec_from(&best),
            2 * config.n_theta,
            2 * config.n_phi,
            config.barrier_weight,
            config.barrier_floor,
        );
        match classify(config, &e) {
            Classification::Candidate => note = Some("survived grid doubling".into()),
            other => {
                note = Some(format!("demoted: doubled grid classifies as {other:?}"));
                classification = Classification::Demoted;
            }
        }
        verification = Some(e);
    }
    let trace = problem
        .trace
        .into_inner()
        .expect("trace lock")
        .into_iter()
        .enumerate()
        .map(|(eval, (coefficients, evaluation))| TraceRow {
            start: index,
            eval,
            coefficients,
            evaluation,
        })
        .collect::<Vec<_>>();
    let result = StartResult {
        start: index,
        initial: x0,
        coefficients: config.spec_from(&best),
        iterations,
        evaluations: trace.len(),
        evaluation,
        classification,
        verification,
        note,
    };
    (result, trace)
}

/// Multi-start search; starts run concurrently, results and trace are in
/// start order, so the output is a pure function of the config.
pub fn search(config: &SearchConfig) -> Result<SearchReport, ConfigError> {
    config.validate()?;
    let runs: Vec<(StartResult, Vec<TraceRow>)> = initial_points(config)
        .into_par_iter()
        .enumerate()
        .map(|(i, x0)| run_start(config, i, x0))
        .collect();
    let (starts, traces): (Vec<_>, Vec<_>) = runs.into_iter().unzip();
    let trace: Vec<TraceRow> = traces.into_iter().flatten().collect();
    let best = starts
        .iter()
        .min_by(|a, b| a.evaluation.objective.total_cmp(&b.evaluation.objective))
        .expect("at least one start");
    let converged = |s: &&StartResult| s.evaluation.variance < config.variance_tol && !s.evaluation.barrier_active;
    let floor_violations = trace
        .iter()
        .filter(|t| t.evaluation.variance < config.variance_tol && !t.evaluation.barrier_active)
        .filter(|t| t.evaluation.mean_k_eta < 2.0 - 1e-3)
        .count();
    let consistency_violations = starts
        .iter()
        .filter(converged)
        .filter(|s| s.evaluation.sup_gap_low < config.variance_tol)
        .filter(|s| (s.evaluation.mean_k_eta - 2.0).abs() >= 10.0 * config.variance_tol)
        .count();
    Ok(SearchReport {
        seed: config.seed,
        best_coefficients: best.coefficients.clone(),
        final_variance: best.evaluation.variance,
        sup_deviation: best.evaluation.sup_deviation,
        sup_gap_low: best.evaluation.sup_gap_low,
        min_dkr: best.evaluation.min_dkr,
        mean_k_eta: best.evaluation.mean_k_eta,
        all_converged_umbilical: starts
            .iter()
            .filter(converged)
            .all(|s| s.classification == Classification::Umbilical),
        candidates: starts.iter().filter(|s| s.classification == Classification::Candidate).count(),
        floor_violations,
        consistency_violations,
        starts,
        trace,
        config: config.clone(),
    })
}

pub const TRACE_HEADER: &str = "start,eval,objective,variance,mean_k_eta,sup_deviation,sup_gap_low,min_dkr,barrier,coefficients";

pub fn write_trace_csv<W: Write>(trace: &[TraceRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    for row in trace {
        let e = &row.evaluation;
        let coeffs: Vec<String> = row.coefficients.iter().map(|a| format!("{a:.17e}")).collect();
        writeln!(
            out,
            "{},{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{},{}",
            row.start,
            row.eval,
            e.objective,
            e.variance,
            e.mean_k_eta,
            e.sup_deviation,
            e.sup_gap_low,
            e.min_dkr,
            u8::from(e.barrier_active),
            coeffs.join(";")
        )?;
    }
    Ok(())
}

/// Coefficients of `sigma(R^T omega)`, by exact quadrature projection onto
/// the real harmonics (rotations preserve each degree).
pub fn rotate_spec(spec: &HarmonicSpec, rotation: &Matrix3<f64>) -> HarmonicSpec {
    let l_max = spec.terms.iter().map(|t| t.l).max().unwrap_or(0);
    let n = (l_max as usize + 2).max(4);
    let nodes = sphere_nodes(n, 2 * n + 2);
    let mut terms = Vec::new();
    for (l, m) in index_range(0, l_max) {
        let mut a = 0.0;
        for &(theta, phi, w) in &nodes {
            let om = nalgebra::Vector3::from(crate::catalog::omega(theta, phi));
            let pulled = rotation.transpose() * om;
            let y = real_sh::<f64>(l, m, om.x, om.y, om.z).expect("degree in range");
            a += w * theta.sin() * y * spec.eval(pulled.x, pulled.y, pulled.z);
        }
        if a.abs() > 1e-15 {
            terms.push((l, m, a));
        }
    }
    HarmonicSpec::new(terms)
}
