//! Benchmarking: progress measures, accuracy cut-offs, data profiles and
//! suite execution.

pub mod output;
pub mod suite;

use serde::{Deserialize, Serialize};

use crate::error::{DfolsError, Result};
use crate::problems::{noise_std_of_residuals, LeastSquaresProblem, NoiseModel};
use crate::solver::{CauchyStats, ExitFlag};

pub use suite::{run_suite, SuiteConfig};

/// Upper limit on the per-problem accuracy level.
pub const TAU_MAX: f64 = 0.1;
/// Monte-Carlo samples used to estimate the noise at the solution.
pub const NOISE_STD_SAMPLES: usize = 100_000;

/// One evaluation seen by the solver. Only evaluations that lower the best
/// true or the best observed value so far are kept; first-crossing measures
/// are unaffected by the others.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub eval_index: usize,
    pub f_true: f64,
    pub f_noisy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub problem: String,
    pub problem_id: u32,
    pub n: usize,
    pub m: usize,
    pub noise: NoiseModel,
    pub seed: u64,
    pub f0_true: f64,
    pub f_star: f64,
    pub trace: Vec<TracePoint>,
    pub n_evals: usize,
    pub exit_flag: Option<ExitFlag>,
    pub error: Option<String>,
    pub cauchy: CauchyStats,
    pub n_restarts: usize,
}

/// Builds a record's trace, keeping only evaluations that lower a running
/// minimum.
#[derive(Debug, Clone)]
pub(crate) struct TraceBuilder {
    pub record: RunRecord,
    best_true: f64,
    best_noisy: f64,
}

impl TraceBuilder {
    pub fn new(record: RunRecord) -> Self {
        TraceBuilder { record, best_true: f64::INFINITY, best_noisy: f64::INFINITY }
    }

    pub fn push(&mut self, point: TracePoint) {
        if point.f_true < self.best_true || point.f_noisy < self.best_noisy || self.record.trace.is_empty() {
            self.best_true = self.best_true.min(point.f_true);
            self.best_noisy = self.best_noisy.min(point.f_noisy);
            self.record.trace.push(point);
        }
    }
}

/// `f* + tau (f0 - f*)`.
pub fn true_threshold(record: &RunRecord, tau: f64) -> f64 {
    record.f_star + tau * (record.f0_true - record.f_star)
}

/// `E[f~(x*)] + tau (E[f~(x0)] - E[f~(x*)])`.
pub fn noisy_threshold(record: &RunRecord, tau: f64) -> f64 {
    let e_star = record.noise.expected_objective(record.f_star, record.m);
    let e_0 = record.noise.expected_objective(record.f0_true, record.m);
    e_star + tau * (e_0 - e_star)
}

/// Evaluations needed to reach the true-objective threshold (`None` if never).
pub fn measure_true(record: &RunRecord, tau_p: f64) -> Option<usize> {
    let thresh = true_threshold(record, tau_p);
    record.trace.iter().find(|p| p.f_true <= thresh).map(|p| p.eval_index)
}

/// Evaluations needed for the observed objective to reach the
/// expectation-based threshold (`None` if never).
pub fn measure_noisy(record: &RunRecord, tau_p: f64) -> Option<usize> {
    let thresh = noisy_threshold(record, tau_p);
    record.trace.iter().find(|p| p.f_noisy <= thresh).map(|p| p.eval_index)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    True,
    Noisy,
}

impl Measure {
    pub fn as_str(&self) -> &'static str {
        match self {
            Measure::True => "true",
            Measure::Noisy => "noisy",
        }
    }

    pub fn evaluate(&self, record: &RunRecord, tau_p: f64) -> Option<usize> {
        match self {
            Measure::True => measure_true(record, tau_p),
            Measure::Noisy => measure_noisy(record, tau_p),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TauMode {
    /// The same `tau` for every problem.
    Fixed,
    /// `tau_p = min(TAU_MAX, max(tau_crit(p), tau))`.
    Adaptive,
}

impl TauMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            TauMode::Fixed => "fixed",
            TauMode::Adaptive => "adaptive",
        }
    }
}

/// `sigma(x*) / E[f~(x0) - f~(x*)]` rounded up to a power of ten; zero
/// without noise.
pub fn tau_crit(problem: &LeastSquaresProblem, noise: &NoiseModel, n_samples: usize, seed: u64) -> Result<f64> {
    if noise.is_deterministic() {
        return Ok(0.0);
    }
    let r_star = problem
        .residual_at_solution()
        .ok_or_else(|| DfolsError::DegenerateProblem(format!("{} has no recorded minimiser", problem.name)))?;
    let sigma = noise_std_of_residuals(&r_star, noise, n_samples, seed, problem.id);
    let f_star: f64 = r_star.iter().map(|v| v * v).sum();
    tau_crit_from(sigma, noise.expected_objective(problem.f0(), problem.m) - noise.expected_objective(f_star, problem.m))
}

/// [`tau_crit`] from the noise estimate and the expected decrease.
pub fn tau_crit_from(sigma_star: f64, expected_decrease: f64) -> Result<f64> {
    if !(expected_decrease > 0.0) {
        return Err(DfolsError::DegenerateProblem(format!(
            "expected decrease {expected_decrease} is not positive"
        )));
    }
    let hat = sigma_star / expected_decrease;
    if hat == 0.0 {
        return Ok(0.0);
    }
    Ok(10f64.powf(hat.log10().ceil()))
}

/// `min(TAU_MAX, max(tau_crit, tau))`.
pub fn tau_p(tau: f64, tau_crit: f64) -> f64 {
    TAU_MAX.min(tau_crit.max(tau))
}

/// Outcomes of one problem over several seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemOutcomes {
    pub n: usize,
    /// Evaluations to solve, one entry per seed (`None` if unsolved).
    pub evals: Vec<Option<usize>>,
}

/// Proportion of problems solved within `alpha (n_p + 1)` evaluations, for
/// each `alpha`, averaged over seeds. Seed `s` contributes the profile over
/// the problems that have an `s`-th outcome.
pub fn data_profile(problems: &[ProblemOutcomes], alphas: &[f64]) -> Vec<f64> {
    let seeds = problems.iter().map(|p| p.evals.len()).max().unwrap_or(0);
    if seeds == 0 {
        return vec![0.0; alphas.len()];
    }
    let mut out = vec![0.0; alphas.len()];
    for s in 0..seeds {
        let members: Vec<(usize, Option<usize>)> =
            problems.iter().filter(|p| s < p.evals.len()).map(|p| (p.n, p.evals[s])).collect();
        let count = members.len() as f64;
        for (k, &alpha) in alphas.iter().enumerate() {
            let solved = members
                .iter()
                .filter(|(n, e)| e.is_some_and(|e| e as f64 <= alpha * (*n + 1) as f64))
                .count();
            out[k] += solved as f64 / count;
        }
    }
    out.iter_mut().for_each(|v| *v /= seeds as f64);
    out
}

/// `count` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count <= 1 {
        return vec![hi];
    }
    let (a, b) = (lo.log10(), hi.log10());
    let mut g: Vec<f64> = (0..count).map(|k| 10f64.powf(a + (b - a) * k as f64 / (count - 1) as f64)).collect();
    g[count - 1] = hi;
    g
}
