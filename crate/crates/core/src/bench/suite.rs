//! Suite configuration and execution.

use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{
    data_profile, log_grid, tau_crit, tau_p, Measure, ProblemOutcomes, RunRecord, TauMode, TraceBuilder, TracePoint,
    NOISE_STD_SAMPLES,
};
use crate::error::{DfolsError, Result};
use crate::problems::{catalog, LeastSquaresProblem, NoiseKind, NoiseModel, NoisyProblem, ProblemFilter};
use crate::solver::{solve_observed, Evaluation, NoiseLevelKind, NoiseLevelParams, SolverParams};

/// Which problems a suite runs: a collection name or a list of names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProblemSelection {
    Names(Vec<String>),
    /// `"all"`, `"more_wild"` (or `"mw"`) or `"scalable"`.
    Collection(String),
}

impl ProblemSelection {
    pub fn filter(&self) -> Result<ProblemFilter> {
        Ok(match self {
            ProblemSelection::Names(v) => ProblemFilter::Names(v.clone()),
            ProblemSelection::Collection(c) => match c.as_str() {
                "all" => ProblemFilter::All,
                "more_wild" | "mw" => ProblemFilter::MoreWild,
                "scalable" => ProblemFilter::Scalable,
                other => ProblemFilter::Names(vec![other.to_string()]),
            },
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureSelection {
    True,
    Noisy,
    Both,
}

impl MeasureSelection {
    pub fn measures(&self) -> Vec<Measure> {
        match self {
            MeasureSelection::True => vec![Measure::True],
            MeasureSelection::Noisy => vec![Measure::Noisy],
            MeasureSelection::Both => vec![Measure::True, Measure::Noisy],
        }
    }
}

/// Seeds as an explicit list or a count `0..count`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Seeds {
    List(Vec<u64>),
    Count(u64),
}

impl Seeds {
    pub fn list(&self) -> Vec<u64> {
        match self {
            Seeds::List(v) => v.clone(),
            Seeds::Count(c) => (0..*c).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    pub problems: ProblemSelection,
    #[serde(default = "no_noise")]
    pub noise: NoiseModel,
    /// Overrides on top of the preset named by the optional `"preset"` key
    /// (`"smooth"` or `"noisy"`).
    #[serde(default)]
    pub solver: Value,
    #[serde(default = "one_seed")]
    pub seeds: Seeds,
    /// Budget in units of `n + 1` evaluations; the problem's default if absent.
    #[serde(default)]
    pub budget_multiplier: Option<usize>,
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default = "both")]
    pub measure: MeasureSelection,
    /// Accuracy modes to report; both if absent.
    #[serde(default)]
    pub tau_modes: Option<Vec<TauMode>>,
    /// Terminate (or restart) once all interpolation values are within the
    /// noise level derived from the noise model.
    #[serde(default)]
    pub noise_level_termination: bool,
    #[serde(default = "default_alpha_points")]
    pub alpha_points: usize,
    /// Regression set size `p = C (n + 1)`; interpolation if absent.
    #[serde(default)]
    pub regression_points: Option<usize>,
    /// Initial set size relative to `n`; overrides `solver.p_init`.
    #[serde(default)]
    pub initial_set: Option<InitialSetSize>,
}

/// Initial interpolation set size as a function of the dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InitialSetSize {
    #[serde(rename = "full")]
    Full,
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "quartern")]
    QuarterN,
    #[serde(rename = "halfn")]
    HalfN,
}

impl InitialSetSize {
    /// `p_init` for a problem of dimension `n` with `p` interpolation points.
    pub fn p_init(&self, n: usize, p: usize) -> usize {
        let k = match self {
            InitialSetSize::Full => p,
            InitialSetSize::Two => 2,
            InitialSetSize::QuarterN => n / 4,
            InitialSetSize::HalfN => n / 2,
        };
        k.clamp(1, p)
    }
}

impl FromStr for InitialSetSize {
    type Err = DfolsError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(InitialSetSize::Full),
            "2" => Ok(InitialSetSize::Two),
            "quartern" => Ok(InitialSetSize::QuarterN),
            "halfn" => Ok(InitialSetSize::HalfN),
            _ => Err(DfolsError::InvalidParameter(format!("unknown initial set size {s}"))),
        }
    }
}

fn no_noise() -> NoiseModel {
    NoiseModel::NONE
}

fn one_seed() -> Seeds {
    Seeds::Count(1)
}

fn default_tau() -> f64 {
    1e-5
}

fn both() -> MeasureSelection {
    MeasureSelection::Both
}

fn default_alpha_points() -> usize {
    200
}

impl SuiteConfig {
    pub fn new(problems: ProblemSelection) -> Self {
        SuiteConfig {
            problems,
            noise: NoiseModel::NONE,
            solver: Value::Null,
            seeds: one_seed(),
            budget_multiplier: None,
            tau: default_tau(),
            measure: MeasureSelection::Both,
            tau_modes: None,
            noise_level_termination: false,
            alpha_points: default_alpha_points(),
            regression_points: None,
            initial_set: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SuiteConfig =
            serde_json::from_str(text).map_err(|e| DfolsError::InvalidParameter(format!("suite config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if matches!(&self.problems, ProblemSelection::Names(v) if v.is_empty()) {
            return Err(DfolsError::InvalidParameter("no problems selected".into()));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(DfolsError::InvalidParameter("tau must lie in (0, 1)".into()));
        }
        if self.seeds.list().is_empty() {
            return Err(DfolsError::InvalidParameter("at least one seed is needed".into()));
        }
        if self.regression_points == Some(0) {
            return Err(DfolsError::InvalidParameter("regression_points must be positive".into()));
        }
        if self.budget_multiplier == Some(0) {
            return Err(DfolsError::InvalidParameter("budget_multiplier must be positive".into()));
        }
        self.solver_params()?;
        Ok(())
    }

    pub fn problem_list(&self) -> Result<Vec<LeastSquaresProblem>> {
        catalog(&self.problems.filter()?)
    }

    pub fn tau_modes(&self) -> Vec<TauMode> {
        self.tau_modes.clone().unwrap_or_else(|| vec![TauMode::Adaptive, TauMode::Fixed])
    }

    /// The preset with the `solver` overrides applied.
    pub fn solver_params(&self) -> Result<SolverParams> {
        let bad = |e: String| DfolsError::InvalidParameter(format!("solver config: {e}"));
        let mut overrides = match &self.solver {
            Value::Null => serde_json::Map::new(),
            Value::Object(m) => m.clone(),
            _ => return Err(bad("expected an object".into())),
        };
        let preset = match overrides.remove("preset") {
            None => SolverParams::smooth(),
            Some(Value::String(s)) if s == "smooth" => SolverParams::smooth(),
            Some(Value::String(s)) if s == "noisy" => SolverParams::noisy(),
            Some(other) => return Err(bad(format!("unknown preset {other}"))),
        };
        let mut base = serde_json::to_value(&preset).map_err(|e| bad(e.to_string()))?;
        let obj = base.as_object_mut().expect("params serialise to an object");
        for (k, v) in overrides {
            if !obj.contains_key(&k) {
                return Err(bad(format!("unknown field {k}")));
            }
            obj.insert(k, v);
        }
        serde_json::from_value(base).map_err(|e| bad(e.to_string()))
    }

    /// Solver parameters for one problem: budget and noise level filled in.
    pub fn params_for(&self, base: &SolverParams, problem: &LeastSquaresProblem) -> SolverParams {
        let mut p = base.clone();
        let mult = self.budget_multiplier.unwrap_or_else(|| problem.budget_multiplier());
        p.max_evals = Some(mult * (problem.n + 1));
        if let Some(c) = self.regression_points {
            p.p = Some((c * (problem.n + 1)).max(problem.n));
        }
        if let Some(size) = self.initial_set {
            let total = p.p.unwrap_or(problem.n);
            p.p_init = Some(size.p_init(problem.n, total));
        }
        if self.noise_level_termination && !self.noise.is_deterministic() {
            p.noise_level = Some(noise_level_for(&self.noise, problem.m));
        }
        p
    }
}

/// Noise level of `f~` implied by the noise model: `2 sigma` relative for
/// multiplicative noise, the standard deviation `sqrt(2m) sigma^2` of `f~` at
/// a zero residual for additive noise.
pub fn noise_level_for(noise: &NoiseModel, m: usize) -> NoiseLevelParams {
    match noise.kind {
        NoiseKind::MultGaussian => {
            NoiseLevelParams { level: 2.0 * noise.sigma, kind: NoiseLevelKind::Multiplicative, constant: 1.0 }
        }
        _ => NoiseLevelParams {
            level: (2.0 * m as f64).sqrt() * noise.sigma * noise.sigma,
            kind: NoiseLevelKind::Additive,
            constant: 1.0,
        },
    }
}

/// Solver seed for one run, distinct per problem.
pub fn run_seed(seed: u64, problem_id: u32) -> u64 {
    let mut z = seed ^ (u64::from(problem_id) << 40) ^ 0x9E37_79B9_7F4A_7C15;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs one problem with one seed. Solver errors end up in `record.error`.
pub fn run_one(problem: &LeastSquaresProblem, noise: &NoiseModel, params: &SolverParams, seed: u64) -> RunRecord {
    let record = RunRecord {
        problem: problem.name.clone(),
        problem_id: problem.id,
        n: problem.n,
        m: problem.m,
        noise: *noise,
        seed,
        f0_true: problem.f0(),
        f_star: problem.f_star,
        trace: Vec::new(),
        n_evals: 0,
        exit_flag: None,
        error: None,
        cauchy: Default::default(),
        n_restarts: 0,
    };
    let mut builder = TraceBuilder::new(record);
    let mut params = params.clone();
    params.record_trace = false;
    let noisy = NoisyProblem::new(problem, *noise, seed);
    let result = solve_observed(
        noisy.residual_fn(),
        &problem.x0,
        problem.bounds.as_ref(),
        &params,
        run_seed(seed, problem.id),
        |e: &Evaluation| {
            let f_true = problem.objective(e.x);
            builder.push(TracePoint { eval_index: e.eval_index, f_true, f_noisy: e.f });
        },
    );
    let mut record = builder.record;
    match result {
        Ok(res) => {
            record.n_evals = res.n_evals;
            record.exit_flag = Some(res.exit_flag);
            record.cauchy = res.diagnostics.cauchy;
            record.n_restarts = res.diagnostics.n_restarts;
        }
        Err(e) => {
            record.n_evals = record.trace.last().map_or(0, |p| p.eval_index);
            record.error = Some(e.to_string());
        }
    }
    record
}

/// Every (problem, seed) run, ordered by problem then seed regardless of
/// `jobs`.
pub fn run_suite(config: &SuiteConfig, jobs: usize) -> Result<Vec<RunRecord>> {
    config.validate()?;
    let problems = config.problem_list()?;
    let base = config.solver_params()?;
    let seeds = config.seeds.list();
    let tasks: Vec<(usize, u64)> = (0..problems.len()).flat_map(|p| seeds.iter().map(move |&s| (p, s))).collect();
    let params: Vec<SolverParams> = problems.iter().map(|p| config.params_for(&base, p)).collect();
    let slots: Mutex<Vec<Option<RunRecord>>> = Mutex::new(vec![None; tasks.len()]);
    let next = AtomicUsize::new(0);
    let worker = || loop {
        let k = next.fetch_add(1, Ordering::Relaxed);
        let Some(&(p, s)) = tasks.get(k) else { break };
        let rec = run_one(&problems[p], &config.noise, &params[p], s);
        slots.lock().expect("no worker panicked")[k] = Some(rec);
    };
    let jobs = jobs.max(1).min(tasks.len().max(1));
    if jobs == 1 {
        worker();
    } else {
        std::thread::scope(|scope| {
            for _ in 0..jobs {
                scope.spawn(worker);
            }
        });
    }
    Ok(slots.into_inner().expect("no worker panicked").into_iter().map(|r| r.expect("every task ran")).collect())
}

/// Accuracy levels per problem name for one mode.
pub fn problem_taus(
    problems: &[LeastSquaresProblem],
    noise: &NoiseModel,
    tau: f64,
    mode: TauMode,
) -> Result<Vec<(String, f64)>> {
    problems
        .iter()
        .map(|p| {
            let t = match mode {
                TauMode::Fixed => tau,
                TauMode::Adaptive => tau_p(tau, tau_crit(p, noise, NOISE_STD_SAMPLES, 0)?),
            };
            Ok((p.name.clone(), t))
        })
        .collect()
}

/// Per-problem outcomes under one measure, with `taus[i]` for problem `i`
/// (matched by name).
pub fn outcomes(records: &[RunRecord], taus: &[(String, f64)], measure: Measure) -> Vec<ProblemOutcomes> {
    taus.iter()
        .map(|(name, t)| {
            let runs: Vec<&RunRecord> = records.iter().filter(|r| &r.problem == name).collect();
            ProblemOutcomes {
                n: runs.first().map_or(1, |r| r.n),
                evals: runs.iter().map(|r| measure.evaluate(r, *t)).collect(),
            }
        })
        .collect()
}

/// One point of a data profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub alpha: f64,
    pub proportion: f64,
    pub measure: Measure,
    pub tau_mode: TauMode,
}

/// Profiles for every selected measure and accuracy mode on a log grid of
/// `alpha` up to the largest budget multiplier used.
pub fn profiles(config: &SuiteConfig, records: &[RunRecord]) -> Result<Vec<ProfileRow>> {
    let problems = config.problem_list()?;
    let max_mult = problems
        .iter()
        .map(|p| config.budget_multiplier.unwrap_or_else(|| p.budget_multiplier()))
        .max()
        .unwrap_or(1) as f64;
    let alphas = log_grid(0.1f64.min(max_mult), max_mult, config.alpha_points);
    let mut rows = Vec::new();
    for mode in config.tau_modes() {
        let taus = problem_taus(&problems, &config.noise, config.tau, mode)?;
        for measure in config.measure.measures() {
            let prof = data_profile(&outcomes(records, &taus, measure), &alphas);
            rows.extend(
                alphas
                    .iter()
                    .zip(prof)
                    .map(|(&alpha, proportion)| ProfileRow { alpha, proportion, measure, tau_mode: mode }),
            );
        }
    }
    Ok(rows)
}
