//! `dfols`: single solves and benchmark suites from the command line.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use dfols::bench::output::write_artifacts;
use dfols::bench::suite::{profiles, run_seed, InitialSetSize, MeasureSelection, Seeds, SuiteConfig};
use dfols::bench::{RunRecord, TracePoint};
use dfols::problems::{catalog, problem, NoiseModel, NoisyProblem, ProblemFilter};
use dfols::solver::{Evaluation, GrowingMode, RestartKind, RestartParams, SamplingPolicy};
use dfols::{solve_observed, DfolsError, SolverParams};

#[derive(Parser)]
#[command(name = "dfols", version, about = "Derivative-free least-squares solver and benchmark runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one built-in problem and print a JSON report.
    Solve {
        /// Problem name, e.g. `rosenbrock`, `osborne1` or `mw07`.
        problem: String,
        #[command(flatten)]
        opts: Options,
        /// Also write the report to DIR/report.json.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Run a benchmark suite and write records.csv, profiles.csv and summary.json.
    Bench {
        /// Suite configuration (JSON).
        config: PathBuf,
        #[command(flatten)]
        opts: Options,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
        /// Worker threads; defaults to the available parallelism.
        #[arg(long)]
        jobs: Option<usize>,
        /// Also write profiles.svg.
        #[arg(long)]
        svg: bool,
    },
    /// List the built-in problems.
    Problems,
}

#[derive(Args)]
struct Options {
    /// Seed for noise and solver randomness. Shifts the seed list in `bench`.
    #[arg(long, env = "DFLS_SEED")]
    seed: Option<u64>,
    /// Budget in units of n + 1 evaluations.
    #[arg(long)]
    budget_mult: Option<usize>,
    /// `none` or kind:sigma with kind in mult_gaussian, add_gaussian, add_chi2.
    #[arg(long, value_name = "KIND:SIGMA")]
    noise: Option<NoiseModel>,
    /// Parameter preset; `noisy` by default when noise is present.
    #[arg(long)]
    preset: Option<Preset>,
    #[arg(long)]
    restarts: Option<RestartsFlag>,
    #[arg(long)]
    autodetect: Option<OnOff>,
    /// one, const:N, invdelta or restart-scaled.
    #[arg(long, value_parser = parse_nsamples)]
    nsamples: Option<SamplingPolicy>,
    /// Regression with p = C (n + 1) points.
    #[arg(long, value_name = "C")]
    regression_points: Option<usize>,
    /// Initial set size: full, 2, quartern or halfn.
    #[arg(long)]
    pinit: Option<InitialSetSize>,
    #[arg(long)]
    growing: Option<GrowingFlag>,
    /// Accuracy level for the evaluation counts.
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    measure: Option<MeasureFlag>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Smooth,
    Noisy,
}

#[derive(Clone, Copy, ValueEnum)]
enum RestartsFlag {
    Off,
    Hard,
    #[value(name = "soft_moving")]
    SoftMoving,
    #[value(name = "soft_fixed")]
    SoftFixed,
}

#[derive(Clone, Copy, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum GrowingFlag {
    Svd,
    Perturb,
}

#[derive(Clone, Copy, ValueEnum)]
enum MeasureFlag {
    True,
    Noisy,
    Both,
}

impl From<MeasureFlag> for MeasureSelection {
    fn from(m: MeasureFlag) -> Self {
        match m {
            MeasureFlag::True => MeasureSelection::True,
            MeasureFlag::Noisy => MeasureSelection::Noisy,
            MeasureFlag::Both => MeasureSelection::Both,
        }
    }
}

fn parse_nsamples(s: &str) -> Result<SamplingPolicy, String> {
    match s {
        "one" => Ok(SamplingPolicy::One),
        "invdelta" => Ok(SamplingPolicy::InvDelta),
        "restart-scaled" => Ok(SamplingPolicy::RestartScaled),
        _ => match s.strip_prefix("const:").map(str::parse::<usize>) {
            Some(Ok(n)) if n > 0 => Ok(SamplingPolicy::Const(n)),
            _ => Err(format!("expected one, const:N, invdelta or restart-scaled, got '{s}'")),
        },
    }
}

enum Failure {
    /// Bad input: exit code 2.
    Usage(String),
    /// Solver or I/O failure: exit code 1.
    Runtime(String),
}

impl From<DfolsError> for Failure {
    fn from(e: DfolsError) -> Self {
        match e {
            DfolsError::InvalidParameter(_)
            | DfolsError::UnknownProblem(_)
            | DfolsError::InfiniteBounds
            | DfolsError::DimensionMismatch(_) => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl Options {
    fn preset(&self) -> SolverParams {
        let noisy = self.noise.is_some_and(|n| !n.is_deterministic());
        match self.preset {
            Some(Preset::Smooth) => SolverParams::smooth(),
            Some(Preset::Noisy) => SolverParams::noisy(),
            None if noisy => SolverParams::noisy(),
            None => SolverParams::smooth(),
        }
    }

    fn apply(&self, params: &mut SolverParams) -> Result<(), Failure> {
        if let Some(flag) = self.restarts {
            let kind = match flag {
                RestartsFlag::Off => None,
                RestartsFlag::Hard => Some(RestartKind::Hard),
                RestartsFlag::SoftMoving => Some(RestartKind::SoftMoving),
                RestartsFlag::SoftFixed => Some(RestartKind::SoftFixed),
            };
            params.restarts = kind.map(|kind| RestartParams { kind, ..params.restarts.clone().unwrap_or_default() });
        }
        if let Some(a) = self.autodetect {
            match params.restarts.as_mut() {
                Some(r) => r.autodetect = matches!(a, OnOff::On),
                None if matches!(a, OnOff::On) => {
                    return Err(Failure::Usage("--autodetect on needs restarts".into()));
                }
                None => {}
            }
        }
        if let Some(s) = self.nsamples {
            params.nsamples = s;
        }
        if let Some(g) = self.growing {
            params.growing = match g {
                GrowingFlag::Svd => GrowingMode::SvdRepair,
                GrowingFlag::Perturb => GrowingMode::PerturbStep,
            };
        }
        Ok(())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve { problem, opts, out } => cmd_solve(&problem, &opts, out.as_deref()),
        Command::Bench { config, opts, out, jobs, svg } => cmd_bench(&config, &opts, &out, jobs, svg),
        Command::Problems => cmd_problems(),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn cmd_problems() -> Result<(), Failure> {
    let mut stdout = std::io::stdout().lock();
    for p in catalog(&ProblemFilter::All)? {
        if writeln!(stdout, "{:<22} n={:<4} m={:<4} f*={:e}", p.name, p.n, p.m, p.f_star).is_err() {
            break;
        }
    }
    Ok(())
}

fn cmd_solve(name: &str, opts: &Options, out: Option<&Path>) -> Result<(), Failure> {
    let prob = problem(name)?;
    let noise = opts.noise.unwrap_or(NoiseModel::NONE);
    let seed = opts.seed.unwrap_or(0);
    let tau = opts.tau.unwrap_or(1e-5);
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Failure::Usage("--tau must lie in (0, 1)".into()));
    }
    let mut params = opts.preset();
    opts.apply(&mut params)?;
    let mult = opts.budget_mult.unwrap_or_else(|| prob.budget_multiplier());
    params.max_evals = Some(mult * (prob.n + 1));
    if let Some(c) = opts.regression_points {
        if c == 0 {
            return Err(Failure::Usage("--regression-points must be positive".into()));
        }
        params.p = Some((c * (prob.n + 1)).max(prob.n));
    }
    if let Some(size) = opts.pinit {
        params.p_init = Some(size.p_init(prob.n, params.p.unwrap_or(prob.n)));
    }
    params.resolve(&prob.x0)?;

    let mut record = RunRecord {
        problem: prob.name.clone(),
        problem_id: prob.id,
        n: prob.n,
        m: prob.m,
        noise,
        seed,
        f0_true: prob.f0(),
        f_star: prob.f_star,
        trace: Vec::new(),
        n_evals: 0,
        exit_flag: None,
        error: None,
        cauchy: Default::default(),
        n_restarts: 0,
    };
    let noisy = NoisyProblem::new(&prob, noise, seed);
    let res = solve_observed(
        noisy.residual_fn(),
        &prob.x0,
        prob.bounds.as_ref(),
        &params,
        run_seed(seed, prob.id),
        |e: &Evaluation| {
            record.trace.push(TracePoint { eval_index: e.eval_index, f_true: prob.objective(e.x), f_noisy: e.f })
        },
    )
    .map_err(|e| Failure::Runtime(e.to_string()))?;

    let mut evals_to_tau = serde_json::Map::new();
    evals_to_tau.insert("tau".into(), json!(tau));
    for m in MeasureSelection::from(opts.measure.unwrap_or(MeasureFlag::Both)).measures() {
        evals_to_tau.insert(m.as_str().into(), json!(m.evaluate(&record, tau)));
    }
    let report = json!({
        "problem": prob.name,
        "n": prob.n,
        "m": prob.m,
        "seed": seed,
        "noise": noise.to_string(),
        "x": res.x,
        "f": res.f,
        "f_true": prob.objective(&res.x),
        "n_evals": res.n_evals,
        "exit_flag": res.exit_flag.as_str(),
        "n_restarts": res.diagnostics.n_restarts,
        "evals_to_tau": evals_to_tau,
    });
    let text = serde_json::to_string_pretty(&report).expect("report serialises");
    if let Some(dir) = out {
        let io = |e: std::io::Error| Failure::Runtime(format!("{}: {e}", dir.display()));
        fs::create_dir_all(dir).map_err(io)?;
        fs::write(dir.join("report.json"), format!("{text}\n")).map_err(io)?;
    }
    println!("{text}");
    Ok(())
}

fn suite_config(path: &Path, opts: &Options) -> Result<SuiteConfig, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let mut cfg = SuiteConfig::from_json(&text)?;
    if let Some(shift) = opts.seed {
        cfg.seeds = Seeds::List(cfg.seeds.list().iter().map(|s| s.wrapping_add(shift)).collect());
    }
    if let Some(b) = opts.budget_mult {
        cfg.budget_multiplier = Some(b);
    }
    if let Some(n) = opts.noise {
        cfg.noise = n;
    }
    if let Some(c) = opts.regression_points {
        cfg.regression_points = Some(c);
    }
    if let Some(size) = opts.pinit {
        cfg.initial_set = Some(size);
    }
    if let Some(t) = opts.tau {
        cfg.tau = t;
    }
    if let Some(m) = opts.measure {
        cfg.measure = m.into();
    }
    if let Some(p) = opts.preset {
        let name = match p {
            Preset::Smooth => "smooth",
            Preset::Noisy => "noisy",
        };
        match &mut cfg.solver {
            Value::Object(m) => {
                m.insert("preset".into(), json!(name));
            }
            other => *other = json!({ "preset": name }),
        }
    }
    let mut params = cfg.solver_params()?;
    opts.apply(&mut params)?;
    cfg.solver = serde_json::to_value(&params).map_err(|e| Failure::Runtime(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_bench(path: &Path, opts: &Options, out: &Path, jobs: Option<usize>, svg: bool) -> Result<(), Failure> {
    let cfg = suite_config(path, opts)?;
    if cfg.problem_list()?.is_empty() {
        return Err(Failure::Usage("the config selects no problems".into()));
    }
    let jobs = jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let records = dfols::bench::run_suite(&cfg, jobs)?;
    let rows = profiles(&cfg, &records)?;
    let summary = write_artifacts(out, &cfg, &records, &rows, svg)?;
    println!("{} runs, {} failed, {} evaluations", summary.records, summary.failures.len(), summary.total_evaluations);
    for f in &summary.final_proportions {
        println!("{} / {}: {:.4}", f.measure.as_str(), f.tau_mode.as_str(), f.proportion);
    }
    if records.is_empty() {
        return Err(Failure::Runtime("no runs produced a record".into()));
    }
    Ok(())
}
