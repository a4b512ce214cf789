//! The trust-region main loop with its safety, geometry, termination and
//! restart logic.

pub mod params;
pub mod rules;
pub mod scaling;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::Bounds;
use crate::error::{DfolsError, Result};
use crate::model::{self, InterpolationSet, LinearResidualModel};
use crate::numerics;
use crate::trsolve;

pub use params::{
    GrowingMode, MultiMove, NoiseLevelKind, NoiseLevelParams, ResolvedParams, RestartKind, RestartParams,
    SamplingPolicy, SlowDecreaseParams, SolverParams,
};
pub use rules::{
    auto_detect_restart, check_noise_level_termination, check_slow_decrease, reduce_rho, safety_radius,
    update_radii, RadiusEvent, RadiusUpdate,
};
pub use scaling::VariableScaling;

/// Consecutive failed evaluations tolerated before giving up.
const MAX_CONSECUTIVE_FAILURES: usize = 20;
/// Consecutive degenerate-model repairs tolerated before giving up.
const MAX_DEGENERATE_REPAIRS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExitFlag {
    SmallObjective,
    SmallTrustRegion,
    Budget,
    SlowProgress,
    NoiseLevel,
    RestartsExhausted,
}

impl ExitFlag {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExitFlag::SmallObjective => "small_objective",
            ExitFlag::SmallTrustRegion => "small_trust_region",
            ExitFlag::Budget => "budget",
            ExitFlag::SlowProgress => "slow_progress",
            ExitFlag::NoiseLevel => "noise_level",
            ExitFlag::RestartsExhausted => "restarts_exhausted",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Growing,
    SafetyGrowing,
    Safety,
    Successful,
    ModelImprovement,
    Unsuccessful,
    Restart,
    DegenerateRepair,
}

/// One row of the per-iteration trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub n_evals: usize,
    pub phase: Phase,
    pub delta: f64,
    pub rho: f64,
    pub f_base: f64,
    pub ratio: Option<f64>,
    pub step_norm: f64,
    pub set_size: usize,
}

/// Sufficient-decrease bookkeeping over all trust-region steps.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CauchyStats {
    pub checks: usize,
    pub violations: usize,
    /// Largest `(required - decrease) / required` seen; negative when every
    /// step beat its requirement.
    pub worst_shortfall: f64,
    pub box_truncated: usize,
}

impl CauchyStats {
    fn record(&mut self, check: &trsolve::CauchyCheck) {
        let shortfall = if check.required > 0.0 { 1.0 - check.decrease / check.required } else { 0.0 };
        if self.checks == 0 || shortfall > self.worst_shortfall {
            self.worst_shortfall = shortfall;
        }
        self.checks += 1;
        if !check.satisfied {
            self.violations += 1;
        }
        if check.box_truncated {
            self.box_truncated += 1;
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub trace: Vec<IterationRecord>,
    pub iterations: usize,
    pub n_restarts: usize,
    /// Evaluation counter at the start of each restart.
    pub restart_evals: Vec<usize>,
    pub cauchy: CauchyStats,
    pub rank_repair_fallbacks: usize,
    pub degenerate_repairs: usize,
    pub failed_evaluations: usize,
    /// The last evaluation was cut short because the budget ran out.
    pub budget_truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Results {
    /// Best point found, including points archived by restarts.
    pub x: Vec<f64>,
    /// Objective (from the averaged residuals) at `x`.
    pub f: f64,
    pub n_evals: usize,
    pub exit_flag: ExitFlag,
    pub diagnostics: Diagnostics,
}

/// Passed to the observer after every (averaged) evaluation.
#[derive(Debug, Clone, Copy)]
pub struct Evaluation<'a> {
    /// Point in the caller's coordinates.
    pub x: &'a [f64],
    /// Objective from the averaged residuals.
    pub f: f64,
    /// Evaluation counter after the last sample of this evaluation.
    pub eval_index: usize,
    pub samples: usize,
}

/// Minimises `sum_i r_i(x)^2` from `x0`, optionally within `bounds`.
pub fn solve<F>(residual: F, x0: &[f64], bounds: Option<&Bounds>, params: &SolverParams, seed: u64) -> Result<Results>
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    solve_observed(residual, x0, bounds, params, seed, |_: &Evaluation| {})
}

/// [`solve`] with a callback invoked after every evaluation.
pub fn solve_observed<F, O>(
    residual: F,
    x0: &[f64],
    bounds: Option<&Bounds>,
    params: &SolverParams,
    seed: u64,
    observer: O,
) -> Result<Results>
where
    F: FnMut(&[f64]) -> Vec<f64>,
    O: FnMut(&Evaluation),
{
    let n = x0.len();
    if let Some(b) = bounds {
        if b.dim() != n {
            return Err(DfolsError::DimensionMismatch(format!("bounds have {} entries, x0 has {n}", b.dim())));
        }
        if !b.contains(&DVector::from_column_slice(x0)) {
            return Err(DfolsError::InvalidParameter("x0 must lie within the bounds".into()));
        }
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(DfolsError::InvalidParameter("x0 must be finite".into()));
    }
    let x0v = DVector::from_column_slice(x0);
    let (scaling, internal_bounds, z0) = if params.scale_variables {
        let b = bounds.ok_or(DfolsError::InfiniteBounds)?;
        let s = VariableScaling::new(b)?;
        let z0 = s.to_scaled(&x0v);
        let ib = s.scaled_bounds();
        (Some(s), Some(ib), z0)
    } else {
        (None, bounds.cloned(), x0v)
    };
    let resolved = params.resolve(z0.as_slice())?;
    let evaluator = Evaluator {
        residual,
        observer,
        scaling,
        nf: 0,
        max_evals: resolved.max_evals,
        m: None,
        best: None,
        consecutive_failures: 0,
        failed: 0,
        truncated: false,
    };
    let mut run = Run {
        p: &resolved,
        bounds: internal_bounds,
        rng: ChaCha8Rng::seed_from_u64(seed),
        ev: evaluator,
        delta: resolved.delta0,
        rho: resolved.delta0,
        iteration: 0,
        k_since_restart: 0,
        n_restarts: 0,
        failed_restarts: 0,
        best_at_last_restart: f64::INFINITY,
        prev_jacobian: None,
        jacobian_changes: Vec::new(),
        radius_events: Vec::new(),
        success_history: Vec::new(),
        diag: Diagnostics::default(),
        small_objective: 0.0,
        degenerate_streak: 0,
    };
    let exit = run.run(z0)?;
    Ok(run.finish(exit))
}

enum Outcome {
    Value { r: DVector<f64>, samples: usize },
    Failed,
    Budget,
}

struct Best {
    x: DVector<f64>,
    f: f64,
}

/// Counts, averages and records residual evaluations.
struct Evaluator<F, O> {
    residual: F,
    observer: O,
    scaling: Option<VariableScaling>,
    nf: usize,
    max_evals: usize,
    m: Option<usize>,
    best: Option<Best>,
    consecutive_failures: usize,
    failed: usize,
    truncated: bool,
}

impl<F, O> Evaluator<F, O>
where
    F: FnMut(&[f64]) -> Vec<f64>,
    O: FnMut(&Evaluation),
{
    fn original(&self, z: &DVector<f64>) -> DVector<f64> {
        match &self.scaling {
            Some(s) => s.to_original(z),
            None => z.clone(),
        }
    }

    fn exhausted(&self) -> bool {
        self.nf >= self.max_evals || self.truncated
    }

    /// Mean of `requested` residual samples at `z` (internal coordinates).
    fn evaluate_averaged(&mut self, z: &DVector<f64>, requested: usize) -> Result<Outcome> {
        let remaining = self.max_evals.saturating_sub(self.nf);
        if remaining == 0 {
            return Ok(Outcome::Budget);
        }
        let samples = requested.max(1).min(remaining);
        if samples < requested {
            self.truncated = true;
        }
        let x = self.original(z);
        let mut sum: Option<DVector<f64>> = None;
        let mut ok = true;
        for _ in 0..samples {
            let r = (self.residual)(x.as_slice());
            self.nf += 1;
            match self.m {
                None => {
                    if r.is_empty() {
                        return Err(DfolsError::DimensionMismatch("residual vector is empty".into()));
                    }
                    self.m = Some(r.len());
                }
                Some(m) if m != r.len() => {
                    return Err(DfolsError::DimensionMismatch(format!(
                        "residual length changed from {m} to {}",
                        r.len()
                    )));
                }
                _ => {}
            }
            if r.iter().any(|v| !v.is_finite()) {
                ok = false;
                continue;
            }
            let r = DVector::from_vec(r);
            sum = Some(match sum {
                Some(s) => s + r,
                None => r,
            });
        }
        if !ok {
            self.failed += 1;
            self.consecutive_failures += 1;
            if self.consecutive_failures > MAX_CONSECUTIVE_FAILURES {
                return Err(DfolsError::EvaluationFailed(format!(
                    "{} consecutive evaluations returned non-finite residuals",
                    self.consecutive_failures
                )));
            }
            return Ok(Outcome::Failed);
        }
        self.consecutive_failures = 0;
        let r = sum.expect("at least one sample") / samples as f64;
        let f = crate::numerics::sum_squares(r.as_slice());
        if self.best.as_ref().is_none_or(|b| f < b.f) {
            self.best = Some(Best { x: z.clone(), f });
        }
        (self.observer)(&Evaluation { x: x.as_slice(), f, eval_index: self.nf, samples });
        Ok(Outcome::Value { r, samples })
    }
}

enum Flow {
    Continue,
    Exit(ExitFlag),
}

struct Run<'a, F, O> {
    p: &'a ResolvedParams,
    bounds: Option<Bounds>,
    rng: ChaCha8Rng,
    ev: Evaluator<F, O>,
    delta: f64,
    rho: f64,
    iteration: usize,
    k_since_restart: usize,
    n_restarts: usize,
    failed_restarts: usize,
    best_at_last_restart: f64,
    prev_jacobian: Option<DMatrix<f64>>,
    jacobian_changes: Vec<(f64, f64)>,
    radius_events: Vec<RadiusEvent>,
    success_history: Vec<f64>,
    diag: Diagnostics,
    small_objective: f64,
    degenerate_streak: usize,
}

impl<F, O> Run<'_, F, O>
where
    F: FnMut(&[f64]) -> Vec<f64>,
    O: FnMut(&Evaluation),
{
    fn n(&self) -> usize {
        self.p.n
    }

    fn clip(&self, x: DVector<f64>) -> DVector<f64> {
        match &self.bounds {
            Some(b) => b.clip(&x),
            None => x,
        }
    }

    fn step_bounds(&self, x: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        match &self.bounds {
            Some(b) => b.shifted(x),
            None => {
                let n = x.len();
                (DVector::from_element(n, f64::NEG_INFINITY), DVector::from_element(n, f64::INFINITY))
            }
        }
    }

    fn samples(&self) -> usize {
        self.p.nsamples.samples(self.rho, self.delta, self.k_since_restart, self.n_restarts)
    }

    fn geometry_epsilon(&self) -> f64 {
        (self.p.geometry_delta_factor * self.delta).max(self.p.geometry_rho_factor * self.rho)
    }

    fn finish(mut self, exit: ExitFlag) -> Results {
        self.diag.iterations = self.iteration;
        self.diag.n_restarts = self.n_restarts;
        self.diag.failed_evaluations = self.ev.failed;
        self.diag.budget_truncated = self.ev.truncated;
        let best = self.ev.best.take().expect("x0 was evaluated");
        let x = self.ev.original(&best.x);
        Results { x: x.as_slice().to_vec(), f: best.f, n_evals: self.ev.nf, exit_flag: exit, diagnostics: self.diag }
    }

    fn record(&mut self, set: &InterpolationSet, phase: Phase, ratio: Option<f64>, step_norm: f64) {
        if self.p.record_trace {
            self.diag.trace.push(IterationRecord {
                iteration: self.iteration,
                n_evals: self.ev.nf,
                phase,
                delta: self.delta,
                rho: self.rho,
                f_base: set.base_objective(),
                ratio,
                step_norm,
                set_size: set.len(),
            });
        }
    }

    fn push_radius_event(&mut self, old: f64) {
        self.radius_events.push(RadiusEvent::between(old, self.delta));
        if let Some(r) = &self.p.restarts {
            let excess = self.radius_events.len().saturating_sub(r.window);
            if excess > 0 {
                self.radius_events.drain(..excess);
            }
        }
    }

    fn record_jacobian(&mut self, jacobian: &DMatrix<f64>) {
        if let Some(prev) = &self.prev_jacobian {
            let change = (jacobian - prev).norm();
            if change > 0.0 && change.is_finite() {
                self.jacobian_changes.push((self.k_since_restart as f64, change.ln()));
            }
        }
        self.prev_jacobian = Some(jacobian.clone());
        if let Some(r) = &self.p.restarts {
            let start = self.k_since_restart as f64 - r.window as f64;
            self.jacobian_changes.retain(|(k, _)| *k > start);
        }
    }

    fn run(&mut self, x0: DVector<f64>) -> Result<ExitFlag> {
        let n0 = self.samples();
        let r0 = match self.ev.evaluate_averaged(&x0, n0)? {
            Outcome::Value { r, samples } => (r, samples),
            Outcome::Failed => {
                return Err(DfolsError::EvaluationFailed("residuals at x0 are not finite".into()));
            }
            Outcome::Budget => return Ok(ExitFlag::Budget),
        };
        let f0 = crate::numerics::sum_squares(r0.0.as_slice());
        self.small_objective = self.p.small_objective_abs.max(self.p.small_objective_rel * f0);
        self.best_at_last_restart = f0;
        let mut set = InterpolationSet::new(x0.clone(), r0.0, r0.1);
        if f0 <= self.small_objective {
            return Ok(ExitFlag::SmallObjective);
        }
        if let Some(exit) = self.initial_set(&mut set, self.p.p_init)? {
            return Ok(exit);
        }
        loop {
            if let Flow::Exit(flag) = self.iterate(&mut set)? {
                return Ok(flag);
            }
        }
    }

    /// Adds `count` points around the base point at distance `delta0`.
    fn initial_set(&mut self, set: &mut InterpolationSet, count: usize) -> Result<Option<ExitFlag>> {
        let xk = set.base_point().clone();
        let points = model::build_initial_points(&xk, self.p.delta0, count, self.bounds.as_ref(), &mut self.rng)?;
        for y in points.into_iter().skip(1) {
            let mut y = y;
            let mut attempts = 0;
            loop {
                let n_s = self.samples();
                match self.ev.evaluate_averaged(&y, n_s)? {
                    Outcome::Value { r, samples } => {
                        set.update(y, r, samples, None)?;
                        break;
                    }
                    Outcome::Budget => return Ok(Some(ExitFlag::Budget)),
                    Outcome::Failed => {
                        attempts += 1;
                        if attempts > 3 {
                            return Err(DfolsError::EvaluationFailed(
                                "residuals not finite at the initial interpolation points".into(),
                            ));
                        }
                        y = &xk + (&y - &xk) * 0.5;
                    }
                }
            }
        }
        Ok(None)
    }

    fn terminate_or_restart(&mut self, set: &mut InterpolationSet, reason: ExitFlag) -> Result<Flow> {
        if self.p.restarts.is_some() {
            self.do_restart(set)
        } else {
            Ok(Flow::Exit(reason))
        }
    }

    fn iterate(&mut self, set: &mut InterpolationSet) -> Result<Flow> {
        let best_f = self.ev.best.as_ref().map_or(f64::INFINITY, |b| b.f);
        if best_f <= self.small_objective {
            return Ok(Flow::Exit(ExitFlag::SmallObjective));
        }
        if self.ev.exhausted() {
            return Ok(Flow::Exit(ExitFlag::Budget));
        }
        self.iteration += 1;
        let n = self.n();
        let full = set.len() > self.p.p;

        if let Some(nl) = &self.p.noise_level {
            if full && check_noise_level_termination(set, nl) {
                return self.terminate_or_restart(set, ExitFlag::NoiseLevel);
            }
        }

        let lm = match self.build_model(set) {
            Ok(lm) => lm,
            Err(DfolsError::DegenerateSet) => return self.repair_degenerate(set),
            Err(e) => return Err(e),
        };
        if lm.repair_fallback {
            self.diag.rank_repair_fallbacks += 1;
        }
        let fm = model::full_model(&lm);
        if fm.g.iter().chain(fm.h.iter()).any(|v| !v.is_finite()) {
            return self.repair_degenerate(set);
        }
        self.degenerate_streak = 0;
        self.record_jacobian(&lm.jacobian);
        let xk = set.base_point().clone();
        let fk = set.base_objective();
        let (lo, hi) = self.step_bounds(&xk);
        let s = trsolve::solve_trust_region(&fm, self.delta, &lo, &hi);
        let check = trsolve::check_cauchy_decrease(&fm, self.delta, &lo, &hi, &s);
        self.diag.cauchy.record(&check);
        debug_assert!(check.satisfied, "sufficient decrease violated: {check:?}");
        let snorm = s.norm();
        self.k_since_restart += 1;

        if snorm < self.p.gamma_s * self.rho {
            return self.safety_phase(set, &xk, snorm);
        }

        let mut x_new = &xk + &s;
        if self.p.growing == GrowingMode::PerturbStep && set.len() < n + 1 {
            let d = numerics::random_orthogonal_direction(n, &set.directions(), &mut self.rng);
            x_new += d * (self.p.perturb_scale * self.delta);
        }
        let x_new = self.clip(x_new);
        let step = &x_new - &xk;
        let step_norm = step.norm();
        if set.points().contains(&x_new) {
            // the step collapsed onto an existing point; treat as a failed step
            let old = self.delta;
            let upd = update_radii(f64::NEG_INFINITY, self.delta, self.rho, step_norm, self.p);
            self.delta = upd.delta;
            self.push_radius_event(old);
            self.record(set, Phase::Unsuccessful, None, step_norm);
            return self.after_unsuccessful(set, upd);
        }

        let n_s = self.samples();
        let (value, samples) = match self.ev.evaluate_averaged(&x_new, n_s)? {
            Outcome::Value { r, samples } => (Some(r), samples),
            Outcome::Failed => (None, 0),
            Outcome::Budget => return Ok(Flow::Exit(ExitFlag::Budget)),
        };
        let f_new = value.as_ref().map_or(f64::INFINITY, |r| crate::numerics::sum_squares(r.as_slice()));
        let pred = fm.decrease(&step);
        let ratio = if pred <= 1e-15 * fm.c.max(1.0) { f64::NEG_INFINITY } else { (fk - f_new) / pred };
        let old = self.delta;
        let upd = update_radii(ratio, self.delta, self.rho, step_norm, self.p);
        self.delta = upd.delta;
        self.push_radius_event(old);

        if !full {
            if let Some(r) = value {
                set.update(x_new, r, samples, None)?;
            }
            self.record(set, Phase::Growing, Some(ratio), step_norm);
            return Ok(Flow::Continue);
        }

        let replace = match &value {
            Some(_) => Some(self.choose_replacement(set, &x_new)?),
            None => None,
        };
        if ratio >= self.p.eta1 {
            let r = value.expect("successful steps have finite values");
            set.update(x_new, r, samples, replace)?;
            self.record(set, Phase::Successful, Some(ratio), step_norm);
            if self.p.p > n && self.p.multi_move != MultiMove::Nothing {
                if let Flow::Exit(flag) = self.multi_move_points(set, &step)? {
                    return Ok(Flow::Exit(flag));
                }
            }
            self.success_history.push(set.base_objective());
            if let Some(sd) = &self.p.slow_decrease {
                let keep = sd.history + sd.max_slow;
                if self.success_history.len() > keep {
                    let excess = self.success_history.len() - keep;
                    self.success_history.drain(..excess);
                }
                if check_slow_decrease(&self.success_history, sd) {
                    return self.terminate_or_restart(set, ExitFlag::SlowProgress);
                }
            }
            return Ok(Flow::Continue);
        }

        if let (Some(r), Some(t)) = (value, replace) {
            set.update(x_new, r, samples, Some(t))?;
        }
        self.record(set, Phase::Unsuccessful, Some(ratio), step_norm);
        self.after_unsuccessful(set, upd)
    }

    fn after_unsuccessful(&mut self, set: &mut InterpolationSet, upd: RadiusUpdate) -> Result<Flow> {
        if let Some(r) = &self.p.restarts {
            if r.autodetect
                && auto_detect_restart(&self.radius_events, &self.jacobian_changes, self.k_since_restart as f64, r)
            {
                return self.do_restart(set);
            }
        }
        if model::needs_geometry_improvement(set, set.base_point(), self.geometry_epsilon()) {
            return self.geometry_step(set);
        }
        if upd.rho_reduction_pending || self.delta <= self.rho {
            return self.lower_rho(set);
        }
        Ok(Flow::Continue)
    }

    fn lower_rho(&mut self, set: &mut InterpolationSet) -> Result<Flow> {
        let (rho, delta) = reduce_rho(self.rho, self.p);
        self.rho = rho;
        self.delta = delta;
        if self.rho <= self.p.rho_end {
            return self.terminate_or_restart(set, ExitFlag::SmallTrustRegion);
        }
        Ok(Flow::Continue)
    }

    fn build_model(&self, set: &InterpolationSet) -> Result<LinearResidualModel> {
        if set.len() < self.n() + 1 {
            model::build_linear_model(set, self.p.growing == GrowingMode::SvdRepair)
        } else {
            let basis = model::lagrange_basis(set)?;
            model::model_from_basis(set, &basis)
        }
    }

    fn choose_replacement(&self, set: &InterpolationSet, x_new: &DVector<f64>) -> Result<usize> {
        match model::lagrange_basis(set) {
            Ok(basis) => Ok(model::choose_point_to_replace(
                set,
                &basis,
                x_new,
                set.base_point(),
                self.delta,
                self.p.replacement_distance_power,
            )),
            Err(DfolsError::DegenerateSet) => Ok(set.furthest_from(set.base_point()).expect("full set")),
            Err(e) => Err(e),
        }
    }

    fn safety_phase(&mut self, set: &mut InterpolationSet, xk: &DVector<f64>, snorm: f64) -> Result<Flow> {
        let n = self.n();
        if set.len() < self.p.p + 1 {
            let d = numerics::random_orthogonal_direction(n, &set.directions(), &mut self.rng);
            let y = self.clip(xk + d * self.delta);
            if set.points().iter().all(|p| *p != y) {
                let n_s = self.samples();
                match self.ev.evaluate_averaged(&y, n_s)? {
                    Outcome::Value { r, samples } => {
                        set.update(y, r, samples, None)?;
                    }
                    Outcome::Failed => {}
                    Outcome::Budget => return Ok(Flow::Exit(ExitFlag::Budget)),
                }
            }
            let old = self.delta;
            self.push_radius_event(old);
            self.record(set, Phase::SafetyGrowing, None, snorm);
            return Ok(Flow::Continue);
        }
        let old = self.delta;
        self.delta = safety_radius(self.delta, self.rho, self.p);
        self.push_radius_event(old);
        self.record(set, Phase::Safety, None, snorm);
        if model::needs_geometry_improvement(set, xk, self.geometry_epsilon()) {
            return self.geometry_step(set);
        }
        if self.delta <= self.rho {
            return self.lower_rho(set);
        }
        Ok(Flow::Continue)
    }

    /// Moves the point furthest from `x_k` to the maximiser of its Lagrange
    /// polynomial over the trust region.
    fn geometry_step(&mut self, set: &mut InterpolationSet) -> Result<Flow> {
        let xk = set.base_point().clone();
        let Some(t) = set.furthest_from(&xk) else { return Ok(Flow::Continue) };
        let basis = match model::lagrange_basis(set) {
            Ok(b) => b,
            Err(DfolsError::DegenerateSet) => return self.repair_degenerate(set),
            Err(e) => return Err(e),
        };
        let mut y = model::geometry_point(&basis, t, &xk, self.delta, self.bounds.as_ref(), &mut self.rng).point;
        if set.points().contains(&y) {
            let d = numerics::random_orthogonal_direction(self.n(), &[], &mut self.rng);
            y = self.clip(&xk + d * self.delta);
        }
        let n_s = self.samples();
        match self.ev.evaluate_averaged(&y, n_s)? {
            Outcome::Value { r, samples } => {
                if set.update(y, r, samples, Some(t)).is_err() {
                    // coincident point; leave the set as it is
                }
            }
            Outcome::Failed => {}
            Outcome::Budget => return Ok(Flow::Exit(ExitFlag::Budget)),
        }
        self.record(set, Phase::ModelImprovement, None, 0.0);
        Ok(Flow::Continue)
    }

    /// The model system was singular: replace the furthest point by a point
    /// along a random direction orthogonal to the remaining displacements.
    fn repair_degenerate(&mut self, set: &mut InterpolationSet) -> Result<Flow> {
        self.degenerate_streak += 1;
        self.diag.degenerate_repairs += 1;
        if self.degenerate_streak > MAX_DEGENERATE_REPAIRS {
            return Err(DfolsError::DegenerateSet);
        }
        let xk = set.base_point().clone();
        let Some(t) = set.furthest_from(&xk) else { return Err(DfolsError::DegenerateSet) };
        let others: Vec<DVector<f64>> = (0..set.len())
            .filter(|&i| i != t && i != set.base_index())
            .map(|i| set.point(i) - &xk)
            .collect();
        let d = numerics::random_orthogonal_direction(self.n(), &others, &mut self.rng);
        let y = self.clip(&xk + d * self.delta);
        let n_s = self.samples();
        match self.ev.evaluate_averaged(&y, n_s)? {
            Outcome::Value { r, samples } => {
                let _ = set.update(y, r, samples, Some(t));
            }
            Outcome::Failed => {}
            Outcome::Budget => return Ok(Flow::Exit(ExitFlag::Budget)),
        }
        self.record(set, Phase::DegenerateRepair, None, 0.0);
        Ok(Flow::Continue)
    }

    /// Additional point moves after a successful regression step.
    fn multi_move_points(&mut self, set: &mut InterpolationSet, step: &DVector<f64>) -> Result<Flow> {
        let n = self.n();
        let center = set.base_point().clone();
        let mut order: Vec<usize> = set.nearest_to(&center);
        order.reverse();
        let targets: Vec<usize> = order.into_iter().take(self.p.multi_move_count).collect();
        for t in targets {
            let y = match self.p.multi_move {
                MultiMove::Nothing => return Ok(Flow::Continue),
                MultiMove::Geometry => {
                    let basis = match model::lagrange_basis(set) {
                        Ok(b) => b,
                        Err(_) => break,
                    };
                    model::geometry_point(&basis, t, &center, self.delta, self.bounds.as_ref(), &mut self.rng).point
                }
                MultiMove::Momentum => {
                    momentum_point(&center, step, self.delta, self.bounds.as_ref(), n, &mut self.rng)
                }
            };
            if set.points().contains(&y) {
                continue;
            }
            let n_s = self.samples();
            match self.ev.evaluate_averaged(&y, n_s)? {
                Outcome::Value { r, samples } => {
                    let _ = set.update(y, r, samples, Some(t));
                }
                Outcome::Failed => {}
                Outcome::Budget => return Ok(Flow::Exit(ExitFlag::Budget)),
            }
        }
        Ok(Flow::Continue)
    }

    fn do_restart(&mut self, set: &mut InterpolationSet) -> Result<Flow> {
        let cfg = self.p.restarts.clone().expect("restarts configured");
        let best_f = self.ev.best.as_ref().map_or(f64::INFINITY, |b| b.f);
        if best_f < self.best_at_last_restart {
            self.failed_restarts = 0;
        } else {
            self.failed_restarts += 1;
        }
        self.best_at_last_restart = best_f;
        if self.failed_restarts >= cfg.max_unsuccessful {
            return Ok(Flow::Exit(ExitFlag::RestartsExhausted));
        }
        self.n_restarts += 1;
        self.diag.restart_evals.push(self.ev.nf);
        self.delta = self.p.delta0;
        self.rho = self.p.delta0;
        self.k_since_restart = 0;
        self.prev_jacobian = None;
        self.jacobian_changes.clear();
        self.radius_events.clear();
        self.success_history.clear();
        let can_soft = set.len() > self.n();
        let flow = match cfg.kind {
            RestartKind::Hard => self.hard_restart(set)?,
            RestartKind::SoftMoving if can_soft => self.soft_restart_moving(set)?,
            RestartKind::SoftFixed if can_soft => self.soft_restart_fixed(set)?,
            _ => self.hard_restart(set)?,
        };
        self.record(set, Phase::Restart, None, 0.0);
        Ok(flow)
    }

    /// Rebuilds the whole set around `x_k` in the enlarged trust region.
    fn hard_restart(&mut self, set: &mut InterpolationSet) -> Result<Flow> {
        let base = set.base_index();
        let mut fresh = InterpolationSet::new(set.base_point().clone(), set.base_value().clone(), set.sample_count(base));
        let exit = self.initial_set(&mut fresh, self.p.p)?;
        *set = fresh;
        Ok(match exit {
            Some(flag) => Flow::Exit(flag),
            None => Flow::Continue,
        })
    }

    /// Archives `x_k`, moves it to a geometry point of the enlarged region,
    /// then moves the `N - 1` points nearest the old `x_k`; the iteration
    /// continues from the best of the moved points.
    fn soft_restart_moving(&mut self, set: &mut InterpolationSet) -> Result<Flow> {
        let old_xk = set.base_point().clone();
        let nearest = set.nearest_to(&old_xk);
        let base = set.base_index();
        let basis = match model::lagrange_basis(set) {
            Ok(b) => b,
            Err(_) => return self.hard_restart(set),
        };
        let y = model::geometry_point(&basis, base, &old_xk, self.delta, self.bounds.as_ref(), &mut self.rng).point;
        let n_s = self.samples();
        match self.ev.evaluate_averaged(&y, n_s)? {
            Outcome::Value { r, samples } => {
                if set.replace_raw(base, y, r, samples).is_err() {
                    return self.hard_restart(set);
                }
            }
            Outcome::Failed => return self.hard_restart(set),
            Outcome::Budget => return Ok(Flow::Exit(ExitFlag::Budget)),
        }
        let mut moved = vec![base];
        for t in nearest.into_iter().take(self.p.n_move.saturating_sub(1)) {
            let center = set.point(base).clone();
            let basis = match model::lagrange_basis(set) {
                Ok(b) => b,
                Err(_) => break,
            };
            let y = model::geometry_point(&basis, t, &center, self.delta, self.bounds.as_ref(), &mut self.rng).point;
            let n_s = self.samples();
            match self.ev.evaluate_averaged(&y, n_s)? {
                Outcome::Value { r, samples } => {
                    if set.replace_raw(t, y, r, samples).is_ok() {
                        moved.push(t);
                    }
                }
                Outcome::Failed => {}
                Outcome::Budget => return Ok(Flow::Exit(ExitFlag::Budget)),
            }
        }
        let best = moved
            .iter()
            .copied()
            .min_by(|&a, &b| set.objective(a).total_cmp(&set.objective(b)))
            .expect("base was moved");
        set.set_base(best);
        Ok(Flow::Continue)
    }

    /// Keeps `x_k` and moves the `N` points nearest to it to geometry points
    /// of the enlarged region.
    fn soft_restart_fixed(&mut self, set: &mut InterpolationSet) -> Result<Flow> {
        let xk = set.base_point().clone();
        let targets: Vec<usize> = set.nearest_to(&xk).into_iter().take(self.p.n_move).collect();
        for t in targets {
            let basis = match model::lagrange_basis(set) {
                Ok(b) => b,
                Err(_) => break,
            };
            let center = set.base_point().clone();
            if t == set.base_index() {
                continue;
            }
            let y = model::geometry_point(&basis, t, &center, self.delta, self.bounds.as_ref(), &mut self.rng).point;
            let n_s = self.samples();
            match self.ev.evaluate_averaged(&y, n_s)? {
                Outcome::Value { r, samples } => {
                    let _ = set.update(y, r, samples, Some(t));
                }
                Outcome::Failed => {}
                Outcome::Budget => return Ok(Flow::Exit(ExitFlag::Budget)),
            }
        }
        Ok(Flow::Continue)
    }
}

/// `center + delta d` for a random unit `d` with `d^T step > 0`. Under bounds
/// the largest feasible multiple `alpha d` with `alpha <= delta` is used, and
/// if that is below `1e-3` the direction is reversed.
pub fn momentum_point<R: Rng + ?Sized>(
    center: &DVector<f64>,
    step: &DVector<f64>,
    delta: f64,
    bounds: Option<&Bounds>,
    n: usize,
    rng: &mut R,
) -> DVector<f64> {
    let mut d = numerics::random_orthogonal_direction(n, &[], rng);
    let along = d.dot(step);
    if along < 0.0 {
        d = -d;
    } else if along == 0.0 && step.norm() > 0.0 {
        d = (d + step / step.norm()).normalize();
    }
    let Some(b) = bounds else { return center + d * delta };
    let reach = |d: &DVector<f64>| {
        let (lo, hi) = b.shifted(center);
        let mut a = delta;
        for i in 0..n {
            if d[i] > 0.0 {
                a = a.min(hi[i] / d[i]);
            } else if d[i] < 0.0 {
                a = a.min(lo[i] / d[i]);
            }
        }
        a.max(0.0)
    };
    let mut a = reach(&d);
    if a < 1e-3 {
        d = -d;
        a = reach(&d);
    }
    b.clip(&(center + d * a))
}

#[cfg(test)]
mod tests;
