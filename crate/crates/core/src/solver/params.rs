use serde::{Deserialize, Serialize};

use crate::error::{DfolsError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RestartKind {
    Hard,
    SoftMoving,
    SoftFixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RestartParams {
    pub kind: RestartKind,
    /// Points moved by a soft restart; `None` means `min(3, p)`.
    pub n_move: Option<usize>,
    /// Consecutive restarts without improving the best value before giving up.
    pub max_unsuccessful: usize,
    pub autodetect: bool,
    pub window: usize,
    pub slope_threshold: f64,
    pub corr_threshold: f64,
}

impl Default for RestartParams {
    fn default() -> Self {
        RestartParams {
            kind: RestartKind::SoftMoving,
            n_move: None,
            max_unsuccessful: 10,
            autodetect: true,
            window: 30,
            slope_threshold: 0.015,
            corr_threshold: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SlowDecreaseParams {
    /// Successful iterations spanned by one log-decrease average.
    pub history: usize,
    pub threshold: f64,
    /// Consecutive slow successful iterations that end the run.
    pub max_slow: usize,
}

impl Default for SlowDecreaseParams {
    fn default() -> Self {
        SlowDecreaseParams { history: 5, threshold: 1e-4, max_slow: 5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseLevelKind {
    Additive,
    Multiplicative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseLevelParams {
    pub level: f64,
    pub kind: NoiseLevelKind,
    #[serde(default = "one")]
    pub constant: f64,
}

fn one() -> f64 {
    1.0
}

/// Number of samples averaged per evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingPolicy {
    One,
    Const(usize),
    /// `max(1, floor(1 / delta))`
    InvDelta,
    /// `min(n_restarts + 1, 30)`
    RestartScaled,
}

impl SamplingPolicy {
    pub fn samples(&self, _rho: f64, delta: f64, _iteration: usize, n_restarts: usize) -> usize {
        match *self {
            SamplingPolicy::One => 1,
            SamplingPolicy::Const(n) => n.max(1),
            SamplingPolicy::InvDelta => {
                let v = (1.0 / delta).floor();
                if v >= 1.0 {
                    v.min(usize::MAX as f64) as usize
                } else {
                    1
                }
            }
            SamplingPolicy::RestartScaled => (n_restarts + 1).min(30),
        }
    }
}

/// How the model is made full-dimensional while the set has fewer than
/// `n + 1` points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowingMode {
    /// Raise the vanishing singular values of the Jacobian.
    SvdRepair,
    /// Perturb each trust-region step by a random direction orthogonal to the
    /// current set.
    PerturbStep,
}

/// Extra points moved on successful iterations of regression runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultiMove {
    Nothing,
    Geometry,
    Momentum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverParams {
    /// Initial radius; `None` means `0.1 max(|x0|_inf, 1)`.
    pub delta0: Option<f64>,
    pub delta_max: f64,
    pub rho_end: f64,
    pub gamma_dec: f64,
    pub gamma_inc: f64,
    pub gamma_inc_bar: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub omega_s: f64,
    pub gamma_s: f64,
    pub noisy: bool,
    /// Size of the initial set minus one; `None` means `p`.
    pub p_init: Option<usize>,
    /// Size of the full set minus one; `None` means `n`.
    pub p: Option<usize>,
    /// Budget counted in residual evaluations; `None` means `100 (n + 1)`.
    pub max_evals: Option<usize>,
    pub restarts: Option<RestartParams>,
    pub slow_decrease: Option<SlowDecreaseParams>,
    pub noise_level: Option<NoiseLevelParams>,
    pub nsamples: SamplingPolicy,
    pub growing: GrowingMode,
    pub multi_move: MultiMove,
    pub multi_move_count: usize,
    /// Length of the perturbation in [`GrowingMode::PerturbStep`] relative to `delta`.
    pub perturb_scale: f64,
    pub scale_variables: bool,
    pub small_objective_abs: f64,
    pub small_objective_rel: f64,
    /// Geometry needs improving when a point is further than
    /// `max(geometry_delta_factor delta, geometry_rho_factor rho)` from `x_k`.
    pub geometry_delta_factor: f64,
    pub geometry_rho_factor: f64,
    pub replacement_distance_power: f64,
    /// Keep one record per iteration in the diagnostics.
    pub record_trace: bool,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams::smooth()
    }
}

impl SolverParams {
    pub fn smooth() -> Self {
        SolverParams {
            delta0: None,
            delta_max: 1e10,
            rho_end: 1e-8,
            gamma_dec: 0.5,
            gamma_inc: 2.0,
            gamma_inc_bar: 4.0,
            alpha1: 0.1,
            alpha2: 0.5,
            eta1: 0.1,
            eta2: 0.7,
            omega_s: 0.1,
            gamma_s: 0.5,
            noisy: false,
            p_init: None,
            p: None,
            max_evals: None,
            restarts: None,
            slow_decrease: Some(SlowDecreaseParams::default()),
            noise_level: None,
            nsamples: SamplingPolicy::One,
            growing: GrowingMode::SvdRepair,
            multi_move: MultiMove::Nothing,
            multi_move_count: 1,
            perturb_scale: 1.0,
            scale_variables: false,
            small_objective_abs: 1e-12,
            small_objective_rel: 1e-20,
            geometry_delta_factor: 2.0,
            geometry_rho_factor: 10.0,
            replacement_distance_power: 4.0,
            record_trace: true,
        }
    }

    /// Noisy-objective defaults: slower radius reductions and soft restarts
    /// (moving `x_k`) with auto-detection.
    pub fn noisy() -> Self {
        SolverParams {
            gamma_dec: 0.98,
            alpha1: 0.9,
            alpha2: 0.95,
            noisy: true,
            restarts: Some(RestartParams::default()),
            ..SolverParams::smooth()
        }
    }

    /// Checks the parameter relations and fills in dimension-dependent
    /// defaults.
    pub fn resolve(&self, x0: &[f64]) -> Result<ResolvedParams> {
        let n = x0.len();
        if n == 0 {
            return Err(DfolsError::InvalidParameter("x0 must be nonempty".into()));
        }
        let bad = |msg: &str| Err(DfolsError::InvalidParameter(msg.into()));
        let delta0 = self
            .delta0
            .unwrap_or_else(|| 0.1 * x0.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0));
        if !(0.0 < self.gamma_dec && self.gamma_dec < 1.0 && 1.0 < self.gamma_inc && self.gamma_inc <= self.gamma_inc_bar) {
            return bad("need 0 < gamma_dec < 1 < gamma_inc <= gamma_inc_bar");
        }
        if !(0.0 < self.alpha1 && self.alpha1 < self.alpha2 && self.alpha2 < 1.0) {
            return bad("need 0 < alpha1 < alpha2 < 1");
        }
        if !(0.0 < self.eta1 && self.eta1 <= self.eta2 && self.eta2 < 1.0) {
            return bad("need 0 < eta1 <= eta2 < 1");
        }
        if !(0.0 < self.rho_end && self.rho_end < delta0 && delta0 <= self.delta_max) {
            return bad("need 0 < rho_end < delta0 <= delta_max");
        }
        if !(0.0 < self.omega_s && self.omega_s < 1.0 && 0.0 < self.gamma_s && self.gamma_s < 1.0) {
            return bad("need omega_s and gamma_s in (0, 1)");
        }
        let p = self.p.unwrap_or(n);
        let p_init = self.p_init.unwrap_or(p);
        if p < n || p_init < 1 || p_init > p {
            return bad("need 1 <= p_init <= p and p >= n");
        }
        let max_evals = self.max_evals.unwrap_or(100 * (n + 1));
        if max_evals == 0 {
            return bad("max_evals must be positive");
        }
        if let Some(r) = &self.restarts {
            if r.n_move == Some(0) || r.window < 2 {
                return bad("restart n_move must be positive and window at least 2");
            }
        }
        if let Some(s) = &self.slow_decrease {
            if s.history == 0 || s.max_slow == 0 {
                return bad("slow-decrease history and count must be positive");
            }
        }
        if let Some(nl) = &self.noise_level {
            if !(nl.level >= 0.0) || !(nl.constant > 0.0) {
                return bad("noise level must be nonnegative with a positive constant");
            }
        }
        if let SamplingPolicy::Const(0) = self.nsamples {
            return bad("constant sample count must be positive");
        }
        if !(self.perturb_scale > 0.0) {
            return bad("perturb_scale must be positive");
        }
        let n_move = self.restarts.as_ref().map(|r| r.n_move.unwrap_or(3).min(p)).unwrap_or(0);
        Ok(ResolvedParams { base: self.clone(), n, p, p_init, delta0, max_evals, n_move })
    }
}

/// Parameters with every dimension-dependent default filled in.
#[derive(Debug, Clone)]
pub struct ResolvedParams {
    pub base: SolverParams,
    pub n: usize,
    pub p: usize,
    pub p_init: usize,
    pub delta0: f64,
    pub max_evals: usize,
    pub n_move: usize,
}

impl std::ops::Deref for ResolvedParams {
    type Target = SolverParams;

    fn deref(&self) -> &SolverParams {
        &self.base
    }
}
