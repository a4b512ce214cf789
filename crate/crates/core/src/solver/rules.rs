//! Pure decision rules of the main loop: radius updates and the
//! termination/restart tests.

use crate::model::InterpolationSet;
use crate::numerics::linear_fit;

use super::params::{NoiseLevelKind, NoiseLevelParams, RestartParams, SlowDecreaseParams, SolverParams};

/// How `delta` changed over one iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadiusEvent {
    Increased,
    Decreased,
    Constant,
}

impl RadiusEvent {
    pub fn between(old: f64, new: f64) -> Self {
        if new > old {
            RadiusEvent::Increased
        } else if new < old {
            RadiusEvent::Decreased
        } else {
            RadiusEvent::Constant
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusUpdate {
    pub delta: f64,
    /// Unsuccessful step whose new radius reached `rho`: the caller lowers
    /// `rho` unless it repairs the geometry first.
    pub rho_reduction_pending: bool,
}

/// Trust-region radius after a step with ratio `ratio` and length `step_norm`.
pub fn update_radii(ratio: f64, delta: f64, rho: f64, step_norm: f64, params: &SolverParams) -> RadiusUpdate {
    let new = if ratio >= params.eta2 {
        (params.gamma_inc * delta).max(params.gamma_inc_bar * step_norm).min(params.delta_max)
    } else if ratio >= params.eta1 {
        (params.gamma_dec * delta).max(step_norm).max(rho)
    } else {
        (params.gamma_dec * delta).min(step_norm).max(rho)
    };
    RadiusUpdate { delta: new, rho_reduction_pending: ratio < params.eta1 && new <= rho }
}

/// Radius after a safety step: `max(rho, omega_s delta)`.
pub fn safety_radius(delta: f64, rho: f64, params: &SolverParams) -> f64 {
    rho.max(params.omega_s * delta)
}

/// `(rho, delta) <- (alpha1 rho, alpha2 rho)`.
pub fn reduce_rho(rho: f64, params: &SolverParams) -> (f64, f64) {
    (params.alpha1 * rho, params.alpha2 * rho)
}

/// Whether the successful iteration recorded last in `history` is slow:
/// `(log f_{i-K} - log f_i) / K < threshold`.
fn is_slow(history: &[f64], i: usize, k: usize, threshold: f64) -> bool {
    (history[i - k].ln() - history[i].ln()) / (k as f64) < threshold
}

/// True iff each of the last `max_slow` successful iterations is slow.
///
/// `history` holds the objective after each successful iteration, oldest
/// first. Non-positive values make the test inconclusive (false) because the
/// small-objective exit takes precedence.
pub fn check_slow_decrease(history: &[f64], params: &SlowDecreaseParams) -> bool {
    let k = params.history;
    let needed = k + params.max_slow;
    if history.len() < needed {
        return false;
    }
    let tail = &history[history.len() - needed..];
    if tail.iter().any(|&f| !(f > 0.0) || !f.is_finite()) {
        return false;
    }
    (k..tail.len()).all(|i| is_slow(tail, i, k, params.threshold))
}

/// True iff every interpolation value is within the noise level of the base
/// value, the threshold for point `t` being `constant level / sqrt(N_t)`.
///
/// In multiplicative mode the relative gap `|f_t / f_k - 1|` is compared; a
/// zero base value falls back to the additive comparison.
pub fn check_noise_level_termination(set: &InterpolationSet, params: &NoiseLevelParams) -> bool {
    let fk = set.base_objective();
    let base = set.base_index();
    let multiplicative = params.kind == NoiseLevelKind::Multiplicative && fk != 0.0;
    (0..set.len()).filter(|&t| t != base).all(|t| {
        let thresh = params.constant * params.level / (set.sample_count(t) as f64).sqrt();
        let ft = set.objective(t);
        let gap = if multiplicative { (ft / fk - 1.0).abs() } else { (ft - fk).abs() };
        gap <= thresh
    })
}

/// Restart trigger from the recent radius history and the growth of the
/// Jacobian changes `(k, log |J_k - J_{k-1}|_F)`.
///
/// Needs at least `window` radius events since the last restart; only the
/// last `window` events and the Jacobian records with index inside that
/// window are used.
pub fn auto_detect_restart(
    radius_events: &[RadiusEvent],
    jacobian_changes: &[(f64, f64)],
    current_iteration: f64,
    params: &RestartParams,
) -> bool {
    let w = params.window;
    if radius_events.len() < w {
        return false;
    }
    let recent = &radius_events[radius_events.len() - w..];
    let increased = recent.contains(&RadiusEvent::Increased);
    let decreased = recent.iter().filter(|e| **e == RadiusEvent::Decreased).count();
    let constant = recent.iter().filter(|e| **e == RadiusEvent::Constant).count();
    if increased || decreased < 2 * constant {
        return false;
    }
    let start = current_iteration - w as f64;
    let points: Vec<(f64, f64)> = jacobian_changes.iter().copied().filter(|(k, _)| *k > start).collect();
    match linear_fit(&points) {
        Ok(fit) => fit.slope >= params.slope_threshold && fit.correlation >= params.corr_threshold,
        Err(_) => false,
    }
}
