//! Bound-constrained trust-region subproblem
//! `min m(s)  s.t.  |s| <= delta,  lower <= s <= upper`
//! for the Gauss-Newton model (convex, `H = 2 J^T J`).

use nalgebra::DVector;

use crate::model::FullModel;
use crate::numerics::symmetric_spectral_norm;

/// Constant in the sufficient decrease bound
/// `m(0) - m(s) >= C1 |g| min(delta, |g| / max(|H|, 1))`.
pub const CAUCHY_C1: f64 = 0.5;

/// Projected truncated conjugate gradient, compared against the Cauchy point;
/// the step with the larger model decrease is returned.
///
/// Bounds are on the step (already shifted to the current iterate) and must
/// satisfy `lower <= 0 <= upper`.
pub fn solve_trust_region(model: &FullModel, delta: f64, lower: &DVector<f64>, upper: &DVector<f64>) -> DVector<f64> {
    let n = model.dim();
    if model.g.iter().all(|&v| v == 0.0) || !(delta > 0.0) {
        return DVector::zeros(n);
    }
    if model.g.iter().chain(model.h.iter()).any(|v| !v.is_finite()) {
        return DVector::zeros(n);
    }
    let scaled = normalised(model);
    let cg = truncated_cg(&scaled, delta, lower, upper);
    let cp = cauchy_point(&scaled, delta, lower, upper);
    let (dcg, dcp) = (model.decrease(&cg), model.decrease(&cp));
    let prefer_cg = if dcg.is_finite() && dcp.is_finite() {
        dcg >= dcp
    } else {
        scaled.decrease(&cg) >= scaled.decrease(&cp)
    };
    if prefer_cg {
        cg
    } else {
        cp
    }
}

/// The model divided by `max |g_i|` when its entries are large or small
/// enough for products such as `g^T H g` to overflow or underflow.
/// Minimisers are unchanged. Well-scaled models are returned as they are,
/// since rescaling alters the rounding of ill-conditioned ones.
fn normalised(model: &FullModel) -> FullModel {
    let scale = model.g.amax();
    let extreme = !(1e-60..=1e60).contains(&scale) || model.h.amax() > 1e120;
    if extreme && scale > 0.0 && scale.is_finite() {
        FullModel { c: 0.0, g: &model.g / scale, h: &model.h / scale }
    } else {
        model.clone()
    }
}

fn boundary_step(s: &DVector<f64>, d: &DVector<f64>, delta: f64) -> f64 {
    // positive root of |s + a d|^2 = delta^2
    let dd = d.norm_squared();
    if dd == 0.0 {
        return f64::INFINITY;
    }
    let sd = s.dot(d);
    let ss = s.norm_squared();
    let rest = (delta * delta - ss).max(0.0);
    let disc = (sd * sd + dd * rest).sqrt();
    // stable form of (-sd + disc) / dd
    if sd <= 0.0 {
        (disc - sd) / dd
    } else {
        rest / (disc + sd)
    }
}

fn truncated_cg(model: &FullModel, delta: f64, lower: &DVector<f64>, upper: &DVector<f64>) -> DVector<f64> {
    let n = model.dim();
    let h = &model.h;
    let g = &model.g;
    let mut s = DVector::zeros(n);
    let mut grad = g.clone();
    let mut fixed: Vec<bool> = (0..n)
        .map(|i| (g[i] > 0.0 && lower[i] >= 0.0) || (g[i] < 0.0 && upper[i] <= 0.0))
        .collect();
    let gnorm = g.norm();
    let tol = 1e-10 * gnorm;
    let mut iters = 0;
    let max_iters = 2 * n.max(1);

    'restart: while iters < max_iters {
        let r = DVector::from_fn(n, |i, _| if fixed[i] { 0.0 } else { -grad[i] });
        let mut rr = r.norm_squared();
        if rr.sqrt() <= tol {
            break;
        }
        let mut d = r;
        while iters < max_iters {
            iters += 1;
            let hd = h * &d;
            let dhd = d.dot(&hd);
            let a_cg = if dhd > 0.0 { rr / dhd } else { f64::INFINITY };
            let a_ball = boundary_step(&s, &d, delta);
            let mut a_box = f64::INFINITY;
            let mut hit = None;
            for i in 0..n {
                if fixed[i] || d[i] == 0.0 {
                    continue;
                }
                let a = if d[i] > 0.0 { (upper[i] - s[i]) / d[i] } else { (lower[i] - s[i]) / d[i] };
                if a < a_box {
                    a_box = a.max(0.0);
                    hit = Some(i);
                }
            }
            let a = a_cg.min(a_ball).min(a_box);
            if !a.is_finite() {
                break 'restart;
            }
            s.axpy(a, &d, 1.0);
            grad.axpy(a, &hd, 1.0);
            if a_box <= a_cg && a_box <= a_ball {
                let i = hit.expect("box step has an index");
                s[i] = if d[i] > 0.0 { upper[i] } else { lower[i] };
                fixed[i] = true;
                grad = g + h * &s;
                continue 'restart;
            }
            if a_ball <= a_cg {
                return boundary_rotations(model, s, fixed, delta, lower, upper);
            }
            let r_new = DVector::from_fn(n, |i, _| if fixed[i] { 0.0 } else { -grad[i] });
            let rr_new = r_new.norm_squared();
            if rr_new.sqrt() <= tol {
                break 'restart;
            }
            let beta = rr_new / rr;
            d = &r_new + d * beta;
            rr = rr_new;
        }
    }
    project(s, delta, lower, upper)
}

/// Once the CG path leaves through the ball, the step is refined on the
/// sphere by rotating it in the plane of `s` and the tangential descent
/// direction, with variables that reach a bound becoming fixed.
fn boundary_rotations(
    model: &FullModel,
    mut s: DVector<f64>,
    mut fixed: Vec<bool>,
    delta: f64,
    lower: &DVector<f64>,
    upper: &DVector<f64>,
) -> DVector<f64> {
    const SAMPLES: usize = 48;
    let n = model.dim();
    let h = &model.h;
    let g = &model.g;
    for _ in 0..n.max(1) {
        let total = model.decrease(&s);
        let gr = g + h * &s;
        let a = DVector::from_fn(n, |i, _| if fixed[i] { s[i] } else { 0.0 });
        let u = DVector::from_fn(n, |i, _| if fixed[i] { 0.0 } else { s[i] });
        let uu = u.norm_squared();
        if uu == 0.0 {
            break;
        }
        let gu = DVector::from_fn(n, |i, _| if fixed[i] { 0.0 } else { gr[i] });
        let mut w = -&gu + &u * (gu.dot(&u) / uu);
        let wn = w.norm();
        if !(wn > 1e-12 * gu.norm()) {
            break;
        }
        w *= uu.sqrt() / wn;
        let (ha, hu, hw) = (h * &a, h * &u, h * &w);
        let (ga, gu0, gw) = (g.dot(&a), g.dot(&u), g.dot(&w));
        let (aha, ahu, ahw) = (a.dot(&ha), a.dot(&hu), a.dot(&hw));
        let (uhu, uhw, whw) = (u.dot(&hu), u.dot(&hw), w.dot(&hw));
        // model change relative to m(0) at angle t
        let value = |t: f64| {
            let (c, sn) = (t.cos(), t.sin());
            ga + c * gu0
                + sn * gw
                + 0.5 * (aha + c * c * uhu + sn * sn * whw)
                + c * ahu
                + sn * ahw
                + c * sn * uhw
        };
        let point = |t: f64| &a + &u * t.cos() + &w * t.sin();
        let feasible = |p: &DVector<f64>| (0..n).all(|i| p[i] >= lower[i] && p[i] <= upper[i]);
        let base = value(0.0);
        let step = std::f64::consts::FRAC_PI_2 / SAMPLES as f64;
        let mut best_t = 0.0;
        let mut best_v = base;
        let mut limit = None;
        for k in 1..=SAMPLES {
            let t = k as f64 * step;
            if !feasible(&point(t)) {
                limit = Some(t);
                break;
            }
            let v = value(t);
            if v < best_v {
                best_t = t;
                best_v = v;
            }
        }
        let mut hit_bound = false;
        let upper_t = limit.unwrap_or(std::f64::consts::FRAC_PI_2);
        if limit.is_some() && best_t + step >= upper_t {
            // the best angle is at the feasibility edge: locate it by bisection
            let (mut lo_t, mut hi_t) = (best_t, upper_t);
            for _ in 0..60 {
                let mid = 0.5 * (lo_t + hi_t);
                if feasible(&point(mid)) {
                    lo_t = mid;
                } else {
                    hi_t = mid;
                }
            }
            if value(lo_t) < best_v {
                best_t = lo_t;
                best_v = value(lo_t);
                hit_bound = true;
            }
        } else if best_t > 0.0 {
            // golden-section refinement around the best sample
            let (mut lo_t, mut hi_t) = ((best_t - step).max(0.0), (best_t + step).min(upper_t));
            let phi = 0.5 * (5f64.sqrt() - 1.0);
            for _ in 0..40 {
                let x1 = hi_t - phi * (hi_t - lo_t);
                let x2 = lo_t + phi * (hi_t - lo_t);
                if value(x1) < value(x2) {
                    hi_t = x2;
                } else {
                    lo_t = x1;
                }
            }
            let t = 0.5 * (lo_t + hi_t);
            if value(t) < best_v && feasible(&point(t)) {
                best_t = t;
                best_v = value(t);
            }
        }
        if best_t == 0.0 {
            break;
        }
        s = point(best_t);
        if hit_bound {
            for i in 0..n {
                if fixed[i] {
                    continue;
                }
                let tol = 1e-12 * (1.0 + s[i].abs());
                if (s[i] - upper[i]).abs() <= tol || s[i] > upper[i] {
                    s[i] = upper[i];
                    fixed[i] = true;
                } else if (s[i] - lower[i]).abs() <= tol || s[i] < lower[i] {
                    s[i] = lower[i];
                    fixed[i] = true;
                }
            }
        }
        let gain = base - best_v;
        if !hit_bound && gain <= 1e-2 * total.max(f64::MIN_POSITIVE) {
            break;
        }
    }
    project(s, delta, lower, upper)
}

fn project(mut s: DVector<f64>, delta: f64, lower: &DVector<f64>, upper: &DVector<f64>) -> DVector<f64> {
    for i in 0..s.len() {
        s[i] = s[i].max(lower[i]).min(upper[i]);
    }
    let norm = s.norm();
    if norm > delta {
        // scaling towards 0 keeps box feasibility since 0 is feasible
        s *= delta / norm;
    }
    s
}

/// Minimiser of the model along the projected steepest-descent path
/// `P(-t g)`, truncated by the ball.
pub fn cauchy_point(model: &FullModel, delta: f64, lower: &DVector<f64>, upper: &DVector<f64>) -> DVector<f64> {
    let model = &normalised(model);
    let n = model.dim();
    let g = &model.g;
    let h = &model.h;
    let mut s = DVector::zeros(n);
    if !(delta > 0.0) {
        return s;
    }
    // time at which coordinate i reaches its bound along -g
    let breaks: Vec<f64> = (0..n)
        .map(|i| {
            if g[i] < 0.0 {
                upper[i] / -g[i]
            } else if g[i] > 0.0 {
                lower[i] / -g[i]
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let mut times: Vec<f64> = breaks.iter().copied().filter(|t| t.is_finite() && *t > 0.0).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    times.push(f64::INFINITY);

    let mut t_prev = 0.0;
    for &t_next in &times {
        let dir = DVector::from_fn(n, |i, _| if breaks[i] > t_prev { -g[i] } else { 0.0 });
        if dir.iter().all(|&v| v == 0.0) {
            break;
        }
        let gs = g + h * &s;
        let slope = gs.dot(&dir);
        if slope >= 0.0 {
            break;
        }
        let curv = dir.dot(&(h * &dir));
        let tau_min = if curv > 0.0 { -slope / curv } else { f64::INFINITY };
        let tau_ball = boundary_step(&s, &dir, delta);
        let seg = t_next - t_prev;
        let tau_end = seg.min(tau_ball);
        if tau_min < tau_end {
            s.axpy(tau_min, &dir, 1.0);
            break;
        }
        if !tau_end.is_finite() {
            break;
        }
        s.axpy(tau_end, &dir, 1.0);
        if tau_ball <= seg {
            break;
        }
        // snap coordinates that reached their bound
        for i in 0..n {
            if breaks[i] <= t_next {
                s[i] = if g[i] < 0.0 { upper[i] } else { lower[i] };
            }
        }
        t_prev = t_next;
    }
    project(s, delta, lower, upper)
}

/// Required decrease `C1 |g| min(delta, |g| / max(h_norm, 1))`.
pub fn cauchy_bound(g_norm: f64, h_norm: f64, delta: f64) -> f64 {
    CAUCHY_C1 * g_norm * delta.min(g_norm / h_norm.max(1.0))
}

/// Outcome of checking a step against the sufficient decrease condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CauchyCheck {
    pub decrease: f64,
    pub required: f64,
    /// The box cut the steepest-descent step short, so the requirement is the
    /// decrease of the projected Cauchy point instead of the closed-form bound.
    pub box_truncated: bool,
    pub satisfied: bool,
}

/// Checks `s` against the sufficient decrease condition with `|H|` the
/// spectral norm.
pub fn check_cauchy_decrease(
    model: &FullModel,
    delta: f64,
    lower: &DVector<f64>,
    upper: &DVector<f64>,
    s: &DVector<f64>,
) -> CauchyCheck {
    let decrease = model.decrease(s);
    let sigma = model.g.amax();
    let (g_hat, h_hat) = if sigma > 0.0 { (&model.g / sigma, &model.h / sigma) } else { (model.g.clone(), model.h.clone()) };
    let g_hat_norm = g_hat.norm();
    let g_norm = sigma.max(f64::MIN_POSITIVE) * g_hat_norm;
    let h_norm = symmetric_spectral_norm(&model.h);
    // unconstrained steepest-descent step, from the scaled model
    let g_hg = g_hat.dot(&(&h_hat * &g_hat));
    let len_min = if g_hg > 0.0 { g_hat_norm.powi(3) / g_hg } else { f64::INFINITY };
    let len = if g_hat_norm > 0.0 { len_min.min(delta) } else { 0.0 };
    let sd = if g_hat_norm > 0.0 { &g_hat * (-len / g_hat_norm) } else { g_hat.clone() };
    let box_truncated = (0..sd.len()).any(|i| sd[i] < lower[i] || sd[i] > upper[i]);
    let required = if box_truncated {
        model.decrease(&cauchy_point(model, delta, lower, upper))
    } else {
        cauchy_bound(g_norm, h_norm, delta)
    };
    let slack = 1e-12 * model.c.abs().max(required.abs()).max(f64::MIN_POSITIVE);
    CauchyCheck { decrease, required, box_truncated, satisfied: decrease + slack >= required }
}
