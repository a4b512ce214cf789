//! Interpolation set maintenance and model construction.
//!
//! The set holds `p + 1` points together with their (possibly sample-averaged)
//! residual vectors. From it we build a linear model `r(x_k + s) ~ r_k + J_k s`
//! for the residuals, the Gauss-Newton quadratic model of the objective, and
//! the linear Lagrange polynomials used to judge and repair the set geometry.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::bounds::Bounds;
use crate::error::{DfolsError, Result};
use crate::numerics::{self, DenseMatrix};

/// Points, residual values and sample counts of the current interpolation set.
///
/// The base point `x_k` is tracked by index. Every update re-points the base
/// to the point with the smallest objective value, except where the solver
/// deliberately moves it (soft restarts that relocate `x_k`).
#[derive(Debug, Clone)]
pub struct InterpolationSet {
    points: Vec<DVector<f64>>,
    values: Vec<DVector<f64>>,
    objectives: Vec<f64>,
    sample_counts: Vec<usize>,
    base: usize,
}

impl InterpolationSet {
    /// A set containing only the base point.
    pub fn new(point: DVector<f64>, value: DVector<f64>, samples: usize) -> Self {
        let f = crate::numerics::sum_squares(value.as_slice());
        InterpolationSet {
            points: vec![point],
            values: vec![value],
            objectives: vec![f],
            sample_counts: vec![samples.max(1)],
            base: 0,
        }
    }

    /// Builds a set from parallel vectors; the base is the best point.
    pub fn from_parts(points: Vec<DVector<f64>>, values: Vec<DVector<f64>>, sample_counts: Vec<usize>) -> Result<Self> {
        if points.is_empty() || points.len() != values.len() || points.len() != sample_counts.len() {
            return Err(DfolsError::DimensionMismatch("points, values and counts must match".into()));
        }
        for (i, a) in points.iter().enumerate() {
            if points[..i].iter().any(|b| b == a) {
                return Err(DfolsError::DuplicatePoint);
            }
        }
        let objectives: Vec<f64> = values.iter().map(|v| crate::numerics::sum_squares(v.as_slice())).collect();
        let mut set = InterpolationSet { points, values, objectives, sample_counts, base: 0 };
        set.base = set.argmin();
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn n_residuals(&self) -> usize {
        self.values[0].len()
    }

    pub fn point(&self, t: usize) -> &DVector<f64> {
        &self.points[t]
    }

    pub fn value(&self, t: usize) -> &DVector<f64> {
        &self.values[t]
    }

    pub fn objective(&self, t: usize) -> f64 {
        self.objectives[t]
    }

    pub fn sample_count(&self, t: usize) -> usize {
        self.sample_counts[t]
    }

    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    pub fn objectives(&self) -> &[f64] {
        &self.objectives
    }

    pub fn base_index(&self) -> usize {
        self.base
    }

    pub fn base_point(&self) -> &DVector<f64> {
        &self.points[self.base]
    }

    pub fn base_value(&self) -> &DVector<f64> {
        &self.values[self.base]
    }

    pub fn base_objective(&self) -> f64 {
        self.objectives[self.base]
    }

    /// Moves the base to point `t` regardless of its value.
    pub fn set_base(&mut self, t: usize) {
        assert!(t < self.len());
        self.base = t;
    }

    /// Index of the point with the smallest objective (first on ties).
    pub fn argmin(&self) -> usize {
        let mut best = 0;
        for (t, &f) in self.objectives.iter().enumerate() {
            if f < self.objectives[best] {
                best = t;
            }
        }
        best
    }

    pub fn distances_to(&self, center: &DVector<f64>) -> Vec<f64> {
        self.points.iter().map(|y| (y - center).norm()).collect()
    }

    /// Index of the non-base point furthest from `center`.
    pub fn furthest_from(&self, center: &DVector<f64>) -> Option<usize> {
        self.distances_to(center)
            .into_iter()
            .enumerate()
            .filter(|(t, _)| *t != self.base)
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(t, _)| t)
    }

    /// Non-base indices sorted by increasing distance from `center`.
    pub fn nearest_to(&self, center: &DVector<f64>) -> Vec<usize> {
        let d = self.distances_to(center);
        let mut idx: Vec<usize> = (0..self.len()).filter(|&t| t != self.base).collect();
        idx.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
        idx
    }

    /// Displacements `y_t - x_k` of the non-base points.
    pub fn directions(&self) -> Vec<DVector<f64>> {
        let xk = self.base_point();
        (0..self.len()).filter(|&t| t != self.base).map(|t| &self.points[t] - xk).collect()
    }

    fn check_new_point(&self, point: &DVector<f64>, skip: Option<usize>) -> Result<()> {
        if point.len() != self.dim() {
            return Err(DfolsError::DimensionMismatch("point dimension".into()));
        }
        if self.points.iter().enumerate().any(|(t, y)| Some(t) != skip && y == point) {
            return Err(DfolsError::DuplicatePoint);
        }
        Ok(())
    }

    /// Overwrites point `t` without touching the base index.
    pub fn replace_raw(&mut self, t: usize, point: DVector<f64>, value: DVector<f64>, samples: usize) -> Result<()> {
        self.check_new_point(&point, Some(t))?;
        self.objectives[t] = crate::numerics::sum_squares(value.as_slice());
        self.points[t] = point;
        self.values[t] = value;
        self.sample_counts[t] = samples.max(1);
        Ok(())
    }

    /// Adds a point (`replace = None`) or replaces point `replace`, then
    /// re-points the base at the best point.
    ///
    /// Returns the index of the new point.
    pub fn update(
        &mut self,
        point: DVector<f64>,
        value: DVector<f64>,
        samples: usize,
        replace: Option<usize>,
    ) -> Result<usize> {
        if value.len() != self.n_residuals() {
            return Err(DfolsError::DimensionMismatch("residual dimension".into()));
        }
        let t = match replace {
            Some(t) => {
                self.replace_raw(t, point, value, samples)?;
                t
            }
            None => {
                self.check_new_point(&point, None)?;
                self.objectives.push(crate::numerics::sum_squares(value.as_slice()));
                self.points.push(point);
                self.values.push(value);
                self.sample_counts.push(samples.max(1));
                self.len() - 1
            }
        };
        if t == self.base {
            self.base = self.argmin();
        } else if self.objectives[t] < self.objectives[self.base] {
            self.base = t;
        }
        Ok(t)
    }

    /// Removes point `t` (never the base).
    pub fn remove(&mut self, t: usize) {
        assert!(t != self.base, "cannot remove the base point");
        self.points.remove(t);
        self.values.remove(t);
        self.objectives.remove(t);
        self.sample_counts.remove(t);
        if self.base > t {
            self.base -= 1;
        }
    }

    /// Preconditioned system matrix: rows `[1, (y_t - x_k)^T / alpha]`.
    fn system(&self) -> Result<(DenseMatrix, f64)> {
        let n = self.dim();
        let xk = self.base_point();
        let alpha = self
            .points
            .iter()
            .map(|y| (y - xk).norm())
            .fold(0.0, f64::max);
        if !(alpha > 0.0) {
            return Err(DfolsError::DegenerateSet);
        }
        let mut w = DMatrix::zeros(self.len(), n + 1);
        for (t, y) in self.points.iter().enumerate() {
            w[(t, 0)] = 1.0;
            for i in 0..n {
                w[(t, i + 1)] = (y[i] - xk[i]) / alpha;
            }
        }
        Ok((w, alpha))
    }
}

/// Linear model `r(x_k + s) ~ r_k + J_k s` of the residual vector.
#[derive(Debug, Clone)]
pub struct LinearResidualModel {
    pub r: DVector<f64>,
    pub jacobian: DenseMatrix,
    /// `max_t |y_t - x_k|`, the column preconditioning scale.
    pub alpha: f64,
    pub rank_repaired: bool,
    /// The rank repair fell back to unit singular values (all-zero Jacobian).
    pub repair_fallback: bool,
}

/// Builds the residual model from the set.
///
/// With at least `n + 1` points this is the least-squares fit of the
/// preconditioned interpolation system. With fewer points the system is
/// underdetermined and the minimal-norm interpolant is used; if `repair_rank`
/// is set its Jacobian (of rank `p`) is made full rank by raising the trailing
/// singular values to the smallest nonzero one.
pub fn build_linear_model(set: &InterpolationSet, repair_rank: bool) -> Result<LinearResidualModel> {
    let n = set.dim();
    let m = set.n_residuals();
    let (w, alpha) = set.system()?;
    let mut rhs = DMatrix::zeros(set.len(), m);
    for t in 0..set.len() {
        rhs.row_mut(t).copy_from(&set.value(t).transpose());
    }
    let growing = set.len() < n + 1;
    let z = if growing {
        numerics::solve_min_norm(&w, &rhs)?
    } else {
        numerics::solve_regression(&w, &rhs)?
    };
    let r = z.row(0).transpose();
    let mut jacobian = z.rows(1, n).transpose() / alpha;
    let mut rank_repaired = false;
    let mut repair_fallback = false;
    if growing && repair_rank {
        let p = set.len() - 1;
        let clamped = numerics::clamp_singular_values(&jacobian, p)?;
        jacobian = clamped.matrix;
        rank_repaired = true;
        repair_fallback = clamped.used_fallback;
    }
    if r.iter().chain(jacobian.iter()).any(|v| !v.is_finite()) {
        return Err(DfolsError::DegenerateSet);
    }
    Ok(LinearResidualModel { r, jacobian, alpha, rank_repaired, repair_fallback })
}

/// Gauss-Newton model `m(s) = c + g^T s + s^T H s / 2` of `f = |r|^2`.
#[derive(Debug, Clone)]
pub struct FullModel {
    pub c: f64,
    pub g: DVector<f64>,
    pub h: DenseMatrix,
}

impl FullModel {
    pub fn dim(&self) -> usize {
        self.g.len()
    }

    pub fn value(&self, s: &DVector<f64>) -> f64 {
        self.c - self.decrease(s)
    }

    /// `m(0) - m(s)`, computed without forming `m(0)`.
    pub fn decrease(&self, s: &DVector<f64>) -> f64 {
        let hs = &self.h * s;
        -(self.g.dot(s) + 0.5 * s.dot(&hs))
    }
}

pub fn full_model(lm: &LinearResidualModel) -> FullModel {
    let jt = lm.jacobian.transpose();
    let g = &jt * &lm.r * 2.0;
    let mut h = &jt * &lm.jacobian * 2.0;
    // symmetrise against rounding
    let ht = h.transpose();
    h = (h + ht) * 0.5;
    FullModel { c: lm.r.norm_squared(), g, h }
}

/// Regression Lagrange polynomials `Lambda_t(y) = c_t + g_t^T (y - x_k)`.
#[derive(Debug, Clone)]
pub struct LagrangeBasis {
    center: DVector<f64>,
    alpha: f64,
    /// Column `t` holds `[c_t; g_t]`.
    coeffs: DenseMatrix,
}

impl LagrangeBasis {
    pub fn len(&self) -> usize {
        self.coeffs.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.ncols() == 0
    }

    pub fn center(&self) -> &DVector<f64> {
        &self.center
    }

    pub fn constant(&self, t: usize) -> f64 {
        self.coeffs[(0, t)]
    }

    pub fn gradient(&self, t: usize) -> DVector<f64> {
        let n = self.coeffs.nrows() - 1;
        self.coeffs.view((1, t), (n, 1)).column(0).into_owned()
    }

    pub fn value(&self, t: usize, y: &DVector<f64>) -> f64 {
        let d = y - &self.center;
        self.constant(t) + self.gradient(t).dot(&d)
    }

    /// All `Lambda_t(y)` at once.
    pub fn values_at(&self, y: &DVector<f64>) -> DVector<f64> {
        let n = self.coeffs.nrows() - 1;
        let mut basis = DVector::zeros(n + 1);
        basis[0] = 1.0;
        for i in 0..n {
            basis[i + 1] = y[i] - self.center[i];
        }
        self.coeffs.tr_mul(&basis)
    }
}

/// Solves `min sum_s (Lambda_t(y_s) - delta_{s,t})^2` for every `t`.
pub fn lagrange_basis(set: &InterpolationSet) -> Result<LagrangeBasis> {
    let n = set.dim();
    if set.len() < n + 1 {
        return Err(DfolsError::InvalidParameter(format!(
            "Lagrange basis needs at least {} points, set has {}",
            n + 1,
            set.len()
        )));
    }
    let (w, alpha) = set.system()?;
    let eye = DMatrix::identity(set.len(), set.len());
    let mut coeffs = numerics::solve_regression(&w, &eye)?;
    for mut row in coeffs.rows_mut(1, n).row_iter_mut() {
        row /= alpha;
    }
    Ok(LagrangeBasis { center: set.base_point().clone(), alpha, coeffs })
}

/// Regression model assembled from the Lagrange basis of the same set:
/// `r_k = sum_t c_t r(y_t)` and `J_k = sum_t r(y_t) g_t^T`. This equals the
/// model from [`build_linear_model`] and shares one factorisation with the
/// replacement and geometry computations.
pub fn model_from_basis(set: &InterpolationSet, basis: &LagrangeBasis) -> Result<LinearResidualModel> {
    let n = set.dim();
    let m = set.n_residuals();
    if basis.len() != set.len() || basis.center != *set.base_point() {
        return Err(DfolsError::DimensionMismatch("basis does not belong to this set".into()));
    }
    let values = DMatrix::from_fn(m, set.len(), |i, t| set.value(t)[i]);
    let r = &values * basis.coeffs.row(0).transpose();
    let jacobian = &values * basis.coeffs.rows(1, n).transpose();
    if r.iter().chain(jacobian.iter()).any(|v| !v.is_finite()) {
        return Err(DfolsError::DegenerateSet);
    }
    Ok(LinearResidualModel { r, jacobian, alpha: basis.alpha, rank_repaired: false, repair_fallback: false })
}

/// `max_t max_{|y - center| <= delta} |Lambda_t(y)|`, exact for linear
/// polynomials over the ball. Degenerate sets give `+inf`.
pub fn poisedness_estimate(set: &InterpolationSet, center: &DVector<f64>, delta: f64) -> f64 {
    match lagrange_basis(set) {
        Ok(basis) => (0..basis.len())
            .map(|t| basis.value(t, center).abs() + delta * basis.gradient(t).norm())
            .fold(0.0, f64::max),
        Err(_) => f64::INFINITY,
    }
}

/// Maximiser of `g^T s` over `{|s| <= delta} ∩ [lo, hi]` where `lo <= 0 <= hi`.
///
/// The maximiser has the form `s_i = clip(lambda g_i, lo_i, hi_i)` for the
/// largest `lambda` keeping `|s| <= delta`; coordinates are fixed at their
/// bounds one round at a time until the free ones fit in the ball.
pub fn maximize_linear_in_box(g: &DVector<f64>, delta: f64, lo: &DVector<f64>, hi: &DVector<f64>) -> DVector<f64> {
    let n = g.len();
    let mut s = DVector::zeros(n);
    let mut fixed = vec![false; n];
    for (i, f) in fixed.iter_mut().enumerate() {
        if g[i] == 0.0 || (g[i] > 0.0 && hi[i] <= 0.0) || (g[i] < 0.0 && lo[i] >= 0.0) {
            *f = true;
        }
    }
    loop {
        let fixed_sq: f64 = (0..n).filter(|&i| fixed[i]).map(|i| s[i] * s[i]).sum();
        let gfree: f64 = (0..n).filter(|&i| !fixed[i]).map(|i| g[i] * g[i]).sum::<f64>().sqrt();
        let room = (delta * delta - fixed_sq).max(0.0).sqrt();
        if gfree == 0.0 || room == 0.0 {
            for i in 0..n {
                if !fixed[i] {
                    s[i] = 0.0;
                }
            }
            break;
        }
        let lambda = room / gfree;
        let mut violated = false;
        for i in 0..n {
            if fixed[i] {
                continue;
            }
            let v = lambda * g[i];
            if v > hi[i] {
                s[i] = hi[i];
                fixed[i] = true;
                violated = true;
            } else if v < lo[i] {
                s[i] = lo[i];
                fixed[i] = true;
                violated = true;
            } else {
                s[i] = v;
            }
        }
        if !violated {
            break;
        }
    }
    // guard the ball against rounding
    let norm = s.norm();
    if norm > delta {
        s *= delta / norm;
    }
    s
}

/// Geometry-improving point for polynomial `t`.
#[derive(Debug, Clone)]
pub struct GeometryPoint {
    pub point: DVector<f64>,
    /// `g_t` vanished and a random direction was used instead.
    pub degenerate: bool,
}

/// `argmax_{y in B(center, delta) ∩ box} |Lambda_t(y)|`.
///
/// Without bounds this is `center ± delta g_t / |g_t|`. With bounds the
/// linear program over ball ∩ box is solved for both signs and the better
/// point is kept.
pub fn geometry_point<R: Rng + ?Sized>(
    basis: &LagrangeBasis,
    t: usize,
    center: &DVector<f64>,
    delta: f64,
    bounds: Option<&Bounds>,
    rng: &mut R,
) -> GeometryPoint {
    let n = center.len();
    let g = basis.gradient(t);
    let c0 = basis.value(t, center);
    let gnorm = g.norm();
    if !(gnorm > 0.0) || !gnorm.is_finite() {
        let d = numerics::random_orthogonal_direction(n, &[], rng);
        let mut point = center + d * delta;
        if let Some(b) = bounds {
            point = b.clip(&point);
        }
        return GeometryPoint { point, degenerate: true };
    }
    let (lo, hi) = match bounds {
        Some(b) => b.shifted(center),
        None => (DVector::from_element(n, f64::NEG_INFINITY), DVector::from_element(n, f64::INFINITY)),
    };
    let s_plus = maximize_linear_in_box(&g, delta, &lo, &hi);
    let s_minus = maximize_linear_in_box(&(-&g), delta, &lo, &hi);
    let v_plus = (c0 + g.dot(&s_plus)).abs();
    let v_minus = (c0 + g.dot(&s_minus)).abs();
    let s = if v_plus >= v_minus { s_plus } else { s_minus };
    let mut point = center + s;
    if let Some(b) = bounds {
        point = b.clip(&point);
    }
    GeometryPoint { point, degenerate: false }
}

/// True iff some point lies strictly further than `epsilon` from `center`.
pub fn needs_geometry_improvement(set: &InterpolationSet, center: &DVector<f64>, epsilon: f64) -> bool {
    set.distances_to(center).into_iter().any(|d| d > epsilon)
}

/// Chooses which non-base point a new point should replace: the maximiser of
/// `|Lambda_t(new)| * max(|y_t - center|^power / delta^power, 1)`.
pub fn choose_point_to_replace(
    set: &InterpolationSet,
    basis: &LagrangeBasis,
    new_point: &DVector<f64>,
    center: &DVector<f64>,
    delta: f64,
    distance_power: f64,
) -> usize {
    let lam = basis.values_at(new_point);
    let mut best = None;
    let mut best_score = f64::NEG_INFINITY;
    for t in 0..set.len() {
        if t == set.base_index() {
            continue;
        }
        let dist = (set.point(t) - center).norm();
        let weight = (dist / delta).powf(distance_power).max(1.0);
        let score = lam[t].abs() * weight;
        if best.is_none() || score > best_score {
            best = Some(t);
            best_score = score;
        }
    }
    best.expect("set has a non-base point")
}

/// Initial points `x0, x0 + delta0 d_1, ..., x0 + delta0 d_p` for `p = p_init`.
///
/// Directions are random orthonormal vectors `q_t`; for `n < p <= 2n` the
/// negated directions are appended and beyond `2n` random unit directions.
/// Under bounds each direction is sign-flipped when infeasible, or projected
/// onto the box when both signs are (accepting at least `1e-3 delta0` length).
/// If projection destroys affine independence the coordinate directions are
/// tried instead.
pub fn build_initial_points<R: Rng + ?Sized>(
    x0: &DVector<f64>,
    delta0: f64,
    p_init: usize,
    bounds: Option<&Bounds>,
    rng: &mut R,
) -> Result<Vec<DVector<f64>>> {
    let n = x0.len();
    if p_init == 0 || !(delta0 > 0.0) {
        return Err(DfolsError::InvalidParameter("need p_init >= 1 and delta0 > 0".into()));
    }
    if let Some(b) = bounds {
        if !b.contains(x0) {
            return Err(DfolsError::InfeasibleInitialGeometry("x0 outside bounds".into()));
        }
    }
    let first = p_init.min(n);
    let q = numerics::random_orthonormal(n, first, rng)?;
    match place_directions(x0, delta0, p_init, &q, bounds, rng) {
        Ok(points) => Ok(points),
        Err(_) if bounds.is_some() => {
            let coords: Vec<DVector<f64>> = (0..first)
                .map(|i| {
                    let mut e = DVector::zeros(n);
                    e[i] = 1.0;
                    e
                })
                .collect();
            place_directions(x0, delta0, p_init, &coords, bounds, rng)
        }
        Err(e) => Err(e),
    }
}

fn place_directions<R: Rng + ?Sized>(
    x0: &DVector<f64>,
    delta0: f64,
    p_init: usize,
    q: &[DVector<f64>],
    bounds: Option<&Bounds>,
    rng: &mut R,
) -> Result<Vec<DVector<f64>>> {
    let n = x0.len();
    let mut used: Vec<DVector<f64>> = Vec::with_capacity(p_init);
    let mut points = vec![x0.clone()];
    for t in 0..p_init {
        let d = if t < n {
            q[t].clone()
        } else if t < 2 * n {
            -used[t - n].clone() / delta0
        } else {
            numerics::random_orthogonal_direction(n, &[], rng)
        };
        let step = feasible_step(x0, &d, delta0, bounds)?;
        points.push(x0 + &step);
        used.push(step);
    }
    let k = p_init.min(n);
    let dirs = DMatrix::from_columns(&used[..k]);
    if numerics::numerical_rank(&dirs) < k {
        return Err(DfolsError::InfeasibleInitialGeometry("initial directions are dependent after projection".into()));
    }
    for (i, a) in points.iter().enumerate() {
        if points[..i].iter().any(|b| b == a) {
            return Err(DfolsError::InfeasibleInitialGeometry("initial points coincide".into()));
        }
    }
    Ok(points)
}

fn feasible_step(x0: &DVector<f64>, d: &DVector<f64>, delta0: f64, bounds: Option<&Bounds>) -> Result<DVector<f64>> {
    let plus = d * delta0;
    let Some(b) = bounds else { return Ok(plus) };
    if b.contains(&(x0 + &plus)) {
        return Ok(plus);
    }
    let minus = -&plus;
    if b.contains(&(x0 + &minus)) {
        return Ok(minus);
    }
    let cp = b.clip(&(x0 + &plus)) - x0;
    let cm = b.clip(&(x0 + &minus)) - x0;
    let best = if cp.norm() >= cm.norm() { cp } else { cm };
    if best.norm() < 1e-3 * delta0 {
        return Err(DfolsError::InfeasibleInitialGeometry(format!(
            "box admits only a step of length {:.3e} < 1e-3 * delta0",
            best.norm()
        )));
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    fn affine_set(points: Vec<DVector<f64>>, a: &DenseMatrix, b: &DVector<f64>) -> InterpolationSet {
        let values = points.iter().map(|y| a * y + b).collect();
        let counts = vec![1; points.len()];
        InterpolationSet::from_parts(points, values, counts).unwrap()
    }

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn initial_points_full_unbounded() {
        let x0 = v(&[0.3, -1.0]);
        let pts = build_initial_points(&x0, 0.1, 2, None, &mut rng(1)).unwrap();
        assert_eq!(pts.len(), 3);
        assert_eq!(pts[0], x0);
        for y in &pts[1..] {
            assert!(((y - &x0).norm() - 0.1).abs() < 1e-12);
        }
        let dirs = DMatrix::from_columns(&[&pts[1] - &x0, &pts[2] - &x0]);
        assert_eq!(numerics::numerical_rank(&dirs), 2);
    }

    #[test]
    fn initial_points_reduced() {
        let x0 = v(&[0.0, 0.0]);
        let pts = build_initial_points(&x0, 1.0, 1, None, &mut rng(2)).unwrap();
        assert_eq!(pts.len(), 2);
    }

    #[test]
    fn initial_points_flip_sign_at_bound() {
        let x0 = v(&[0.0]);
        let b = Bounds::new(vec![-5.0], vec![0.0]).unwrap();
        for seed in 0..10 {
            let pts = build_initial_points(&x0, 1.0, 1, Some(&b), &mut rng(seed)).unwrap();
            assert!((pts[1][0] + 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn initial_points_respect_box() {
        let x0 = v(&[0.0, 0.0, 0.0]);
        let b = Bounds::new(vec![0.0, -0.05, 0.0], vec![1.0, 0.05, 0.02]).unwrap();
        for seed in 0..20 {
            let pts = build_initial_points(&x0, 0.1, 3, Some(&b), &mut rng(seed)).unwrap();
            for y in &pts {
                assert!(b.contains(y));
                assert!((y - &x0).norm() <= 0.1 * (1.0 + 1e-12));
            }
            let dirs = DMatrix::from_columns(&pts[1..].iter().map(|y| y - &x0).collect::<Vec<_>>());
            assert_eq!(numerics::numerical_rank(&dirs), 3);
        }
    }

    #[test]
    fn initial_points_infeasible_box() {
        let x0 = v(&[0.0, 0.0]);
        let b = Bounds::new(vec![0.0, 0.0], vec![1e-9, 1e-9]).unwrap();
        assert!(matches!(
            build_initial_points(&x0, 1.0, 2, Some(&b), &mut rng(0)),
            Err(DfolsError::InfeasibleInitialGeometry(_))
        ));
    }

    #[test]
    fn model_exact_for_affine_residuals() {
        let mut r = rng(3);
        let a = DMatrix::from_fn(4, 3, |_, _| r.sample(StandardNormal));
        let b = v(&[1.0, -2.0, 0.5, 3.0]);
        let x0 = v(&[0.2, 0.1, -0.3]);
        let pts = build_initial_points(&x0, 0.5, 3, None, &mut r).unwrap();
        let set = affine_set(pts, &a, &b);
        let lm = build_linear_model(&set, true).unwrap();
        let xk = set.base_point();
        assert!((&lm.r - (&a * xk + &b)).norm() < 1e-9);
        assert!((&lm.jacobian - &a).norm() < 1e-9);
        assert!(!lm.rank_repaired);
    }

    #[test]
    fn growing_model_rank_lemma() {
        // data from the minimal-norm example: x_k = 0, y_1 = e_1, scalar values (0, 1)
        let set = InterpolationSet::from_parts(vec![v(&[0.0, 0.0]), v(&[1.0, 0.0])], vec![v(&[0.0]), v(&[1.0])], vec![1, 1])
            .unwrap();
        let raw = build_linear_model(&set, false).unwrap();
        assert!(raw.r[0].abs() < 1e-14);
        assert!((raw.jacobian[(0, 0)] - 1.0).abs() < 1e-14);
        assert!(raw.jacobian[(0, 1)].abs() < 1e-14);
        assert_eq!(numerics::numerical_rank(&raw.jacobian), 1);
        // two residuals so the repaired Jacobian can reach rank 2
        let set2 = InterpolationSet::from_parts(
            vec![v(&[0.0, 0.0]), v(&[1.0, 0.0])],
            vec![v(&[0.0, 0.0]), v(&[1.0, 0.5])],
            vec![1, 1],
        )
        .unwrap();
        let raw2 = build_linear_model(&set2, false).unwrap();
        assert_eq!(numerics::numerical_rank(&raw2.jacobian), 1);
        let fixed = build_linear_model(&set2, true).unwrap();
        assert!(fixed.rank_repaired);
        assert_eq!(numerics::numerical_rank(&fixed.jacobian), 2);
        let s = fixed.jacobian.clone().svd(false, false).singular_values;
        assert!((s[0] - s[1]).abs() < 1e-12);
    }

    #[test]
    fn regression_beats_interpolation_under_noise() {
        // Monte-Carlo over 100 seeds: Frobenius error of J with p = 5(n+1)-1 vs p = n
        let (n, m) = (3, 4);
        let mut gen = rng(99);
        let a = DMatrix::from_fn(m, n, |_, _| gen.sample(StandardNormal));
        let b = DVector::from_fn(m, |_, _| gen.sample::<f64, _>(StandardNormal));
        let x0 = DVector::zeros(n);
        let sigma = 0.05;
        let (mut err_interp, mut err_reg) = (0.0, 0.0);
        for seed in 0..100 {
            let mut r = rng(1000 + seed);
            for (p, acc) in [(n, &mut err_interp), (5 * (n + 1) - 1, &mut err_reg)] {
                let pts = build_initial_points(&x0, 1.0, p, None, &mut r).unwrap();
                let values: Vec<_> = pts
                    .iter()
                    .map(|y| &a * y + &b + DVector::from_fn(m, |_, _| sigma * r.sample::<f64, _>(StandardNormal)))
                    .collect();
                let set = InterpolationSet::from_parts(pts.clone(), values, vec![1; pts.len()]).unwrap();
                let lm = build_linear_model(&set, true).unwrap();
                *acc += (&lm.jacobian - &a).norm();
            }
        }
        assert!(err_reg < err_interp, "regression {err_reg} vs interpolation {err_interp}");
    }

    #[test]
    fn preconditioning_matches_unpreconditioned_solution() {
        let mut r = rng(17);
        let x0 = v(&[1.0, 2.0, 3.0]);
        let pts = build_initial_points(&x0, 0.3, 5, None, &mut r).unwrap();
        let values: Vec<_> = pts.iter().map(|y| v(&[y[0].sin() + y[1] * y[2], y.norm_squared()])).collect();
        let set = InterpolationSet::from_parts(pts.clone(), values.clone(), vec![1; pts.len()]).unwrap();
        let lm = build_linear_model(&set, true).unwrap();
        let xk = set.base_point().clone();
        let w = DMatrix::from_fn(pts.len(), 4, |t, c| if c == 0 { 1.0 } else { pts[t][c - 1] - xk[c - 1] });
        let rhs = DMatrix::from_fn(pts.len(), 2, |t, i| values[t][i]);
        let z = numerics::solve_regression(&w, &rhs).unwrap();
        assert!((z.row(0).transpose() - &lm.r).norm() < 1e-8);
        assert!((z.rows(1, 3).transpose() - &lm.jacobian).norm() < 1e-8);
    }

    #[test]
    fn basis_model_matches_direct_model() {
        let mut r = rng(23);
        for p in [3, 4, 9] {
            let x0 = v(&[0.4, -0.2, 1.0]);
            let pts = build_initial_points(&x0, 0.2, p, None, &mut r).unwrap();
            let values: Vec<_> = pts.iter().map(|y| v(&[y[0].exp(), y[1] * y[2], y.norm()])).collect();
            let set = InterpolationSet::from_parts(pts.clone(), values, vec![1; pts.len()]).unwrap();
            let direct = build_linear_model(&set, true).unwrap();
            let basis = lagrange_basis(&set).unwrap();
            let via = model_from_basis(&set, &basis).unwrap();
            assert!((&direct.r - &via.r).norm() < 1e-10);
            assert!((&direct.jacobian - &via.jacobian).norm() < 1e-8);
        }
    }

    #[test]
    fn full_model_scalar() {
        let lm = LinearResidualModel {
            r: v(&[3.0]),
            jacobian: DMatrix::from_element(1, 1, 2.0),
            alpha: 1.0,
            rank_repaired: false,
            repair_fallback: false,
        };
        let fm = full_model(&lm);
        assert_eq!(fm.c, 9.0);
        assert_eq!(fm.g[0], 12.0);
        assert_eq!(fm.h[(0, 0)], 8.0);
    }

    #[test]
    fn full_model_zero_residual() {
        let j = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        let lm = LinearResidualModel { r: v(&[0.0, 0.0]), jacobian: j.clone(), alpha: 1.0, rank_repaired: false, repair_fallback: false };
        let fm = full_model(&lm);
        assert_eq!(fm.c, 0.0);
        assert!(fm.g.iter().all(|&x| x == 0.0));
        assert!((&fm.h - j.tr_mul(&j) * 2.0).amax() < 1e-15);
    }

    #[test]
    fn full_model_matches_direct_evaluation() {
        let mut r = rng(8);
        for _ in 0..50 {
            let j = DMatrix::from_fn(5, 3, |_, _| r.sample(StandardNormal));
            let res = DVector::from_fn(5, |_, _| r.sample::<f64, _>(StandardNormal));
            let s = DVector::from_fn(3, |_, _| r.sample::<f64, _>(StandardNormal));
            let lm = LinearResidualModel { r: res.clone(), jacobian: j.clone(), alpha: 1.0, rank_repaired: false, repair_fallback: false };
            let fm = full_model(&lm);
            let direct = (&res + &j * &s).norm_squared();
            assert!((fm.value(&s) - direct).abs() < 1e-10 * direct.max(1.0));
        }
    }

    fn square_set() -> InterpolationSet {
        let pts = vec![v(&[0.0, 0.0]), v(&[1.0, 0.0]), v(&[0.0, 1.0])];
        InterpolationSet::from_parts(pts, vec![v(&[0.0]), v(&[1.0]), v(&[2.0])], vec![1; 3]).unwrap()
    }

    #[test]
    fn lagrange_square_is_cardinal() {
        let set = square_set();
        let basis = lagrange_basis(&set).unwrap();
        for t in 0..3 {
            for s in 0..3 {
                let expected = if s == t { 1.0 } else { 0.0 };
                assert!((basis.value(t, set.point(s)) - expected).abs() < 1e-9);
            }
        }
        let y = v(&[0.37, -2.5]);
        assert!((basis.values_at(&y).sum() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn lagrange_regression_matches_normal_equations() {
        let mut r = rng(12);
        let x0 = v(&[0.5, -0.5]);
        let pts = build_initial_points(&x0, 1.0, 5, None, &mut r).unwrap();
        let set = InterpolationSet::from_parts(pts.clone(), pts.iter().map(|y| v(&[y[0]])).collect(), vec![1; 6]).unwrap();
        let basis = lagrange_basis(&set).unwrap();
        let xk = set.base_point().clone();
        let w = DMatrix::from_fn(6, 3, |t, c| if c == 0 { 1.0 } else { pts[t][c - 1] - xk[c - 1] });
        let wtw_inv = w.tr_mul(&w).try_inverse().unwrap();
        let oracle = wtw_inv * w.transpose();
        for t in 0..6 {
            assert!((basis.constant(t) - oracle[(0, t)]).abs() < 1e-9);
            let g = basis.gradient(t);
            assert!((g[0] - oracle[(1, t)]).abs() < 1e-9 && (g[1] - oracle[(2, t)]).abs() < 1e-9);
        }
    }

    /// Dense grid search of `max |Lambda_t|` over ball (∩ box).
    fn grid_max(f: impl Fn(&DVector<f64>) -> f64, center: &DVector<f64>, delta: f64, bounds: Option<&Bounds>) -> f64 {
        let k = 400;
        let mut best = 0.0f64;
        for i in 0..=k {
            for j in 0..=k {
                let y = v(&[
                    center[0] - delta + 2.0 * delta * i as f64 / k as f64,
                    center[1] - delta + 2.0 * delta * j as f64 / k as f64,
                ]);
                if (&y - center).norm() > delta {
                    continue;
                }
                if let Some(b) = bounds {
                    if !b.contains(&y) {
                        continue;
                    }
                }
                best = best.max(f(&y).abs());
            }
        }
        best
    }

    #[test]
    fn poisedness_matches_grid() {
        let set = square_set();
        let center = v(&[0.0, 0.0]);
        let delta = 1.0;
        let lam = poisedness_estimate(&set, &center, delta);
        let basis = lagrange_basis(&set).unwrap();
        let grid = (0..3).map(|t| grid_max(|y| basis.value(t, y), &center, delta, None)).fold(0.0, f64::max);
        assert!(grid <= lam * (1.0 + 1e-12) && grid > 0.99 * lam);
        // Lambda_0 = 1 - y1 - y2 gives 1 + sqrt(2)
        assert!((lam - (1.0 + 2f64.sqrt())).abs() < 1e-9);
    }

    #[test]
    fn poisedness_is_scale_invariant() {
        let set = square_set();
        let lam = poisedness_estimate(&set, &v(&[0.0, 0.0]), 1.0);
        let scaled = InterpolationSet::from_parts(
            set.points().iter().map(|y| y * 1e-3).collect(),
            (0..3).map(|t| set.value(t).clone()).collect(),
            vec![1; 3],
        )
        .unwrap();
        let lam2 = poisedness_estimate(&scaled, &v(&[0.0, 0.0]), 1e-3);
        assert!((lam - lam2).abs() < 1e-9 * lam);
    }

    #[test]
    fn poisedness_large_for_nearly_collinear() {
        let pts = vec![v(&[0.0, 0.0]), v(&[1.0, 0.0]), v(&[0.5, 1e-3])];
        let set = InterpolationSet::from_parts(pts, vec![v(&[0.0]), v(&[1.0]), v(&[2.0])], vec![1; 3]).unwrap();
        let center = v(&[0.0, 0.0]);
        let lam = poisedness_estimate(&set, &center, 1.0);
        assert!(lam >= 100.0);
        let basis = lagrange_basis(&set).unwrap();
        let grid = (0..3).map(|t| grid_max(|y| basis.value(t, y), &center, 1.0, None)).fold(0.0, f64::max);
        assert!(grid >= 100.0);
    }

    fn basis_with(c: f64, g: &[f64]) -> LagrangeBasis {
        let mut coeffs = DMatrix::zeros(g.len() + 1, 1);
        coeffs[(0, 0)] = c;
        for (i, gi) in g.iter().enumerate() {
            coeffs[(i + 1, 0)] = *gi;
        }
        LagrangeBasis { center: DVector::zeros(g.len()), alpha: 1.0, coeffs }
    }

    #[test]
    fn geometry_point_linear_over_ball() {
        let basis = basis_with(0.0, &[1.0, 0.0]);
        let gp = geometry_point(&basis, 0, &v(&[0.0, 0.0]), 1.0, None, &mut rng(0));
        assert!((gp.point[0].abs() - 1.0).abs() < 1e-12 && gp.point[1].abs() < 1e-12);
        assert!((basis.value(0, &gp.point).abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn geometry_point_sign_selection() {
        let basis = basis_with(0.5, &[1.0, 0.0]);
        let gp = geometry_point(&basis, 0, &v(&[0.0, 0.0]), 1.0, None, &mut rng(0));
        assert!((gp.point[0] - 1.0).abs() < 1e-12);
        assert!((basis.value(0, &gp.point) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn geometry_point_in_box_matches_grid() {
        let b = Bounds::new(vec![0.0, 0.0], vec![0.3, 0.3]).unwrap();
        let mut r = rng(5);
        for _ in 0..30 {
            let c: f64 = r.sample(StandardNormal);
            let g = [r.sample::<f64, _>(StandardNormal), r.sample::<f64, _>(StandardNormal)];
            let basis = basis_with(c, &g);
            let center = v(&[r.random_range(0.0..0.3), r.random_range(0.0..0.3)]);
            let delta = r.random_range(0.05..0.5);
            let gp = geometry_point(&basis, 0, &center, delta, Some(&b), &mut r);
            assert!(b.contains(&gp.point));
            assert!((&gp.point - &center).norm() <= delta * (1.0 + 1e-12));
            let got = basis.value(0, &gp.point).abs();
            let grid = grid_max(|y| basis.value(0, y), &center, delta, Some(&b));
            assert!(got >= 0.98 * grid, "got {got}, grid {grid}");
        }
    }

    #[test]
    fn geometry_point_zero_gradient_flagged() {
        let basis = basis_with(1.0, &[0.0, 0.0]);
        let gp = geometry_point(&basis, 0, &v(&[0.0, 0.0]), 2.0, None, &mut rng(1));
        assert!(gp.degenerate);
        assert!((gp.point.norm() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn needs_improvement_boundaries() {
        let set = square_set();
        let c = v(&[0.0, 0.0]);
        assert!(!needs_geometry_improvement(&set, &c, 2.0));
        assert!(!needs_geometry_improvement(&set, &c, 1.0));
        assert!(needs_geometry_improvement(&set, &c, 0.1));
    }

    #[test]
    fn replacement_prefers_distant_point() {
        let pts = vec![v(&[0.0, 0.0]), v(&[10.0, 0.0]), v(&[0.0, 1.0]), v(&[-1.0, 0.0])];
        let vals = vec![v(&[0.0]), v(&[1.0]), v(&[1.0]), v(&[1.0])];
        let set = InterpolationSet::from_parts(pts, vals, vec![1; 4]).unwrap();
        let basis = lagrange_basis(&set).unwrap();
        let new = v(&[0.5, 0.5]);
        assert_eq!(choose_point_to_replace(&set, &basis, &new, set.base_point(), 1.0, 4.0), 1);
    }

    #[test]
    fn replacement_equidistant_uses_lagrange_magnitude() {
        let set = square_set();
        let basis = lagrange_basis(&set).unwrap();
        let new = v(&[0.1, 0.8]);
        let lam = basis.values_at(&new);
        let expected = if lam[1].abs() > lam[2].abs() { 1 } else { 2 };
        assert_eq!(choose_point_to_replace(&set, &basis, &new, set.base_point(), 1.0, 4.0), expected);
    }

    #[test]
    fn replacement_matches_exhaustive_scores() {
        let mut r = rng(31);
        for _ in 0..50 {
            let x0 = v(&[0.0, 0.0, 0.0]);
            let pts = build_initial_points(&x0, r.random_range(0.1..2.0), 6, None, &mut r).unwrap();
            let vals: Vec<_> = (0..pts.len()).map(|t| v(&[t as f64])).collect();
            let set = InterpolationSet::from_parts(pts, vals, vec![1; 7]).unwrap();
            let basis = lagrange_basis(&set).unwrap();
            let new = DVector::from_fn(3, |_, _| r.sample::<f64, _>(StandardNormal) * 0.3);
            let delta = 0.5;
            let center = set.base_point().clone();
            let chosen = choose_point_to_replace(&set, &basis, &new, &center, delta, 4.0);
            let score = |t: usize| {
                let d = (set.point(t) - &center).norm();
                basis.value(t, &new).abs() * (d.powi(4) / delta.powi(4)).max(1.0)
            };
            for t in 0..set.len() {
                if t != set.base_index() {
                    assert!(score(chosen) >= score(t) - 1e-12);
                }
            }
            assert_ne!(chosen, set.base_index());
        }
    }

    #[test]
    fn update_append_and_replace() {
        let mut set = InterpolationSet::new(v(&[0.0, 0.0]), v(&[1.0]), 1);
        set.update(v(&[1.0, 0.0]), v(&[2.0]), 1, None).unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set.base_index(), 0);
        set.update(v(&[0.0, 1.0]), v(&[3.0]), 1, None).unwrap();
        // better point replaces index 1: base moves
        set.update(v(&[0.5, 0.5]), v(&[0.1]), 1, Some(1)).unwrap();
        assert_eq!(set.base_index(), 1);
        // worse point replaces index 2: base unchanged
        set.update(v(&[0.2, 0.9]), v(&[5.0]), 1, Some(2)).unwrap();
        assert_eq!(set.base_index(), 1);
        assert_eq!(set.len(), 3);
    }

    #[test]
    fn update_rejects_duplicates() {
        let mut set = InterpolationSet::new(v(&[0.0, 0.0]), v(&[1.0]), 1);
        assert_eq!(set.update(v(&[0.0, 0.0]), v(&[1.0]), 1, None).unwrap_err(), DfolsError::DuplicatePoint);
    }

    #[test]
    fn maximize_linear_exact_on_box_corner() {
        let g = v(&[1.0, 1.0]);
        let s = maximize_linear_in_box(&g, 10.0, &v(&[-1.0, -1.0]), &v(&[0.2, 0.3]));
        assert!((s[0] - 0.2).abs() < 1e-15 && (s[1] - 0.3).abs() < 1e-15);
    }
}
