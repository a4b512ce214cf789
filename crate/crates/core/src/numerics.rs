//! Dense linear-algebra and statistics kernels used by the model and restart
//! machinery.
//!
//! All routines are pure functions of their inputs. Randomized routines take
//! the generator explicitly.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{DfolsError, Result};

/// Dense row/column matrix of reals.
pub type DenseMatrix = DMatrix<f64>;

/// Singular values below `RANK_TOL * sigma_max` are treated as zero.
pub const RANK_TOL: f64 = 1e-12;

fn check_finite(m: &DenseMatrix, what: &str) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(DfolsError::InvalidParameter(format!("{what} has non-finite entries")))
    }
}

/// Solves `W z = B` column by column through the SVD of `W`, returning the
/// least-squares solution for tall `W` and the minimal-norm solution for wide
/// `W`. Fails if `W` is numerically rank deficient.
fn svd_solve(w: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if w.nrows() != b.nrows() {
        return Err(DfolsError::DimensionMismatch(format!(
            "system has {} rows but right-hand side has {}",
            w.nrows(),
            b.nrows()
        )));
    }
    check_finite(w, "system matrix")?;
    check_finite(b, "right-hand side")?;
    let svd = w.clone().svd(true, true);
    let sigma = &svd.singular_values;
    let smax = sigma.max();
    if !(smax > 0.0) || sigma.iter().any(|&s| s < RANK_TOL * smax) {
        return Err(DfolsError::DegenerateSet);
    }
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let mut coeffs = u.tr_mul(b);
    for (i, mut row) in coeffs.row_iter_mut().enumerate() {
        row /= sigma[i];
    }
    Ok(v_t.tr_mul(&coeffs))
}

/// Left-to-right sum of squares, so every caller gets the same rounding.
pub fn sum_squares(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// Least-squares solution of the overdetermined (or square) system `W Z = B`.
///
/// `W` must have at least as many rows as columns and full column rank,
/// otherwise [`DfolsError::DegenerateSet`] is returned.
pub fn solve_regression(w: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if w.nrows() < w.ncols() {
        return Err(DfolsError::DimensionMismatch(format!(
            "regression needs at least as many rows as columns, got {}x{}",
            w.nrows(),
            w.ncols()
        )));
    }
    qr_solve(w, b).map_or_else(|| svd_solve(w, b), Ok)
}

/// Householder QR path for well-conditioned tall systems. Returns `None` when
/// the triangular factor looks close to singular so the caller can decide the
/// rank through the SVD.
fn qr_solve(w: &DenseMatrix, b: &DenseMatrix) -> Option<DenseMatrix> {
    if w.nrows() != b.nrows() || w.iter().chain(b.iter()).any(|v| !v.is_finite()) {
        return None;
    }
    let k = w.ncols();
    let qr = w.clone().qr();
    let r = qr.r();
    let diag: Vec<f64> = (0..k).map(|i| r[(i, i)].abs()).collect();
    let dmax = diag.iter().copied().fold(0.0, f64::max);
    if !(dmax > 0.0) || diag.iter().any(|&d| d < 1e-8 * dmax) {
        return None;
    }
    let mut qtb = b.clone();
    qr.q_tr_mul(&mut qtb);
    let rhs = qtb.rows(0, k).into_owned();
    r.solve_upper_triangular(&rhs)
}

/// Minimal Euclidean norm solution of the underdetermined (or square) system
/// `W Z = B`. `W` must have full row rank.
pub fn solve_min_norm(w: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if w.nrows() > w.ncols() {
        return Err(DfolsError::DimensionMismatch(format!(
            "minimal-norm solve needs at most as many rows as columns, got {}x{}",
            w.nrows(),
            w.ncols()
        )));
    }
    svd_solve(w, b)
}

/// Numerical rank with the relative threshold [`RANK_TOL`].
pub fn numerical_rank(m: &DenseMatrix) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sigma = m.clone().svd(false, false).singular_values;
    let smax = sigma.max();
    if !(smax > 0.0) {
        return 0;
    }
    sigma.iter().filter(|&&s| s >= RANK_TOL * smax).count()
}

/// Spectral norm of a symmetric matrix (largest absolute eigenvalue).
pub fn symmetric_spectral_norm(h: &DenseMatrix) -> f64 {
    if h.is_empty() {
        return 0.0;
    }
    h.clone().symmetric_eigenvalues().iter().fold(0.0f64, |a, &b| a.max(b.abs()))
}

/// Output of [`clamp_singular_values`].
#[derive(Debug, Clone)]
pub struct ClampedMatrix {
    pub matrix: DenseMatrix,
    /// Set when the leading `p` singular values were all numerically zero and
    /// the clamped directions received unit singular values instead.
    pub used_fallback: bool,
}

/// Raises the trailing singular values `sigma_{p+1}, ..., sigma_min(m,n)` of a
/// rank-`p` matrix to `sigma_p`, keeping the singular vectors.
///
/// When `sigma_p` is itself numerically zero, the raised values are set to 1.
pub fn clamp_singular_values(j: &DenseMatrix, p: usize) -> Result<ClampedMatrix> {
    check_finite(j, "matrix")?;
    let k = j.nrows().min(j.ncols());
    if p == 0 || p > j.ncols() {
        return Err(DfolsError::InvalidParameter(format!(
            "clamp rank {p} outside 1..={}",
            j.ncols()
        )));
    }
    if p >= k {
        return Ok(ClampedMatrix { matrix: j.clone(), used_fallback: false });
    }
    let svd = j.clone().svd(true, true);
    let mut sigma = svd.singular_values.clone();
    let smax = sigma[0];
    let floor = sigma[p - 1];
    let used_fallback = !(smax > 0.0) || floor < RANK_TOL * smax;
    let raised = if used_fallback { 1.0 } else { floor };
    for s in sigma.iter_mut().skip(p) {
        *s = raised;
    }
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let mut us = u;
    for (i, mut col) in us.column_iter_mut().enumerate() {
        col *= sigma[i];
    }
    Ok(ClampedMatrix { matrix: us * v_t, used_fallback })
}

/// Ordinary least-squares line through `(index, value)` pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub correlation: f64,
}

/// Fits `value = a + slope * index` and reports the Pearson correlation.
///
/// A constant sequence of values has slope 0 and correlation 0.
pub fn linear_fit(points: &[(f64, f64)]) -> Result<LinearFit> {
    if points.len() < 2 {
        return Err(DfolsError::InvalidParameter("linear fit needs at least two points".into()));
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(DfolsError::InvalidParameter("linear fit needs finite points".into()));
    }
    let len = points.len() as f64;
    let xbar = points.iter().map(|p| p.0).sum::<f64>() / len;
    let ybar = points.iter().map(|p| p.1).sum::<f64>() / len;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in points {
        let dx = x - xbar;
        let dy = y - ybar;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx <= 0.0 {
        return Err(DfolsError::InvalidParameter("linear fit needs distinct indices".into()));
    }
    let ymag = points.iter().map(|p| p.1.abs()).fold(0.0, f64::max);
    if syy <= len * (1e-14 * ymag).powi(2) {
        return Ok(LinearFit { slope: 0.0, correlation: 0.0 });
    }
    let slope = sxy / sxx;
    let correlation = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    Ok(LinearFit { slope, correlation })
}

/// Draws `k` orthonormal vectors in `R^n` from the Haar distribution (QR of a
/// Gaussian matrix with the sign of `R`'s diagonal absorbed into `Q`).
pub fn random_orthonormal<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Vec<DVector<f64>>> {
    if k == 0 || k > n {
        return Err(DfolsError::InvalidParameter(format!("need 1 <= k <= n, got k={k}, n={n}")));
    }
    let gauss = DMatrix::<f64>::from_fn(n, k, |_, _| rng.sample(StandardNormal));
    let qr = gauss.qr();
    let q = qr.q();
    let r = qr.r();
    Ok((0..k)
        .map(|j| {
            let sign = if r[(j, j)] < 0.0 { -1.0 } else { 1.0 };
            q.column(j) * sign
        })
        .collect())
}

/// Unit vector orthogonal to all `basis` vectors, drawn at random. Returns a
/// random unit vector when the basis already spans the space.
pub fn random_orthogonal_direction<R: Rng + ?Sized>(
    n: usize,
    basis: &[DVector<f64>],
    rng: &mut R,
) -> DVector<f64> {
    let q = orthonormal_basis(n, basis);
    for _ in 0..16 {
        let mut d = DVector::<f64>::from_fn(n, |_, _| rng.sample(StandardNormal));
        if q.len() < n {
            for qi in &q {
                let c = qi.dot(&d);
                d.axpy(-c, qi, 1.0);
            }
        }
        let norm = d.norm();
        if norm > 1e-8 {
            return d / norm;
        }
    }
    let mut e = DVector::zeros(n);
    e[0] = 1.0;
    e
}

/// Orthonormal basis (modified Gram-Schmidt with reorthogonalisation) of the
/// span of `vectors`; numerically dependent vectors are dropped.
pub fn orthonormal_basis(n: usize, vectors: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let mut q: Vec<DVector<f64>> = Vec::with_capacity(n);
    for v in vectors {
        let scale = v.norm();
        if scale == 0.0 {
            continue;
        }
        let mut w = v / scale;
        for _ in 0..2 {
            for qi in &q {
                let c = qi.dot(&w);
                w.axpy(-c, qi, 1.0);
            }
        }
        let norm = w.norm();
        if norm > 1e-10 {
            q.push(w / norm);
        }
        if q.len() == n {
            break;
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
        DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
    }

    /// Gaussian elimination with partial pivoting, used as an independent
    /// oracle for the SVD-based solves.
    fn gauss_solve(mut a: DenseMatrix, mut b: DVector<f64>) -> DVector<f64> {
        let n = a.nrows();
        for c in 0..n {
            let piv = (c..n).max_by(|&i, &j| a[(i, c)].abs().total_cmp(&a[(j, c)].abs())).unwrap();
            a.swap_rows(c, piv);
            b.swap_rows(c, piv);
            for r in c + 1..n {
                let f = a[(r, c)] / a[(c, c)];
                for k in c..n {
                    a[(r, k)] -= f * a[(c, k)];
                }
                b[r] -= f * b[c];
            }
        }
        let mut x = DVector::zeros(n);
        for r in (0..n).rev() {
            let s: f64 = (r + 1..n).map(|k| a[(r, k)] * x[k]).sum();
            x[r] = (b[r] - s) / a[(r, r)];
        }
        x
    }

    #[test]
    fn regression_identity() {
        let w = DenseMatrix::identity(3, 3);
        let b = DenseMatrix::from_column_slice(3, 1, &[1.0, 2.0, 3.0]);
        let z = solve_regression(&w, &b).unwrap();
        for i in 0..3 {
            assert!((z[(i, 0)] - (i as f64 + 1.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn regression_recovers_affine_function() {
        // f(y) = 0.5 + 2 y1 - 3 y2 sampled at 4 points
        let pts = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (0.7, -0.4)];
        let w = DMatrix::from_fn(4, 3, |r, c| match c {
            0 => 1.0,
            1 => pts[r].0,
            _ => pts[r].1,
        });
        let b = DMatrix::from_fn(4, 1, |r, _| 0.5 + 2.0 * pts[r].0 - 3.0 * pts[r].1);
        let z = solve_regression(&w, &b).unwrap();
        assert!((z[(0, 0)] - 0.5).abs() < 1e-12);
        assert!((z[(1, 0)] - 2.0).abs() < 1e-12);
        assert!((z[(2, 0)] + 3.0).abs() < 1e-12);
    }

    #[test]
    fn regression_matches_normal_equations_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let w = random_matrix(6, 3, &mut rng);
            let b = random_matrix(6, 1, &mut rng);
            let z = solve_regression(&w, &b).unwrap();
            let oracle = gauss_solve(w.tr_mul(&w), w.tr_mul(&b).column(0).into());
            assert!((z.column(0) - oracle).norm() < 1e-9);
        }
    }

    #[test]
    fn regression_rejects_rank_deficiency() {
        let w = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 6.0]);
        let b = DMatrix::zeros(3, 1);
        assert_eq!(solve_regression(&w, &b).unwrap_err(), DfolsError::DegenerateSet);
    }

    #[test]
    fn min_norm_forced_component() {
        // n=2, p=1: rows [1, 0, 0] and [1, 1, 0] (scaled by alpha=1), values (0, 1)
        let w = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 1.0, 1.0, 0.0]);
        let b = DMatrix::from_column_slice(2, 1, &[0.0, 1.0]);
        let z = solve_min_norm(&w, &b).unwrap();
        assert!(z[(0, 0)].abs() < 1e-14);
        assert!((z[(1, 0)] - 1.0).abs() < 1e-14);
        assert!(z[(2, 0)].abs() < 1e-14);
    }

    #[test]
    fn min_norm_zero_rhs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let w = random_matrix(2, 5, &mut rng);
        let z = solve_min_norm(&w, &DMatrix::zeros(2, 3)).unwrap();
        assert!(z.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn min_norm_matches_pseudoinverse_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let w = random_matrix(3, 7, &mut rng);
            let b = random_matrix(3, 1, &mut rng);
            let z = solve_min_norm(&w, &b).unwrap();
            let y = gauss_solve(&w * w.transpose(), b.column(0).into());
            let oracle = w.transpose() * y;
            assert!((z.column(0) - oracle).norm() < 1e-9);
        }
    }

    #[test]
    fn clamp_diagonal() {
        let j = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 1.0, 0.0]));
        let out = clamp_singular_values(&j, 2).unwrap();
        let s = out.matrix.svd(false, false).singular_values;
        assert!((s[0] - 2.0).abs() < 1e-14 && (s[1] - 1.0).abs() < 1e-14 && (s[2] - 1.0).abs() < 1e-14);
        assert!(!out.used_fallback);
    }

    #[test]
    fn clamp_last_singular_value_oracle() {
        // p = n-1 with sigma_{n-1} = 0.5
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u = random_orthonormal(5, 4, &mut rng).unwrap();
        let v = random_orthonormal(4, 4, &mut rng).unwrap();
        let sig = [3.0, 1.5, 0.5, 0.0];
        let mut j = DMatrix::zeros(5, 4);
        for i in 0..4 {
            j += &u[i] * v[i].transpose() * sig[i];
        }
        let out = clamp_singular_values(&j, 3).unwrap();
        let s = out.matrix.clone().svd(false, false).singular_values;
        let smin = s.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!((smin - 0.5).abs() < 1e-12);
        assert_eq!(numerical_rank(&out.matrix), 4);
    }

    #[test]
    fn clamp_preserves_leading_subspaces() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let (m, n, p) = (8, 6, 3);
        let a = random_matrix(m, p, &mut rng);
        let b = random_matrix(p, n, &mut rng);
        let j = &a * &b;
        assert_eq!(numerical_rank(&j), p);
        let out = clamp_singular_values(&j, p).unwrap().matrix;
        assert_eq!(numerical_rank(&out), n);
        let before = j.clone().svd(true, true);
        let after = out.svd(true, true);
        // sigma_p is repeated after clamping, so only the leading p - 1
        // singular subspaces are unique; their principal angles must vanish
        let k = p - 1;
        let ub = before.u.unwrap().columns(0, k).into_owned();
        let ua = after.u.unwrap().columns(0, k).into_owned();
        let cos_u = (ub.transpose() * ua).svd(false, false).singular_values;
        let vb = before.v_t.unwrap().rows(0, k).into_owned();
        let va = after.v_t.unwrap().rows(0, k).into_owned();
        let cos_v = (vb * va.transpose()).svd(false, false).singular_values;
        for c in cos_u.iter().chain(cos_v.iter()) {
            assert!((c - 1.0).abs() < 1e-8, "cosine {c}");
        }
    }

    #[test]
    fn clamp_zero_matrix_uses_fallback() {
        let out = clamp_singular_values(&DMatrix::zeros(3, 3), 1).unwrap();
        assert!(out.used_fallback);
    }

    #[test]
    fn fit_exact_line() {
        let pts: Vec<_> = (0..10).map(|k| (k as f64, 2.0 * k as f64 + 1.0)).collect();
        let fit = linear_fit(&pts).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!((fit.correlation - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fit_constant_values() {
        let pts: Vec<_> = (0..10).map(|k| (k as f64, 0.3)).collect();
        let fit = linear_fit(&pts).unwrap();
        assert_eq!(fit, LinearFit { slope: 0.0, correlation: 0.0 });
    }

    #[test]
    fn fit_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pts: Vec<(f64, f64)> = (0..30)
            .map(|k| {
                let e: f64 = rng.sample(StandardNormal);
                (k as f64, 0.3 * k as f64 - 2.0 + e)
            })
            .collect();
        // textbook sums formulation
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let syy: f64 = pts.iter().map(|p| p.1 * p.1).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        let corr = (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt());
        let fit = linear_fit(&pts).unwrap();
        assert!((fit.slope - slope).abs() < 1e-10);
        assert!((fit.correlation - corr).abs() < 1e-10);
    }

    #[test]
    fn fit_needs_two_points() {
        assert!(linear_fit(&[(0.0, 1.0)]).is_err());
    }

    #[test]
    fn orthonormal_one_dimensional() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let q = random_orthonormal(1, 1, &mut rng).unwrap();
        assert!((q[0][0].abs() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn orthonormal_full_square() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let q = random_orthonormal(5, 5, &mut rng).unwrap();
        let m = DMatrix::from_columns(&q);
        let gram = m.tr_mul(&m);
        assert!((gram - DMatrix::identity(5, 5)).amax() < 1e-12);
    }

    #[test]
    fn orthonormal_is_reproducible() {
        let a = random_orthonormal(10, 4, &mut ChaCha8Rng::seed_from_u64(77)).unwrap();
        let b = random_orthonormal(10, 4, &mut ChaCha8Rng::seed_from_u64(77)).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!(x.iter().zip(y.iter()).all(|(p, q)| p.to_bits() == q.to_bits()));
        }
    }

    #[test]
    fn orthogonal_direction_is_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let basis = random_orthonormal(5, 3, &mut rng).unwrap();
        let d = random_orthogonal_direction(5, &basis, &mut rng);
        assert!((d.norm() - 1.0).abs() < 1e-12);
        for b in &basis {
            assert!(b.dot(&d).abs() < 1e-10);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = DenseMatrix> {
            proptest::collection::vec(-10.0f64..10.0, rows * cols)
                .prop_map(move |v| DMatrix::from_vec(rows, cols, v))
        }

        proptest! {
            #[test]
            fn regression_normal_equations_residual(w in matrix(7, 4), b in matrix(7, 2)) {
                prop_assume!(numerical_rank(&w) == 4);
                let cond = { let s = w.clone().svd(false, false).singular_values; s.max() / s.min() };
                prop_assume!(cond < 1e6);
                let z = solve_regression(&w, &b).unwrap();
                for c in 0..2 {
                    let resid = w.tr_mul(&(&w * z.column(c) - b.column(c)));
                    let scale = w.tr_mul(&b.column(c).into_owned()).norm();
                    prop_assert!(resid.norm() <= 1e-8 * scale.max(1e-300));
                }
            }

            #[test]
            fn min_norm_lies_in_row_space(w in matrix(3, 6), b in matrix(3, 1)) {
                let s = w.clone().svd(false, false).singular_values;
                prop_assume!(s.min() > 1e-3 * s.max());
                let z = solve_min_norm(&w, &b).unwrap();
                let wwt = &w * w.transpose();
                let inv = wwt.try_inverse().unwrap();
                let proj = DMatrix::identity(6, 6) - w.transpose() * inv * &w;
                let zc = z.column(0).into_owned();
                prop_assert!((proj * &zc).norm() <= 1e-8 * zc.norm().max(1e-300));
            }

            #[test]
            fn clamp_is_idempotent(a in matrix(6, 2), b in matrix(2, 4)) {
                let j = &a * &b;
                prop_assume!(numerical_rank(&j) == 2);
                let s = j.clone().svd(false, false).singular_values;
                prop_assume!(s[1] > 1e-3 * s[0]);
                let once = clamp_singular_values(&j, 2).unwrap().matrix;
                let twice = clamp_singular_values(&once, 2).unwrap().matrix;
                prop_assert!((&once - &twice).amax() <= 1e-12 * once.amax().max(1.0));
            }

            #[test]
            fn fit_shift_and_scale(vals in proptest::collection::vec(-5.0f64..5.0, 3..40), shift in -100.0f64..100.0, scale in 0.1f64..10.0) {
                let pts: Vec<_> = vals.iter().enumerate().map(|(k, &v)| (k as f64, v)).collect();
                let base = linear_fit(&pts).unwrap();
                prop_assume!(base.correlation != 0.0);
                let shifted: Vec<_> = pts.iter().map(|&(k, v)| (k, v + shift)).collect();
                let scaled: Vec<_> = pts.iter().map(|&(k, v)| (k, scale * v)).collect();
                let fs = linear_fit(&shifted).unwrap();
                let fc = linear_fit(&scaled).unwrap();
                prop_assert!((fs.slope - base.slope).abs() <= 1e-9 * (1.0 + base.slope.abs()));
                prop_assert!((fs.correlation - base.correlation).abs() <= 1e-9);
                prop_assert!((fc.slope - scale * base.slope).abs() <= 1e-9 * (1.0 + (scale * base.slope).abs()));
                prop_assert!((fc.correlation.abs() - base.correlation.abs()).abs() <= 1e-9);
            }
        }
    }
}
