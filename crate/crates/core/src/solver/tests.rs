use super::*;
use proptest::prelude::*;

fn rosenbrock(x: &[f64]) -> Vec<f64> {
    vec![10.0 * (x[1] - x[0] * x[0]), 1.0 - x[0]]
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt()
}

#[test]
fn rosenbrock_converges() {
    let mut p = SolverParams::smooth();
    p.max_evals = Some(2000);
    let res = solve(rosenbrock, &[-1.2, 1.0], None, &p, 0).unwrap();
    assert!(res.f < 1e-10, "f = {}", res.f);
    assert!(dist(&res.x, &[1.0, 1.0]) < 1e-4);
    assert_eq!(res.exit_flag, ExitFlag::SmallObjective);
    assert_eq!(res.diagnostics.cauchy.violations, 0);
}

#[test]
fn affine_residuals_match_normal_equations() {
    let a = DMatrix::from_row_slice(4, 3, &[1.0, 2.0, 0.5, -1.0, 0.3, 2.0, 0.0, 1.0, -1.5, 2.0, 0.0, 1.0]);
    let b = DVector::from_vec(vec![1.0, -2.0, 0.5, 3.0]);
    let ata = a.transpose() * &a;
    let atb = a.transpose() * &b;
    let oracle = ata.cholesky().unwrap().solve(&atb);
    let f_star = (&a * &oracle - &b).norm_squared();
    let residual = |x: &[f64]| (&a * DVector::from_column_slice(x) - &b).as_slice().to_vec();
    let res = solve(residual, &[0.0, 0.0, 0.0], None, &SolverParams::smooth(), 3).unwrap();
    assert!(dist(&res.x, oracle.as_slice()) < 1e-6, "{:?} vs {:?}", res.x, oracle);
    assert!((res.f - f_star).abs() < 1e-10 * f_star.max(1.0));
}

#[test]
fn same_seed_same_result() {
    let mut p = SolverParams::noisy();
    p.max_evals = Some(300);
    let run = |seed| solve(rosenbrock, &[-1.2, 1.0], None, &p, seed).unwrap();
    let a = run(5);
    let b = run(5);
    assert_eq!(a.x, b.x);
    assert_eq!(a.n_evals, b.n_evals);
    assert_eq!(a.diagnostics.trace, b.diagnostics.trace);
}

#[test]
fn observer_sees_every_evaluation() {
    let mut seen = Vec::new();
    let mut p = SolverParams::smooth();
    p.max_evals = Some(150);
    p.nsamples = SamplingPolicy::Const(3);
    let res = solve_observed(rosenbrock, &[-1.2, 1.0], None, &p, 1, |e: &Evaluation| {
        seen.push((e.eval_index, e.samples, e.f));
    })
    .unwrap();
    let mut prev = 0;
    for &(idx, samples, _) in &seen {
        assert_eq!(idx, prev + samples);
        prev = idx;
    }
    assert_eq!(prev, res.n_evals);
    assert!(res.n_evals <= 150);
    let best = seen.iter().map(|s| s.2).fold(f64::INFINITY, f64::min);
    assert_eq!(best, res.f);
}

#[test]
fn zero_residual_at_start_exits_immediately() {
    let res = solve(|_: &[f64]| vec![0.0, 0.0], &[1.0, 2.0], None, &SolverParams::smooth(), 0).unwrap();
    assert_eq!(res.exit_flag, ExitFlag::SmallObjective);
    assert_eq!(res.n_evals, 1);
}

#[test]
fn failure_at_start_is_an_error() {
    let err = solve(|_: &[f64]| vec![f64::NAN], &[1.0], None, &SolverParams::smooth(), 0).unwrap_err();
    assert!(matches!(err, DfolsError::EvaluationFailed(_)));
}

#[test]
fn failed_evaluations_are_skipped() {
    let residual = |x: &[f64]| {
        if x[0] > 1.05 {
            vec![f64::NAN, f64::NAN]
        } else {
            rosenbrock(x)
        }
    };
    let mut p = SolverParams::smooth();
    p.max_evals = Some(3000);
    let res = solve(residual, &[-1.2, 1.0], None, &p, 2).unwrap();
    assert!(res.f < 1e-8, "f = {}", res.f);
}

#[test]
fn budget_is_respected() {
    for max in [1, 2, 3, 10, 37] {
        let mut p = SolverParams::noisy();
        p.max_evals = Some(max);
        p.nsamples = SamplingPolicy::Const(4);
        let res = solve(rosenbrock, &[-1.2, 1.0], None, &p, 0).unwrap();
        assert!(res.n_evals <= max);
        assert_eq!(res.exit_flag, ExitFlag::Budget);
    }
}

#[test]
fn bounds_are_respected() {
    let b = Bounds::new(vec![-2.0, -2.0], vec![0.5, 2.0]).unwrap();
    let mut inside = true;
    let mut p = SolverParams::smooth();
    p.max_evals = Some(1000);
    let res = solve_observed(rosenbrock, &[-1.2, 1.0], Some(&b), &p, 4, |e: &Evaluation| {
        inside &= b.contains(&DVector::from_column_slice(e.x));
    })
    .unwrap();
    assert!(inside);
    // constrained minimiser of the Rosenbrock function on x0 <= 0.5
    assert!(dist(&res.x, &[0.5, 0.25]) < 1e-4, "{:?}", res.x);
}

#[test]
fn scaled_and_unscaled_agree() {
    let b = Bounds::new(vec![-5.0, -3.0], vec![5.0, 10.0]).unwrap();
    let mut p = SolverParams::smooth();
    p.max_evals = Some(3000);
    let plain = solve(rosenbrock, &[-1.2, 1.0], Some(&b), &p, 0).unwrap();
    p.scale_variables = true;
    let scaled = solve(rosenbrock, &[-1.2, 1.0], Some(&b), &p, 0).unwrap();
    assert!(plain.f < 1e-10 && scaled.f < 1e-10, "{} {}", plain.f, scaled.f);
    assert!(dist(&plain.x, &scaled.x) < 1e-4);
}

#[test]
fn scaling_needs_finite_bounds() {
    let mut p = SolverParams::smooth();
    p.scale_variables = true;
    assert_eq!(solve(rosenbrock, &[0.0, 0.0], None, &p, 0).unwrap_err(), DfolsError::InfiniteBounds);
}

fn linear_residual(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut r: Vec<f64> = (0..n).map(|i| (i as f64 + 1.0) * x[i] - 1.0).collect();
    r.push(x.iter().sum::<f64>() - 0.5 * n as f64);
    r
}

#[test]
fn growing_modes_converge_from_one_point() {
    for growing in [GrowingMode::SvdRepair, GrowingMode::PerturbStep] {
        let mut p = SolverParams::smooth();
        p.p_init = Some(1);
        p.growing = growing;
        p.max_evals = Some(600);
        let res = solve(linear_residual, &[0.0; 5], None, &p, 7).unwrap();
        let first_full = res.diagnostics.trace.iter().position(|r| r.set_size == 6).unwrap();
        assert!(first_full >= 1, "{growing:?}");
        let full = solve(linear_residual, &[0.0; 5], None, &SolverParams::smooth(), 7).unwrap();
        assert!((res.f - full.f).abs() < 1e-8 * full.f.max(1.0), "{growing:?}: {} vs {}", res.f, full.f);
    }
}

#[test]
fn safety_growth_fills_the_set() {
    // the optimum is much closer than gamma_s * rho, so model steps are tiny
    // and the set must grow through the safety phase
    let mut p = SolverParams::smooth();
    p.p_init = Some(1);
    p.growing = GrowingMode::PerturbStep;
    p.max_evals = Some(60);
    let res = solve(|x: &[f64]| vec![x[0] - 1e-4, x[1] - 1e-4, x[2] - 1e-4, 1.0], &[0.0, 0.0, 0.0], None, &p, 0).unwrap();
    let trace = &res.diagnostics.trace;
    assert!(trace.iter().any(|r| r.phase == Phase::SafetyGrowing));
    assert!(trace.iter().any(|r| r.set_size == 4));
    for w in trace.windows(2) {
        assert!(w[1].set_size >= w[0].set_size);
    }
}

#[test]
fn hard_restart_evaluates_p_points() {
    let mut p = SolverParams::noisy();
    let mut r = RestartParams { kind: RestartKind::Hard, ..RestartParams::default() };
    r.autodetect = false;
    p.restarts = Some(r);
    p.rho_end = 1e-3;
    p.slow_decrease = None;
    p.max_evals = Some(200);
    let res = solve(|x: &[f64]| vec![x[0] - 0.3, x[1] + 0.2, x[2], 1.0], &[1.0, 1.0, 1.0], None, &p, 0).unwrap();
    let restarts: Vec<&IterationRecord> =
        res.diagnostics.trace.iter().filter(|r| r.phase == Phase::Restart).collect();
    assert!(!restarts.is_empty());
    for (rec, start) in restarts.iter().zip(&res.diagnostics.restart_evals) {
        if rec.n_evals < 200 {
            assert_eq!(rec.n_evals - start, 3);
            assert_eq!(rec.set_size, 4);
        }
    }
}

#[test]
fn soft_restarts_move_n_points() {
    for kind in [RestartKind::SoftMoving, RestartKind::SoftFixed] {
        let mut p = SolverParams::noisy();
        p.restarts = Some(RestartParams { kind, autodetect: false, ..RestartParams::default() });
        p.rho_end = 1e-3;
        p.slow_decrease = None;
        p.max_evals = Some(300);
        let res = solve(|x: &[f64]| vec![x[0] - 0.3, x[1] + 0.2, x[2], x[3], 1.0], &[1.0; 4], None, &p, 1).unwrap();
        let restarts: Vec<&IterationRecord> =
            res.diagnostics.trace.iter().filter(|r| r.phase == Phase::Restart).collect();
        assert!(!restarts.is_empty(), "{kind:?}");
        for (rec, start) in restarts.iter().zip(&res.diagnostics.restart_evals) {
            if rec.n_evals < 300 {
                assert_eq!(rec.n_evals - start, 3, "{kind:?}");
                assert_eq!(rec.delta, rec.rho);
            }
        }
    }
}

#[test]
fn restarts_stop_without_progress() {
    let mut p = SolverParams::noisy();
    p.restarts = Some(RestartParams { max_unsuccessful: 2, autodetect: false, ..RestartParams::default() });
    p.rho_end = 1e-2;
    p.slow_decrease = None;
    p.max_evals = Some(100_000);
    let res = solve(|x: &[f64]| vec![x[0], x[1]], &[1.0, 1.0], None, &p, 0);
    let res = res.unwrap();
    assert!(matches!(res.exit_flag, ExitFlag::RestartsExhausted | ExitFlag::SmallObjective));
    assert!(res.n_evals < 100_000);
}

#[test]
fn regression_with_multi_move() {
    for mm in [MultiMove::Geometry, MultiMove::Momentum] {
        let mut p = SolverParams::smooth();
        p.p = Some(8);
        p.multi_move = mm;
        p.multi_move_count = 2;
        p.max_evals = Some(2000);
        let res = solve(rosenbrock, &[-1.2, 1.0], None, &p, 11).unwrap();
        assert!(res.f < 1e-8, "{mm:?}: f = {}", res.f);
    }
}

#[test]
fn noise_level_termination_fires() {
    let mut p = SolverParams::smooth();
    p.noise_level = Some(NoiseLevelParams { level: 1e-2, kind: NoiseLevelKind::Multiplicative, constant: 1.0 });
    p.max_evals = Some(5000);
    let res = solve(|x: &[f64]| vec![x[0] - 1.0, x[1] + 0.5, 1.0], &[3.0, 2.0], None, &p, 0).unwrap();
    assert_eq!(res.exit_flag, ExitFlag::NoiseLevel);
}

#[test]
fn tiny_rho_end_gives_small_trust_region() {
    let mut p = SolverParams::smooth();
    p.rho_end = 1e-3;
    p.max_evals = Some(5000);
    // nonzero minimum so the objective test cannot fire
    let res = solve(|x: &[f64]| vec![x[0] - 1.0, x[0] + 1.0, x[1]], &[3.0, 2.0], None, &p, 0).unwrap();
    assert!(matches!(res.exit_flag, ExitFlag::SmallTrustRegion | ExitFlag::SlowProgress));
    assert!((res.f - 2.0).abs() < 1e-4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn momentum_moves_with_the_step(seed in 0u64..1000, sx in -1.0f64..1.0, sy in -1.0f64..1.0, sz in -1.0f64..1.0) {
        prop_assume!(sx.abs() + sy.abs() + sz.abs() > 1e-3);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let center = DVector::from_vec(vec![0.2, -0.1, 0.4]);
        let step = DVector::from_vec(vec![sx, sy, sz]);
        let y = momentum_point(&center, &step, 0.3, None, 3, &mut rng);
        let d = &y - &center;
        prop_assert!((d.norm() - 0.3).abs() < 1e-12);
        prop_assert!(d.dot(&step) > 0.0);
    }

    #[test]
    fn momentum_stays_feasible(seed in 0u64..1000, cx in 0.0f64..1.0, cy in 0.0f64..1.0) {
        let b = Bounds::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let center = DVector::from_vec(vec![cx, cy]);
        let step = DVector::from_vec(vec![1.0, 0.5]);
        let y = momentum_point(&center, &step, 0.4, Some(&b), 2, &mut rng);
        prop_assert!(b.contains(&y));
        prop_assert!((&y - &center).norm() <= 0.4 + 1e-12);
    }

    #[test]
    fn evaluations_never_exceed_budget(max in 1usize..60, k in 1usize..5, seed in 0u64..50) {
        let mut p = SolverParams::noisy();
        p.max_evals = Some(max);
        p.nsamples = SamplingPolicy::Const(k);
        let res = solve(rosenbrock, &[-1.2, 1.0], None, &p, seed).unwrap();
        prop_assert!(res.n_evals <= max);
    }
}
