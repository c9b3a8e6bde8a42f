//! Shift-rule estimators checked against independent finite-difference oracles.

use core::f64::consts::{FRAC_PI_4, PI};

use nalgebra::DMatrix;
use qnggc_core::circuits::{efficient_su2, state_ex1, state_ex2, StateFamily};
use qnggc_core::geometry::{
    analytic_christoffel_ex1, analytic_inverse_metric_ex2, analytic_metric_ex1, analytic_metric_ex2,
    christoffel_diag_shift, christoffel_from_diag_derivatives, christoffel_from_metric_fd, fs_metric_diag,
    fs_metric_full, metric_diag_derivative, qgt_metric_oracle, rescale_geometry, DerivativeRule, MetricBundle, FD_STEP,
};
use qnggc_core::gradients::{analytic_cost_ex2, analytic_gradient_ex2, CostFunction};
use qnggc_core::observables::{hamiltonian_h2, hamiltonian_tfim};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_theta(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-PI..PI)).collect()
}

fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).abs().max()
}

#[test]
fn shift_gradient_matches_finite_differences() {
    let cf = CostFunction::new(efficient_su2(3).unwrap(), hamiltonian_tfim(3, 1.5).unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..5 {
        let theta = random_theta(&mut rng, cf.n_params());
        let shift = cf.parameter_shift_gradient(&theta).unwrap();
        let fd = cf.finite_difference_gradient(&theta, FD_STEP).unwrap();
        for (a, b) in shift.iter().zip(&fd) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }
}

#[test]
fn shift_metric_matches_qgt_oracle() {
    let c = efficient_su2(2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..5 {
        let theta = random_theta(&mut rng, 8);
        let shift = fs_metric_full(&c, &theta).unwrap();
        let oracle = qgt_metric_oracle(|t| c.prepare(t), &theta, FD_STEP).unwrap();
        assert!(max_abs_diff(shift.matrix(), oracle.matrix()) < 1e-6);
        let diag = fs_metric_diag(&c, &theta).unwrap();
        for i in 0..8 {
            assert!((diag.diagonal_entry(i) - shift.diagonal_entry(i)).abs() < 1e-10);
        }
    }
}

#[test]
fn closed_form_metrics_match_qgt_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..10 {
        let t = random_theta(&mut rng, 2);
        let oracle = qgt_metric_oracle(state_ex1, &t, FD_STEP).unwrap();
        assert!(max_abs_diff(oracle.matrix(), analytic_metric_ex1(&[t[0], t[1]]).matrix()) < 1e-6);

        let t = random_theta(&mut rng, 3);
        let oracle = qgt_metric_oracle(state_ex2, &t, FD_STEP).unwrap();
        assert!(max_abs_diff(oracle.matrix(), analytic_metric_ex2(&[t[0], t[1], t[2]]).matrix()) < 1e-6);
    }
}

#[test]
fn ex2_closed_forms_match_state() {
    let h = hamiltonian_h2(0.4, 0.2);
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..10 {
        let t = random_theta(&mut rng, 3);
        let arr = [t[0], t[1], t[2]];
        let e = qnggc_core::statevector::expectation(&state_ex2(&t).unwrap(), &h).unwrap();
        assert!((e - analytic_cost_ex2(&arr, 0.4, 0.2)).abs() < 1e-12);
        let fd = qnggc_core::gradients::finite_difference_gradient(
            |x| Ok(analytic_cost_ex2(&[x[0], x[1], x[2]], 0.4, 0.2)),
            &t,
            FD_STEP,
        )
        .unwrap();
        for (a, b) in analytic_gradient_ex2(&arr, 0.4, 0.2).iter().zip(&fd) {
            assert!((a - b).abs() < 1e-7);
        }
    }
}

#[test]
fn ex2_inverse_metric_inverts_regularized_metric() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for lambda in [1e-6, 1e-2] {
        for _ in 0..10 {
            let t = random_theta(&mut rng, 3);
            let arr = [t[0], t[1], t[2]];
            let g = analytic_metric_ex2(&arr).regularize(lambda).unwrap();
            let inv = analytic_inverse_metric_ex2(&arr, lambda).unwrap();
            let prod = g.matrix() * &inv;
            assert!(max_abs_diff(&prod, &DMatrix::identity(3, 3)) < 1e-8, "λ={lambda}");
        }
    }
    assert!(analytic_inverse_metric_ex2(&[0.1, 0.2, 0.3], 0.0).is_err());
}

#[test]
fn ex1_christoffels_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let mut checked = 0;
    while checked < 10 {
        let t = random_theta(&mut rng, 2);
        if libm::sin(2.0 * t[0]).abs() < 0.2 {
            continue;
        }
        let fd = christoffel_from_metric_fd(|x| Ok(analytic_metric_ex1(&[x[0], x[1]])), &t, FD_STEP).unwrap();
        let exact = analytic_christoffel_ex1(&[t[0], t[1]]).unwrap();
        assert!(fd.max_difference(&exact) < 1e-6);
        checked += 1;
    }
    assert!(analytic_christoffel_ex1(&[0.0, 0.3]).is_err());
    assert!(analytic_christoffel_ex1(&[FRAC_PI_4, 0.3]).is_ok());
}

#[test]
fn diag_metric_derivative_matches_finite_differences() {
    let c = efficient_su2(2).unwrap();
    let theta = random_theta(&mut ChaCha8Rng::seed_from_u64(17), 8);
    for j in 0..8 {
        for k in 0..8 {
            let exact = metric_diag_derivative(&c, &theta, j, k, DerivativeRule::Symmetric).unwrap();
            let mut p = theta.clone();
            p[k] += FD_STEP;
            let plus = fs_metric_diag(&c, &p).unwrap().diagonal_entry(j);
            p[k] = theta[k] - FD_STEP;
            let minus = fs_metric_diag(&c, &p).unwrap().diagonal_entry(j);
            let fd = (plus - minus) / (2.0 * FD_STEP);
            assert!((exact - fd).abs() < 1e-7, "∂_{k} g_{j}{j}: {exact} vs {fd}");
        }
    }
}

#[test]
fn shift_christoffels_match_assembled_finite_differences() {
    let c = efficient_su2(2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    for _ in 0..3 {
        let theta = random_theta(&mut rng, 8);
        let g = fs_metric_diag(&c, &theta).unwrap().regularize(1e-6).unwrap();
        let shift = christoffel_diag_shift(&c, &theta, &g, 1e-6, DerivativeRule::Symmetric).unwrap();

        let mut derivs = DMatrix::zeros(8, 8);
        let mut p = theta.clone();
        for k in 0..8 {
            p[k] = theta[k] + FD_STEP;
            let plus = fs_metric_diag(&c, &p).unwrap();
            p[k] = theta[k] - FD_STEP;
            let minus = fs_metric_diag(&c, &p).unwrap();
            p[k] = theta[k];
            for a in 0..8 {
                derivs[(a, k)] = (plus.diagonal_entry(a) - minus.diagonal_entry(a)) / (2.0 * FD_STEP);
            }
        }
        let assembled = christoffel_from_diag_derivatives(&g, &derivs, 1e-6).unwrap();
        assert!(shift.max_difference(&assembled) < 1e-5);

        let field = christoffel_from_metric_fd(|t| fs_metric_diag(&c, t)?.regularize(1e-6), &theta, FD_STEP).unwrap();
        assert!(shift.max_difference(&field) < 1e-5);
    }
}

#[test]
fn rescaling_matches_reparameterized_finite_differences() {
    // ψ(θ) = ex1 state at (2θ₀, θ₁/3)
    let scales = [2.0, 1.0 / 3.0];
    let theta = [0.2, 0.9];
    let a = [scales[0] * theta[0], scales[1] * theta[1]];
    let grad_a = qnggc_core::gradients::analytic_gradient_ex1(&a);
    let (grad, metric, gamma) =
        rescale_geometry(&grad_a, &analytic_metric_ex1(&a), &analytic_christoffel_ex1(&a).unwrap(), &scales).unwrap();

    let cost = |t: &[f64]| Ok(qnggc_core::gradients::analytic_cost_ex1(&[scales[0] * t[0], scales[1] * t[1]]));
    let fd_grad = qnggc_core::gradients::finite_difference_gradient(cost, &theta, FD_STEP).unwrap();
    let fd_metric = qgt_metric_oracle(|x| state_ex1(&[scales[0] * x[0], scales[1] * x[1]]), &theta, FD_STEP).unwrap();
    let fd_gamma = christoffel_from_metric_fd(
        |t| {
            let s = libm::sin(2.0 * scales[0] * t[0]);
            Ok(MetricBundle::from_diagonal(
                &[scales[0] * scales[0], s * s * scales[1] * scales[1]],
                qnggc_core::geometry::Provenance::Analytic,
            ))
        },
        &theta,
        FD_STEP,
    )
    .unwrap();

    for (x, y) in grad.iter().zip(&fd_grad) {
        assert!((x - y).abs() < 1e-7);
    }
    assert!(max_abs_diff(metric.matrix(), fd_metric.matrix()) < 1e-6);
    assert!(gamma.max_difference(&fd_gamma) < 1e-6);
}
