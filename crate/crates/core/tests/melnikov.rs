use heteroclinic_core::melnikov::*;
use heteroclinic_core::model::{heteroclinic_x1, ModelParams, Saddle};
use heteroclinic_core::ode::IntegratorConfig;
use heteroclinic_core::special::{connection_coefficients, hypergeom_params};
use nalgebra::{Matrix2, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pm(b1: f64, b2: f64, w: f64) -> ModelParams {
    ModelParams::new(b1, b2, w).unwrap()
}

fn random_params(rng: &mut ChaCha8Rng) -> ModelParams {
    let w = rng.gen_range(1.5..2.5);
    let b2 = rng.gen_range(0.0..(w * w - 0.5));
    let b1 = rng.gen_range(-0.9..0.9) * (w * w - b2);
    pm(b1, b2, w)
}

#[test]
fn psi_asymptotics_and_determinant() {
    let p = pm(0.005, 2.0, 2.0);
    let psi = fundamental_matrix_psi(-40.0, &p).unwrap();
    let phi = phi_matrix(-40.0, &p, Saddle::Left);
    assert!((psi - phi).abs().max() < 1e-7);
    let d0 = fundamental_matrix_psi(-20.0, &p).unwrap().determinant();
    let mut t = -20.0;
    while t <= 20.0 {
        let d = fundamental_matrix_psi(t, &p).unwrap().determinant();
        assert!((d - d0).abs() < 1e-9, "t = {t}");
        t += 0.5;
    }
}

#[test]
fn psi_solves_the_nve() {
    let p = pm(0.005, 2.0, 2.0);
    let h = 1e-5;
    for k in -20..=20 {
        let t = k as f64 * 0.5;
        let dpsi = (fundamental_matrix_psi(t + h, &p).unwrap() - fundamental_matrix_psi(t - h, &p).unwrap()) / (2.0 * h);
        let x1 = heteroclinic_x1(t);
        let q = p.omega() * p.omega() - p.beta1() * x1 - p.beta2() * x1 * x1;
        let a = Matrix2::new(0.0, 1.0, -q, 0.0);
        let residual = dpsi - a * fundamental_matrix_psi(t, &p).unwrap();
        assert!(residual.abs().max() < 1e-8, "t = {t}");
    }
}

#[test]
fn numeric_limits_examples() {
    let p = pm(0.005, 2.0, 2.0);
    let b = b_matrices_numeric(&p, DEFAULT_T_LIMIT, &IntegratorConfig::analysis()).unwrap();
    assert!((b.b_minus - Matrix2::identity()).abs().max() < 1e-6);
    assert!((b.b0 - b0_analytic(&p).unwrap()).abs().max() < 1e-6);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..10 {
        let p = random_params(&mut rng);
        let b = b_matrices_numeric(&p, DEFAULT_T_LIMIT, &IntegratorConfig::analysis()).unwrap();
        assert!((b.b0.determinant() - 1.0).abs() < 1e-8, "{p:?}");
    }
}

#[test]
fn analytic_b0_unimodular_on_grid() {
    for i in 0..10 {
        for j in 0..10 {
            for w in [2.0, 2.5, 3.0] {
                let b2 = 0.05 + 3.0 * j as f64 / 9.0;
                let b1 = (w * w - b2) * (-0.9 + 1.8 * i as f64 / 9.0);
                let b0 = b0_analytic(&pm(b1, b2, w)).unwrap();
                assert!((b0.determinant() - 1.0).abs() < 1e-10, "({b1}, {b2}, {w})");
            }
        }
    }
}

#[test]
fn det_r_formula_matches_assembled_matrix() {
    for i in 0..5 {
        for j in 0..5 {
            for w in [2.0, 2.5] {
                let p = pm(0.2 * i as f64 / 4.0, 0.5 + 2.5 * j as f64 / 4.0, w);
                let r = r_matrix_and_classification(&p).unwrap();
                assert!((r.r_matrix - r.r_matrix.transpose()).abs().max() < 1e-12);
                let scale = r.det_r.abs().max(r.r_matrix.norm().powi(2)).max(1e-12);
                assert!((r.det_r - r.det_r_formula).abs() < 1e-8 * scale, "{p:?}");
            }
        }
    }
}

#[test]
fn equal_frequencies_never_miss_or_double() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..20 {
        let w = rng.gen_range(1.5..2.5);
        let p = pm(0.0, rng.gen_range(0.0..(w * w - 0.3)), w);
        let c = r_matrix_and_classification(&p).unwrap().classification;
        assert!(c != ZeroStructure::NoZero && c != ZeroStructure::DoubleZeros, "{p:?}: {c:?}");
    }
}

#[test]
fn unequal_frequencies_never_identically_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..40 {
        let p = random_params(&mut rng);
        if p.beta1().abs() < 1e-3 {
            continue;
        }
        let c = r_matrix_and_classification(&p).unwrap().classification;
        assert_ne!(c, ZeroStructure::IdenticallyZero, "{p:?}");
    }
}

#[test]
fn g_sign_opposes_det_r() {
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    for _ in 0..100 {
        let p = random_params(&mut rng);
        let r = r_matrix_and_classification(&p).unwrap();
        if r.g_value.abs() > 1e-10 * g_scale(&p).unwrap() {
            assert_eq!(r.g_value > 0.0, r.det_r < 0.0, "{p:?}");
        }
    }
    for i in 0..20 {
        let p = pm(0.001 * i as f64, 2.0, 2.0);
        let r = r_matrix_and_classification(&p).unwrap();
        assert_eq!(r.g_value > 0.0, r.classification == ZeroStructure::SimpleZero);
    }
}

#[test]
fn closed_form_examples() {
    let p = pm(0.0, 3.0, 2.0);
    for k in 0..50 {
        assert!(melnikov_closed_form(k as f64 * 0.1, &p).unwrap().abs() < 1e-9);
    }
    let p = pm(0.005, 2.0, 2.0);
    let period = melnikov_period(&p);
    for k in 0..20 {
        let t0 = k as f64 * 0.37;
        let a = melnikov_closed_form(t0, &p).unwrap();
        let b = melnikov_closed_form(t0 + period, &p).unwrap();
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn direct_matches_closed_form() {
    let cfg = IntegratorConfig::analysis();
    for p in [pm(0.005, 2.0, 2.0), pm(0.1, 1.0, 2.0), pm(0.2, 2.0, 2.0)] {
        let b = b_matrices_numeric(&p, DEFAULT_T_LIMIT, &cfg).unwrap();
        let cd = connection_coefficients(&hypergeom_params(&p)).unwrap();
        let period = melnikov_period(&p);
        for k in 0..64 {
            let t0 = period * k as f64 / 64.0;
            let direct = melnikov_with_b0(t0, Vector2::new(1.0, 0.0), &p, &b.b0);
            let closed = melnikov_closed_form_with(t0, &p, &cd);
            assert!((direct - closed).abs() < 1e-5, "{p:?} t0 = {t0}");
        }
    }
}

#[test]
fn direct_is_stable_in_the_limit_time() {
    let p = pm(0.005, 2.0, 2.0);
    let cfg = IntegratorConfig::analysis();
    let e = Vector2::new(1.0, 0.0);
    for t0 in [0.0, 0.4, 1.1] {
        let a = melnikov_direct(t0, e, &p, 40.0, &cfg).unwrap();
        let b = melnikov_direct(t0, e, &p, 50.0, &cfg).unwrap();
        assert!((a - b).abs() < 1e-6);
    }
}

#[test]
fn identically_zero_case_is_direction_free() {
    let p = pm(0.0, 3.0, 2.0);
    let cfg = IntegratorConfig::analysis();
    let b = b_matrices_numeric(&p, DEFAULT_T_LIMIT, &cfg).unwrap();
    assert_eq!(r_matrix_and_classification(&p).unwrap().classification, ZeroStructure::IdenticallyZero);
    for k in 0..8 {
        let a = std::f64::consts::PI * k as f64 / 4.0;
        let e = Vector2::new(a.cos(), a.sin());
        for t0 in [0.0, 0.3, 0.9] {
            let m = melnikov_with_b0(t0, e, &p, &b.b0);
            assert!(m.abs() < 1e-6, "direction {k}: {m}");
        }
    }
    assert!(melnikov_direct(0.2, Vector2::new(1.0, 0.0), &p, 40.0, &cfg).unwrap().abs() < 1e-6);
}

#[test]
fn g_curve_examples() {
    let curve = trace_g_zero_curve(2.0, (0.5, 3.0), 26).unwrap();
    let b2_grid: Vec<f64> = (0..26).map(|k| 0.5 + 0.1 * k as f64).collect();
    // β₂ = 1 and 3 are on the integrable family: the curve touches β₁ = 0 there
    // and G has no interior sign change.
    let skipped: Vec<f64> = curve.skipped.iter().map(|s| s.0).collect();
    assert_eq!(skipped.len(), 2);
    assert!((skipped[0] - 1.0).abs() < 1e-9 && (skipped[1] - 3.0).abs() < 1e-9);
    assert!(curve.skipped.iter().all(|s| matches!(s.1, heteroclinic_core::Error::NoSignChange { .. })));
    let found: Vec<f64> = curve.points.iter().map(|q| q.1).collect();
    for b in &found {
        assert!(b2_grid.iter().any(|g| (g - b).abs() < 1e-12));
    }
    let (b1, _) = curve.points.iter().find(|q| (q.1 - 2.0).abs() < 1e-9).unwrap();
    assert!((0.014..=0.016).contains(b1));
    for &(b1, b2) in &curve.points {
        let p = pm(b1, b2, 2.0);
        let g = g_function(&p).unwrap();
        assert!(g.abs() < 1e-12 * g_scale(&p).unwrap().max(1e-300) || g.abs() < 1e-15);
    }
    // Ordered output.
    for w in curve.points.windows(2) {
        assert!(w[0].1 < w[1].1);
    }
}

#[test]
fn g_curve_is_continuous_and_degenerates_at_root() {
    let n = 41;
    let curve = trace_g_zero_curve(2.0, (1.5, 2.5), n).unwrap();
    assert!(curve.skipped.is_empty());
    let spacing = 1.0 / (n - 1) as f64;
    let slopes: Vec<f64> = curve
        .points
        .windows(2)
        .map(|w| ((w[1].0 - w[0].0) / (w[1].1 - w[0].1)).abs())
        .collect();
    let typical = slopes.iter().cloned().fold(0.0, f64::max);
    for w in curve.points.windows(2) {
        assert!((w[1].0 - w[0].0).abs() < 10.0 * spacing * typical);
    }
    for &(b1, b2) in curve.points.iter().step_by(10) {
        let r = r_matrix_and_classification(&pm(b1, b2, 2.0)).unwrap();
        let norm = r.r_matrix.norm();
        let boundary = r.det_r.abs() < 1e-9 * (1.0 + norm * norm);
        assert!(r.classification == ZeroStructure::DoubleZeros || boundary, "{b1} {b2}: {:?}", r);
    }
}
