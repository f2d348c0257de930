use heteroclinic_core::model::*;
use heteroclinic_core::ode::*;
use nalgebra::Matrix2;
use proptest::prelude::*;

fn p() -> ModelParams {
    ModelParams::new(0.005, 2.0, 2.0).unwrap()
}

/// Bounded motions: inside the potential well, below the saddle energy.
fn bounded_state() -> impl Strategy<Value = PhaseState> {
    (-0.6f64..0.6, -0.4f64..0.4, -0.3f64..0.3, -0.4f64..0.4)
        .prop_map(|(a, b, c, d)| PhaseState::new(a, b, c, d))
        .prop_filter("below saddle energy", |s| hamiltonian(s, &p()) < 0.2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn energy_is_conserved(s in bounded_state()) {
        let q = p();
        let h0 = hamiltonian(&s, &q);
        let traj = integrate(s, (0.0, 100.0), &q, &IntegratorConfig::analysis()).unwrap();
        for (_, y) in traj.phase_states() {
            prop_assert!((hamiltonian(&y, &q) - h0).abs() < 1e-8);
        }
        let mid = traj.phase_at(37.3).unwrap();
        prop_assert!((hamiltonian(&mid, &q) - h0).abs() < 1e-8);
    }

    #[test]
    fn nve_determinant_is_preserved(
        a in -2.0f64..2.0, b in -2.0f64..2.0, c in -2.0f64..2.0, d in -2.0f64..2.0,
        plus in any::<bool>(),
    ) {
        let m0 = Matrix2::new(a, b, c, d);
        let branch = if plus { Branch::Plus } else { Branch::Minus };
        let tr = integrate_with_nve(m0, (-20.0, 20.0), branch, &p(), &IntegratorConfig::analysis()).unwrap();
        let d0 = m0.determinant();
        let scale = m0.norm().powi(2).max(1.0);
        prop_assert!((tr.last().eta_matrix.determinant() - d0).abs() < 1e-7 * scale);
        for (t, st) in tr.samples() {
            let elapsed = (t + 20.0).max(1.0);
            prop_assert!((st.eta_matrix.determinant() - d0).abs() < 1e-9 * elapsed * scale);
        }
    }

    #[test]
    fn event_refinement_is_idempotent(s in bounded_state()) {
        let q = p();
        let traj = integrate(s, (0.0, 20.0), &q, &IntegratorConfig::analysis()).unwrap();
        for (t, y) in find_event(&traj, |z| z.y1, Direction::Either) {
            prop_assert!(y.y1.abs() < 1e-10);
            let seg = traj.segments().iter().find(|g| g.t_start() <= t && t <= g.t_end()).unwrap();
            let g = |u: f64| seg.eval(u)[2];
            let (lo, hi) = (seg.t_start().max(t - 1e-4), seg.t_end().min(t + 1e-4));
            if g(lo) * g(hi) < 0.0 {
                prop_assert!((refine_crossing(g, lo, hi) - t).abs() < 1e-12);
            }
        }
    }
}

fn heteroclinic_error(rel_tol: f64) -> (f64, usize) {
    let q = p();
    let (x0, _) = heteroclinic_orbit(-10.0, Branch::Plus);
    let planar = |_t: f64, y: &[f64; 2]| {
        let f = vector_field(&PhaseState::new(y[0], y[1], 0.0, 0.0), &q);
        [f.x1, f.x2]
    };
    let cfg = IntegratorConfig::analysis().with_tolerances(rel_tol, rel_tol * 1e-2);
    let mut end = x0;
    let stats = solve(&planar, -10.0, x0, 10.0, &cfg, |seg| {
        end = seg.y_end();
        true
    })
    .unwrap();
    let (xe, _) = heteroclinic_orbit(10.0, Branch::Plus);
    ((end[0] - xe[0]).hypot(end[1] - xe[1]), stats.accepted)
}

#[test]
fn convergence_order_on_heteroclinic() {
    // Least-squares slope of log(error) against log(steps) over several tolerances.
    let samples: Vec<(f64, f64)> = [1e-6, 1e-7, 1e-8, 1e-9, 1e-10]
        .iter()
        .map(|&tol| {
            let (err, steps) = heteroclinic_error(tol);
            ((steps as f64).ln(), err.ln())
        })
        .collect();
    let n = samples.len() as f64;
    let mx = samples.iter().map(|s| s.0).sum::<f64>() / n;
    let my = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let sxy: f64 = samples.iter().map(|s| (s.0 - mx) * (s.1 - my)).sum();
    let sxx: f64 = samples.iter().map(|s| (s.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    assert!(slope < -4.0, "slope {slope}");
}

#[test]
fn tighter_tolerance_reduces_error() {
    let (e1, _) = heteroclinic_error(1e-8);
    let (e2, _) = heteroclinic_error(1e-10);
    assert!(e2 < e1 / 10.0);
}

#[test]
fn dense_output_between_steps() {
    let q = p();
    let s = PhaseState::new(0.1, 0.2, 0.05, -0.1);
    let cfg = IntegratorConfig::analysis();
    let traj = integrate(s, (0.0, 10.0), &q, &cfg).unwrap();
    for k in 1..40 {
        let t = 0.25 * k as f64;
        let dense = traj.phase_at(t).unwrap().to_array();
        let direct = integrate(s, (0.0, t), &q, &cfg).unwrap().last();
        for (a, b) in dense.iter().zip(direct) {
            assert!((a - b).abs() < 1e-8);
        }
    }
    let times = traj.times();
    assert!(times.windows(2).all(|w| w[1] > w[0]));
}
