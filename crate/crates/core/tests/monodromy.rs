use std::f64::consts::PI;

use heteroclinic_core::melnikov::{r_matrix_and_classification, ZeroStructure};
use heteroclinic_core::model::ModelParams;
use heteroclinic_core::monodromy::*;
use heteroclinic_core::special::hypergeom_params;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pm(b1: f64, b2: f64, w: f64) -> ModelParams {
    ModelParams::new(b1, b2, w).unwrap()
}

/// Eigenvalues of a complex 2×2 matrix from its characteristic polynomial.
fn eigenvalues(m: &CMatrix2) -> [Complex64; 2] {
    let tr = m.trace();
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let disc = (tr * tr - 4.0 * det).sqrt();
    [(tr + disc) / 2.0, (tr - disc) / 2.0]
}

fn same_spectrum(a: [Complex64; 2], b: [Complex64; 2], tol: f64) -> bool {
    let direct = (a[0] - b[0]).norm().max((a[1] - b[1]).norm());
    let swapped = (a[0] - b[1]).norm().max((a[1] - b[0]).norm());
    direct.min(swapped) < tol
}

#[test]
fn hypergeometric_monodromy_examples() {
    let hp = hypergeom_params(&pm(0.005, 2.0, 2.0));
    let (m0, m1) = monodromy_hypergeometric(&hp).unwrap();
    let det0 = m0[(0, 0)] * m0[(1, 1)] - m0[(0, 1)] * m0[(1, 0)];
    // |e(−c₃)| = exp(2π Im c₃)
    assert!((det0.norm() - (2.0 * PI * hp.c3.im).exp()).abs() < 1e-12 * det0.norm());
    let big_e = e(hp.c3 - hp.c1 - hp.c2);
    assert!(same_spectrum(eigenvalues(&m1), [Complex64::new(1.0, 0.0), big_e], 1e-9));

    let (_, m1) = monodromy_hypergeometric(&hypergeom_params(&pm(0.0, 3.0, 2.0))).unwrap();
    assert!(m1[(0, 1)].norm() < 1e-9 && m1[(1, 0)].norm() < 1e-9);
}

#[test]
fn nve_monodromy_examples() {
    let pair = monodromy_nve(&pm(0.0, 3.0, 2.0)).unwrap();
    assert!(pair.commutator_norm < 1e-9);
    assert!(pair.inverse_defect() < 1e-9);
    assert!(monodromy_nve(&pm(0.2, 2.0, 2.0)).unwrap().commutator_norm > 1e-3);
    assert!(monodromy_nve(&pm(0.0, 2.0, 2.0)).unwrap().commutator_norm > 1e-3);
}

#[test]
fn unimodular_and_local_exponents() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..50 {
        let w = rng.gen_range(1.5..2.5);
        let b2 = rng.gen_range(0.0..(w * w - 0.3));
        let b1 = rng.gen_range(-0.9..0.9) * (w * w - b2);
        let p = pm(b1, b2, w);
        let pair = monodromy_nve(&p).unwrap();
        for m in [&pair.m_plus, &pair.m_minus] {
            let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
            assert!((det.norm() - 1.0).abs() < 1e-10, "{p:?}");
        }
        let hp = hypergeom_params(&p);
        let expected = [e(hp.rho_minus), e(-hp.rho_minus)];
        let scale = expected[0].norm().max(expected[1].norm());
        assert!(same_spectrum(eigenvalues(&pair.m_minus), expected, 1e-9 * scale), "{p:?}");
    }
}

#[test]
fn closed_form_equal_ratio() {
    for b2 in [0.0, 0.5, 1.0, 2.0, 3.0] {
        let p = pm(0.0, b2, 2.0);
        let (cp, cm) = monodromy_closed_form_equal_ratio(&p).unwrap();
        let mu = resonance_mu(&p);
        let cosh = (2.0 * PI * mu).cosh();
        for m in [&cp, &cm] {
            assert!((m.trace() - 2.0 * cosh).norm() < 1e-10 * cosh);
        }
        let pair = monodromy_nve(&p).unwrap();
        let scale = cosh * 2.0;
        assert!(same_spectrum(eigenvalues(&cm), eigenvalues(&pair.m_minus), 1e-8 * scale));
        assert!(same_spectrum(eigenvalues(&cp), eigenvalues(&pair.m_plus), 1e-8 * scale));
    }
    let p = pm(0.0, 0.0, 2.0);
    assert!((resonance_mu(&p) - 2f64.sqrt()).abs() < 1e-15);
}

#[test]
fn closed_form_pair_commutes_exactly_on_integrable_family() {
    // In the real-orbit basis the inverse relation is a statement about B₀ alone.
    for b2 in [0.0, 1.0, 3.0, 6.0] {
        let (cp, cm) = monodromy_closed_form_equal_ratio(&pm(0.0, b2, 3.0)).unwrap();
        let scale = max_abs(&cp) * max_abs(&cm);
        assert!(max_abs(&(cp * cm - CMatrix2::identity())) < 1e-9 * scale);
    }
    let (cp, cm) = monodromy_closed_form_equal_ratio(&pm(0.0, 2.0, 2.0)).unwrap();
    assert!(max_abs(&(cp * cm - CMatrix2::identity())) > 1e-3);
}

#[test]
fn integrable_members_commute_on_grid() {
    for w in [2.0, 2.5, 3.0, 3.5] {
        for n in 1..=5u32 {
            let b2 = 0.5 * (n as f64) * (n as f64 - 1.0);
            if w * w - b2 <= 0.05 {
                continue;
            }
            let p = pm(0.0, b2, w);
            let pair = monodromy_nve(&p).unwrap();
            assert!(pair.commutator_norm < 1e-9, "{p:?}");
            assert!(pair.inverse_defect() < 1e-9, "{p:?}");
            let v = integrability_verdict(&p).unwrap();
            assert_eq!(v.n_witness, Some(n));
            assert!(v.commutative && v.inverse_relation_holds);
        }
    }
}

#[test]
fn other_members_do_not_commute() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let mut count = 0;
    while count < 50 {
        let w = rng.gen_range(1.5..3.0);
        let b2 = rng.gen_range(0.0..(w * w - 0.3));
        let b1 = if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(-0.9..0.9) * (w * w - b2) };
        let p = pm(b1, b2, w);
        let v = integrability_verdict(&p).unwrap();
        if v.condition_c_holds {
            continue;
        }
        assert!(v.commutator_norm > 1e-6, "{p:?}: {}", v.commutator_norm);
        assert_eq!(v.verdict, Verdict::NecessaryConditionFails);
        count += 1;
    }
}

#[test]
fn linkage_with_melnikov_when_beta1_vanishes() {
    for k in 0..=24 {
        let b2 = 0.25 * k as f64;
        let p = pm(0.0, b2, 2.0 + if b2 > 3.5 { 1.0 } else { 0.0 });
        let pair = monodromy_nve(&p).unwrap();
        let class = r_matrix_and_classification(&p).unwrap().classification;
        if pair.inverse_defect() < 1e-9 {
            assert_eq!(class, ZeroStructure::IdenticallyZero, "{p:?}");
        } else {
            assert!(pair.inverse_defect() > 1e-6);
            assert_eq!(class, ZeroStructure::SimpleZero, "{p:?}");
        }
    }
}
