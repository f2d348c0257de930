//! Melnikov function for the heteroclinic connection of the `Plus` branch:
//! limits of the transverse fundamental matrices at both saddle-centers, the
//! quadratic form whose sign structure decides the zeros, and the zero curve of
//! its discriminant in the (β₁, β₂) plane.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Vector2};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{equilibrium_data, Branch, ModelParams, Saddle};
use crate::ode::{integrate_with_nve, IntegratorConfig};
use crate::special::{connection_coefficients, hypergeom_params, nve_solution_analytic, ConnectionData};

/// Default time at which the limits are sampled, and the offset of the
/// confirming second sample.
pub const DEFAULT_T_LIMIT: f64 = 40.0;
pub const LIMIT_CHECK_OFFSET: f64 = 5.0;
const LIMIT_AGREEMENT: f64 = 1e-6;
const ZERO_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BMatrices {
    pub b_minus: Matrix2<f64>,
    pub b_plus: Matrix2<f64>,
    pub b0: Matrix2<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ZeroStructure {
    SimpleZero,
    NoZero,
    DoubleZeros,
    IdenticallyZero,
}

impl ZeroStructure {
    pub fn as_str(self) -> &'static str {
        match self {
            ZeroStructure::SimpleZero => "SimpleZero",
            ZeroStructure::NoZero => "NoZero",
            ZeroStructure::DoubleZeros => "DoubleZeros",
            ZeroStructure::IdenticallyZero => "IdenticallyZero",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MelnikovReport {
    pub b0: Matrix2<f64>,
    pub r_matrix: Matrix2<f64>,
    pub det_r: f64,
    /// `det R` from the expanded closed formula, for cross-checking.
    pub det_r_formula: f64,
    pub tr_r: f64,
    pub g_value: f64,
    pub phi0: f64,
    pub classification: ZeroStructure,
}

/// `Φ(t)` at the given saddle-center: the flow of `η₁' = η₂, η₂' = −ω²η₁`.
pub fn phi_matrix(t: f64, p: &ModelParams, which: Saddle) -> Matrix2<f64> {
    let w = equilibrium_data(p, which).omega_pm;
    let (s, c) = (w * t).sin_cos();
    Matrix2::new(c, s / w, -w * s, c)
}

/// Real fundamental matrix built from the exact complex solution η̄:
/// columns `(Re η̄, Re η̄')` and `(Im η̄, Im η̄')/ω₋`.
pub fn fundamental_matrix_psi(t: f64, p: &ModelParams) -> Result<Matrix2<f64>> {
    let (e, d) = nve_solution_analytic(t, p)?;
    let wm = p.omega_minus();
    Ok(Matrix2::new(e.re, e.im / wm, d.re, d.im / wm))
}

/// Limits `B∓ = lim Φ∓(−t)Ψ(t)` from a numerically integrated fundamental
/// matrix. `Ψ` is normalised to equal `Φ₋` at `t = −(t_limit + 5)`, so no
/// special functions enter this route. Both limits are sampled at `t_limit`
/// and `t_limit + 5` and must agree to 1e-6.
pub fn b_matrices_numeric(p: &ModelParams, t_limit: f64, cfg: &IntegratorConfig) -> Result<BMatrices> {
    if !(t_limit.is_finite() && t_limit > 0.0) {
        return Err(Error::Precondition(format!("t_limit = {t_limit}")));
    }
    let far = t_limit + LIMIT_CHECK_OFFSET;
    let start = phi_matrix(-far, p, Saddle::Left);
    let traj = integrate_with_nve(start, (-far, far), Branch::Plus, p, cfg)?;
    let at = |t: f64| {
        traj.at(t)
            .map(|s| s.eta_matrix)
            .ok_or_else(|| Error::Precondition(format!("t = {t} outside the integrated span")))
    };
    let limit = |which: Saddle, t: f64| -> Result<Matrix2<f64>> { Ok(phi_matrix(-t, p, which) * at(t)?) };

    let check = |a: Matrix2<f64>, b: Matrix2<f64>, t1: f64, t2: f64| {
        let diff = (a - b).abs().max();
        if diff < LIMIT_AGREEMENT {
            Ok(())
        } else {
            Err(Error::LimitNonConvergence { t_first: t1, t_second: t2, difference: diff })
        }
    };
    let b_minus = limit(Saddle::Left, -t_limit)?;
    check(b_minus, limit(Saddle::Left, -far)?, -t_limit, -far)?;
    let b_plus = limit(Saddle::Right, t_limit)?;
    check(b_plus, limit(Saddle::Right, far)?, t_limit, far)?;

    let inv = b_minus
        .try_inverse()
        .ok_or_else(|| Error::Precondition("singular B-".into()))?;
    debug_assert!((b_minus - Matrix2::identity()).abs().max() < 1e-6);
    Ok(BMatrices { b_minus, b_plus, b0: b_plus * inv })
}

/// Closed-form `B₀` in terms of `ℓ₁₂`, `ℓ₂₂` and `ω±`.
pub fn b0_from_connection(cd: &ConnectionData, p: &ModelParams) -> Matrix2<f64> {
    let (wp, wm) = (p.omega_plus(), p.omega_minus());
    let (a, b) = (cd.l12, cd.l22);
    Matrix2::new(
        a.re + b.re,
        (a.im + b.im) / wm,
        -wp * (a.im - b.im),
        wp * (a.re - b.re) / wm,
    )
}

pub fn b0_analytic(p: &ModelParams) -> Result<Matrix2<f64>> {
    let cd = connection_coefficients(&hypergeom_params(p))?;
    Ok(b0_from_connection(&cd, p))
}

/// `m±(η) = ½ η·D²_yH(x±, 0) η`.
pub fn saddle_quadratic(eta: Vector2<f64>, p: &ModelParams, which: Saddle) -> f64 {
    let d = equilibrium_data(p, which);
    0.5 * (d.sigma2 * eta[0] * eta[0] + d.sigma1 * eta[1] * eta[1])
}

/// `R = diag(σ₁⁻, σ₂⁻) − B₀ᵀ diag(σ₁⁺, σ₂⁺) B₀` in the coordinates `(η₂, η₁)`
/// that diagonalise the saddle Hessians as `(σ₁, σ₂) = (1, ω±²)`.
pub fn r_matrix(b0: &Matrix2<f64>, p: &ModelParams) -> Matrix2<f64> {
    let (plus, minus) = (equilibrium_data(p, Saddle::Right), equilibrium_data(p, Saddle::Left));
    let bt = reorder(b0);
    let dp = Matrix2::new(plus.sigma1, 0.0, 0.0, plus.sigma2);
    let dm = Matrix2::new(minus.sigma1, 0.0, 0.0, minus.sigma2);
    let r = dm - bt.transpose() * dp * bt;
    0.5 * (r + r.transpose())
}

/// `B₀` expressed in the `(η₂, η₁)` ordering used by `r_matrix`.
fn reorder(b0: &Matrix2<f64>) -> Matrix2<f64> {
    Matrix2::new(b0[(1, 1)], b0[(1, 0)], b0[(0, 1)], b0[(0, 0)])
}

/// Expanded determinant of `R` in terms of the entries of `B₀` and the σ's.
pub fn det_r_formula(b0: &Matrix2<f64>, p: &ModelParams) -> f64 {
    let (plus, minus) = (equilibrium_data(p, Saddle::Right), equilibrium_data(p, Saddle::Left));
    let b = reorder(b0);
    let (b11, b12, b21, b22) = (b[(0, 0)], b[(0, 1)], b[(1, 0)], b[(1, 1)]);
    let d = plus.omega_pm - minus.omega_pm;
    let u = b11 * (plus.sigma1 * minus.sigma2).sqrt() - b22 * (plus.sigma2 * minus.sigma1).sqrt();
    let v = b12 * (plus.sigma1 * minus.sigma1).sqrt() + b21 * (plus.sigma2 * minus.sigma2).sqrt();
    d * d - u * u - v * v
}

/// Zero structure of `½ ξᵀRξ` over the circle of directions ξ.
pub fn classify_r(r: &Matrix2<f64>) -> ZeroStructure {
    let norm = r.norm();
    let tol = ZERO_TOL * (1.0 + norm * norm);
    let det = r.determinant();
    let tr = r.trace();
    if det.abs() < tol {
        if tr.abs() < tol {
            ZeroStructure::IdenticallyZero
        } else {
            ZeroStructure::DoubleZeros
        }
    } else if det < 0.0 {
        ZeroStructure::SimpleZero
    } else {
        ZeroStructure::NoZero
    }
}

/// Phase of the oscillating part of the closed-form Melnikov function.
pub fn phase_offset(cd: &ConnectionData) -> f64 {
    let (a, b) = (cd.l12, cd.l22);
    let num = a.re * b.im + a.im * b.re;
    let den = -a.re * b.re + a.im * b.im;
    num.atan2(den)
}

fn g_from(cd: &ConnectionData, p: &ModelParams) -> f64 {
    let (wp, wm) = (p.omega_plus(), p.omega_minus());
    wp * wp * wm * wm * cd.l22.norm_sqr() - 0.25 * wm * wm * (wp - wm).powi(2)
}

/// Discriminant whose sign decides between a simple zero (G > 0) and no
/// zero (G < 0) of the Melnikov function.
pub fn g_function(p: &ModelParams) -> Result<f64> {
    let cd = connection_coefficients(&hypergeom_params(p))?;
    Ok(g_from(&cd, p))
}

/// Magnitude of the two terms of `G`, used to scale zero tests.
pub fn g_scale(p: &ModelParams) -> Result<f64> {
    let cd = connection_coefficients(&hypergeom_params(p))?;
    let (wp, wm) = (p.omega_plus(), p.omega_minus());
    Ok(wp * wp * wm * wm * cd.l22.norm_sqr() + 0.25 * wm * wm * (wp - wm).powi(2))
}

pub fn r_matrix_and_classification(p: &ModelParams) -> Result<MelnikovReport> {
    let cd = connection_coefficients(&hypergeom_params(p))?;
    let b0 = b0_from_connection(&cd, p);
    let r = r_matrix(&b0, p);
    Ok(MelnikovReport {
        b0,
        r_matrix: r,
        det_r: r.determinant(),
        det_r_formula: det_r_formula(&b0, p),
        tr_r: r.trace(),
        g_value: g_from(&cd, p),
        phi0: phase_offset(&cd),
        classification: classify_r(&r),
    })
}

/// `M(t₀) = ω₊²|ℓ₁₂||ℓ₂₂| cos(2ω₋t₀ − φ₀) + ½(ω₋² − (|ℓ₁₂|² + |ℓ₂₂|²)ω₊²)`,
/// the Melnikov function for `η₀ = (1, 0)`.
pub fn melnikov_closed_form(t0: f64, p: &ModelParams) -> Result<f64> {
    let cd = connection_coefficients(&hypergeom_params(p))?;
    Ok(melnikov_closed_form_with(t0, p, &cd))
}

pub fn melnikov_closed_form_with(t0: f64, p: &ModelParams, cd: &ConnectionData) -> f64 {
    let (wp, wm) = (p.omega_plus(), p.omega_minus());
    let (a, b) = (cd.l12.norm(), cd.l22.norm());
    let phi0 = phase_offset(cd);
    wp * wp * a * b * (2.0 * wm * t0 - phi0).cos() + 0.5 * (wm * wm - (a * a + b * b) * wp * wp)
}

/// `M(t₀) = m₋(η₀) − m₊(B₀Φ₋(t₀)η₀)` with `B₀` already computed.
pub fn melnikov_with_b0(t0: f64, eta0: Vector2<f64>, p: &ModelParams, b0: &Matrix2<f64>) -> f64 {
    let moved = b0 * phi_matrix(t0, p, Saddle::Left) * eta0;
    saddle_quadratic(eta0, p, Saddle::Left) - saddle_quadratic(moved, p, Saddle::Right)
}

/// Melnikov function from the numerically computed limits.
pub fn melnikov_direct(
    t0: f64,
    eta0: Vector2<f64>,
    p: &ModelParams,
    t_limit: f64,
    cfg: &IntegratorConfig,
) -> Result<f64> {
    if (eta0.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::Precondition(format!("|eta0| = {} (must be 1)", eta0.norm())));
    }
    let b = b_matrices_numeric(p, t_limit, cfg)?;
    Ok(melnikov_with_b0(t0, eta0, p, &b.b0))
}

/// Period of the Melnikov function in `t₀`.
pub fn melnikov_period(p: &ModelParams) -> f64 {
    PI / p.omega_minus()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GCurve {
    pub points: Vec<(f64, f64)>,
    /// β₂ samples with no sign change of G, and the reason.
    pub skipped: Vec<(f64, Error)>,
}

const SCAN_POINTS: usize = 240;

/// β₁ root of `G(·, β₂, ω)` on `(0, ω² − β₂)`: log-spaced sign scan, then bisection.
pub fn g_root(beta2: f64, omega: f64) -> Result<f64> {
    let upper = omega * omega - beta2;
    if !(upper > 0.0) {
        return Err(Error::ParameterDomain(format!("omega^2 - beta2 = {upper} must be positive")));
    }
    let g_at = |b1: f64| -> Result<f64> { g_function(&ModelParams::new(b1, beta2, omega)?) };
    let lo_frac: f64 = 1e-9;
    let hi_frac: f64 = 1.0 - 1e-9;
    let mut prev: Option<(f64, f64)> = None;
    for k in 0..SCAN_POINTS {
        let s = k as f64 / (SCAN_POINTS - 1) as f64;
        let b1 = upper * (lo_frac.ln() + s * (hi_frac.ln() - lo_frac.ln())).exp();
        let g = g_at(b1)?;
        if let Some((b_prev, g_prev)) = prev {
            if g_prev > 0.0 && g <= 0.0 {
                return bisect_g(b_prev, b1, beta2, omega);
            }
        }
        prev = Some((b1, g));
    }
    Err(Error::NoSignChange { beta2 })
}

fn bisect_g(mut a: f64, mut b: f64, beta2: f64, omega: f64) -> Result<f64> {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let p = ModelParams::new(m, beta2, omega)?;
        let g = g_function(&p)?;
        if g.abs() < 1e-12 * g_scale(&p)? && (b - a) < 1e-12 * m {
            return Ok(m);
        }
        if g > 0.0 {
            a = m;
        } else {
            b = m;
        }
        if b - a <= 2.0 * f64::EPSILON * m {
            return Ok(0.5 * (a + b));
        }
    }
    Ok(0.5 * (a + b))
}

/// Zero curve of `G(·, ·, ω)` over `n_points` equally spaced β₂ samples.
/// Samples are solved in parallel; output keeps the input order.
pub fn trace_g_zero_curve(omega: f64, beta2_range: (f64, f64), n_points: usize) -> Result<GCurve> {
    let (lo, hi) = beta2_range;
    if n_points == 0 || !(lo <= hi) || !(omega > 0.0) || hi >= omega * omega {
        return Err(Error::Precondition(format!(
            "beta2 range ({lo}, {hi}) with {n_points} points at omega = {omega}"
        )));
    }
    let samples: Vec<f64> = (0..n_points)
        .map(|k| if n_points == 1 { lo } else { lo + (hi - lo) * k as f64 / (n_points - 1) as f64 })
        .collect();
    let roots: Vec<(f64, Result<f64>)> = samples.par_iter().map(|&b2| (b2, g_root(b2, omega))).collect();
    let mut curve = GCurve { points: Vec::new(), skipped: Vec::new() };
    for (b2, r) in roots {
        match r {
            Ok(b1) => curve.points.push((b1, b2)),
            Err(e) => curve.skipped.push((b2, e)),
        }
    }
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pm(b1: f64, b2: f64, w: f64) -> ModelParams {
        ModelParams::new(b1, b2, w).unwrap()
    }

    #[test]
    fn phi_normalisation_and_period() {
        let p = pm(0.005, 2.0, 2.0);
        for which in [Saddle::Left, Saddle::Right] {
            assert_eq!(phi_matrix(0.0, &p, which), Matrix2::identity());
            let w = equilibrium_data(&p, which).omega_pm;
            let m = phi_matrix(2.0 * PI / w, &p, which);
            assert!((m - Matrix2::identity()).abs().max() < 1e-12);
            assert!((phi_matrix(1.234, &p, which).determinant() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn classification_examples() {
        let r = r_matrix_and_classification(&pm(0.0, 2.0, 2.0)).unwrap();
        assert_eq!(r.classification, ZeroStructure::SimpleZero);
        let r = r_matrix_and_classification(&pm(0.0, 3.0, 2.0)).unwrap();
        assert_eq!(r.classification, ZeroStructure::IdenticallyZero);
        let r = r_matrix_and_classification(&pm(0.2, 2.0, 2.0)).unwrap();
        assert_eq!(r.classification, ZeroStructure::NoZero);
    }

    #[test]
    fn classify_cases() {
        assert_eq!(classify_r(&Matrix2::new(1.0, 0.0, 0.0, -1.0)), ZeroStructure::SimpleZero);
        assert_eq!(classify_r(&Matrix2::new(1.0, 0.0, 0.0, 2.0)), ZeroStructure::NoZero);
        assert_eq!(classify_r(&Matrix2::new(1.0, 0.0, 0.0, 0.0)), ZeroStructure::DoubleZeros);
        assert_eq!(classify_r(&Matrix2::zeros()), ZeroStructure::IdenticallyZero);
    }

    #[test]
    fn decoupled_b0_is_rotation_like() {
        let p = pm(0.0, 0.0, 2.0);
        let cd = connection_coefficients(&hypergeom_params(&p)).unwrap();
        assert!(cd.l22.norm() < 1e-14);
        assert!((cd.l12.norm() - 1.0).abs() < 1e-12);
        let b0 = b0_analytic(&p).unwrap();
        assert!((b0[(0, 0)] - b0[(1, 1)]).abs() < 1e-12);
        assert!((b0[(1, 0)] + 4.0 * b0[(0, 1)]).abs() < 1e-12);
    }

    #[test]
    fn closed_form_matches_formula_with_analytic_b0() {
        let p = pm(0.005, 2.0, 2.0);
        let b0 = b0_analytic(&p).unwrap();
        for k in 0..16 {
            let t0 = k as f64 * 0.1;
            let direct = melnikov_with_b0(t0, Vector2::new(1.0, 0.0), &p, &b0);
            let closed = melnikov_closed_form(t0, &p).unwrap();
            assert!((direct - closed).abs() < 1e-13);
        }
    }

    #[test]
    fn g_examples() {
        assert!(g_function(&pm(0.0, 2.0, 2.0)).unwrap() > 0.0);
        assert!(g_function(&pm(0.0, 3.0, 2.0)).unwrap().abs() < 1e-10);
        assert!(g_function(&pm(0.2, 2.0, 2.0)).unwrap() < 0.0);
    }

    #[test]
    fn g_root_at_reference_point() {
        let b1 = g_root(2.0, 2.0).unwrap();
        assert!((0.014..=0.016).contains(&b1), "{b1}");
    }

    #[test]
    fn invalid_eta0_rejected() {
        let p = pm(0.005, 2.0, 2.0);
        let err = melnikov_direct(0.0, Vector2::new(1.0, 1.0), &p, 40.0, &Default::default()).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }
}
