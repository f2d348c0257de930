//! Monodromy of the normal variational equation around the two saddle-centers,
//! and the commutativity test behind the nonintegrability verdict.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::melnikov::b0_analytic;
use crate::model::{equilibrium_data, resonance_ratio_check, ModelParams, Saddle, RESONANCE_TOL};
use crate::special::{connection_coefficients, hypergeom_params, HypergeomParams};

pub type CMatrix2 = Matrix2<Complex64>;

/// Below this commutator norm the pair is commutative.
pub const COMMUTATIVE_TOL: f64 = 1e-9;
/// Above this commutator norm the pair is certainly not commutative.
pub const NONCOMMUTATIVE_TOL: f64 = 1e-6;
const TRIANGULAR_TOL: f64 = 1e-9;

pub const HYPERGEOMETRIC_BASIS: &str = "hypergeometric solutions at tau = 0";

/// `e(ρ) = exp(2πiρ)`.
pub fn e(rho: Complex64) -> Complex64 {
    (Complex64::new(0.0, 2.0 * PI) * rho).exp()
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix2) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonodromyPair {
    pub m_plus: CMatrix2,
    pub m_minus: CMatrix2,
    pub commutator_norm: f64,
    pub basis_note: &'static str,
}

impl MonodromyPair {
    /// `‖M₊M₋ − id‖` in the max-entry norm.
    pub fn inverse_defect(&self) -> f64 {
        max_abs(&(self.m_plus * self.m_minus - CMatrix2::identity()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Commutativity {
    Commutative,
    NotCommutative,
    Indeterminate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// The monodromy pair does not commute: the system is nonintegrable near
    /// the heteroclinic orbits.
    NecessaryConditionFails,
    /// The pair commutes; the test is inconclusive.
    NecessaryConditionHolds,
    /// Commutator norm between the two thresholds.
    Indeterminate,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::NecessaryConditionFails => "nonintegrable",
            Verdict::NecessaryConditionHolds => "inconclusive",
            Verdict::Indeterminate => "indeterminate",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrabilityVerdict {
    pub condition_c_holds: bool,
    pub n_witness: Option<u32>,
    pub commutative: bool,
    pub commutativity: Commutativity,
    pub inverse_relation_holds: bool,
    pub commutator_norm: f64,
    pub inverse_defect: f64,
    pub verdict: Verdict,
}

/// Monodromy matrices of the hypergeometric equation around τ = 0 and τ = 1.
pub fn monodromy_hypergeometric(hp: &HypergeomParams) -> Result<(CMatrix2, CMatrix2)> {
    let cd = connection_coefficients(hp)?;
    let scale = (cd.l11 * cd.l22).norm().max((cd.l12 * cd.l21).norm());
    if !(cd.l0.norm() > 1e-14 * scale) || cd.l0.norm() == 0.0 {
        return Err(Error::DegenerateConnection(cd.l0.norm()));
    }
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let m0 = CMatrix2::new(one, zero, zero, e(-hp.c3));
    let big_e = e(hp.c3 - hp.c1 - hp.c2);
    let (l11, l12, l21, l22) = (cd.l11, cd.l12, cd.l21, cd.l22);
    let m1 = CMatrix2::new(
        l11 * l22 - l12 * l21 * big_e,
        l12 * l22 * (big_e - one),
        l11 * l21 * (one - big_e),
        l11 * l22 * big_e - l12 * l21,
    ) / cd.l0;
    Ok((m0, m1))
}

/// `M₋ = e(ρ₋)M₀`, `M₊ = e(ρ₊)M₁`.
pub fn monodromy_nve(p: &ModelParams) -> Result<MonodromyPair> {
    let hp = hypergeom_params(p);
    let (m0, m1) = monodromy_hypergeometric(&hp)?;
    let m_minus = m0 * e(hp.rho_minus);
    let m_plus = m1 * e(hp.rho_plus);
    let commutator_norm = max_abs(&(m_plus * m_minus - m_minus * m_plus));
    Ok(MonodromyPair { m_plus, m_minus, commutator_norm, basis_note: HYPERGEOMETRIC_BASIS })
}

/// `exp(s A)` for `A = [[0, 1], [−ω², 0]]` (so `A² = −ω²`) and complex `s`.
fn exp_oscillator(s: Complex64, omega: f64) -> CMatrix2 {
    let arg = s * omega;
    let c = arg.cos();
    let sn = arg.sin() / omega;
    let a = CMatrix2::new(
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0, 0.0),
        Complex64::new(-omega * omega, 0.0),
        Complex64::new(0.0, 0.0),
    );
    CMatrix2::identity() * c + a * sn
}

/// Closed-form monodromy pair in the basis of the real fundamental matrix
/// along the heteroclinic orbit, valid when `ω₊/λ₊ = ω₋/λ₋`:
/// `M₊ = B₀⁻¹ exp(−2πi/λ₊ · J D²H₊) B₀`, `M₋ = exp(2πi/λ₋ · J D²H₋)`.
pub fn monodromy_closed_form_equal_ratio(p: &ModelParams) -> Result<(CMatrix2, CMatrix2)> {
    if !resonance_ratio_check(p) {
        return Err(Error::Precondition(format!(
            "frequency ratios differ (beta1 = {} exceeds {RESONANCE_TOL})",
            p.beta1()
        )));
    }
    let (plus, minus) = (equilibrium_data(p, Saddle::Right), equilibrium_data(p, Saddle::Left));
    let b0 = b0_analytic(p)?.map(|x| Complex64::new(x, 0.0));
    let b0_inv = b0
        .try_inverse()
        .ok_or_else(|| Error::Precondition("singular B0".into()))?;
    let i2pi = Complex64::new(0.0, 2.0 * PI);
    let m_plus = b0_inv * exp_oscillator(-i2pi / plus.lambda, plus.omega_pm) * b0;
    let m_minus = exp_oscillator(i2pi / minus.lambda, minus.omega_pm);
    Ok((m_plus, m_minus))
}

/// `μ = ω/λ` for the equal-ratio case.
pub fn resonance_mu(p: &ModelParams) -> f64 {
    p.omega_plus() / SQRT_2
}

/// Smallest `n ≥ 1` with `β₂ = n(n − 1)/2` to 1e-9, searching up to
/// `⌈(1 + √(1 + 8β₂))/2⌉ + 1`.
pub fn triangular_witness(beta2: f64) -> Option<u32> {
    let disc = 1.0 + 8.0 * beta2;
    if disc < 0.0 {
        return None;
    }
    let bound = ((1.0 + disc.sqrt()) / 2.0).ceil() as u32 + 1;
    (1..=bound).find(|&n| (beta2 - 0.5 * (n as f64) * (n as f64 - 1.0)).abs() < TRIANGULAR_TOL)
}

pub fn integrability_verdict(p: &ModelParams) -> Result<IntegrabilityVerdict> {
    let n_witness = if p.beta1().abs() <= RESONANCE_TOL { triangular_witness(p.beta2()) } else { None };
    let pair = monodromy_nve(p)?;
    let c = pair.commutator_norm;
    let commutativity = if c < COMMUTATIVE_TOL {
        Commutativity::Commutative
    } else if c > NONCOMMUTATIVE_TOL {
        Commutativity::NotCommutative
    } else {
        Commutativity::Indeterminate
    };
    let verdict = match commutativity {
        Commutativity::Commutative => Verdict::NecessaryConditionHolds,
        Commutativity::NotCommutative => Verdict::NecessaryConditionFails,
        Commutativity::Indeterminate => Verdict::Indeterminate,
    };
    let inverse_defect = pair.inverse_defect();
    Ok(IntegrabilityVerdict {
        condition_c_holds: n_witness.is_some(),
        n_witness,
        commutative: commutativity == Commutativity::Commutative,
        commutativity,
        inverse_relation_holds: inverse_defect < COMMUTATIVE_TOL,
        commutator_norm: c,
        inverse_defect,
        verdict,
    })
}
