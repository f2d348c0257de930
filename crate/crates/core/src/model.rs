//! The quartic two-degree-of-freedom family
//!
//! ```text
//! H = (x2² + y2²)/2 + (x1² + ω² y1²)/2 - (x1⁴ + y1⁴)/4 - β1 x1 y1²/2 - β2 x1² y1²/2
//! ```
//!
//! The plane `y = 0` is invariant. On it the system has saddles at `x = (±1, 0)`
//! joined by the heteroclinic orbits `±(tanh(t/√2), sech²(t/√2)/√2)`. Transverse
//! to the plane each saddle is a center, so the equilibria `(±1, 0, 0, 0)` are
//! saddle-centers whenever `ω² - β2 > |β1|`.

use nalgebra::{Matrix2, Matrix4};
use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};

/// Absolute tolerance on `ω₊/λ₊ - ω₋/λ₋` used by [`resonance_ratio_check`].
pub const RESONANCE_TOL: f64 = 1e-12;

/// One member `(β1, β2, ω)` of the family. Construction enforces `ω² - β2 > |β1|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    beta1: f64,
    beta2: f64,
    omega: f64,
}

impl ModelParams {
    pub fn new(beta1: f64, beta2: f64, omega: f64) -> Result<Self> {
        if !(beta1.is_finite() && beta2.is_finite() && omega.is_finite()) {
            return Err(Error::ParameterDomain("parameters must be finite".into()));
        }
        if omega <= 0.0 {
            return Err(Error::ParameterDomain(format!("omega must be positive, got {omega}")));
        }
        if omega * omega - beta2 <= beta1.abs() {
            return Err(Error::ParameterDomain(format!(
                "omega^2 - beta2 = {} must exceed |beta1| = {}",
                omega * omega - beta2,
                beta1.abs()
            )));
        }
        Ok(Self { beta1, beta2, omega })
    }

    pub fn beta1(&self) -> f64 {
        self.beta1
    }

    pub fn beta2(&self) -> f64 {
        self.beta2
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// `ω₊` at the right saddle-center `(1, 0)`.
    pub fn omega_plus(&self) -> f64 {
        (self.omega * self.omega - self.beta1 - self.beta2).sqrt()
    }

    /// `ω₋` at the left saddle-center `(-1, 0)`.
    pub fn omega_minus(&self) -> f64 {
        (self.omega * self.omega + self.beta1 - self.beta2).sqrt()
    }

    /// Parameters of the system seen through `x1 -> -x1`, which flips the sign of `β1`.
    pub fn mirrored(&self) -> Self {
        Self { beta1: -self.beta1, ..*self }
    }
}

/// Canonical coordinates `(x1, x2, y1, y2)`; `x2`, `y2` are the momenta.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhaseState {
    pub x1: f64,
    pub x2: f64,
    pub y1: f64,
    pub y2: f64,
}

impl PhaseState {
    pub const fn new(x1: f64, x2: f64, y1: f64, y2: f64) -> Self {
        Self { x1, x2, y1, y2 }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x1, self.x2, self.y1, self.y2]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    pub fn on_invariant_plane(&self) -> bool {
        self.y1 == 0.0 && self.y2 == 0.0
    }
}

/// Which of the two saddle-centers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Saddle {
    /// `(1, 0)`, carrying `ω₊`.
    Right,
    /// `(-1, 0)`, carrying `ω₋`.
    Left,
}

impl Saddle {
    pub fn x1(self) -> f64 {
        match self {
            Saddle::Right => 1.0,
            Saddle::Left => -1.0,
        }
    }

    pub fn partner(self) -> Saddle {
        match self {
            Saddle::Right => Saddle::Left,
            Saddle::Left => Saddle::Right,
        }
    }
}

/// Selects the heteroclinic orbit: `Plus` runs left to right through `x2 > 0`,
/// `Minus` runs right to left through `x2 < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// Spectral data of one saddle-center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaddleCenterData {
    pub location: [f64; 2],
    /// Hyperbolic rate λ± of the in-plane saddle.
    pub lambda: f64,
    /// Elliptic frequency ω± of the transverse center.
    pub omega_pm: f64,
    /// Eigenvalues of the transverse Hessian `D_y²H(x±, 0)`.
    pub sigma1: f64,
    pub sigma2: f64,
}

/// Vector field and second-derivative data of a two-degree-of-freedom system
/// with an invariant plane `y = 0`. The quartic family is the only implementor
/// today; the analysis code talks to it through this trait.
pub trait PlanarInvariantSystem: Sync {
    fn energy(&self, s: &PhaseState) -> f64;
    fn vector_field(&self, s: &PhaseState) -> PhaseState;
    /// Jacobian of the vector field in `(x1, x2, y1, y2)` order.
    fn jacobian(&self, s: &PhaseState) -> Matrix4<f64>;
    /// `D_y²H(x, 0)` at a point of the invariant plane.
    fn normal_hessian(&self, x1: f64, x2: f64) -> Matrix2<f64>;
    /// Gradient of the energy.
    fn energy_gradient(&self, s: &PhaseState) -> [f64; 4];
}

impl PlanarInvariantSystem for ModelParams {
    fn energy(&self, s: &PhaseState) -> f64 {
        hamiltonian(s, self)
    }

    fn vector_field(&self, s: &PhaseState) -> PhaseState {
        vector_field(s, self)
    }

    fn jacobian(&self, s: &PhaseState) -> Matrix4<f64> {
        let (b1, b2, w) = (self.beta1, self.beta2, self.omega);
        let (x1, y1) = (s.x1, s.y1);
        let cross = b1 * y1 + 2.0 * b2 * x1 * y1;
        Matrix4::new(
            0.0, 1.0, 0.0, 0.0,
            -1.0 + 3.0 * x1 * x1 + b2 * y1 * y1, 0.0, cross, 0.0,
            0.0, 0.0, 0.0, 1.0,
            cross, 0.0, -w * w + b1 * x1 + b2 * x1 * x1 + 3.0 * y1 * y1, 0.0,
        )
    }

    fn normal_hessian(&self, x1: f64, _x2: f64) -> Matrix2<f64> {
        Matrix2::new(
            self.omega * self.omega - self.beta1 * x1 - self.beta2 * x1 * x1,
            0.0,
            0.0,
            1.0,
        )
    }

    fn energy_gradient(&self, s: &PhaseState) -> [f64; 4] {
        let (b1, b2, w) = (self.beta1, self.beta2, self.omega);
        let PhaseState { x1, x2, y1, y2 } = *s;
        [
            x1 - x1.powi(3) - 0.5 * b1 * y1 * y1 - b2 * x1 * y1 * y1,
            x2,
            w * w * y1 - y1.powi(3) - b1 * x1 * y1 - b2 * x1 * x1 * y1,
            y2,
        ]
    }
}

pub fn hamiltonian(s: &PhaseState, p: &ModelParams) -> f64 {
    let PhaseState { x1, x2, y1, y2 } = *s;
    let w2 = p.omega * p.omega;
    0.5 * (x2 * x2 + y2 * y2) + 0.5 * (x1 * x1 + w2 * y1 * y1)
        - 0.25 * (x1.powi(4) + y1.powi(4))
        - 0.5 * p.beta1 * x1 * y1 * y1
        - 0.5 * p.beta2 * x1 * x1 * y1 * y1
}

pub fn vector_field(s: &PhaseState, p: &ModelParams) -> PhaseState {
    let PhaseState { x1, x2, y1, y2 } = *s;
    let (b1, b2) = (p.beta1, p.beta2);
    PhaseState {
        x1: x2,
        x2: -x1 + x1 * x1 * x1 + 0.5 * b1 * y1 * y1 + b2 * x1 * y1 * y1,
        y1: y2,
        y2: -p.omega * p.omega * y1 + b1 * x1 * y1 + b2 * x1 * x1 * y1 + y1 * y1 * y1,
    }
}

pub fn equilibrium_data(p: &ModelParams, which: Saddle) -> SaddleCenterData {
    let sigma2 = p.omega * p.omega - which.x1() * p.beta1 - p.beta2;
    SaddleCenterData {
        location: [which.x1(), 0.0],
        lambda: SQRT_2,
        omega_pm: sigma2.sqrt(),
        sigma1: 1.0,
        sigma2,
    }
}

/// Energy of both saddle-centers (they share one level because the
/// heteroclinic orbits join them).
pub fn saddle_energy(p: &ModelParams) -> f64 {
    hamiltonian(&PhaseState::new(1.0, 0.0, 0.0, 0.0), p)
}

/// Closed-form heteroclinic orbit on the invariant plane: position and velocity.
pub fn heteroclinic_orbit(t: f64, b: Branch) -> ([f64; 2], [f64; 2]) {
    let u = t / SQRT_2;
    let th = u.tanh();
    let sech2 = 1.0 / u.cosh().powi(2);
    let s = b.sign();
    (
        [s * th, s * sech2 / SQRT_2],
        [s * sech2 / SQRT_2, -s * sech2 * th],
    )
}

/// `x1` component of the `Plus` heteroclinic orbit.
pub fn heteroclinic_x1(t: f64) -> f64 {
    (t / SQRT_2).tanh()
}

/// True iff σ₁ at both saddle-centers has the same sign; otherwise no
/// equal-energy pair of nearby periodic orbits exists.
pub fn same_sign_check(p: &ModelParams) -> bool {
    let r = equilibrium_data(p, Saddle::Right);
    let l = equilibrium_data(p, Saddle::Left);
    r.sigma1 * l.sigma1 > 0.0
}

/// True iff `ω₊/λ₊ = ω₋/λ₋` to [`RESONANCE_TOL`]. In this family that is `β1 = 0`.
pub fn resonance_ratio_check(p: &ModelParams) -> bool {
    let r = equilibrium_data(p, Saddle::Right);
    let l = equilibrium_data(p, Saddle::Left);
    (r.omega_pm / r.lambda - l.omega_pm / l.lambda).abs() < RESONANCE_TOL
}
