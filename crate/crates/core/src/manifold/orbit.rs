use std::f64::consts::PI;

use nalgebra::{Matrix2, Matrix4, Vector2};

use super::FloquetData;
use crate::error::{Error, Result};
use crate::model::{
    equilibrium_data, hamiltonian, same_sign_check, saddle_energy, vector_field, ModelParams, PhaseState,
    PlanarInvariantSystem, Saddle,
};
use crate::ode::{solve, Direction, EventLocator, IntegratorConfig};

/// Lyapunov periodic orbit around one saddle-center.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicOrbit {
    /// Point of the orbit on `y1 = 0` with `y2 > 0`.
    pub anchor_state: PhaseState,
    pub period: f64,
    pub energy: f64,
    pub center: Saddle,
    pub floquet: Option<FloquetData>,
}

impl PeriodicOrbit {
    pub fn floquet_unstable_dir(&self) -> Option<[f64; 4]> {
        self.floquet.as_ref().map(|f| f.unstable_dir)
    }

    pub fn floquet_stable_dir(&self) -> Option<[f64; 4]> {
        self.floquet.as_ref().map(|f| f.stable_dir)
    }

    /// `y2` at the anchor, the extent of the orbit's projection to the `y` plane.
    pub fn y_amplitude(&self) -> f64 {
        self.anchor_state.y2
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitSettings {
    /// Admissible energies are `(saddle energy, saddle energy + ceiling_offset]`.
    pub ceiling_offset: f64,
    pub newton_tol: f64,
    pub max_iter: usize,
    pub integrator: IntegratorConfig,
}

impl Default for OrbitSettings {
    fn default() -> Self {
        Self {
            ceiling_offset: 0.25,
            newton_tol: 1e-10,
            max_iter: 40,
            integrator: IntegratorConfig::analysis().with_tolerances(1e-12, 1e-13),
        }
    }
}

impl OrbitSettings {
    pub fn with_ceiling(mut self, offset: f64) -> Self {
        self.ceiling_offset = offset;
        self
    }
}

/// State and its 4×4 variational matrix, row-major after the state.
pub(crate) type Variational = [f64; 20];

pub(crate) fn variational_start(s: &PhaseState) -> Variational {
    let mut z = [0.0; 20];
    z[..4].copy_from_slice(&s.to_array());
    for i in 0..4 {
        z[4 + 5 * i] = 1.0;
    }
    z
}

pub(crate) fn split(z: &Variational) -> (PhaseState, Matrix4<f64>) {
    (
        PhaseState::new(z[0], z[1], z[2], z[3]),
        Matrix4::from_row_slice(&z[4..]),
    )
}

fn variational_rhs(p: &ModelParams) -> impl Fn(f64, &Variational) -> Variational + Sync + '_ {
    move |_t, z| {
        let (s, m) = split(z);
        let f = vector_field(&s, p).to_array();
        let dm = p.jacobian(&s) * m;
        let mut out = [0.0; 20];
        out[..4].copy_from_slice(&f);
        for i in 0..4 {
            for j in 0..4 {
                out[4 + 4 * i + j] = dm[(i, j)];
            }
        }
        out
    }
}

/// Flow with its derivative from `s` over `[0, t_end]`.
pub(crate) fn flow_with_variation(
    s: &PhaseState,
    t_end: f64,
    p: &ModelParams,
    cfg: &IntegratorConfig,
) -> Result<(PhaseState, Matrix4<f64>)> {
    let rhs = variational_rhs(p);
    let mut last = variational_start(s);
    solve(&rhs, 0.0, last, t_end, cfg, |seg| {
        last = seg.y_end();
        true
    })?;
    Ok(split(&last))
}

/// First rising crossing of `y1 = 0` after `t_min`, with the variational matrix there.
fn first_return(
    s: &PhaseState,
    t_min: f64,
    t_max: f64,
    p: &ModelParams,
    cfg: &IntegratorConfig,
) -> Result<(f64, PhaseState, Matrix4<f64>)> {
    let rhs = variational_rhs(p);
    let mut locator = EventLocator::new(|z: &Variational| z[2], Direction::Rising);
    let mut hit = None;
    solve(&rhs, 0.0, variational_start(s), t_max, cfg, |seg| {
        if let Some((t, z)) = locator.check(seg).into_iter().find(|(t, _)| *t > t_min) {
            hit = Some((t, z));
            return false;
        }
        true
    })?;
    let (t, z) = hit.ok_or(Error::NoReturn(t_max))?;
    let (state, m) = split(&z);
    Ok((t, state, m))
}

/// `y2 > 0` completing `(x1, x2, 0, ·)` to the energy level (the quartic `y1`
/// term vanishes on the section).
pub(crate) fn section_y2(x1: f64, x2: f64, energy: f64) -> Option<f64> {
    let v = 2.0 * energy - x2 * x2 - x1 * x1 + 0.5 * x1.powi(4);
    (v > 0.0).then(|| v.sqrt())
}

pub(crate) fn energy_window(p: &ModelParams, settings: &OrbitSettings) -> (f64, f64) {
    let low = saddle_energy(p);
    (low, low + settings.ceiling_offset)
}

/// Linearized-center guess for the anchor: `x − x± = O(|y|²)` with
/// `y1 = a cos(ω t)` and `½ω²a² = energy − saddle energy`.
fn initial_guess(p: &ModelParams, energy: f64, center: Saddle) -> Vector2<f64> {
    let sign = center.x1();
    let w2 = equilibrium_data(p, center).omega_pm.powi(2);
    let a2 = 2.0 * (energy - saddle_energy(p)) / w2;
    let k = 0.5 * p.beta1() + p.beta2() * sign;
    Vector2::new(sign - k * a2 / 4.0 + k * a2 / (4.0 * (2.0 * w2 + 1.0)), 0.0)
}

fn check_energy(p: &ModelParams, energy: f64, settings: &OrbitSettings) -> Result<()> {
    if !same_sign_check(p) {
        return Err(Error::Precondition("saddle-centers are not of matching type".into()));
    }
    let (low, high) = energy_window(p, settings);
    if !(energy > low && energy <= high) {
        return Err(Error::EnergyOutOfRange { energy, low, high });
    }
    Ok(())
}

/// Newton iteration on the section return map from a given anchor guess.
fn newton_from(
    p: &ModelParams,
    energy: f64,
    center: Saddle,
    guess: Vector2<f64>,
    settings: &OrbitSettings,
) -> Result<PeriodicOrbit> {
    let linear_period = 2.0 * PI / equilibrium_data(p, center).omega_pm;
    let cfg = &settings.integrator;
    let mut x = guess;
    let mut residual = f64::INFINITY;
    for iter in 0..settings.max_iter {
        let diverged = move || Error::NewtonDivergence { iterations: iter, residual, x1: x[0], x2: x[1] };
        let y2 = section_y2(x[0], x[1], energy).ok_or_else(diverged)?;
        let start = PhaseState::new(x[0], x[1], 0.0, y2);
        let (t, end, m) =
            first_return(&start, 0.25 * linear_period, 4.0 * linear_period, p, cfg).map_err(|_| diverged())?;
        let r = Vector2::new(end.x1 - x[0], end.x2 - x[1]);
        residual = r.norm();
        let diverged = move || Error::NewtonDivergence { iterations: iter, residual, x1: x[0], x2: x[1] };
        if residual < settings.newton_tol {
            return Ok(PeriodicOrbit { anchor_state: start, period: t, energy, center, floquet: None });
        }
        let dy2 = [-(x[0] - x[0].powi(3)) / y2, -x[1] / y2];
        let f = vector_field(&end, p).to_array();
        let col = |j: usize| -> [f64; 4] {
            std::array::from_fn(|i| m[(i, j)] + m[(i, 3)] * dy2[j])
        };
        let (c0, c1) = (col(0), col(1));
        let dt = [-c0[2] / f[2], -c1[2] / f[2]];
        let jac = Matrix2::new(
            c0[0] + f[0] * dt[0],
            c1[0] + f[0] * dt[1],
            c0[1] + f[1] * dt[0],
            c1[1] + f[1] * dt[1],
        );
        let step = (jac - Matrix2::identity())
            .try_inverse()
            .ok_or_else(diverged)?
            * (-r);
        let cap = 0.05;
        x += if step.norm() > cap { step * (cap / step.norm()) } else { step };
    }
    Err(Error::NewtonDivergence { iterations: settings.max_iter, residual, x1: x[0], x2: x[1] })
}

/// Lyapunov orbit of the given saddle-center family at the given energy.
pub fn find_periodic_orbit(p: &ModelParams, energy: f64, center: Saddle) -> Result<PeriodicOrbit> {
    find_periodic_orbit_with(p, energy, center, &OrbitSettings::default())
}

pub fn find_periodic_orbit_with(
    p: &ModelParams,
    energy: f64,
    center: Saddle,
    settings: &OrbitSettings,
) -> Result<PeriodicOrbit> {
    check_energy(p, energy, settings)?;
    newton_from(p, energy, center, initial_guess(p, energy, center), settings)
}

/// Orbit failures along a continuation, with the orbits found before the failure.
#[derive(Debug, Clone)]
pub struct FamilyResult {
    pub orbits: Vec<PeriodicOrbit>,
    pub failure: Option<(f64, Error)>,
}

/// Natural-parameter continuation: each orbit seeds the next solve. A failed
/// step is retried through intermediate energies before giving up.
pub fn continue_family(p: &ModelParams, energies: &[f64], center: Saddle, settings: &OrbitSettings) -> FamilyResult {
    let mut orbits: Vec<PeriodicOrbit> = Vec::new();
    for &energy in energies {
        let step = match orbits.last() {
            None => find_periodic_orbit_with(p, energy, center, settings),
            Some(prev) => check_energy(p, energy, settings).and_then(|_| continue_step(p, prev, energy, settings, 0)),
        };
        match step {
            Ok(o) => orbits.push(o),
            Err(e) => return FamilyResult { orbits, failure: Some((energy, e)) },
        }
    }
    FamilyResult { orbits, failure: None }
}

fn continue_step(
    p: &ModelParams,
    prev: &PeriodicOrbit,
    energy: f64,
    settings: &OrbitSettings,
    depth: usize,
) -> Result<PeriodicOrbit> {
    let guess = Vector2::new(prev.anchor_state.x1, prev.anchor_state.x2);
    match newton_from(p, energy, prev.center, guess, settings) {
        Ok(o) => Ok(o),
        Err(e) if depth >= 6 => Err(e),
        Err(_) => {
            let mid = continue_step(p, prev, 0.5 * (prev.energy + energy), settings, depth + 1)?;
            continue_step(p, &mid, energy, settings, depth + 1)
        }
    }
}

/// Distance between the anchor and its image after one period.
pub fn return_defect(orbit: &PeriodicOrbit, p: &ModelParams, cfg: &IntegratorConfig) -> Result<f64> {
    let (end, _) = flow_with_variation(&orbit.anchor_state, orbit.period, p, cfg)?;
    let a = orbit.anchor_state.to_array();
    Ok(end.to_array().iter().zip(a).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt())
}

/// `|H(anchor) − energy|`.
pub fn energy_defect(orbit: &PeriodicOrbit, p: &ModelParams) -> f64 {
    (hamiltonian(&orbit.anchor_state, p) - orbit.energy).abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn section_completion_is_on_level() {
        let p = ModelParams::new(0.005, 2.0, 2.0).unwrap();
        let y2 = section_y2(-0.98, 0.01, 0.28).unwrap();
        let s = PhaseState::new(-0.98, 0.01, 0.0, y2);
        assert!((hamiltonian(&s, &p) - 0.28).abs() < 1e-15);
        assert!(section_y2(0.0, 0.0, -0.1).is_none());
    }

    #[test]
    fn guess_is_close() {
        let p = ModelParams::new(0.005, 2.0, 2.0).unwrap();
        let o = find_periodic_orbit(&p, 0.28, Saddle::Left).unwrap();
        let g = initial_guess(&p, 0.28, Saddle::Left);
        assert!((g[0] - o.anchor_state.x1).abs() < 5e-3);
    }

    #[test]
    fn rejects_energy_below_saddle() {
        let p = ModelParams::new(0.005, 2.0, 2.0).unwrap();
        assert!(matches!(
            find_periodic_orbit(&p, 0.24, Saddle::Left),
            Err(Error::EnergyOutOfRange { .. })
        ));
        assert!(matches!(
            find_periodic_orbit(&p, 0.6, Saddle::Left),
            Err(Error::EnergyOutOfRange { .. })
        ));
    }

    #[test]
    fn variational_start_is_identity() {
        let (s, m) = split(&variational_start(&PhaseState::new(1.0, 2.0, 3.0, 4.0)));
        assert_eq!(s.y2, 4.0);
        assert_eq!(m, Matrix4::identity());
    }
}
