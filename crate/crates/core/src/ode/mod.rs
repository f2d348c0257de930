//! Adaptive Dormand–Prince 5(4) integration with dense output.
//!
//! The solver is generic over the state dimension so the same stepper drives
//! the four-dimensional flow, its variational equation, and the 2×2 normal
//! variational equation along the heteroclinic orbit.

mod dopri;
mod events;
mod nve;

pub use dopri::{solve, DenseSegment, SolveStats};
pub use events::{find_event, find_event_with, refine_crossing, Direction, EventLocator};
pub use nve::{integrate_with_nve, NveState, NveTrajectory};

use crate::error::{Error, Result};
use crate::model::{ModelParams, PhaseState};

/// Right-hand side of `y' = f(t, y)`.
pub trait OdeSystem<const N: usize>: Sync {
    fn rhs(&self, t: f64, y: &[f64; N]) -> [f64; N];
}

impl<F, const N: usize> OdeSystem<N> for F
where
    F: Fn(f64, &[f64; N]) -> [f64; N] + Sync,
{
    fn rhs(&self, t: f64, y: &[f64; N]) -> [f64; N] {
        self(t, y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

impl IntegratorConfig {
    /// Tolerances for limit and Melnikov computations.
    pub fn analysis() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: 0.5,
            max_steps: 2_000_000,
        }
    }

    /// Looser tolerances for manifold sweeps.
    pub fn sweep() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            max_step: 0.5,
            max_steps: 2_000_000,
        }
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.rel_tol > 0.0
            && self.abs_tol > 0.0
            && self.max_step > 0.0
            && self.max_steps > 0
            && self.rel_tol.is_finite()
            && self.abs_tol.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("{self:?}")))
        }
    }
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self::analysis()
    }
}

/// Accepted steps of one integration together with their interpolants.
/// Times are strictly monotone (increasing or decreasing with the direction
/// of integration).
#[derive(Debug, Clone)]
pub struct Trajectory<const N: usize> {
    segments: Vec<DenseSegment<N>>,
    t0: f64,
    y0: [f64; N],
}

impl<const N: usize> Trajectory<N> {
    pub fn new(t0: f64, y0: [f64; N]) -> Self {
        Self { segments: Vec::new(), t0, y0 }
    }

    pub fn push(&mut self, seg: DenseSegment<N>) {
        self.segments.push(seg);
    }

    pub fn segments(&self) -> &[DenseSegment<N>] {
        &self.segments
    }

    pub fn t_start(&self) -> f64 {
        self.t0
    }

    pub fn t_end(&self) -> f64 {
        self.segments.last().map_or(self.t0, |s| s.t_end())
    }

    pub fn first(&self) -> [f64; N] {
        self.y0
    }

    pub fn last(&self) -> [f64; N] {
        self.segments.last().map_or(self.y0, |s| s.y_end())
    }

    /// Sample times: the start followed by the end of every accepted step.
    pub fn times(&self) -> Vec<f64> {
        std::iter::once(self.t0)
            .chain(self.segments.iter().map(|s| s.t_end()))
            .collect()
    }

    pub fn states(&self) -> Vec<[f64; N]> {
        std::iter::once(self.y0)
            .chain(self.segments.iter().map(|s| s.y_end()))
            .collect()
    }

    fn forward(&self) -> bool {
        self.t_end() >= self.t0
    }

    /// Dense-output value at `t`, or `None` outside the integrated span.
    pub fn interpolate(&self, t: f64) -> Option<[f64; N]> {
        if self.segments.is_empty() {
            return (t == self.t0).then_some(self.y0);
        }
        let fwd = self.forward();
        let (lo, hi) = if fwd { (self.t0, self.t_end()) } else { (self.t_end(), self.t0) };
        if !(lo..=hi).contains(&t) {
            return None;
        }
        let idx = self.segments.partition_point(|s| {
            if fwd {
                s.t_end() < t
            } else {
                s.t_end() > t
            }
        });
        let seg = &self.segments[idx.min(self.segments.len() - 1)];
        Some(seg.eval(t))
    }
}

impl Trajectory<4> {
    pub fn phase_states(&self) -> Vec<(f64, PhaseState)> {
        self.times()
            .into_iter()
            .zip(self.states())
            .map(|(t, y)| (t, PhaseState::from_array(y)))
            .collect()
    }

    pub fn phase_at(&self, t: f64) -> Option<PhaseState> {
        self.interpolate(t).map(PhaseState::from_array)
    }
}

pub(crate) fn model_rhs(p: &ModelParams) -> impl Fn(f64, &[f64; 4]) -> [f64; 4] + Sync + '_ {
    move |_t, y| crate::model::vector_field(&PhaseState::from_array(*y), p).to_array()
}

/// Integrates the quartic system over `t_span` (either direction).
///
/// A start on the invariant plane `y = 0` integrates the restricted planar
/// system, so the transverse components stay exactly zero.
pub fn integrate(
    initial: PhaseState,
    t_span: (f64, f64),
    p: &ModelParams,
    cfg: &IntegratorConfig,
) -> Result<Trajectory<4>> {
    cfg.validate()?;
    let (t0, t1) = t_span;
    if initial.on_invariant_plane() {
        let planar = |_t: f64, y: &[f64; 2]| {
            let f = crate::model::vector_field(&PhaseState::new(y[0], y[1], 0.0, 0.0), p);
            [f.x1, f.x2]
        };
        let mut traj2 = Trajectory::new(t0, [initial.x1, initial.x2]);
        solve(&planar, t0, [initial.x1, initial.x2], t1, cfg, |seg| {
            traj2.push(seg.clone());
            true
        })?;
        let mut traj = Trajectory::new(t0, initial.to_array());
        for seg in traj2.segments() {
            traj.push(seg.embed(|v| [v[0], v[1], 0.0, 0.0]));
        }
        return Ok(traj);
    }
    let rhs = model_rhs(p);
    let mut traj = Trajectory::new(t0, initial.to_array());
    solve(&rhs, t0, initial.to_array(), t1, cfg, |seg| {
        traj.push(seg.clone());
        true
    })?;
    Ok(traj)
}
