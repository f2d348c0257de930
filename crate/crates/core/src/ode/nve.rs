use nalgebra::Matrix2;

use super::{solve, IntegratorConfig, Trajectory};
use crate::error::Result;
use crate::model::{heteroclinic_orbit, Branch, ModelParams, PhaseState, PlanarInvariantSystem};

/// Base point on the heteroclinic orbit and the transverse fundamental matrix there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NveState {
    pub base: PhaseState,
    pub eta_matrix: Matrix2<f64>,
}

/// Solution of the normal variational equation along one heteroclinic branch.
/// The matrix is stored column-major in a four-component trajectory.
#[derive(Debug, Clone)]
pub struct NveTrajectory {
    branch: Branch,
    inner: Trajectory<4>,
}

fn pack(m: &Matrix2<f64>) -> [f64; 4] {
    [m[(0, 0)], m[(1, 0)], m[(0, 1)], m[(1, 1)]]
}

fn unpack(v: [f64; 4]) -> Matrix2<f64> {
    Matrix2::new(v[0], v[2], v[1], v[3])
}

impl NveTrajectory {
    fn state(&self, t: f64, v: [f64; 4]) -> NveState {
        let (x, _) = heteroclinic_orbit(t, self.branch);
        NveState {
            base: PhaseState::new(x[0], x[1], 0.0, 0.0),
            eta_matrix: unpack(v),
        }
    }

    pub fn branch(&self) -> Branch {
        self.branch
    }

    pub fn t_start(&self) -> f64 {
        self.inner.t_start()
    }

    pub fn t_end(&self) -> f64 {
        self.inner.t_end()
    }

    pub fn first(&self) -> NveState {
        self.state(self.inner.t_start(), self.inner.first())
    }

    pub fn last(&self) -> NveState {
        self.state(self.inner.t_end(), self.inner.last())
    }

    pub fn at(&self, t: f64) -> Option<NveState> {
        self.inner.interpolate(t).map(|v| self.state(t, v))
    }

    pub fn samples(&self) -> Vec<(f64, NveState)> {
        self.inner
            .times()
            .into_iter()
            .zip(self.inner.states())
            .map(|(t, v)| (t, self.state(t, v)))
            .collect()
    }
}

/// Integrates `η' = J D²_yH(xʰ(t), 0) η` for a 2×2 matrix `η`, with the
/// base orbit evaluated from its closed form.
pub fn integrate_with_nve(
    initial_eta: Matrix2<f64>,
    t_span: (f64, f64),
    b: Branch,
    p: &ModelParams,
    cfg: &IntegratorConfig,
) -> Result<NveTrajectory> {
    cfg.validate()?;
    let (t0, t1) = t_span;
    let rhs = |t: f64, v: &[f64; 4]| {
        let (x, _) = heteroclinic_orbit(t, b);
        let k = p.normal_hessian(x[0], x[1])[(0, 0)];
        [v[1], -k * v[0], v[3], -k * v[2]]
    };
    let y0 = pack(&initial_eta);
    let mut inner = Trajectory::new(t0, y0);
    solve(&rhs, t0, y0, t1, cfg, |seg| {
        inner.push(seg.clone());
        true
    })?;
    Ok(NveTrajectory { branch: b, inner })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_span_returns_initial() {
        let p = ModelParams::new(0.005, 2.0, 2.0).unwrap();
        let tr = integrate_with_nve(Matrix2::identity(), (0.0, 0.0), Branch::Plus, &p, &Default::default()).unwrap();
        assert_eq!(tr.last().eta_matrix, Matrix2::identity());
    }

    #[test]
    fn determinant_preserved() {
        let p = ModelParams::new(0.005, 2.0, 2.0).unwrap();
        let m0 = Matrix2::new(1.0, 0.3, -0.2, 0.8);
        for b in [Branch::Plus, Branch::Minus] {
            let tr = integrate_with_nve(m0, (-20.0, 20.0), b, &p, &Default::default()).unwrap();
            let d0 = m0.determinant();
            assert!((tr.last().eta_matrix.determinant() - d0).abs() < 1e-7);
            for (t, s) in tr.samples() {
                let elapsed = (t + 20.0).abs().max(1.0);
                assert!((s.eta_matrix.determinant() - d0).abs() < 1e-9 * elapsed);
            }
        }
    }

    #[test]
    fn base_lies_on_orbit() {
        let p = ModelParams::new(0.0, 2.0, 2.0).unwrap();
        let tr = integrate_with_nve(Matrix2::identity(), (0.0, 1.0), Branch::Minus, &p, &Default::default()).unwrap();
        let s = tr.at(0.0).unwrap();
        assert!((s.base.x1).abs() < 1e-15);
        assert!((s.base.x2 + 1.0 / 2f64.sqrt()).abs() < 1e-15);
    }
}
