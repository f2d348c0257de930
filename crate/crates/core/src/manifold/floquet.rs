use nalgebra::{Matrix4, Vector4, SVD};
use num_complex::Complex64;

use super::orbit::{flow_with_variation, PeriodicOrbit};
use crate::error::{Error, Result};
use crate::model::{vector_field, ModelParams};
use crate::ode::IntegratorConfig;

const HYPERBOLIC_MARGIN: f64 = 1e-6;
const RETURN_TOL: f64 = 1e-8;

/// Spectrum and hyperbolic directions of the period map.
#[derive(Debug, Clone, PartialEq)]
pub struct FloquetData {
    pub multipliers: [Complex64; 4],
    /// Real multiplier larger than one.
    pub mu: f64,
    /// Its reciprocal partner as computed.
    pub mu_stable: f64,
    pub unstable_dir: [f64; 4],
    pub stable_dir: [f64; 4],
    /// The same directions projected along the flow onto `y1 = 0`, in `(x1, x2)`.
    pub section_unstable: [f64; 2],
    pub section_stable: [f64; 2],
    pub period_map: Matrix4<f64>,
}

impl FloquetData {
    pub fn reciprocal_defect(&self) -> f64 {
        (self.mu * self.mu_stable - 1.0).abs()
    }

    pub fn determinant(&self) -> Complex64 {
        self.multipliers.iter().product()
    }
}

fn null_vector(m: &Matrix4<f64>, value: f64) -> Vector4<f64> {
    let svd = SVD::new(m - Matrix4::identity() * value, false, true);
    let v_t = svd.v_t.expect("requested V");
    let k = svd.singular_values.imin();
    let v: Vector4<f64> = v_t.row(k).transpose();
    v / v.norm()
}

/// Period map of the variational flow and its hyperbolic eigen-directions.
pub fn floquet_data(orbit: &PeriodicOrbit, p: &ModelParams, cfg: &IntegratorConfig) -> Result<PeriodicOrbit> {
    let (end, pm) = flow_with_variation(&orbit.anchor_state, orbit.period, p, cfg)?;
    let start = orbit.anchor_state.to_array();
    let defect = end.to_array().iter().zip(start).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt();
    if defect > RETURN_TOL {
        return Err(Error::Precondition(format!("period map misses the anchor by {defect:e}")));
    }
    let ev = pm.complex_eigenvalues();
    let multipliers = [ev[0], ev[1], ev[2], ev[3]];
    let largest = multipliers
        .iter()
        .filter(|z| z.im.abs() <= 1e-9 * z.norm().max(1.0))
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    if !(largest > 1.0 + HYPERBOLIC_MARGIN) {
        return Err(Error::NoHyperbolicPair { largest });
    }
    let mu = largest;
    let mu_stable = multipliers
        .iter()
        .filter(|z| z.im.abs() <= 1e-9 * z.norm().max(1.0))
        .map(|z| z.re)
        .min_by(|a, b| (a * mu - 1.0).abs().total_cmp(&(b * mu - 1.0).abs()))
        .unwrap_or(f64::NAN);
    let vu = null_vector(&pm, mu);
    let vs = null_vector(&pm, mu_stable);
    let f = vector_field(&orbit.anchor_state, p).to_array();
    let project = |v: &Vector4<f64>| -> [f64; 2] {
        let c = v[2] / f[2];
        let w = [v[0] - c * f[0], v[1] - c * f[1]];
        let n = w[0].hypot(w[1]);
        [w[0] / n, w[1] / n]
    };
    let floquet = FloquetData {
        multipliers,
        mu,
        mu_stable,
        unstable_dir: [vu[0], vu[1], vu[2], vu[3]],
        stable_dir: [vs[0], vs[1], vs[2], vs[3]],
        section_unstable: project(&vu),
        section_stable: project(&vs),
        period_map: pm,
    };
    Ok(PeriodicOrbit { floquet: Some(floquet), ..orbit.clone() })
}
