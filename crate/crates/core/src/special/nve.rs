use std::f64::consts::SQRT_2;

use num_complex::Complex64;

use super::hyper::{gamma_ratio, hypergeometric_series};
use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Exponents and parameters of the hypergeometric form of the NVE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypergeomParams {
    pub rho_plus: Complex64,
    pub rho_minus: Complex64,
    pub chi_plus: Complex64,
    pub chi_minus: Complex64,
    pub c1: Complex64,
    pub c2: Complex64,
    pub c3: Complex64,
}

/// Connection coefficients between the solution bases at τ = 0 and τ = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConnectionData {
    pub l11: Complex64,
    pub l12: Complex64,
    pub l21: Complex64,
    pub l22: Complex64,
    pub l0: Complex64,
}

pub fn hypergeom_params(p: &ModelParams) -> HypergeomParams {
    let i = Complex64::i();
    let rho_plus = -i * p.omega_plus() / SQRT_2;
    let rho_minus = -i * p.omega_minus() / SQRT_2;
    let root = Complex64::new(1.0 + 8.0 * p.beta2(), 0.0).sqrt();
    let chi_plus = 0.5 * (1.0 + root);
    let chi_minus = 0.5 * (1.0 - root);
    let c3 = 2.0 * rho_minus + 1.0;
    // Im c3 = −√2 ω₋ ≠ 0 under the validity condition.
    debug_assert!(c3.im != 0.0);
    HypergeomParams {
        rho_plus,
        rho_minus,
        chi_plus,
        chi_minus,
        c1: chi_plus + rho_plus + rho_minus,
        c2: chi_minus + rho_plus + rho_minus,
        c3,
    }
}

pub fn connection_coefficients(hp: &HypergeomParams) -> Result<ConnectionData> {
    let (c1, c2, c3) = (hp.c1, hp.c2, hp.c3);
    let one = Complex64::new(1.0, 0.0);
    let two = Complex64::new(2.0, 0.0);
    let s = c3 - c1 - c2;
    let l11 = gamma_ratio(c3, s, c3 - c1, c3 - c2)?;
    let l12 = gamma_ratio(two - c3, s, one - c1, one - c2)?;
    let l21 = gamma_ratio(c3, -s, c1, c2)?;
    let l22 = gamma_ratio(two - c3, -s, c1 - c3 + one, c2 - c3 + one)?;
    Ok(ConnectionData { l11, l12, l21, l22, l0: l11 * l22 - l12 * l21 })
}

/// `ln τ`, `ln(1 − τ)` for τ = (1 + tanh(t/√2))/2, without cancellation in
/// either tail.
pub fn orbit_coordinate(t: f64) -> (f64, f64) {
    fn softplus(x: f64) -> f64 {
        if x > 0.0 {
            x + (-x).exp().ln_1p()
        } else {
            x.exp().ln_1p()
        }
    }
    let u = SQRT_2 * t;
    (-softplus(-u), -softplus(u))
}

fn series_and_slope(a: Complex64, b: Complex64, c: Complex64, z: f64) -> Result<(Complex64, Complex64)> {
    let z = Complex64::new(z, 0.0);
    let f = hypergeometric_series(a, b, c, z)?;
    let df = a * b / c * hypergeometric_series(a + 1.0, b + 1.0, c + 1.0, z)?;
    Ok((f, df))
}

/// Complex solution η̄(t) of the NVE along the `Plus` heteroclinic orbit and
/// its time derivative. η̄ ~ e^{iω₋t} as t → −∞.
pub fn nve_solution_analytic(t: f64, p: &ModelParams) -> Result<(Complex64, Complex64)> {
    if !t.is_finite() {
        return Err(Error::Precondition(format!("t = {t}")));
    }
    let hp = hypergeom_params(p);
    let (rp, rm) = (hp.rho_plus, hp.rho_minus);
    let (c1, c2, c3) = (hp.c1, hp.c2, hp.c3);
    let (ln_tau, ln_comp) = orbit_coordinate(t);
    let tau = ln_tau.exp();
    let comp = ln_comp.exp();
    let tc = (ln_tau + ln_comp).exp();
    let one = Complex64::new(1.0, 0.0);

    if tau <= 0.5 {
        let pref = (-rm * ln_tau + rp * ln_comp).exp();
        let (f, df) = series_and_slope(c1 - c3 + one, c2 - c3 + one, 2.0 - c3, tau)?;
        let eta = pref * f;
        let deta = SQRT_2 * ((-rm * comp - rp * tau) * eta + pref * tc * df);
        return Ok((eta, deta));
    }

    let cd = connection_coefficients(&hp)?;
    let s = c3 - c1 - c2;
    let mut eta = Complex64::new(0.0, 0.0);
    let mut deta = Complex64::new(0.0, 0.0);
    if cd.l12 != Complex64::new(0.0, 0.0) {
        let pref = cd.l12 * (rm * ln_tau + rp * ln_comp).exp();
        let (f, df) = series_and_slope(c1, c2, one - s, comp)?;
        eta += pref * f;
        deta += SQRT_2 * ((rm * comp - rp * tau) * pref * f - pref * tc * df);
    }
    if cd.l22 != Complex64::new(0.0, 0.0) {
        let pref = cd.l22 * (rm * ln_tau - rp * ln_comp).exp();
        let (f, df) = series_and_slope(c3 - c1, c3 - c2, one + s, comp)?;
        eta += pref * f;
        deta += SQRT_2 * ((rm * comp + rp * tau) * pref * f - pref * tc * df);
    }
    Ok((eta, deta))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decoupled_exponents() {
        let hp = hypergeom_params(&ModelParams::new(0.0, 0.0, 2.0).unwrap());
        assert!((hp.chi_plus - 1.0).norm() < 1e-15);
        assert!(hp.chi_minus.norm() < 1e-15);
        let expected = Complex64::new(0.0, -SQRT_2);
        assert!((hp.rho_plus - expected).norm() < 1e-15);
        assert!((hp.rho_minus - expected).norm() < 1e-15);
    }

    #[test]
    fn orbit_coordinate_tails() {
        let (a, b) = orbit_coordinate(0.0);
        assert!((a - 0.5f64.ln()).abs() < 1e-16 && (b - 0.5f64.ln()).abs() < 1e-16);
        let (a, b) = orbit_coordinate(100.0);
        assert!((b + SQRT_2 * 100.0).abs() < 1e-12);
        assert!(a.abs() < 1e-60);
        let (a, _) = orbit_coordinate(-100.0);
        assert!((a + SQRT_2 * 100.0).abs() < 1e-12);
    }

    #[test]
    fn both_representations_agree_at_midpoint() {
        // At τ = 1/2 the two-sided formula and the τ = 0 series must match.
        let p = ModelParams::new(0.005, 2.0, 2.0).unwrap();
        let (e0, d0) = nve_solution_analytic(0.0, &p).unwrap();
        let (e1, d1) = nve_solution_analytic(1e-13, &p).unwrap();
        assert!((e0 - e1).norm() < 1e-10);
        assert!((d0 - d1).norm() < 1e-10);
    }
}
