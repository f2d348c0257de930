use num_complex::Complex64;

use super::gamma::{is_nonpositive_integer, log_gamma, rgamma};
use crate::error::{Error, Result};

const SERIES_TOL: f64 = 1e-16;
const SERIES_CAP: usize = 10_000;
const DIRECT_RADIUS: f64 = 0.5;
const SERIES_LIMIT: f64 = 0.9;

/// Plain Gauss series `Σ (a)ₖ(b)ₖ/((c)ₖ k!) zᵏ`, truncated when a term falls
/// below 1e-16 of the partial sum (10 000-term cap).
pub fn hypergeometric_series(a: Complex64, b: Complex64, c: Complex64, z: Complex64) -> Result<Complex64> {
    if is_nonpositive_integer(c) {
        return Err(Error::HypergeometricPole(format!("c = {c}")));
    }
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for k in 0..SERIES_CAP {
        let kf = k as f64;
        term *= (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * z;
        sum += term;
        if term.norm() <= SERIES_TOL * sum.norm() {
            // Two consecutive small terms guard against a coincidental near-zero.
            let kf = kf + 1.0;
            let next = term * (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * z;
            if next.norm() <= SERIES_TOL * sum.norm() {
                return Ok(sum + next);
            }
        }
        if term == Complex64::new(0.0, 0.0) {
            return Ok(sum);
        }
    }
    Err(Error::HypergeometricNonConvergence {
        terms: SERIES_CAP,
        last_term: term.norm(),
        tau_re: z.re,
        tau_im: z.im,
    })
}

fn near_integer(z: Complex64) -> bool {
    z.im.abs() < 1e-8 && (z.re - z.re.round()).abs() < 1e-8
}

/// `Γ(n1)Γ(n2) / (Γ(d1)Γ(d2))` with denominator poles giving zero.
pub(crate) fn gamma_ratio(n1: Complex64, n2: Complex64, d1: Complex64, d2: Complex64) -> Result<Complex64> {
    let r = rgamma(d1) * rgamma(d2);
    if r == Complex64::new(0.0, 0.0) {
        return Ok(r);
    }
    Ok((log_gamma(n1)? + log_gamma(n2)?).exp() * r)
}

/// Gauss hypergeometric function ₂F₁(a, b; c; z).
///
/// Direct series for |z| ≤ 1/2; the z → 1 − z connection formula when
/// |1 − z| ≤ 1/2; the Pfaff transformation when |z/(z − 1)| ≤ 1/2; the
/// direct series again inside |z| < 0.9.
pub fn gauss_2f1(a: Complex64, b: Complex64, c: Complex64, z: Complex64) -> Result<Complex64> {
    if is_nonpositive_integer(c) {
        return Err(Error::HypergeometricPole(format!("c = {c}")));
    }
    if z.norm() <= DIRECT_RADIUS {
        return hypergeometric_series(a, b, c, z);
    }
    let one = Complex64::new(1.0, 0.0);
    let w = one - z;
    let s = c - a - b;
    if w.norm() <= DIRECT_RADIUS && !near_integer(s) {
        let first = gamma_ratio(c, s, c - a, c - b)?;
        let second = gamma_ratio(c, -s, a, b)?;
        let mut value = Complex64::new(0.0, 0.0);
        if first != Complex64::new(0.0, 0.0) {
            value += first * hypergeometric_series(a, b, one - s, w)?;
        }
        if second != Complex64::new(0.0, 0.0) {
            value += second * (s * w.ln()).exp() * hypergeometric_series(c - a, c - b, one + s, w)?;
        }
        return Ok(value);
    }
    let v = z / (z - 1.0);
    if v.norm() <= DIRECT_RADIUS {
        return Ok((-a * w.ln()).exp() * hypergeometric_series(a, c - b, c, v)?);
    }
    if z.norm() < SERIES_LIMIT {
        return hypergeometric_series(a, b, c, z);
    }
    Err(Error::HypergeometricNonConvergence {
        terms: 0,
        last_term: f64::NAN,
        tau_re: z.re,
        tau_im: z.im,
    })
}
