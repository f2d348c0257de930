use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// True when `z` is 0, −1, −2, …
pub fn is_nonpositive_integer(z: Complex64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()
}

/// `sin(πx)` with exact zeros at the integers.
fn sin_pi_real(x: f64) -> f64 {
    let r = x - 2.0 * (x / 2.0).round();
    if r == r.round() {
        return 0.0;
    }
    (PI * r).sin()
}

fn cos_pi_real(x: f64) -> f64 {
    let r = x - 2.0 * (x / 2.0).round();
    if r.abs() == 0.5 {
        return 0.0;
    }
    (PI * r).cos()
}

/// `sin(πz)` for complex `z`, exactly zero at real integers.
pub fn sin_pi(z: Complex64) -> Complex64 {
    let (x, y) = (z.re, z.im);
    Complex64::new(sin_pi_real(x) * (PI * y).cosh(), cos_pi_real(x) * (PI * y).sinh())
}

fn lanczos_log_gamma(z: Complex64) -> Complex64 {
    // Valid for Re z >= 0.5.
    let z = z - 1.0;
    let mut a = Complex64::new(LANCZOS_COEF[0], 0.0);
    for (k, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        a += c / (z + k as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    HALF_LN_2PI + (z + 0.5) * t.ln() - t + a.ln()
}

/// Log-gamma via the Lanczos approximation, with reflection for `Re z < 1/2`.
/// The imaginary part is a branch of `arg Γ(z)`; `exp` of the result is `Γ(z)`.
pub fn log_gamma(z: Complex64) -> Result<Complex64> {
    if is_nonpositive_integer(z) {
        return Err(Error::GammaPole { re: z.re, im: z.im });
    }
    if z.re >= 0.5 {
        return Ok(lanczos_log_gamma(z));
    }
    let s = sin_pi(z);
    Ok(Complex64::new(PI.ln(), 0.0) - s.ln() - lanczos_log_gamma(1.0 - z))
}

pub fn gamma(z: Complex64) -> Result<Complex64> {
    log_gamma(z).map(|l| l.exp())
}

/// `1/Γ(z)`, exactly zero at the poles of Γ.
pub fn rgamma(z: Complex64) -> Complex64 {
    match log_gamma(z) {
        Ok(l) => (-l).exp(),
        Err(_) => Complex64::new(0.0, 0.0),
    }
}
