use super::{IntegratorConfig, OdeSystem};
use crate::error::{Error, Result};

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// Dense output (continuous extension of order 4).
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;
const EXPO: f64 = 0.2 - BETA * 0.75;

/// One accepted step `[t, t + h]` and its quartic interpolant.
#[derive(Debug, Clone)]
pub struct DenseSegment<const N: usize> {
    t: f64,
    h: f64,
    rcont: [[f64; N]; 5],
}

impl<const N: usize> DenseSegment<N> {
    pub fn t_start(&self) -> f64 {
        self.t
    }

    pub fn t_end(&self) -> f64 {
        self.t + self.h
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    pub fn y_start(&self) -> [f64; N] {
        self.rcont[0]
    }

    pub fn y_end(&self) -> [f64; N] {
        let mut y = [0.0; N];
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.rcont[0][i] + self.rcont[1][i];
        }
        y
    }

    /// Interpolated state at `t` (meaningful for `t` inside the step).
    pub fn eval(&self, t: f64) -> [f64; N] {
        if t == self.t_end() {
            return self.y_end();
        }
        let theta = (t - self.t) / self.h;
        let theta1 = 1.0 - theta;
        let r = &self.rcont;
        let mut y = [0.0; N];
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = r[0][i] + theta * (r[1][i] + theta1 * (r[2][i] + theta * (r[3][i] + theta1 * r[4][i])));
        }
        y
    }

    /// Maps the interpolant coefficients through a linear embedding.
    pub fn embed<const M: usize>(&self, f: impl Fn([f64; N]) -> [f64; M]) -> DenseSegment<M> {
        DenseSegment {
            t: self.t,
            h: self.h,
            rcont: [f(self.rcont[0]), f(self.rcont[1]), f(self.rcont[2]), f(self.rcont[3]), f(self.rcont[4])],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub t: f64,
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
    /// True when the observer stopped the integration before `t_end`.
    pub stopped: bool,
}

#[inline]
fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        *o += h * acc;
    }
    out
}

fn error_norm<const N: usize>(y0: &[f64; N], y1: &[f64; N], err: &[f64; N], cfg: &IntegratorConfig) -> f64 {
    let mut sum = 0.0;
    for i in 0..N {
        let sc = cfg.abs_tol + cfg.rel_tol * y0[i].abs().max(y1[i].abs());
        sum += (err[i] / sc).powi(2);
    }
    (sum / N as f64).sqrt()
}

fn initial_step<const N: usize, S: OdeSystem<N> + ?Sized>(
    sys: &S,
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    dir: f64,
    cfg: &IntegratorConfig,
) -> f64 {
    let scale = |i: usize| cfg.abs_tol + cfg.rel_tol * y0[i].abs();
    let d0 = (0..N).map(|i| (y0[i] / scale(i)).powi(2)).sum::<f64>().sqrt() / (N as f64).sqrt();
    let d1 = (0..N).map(|i| (f0[i] / scale(i)).powi(2)).sum::<f64>().sqrt() / (N as f64).sqrt();
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h0 = h0.min(cfg.max_step);
    let y1 = axpy(y0, dir * h0, &[(1.0, f0)]);
    let f1 = sys.rhs(t0 + dir * h0, &y1);
    let d2 = (0..N).map(|i| ((f1[i] - f0[i]) / scale(i)).powi(2)).sum::<f64>().sqrt() / (N as f64).sqrt() / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(cfg.max_step)
}

/// Integrates from `t0` to `t_end` (either direction), calling `observer` on
/// every accepted step. The observer returns `false` to stop early.
pub fn solve<const N: usize, S, O>(
    sys: &S,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    cfg: &IntegratorConfig,
    mut observer: O,
) -> Result<SolveStats>
where
    S: OdeSystem<N> + ?Sized,
    O: FnMut(&DenseSegment<N>) -> bool,
{
    cfg.validate()?;
    let mut stats = SolveStats { t: t0, accepted: 0, rejected: 0, evaluations: 0, stopped: false };
    if t_end == t0 {
        return Ok(stats);
    }
    if !(t0.is_finite() && t_end.is_finite()) {
        return Err(Error::Config(format!("non-finite time span ({t0}, {t_end})")));
    }
    let dir = (t_end - t0).signum();
    let mut t = t0;
    let mut y = y0;
    let mut k1 = sys.rhs(t, &y);
    stats.evaluations += 1;
    let mut h = dir * initial_step(sys, t, &y, &k1, dir, cfg);
    stats.evaluations += 1;
    let mut err_old: f64 = 1e-4;
    let mut last_rejected = false;
    let mut steps = 0usize;

    loop {
        if steps >= cfg.max_steps {
            return Err(Error::StepLimit { t, max_steps: cfg.max_steps });
        }
        steps += 1;
        if h.abs() > cfg.max_step {
            h = dir * cfg.max_step;
        }
        let remaining = t_end - t;
        let last = (h - remaining) * dir >= 0.0 || (remaining - h).abs() <= 1e-14 * t.abs().max(1.0);
        if last {
            h = remaining;
        }
        if h.abs() < 1e-14 * t.abs().max(1.0) {
            return Err(Error::StepUnderflow { t, h });
        }

        let k2 = sys.rhs(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
        let k3 = sys.rhs(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = sys.rhs(t + C4 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = sys.rhs(t + C5 * h, &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let y6 = axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
        let t_new = if last { t_end } else { t + h };
        let k6 = sys.rhs(t + h, &y6);
        let y_new = axpy(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = sys.rhs(t_new, &y_new);
        stats.evaluations += 6;

        let mut err_vec = [0.0; N];
        for i in 0..N {
            err_vec[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let err = error_norm(&y, &y_new, &err_vec, cfg);
        if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
            if h.abs() < 1e-12 {
                return Err(Error::NonFinite { t });
            }
            h *= FAC_MIN;
            stats.rejected += 1;
            last_rejected = true;
            continue;
        }

        if err <= 1.0 {
            let mut rcont = [[0.0; N]; 5];
            for i in 0..N {
                let ydiff = y_new[i] - y[i];
                let bspl = h * k1[i] - ydiff;
                rcont[0][i] = y[i];
                rcont[1][i] = ydiff;
                rcont[2][i] = bspl;
                rcont[3][i] = ydiff - h * k7[i] - bspl;
                rcont[4][i] =
                    h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
            }
            let seg = DenseSegment { t, h: t_new - t, rcont };
            stats.accepted += 1;
            t = t_new;
            y = y_new;
            k1 = k7;
            stats.t = t;
            if !observer(&seg) {
                stats.stopped = true;
                return Ok(stats);
            }
            if last {
                return Ok(stats);
            }
            let mut fac = SAFETY * err.max(1e-10).powf(-EXPO) * err_old.powf(BETA);
            fac = fac.clamp(FAC_MIN, FAC_MAX);
            if last_rejected {
                fac = fac.min(1.0);
            }
            err_old = err.max(1e-4);
            h *= fac;
            last_rejected = false;
        } else {
            let fac = (SAFETY * err.powf(-0.2)).max(FAC_MIN);
            h *= fac;
            stats.rejected += 1;
            last_rejected = true;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_and_dense_output() {
        let sys = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        let cfg = IntegratorConfig::analysis();
        let mut segs = Vec::new();
        let stats = solve(&sys, 0.0, [0.0, 1.0], 20.0, &cfg, |s| {
            segs.push(s.clone());
            true
        })
        .unwrap();
        assert_eq!(stats.t, 20.0);
        let end = segs.last().unwrap().y_end();
        assert!((end[0] - 20f64.sin()).abs() < 1e-8);
        for s in &segs {
            for k in 0..5 {
                let t = s.t_start() + s.step() * k as f64 / 4.0;
                let y = s.eval(t);
                assert!((y[0] - t.sin()).abs() < 1e-8, "dense output at {t}");
            }
        }
    }

    #[test]
    fn zero_span_is_noop() {
        let sys = |_t: f64, y: &[f64; 1]| [y[0]];
        let stats = solve(&sys, 1.0, [1.0], 1.0, &IntegratorConfig::analysis(), |_| true).unwrap();
        assert_eq!(stats.accepted, 0);
    }

    #[test]
    fn observer_can_stop() {
        let sys = |_t: f64, y: &[f64; 1]| [y[0]];
        let mut n = 0;
        let stats = solve(&sys, 0.0, [1.0], 10.0, &IntegratorConfig::analysis(), |_| {
            n += 1;
            n < 3
        })
        .unwrap();
        assert!(stats.stopped);
        assert_eq!(stats.accepted, 3);
    }

    #[test]
    fn blow_up_is_reported() {
        let sys = |_t: f64, y: &[f64; 1]| [y[0] * y[0]];
        let err = solve(&sys, 0.0, [1.0], 2.0, &IntegratorConfig::analysis(), |_| true).unwrap_err();
        assert!(matches!(
            err,
            Error::StepUnderflow { .. } | Error::NonFinite { .. } | Error::StepLimit { .. }
        ));
    }
}
