use super::{DenseSegment, Trajectory};
use crate::model::PhaseState;

const MAX_ITER: usize = 60;
const RESIDUAL_TOL: f64 = 1e-10;
// Interior samples per accepted step, so two crossings inside one step are not missed.
const SUBDIVISIONS: usize = 4;

/// Crossing orientation, measured along the order of integration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Rising,
    Falling,
    Either,
}

impl Direction {
    fn accepts(self, ga: f64, gb: f64) -> bool {
        let rising = ga < 0.0 && gb >= 0.0;
        let falling = ga > 0.0 && gb <= 0.0;
        match self {
            Direction::Rising => rising,
            Direction::Falling => falling,
            Direction::Either => rising || falling,
        }
    }
}

/// Root of `g` in the bracket `[a, b]` (sign change assumed).
/// Bisection shrinks the bracket first, then an Illinois-modified secant
/// finishes; the total is capped at 60 iterations.
pub fn refine_crossing(g: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (mut a, mut b) = (a, b);
    let (mut ga, mut gb) = (g(a), g(b));
    if ga == 0.0 {
        return a;
    }
    if gb == 0.0 {
        return b;
    }
    let width0 = (b - a).abs();
    let mut iter = 0;
    while iter < MAX_ITER / 3 && (b - a).abs() > 1e-3 * width0 {
        let m = 0.5 * (a + b);
        let gm = g(m);
        iter += 1;
        if gm == 0.0 {
            return m;
        }
        if (gm < 0.0) == (ga < 0.0) {
            a = m;
            ga = gm;
        } else {
            b = m;
            gb = gm;
        }
    }
    let mut side = 0i8;
    let mut t = a - ga * (b - a) / (gb - ga);
    let mut t_prev = f64::NAN;
    while iter < MAX_ITER {
        t = a - ga * (b - a) / (gb - ga);
        if !t.is_finite() || t <= a.min(b) || t >= a.max(b) {
            t = 0.5 * (a + b);
        }
        let gt = g(t);
        iter += 1;
        let scale = t.abs().max(1.0);
        let settled = (t - t_prev).abs() < 1e-14 * scale || (b - a).abs() <= 4.0 * f64::EPSILON * scale;
        if gt == 0.0 || (gt.abs() < RESIDUAL_TOL && settled) {
            return t;
        }
        t_prev = t;
        if (gt < 0.0) == (ga < 0.0) {
            a = t;
            ga = gt;
            if side == -1 {
                gb *= 0.5;
            }
            side = -1;
        } else {
            b = t;
            gb = gt;
            if side == 1 {
                ga *= 0.5;
            }
            side = 1;
        }
    }
    t
}

fn crossings_in_segment<const N: usize>(
    seg: &DenseSegment<N>,
    g: &impl Fn(&[f64; N]) -> f64,
    direction: Direction,
    g_start: f64,
    out: &mut Vec<(f64, [f64; N])>,
) -> f64 {
    let mut ta = seg.t_start();
    let mut ga = g_start;
    for k in 1..=SUBDIVISIONS {
        let tb = if k == SUBDIVISIONS {
            seg.t_end()
        } else {
            seg.t_start() + seg.step() * k as f64 / SUBDIVISIONS as f64
        };
        let gb = g(&seg.eval(tb));
        if direction.accepts(ga, gb) {
            let t = refine_crossing(|t| g(&seg.eval(t)), ta, tb);
            out.push((t, seg.eval(t)));
        }
        ta = tb;
        ga = gb;
    }
    ga
}

/// All crossings of the zero level of `g` along a trajectory of any dimension.
pub fn find_event_with<const N: usize>(
    traj: &Trajectory<N>,
    g: impl Fn(&[f64; N]) -> f64,
    direction: Direction,
) -> Vec<(f64, [f64; N])> {
    let mut out = Vec::new();
    let mut ga = g(&traj.first());
    for seg in traj.segments() {
        ga = crossings_in_segment(seg, &g, direction, ga, &mut out);
    }
    out
}

/// Section crossings of a phase-space trajectory.
pub fn find_event(
    traj: &Trajectory<4>,
    event: impl Fn(&PhaseState) -> f64,
    direction: Direction,
) -> Vec<(f64, PhaseState)> {
    find_event_with(traj, |y| event(&PhaseState::from_array(*y)), direction)
        .into_iter()
        .map(|(t, y)| (t, PhaseState::from_array(y)))
        .collect()
}

/// Incremental detector fed with segments as the solver accepts them.
pub struct EventLocator<G, const N: usize> {
    g: G,
    direction: Direction,
    last: Option<f64>,
}

impl<G: Fn(&[f64; N]) -> f64, const N: usize> EventLocator<G, N> {
    pub fn new(g: G, direction: Direction) -> Self {
        Self { g, direction, last: None }
    }

    /// Crossings inside `seg`, in integration order.
    pub fn check(&mut self, seg: &DenseSegment<N>) -> Vec<(f64, [f64; N])> {
        let ga = self.last.unwrap_or_else(|| (self.g)(&seg.y_start()));
        let mut out = Vec::new();
        self.last = Some(crossings_in_segment(seg, &self.g, self.direction, ga, &mut out));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::heteroclinic_x1;
    use crate::ode::{integrate, solve, IntegratorConfig};

    fn sine_trajectory(t_end: f64) -> Trajectory<2> {
        let sys = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        let mut traj = Trajectory::new(0.0, [0.0, 1.0]);
        let cfg = IntegratorConfig { max_step: 0.1, ..Default::default() };
        solve(&sys, 0.0, [0.0, 1.0], t_end, &cfg, |s| {
            traj.push(s.clone());
            true
        })
        .unwrap();
        traj
    }

    #[test]
    fn sine_crossings_at_multiples_of_pi() {
        let traj = sine_trajectory(10.0);
        let hits = find_event_with(&traj, |y| y[0], Direction::Either);
        assert_eq!(hits.len(), 3);
        for (k, (t, y)) in hits.iter().enumerate() {
            assert!((t - (k + 1) as f64 * std::f64::consts::PI).abs() < 1e-8);
            assert!(y[0].abs() < 1e-10);
        }
        let falling = find_event_with(&traj, |y| y[0], Direction::Falling);
        assert_eq!(falling.len(), 2);
        let rising = find_event_with(&traj, |y| y[0], Direction::Rising);
        assert_eq!(rising.len(), 1);
    }

    #[test]
    fn constant_sign_gives_nothing() {
        let traj = sine_trajectory(10.0);
        assert!(find_event_with(&traj, |y| 2.0 + y[0], Direction::Either).is_empty());
    }

    #[test]
    fn closed_form_heteroclinic_crossing() {
        let t = refine_crossing(heteroclinic_x1, -3.0, 2.0);
        assert!(t.abs() < 1e-9);
    }

    #[test]
    fn refinement_is_idempotent() {
        let traj = sine_trajectory(10.0);
        let hits = find_event_with(&traj, |y| y[0], Direction::Either);
        for (t, _) in hits {
            let seg = traj
                .segments()
                .iter()
                .find(|s| s.t_start() <= t && t <= s.t_end())
                .unwrap();
            let g = |s: f64| seg.eval(s)[0];
            let (a, b) = (seg.t_start().max(t - 1e-3), seg.t_end().min(t + 1e-3));
            if g(a) * g(b) < 0.0 {
                let again = refine_crossing(g, a, b);
                assert!((again - t).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn locator_matches_batch_search() {
        let p = crate::model::ModelParams::new(0.005, 2.0, 2.0).unwrap();
        let s = PhaseState::new(-0.9, 0.1, 0.05, 0.1);
        let cfg = IntegratorConfig::analysis();
        let traj = integrate(s, (0.0, 20.0), &p, &cfg).unwrap();
        let batch = find_event(&traj, |z| z.y1, Direction::Rising);
        let mut loc = EventLocator::new(|y: &[f64; 4]| y[2], Direction::Rising);
        let mut inc = Vec::new();
        for seg in traj.segments() {
            inc.extend(loc.check(seg));
        }
        assert_eq!(batch.len(), inc.len());
        assert!(!batch.is_empty());
        for ((ta, _), (tb, _)) in batch.iter().zip(&inc) {
            assert_eq!(ta, tb);
        }
    }

    #[test]
    fn backward_trajectory_crossings() {
        let sys = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        let mut traj = Trajectory::new(0.0, [0.0, 1.0]);
        solve(&sys, 0.0, [0.0, 1.0], -7.0, &IntegratorConfig::analysis(), |s| {
            traj.push(s.clone());
            true
        })
        .unwrap();
        let hits = find_event_with(&traj, |y| y[0], Direction::Either);
        assert_eq!(hits.len(), 2);
        assert!((hits[0].0 + std::f64::consts::PI).abs() < 1e-8);
    }
}
