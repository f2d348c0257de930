use rayon::prelude::*;

use super::orbit::{section_y2, PeriodicOrbit};
use crate::error::{Error, Result};
use crate::model::{hamiltonian, ModelParams, PhaseState, PlanarInvariantSystem, Saddle};
use crate::ode::{model_rhs, solve, Direction, EventLocator, IntegratorConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Stable,
    Unstable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Heading {
    TowardPartner,
    Away,
}

/// Which manifold branch a curve represents: side, the orbit it belongs to,
/// and whether it leaves that orbit to the right (`x1` increasing) or left.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BranchLabel {
    pub side: Side,
    pub center: Saddle,
    pub rightward: bool,
}

impl BranchLabel {
    pub fn new(side: Side, center: Saddle, heading: Heading) -> Self {
        let toward = center == Saddle::Left;
        let rightward = match heading {
            Heading::TowardPartner => toward,
            Heading::Away => !toward,
        };
        Self { side, center, rightward }
    }

    /// Short identifier, e.g. `unstable_right_of_left` for the right branch of
    /// the unstable manifold of the orbit around the left saddle-center.
    pub fn name(&self) -> String {
        format!(
            "{}_{}_of_{}",
            match self.side {
                Side::Stable => "stable",
                Side::Unstable => "unstable",
            },
            if self.rightward { "right" } else { "left" },
            match self.center {
                Saddle::Left => "left",
                Saddle::Right => "right",
            }
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSettings {
    /// Distance of the first seed from the orbit anchor.
    pub seed_offset: f64,
    /// Seeds in the first pass.
    pub n_seeds: usize,
    /// Upper bound on seeds after refinement.
    pub max_seeds: usize,
    /// Highest section return recorded.
    pub max_return: usize,
    /// Points with `|x1| ≤ window` are kept; a seed stops once it passes the
    /// window on the far side.
    pub window: f64,
    pub arc_bound: f64,
    pub t_max: f64,
    pub escape: f64,
    pub integrator: IntegratorConfig,
}

impl Default for TraceSettings {
    fn default() -> Self {
        Self {
            seed_offset: 1e-6,
            n_seeds: 64,
            max_seeds: 4096,
            max_return: 8,
            window: 0.85,
            arc_bound: 2e-3,
            t_max: 60.0,
            escape: 2.0,
            integrator: IntegratorConfig::analysis(),
        }
    }
}

/// Ordered section points of one manifold branch.
#[derive(Debug, Clone, PartialEq)]
pub struct SectionCurve {
    /// `(x1, x2)` on `y1 = 0`, `y2 > 0`.
    pub points: Vec<[f64; 2]>,
    /// Curve parameter: seed position in the fundamental domain plus return count.
    pub params: Vec<f64>,
    /// Section return of each point.
    pub returns: Vec<usize>,
    /// `i` is listed when points `i` and `i + 1` are not joined (the curve
    /// leaves the window in between).
    pub breaks: Vec<usize>,
    pub branch_label: BranchLabel,
    pub crossing_index: usize,
    pub energy: f64,
    pub arc_bound: f64,
    pub seeds_used: usize,
    pub escaped_seeds: usize,
}

impl SectionCurve {
    /// Pairs of indices forming polyline segments.
    pub fn segments(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.points.len().saturating_sub(1))
            .filter(move |i| self.breaks.binary_search(i).is_err())
            .map(|i| (i, i + 1))
    }

    /// Longest joined segment.
    pub fn max_gap(&self) -> f64 {
        self.segments().map(|(i, j)| dist(self.points[i], self.points[j])).fold(0.0, f64::max)
    }

    pub fn is_resolved(&self) -> bool {
        self.max_gap() <= self.arc_bound
    }

    /// Full phase-space states of the points.
    pub fn states(&self) -> Vec<PhaseState> {
        self.points
            .iter()
            .map(|&[x1, x2]| PhaseState::new(x1, x2, 0.0, section_y2(x1, x2, self.energy).unwrap_or(0.0)))
            .collect()
    }

    /// Mirror image under `x2 → −x2`.
    pub fn reflected(&self) -> SectionCurve {
        let mut c = self.clone();
        for pt in &mut c.points {
            pt[1] = -pt[1];
        }
        c
    }
}

pub(crate) fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Moves a section state back onto the energy level along `∇H`.
pub fn project_to_energy(s: &PhaseState, energy: f64, p: &ModelParams) -> PhaseState {
    let mut z = s.to_array();
    for _ in 0..20 {
        let st = PhaseState::from_array(z);
        let dh = hamiltonian(&st, p) - energy;
        if dh.abs() < 1e-12 {
            break;
        }
        let g = p.energy_gradient(&st);
        let n2: f64 = g.iter().map(|v| v * v).sum();
        for (zi, gi) in z.iter_mut().zip(g) {
            *zi -= dh * gi / n2;
        }
    }
    PhaseState::from_array(z)
}

#[derive(Debug, Clone, Copy)]
struct Hit {
    q: f64,
    point: [f64; 2],
    ret: usize,
    inside: bool,
}

struct Tracer<'a> {
    p: &'a ModelParams,
    anchor: [f64; 2],
    dir: [f64; 2],
    mu: f64,
    forward: bool,
    far_side: f64,
    energy: f64,
    settings: &'a TraceSettings,
}

impl Tracer<'_> {
    /// Section hits of the seed at fundamental-domain position `u ∈ [0, 1)`;
    /// `None` when the seed escapes.
    fn run(&self, u: f64) -> Result<Option<Vec<Hit>>> {
        let st = self.settings;
        let s = st.seed_offset * self.mu.powf(u);
        let x1 = self.anchor[0] + s * self.dir[0];
        let x2 = self.anchor[1] + s * self.dir[1];
        let y2 = section_y2(x1, x2, self.energy)
            .ok_or_else(|| Error::Unresolved(format!("seed ({x1}, {x2}) is off the energy level")))?;
        let start = [x1, x2, 0.0, y2];
        let t_end = if self.forward { st.t_max } else { -st.t_max };
        let rhs = model_rhs(self.p);
        let mut locator = EventLocator::new(|y: &[f64; 4]| y[2], Direction::Either);
        let mut hits = Vec::new();
        let mut escaped = false;
        solve(&rhs, 0.0, start, t_end, &st.integrator, |seg| {
            for (t, y) in locator.check(seg) {
                if t.abs() < 1e-9 || y[3] <= 0.0 {
                    continue;
                }
                let z = project_to_energy(&PhaseState::from_array(y), self.energy, self.p);
                let ret = hits.len() + 1;
                hits.push(Hit {
                    q: u + ret as f64,
                    point: [z.x1, z.x2],
                    ret,
                    inside: z.x1.abs() <= st.window,
                });
                if ret >= st.max_return {
                    return false;
                }
            }
            let y = seg.y_end();
            if y[0].abs() > st.escape || y.iter().any(|v| v.abs() > 10.0 * st.escape) {
                escaped = true;
                return false;
            }
            y[0] * self.far_side <= st.window
        })?;
        Ok(if escaped { None } else { Some(hits) })
    }
}

/// Traces one manifold branch of a periodic orbit as a curve on `y1 = 0`.
///
/// Seeds sit on the linear direction through the anchor at distances
/// `seed_offset · μ^u` for `u` in one fundamental domain of the return map, so
/// the `k`-th return of a seed at `u` continues the curve at parameter `u + k`.
/// Seeds are added where neighbouring points are farther apart than the arc bound.
pub fn trace_manifold(
    orbit: &PeriodicOrbit,
    side: Side,
    heading: Heading,
    p: &ModelParams,
    settings: &TraceSettings,
) -> Result<SectionCurve> {
    let fl = orbit
        .floquet
        .as_ref()
        .ok_or_else(|| Error::Precondition("Floquet data missing".into()))?;
    let label = BranchLabel::new(side, orbit.center, heading);
    let sign = if label.rightward { 1.0 } else { -1.0 };
    let mut dir = match side {
        Side::Unstable => fl.section_unstable,
        Side::Stable => fl.section_stable,
    };
    if dir[0] * sign < 0.0 {
        dir = [-dir[0], -dir[1]];
    }
    let tracer = Tracer {
        p,
        anchor: [orbit.anchor_state.x1, orbit.anchor_state.x2],
        dir,
        mu: fl.mu,
        forward: side == Side::Unstable,
        far_side: sign,
        energy: orbit.energy,
        settings,
    };

    let n0 = settings.n_seeds.max(2);
    let mut seeds: Vec<f64> = (0..n0).map(|j| j as f64 / n0 as f64).collect();
    let mut hits: Vec<Hit> = Vec::new();
    let mut escaped = 0;
    let mut pending = seeds.clone();
    loop {
        let results: Vec<Result<Option<Vec<Hit>>>> = pending.par_iter().map(|&u| tracer.run(u)).collect();
        for r in results {
            match r? {
                Some(h) => hits.extend(h),
                None => escaped += 1,
            }
        }
        hits.sort_by(|a, b| a.q.total_cmp(&b.q));
        let mut next = Vec::new();
        for w in hits.windows(2) {
            let (a, b) = (w[0], w[1]);
            if a.inside && b.inside && dist(a.point, b.point) > settings.arc_bound {
                let mid = 0.5 * (a.q + b.q);
                let u = mid - mid.floor();
                if (b.q - a.q) > 1e-12 {
                    next.push(u);
                }
            }
        }
        next.sort_by(f64::total_cmp);
        next.dedup();
        if next.is_empty() || seeds.len() >= settings.max_seeds {
            break;
        }
        next.truncate(settings.max_seeds - seeds.len());
        seeds.extend(&next);
        pending = next;
    }

    let mut points = Vec::new();
    let mut params = Vec::new();
    let mut returns = Vec::new();
    let mut breaks = Vec::new();
    let mut outside_since_last = false;
    for h in &hits {
        if !h.inside {
            outside_since_last = true;
            continue;
        }
        if outside_since_last && !points.is_empty() {
            breaks.push(points.len() - 1);
        }
        outside_since_last = false;
        points.push(h.point);
        params.push(h.q);
        returns.push(h.ret);
    }
    Ok(SectionCurve {
        points,
        params,
        returns,
        breaks,
        branch_label: label,
        crossing_index: settings.max_return,
        energy: orbit.energy,
        arc_bound: settings.arc_bound,
        seeds_used: seeds.len(),
        escaped_seeds: escaped,
    })
}

/// Largest distance from a point of one curve to the polyline of the other, both ways.
pub fn hausdorff_distance(a: &SectionCurve, b: &SectionCurve) -> f64 {
    let one_way = |from: &SectionCurve, to: &SectionCurve| {
        from.points
            .iter()
            .map(|&q| distance_to_polyline(q, to))
            .fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

/// Like [`hausdorff_distance`], but ignores points whose nearest point on the
/// other curve is one of its two ends, so curves clipped at slightly different
/// places compare by their shared extent.
pub fn overlap_distance(a: &SectionCurve, b: &SectionCurve) -> f64 {
    let one_way = |from: &SectionCurve, to: &SectionCurve| {
        let (first, last) = match (to.points.first(), to.points.last()) {
            (Some(&f), Some(&l)) => (f, l),
            _ => return f64::INFINITY,
        };
        from.points
            .iter()
            .map(|&q| {
                let d = distance_to_polyline(q, to);
                let at_end = (dist(q, first) - d).abs() <= 1e-15 || (dist(q, last) - d).abs() <= 1e-15;
                if at_end { 0.0 } else { d }
            })
            .fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

pub(crate) fn distance_to_polyline(q: [f64; 2], c: &SectionCurve) -> f64 {
    let mut best = c.points.iter().map(|&v| dist(q, v)).fold(f64::INFINITY, f64::min);
    for (i, j) in c.segments() {
        let (a, b) = (c.points[i], c.points[j]);
        let d = [b[0] - a[0], b[1] - a[1]];
        let l2 = d[0] * d[0] + d[1] * d[1];
        if l2 == 0.0 {
            continue;
        }
        let s = ((q[0] - a[0]) * d[0] + (q[1] - a[1]) * d[1]) / l2;
        if (0.0..=1.0).contains(&s) {
            best = best.min(dist(q, [a[0] + s * d[0], a[1] + s * d[1]]));
        }
    }
    best
}
