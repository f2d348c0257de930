use super::trace::{dist, distance_to_polyline, SectionCurve};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IntersectionKind {
    Transverse,
    Tangent,
    Disjoint,
}

impl IntersectionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            IntersectionKind::Transverse => "Transverse",
            IntersectionKind::Tangent => "Tangent",
            IntersectionKind::Disjoint => "Disjoint",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub point: [f64; 2],
    /// Angle between the two curves at the crossing, in `[0, π/2]`.
    pub angle: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifySettings {
    pub angle_tol: f64,
    pub gap_tol: f64,
    /// `|margin|` below this sets the boundary flag.
    pub boundary_margin: f64,
}

impl Default for ClassifySettings {
    fn default() -> Self {
        Self { angle_tol: 1e-5, gap_tol: 1e-5, boundary_margin: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntersectionReport {
    pub kind: IntersectionKind,
    /// Steepest crossing, for `Transverse`.
    pub witness: Option<Crossing>,
    /// Smallest distance between the curves, for `Disjoint`.
    pub gap: Option<f64>,
    pub crossings: Vec<Crossing>,
    pub min_distance: f64,
    /// Largest signed separation of the first curve on either side of the second.
    pub positive_extent: f64,
    pub negative_extent: f64,
    /// Balance of the two sides when the separation changes sign, otherwise
    /// minus the ratio of the closest to the farthest approach. Near zero
    /// means the verdict sits close to a tangency.
    pub margin: f64,
    pub boundary: bool,
}

fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn segment_crossing(p0: [f64; 2], p1: [f64; 2], q0: [f64; 2], q1: [f64; 2]) -> Option<Crossing> {
    let r = sub(p1, p0);
    let s = sub(q1, q0);
    let denom = cross(r, s);
    if denom == 0.0 {
        return None;
    }
    let qp = sub(q0, p0);
    let t = cross(qp, s) / denom;
    let u = cross(qp, r) / denom;
    // Half-open so a crossing at a shared vertex counts once.
    if !((0.0..1.0).contains(&t) && (0.0..1.0).contains(&u)) {
        return None;
    }
    let (lr, ls) = (r[0].hypot(r[1]), s[0].hypot(s[1]));
    let sin = (denom / (lr * ls)).abs().min(1.0);
    Some(Crossing { point: [p0[0] + t * r[0], p0[1] + t * r[1]], angle: sin.asin() })
}

/// Signed distance from `q` to the polyline when `q` projects onto the interior
/// of a segment; the sign says which side of the curve's direction `q` is on.
fn signed_separation(q: [f64; 2], c: &SectionCurve) -> Option<f64> {
    let mut best: Option<(f64, f64)> = None;
    for (i, j) in c.segments() {
        let (a, b) = (c.points[i], c.points[j]);
        let d = sub(b, a);
        let l2 = d[0] * d[0] + d[1] * d[1];
        if l2 == 0.0 {
            continue;
        }
        let qa = sub(q, a);
        let s = (qa[0] * d[0] + qa[1] * d[1]) / l2;
        if !(0.0..=1.0).contains(&s) {
            continue;
        }
        let foot = [a[0] + s * d[0], a[1] + s * d[1]];
        let dq = dist(q, foot);
        if best.is_none_or(|(bd, _)| dq < bd) {
            best = Some((dq, cross(d, qa).signum() * dq));
        }
    }
    let (unsigned, signed) = best?;
    // A vertex of the polyline closer than every segment foot: no clean projection.
    let vertex = c.points.iter().map(|&v| dist(q, v)).fold(f64::INFINITY, f64::min);
    (unsigned <= vertex * (1.0 + 1e-12)).then_some(signed)
}

/// Polyline intersection test between an unstable and a stable curve.
pub fn classify_intersection(
    u: &SectionCurve,
    s: &SectionCurve,
    settings: &ClassifySettings,
) -> Result<IntersectionReport> {
    for c in [u, s] {
        if c.points.len() < 2 {
            return Err(Error::Unresolved(format!("{} has {} points", c.branch_label.name(), c.points.len())));
        }
        if !c.is_resolved() {
            return Err(Error::Unresolved(format!(
                "{} has a gap of {:e} above the arc bound {:e}",
                c.branch_label.name(),
                c.max_gap(),
                c.arc_bound
            )));
        }
    }
    let mut crossings = Vec::new();
    for (i, j) in u.segments() {
        for (k, l) in s.segments() {
            if let Some(c) = segment_crossing(u.points[i], u.points[j], s.points[k], s.points[l]) {
                crossings.push(c);
            }
        }
    }
    let min_distance = if crossings.is_empty() {
        let a = u.points.iter().map(|&q| distance_to_polyline(q, s)).fold(f64::INFINITY, f64::min);
        let b = s.points.iter().map(|&q| distance_to_polyline(q, u)).fold(f64::INFINITY, f64::min);
        a.min(b)
    } else {
        0.0
    };

    let seps: Vec<f64> = u.points.iter().filter_map(|&q| signed_separation(q, s)).collect();
    let positive_extent = seps.iter().copied().fold(0.0, f64::max);
    let negative_extent = seps.iter().map(|d| -d).fold(0.0, f64::max);
    let largest = positive_extent.max(negative_extent);
    let margin = if largest == 0.0 {
        0.0
    } else if positive_extent > 0.0 && negative_extent > 0.0 {
        positive_extent.min(negative_extent) / largest
    } else {
        -seps.iter().map(|d| d.abs()).fold(f64::INFINITY, f64::min) / largest
    };

    let witness = crossings.iter().copied().max_by(|a, b| a.angle.total_cmp(&b.angle));
    let kind = match witness {
        Some(w) if w.angle > settings.angle_tol => IntersectionKind::Transverse,
        None if min_distance > settings.gap_tol => IntersectionKind::Disjoint,
        _ => IntersectionKind::Tangent,
    };
    Ok(IntersectionReport {
        kind,
        witness: if kind == IntersectionKind::Transverse { witness } else { None },
        gap: (kind == IntersectionKind::Disjoint).then_some(min_distance),
        crossings,
        min_distance,
        positive_extent,
        negative_extent,
        margin,
        boundary: margin.abs() < settings.boundary_margin,
    })
}
