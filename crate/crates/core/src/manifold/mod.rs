//! Lyapunov orbits near the saddle-centers, traces of their stable and
//! unstable manifolds on the section `y1 = 0`, and the geometry of how those
//! traces meet.

mod floquet;
mod intersect;
mod orbit;
mod trace;

pub use floquet::{floquet_data, FloquetData};
pub use intersect::{classify_intersection, ClassifySettings, Crossing, IntersectionKind, IntersectionReport};
pub use orbit::{
    continue_family, energy_defect, find_periodic_orbit, find_periodic_orbit_with, return_defect, FamilyResult,
    OrbitSettings, PeriodicOrbit,
};
pub use trace::{
    hausdorff_distance, overlap_distance, project_to_energy, trace_manifold, BranchLabel, Heading, SectionCurve, Side, TraceSettings,
};

use rayon::prelude::*;

use crate::error::Result;
use crate::model::{ModelParams, Saddle};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ManifoldSettings {
    pub orbit: OrbitSettings,
    pub trace: TraceSettings,
    pub classify: ClassifySettings,
}

/// Both orbits at one energy and the two manifold pairs between them.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleEvidence {
    pub exists: bool,
    pub left_orbit: PeriodicOrbit,
    pub right_orbit: PeriodicOrbit,
    /// Unstable curve of the left orbit heading right, and the stable curve of
    /// the right orbit heading left.
    pub rightward_pair: (SectionCurve, SectionCurve),
    pub rightward_report: IntersectionReport,
    /// Unstable curve of the right orbit heading left, and the stable curve of
    /// the left orbit heading right.
    pub leftward_pair: (SectionCurve, SectionCurve),
    pub leftward_report: IntersectionReport,
}

/// Orbit with Floquet data at the given energy.
pub fn hyperbolic_orbit(p: &ModelParams, energy: f64, center: Saddle, settings: &OrbitSettings) -> Result<PeriodicOrbit> {
    let o = find_periodic_orbit_with(p, energy, center, settings)?;
    floquet_data(&o, p, &settings.integrator)
}

/// A heteroclinic cycle between the two orbits exists when both pairs of
/// manifold curves cross transversely.
pub fn detect_heteroclinic_cycle(p: &ModelParams, energy: f64, settings: &ManifoldSettings) -> Result<CycleEvidence> {
    let (left, right) = rayon::join(
        || hyperbolic_orbit(p, energy, Saddle::Left, &settings.orbit),
        || hyperbolic_orbit(p, energy, Saddle::Right, &settings.orbit),
    );
    let (left, right) = (left?, right?);
    let jobs = [
        (&left, Side::Unstable),
        (&right, Side::Stable),
        (&right, Side::Unstable),
        (&left, Side::Stable),
    ];
    let curves: Vec<SectionCurve> = jobs
        .par_iter()
        .map(|(o, side)| trace_manifold(o, *side, Heading::TowardPartner, p, &settings.trace))
        .collect::<Result<_>>()?;
    let mut curves = curves.into_iter();
    let mut next = || curves.next().expect("four curves");
    let rightward_pair = (next(), next());
    let leftward_pair = (next(), next());
    let rightward_report = classify_intersection(&rightward_pair.0, &rightward_pair.1, &settings.classify)?;
    let leftward_report = classify_intersection(&leftward_pair.0, &leftward_pair.1, &settings.classify)?;
    Ok(CycleEvidence {
        exists: rightward_report.kind == IntersectionKind::Transverse
            && leftward_report.kind == IntersectionKind::Transverse,
        left_orbit: left,
        right_orbit: right,
        rightward_pair,
        rightward_report,
        leftward_pair,
        leftward_report,
    })
}
