use nalgebra::Vector2;
use rayon::prelude::*;
use serde_json::{json, Value};

use heteroclinic_core::manifold::{
    detect_heteroclinic_cycle, CycleEvidence, IntersectionKind, IntersectionReport, ManifoldSettings, PeriodicOrbit,
    SectionCurve,
};
use heteroclinic_core::melnikov::{
    b0_analytic, b_matrices_numeric, melnikov_closed_form, melnikov_period, melnikov_with_b0,
    r_matrix_and_classification, trace_g_zero_curve, MelnikovReport,
};
use heteroclinic_core::model::{ModelParams, Saddle};
use heteroclinic_core::monodromy::{
    integrability_verdict, max_abs, monodromy_closed_form_equal_ratio, monodromy_nve, Commutativity,
    IntegrabilityVerdict,
};
use heteroclinic_core::ode::IntegratorConfig;
use heteroclinic_core::special::{connection_coefficients, hypergeom_params};
use heteroclinic_core::Error;

use crate::args::{ClassifyArgs, Format, GCurveArgs, IntegratorArgs, ManifoldArgs, MelnikovArgs, MonodromyArgs, ParamArgs};
use crate::output::{cmatrix, gnuplot, json_artifact, matrix, Artifact, Cell, Csv, Outcome};

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numerical(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::ParameterDomain(_) | Error::Config(_) | Error::Precondition(_) | Error::EnergyOutOfRange { .. } => {
                Failure::Config(e.to_string())
            }
            other => Failure::Numerical(other),
        }
    }
}

pub struct Context {
    pub format: Option<Format>,
    pub gnuplot: bool,
    pub integrator: IntegratorArgs,
}

impl Context {
    fn integrator(&self, base: IntegratorConfig) -> Result<IntegratorConfig, Failure> {
        let a = &self.integrator;
        let cfg = IntegratorConfig {
            rel_tol: a.rel_tol.unwrap_or(base.rel_tol),
            abs_tol: a.abs_tol.unwrap_or(base.abs_tol),
            max_step: a.max_step.unwrap_or(base.max_step),
            max_steps: a.max_steps.unwrap_or(base.max_steps),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn with_plot(&self, mut outcome: Outcome, title: &str, x_col: usize, y_cols: &[usize]) -> Outcome {
        if self.gnuplot && outcome.primary.name.ends_with(".csv") {
            outcome.extra.push(gnuplot(&outcome.primary, title, x_col, y_cols));
        }
        outcome
    }
}

fn params(b1: f64, b2: f64, w: f64) -> Result<ModelParams, Failure> {
    Ok(ModelParams::new(b1, b2, w)?)
}

fn params_json(p: &ModelParams) -> Value {
    json!({ "beta1": p.beta1(), "beta2": p.beta2(), "omega": p.omega() })
}

fn melnikov_json(r: &MelnikovReport) -> Value {
    json!({
        "b0": matrix(&r.b0),
        "r_matrix": matrix(&r.r_matrix),
        "det_r": r.det_r,
        "det_r_formula": r.det_r_formula,
        "tr_r": r.tr_r,
        "g_value": r.g_value,
        "phi0": r.phi0,
        "classification": r.classification.as_str(),
    })
}

fn commutativity_str(c: Commutativity) -> &'static str {
    match c {
        Commutativity::Commutative => "Commutative",
        Commutativity::NotCommutative => "NotCommutative",
        Commutativity::Indeterminate => "Indeterminate",
    }
}

fn verdict_json(v: &IntegrabilityVerdict) -> Value {
    json!({
        "verdict": v.verdict.label(),
        "condition_c_holds": v.condition_c_holds,
        "n_witness": v.n_witness,
        "commutativity": commutativity_str(v.commutativity),
        "commutator_norm": v.commutator_norm,
        "inverse_defect": v.inverse_defect,
        "inverse_relation_holds": v.inverse_relation_holds,
    })
}

/// `min:max:count` into `count` equally spaced values.
pub fn parse_range(spec: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::Config(format!("range '{spec}' is not min:max:count"));
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if n == 0 || !lo.is_finite() || !hi.is_finite() {
        return Err(bad());
    }
    Ok(if n == 1 {
        vec![lo]
    } else {
        (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
    })
}

pub fn classify(a: &ClassifyArgs, ctx: &Context) -> Result<Outcome, Failure> {
    if a.beta1_range.is_none() && a.beta2_range.is_none() {
        let p = params(a.beta1.unwrap_or_default(), a.beta2.unwrap_or_default(), a.omega)?;
        let rep = r_matrix_and_classification(&p)?;
        let v = integrability_verdict(&p)?;
        if ctx.format == Some(Format::Csv) {
            let mut csv = sweep_csv();
            sweep_row(&mut csv, p.beta1(), p.beta2(), p.omega(), &Ok((rep, v)));
            return Ok(Outcome::single(csv.into_artifact("classify.csv")));
        }
        let doc = json!({
            "command": "classify",
            "params": params_json(&p),
            "melnikov": melnikov_json(&rep),
            "integrability": verdict_json(&v),
        });
        return Ok(Outcome::single(json_artifact("classify.json", &doc)));
    }
    let b1s = match &a.beta1_range {
        Some(r) => parse_range(r)?,
        None => vec![a.beta1.ok_or_else(|| Failure::Config("--beta1 or --beta1-range required".into()))?],
    };
    let b2s = match &a.beta2_range {
        Some(r) => parse_range(r)?,
        None => vec![a.beta2.ok_or_else(|| Failure::Config("--beta2 or --beta2-range required".into()))?],
    };
    let grid: Vec<(f64, f64)> = b1s.iter().flat_map(|&b1| b2s.iter().map(move |&b2| (b1, b2))).collect();
    let w = a.omega;
    let rows: Vec<(f64, f64, Result<(MelnikovReport, IntegrabilityVerdict), Error>)> = grid
        .par_iter()
        .map(|&(b1, b2)| {
            let r = ModelParams::new(b1, b2, w)
                .and_then(|p| Ok((r_matrix_and_classification(&p)?, integrability_verdict(&p)?)));
            (b1, b2, r)
        })
        .collect();
    if ctx.format == Some(Format::Json) {
        let items: Vec<Value> = rows
            .iter()
            .map(|(b1, b2, r)| match r {
                Ok((rep, v)) => json!({
                    "params": { "beta1": b1, "beta2": b2, "omega": w },
                    "melnikov": melnikov_json(rep),
                    "integrability": verdict_json(v),
                }),
                Err(e) => json!({ "params": { "beta1": b1, "beta2": b2, "omega": w }, "error": e.to_string() }),
            })
            .collect();
        let doc = json!({ "command": "classify", "sweep": items });
        return Ok(Outcome::single(json_artifact("classify_sweep.json", &doc)));
    }
    let mut csv = sweep_csv();
    for (b1, b2, r) in &rows {
        sweep_row(&mut csv, *b1, *b2, w, r);
    }
    Ok(ctx.with_plot(Outcome::single(csv.into_artifact("classify_sweep.csv")), "G over the sweep", 1, &[6]))
}

fn sweep_csv() -> Csv {
    Csv::new(&[
        ("beta1", "1"),
        ("beta2", "1"),
        ("omega", "1"),
        ("det_r", "1"),
        ("tr_r", "1"),
        ("g_value", "1"),
        ("classification", "label"),
        ("commutator_norm", "1"),
        ("verdict", "label"),
        ("status", "label"),
    ])
}

fn sweep_row(csv: &mut Csv, b1: f64, b2: f64, w: f64, r: &Result<(MelnikovReport, IntegrabilityVerdict), Error>) {
    match r {
        Ok((rep, v)) => csv.row(&[
            Cell::F(b1),
            Cell::F(b2),
            Cell::F(w),
            Cell::F(rep.det_r),
            Cell::F(rep.tr_r),
            Cell::F(rep.g_value),
            Cell::S(rep.classification.as_str().into()),
            Cell::F(v.commutator_norm),
            Cell::S(v.verdict.label().into()),
            Cell::S("ok".into()),
        ]),
        Err(e) => csv.row(&[
            Cell::F(b1),
            Cell::F(b2),
            Cell::F(w),
            Cell::F(f64::NAN),
            Cell::F(f64::NAN),
            Cell::F(f64::NAN),
            Cell::S(String::new()),
            Cell::F(f64::NAN),
            Cell::S(String::new()),
            Cell::S(format!("error: {e}")),
        ]),
    }
}

pub fn g_curve(a: &GCurveArgs, ctx: &Context) -> Result<Outcome, Failure> {
    if a.points == 0 || !(a.beta2_max >= a.beta2_min) {
        return Err(Failure::Config("need points >= 1 and beta2-max >= beta2-min".into()));
    }
    let curve = trace_g_zero_curve(a.omega, (a.beta2_min, a.beta2_max), a.points)?;
    if ctx.format == Some(Format::Json) {
        let doc = json!({
            "command": "g-curve",
            "omega": a.omega,
            "points": curve.points.iter().map(|(b1, b2)| json!({ "beta1": b1, "beta2": b2 })).collect::<Vec<_>>(),
            "skipped": curve.skipped.iter().map(|(b2, e)| json!({ "beta2": b2, "reason": e.to_string() })).collect::<Vec<_>>(),
        });
        return Ok(Outcome::single(json_artifact("g_curve.json", &doc)));
    }
    let mut csv = Csv::new(&[("beta1", "1"), ("beta2", "1")]);
    for (b1, b2) in &curve.points {
        csv.row(&[Cell::F(*b1), Cell::F(*b2)]);
    }
    Ok(ctx.with_plot(Outcome::single(csv.into_artifact("g_curve.csv")), "zero curve of G", 1, &[2]))
}

pub fn melnikov(a: &MelnikovArgs, ctx: &Context) -> Result<Outcome, Failure> {
    let p = params(a.params.beta1, a.params.beta2, a.params.omega)?;
    if a.points == 0 {
        return Err(Failure::Config("need points >= 1".into()));
    }
    let cfg = ctx.integrator(IntegratorConfig::analysis())?;
    let b = b_matrices_numeric(&p, a.t_limit, &cfg)?;
    let period = melnikov_period(&p);
    let eta0 = Vector2::new(1.0, 0.0);
    let rows: Vec<(f64, f64, f64)> = (0..a.points)
        .map(|k| {
            let t0 = period * k as f64 / a.points as f64;
            Ok((t0, melnikov_closed_form(t0, &p)?, melnikov_with_b0(t0, eta0, &p, &b.b0)))
        })
        .collect::<Result<_, Error>>()?;
    if ctx.format == Some(Format::Json) {
        let doc = json!({
            "command": "melnikov",
            "params": params_json(&p),
            "period": period,
            "t_limit": a.t_limit,
            "rows": rows.iter().map(|(t, c, d)| json!({ "t0": t, "m_closed": c, "m_direct": d })).collect::<Vec<_>>(),
        });
        return Ok(Outcome::single(json_artifact("melnikov.json", &doc)));
    }
    let mut csv = Csv::new(&[("t0", "time"), ("M_closed", "energy"), ("M_direct", "energy")]);
    for (t, c, d) in rows {
        csv.row(&[Cell::F(t), Cell::F(c), Cell::F(d)]);
    }
    Ok(ctx.with_plot(Outcome::single(csv.into_artifact("melnikov.csv")), "Melnikov function", 1, &[2, 3]))
}

pub fn monodromy(a: &MonodromyArgs, _ctx: &Context) -> Result<Outcome, Failure> {
    let ParamArgs { beta1, beta2, omega } = a.params;
    let p = params(beta1, beta2, omega)?;
    let pair = monodromy_nve(&p)?;
    let v = integrability_verdict(&p)?;
    let doc = json!({
        "command": "monodromy",
        "params": params_json(&p),
        "basis": pair.basis_note,
        "m_plus": cmatrix(&pair.m_plus),
        "m_minus": cmatrix(&pair.m_minus),
        "commutator_norm": pair.commutator_norm,
        "inverse_defect": pair.inverse_defect(),
        "integrability": verdict_json(&v),
    });
    Ok(Outcome::single(json_artifact("monodromy.json", &doc)))
}

fn manifold_settings(a: &ManifoldArgs, ctx: &Context) -> Result<ManifoldSettings, Failure> {
    let mut s = ManifoldSettings::default();
    s.trace.integrator = ctx.integrator(s.trace.integrator)?;
    let t = &mut s.trace;
    t.seed_offset = a.seed_offset.unwrap_or(t.seed_offset);
    t.n_seeds = a.n_seeds.unwrap_or(t.n_seeds);
    t.max_seeds = a.max_seeds.unwrap_or(t.max_seeds);
    t.max_return = a.max_return.unwrap_or(t.max_return);
    t.arc_bound = a.arc_bound.unwrap_or(t.arc_bound);
    t.window = a.window.unwrap_or(t.window);
    s.classify.angle_tol = a.angle_tol.unwrap_or(s.classify.angle_tol);
    s.classify.gap_tol = a.gap_tol.unwrap_or(s.classify.gap_tol);
    let ok = t.seed_offset > 0.0
        && t.n_seeds >= 2
        && t.max_seeds >= t.n_seeds
        && t.max_return >= 1
        && t.arc_bound > 0.0
        && t.window > 0.0
        && s.classify.angle_tol >= 0.0
        && s.classify.gap_tol >= 0.0;
    if !ok {
        return Err(Failure::Config("invalid manifold tracing settings".into()));
    }
    Ok(s)
}

fn orbit_json(o: &PeriodicOrbit) -> Value {
    let a = o.anchor_state;
    json!({
        "center": match o.center { Saddle::Left => "left", Saddle::Right => "right" },
        "energy": o.energy,
        "period": o.period,
        "anchor_state": [a.x1, a.x2, a.y1, a.y2],
        "multiplier": o.floquet.as_ref().map(|f| f.mu),
    })
}

fn report_json(r: &IntersectionReport) -> Value {
    json!({
        "kind": r.kind.as_str(),
        "witness": r.witness.map(|w| json!({ "point": w.point, "angle": w.angle })),
        "gap": r.gap,
        "crossings": r.crossings.len(),
        "min_distance": r.min_distance,
        "positive_extent": r.positive_extent,
        "negative_extent": r.negative_extent,
        "margin": r.margin,
        "boundary": r.boundary,
    })
}

fn curve_csv(c: &SectionCurve) -> Artifact {
    let mut csv = Csv::new(&[
        ("x1", "length"),
        ("x2", "momentum"),
        ("y2", "momentum"),
        ("parameter", "1"),
        ("return", "count"),
    ]);
    for ((s, q), r) in c.states().iter().zip(&c.params).zip(&c.returns) {
        csv.row(&[Cell::F(s.x1), Cell::F(s.x2), Cell::F(s.y2), Cell::F(*q), Cell::I(*r as u64)]);
    }
    csv.into_artifact(&format!("manifold_{}.csv", c.branch_label.name()))
}

fn clean(r: &IntersectionReport) -> bool {
    !r.boundary && r.kind != IntersectionKind::Tangent
}

fn pair_json(unstable: &SectionCurve, stable: &SectionCurve, r: &IntersectionReport) -> Value {
    json!({
        "unstable": unstable.branch_label.name(),
        "stable": stable.branch_label.name(),
        "report": report_json(r),
    })
}

pub fn manifolds(a: &ManifoldArgs, ctx: &Context) -> Result<Outcome, Failure> {
    let energy = a.energy.ok_or_else(|| Failure::Config("manifolds requires --energy".into()))?;
    let settings = manifold_settings(a, ctx)?;
    if !a.beta1_sweep.is_empty() {
        return manifold_sweep(a, energy, &settings, ctx);
    }
    let b1 = a.beta1.ok_or_else(|| Failure::Config("manifolds requires --beta1 or --beta1-sweep".into()))?;
    let p = params(b1, a.beta2, a.omega)?;
    let ev: CycleEvidence = detect_heteroclinic_cycle(&p, energy, &settings)?;
    let curves = [&ev.rightward_pair.0, &ev.rightward_pair.1, &ev.leftward_pair.0, &ev.leftward_pair.1];
    let doc = json!({
        "command": "manifolds",
        "params": params_json(&p),
        "energy": energy,
        "orbits": [orbit_json(&ev.left_orbit), orbit_json(&ev.right_orbit)],
        "rightward": pair_json(&ev.rightward_pair.0, &ev.rightward_pair.1, &ev.rightward_report),
        "leftward": pair_json(&ev.leftward_pair.0, &ev.leftward_pair.1, &ev.leftward_report),
        "heteroclinic_cycle": ev.exists,
        "curves": curves.iter().map(|c| json!({
            "branch": c.branch_label.name(),
            "file": format!("manifold_{}.csv", c.branch_label.name()),
            "points": c.points.len(),
            "max_gap": c.max_gap(),
            "seeds": c.seeds_used,
            "escaped_seeds": c.escaped_seeds,
        })).collect::<Vec<_>>(),
    });
    let mut outcome = Outcome::single(json_artifact("manifolds.json", &doc));
    let csvs: Vec<Artifact> = curves.iter().map(|c| curve_csv(c)).collect();
    if ctx.gnuplot {
        let mut s = String::from("set datafile separator ','\nset key autotitle columnhead\nset xlabel 'x1'\nset ylabel 'x2'\n");
        let plots: Vec<String> = csvs.iter().map(|c| format!("'{}' using 1:2 with lines title '{}'", c.name, c.name)).collect();
        s.push_str(&format!("plot {}\n", plots.join(", \\\n     ")));
        outcome.extra.push(Artifact { name: "manifolds.gp".into(), contents: s });
    }
    outcome.extra.extend(csvs);
    Ok(outcome)
}

fn manifold_sweep(a: &ManifoldArgs, energy: f64, settings: &ManifoldSettings, ctx: &Context) -> Result<Outcome, Failure> {
    let mut rows = Vec::new();
    for &b1 in &a.beta1_sweep {
        let p = params(b1, a.beta2, a.omega)?;
        let ev = detect_heteroclinic_cycle(&p, energy, settings)?;
        rows.push((b1, ev.rightward_report, ev.leftward_report, ev.exists));
    }
    let unclear: Vec<f64> = rows
        .iter()
        .filter(|(_, r, l, _)| !(clean(r) && clean(l)))
        .map(|(b1, ..)| *b1)
        .collect();
    let band = (!unclear.is_empty()).then(|| {
        (
            unclear.iter().cloned().fold(f64::INFINITY, f64::min),
            unclear.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        )
    });
    if ctx.format == Some(Format::Csv) {
        let mut csv = Csv::new(&[
            ("beta1", "1"),
            ("rightward_kind", "label"),
            ("rightward_margin", "1"),
            ("rightward_boundary", "flag"),
            ("leftward_kind", "label"),
            ("leftward_margin", "1"),
            ("leftward_boundary", "flag"),
            ("heteroclinic_cycle", "flag"),
        ]);
        for (b1, r, l, c) in &rows {
            csv.row(&[
                Cell::F(*b1),
                Cell::S(r.kind.as_str().into()),
                Cell::F(r.margin),
                Cell::B(r.boundary),
                Cell::S(l.kind.as_str().into()),
                Cell::F(l.margin),
                Cell::B(l.boundary),
                Cell::B(*c),
            ]);
        }
        return Ok(ctx.with_plot(Outcome::single(csv.into_artifact("manifold_sweep.csv")), "intersection margin", 1, &[3, 6]));
    }
    let doc = json!({
        "command": "manifolds",
        "beta2": a.beta2,
        "omega": a.omega,
        "energy": energy,
        "sweep": rows.iter().map(|(b1, r, l, c)| json!({
            "beta1": b1,
            "rightward": report_json(r),
            "leftward": report_json(l),
            "heteroclinic_cycle": c,
        })).collect::<Vec<_>>(),
        "tangency_band": band.map(|(lo, hi)| json!({ "beta1_min": lo, "beta1_max": hi })),
    });
    Ok(Outcome::single(json_artifact("manifold_sweep.json", &doc)))
}

struct Check {
    name: &'static str,
    params: ModelParams,
    residual: f64,
    tolerance: f64,
}

pub fn verify(ctx: &Context) -> Result<(Outcome, bool), Failure> {
    let cfg = ctx.integrator(IntegratorConfig::analysis())?;
    let mut checks = Vec::new();
    let b0_points = [(0.005, 2.0, 2.0), (0.1, 1.0, 2.0), (0.0, 3.0, 2.0)];
    for &(b1, b2, w) in &b0_points {
        let p = params(b1, b2, w)?;
        let analytic = b0_analytic(&p)?;
        let numeric = b_matrices_numeric(&p, 40.0, &cfg)?.b0;
        checks.push(Check { name: "b0_analytic_vs_numeric", params: p, residual: (analytic - numeric).amax(), tolerance: 1e-6 });
        checks.push(Check { name: "b0_unimodular", params: p, residual: (analytic.determinant() - 1.0).abs(), tolerance: 1e-8 });
        let cd = connection_coefficients(&hypergeom_params(&p))?;
        let rel = cd.l12.norm_sqr() - cd.l22.norm_sqr() - p.omega_minus() / p.omega_plus();
        checks.push(Check { name: "connection_norm_relation", params: p, residual: rel.abs(), tolerance: 1e-10 });
    }
    for &(b1, b2, w) in &[(0.005, 2.0, 2.0), (0.1, 1.0, 2.0)] {
        let p = params(b1, b2, w)?;
        let b = b_matrices_numeric(&p, 40.0, &cfg)?;
        let period = melnikov_period(&p);
        let mut worst: f64 = 0.0;
        for k in 0..64 {
            let t0 = period * k as f64 / 64.0;
            let closed = melnikov_closed_form(t0, &p)?;
            worst = worst.max((closed - melnikov_with_b0(t0, Vector2::new(1.0, 0.0), &p, &b.b0)).abs());
        }
        checks.push(Check { name: "melnikov_closed_vs_direct", params: p, residual: worst, tolerance: 1e-5 });
    }
    for b2 in [0.5, 2.0, 3.0] {
        let p = params(0.0, b2, 2.0)?;
        let (cp, cm) = monodromy_closed_form_equal_ratio(&p)?;
        let pair = monodromy_nve(&p)?;
        let scale = max_abs(&cp).max(max_abs(&cm)).max(1.0);
        let r = (cp.trace() - pair.m_plus.trace()).norm().max((cm.trace() - pair.m_minus.trace()).norm())
            .max((cp.determinant() - pair.m_plus.determinant()).norm())
            .max((cm.determinant() - pair.m_minus.determinant()).norm());
        checks.push(Check { name: "monodromy_closed_form_spectrum", params: p, residual: r / scale, tolerance: 1e-8 });
    }
    let all_pass = checks.iter().all(|c| c.residual < c.tolerance);
    let doc = json!({
        "command": "verify",
        "checks": checks.iter().map(|c| json!({
            "name": c.name,
            "params": params_json(&c.params),
            "residual": c.residual,
            "tolerance": c.tolerance,
            "pass": c.residual < c.tolerance,
        })).collect::<Vec<_>>(),
        "all_pass": all_pass,
    });
    if ctx.format == Some(Format::Csv) {
        let mut csv = Csv::new(&[
            ("name", "label"),
            ("beta1", "1"),
            ("beta2", "1"),
            ("omega", "1"),
            ("residual", "1"),
            ("tolerance", "1"),
            ("pass", "flag"),
        ]);
        for c in &checks {
            csv.row(&[
                Cell::S(c.name.into()),
                Cell::F(c.params.beta1()),
                Cell::F(c.params.beta2()),
                Cell::F(c.params.omega()),
                Cell::F(c.residual),
                Cell::F(c.tolerance),
                Cell::B(c.residual < c.tolerance),
            ]);
        }
        return Ok((Outcome::single(csv.into_artifact("verify.csv")), all_pass));
    }
    Ok((Outcome::single(json_artifact("verify.json", &doc)), all_pass))
}
