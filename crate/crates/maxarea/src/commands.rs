//! One function per subcommand. Each reads its config, writes outputs into the
//! run directory and records metrics and warnings on the session.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Result};
use maxarea_core::pipelines::{build_example_w, multiplicity_demo, multiplicity_fields, solve_exterior, ExampleWConfig, NAMES};
use maxarea_core::solver::{residual_mse, solve};
use maxarea_core::structure::{blowdown, classify_entire, exterior_trichotomy, singular_set, verify_ray_linearity, ClassifyOptions};
use maxarea_core::{BoundaryData, GridDomain, ScalarField};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::*;
use crate::formats::{field_csv, gnuplot_table, singular_csv};
use crate::manifest::RunDir;

/// Flags shared by every subcommand.
#[derive(Clone, Debug, Default)]
pub struct Common {
    pub config: Option<PathBuf>,
    pub out: PathBuf,
    pub h: Option<f64>,
    pub quiet: bool,
}

pub struct Session {
    pub dir: RunDir,
    pub config: Value,
    pub metrics: Map<String, Value>,
    pub warnings: Vec<String>,
    quiet: bool,
    base: PathBuf,
}

impl Session {
    pub fn new(dir: RunDir, common: &Common) -> Self {
        let base = common.config.as_deref().and_then(Path::parent).map(Path::to_path_buf).unwrap_or_default();
        Session { dir, config: Value::Null, metrics: Map::new(), warnings: Vec::new(), quiet: common.quiet, base }
    }

    pub fn log(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }

    fn record_config(&mut self, config: &impl Serialize) -> Result<()> {
        self.config = serde_json::to_value(config)?;
        Ok(())
    }

    fn metric(&mut self, key: &str, value: impl Serialize) -> Result<()> {
        self.metrics.insert(key.into(), serde_json::to_value(value)?);
        Ok(())
    }

    fn warn(&mut self, msg: String) {
        self.log(format!("warning: {msg}"));
        self.warnings.push(msg);
    }

    fn write_field(&mut self, stem: &str, field: &ScalarField) -> Result<()> {
        self.dir.write(&format!("{stem}.csv"), field_csv(field))?;
        self.dir.write(&format!("{stem}.dat"), gnuplot_table(field))?;
        Ok(())
    }
}

fn load<T: DeserializeOwned>(common: &Common) -> Result<T> {
    match &common.config {
        Some(path) => read_json(path),
        None => bail!("this command needs --config <path>"),
    }
}

fn load_or_default<T: DeserializeOwned + Default>(common: &Common) -> Result<T> {
    match &common.config {
        Some(path) => read_json(path),
        None => Ok(T::default()),
    }
}

fn seconds(t: Instant) -> f64 {
    t.elapsed().as_secs_f64()
}

pub fn solve_cmd(s: &mut Session, common: &Common) -> Result<()> {
    let mut p: ProblemFile = load(common)?;
    if let Some(h) = common.h {
        p.domain.h = h;
    }
    s.record_config(&p)?;
    let problem = p.build()?;
    s.log(format!("solving on {} nodes", problem.domain.len()));
    let t = Instant::now();
    let (u, mut report) = solve(&problem, &p.config)?;
    report.wall_time_s = Some(seconds(t));
    for w in &report.warnings {
        s.warn(format!("solver: {}", serde_json::to_string(w)?));
    }
    s.write_field("field", &u)?;
    let residual = residual_mse(&u);
    s.dir.write_json(
        "report.json",
        &json!({
            "solve": report,
            "max_residual": residual.max_abs(),
            "degenerate_nodes": residual.degenerate_nodes().len(),
        }),
    )?;
    s.metric("energy", report.energy)?;
    s.metric("iterations", report.iterations())?;
    s.metric("feasible", report.feasible)?;
    s.metric("max_gradient_norm", report.max_gradient_norm)?;
    s.metric("stages", &report.stages)?;
    s.metric("solve_wall_time_s", report.wall_time_s)?;
    Ok(())
}

pub fn example_w_cmd(s: &mut Session, common: &Common, dump_fields: bool) -> Result<()> {
    let mut cfg: ExampleWConfig = load_or_default(common)?;
    if let Some(h) = common.h {
        cfg.h = h;
    }
    s.record_config(&cfg)?;
    s.log(format!("building w over k = {:?} at h = {}", cfg.k_schedule, cfg.h));
    let t = Instant::now();
    let w = build_example_w(&cfg)?;
    let build_time = seconds(t);
    for msg in &w.warnings {
        s.warn(msg.clone());
    }
    let thetas: Vec<Value> = w
        .per_k
        .iter()
        .map(|d| json!({ "k": d.k, "theta": d.theta, "w_e2": d.w_e2, "solves": d.samples.len() }))
        .collect();
    s.dir.write_json("theta_k.json", &thetas)?;
    s.write_field("w_window", &w.window_field)?;
    if dump_fields {
        s.write_field("w_full", &w.field)?;
    }
    let classification = classify_entire(&w.field, &ClassifyOptions::default())?;
    s.dir.write_json(
        "report.json",
        &json!({
            "theta": w.theta(),
            "per_k": w.per_k,
            "stabilization": w.stabilization,
            "stabilized": w.stabilized,
            "classification": classification,
            "warnings": w.warnings,
        }),
    )?;
    for d in &w.per_k {
        s.log(format!("k = {}: theta = {:.6}, w(e2) = {:.1e}", d.k, d.theta, d.w_e2));
    }
    s.metric("theta_k", &thetas)?;
    s.metric("stabilization", &w.stabilization)?;
    s.metric("case", classification.case)?;
    s.metric("build_wall_time_s", build_time)?;
    Ok(())
}

pub fn exterior_cmd(s: &mut Session, common: &Common) -> Result<()> {
    let mut cfg: ExteriorConfig = load_or_default(common)?;
    if let Some(h) = common.h {
        cfg.h = h;
    }
    s.record_config(&cfg)?;
    let problem = cfg.problem()?;
    s.log(format!("exterior solve over radii {:?} at h = {}", cfg.outer_radii, cfg.h));
    let t = Instant::now();
    let sol = solve_exterior(&problem)?;
    let wall = seconds(t);
    for msg in &sol.warnings {
        s.warn(msg.clone());
    }
    s.write_field("field", &sol.field)?;
    s.write_field("barrier", &sol.barrier.psi)?;
    let b = &sol.barrier;
    s.dir.write_json(
        "report.json",
        &json!({
            "barrier": { "c_plus": b.c_plus, "c_minus": b.c_minus, "spacelike": b.spacelike.spacelike, "max_gradient_norm": b.spacelike.max_norm, "euclidean": b.euclidean },
            "per_radius": sol.per_radius,
            "stabilization": sol.stabilization,
            "stabilized": sol.stabilized,
            "window_extrema": sol.window_extrema,
            "classification": sol.classification,
            "warnings": sol.warnings,
        }),
    )?;
    s.log(format!("case: {}", serde_json::to_string(&sol.classification.case)?));
    s.metric("case", sol.classification.case)?;
    s.metric("per_radius", &sol.per_radius)?;
    s.metric("solve_wall_time_s", wall)?;
    Ok(())
}

pub fn classify_cmd(s: &mut Session, common: &Common) -> Result<()> {
    let mut cfg: ClassifyConfig = load(common)?;
    if let Some(h) = common.h {
        cfg.input.domain.h = h;
    }
    s.record_config(&cfg)?;
    let field = cfg.input.load(&s.base)?;
    let report = match &cfg.classify {
        ClassifyKind::Entire => classify_entire(&field, &cfg.options)?,
        ClassifyKind::Exterior { a, x0 } => exterior_trichotomy(&field, a, *x0, &cfg.options)?,
    };
    s.dir.write_json("report.json", &report)?;
    s.log(format!("case: {}", serde_json::to_string(&report.case)?));
    s.metric("case", report.case)?;
    Ok(())
}

/// Boundary data with pinned values written over the corresponding boundary nodes.
fn data_with_pins(domain: &GridDomain, g: &BoundaryData, pins: &[(usize, f64)]) -> Result<BoundaryData> {
    let mut values = g.values().to_vec();
    for &(id, v) in pins {
        if let Some(k) = domain.boundary_index(id) {
            values[k] = v;
        }
    }
    Ok(BoundaryData::new(domain, values)?)
}

pub fn singular_cmd(s: &mut Session, common: &Common) -> Result<()> {
    let mut cfg: SingularConfig = load(common)?;
    if let Some(h) = common.h {
        cfg.domain.h = h;
    }
    s.record_config(&cfg)?;
    let problem = cfg.problem().build()?;
    let domain = problem.domain.clone();
    let phi = data_with_pins(&domain, &problem.boundary, &problem.pinned)?;
    let tol = cfg.tol.unwrap_or(2.0 * domain.h());
    let t = Instant::now();
    let mut set = singular_set(&domain, &phi, tol)?;
    s.metric("enumeration_wall_time_s", seconds(t))?;
    s.log(format!("{} light segments at tol {tol}", set.len()));
    if cfg.verify {
        let t = Instant::now();
        let (u, report) = solve(&problem, &cfg.config)?;
        s.metric("solve_wall_time_s", seconds(t))?;
        for w in &report.warnings {
            s.warn(format!("solver: {}", serde_json::to_string(w)?));
        }
        set = verify_ray_linearity(&u, &set)?;
        let flagged = set.segments.iter().filter(|seg| seg.flagged).count();
        if flagged > 0 {
            s.warn(format!("{flagged} segments exceed the linearity tolerance 5h"));
        }
        s.metric("max_residual", set.max_residual())?;
        s.write_field("field", &u)?;
    }
    s.dir.write("singular.csv", singular_csv(&set))?;
    s.dir.write_json("report.json", &set)?;
    s.metric("segments", set.len())?;
    Ok(())
}

pub fn blowdown_cmd(s: &mut Session, common: &Common) -> Result<()> {
    let mut cfg: BlowdownConfig = load(common)?;
    if let Some(h) = common.h {
        cfg.input.domain.h = h;
    }
    s.record_config(&cfg)?;
    let field = cfg.input.load(&s.base)?;
    let report = blowdown(&field, &cfg.radii, cfg.samples)?;
    s.dir.write_json("report.json", &report)?;
    s.log(format!("best model {} with residual {:.3e}", serde_json::to_string(&report.model)?, report.residual));
    s.metric("model", report.model)?;
    s.metric("residual", report.residual)?;
    s.metric("trend", &report.trend)?;
    Ok(())
}

pub fn multiplicity_cmd(s: &mut Session, common: &Common) -> Result<()> {
    let mut cfg: MultiplicityConfig = load_or_default(common)?;
    if let Some(h) = common.h {
        cfg.h = h;
    }
    s.record_config(&cfg)?;
    s.log(format!("building w and the hyperplane-mode solution up to k = {} at h = {}", cfg.k, cfg.h));
    let t = Instant::now();
    let m = multiplicity_demo(cfg.h, cfg.k, &cfg.solver)?;
    let wall = seconds(t);
    for msg in m.w.warnings.iter().chain(&m.w_breve.warnings) {
        s.warn(msg.clone());
    }
    let fields = multiplicity_fields(&m.w, &m.w_breve)?;
    for (name, f) in NAMES.iter().zip(&fields) {
        s.write_field(&name.replace('-', "_"), f)?;
    }
    let r = &m.report;
    s.dir.write_json(
        "report.json",
        &json!({
            "multiplicity": r,
            "theta": m.w.theta(),
            "w_breve_classification": m.w_breve.classification,
            "w_breve_window_extrema": m.w_breve.window_extrema,
        }),
    )?;
    for p in &r.pairs {
        s.log(format!("{:>8} vs {:<8} sup difference {:.4} at {:?}", p.first, p.second, p.max_difference, p.at));
    }
    s.log(format!("pairwise distinct: {}, all vanish on A: {}", r.pairwise_distinct, r.all_vanish_on_a));
    if !r.pairwise_distinct || !r.all_vanish_on_a {
        s.warn("the three fields are not separated at this resolution".into());
    }
    s.metric("pairs", &r.pairs)?;
    s.metric("build_wall_time_s", wall)?;
    Ok(())
}
