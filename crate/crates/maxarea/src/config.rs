//! JSON input files for each command.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use maxarea_core::pipelines::{ExteriorMode, ExteriorProblem, Obstacle, Window};
use maxarea_core::solver::{DiscreteProblem, SolverConfig};
use maxarea_core::structure::ClassifyOptions;
use maxarea_core::{BoundaryData, DomainSpec, GridDomain, Point, ScalarField};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::expr::Generator;
use crate::formats::parse_field_csv;

/// Parses JSON with the file name and position in the error.
pub fn parse_json<T: DeserializeOwned>(text: &str, origin: &Path) -> Result<T> {
    serde_json::from_str(text).map_err(|e| anyhow!("{}: invalid config at line {} column {}: {e}", origin.display(), e.line(), e.column()))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_json(&text, path)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum BoundarySpec {
    /// Expression in `x`, `y`, `r`, evaluated at every boundary node.
    Generator(String),
    /// `[i, j, value]` for every boundary node, by lattice index.
    Table(Vec<(i32, i32, f64)>),
}

impl BoundarySpec {
    pub fn build(&self, domain: &GridDomain) -> Result<BoundaryData> {
        let values = match self {
            BoundarySpec::Generator(src) => {
                let g = Generator::parse(src)?;
                domain.boundary_nodes().iter().map(|&id| g.eval(domain.point(id))).collect::<Result<Vec<_>>>()?
            }
            BoundarySpec::Table(rows) => {
                let mut values = vec![None; domain.boundary_nodes().len()];
                for &(i, j, v) in rows {
                    let id = domain.node_at([i, j]).ok_or_else(|| anyhow!("table node ({i}, {j}) is not active"))?;
                    let k = domain.boundary_index(id).ok_or_else(|| anyhow!("table node ({i}, {j}) is not a boundary node"))?;
                    values[k] = Some(v);
                }
                values
                    .iter()
                    .zip(domain.boundary_nodes())
                    .map(|(v, &id)| v.ok_or_else(|| anyhow!("table has no value for boundary node {:?}", domain.lattice(id))))
                    .collect::<Result<Vec<_>>>()?
            }
        };
        Ok(BoundaryData::new(domain, values)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pin {
    /// Snapped to the nearest active node.
    pub point: Point,
    pub value: f64,
}

fn resolve_pins(domain: &GridDomain, pins: &[Pin]) -> Result<Vec<(usize, f64)>> {
    pins.iter()
        .map(|p| {
            let id = domain.nearest_node(p.point).ok_or_else(|| anyhow!("pin {:?} has no nearby node", p.point))?;
            Ok((id, p.value))
        })
        .collect()
}

/// Input of `solve`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub domain: DomainSpec,
    pub boundary: BoundarySpec,
    #[serde(default)]
    pub pinned: Vec<Pin>,
    #[serde(default)]
    pub config: SolverConfig,
}

impl ProblemFile {
    pub fn build(&self) -> Result<DiscreteProblem> {
        let domain = Arc::new(GridDomain::new(self.domain.clone())?);
        let g = self.boundary.build(&domain)?;
        let pins = resolve_pins(&domain, &self.pinned)?;
        Ok(DiscreteProblem::new(domain, g, pins)?)
    }
}

/// Input of `singular`: a problem plus the pair tolerance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SingularConfig {
    pub domain: DomainSpec,
    pub boundary: BoundarySpec,
    #[serde(default)]
    pub pinned: Vec<Pin>,
    #[serde(default)]
    pub config: SolverConfig,
    /// Defaults to `2h`.
    #[serde(default)]
    pub tol: Option<f64>,
    /// Solve the problem and fill in the linearity residuals.
    #[serde(default = "yes")]
    pub verify: bool,
}

fn yes() -> bool {
    true
}

impl SingularConfig {
    pub fn problem(&self) -> ProblemFile {
        ProblemFile {
            domain: self.domain.clone(),
            boundary: self.boundary.clone(),
            pinned: self.pinned.clone(),
            config: self.config.clone(),
        }
    }
}

/// A field given either as a CSV file (relative to the config file) or as an expression.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldInput {
    pub domain: DomainSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
}

impl FieldInput {
    pub fn load(&self, base: &Path) -> Result<ScalarField> {
        let domain = Arc::new(GridDomain::new(self.domain.clone())?);
        match (&self.field, &self.generator) {
            (Some(path), None) => {
                let path = base.join(path);
                let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
                parse_field_csv(&text, domain).with_context(|| format!("in {}", path.display()))
            }
            (None, Some(src)) => {
                let g = Generator::parse(src)?;
                let values = domain.points().map(|x| g.eval(x)).collect::<Result<Vec<_>>>()?;
                Ok(ScalarField::new(domain, values)?)
            }
            _ => bail!("give exactly one of \"field\" (CSV path) and \"generator\" (expression)"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ClassifyKind {
    /// Entire solutions on a punctured ball, classified about the puncture.
    #[default]
    Entire,
    /// Exterior solutions around the point set `a` with base point `x0`.
    Exterior { a: Vec<Point>, x0: Point },
}

/// Input of `classify`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyConfig {
    pub input: FieldInput,
    #[serde(default)]
    pub classify: ClassifyKind,
    #[serde(default)]
    pub options: ClassifyOptions,
}

/// Input of `blowdown`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlowdownConfig {
    pub input: FieldInput,
    pub radii: Vec<f64>,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_samples() -> usize {
    64
}

/// Input of `exterior`: `g` is an expression for the data on the obstacle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExteriorConfig {
    pub obstacle: Obstacle,
    pub g: String,
    pub mode: ExteriorMode,
    pub outer_radii: Vec<f64>,
    pub h: f64,
    pub window: Window,
    pub solver: SolverConfig,
}

impl Default for ExteriorConfig {
    fn default() -> Self {
        ExteriorConfig {
            obstacle: Obstacle::Circle { center: [0.0, 0.0], radius: 1.0 },
            g: "0".into(),
            mode: ExteriorMode::UpperCone { x0: [0.0, 0.0] },
            outer_radii: vec![2.0, 4.0, 8.0],
            h: 0.05,
            window: Window::default(),
            solver: SolverConfig::default(),
        }
    }
}

impl ExteriorConfig {
    pub fn problem(&self) -> Result<ExteriorProblem> {
        let g = Generator::parse(&self.g)?;
        for x in self.obstacle.hull_points() {
            g.eval(x)?;
        }
        let mut p = ExteriorProblem::new(self.obstacle.clone(), Arc::new(g.to_fn()), self.mode, self.h)
            .with_radii(self.outer_radii.clone())
            .with_window(self.window);
        p.solver = self.solver.clone();
        Ok(p)
    }
}

/// Input of `multiplicity`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MultiplicityConfig {
    pub h: f64,
    /// Largest ball radius; the schedule is `2, 4, ...` up to it.
    pub k: u32,
    pub solver: SolverConfig,
}

impl Default for MultiplicityConfig {
    fn default() -> Self {
        MultiplicityConfig { h: 0.05, k: 8, solver: SolverConfig::default() }
    }
}
