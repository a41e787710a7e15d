//! Scenario files: a TOML description of a chart, pressure law, initial data, markers and
//! the densities to verify.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{FieldExpr, ScalarFn};
use crate::fluid::{Eos, EosConfig, FluidState, Grid};
use crate::integrals::{DensitySpec, DensityVariant};
use crate::manifold::{builtin_field, ChartMetric};
use crate::solver::{MarkerKind, MarkerSet, SolverConfig};

fn two() -> usize {
    2
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartConfig {
    pub name: String,
    #[serde(default = "two")]
    pub dim: usize,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// nodes per axis
    pub n: usize,
    /// finer resolution for refinement checks
    #[serde(default)]
    pub refine: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub u: Vec<FieldExpr>,
    pub rho: FieldExpr,
    #[serde(default)]
    pub s: FieldExpr,
}

/// Transported domain. Marker counts scale with the grid when left out.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainConfig {
    Disk {
        center: Vec<f64>,
        radius: f64,
        #[serde(default)]
        rings: Option<usize>,
        #[serde(default)]
        boundary_segments: Option<usize>,
    },
    Polygon {
        vertices: Vec<Vec<f64>>,
        #[serde(default)]
        spacing: Option<f64>,
        #[serde(default)]
        per_edge: Option<usize>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurveConfig {
    Circle {
        name: String,
        center: Vec<f64>,
        radius: f64,
        #[serde(default)]
        segments: Option<usize>,
    },
    Segment {
        name: String,
        start: Vec<f64>,
        end: Vec<f64>,
        #[serde(default)]
        segments: Option<usize>,
    },
}

impl CurveConfig {
    pub fn name(&self) -> &str {
        match self {
            CurveConfig::Circle { name, .. } | CurveConfig::Segment { name, .. } => name,
        }
    }
}

/// A density by variant name; `field` names a catalogued vector field of the chart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityConfig {
    pub variant: String,
    #[serde(default)]
    pub field: Option<String>,
    #[serde(default)]
    pub f: Option<ScalarFn>,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default = "one")]
    pub energy_scale: f64,
    #[serde(default)]
    pub label: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JetConfig {
    #[serde(default = "JetConfig::default_count")]
    pub count: usize,
    #[serde(default)]
    pub seed: u64,
}

impl JetConfig {
    fn default_count() -> usize {
        1000
    }
}

impl Default for JetConfig {
    fn default() -> Self {
        JetConfig { count: Self::default_count(), seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub integral_drift: f64,
    pub balance: f64,
    pub circulation_drift: f64,
    pub refinement_ratio: f64,
    pub min_order: f64,
    pub jet_pass: f64,
    pub jet_fail: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            integral_drift: 1e-4,
            balance: 5e-3,
            circulation_drift: 5e-3,
            refinement_ratio: 3.5,
            min_order: 1.9,
            jet_pass: crate::jetcheck::PASS_TOL,
            jet_fail: crate::jetcheck::FAIL_TOL,
        }
    }
}

/// Whether the scenario is built to pass or to be falsified.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    #[default]
    Pass,
    Fail,
}

/// Short run used by the Hamiltonian checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HamiltonianConfig {
    pub t_end: f64,
    pub snapshot_every: usize,
    pub random_states: usize,
}

impl Default for HamiltonianConfig {
    fn default() -> Self {
        HamiltonianConfig { t_end: 0.1, snapshot_every: 2, random_states: 10 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub chart: ChartConfig,
    pub grid: GridConfig,
    pub eos: EosConfig,
    pub initial: InitialConfig,
    #[serde(default)]
    pub domain: Option<DomainConfig>,
    #[serde(default)]
    pub curves: Vec<CurveConfig>,
    #[serde(default)]
    pub densities: Vec<DensityConfig>,
    pub solver: SolverConfig,
    #[serde(default)]
    pub jets: JetConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub hamiltonian: HamiltonianConfig,
    #[serde(default)]
    pub expect: Expectation,
}

/// Scenarios shipped with the crate, addressable by name.
pub const BUNDLED: &[(&str, &str)] = &[
    ("mass_torus", include_str!("../../scenarios/mass_torus.toml")),
    ("kelvin_torus", include_str!("../../scenarios/kelvin_torus.toml")),
    ("general_ring", include_str!("../../scenarios/general_ring.toml")),
    ("similarity_falsified", include_str!("../../scenarios/similarity_falsified.toml")),
    ("sphere_geometry", include_str!("../../scenarios/sphere_geometry.toml")),
];

impl Scenario {
    /// Parse TOML; errors carry the dotted path of the offending key when it can be located.
    pub fn from_toml(text: &str) -> Result<Self> {
        let sc: Scenario = toml::from_str(text).map_err(|e| {
            let path = e.span().map(|sp| key_path(text, sp.start)).unwrap_or_else(|| ".".into());
            Error::config(path, e.message().to_string())
        })?;
        sc.validate()?;
        Ok(sc)
    }

    /// A file path, or the name of a bundled scenario.
    pub fn load(spec: &str) -> Result<Self> {
        let path = Path::new(spec);
        if path.exists() {
            let text = std::fs::read_to_string(path)?;
            return Self::from_toml(&text);
        }
        match BUNDLED.iter().find(|(n, _)| *n == spec) {
            Some((_, text)) => Self::from_toml(text),
            None => Err(Error::config("--scenario", format!("no file or bundled scenario named `{spec}`"))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.chart.dim;
        if self.grid.n < 8 {
            return Err(Error::config("grid.n", "need at least 8 nodes per axis"));
        }
        if let Some(r) = self.grid.refine {
            if r <= self.grid.n {
                return Err(Error::config("grid.refine", "must exceed grid.n"));
            }
        }
        if self.initial.u.len() != n {
            return Err(Error::config("initial.u", format!("expected {n} components, got {}", self.initial.u.len())));
        }
        let exprs = self.initial.u.iter().enumerate().map(|(i, e)| (format!("initial.u[{i}]"), e));
        for (path, e) in exprs.chain([("initial.rho".to_string(), &self.initial.rho), ("initial.s".to_string(), &self.initial.s)]) {
            if e.max_axis().is_some_and(|a| a >= n) {
                return Err(Error::config(path, format!("axis index out of range for dimension {n}")));
            }
        }
        self.solver.validate().map_err(|e| Error::config("solver", e.to_string()))?;
        if self.jets.count == 0 {
            return Err(Error::config("jets.count", "must be positive"));
        }
        Ok(())
    }

    pub fn build(&self) -> Result<Built> {
        let chart = ChartMetric::builtin(&self.chart.name, self.chart.dim, &self.chart.params)?;
        let eos = self.eos.build(chart.dim).map_err(|e| match e {
            Error::Config { path, message } => Error::config(format!("eos.{}", path.trim_start_matches("eos").trim_start_matches('.')), message),
            other => Error::config("eos", other.to_string()),
        })?;
        let densities = self
            .densities
            .iter()
            .enumerate()
            .map(|(k, d)| Ok((d.label.clone().unwrap_or_else(|| d.variant.clone()), build_density(d, &chart, &format!("densities[{k}]"))?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Built { scenario: self.clone(), chart, eos, densities })
    }
}

/// Dotted key path of the line holding byte `offset`: the enclosing `[table]` plus the
/// key on that line, or just the table for errors spanning a whole table.
fn key_path(text: &str, offset: usize) -> String {
    let offset = offset.min(text.len());
    let line_start = text[..offset].rfind('\n').map_or(0, |k| k + 1);
    let line = text[line_start..].lines().next().unwrap_or("").trim();
    let mut table = String::new();
    for l in text[..line_start].lines() {
        let l = l.trim();
        if l.starts_with('[') {
            table = l.trim_matches(|c| c == '[' || c == ']').trim().to_string();
        }
    }
    let key = if line.starts_with('[') {
        table = line.trim_matches(|c| c == '[' || c == ']').trim().to_string();
        String::new()
    } else {
        line.split('=').next().unwrap_or("").trim().trim_matches('"').to_string()
    };
    match (table.is_empty(), key.is_empty()) {
        (true, true) => ".".into(),
        (true, false) => key,
        (false, true) => table,
        (false, false) => format!("{table}.{key}"),
    }
}

fn build_density(d: &DensityConfig, chart: &ChartMetric, path: &str) -> Result<DensitySpec> {
    let field = |what: &str| -> Result<crate::manifold::VectorFieldSpec> {
        let name = d.field.as_deref().ok_or_else(|| Error::config(format!("{path}.field"), format!("{what} needs a vector field")))?;
        builtin_field(chart, name).map_err(|e| Error::config(format!("{path}.field"), e.to_string()))
    };
    let f = || -> Result<ScalarFn> { d.f.clone().ok_or_else(|| Error::config(format!("{path}.f"), "entropy weight f(S) required")) };
    let lambda = || -> Result<f64> { d.lambda.ok_or_else(|| Error::config(format!("{path}.lambda"), "lambda required")) };
    let variant = match d.variant.as_str() {
        "mass" => DensityVariant::Mass,
        "energy" => DensityVariant::Energy,
        "volumetric_entropy" => DensityVariant::VolumetricEntropy { f: f()? },
        "momentum" => DensityVariant::Momentum { zeta: field("momentum")? },
        "galilean_momentum" => DensityVariant::GalileanMomentum { psi: field("galilean_momentum")? },
        "similarity_energy" => DensityVariant::SimilarityEnergy { xi: field("similarity_energy")?, lambda: lambda()? },
        "galilean_energy" => DensityVariant::GalileanEnergy { theta: field("galilean_energy")?, lambda: lambda()? },
        "non_isentropic_momentum" => DensityVariant::NonIsentropicMomentum { zeta: field("non_isentropic_momentum")?, f: f()? },
        "non_isentropic_energy" => DensityVariant::NonIsentropicEnergy { f: f()? },
        other => return Err(Error::config(format!("{path}.variant"), format!("unknown density variant `{other}`"))),
    };
    let mut spec = DensitySpec::new(variant);
    spec.energy_scale = d.energy_scale;
    Ok(spec)
}

/// A validated scenario with its chart, pressure law and densities constructed.
#[derive(Clone, Debug)]
pub struct Built {
    pub scenario: Scenario,
    pub chart: ChartMetric,
    pub eos: Eos,
    pub densities: Vec<(String, DensitySpec)>,
}

impl Built {
    pub fn grid(&self, n: usize) -> Result<Grid> {
        Grid::for_chart(&self.chart, n)
    }

    pub fn initial_state(&self, n: usize) -> Result<FluidState> {
        let ic = &self.scenario.initial;
        let state = FluidState::from_fn(
            self.grid(n)?,
            0.0,
            |x| ic.u.iter().map(|e| e.value(x)).collect(),
            |x| ic.rho.value(x),
            |x| ic.s.value(x),
        );
        state.validate()?;
        Ok(state)
    }

    /// Interior and boundary markers of the transported domain at resolution n.
    pub fn domain(&self, n: usize) -> Result<Option<(MarkerSet, MarkerSet)>> {
        let Some(d) = &self.scenario.domain else { return Ok(None) };
        let sets = match d {
            DomainConfig::Disk { center, radius, rings, boundary_segments } => {
                let rings = rings.unwrap_or((n / 4).max(4));
                let interior = MarkerSet::disk_interior(&self.chart, center, *radius, rings)?;
                let seg = boundary_segments.unwrap_or(16 * rings);
                let boundary = MarkerSet::circle(&self.chart, center, *radius, seg, MarkerKind::DomainBoundary)?;
                (interior, boundary)
            }
            DomainConfig::Polygon { vertices, spacing, per_edge } => {
                let h = spacing.unwrap_or(self.grid(n)?.min_spacing());
                let interior = MarkerSet::polygon_interior(&self.chart, vertices, h)?;
                let boundary = MarkerSet::polygon_boundary(&self.chart, vertices, per_edge.unwrap_or(n))?;
                (interior, boundary)
            }
        };
        Ok(Some(sets))
    }

    /// Named curves at resolution n.
    pub fn curves(&self, n: usize) -> Result<Vec<(String, MarkerSet)>> {
        self.scenario
            .curves
            .iter()
            .map(|c| {
                let set = match c {
                    CurveConfig::Circle { center, radius, segments, .. } => {
                        MarkerSet::circle(&self.chart, center, *radius, segments.unwrap_or(4 * n), MarkerKind::Curve)?
                    }
                    CurveConfig::Segment { start, end, segments, .. } => MarkerSet::segment(&self.chart, start, end, segments.unwrap_or(n))?,
                };
                Ok((c.name().to_string(), set))
            })
            .collect()
    }

    /// Densities checked against the pressure law and chart; the first refusal is returned.
    pub fn check_compatibility(&self) -> Result<()> {
        let probes = self.chart.probe_points(4);
        for (label, spec) in &self.densities {
            spec.check_compatibility(&self.eos, &self.chart, &probes)
                .map_err(|e| {
                    let why = match e {
                        Error::Classification(m) => m,
                        other => other.to_string(),
                    };
                    Error::Classification(format!("density `{label}`: {why}"))
                })?;
        }
        Ok(())
    }
}
