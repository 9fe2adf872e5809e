//! Scenario files: a TOML document holding an array of `[[scenario]]` tables.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use transversality::constants::EstimatorConfig;
use transversality::regmap::MappingRep;
use transversality::{SetRep, Vector};

/// Quantities a scenario can request under `estimators`.
pub const ESTIMATORS: [(&str, &str); 13] = [
    ("str", "subtransversality constant"),
    ("str_prime", "subtransversality via d(x,B) on A"),
    ("tr", "transversality constant"),
    ("tr_dual", "dual transversality constant from normals at nearby points"),
    ("str1", "dual subtransversality constant"),
    ("itr", "intrinsic transversality constant"),
    ("itr_w", "weak intrinsic transversality constant"),
    ("itr_c", "convex intrinsic constant (convex pairs only)"),
    ("rg", "metric regularity modulus of the scenario mapping"),
    ("srg", "metric subregularity modulus of the scenario mapping"),
    ("rg_diff", "metric regularity modulus of the difference mapping"),
    ("srg_diff", "metric subregularity modulus of the difference mapping"),
    ("ap_rate", "fitted R-linear rate of alternating projections"),
];

/// Names accepted under `checks`.
pub const CHECKS: [(&str, &str); 8] = [
    ("sandwich", "1/(2/str'+1) <= str <= str'"),
    ("chain", "itr <= itr_w <= itr_c <= 1, str1 <= str, itr_c = str on convex pairs"),
    ("mapping_equalities", "tr = rg and str = srg for the pair mapping"),
    ("graph_sandwich", "moduli of a mapping against constants of its graph pair"),
    ("difference_sandwich", "moduli of the difference mapping against tr and str"),
    ("rate_bounds", "fitted AP rate against str"),
    ("joining", "AP joining sequence is linearly monotone"),
    ("c00", "opposite limiting normals (1 = none found, 0 = violated)"),
];

/// A set literal, tagged by `type`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetSpec {
    Affine { base: Vec<f64>, span: Vec<Vec<f64>> },
    Line { point: Vec<f64>, direction: Vec<f64> },
    Point { at: Vec<f64> },
    /// `⟨normal, x⟩ ≤ offset`
    Halfspace { normal: Vec<f64>, offset: f64 },
    Polyhedron { normals: Vec<Vec<f64>>, offsets: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    Polytope { vertices: Vec<Vec<f64>> },
    Union { pieces: Vec<SetSpec> },
}

impl SetSpec {
    pub fn build(&self) -> Result<SetRep, String> {
        let vec = |c: &[f64]| Vector::new(c.to_vec()).map_err(|e| e.to_string());
        let vecs = |cs: &[Vec<f64>]| cs.iter().map(|c| vec(c)).collect::<Result<Vec<_>, _>>();
        let r = match self {
            SetSpec::Affine { base, span } => SetRep::affine(vec(base)?, &vecs(span)?),
            SetSpec::Line { point, direction } => SetRep::line(vec(point)?, vec(direction)?),
            SetSpec::Point { at } => SetRep::point(vec(at)?),
            SetSpec::Halfspace { normal, offset } => SetRep::halfspace(vec(normal)?, *offset),
            SetSpec::Polyhedron { normals, offsets } => {
                if normals.len() != offsets.len() {
                    return Err(format!("{} normals but {} offsets", normals.len(), offsets.len()));
                }
                SetRep::polyhedron(vecs(normals)?.into_iter().zip(offsets.iter().copied()).collect())
            }
            SetSpec::Ball { center, radius } => SetRep::ball(vec(center)?, *radius),
            SetSpec::Polytope { vertices } => SetRep::polytope(vecs(vertices)?),
            SetSpec::Union { pieces } => {
                SetRep::union(pieces.iter().map(SetSpec::build).collect::<Result<Vec<_>, _>>()?)
            }
        };
        r.map_err(|e| e.to_string())
    }
}

/// Graph of the linear map `x ↦ Mx`, given by the rows of `M`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MappingSpec {
    pub matrix: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApSpec {
    pub x0: Vec<f64>,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_stop_tol")]
    pub stop_tol: f64,
}

fn default_max_iter() -> usize {
    1000
}

fn default_stop_tol() -> f64 {
    1e-12
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expected {
    pub value: f64,
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
}

/// One `[[scenario]]` table as written in the file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub name: String,
    /// Point of the pair; for a `mapping` scenario, the point x̄ of the domain.
    pub xbar: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<SetSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<SetSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mapping: Option<MappingSpec>,
    #[serde(default)]
    pub estimators: Vec<String>,
    #[serde(default)]
    pub checks: Vec<String>,
    /// Scenario-wide estimator settings on top of the defaults.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<toml::Table>,
    /// Per-estimator settings on top of `config`.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub overrides: BTreeMap<String, toml::Table>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ap: Option<ApSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub expected: BTreeMap<String, Expected>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    #[serde(default)]
    scenario: Vec<ScenarioSpec>,
}

/// A validated scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub a: SetRep,
    pub b: SetRep,
    /// The point of the pair `(A, B)`; for mapping scenarios `(x̄, ȳ)`.
    pub xbar: Vector,
    /// Graph mapping and its domain point, for mapping scenarios.
    pub mapping: Option<(MappingRep, Vector)>,
    pub estimators: Vec<String>,
    pub checks: Vec<String>,
    pub base_config: EstimatorConfig,
    pub overrides: BTreeMap<String, EstimatorConfig>,
    pub ap: Option<ApSpec>,
    pub expected: BTreeMap<String, Expected>,
    /// Canonical form: defaults filled, configs written out in full.
    pub spec: ScenarioSpec,
}

impl Scenario {
    /// Settings used for the named estimator.
    pub fn config_for(&self, name: &str) -> &EstimatorConfig {
        self.overrides.get(name).unwrap_or(&self.base_config)
    }

    pub fn is_convex(&self) -> bool {
        self.a.is_convex() && self.b.is_convex()
    }

    /// Replaces the seed of every estimator configuration.
    pub fn set_seed(&mut self, seed: u64) {
        self.base_config.seed = seed;
        for c in self.overrides.values_mut() {
            c.seed = seed;
        }
        let set = |t: &mut toml::Table| {
            t.insert("seed".into(), toml::Value::Integer(seed as i64));
        };
        if let Some(t) = self.spec.config.as_mut() {
            set(t);
        }
        self.spec.overrides.values_mut().for_each(set);
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("scenario '{scenario}': field {field}: {message}")]
    Validation { scenario: String, field: String, message: String },
}

pub fn load_scenarios(path: impl AsRef<Path>) -> Result<Vec<Scenario>, LoadError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io { path: path.display().to_string(), source })?;
    parse_scenarios(&text)
}

pub fn parse_scenarios(text: &str) -> Result<Vec<Scenario>, LoadError> {
    let file: ScenarioFile = toml::from_str(text)?;
    let mut seen = std::collections::HashSet::new();
    file.scenario
        .into_iter()
        .map(|spec| {
            if !seen.insert(spec.name.clone()) {
                return Err(invalid(&spec.name, "name", "duplicate scenario name"));
            }
            validate(spec)
        })
        .collect()
}

/// The canonical TOML form of the scenarios; parsing it gives them back.
pub fn to_toml(scenarios: &[Scenario]) -> String {
    let file = ScenarioFile { scenario: scenarios.iter().map(|s| s.spec.clone()).collect() };
    toml::to_string(&file).expect("scenario specs serialize")
}

fn invalid(scenario: &str, field: &str, message: impl Into<String>) -> LoadError {
    LoadError::Validation { scenario: scenario.into(), field: field.into(), message: message.into() }
}

fn merged_config(base: &toml::Table, layer: Option<&toml::Table>) -> Result<(EstimatorConfig, toml::Table), String> {
    let mut t = base.clone();
    if let Some(l) = layer {
        t.extend(l.clone());
    }
    let cfg: EstimatorConfig = toml::Value::Table(t.clone()).try_into().map_err(|e: toml::de::Error| e.message().to_string())?;
    cfg.validate().map_err(|e| e.to_string())?;
    Ok((cfg, t))
}

fn validate(mut spec: ScenarioSpec) -> Result<Scenario, LoadError> {
    let name = spec.name.clone();
    let bad = |field: &str, msg: String| invalid(&name, field, msg);
    if name.is_empty() {
        return Err(bad("name", "must not be empty".into()));
    }

    let defaults = toml::Table::try_from(EstimatorConfig::default()).expect("config serializes");
    let (base_config, base_table) = merged_config(&defaults, spec.config.as_ref()).map_err(|m| bad("config", m))?;
    let mut overrides = BTreeMap::new();
    for (est, layer) in &spec.overrides {
        if !ESTIMATORS.iter().any(|(n, _)| n == est) {
            return Err(bad(&format!("overrides.{est}"), "unknown estimator".into()));
        }
        let (c, _) = merged_config(&base_table, Some(layer)).map_err(|m| bad(&format!("overrides.{est}"), m))?;
        overrides.insert(est.clone(), c);
    }
    spec.config = Some(base_table);

    let xbar = Vector::new(spec.xbar.clone()).map_err(|e| bad("xbar", e.to_string()))?;
    let (a, b, point, mapping) = match (&spec.mapping, &spec.a, &spec.b) {
        (Some(m), None, None) => {
            let map = MappingRep::linear_map(&m.matrix, &xbar).map_err(|e| bad("mapping.matrix", e.to_string()))?;
            let (ga, gb) = map.graph_sets().map_err(|e| bad("mapping", e.to_string()))?;
            let z = Vector::concat(&[&xbar, &map.ybar()]);
            (ga, gb, z, Some((map, xbar.clone())))
        }
        (Some(_), _, _) => return Err(bad("mapping", "a mapping scenario takes no sets a, b".into())),
        (None, Some(a), Some(b)) => {
            let a = a.build().map_err(|m| bad("a", m))?;
            let b = b.build().map_err(|m| bad("b", m))?;
            if a.dim() != b.dim() {
                return Err(bad("b", format!("dimension {} differs from a's {}", b.dim(), a.dim())));
            }
            (a, b, xbar.clone(), None)
        }
        (None, None, _) => return Err(bad("a", "missing (give sets a and b, or a mapping)".into())),
        (None, _, None) => return Err(bad("b", "missing (give sets a and b, or a mapping)".into())),
    };
    if point.dim() != a.dim() {
        return Err(bad("xbar", format!("dimension {} differs from the sets' {}", point.dim(), a.dim())));
    }
    for (label, s) in [("a", &a), ("b", &b)] {
        let d = s.distance(&point).map_err(|e| bad("xbar", e.to_string()))?;
        if d > base_config.membership_tol {
            return Err(bad("xbar", format!("not in {label} (distance {d:e})")));
        }
    }

    let mut seen = std::collections::HashSet::new();
    for e in &spec.estimators {
        if !ESTIMATORS.iter().any(|(n, _)| n == e) {
            return Err(bad("estimators", format!("unknown estimator '{e}'")));
        }
        if !seen.insert(e) {
            return Err(bad("estimators", format!("'{e}' listed twice")));
        }
        if e == "itr_c" && !(a.is_convex() && b.is_convex()) {
            return Err(bad("estimators", "itr_c needs convex sets".into()));
        }
    }
    for c in &spec.checks {
        if !CHECKS.iter().any(|(n, _)| n == c) {
            return Err(bad("checks", format!("unknown check '{c}'")));
        }
        if !seen.insert(c) {
            return Err(bad("checks", format!("'{c}' listed twice")));
        }
        match c.as_str() {
            "graph_sandwich" if mapping.is_none() => return Err(bad("checks", "graph_sandwich needs a mapping".into())),
            "mapping_equalities" if mapping.is_some() => {
                return Err(bad("checks", "mapping_equalities needs a set pair, not a mapping".into()))
            }
            _ => {}
        }
    }
    let needs_ap = spec.estimators.iter().chain(&spec.checks).any(|n| ["ap_rate", "rate_bounds", "joining"].contains(&n.as_str()));
    match &spec.ap {
        None if needs_ap => return Err(bad("ap", "required by ap_rate, rate_bounds and joining".into())),
        Some(ap) => {
            if ap.x0.len() != a.dim() {
                return Err(bad("ap.x0", format!("dimension {} differs from the sets' {}", ap.x0.len(), a.dim())));
            }
            if !(ap.stop_tol > 0.0) || ap.max_iter == 0 {
                return Err(bad("ap", "max_iter and stop_tol must be positive".into()));
            }
        }
        None => {}
    }
    for (key, e) in &spec.expected {
        if !spec.estimators.contains(key) && !(key == "c00" && spec.checks.contains(key)) {
            return Err(bad(&format!("expected.{key}"), "not a requested estimator".into()));
        }
        if !(e.tolerance >= 0.0) || !e.value.is_finite() {
            return Err(bad(&format!("expected.{key}"), "value must be finite and tolerance nonnegative".into()));
        }
    }

    Ok(Scenario {
        name,
        a,
        b,
        xbar: point,
        mapping,
        estimators: spec.estimators.clone(),
        checks: spec.checks.clone(),
        base_config,
        overrides,
        ap: spec.ap.clone(),
        expected: spec.expected.clone(),
        spec,
    })
}
