//! JSON run configuration.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use deltaprime_core::eigen::{Preconditioner, SolverOptions};
use deltaprime_core::forms::BoundaryPolicy;
use deltaprime_core::geometry::{build_canonical_partition, CanonicalPartition, InteractionData, Partition};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

/// Interaction strength: one value for every interface or one per interface id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Strength {
    Scalar(f64),
    PerInterface(BTreeMap<String, f64>),
}

impl Strength {
    /// The common value, if the strength is a scalar.
    pub fn scalar(&self) -> Option<f64> {
        match self {
            Strength::Scalar(x) => Some(*x),
            Strength::PerInterface(_) => None,
        }
    }

    fn broadcast(&self, name: &str, ids: &[usize]) -> Result<BTreeMap<usize, f64>, CliError> {
        match self {
            Strength::Scalar(x) => Ok(ids.iter().map(|&i| (i, *x)).collect()),
            Strength::PerInterface(map) => {
                let mut out = BTreeMap::new();
                for (key, &v) in map {
                    let id: usize = key.parse().map_err(|_| CliError::config(name, format!("interface key `{key}` is not an integer id")))?;
                    if !ids.contains(&id) {
                        return Err(CliError::config(name, format!("the partition has no interface {id}")));
                    }
                    out.insert(id, v);
                }
                if let Some(missing) = ids.iter().find(|i| !out.contains_key(i)) {
                    return Err(CliError::config(name, format!("no value for interface {missing}")));
                }
                Ok(out)
            }
        }
    }

    fn values(&self) -> Vec<f64> {
        match self {
            Strength::Scalar(x) => vec![*x],
            Strength::PerInterface(m) => m.values().copied().collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Text,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Operator {
    #[default]
    Delta,
    DeltaPrime,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub k: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// Omits wall-clock times so that reports are byte-identical on reruns.
    pub deterministic: bool,
    pub preconditioner: Preconditioner,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let d = SolverOptions::default();
        SolverConfig { k: d.k, tol: d.tol, max_iter: d.max_iter, seed: d.seed, deterministic: true, preconditioner: d.preconditioner }
    }
}

/// Experiment-specific knobs; every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentParams {
    /// Box radii for truncation studies (default: the configured radius).
    pub radii: Vec<f64>,
    /// Refinement levels matching `radii`; by default the levels grow by
    /// `log2` of the radius ratio so that element sizes are equal and the
    /// meshes nested.
    pub level_schedule: Option<Vec<usize>>,
    pub trials: usize,
    pub operator: Operator,
    /// Scales `n` of the cutoff families.
    pub n_values: Vec<f64>,
    /// Longitudinal frequency of the wedge test functions.
    pub p: f64,
    pub psi_box_radius: f64,
    pub psi_levels: usize,
    /// Allowed distance of the final eigenvalue from the threshold
    /// (default 0.02 for δ and 0.05 for δ′).
    pub threshold_tolerance: Option<f64>,
    pub gamma: f64,
    pub angles: Vec<f64>,
    pub samples: usize,
    pub betas: Vec<f64>,
    pub lengths: Vec<f64>,
    pub fem_elements: usize,
}

impl Default for ExperimentParams {
    fn default() -> Self {
        ExperimentParams {
            radii: Vec::new(),
            level_schedule: None,
            trials: 100,
            operator: Operator::Delta,
            n_values: Vec::new(),
            p: 0.0,
            psi_box_radius: 108.0,
            psi_levels: 8,
            threshold_tolerance: None,
            gamma: 0.5,
            angles: vec![PI / 3.0, 2.0 * PI / 3.0, PI],
            samples: 100_000,
            betas: vec![0.5, 1.0, 2.0, 4.0],
            lengths: vec![0.5, 1.0, 2.0, 5.0, 10.0, 40.0],
            fem_elements: 10_000,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    geometry: serde_json::Map<String, Value>,
    box_radius: f64,
    #[serde(default = "default_levels")]
    levels: usize,
    #[serde(default)]
    boundary: BoundaryPolicy,
    #[serde(default = "unit")]
    alpha: Strength,
    #[serde(default = "unit")]
    beta: Strength,
    #[serde(default)]
    solver: SolverConfig,
    #[serde(default)]
    format: Format,
    #[serde(default)]
    experiment: ExperimentParams,
}

fn default_levels() -> usize {
    4
}

fn unit() -> Strength {
    Strength::Scalar(1.0)
}

/// A validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub geometry: CanonicalPartition,
    pub levels: usize,
    pub boundary: BoundaryPolicy,
    pub alpha: Strength,
    pub beta: Strength,
    pub solver: SolverConfig,
    pub format: Format,
    pub experiment: ExperimentParams,
    /// The document as given, echoed into reports.
    pub source: Value,
}

/// Parses and validates a JSON configuration document.
pub fn parse_config(text: &str) -> Result<Config, CliError> {
    let source: Value = serde_json::from_str(text).map_err(|e| CliError::config("", e.to_string()))?;
    let raw: RawConfig = serde_path_to_error::deserialize(source.clone()).map_err(|e| {
        let path = e.path().to_string();
        CliError::config(if path == "." { "" } else { &path }, e.into_inner().to_string())
    })?;
    let mut geometry = raw.geometry.clone();
    if geometry.contains_key("box_radius") {
        return Err(CliError::config("geometry.box_radius", "set box_radius at the top level".into()));
    }
    let name = match geometry.get("name") {
        Some(Value::String(s)) => s.clone(),
        _ => return Err(CliError::config("geometry.name", "missing geometry name".into())),
    };
    geometry.insert("box_radius".into(), raw.box_radius.into());
    let geometry: CanonicalPartition = serde_path_to_error::deserialize(Value::Object(geometry)).map_err(|e| {
        let msg = e.inner().to_string();
        if msg.contains("unknown variant") {
            CliError::config("geometry.name", format!("unknown geometry name `{name}`"))
        } else {
            CliError::config(&format!("geometry.{}", e.path()), msg)
        }
    })?;
    if !(raw.box_radius.is_finite() && raw.box_radius > 0.0) {
        return Err(CliError::config("box_radius", "must be a positive length".into()));
    }
    for b in raw.beta.values() {
        if !(b > 0.0) || b.is_nan() {
            return Err(CliError::config("beta", "beta must be strictly positive".into()));
        }
    }
    for a in raw.alpha.values() {
        if !(a >= 0.0 && a.is_finite()) {
            return Err(CliError::config("alpha", "alpha must be finite and non-negative".into()));
        }
    }
    let s = &raw.solver;
    if s.k == 0 {
        return Err(CliError::config("solver.k", "must be at least 1".into()));
    }
    if !(s.tol > 0.0) {
        return Err(CliError::config("solver.tol", "must be positive".into()));
    }
    if raw.experiment.radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(CliError::config("experiment.radii", "radii must be positive".into()));
    }
    if let Some(l) = &raw.experiment.level_schedule {
        let expected = raw.experiment.radii.len().max(1);
        if l.len() != expected {
            return Err(CliError::config("experiment.level_schedule", format!("expected {expected} entries, one per radius")));
        }
    }
    let cfg = Config {
        geometry,
        levels: raw.levels,
        boundary: raw.boundary,
        alpha: raw.alpha,
        beta: raw.beta,
        solver: raw.solver,
        format: raw.format,
        experiment: raw.experiment,
        source,
    };
    // fail early on geometry and interface-map errors
    let p = cfg.partition()?;
    cfg.interaction(&p)?;
    Ok(cfg)
}

impl Config {
    pub fn box_radius(&self) -> f64 {
        self.geometry.box_radius()
    }

    pub fn partition(&self) -> Result<Partition, CliError> {
        Ok(build_canonical_partition(&self.geometry)?)
    }

    pub fn interaction(&self, p: &Partition) -> Result<InteractionData, CliError> {
        let ids: Vec<usize> = p.interface_ids().collect();
        let alpha = self.alpha.broadcast("alpha", &ids)?;
        let beta = self.beta.broadcast("beta", &ids)?;
        Ok(InteractionData::from_maps(p, alpha, beta)?)
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            k: self.solver.k,
            tol: self.solver.tol,
            max_iter: self.solver.max_iter,
            seed: self.solver.seed,
            preconditioner: self.solver.preconditioner,
            ..SolverOptions::default()
        }
    }

    pub fn alpha_scalar(&self) -> Result<f64, CliError> {
        self.alpha.scalar().ok_or_else(|| CliError::config("alpha", "this experiment needs a scalar alpha".into()))
    }

    pub fn beta_scalar(&self) -> Result<f64, CliError> {
        self.beta.scalar().ok_or_else(|| CliError::config("beta", "this experiment needs a scalar beta".into()))
    }

    /// `(radius, levels)` pairs of a truncation study.
    pub fn schedule(&self) -> Vec<(f64, usize)> {
        let radii = if self.experiment.radii.is_empty() { vec![self.box_radius()] } else { self.experiment.radii.clone() };
        match &self.experiment.level_schedule {
            Some(l) => radii.into_iter().zip(l.iter().copied()).collect(),
            None => {
                let r0 = radii[0];
                radii
                    .iter()
                    .map(|&r| {
                        let extra = (r / r0).log2().round().max(0.0) as usize;
                        (r, self.levels + extra)
                    })
                    .collect()
            }
        }
    }

    /// Same configuration on a different box.
    pub fn with_box_radius(&self, r: f64) -> Config {
        let mut c = self.clone();
        c.geometry = self.geometry.with_box_radius(r);
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const STAR: &str = r#"{"geometry":{"name":"star3"},"box_radius":6,"levels":4,"alpha":1,"beta":3,"solver":{"k":10,"tol":1e-8,"seed":7}}"#;

    #[test]
    fn parses_star() {
        let c = parse_config(STAR).unwrap();
        assert_eq!(c.geometry, CanonicalPartition::Star3 { box_radius: 6.0 });
        assert_eq!((c.levels, c.solver.k, c.solver.seed), (4, 10, 7));
        assert_eq!(c.boundary, BoundaryPolicy::Dirichlet);
        let p = c.partition().unwrap();
        let d = c.interaction(&p).unwrap();
        for id in p.interface_ids() {
            assert_eq!(d.beta(id).unwrap(), 3.0);
        }
    }

    #[test]
    fn rejects_zero_beta() {
        let e = parse_config(&STAR.replace("\"beta\":3", "\"beta\":0")).unwrap_err();
        assert!(e.to_string().contains("beta must be strictly positive"), "{e}");
        let e = parse_config(&STAR.replace("\"beta\":3", "\"beta\":{\"1\":2,\"2\":-1,\"3\":1}")).unwrap_err();
        assert!(e.to_string().contains("beta must be strictly positive"), "{e}");
    }

    #[test]
    fn names_missing_field() {
        let e = parse_config(&STAR.replace("\"box_radius\":6,", "")).unwrap_err();
        assert!(e.to_string().contains("box_radius"), "{e}");
        let e = parse_config(&STAR.replace("\"seed\":7", "\"seed\":\"x\"")).unwrap_err();
        assert!(e.to_string().contains("solver.seed"), "{e}");
    }

    #[test]
    fn unknown_geometry() {
        let e = parse_config(&STAR.replace("star3", "moebius")).unwrap_err();
        assert!(e.to_string().contains("unknown geometry name"), "{e}");
    }

    #[test]
    fn per_interface_maps() {
        let c = parse_config(&STAR.replace("\"beta\":3", "\"beta\":{\"1\":2,\"2\":3,\"3\":4}")).unwrap();
        let p = c.partition().unwrap();
        let d = c.interaction(&p).unwrap();
        assert_eq!(d.beta(2).unwrap(), 3.0);
        assert!(parse_config(&STAR.replace("\"beta\":3", "\"beta\":{\"1\":2}")).is_err());
        assert!(parse_config(&STAR.replace("\"beta\":3", "\"beta\":{\"9\":2}")).is_err());
    }

    #[test]
    fn schedules() {
        let c = parse_config(r#"{"geometry":{"name":"half_plane"},"box_radius":4,"levels":3,"experiment":{"radii":[4,8,16]}}"#).unwrap();
        assert_eq!(c.schedule(), vec![(4.0, 3), (8.0, 4), (16.0, 5)]);
        let c = parse_config(r#"{"geometry":{"name":"half_plane"},"box_radius":4,"experiment":{"radii":[4,8],"level_schedule":[2,2]}}"#).unwrap();
        assert_eq!(c.schedule(), vec![(4.0, 2), (8.0, 2)]);
        assert!(parse_config(r#"{"geometry":{"name":"half_plane"},"box_radius":4,"experiment":{"radii":[4,8],"level_schedule":[2]}}"#).is_err());
    }
}
