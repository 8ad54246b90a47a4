//! JSON experiment configuration.
//!
//! One document drives every subcommand; each subcommand reads the
//! sections it needs and rejects the config when they are missing. Unknown
//! keys are rejected everywhere. The matching JSON Schema lives in
//! `docs/config.schema.json`.

use crate::admissibility::{EnergyPair, Grid, Threshold};
use crate::geometry::{
    latitude_arc, longitude_arc, make_profile, polar_longitude_arc, Chart, Geodesic, GeodesicKind,
    ProfileFunction, ProfileKind, ProfileSpec,
};
use crate::lineintegral::QuadratureSpec;
use crate::sweep::{ArcPlacement, Experiment, Family, DEFAULT_DELTA0, DEFAULT_WINDOW};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

pub type Result<T> = std::result::Result<T, ConfigError>;

fn sphere_spec() -> ProfileSpec {
    ProfileSpec {
        kind: ProfileKind::Sphere,
        coefficients: Vec::new(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "sphere_spec")]
    pub profile: ProfileSpec,
    /// Symbol expressions; absent means the built-in symbol.
    #[serde(default)]
    pub p1: Option<String>,
    #[serde(default)]
    pub p2: Option<String>,
    #[serde(default)]
    pub geodesic: Option<GeodesicConfig>,
    #[serde(default)]
    pub energies: Option<EnergyPair>,
    #[serde(default)]
    pub admissibility: AdmissibilityConfig,
    #[serde(default)]
    pub eigen: Option<EigenConfig>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    #[serde(default)]
    pub integrand: Option<IntegrandConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeodesicConfig {
    pub kind: GeodesicKind,
    /// `φ` range for latitude arcs, `t` or `θ` range for longitude arcs.
    pub range: [f64; 2],
    #[serde(default)]
    pub phi0: f64,
    #[serde(default)]
    pub chart: Chart,
}

impl GeodesicConfig {
    pub fn build(&self, profile: &ProfileFunction) -> Result<Geodesic> {
        let range = (self.range[0], self.range[1]);
        let arc = match (self.kind, self.chart) {
            (GeodesicKind::EquatorLatitude, _) => latitude_arc(profile, range),
            (GeodesicKind::Longitude, Chart::Profile) => longitude_arc(profile, range, self.phi0),
            (GeodesicKind::Longitude, Chart::Polar) => polar_longitude_arc(profile, range, self.phi0),
        };
        arc.map_err(|e| invalid(format!("geodesic: {e}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdmissibilityConfig {
    #[serde(default = "default_grid_axis")]
    pub n_tau: usize,
    #[serde(default = "default_grid_axis")]
    pub n_fiber: usize,
    #[serde(default)]
    pub threshold: Threshold,
}

fn default_grid_axis() -> usize {
    Grid::default().n_tau
}

impl Default for AdmissibilityConfig {
    fn default() -> Self {
        Self {
            n_tau: default_grid_axis(),
            n_fiber: default_grid_axis(),
            threshold: Threshold::default(),
        }
    }
}

impl AdmissibilityConfig {
    pub fn grid(&self) -> Grid {
        Grid::new(self.n_tau, self.n_fiber)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenConfig {
    pub k: u32,
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default = "default_eigen_grid")]
    pub n: usize,
}

fn default_count() -> usize {
    5
}

fn default_eigen_grid() -> usize {
    4096
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KRange {
    pub start: u32,
    /// Inclusive.
    pub end: u32,
    #[serde(default = "default_step")]
    pub step: u32,
}

fn default_step() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub experiment: Experiment,
    #[serde(default)]
    pub k_list: Option<Vec<u32>>,
    #[serde(default)]
    pub k_range: Option<KRange>,
    #[serde(default)]
    pub delta0: Option<f64>,
    #[serde(default)]
    pub arc: ArcPlacement,
    /// Half-width of the transition window in units of `h^{2/3}`.
    #[serde(default)]
    pub width: Option<f64>,
    #[serde(default)]
    pub family: Family,
    /// Eigensolver grid for custom sweeps; chosen per `k` when absent.
    #[serde(default)]
    pub n: Option<usize>,
}

impl SweepConfig {
    /// The explicit list, the expanded range, or the experiment's default.
    pub fn k_values(&self) -> Result<Vec<u32>> {
        match (&self.k_list, &self.k_range) {
            (Some(_), Some(_)) => Err(invalid("sweep: give k_list or k_range, not both")),
            (Some(list), None) => Ok(list.clone()),
            (None, Some(r)) => {
                if r.step == 0 || r.end < r.start {
                    return Err(invalid(format!(
                        "sweep: empty k_range {}..={} step {}",
                        r.start, r.end, r.step
                    )));
                }
                Ok((r.start..=r.end).step_by(r.step as usize).collect())
            }
            (None, None) => match self.experiment {
                Experiment::ZonalEquator => Ok((1..=10).map(|i| 100 * i).collect()),
                Experiment::TesseralCaustic => Ok(vec![25, 50, 100, 200, 400]),
                Experiment::TransitionPeak => Ok(vec![50, 100, 200, 400, 800]),
                Experiment::Custom => Err(invalid("sweep: custom experiments need k_list or k_range")),
            },
        }
    }

    pub fn delta0(&self) -> f64 {
        self.delta0.unwrap_or(DEFAULT_DELTA0)
    }

    pub fn width(&self) -> f64 {
        self.width.unwrap_or(DEFAULT_WINDOW)
    }
}

/// Function integrated by the `integrate` subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum IntegrandConfig {
    /// Closed-form spherical harmonic (round sphere only).
    Harmonic { l: u32, k: u32 },
    /// Computed joint eigenfunction with angular mode `k` and radial index `index`.
    Eigenfunction {
        k: u32,
        index: usize,
        #[serde(default)]
        n: Option<usize>,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Output directory; `--out` takes precedence.
    #[serde(default)]
    pub dir: Option<PathBuf>,
    /// Report file name inside the output directory.
    #[serde(default)]
    pub report: Option<String>,
    /// Eigenpair cache root; defaults to `<out>/cache`.
    #[serde(default)]
    pub cache_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Range checks that the type system does not express.
    pub fn validate(&self) -> Result<()> {
        self.profile_function()?;
        self.quadrature
            .validate()
            .map_err(|e| invalid(format!("quadrature: {e}")))?;
        if let Some(e) = &self.energies {
            if !(e.e1 > 0.0 && e.e1.is_finite() && e.e2.is_finite()) {
                return Err(invalid("energies: e1 must be positive and e2 finite"));
            }
            if let Some(eps) = e.epsilon {
                if !(eps > 0.0) {
                    return Err(invalid(format!("energies: epsilon must be positive, got {eps}")));
                }
            }
        }
        if let Some(g) = &self.geodesic {
            if !g.range.iter().all(|x| x.is_finite()) || !g.phi0.is_finite() {
                return Err(invalid("geodesic: range and phi0 must be finite"));
            }
        }
        if let Some(s) = &self.sweep {
            if let Some(d) = s.delta0 {
                if !(d > 0.0 && d.is_finite()) {
                    return Err(invalid(format!("sweep: delta0 must be positive, got {d}")));
                }
            }
            if let Some(w) = s.width {
                if !(w > 0.0 && w.is_finite()) {
                    return Err(invalid(format!("sweep: width must be positive, got {w}")));
                }
            }
            s.k_values()?;
        }
        if let Some(name) = &self.output.report {
            if name.is_empty() || name.contains(['/', '\\']) {
                return Err(invalid(format!("output: report must be a plain file name, got `{name}`")));
            }
        }
        Ok(())
    }

    pub fn profile_function(&self) -> Result<ProfileFunction> {
        make_profile(self.profile.kind, self.profile.coefficients.clone())
            .map_err(|e| invalid(format!("profile: {e}")))
    }

    pub fn geodesic(&self, profile: &ProfileFunction) -> Result<Geodesic> {
        self.geodesic
            .as_ref()
            .ok_or_else(|| invalid("missing `geodesic` section"))?
            .build(profile)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_and_defaults() {
        let c = ExperimentConfig::from_json("{}").unwrap();
        assert!(c.profile_function().unwrap().is_round_sphere());
        assert_eq!(c.admissibility.grid(), Grid::default());
        assert_eq!(c.quadrature, QuadratureSpec::default());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ExperimentConfig::from_json(r#"{"profle": {}}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"geodesic": {"kind": "longitude", "range": [0, 1], "x": 1}}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"quadrature": {"nodes": 3}}"#).is_err());
    }

    #[test]
    fn full_config() {
        let text = r#"{
            "profile": {"kind": "polynomial-perturbed", "coefficients": [1.0, 0.2]},
            "p2": "xi_phi",
            "geodesic": {"kind": "longitude", "range": [0.3, 0.8], "phi0": 0.0},
            "energies": {"e1": 1.0, "e2": 0.5},
            "admissibility": {"n_tau": 64, "n_fiber": 64, "threshold": {"absolute": 0.01}},
            "sweep": {"experiment": "tesseral-caustic", "k_range": {"start": 25, "end": 100, "step": 25}, "arc": "allowed"},
            "integrand": {"harmonic": {"l": 10, "k": 3}},
            "output": {"dir": "out", "report": "tess.csv"}
        }"#;
        let c = ExperimentConfig::from_json(text).unwrap();
        let s = c.sweep.as_ref().unwrap();
        assert_eq!(s.k_values().unwrap(), vec![25, 50, 75, 100]);
        assert_eq!(s.delta0(), DEFAULT_DELTA0);
        assert_eq!(s.arc, ArcPlacement::Allowed);
        assert_eq!(c.admissibility.threshold, Threshold::Absolute(0.01));
        let p = c.profile_function().unwrap();
        assert!(c.geodesic(&p).is_ok());
        let back = serde_json::to_string(&c).unwrap();
        assert_eq!(ExperimentConfig::from_json(&back).unwrap(), c);
    }

    #[test]
    fn schema_lists_every_section() {
        let schema: serde_json::Value = serde_json::from_str(include_str!("../../../docs/config.schema.json")).unwrap();
        let mut documented: Vec<String> = schema["properties"].as_object().unwrap().keys().cloned().collect();
        documented.sort();
        let mut actual: Vec<String> = serde_json::to_value(ExperimentConfig::from_json("{}").unwrap())
            .unwrap()
            .as_object()
            .unwrap()
            .keys()
            .cloned()
            .collect();
        actual.sort();
        assert_eq!(documented, actual);
    }

    #[test]
    fn example_configs_load() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
        let mut count = 0;
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            ExperimentConfig::from_path(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            count += 1;
        }
        assert!(count > 0);
    }

    #[test]
    fn range_checks() {
        assert!(ExperimentConfig::from_json(r#"{"profile": {"kind": "polynomial-perturbed", "coefficients": [-1.0]}}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"energies": {"e1": -1.0, "e2": 0.0}}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"sweep": {"experiment": "custom"}}"#).is_err());
        assert!(ExperimentConfig::from_json(
            r#"{"sweep": {"experiment": "zonal-equator", "k_list": [2], "k_range": {"start": 2, "end": 4}}}"#
        )
        .is_err());
        assert!(ExperimentConfig::from_json(r#"{"output": {"report": "../x.csv"}}"#).is_err());
        let c = ExperimentConfig::from_json(r#"{"sweep": {"experiment": "zonal-equator"}}"#).unwrap();
        assert_eq!(c.sweep.unwrap().k_values().unwrap().len(), 10);
    }
}
