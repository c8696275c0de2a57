//! Run configuration: a TOML file with camelCase keys. Every section is
//! optional and unknown keys are rejected.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::discretization::{SphereKind, SphereRule, VelocityGrid};
use crate::error::{Error, Result};
use crate::estimates::{extended_real, ExponentTriple};
use crate::operators::{AngularKernel, CrossSection, Mode, OperatorParams};
use crate::solver::{SolverSettings, TimeMesh};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase", default)]
pub struct GridConfig {
    pub radius: f64,
    pub points_per_axis: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { radius: 8.0, points_per_axis: 13 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase", default)]
pub struct SphereConfig {
    pub kind: String,
    pub order: usize,
}

impl Default for SphereConfig {
    fn default() -> Self {
        SphereConfig { kind: SphereKind::ProductGauss.to_string(), order: 6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase", default)]
pub struct CrossSectionConfig {
    pub gamma: f64,
    pub b_kind: String,
    pub b_value: f64,
}

impl Default for CrossSectionConfig {
    fn default() -> Self {
        CrossSectionConfig { gamma: 1.0, b_kind: "constant".into(), b_value: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase", default)]
pub struct SolverConfig {
    /// `classical` or `quantum`.
    pub mode: String,
    pub t_final: f64,
    pub steps: usize,
    /// Amplitude of the two-bump initial data.
    pub epsilon0: f64,
    pub picard_tol: f64,
    pub ks_tol: f64,
    /// Cap on Picard sweeps and on sandwich iterations.
    pub max_iters: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let s = SolverSettings::default();
        SolverConfig {
            mode: "quantum".into(),
            t_final: 1.0,
            steps: 16,
            epsilon0: 1e-3,
            picard_tol: s.picard_tol,
            ks_tol: s.ks_tol,
            max_iters: s.max_iters,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase", default)]
pub struct EstimateConfig {
    #[serde(with = "extended_real")]
    pub p: f64,
    #[serde(with = "extended_real")]
    pub q: f64,
    /// Taken from Young's relation when absent.
    #[serde(with = "optional_extended_real", skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    pub k: f64,
    pub ensemble_size: usize,
    pub seed: u64,
}

impl Default for EstimateConfig {
    fn default() -> Self {
        EstimateConfig { p: 1.3, q: 2.2, r: None, k: 3.0, ensemble_size: 50, seed: 20240611 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase", default)]
pub struct OutputConfig {
    pub directory: PathBuf,
    /// Any of `csv` and `json`.
    pub formats: Vec<String>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { directory: PathBuf::from("out"), formats: vec!["csv".into(), "json".into()] }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase", default)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub sphere: SphereConfig,
    pub cross_section: CrossSectionConfig,
    pub solver: SolverConfig,
    pub estimate: EstimateConfig,
    pub output: OutputConfig,
}

mod optional_extended_real {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(v) => crate::estimates::extended_real::serialize(v, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        #[derive(Deserialize)]
        struct Wrap(#[serde(with = "crate::estimates::extended_real")] f64);
        Ok(Some(Wrap::deserialize(d)?.0))
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configs serialize")
    }

    /// Checks every range that the owning modules would reject, so that bad
    /// input fails before any work starts.
    pub fn validate(&self) -> Result<()> {
        let gamma = self.cross_section.gamma;
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::Config(format!("crossSection.gamma = {gamma} is outside the hard-potential range [0, 1]")));
        }
        if self.cross_section.b_kind != "constant" {
            return Err(Error::Config(format!("crossSection.bKind must be \"constant\", got {:?}", self.cross_section.b_kind)));
        }
        self.params()?;
        self.mode()?;
        self.mesh()?;
        let s = &self.solver;
        if !(s.epsilon0 >= 0.0 && s.epsilon0.is_finite()) {
            return Err(Error::Config(format!("solver.epsilon0 must be nonnegative, got {}", s.epsilon0)));
        }
        if !(s.picard_tol > 0.0 && s.ks_tol > 0.0) || s.max_iters == 0 {
            return Err(Error::Config("solver tolerances must be positive and maxIters at least 1".into()));
        }
        if self.estimate.ensemble_size == 0 {
            return Err(Error::Config("estimate.ensembleSize must be at least 1".into()));
        }
        self.triple()?;
        for f in &self.output.formats {
            if f != "csv" && f != "json" {
                return Err(Error::Config(format!("unknown output format {f:?}")));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<VelocityGrid> {
        VelocityGrid::new(self.grid.radius, self.grid.points_per_axis).map_err(as_config)
    }

    pub fn sphere_rule(&self) -> Result<SphereRule> {
        let kind: SphereKind = self.sphere.kind.parse()?;
        SphereRule::build(kind, self.sphere.order).map_err(as_config)
    }

    pub fn cross_section(&self) -> Result<CrossSection> {
        CrossSection::new(self.cross_section.gamma, AngularKernel::Constant(self.cross_section.b_value)).map_err(as_config)
    }

    pub fn params(&self) -> Result<OperatorParams> {
        Ok(OperatorParams::new(self.cross_section()?, self.sphere_rule()?, self.grid()?))
    }

    pub fn mode(&self) -> Result<Mode> {
        match self.solver.mode.as_str() {
            "classical" => Ok(Mode::Classical),
            "quantum" => Ok(Mode::QUANTUM),
            m => Err(Error::Config(format!("solver.mode must be classical or quantum, got {m:?}"))),
        }
    }

    pub fn mesh(&self) -> Result<TimeMesh> {
        TimeMesh::new(self.solver.t_final, self.solver.steps).map_err(as_config)
    }

    pub fn settings(&self) -> SolverSettings {
        SolverSettings {
            picard_tol: self.solver.picard_tol,
            max_sweeps: self.solver.max_iters,
            ks_tol: self.solver.ks_tol,
            max_iters: self.solver.max_iters,
        }
    }

    pub fn triple(&self) -> Result<ExponentTriple> {
        let e = &self.estimate;
        let gamma = self.cross_section.gamma;
        match e.r {
            Some(r) => ExponentTriple::new(e.p, e.q, r, e.k, gamma),
            None => ExponentTriple::from_young(e.p, e.q, e.k, gamma),
        }
        .map_err(as_config)
    }

    pub fn wants(&self, format: &str) -> bool {
        self.output.formats.iter().any(|f| f == format)
    }

    pub fn shared_sphere(&self) -> Result<Arc<SphereRule>> {
        Ok(Arc::new(self.sphere_rule()?))
    }
}

fn as_config(e: Error) -> Error {
    match e {
        Error::Range(m) | Error::Domain(m) => Error::Config(m),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = RunConfig::from_toml("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        let round = RunConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(round, cfg);
    }

    #[test]
    fn camel_case_sections() {
        let cfg = RunConfig::from_toml(
            "[grid]\npointsPerAxis = 9\n[crossSection]\ngamma = 0.5\n[estimate]\np = 1.5\nq = 2.0\nr = \"inf\"\nk = 0.5\n",
        );
        let cfg = cfg.unwrap();
        assert_eq!(cfg.grid.points_per_axis, 9);
        assert_eq!(cfg.estimate.r, Some(f64::INFINITY));
    }

    #[test]
    fn gamma_outside_range_is_a_config_error() {
        let err = RunConfig::from_toml("[crossSection]\ngamma = 1.5\n").unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("[0, 1]"));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_toml("[grid]\nradius = 8.0\nspacing = 1.0\n").is_err());
        assert!(RunConfig::from_toml("[extra]\nx = 1\n").is_err());
    }

    #[test]
    fn even_grids_and_bad_modes_are_rejected() {
        assert!(RunConfig::from_toml("[grid]\npointsPerAxis = 12\n").is_err());
        assert!(RunConfig::from_toml("[solver]\nmode = \"semi\"\n").is_err());
        assert!(RunConfig::from_toml("[solver]\nsteps = 2\n").is_err());
    }
}
