//! Experiment configuration files (TOML). Unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::benchmarks::{
    gen_lpv_disk, gen_lti_disk, gen_nl_disk, truth_model, DiskParams, DiskVariant, Generated, NoiseKind, NoiseSpec,
    Scheduling,
};
use crate::error::{Error, Result};
use crate::io::read_text;
use crate::models::{Model, ModelStructure, Plant};
use crate::training::TrainConfig;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchmarkKind {
    #[default]
    LtiDisk,
    LpvDiskExternal,
    LpvDiskSelf,
    NlDisk,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchmarkConfig {
    pub kind: BenchmarkKind,
    pub n_train: usize,
    pub n_test: usize,
    /// Train data uses generator seed `2 seed`, test data `2 seed + 1`.
    pub seed: u64,
    pub disk: DiskParams,
    pub noise: NoiseSpec,
    /// External scheduling only.
    pub p_mag: f64,
    /// External scheduling only; `None` means `0.05 / (2 Ts)`.
    pub bandwidth_hz: Option<f64>,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            kind: BenchmarkKind::LtiDisk,
            n_train: 2000,
            n_test: 2000,
            seed: 0,
            disk: DiskParams::default(),
            noise: NoiseSpec::default(),
            p_mag: 0.25,
            bandwidth_hz: None,
        }
    }
}

impl BenchmarkConfig {
    pub fn scheduling(&self) -> Scheduling {
        match self.kind {
            BenchmarkKind::LpvDiskExternal => Scheduling::External {
                p_mag: self.p_mag,
                bandwidth_hz: self.bandwidth_hz.unwrap_or(0.05 / (2.0 * self.disk.ts)),
            },
            _ => Scheduling::SelfSinc,
        }
    }

    pub fn variant(&self) -> DiskVariant {
        match self.kind {
            BenchmarkKind::LtiDisk => DiskVariant::Lti,
            BenchmarkKind::LpvDiskExternal => DiskVariant::LpvExternal,
            BenchmarkKind::LpvDiskSelf | BenchmarkKind::NlDisk => DiskVariant::LpvSelf,
        }
    }

    pub fn generate(&self, n: usize, seed: u64) -> Result<Generated> {
        match self.kind {
            BenchmarkKind::LtiDisk => gen_lti_disk(&self.disk, &self.noise, n, seed),
            BenchmarkKind::LpvDiskExternal | BenchmarkKind::LpvDiskSelf => {
                gen_lpv_disk(&self.disk, &self.noise, n, seed, &self.scheduling())
            }
            BenchmarkKind::NlDisk => gen_nl_disk(&self.disk, &self.noise, n, seed),
        }
    }

    /// `(train, test)` for this configuration's seed.
    pub fn generate_pair(&self) -> Result<(Generated, Generated)> {
        Ok((self.generate(self.n_train, 2 * self.seed)?, self.generate(self.n_test, 2 * self.seed + 1)?))
    }

    /// Generating system in model form.
    pub fn truth(&self) -> Result<(Model, Vec<f64>)> {
        truth_model(&self.disk, &self.noise, self.variant())
    }

    pub fn validate(&self) -> Result<()> {
        self.disk.validate()?;
        self.noise.validate()?;
        if self.n_train < 2 || self.n_test < 2 {
            return Err(Error::Config("benchmark.n_train and benchmark.n_test must be at least 2".into()));
        }
        if self.kind == BenchmarkKind::LtiDisk && self.noise.kind == NoiseKind::BjLpv {
            return Err(Error::Config("benchmark.noise.kind = \"bj_lpv\" needs a scheduled benchmark".into()));
        }
        if self.kind == BenchmarkKind::LpvDiskExternal && !(0.0..=1.0).contains(&self.p_mag) {
            return Err(Error::Config("benchmark.p_mag must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    /// Dataset directory, relative to the output root unless absolute.
    pub data_dir: String,
    /// Run directory, relative to the output root unless absolute.
    pub run_dir: String,
}

impl Default for Paths {
    fn default() -> Self {
        Paths {
            data_dir: "data".into(),
            run_dir: "run".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Row label in reports.
    #[serde(default = "default_label")]
    pub label: String,
    #[serde(default)]
    pub benchmark: BenchmarkConfig,
    pub model: ModelStructure,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub paths: Paths,
}

fn default_label() -> String {
    "model".into()
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&read_text(path)?).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            e => e,
        })
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Serde(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.benchmark.validate()?;
        self.model.validate()?;
        self.train.validate()?;
        if self.model.nu != 1 || self.model.ny != 1 {
            return Err(Error::Config("model.nu and model.ny must be 1 for the disk benchmarks".into()));
        }
        let external = matches!(self.model.plant, Plant::LpvExternal { .. });
        if external != (self.benchmark.kind == BenchmarkKind::LpvDiskExternal) {
            return Err(Error::Config(
                "externally scheduled models go with benchmark.kind = \"lpv_disk_external\" only".into(),
            ));
        }
        if external && self.model.np() != 1 {
            return Err(Error::Config("the external disk scheduling signal has one channel".into()));
        }
        Ok(())
    }

    /// Scheduling label for reports.
    pub fn sched_label(&self) -> &'static str {
        match self.model.plant {
            Plant::LpvExternal { .. } => "ext",
            Plant::LpvSelf { .. } => "self",
            _ => "-",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MIN: &str = r#"
[model]
nx = 2
nz = 1
nu = 1
ny = 1
plant = { family = "lti" }
noise = { family = "lti" }
"#;

    #[test]
    fn minimal_config_uses_defaults() {
        let c = ExperimentConfig::from_toml_str(MIN).unwrap();
        assert_eq!(c.benchmark, BenchmarkConfig::default());
        assert_eq!(c.train, TrainConfig::default());
        let again = ExperimentConfig::from_toml_str(&c.to_toml_string().unwrap()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = format!("{MIN}\n[train]\nrho_thetta = 1.0\n");
        assert!(matches!(ExperimentConfig::from_toml_str(&bad), Err(Error::Config(_))));
        let bad = format!("{MIN}\n[benchmark.disk]\nkm = 1.0\nmass = 2.0\n");
        assert!(ExperimentConfig::from_toml_str(&bad).is_err());
    }

    #[test]
    fn scheduling_must_match() {
        let ext = MIN.replace(r#"plant = { family = "lti" }"#, r#"plant = { family = "lpv_external", np = 1, matrices = { kind = "affine" } }"#);
        assert!(ExperimentConfig::from_toml_str(&ext).is_err());
        let ok = format!("{ext}\n[benchmark]\nkind = \"lpv_disk_external\"\n");
        assert!(ExperimentConfig::from_toml_str(&ok).is_ok());
    }
}
