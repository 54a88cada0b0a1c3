//! TOML run configuration: data paths, scenario matrix, split and training
//! settings. Validation reports every violated field at once.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use loadcast_core::features::{FeatureKind, SplitConfig};
use loadcast_core::ingest::SynthConfig;
use loadcast_core::neural::{Architecture, TrainConfig};
use loadcast_core::scenarios::ScenarioKind;

/// Environment variable supplying the default output directory.
pub const OUT_DIR_ENV: &str = "LOADCAST_OUT_DIR";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthFileConfig {
    pub synth: SynthConfig,
}

impl SynthFileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let body = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: SynthFileConfig = toml::from_str(&body)
            .with_context(|| format!("parsing config {}", path.display()))?;
        cfg.synth.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DataSection {
    pub load: PathBuf,
    pub weather: PathBuf,
    #[serde(default)]
    pub covid: Option<PathBuf>,
    #[serde(default)]
    pub mobility: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioSection {
    pub kinds: Vec<ScenarioKind>,
    #[serde(default = "default_features")]
    pub features: Vec<FeatureKind>,
    #[serde(default = "default_architectures")]
    pub architectures: Vec<Architecture>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
}

fn default_features() -> Vec<FeatureKind> {
    vec![FeatureKind::Weather]
}

fn default_architectures() -> Vec<Architecture> {
    Architecture::ALL.to_vec()
}

fn default_seeds() -> Vec<u64> {
    vec![1]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RunSection {
    pub out_dir: Option<PathBuf>,
    pub workers: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            out_dir: None,
            workers: 1,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub data: DataSection,
    pub scenario: ScenarioSection,
    #[serde(default)]
    pub split: SplitConfig,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub run: RunSection,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let body = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: RunConfig = toml::from_str(&body)
            .with_context(|| format!("parsing config {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Every violated field, reported together.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();

        if self.scenario.kinds.is_empty() {
            problems.push("scenario.kinds must not be empty".to_string());
        }
        let kind_set: BTreeSet<&str> = self.scenario.kinds.iter().map(|k| k.name()).collect();
        if kind_set.len() != self.scenario.kinds.len() {
            problems.push("scenario.kinds contains duplicates".to_string());
        }
        if self.scenario.architectures.is_empty() {
            problems.push("scenario.architectures must not be empty".to_string());
        }
        if self.scenario.seeds.is_empty() {
            problems.push("scenario.seeds must not be empty".to_string());
        }
        if self.scenario.kinds.contains(&ScenarioKind::Rolling) && self.scenario.features.is_empty()
        {
            problems.push("scenario.features must name at least one feature for rolling runs".to_string());
        }
        let needs = |f: FeatureKind| {
            self.scenario.kinds.contains(&ScenarioKind::Rolling)
                && self.scenario.features.contains(&f)
        };
        if needs(FeatureKind::Covid) && self.data.covid.is_none() {
            problems.push("data.covid is required when rolling runs use the covid feature".to_string());
        }
        if needs(FeatureKind::Mobility) && self.data.mobility.is_none() {
            problems.push("data.mobility is required when rolling runs use the mobility feature".to_string());
        }
        if let Err(e) = self.split.validate() {
            problems.push(e.to_string());
        }
        if let Err(e) = self.train.validate() {
            problems.push(e.to_string());
        }
        if self.run.workers == 0 {
            problems.push("run.workers must be >= 1".to_string());
        }

        if problems.is_empty() {
            Ok(())
        } else {
            anyhow::bail!("invalid run config: {}", problems.join("; "))
        }
    }

    /// Output directory: CLI flag beats config beats environment beats `out`.
    pub fn resolve_out_dir(&self, flag: Option<&Path>) -> PathBuf {
        if let Some(dir) = flag {
            return dir.to_path_buf();
        }
        if let Some(dir) = &self.run.out_dir {
            return dir.clone();
        }
        if let Ok(dir) = std::env::var(OUT_DIR_ENV) {
            if !dir.is_empty() {
                return PathBuf::from(dir);
            }
        }
        PathBuf::from("out")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        [data]
        load = "data/load.csv"
        weather = "data/weather.csv"

        [scenario]
        kinds = ["benchmark"]
    "#;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg: RunConfig = toml::from_str(MINIMAL).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.scenario.architectures.len(), 3);
        assert_eq!(cfg.scenario.seeds, vec![1]);
        assert_eq!(cfg.train.epochs, 50);
        assert_eq!(cfg.split.horizon_weeks, 10);
        assert_eq!(cfg.run.workers, 1);
    }

    #[test]
    fn all_violations_reported_at_once() {
        let cfg: RunConfig = toml::from_str(
            r#"
            [data]
            load = "l.csv"
            weather = "w.csv"

            [scenario]
            kinds = ["rolling"]
            features = ["covid", "mobility"]
            seeds = []

            [train]
            epochs = 0

            [run]
            workers = 0
            "#,
        )
        .unwrap();
        let err = cfg.validate().unwrap_err().to_string();
        for needle in ["seeds", "data.covid", "data.mobility", "epochs", "workers"] {
            assert!(err.contains(needle), "missing {needle} in: {err}");
        }
    }

    #[test]
    fn unknown_kind_rejected_at_parse() {
        let parsed: Result<RunConfig, _> = toml::from_str(&MINIMAL.replace("benchmark", "arima"));
        let err = parsed.unwrap_err().to_string();
        assert!(err.contains("arima") || err.contains("variant"), "{err}");
    }

    #[test]
    fn out_dir_precedence() {
        let cfg: RunConfig = toml::from_str(MINIMAL).unwrap();
        assert_eq!(cfg.resolve_out_dir(None), PathBuf::from("out"));
        assert_eq!(
            cfg.resolve_out_dir(Some(Path::new("elsewhere"))),
            PathBuf::from("elsewhere")
        );
        let mut with_dir = cfg.clone();
        with_dir.run.out_dir = Some(PathBuf::from("from_config"));
        assert_eq!(with_dir.resolve_out_dir(None), PathBuf::from("from_config"));
    }
}
