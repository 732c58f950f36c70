//! TOML run configs. Relative paths inside a config resolve against the
//! config file's directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use netdeg::dynamics::DynamicsModel;
use netdeg::estimators::{Estimator, EstimatorConfig};
use netdeg::eval::{ExperimentConfig, GraphSource};
use netdeg::linkpred::{LinkPredConfig, Metric, Variant, DEFAULT_COMPARISONS};

use crate::error::CliError;

fn read_toml<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

fn resolve_graph(base: &Path, g: &mut GraphSource) {
    if let GraphSource::File { path } = g {
        resolve(base, path);
    }
}

fn base_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

pub fn load_experiment(path: &Path) -> Result<ExperimentConfig, CliError> {
    let mut c: ExperimentConfig = read_toml(path)?;
    let base = base_dir(path);
    resolve_graph(&base, &mut c.graph);
    if let Some(d) = c.cache_dir.as_mut() {
        resolve(&base, d);
    }
    Ok(c)
}

fn default_fraction() -> f64 {
    0.01
}
fn default_estimator() -> Estimator {
    Estimator::TopoPlus
}
fn default_metrics() -> Vec<Metric> {
    Metric::ALL.to_vec()
}
fn default_variants() -> Vec<Variant> {
    Variant::ALL.to_vec()
}
fn default_comparisons() -> usize {
    DEFAULT_COMPARISONS
}

/// Link-prediction run: every listed metric is scored with every listed
/// variant on the same draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkpredRunConfig {
    pub graph: GraphSource,
    pub dynamics: DynamicsModel,
    /// Precomputed states; simulated when absent.
    #[serde(default)]
    pub states: Option<PathBuf>,
    #[serde(default = "default_fraction")]
    pub fraction: f64,
    #[serde(default = "default_estimator")]
    pub estimator: Estimator,
    #[serde(default = "default_metrics")]
    pub metrics: Vec<Metric>,
    #[serde(default = "default_variants")]
    pub variants: Vec<Variant>,
    pub repetitions: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_comparisons")]
    pub comparisons: usize,
    #[serde(default)]
    pub options: EstimatorConfig,
    #[serde(default)]
    pub cache_dir: Option<PathBuf>,
}

impl LinkpredRunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let mut c: Self = read_toml(path)?;
        let base = base_dir(path);
        resolve_graph(&base, &mut c.graph);
        for p in [c.states.as_mut(), c.cache_dir.as_mut()].into_iter().flatten() {
            resolve(&base, p);
        }
        Ok(c)
    }

    pub fn linkpred_config(&self) -> LinkPredConfig {
        LinkPredConfig {
            fraction: self.fraction,
            estimator: self.estimator,
            combos: self
                .metrics
                .iter()
                .flat_map(|&m| self.variants.iter().map(move |&v| (m, v)))
                .collect(),
            repetitions: self.repetitions,
            seed: self.seed,
            comparisons: self.comparisons,
            options: self.options,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn experiment_config_paths_resolve_against_config_dir() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("exp.toml");
        std::fs::write(
            &path,
            r#"
fractions = [0.1]
estimators = ["topoplus"]
repetitions = 2
cache_dir = "cache"
graph = { kind = "file", path = "g.txt" }
[dynamics]
family = "epidemic"
"#,
        )
        .unwrap();
        let c = load_experiment(&path).unwrap();
        assert_eq!(c.cache_dir.unwrap(), dir.path().join("cache"));
        assert_eq!(c.graph, GraphSource::File { path: dir.path().join("g.txt") });
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("lp.toml");
        std::fs::write(
            &path,
            "repetitions = 1\nmetric = \"pa\"\ngraph = { kind = \"ba\", n = 20, attach = 2, seed = 1 }\n[dynamics]\nfamily = \"epidemic\"\n",
        )
        .unwrap();
        let err = LinkpredRunConfig::load(&path).unwrap_err();
        assert!(err.message.contains("metric"), "{}", err.message);
    }
}
