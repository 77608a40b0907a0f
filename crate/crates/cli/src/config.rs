//! Run configuration (TOML). Unknown keys are rejected; relative paths are
//! resolved against the config file's directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use bargain::corpus::Fraction;
use bargain::eval::{Baseline, ExperimentConfig, FeatureGroup, ModelEntry, DEFAULT_K};
use bargain::features::FeatureSet;
use bargain::models::{Activation, Algorithm, Grid, ModelSpec, ParamValue, Technique};
use serde::{Deserialize, Serialize};

fn default_fractions() -> Vec<f64> {
    Fraction::GRID.iter().map(|f| f.value()).collect()
}
fn default_k() -> f64 {
    DEFAULT_K
}
fn default_baselines() -> Vec<Baseline> {
    Baseline::ALL.to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Preprocessed corpus (JSON lines with a split per dialogue).
    pub corpus: PathBuf,
    pub output_dir: PathBuf,
    pub seed: u64,
    #[serde(default = "default_fractions")]
    pub fractions: Vec<f64>,
    #[serde(default = "default_k")]
    pub k: f64,
    #[serde(default = "default_baselines")]
    pub baselines: Vec<Baseline>,
    /// Directory of lexicon overrides; the bundled lexicons fill the rest.
    #[serde(default)]
    pub lexicon_dir: Option<PathBuf>,
    #[serde(default)]
    pub models: Vec<ModelConfig>,
    #[serde(default)]
    pub extract: ExtractConfig,
    #[serde(default)]
    pub ablation: Option<AblationConfig>,
    #[serde(default)]
    pub flatten: FlattenConfig,
    #[serde(default)]
    pub ensemble: Option<EnsembleSection>,
    #[serde(default)]
    pub probe: Option<ProbeSection>,
    #[serde(default)]
    pub significance: SignificanceConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchKind {
    /// The built-in search for the algorithm.
    Standard,
    /// Exactly `hyperparameters`.
    Single,
    /// Every combination of `grid`.
    Grid,
    /// `trials` sampled combinations of `grid`.
    Randomized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub name: String,
    pub algorithm: Algorithm,
    pub features: FeatureSet,
    #[serde(default = "default_search")]
    pub search: SearchKind,
    #[serde(default)]
    pub hyperparameters: BTreeMap<String, ParamValue>,
    #[serde(default)]
    pub grid: BTreeMap<String, Vec<ParamValue>>,
    #[serde(default)]
    pub trials: Option<usize>,
    #[serde(default)]
    pub drop: Vec<FeatureGroup>,
}

fn default_search() -> SearchKind {
    SearchKind::Standard
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtractConfig {
    #[serde(default = "default_sets")]
    pub sets: Vec<FeatureSet>,
}

fn default_sets() -> Vec<FeatureSet> {
    vec![FeatureSet::Tsf, FeatureSet::TsfLf]
}

impl Default for ExtractConfig {
    fn default() -> Self {
        ExtractConfig { sets: default_sets() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AblationConfig {
    /// Name of the model row to ablate.
    pub base: String,
    #[serde(default = "all_groups")]
    pub groups: Vec<FeatureGroup>,
}

fn all_groups() -> Vec<FeatureGroup> {
    FeatureGroup::ALL.to_vec()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlattenConfig {
    #[serde(default)]
    pub rewrite_message_prices: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSection {
    /// External predictions CSV: dialogue_id,fraction,prediction.
    pub predictions: PathBuf,
    #[serde(default = "default_hidden")]
    pub hidden_sizes: Vec<usize>,
    #[serde(default = "default_acts")]
    pub activations: Vec<Activation>,
    #[serde(default = "default_trials")]
    pub trials: usize,
}

fn default_hidden() -> Vec<usize> {
    vec![50, 100, 200]
}
fn default_acts() -> Vec<Activation> {
    vec![Activation::Relu, Activation::Tanh]
}
fn default_trials() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSection {
    pub pre: PathBuf,
    pub post: PathBuf,
    /// Only used for CSV containers, which carry no header metadata.
    #[serde(default = "one")]
    pub fraction: f64,
    /// Feature CSV from `extract`; when absent, features are extracted from
    /// the corpus at the containers' fraction.
    #[serde(default)]
    pub features: Option<PathBuf>,
    /// Features to probe; default every language feature.
    #[serde(default)]
    pub only: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignificanceConfig {
    #[serde(default = "one")]
    pub fraction: f64,
    #[serde(default = "tsf_lf")]
    pub features: FeatureSet,
}

fn one() -> f64 {
    1.0
}
fn tsf_lf() -> FeatureSet {
    FeatureSet::TsfLf
}

impl Default for SignificanceConfig {
    fn default() -> Self {
        SignificanceConfig {
            fraction: 1.0,
            features: FeatureSet::TsfLf,
        }
    }
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: RunConfig = toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        resolve(base, &mut cfg.corpus);
        resolve(base, &mut cfg.output_dir);
        if let Some(d) = cfg.lexicon_dir.as_mut() {
            resolve(base, d);
        }
        if let Some(e) = cfg.ensemble.as_mut() {
            resolve(base, &mut e.predictions);
        }
        if let Some(p) = cfg.probe.as_mut() {
            resolve(base, &mut p.pre);
            resolve(base, &mut p.post);
            if let Some(f) = p.features.as_mut() {
                resolve(base, f);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.fraction_grid()?;
        if !(self.k > 0.0) {
            bail!("k must be positive");
        }
        let mut seen = std::collections::HashSet::new();
        for m in &self.models {
            if !seen.insert(m.name.as_str()) {
                bail!("duplicate model name `{}`", m.name);
            }
            self.grid_for(m)?;
        }
        if let Some(a) = &self.ablation {
            if !self.models.iter().any(|m| m.name == a.base) {
                bail!("ablation base `{}` is not a configured model", a.base);
            }
        }
        Fraction::new(self.significance.fraction)?;
        if let Some(p) = &self.probe {
            Fraction::new(p.fraction)?;
        }
        Ok(())
    }

    pub fn fraction_grid(&self) -> Result<Vec<Fraction>> {
        if self.fractions.is_empty() {
            bail!("fractions must not be empty");
        }
        let mut v = self
            .fractions
            .iter()
            .map(|f| Fraction::new(*f))
            .collect::<bargain::Result<Vec<_>>>()?;
        v.sort();
        v.dedup();
        Ok(v)
    }

    pub fn grid_for(&self, m: &ModelConfig) -> Result<Grid> {
        let seed = self.seed;
        let grid = match m.search {
            SearchKind::Standard => Grid::standard(m.algorithm, seed),
            SearchKind::Single => Grid::single(&ModelSpec::new(m.algorithm, m.hyperparameters.clone(), seed)?),
            SearchKind::Grid | SearchKind::Randomized => {
                if m.grid.is_empty() {
                    bail!("model `{}`: search = {:?} needs a [models.grid] table", m.name, m.search);
                }
                for (k, v) in &m.hyperparameters {
                    if m.grid.contains_key(k) {
                        bail!("model `{}`: `{k}` given both as fixed value ({v}) and grid axis", m.name);
                    }
                }
                let mut axes: Vec<(String, Vec<ParamValue>)> =
                    m.hyperparameters.iter().map(|(k, v)| (k.clone(), vec![v.clone()])).collect();
                axes.extend(m.grid.iter().map(|(k, v)| (k.clone(), v.clone())));
                let technique = if m.search == SearchKind::Grid {
                    Technique::Exhaustive
                } else {
                    Technique::Randomized {
                        trials: m.trials.unwrap_or(10),
                        seed,
                    }
                };
                Grid {
                    algorithm: m.algorithm,
                    axes,
                    technique,
                    seed,
                }
            }
        };
        grid.points().with_context(|| format!("model `{}`", m.name))?;
        Ok(grid)
    }

    pub fn entry(&self, m: &ModelConfig) -> Result<ModelEntry> {
        let mut drop = Vec::new();
        for g in &m.drop {
            drop.extend(g.prefixes());
        }
        Ok(ModelEntry {
            name: m.name.clone(),
            grid: self.grid_for(m)?,
            features: m.features,
            drop_prefixes: drop,
        })
    }

    pub fn experiment(&self) -> Result<ExperimentConfig> {
        Ok(ExperimentConfig {
            fractions: self.fraction_grid()?,
            baselines: self.baselines.clone(),
            models: self.models.iter().map(|m| self.entry(m)).collect::<Result<_>>()?,
            k: self.k,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
corpus = "corpus.jsonl"
output_dir = "out"
seed = 7

[[models]]
name = "RF: TSF"
algorithm = "random_forest"
features = "tsf"
search = "single"
hyperparameters = { n_estimators = 10, max_depth = "none" }
"#;

    #[test]
    fn parses_and_resolves() {
        let dir = std::env::temp_dir();
        let p = dir.join("bargain-config-test.toml");
        std::fs::write(&p, MINIMAL).unwrap();
        let cfg = RunConfig::load(&p).unwrap();
        assert_eq!(cfg.corpus, dir.join("corpus.jsonl"));
        assert_eq!(cfg.fraction_grid().unwrap().len(), 5);
        let e = cfg.experiment().unwrap();
        assert_eq!(e.models[0].grid.size(), 1);
        assert_eq!(e.baselines.len(), 4);
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad = MINIMAL.replace("seed = 7", "seed = 7\nsede = 8");
        assert!(toml::from_str::<RunConfig>(&bad).is_err());
        let bad = MINIMAL.replace("n_estimators = 10", "trees = 10");
        let cfg: RunConfig = toml::from_str(&bad).unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn seed_is_required() {
        let bad = MINIMAL.replace("seed = 7\n", "");
        assert!(toml::from_str::<RunConfig>(&bad).is_err());
    }

    #[test]
    fn round_trips_through_json() {
        let cfg: RunConfig = toml::from_str(MINIMAL).unwrap();
        let json = serde_json::to_string(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cfg);
    }
}

#[cfg(test)]
mod shipped {
    use super::*;

    #[test]
    fn shipped_configs_validate() {
        for text in [
            include_str!("../../../configs/baselines.toml"),
            include_str!("../../../configs/classical.toml"),
        ] {
            let cfg: RunConfig = toml::from_str(text).unwrap();
            cfg.validate().unwrap();
        }
    }
}
