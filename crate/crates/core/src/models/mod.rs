//! The five classical regressors, their hyperparameters and model files.

pub mod forest;
pub mod grid;
pub mod linear;
pub mod mlp;
pub mod svr;
pub mod tree;

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureVector;

pub use forest::{Forest, ForestParams};
pub use grid::{grid_search, Grid, GridResult, Technique};
pub use linear::LinearModel;
pub use mlp::{Activation, Mlp, MlpParams};
pub use svr::{Svr, SvrParams};
pub use tree::{MaxFeatures, Tree, TreeParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Linear,
    SvrRbf,
    FeedForward,
    DecisionTree,
    RandomForest,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Linear,
        Algorithm::SvrRbf,
        Algorithm::FeedForward,
        Algorithm::DecisionTree,
        Algorithm::RandomForest,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Linear => "linear",
            Algorithm::SvrRbf => "svr_rbf",
            Algorithm::FeedForward => "feed_forward",
            Algorithm::DecisionTree => "decision_tree",
            Algorithm::RandomForest => "random_forest",
        }
    }

    /// Short label used in report rows.
    pub fn label(self) -> &'static str {
        match self {
            Algorithm::Linear => "LR",
            Algorithm::SvrRbf => "SVR",
            Algorithm::FeedForward => "FF",
            Algorithm::DecisionTree => "DT",
            Algorithm::RandomForest => "RF",
        }
    }

    fn allowed(self) -> &'static [&'static str] {
        match self {
            Algorithm::Linear => &["ridge"],
            Algorithm::SvrRbf => &["c", "epsilon", "gamma", "tol", "max_iter"],
            Algorithm::FeedForward => &[
                "hidden",
                "activation",
                "learning_rate",
                "epochs",
                "batch_size",
                "alpha",
                "tol",
                "n_iter_no_change",
            ],
            Algorithm::DecisionTree => &["max_depth", "min_samples_split", "max_features"],
            Algorithm::RandomForest => &["n_estimators", "max_depth", "min_samples_split", "max_features"],
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str() == s || a.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown algorithm `{s}`"))
    }
}

/// A hyperparameter value as written in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Int(i64),
    Float(f64),
    Text(String),
}

impl ParamValue {
    fn as_f64(&self) -> Option<f64> {
        match self {
            ParamValue::Int(i) => Some(*i as f64),
            ParamValue::Float(f) => Some(*f),
            ParamValue::Text(_) => None,
        }
    }

    fn as_usize(&self) -> Option<usize> {
        match self {
            ParamValue::Int(i) if *i >= 0 => Some(*i as usize),
            ParamValue::Float(f) if *f >= 0.0 && f.fract() == 0.0 => Some(*f as usize),
            _ => None,
        }
    }

    fn is_unlimited(&self) -> bool {
        matches!(self, ParamValue::Text(s) if matches!(s.to_ascii_lowercase().as_str(), "none" | "no limit" | "unlimited"))
    }
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Int(i) => write!(f, "{i}"),
            ParamValue::Float(x) => write!(f, "{x}"),
            ParamValue::Text(s) => f.write_str(s),
        }
    }
}

impl From<i64> for ParamValue {
    fn from(v: i64) -> Self {
        ParamValue::Int(v)
    }
}
impl From<f64> for ParamValue {
    fn from(v: f64) -> Self {
        ParamValue::Float(v)
    }
}
impl From<&str> for ParamValue {
    fn from(v: &str) -> Self {
        ParamValue::Text(v.to_string())
    }
}

/// Algorithm, hyperparameters and seed: everything that determines a fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub algorithm: Algorithm,
    #[serde(default)]
    pub hyperparameters: BTreeMap<String, ParamValue>,
    #[serde(default)]
    pub seed: u64,
}

/// Hyperparameters resolved to their typed form.
#[derive(Debug, Clone, PartialEq)]
pub enum Resolved {
    Linear { ridge: f64 },
    Svr(SvrParams),
    Mlp(MlpParams),
    Tree(TreeParams),
    Forest(ForestParams),
}

struct Lookup<'a>(&'a BTreeMap<String, ParamValue>);

impl Lookup<'_> {
    fn bad(name: &str, v: &ParamValue, want: &str) -> Error {
        Error::domain(format!("hyperparameter {name} = {v}: expected {want}"))
    }

    fn float(&self, name: &str, default: f64) -> Result<f64> {
        match self.0.get(name) {
            None => Ok(default),
            Some(v) => v.as_f64().filter(|x| x.is_finite()).ok_or_else(|| Self::bad(name, v, "a number")),
        }
    }

    fn positive(&self, name: &str, default: f64) -> Result<f64> {
        let x = self.float(name, default)?;
        if x > 0.0 {
            Ok(x)
        } else {
            Err(Error::domain(format!("hyperparameter {name} must be positive, got {x}")))
        }
    }

    fn count(&self, name: &str, default: usize) -> Result<usize> {
        match self.0.get(name) {
            None => Ok(default),
            Some(v) => v.as_usize().filter(|n| *n > 0).ok_or_else(|| Self::bad(name, v, "a positive integer")),
        }
    }

    fn depth(&self, name: &str) -> Result<Option<usize>> {
        match self.0.get(name) {
            None => Ok(None),
            Some(v) if v.is_unlimited() => Ok(None),
            Some(v) => v
                .as_usize()
                .filter(|n| *n > 0)
                .map(Some)
                .ok_or_else(|| Self::bad(name, v, "a positive integer or \"none\"")),
        }
    }

    fn max_features(&self, default: MaxFeatures) -> Result<MaxFeatures> {
        match self.0.get("max_features") {
            None => Ok(default),
            Some(ParamValue::Text(s)) if s == "sqrt" => Ok(MaxFeatures::Sqrt),
            Some(ParamValue::Text(s)) if s == "all" => Ok(MaxFeatures::All),
            Some(v) => v
                .as_usize()
                .filter(|n| *n > 0)
                .map(MaxFeatures::Count)
                .ok_or_else(|| Self::bad("max_features", v, "\"sqrt\", \"all\" or a positive integer")),
        }
    }
}

impl ModelSpec {
    /// Validates the hyperparameters; unknown names are rejected.
    pub fn new(algorithm: Algorithm, hyperparameters: BTreeMap<String, ParamValue>, seed: u64) -> Result<Self> {
        let spec = ModelSpec {
            algorithm,
            hyperparameters,
            seed,
        };
        spec.resolve()?;
        Ok(spec)
    }

    pub fn default_for(algorithm: Algorithm, seed: u64) -> Self {
        ModelSpec {
            algorithm,
            hyperparameters: BTreeMap::new(),
            seed,
        }
    }

    pub fn with(mut self, name: &str, value: impl Into<ParamValue>) -> Result<Self> {
        self.hyperparameters.insert(name.to_string(), value.into());
        self.resolve()?;
        Ok(self)
    }

    pub fn resolve(&self) -> Result<Resolved> {
        let allowed = self.algorithm.allowed();
        if let Some(k) = self.hyperparameters.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::domain(format!(
                "unknown hyperparameter `{k}` for {} (allowed: {})",
                self.algorithm,
                allowed.join(", ")
            )));
        }
        let p = Lookup(&self.hyperparameters);
        Ok(match self.algorithm {
            Algorithm::Linear => Resolved::Linear {
                ridge: p.float("ridge", linear::DEFAULT_RIDGE)?,
            },
            Algorithm::SvrRbf => {
                let d = SvrParams::default();
                let gamma = match self.hyperparameters.get("gamma") {
                    None => None,
                    Some(ParamValue::Text(s)) if s == "scale" => None,
                    Some(_) => Some(p.positive("gamma", 1.0)?),
                };
                Resolved::Svr(SvrParams {
                    c: p.positive("c", d.c)?,
                    epsilon: p.float("epsilon", d.epsilon)?.max(0.0),
                    gamma,
                    tol: p.positive("tol", d.tol)?,
                    max_iter: p.count("max_iter", d.max_iter)?,
                })
            }
            Algorithm::FeedForward => {
                let d = MlpParams::default();
                let activation = match self.hyperparameters.get("activation") {
                    None => d.activation,
                    Some(ParamValue::Text(s)) => s.parse().map_err(Error::Domain)?,
                    Some(v) => return Err(Lookup::bad("activation", v, "relu or tanh")),
                };
                Resolved::Mlp(MlpParams {
                    hidden: p.count("hidden", d.hidden)?,
                    activation,
                    learning_rate: p.positive("learning_rate", d.learning_rate)?,
                    epochs: p.count("epochs", d.epochs)?,
                    batch_size: p.count("batch_size", d.batch_size)?,
                    alpha: p.float("alpha", d.alpha)?.max(0.0),
                    tol: p.float("tol", d.tol)?.max(0.0),
                    n_iter_no_change: p.count("n_iter_no_change", d.n_iter_no_change)?,
                    ..d
                })
            }
            Algorithm::DecisionTree => Resolved::Tree(TreeParams {
                max_depth: p.depth("max_depth")?,
                min_samples_split: p.count("min_samples_split", 2)?.max(2),
                max_features: p.max_features(MaxFeatures::All)?,
            }),
            Algorithm::RandomForest => Resolved::Forest(ForestParams {
                n_estimators: p.count("n_estimators", forest::DEFAULT_TREES)?,
                tree: TreeParams {
                    max_depth: p.depth("max_depth")?,
                    min_samples_split: p.count("min_samples_split", 2)?.max(2),
                    max_features: p.max_features(MaxFeatures::Sqrt)?,
                },
            }),
        })
    }

    /// `algorithm(k=v, ...)`, used in logs and reports.
    pub fn describe(&self) -> String {
        let kv: Vec<String> = self.hyperparameters.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("{}({})", self.algorithm, kv.join(", "))
    }
}

/// Learned parameters, one variant per algorithm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Fitted {
    Linear(LinearModel),
    Svr(Svr),
    Mlp(Mlp),
    Tree(Tree),
    Forest(Forest),
}

impl Fitted {
    pub fn predict_row(&self, x: &[f64]) -> f64 {
        match self {
            Fitted::Linear(m) => m.predict(x),
            Fitted::Svr(m) => m.predict(x),
            Fitted::Mlp(m) => m.predict(x),
            Fitted::Tree(m) => m.predict(x),
            Fitted::Forest(m) => m.predict(x),
        }
    }
}

/// A trained regressor bound to the feature names it was trained on.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionModel {
    pub spec: ModelSpec,
    pub feature_names: Vec<String>,
    pub fitted: Fitted,
}

fn check_training_data(names: &[String], x: &[Vec<f64>], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::contract(format!("{} rows but {} targets", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(Error::domain("training needs at least 2 samples"));
    }
    for (i, r) in x.iter().enumerate() {
        if r.len() != names.len() {
            return Err(Error::contract(format!("row {i} has {} values for {} features", r.len(), names.len())));
        }
        if let Some(j) = r.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!("row {i} feature {} is not finite", names[j])));
        }
    }
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::domain(format!("target {i} is not finite")));
    }
    Ok(())
}

/// Fit `spec` on standardized rows `x` with normalized targets `y`.
pub fn train(spec: &ModelSpec, names: &[String], x: &[Vec<f64>], y: &[f64]) -> Result<RegressionModel> {
    check_training_data(names, x, y)?;
    let fitted = match spec.resolve()? {
        Resolved::Linear { ridge } => Fitted::Linear(LinearModel::fit(x, y, ridge)?),
        Resolved::Svr(p) => Fitted::Svr(Svr::fit(x, y, &p)?),
        Resolved::Mlp(p) => Fitted::Mlp(Mlp::fit(x, y, &p, spec.seed)?),
        Resolved::Tree(p) => Fitted::Tree(Tree::fit(x, y, &p, spec.seed)),
        Resolved::Forest(p) => Fitted::Forest(Forest::fit(x, y, &p, spec.seed)),
    };
    Ok(RegressionModel {
        spec: spec.clone(),
        feature_names: names.to_vec(),
        fitted,
    })
}

const MODEL_MAGIC: &[u8; 8] = b"BGNMODEL";
const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelHeader {
    spec: ModelSpec,
    feature_names: Vec<String>,
}

impl RegressionModel {
    fn check_names(&self, names: &[String]) -> Result<()> {
        if names == self.feature_names.as_slice() {
            return Ok(());
        }
        let i = names
            .iter()
            .zip(&self.feature_names)
            .position(|(a, b)| a != b)
            .unwrap_or(names.len().min(self.feature_names.len()));
        let got = names.get(i).map_or("<end>", String::as_str);
        let want = self.feature_names.get(i).map_or("<end>", String::as_str);
        Err(Error::contract(format!(
            "feature names diverge at position {i}: got `{got}`, model expects `{want}`"
        )))
    }

    pub fn predict_row(&self, x: &[f64]) -> f64 {
        self.fitted.predict_row(x)
    }

    /// Predict rows whose columns are named `names`.
    pub fn predict(&self, names: &[String], rows: &[Vec<f64>]) -> Result<Vec<f64>> {
        self.check_names(names)?;
        Ok(rows.iter().map(|r| self.fitted.predict_row(r)).collect())
    }

    pub fn predict_vector(&self, v: &FeatureVector) -> Result<f64> {
        self.check_names(&v.names)?;
        Ok(self.fitted.predict_row(&v.values))
    }

    /// Versioned container: magic, u32 version, u64 header length, JSON
    /// header (spec and feature names), then the bincode parameter payload.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let header = serde_json::to_vec(&ModelHeader {
            spec: self.spec.clone(),
            feature_names: self.feature_names.clone(),
        })?;
        let payload = bincode::serialize(&self.fitted).map_err(|e| Error::Format(e.to_string()))?;
        w.write_all(MODEL_MAGIC)?;
        w.write_all(&MODEL_VERSION.to_le_bytes())?;
        w.write_all(&(header.len() as u64).to_le_bytes())?;
        w.write_all(&header)?;
        w.write_all(&payload)?;
        Ok(())
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        Ok(buf)
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MODEL_MAGIC {
            return Err(Error::Format("not a model file (bad magic)".into()));
        }
        let mut v = [0u8; 4];
        r.read_exact(&mut v)?;
        let version = u32::from_le_bytes(v);
        if version != MODEL_VERSION {
            return Err(Error::Format(format!("unsupported model version {version}")));
        }
        let mut l = [0u8; 8];
        r.read_exact(&mut l)?;
        let mut header = vec![0u8; u64::from_le_bytes(l) as usize];
        r.read_exact(&mut header)?;
        let header: ModelHeader = serde_json::from_slice(&header)?;
        let mut payload = Vec::new();
        r.read_to_end(&mut payload)?;
        let fitted: Fitted = bincode::deserialize(&payload).map_err(|e| Error::Format(e.to_string()))?;
        Ok(RegressionModel {
            spec: header.spec,
            feature_names: header.feature_names,
            fitted,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_from(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}
