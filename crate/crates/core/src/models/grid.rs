//! Hyperparameter search scored on a validation split.

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{train, Algorithm, ModelSpec, ParamValue, RegressionModel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Technique {
    Exhaustive,
    /// `trials` distinct points sampled with `seed`; all points (in grid
    /// order) when the grid is no larger than `trials`.
    Randomized { trials: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub algorithm: Algorithm,
    /// Axes enumerated with the first axis varying slowest.
    pub axes: Vec<(String, Vec<ParamValue>)>,
    pub technique: Technique,
    pub seed: u64,
}

impl Grid {
    pub fn single(spec: &ModelSpec) -> Self {
        Grid {
            algorithm: spec.algorithm,
            axes: spec.hyperparameters.iter().map(|(k, v)| (k.clone(), vec![v.clone()])).collect(),
            technique: Technique::Exhaustive,
            seed: spec.seed,
        }
    }

    /// The search used for each algorithm in the benchmark: the forest gets
    /// estimators (50, 100, 200) × depth (10, 50, 100, 500, no limit); the
    /// others run at their defaults.
    pub fn standard(algorithm: Algorithm, seed: u64) -> Self {
        let axes = match algorithm {
            Algorithm::RandomForest => vec![
                (
                    "n_estimators".to_string(),
                    [50i64, 100, 200].map(ParamValue::Int).to_vec(),
                ),
                (
                    "max_depth".to_string(),
                    vec![
                        ParamValue::Int(10),
                        ParamValue::Int(50),
                        ParamValue::Int(100),
                        ParamValue::Int(500),
                        ParamValue::Text("none".into()),
                    ],
                ),
            ],
            _ => Vec::new(),
        };
        Grid {
            algorithm,
            axes,
            technique: Technique::Exhaustive,
            seed,
        }
    }

    pub fn size(&self) -> usize {
        self.axes.iter().map(|(_, v)| v.len()).product()
    }

    /// Every grid point as a validated spec, in enumeration order.
    pub fn points(&self) -> Result<Vec<ModelSpec>> {
        if self.axes.iter().any(|(_, v)| v.is_empty()) {
            return Err(Error::domain("grid has an empty axis"));
        }
        let total = self.size();
        let mut out = Vec::with_capacity(total);
        for mut k in 0..total {
            let mut hp = BTreeMap::new();
            let mut place = vec![0; self.axes.len()];
            for (a, (_, vals)) in self.axes.iter().enumerate().rev() {
                place[a] = k % vals.len();
                k /= vals.len();
            }
            for (a, (name, vals)) in self.axes.iter().enumerate() {
                hp.insert(name.clone(), vals[place[a]].clone());
            }
            out.push(ModelSpec::new(self.algorithm, hp, self.seed)?);
        }
        Ok(out)
    }

    fn selected(&self) -> Result<Vec<ModelSpec>> {
        let pts = self.points()?;
        match self.technique {
            Technique::Exhaustive => Ok(pts),
            Technique::Randomized { trials, seed } => {
                if trials == 0 {
                    return Err(Error::domain("randomized search with zero trials"));
                }
                if trials >= pts.len() {
                    return Ok(pts);
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut pick = sample(&mut rng, pts.len(), trials).into_vec();
                pick.sort_unstable();
                Ok(pick.into_iter().map(|i| pts[i].clone()).collect())
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct GridResult {
    pub best: ModelSpec,
    pub best_score: f64,
    pub model: RegressionModel,
    /// Every evaluated spec with its validation score, in evaluation order.
    pub trials: Vec<(ModelSpec, f64)>,
}

/// Fit every selected point on train, score on validation with `metric`
/// (higher is better) and keep the first best.
pub fn grid_search(
    grid: &Grid,
    names: &[String],
    train_x: &[Vec<f64>],
    train_y: &[f64],
    val_x: &[Vec<f64>],
    val_y: &[f64],
    metric: &dyn Fn(&[f64], &[f64]) -> f64,
) -> Result<GridResult> {
    let specs = grid.selected()?;
    let mut best: Option<(ModelSpec, f64, RegressionModel)> = None;
    let mut trials = Vec::with_capacity(specs.len());
    for spec in specs {
        let model = train(&spec, names, train_x, train_y)?;
        let pred = model.predict(names, val_x)?;
        let score = metric(&pred, val_y);
        log::debug!("grid {} -> {score}", spec.describe());
        trials.push((spec.clone(), score));
        if best.as_ref().is_none_or(|(_, s, _)| score > *s) {
            best = Some((spec, score, model));
        }
    }
    let (best, best_score, model) = best.ok_or_else(|| Error::domain("empty grid"))?;
    Ok(GridResult {
        best,
        best_score,
        model,
        trials,
    })
}
