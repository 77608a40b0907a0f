//! Combiner over per-fraction encoder predictions: a one-hidden-layer MLP
//! searched over hidden size and activation, with a passthrough fallback.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::predictions::PredictionMatrix;
use crate::error::{Error, Result};
use crate::eval::{accuracy_within, mae, DEFAULT_K};
use crate::features::StandardScaler;
use crate::models::{Activation, Mlp, MlpParams};

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    pub hidden_sizes: Vec<usize>,
    pub activations: Vec<Activation>,
    pub trials: usize,
    pub seed: u64,
    pub k: f64,
    pub mlp: MlpParams,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig {
            hidden_sizes: vec![50, 100, 200],
            activations: vec![Activation::Relu, Activation::Tanh],
            trials: 10,
            seed: 0,
            k: DEFAULT_K,
            mlp: MlpParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EnsembleModel {
    Mlp { scaler: StandardScaler, net: Mlp },
    /// Use column `column` (the newest fraction) unchanged.
    Passthrough { column: usize },
}

impl EnsembleModel {
    pub fn predict(&self, row: &[f64]) -> f64 {
        match self {
            EnsembleModel::Mlp { scaler, net } => net.predict(&scaler.transform_row(row)),
            EnsembleModel::Passthrough { column } => row[*column],
        }
    }

    pub fn predict_matrix(&self, m: &PredictionMatrix) -> Vec<f64> {
        m.rows.iter().map(|r| self.predict(r)).collect()
    }

    pub fn describe(&self) -> String {
        match self {
            EnsembleModel::Mlp { net, .. } => format!("mlp(hidden={}, activation={})", net.hidden, net.activation.as_str()),
            EnsembleModel::Passthrough { column } => format!("passthrough(column={column})"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EnsembleOutcome {
    pub model: EnsembleModel,
    pub validation_accuracy: f64,
    pub validation_mae: f64,
    pub passthrough_accuracy: f64,
    /// (hidden, activation, validation accuracy) per trial.
    pub trials: Vec<(usize, Activation, f64)>,
}

fn check(m: &PredictionMatrix, y: &[f64], what: &str) -> Result<()> {
    if m.rows.len() != y.len() {
        return Err(Error::contract(format!(
            "{what}: {} prediction rows but {} targets",
            m.rows.len(),
            y.len()
        )));
    }
    if m.rows.is_empty() {
        return Err(Error::domain(format!("{what}: no rows")));
    }
    Ok(())
}

/// Fit on `train`, choose on `val` by Accuracy±k; falls back to passing the
/// newest column through when no trial does at least as well on validation.
pub fn ensemble_train(
    train: &PredictionMatrix,
    train_y: &[f64],
    val: &PredictionMatrix,
    val_y: &[f64],
    cfg: &EnsembleConfig,
) -> Result<EnsembleOutcome> {
    check(train, train_y, "train")?;
    check(val, val_y, "validation")?;
    if train.fractions != val.fractions {
        return Err(Error::contract("train and validation matrices have different fraction columns"));
    }
    let names: Vec<String> = train.fractions.iter().map(|f| f.to_string()).collect();
    let scaler = StandardScaler::fit(&names, &train.rows)?;
    let xs = scaler.transform(&train.rows);

    let mut points = Vec::new();
    for &h in &cfg.hidden_sizes {
        for &a in &cfg.activations {
            points.push((h, a));
        }
    }
    if points.is_empty() {
        return Err(Error::domain("empty ensemble grid"));
    }
    if cfg.trials < points.len() {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut pick = sample(&mut rng, points.len(), cfg.trials.max(1)).into_vec();
        pick.sort_unstable();
        points = pick.into_iter().map(|i| points[i]).collect();
    }

    let newest = train.width() - 1;
    let passthrough = EnsembleModel::Passthrough { column: newest };
    let pass_pred = passthrough.predict_matrix(val);
    let pass_acc = accuracy_within(&pass_pred, val_y, cfg.k)?;

    let mut trials = Vec::new();
    let mut best: Option<(EnsembleModel, f64)> = None;
    for (t, (hidden, activation)) in points.into_iter().enumerate() {
        let params = MlpParams {
            hidden,
            activation,
            ..cfg.mlp.clone()
        };
        let net = Mlp::fit(&xs, train_y, &params, cfg.seed.wrapping_add(t as u64))?;
        let model = EnsembleModel::Mlp {
            scaler: scaler.clone(),
            net,
        };
        let acc = accuracy_within(&model.predict_matrix(val), val_y, cfg.k)?;
        trials.push((hidden, activation, acc));
        if best.as_ref().is_none_or(|(_, b)| acc > *b) {
            best = Some((model, acc));
        }
    }
    let (model, acc) = match best {
        Some((m, a)) if a >= pass_acc => (m, a),
        _ => (passthrough, pass_acc),
    };
    let validation_mae = mae(&model.predict_matrix(val), val_y)?;
    Ok(EnsembleOutcome {
        model,
        validation_accuracy: acc,
        validation_mae,
        passthrough_accuracy: pass_acc,
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Fraction;
    use rand::Rng;

    fn matrix(cols: Vec<Vec<f64>>) -> PredictionMatrix {
        let n = cols[0].len();
        PredictionMatrix {
            ids: (0..n).map(|i| i.to_string()).collect(),
            fractions: Fraction::GRID[..cols.len()].to_vec(),
            rows: (0..n).map(|i| cols.iter().map(|c| c[i]).collect()).collect(),
        }
    }

    fn targets(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.gen_range(0.4..1.0)).collect()
    }

    fn quick() -> EnsembleConfig {
        EnsembleConfig {
            hidden_sizes: vec![50],
            activations: vec![Activation::Relu, Activation::Tanh],
            ..EnsembleConfig::default()
        }
    }

    #[test]
    fn identity_column_passes_through() {
        let (ty, vy) = (targets(100, 1), targets(40, 2));
        let out = ensemble_train(&matrix(vec![ty.clone()]), &ty, &matrix(vec![vy.clone()]), &vy, &quick()).unwrap();
        assert!(out.validation_accuracy >= out.passthrough_accuracy);
        assert!(out.validation_mae < 0.02, "{}", out.validation_mae);
    }

    #[test]
    fn ignores_noise_column() {
        let (ty, vy) = (targets(300, 3), targets(100, 4));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut noise = |n: usize| (0..n).map(|_| rng.gen_range(0.4..1.0)).collect::<Vec<f64>>();
        let train = matrix(vec![noise(300), ty.clone()]);
        let val = matrix(vec![noise(100), vy.clone()]);
        let out = ensemble_train(&train, &ty, &val, &vy, &quick()).unwrap();
        let col1 = mae(&val.column(0), &vy).unwrap();
        assert!(out.validation_mae < col1, "{} vs {col1}", out.validation_mae);
        assert!(out.validation_accuracy >= out.passthrough_accuracy);
    }

    #[test]
    fn misaligned_rows_rejected() {
        let ty = targets(10, 1);
        let m = matrix(vec![ty.clone()]);
        assert!(matches!(
            ensemble_train(&m, &ty[..5], &m, &ty, &quick()),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn full_grid_when_trials_exceed_points() {
        let ty = targets(60, 1);
        let m = matrix(vec![ty.clone()]);
        let cfg = EnsembleConfig {
            mlp: MlpParams {
                epochs: 3,
                ..MlpParams::default()
            },
            ..EnsembleConfig::default()
        };
        let out = ensemble_train(&m, &ty, &m, &ty, &cfg).unwrap();
        assert_eq!(out.trials.len(), 6);
    }
}
