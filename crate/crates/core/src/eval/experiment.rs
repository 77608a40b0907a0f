//! Per-fraction training and test evaluation.
//!
//! Fitting (scaler statistics, grid selection, baseline statistics) reads
//! only the train and validation splits through a `Stage::Fit` store;
//! scoring happens afterwards through a `Stage::Evaluate` store.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::baselines::{Baseline, BaselineModel};
use super::metrics::{accuracy_within, mae};
use super::report::{EvalReport, ReportTable};
use crate::corpus::{truncate, CorpusStore, Dialogue, Fraction, Split, Stage};
use crate::error::{Error, Result, ResultExt};
use crate::features::{Extractor, FeatureMatrix, FeatureSet, StandardScaler};
use crate::models::{grid_search, Grid, GridResult};

pub const DEFAULT_K: f64 = 10.0;

/// One model row of the experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelEntry {
    pub name: String,
    pub grid: Grid,
    pub features: FeatureSet,
    /// Feature families (name prefixes) removed before scaling.
    pub drop_prefixes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub fractions: Vec<Fraction>,
    pub baselines: Vec<Baseline>,
    pub models: Vec<ModelEntry>,
    pub k: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            fractions: Fraction::GRID.to_vec(),
            baselines: Baseline::ALL.to_vec(),
            models: Vec::new(),
            k: DEFAULT_K,
        }
    }
}

/// Extracted matrices keyed by fraction, feature set and split.
pub struct FeatureCache<'a> {
    extractor: &'a Extractor<'a>,
    map: HashMap<(Fraction, FeatureSet, Split), FeatureMatrix>,
}

impl<'a> FeatureCache<'a> {
    pub fn new(extractor: &'a Extractor<'a>) -> Self {
        FeatureCache {
            extractor,
            map: HashMap::new(),
        }
    }

    pub fn matrix(
        &mut self,
        store: &CorpusStore,
        split: Split,
        fraction: Fraction,
        set: FeatureSet,
    ) -> Result<&FeatureMatrix> {
        let key = (fraction, set, split);
        if !self.map.contains_key(&key) {
            let dialogues = store.split(split)?;
            let partials = dialogues
                .iter()
                .map(|d| truncate(d, fraction).context(format!("dialogue {}", d.id)))
                .collect::<Result<Vec<_>>>()?;
            let m = self.extractor.matrix(&partials, set);
            for w in &m.warnings {
                log::warn!("{w}");
            }
            self.map.insert(key, m);
        }
        Ok(&self.map[&key])
    }
}

fn prepared(m: &FeatureMatrix, entry: &ModelEntry) -> FeatureMatrix {
    let drop: Vec<&str> = entry.drop_prefixes.iter().map(String::as_str).collect();
    if drop.is_empty() {
        m.clone()
    } else {
        m.drop_prefixes(&drop)
    }
}

fn require_targets(m: &FeatureMatrix, split: Split) -> Result<()> {
    if m.is_empty() {
        return Err(Error::domain(format!("{split} split is empty")));
    }
    if let Some(i) = m.targets.iter().position(|t| !t.is_finite()) {
        return Err(Error::domain(format!(
            "dialogue {} in {split} has no agreed price; preprocess the corpus first",
            m.ids[i]
        )));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct FittedFraction {
    pub fraction: Fraction,
    pub scaler: StandardScaler,
    pub search: GridResult,
}

#[derive(Debug, Clone)]
pub struct FittedEntry {
    pub entry: ModelEntry,
    pub fractions: Vec<FittedFraction>,
}

#[derive(Debug, Clone)]
pub struct FittedExperiment {
    pub config: ExperimentConfig,
    pub baselines: Vec<BaselineModel>,
    pub entries: Vec<FittedEntry>,
}

/// Fit baselines and, for every model row and fraction: scaler on train,
/// grid search scored on validation.
pub fn fit_experiment(store: &CorpusStore, cache: &mut FeatureCache, config: &ExperimentConfig) -> Result<FittedExperiment> {
    if store.stage() != Stage::Fit {
        return Err(Error::contract("fitting requires a Stage::Fit corpus store"));
    }
    let train: Vec<&Dialogue> = store.split(Split::Train)?;
    let baselines = config
        .baselines
        .iter()
        .map(|b| BaselineModel::fit(*b, &train))
        .collect::<Result<Vec<_>>>()?;
    let k = config.k;
    let metric = move |p: &[f64], t: &[f64]| accuracy_within(p, t, k).unwrap_or(f64::NEG_INFINITY);
    let mut entries = Vec::new();
    for entry in &config.models {
        let mut fitted = Vec::new();
        for &f in &config.fractions {
            let ctx = format!("{} at fraction {f}", entry.name);
            let tr = prepared(cache.matrix(store, Split::Train, f, entry.features)?, entry);
            let va = prepared(cache.matrix(store, Split::Validation, f, entry.features)?, entry);
            require_targets(&tr, Split::Train).context(ctx.clone())?;
            require_targets(&va, Split::Validation).context(ctx.clone())?;
            let scaler = StandardScaler::fit(&tr.names, &tr.rows).context(ctx.clone())?;
            let search = grid_search(
                &entry.grid,
                &tr.names,
                &scaler.transform(&tr.rows),
                &tr.targets,
                &scaler.transform(&va.rows),
                &va.targets,
                &metric,
            )
            .context(ctx.clone())?;
            log::info!(
                "{ctx}: chose {} (validation accuracy {:.2})",
                search.best.describe(),
                search.best_score
            );
            fitted.push(FittedFraction {
                fraction: f,
                scaler,
                search,
            });
        }
        entries.push(FittedEntry {
            entry: entry.clone(),
            fractions: fitted,
        });
    }
    Ok(FittedExperiment {
        config: config.clone(),
        baselines,
        entries,
    })
}

/// One test-set prediction, in currency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestPrediction {
    pub model: String,
    pub fraction: Fraction,
    pub id: String,
    pub predicted: f64,
    pub agreed: f64,
}

pub struct Evaluation {
    pub table: ReportTable,
    pub predictions: Vec<TestPrediction>,
}

fn score(model: &str, k: f64, fractions: &[Fraction], preds: &[(Vec<f64>, Vec<f64>)]) -> Result<EvalReport> {
    let mut accuracy = Vec::new();
    let mut errors = Vec::new();
    for (p, t) in preds {
        accuracy.push(accuracy_within(p, t, k)?);
        errors.push(mae(p, t)?);
    }
    Ok(EvalReport {
        model: model.to_string(),
        k,
        fractions: fractions.to_vec(),
        accuracy,
        mae: errors,
    })
}

impl FittedExperiment {
    /// Score every baseline and model row on the test split. Predictions are
    /// unnormalized by each dialogue's listing price before scoring.
    pub fn evaluate(&self, store: &CorpusStore, cache: &mut FeatureCache) -> Result<Evaluation> {
        if store.stage() != Stage::Evaluate {
            return Err(Error::contract("scoring requires a Stage::Evaluate corpus store"));
        }
        let test = store.split(Split::Test)?;
        if test.is_empty() {
            return Err(Error::domain("test split is empty"));
        }
        if let Some(d) = test.iter().find(|d| d.agreed_price.is_none()) {
            return Err(Error::domain(format!("test dialogue {} has no agreed price", d.id)));
        }
        let agreed: Vec<f64> = test.iter().map(|d| d.agreed_price.unwrap_or(f64::NAN)).collect();
        let k = self.config.k;
        let fr = &self.config.fractions;
        let mut reports = Vec::new();
        let mut predictions = Vec::new();
        for b in &self.baselines {
            let p: Vec<f64> = test.iter().map(|d| b.predict(&d.scenario)).collect();
            for &f in fr {
                for (i, d) in test.iter().enumerate() {
                    predictions.push(TestPrediction {
                        model: b.kind.label().into(),
                        fraction: f,
                        id: d.id.clone(),
                        predicted: p[i],
                        agreed: agreed[i],
                    });
                }
            }
            let per: Vec<_> = fr.iter().map(|_| (p.clone(), agreed.clone())).collect();
            reports.push(score(b.kind.label(), k, fr, &per)?);
        }
        for fe in &self.entries {
            let mut per = Vec::new();
            for ff in &fe.fractions {
                let te = prepared(cache.matrix(store, Split::Test, ff.fraction, fe.entry.features)?, &fe.entry);
                let norm = ff
                    .search
                    .model
                    .predict(&te.names, &ff.scaler.transform(&te.rows))
                    .context(format!("{} at fraction {}", fe.entry.name, ff.fraction))?;
                let p: Vec<f64> = norm.iter().zip(&te.listings).map(|(v, l)| v * l).collect();
                let t: Vec<f64> = te.targets.iter().zip(&te.listings).map(|(v, l)| v * l).collect();
                for i in 0..p.len() {
                    predictions.push(TestPrediction {
                        model: fe.entry.name.clone(),
                        fraction: ff.fraction,
                        id: te.ids[i].clone(),
                        predicted: p[i],
                        agreed: t[i],
                    });
                }
                per.push((p, t));
            }
            reports.push(score(&fe.entry.name, k, fr, &per)?);
        }
        Ok(Evaluation {
            table: ReportTable { reports },
            predictions,
        })
    }
}

pub struct ExperimentOutcome {
    pub fitted: FittedExperiment,
    pub evaluation: Evaluation,
}

/// Fit on train/validation, then score on test.
pub fn run_experiment(dialogues: Vec<Dialogue>, extractor: &Extractor, config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let fit_store = CorpusStore::new(dialogues, Stage::Fit);
    let mut cache = FeatureCache::new(extractor);
    let fitted = fit_experiment(&fit_store, &mut cache, config)?;
    let eval_store = CorpusStore::new(fit_store.into_dialogues(), Stage::Evaluate);
    let evaluation = fitted.evaluate(&eval_store, &mut cache)?;
    Ok(ExperimentOutcome { fitted, evaluation })
}
