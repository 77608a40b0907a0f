//! Metrics, baselines, per-fraction experiments and ablations.

pub mod ablation;
pub mod baselines;
pub mod experiment;
pub mod metrics;
pub mod report;

pub use ablation::{ablate, single_removals, AblationPlan, FeatureGroup};
pub use baselines::{Baseline, BaselineModel};
pub use experiment::{
    fit_experiment, run_experiment, Evaluation, ExperimentConfig, ExperimentOutcome, FeatureCache,
    FittedExperiment, ModelEntry, TestPrediction, DEFAULT_K,
};
pub use metrics::{accuracy_within, mae};
pub use report::{EvalReport, ReportTable};
