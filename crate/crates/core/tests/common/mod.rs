#![allow(dead_code)]

use std::path::{Path, PathBuf};

use bargain::corpus::Fraction;
use bargain::eval::{ExperimentConfig, ModelEntry};
use bargain::features::FeatureSet;
use bargain::models::{Algorithm, Grid, ModelSpec};

pub fn fixture_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// Compare `actual` with a committed file; rewrite it instead when
/// `BARGAIN_BLESS=1`.
pub fn assert_golden(name: &str, actual: &[u8]) {
    let path = fixture_path(name);
    if std::env::var("BARGAIN_BLESS").as_deref() == Ok("1") {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert!(
        expected == actual,
        "{name} differs from the committed golden file:\n--- expected\n{}\n--- actual\n{}",
        String::from_utf8_lossy(&expected),
        String::from_utf8_lossy(actual)
    );
}

pub fn rf_entry(name: &str, features: FeatureSet, seed: u64) -> ModelEntry {
    ModelEntry {
        name: name.into(),
        grid: Grid::standard(Algorithm::RandomForest, seed),
        features,
        drop_prefixes: Vec::new(),
    }
}

pub fn single(name: &str, spec: ModelSpec, features: FeatureSet) -> ModelEntry {
    ModelEntry {
        name: name.into(),
        grid: Grid::single(&spec),
        features,
        drop_prefixes: Vec::new(),
    }
}

pub fn mini_config() -> ExperimentConfig {
    let small_rf = ModelSpec::default_for(Algorithm::RandomForest, 7)
        .with("n_estimators", 20i64)
        .unwrap();
    ExperimentConfig {
        fractions: Fraction::GRID.to_vec(),
        models: vec![
            single("LR: TSF", ModelSpec::default_for(Algorithm::Linear, 0), FeatureSet::Tsf),
            single("RF: TSF", small_rf.clone(), FeatureSet::Tsf),
            single("RF: TSF+LF", small_rf, FeatureSet::TsfLf),
        ],
        ..ExperimentConfig::default()
    }
}

pub mod synth {
    use std::sync::Arc;

    use bargain::corpus::Fraction;
    use bargain::features::FeatureMatrix;
    use bargain::probing::{ReprStage, RepresentationSet};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    pub fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("dlg-{i:04}")).collect()
    }

    pub fn noise(n: usize, width: usize, seed: u64, stage: ReprStage) -> RepresentationSet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..n * width).map(|_| rng.sample::<f32, _>(StandardNormal)).collect();
        RepresentationSet::new(ids(n), width, stage, Fraction::FULL, data).unwrap()
    }

    /// Fixed weights for the planted linear code.
    pub fn weights(width: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        (0..width).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    pub fn linear_feature(reps: &RepresentationSet, w: &[f64]) -> Vec<f64> {
        (0..reps.len())
            .map(|i| reps.row(i).iter().zip(w).map(|(x, w)| *x as f64 * w).sum())
            .collect()
    }

    /// Features: the planted one plus several unrelated noise columns.
    pub fn table(planted_name: &str, planted: &[f64], others: &[&str], seed: u64) -> FeatureMatrix {
        let n = planted.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut names = vec![planted_name.to_string()];
        names.extend(others.iter().map(|s| s.to_string()));
        let rows = (0..n)
            .map(|i| {
                let mut r = vec![planted[i]];
                r.extend(others.iter().map(|_| rng.gen_range(0.0..1.0)));
                r
            })
            .collect();
        FeatureMatrix {
            names: Arc::new(names),
            ids: ids(n),
            rows,
            targets: vec![f64::NAN; n],
            listings: vec![1.0; n],
            warnings: Vec::new(),
        }
    }
}
