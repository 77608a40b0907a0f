mod common;

use bargain::corpus::{write_corpus, CorpusStore, Split, Stage};
use bargain::eval::{
    ablate, accuracy_within, fit_experiment, mae, run_experiment, AblationPlan, Baseline, FeatureCache,
    FeatureGroup,
};
use bargain::features::{Extractor, FeatureSet, LexiconSet, RuleTagger};
use bargain::fixtures::mini_corpus;
use common::{assert_golden, mini_config, rf_entry};

#[test]
fn mini_corpus_file_is_current() {
    let mut buf = Vec::new();
    write_corpus(&mini_corpus(), &mut buf).unwrap();
    assert_golden("mini_corpus.jsonl", &buf);
}

#[test]
fn golden_report_on_mini_corpus() {
    let lex = LexiconSet::bundled();
    let ex = Extractor::new(&lex, &RuleTagger);
    let run = |_: ()| {
        let out = run_experiment(mini_corpus(), &ex, &mini_config()).unwrap();
        let mut csv = Vec::new();
        out.evaluation.table.write_csv(&mut csv).unwrap();
        csv
    };
    let a = run(());
    assert_eq!(a, run(()), "two identical runs differ");
    assert_golden("mini_report.csv", &a);
}

/// The baseline rows recomputed directly from the corpus.
#[test]
fn baseline_rows_by_hand() {
    let corpus = mini_corpus();
    let lex = LexiconSet::bundled();
    let ex = Extractor::new(&lex, &RuleTagger);
    let mut cfg = mini_config();
    cfg.models.clear();
    let out = run_experiment(corpus.clone(), &ex, &cfg).unwrap();
    let train: Vec<_> = corpus.iter().filter(|d| d.split == Split::Train).collect();
    let test: Vec<_> = corpus.iter().filter(|d| d.split == Split::Test).collect();
    let agreed: Vec<f64> = test.iter().map(|d| d.agreed_price.unwrap()).collect();
    let aap = train.iter().map(|d| d.agreed_price.unwrap()).sum::<f64>() / train.len() as f64;
    let aapn = train
        .iter()
        .map(|d| d.agreed_price.unwrap() / d.scenario.listing_price)
        .sum::<f64>()
        / train.len() as f64;
    let expected = [
        (Baseline::Aap, test.iter().map(|_| aap).collect::<Vec<_>>()),
        (Baseline::AapN, test.iter().map(|d| aapn * d.scenario.listing_price).collect()),
        (Baseline::Listing, test.iter().map(|d| d.scenario.listing_price).collect()),
        (Baseline::Target, test.iter().map(|d| d.scenario.target_price).collect()),
    ];
    for (b, p) in expected {
        let r = out.evaluation.table.get(b.label()).unwrap();
        let acc = accuracy_within(&p, &agreed, 10.0).unwrap();
        let err = mae(&p, &agreed).unwrap();
        // input-independent: identical at every fraction
        assert!(r.accuracy.iter().all(|a| *a == acc), "{b}");
        assert!(r.mae.iter().all(|m| (m - err).abs() < 1e-9), "{b}");
    }
}

#[test]
fn ablation_identities() {
    let lex = LexiconSet::bundled();
    let ex = Extractor::new(&lex, &RuleTagger);
    let mut base = mini_config();
    base.baselines.clear();
    base.models = vec![common::single(
        "RF",
        bargain::models::ModelSpec::default_for(bargain::models::Algorithm::RandomForest, 3)
            .with("n_estimators", 10i64)
            .unwrap(),
        FeatureSet::TsfLf,
    )];
    let table = |o: bargain::eval::ExperimentOutcome| o.evaluation.table.reports[0].clone();

    let plain = table(run_experiment(mini_corpus(), &ex, &base).unwrap());
    let nothing = table(ablate(&AblationPlan::default(), mini_corpus(), &ex, &base).unwrap());
    assert_eq!(plain, nothing);

    let all = AblationPlan {
        remove: FeatureGroup::ALL.to_vec(),
    };
    let stripped = table(ablate(&all, mini_corpus(), &ex, &base).unwrap());
    let mut tsf = base.clone();
    tsf.models[0].features = FeatureSet::Tsf;
    let tsf = table(run_experiment(mini_corpus(), &ex, &tsf).unwrap());
    assert_eq!(stripped.accuracy, tsf.accuracy);
    assert_eq!(stripped.mae, tsf.mae);
}

/// Scaler statistics and grid choices must not move when only the test
/// split changes.
#[test]
fn fitting_ignores_test_split() {
    let lex = LexiconSet::bundled();
    let ex = Extractor::new(&lex, &RuleTagger);
    let mut cfg = mini_config();
    cfg.models = vec![rf_entry("RF", FeatureSet::Tsf, 1)];
    // keep the 15-point grid but make each fit small
    cfg.models[0].grid.axes[0].1 = vec![2i64.into(), 3i64.into(), 4i64.into()];

    let fingerprint = |corpus| {
        let store = CorpusStore::new(corpus, Stage::Fit);
        let mut cache = FeatureCache::new(&ex);
        let fitted = fit_experiment(&store, &mut cache, &cfg).unwrap();
        assert!(!store.reads().contains(&Split::Test));
        fitted.entries[0]
            .fractions
            .iter()
            .map(|f| (serde_json::to_string(&f.scaler).unwrap(), f.search.best.describe()))
            .collect::<Vec<_>>()
    };
    let clean = fingerprint(mini_corpus());
    let mut perturbed = mini_corpus();
    for d in perturbed.iter_mut().filter(|d| d.split == Split::Test) {
        d.scenario.listing_price *= 3.0;
        d.scenario.target_price *= 0.1;
        d.agreed_price = Some(1.0);
    }
    assert_eq!(clean, fingerprint(perturbed));
}

#[test]
fn fit_store_rejected_for_scoring() {
    let lex = LexiconSet::bundled();
    let ex = Extractor::new(&lex, &RuleTagger);
    let store = CorpusStore::new(mini_corpus(), Stage::Fit);
    let mut cache = FeatureCache::new(&ex);
    let fitted = fit_experiment(&store, &mut cache, &mini_config()).unwrap();
    assert!(fitted.evaluate(&store, &mut cache).is_err());
}
