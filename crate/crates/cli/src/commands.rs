use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use bargain::bridge::{
    ensemble_train, read_predictions, write_flattened, EnsembleConfig, EnsembleModel, FlattenOptions,
    FlattenedInput, PredictionMatrix,
};
use bargain::corpus::{
    import_cocoa, preprocess_with_audit, read_corpus, truncate, write_audit_csv, write_corpus, CorpusStore,
    Dialogue, Fraction, PartialDialogue, Split, Stage,
};
use bargain::eval::{
    accuracy_within, fit_experiment, mae, AblationPlan, EvalReport, Evaluation, ExperimentConfig, FeatureCache,
    FittedExperiment, ReportTable,
};
use bargain::features::fregression::f_regression;
use bargain::features::{lf_names, Extractor, FeatureMatrix, FeatureSet, LexiconSet, RuleTagger};
use bargain::models::{Fitted, MlpParams};
use bargain::probing::{probe_compare, ProbeConfig, ReprStage, RepresentationSet};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::manifest::Run;

/// File-name form of a model row or feature set: `RF: TSF+LF` → `rf_tsf_lf`.
pub fn slug(name: &str) -> String {
    let mut out = String::new();
    for c in name.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.ends_with('_') {
            out.push('_');
        }
    }
    out.trim_matches('_').to_string()
}

fn fraction_tag(f: Fraction) -> String {
    format!("f{f}")
}

fn set_tag(set: FeatureSet) -> &'static str {
    match set {
        FeatureSet::Tsf => "tsf",
        FeatureSet::TsfLf => "tsf_lf",
    }
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> bargain::Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn json_bytes<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s.into_bytes())
}

fn split_sizes(dialogues: &[Dialogue]) -> Value {
    let mut m = serde_json::Map::new();
    for s in Split::ALL {
        m.insert(s.as_str().into(), json!(dialogues.iter().filter(|d| d.split == s).count()));
    }
    Value::Object(m)
}

fn reads(store: &CorpusStore) -> Vec<&'static str> {
    store.reads().into_iter().map(Split::as_str).collect()
}

/// Shared state for config-driven subcommands.
pub struct Ctx {
    pub cfg: RunConfig,
    pub lexicons: LexiconSet,
}

impl Ctx {
    pub fn new(cfg: RunConfig) -> Result<Self> {
        let lexicons = match &cfg.lexicon_dir {
            Some(dir) => LexiconSet::bundled_with_overrides(dir).with_context(|| format!("lexicons in {}", dir.display()))?,
            None => LexiconSet::bundled(),
        };
        for w in lexicons.warnings() {
            log::warn!("{w}");
        }
        Ok(Ctx { cfg, lexicons })
    }

    fn run(&self, sub: &str) -> Result<Run> {
        let config = serde_json::to_value(&self.cfg)?;
        let mut run = Run::new(sub, &self.cfg.output_dir, PathBuf::from(format!("manifests/{sub}.json")), config)?;
        run.seed("seed", self.cfg.seed);
        run.input(&self.cfg.corpus)?;
        if let Some(dir) = &self.cfg.lexicon_dir {
            let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file())
                .collect();
            files.sort();
            for f in files {
                run.input(&f)?;
            }
        }
        Ok(run)
    }

    fn corpus(&self) -> Result<Vec<Dialogue>> {
        let ds = read_corpus(&self.cfg.corpus).with_context(|| format!("corpus {}", self.cfg.corpus.display()))?;
        log::info!("read {} dialogues from {}", ds.len(), self.cfg.corpus.display());
        Ok(ds)
    }

    fn extractor(&self) -> Extractor<'_> {
        Extractor::new(&self.lexicons, &RuleTagger)
    }
}

fn partials(dialogues: &[&Dialogue], f: Fraction) -> Result<Vec<PartialDialogue>> {
    dialogues
        .iter()
        .map(|d| truncate(d, f).with_context(|| format!("dialogue {}", d.id)))
        .collect()
}

pub struct ImportArgs {
    pub inputs: Vec<(Split, PathBuf)>,
    pub out: PathBuf,
}

fn file_run(sub: &str, out: &Path) -> Result<Run> {
    let root = out.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = out.file_name().context("output path has no file name")?.to_string_lossy();
    Run::new(sub, root, root.join(format!("{name}.manifest.json")), Value::Null)
}

/// Convert CoCoA release files to the corpus format.
pub fn import(args: &ImportArgs) -> Result<PathBuf> {
    if args.inputs.is_empty() {
        bail!("give at least one of --train, --validation, --test");
    }
    let mut run = file_run("import", &args.out)?;
    let mut all = Vec::new();
    let mut rejected = csv::Writer::from_writer(Vec::new());
    rejected.write_record(["split", "error"])?;
    let mut counts = BTreeMap::new();
    for (split, path) in &args.inputs {
        run.input(path)?;
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let (kept, errs) = import_cocoa(&text, *split).with_context(|| format!("importing {}", path.display()))?;
        for e in &errs {
            log::warn!("{split}: {e}");
            rejected.write_record([split.as_str(), &e.to_string()])?;
        }
        counts.insert(split.as_str(), json!({"kept": kept.len(), "rejected": errs.len()}));
        all.extend(kept);
    }
    let mut seen = HashSet::new();
    for d in &all {
        if !seen.insert(d.id.as_str()) {
            bail!("duplicate dialogue id {} across inputs", d.id);
        }
    }
    let bytes = csv_bytes(|b| write_corpus(&all, b))?;
    run.write(&args.out, &bytes)?;
    let rej = args.out.with_extension("rejected.csv");
    let rejected = rejected.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?;
    run.write(&rej, &rejected)?;
    run.details = json!({ "splits": counts });
    run.finish()
}

pub struct PreprocessArgs {
    pub input: PathBuf,
    pub out: PathBuf,
    pub audit: Option<PathBuf>,
}

pub fn preprocess(args: &PreprocessArgs) -> Result<PathBuf> {
    let mut run = file_run("preprocess", &args.out)?;
    run.input(&args.input)?;
    let raw = read_corpus(&args.input).with_context(|| format!("corpus {}", args.input.display()))?;
    let before = split_sizes(&raw);
    // Filtering is a structural pass over every split; nothing is fitted.
    let store = CorpusStore::new(raw, Stage::Preprocess);
    let (kept, dropped) = preprocess_with_audit(store.into_dialogues());
    let mut reasons = BTreeMap::new();
    for d in &dropped {
        *reasons.entry(d.reason.code()).or_insert(0usize) += 1;
    }
    log::info!("kept {} dialogues, dropped {}", kept.len(), dropped.len());
    let bytes = csv_bytes(|b| write_corpus(&kept, b))?;
    run.write(&args.out, &bytes)?;
    if let Some(a) = &args.audit {
        let bytes = csv_bytes(|b| write_audit_csv(&dropped, b))?;
        run.write(a, &bytes)?;
    }
    run.details = json!({
        "input_split_sizes": before,
        "split_sizes": split_sizes(&kept),
        "dropped": reasons,
    });
    run.finish()
}

pub fn extract(ctx: &Ctx) -> Result<PathBuf> {
    let mut run = ctx.run("extract")?;
    let store = CorpusStore::new(ctx.corpus()?, Stage::Export);
    let ex = ctx.extractor();
    let fractions = ctx.cfg.fraction_grid()?;
    let mut files = Vec::new();
    for &set in &ctx.cfg.extract.sets {
        for split in Split::ALL {
            let ds = store.split(split)?;
            for &f in &fractions {
                let m = ex.matrix(&partials(&ds, f)?, set);
                for w in &m.warnings {
                    log::warn!("{w}");
                }
                let rel = PathBuf::from(format!("features/{}/{}_{}.csv", set_tag(set), split, fraction_tag(f)));
                run.write(&rel, &csv_bytes(|b| m.write_csv(b))?)?;
                files.push(json!({"set": set.as_str(), "split": split.as_str(), "fraction": f, "rows": m.len(), "columns": m.width()}));
            }
        }
    }
    run.details = json!({ "split_sizes": split_sizes_of(&store), "files": files });
    run.finish()
}

fn split_sizes_of(store: &CorpusStore) -> Value {
    let mut m = serde_json::Map::new();
    for (s, n) in store.split_sizes() {
        m.insert(s.as_str().into(), json!(n));
    }
    Value::Object(m)
}

fn fit(ctx: &Ctx, config: &ExperimentConfig, dialogues: Vec<Dialogue>) -> Result<(FittedExperiment, CorpusStore, Vec<&'static str>)> {
    let store = CorpusStore::new(dialogues, Stage::Fit);
    let ex = ctx.extractor();
    let mut cache = FeatureCache::new(&ex);
    let fitted = fit_experiment(&store, &mut cache, config)?;
    let r = reads(&store);
    Ok((fitted, store, r))
}

#[derive(Serialize)]
struct Selection<'a> {
    model: &'a str,
    fraction: Fraction,
    algorithm: &'a str,
    hyperparameters: &'a BTreeMap<String, bargain::models::ParamValue>,
    validation_accuracy: f64,
    trials: Vec<Value>,
}

pub fn train(ctx: &Ctx) -> Result<PathBuf> {
    let mut run = ctx.run("train")?;
    let config = ctx.cfg.experiment()?;
    let mut slugs = HashSet::new();
    for m in &config.models {
        if !slugs.insert(slug(&m.name)) {
            bail!("model names `{}` collide after conversion to file names", m.name);
        }
    }
    let (fitted, store, fit_reads) = fit(ctx, &config, ctx.corpus()?)?;
    run.write(Path::new("train/baselines.json"), &json_bytes(&fitted.baselines)?)?;
    let mut selection = Vec::new();
    for fe in &fitted.entries {
        let dir = PathBuf::from("train/models").join(slug(&fe.entry.name));
        for ff in &fe.fractions {
            let tag = fraction_tag(ff.fraction);
            let model = &ff.search.model;
            run.write(&dir.join(format!("{tag}.model")), &model.to_bytes()?)?;
            run.write(&dir.join(format!("{tag}.scaler.json")), &json_bytes(&ff.scaler)?)?;
            if let Fitted::Mlp(net) = &model.fitted {
                let mut buf = Vec::new();
                net.write_log_csv(&mut buf)?;
                run.write(&dir.join(format!("{tag}.loss.csv")), &buf)?;
            }
            selection.push(Selection {
                model: &fe.entry.name,
                fraction: ff.fraction,
                algorithm: ff.search.best.algorithm.as_str(),
                hyperparameters: &ff.search.best.hyperparameters,
                validation_accuracy: ff.search.best_score,
                trials: ff
                    .search
                    .trials
                    .iter()
                    .map(|(s, score)| json!({"hyperparameters": s.hyperparameters, "validation_accuracy": score}))
                    .collect(),
            });
        }
    }
    run.write(Path::new("train/selection.json"), &json_bytes(&selection)?)?;
    run.details = json!({ "split_sizes": split_sizes_of(&store), "splits_read": fit_reads });
    run.finish()
}

/// Fit on a Fit-stage store, then score on an Evaluate-stage store opened
/// over the same dialogues.
fn fit_and_score(ctx: &Ctx, config: &ExperimentConfig) -> Result<(Evaluation, Value)> {
    let (fitted, store, fit_reads) = fit(ctx, config, ctx.corpus()?)?;
    let eval_store = CorpusStore::new(store.into_dialogues(), Stage::Evaluate);
    let ex = ctx.extractor();
    let mut cache = FeatureCache::new(&ex);
    let evaluation = fitted.evaluate(&eval_store, &mut cache)?;
    let details = json!({
        "split_sizes": split_sizes_of(&eval_store),
        "fit_stage_reads": fit_reads,
        "evaluate_stage_reads": reads(&eval_store),
    });
    Ok((evaluation, details))
}

fn write_report(run: &mut Run, dir: &str, table: &ReportTable) -> Result<()> {
    run.write(&PathBuf::from(format!("{dir}/report.csv")), &csv_bytes(|b| table.write_csv(b))?)?;
    run.write(&PathBuf::from(format!("{dir}/report.txt")), table.to_text().as_bytes())?;
    Ok(())
}

fn predictions_csv<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))
}

pub fn evaluate(ctx: &Ctx) -> Result<PathBuf> {
    let mut run = ctx.run("evaluate")?;
    let config = ctx.cfg.experiment()?;
    let (evaluation, details) = fit_and_score(ctx, &config)?;
    write_report(&mut run, "evaluate", &evaluation.table)?;
    run.write(Path::new("evaluate/predictions.csv"), &predictions_csv(&evaluation.predictions)?)?;
    log::info!("\n{}", evaluation.table.to_text());
    run.details = details;
    run.finish()
}

pub fn ablate(ctx: &Ctx) -> Result<PathBuf> {
    let Some(ab) = &ctx.cfg.ablation else {
        bail!("config has no [ablation] section");
    };
    let mut run = ctx.run("ablate")?;
    let base = ctx.cfg.experiment()?;
    let entry = base
        .models
        .iter()
        .find(|m| m.name == ab.base)
        .cloned()
        .with_context(|| format!("ablation base `{}` not found", ab.base))?;
    let mut models = vec![entry.clone()];
    for g in &ab.groups {
        models.push(AblationPlan { remove: vec![*g] }.apply_entry(&entry));
    }
    let config = ExperimentConfig {
        models,
        baselines: Vec::new(),
        ..base
    };
    let (evaluation, details) = fit_and_score(ctx, &config)?;
    write_report(&mut run, "ablate", &evaluation.table)?;
    run.details = details;
    run.finish()
}

pub fn flatten(ctx: &Ctx) -> Result<PathBuf> {
    let mut run = ctx.run("flatten")?;
    let store = CorpusStore::new(ctx.corpus()?, Stage::Export);
    let opts = FlattenOptions {
        rewrite_message_prices: ctx.cfg.flatten.rewrite_message_prices,
    };
    for split in Split::ALL {
        let ds = store.split(split)?;
        for &f in &ctx.cfg.fraction_grid()? {
            let items = partials(&ds, f)?
                .iter()
                .map(|p| FlattenedInput::from_partial(p, opts).with_context(|| format!("dialogue {}", p.id)))
                .collect::<Result<Vec<_>>>()?;
            let rel = PathBuf::from(format!("flattened/{split}_{}.jsonl", fraction_tag(f)));
            run.write(&rel, &csv_bytes(|b| write_flattened(&items, b))?)?;
        }
    }
    run.details = json!({ "split_sizes": split_sizes_of(&store) });
    run.finish()
}

#[derive(Serialize)]
struct EnsemblePrediction<'a> {
    model: &'a str,
    fraction: Fraction,
    id: &'a str,
    predicted: f64,
    agreed: f64,
}

struct Side {
    ids: Vec<String>,
    y: Vec<f64>,
    listings: Vec<f64>,
}

fn side(store: &CorpusStore, split: Split) -> Result<Side> {
    let ds = store.split(split)?;
    if ds.is_empty() {
        bail!("{split} split is empty");
    }
    let mut s = Side {
        ids: Vec::new(),
        y: Vec::new(),
        listings: Vec::new(),
    };
    for d in ds {
        let y = d
            .normalized_agreed()
            .with_context(|| format!("dialogue {} has no agreed price; preprocess first", d.id))?;
        s.ids.push(d.id.clone());
        s.y.push(y);
        s.listings.push(d.scenario.listing_price);
    }
    Ok(s)
}

pub fn ensemble(ctx: &Ctx) -> Result<PathBuf> {
    let Some(sec) = &ctx.cfg.ensemble else {
        bail!("config has no [ensemble] section");
    };
    let mut run = ctx.run("ensemble")?;
    run.input(&sec.predictions)?;
    let file = std::fs::File::open(&sec.predictions).with_context(|| format!("opening {}", sec.predictions.display()))?;
    let records = read_predictions(file).with_context(|| format!("predictions {}", sec.predictions.display()))?;
    let cfg = EnsembleConfig {
        hidden_sizes: sec.hidden_sizes.clone(),
        activations: sec.activations.clone(),
        trials: sec.trials,
        seed: ctx.cfg.seed,
        k: ctx.cfg.k,
        mlp: MlpParams::default(),
    };
    let fractions = ctx.cfg.fraction_grid()?;

    let fit_store = CorpusStore::new(ctx.corpus()?, Stage::Fit);
    let (tr, va) = (side(&fit_store, Split::Train)?, side(&fit_store, Split::Validation)?);
    let mut fitted = Vec::new();
    let mut selection = Vec::new();
    for &f in &fractions {
        let tm = PredictionMatrix::build(&records, &tr.ids, f).context("train predictions")?;
        let vm = PredictionMatrix::build(&records, &va.ids, f).context("validation predictions")?;
        let out = ensemble_train(&tm, &tr.y, &vm, &va.y, &cfg).with_context(|| format!("ensemble at fraction {f}"))?;
        log::info!("fraction {f}: {} (validation accuracy {:.2})", out.model.describe(), out.validation_accuracy);
        selection.push(json!({
            "fraction": f,
            "model": out.model.describe(),
            "validation_accuracy": out.validation_accuracy,
            "validation_mae": out.validation_mae,
            "passthrough_accuracy": out.passthrough_accuracy,
            "trials": out.trials.iter().map(|(h, a, s)| json!({"hidden": h, "activation": a, "validation_accuracy": s})).collect::<Vec<_>>(),
        }));
        fitted.push((f, out.model));
    }
    let fit_reads = reads(&fit_store);

    let eval_store = CorpusStore::new(fit_store.into_dialogues(), Stage::Evaluate);
    let te = side(&eval_store, Split::Test)?;
    let agreed: Vec<f64> = te.y.iter().zip(&te.listings).map(|(y, l)| y * l).collect();
    let mut rows: BTreeMap<&str, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    let mut preds = Vec::new();
    let mut per_fraction = Vec::new();
    for (f, model) in &fitted {
        let m = PredictionMatrix::build(&records, &te.ids, *f).context("test predictions")?;
        let newest = EnsembleModel::Passthrough { column: m.width() - 1 };
        per_fraction.push((*f, newest.predict_matrix(&m), model.predict_matrix(&m)));
    }
    for (label, pick) in [("Encoder", 0usize), ("Ensemble", 1)] {
        let (acc, err) = rows.entry(label).or_default();
        for (f, enc, ens) in &per_fraction {
            let p: Vec<f64> = (if pick == 0 { enc } else { ens }).iter().zip(&te.listings).map(|(v, l)| v * l).collect();
            acc.push(accuracy_within(&p, &agreed, ctx.cfg.k)?);
            err.push(mae(&p, &agreed)?);
            for (i, id) in te.ids.iter().enumerate() {
                preds.push(EnsemblePrediction {
                    model: label,
                    fraction: *f,
                    id,
                    predicted: p[i],
                    agreed: agreed[i],
                });
            }
        }
    }
    let table = ReportTable {
        reports: ["Encoder", "Ensemble"]
            .iter()
            .map(|label| EvalReport {
                model: label.to_string(),
                k: ctx.cfg.k,
                fractions: fractions.clone(),
                accuracy: rows[label].0.clone(),
                mae: rows[label].1.clone(),
            })
            .collect(),
    };
    write_report(&mut run, "ensemble", &table)?;
    run.write(Path::new("ensemble/predictions.csv"), &predictions_csv(&preds)?)?;
    run.write(Path::new("ensemble/selection.json"), &json_bytes(&selection)?)?;
    run.details = json!({
        "fit_stage_reads": fit_reads,
        "evaluate_stage_reads": reads(&eval_store),
    });
    run.finish()
}

pub fn probe(ctx: &Ctx) -> Result<PathBuf> {
    let Some(sec) = &ctx.cfg.probe else {
        bail!("config has no [probe] section");
    };
    let mut run = ctx.run("probe")?;
    let fraction = Fraction::new(sec.fraction)?;
    run.input(&sec.pre)?;
    run.input(&sec.post)?;
    let pre = RepresentationSet::load_any(&sec.pre, ReprStage::PreTraining, fraction)
        .with_context(|| format!("representations {}", sec.pre.display()))?;
    let post = RepresentationSet::load_any(&sec.post, ReprStage::PostTraining, fraction)
        .with_context(|| format!("representations {}", sec.post.display()))?;
    if pre.fraction != post.fraction {
        bail!("containers disagree on fraction: {} vs {}", pre.fraction, post.fraction);
    }
    let table = match &sec.features {
        Some(path) => {
            run.input(path)?;
            let file = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
            FeatureMatrix::read_csv(file).with_context(|| format!("features {}", path.display()))?
        }
        None => {
            let store = CorpusStore::new(ctx.corpus()?, Stage::Export);
            let mut all = Vec::new();
            for split in Split::ALL {
                all.extend(store.split(split)?);
            }
            ctx.extractor().matrix(&partials(&all, pre.fraction)?, FeatureSet::TsfLf)
        }
    };
    let wanted: Vec<String> = if sec.only.is_empty() { lf_names().to_vec() } else { sec.only.clone() };
    let cfg = ProbeConfig {
        seed: ctx.cfg.seed,
        ..ProbeConfig::default()
    };
    let report = probe_compare(&pre, &post, &table, &wanted, &cfg)?;
    for o in &report.omissions {
        log::warn!("omitted {o}");
    }
    run.write(Path::new("probe/report.csv"), &csv_bytes(|b| report.write_csv(b))?)?;
    run.write(Path::new("probe/report.txt"), report.to_text().as_bytes())?;
    run.details = json!({
        "samples": pre.len(),
        "width": pre.width,
        "fraction": pre.fraction,
        "probed": report.rows.len(),
        "omitted": report.omissions,
    });
    run.finish()
}

pub fn significance(ctx: &Ctx) -> Result<PathBuf> {
    let mut run = ctx.run("significance")?;
    let sig = &ctx.cfg.significance;
    let f = Fraction::new(sig.fraction)?;
    let store = CorpusStore::new(ctx.corpus()?, Stage::Fit);
    let train = store.split(Split::Train)?;
    let m = ctx.extractor().matrix(&partials(&train, f)?, sig.features);
    if let Some(i) = m.targets.iter().position(|t| !t.is_finite()) {
        bail!("dialogue {} has no agreed price; preprocess first", m.ids[i]);
    }
    let scores = f_regression(&m.rows, &m.targets)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|a, b| scores[*a].p.total_cmp(&scores[*b].p));
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["rank", "feature", "f", "p"])?;
    for (rank, j) in order.iter().enumerate() {
        w.write_record([
            (rank + 1).to_string(),
            m.names[*j].clone(),
            format!("{}", scores[*j].f),
            format!("{}", scores[*j].p),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?;
    run.write(Path::new("significance/f_regression.csv"), &bytes)?;
    run.details = json!({
        "samples": m.len(),
        "features": m.width(),
        "fraction": f,
        "significant_at_0.05": scores.iter().filter(|s| s.p < 0.05).count(),
        "splits_read": reads(&store),
    });
    run.finish()
}
