//! Probes from frozen encoder representations to explainable features.
//!
//! For each feature: X is the error of always predicting the probe-train
//! mean, Y the error of a probe on the pre-training representations, Z the
//! same probe on the post-training representations. Improvement is
//! (Y − Z) / Y; a positive value suggests task training made the feature
//! easier to read off.

pub mod container;

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::mae;
use crate::features::{FeatureMatrix, StandardScaler};
use crate::models::{Mlp, MlpParams};

pub use container::{ReprStage, RepresentationSet};

/// Improvement above which a row is marked as a confident capture.
pub const CONFIDENT_IMPROVEMENT: f64 = 0.05;

pub fn fnv1a(s: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in s.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Stable 80/20 split: ids whose hash is ≡ 0 (mod 5) are held out.
pub fn is_held_out(id: &str) -> bool {
    fnv1a(id) % 5 == 0
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeConfig {
    pub mlp: MlpParams,
    pub seed: u64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            mlp: MlpParams {
                hidden: 100,
                batch_size: 16,
                epochs: 5,
                tol: 1e-3,
                ..MlpParams::default()
            },
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeScore {
    /// Held-out MAE of the probe.
    pub mae: f64,
    /// Held-out MAE of the probe-train mean.
    pub baseline: f64,
}

const MIN_SAMPLES: usize = 10;

/// Train one probe from `reps` to `values` (aligned with `reps.ids`).
pub fn probe_train(reps: &RepresentationSet, values: &[f64], cfg: &ProbeConfig) -> Result<ProbeScore> {
    if values.len() != reps.len() {
        return Err(Error::contract(format!("{} values for {} representations", values.len(), reps.len())));
    }
    if reps.len() < MIN_SAMPLES {
        return Err(Error::domain(format!("probing needs at least {MIN_SAMPLES} samples, got {}", reps.len())));
    }
    let (mut tr, mut te) = (Vec::new(), Vec::new());
    for (i, id) in reps.ids.iter().enumerate() {
        if is_held_out(id) {
            te.push(i)
        } else {
            tr.push(i)
        }
    }
    if tr.len() < 2 || te.is_empty() {
        return Err(Error::domain("id split left an empty probe-train or held-out side"));
    }
    let row = |i: usize| reps.row(i).iter().map(|v| *v as f64).collect::<Vec<f64>>();
    let xtr: Vec<Vec<f64>> = tr.iter().map(|&i| row(i)).collect();
    let xte: Vec<Vec<f64>> = te.iter().map(|&i| row(i)).collect();
    let ytr: Vec<f64> = tr.iter().map(|&i| values[i]).collect();
    let yte: Vec<f64> = te.iter().map(|&i| values[i]).collect();

    let mean = ytr.iter().sum::<f64>() / ytr.len() as f64;
    let baseline = mae(&vec![mean; yte.len()], &yte)?;

    let names: Vec<String> = (0..reps.width).map(|d| d.to_string()).collect();
    let sx = StandardScaler::fit(&names, &xtr)?;
    // targets are standardized too so the short schedule works at any scale
    let sd = (ytr.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / ytr.len() as f64).sqrt();
    if !(sd > 1e-12) {
        return Ok(ProbeScore {
            mae: mae(&vec![mean; yte.len()], &yte)?,
            baseline,
        });
    }
    let zy: Vec<f64> = ytr.iter().map(|y| (y - mean) / sd).collect();
    let net = Mlp::fit(&sx.transform(&xtr), &zy, &cfg.mlp, cfg.seed)?;
    let pred: Vec<f64> = sx.transform(&xte).iter().map(|x| net.predict(x) * sd + mean).collect();
    Ok(ProbeScore {
        mae: mae(&pred, &yte)?,
        baseline,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub feature: String,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub improvement: f64,
}

impl ProbeRow {
    pub fn captured(&self) -> bool {
        self.improvement > 0.0
    }

    pub fn confident(&self) -> bool {
        self.improvement > CONFIDENT_IMPROVEMENT
    }
}

/// (Y − Z) / Y, zero when Y is zero.
pub fn improvement(y: f64, z: f64) -> f64 {
    if y > 0.0 {
        (y - z) / y
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ProbeReport {
    pub rows: Vec<ProbeRow>,
    /// Requested features absent from the feature table.
    pub omissions: Vec<String>,
}

impl ProbeReport {
    pub fn rank(&self, feature: &str) -> Option<usize> {
        self.rows.iter().position(|r| r.feature == feature)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["feature", "x", "y", "z", "improvement", "captured", "confident"])?;
        for r in &self.rows {
            out.write_record([
                r.feature.clone(),
                format!("{:.6}", r.x),
                format!("{:.6}", r.y),
                format!("{:.6}", r.z),
                format!("{:.6}", r.improvement),
                r.captured().to_string(),
                r.confident().to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    /// `Feature  X : Y : Z  improvement%`, one row per feature, then any
    /// omitted features.
    pub fn to_text(&self) -> String {
        let width = self.rows.iter().map(|r| display_name(&r.feature).len()).max().unwrap_or(7).max(7);
        let mut s = String::new();
        let _ = writeln!(s, "{:<width$}  {:^23}  {:>8}  flag", "Feature", "X : Y : Z", "Improv.");
        for r in &self.rows {
            let flag = if r.confident() {
                "**"
            } else if r.captured() {
                "*"
            } else {
                ""
            };
            let _ = writeln!(
                s,
                "{:<width$}  {:.3} : {:.3} : {:.3}  {:>7.1}%  {flag}",
                display_name(&r.feature),
                r.x,
                r.y,
                r.z,
                100.0 * r.improvement
            );
        }
        if !self.omissions.is_empty() {
            let _ = writeln!(s, "\nomitted (not in feature table): {}", self.omissions.join(", "));
        }
        s
    }
}

/// `liwc:Home(B)` → `Home(B)`.
pub fn display_name(feature: &str) -> &str {
    feature.split_once(':').map_or(feature, |(_, n)| n)
}

/// Probe every requested feature on both stages and rank by improvement.
pub fn probe_compare(
    pre: &RepresentationSet,
    post: &RepresentationSet,
    table: &FeatureMatrix,
    wanted: &[String],
    cfg: &ProbeConfig,
) -> Result<ProbeReport> {
    if pre.width != post.width {
        return Err(Error::contract(format!("stage widths differ: {} vs {}", pre.width, post.width)));
    }
    if pre.ids != post.ids {
        return Err(Error::contract("pre- and post-training containers list different ids"));
    }
    let row_of: HashMap<&str, usize> = table.ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    let rows = pre
        .ids
        .iter()
        .map(|id| {
            row_of
                .get(id.as_str())
                .copied()
                .ok_or_else(|| Error::contract(format!("no feature row for dialogue {id}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let col_of: HashMap<&str, usize> = table.names.iter().enumerate().map(|(j, n)| (n.as_str(), j)).collect();
    let mut omissions = Vec::new();
    let mut present = Vec::new();
    for w in wanted {
        match col_of.get(w.as_str()) {
            Some(&j) => present.push((w.clone(), j)),
            None => omissions.push(w.clone()),
        }
    }
    let mut out = present
        .par_iter()
        .map(|(name, j)| {
            let values: Vec<f64> = rows.iter().map(|&r| table.rows[r][*j]).collect();
            let fc = ProbeConfig {
                seed: cfg.seed ^ fnv1a(name),
                ..cfg.clone()
            };
            let y = probe_train(pre, &values, &fc)?;
            let z = probe_train(post, &values, &fc)?;
            Ok(ProbeRow {
                feature: name.clone(),
                x: y.baseline,
                y: y.mae,
                z: z.mae,
                improvement: improvement(y.mae, z.mae),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    out.sort_by(|a, b| b.improvement.total_cmp(&a.improvement).then_with(|| a.feature.cmp(&b.feature)));
    Ok(ProbeReport { rows: out, omissions })
}
