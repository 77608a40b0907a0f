//! Feature extraction over partial dialogues.

pub mod fregression;
pub mod lexicon;
pub mod lf;
pub mod prices;
pub mod readability;
pub mod scaler;
pub mod tagger;
pub mod tokenize;
pub mod tsf;

use std::collections::HashMap;
use std::io::{Read, Write};
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::PartialDialogue;
use crate::error::{Error, Result};

pub use lexicon::{Lexicon, LexiconKind};
pub use lf::{extract_lf, lf_names, Family, LexiconSet};
pub use scaler::StandardScaler;
pub use tagger::{RuleTagger, Tagger};
pub use tsf::{extract_tsf, tsf_names};

/// Named feature values for one partial dialogue.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub names: Arc<Vec<String>>,
    pub values: Vec<f64>,
    pub warnings: Vec<String>,
}

impl FeatureVector {
    pub fn new(names: Arc<Vec<String>>, values: Vec<f64>) -> Self {
        debug_assert_eq!(names.len(), values.len());
        FeatureVector {
            names,
            values,
            warnings: Vec::new(),
        }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.values[i])
    }

    pub fn concat(self, other: FeatureVector) -> FeatureVector {
        let mut names = (*self.names).clone();
        names.extend(other.names.iter().cloned());
        let mut values = self.values;
        values.extend(other.values);
        let mut warnings = self.warnings;
        warnings.extend(other.warnings);
        FeatureVector {
            names: Arc::new(names),
            values,
            warnings,
        }
    }
}

/// Which feature groups feed a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FeatureSet {
    #[serde(rename = "tsf")]
    Tsf,
    #[serde(rename = "tsf+lf")]
    TsfLf,
}

impl FeatureSet {
    pub fn as_str(self) -> &'static str {
        match self {
            FeatureSet::Tsf => "tsf",
            FeatureSet::TsfLf => "tsf+lf",
        }
    }
}

impl FromStr for FeatureSet {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "tsf" => Ok(FeatureSet::Tsf),
            "tsf+lf" | "tsf_lf" | "lf" => Ok(FeatureSet::TsfLf),
            _ => Err(format!("unknown feature set `{s}` (expected tsf or tsf+lf)")),
        }
    }
}

/// Extraction context shared across dialogues.
pub struct Extractor<'a> {
    pub lexicons: &'a LexiconSet,
    pub tagger: &'a dyn Tagger,
}

impl<'a> Extractor<'a> {
    pub fn new(lexicons: &'a LexiconSet, tagger: &'a dyn Tagger) -> Self {
        Extractor { lexicons, tagger }
    }

    pub fn extract(&self, partial: &PartialDialogue, set: FeatureSet) -> FeatureVector {
        let t = extract_tsf(partial);
        match set {
            FeatureSet::Tsf => t,
            FeatureSet::TsfLf => t.concat(extract_lf(partial, self.lexicons, self.tagger)),
        }
    }

    /// Extract every partial dialogue; rows whose target is unknown get NaN.
    pub fn matrix(&self, partials: &[PartialDialogue], set: FeatureSet) -> FeatureMatrix {
        let vecs: Vec<FeatureVector> = partials.par_iter().map(|p| self.extract(p, set)).collect();
        let names = match vecs.first() {
            Some(v) => v.names.clone(),
            None => names_for(set),
        };
        let mut warnings: Vec<String> = vecs.first().map(|v| v.warnings.clone()).unwrap_or_default();
        warnings.dedup();
        FeatureMatrix {
            names,
            ids: partials.iter().map(|p| p.id.clone()).collect(),
            rows: vecs.into_iter().map(|v| v.values).collect(),
            targets: partials.iter().map(|p| p.normalized_agreed().unwrap_or(f64::NAN)).collect(),
            listings: partials.iter().map(|p| p.scenario.listing_price).collect(),
            warnings,
        }
    }
}

pub fn names_for(set: FeatureSet) -> Arc<Vec<String>> {
    match set {
        FeatureSet::Tsf => tsf_names(),
        FeatureSet::TsfLf => {
            let mut n = (*tsf_names()).clone();
            n.extend(lf_names().iter().cloned());
            Arc::new(n)
        }
    }
}

/// Rows of features with their dialogue ids, normalized targets and listing
/// prices (needed to report errors in dollars).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub names: Arc<Vec<String>>,
    pub ids: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
    pub listings: Vec<f64>,
    pub warnings: Vec<String>,
}

const ID_COL: &str = "id";
const TARGET_COL: &str = "target_normalized";
const LISTING_COL: &str = "listing_price";

impl FeatureMatrix {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn width(&self) -> usize {
        self.names.len()
    }

    /// Keep the columns whose names satisfy `keep`, in their original order.
    pub fn select(&self, keep: impl Fn(&str) -> bool) -> FeatureMatrix {
        let idx: Vec<usize> = (0..self.names.len()).filter(|&i| keep(&self.names[i])).collect();
        FeatureMatrix {
            names: Arc::new(idx.iter().map(|&i| self.names[i].clone()).collect()),
            rows: self.rows.iter().map(|r| idx.iter().map(|&i| r[i]).collect()).collect(),
            ..self.clone()
        }
    }

    /// Drop every column whose family prefix (text before `:`) is listed.
    pub fn drop_prefixes(&self, prefixes: &[&str]) -> FeatureMatrix {
        self.select(|n| {
            let fam = n.split(':').next().unwrap_or("");
            !prefixes.contains(&fam)
        })
    }

    /// Columns in the order given by `names`; errors if one is missing.
    pub fn reorder(&self, names: &[String]) -> Result<FeatureMatrix> {
        let pos: HashMap<&str, usize> = self.names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        let idx = names
            .iter()
            .map(|n| {
                pos.get(n.as_str())
                    .copied()
                    .ok_or_else(|| Error::contract(format!("feature `{n}` not present")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FeatureMatrix {
            names: Arc::new(names.to_vec()),
            rows: self.rows.iter().map(|r| idx.iter().map(|&i| r[i]).collect()).collect(),
            ..self.clone()
        })
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.names.iter().position(|n| n == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec![ID_COL.to_string(), TARGET_COL.to_string(), LISTING_COL.to_string()];
        header.extend(self.names.iter().cloned());
        out.write_record(&header)?;
        for i in 0..self.rows.len() {
            let mut rec = vec![self.ids[i].clone(), fmt_num(self.targets[i]), fmt_num(self.listings[i])];
            rec.extend(self.rows[i].iter().map(|v| fmt_num(*v)));
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<FeatureMatrix> {
        let mut rd = csv::Reader::from_reader(r);
        let header: Vec<String> = rd.headers()?.iter().map(String::from).collect();
        if header.len() < 3 || header[0] != ID_COL || header[1] != TARGET_COL || header[2] != LISTING_COL {
            return Err(Error::Format(format!(
                "feature CSV must start with {ID_COL},{TARGET_COL},{LISTING_COL}"
            )));
        }
        let names = Arc::new(header[3..].to_vec());
        let mut m = FeatureMatrix {
            names,
            ids: Vec::new(),
            rows: Vec::new(),
            targets: Vec::new(),
            listings: Vec::new(),
            warnings: Vec::new(),
        };
        for (line, rec) in rd.records().enumerate() {
            let rec = rec?;
            let num = |k: usize| -> Result<f64> {
                let s = rec.get(k).unwrap_or("");
                if s.is_empty() {
                    return Ok(f64::NAN);
                }
                s.parse::<f64>().map_err(|e| Error::Parse {
                    record: line + 1,
                    message: format!("column {}: {e}", header[k]),
                })
            };
            if rec.len() != header.len() {
                return Err(Error::Parse {
                    record: line + 1,
                    message: format!("{} fields, expected {}", rec.len(), header.len()),
                });
            }
            m.ids.push(rec[0].to_string());
            m.targets.push(num(1)?);
            m.listings.push(num(2)?);
            m.rows.push((3..header.len()).map(num).collect::<Result<_>>()?);
        }
        Ok(m)
    }
}

fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v}")
    }
}
