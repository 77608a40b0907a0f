use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::corpus::Fraction;
use crate::error::{Error, Result};

/// One external prediction: `dialogue_id,fraction,prediction` (normalized).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub dialogue_id: String,
    pub fraction: Fraction,
    pub prediction: f64,
}

pub fn read_predictions<R: Read>(r: R) -> Result<Vec<PredictionRecord>> {
    let mut rd = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for (i, rec) in rd.deserialize().enumerate() {
        let rec: PredictionRecord = rec.map_err(|e| Error::Parse {
            record: i + 1,
            message: e.to_string(),
        })?;
        if !rec.prediction.is_finite() {
            return Err(Error::Parse {
                record: i + 1,
                message: "prediction is not finite".into(),
            });
        }
        out.push(rec);
    }
    Ok(out)
}

pub fn write_predictions<W: Write>(records: &[PredictionRecord], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in records {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

/// Per-dialogue predictions for every grid fraction up to `upto`.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionMatrix {
    pub ids: Vec<String>,
    pub fractions: Vec<Fraction>,
    pub rows: Vec<Vec<f64>>,
}

impl PredictionMatrix {
    /// Rows in the order of `ids`; every (id, fraction ≤ upto) pair must be
    /// present exactly once.
    pub fn build(records: &[PredictionRecord], ids: &[String], upto: Fraction) -> Result<Self> {
        let fractions = upto.up_to();
        let mut by: HashMap<(&str, Fraction), f64> = HashMap::new();
        for r in records {
            if r.fraction <= upto && by.insert((r.dialogue_id.as_str(), r.fraction), r.prediction).is_some() {
                return Err(Error::contract(format!(
                    "duplicate prediction for {} at fraction {}",
                    r.dialogue_id, r.fraction
                )));
            }
        }
        let mut rows = Vec::with_capacity(ids.len());
        for id in ids {
            let row = fractions
                .iter()
                .map(|f| {
                    by.get(&(id.as_str(), *f))
                        .copied()
                        .ok_or_else(|| Error::contract(format!("no prediction for {id} at fraction {f}")))
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Ok(PredictionMatrix {
            ids: ids.to_vec(),
            fractions,
            rows,
        })
    }

    /// Ids in record order, first occurrence.
    pub fn ids_of(records: &[PredictionRecord]) -> Vec<String> {
        let mut seen = BTreeMap::new();
        for (i, r) in records.iter().enumerate() {
            seen.entry(r.dialogue_id.clone()).or_insert(i);
        }
        let mut v: Vec<(usize, String)> = seen.into_iter().map(|(k, i)| (i, k)).collect();
        v.sort();
        v.into_iter().map(|(_, k)| k).collect()
    }

    pub fn width(&self) -> usize {
        self.fractions.len()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }
}
