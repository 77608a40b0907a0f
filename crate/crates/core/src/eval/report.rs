use std::fmt::Write as _;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::corpus::Fraction;
use crate::error::{Error, Result};

/// One model's per-fraction test scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model: String,
    pub k: f64,
    pub fractions: Vec<Fraction>,
    pub accuracy: Vec<f64>,
    pub mae: Vec<f64>,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len().max(1) as f64
}

impl EvalReport {
    pub fn mean_accuracy(&self) -> f64 {
        mean(&self.accuracy)
    }

    pub fn mean_mae(&self) -> f64 {
        mean(&self.mae)
    }

    pub fn accuracy_at(&self, f: Fraction) -> Option<f64> {
        self.fractions.iter().position(|g| *g == f).map(|i| self.accuracy[i])
    }
}

/// Rows of reports over a shared fraction grid.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportTable {
    pub reports: Vec<EvalReport>,
}

impl ReportTable {
    pub fn get(&self, model: &str) -> Option<&EvalReport> {
        self.reports.iter().find(|r| r.model == model)
    }

    fn fractions(&self) -> Vec<Fraction> {
        self.reports.first().map(|r| r.fractions.clone()).unwrap_or_default()
    }

    /// `model,metric,<fractions...>,mean`; one accuracy row and one MAE row
    /// per model. Values carry 4 decimals.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let fr = self.fractions();
        let mut header = vec!["model".to_string(), "metric".to_string()];
        header.extend(fr.iter().map(|f| f.to_string()));
        header.push("mean".into());
        out.write_record(&header)?;
        for r in &self.reports {
            if r.fractions != fr {
                return Err(Error::contract(format!("report {} uses a different fraction grid", r.model)));
            }
            for (metric, vals, m) in [
                (format!("accuracy_{}", r.k), &r.accuracy, r.mean_accuracy()),
                ("mae".to_string(), &r.mae, r.mean_mae()),
            ] {
                let mut rec = vec![r.model.clone(), metric];
                rec.extend(vals.iter().map(|v| format!("{v:.4}")));
                rec.push(format!("{m:.4}"));
                out.write_record(&rec)?;
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<ReportTable> {
        let mut rd = csv::Reader::from_reader(r);
        let header: Vec<String> = rd.headers()?.iter().map(String::from).collect();
        if header.len() < 4 || header[0] != "model" || header[1] != "metric" {
            return Err(Error::Format("report CSV must start with model,metric".into()));
        }
        let fractions = header[2..header.len() - 1]
            .iter()
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|e| Error::Format(format!("fraction `{s}`: {e}")))
                    .and_then(Fraction::new)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut table = ReportTable::default();
        for rec in rd.records() {
            let rec = rec?;
            let vals = (2..rec.len() - 1)
                .map(|i| rec[i].parse::<f64>().map_err(|e| Error::Format(e.to_string())))
                .collect::<Result<Vec<_>>>()?;
            let model = rec[0].to_string();
            let metric = &rec[1];
            if let Some(k) = metric.strip_prefix("accuracy_") {
                table.reports.push(EvalReport {
                    model,
                    k: k.parse().map_err(|_| Error::Format(format!("bad metric `{metric}`")))?,
                    fractions: fractions.clone(),
                    accuracy: vals,
                    mae: Vec::new(),
                });
            } else if metric == "mae" {
                let r = table
                    .reports
                    .iter_mut()
                    .rev()
                    .find(|r| r.model == model)
                    .ok_or_else(|| Error::Format(format!("mae row for {model} before its accuracy row")))?;
                r.mae = vals;
            } else {
                return Err(Error::Format(format!("unknown metric `{metric}`")));
            }
        }
        Ok(table)
    }

    /// Fixed-width table: one line per model with accuracy per fraction and
    /// the mean, followed by the same layout for MAE.
    pub fn to_text(&self) -> String {
        let fr = self.fractions();
        let width = self.reports.iter().map(|r| r.model.len()).max().unwrap_or(5).max(5);
        let mut s = String::new();
        let k = self.reports.first().map_or(10.0, |r| r.k);
        for (title, pick) in [
            (format!("Accuracy±{k}"), 0usize),
            ("MAE".to_string(), 1usize),
        ] {
            let _ = write!(s, "{:<width$}", title);
            for f in &fr {
                let _ = write!(s, " {:>9}", f.to_string());
            }
            let _ = writeln!(s, " {:>9}", "Mean");
            for r in &self.reports {
                let (vals, m) = if pick == 0 {
                    (&r.accuracy, r.mean_accuracy())
                } else {
                    (&r.mae, r.mean_mae())
                };
                let _ = write!(s, "{:<width$}", r.model);
                for v in vals {
                    let _ = write!(s, " {:>9.2}", v);
                }
                let _ = writeln!(s, " {:>9.2}", m);
            }
            s.push('\n');
        }
        s
    }
}
