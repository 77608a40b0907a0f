use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-column standardization fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardScaler {
    pub names: Vec<String>,
    pub means: Vec<f64>,
    /// Population standard deviations; constant columns store 1.
    pub stds: Vec<f64>,
}

impl StandardScaler {
    pub fn fit(names: &[String], rows: &[Vec<f64>]) -> Result<Self> {
        let d = names.len();
        if rows.is_empty() {
            return Err(Error::domain("cannot fit a scaler on zero rows"));
        }
        if let Some(r) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::contract(format!("row width {} != {d} columns", r.len())));
        }
        let n = rows.len() as f64;
        let mut means = vec![0.0; d];
        for r in rows {
            for (m, x) in means.iter_mut().zip(r) {
                *m += x;
            }
        }
        means.iter_mut().for_each(|m| *m /= n);
        let mut vars = vec![0.0; d];
        for r in rows {
            for j in 0..d {
                vars[j] += (r[j] - means[j]).powi(2);
            }
        }
        let stds = vars
            .into_iter()
            .map(|v| {
                let s = (v / n).sqrt();
                if s > 1e-12 && s.is_finite() {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        Ok(StandardScaler {
            names: names.to_vec(),
            means,
            stds,
        })
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(x, (m, s))| (x - m) / s)
            .collect()
    }

    pub fn transform(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.transform_row(r)).collect()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_vec_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_slice(&std::fs::read(path)?)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_column_is_centered_only() {
        let names = vec!["a".to_string(), "b".to_string()];
        let rows = vec![vec![1.0, 5.0], vec![3.0, 5.0]];
        let s = StandardScaler::fit(&names, &rows).unwrap();
        assert_eq!(s.stds, vec![1.0, 1.0]);
        assert_eq!(s.transform_row(&[3.0, 5.0]), vec![1.0, 0.0]);
    }

    #[test]
    fn json_round_trip() {
        let names = vec!["a".to_string()];
        let s = StandardScaler::fit(&names, &[vec![1.0], vec![2.0], vec![4.0]]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.json");
        s.save(&p).unwrap();
        assert_eq!(StandardScaler::load(&p).unwrap(), s);
    }

    proptest! {
        #[test]
        fn transformed_training_rows_are_standard(rows in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 3), 2..30)) {
            let names: Vec<String> = (0..3).map(|i| i.to_string()).collect();
            let s = StandardScaler::fit(&names, &rows).unwrap();
            let t = s.transform(&rows);
            let n = t.len() as f64;
            for j in 0..3 {
                let mean = t.iter().map(|r| r[j]).sum::<f64>() / n;
                let var = t.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n;
                prop_assert!(mean.abs() < 1e-8);
                prop_assert!((var - 1.0).abs() < 1e-6 || var < 1e-12);
            }
        }
    }
}
