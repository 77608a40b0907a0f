//! Ordinary least squares via the normal equations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Added to the Gram diagonal so collinear designs stay solvable.
pub const DEFAULT_RIDGE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearModel {
    /// The intercept is fitted by centering and is not penalized.
    pub fn fit(x: &[Vec<f64>], y: &[f64], ridge: f64) -> Result<Self> {
        let n = x.len();
        let d = x[0].len();
        let nf = n as f64;
        let mut xm = vec![0.0; d];
        for r in x {
            for (m, v) in xm.iter_mut().zip(r) {
                *m += v;
            }
        }
        xm.iter_mut().for_each(|m| *m /= nf);
        let ym = y.iter().sum::<f64>() / nf;

        let mut gram = vec![0.0; d * d];
        let mut rhs = vec![0.0; d];
        let mut c = vec![0.0; d];
        for (r, yv) in x.iter().zip(y) {
            for j in 0..d {
                c[j] = r[j] - xm[j];
            }
            let dy = yv - ym;
            for a in 0..d {
                if c[a] == 0.0 {
                    continue;
                }
                rhs[a] += c[a] * dy;
                let row = &mut gram[a * d..a * d + d];
                for b in 0..=a {
                    row[b] += c[a] * c[b];
                }
            }
        }
        for a in 0..d {
            gram[a * d + a] += ridge;
        }
        let l = cholesky(&mut gram, d)?;
        let weights = solve_cholesky(l, d, &rhs);
        let bias = ym - weights.iter().zip(&xm).map(|(w, m)| w * m).sum::<f64>();
        if !bias.is_finite() || weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Numeric("least-squares solution is not finite".into()));
        }
        Ok(LinearModel { weights, bias })
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.bias + self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
    }
}

/// In-place lower Cholesky factor of a symmetric matrix whose lower
/// triangle is filled (row-major, `d`×`d`).
fn cholesky(a: &mut [f64], d: usize) -> Result<&[f64]> {
    for j in 0..d {
        let mut s = a[j * d + j];
        for k in 0..j {
            s -= a[j * d + k] * a[j * d + k];
        }
        if s <= 0.0 || !s.is_finite() {
            return Err(Error::Numeric(format!(
                "normal equations are singular at column {j} even with ridge"
            )));
        }
        let dj = s.sqrt();
        a[j * d + j] = dj;
        for i in j + 1..d {
            let mut s = a[i * d + j];
            for k in 0..j {
                s -= a[i * d + k] * a[j * d + k];
            }
            a[i * d + j] = s / dj;
        }
    }
    Ok(a)
}

fn solve_cholesky(l: &[f64], d: usize, b: &[f64]) -> Vec<f64> {
    let mut z = b.to_vec();
    for i in 0..d {
        for k in 0..i {
            z[i] -= l[i * d + k] * z[k];
        }
        z[i] /= l[i * d + i];
    }
    for i in (0..d).rev() {
        for k in i + 1..d {
            z[i] -= l[k * d + i] * z[k];
        }
        z[i] /= l[i * d + i];
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_fit() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64 * 0.3 - 1.0]).collect();
        let y: Vec<f64> = x.iter().map(|r| 2.0 * r[0]).collect();
        let m = LinearModel::fit(&x, &y, DEFAULT_RIDGE).unwrap();
        assert!((m.weights[0] - 2.0).abs() < 1e-6);
        assert!(m.bias.abs() < 1e-6);
    }

    #[test]
    fn dot_product() {
        let m = LinearModel {
            weights: vec![2.0],
            bias: 0.0,
        };
        assert_eq!(m.predict(&[0.5]), 1.0);
    }

    #[test]
    fn duplicate_columns_survive() {
        let x: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64, i as f64, 1.0]).collect();
        let y: Vec<f64> = (0..8).map(|i| 3.0 * i as f64 + 1.0).collect();
        let m = LinearModel::fit(&x, &y, DEFAULT_RIDGE).unwrap();
        for (r, t) in x.iter().zip(&y) {
            assert!((m.predict(r) - t).abs() < 1e-4);
        }
    }

    #[test]
    fn zero_ridge_singular_is_numeric_error() {
        let x: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64, 7.0]).collect();
        let y = vec![0.0, 1.0, 2.0, 3.0, 4.0];
        assert!(matches!(LinearModel::fit(&x, &y, 0.0), Err(Error::Numeric(_))));
    }

    proptest! {
        /// Residuals of the fit are orthogonal to every centered column.
        #[test]
        fn residuals_orthogonal(rows in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 4), 12..40)) {
            let y: Vec<f64> = rows.iter().map(|r| r[0] - 0.5 * r[1] + r[2] * r[3]).collect();
            let m = LinearModel::fit(&rows, &y, DEFAULT_RIDGE).unwrap();
            let res: Vec<f64> = rows.iter().zip(&y).map(|(r, t)| t - m.predict(r)).collect();
            prop_assert!(res.iter().sum::<f64>().abs() < 1e-6);
            for j in 0..4 {
                let dot: f64 = rows.iter().zip(&res).map(|(r, e)| r[j] * e).sum();
                prop_assert!(dot.abs() < 1e-4, "col {} dot {}", j, dot);
            }
        }
    }
}
