//! Univariate linear-regression F test of each feature against the target.

use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FScore {
    pub f: f64,
    pub p: f64,
}

/// F statistic and p-value per column of `rows` against `y`.
///
/// With Pearson correlation r over n samples, F = r^2 / (1 - r^2) * (n - 2)
/// on (1, n - 2) degrees of freedom. A column with no variance gets F = 0,
/// p = 1.
pub fn f_regression(rows: &[Vec<f64>], y: &[f64]) -> Result<Vec<FScore>> {
    let n = rows.len();
    if n != y.len() {
        return Err(Error::contract(format!("{n} rows but {} targets", y.len())));
    }
    if n < 3 {
        return Err(Error::domain("F test needs at least 3 samples"));
    }
    let d = rows[0].len();
    let nf = n as f64;
    let ym = y.iter().sum::<f64>() / nf;
    let syy: f64 = y.iter().map(|v| (v - ym).powi(2)).sum();
    let dof = nf - 2.0;
    let mut out = Vec::with_capacity(d);
    for j in 0..d {
        let xm = rows.iter().map(|r| r[j]).sum::<f64>() / nf;
        let (mut sxx, mut sxy) = (0.0, 0.0);
        for (r, yv) in rows.iter().zip(y) {
            let dx = r[j] - xm;
            sxx += dx * dx;
            sxy += dx * (yv - ym);
        }
        if sxx <= 1e-300 || syy <= 1e-300 {
            out.push(FScore { f: 0.0, p: 1.0 });
            continue;
        }
        let r2 = (sxy * sxy / (sxx * syy)).min(1.0);
        if r2 >= 1.0 {
            out.push(FScore { f: f64::INFINITY, p: 0.0 });
            continue;
        }
        let f = r2 / (1.0 - r2) * dof;
        out.push(FScore { f, p: f_survival(f, dof) });
    }
    Ok(out)
}

/// P(F(1, d2) > f).
pub fn f_survival(f: f64, d2: f64) -> f64 {
    if f <= 0.0 {
        return 1.0;
    }
    beta_reg(d2 / 2.0, 0.5, d2 / (d2 + f))
}
