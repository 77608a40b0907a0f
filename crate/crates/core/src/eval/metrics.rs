use crate::error::{Error, Result};

fn check(pred: &[f64], target: &[f64]) -> Result<()> {
    if pred.is_empty() {
        return Err(Error::domain("metric over zero predictions"));
    }
    if pred.len() != target.len() {
        return Err(Error::contract(format!(
            "{} predictions for {} targets",
            pred.len(),
            target.len()
        )));
    }
    Ok(())
}

/// Percentage of predictions within `k` percent of their target, boundary
/// included.
pub fn accuracy_within(pred: &[f64], target: &[f64], k: f64) -> Result<f64> {
    check(pred, target)?;
    if let Some(t) = target.iter().find(|t| !(**t > 0.0)) {
        return Err(Error::domain(format!("target must be positive, got {t}")));
    }
    let hits = pred
        .iter()
        .zip(target)
        .filter(|(p, t)| (*p - *t).abs() * 100.0 <= k * *t)
        .count();
    Ok(100.0 * hits as f64 / pred.len() as f64)
}

/// Mean absolute error, in whatever unit the inputs carry.
pub fn mae(pred: &[f64], target: &[f64]) -> Result<f64> {
    check(pred, target)?;
    Ok(pred.iter().zip(target).map(|(p, t)| (p - t).abs()).sum::<f64>() / pred.len() as f64)
}
