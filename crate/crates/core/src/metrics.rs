//! Prediction error metrics.

use crate::error::{Error, Result};

/// Root-mean-square deviation between predictions and ground truth.
pub fn rmsd(pred: &[f64], truth: &[f64]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: truth.len(),
        });
    }
    if pred.is_empty() {
        return Err(Error::Empty);
    }
    let sse: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok(libm::sqrt(sse / pred.len() as f64))
}

/// Relative reduction of `improved` against `baseline`, in percent.
pub fn improvement_pct(baseline: f64, improved: f64) -> f64 {
    (baseline - improved) / baseline * 100.0
}
