use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no samples left after gating")]
    EmptyAfterGate,
    #[error("prediction and truth series lengths differ: {pred} vs {truth}")]
    LengthMismatch { pred: usize, truth: usize },
    #[error("truth range is zero and no normalization override was given")]
    DegenerateRange,
}

/// Prediction-accuracy report. `nrmse` is the RMSE normalized by the range
/// of the reference airspeed series (or an explicit override).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub rmse: f64,
    pub nrmse: f64,
    pub normalization_range: f64,
    pub n_samples: usize,
    pub gated_fraction: f64,
}

/// Compare equal-length gated series.
pub fn evaluate(
    predictions: &[f64],
    truth: &[f64],
    range_override: Option<f64>,
    gated_fraction: f64,
) -> Result<EvalReport, EvalError> {
    if predictions.len() != truth.len() {
        return Err(EvalError::LengthMismatch {
            pred: predictions.len(),
            truth: truth.len(),
        });
    }
    if predictions.is_empty() {
        return Err(EvalError::EmptyAfterGate);
    }
    let n = predictions.len();
    let mse = predictions
        .iter()
        .zip(truth)
        .map(|(p, t)| (p - t) * (p - t))
        .sum::<f64>()
        / n as f64;
    let rmse = mse.sqrt();

    let range = match range_override {
        Some(r) => r,
        None => {
            let max = truth.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let min = truth.iter().copied().fold(f64::INFINITY, f64::min);
            max - min
        }
    };
    if !(range > 0.0) {
        return Err(EvalError::DegenerateRange);
    }

    Ok(EvalReport {
        rmse,
        nrmse: rmse / range,
        normalization_range: range,
        n_samples: n,
        gated_fraction,
    })
}
