use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PolarError {
    #[error("polar needs at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("alpha grid must be strictly increasing (violation at index {0})")]
    NotIncreasing(usize),
    #[error("cl/cd length {got} does not match alpha grid length {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("drag coefficient must be non-negative (cd[{index}] = {value})")]
    NegativeDrag { index: usize, value: f64 },
    #[error("non-finite value in polar table at index {0}")]
    NonFinite(usize),
    #[error("failed to read polar file: {0}")]
    Io(#[from] std::io::Error),
    #[error("polar file line {line}: expected 3 numeric columns (alpha_deg, cl, cd)")]
    Malformed { line: usize },
}

/// Tabulated airfoil section polar: lift and drag coefficient versus angle
/// of attack.
///
/// Lookups interpolate linearly between samples and hold the endpoint values
/// outside the tabulated range.
#[derive(Debug, Clone)]
pub struct AirfoilPolar {
    alpha: Vec<f64>,
    cl: Vec<f64>,
    cd: Vec<f64>,
}

impl AirfoilPolar {
    /// Build a polar from parallel arrays. `alpha` is in radians and must be
    /// strictly increasing; `cd` must be non-negative everywhere.
    pub fn new(alpha: Vec<f64>, cl: Vec<f64>, cd: Vec<f64>) -> Result<Self, PolarError> {
        if alpha.len() < 2 {
            return Err(PolarError::TooFewSamples(alpha.len()));
        }
        if cl.len() != alpha.len() {
            return Err(PolarError::LengthMismatch {
                expected: alpha.len(),
                got: cl.len(),
            });
        }
        if cd.len() != alpha.len() {
            return Err(PolarError::LengthMismatch {
                expected: alpha.len(),
                got: cd.len(),
            });
        }
        for i in 0..alpha.len() {
            if !(alpha[i].is_finite() && cl[i].is_finite() && cd[i].is_finite()) {
                return Err(PolarError::NonFinite(i));
            }
            if cd[i] < 0.0 {
                return Err(PolarError::NegativeDrag {
                    index: i,
                    value: cd[i],
                });
            }
            if i > 0 && alpha[i] <= alpha[i - 1] {
                return Err(PolarError::NotIncreasing(i));
            }
        }
        Ok(Self { alpha, cl, cd })
    }

    /// Parse a 3-column numeric text file `(alpha_deg, cl, cd)`. Lines
    /// starting with `#` and blank lines are skipped.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, PolarError> {
        Self::from_str_table(&std::fs::read_to_string(path)?)
    }

    /// Parse the same format as [`Self::from_file`] from a string.
    pub fn from_str_table(text: &str) -> Result<Self, PolarError> {
        let mut alpha = Vec::new();
        let mut cl = Vec::new();
        let mut cd = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split_whitespace().map(str::parse::<f64>);
            match (cols.next(), cols.next(), cols.next(), cols.next()) {
                (Some(Ok(a)), Some(Ok(l)), Some(Ok(d)), None) => {
                    alpha.push(a.to_radians());
                    cl.push(l);
                    cd.push(d);
                }
                _ => return Err(PolarError::Malformed { line: i + 1 }),
            }
        }
        Self::new(alpha, cl, cd)
    }

    /// Lift and drag coefficients at `alpha` [rad]. Linear interpolation
    /// inside the grid, endpoint hold outside.
    pub fn lift_drag(&self, alpha: f64) -> (f64, f64) {
        let n = self.alpha.len();
        if alpha <= self.alpha[0] {
            return (self.cl[0], self.cd[0]);
        }
        if alpha >= self.alpha[n - 1] {
            return (self.cl[n - 1], self.cd[n - 1]);
        }
        // partition_point returns the first index with grid value > alpha
        let hi = self.alpha.partition_point(|&a| a <= alpha);
        let lo = hi - 1;
        let t = (alpha - self.alpha[lo]) / (self.alpha[hi] - self.alpha[lo]);
        (
            self.cl[lo] + t * (self.cl[hi] - self.cl[lo]),
            self.cd[lo] + t * (self.cd[hi] - self.cd[lo]),
        )
    }

    pub fn alpha_grid(&self) -> &[f64] {
        &self.alpha
    }
}
