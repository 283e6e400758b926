//! Dense linear least squares on top of an SVD, shared by the cubic fits,
//! the debiasing refit and the GPS identification solve.
//!
//! Columns are scaled to unit norm before the decomposition so the reported
//! condition number reflects the geometry of the problem rather than the raw
//! units, which span many orders of magnitude here (`omega` vs
//! `P^2/omega^5`).

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LstsqError {
    #[error("need rows >= columns, got {rows} x {cols}")]
    Underdetermined { rows: usize, cols: usize },
    #[error("non-finite entry in the design matrix or targets")]
    NonFinite,
    #[error("svd failed to converge")]
    Svd,
}

#[derive(Debug, Clone)]
pub struct LstsqSolution {
    pub theta: DVector<f64>,
    /// Ratio of extreme singular values of the column-equilibrated matrix;
    /// `f64::INFINITY` when the matrix is numerically rank deficient.
    pub condition: f64,
    /// Root-mean-square residual over the rows.
    pub residual_rms: f64,
}

/// Minimize `||A theta - b||_2`.
///
/// Singular values below `sigma_max * 1e-14` are treated as zero, giving the
/// minimum-norm solution for rank-deficient systems; the caller decides what
/// to do with the condition diagnostic.
pub fn solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<LstsqSolution, LstsqError> {
    let (rows, cols) = a.shape();
    if rows < cols {
        return Err(LstsqError::Underdetermined { rows, cols });
    }
    if a.iter().any(|v| !v.is_finite()) || b.iter().any(|v| !v.is_finite()) {
        return Err(LstsqError::NonFinite);
    }

    let mut scale = DVector::from_element(cols, 1.0);
    let mut scaled = a.clone();
    for j in 0..cols {
        let norm = scaled.column(j).norm();
        if norm > 0.0 {
            scale[j] = norm;
            let mut col = scaled.column_mut(j);
            col /= norm;
        }
    }

    let svd = scaled.svd(true, true);
    let sigma_max = svd.singular_values.max();
    let sigma_min = svd.singular_values.min();
    let condition = if sigma_min > 0.0 {
        sigma_max / sigma_min
    } else {
        f64::INFINITY
    };

    let eps = sigma_max * 1e-14;
    let scaled_theta = svd.solve(b, eps).map_err(|_| LstsqError::Svd)?;
    let theta = DVector::from_fn(cols, |j, _| scaled_theta[j] / scale[j]);

    let residual = a * &theta - b;
    let residual_rms = (residual.norm_squared() / rows as f64).sqrt();
    Ok(LstsqSolution {
        theta,
        condition,
        residual_rms,
    })
}
