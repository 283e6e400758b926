use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::cv::LassoPath;
use crate::lstsq;

#[derive(Debug, Error)]
pub enum SelectError {
    #[error("path is empty")]
    EmptyPath,
    #[error("no lambda on the path yields a non-empty support")]
    NoSupport,
    #[error("debias refit failed: {0}")]
    Refit(#[from] lstsq::LstsqError),
}

/// The model chosen from a regularization path: sparse support, unshrunk
/// coefficients and the selection diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectedModel {
    /// Names of features with nonzero coefficients. When the library
    /// declares a constant feature it appears here and carries the
    /// intercept value.
    pub support: Vec<String>,
    /// Coefficients in original (unstandardized) space, aligned with
    /// `support`.
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub lambda_selected: f64,
    pub cv_error: f64,
}

impl SelectedModel {
    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.support
            .iter()
            .position(|n| n == name)
            .map(|i| self.coefficients[i])
    }
}

/// Pick a lambda by the one-standard-error rule and refit without penalty.
///
/// The rule: take the largest lambda whose cross-validated error is within
/// one standard error of the minimum. If the support is empty there, walk
/// toward smaller lambdas until it is not. The selected support is then
/// refit by unpenalized least squares on the raw columns (with an intercept
/// column exactly when the library declared a constant feature), removing
/// the shrinkage bias of the L1 penalty.
pub fn select_lambda(path: &LassoPath) -> Result<SelectedModel, SelectError> {
    if path.lambdas.is_empty() {
        return Err(SelectError::EmptyPath);
    }
    let i_min = (0..path.cv_mean.len())
        .min_by(|&a, &b| path.cv_mean[a].total_cmp(&path.cv_mean[b]))
        .expect("non-empty path");
    let threshold = path.cv_mean[i_min] + path.cv_se[i_min];

    // lambdas are strictly decreasing, so the first index within the
    // threshold is the sparsest qualifying model
    let mut i_sel = (0..path.lambdas.len())
        .find(|&i| path.cv_mean[i] <= threshold)
        .expect("the minimizer itself qualifies");
    while i_sel < path.lambdas.len() && path.coefs[i_sel].iter().all(|&w| w == 0.0) {
        i_sel += 1;
    }
    if i_sel >= path.lambdas.len() {
        return Err(SelectError::NoSupport);
    }

    let active: Vec<usize> = (0..path.kept_names.len())
        .filter(|&j| path.coefs[i_sel][j] != 0.0)
        .collect();

    // unpenalized refit on the active raw columns
    let n = path.y.len();
    let with_intercept = path.constant_name.is_some();
    let extra = usize::from(with_intercept);
    let a = DMatrix::from_fn(n, active.len() + extra, |i, j| {
        if with_intercept && j == 0 {
            1.0
        } else {
            path.kept_columns[active[j - extra]][i]
        }
    });
    let b = DVector::from_vec(path.y.clone());
    let sol = lstsq::solve(&a, &b)?;

    let mut support = Vec::with_capacity(active.len() + extra);
    let mut coefficients = Vec::with_capacity(active.len() + extra);
    let intercept = if with_intercept {
        support.push(path.constant_name.clone().expect("checked"));
        coefficients.push(sol.theta[0]);
        sol.theta[0]
    } else {
        0.0
    };
    for (slot, &j) in active.iter().enumerate() {
        support.push(path.kept_names[j].clone());
        coefficients.push(sol.theta[slot + extra]);
    }

    Ok(SelectedModel {
        support,
        coefficients,
        intercept,
        lambda_selected: path.lambdas[i_sel],
        cv_error: path.cv_mean[i_sel],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::cv::{cv_lasso, default_lambda_grid, Design};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn one_se_rule_prefers_the_sparse_end() {
        // y depends on exactly two of many noise features; the 1-SE rule
        // should land on a lambda whose support is that pair, and the refit
        // should recover the unshrunk coefficients
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 400;
        let p = 12;
        let columns: Vec<Vec<f64>> = (0..p)
            .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let y: Vec<f64> = (0..n)
            .map(|i| 2.0 * columns[2][i] - 1.5 * columns[7][i] + 0.01 * rng.gen_range(-1.0..1.0))
            .collect();
        let names = (0..p).map(|j| format!("f{j}")).collect();
        let design = Design { columns, names, constant_name: None };
        let grid = default_lambda_grid(&design, &y, 60, 1e-4).unwrap();
        let path = cv_lasso(&design, &y, 10, &grid, 5).unwrap();
        let model = select_lambda(&path).unwrap();
        assert_eq!(model.support, vec!["f2".to_string(), "f7".to_string()]);
        assert!((model.coefficient("f2").unwrap() - 2.0).abs() < 1e-2);
        assert!((model.coefficient("f7").unwrap() + 1.5).abs() < 1e-2);
        assert_eq!(model.intercept, 0.0);
    }

    #[test]
    fn constant_feature_is_reported_as_intercept() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 300;
        let x1: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x2: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..n)
            .map(|i| 0.8 + 3.0 * x1[i] + 0.001 * rng.gen_range(-1.0..1.0))
            .collect();
        let design = Design {
            columns: vec![vec![1.0; n], x1, x2],
            names: vec!["c0".into(), "c1".into(), "c2".into()],
            constant_name: Some("c0".into()),
        };
        let grid = default_lambda_grid(&design, &y, 50, 1e-4).unwrap();
        let path = cv_lasso(&design, &y, 10, &grid, 6).unwrap();
        assert_eq!(path.dropped, vec!["c0".to_string()]);
        let model = select_lambda(&path).unwrap();
        assert_eq!(model.support, vec!["c0".to_string(), "c1".to_string()]);
        assert!((model.intercept - 0.8).abs() < 1e-2);
        assert_eq!(model.coefficient("c0").unwrap(), model.intercept);
        assert!((model.coefficient("c1").unwrap() - 3.0).abs() < 1e-2);
    }
}
