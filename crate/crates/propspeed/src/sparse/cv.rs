use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::lasso::{self, is_degenerate, lasso_coordinate_descent, standardize, LassoError};

#[derive(Debug, Error)]
pub enum CvError {
    #[error("need 2 <= k <= N, got k = {k} with N = {n}")]
    BadFoldCount { k: usize, n: usize },
    #[error("lambda grid must be non-empty and strictly decreasing")]
    BadLambdaGrid,
    #[error("design has no usable (non-degenerate) columns")]
    AllDegenerate,
    #[error("column {0} length does not match the target length")]
    ShapeMismatch(usize),
    #[error(transparent)]
    Lasso(#[from] LassoError),
}

/// Raw (unstandardized) design: named feature columns plus the optional
/// constant-feature name that maps to the intercept.
#[derive(Debug, Clone)]
pub struct Design {
    pub columns: Vec<Vec<f64>>,
    pub names: Vec<String>,
    pub constant_name: Option<String>,
}

/// Regularization path with cross-validation statistics.
///
/// `coefs[i]` holds the standardized coefficients of the full-data fit at
/// `lambdas[i]` over the kept (non-degenerate) columns. The raw design and
/// targets are retained so model selection can refit without shrinkage.
#[derive(Debug, Clone)]
pub struct LassoPath {
    pub lambdas: Vec<f64>,
    pub coefs: Vec<Vec<f64>>,
    pub cv_mean: Vec<f64>,
    pub cv_se: Vec<f64>,
    /// Names of zero-variance columns dropped before standardization.
    pub dropped: Vec<String>,
    pub(crate) kept_names: Vec<String>,
    pub(crate) kept_columns: Vec<Vec<f64>>,
    pub(crate) y: Vec<f64>,
    pub(crate) constant_name: Option<String>,
}

/// Deterministic shuffled fold assignment.
fn fold_assignment(n: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut fold = vec![0usize; n];
    for (pos, &idx) in order.iter().enumerate() {
        fold[idx] = pos % k;
    }
    fold
}

/// Fit the regularization path with k-fold cross-validation.
///
/// Fold standardization uses fold-train statistics only; the held-out error
/// is evaluated in the original target space. The full-data path is fitted
/// once with warm starts from large to small lambda.
pub fn cv_lasso(
    design: &Design,
    y: &[f64],
    k: usize,
    lambdas: &[f64],
    seed: u64,
) -> Result<LassoPath, CvError> {
    let n = y.len();
    if k < 2 || k > n {
        return Err(CvError::BadFoldCount { k, n });
    }
    if lambdas.is_empty() || lambdas.windows(2).any(|p| p[1] >= p[0]) {
        return Err(CvError::BadLambdaGrid);
    }
    for (j, col) in design.columns.iter().enumerate() {
        if col.len() != n {
            return Err(CvError::ShapeMismatch(j));
        }
    }

    // drop zero-variance columns once, on the full data
    let mut kept_idx = Vec::new();
    let mut dropped = Vec::new();
    for (j, col) in design.columns.iter().enumerate() {
        let mean = col.iter().sum::<f64>() / n as f64;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        if is_degenerate(mean, var.sqrt()) {
            dropped.push(design.names[j].clone());
        } else {
            kept_idx.push(j);
        }
    }
    if kept_idx.is_empty() {
        return Err(CvError::AllDegenerate);
    }
    if !dropped.is_empty() {
        let visible: Vec<&String> = dropped
            .iter()
            .filter(|name| Some(name.as_str()) != design.constant_name.as_deref())
            .collect();
        if !visible.is_empty() {
            eprintln!("warning: dropping zero-variance feature columns {visible:?}");
        }
    }
    let kept_columns: Vec<Vec<f64>> =
        kept_idx.iter().map(|&j| design.columns[j].clone()).collect();
    let kept_names: Vec<String> =
        kept_idx.iter().map(|&j| design.names[j].clone()).collect();

    // cross-validated error per lambda
    let fold_of = fold_assignment(n, k, seed);
    let mut fold_mse = vec![vec![0.0f64; lambdas.len()]; k];
    for fold in 0..k {
        let train: Vec<usize> = (0..n).filter(|&i| fold_of[i] != fold).collect();
        let test: Vec<usize> = (0..n).filter(|&i| fold_of[i] == fold).collect();

        let train_cols: Vec<Vec<f64>> = kept_columns
            .iter()
            .map(|col| train.iter().map(|&i| col[i]).collect())
            .collect();
        let train_y: Vec<f64> = train.iter().map(|&i| y[i]).collect();
        let st = standardize(&train_cols, &train_y);

        let mut w = vec![0.0; st.columns.len()];
        for (li, &lam) in lambdas.iter().enumerate() {
            w = lasso_coordinate_descent(&st.columns, &st.y, lam, Some(&w))?;
            let mut sq = 0.0;
            for &i in &test {
                let mut pred = st.y_mean;
                for (j, col) in kept_columns.iter().enumerate() {
                    pred += w[j] * (col[i] - st.mean[j]) / st.std[j];
                }
                let e = y[i] - pred;
                sq += e * e;
            }
            fold_mse[fold][li] = sq / test.len() as f64;
        }
    }

    let mut cv_mean = vec![0.0; lambdas.len()];
    let mut cv_se = vec![0.0; lambdas.len()];
    for li in 0..lambdas.len() {
        let mean = (0..k).map(|f| fold_mse[f][li]).sum::<f64>() / k as f64;
        let var = (0..k)
            .map(|f| (fold_mse[f][li] - mean).powi(2))
            .sum::<f64>()
            / (k - 1) as f64;
        cv_mean[li] = mean;
        cv_se[li] = (var / k as f64).sqrt();
    }

    // full-data path, warm started
    let full = standardize(&kept_columns, y);
    let mut coefs = Vec::with_capacity(lambdas.len());
    let mut w = vec![0.0; full.columns.len()];
    for &lam in lambdas {
        w = lasso_coordinate_descent(&full.columns, &full.y, lam, Some(&w))?;
        coefs.push(w.clone());
    }

    Ok(LassoPath {
        lambdas: lambdas.to_vec(),
        coefs,
        cv_mean,
        cv_se,
        dropped,
        kept_names,
        kept_columns,
        y: y.to_vec(),
        constant_name: design.constant_name.clone(),
    })
}

/// Default grid for a raw design: 100 log-spaced values from the data-driven
/// `lambda_max` down to `1e-4 * lambda_max`.
pub fn default_lambda_grid(
    design: &Design,
    y: &[f64],
    count: usize,
    min_ratio: f64,
) -> Result<Vec<f64>, CvError> {
    let n = y.len();
    let mut kept = Vec::new();
    for col in &design.columns {
        if col.len() != n {
            return Err(CvError::ShapeMismatch(0));
        }
        let mean = col.iter().sum::<f64>() / n as f64;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        if !is_degenerate(mean, var.sqrt()) {
            kept.push(col.clone());
        }
    }
    if kept.is_empty() {
        return Err(CvError::AllDegenerate);
    }
    let st = standardize(&kept, y);
    let lmax = lasso::lambda_max(&st.columns, &st.y);
    if lmax <= 0.0 {
        return Err(CvError::AllDegenerate);
    }
    Ok(lasso::lambda_grid(lmax, count, min_ratio))
}
