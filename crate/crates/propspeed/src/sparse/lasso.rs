use thiserror::Error;

/// Convergence threshold on the largest coefficient change in one sweep.
pub const COEF_TOL: f64 = 1e-10;
/// Sweep cap for a single lambda.
pub const MAX_SWEEPS: usize = 100_000;

#[derive(Debug, Error)]
pub enum LassoError {
    #[error("design matrix or targets contain non-finite values")]
    NonFinite,
    #[error("lambda must be >= 0, got {0}")]
    NegativeLambda(f64),
    #[error("design and target lengths disagree: {x_rows} vs {y_rows}")]
    ShapeMismatch { x_rows: usize, y_rows: usize },
    #[error("warm start length {got} does not match feature count {expected}")]
    WarmStart { expected: usize, got: usize },
}

/// Column-standardized design with the statistics needed to map back.
#[derive(Debug, Clone)]
pub struct Standardized {
    /// Standardized columns (zero mean, unit population variance).
    pub columns: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// Centered targets.
    pub y: Vec<f64>,
    pub y_mean: f64,
}

/// Relative threshold below which a column counts as constant.
pub fn is_degenerate(mean: f64, std: f64) -> bool {
    std <= 1e-12 * mean.abs().max(1.0)
}

/// Standardize the given raw columns and center the target. Degenerate
/// columns must be filtered by the caller beforehand.
pub fn standardize(columns: &[Vec<f64>], y: &[f64]) -> Standardized {
    let n = y.len() as f64;
    let y_mean = y.iter().sum::<f64>() / n;
    let yc: Vec<f64> = y.iter().map(|v| v - y_mean).collect();

    let mut out_cols = Vec::with_capacity(columns.len());
    let mut means = Vec::with_capacity(columns.len());
    let mut stds = Vec::with_capacity(columns.len());
    for col in columns {
        let mean = col.iter().sum::<f64>() / n;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let std = var.sqrt();
        let std = if std > 0.0 { std } else { 1.0 };
        out_cols.push(col.iter().map(|v| (v - mean) / std).collect());
        means.push(mean);
        stds.push(std);
    }
    Standardized {
        columns: out_cols,
        mean: means,
        std: stds,
        y: yc,
        y_mean,
    }
}

fn soft_threshold(value: f64, threshold: f64) -> f64 {
    if value > threshold {
        value - threshold
    } else if value < -threshold {
        value + threshold
    } else {
        0.0
    }
}

/// Result of a coordinate-descent run, with the objective recorded after
/// every sweep so the monotone-descent property can be checked.
#[derive(Debug, Clone)]
pub struct CdTrace {
    pub weights: Vec<f64>,
    pub sweeps: usize,
    pub objectives: Vec<f64>,
}

/// Cyclic coordinate descent with soft thresholding for
/// `min_w 1/(2N) ||y - X w||^2 + lambda ||w||_1`.
///
/// `x` holds standardized columns (zero mean, unit population variance) and
/// `y` is centered; under that scaling each coordinate update is the
/// closed-form soft threshold. Stops when the largest coefficient change in
/// a sweep drops below [`COEF_TOL`] or after [`MAX_SWEEPS`].
pub fn lasso_coordinate_descent(
    x: &[Vec<f64>],
    y: &[f64],
    lambda: f64,
    warm: Option<&[f64]>,
) -> Result<Vec<f64>, LassoError> {
    Ok(lasso_cd_traced(x, y, lambda, warm)?.weights)
}

/// [`lasso_coordinate_descent`] with the per-sweep objective trace.
pub fn lasso_cd_traced(
    x: &[Vec<f64>],
    y: &[f64],
    lambda: f64,
    warm: Option<&[f64]>,
) -> Result<CdTrace, LassoError> {
    if lambda < 0.0 || !lambda.is_finite() {
        return Err(LassoError::NegativeLambda(lambda));
    }
    let n = y.len();
    let p = x.len();
    for col in x {
        if col.len() != n {
            return Err(LassoError::ShapeMismatch { x_rows: col.len(), y_rows: n });
        }
        if col.iter().any(|v| !v.is_finite()) {
            return Err(LassoError::NonFinite);
        }
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(LassoError::NonFinite);
    }

    let mut w = match warm {
        Some(w0) if w0.len() != p => {
            return Err(LassoError::WarmStart { expected: p, got: w0.len() })
        }
        Some(w0) => w0.to_vec(),
        None => vec![0.0; p],
    };

    // residual r = y - X w
    let mut r = y.to_vec();
    for (j, col) in x.iter().enumerate() {
        if w[j] != 0.0 {
            for (ri, xi) in r.iter_mut().zip(col) {
                *ri -= w[j] * xi;
            }
        }
    }

    let inv_n = 1.0 / n as f64;
    let mut objectives = Vec::new();
    let mut sweeps = 0;
    while sweeps < MAX_SWEEPS {
        sweeps += 1;
        let mut max_delta: f64 = 0.0;
        for (j, col) in x.iter().enumerate() {
            let w_old = w[j];
            // partial residual correlation; columns have unit variance
            let rho = col.iter().zip(&r).map(|(xi, ri)| xi * ri).sum::<f64>() * inv_n + w_old;
            let w_new = soft_threshold(rho, lambda);
            if w_new != w_old {
                let delta = w_old - w_new;
                for (ri, xi) in r.iter_mut().zip(col) {
                    *ri += delta * xi;
                }
                w[j] = w_new;
                max_delta = max_delta.max(delta.abs());
            }
        }
        let sq = r.iter().map(|v| v * v).sum::<f64>();
        let l1 = w.iter().map(|v| v.abs()).sum::<f64>();
        objectives.push(0.5 * inv_n * sq + lambda * l1);
        if max_delta < COEF_TOL {
            break;
        }
    }

    Ok(CdTrace { weights: w, sweeps, objectives })
}

/// Smallest lambda that zeroes every coefficient: `max_j |x_j^T y| / N`.
/// Uses the same arithmetic as the coordinate updates so the kill condition
/// holds bit-exactly at this value.
pub fn lambda_max(x: &[Vec<f64>], y: &[f64]) -> f64 {
    let inv_n = 1.0 / y.len() as f64;
    x.iter()
        .map(|col| (col.iter().zip(y).map(|(xi, yi)| xi * yi).sum::<f64>() * inv_n).abs())
        .fold(0.0, f64::max)
}

/// Log-spaced lambda grid from `lambda_max` down to
/// `lambda_max * min_ratio`, strictly decreasing.
pub fn lambda_grid(lambda_max: f64, count: usize, min_ratio: f64) -> Vec<f64> {
    assert!(count >= 2 && lambda_max > 0.0 && min_ratio > 0.0 && min_ratio < 1.0);
    let log_max = lambda_max.ln();
    let log_min = (lambda_max * min_ratio).ln();
    (0..count)
        .map(|i| (log_max + (log_min - log_max) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_problem(seed: u64, n: usize, p: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cols: Vec<Vec<f64>> = (0..p)
            .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        (cols, y)
    }

    #[test]
    fn lambda_at_or_above_max_kills_everything() {
        let (cols, y) = random_problem(7, 80, 12);
        let s = standardize(&cols, &y);
        let lmax = lambda_max(&s.columns, &s.y);
        let w = lasso_coordinate_descent(&s.columns, &s.y, lmax, None).unwrap();
        assert!(w.iter().all(|&v| v == 0.0));
        let w = lasso_coordinate_descent(&s.columns, &s.y, lmax * 1.5, None).unwrap();
        assert!(w.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn objective_never_increases_across_sweeps() {
        let (cols, y) = random_problem(11, 120, 18);
        let s = standardize(&cols, &y);
        let lmax = lambda_max(&s.columns, &s.y);
        for lam in [lmax * 0.5, lmax * 0.05, 0.0] {
            let trace = lasso_cd_traced(&s.columns, &s.y, lam, None).unwrap();
            for pair in trace.objectives.windows(2) {
                assert!(
                    pair[1] <= pair[0] + 1e-12 * pair[0].abs().max(1.0),
                    "objective rose from {} to {}",
                    pair[0],
                    pair[1]
                );
            }
        }
    }

    #[test]
    fn zero_lambda_matches_ols_oracle() {
        use nalgebra::{DMatrix, DVector};
        let (cols, y) = random_problem(3, 200, 25);
        let s = standardize(&cols, &y);
        let w = lasso_coordinate_descent(&s.columns, &s.y, 0.0, None).unwrap();

        // normal-equations oracle on the standardized problem
        let n = s.y.len();
        let a = DMatrix::from_fn(n, 25, |i, j| s.columns[j][i]);
        let b = DVector::from_vec(s.y.clone());
        let gram = a.transpose() * &a;
        let rhs = a.transpose() * b;
        let oracle = gram.lu().solve(&rhs).expect("well-posed random problem");

        for j in 0..25 {
            let denom = oracle[j].abs().max(1e-6);
            assert!(
                (w[j] - oracle[j]).abs() / denom < 1e-8,
                "coef {j}: cd {} vs ols {}",
                w[j],
                oracle[j]
            );
        }
    }

    #[test]
    fn kkt_conditions_hold_at_convergence() {
        let (cols, y) = random_problem(23, 150, 20);
        let s = standardize(&cols, &y);
        let lmax = lambda_max(&s.columns, &s.y);
        let lam = 0.3 * lmax;
        let w = lasso_coordinate_descent(&s.columns, &s.y, lam, None).unwrap();

        let n = s.y.len();
        let mut r = s.y.clone();
        for (j, col) in s.columns.iter().enumerate() {
            for (ri, xi) in r.iter_mut().zip(col) {
                *ri -= w[j] * xi;
            }
        }
        for (j, col) in s.columns.iter().enumerate() {
            let g = col.iter().zip(&r).map(|(xi, ri)| xi * ri).sum::<f64>() / n as f64;
            if w[j] == 0.0 {
                assert!(g.abs() <= lam + 1e-8, "inactive KKT violated at {j}: |g| = {}", g.abs());
            } else {
                assert!(
                    (g - lam * w[j].signum()).abs() <= 1e-8,
                    "active KKT violated at {j}: g = {g}, sign = {}",
                    w[j].signum()
                );
            }
        }
    }

    #[test]
    fn synthetic_sparse_signal_is_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = 300;
        let p = 25;
        let cols: Vec<Vec<f64>> = (0..p)
            .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0_f64)).collect())
            .collect();
        let y: Vec<f64> = (0..n)
            .map(|i| 3.0 * cols[1][i] - 2.0 * cols[5][i] + 1e-6 * rng.gen_range(-1.0..1.0))
            .collect();
        let s = standardize(&cols, &y);
        let lmax = lambda_max(&s.columns, &s.y);
        // walk the path; expect the true support to appear and stay
        let mut w = vec![0.0; p];
        let mut found = false;
        for lam in lambda_grid(lmax, 40, 1e-3) {
            w = lasso_coordinate_descent(&s.columns, &s.y, lam, Some(&w)).unwrap();
            let support: Vec<usize> =
                (0..p).filter(|&j| w[j].abs() > 1e-9).collect();
            if support == vec![1, 5] {
                found = true;
            }
        }
        assert!(found, "support {{1, 5}} never appeared along the path");
    }

    #[test]
    fn rejects_non_finite_input() {
        let cols = vec![vec![1.0, f64::NAN]];
        let y = vec![0.0, 1.0];
        assert!(matches!(
            lasso_coordinate_descent(&cols, &y, 0.1, None),
            Err(LassoError::NonFinite)
        ));
    }

    #[test]
    fn grid_is_strictly_decreasing() {
        let grid = lambda_grid(2.0, 100, 1e-4);
        assert_eq!(grid.len(), 100);
        assert!((grid[0] - 2.0).abs() < 1e-12);
        assert!((grid[99] - 2e-4).abs() < 1e-12);
        for pair in grid.windows(2) {
            assert!(pair[1] < pair[0]);
        }
    }
}
