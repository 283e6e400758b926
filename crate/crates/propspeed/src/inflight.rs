//! Identification of airspeed-model coefficients and horizontal wind from
//! GPS earth-frame velocity alone.
//!
//! Each gated sample contributes two scalar equations (north and east), with
//! the airspeed regressors projected through `cos(gamma) cos(psi)` /
//! `cos(gamma) sin(psi)` and the two wind components entering as constants.
//! The batch path solves the stacked system by SVD; the streaming path is a
//! standard exponentially-forgetting RLS over the same rows.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::lstsq;
use crate::models::{DirectCoefficients, IndirectCoefficients, PowerSample};

/// Condition-number threshold above which the batch solve is flagged.
pub const CONDITION_LIMIT: f64 = 1e10;
/// Cap on the RLS covariance diagonal; forgetting with uninformative rows
/// would otherwise grow it without bound.
pub const COVARIANCE_CAP: f64 = 1e12;

#[derive(Debug, Error)]
pub enum InflightError {
    #[error("rotational speed must be > 0, got {0}")]
    OmegaNotPositive(f64),
    #[error("non-finite value in GPS row")]
    NonFinite,
    #[error("batch needs at least {needed} samples for {unknowns} unknowns, got {got}")]
    TooFewSamples { needed: usize, unknowns: usize, got: usize },
    #[error("least squares: {0}")]
    Lstsq(#[from] lstsq::LstsqError),
    #[error("forgetting factor must lie in (0, 1], got {0}")]
    BadForgetting(f64),
    #[error("row width {got} does not match state dimension {expected}")]
    Dimension { expected: usize, got: usize },
}

/// One gated GPS sample: NED velocity plus the heading and flight path
/// angle used to project the airspeed model onto the horizontal plane.
#[derive(Debug, Clone, Copy)]
pub struct GpsRow {
    pub v_n: f64,
    pub v_e: f64,
    pub v_d: f64,
    /// Heading [rad].
    pub psi: f64,
    /// Flight path angle [rad].
    pub gamma: f64,
}

impl GpsRow {
    fn validate(&self) -> Result<(), InflightError> {
        let vals = [self.v_n, self.v_e, self.v_d, self.psi, self.gamma];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(InflightError::NonFinite);
        }
        Ok(())
    }
}

/// Constant horizontal wind estimate in NED; the vertical component is
/// fixed at zero by the model.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct WindEstimate {
    pub north: f64,
    pub east: f64,
}

/// Unknown layouts of the two model structures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    /// Unknowns `[beta1, beta2, V_wN, V_wE]`.
    Direct,
    /// Unknowns `[alpha0, alpha1, alpha2, V_wN, V_wE]`.
    Indirect,
}

impl ProblemKind {
    pub fn unknowns(&self) -> usize {
        match self {
            ProblemKind::Direct => 4,
            ProblemKind::Indirect => 5,
        }
    }
}

/// Two stacked regressor rows and their `(V_N, V_E)` targets for the direct
/// model. Row pattern: `[omega, P^2/omega^5] * cos(gamma) cos(psi), 1, 0`
/// for north and the `sin(psi)` analogue for east.
pub fn build_rows_direct(
    sample: &PowerSample,
    gps: &GpsRow,
) -> Result<([[f64; 4]; 2], [f64; 2]), InflightError> {
    if !(sample.omega > 0.0) {
        return Err(InflightError::OmegaNotPositive(sample.omega));
    }
    gps.validate()?;
    let x1 = sample.omega;
    let x2 = sample.power * sample.power / sample.omega.powi(5);
    let cn = gps.gamma.cos() * gps.psi.cos();
    let ce = gps.gamma.cos() * gps.psi.sin();
    Ok((
        [[x1 * cn, x2 * cn, 1.0, 0.0], [x1 * ce, x2 * ce, 0.0, 1.0]],
        [gps.v_n, gps.v_e],
    ))
}

/// Direct-model analogue for the indirect structure. The
/// `(omega / 2 pi) D` factor of the airspeed expression is folded into the
/// bracket so the unknowns are the model coefficients themselves.
pub fn build_rows_indirect(
    c_p: f64,
    omega: f64,
    diameter: f64,
    gps: &GpsRow,
) -> Result<([[f64; 5]; 2], [f64; 2]), InflightError> {
    if !(omega > 0.0) {
        return Err(InflightError::OmegaNotPositive(omega));
    }
    if !c_p.is_finite() {
        return Err(InflightError::NonFinite);
    }
    gps.validate()?;
    let tip = (omega / (2.0 * PI)) * diameter;
    let cn = gps.gamma.cos() * gps.psi.cos();
    let ce = gps.gamma.cos() * gps.psi.sin();
    let bracket = [tip, tip * c_p, tip * c_p.powi(4)];
    Ok((
        [
            [bracket[0] * cn, bracket[1] * cn, bracket[2] * cn, 1.0, 0.0],
            [bracket[0] * ce, bracket[1] * ce, bracket[2] * ce, 0.0, 1.0],
        ],
        [gps.v_n, gps.v_e],
    ))
}

/// Stacked identification problem: two rows per sample.
#[derive(Debug, Clone)]
pub struct BatchProblem {
    pub kind: ProblemKind,
    a: DMatrix<f64>,
    b: DVector<f64>,
}

impl BatchProblem {
    pub fn from_direct_samples(
        samples: &[(PowerSample, GpsRow)],
    ) -> Result<Self, InflightError> {
        let unknowns = ProblemKind::Direct.unknowns();
        let mut a = DMatrix::zeros(2 * samples.len(), unknowns);
        let mut b = DVector::zeros(2 * samples.len());
        for (i, (sample, gps)) in samples.iter().enumerate() {
            let (rows, targets) = build_rows_direct(sample, gps)?;
            for k in 0..2 {
                for j in 0..unknowns {
                    a[(2 * i + k, j)] = rows[k][j];
                }
                b[2 * i + k] = targets[k];
            }
        }
        Ok(Self { kind: ProblemKind::Direct, a, b })
    }

    /// Samples as `(C_P, omega, gps)`.
    pub fn from_indirect_samples(
        samples: &[(f64, f64, GpsRow)],
        diameter: f64,
    ) -> Result<Self, InflightError> {
        let unknowns = ProblemKind::Indirect.unknowns();
        let mut a = DMatrix::zeros(2 * samples.len(), unknowns);
        let mut b = DVector::zeros(2 * samples.len());
        for (i, (c_p, omega, gps)) in samples.iter().enumerate() {
            let (rows, targets) = build_rows_indirect(*c_p, *omega, diameter, gps)?;
            for k in 0..2 {
                for j in 0..unknowns {
                    a[(2 * i + k, j)] = rows[k][j];
                }
                b[2 * i + k] = targets[k];
            }
        }
        Ok(Self { kind: ProblemKind::Indirect, a, b })
    }

    pub fn rows(&self) -> usize {
        self.a.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn targets(&self) -> &DVector<f64> {
        &self.b
    }

    /// Iterate scalar rows for streaming use.
    pub fn scalar_rows(&self) -> impl Iterator<Item = (Vec<f64>, f64)> + '_ {
        (0..self.a.nrows()).map(move |i| {
            ((0..self.a.ncols()).map(|j| self.a[(i, j)]).collect(), self.b[i])
        })
    }
}

/// Identified coefficients of either model structure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IdentifiedCoefficients {
    Direct(DirectCoefficients),
    Indirect(IndirectCoefficients),
}

#[derive(Debug, Clone)]
pub struct BatchSolution {
    pub coefficients: IdentifiedCoefficients,
    pub wind: WindEstimate,
    /// RMS of the stacked residual [m/s].
    pub residual_rms: f64,
    /// Ratio of extreme singular values of the column-equilibrated matrix.
    pub condition: f64,
    /// True when `condition` exceeds [`CONDITION_LIMIT`]; the solution is
    /// still returned, callers decide whether to trust it.
    pub ill_conditioned: bool,
    pub theta: Vec<f64>,
}

/// Solve the stacked least-squares problem.
pub fn solve_batch(problem: &BatchProblem) -> Result<BatchSolution, InflightError> {
    let unknowns = problem.kind.unknowns();
    if problem.rows() < unknowns {
        return Err(InflightError::TooFewSamples {
            needed: unknowns.div_ceil(2),
            unknowns,
            got: problem.rows() / 2,
        });
    }
    let sol = lstsq::solve(&problem.a, &problem.b)?;
    let theta: Vec<f64> = sol.theta.iter().copied().collect();
    let (coefficients, wind) = split_theta(problem.kind, &theta);
    Ok(BatchSolution {
        coefficients,
        wind,
        residual_rms: sol.residual_rms,
        condition: sol.condition,
        ill_conditioned: !(sol.condition < CONDITION_LIMIT),
        theta,
    })
}

fn split_theta(kind: ProblemKind, theta: &[f64]) -> (IdentifiedCoefficients, WindEstimate) {
    match kind {
        ProblemKind::Direct => (
            IdentifiedCoefficients::Direct(DirectCoefficients {
                beta1: theta[0],
                beta2: theta[1],
            }),
            WindEstimate { north: theta[2], east: theta[3] },
        ),
        ProblemKind::Indirect => (
            IdentifiedCoefficients::Indirect(IndirectCoefficients {
                alpha0: theta[0],
                alpha1: theta[1],
                alpha2: theta[2],
            }),
            WindEstimate { north: theta[3], east: theta[4] },
        ),
    }
}

/// Exponentially-forgetting recursive least squares state.
#[derive(Debug, Clone)]
pub struct RlsState {
    pub theta: DVector<f64>,
    pub p_cov: DMatrix<f64>,
    pub lambda_f: f64,
}

impl RlsState {
    /// `theta0 = None` starts from zero; `prior_scale` sets `P0 = scale * I`.
    pub fn new(
        dim: usize,
        prior_scale: f64,
        lambda_f: f64,
        theta0: Option<&[f64]>,
    ) -> Result<Self, InflightError> {
        if !(lambda_f > 0.0 && lambda_f <= 1.0) {
            return Err(InflightError::BadForgetting(lambda_f));
        }
        let theta = match theta0 {
            Some(t) if t.len() != dim => {
                return Err(InflightError::Dimension { expected: dim, got: t.len() })
            }
            Some(t) => DVector::from_row_slice(t),
            None => DVector::zeros(dim),
        };
        Ok(Self {
            theta,
            p_cov: DMatrix::identity(dim, dim) * prior_scale,
            lambda_f,
        })
    }

    /// Apply one scalar measurement `x^T theta ~ y`.
    pub fn update_scalar(&mut self, x: &[f64], y: f64) -> Result<(), InflightError> {
        let dim = self.theta.len();
        if x.len() != dim {
            return Err(InflightError::Dimension { expected: dim, got: x.len() });
        }
        let x = DVector::from_row_slice(x);
        let px = &self.p_cov * &x;
        let denom = self.lambda_f + x.dot(&px);
        let gain = &px / denom;
        let innovation = y - x.dot(&self.theta);
        self.theta += &gain * innovation;
        self.p_cov = (&self.p_cov - &gain * px.transpose()) / self.lambda_f;
        // keep the covariance symmetric and bounded
        self.p_cov = (&self.p_cov + self.p_cov.transpose()) * 0.5;
        let max_diag = (0..dim).map(|i| self.p_cov[(i, i)]).fold(0.0, f64::max);
        if max_diag > COVARIANCE_CAP {
            self.p_cov *= COVARIANCE_CAP / max_diag;
        }
        Ok(())
    }
}

/// Feed one sample (two scalar rows) into the RLS state.
pub fn rls_update(
    state: &mut RlsState,
    rows: &[Vec<f64>],
    targets: &[f64],
) -> Result<(), InflightError> {
    for (x, &y) in rows.iter().zip(targets) {
        state.update_scalar(x, y)?;
    }
    Ok(())
}

/// One streaming pass over an assembled batch.
///
/// The raw Eq.-style rows mix regressors that differ by ~15 orders of
/// magnitude (`omega` vs `P^2/omega^5`), so a finite prior covariance is
/// effectively informative along the small-scale directions and the
/// textbook RLS/batch equivalence breaks down. The pass therefore runs in
/// the same column-equilibrated coordinates the batch solve uses and maps
/// the state back afterwards. `theta0` is given in original coordinates.
pub fn rls_one_pass(
    problem: &BatchProblem,
    lambda_f: f64,
    prior_scale: f64,
    theta0: Option<&[f64]>,
) -> Result<Vec<f64>, InflightError> {
    let dim = problem.kind.unknowns();
    let a = problem.matrix();
    let scales: Vec<f64> = (0..dim)
        .map(|j| {
            let norm = a.column(j).norm();
            if norm > 0.0 { norm } else { 1.0 }
        })
        .collect();

    let theta0_scaled: Option<Vec<f64>> = theta0.map(|t| {
        t.iter().zip(&scales).map(|(v, s)| v * s).collect()
    });
    let mut state = RlsState::new(dim, prior_scale, lambda_f, theta0_scaled.as_deref())?;
    let mut x_scaled = vec![0.0; dim];
    for (x, y) in problem.scalar_rows() {
        for j in 0..dim {
            x_scaled[j] = x[j] / scales[j];
        }
        state.update_scalar(&x_scaled, y)?;
    }
    Ok((0..dim).map(|j| state.theta[j] / scales[j]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn synthetic_direct(
        beta: DirectCoefficients,
        wind: WindEstimate,
        n: usize,
        psi_span: f64,
    ) -> Vec<(PowerSample, GpsRow)> {
        (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1).max(1) as f64;
                let psi = psi_span * t;
                let omega = 450.0 + 350.0 * (3.0 * t * std::f64::consts::PI).sin().powi(2);
                let power = 20.0 + 60.0 * t;
                let v_a = beta.beta1 * omega + beta.beta2 * power * power / omega.powi(5);
                let gamma = 0.0;
                (
                    PowerSample { power, omega, rho_a: None },
                    GpsRow {
                        v_n: v_a * psi.cos() + wind.north,
                        v_e: v_a * psi.sin() + wind.east,
                        v_d: 0.0,
                        psi,
                        gamma,
                    },
                )
            })
            .collect()
    }

    #[test]
    fn direct_rows_at_cardinal_headings() {
        let s = PowerSample { power: 50.0, omega: 500.0, rho_a: None };
        let x2 = 2500.0 / 500f64.powi(5);
        let g0 = GpsRow { v_n: 10.0, v_e: 0.0, v_d: 0.0, psi: 0.0, gamma: 0.0 };
        let (rows, targets) = build_rows_direct(&s, &g0).unwrap();
        assert_eq!(rows[0], [500.0, x2, 1.0, 0.0]);
        assert_eq!(rows[1], [0.0, 0.0, 0.0, 1.0]);
        assert_eq!(targets, [10.0, 0.0]);

        // east heading moves the airspeed regressors to the east row
        let g90 = GpsRow {
            v_n: 0.0,
            v_e: 10.0,
            v_d: 0.0,
            psi: std::f64::consts::FRAC_PI_2,
            gamma: 0.0,
        };
        let (rows, _) = build_rows_direct(&s, &g90).unwrap();
        assert!(rows[0][0].abs() < 1e-13);
        assert_relative_eq!(rows[1][0], 500.0, epsilon = 1e-10);
    }

    #[test]
    fn noiseless_direct_identification_is_exact() {
        let beta = DirectCoefficients { beta1: 2.6e-2, beta2: -8.0e11 };
        let wind = WindEstimate { north: 3.0, east: -1.5 };
        let samples = synthetic_direct(beta, wind, 240, 2.0 * std::f64::consts::PI);
        let problem = BatchProblem::from_direct_samples(&samples).unwrap();
        // assembled system is exactly consistent
        let theta_true =
            DVector::from_vec(vec![beta.beta1, beta.beta2, wind.north, wind.east]);
        let residual = problem.matrix() * theta_true - problem.targets();
        assert!(residual.norm() < 1e-9);

        let sol = solve_batch(&problem).unwrap();
        assert!(!sol.ill_conditioned, "condition = {}", sol.condition);
        match sol.coefficients {
            IdentifiedCoefficients::Direct(c) => {
                assert_relative_eq!(c.beta1, beta.beta1, max_relative = 1e-9);
                assert_relative_eq!(c.beta2, beta.beta2, max_relative = 1e-9);
            }
            _ => panic!("wrong kind"),
        }
        assert_relative_eq!(sol.wind.north, wind.north, max_relative = 1e-9);
        assert_relative_eq!(sol.wind.east, wind.east, max_relative = 1e-9);
    }

    #[test]
    fn zero_wind_is_recovered_as_zero() {
        let beta = DirectCoefficients { beta1: 2.6e-2, beta2: -8.0e11 };
        let samples = synthetic_direct(
            beta,
            WindEstimate { north: 0.0, east: 0.0 },
            160,
            2.0 * std::f64::consts::PI,
        );
        let sol = solve_batch(&BatchProblem::from_direct_samples(&samples).unwrap()).unwrap();
        assert!(sol.wind.north.abs() < 1e-9);
        assert!(sol.wind.east.abs() < 1e-9);
    }

    #[test]
    fn constant_offset_moves_into_the_wind_terms() {
        let beta = DirectCoefficients { beta1: 2.6e-2, beta2: -8.0e11 };
        let wind = WindEstimate { north: 1.0, east: 2.0 };
        let mut samples = synthetic_direct(beta, wind, 160, 2.0 * std::f64::consts::PI);
        for (_, gps) in &mut samples {
            gps.v_n += 4.0;
            gps.v_e -= 2.5;
        }
        let sol = solve_batch(&BatchProblem::from_direct_samples(&samples).unwrap()).unwrap();
        match sol.coefficients {
            IdentifiedCoefficients::Direct(c) => {
                assert_relative_eq!(c.beta1, beta.beta1, max_relative = 1e-9);
                assert_relative_eq!(c.beta2, beta.beta2, max_relative = 1e-9);
            }
            _ => panic!("wrong kind"),
        }
        assert_relative_eq!(sol.wind.north, 5.0, max_relative = 1e-9);
        assert_relative_eq!(sol.wind.east, -0.5, max_relative = 1e-9);
    }

    #[test]
    fn single_heading_cruise_is_flagged_ill_conditioned() {
        let beta = DirectCoefficients { beta1: 2.6e-2, beta2: -8.0e11 };
        let samples: Vec<(PowerSample, GpsRow)> = (0..100)
            .map(|_| {
                let omega: f64 = 600.0;
                let power = 40.0;
                let v_a = beta.beta1 * omega + beta.beta2 * power * power / omega.powi(5);
                (
                    PowerSample { power, omega, rho_a: None },
                    GpsRow { v_n: v_a + 2.0, v_e: 1.0, v_d: 0.0, psi: 0.0, gamma: 0.0 },
                )
            })
            .collect();
        let sol = solve_batch(&BatchProblem::from_direct_samples(&samples).unwrap()).unwrap();
        assert!(sol.ill_conditioned);
        assert!(sol.condition > CONDITION_LIMIT);
    }

    #[test]
    fn indirect_rows_fold_in_the_tip_speed_factor() {
        let gps = GpsRow { v_n: 8.0, v_e: 0.0, v_d: 0.0, psi: 0.0, gamma: 0.0 };
        let omega = 400.0;
        let d = 0.23;
        let c_p = 0.05;
        let (rows, _) = build_rows_indirect(c_p, omega, d, &gps).unwrap();
        let tip = omega / (2.0 * std::f64::consts::PI) * d;
        assert_relative_eq!(rows[0][0], tip, epsilon = 1e-12);
        assert_relative_eq!(rows[0][1], tip * c_p, epsilon = 1e-12);
        assert_relative_eq!(rows[0][2], tip * c_p.powi(4), epsilon = 1e-12);
        assert_eq!(rows[1][3], 0.0);
        assert_eq!(rows[1][4], 1.0);
    }

    #[test]
    fn noiseless_indirect_identification_is_exact() {
        let alpha = IndirectCoefficients { alpha0: 0.87, alpha1: -3.6, alpha2: -8.0e3 };
        let wind = WindEstimate { north: -2.0, east: 0.7 };
        let d = 0.23;
        let samples: Vec<(f64, f64, GpsRow)> = (0..200)
            .map(|i| {
                let t = i as f64 / 199.0;
                let psi = 2.0 * std::f64::consts::PI * t;
                let omega = 420.0 + 300.0 * t;
                let c_p = 0.01 + 0.06 * (1.0 - t);
                let tip = omega / (2.0 * std::f64::consts::PI) * d;
                let v_a =
                    tip * (alpha.alpha0 + alpha.alpha1 * c_p + alpha.alpha2 * c_p.powi(4));
                (
                    c_p,
                    omega,
                    GpsRow {
                        v_n: v_a * psi.cos() + wind.north,
                        v_e: v_a * psi.sin() + wind.east,
                        v_d: 0.0,
                        psi,
                        gamma: 0.0,
                    },
                )
            })
            .collect();
        let sol =
            solve_batch(&BatchProblem::from_indirect_samples(&samples, d).unwrap()).unwrap();
        match sol.coefficients {
            IdentifiedCoefficients::Indirect(c) => {
                assert_relative_eq!(c.alpha0, alpha.alpha0, max_relative = 1e-9);
                assert_relative_eq!(c.alpha1, alpha.alpha1, max_relative = 1e-9);
                assert_relative_eq!(c.alpha2, alpha.alpha2, max_relative = 1e-9);
            }
            _ => panic!("wrong kind"),
        }
        assert_relative_eq!(sol.wind.north, wind.north, max_relative = 1e-8);
        assert_relative_eq!(sol.wind.east, wind.east, max_relative = 1e-8);
    }

    #[test]
    fn rls_with_unit_forgetting_matches_batch() {
        let beta = DirectCoefficients { beta1: 2.6e-2, beta2: -8.0e11 };
        let wind = WindEstimate { north: 3.0, east: -1.5 };
        let samples = synthetic_direct(beta, wind, 200, 2.0 * std::f64::consts::PI);
        let problem = BatchProblem::from_direct_samples(&samples).unwrap();
        let batch = solve_batch(&problem).unwrap();

        let theta = rls_one_pass(&problem, 1.0, 1e8, None).unwrap();
        for j in 0..4 {
            let denom = batch.theta[j].abs().max(1e-12);
            assert!(
                (theta[j] - batch.theta[j]).abs() / denom < 1e-6,
                "theta[{j}]: rls {} vs batch {}",
                theta[j],
                batch.theta[j]
            );
        }
    }

    #[test]
    fn zero_information_row_leaves_theta_unchanged() {
        let mut state = RlsState::new(4, 1e8, 1.0, Some(&[1.0, 2.0, 3.0, 4.0])).unwrap();
        let before = state.theta.clone();
        state.update_scalar(&[0.0, 0.0, 0.0, 0.0], 123.0).unwrap();
        assert_eq!(state.theta, before);
    }

    #[test]
    fn covariance_stays_symmetric_and_bounded() {
        let mut state = RlsState::new(3, 1e8, 0.9, None).unwrap();
        for i in 0..500 {
            let x = [(i as f64 * 0.1).sin(), 1.0, (i as f64 * 0.05).cos()];
            state.update_scalar(&x, x[0] * 2.0 - x[2]).unwrap();
            // push windup with an uninformative row
            state.update_scalar(&[0.0, 0.0, 0.0], 0.0).unwrap();
        }
        for i in 0..3 {
            assert!(state.p_cov[(i, i)] <= COVARIANCE_CAP * (1.0 + 1e-12));
            for j in 0..3 {
                assert_eq!(state.p_cov[(i, j)], state.p_cov[(j, i)]);
            }
        }
    }

    #[test]
    fn forgetting_tracks_a_wind_step() {
        let beta = DirectCoefficients { beta1: 2.6e-2, beta2: -8.0e11 };
        let lambda_f = 0.995;
        // fixed equilibration scales from a representative batch
        let probe = BatchProblem::from_direct_samples(&synthetic_direct(
            beta,
            WindEstimate { north: 2.0, east: 0.0 },
            100,
            4.0 * std::f64::consts::PI,
        ))
        .unwrap();
        let scales: Vec<f64> = (0..4)
            .map(|j| probe.matrix().column(j).norm() / (probe.rows() as f64).sqrt())
            .collect();

        let mut state = RlsState::new(4, 1e8, lambda_f, None).unwrap();
        let feed = |wind: WindEstimate, n: usize, state: &mut RlsState| {
            let samples = synthetic_direct(beta, wind, n, 4.0 * std::f64::consts::PI);
            for (s, g) in &samples {
                let (rows, targets) = build_rows_direct(s, g).unwrap();
                for (row, &t) in rows.iter().zip(&targets) {
                    let x: Vec<f64> =
                        row.iter().zip(&scales).map(|(v, s)| v / s).collect();
                    state.update_scalar(&x, t).unwrap();
                }
            }
        };
        feed(WindEstimate { north: 2.0, east: 0.0 }, 800, &mut state);
        // step change in the true wind
        let settle = (3.0 / (1.0 - lambda_f)) as usize;
        feed(WindEstimate { north: -4.0, east: 1.0 }, settle, &mut state);
        let wind_n = state.theta[2] / scales[2];
        let wind_e = state.theta[3] / scales[3];
        assert!((wind_n + 4.0).abs() < 0.05 * 4.0, "north wind after step: {wind_n}");
        assert!((wind_e - 1.0).abs() < 0.05 * 4.0, "east wind after step: {wind_e}");
    }
}
