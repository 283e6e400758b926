//! Operating-regime machinery: the monotonicity-based data selection
//! criterion (cubic `C_P(J)` fit, critical advance ratios) used when fitting
//! models, and the angle-of-attack / low-airspeed gate used at runtime when
//! the advance ratio cannot be evaluated directly.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lstsq;

#[derive(Debug, Error)]
pub enum RegimeError {
    #[error("cubic fit needs at least 4 distinct abscissae, got {0}")]
    RankDeficient(usize),
    #[error("non-finite value in fit input")]
    NonFinite,
    #[error("velocity vector has zero norm")]
    ZeroVelocity,
    #[error("gate threshold out of range: {0}")]
    BadGateConfig(String),
}

/// Cubic polynomial fit of the power coefficient against advance ratio,
/// `C_P(J) = c0 + c1 J + c2 J^2 + c3 J^3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubicFit {
    pub c: [f64; 4],
}

impl CubicFit {
    pub fn eval(&self, j: f64) -> f64 {
        self.c[0] + j * (self.c[1] + j * (self.c[2] + j * self.c[3]))
    }

    pub fn derivative(&self, j: f64) -> f64 {
        self.c[1] + j * (2.0 * self.c[2] + j * 3.0 * self.c[3])
    }
}

/// Least-squares cubic through `(J, C_P)` points.
pub fn fit_cubic(points: &[(f64, f64)]) -> Result<CubicFit, RegimeError> {
    if points.iter().any(|(j, cp)| !j.is_finite() || !cp.is_finite()) {
        return Err(RegimeError::NonFinite);
    }
    let mut distinct: Vec<f64> = points.iter().map(|p| p.0).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 4 {
        return Err(RegimeError::RankDeficient(distinct.len()));
    }

    let a = DMatrix::from_fn(points.len(), 4, |i, k| points[i].0.powi(k as i32));
    let b = DVector::from_fn(points.len(), |i, _| points[i].1);
    let sol = lstsq::solve(&a, &b).map_err(|_| RegimeError::RankDeficient(distinct.len()))?;
    Ok(CubicFit {
        c: [sol.theta[0], sol.theta[1], sol.theta[2], sol.theta[3]],
    })
}

/// Positive stationary points of a cubic `C_P(J)`, sorted ascending.
///
/// An empty list means the fitted curve is monotone over `J > 0` and the
/// whole positive axis is a single invertible branch.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CriticalPoints {
    pub j_crit: Vec<f64>,
}

impl CriticalPoints {
    pub fn forward_flight_threshold(&self) -> Option<f64> {
        self.j_crit.last().copied()
    }
}

/// Real positive roots of `dC_P/dJ = c1 + 2 c2 J + 3 c3 J^2`.
pub fn critical_points(fit: &CubicFit) -> CriticalPoints {
    let a = 3.0 * fit.c[3];
    let b = 2.0 * fit.c[2];
    let c = fit.c[1];

    let mut roots = Vec::new();
    if a == 0.0 {
        if b != 0.0 {
            roots.push(-c / b);
        }
        // a == b == 0: derivative is constant, no stationary point
    } else {
        let disc = b * b - 4.0 * a * c;
        if disc == 0.0 {
            roots.push(-b / (2.0 * a));
        } else if disc > 0.0 {
            // numerically stable quadratic roots
            let q = -0.5 * (b + b.signum() * disc.sqrt());
            let q = if q == 0.0 { -0.5 * b } else { q };
            roots.push(q / a);
            if q != 0.0 {
                roots.push(c / q);
            }
        }
    }

    let mut j_crit: Vec<f64> = roots.into_iter().filter(|r| *r > 0.0).collect();
    j_crit.sort_by(f64::total_cmp);
    j_crit.dedup();
    CriticalPoints { j_crit }
}

/// Forward-flight selection mask: true where `J` exceeds the largest
/// critical point. All-true when there is no critical point.
pub fn selection_mask(j_values: &[f64], crit: &CriticalPoints) -> Vec<bool> {
    match crit.forward_flight_threshold() {
        Some(th) => j_values.iter().map(|&j| j > th).collect(),
        None => vec![true; j_values.len()],
    }
}

/// Sign convention for the flight path angle.
///
/// `PaperLiteral` evaluates `gamma = asin(V_D / ||V||)` exactly as written
/// in the source formulation; `NedPhysical` flips the sign so a climb (
/// negative down-velocity in NED) gives a positive gamma.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GammaSign {
    #[default]
    PaperLiteral,
    NedPhysical,
}

/// Flight path angle from NED earth-frame velocity [rad].
pub fn flight_path_angle(v_ned: [f64; 3], sign: GammaSign) -> Result<f64, RegimeError> {
    let norm = (v_ned[0] * v_ned[0] + v_ned[1] * v_ned[1] + v_ned[2] * v_ned[2]).sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(RegimeError::ZeroVelocity);
    }
    let gamma = (v_ned[2] / norm).clamp(-1.0, 1.0).asin();
    Ok(match sign {
        GammaSign::PaperLiteral => gamma,
        GammaSign::NedPhysical => -gamma,
    })
}

/// Angle-of-attack estimate `alpha = theta - gamma` [rad].
pub fn angle_of_attack(theta: f64, v_ned: [f64; 3], sign: GammaSign) -> Result<f64, RegimeError> {
    Ok(theta - flight_path_angle(v_ned, sign)?)
}

/// Runtime gate thresholds. Angles are radians internally; the pipeline
/// config key `alpha_th_deg` converts at the boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateConfig {
    /// Angle-of-attack threshold [rad], in (0, pi/2).
    pub alpha_th: f64,
    /// Low-airspeed threshold [m/s], >= 0.
    pub v_min: f64,
}

impl GateConfig {
    pub fn new(alpha_th: f64, v_min: f64) -> Result<Self, RegimeError> {
        if !(alpha_th > 0.0 && alpha_th < std::f64::consts::FRAC_PI_2) {
            return Err(RegimeError::BadGateConfig(format!(
                "alpha_th must be in (0, pi/2) rad, got {alpha_th}"
            )));
        }
        if !(v_min >= 0.0 && v_min.is_finite()) {
            return Err(RegimeError::BadGateConfig(format!(
                "v_min must be finite and >= 0, got {v_min}"
            )));
        }
        Ok(Self { alpha_th, v_min })
    }
}

/// Deployment gate: accept a sample when the angle-of-attack magnitude is
/// below the threshold and the airspeed estimate is above the low-speed
/// floor.
pub fn gate(alpha: f64, v_hat: f64, cfg: &GateConfig) -> bool {
    alpha.abs() < cfg.alpha_th && v_hat > cfg.v_min
}

/// One attitude + GPS velocity sample, as used by the gating pipeline.
#[derive(Debug, Clone, Copy)]
pub struct AttitudeSample {
    /// Pitch [rad].
    pub theta: f64,
    /// Heading / yaw [rad].
    pub psi: f64,
    /// NED earth-frame velocity [m/s].
    pub v_ned: [f64; 3],
}

/// The reference cubic coefficients reported for the original vehicle, kept
/// as a validation fixture. The bundled sample propeller produces its own
/// fit; these constants are only asserted against in tests.
pub const REFERENCE_CUBIC: CubicFit = CubicFit {
    c: [0.074, 0.043, -0.092, -0.059],
};
