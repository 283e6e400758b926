//! Nondimensional propeller quantities, ESC power and pitot corrections, and
//! evaluation of the two closed-form airspeed models.
//!
//! Convention: `omega` is radians per second everywhere in code and files;
//! rpm and rev/s are converted at ingestion.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::regime::{self, CubicFit};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("rotational speed must be > 0, got {0}")]
    OmegaNotPositive(f64),
    #[error("diameter must be > 0, got {0}")]
    DiameterNotPositive(f64),
    #[error("density must be > 0, got {0}")]
    DensityNotPositive(f64),
    #[error("efficiency must lie in (0, 1], got {0}")]
    EfficiencyOutOfRange(f64),
    #[error("efficiency fit is degenerate: the reference cubic is ~0 at every flight point")]
    DegenerateFit,
    #[error("efficiency fit needs >= 4 distinct-J reference points and >= 1 flight point")]
    TooFewPoints,
    #[error("cubic fit failed: {0}")]
    Cubic(#[from] regime::RegimeError),
}

/// One propeller operating point.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PowerSample {
    /// Shaft power [W]; negative values indicate windmilling.
    pub power: f64,
    /// Rotational speed [rad/s], > 0.
    pub omega: f64,
    /// Air density [kg/m^3]; falls back to the environment default.
    pub rho_a: Option<f64>,
}

impl PowerSample {
    pub fn is_windmilling(&self) -> bool {
        self.power < 0.0
    }
}

/// Static vehicle/installation constants.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Environment {
    /// Propeller diameter [m].
    pub diameter: f64,
    /// Air density [kg/m^3].
    pub rho_a: f64,
    /// Lateral offset of the propeller from the longitudinal axis [m].
    pub lever_arm: f64,
}

impl Environment {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.diameter > 0.0) {
            return Err(ModelError::DiameterNotPositive(self.diameter));
        }
        if !(self.rho_a > 0.0) {
            return Err(ModelError::DensityNotPositive(self.rho_a));
        }
        Ok(())
    }
}

/// Raw ESC telemetry for one sample.
#[derive(Debug, Clone, Copy)]
pub struct EscFeedback {
    /// Bus voltage [V].
    pub voltage: f64,
    /// Bus current [A].
    pub current: f64,
    /// Rotational speed [rad/s].
    pub omega: f64,
}

/// Direct-model coefficients: `V_a = beta1 * omega + beta2 * P^2 / omega^5`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectCoefficients {
    pub beta1: f64,
    pub beta2: f64,
}

/// Indirect-model coefficients:
/// `V_a = (omega / 2 pi) D (alpha0 + alpha1 C_P + alpha2 C_P^4)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndirectCoefficients {
    pub alpha0: f64,
    pub alpha1: f64,
    pub alpha2: f64,
}

/// Electro-mechanical efficiency of the ESC-motor system together with the
/// reference cubic it was estimated against.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EfficiencyEstimate {
    pub eta: f64,
    /// Coefficients c0..c3 of the reference `C_P(J)` cubic.
    pub cubic: [f64; 4],
}

/// Airspeed model output. Negative raw values are clamped to zero and
/// flagged; the regime gate downstream decides validity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AirspeedEstimate {
    pub v_a: f64,
    pub clamped: bool,
}

/// Advance ratio `J = 2 pi V_a / (omega D)`.
pub fn advance_ratio(v_a: f64, omega: f64, diameter: f64) -> Result<f64, ModelError> {
    if !(omega > 0.0) {
        return Err(ModelError::OmegaNotPositive(omega));
    }
    if !(diameter > 0.0) {
        return Err(ModelError::DiameterNotPositive(diameter));
    }
    Ok(2.0 * PI * v_a / (omega * diameter))
}

/// Power coefficient `C_P = P / (rho (omega / 2 pi)^3 D^5)`.
pub fn power_coefficient(
    power: f64,
    omega: f64,
    rho_a: f64,
    diameter: f64,
) -> Result<f64, ModelError> {
    if !(omega > 0.0) {
        return Err(ModelError::OmegaNotPositive(omega));
    }
    if !(rho_a > 0.0) {
        return Err(ModelError::DensityNotPositive(rho_a));
    }
    if !(diameter > 0.0) {
        return Err(ModelError::DiameterNotPositive(diameter));
    }
    let n = omega / (2.0 * PI);
    Ok(power / (rho_a * n.powi(3) * diameter.powi(5)))
}

/// Electrical input power to the ESC-motor-propeller system, `P_in = V I`.
pub fn input_power(esc: &EscFeedback) -> f64 {
    esc.voltage * esc.current
}

/// Shaft power from input power, `P = eta * P_in`.
pub fn propeller_power(p_in: f64, eta: f64) -> Result<f64, ModelError> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(ModelError::EfficiencyOutOfRange(eta));
    }
    Ok(eta * p_in)
}

/// Freestream velocity at the (laterally offset) propeller from the pitot
/// measurement: `V_a = V_pitot - Omega_x * l`.
pub fn pitot_correction(v_pitot: f64, omega_x: f64, lever_arm: f64) -> f64 {
    v_pitot - omega_x * lever_arm
}

/// Evaluate the direct airspeed model.
pub fn eval_direct(c: &DirectCoefficients, s: &PowerSample) -> Result<AirspeedEstimate, ModelError> {
    if !(s.omega > 0.0) {
        return Err(ModelError::OmegaNotPositive(s.omega));
    }
    let raw = c.beta1 * s.omega + c.beta2 * s.power * s.power / s.omega.powi(5);
    Ok(clamp_estimate(raw))
}

/// Evaluate the indirect airspeed model at a power coefficient.
pub fn eval_indirect(
    c: &IndirectCoefficients,
    c_p: f64,
    omega: f64,
    diameter: f64,
) -> Result<AirspeedEstimate, ModelError> {
    if !(omega > 0.0) {
        return Err(ModelError::OmegaNotPositive(omega));
    }
    if !(diameter > 0.0) {
        return Err(ModelError::DiameterNotPositive(diameter));
    }
    let raw = (omega / (2.0 * PI)) * diameter * (c.alpha0 + c.alpha1 * c_p + c.alpha2 * c_p.powi(4));
    Ok(clamp_estimate(raw))
}

fn clamp_estimate(raw: f64) -> AirspeedEstimate {
    if raw < 0.0 {
        AirspeedEstimate { v_a: 0.0, clamped: true }
    } else {
        AirspeedEstimate { v_a: raw, clamped: false }
    }
}

/// Estimate the electro-mechanical efficiency by scaling a cubic fitted to
/// reference `(J, C_P)` data onto flight-side `(J, C_P_in)` data.
///
/// The scale `1/eta` minimizing `sum (C_P_in - cubic(J)/eta)^2` is the
/// closed-form ratio `sum(c y) / sum(c^2)` with `c = cubic(J_flight)`.
pub fn estimate_efficiency(
    bem_points: &[(f64, f64)],
    flight_points: &[(f64, f64)],
) -> Result<EfficiencyEstimate, ModelError> {
    if bem_points.len() < 4 || flight_points.is_empty() {
        return Err(ModelError::TooFewPoints);
    }
    let cubic = regime::fit_cubic(bem_points)?;
    scale_efficiency(&cubic, flight_points)
}

/// The scaling step of [`estimate_efficiency`], reusable when the cubic is
/// already available.
pub fn scale_efficiency(
    cubic: &CubicFit,
    flight_points: &[(f64, f64)],
) -> Result<EfficiencyEstimate, ModelError> {
    let mut num = 0.0;
    let mut den = 0.0;
    for &(j, cp_in) in flight_points {
        let c = cubic.eval(j);
        num += c * cp_in;
        den += c * c;
    }
    if den <= f64::EPSILON * flight_points.len() as f64 {
        return Err(ModelError::DegenerateFit);
    }
    let inv_eta = num / den;
    if !(inv_eta.is_finite() && inv_eta > 0.0) {
        return Err(ModelError::DegenerateFit);
    }
    Ok(EfficiencyEstimate {
        eta: 1.0 / inv_eta,
        cubic: cubic.c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn advance_ratio_definition() {
        assert_eq!(advance_ratio(0.0, 100.0, 0.25).unwrap(), 0.0);
        // V = 15 m/s, n = 100 rev/s, D = 0.25 m -> J = 0.6
        let j = advance_ratio(15.0, 200.0 * PI, 0.25).unwrap();
        assert_relative_eq!(j, 0.6, epsilon = 1e-14);
        assert!(advance_ratio(1.0, 0.0, 0.25).is_err());
        assert!(advance_ratio(1.0, -5.0, 0.25).is_err());
    }

    #[test]
    fn power_coefficient_is_linear_in_power() {
        let base = power_coefficient(40.0, 500.0, 1.225, 0.23).unwrap();
        let scaled = power_coefficient(120.0, 500.0, 1.225, 0.23).unwrap();
        assert_relative_eq!(scaled, 3.0 * base, epsilon = 1e-14);
        assert_eq!(power_coefficient(0.0, 500.0, 1.225, 0.23).unwrap(), 0.0);
        assert!(power_coefficient(1.0, -1.0, 1.225, 0.23).is_err());
    }

    #[test]
    fn input_and_propeller_power() {
        let esc = EscFeedback { voltage: 14.8, current: 10.0, omega: 500.0 };
        assert_eq!(input_power(&esc), 148.0);
        assert_eq!(input_power(&EscFeedback { voltage: 0.0, current: 9.0, omega: 1.0 }), 0.0);
        assert_eq!(propeller_power(100.0, 0.87).unwrap(), 87.0);
        assert_eq!(propeller_power(100.0, 1.0).unwrap(), 100.0);
        assert_eq!(propeller_power(0.0, 0.5).unwrap(), 0.0);
        assert!(propeller_power(100.0, 0.0).is_err());
        assert!(propeller_power(100.0, 1.2).is_err());
    }

    #[test]
    fn pitot_correction_sign() {
        assert_eq!(pitot_correction(15.0, 0.0, 0.24), 15.0);
        assert_relative_eq!(pitot_correction(15.0, 1.0, 0.24), 14.76);
        // positive roll rate reduces the corrected airspeed
        assert!(pitot_correction(15.0, 2.0, 0.24) < 15.0);
    }

    #[test]
    fn direct_model_reference_row() {
        // published coefficient fixture: beta1 = 2.74e-2, omega = 523.6 rad/s,
        // P = 0 gives the beta1 term alone
        let c = DirectCoefficients { beta1: 2.74e-2, beta2: -9.91e11 };
        let s = PowerSample { power: 0.0, omega: 523.6, rho_a: None };
        let est = eval_direct(&c, &s).unwrap();
        assert_relative_eq!(est.v_a, 2.74e-2 * 523.6, epsilon = 1e-12);
        assert_eq!((est.v_a * 100.0).round() / 100.0, 14.35);
        assert!(!est.clamped);
    }

    #[test]
    fn direct_model_clamps_negative_output() {
        let c = DirectCoefficients { beta1: 2.74e-2, beta2: -9.91e11 };
        let s = PowerSample { power: 500.0, omega: 300.0, rho_a: None };
        let est = eval_direct(&c, &s).unwrap();
        assert_eq!(est.v_a, 0.0);
        assert!(est.clamped);
    }

    #[test]
    fn indirect_model_structure() {
        let c = IndirectCoefficients { alpha0: 0.869, alpha1: -3.60, alpha2: -8.18e3 };
        let est = eval_indirect(&c, 0.0, 400.0, 0.23).unwrap();
        assert_relative_eq!(est.v_a, (400.0 / (2.0 * PI)) * 0.23 * 0.869, epsilon = 1e-12);
        // linear in omega at fixed C_P
        let one = eval_indirect(&c, 0.05, 300.0, 0.23).unwrap();
        let two = eval_indirect(&c, 0.05, 600.0, 0.23).unwrap();
        assert_relative_eq!(two.v_a, 2.0 * one.v_a, epsilon = 1e-12);
        assert!(eval_indirect(&c, 0.05, 0.0, 0.23).is_err());
    }

    #[test]
    fn efficiency_identity_when_datasets_match() {
        let cubic = CubicFit { c: [0.074, 0.043, -0.092, -0.059] };
        let pts: Vec<(f64, f64)> =
            (0..20).map(|i| { let j = 0.05 + i as f64 * 0.04; (j, cubic.eval(j)) }).collect();
        let est = estimate_efficiency(&pts, &pts).unwrap();
        assert_relative_eq!(est.eta, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn efficiency_inverts_synthetic_scaling() {
        let cubic = CubicFit { c: [0.074, 0.043, -0.092, -0.059] };
        let bem: Vec<(f64, f64)> =
            (0..25).map(|i| { let j = 0.05 + i as f64 * 0.03; (j, cubic.eval(j)) }).collect();
        let flight: Vec<(f64, f64)> =
            bem.iter().map(|&(j, cp)| (j, cp / 0.87)).collect();
        let est = estimate_efficiency(&bem, &flight).unwrap();
        assert_relative_eq!(est.eta, 0.87, epsilon = 1e-9);
    }

    #[test]
    fn efficiency_scaling_properties() {
        let cubic = CubicFit { c: [0.074, 0.043, -0.092, -0.059] };
        let bem: Vec<(f64, f64)> =
            (0..25).map(|i| { let j = 0.05 + i as f64 * 0.03; (j, cubic.eval(j)) }).collect();
        let flight: Vec<(f64, f64)> = bem.iter().map(|&(j, cp)| (j, cp / 0.9)).collect();
        let eta0 = estimate_efficiency(&bem, &flight).unwrap().eta;

        // uniform scaling of both sides leaves eta unchanged
        let bem_k: Vec<(f64, f64)> = bem.iter().map(|&(j, cp)| (j, 3.0 * cp)).collect();
        let flight_k: Vec<(f64, f64)> = flight.iter().map(|&(j, cp)| (j, 3.0 * cp)).collect();
        let eta_k = estimate_efficiency(&bem_k, &flight_k).unwrap().eta;
        assert_relative_eq!(eta_k, eta0, epsilon = 1e-9);

        // scaling only the flight side by k divides eta by k
        let flight_2k: Vec<(f64, f64)> = flight.iter().map(|&(j, cp)| (j, 2.0 * cp)).collect();
        let eta_2k = estimate_efficiency(&bem, &flight_2k).unwrap().eta;
        assert_relative_eq!(eta_2k, eta0 / 2.0, epsilon = 1e-9);
    }

    #[test]
    fn efficiency_degenerate_when_cubic_vanishes() {
        let bem: Vec<(f64, f64)> =
            vec![(0.0, 0.0), (0.1, 0.0), (0.2, 0.0), (0.3, 0.0), (0.4, 0.0)];
        let flight = vec![(0.15, 0.05)];
        assert!(matches!(
            estimate_efficiency(&bem, &flight),
            Err(ModelError::DegenerateFit)
        ));
    }
}
