use std::f64::consts::{FRAC_PI_2, PI};

use thiserror::Error;

use super::geometry::BladeGeometry;
use super::polar::AirfoilPolar;

/// Lower end of the inflow-angle search interval [rad].
pub const PHI_MIN: f64 = 1e-6;
/// Residual magnitude required for a section to count as converged.
pub const RESIDUAL_TOL: f64 = 1e-8;
/// Bisection iteration cap.
pub const MAX_ITER: usize = 200;
/// Floor applied to the combined Prandtl loss factor.
pub const LOSS_FLOOR: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum SectionError {
    #[error(
        "no sign change of the inflow-angle residual on ({PHI_MIN}, pi/2] \
         (V_a = {v_a} m/s, omega = {omega} rad/s, r = {r} m)"
    )]
    NoBracket { v_a: f64, omega: f64, r: f64 },
    #[error("residual {residual} above tolerance after {MAX_ITER} bisection steps")]
    ToleranceNotReached { residual: f64 },
    #[error("radius {r} outside blade span ({hub}, {tip})")]
    RadiusOutOfSpan { r: f64, hub: f64, tip: f64 },
}

/// Axial operating point of the rotor.
#[derive(Debug, Clone, Copy)]
pub struct FlowCondition {
    /// Freestream axial velocity [m/s], >= 0.
    pub v_a: f64,
    /// Rotational speed [rad/s], > 0.
    pub omega: f64,
    /// Air density [kg/m^3], > 0.
    pub rho_a: f64,
}

impl FlowCondition {
    pub fn new(v_a: f64, omega: f64, rho_a: f64) -> Result<Self, FlowError> {
        if !(v_a.is_finite() && v_a >= 0.0) {
            return Err(FlowError::Freestream(v_a));
        }
        if !(omega.is_finite() && omega > 0.0) {
            return Err(FlowError::Omega(omega));
        }
        if !(rho_a.is_finite() && rho_a > 0.0) {
            return Err(FlowError::Density(rho_a));
        }
        Ok(Self { v_a, omega, rho_a })
    }
}

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("freestream velocity must be finite and >= 0, got {0}")]
    Freestream(f64),
    #[error("rotational speed must be finite and > 0, got {0}")]
    Omega(f64),
    #[error("air density must be finite and > 0, got {0}")]
    Density(f64),
}

/// Converged state of a single blade section.
///
/// Loads are per blade and per unit span; the rotor integration multiplies
/// by the blade count. Induction factors follow the sign convention of the
/// residual below, so both come out negative for a thrusting propeller.
#[derive(Debug, Clone, Copy)]
pub struct SectionSolution {
    /// Inflow angle [rad], in (0, pi/2].
    pub phi: f64,
    /// Axial induction factor.
    pub a: f64,
    /// Tangential induction factor.
    pub a_prime: f64,
    /// Local relative flow speed [m/s].
    pub w: f64,
    /// Thrust per unit span, single blade [N/m].
    pub d_thrust: f64,
    /// Torque per unit span, single blade [N*m/m].
    pub d_torque: f64,
}

/// Geometric and aerodynamic terms of the residual at one inflow angle.
struct SectionTerms {
    kappa: f64,
    kappa_prime: f64,
    /// (1 + kappa') * cos(phi), computed without dividing by cos(phi).
    denom: f64,
    cn: f64,
    ct: f64,
}

fn section_terms(
    geom: &BladeGeometry,
    polar: &AirfoilPolar,
    r: f64,
    chord: f64,
    twist: f64,
    phi: f64,
) -> SectionTerms {
    let b = geom.blade_count() as f64;
    let sigma = b * chord / (2.0 * PI * r);
    let (sin_phi, cos_phi) = phi.sin_cos();

    let alpha = twist - phi;
    let (cl, cd) = polar.lift_drag(alpha);
    // axial (thrust) and tangential (torque) force coefficients
    let cn = cl * cos_phi - cd * sin_phi;
    let ct = cl * sin_phi + cd * cos_phi;

    // Prandtl tip and hub loss
    let f_tip = 0.5 * b * (geom.tip_radius() - r) / (r * sin_phi);
    let f_hub = 0.5 * b * (r - geom.hub_radius()) / (geom.hub_radius() * sin_phi);
    let loss = ((2.0 / PI) * (-f_tip).exp().acos()) * ((2.0 / PI) * (-f_hub).exp().acos());
    let loss = loss.max(LOSS_FLOOR);

    let kappa = sigma * cn / (4.0 * loss * sin_phi * sin_phi);
    let half = sigma * ct / (4.0 * loss * sin_phi);
    SectionTerms {
        kappa,
        kappa_prime: half / cos_phi,
        denom: cos_phi + half,
        cn,
        ct,
    }
}

/// Inflow-angle residual of the single-equation BEM formulation:
///
/// ```text
/// R(phi) = sin(phi) / (1 - a(phi)) - (V_a / (omega r)) * cos(phi) / (1 + a'(phi))
/// ```
///
/// with the induction factors eliminated through the momentum/blade-element
/// match, which reduces the expression to
/// `(1 - kappa) sin(phi) - (V_a/(omega r)) ((1 + kappa') cos(phi))`.
pub fn ning_residual(
    geom: &BladeGeometry,
    polar: &AirfoilPolar,
    flow: &FlowCondition,
    r: f64,
    phi: f64,
) -> f64 {
    let (chord, twist) = geom.section_at(r);
    let t = section_terms(geom, polar, r, chord, twist, phi);
    (1.0 - t.kappa) * phi.sin() - (flow.v_a / (flow.omega * r)) * t.denom
}

/// Solve one blade section by bisection on the inflow angle.
///
/// Converges to `|R(phi)| <= 1e-8`; returns `NoBracket` when the residual
/// does not change sign on `(1e-6, pi/2]`, which happens in the windmill /
/// low-rotation-speed corner of a sweep.
pub fn solve_section(
    geom: &BladeGeometry,
    polar: &AirfoilPolar,
    flow: &FlowCondition,
    r: f64,
) -> Result<SectionSolution, SectionError> {
    if r <= geom.hub_radius() || r >= geom.tip_radius() {
        return Err(SectionError::RadiusOutOfSpan {
            r,
            hub: geom.hub_radius(),
            tip: geom.tip_radius(),
        });
    }
    let (chord, twist) = geom.section_at(r);
    let residual = |phi: f64| {
        let t = section_terms(geom, polar, r, chord, twist, phi);
        (1.0 - t.kappa) * phi.sin() - (flow.v_a / (flow.omega * r)) * t.denom
    };

    let mut lo = PHI_MIN;
    let mut hi = FRAC_PI_2;
    let mut r_lo = residual(lo);
    let r_hi = residual(hi);

    let (mut phi, mut r_phi) = if r_lo.abs() <= RESIDUAL_TOL {
        (lo, r_lo)
    } else if r_hi.abs() <= RESIDUAL_TOL {
        (hi, r_hi)
    } else {
        if r_lo.signum() == r_hi.signum() {
            return Err(SectionError::NoBracket {
                v_a: flow.v_a,
                omega: flow.omega,
                r,
            });
        }
        let mut mid = 0.5 * (lo + hi);
        let mut r_mid = residual(mid);
        let mut iter = 0;
        while r_mid.abs() > RESIDUAL_TOL && iter < MAX_ITER {
            if r_mid.signum() == r_lo.signum() {
                lo = mid;
                r_lo = r_mid;
            } else {
                hi = mid;
            }
            mid = 0.5 * (lo + hi);
            r_mid = residual(mid);
            iter += 1;
        }
        (mid, r_mid)
    };

    if r_phi.abs() > RESIDUAL_TOL {
        // interval exhausted without meeting the tolerance
        if residual(hi).abs() < r_phi.abs() {
            phi = hi;
            r_phi = residual(hi);
        }
        if r_phi.abs() > RESIDUAL_TOL {
            return Err(SectionError::ToleranceNotReached { residual: r_phi });
        }
    }

    let t = section_terms(geom, polar, r, chord, twist, phi);
    // Velocity triangle at the converged angle. Using the combined
    // denominator keeps the static (V_a = 0) case finite, where the
    // axial induction factor itself diverges.
    let v_tan = flow.omega * r * phi.cos() / t.denom;
    let v_ax = flow.omega * r * phi.sin() / t.denom;
    let w = v_ax.hypot(v_tan);
    let q = 0.5 * flow.rho_a * w * w * chord;

    Ok(SectionSolution {
        phi,
        a: -t.kappa / (1.0 - t.kappa),
        a_prime: -t.kappa_prime / (1.0 + t.kappa_prime),
        w,
        d_thrust: q * t.cn,
        d_torque: q * t.ct * r,
    })
}
