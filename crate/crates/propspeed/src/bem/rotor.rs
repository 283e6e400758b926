use std::f64::consts::PI;
use std::path::Path;

use thiserror::Error;

use super::geometry::BladeGeometry;
use super::polar::AirfoilPolar;
use super::section::{solve_section, FlowCondition};

/// Integrated rotor loads and their nondimensional form.
#[derive(Debug, Clone, Copy)]
pub struct RotorPerformance {
    /// Total thrust [N].
    pub thrust: f64,
    /// Total torque [N*m].
    pub torque: f64,
    /// Shaft power [W], `torque * omega` by construction.
    pub power: f64,
    /// Advance ratio `V_a / (n D)` with `n` in rev/s.
    pub j: f64,
    /// Power coefficient `P / (rho n^3 D^5)`.
    pub c_p: f64,
    /// False if any blade section failed to converge.
    pub converged: bool,
}

/// Integrate section loads over the blade span.
///
/// Thrust and torque come from trapezoidal integration of the per-blade
/// section loads over the supplied stations, times the blade count. A
/// section failure marks the result non-converged instead of aborting, so
/// sweeps can continue through the windmill corner.
pub fn solve_rotor(
    geom: &BladeGeometry,
    polar: &AirfoilPolar,
    flow: &FlowCondition,
) -> RotorPerformance {
    let stations = geom.stations();
    let mut d_thrust = Vec::with_capacity(stations.len());
    let mut d_torque = Vec::with_capacity(stations.len());
    let mut converged = true;

    for st in stations {
        match solve_section(geom, polar, flow, st.radius) {
            Ok(s) => {
                d_thrust.push(s.d_thrust);
                d_torque.push(s.d_torque);
            }
            Err(_) => {
                converged = false;
                d_thrust.push(0.0);
                d_torque.push(0.0);
            }
        }
    }

    let blades = geom.blade_count() as f64;
    let mut thrust = 0.0;
    let mut torque = 0.0;
    for i in 1..stations.len() {
        let dr = stations[i].radius - stations[i - 1].radius;
        thrust += 0.5 * (d_thrust[i] + d_thrust[i - 1]) * dr;
        torque += 0.5 * (d_torque[i] + d_torque[i - 1]) * dr;
    }
    thrust *= blades;
    torque *= blades;

    let power = torque * flow.omega;
    let n = flow.omega / (2.0 * PI);
    let d = geom.diameter();
    RotorPerformance {
        thrust,
        torque,
        power,
        j: flow.v_a / (n * d),
        c_p: power / (flow.rho_a * n.powi(3) * d.powi(5)),
        converged,
    }
}

/// One row of the generated `(P, omega, V_a)` training grid.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct DatasetRow {
    pub v_a: f64,
    pub omega_rad_s: f64,
    pub power_w: f64,
    pub j: f64,
    pub c_p: f64,
    pub converged: bool,
}

/// Inclusive linear sweep, `steps >= 2`.
#[derive(Debug, Clone, Copy)]
pub struct SweepRange {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl SweepRange {
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.steps - 1) as f64;
        (0..self.steps).map(|i| self.min + step * i as f64).collect()
    }
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("sweep range is empty")]
    EmptyRange,
    #[error("invalid flow condition: {0}")]
    Flow(#[from] super::section::FlowError),
    #[error("csv io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("dataset file has unexpected header; want `v_a,omega_rad_s,power_w,j,c_p,converged`")]
    Header,
}

/// Evaluate the rotor over the full Cartesian `(V_a, omega)` grid.
///
/// Rows whose sections failed to converge are kept with the flag set so the
/// grid stays rectangular.
pub fn generate_dataset(
    geom: &BladeGeometry,
    polar: &AirfoilPolar,
    v_range: &SweepRange,
    omega_range: &SweepRange,
    rho_a: f64,
) -> Result<Vec<DatasetRow>, DatasetError> {
    if v_range.steps == 0 || omega_range.steps == 0 {
        return Err(DatasetError::EmptyRange);
    }
    let mut rows = Vec::with_capacity(v_range.steps * omega_range.steps);
    for v_a in v_range.values() {
        for omega in omega_range.values() {
            let flow = FlowCondition::new(v_a, omega, rho_a)?;
            let perf = solve_rotor(geom, polar, &flow);
            rows.push(DatasetRow {
                v_a,
                omega_rad_s: omega,
                power_w: perf.power,
                j: perf.j,
                c_p: perf.c_p,
                converged: perf.converged,
            });
        }
    }
    Ok(rows)
}

pub fn write_dataset_csv(path: impl AsRef<Path>, rows: &[DatasetRow]) -> Result<(), DatasetError> {
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        for row in rows {
            w.serialize(row)?;
        }
        w.flush()?;
    }
    crate::pipeline::write_atomic(path.as_ref(), &buf)?;
    Ok(())
}

pub fn read_dataset_csv(path: impl AsRef<Path>) -> Result<Vec<DatasetRow>, DatasetError> {
    let mut r = csv::Reader::from_path(path.as_ref())?;
    {
        let headers = r.headers()?;
        let want = ["v_a", "omega_rad_s", "power_w", "j", "c_p", "converged"];
        if headers.len() != want.len() || headers.iter().zip(want).any(|(a, b)| a != b) {
            return Err(DatasetError::Header);
        }
    }
    let mut rows = Vec::new();
    for rec in r.deserialize() {
        rows.push(rec?);
    }
    Ok(rows)
}

/// Serialize rows to the dataset CSV text (used by the writer and tests).
pub fn dataset_csv_string(rows: &[DatasetRow]) -> Result<String, DatasetError> {
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        for row in rows {
            w.serialize(row)?;
        }
        w.flush()?;
    }
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bem::sample;

    fn flow(v_a: f64, rpm: f64, rho: f64) -> FlowCondition {
        FlowCondition::new(v_a, rpm * 2.0 * PI / 60.0, rho).unwrap()
    }

    #[test]
    fn power_equals_torque_times_omega() {
        let (geom, polar) = sample::sample_rotor();
        let f = flow(8.0, 6000.0, 1.225);
        let p = solve_rotor(&geom, &polar, &f);
        assert!(p.converged);
        assert_eq!(p.power, p.torque * f.omega);
    }

    #[test]
    fn density_scales_loads_but_not_coefficients() {
        let (geom, polar) = sample::sample_rotor();
        let base = solve_rotor(&geom, &polar, &flow(10.0, 5000.0, 1.0));
        let double = solve_rotor(&geom, &polar, &flow(10.0, 5000.0, 2.0));
        assert!(base.converged && double.converged);
        assert!((double.thrust / base.thrust - 2.0).abs() < 1e-12);
        assert!((double.torque / base.torque - 2.0).abs() < 1e-12);
        assert!((double.power / base.power - 2.0).abs() < 1e-12);
        assert!((double.c_p - base.c_p).abs() < 1e-12 * base.c_p.abs());
        assert_eq!(double.j, base.j);
    }

    #[test]
    fn static_thrust_is_positive() {
        let (geom, polar) = sample::sample_rotor();
        let p = solve_rotor(&geom, &polar, &flow(0.0, 5000.0, 1.225));
        assert!(p.converged);
        assert!(p.thrust > 0.0);
        assert!(p.power > 0.0);
        assert_eq!(p.j, 0.0);
    }

    #[test]
    fn degenerate_grid_matches_single_solve() {
        let (geom, polar) = sample::sample_rotor();
        let rows = generate_dataset(
            &geom,
            &polar,
            &SweepRange { min: 7.0, max: 7.0, steps: 1 },
            &SweepRange { min: 500.0, max: 500.0, steps: 1 },
            1.225,
        )
        .unwrap();
        assert_eq!(rows.len(), 1);
        let single = solve_rotor(&geom, &polar, &FlowCondition::new(7.0, 500.0, 1.225).unwrap());
        assert_eq!(rows[0].power_w, single.power);
        assert_eq!(rows[0].c_p, single.c_p);
        assert_eq!(rows[0].j, single.j);
    }

    #[test]
    fn stored_coefficients_match_definitions() {
        let (geom, polar) = sample::sample_rotor();
        let rows = generate_dataset(
            &geom,
            &polar,
            &SweepRange { min: 0.0, max: 20.0, steps: 3 },
            &SweepRange { min: 300.0, max: 900.0, steps: 3 },
            1.225,
        )
        .unwrap();
        let d = geom.diameter();
        for row in &rows {
            let n = row.omega_rad_s / (2.0 * PI);
            let j = row.v_a / (n * d);
            let c_p = row.power_w / (1.225 * n.powi(3) * d.powi(5));
            assert!((j - row.j).abs() <= 1e-12 * j.abs().max(1.0));
            assert!((c_p - row.c_p).abs() <= 1e-12 * c_p.abs().max(1.0));
        }
    }

    #[test]
    fn csv_roundtrip_is_lossless() {
        let (geom, polar) = sample::sample_rotor();
        let rows = generate_dataset(
            &geom,
            &polar,
            &SweepRange { min: 0.0, max: 30.0, steps: 2 },
            &SweepRange { min: 200.0, max: 1000.0, steps: 2 },
            1.225,
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("grid.csv");
        write_dataset_csv(&path, &rows).unwrap();
        let back = read_dataset_csv(&path).unwrap();
        assert_eq!(rows.len(), back.len());
        for (a, b) in rows.iter().zip(&back) {
            assert_eq!(a.v_a.to_bits(), b.v_a.to_bits());
            assert_eq!(a.power_w.to_bits(), b.power_w.to_bits());
            assert_eq!(a.c_p.to_bits(), b.c_p.to_bits());
            assert_eq!(a.converged, b.converged);
        }
    }
}
