use std::path::Path;

use thiserror::Error;

use super::config::{AngleUnit, OmegaUnit};

/// Canonical flight-log header. Optional columns (`v_pitot_mps`,
/// `omega_x_rad_s`, `rho_kg_m3`) may hold empty fields.
pub const CANONICAL_HEADER: &str = "t_s,voltage_v,current_a,omega_rad_s,v_pitot_mps,omega_x_rad_s,theta_rad,psi_rad,v_n_mps,v_e_mps,v_d_mps,rho_kg_m3";

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("flight log io: {0}")]
    Io(#[from] std::io::Error),
    #[error("flight log csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("flight log is missing required column `{0}`")]
    SchemaMismatch(String),
    #[error("timestamps must be strictly increasing (row {row}: {t} after {prev})")]
    NonMonotonicTime { row: usize, t: f64, prev: f64 },
}

/// One row of telemetry in canonical units (seconds, volts, amps, rad/s,
/// m/s, radians, kg/m^3).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlightRecord {
    pub t: f64,
    pub voltage: f64,
    pub current: f64,
    pub omega: f64,
    pub v_pitot: Option<f64>,
    pub omega_x: Option<f64>,
    pub theta: f64,
    pub psi: f64,
    pub v_n: f64,
    pub v_e: f64,
    pub v_d: f64,
    pub rho_a: Option<f64>,
}

/// Ingestion outcome: parsed records plus the count of rows dropped for
/// non-finite or missing required fields.
#[derive(Debug, Clone)]
pub struct IngestReport {
    pub records: Vec<FlightRecord>,
    pub dropped: usize,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IngestOptions {
    pub omega_unit: OmegaUnit,
    pub angle_unit: AngleUnit,
    /// Centered moving-average window on voltage, current and omega.
    pub smoothing_window: usize,
}

/// Read a flight log CSV, applying unit conversions and optional smoothing.
pub fn ingest_flight_csv(
    path: impl AsRef<Path>,
    options: &IngestOptions,
) -> Result<IngestReport, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_path(path.as_ref())?;

    let headers = reader.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let require = |name: &str| col(name).ok_or_else(|| IngestError::SchemaMismatch(name.into()));

    let i_t = require("t_s")?;
    let i_v = require("voltage_v")?;
    let i_i = require("current_a")?;
    let i_om = require(options.omega_unit.column())?;
    let i_theta = require(options.angle_unit.theta_column())?;
    let i_psi = require(options.angle_unit.psi_column())?;
    let i_vn = require("v_n_mps")?;
    let i_ve = require("v_e_mps")?;
    let i_vd = require("v_d_mps")?;
    let i_pitot = col("v_pitot_mps");
    let i_omx = col("omega_x_rad_s");
    let i_rho = col("rho_kg_m3");

    let parse = |rec: &csv::StringRecord, i: usize| -> Option<f64> {
        rec.get(i).and_then(|s| {
            let s = s.trim();
            if s.is_empty() {
                None
            } else {
                s.parse::<f64>().ok().filter(|v| v.is_finite())
            }
        })
    };

    let mut records = Vec::new();
    let mut dropped = 0usize;
    for (row_idx, rec) in reader.records().enumerate() {
        let rec = rec?;
        let required = [
            parse(&rec, i_t),
            parse(&rec, i_v),
            parse(&rec, i_i),
            parse(&rec, i_om),
            parse(&rec, i_theta),
            parse(&rec, i_psi),
            parse(&rec, i_vn),
            parse(&rec, i_ve),
            parse(&rec, i_vd),
        ];
        let [t, voltage, current, omega, theta, psi, v_n, v_e, v_d] = match required {
            [Some(a), Some(b), Some(c), Some(d), Some(e), Some(f), Some(g), Some(h), Some(i)] => {
                [a, b, c, d, e, f, g, h, i]
            }
            _ => {
                dropped += 1;
                continue;
            }
        };
        if let Some(prev) = records.last().map(|r: &FlightRecord| r.t) {
            if t <= prev {
                return Err(IngestError::NonMonotonicTime { row: row_idx + 2, t, prev });
            }
        }
        records.push(FlightRecord {
            t,
            voltage,
            current,
            omega: options.omega_unit.to_rad_s(omega),
            v_pitot: i_pitot.and_then(|i| parse(&rec, i)),
            omega_x: i_omx.and_then(|i| parse(&rec, i)),
            theta: options.angle_unit.to_radians(theta),
            psi: options.angle_unit.to_radians(psi),
            v_n,
            v_e,
            v_d,
            rho_a: i_rho.and_then(|i| parse(&rec, i)),
        });
    }

    if options.smoothing_window > 1 {
        smooth(&mut records, options.smoothing_window);
    }
    Ok(IngestReport { records, dropped })
}

/// Centered moving average on the ESC channels, truncated at the ends.
fn smooth(records: &mut [FlightRecord], window: usize) {
    let half = window / 2;
    let n = records.len();
    let take = |f: fn(&FlightRecord) -> f64| -> Vec<f64> { records.iter().map(f).collect() };
    let voltage = take(|r| r.voltage);
    let current = take(|r| r.current);
    let omega = take(|r| r.omega);
    for i in 0..n {
        let lo = i.saturating_sub(half);
        let hi = (i + half + 1).min(n);
        let m = (hi - lo) as f64;
        records[i].voltage = voltage[lo..hi].iter().sum::<f64>() / m;
        records[i].current = current[lo..hi].iter().sum::<f64>() / m;
        records[i].omega = omega[lo..hi].iter().sum::<f64>() / m;
    }
}

/// Write records in the canonical schema (rad/s, radians). Numeric fields
/// round-trip exactly through the shortest-representation float format.
pub fn write_flight_csv(
    path: impl AsRef<Path>,
    records: &[FlightRecord],
) -> Result<(), IngestError> {
    let mut buf = String::new();
    buf.push_str(CANONICAL_HEADER);
    buf.push('\n');
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in records {
        buf.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.t,
            r.voltage,
            r.current,
            r.omega,
            opt(r.v_pitot),
            opt(r.omega_x),
            r.theta,
            r.psi,
            r.v_n,
            r.v_e,
            r.v_d,
            opt(r.rho_a),
        ));
    }
    super::write_atomic(path.as_ref(), buf.as_bytes())?;
    Ok(())
}

/// Central-difference time derivative of omega, one value per record.
pub fn omega_dot(records: &[FlightRecord]) -> Vec<f64> {
    let n = records.len();
    let mut out = vec![0.0; n];
    if n < 2 {
        return out;
    }
    for i in 0..n {
        let (lo, hi) = if i == 0 {
            (0, 1)
        } else if i == n - 1 {
            (n - 2, n - 1)
        } else {
            (i - 1, i + 1)
        };
        let dt = records[hi].t - records[lo].t;
        out[i] = if dt > 0.0 {
            (records[hi].omega - records[lo].omega) / dt
        } else {
            0.0
        };
    }
    out
}
