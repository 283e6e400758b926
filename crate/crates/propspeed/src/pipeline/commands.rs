use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use super::coeffs::{
    CoefficientDoc, CoeffError, SolveDiagnostics, TrainingMetadata, MODEL_DIRECT, MODEL_INDIRECT,
};
use super::config::PipelineConfig;
use super::evaluate::{evaluate, EvalError, EvalReport};
use super::flight::{ingest_flight_csv, omega_dot, FlightRecord, IngestError, IngestOptions};
use crate::bem::{self, BladeGeometry, AirfoilPolar, DatasetRow, SweepRange};
use crate::inflight::{self, BatchProblem, GpsRow, IdentifiedCoefficients};
use crate::lstsq;
use crate::models::{self, PowerSample};
use crate::regime::{self, CriticalPoints, GateConfig};
use crate::sparse;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{0}")]
    Schema(String),
    #[error("{0}")]
    Numerical(String),
    #[error("no samples left after gating")]
    EmptyAfterGate,
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl PipelineError {
    /// Process exit code: 2 schema, 3 numerical, 4 empty-after-gate.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Schema(_) => 2,
            PipelineError::Numerical(_) => 3,
            PipelineError::EmptyAfterGate => 4,
            PipelineError::Io(_) => 1,
        }
    }
}

impl From<IngestError> for PipelineError {
    fn from(e: IngestError) -> Self {
        match e {
            IngestError::Io(io) => PipelineError::Io(io),
            other => PipelineError::Schema(other.to_string()),
        }
    }
}

impl From<CoeffError> for PipelineError {
    fn from(e: CoeffError) -> Self {
        match e {
            CoeffError::Io(io) => PipelineError::Io(io),
            other => PipelineError::Schema(other.to_string()),
        }
    }
}

impl From<EvalError> for PipelineError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::EmptyAfterGate => PipelineError::EmptyAfterGate,
            other => PipelineError::Numerical(other.to_string()),
        }
    }
}

fn schema(e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Schema(e.to_string())
}

fn numerical(e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Numerical(e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelChoice {
    Direct,
    Indirect,
}

impl ModelChoice {
    pub fn name(&self) -> &'static str {
        match self {
            ModelChoice::Direct => MODEL_DIRECT,
            ModelChoice::Indirect => MODEL_INDIRECT,
        }
    }
}

fn dataset_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn ingest_options(cfg: &PipelineConfig) -> IngestOptions {
    IngestOptions {
        omega_unit: cfg.omega_unit,
        angle_unit: cfg.angle_unit,
        smoothing_window: cfg.smoothing_window,
    }
}

fn metadata(path: &Path, cfg: &PipelineConfig) -> TrainingMetadata {
    TrainingMetadata {
        dataset: dataset_stem(path),
        rho_kg_m3: cfg.rho_kg_m3,
        diameter_m: cfg.diameter_m,
        eta: cfg.eta,
    }
}

/// Generate the BEM training grid CSV.
pub fn cmd_bem_gen(
    geometry: &Path,
    polar: &Path,
    out: &Path,
    cfg: &PipelineConfig,
) -> Result<(), PipelineError> {
    let geom = BladeGeometry::from_file(geometry).map_err(schema)?;
    let polar = AirfoilPolar::from_file(polar).map_err(schema)?;
    let rows = bem::generate_dataset(
        &geom,
        &polar,
        &SweepRange {
            min: cfg.sweep_v_min_mps,
            max: cfg.sweep_v_max_mps,
            steps: cfg.sweep_v_steps,
        },
        &SweepRange {
            min: cfg.sweep_rpm_min * std::f64::consts::PI / 30.0,
            max: cfg.sweep_rpm_max * std::f64::consts::PI / 30.0,
            steps: cfg.sweep_rpm_steps,
        },
        cfg.rho_kg_m3,
    )
    .map_err(numerical)?;
    bem::write_dataset_csv(out, &rows).map_err(numerical)?;
    let converged = rows.iter().filter(|r| r.converged).count();
    eprintln!("bem-gen: {} rows ({converged} converged) -> {}", rows.len(), out.display());
    Ok(())
}

/// One training point of the `(P, omega, V_a)` table, with the derived
/// nondimensional quantities.
#[derive(Debug, Clone, Copy)]
pub struct TrainRow {
    pub v_a: f64,
    pub omega: f64,
    pub power: f64,
    pub j: f64,
    pub c_p: f64,
    pub omega_dot: f64,
}

/// Load a training table from either a BEM dataset CSV or a flight log.
pub fn load_training_table(
    path: &Path,
    cfg: &PipelineConfig,
) -> Result<Vec<TrainRow>, PipelineError> {
    let header = {
        let text = std::fs::read_to_string(path)?;
        text.lines().next().unwrap_or_default().to_string()
    };
    if header.starts_with("v_a,omega_rad_s") {
        let rows = bem::read_dataset_csv(path).map_err(schema)?;
        Ok(rows
            .iter()
            .filter(|r| r.converged)
            .map(|r| TrainRow {
                v_a: r.v_a,
                omega: r.omega_rad_s,
                power: r.power_w,
                j: r.j,
                c_p: r.c_p,
                omega_dot: 0.0,
            })
            .collect())
    } else {
        let report = ingest_flight_csv(path, &ingest_options(cfg))?;
        if report.dropped > 0 {
            eprintln!("ingest: dropped {} rows with missing/non-finite fields", report.dropped);
        }
        let dots = omega_dot(&report.records);
        let mut rows = Vec::with_capacity(report.records.len());
        for (r, &od) in report.records.iter().zip(&dots) {
            let v_pitot = r.v_pitot.ok_or_else(|| {
                PipelineError::Schema("flight training data needs v_pitot_mps".into())
            })?;
            let omega_x = r.omega_x.ok_or_else(|| {
                PipelineError::Schema("flight training data needs omega_x_rad_s".into())
            })?;
            if r.omega <= 0.0 {
                continue;
            }
            let v_a = models::pitot_correction(v_pitot, omega_x, cfg.lever_arm_m);
            let p_in = r.voltage * r.current;
            let power = match cfg.eta {
                Some(eta) => models::propeller_power(p_in, eta).map_err(numerical)?,
                None => p_in,
            };
            let rho = r.rho_a.unwrap_or(cfg.rho_kg_m3);
            rows.push(TrainRow {
                v_a,
                omega: r.omega,
                power,
                j: models::advance_ratio(v_a, r.omega, cfg.diameter_m).map_err(numerical)?,
                c_p: models::power_coefficient(power, r.omega, rho, cfg.diameter_m)
                    .map_err(numerical)?,
                omega_dot: od,
            });
        }
        Ok(rows)
    }
}

/// Outcome of the selection criterion applied to a training table.
#[derive(Debug, Clone)]
pub struct SelectionInfo {
    pub cubic: Option<regime::CubicFit>,
    pub j_crit: Option<f64>,
    pub n_total: usize,
    pub n_selected: usize,
}

/// Apply the data selection criterion: drop windmilling points (unless
/// configured otherwise), locate the critical advance ratio from a cubic
/// `C_P(J)` fit, and keep the forward-flight branch `J > J_crit`.
pub fn select_training_rows(
    rows: &[TrainRow],
    cfg: &PipelineConfig,
) -> Result<(Vec<TrainRow>, SelectionInfo), PipelineError> {
    let n_total = rows.len();
    let powered: Vec<TrainRow> = rows
        .iter()
        .copied()
        .filter(|r| cfg.include_windmilling || r.power >= 0.0)
        .collect();
    if powered.is_empty() {
        return Err(PipelineError::EmptyAfterGate);
    }

    let (cubic, j_crit) = match cfg.j_crit_override {
        Some(j) => (None, Some(j)),
        None => {
            let pts: Vec<(f64, f64)> = powered.iter().map(|r| (r.j, r.c_p)).collect();
            let fit = regime::fit_cubic(&pts).map_err(numerical)?;
            let crit = regime::critical_points(&fit);
            (Some(fit), crit.forward_flight_threshold())
        }
    };

    let crit = CriticalPoints { j_crit: j_crit.into_iter().collect() };
    let j_values: Vec<f64> = powered.iter().map(|r| r.j).collect();
    let mask = regime::selection_mask(&j_values, &crit);
    let selected: Vec<TrainRow> = powered
        .iter()
        .zip(&mask)
        .filter_map(|(r, &keep)| keep.then_some(*r))
        .collect();
    if selected.is_empty() {
        return Err(PipelineError::EmptyAfterGate);
    }
    let info = SelectionInfo { cubic, j_crit, n_total, n_selected: selected.len() };
    Ok((selected, info))
}

fn direct_records(rows: &[TrainRow]) -> Vec<sparse::DirectRecord> {
    rows.iter()
        .map(|r| sparse::DirectRecord { power: r.power, omega: r.omega, omega_dot: r.omega_dot })
        .collect()
}

fn indirect_records(rows: &[TrainRow]) -> Vec<sparse::IndirectRecord> {
    rows.iter()
        .map(|r| sparse::IndirectRecord { c_p: r.c_p, omega: r.omega })
        .collect()
}

/// Shared discovery core, exposed for the acceptance tests.
pub fn discover_model(
    rows: &[TrainRow],
    model: ModelChoice,
    cfg: &PipelineConfig,
) -> Result<sparse::SelectedModel, PipelineError> {
    let (design, y): (sparse::Design, Vec<f64>) = match model {
        ModelChoice::Direct => {
            let records = direct_records(rows);
            let lib = sparse::build_features_direct(&records).map_err(schema)?;
            let design = sparse::Design {
                columns: lib.design_columns(&records),
                names: lib.names(),
                constant_name: lib.constant_feature.clone(),
            };
            let y = rows.iter().map(|r| r.v_a).collect();
            (design, y)
        }
        ModelChoice::Indirect => {
            let records = indirect_records(rows);
            let lib =
                sparse::build_features_indirect(&records, cfg.diameter_m).map_err(schema)?;
            let design = sparse::Design {
                columns: lib.design_columns(&records),
                names: lib.names(),
                constant_name: lib.constant_feature.clone(),
            };
            let y = rows
                .iter()
                .map(|r| lib.target_transform.apply(r.v_a, r.omega))
                .collect();
            (design, y)
        }
    };

    let lambdas =
        sparse::default_lambda_grid(&design, &y, cfg.lasso_lambda_count, cfg.lasso_lambda_min_ratio)
            .map_err(numerical)?;
    let folds = cfg.lasso_folds.min(y.len());
    let path = sparse::cv_lasso(&design, &y, folds, &lambdas, cfg.seed).map_err(numerical)?;
    sparse::select_lambda(&path).map_err(numerical)
}

/// `discover`: run the selection criterion and the LASSO structure search.
pub fn cmd_discover(
    data: &Path,
    model: ModelChoice,
    out: &Path,
    cfg: &PipelineConfig,
) -> Result<(), PipelineError> {
    let rows = load_training_table(data, cfg)?;
    let (selected_rows, info) = select_training_rows(&rows, cfg)?;
    eprintln!(
        "discover: {} of {} rows selected (J_crit = {:?})",
        info.n_selected, info.n_total, info.j_crit
    );
    let selected = discover_model(&selected_rows, model, cfg)?;
    let doc = CoefficientDoc::from_selected(model.name(), &selected, metadata(data, cfg));
    doc.write(out)?;
    eprintln!(
        "discover: support {:?}, lambda = {:.3e}, cv = {:.3e}",
        selected.support, selected.lambda_selected, selected.cv_error
    );
    Ok(())
}

/// Restricted least-squares fit of the closed-form model structures.
pub fn fit_model(
    rows: &[TrainRow],
    model: ModelChoice,
    cfg: &PipelineConfig,
) -> Result<CoefficientDoc, PipelineError> {
    use nalgebra::{DMatrix, DVector};
    match model {
        ModelChoice::Direct => {
            let a = DMatrix::from_fn(rows.len(), 2, |i, j| {
                let r = &rows[i];
                if j == 0 { r.omega } else { r.power * r.power / r.omega.powi(5) }
            });
            let b = DVector::from_fn(rows.len(), |i, _| rows[i].v_a);
            let sol = lstsq::solve(&a, &b).map_err(numerical)?;
            let c = models::DirectCoefficients { beta1: sol.theta[0], beta2: sol.theta[1] };
            Ok(CoefficientDoc::new_direct(
                &c,
                TrainingMetadata {
                    dataset: String::new(),
                    rho_kg_m3: cfg.rho_kg_m3,
                    diameter_m: cfg.diameter_m,
                    eta: cfg.eta,
                },
            ))
        }
        ModelChoice::Indirect => {
            let a = DMatrix::from_fn(rows.len(), 3, |i, j| match j {
                0 => 1.0,
                1 => rows[i].c_p,
                _ => rows[i].c_p.powi(4),
            });
            let tt = sparse::TargetTransform::PerRevTipSpeed { diameter: cfg.diameter_m };
            let b = DVector::from_fn(rows.len(), |i, _| tt.apply(rows[i].v_a, rows[i].omega));
            let sol = lstsq::solve(&a, &b).map_err(numerical)?;
            let c = models::IndirectCoefficients {
                alpha0: sol.theta[0],
                alpha1: sol.theta[1],
                alpha2: sol.theta[2],
            };
            Ok(CoefficientDoc::new_indirect(
                &c,
                TrainingMetadata {
                    dataset: String::new(),
                    rho_kg_m3: cfg.rho_kg_m3,
                    diameter_m: cfg.diameter_m,
                    eta: cfg.eta,
                },
            ))
        }
    }
}

/// `fit`: least squares restricted to the published model supports.
pub fn cmd_fit(
    data: &Path,
    model: ModelChoice,
    out: &Path,
    cfg: &PipelineConfig,
) -> Result<(), PipelineError> {
    let rows = load_training_table(data, cfg)?;
    let (selected_rows, info) = select_training_rows(&rows, cfg)?;
    let mut doc = fit_model(&selected_rows, model, cfg)?;
    doc.training_metadata.dataset = dataset_stem(data);
    doc.write(out)?;
    eprintln!(
        "fit: {} rows (J_crit = {:?}) -> {:?}",
        info.n_selected, info.j_crit, doc.coefficients
    );
    Ok(())
}

/// `fit-eta`: electro-mechanical efficiency from BEM + flight data.
pub fn cmd_fit_eta(
    bem_data: &Path,
    flight: &Path,
    out: &Path,
    cfg: &PipelineConfig,
) -> Result<(), PipelineError> {
    let grid = bem::read_dataset_csv(bem_data).map_err(schema)?;
    let bem_points: Vec<(f64, f64)> = grid
        .iter()
        .filter(|r| r.converged && r.power_w >= 0.0)
        .map(|r| (r.j, r.c_p))
        .collect();

    let report = ingest_flight_csv(flight, &ingest_options(cfg))?;
    let mut flight_points = Vec::new();
    for r in &report.records {
        let (Some(v_pitot), Some(omega_x)) = (r.v_pitot, r.omega_x) else {
            return Err(PipelineError::Schema(
                "fit-eta needs v_pitot_mps and omega_x_rad_s in the flight log".into(),
            ));
        };
        if r.omega <= 0.0 {
            continue;
        }
        let v_a = models::pitot_correction(v_pitot, omega_x, cfg.lever_arm_m);
        let rho = r.rho_a.unwrap_or(cfg.rho_kg_m3);
        let p_in = r.voltage * r.current;
        let j = models::advance_ratio(v_a, r.omega, cfg.diameter_m).map_err(numerical)?;
        let cp_in =
            models::power_coefficient(p_in, r.omega, rho, cfg.diameter_m).map_err(numerical)?;
        flight_points.push((j, cp_in));
    }
    if flight_points.is_empty() {
        return Err(PipelineError::EmptyAfterGate);
    }

    let est = models::estimate_efficiency(&bem_points, &flight_points).map_err(numerical)?;
    let text = serde_json::to_string_pretty(&est).map_err(numerical)?;
    super::write_atomic(out, text.as_bytes())?;
    eprintln!("fit-eta: eta = {:.4}, cubic = {:?}", est.eta, est.cubic);
    Ok(())
}

/// Per-record gating context used by estimation and identification.
struct GatedSample<'a> {
    record: &'a FlightRecord,
    power: f64,
    gamma: f64,
    estimate: Option<models::AirspeedEstimate>,
}

/// Walk a flight log, computing power, the angle-of-attack gate and (when
/// coefficients are supplied) the model estimate. `gate_speed_from_model`
/// decides whether the low-speed gate uses the model estimate or the
/// horizontal ground speed as a proxy.
fn gate_records<'a>(
    records: &'a [FlightRecord],
    cfg: &PipelineConfig,
    coeffs: Option<&CoefficientDoc>,
) -> Result<Vec<GatedSample<'a>>, PipelineError> {
    let gate_cfg: GateConfig = cfg.gate_config();
    let mut out = Vec::new();
    for r in records {
        if r.omega <= 0.0 {
            continue;
        }
        let v_ned = [r.v_n, r.v_e, r.v_d];
        let Ok(gamma) = regime::flight_path_angle(v_ned, cfg.gamma_sign) else {
            continue; // stationary: no flight path angle, hover by definition
        };
        let alpha = r.theta - gamma;

        let p_in = r.voltage * r.current;
        let power = match cfg.eta {
            Some(eta) => models::propeller_power(p_in, eta).map_err(numerical)?,
            None => p_in,
        };

        let estimate = match coeffs {
            None => None,
            Some(doc) => {
                let rho = r.rho_a.unwrap_or(cfg.rho_kg_m3);
                let est = match doc.model.as_str() {
                    MODEL_DIRECT => models::eval_direct(
                        &doc.direct()?,
                        &PowerSample { power, omega: r.omega, rho_a: Some(rho) },
                    )
                    .map_err(numerical)?,
                    _ => {
                        let c_p =
                            models::power_coefficient(power, r.omega, rho, cfg.diameter_m)
                                .map_err(numerical)?;
                        models::eval_indirect(&doc.indirect()?, c_p, r.omega, cfg.diameter_m)
                            .map_err(numerical)?
                    }
                };
                Some(est)
            }
        };

        let gate_speed = match &estimate {
            Some(est) => est.v_a,
            None => (r.v_n * r.v_n + r.v_e * r.v_e).sqrt(),
        };
        if regime::gate(alpha, gate_speed, &gate_cfg) {
            out.push(GatedSample { record: r, power, gamma, estimate });
        }
    }
    Ok(out)
}

/// `identify-gps`: batch or recursive identification from earth-frame
/// velocity, returning coefficients plus the wind estimate.
#[allow(clippy::too_many_arguments)]
pub fn cmd_identify_gps(
    flight: &Path,
    model: ModelChoice,
    out: &Path,
    cfg: &PipelineConfig,
    rls_forgetting: Option<f64>,
    seed_coeffs: Option<&Path>,
) -> Result<(), PipelineError> {
    let report = ingest_flight_csv(flight, &ingest_options(cfg))?;
    if report.records.is_empty() {
        return Err(PipelineError::EmptyAfterGate);
    }
    let seed_doc = seed_coeffs.map(CoefficientDoc::read).transpose()?;
    let gated = gate_records(&report.records, cfg, seed_doc.as_ref())?;
    if gated.is_empty() {
        return Err(PipelineError::EmptyAfterGate);
    }
    let gated_fraction = gated.len() as f64 / report.records.len() as f64;

    let problem = match model {
        ModelChoice::Direct => {
            let samples: Vec<(PowerSample, GpsRow)> = gated
                .iter()
                .map(|g| {
                    (
                        PowerSample { power: g.power, omega: g.record.omega, rho_a: g.record.rho_a },
                        GpsRow {
                            v_n: g.record.v_n,
                            v_e: g.record.v_e,
                            v_d: g.record.v_d,
                            psi: g.record.psi,
                            gamma: g.gamma,
                        },
                    )
                })
                .collect();
            BatchProblem::from_direct_samples(&samples).map_err(numerical)?
        }
        ModelChoice::Indirect => {
            let mut samples = Vec::with_capacity(gated.len());
            for g in &gated {
                let rho = g.record.rho_a.unwrap_or(cfg.rho_kg_m3);
                let c_p =
                    models::power_coefficient(g.power, g.record.omega, rho, cfg.diameter_m)
                        .map_err(numerical)?;
                samples.push((
                    c_p,
                    g.record.omega,
                    GpsRow {
                        v_n: g.record.v_n,
                        v_e: g.record.v_e,
                        v_d: g.record.v_d,
                        psi: g.record.psi,
                        gamma: g.gamma,
                    },
                ));
            }
            BatchProblem::from_indirect_samples(&samples, cfg.diameter_m).map_err(numerical)?
        }
    };

    let batch = inflight::solve_batch(&problem).map_err(numerical)?;
    let solution = match rls_forgetting {
        None => batch.clone(),
        Some(lambda_f) => {
            // streaming variant: one pass over the gated rows
            let theta0: Option<Vec<f64>> = seed_doc.as_ref().and_then(|doc| match model {
                ModelChoice::Direct => doc
                    .direct()
                    .ok()
                    .map(|c| vec![c.beta1, c.beta2, 0.0, 0.0]),
                ModelChoice::Indirect => doc
                    .indirect()
                    .ok()
                    .map(|c| vec![c.alpha0, c.alpha1, c.alpha2, 0.0, 0.0]),
            });
            let theta = inflight::rls_one_pass(&problem, lambda_f, 1e8, theta0.as_deref())
                .map_err(numerical)?;
            inflight::BatchSolution {
                coefficients: split_for(model, &theta),
                wind: match model {
                    ModelChoice::Direct => {
                        inflight::WindEstimate { north: theta[2], east: theta[3] }
                    }
                    ModelChoice::Indirect => {
                        inflight::WindEstimate { north: theta[3], east: theta[4] }
                    }
                },
                residual_rms: batch.residual_rms,
                condition: batch.condition,
                ill_conditioned: batch.ill_conditioned,
                theta,
            }
        }
    };

    if solution.ill_conditioned {
        eprintln!(
            "warning: identification is ill-conditioned (condition = {:.3e}); \
             wind and airspeed are not separable from this trajectory",
            solution.condition
        );
    }

    let mut doc = match solution.coefficients {
        IdentifiedCoefficients::Direct(c) => {
            CoefficientDoc::new_direct(&c, metadata(flight, cfg))
        }
        IdentifiedCoefficients::Indirect(c) => {
            CoefficientDoc::new_indirect(&c, metadata(flight, cfg))
        }
    };
    doc.wind = Some(solution.wind);
    doc.diagnostics = Some(SolveDiagnostics {
        condition: solution.condition,
        residual_rms: solution.residual_rms,
        ill_conditioned: solution.ill_conditioned,
        n_samples: gated.len(),
        gated_fraction,
    });
    doc.write(out)?;
    eprintln!(
        "identify-gps: {} gated samples ({:.1}%), wind = ({:.2}, {:.2}) m/s, residual rms = {:.3e}",
        gated.len(),
        100.0 * gated_fraction,
        solution.wind.north,
        solution.wind.east,
        solution.residual_rms
    );
    Ok(())
}

fn split_for(model: ModelChoice, theta: &[f64]) -> IdentifiedCoefficients {
    match model {
        ModelChoice::Direct => IdentifiedCoefficients::Direct(models::DirectCoefficients {
            beta1: theta[0],
            beta2: theta[1],
        }),
        ModelChoice::Indirect => {
            IdentifiedCoefficients::Indirect(models::IndirectCoefficients {
                alpha0: theta[0],
                alpha1: theta[1],
                alpha2: theta[2],
            })
        }
    }
}

/// `estimate`: apply a coefficient document plus the runtime gate to a log.
/// Output CSV has one row per gated input row: `t_s,v_a_hat_mps,clamped`.
pub fn cmd_estimate(
    flight: &Path,
    coeffs: &Path,
    out: &Path,
    cfg: &PipelineConfig,
) -> Result<(), PipelineError> {
    let doc = CoefficientDoc::read(coeffs)?;
    let report = ingest_flight_csv(flight, &ingest_options(cfg))?;
    let gated = gate_records(&report.records, cfg, Some(&doc))?;

    let mut buf = String::from("t_s,v_a_hat_mps,clamped\n");
    for g in &gated {
        let est = g.estimate.expect("estimates computed when coefficients are given");
        let _ = writeln!(buf, "{},{},{}", g.record.t, est.v_a, u8::from(est.clamped));
    }
    super::write_atomic(out, buf.as_bytes())?;
    let total = report.records.len();
    let fraction = if total == 0 { 0.0 } else { gated.len() as f64 / total as f64 };
    eprintln!(
        "estimate: {} of {} rows pass the gate (fraction {:.3})",
        gated.len(),
        total,
        fraction
    );
    Ok(())
}

/// Parse the estimate output CSV.
pub fn read_estimates(path: &Path) -> Result<Vec<(f64, f64)>, PipelineError> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.starts_with("t_s,v_a_hat_mps") => {}
        _ => return Err(PipelineError::Schema("estimate csv must start with t_s,v_a_hat_mps".into())),
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut cols = line.split(',');
        let (Some(t), Some(v)) = (cols.next(), cols.next()) else {
            return Err(PipelineError::Schema(format!("estimate csv row {} malformed", i + 2)));
        };
        let t: f64 = t.parse().map_err(|_| {
            PipelineError::Schema(format!("estimate csv row {}: bad timestamp", i + 2))
        })?;
        let v: f64 = v.parse().map_err(|_| {
            PipelineError::Schema(format!("estimate csv row {}: bad value", i + 2))
        })?;
        out.push((t, v));
    }
    Ok(out)
}

/// `evaluate`: compare an estimate CSV against pitot-corrected truth from
/// the same log, matching rows by timestamp.
pub fn cmd_evaluate(
    flight: &Path,
    pred: &Path,
    out: &Path,
    cfg: &PipelineConfig,
    range_override: Option<f64>,
) -> Result<EvalReport, PipelineError> {
    let report = ingest_flight_csv(flight, &ingest_options(cfg))?;
    let estimates = read_estimates(pred)?;
    if estimates.is_empty() {
        return Err(PipelineError::EmptyAfterGate);
    }

    let mut truth_by_time: Vec<(f64, f64)> = Vec::new();
    for r in &report.records {
        let (Some(v_pitot), Some(omega_x)) = (r.v_pitot, r.omega_x) else {
            return Err(PipelineError::Schema(
                "evaluate needs v_pitot_mps and omega_x_rad_s in the flight log".into(),
            ));
        };
        truth_by_time.push((r.t, models::pitot_correction(v_pitot, omega_x, cfg.lever_arm_m)));
    }

    let mut predictions = Vec::with_capacity(estimates.len());
    let mut truth = Vec::with_capacity(estimates.len());
    for (t, v_hat) in &estimates {
        match truth_by_time
            .binary_search_by(|(tt, _)| tt.total_cmp(t))
        {
            Ok(i) => {
                predictions.push(*v_hat);
                truth.push(truth_by_time[i].1);
            }
            Err(_) => {
                return Err(PipelineError::Schema(format!(
                    "estimate timestamp {t} not present in the flight log"
                )))
            }
        }
    }

    let gated_fraction = estimates.len() as f64 / report.records.len().max(1) as f64;
    let eval = evaluate(&predictions, &truth, range_override, gated_fraction)?;
    let text = serde_json::to_string_pretty(&eval).map_err(numerical)?;
    super::write_atomic(out, text.as_bytes())?;
    println!(
        "evaluate: rmse = {:.3} m/s, nrmse = {:.4} (range {:.2} m/s, {} samples)",
        eval.rmse, eval.nrmse, eval.normalization_range, eval.n_samples
    );
    Ok(eval)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    CpJ,
    VaTime,
}

/// `export-plot`: emit plain CSV series for external plotting.
pub fn cmd_export_plot(
    kind: PlotKind,
    data: Option<&Path>,
    flight: Option<&Path>,
    coeffs: Option<&Path>,
    out: &Path,
    cfg: &PipelineConfig,
) -> Result<(), PipelineError> {
    match kind {
        PlotKind::CpJ => {
            let data = data.ok_or_else(|| {
                PipelineError::Schema("export-plot --kind cp-j needs --data".into())
            })?;
            let mut rows: Vec<DatasetRow> = bem::read_dataset_csv(data)
                .map_err(schema)?
                .into_iter()
                .filter(|r| r.converged)
                .collect();
            rows.sort_by(|a, b| a.j.total_cmp(&b.j));
            let mut buf = String::from("j,c_p\n");
            for r in &rows {
                let _ = writeln!(buf, "{},{}", r.j, r.c_p);
            }
            super::write_atomic(out, buf.as_bytes())?;
        }
        PlotKind::VaTime => {
            let flight = flight.ok_or_else(|| {
                PipelineError::Schema("export-plot --kind va-time needs --flight".into())
            })?;
            let coeffs = coeffs.ok_or_else(|| {
                PipelineError::Schema("export-plot --kind va-time needs --coeffs".into())
            })?;
            let doc = CoefficientDoc::read(coeffs)?;
            let report = ingest_flight_csv(flight, &ingest_options(cfg))?;
            let gate_cfg = cfg.gate_config();

            let mut buf = String::from("t_s,v_a_true_mps,v_a_hat_mps,gated\n");
            for r in &report.records {
                if r.omega <= 0.0 {
                    continue;
                }
                let rho = r.rho_a.unwrap_or(cfg.rho_kg_m3);
                let p_in = r.voltage * r.current;
                let power = match cfg.eta {
                    Some(eta) => models::propeller_power(p_in, eta).map_err(numerical)?,
                    None => p_in,
                };
                let est = match doc.model.as_str() {
                    MODEL_DIRECT => models::eval_direct(
                        &doc.direct()?,
                        &PowerSample { power, omega: r.omega, rho_a: Some(rho) },
                    )
                    .map_err(numerical)?,
                    _ => {
                        let c_p =
                            models::power_coefficient(power, r.omega, rho, cfg.diameter_m)
                                .map_err(numerical)?;
                        models::eval_indirect(&doc.indirect()?, c_p, r.omega, cfg.diameter_m)
                            .map_err(numerical)?
                    }
                };
                let truth = match (r.v_pitot, r.omega_x) {
                    (Some(vp), Some(ox)) => {
                        models::pitot_correction(vp, ox, cfg.lever_arm_m).to_string()
                    }
                    _ => String::new(),
                };
                let gated = regime::flight_path_angle([r.v_n, r.v_e, r.v_d], cfg.gamma_sign)
                    .map(|gamma| regime::gate(r.theta - gamma, est.v_a, &gate_cfg))
                    .unwrap_or(false);
                let _ = writeln!(buf, "{},{},{},{}", r.t, truth, est.v_a, u8::from(gated));
            }
            super::write_atomic(out, buf.as_bytes())?;
        }
    }
    Ok(())
}
