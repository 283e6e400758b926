use std::collections::BTreeMap;
use std::path::Path;

use thiserror::Error;

use crate::models::Environment;
use crate::regime::{GammaSign, GateConfig};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config io: {0}")]
    Io(#[from] std::io::Error),
    #[error("config line {line}: expected `key = value`")]
    Malformed { line: usize },
    #[error("config key `{key}`: cannot parse `{value}`")]
    BadValue { key: String, value: String },
    #[error("config key `{key}`: unknown value `{value}` (expected one of {expected})")]
    UnknownChoice { key: String, value: String, expected: &'static str },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

/// Rotational-speed unit of the ingested flight log.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OmegaUnit {
    #[default]
    RadPerSec,
    Rpm,
    RevPerSec,
}

impl OmegaUnit {
    /// Column name carrying omega in a log using this unit.
    pub fn column(&self) -> &'static str {
        match self {
            OmegaUnit::RadPerSec => "omega_rad_s",
            OmegaUnit::Rpm => "omega_rpm",
            OmegaUnit::RevPerSec => "omega_rev_s",
        }
    }

    pub fn to_rad_s(&self, value: f64) -> f64 {
        match self {
            OmegaUnit::RadPerSec => value,
            OmegaUnit::Rpm => value * 2.0 * std::f64::consts::PI / 60.0,
            OmegaUnit::RevPerSec => value * 2.0 * std::f64::consts::PI,
        }
    }
}

/// Attitude-angle unit of the ingested flight log.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AngleUnit {
    #[default]
    Radians,
    Degrees,
}

impl AngleUnit {
    pub fn theta_column(&self) -> &'static str {
        match self {
            AngleUnit::Radians => "theta_rad",
            AngleUnit::Degrees => "theta_deg",
        }
    }

    pub fn psi_column(&self) -> &'static str {
        match self {
            AngleUnit::Radians => "psi_rad",
            AngleUnit::Degrees => "psi_deg",
        }
    }

    pub fn to_radians(&self, value: f64) -> f64 {
        match self {
            AngleUnit::Radians => value,
            AngleUnit::Degrees => value.to_radians(),
        }
    }
}

/// All pipeline settings, read from a flat key-value text file. Section
/// headers in brackets are allowed for readability and ignored; keys are
/// globally unique.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    // environment
    pub diameter_m: f64,
    pub rho_kg_m3: f64,
    pub lever_arm_m: f64,
    /// ESC-motor efficiency. `None` identifies against ESC input power,
    /// folding the unknown efficiency into the coefficients.
    pub eta: Option<f64>,
    // gate
    pub alpha_th_deg: f64,
    pub v_min_mps: f64,
    pub gamma_sign: GammaSign,
    // BEM sweep
    pub sweep_v_min_mps: f64,
    pub sweep_v_max_mps: f64,
    pub sweep_v_steps: usize,
    pub sweep_rpm_min: f64,
    pub sweep_rpm_max: f64,
    pub sweep_rpm_steps: usize,
    // LASSO
    pub lasso_folds: usize,
    pub lasso_lambda_count: usize,
    pub lasso_lambda_min_ratio: f64,
    pub seed: u64,
    // ingestion
    pub omega_unit: OmegaUnit,
    pub angle_unit: AngleUnit,
    /// Centered moving-average window on voltage, current and omega;
    /// 1 disables smoothing.
    pub smoothing_window: usize,
    // selection
    pub j_crit_override: Option<f64>,
    pub include_windmilling: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            diameter_m: 0.23,
            rho_kg_m3: 1.225,
            lever_arm_m: 0.24,
            eta: Some(0.87),
            alpha_th_deg: 25.0,
            v_min_mps: 5.0,
            gamma_sign: GammaSign::PaperLiteral,
            sweep_v_min_mps: 0.0,
            sweep_v_max_mps: 30.0,
            sweep_v_steps: 31,
            sweep_rpm_min: 1000.0,
            sweep_rpm_max: 10000.0,
            sweep_rpm_steps: 46,
            lasso_folds: 10,
            lasso_lambda_count: 100,
            lasso_lambda_min_ratio: 1e-4,
            seed: 42,
            omega_unit: OmegaUnit::RadPerSec,
            angle_unit: AngleUnit::Radians,
            smoothing_window: 1,
            j_crit_override: None,
            include_windmilling: false,
        }
    }
}

impl PipelineConfig {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        Self::from_str_table(&std::fs::read_to_string(path)?)
    }

    pub fn from_str_table(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let mut seen = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() || (line.starts_with('[') && line.ends_with(']')) {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or(ConfigError::Malformed { line: i + 1 })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            seen.insert(key.clone(), value.clone());
            cfg.apply(&key, &value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
            value.parse().map_err(|_| ConfigError::BadValue {
                key: key.to_string(),
                value: value.to_string(),
            })
        }
        match key {
            "diameter_m" => self.diameter_m = num(key, value)?,
            "rho_kg_m3" => self.rho_kg_m3 = num(key, value)?,
            "lever_arm_m" => self.lever_arm_m = num(key, value)?,
            "eta" => {
                self.eta = if value.is_empty() || value == "none" {
                    None
                } else {
                    Some(num(key, value)?)
                }
            }
            "alpha_th_deg" => self.alpha_th_deg = num(key, value)?,
            "v_min_mps" => self.v_min_mps = num(key, value)?,
            "gamma_sign" => {
                self.gamma_sign = match value {
                    "paper_literal" => GammaSign::PaperLiteral,
                    "ned_physical" => GammaSign::NedPhysical,
                    _ => {
                        return Err(ConfigError::UnknownChoice {
                            key: key.into(),
                            value: value.into(),
                            expected: "paper_literal, ned_physical",
                        })
                    }
                }
            }
            "sweep_v_min_mps" => self.sweep_v_min_mps = num(key, value)?,
            "sweep_v_max_mps" => self.sweep_v_max_mps = num(key, value)?,
            "sweep_v_steps" => self.sweep_v_steps = num(key, value)?,
            "sweep_rpm_min" => self.sweep_rpm_min = num(key, value)?,
            "sweep_rpm_max" => self.sweep_rpm_max = num(key, value)?,
            "sweep_rpm_steps" => self.sweep_rpm_steps = num(key, value)?,
            "lasso_folds" => self.lasso_folds = num(key, value)?,
            "lasso_lambda_count" => self.lasso_lambda_count = num(key, value)?,
            "lasso_lambda_min_ratio" => self.lasso_lambda_min_ratio = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "omega_unit" => {
                self.omega_unit = match value {
                    "rad_s" => OmegaUnit::RadPerSec,
                    "rpm" => OmegaUnit::Rpm,
                    "rev_s" => OmegaUnit::RevPerSec,
                    _ => {
                        return Err(ConfigError::UnknownChoice {
                            key: key.into(),
                            value: value.into(),
                            expected: "rad_s, rpm, rev_s",
                        })
                    }
                }
            }
            "angle_unit" => {
                self.angle_unit = match value {
                    "rad" => AngleUnit::Radians,
                    "deg" => AngleUnit::Degrees,
                    _ => {
                        return Err(ConfigError::UnknownChoice {
                            key: key.into(),
                            value: value.into(),
                            expected: "rad, deg",
                        })
                    }
                }
            }
            "smoothing_window" => self.smoothing_window = num(key, value)?,
            "j_crit" => {
                self.j_crit_override = if value.is_empty() || value == "none" {
                    None
                } else {
                    Some(num(key, value)?)
                }
            }
            "include_windmilling" => self.include_windmilling = num(key, value)?,
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if !(self.diameter_m > 0.0) {
            return Err(ConfigError::Invalid("diameter_m must be > 0".into()));
        }
        if !(self.rho_kg_m3 > 0.0) {
            return Err(ConfigError::Invalid("rho_kg_m3 must be > 0".into()));
        }
        if !(self.lever_arm_m >= 0.0) {
            return Err(ConfigError::Invalid("lever_arm_m must be >= 0".into()));
        }
        if let Some(eta) = self.eta {
            if !(eta > 0.0 && eta <= 1.0) {
                return Err(ConfigError::Invalid("eta must lie in (0, 1]".into()));
            }
        }
        if !(self.alpha_th_deg > 0.0 && self.alpha_th_deg < 90.0) {
            return Err(ConfigError::Invalid("alpha_th_deg must lie in (0, 90)".into()));
        }
        if self.v_min_mps < 0.0 {
            return Err(ConfigError::Invalid("v_min_mps must be >= 0".into()));
        }
        if self.sweep_v_steps < 2 || self.sweep_rpm_steps < 2 {
            return Err(ConfigError::Invalid("sweep step counts must be >= 2".into()));
        }
        if self.lasso_folds < 2 {
            return Err(ConfigError::Invalid("lasso_folds must be >= 2".into()));
        }
        if self.lasso_lambda_count < 2 {
            return Err(ConfigError::Invalid("lasso_lambda_count must be >= 2".into()));
        }
        if !(self.lasso_lambda_min_ratio > 0.0 && self.lasso_lambda_min_ratio < 1.0) {
            return Err(ConfigError::Invalid(
                "lasso_lambda_min_ratio must lie in (0, 1)".into(),
            ));
        }
        if self.smoothing_window == 0 {
            return Err(ConfigError::Invalid("smoothing_window must be >= 1".into()));
        }
        Ok(())
    }

    pub fn environment(&self) -> Environment {
        Environment {
            diameter: self.diameter_m,
            rho_a: self.rho_kg_m3,
            lever_arm: self.lever_arm_m,
        }
    }

    pub fn gate_config(&self) -> GateConfig {
        GateConfig::new(self.alpha_th_deg.to_radians(), self.v_min_mps)
            .expect("validated at parse time")
    }
}
