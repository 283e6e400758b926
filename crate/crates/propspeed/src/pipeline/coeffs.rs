use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::inflight::WindEstimate;
use crate::models::{DirectCoefficients, IndirectCoefficients};
use crate::sparse::SelectedModel;

#[derive(Debug, Error)]
pub enum CoeffError {
    #[error("coefficient file io: {0}")]
    Io(#[from] std::io::Error),
    #[error("coefficient json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("coefficient document has model `{got}`, expected `{expected}`")]
    WrongModel { expected: String, got: String },
    #[error("coefficient document is missing key `{0}`")]
    MissingKey(&'static str),
    #[error("unsupported omega_unit `{0}` (this artifact uses rad_s)")]
    OmegaUnit(String),
}

/// Provenance recorded alongside fitted coefficients.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainingMetadata {
    /// Free-form dataset identifier (file stem of the training input).
    pub dataset: String,
    pub rho_kg_m3: f64,
    pub diameter_m: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
}

/// Numerical diagnostics of an identification solve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveDiagnostics {
    pub condition: f64,
    pub residual_rms: f64,
    pub ill_conditioned: bool,
    pub n_samples: usize,
    pub gated_fraction: f64,
}

/// The coefficient JSON document shared by the discovery, restricted-fit and
/// GPS identification commands.
///
/// `coefficients` uses the canonical keys (`beta1`, `beta2` for the direct
/// model; `alpha0..alpha2` for the indirect one) whenever the fitted support
/// matches the closed-form structures; an exploratory discovery with a
/// different support keeps its feature names as keys.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoefficientDoc {
    pub model: String,
    pub coefficients: BTreeMap<String, f64>,
    pub omega_unit: String,
    pub training_metadata: TrainingMetadata,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub support: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_selected: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cv_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wind: Option<WindEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<SolveDiagnostics>,
}

pub const MODEL_DIRECT: &str = "direct";
pub const MODEL_INDIRECT: &str = "indirect";
pub const OMEGA_UNIT: &str = "rad_s";

impl CoefficientDoc {
    pub fn new_direct(c: &DirectCoefficients, metadata: TrainingMetadata) -> Self {
        let mut coefficients = BTreeMap::new();
        coefficients.insert("beta1".into(), c.beta1);
        coefficients.insert("beta2".into(), c.beta2);
        Self {
            model: MODEL_DIRECT.into(),
            coefficients,
            omega_unit: OMEGA_UNIT.into(),
            training_metadata: metadata,
            support: None,
            lambda_selected: None,
            cv_error: None,
            wind: None,
            diagnostics: None,
        }
    }

    pub fn new_indirect(c: &IndirectCoefficients, metadata: TrainingMetadata) -> Self {
        let mut coefficients = BTreeMap::new();
        coefficients.insert("alpha0".into(), c.alpha0);
        coefficients.insert("alpha1".into(), c.alpha1);
        coefficients.insert("alpha2".into(), c.alpha2);
        Self {
            model: MODEL_INDIRECT.into(),
            coefficients,
            omega_unit: OMEGA_UNIT.into(),
            training_metadata: metadata,
            support: None,
            lambda_selected: None,
            cv_error: None,
            wind: None,
            diagnostics: None,
        }
    }

    /// Build a document from a discovery result. Canonical supports map to
    /// the closed-form coefficient keys; anything else keeps feature names.
    pub fn from_selected(
        model: &str,
        selected: &SelectedModel,
        metadata: TrainingMetadata,
    ) -> Self {
        let canonical: &[(&str, &str)] = match model {
            MODEL_DIRECT => &[("omega", "beta1"), ("P2_over_omega5", "beta2")],
            _ => &[("cp0", "alpha0"), ("cp1", "alpha1"), ("cp4", "alpha2")],
        };
        let is_canonical = selected.support.len() == canonical.len()
            && canonical.iter().all(|(f, _)| selected.support.iter().any(|s| s == f));

        let mut coefficients = BTreeMap::new();
        for (name, value) in selected.support.iter().zip(&selected.coefficients) {
            let key = if is_canonical {
                canonical
                    .iter()
                    .find(|(f, _)| f == name)
                    .map(|(_, k)| (*k).to_string())
                    .expect("canonical support")
            } else {
                name.clone()
            };
            coefficients.insert(key, *value);
        }
        Self {
            model: model.into(),
            coefficients,
            omega_unit: OMEGA_UNIT.into(),
            training_metadata: metadata,
            support: Some(selected.support.clone()),
            lambda_selected: Some(selected.lambda_selected),
            cv_error: Some(selected.cv_error),
            wind: None,
            diagnostics: None,
        }
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, CoeffError> {
        let text = std::fs::read_to_string(path)?;
        let doc: Self = serde_json::from_str(&text)?;
        if doc.omega_unit != OMEGA_UNIT {
            return Err(CoeffError::OmegaUnit(doc.omega_unit));
        }
        Ok(doc)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<(), CoeffError> {
        let text = serde_json::to_string_pretty(self)?;
        super::write_atomic(path.as_ref(), text.as_bytes())?;
        Ok(())
    }

    fn key(&self, name: &'static str) -> Result<f64, CoeffError> {
        self.coefficients
            .get(name)
            .copied()
            .ok_or(CoeffError::MissingKey(name))
    }

    pub fn direct(&self) -> Result<DirectCoefficients, CoeffError> {
        if self.model != MODEL_DIRECT {
            return Err(CoeffError::WrongModel {
                expected: MODEL_DIRECT.into(),
                got: self.model.clone(),
            });
        }
        Ok(DirectCoefficients {
            beta1: self.key("beta1")?,
            beta2: self.key("beta2")?,
        })
    }

    pub fn indirect(&self) -> Result<IndirectCoefficients, CoeffError> {
        if self.model != MODEL_INDIRECT {
            return Err(CoeffError::WrongModel {
                expected: MODEL_INDIRECT.into(),
                got: self.model.clone(),
            });
        }
        Ok(IndirectCoefficients {
            alpha0: self.key("alpha0")?,
            alpha1: self.key("alpha1")?,
            alpha2: self.key("alpha2")?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn metadata() -> TrainingMetadata {
        TrainingMetadata {
            dataset: "grid".into(),
            rho_kg_m3: 1.225,
            diameter_m: 0.23,
            eta: Some(0.87),
        }
    }

    #[test]
    fn direct_doc_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        let doc = CoefficientDoc::new_direct(
            &DirectCoefficients { beta1: 2.74e-2, beta2: -9.91e11 },
            metadata(),
        );
        doc.write(&path).unwrap();
        let back = CoefficientDoc::read(&path).unwrap();
        let c = back.direct().unwrap();
        assert_eq!(c.beta1, 2.74e-2);
        assert_eq!(c.beta2, -9.91e11);
        assert!(back.indirect().is_err());
    }

    #[test]
    fn canonical_discovery_maps_to_model_keys() {
        let selected = SelectedModel {
            support: vec!["cp0".into(), "cp1".into(), "cp4".into()],
            coefficients: vec![0.87, -3.6, -8.0e3],
            intercept: 0.87,
            lambda_selected: 0.01,
            cv_error: 1e-4,
        };
        let doc = CoefficientDoc::from_selected(MODEL_INDIRECT, &selected, metadata());
        let c = doc.indirect().unwrap();
        assert_eq!(c.alpha0, 0.87);
        assert_eq!(c.alpha1, -3.6);
        assert_eq!(c.alpha2, -8.0e3);
        assert_eq!(doc.support.as_ref().unwrap().len(), 3);
    }

    #[test]
    fn non_canonical_discovery_keeps_feature_names() {
        let selected = SelectedModel {
            support: vec!["omega".into(), "P_over_omega2".into()],
            coefficients: vec![0.03, 5.0],
            intercept: 0.0,
            lambda_selected: 0.01,
            cv_error: 1e-4,
        };
        let doc = CoefficientDoc::from_selected(MODEL_DIRECT, &selected, metadata());
        assert!(doc.coefficients.contains_key("P_over_omega2"));
        assert!(doc.direct().is_err());
    }
}
