use thiserror::Error;

#[derive(Debug, Error)]
pub enum LibraryError {
    #[error("feature library needs at least one record")]
    Empty,
    #[error("record {index} has non-positive rotational speed {omega}")]
    OmegaNotPositive { index: usize, omega: f64 },
    #[error("record {index} contains a non-finite value")]
    NonFinite { index: usize },
}

/// Input record for the direct `(P, omega)` library. `omega_dot` is the
/// time derivative of the rotational speed; steady grid data carries zeros,
/// which drop out as zero-variance columns.
#[derive(Debug, Clone, Copy)]
pub struct DirectRecord {
    pub power: f64,
    pub omega: f64,
    pub omega_dot: f64,
}

/// Input record for the indirect library over the power coefficient.
#[derive(Debug, Clone, Copy)]
pub struct IndirectRecord {
    pub c_p: f64,
    pub omega: f64,
}

/// Transformation applied to the airspeed target before fitting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TargetTransform {
    Identity,
    /// `y = V_a / ((omega / 2 pi) D)`, i.e. the advance ratio.
    PerRevTipSpeed { diameter: f64 },
}

impl TargetTransform {
    pub fn apply(&self, v_a: f64, omega: f64) -> f64 {
        match *self {
            TargetTransform::Identity => v_a,
            TargetTransform::PerRevTipSpeed { diameter } => {
                v_a / ((omega / (2.0 * std::f64::consts::PI)) * diameter)
            }
        }
    }

    /// Map a model output in transformed space back to airspeed.
    pub fn invert(&self, y: f64, omega: f64) -> f64 {
        match *self {
            TargetTransform::Identity => y,
            TargetTransform::PerRevTipSpeed { diameter } => {
                y * (omega / (2.0 * std::f64::consts::PI)) * diameter
            }
        }
    }
}

type Evaluator<R> = Box<dyn Fn(&R) -> f64 + Send + Sync>;

/// Ordered set of named candidate features plus the target transform.
pub struct FeatureLibrary<R> {
    features: Vec<(String, Evaluator<R>)>,
    pub target_transform: TargetTransform,
    /// Name of the constant feature, when the library declares one. The
    /// constant column maps to the unpenalized intercept during fitting and
    /// is reported back under this name in the selected support.
    pub constant_feature: Option<String>,
}

impl<R> FeatureLibrary<R> {
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn names(&self) -> Vec<String> {
        self.features.iter().map(|(n, _)| n.clone()).collect()
    }

    pub fn evaluate(&self, name: &str, record: &R) -> Option<f64> {
        self.features
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, f)| f(record))
    }

    /// Evaluate every feature over the records, column-major.
    pub fn design_columns(&self, records: &[R]) -> Vec<Vec<f64>> {
        self.features
            .iter()
            .map(|(_, f)| records.iter().map(f).collect())
            .collect()
    }
}

fn monomial_name(p_exp: u32, omega_exp: i32) -> String {
    let p_part = match p_exp {
        0 => String::new(),
        1 => "P".to_string(),
        k => format!("P{k}"),
    };
    let omega_part = match omega_exp {
        0 => String::new(),
        1 => "omega".to_string(),
        k if k > 1 => format!("omega{k}"),
        k => format!("over_omega{}", -k),
    };
    match (p_part.is_empty(), omega_part.is_empty()) {
        (false, false) => format!("{p_part}_{omega_part}"),
        (false, true) => p_part,
        (true, false) => omega_part,
        (true, true) => unreachable!("constant monomial is excluded"),
    }
}

fn validate_positive_omega(omegas: &[(usize, f64)]) -> Result<(), LibraryError> {
    for &(index, omega) in omegas {
        if !omega.is_finite() {
            return Err(LibraryError::NonFinite { index });
        }
        if omega <= 0.0 {
            return Err(LibraryError::OmegaNotPositive { index, omega });
        }
    }
    Ok(())
}

/// Candidate library for the direct model: monomials `P^a omega^b` with
/// `a` in `{0, 1, 2}` and `b` in `{-5..2}` (the constant excluded), plus the
/// rotational acceleration terms `omega_dot` and `omega_dot / omega`.
pub fn build_features_direct(
    records: &[DirectRecord],
) -> Result<FeatureLibrary<DirectRecord>, LibraryError> {
    if records.is_empty() {
        return Err(LibraryError::Empty);
    }
    for (i, r) in records.iter().enumerate() {
        if !(r.power.is_finite() && r.omega_dot.is_finite()) {
            return Err(LibraryError::NonFinite { index: i });
        }
    }
    validate_positive_omega(
        &records.iter().enumerate().map(|(i, r)| (i, r.omega)).collect::<Vec<_>>(),
    )?;

    let mut features: Vec<(String, Evaluator<DirectRecord>)> = Vec::new();
    for p_exp in 0..=2u32 {
        for omega_exp in -5..=2i32 {
            if p_exp == 0 && omega_exp == 0 {
                continue;
            }
            let name = monomial_name(p_exp, omega_exp);
            features.push((
                name,
                Box::new(move |r: &DirectRecord| {
                    r.power.powi(p_exp as i32) * r.omega.powi(omega_exp)
                }),
            ));
        }
    }
    features.push(("omega_dot".into(), Box::new(|r: &DirectRecord| r.omega_dot)));
    features.push((
        "omega_dot_over_omega".into(),
        Box::new(|r: &DirectRecord| r.omega_dot / r.omega),
    ));

    Ok(FeatureLibrary {
        features,
        target_transform: TargetTransform::Identity,
        constant_feature: None,
    })
}

/// Candidate library for the indirect model: powers `C_P^k`, `k` in
/// `{0..6}`, fit against the transformed target `V_a / ((omega/2pi) D)`.
pub fn build_features_indirect(
    records: &[IndirectRecord],
    diameter: f64,
) -> Result<FeatureLibrary<IndirectRecord>, LibraryError> {
    if records.is_empty() {
        return Err(LibraryError::Empty);
    }
    for (i, r) in records.iter().enumerate() {
        if !r.c_p.is_finite() {
            return Err(LibraryError::NonFinite { index: i });
        }
    }
    validate_positive_omega(
        &records.iter().enumerate().map(|(i, r)| (i, r.omega)).collect::<Vec<_>>(),
    )?;

    let mut features: Vec<(String, Evaluator<IndirectRecord>)> = Vec::new();
    for k in 0..=6u32 {
        features.push((
            format!("cp{k}"),
            Box::new(move |r: &IndirectRecord| r.c_p.powi(k as i32)),
        ));
    }

    Ok(FeatureLibrary {
        features,
        target_transform: TargetTransform::PerRevTipSpeed { diameter },
        constant_feature: Some("cp0".into()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direct_library_contents() {
        let recs = vec![DirectRecord { power: 10.0, omega: 500.0, omega_dot: 0.0 }];
        let lib = build_features_direct(&recs).unwrap();
        assert_eq!(lib.len(), 25);
        let names = lib.names();
        assert!(names.contains(&"omega".to_string()));
        assert!(names.contains(&"P2_over_omega5".to_string()));
        assert!(names.contains(&"omega_dot".to_string()));
        assert!(names.contains(&"omega_dot_over_omega".to_string()));
        assert!(!names.contains(&"".to_string()));

        let r = DirectRecord { power: 10.0, omega: 2.0, omega_dot: 0.5 };
        assert_eq!(lib.evaluate("omega", &r).unwrap(), 2.0);
        assert_eq!(lib.evaluate("P2_over_omega5", &r).unwrap(), 100.0 / 32.0);
        assert_eq!(lib.evaluate("omega_dot_over_omega", &r).unwrap(), 0.25);
    }

    #[test]
    fn direct_library_rejects_bad_omega() {
        let recs = vec![DirectRecord { power: 10.0, omega: 0.0, omega_dot: 0.0 }];
        assert!(matches!(
            build_features_direct(&recs),
            Err(LibraryError::OmegaNotPositive { index: 0, .. })
        ));
        assert!(matches!(build_features_direct(&[]), Err(LibraryError::Empty)));
    }

    #[test]
    fn indirect_library_contents() {
        let recs = vec![IndirectRecord { c_p: 0.05, omega: 400.0 }];
        let lib = build_features_indirect(&recs, 0.23).unwrap();
        assert_eq!(lib.len(), 7);
        let names = lib.names();
        for want in ["cp0", "cp1", "cp4"] {
            assert!(names.contains(&want.to_string()));
        }
        assert_eq!(lib.constant_feature.as_deref(), Some("cp0"));

        let r = IndirectRecord { c_p: 2.0, omega: 100.0 };
        assert_eq!(lib.evaluate("cp0", &r).unwrap(), 1.0);
        assert_eq!(lib.evaluate("cp4", &r).unwrap(), 16.0);
    }

    #[test]
    fn indirect_target_transform_depends_only_on_j() {
        let lib = build_features_indirect(
            &[IndirectRecord { c_p: 0.05, omega: 400.0 }],
            0.25,
        )
        .unwrap();
        // doubling omega and V_a together leaves the transformed target fixed
        let y1 = lib.target_transform.apply(10.0, 400.0);
        let y2 = lib.target_transform.apply(20.0, 800.0);
        assert!((y1 - y2).abs() < 1e-15);
        // and the transform matches the advance ratio definition
        let j = crate::models::advance_ratio(10.0, 400.0, 0.25).unwrap();
        assert!((y1 - j).abs() < 1e-15);
        // round trip
        let v = lib.target_transform.invert(y1, 400.0);
        assert!((v - 10.0).abs() < 1e-12);
    }
}
