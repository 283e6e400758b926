use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("blade_count must be >= 2, got {0}")]
    BladeCount(u32),
    #[error("diameter must be positive, got {0}")]
    Diameter(f64),
    #[error("hub radius {hub} must lie in (0, tip) with tip = {tip}")]
    HubRadius { hub: f64, tip: f64 },
    #[error("need at least 2 stations, got {0}")]
    TooFewStations(usize),
    #[error("stations must be sorted strictly by radius (violation at index {0})")]
    Unsorted(usize),
    #[error("station radius {r} outside open interval ({hub}, {tip})")]
    StationOutOfRange { r: f64, hub: f64, tip: f64 },
    #[error("station chord must be positive, got {0}")]
    Chord(f64),
    #[error("non-finite station value at index {0}")]
    NonFinite(usize),
    #[error("failed to read geometry file: {0}")]
    Io(#[from] std::io::Error),
    #[error("geometry file line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("geometry file missing key `{0}`")]
    MissingKey(&'static str),
}

/// One radial blade station: radius, chord and twist (angle between the
/// local chord line and the rotor plane).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BladeStation {
    pub radius: f64,
    pub chord: f64,
    /// [rad]
    pub twist: f64,
}

/// Propeller blade definition for the BEM solver.
#[derive(Debug, Clone)]
pub struct BladeGeometry {
    stations: Vec<BladeStation>,
    hub_radius: f64,
    tip_radius: f64,
    blade_count: u32,
    diameter: f64,
}

impl BladeGeometry {
    /// Validate and build a geometry. Stations must be strictly sorted by
    /// radius and lie strictly inside `(hub_radius, diameter / 2)`.
    pub fn new(
        diameter: f64,
        hub_radius: f64,
        blade_count: u32,
        stations: Vec<BladeStation>,
    ) -> Result<Self, GeometryError> {
        if blade_count < 2 {
            return Err(GeometryError::BladeCount(blade_count));
        }
        if !(diameter.is_finite() && diameter > 0.0) {
            return Err(GeometryError::Diameter(diameter));
        }
        let tip_radius = diameter / 2.0;
        if !(hub_radius.is_finite() && hub_radius > 0.0 && hub_radius < tip_radius) {
            return Err(GeometryError::HubRadius {
                hub: hub_radius,
                tip: tip_radius,
            });
        }
        if stations.len() < 2 {
            return Err(GeometryError::TooFewStations(stations.len()));
        }
        for (i, s) in stations.iter().enumerate() {
            if !(s.radius.is_finite() && s.chord.is_finite() && s.twist.is_finite()) {
                return Err(GeometryError::NonFinite(i));
            }
            if s.chord <= 0.0 {
                return Err(GeometryError::Chord(s.chord));
            }
            if s.radius <= hub_radius || s.radius >= tip_radius {
                return Err(GeometryError::StationOutOfRange {
                    r: s.radius,
                    hub: hub_radius,
                    tip: tip_radius,
                });
            }
            if i > 0 && s.radius <= stations[i - 1].radius {
                return Err(GeometryError::Unsorted(i));
            }
        }
        Ok(Self {
            stations,
            hub_radius,
            tip_radius,
            blade_count,
            diameter,
        })
    }

    /// Parse the structured-text geometry format:
    ///
    /// ```text
    /// diameter_m   = 0.23
    /// hub_radius_m = 0.013
    /// blade_count  = 2
    /// stations:
    /// # r_m   chord_m  twist_deg
    /// 0.0200  0.0140   36.5
    /// ...
    /// ```
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, GeometryError> {
        Self::from_str_table(&std::fs::read_to_string(path)?)
    }

    /// Parse the same format as [`Self::from_file`] from a string.
    pub fn from_str_table(text: &str) -> Result<Self, GeometryError> {
        let mut diameter = None;
        let mut hub_radius = None;
        let mut blade_count = None;
        let mut stations = Vec::new();
        let mut in_stations = false;

        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let lineno = i + 1;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if !in_stations {
                if line == "stations:" {
                    in_stations = true;
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| {
                    GeometryError::Malformed {
                        line: lineno,
                        reason: "expected `key = value`".into(),
                    }
                })?;
                let value = value.trim();
                match key.trim() {
                    "diameter_m" => diameter = Some(parse_f64(value, lineno)?),
                    "hub_radius_m" => hub_radius = Some(parse_f64(value, lineno)?),
                    "blade_count" => {
                        blade_count =
                            Some(value.parse::<u32>().map_err(|_| GeometryError::Malformed {
                                line: lineno,
                                reason: format!("bad blade_count `{value}`"),
                            })?)
                    }
                    other => {
                        return Err(GeometryError::Malformed {
                            line: lineno,
                            reason: format!("unknown key `{other}`"),
                        })
                    }
                }
            } else {
                let mut cols = line.split_whitespace().map(str::parse::<f64>);
                match (cols.next(), cols.next(), cols.next(), cols.next()) {
                    (Some(Ok(r)), Some(Ok(c)), Some(Ok(t)), None) => stations.push(BladeStation {
                        radius: r,
                        chord: c,
                        twist: t.to_radians(),
                    }),
                    _ => {
                        return Err(GeometryError::Malformed {
                            line: lineno,
                            reason: "expected 3 numeric columns (r_m, chord_m, twist_deg)".into(),
                        })
                    }
                }
            }
        }

        Self::new(
            diameter.ok_or(GeometryError::MissingKey("diameter_m"))?,
            hub_radius.ok_or(GeometryError::MissingKey("hub_radius_m"))?,
            blade_count.ok_or(GeometryError::MissingKey("blade_count"))?,
            stations,
        )
    }

    pub fn stations(&self) -> &[BladeStation] {
        &self.stations
    }

    pub fn hub_radius(&self) -> f64 {
        self.hub_radius
    }

    pub fn tip_radius(&self) -> f64 {
        self.tip_radius
    }

    pub fn blade_count(&self) -> u32 {
        self.blade_count
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Chord and twist at an arbitrary radius, linearly interpolated between
    /// stations and held constant beyond the first/last station.
    pub fn section_at(&self, r: f64) -> (f64, f64) {
        let s = &self.stations;
        let n = s.len();
        if r <= s[0].radius {
            return (s[0].chord, s[0].twist);
        }
        if r >= s[n - 1].radius {
            return (s[n - 1].chord, s[n - 1].twist);
        }
        let hi = s.partition_point(|st| st.radius <= r);
        let lo = hi - 1;
        let t = (r - s[lo].radius) / (s[hi].radius - s[lo].radius);
        (
            s[lo].chord + t * (s[hi].chord - s[lo].chord),
            s[lo].twist + t * (s[hi].twist - s[lo].twist),
        )
    }
}

fn parse_f64(value: &str, line: usize) -> Result<f64, GeometryError> {
    value.parse::<f64>().map_err(|_| GeometryError::Malformed {
        line,
        reason: format!("bad number `{value}`"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn two_station() -> BladeGeometry {
        BladeGeometry::new(
            0.2,
            0.02,
            2,
            vec![
                BladeStation {
                    radius: 0.04,
                    chord: 0.02,
                    twist: 0.4,
                },
                BladeStation {
                    radius: 0.08,
                    chord: 0.015,
                    twist: 0.2,
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn tip_radius_is_half_diameter() {
        let g = two_station();
        assert_eq!(g.tip_radius(), 0.1);
    }

    #[test]
    fn rejects_station_at_tip() {
        let err = BladeGeometry::new(
            0.2,
            0.02,
            2,
            vec![
                BladeStation {
                    radius: 0.04,
                    chord: 0.02,
                    twist: 0.4,
                },
                BladeStation {
                    radius: 0.1,
                    chord: 0.015,
                    twist: 0.2,
                },
            ],
        );
        assert!(matches!(err, Err(GeometryError::StationOutOfRange { .. })));
    }

    #[test]
    fn rejects_single_blade() {
        let err = BladeGeometry::new(0.2, 0.02, 1, vec![]);
        assert!(matches!(err, Err(GeometryError::BladeCount(1))));
    }

    #[test]
    fn interpolates_sections() {
        let g = two_station();
        let (chord, twist) = g.section_at(0.06);
        assert!((chord - 0.0175).abs() < 1e-15);
        assert!((twist - 0.3).abs() < 1e-15);
        // held outside the station span
        assert_eq!(g.section_at(0.03), (0.02, 0.4));
        assert_eq!(g.section_at(0.09), (0.015, 0.2));
    }

    #[test]
    fn roundtrips_through_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("prop.geom");
        std::fs::write(
            &path,
            "# sample\ndiameter_m = 0.2\nhub_radius_m = 0.02\nblade_count = 2\nstations:\n0.04 0.02 22.918311805232932\n0.08 0.015 11.459155902616466\n",
        )
        .unwrap();
        let g = BladeGeometry::from_file(&path).unwrap();
        assert_eq!(g.blade_count(), 2);
        assert_eq!(g.stations().len(), 2);
        assert!((g.stations()[0].twist - 0.4).abs() < 1e-12);
    }
}
