//! The bundled sample propeller: a plausible two-blade small-UAV geometry
//! (0.23 m diameter) with a cambered low-Reynolds section polar. The text in
//! `data/` is the canonical definition; it is embedded here so library users
//! and tests get the same rotor without touching the filesystem.

use super::geometry::BladeGeometry;
use super::polar::AirfoilPolar;

pub const GEOMETRY_TEXT: &str = include_str!("../../../../data/propeller.geom");
pub const POLAR_TEXT: &str = include_str!("../../../../data/airfoil.polar");

/// Parse the bundled geometry and polar.
pub fn sample_rotor() -> (BladeGeometry, AirfoilPolar) {
    let geom = BladeGeometry::from_str_table(GEOMETRY_TEXT).expect("bundled geometry is valid");
    let polar = AirfoilPolar::from_str_table(POLAR_TEXT).expect("bundled polar is valid");
    (geom, polar)
}
