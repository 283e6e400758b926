//! Blade-element-momentum solver for axial inflow.
//!
//! The section solve uses the single-residual inflow-angle formulation with
//! Prandtl hub and tip loss factors, bracketed on `(0, pi/2]` and refined by
//! bisection. Rotor loads come from trapezoidal integration of the section
//! loads over the supplied stations. All functions are pure; grid points may
//! be evaluated concurrently and the result is independent of order.

pub mod geometry;
pub mod polar;
pub mod rotor;
pub mod sample;
pub mod section;

pub use geometry::{BladeGeometry, BladeStation, GeometryError};
pub use polar::{AirfoilPolar, PolarError};
pub use rotor::{
    generate_dataset, read_dataset_csv, solve_rotor, write_dataset_csv, DatasetError, DatasetRow,
    RotorPerformance, SweepRange,
};
pub use section::{
    ning_residual, solve_section, FlowCondition, FlowError, SectionError, SectionSolution,
};
