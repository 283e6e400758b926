//! Airspeed estimation for fixed-wing UAVs from propeller power and
//! rotational speed feedback.
//!
//! The library covers the full workflow:
//!
//! - [`bem`]: blade-element-momentum solver for axial inflow, used to
//!   generate `(P, omega, V_a)` training grids from a propeller geometry.
//! - [`models`]: nondimensional propeller quantities, ESC power and pitot
//!   corrections, and the two closed-form airspeed models (direct in
//!   `(P, omega)`, indirect via the power coefficient).
//! - [`sparse`]: LASSO with k-fold cross-validation over a monomial feature
//!   library, used to discover the sparse model structures from data.
//! - [`regime`]: the operating-regime machinery — cubic `C_P(J)` fits,
//!   critical advance ratios, and the angle-of-attack/low-airspeed gate.
//! - [`inflight`]: batch least-squares and recursive least-squares
//!   identification of model coefficients plus horizontal wind from GPS
//!   earth-frame velocity alone.
//! - [`pipeline`]: flight-log ingestion, evaluation metrics, and the CLI
//!   subcommand implementations.

pub mod bem;
pub mod inflight;
pub mod lstsq;
pub mod models;
pub mod pipeline;
pub mod regime;
pub mod sparse;
