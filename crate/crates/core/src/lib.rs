//! Single-photon sources exciting a harmonic oscillator: master-equation
//! numerics, photon statistics and the geometry of the `(n_a, g⁽²⁾)` chart.

pub mod analytic;
pub mod chart;
pub mod dynamics;
pub mod error;
pub mod hilbert;
pub mod linalg;
pub mod observables;
pub mod ode;

pub use error::{Error, Result};
pub use hilbert::{DensityMatrix, HilbertSpec, Operator, StateVector, Subsystems};
