//! Master equations of the source–target system and their solutions.

mod config;
mod correlation;
mod envelope;
mod liouvillian;
mod solve;

pub use config::{CouplingScheme, Drive, Frame, SystemConfig};
pub use correlation::{emission_spectrum, two_time_g2, Spectrum, SpectrumOptions, UNDEFINED_POPULATION};
pub use envelope::{numeric_envelope, target_point, EnvelopeOptions};
pub use liouvillian::{
    build_hamiltonian, build_liouvillian, build_liouvillian_with, build_source_liouvillian, BuildOptions, Liouvillian,
};
pub use solve::{
    evolve, propagate, solve_adaptive, solve_adaptive_with, steady_state, tail_mass, AdaptiveOptions, SteadySolution,
    RESIDUAL_TOL,
};
