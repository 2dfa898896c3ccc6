//! Configuration files, sweeps, output formats and the verification suite
//! behind the `sps` binary.

pub mod config;
pub mod emit;
pub mod sweep;
pub mod verify;
