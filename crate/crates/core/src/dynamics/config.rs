use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// How the source (2LS) talks to the target (oscillator).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingScheme {
    /// `g(a†σ + σ†a)` with the source decaying at `γσ`.
    Hamiltonian,
    /// As [`CouplingScheme::Hamiltonian`] but without the `γσ` decay of the
    /// source: all its excitation flows into the target.
    HamiltonianNoSourceDecay,
    /// Unidirectional coupling through the source's output field.
    Cascaded,
}

/// How the source is excited.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Drive {
    /// Incoherent pumping at rate `Pσ`.
    Incoherent,
    /// Laser through the single input channel of the source; its coherent
    /// part also reaches the target.
    CoherentSingleChannel,
    /// Laser through a channel of weight `ε₁`; the target only sees the
    /// source's emission, through a channel of weight `ε₂ = 1 − ε₁`.
    CoherentTwoChannel,
}

/// Frame in which the Hamiltonian is written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    /// Rotating at the laser frequency; the cw drive is time independent.
    #[default]
    Rotating,
    /// Laboratory frame. Only accepted when nothing would depend on time.
    Laboratory,
}

impl fmt::Display for CouplingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CouplingScheme::Hamiltonian => "hamiltonian",
            CouplingScheme::HamiltonianNoSourceDecay => "hamiltonian_no_source_decay",
            CouplingScheme::Cascaded => "cascaded",
        })
    }
}

impl fmt::Display for Drive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Drive::Incoherent => "incoherent",
            Drive::CoherentSingleChannel => "coherent_single_channel",
            Drive::CoherentTwoChannel => "coherent_two_channel",
        })
    }
}

impl std::str::FromStr for CouplingScheme {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "hamiltonian" => Ok(Self::Hamiltonian),
            "hamiltonian_no_source_decay" => Ok(Self::HamiltonianNoSourceDecay),
            "cascaded" => Ok(Self::Cascaded),
            _ => Err(format!("unknown coupling scheme `{s}`")),
        }
    }
}

impl std::str::FromStr for Drive {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "incoherent" => Ok(Self::Incoherent),
            "coherent_single_channel" => Ok(Self::CoherentSingleChannel),
            "coherent_two_channel" => Ok(Self::CoherentTwoChannel),
            _ => Err(format!("unknown drive `{s}`")),
        }
    }
}

/// Every physical parameter of one simulation. Rates and frequencies share
/// one unit, conventionally `γσ = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub coupling_scheme: CouplingScheme,
    pub drive: Drive,
    /// Radiative decay of the source into the mode that feeds the target.
    pub gamma_sigma: f64,
    pub gamma_a: f64,
    /// Incoherent pump rate `Pσ`.
    pub pump_sigma: f64,
    /// Coherent drive amplitude `Ωσ = √γσ·ℰ`.
    pub drive_sigma: f64,
    /// Weight of the laser input channel.
    pub epsilon_1: f64,
    pub freq_sigma: f64,
    pub freq_a: f64,
    pub freq_laser: f64,
    /// Extra source decay not redirected to the target.
    pub gamma_sigma_star: f64,
    /// Pure dephasing of the source.
    pub gamma_phi: f64,
    /// `N` in `g* = N√(γaγσ)/2`; Hamiltonian schemes only.
    pub coupling_boost: f64,
    pub n_max: usize,
    /// Truncation is accepted once `p(n_max)` falls below this.
    pub tail_tol: f64,
    #[serde(default)]
    pub frame: Frame,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            coupling_scheme: CouplingScheme::Cascaded,
            drive: Drive::CoherentTwoChannel,
            gamma_sigma: 1.0,
            gamma_a: 1.0,
            pump_sigma: 0.0,
            drive_sigma: 0.1,
            epsilon_1: 0.5,
            freq_sigma: 0.0,
            freq_a: 0.0,
            freq_laser: 0.0,
            gamma_sigma_star: 0.0,
            gamma_phi: 0.0,
            coupling_boost: 1.0,
            n_max: 10,
            tail_tol: 1e-8,
            frame: Frame::Rotating,
        }
    }
}

impl SystemConfig {
    /// Cascaded target excited by an incoherently pumped source.
    pub fn cascaded_incoherent(gamma_a: f64, pump: f64) -> Self {
        Self {
            drive: Drive::Incoherent,
            gamma_a,
            pump_sigma: pump,
            drive_sigma: 0.0,
            ..Self::default()
        }
    }

    /// Cascaded target excited by a coherently driven source through the
    /// two-channel arrangement.
    pub fn cascaded_coherent(gamma_a: f64, drive: f64, epsilon_1: f64) -> Self {
        Self {
            drive: Drive::CoherentTwoChannel,
            gamma_a,
            drive_sigma: drive,
            epsilon_1,
            ..Self::default()
        }
    }

    pub fn with_scheme(mut self, scheme: CouplingScheme) -> Self {
        self.coupling_scheme = scheme;
        self
    }

    pub fn with_n_max(mut self, n_max: usize) -> Self {
        self.n_max = n_max;
        self
    }

    pub fn detuning_sigma(&self) -> f64 {
        self.freq_sigma - self.freq_laser
    }

    pub fn detuning_a(&self) -> f64 {
        self.freq_a - self.freq_laser
    }

    pub fn epsilon_2(&self) -> f64 {
        1.0 - self.epsilon_1
    }

    /// Drive amplitude actually felt by the source, `Ω₀ = √ε₁·Ω` for the
    /// two-channel arrangement.
    pub fn effective_drive(&self) -> f64 {
        match self.drive {
            Drive::Incoherent => 0.0,
            Drive::CoherentSingleChannel => self.drive_sigma,
            Drive::CoherentTwoChannel => self.epsilon_1.sqrt() * self.drive_sigma,
        }
    }

    /// Hamiltonian coupling `g = N√(γaγσ)/2`.
    pub fn hamiltonian_coupling(&self) -> f64 {
        self.coupling_boost * (self.gamma_a * self.gamma_sigma).sqrt() / 2.0
    }

    /// Prefactor of the cascaded cross term, `√(κγaγσ)` with `κ = ε₂` for the
    /// two-channel drive and 1 otherwise.
    pub fn cascade_prefactor(&self) -> f64 {
        let kappa = match self.drive {
            Drive::CoherentTwoChannel => self.epsilon_2(),
            _ => 1.0,
        };
        (kappa * self.gamma_a * self.gamma_sigma).sqrt()
    }

    /// No excitation enters the system.
    pub fn is_undriven(&self) -> bool {
        match self.drive {
            Drive::Incoherent => self.pump_sigma == 0.0,
            _ => self.drive_sigma == 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("gamma_sigma", self.gamma_sigma),
            ("gamma_a", self.gamma_a),
            ("P_sigma", self.pump_sigma),
            ("Omega_sigma", self.drive_sigma),
            ("gamma_sigma_star", self.gamma_sigma_star),
            ("gamma_phi", self.gamma_phi),
        ];
        for (name, v) in nonneg {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::param(name, format!("must be finite and ≥ 0, got {v}")));
            }
        }
        for (name, v) in [("freq_sigma", self.freq_sigma), ("freq_a", self.freq_a), ("freq_laser", self.freq_laser)] {
            if !v.is_finite() {
                return Err(Error::param(name, "must be finite"));
            }
        }
        if !(0.0..=1.0).contains(&self.epsilon_1) {
            return Err(Error::param("epsilon_1", format!("must lie in [0, 1], got {}", self.epsilon_1)));
        }
        if !self.coupling_boost.is_finite() || self.coupling_boost < 1.0 {
            return Err(Error::param("N_boost", format!("must be ≥ 1, got {}", self.coupling_boost)));
        }
        if self.coupling_scheme == CouplingScheme::Cascaded && self.coupling_boost != 1.0 {
            return Err(Error::param(
                "N_boost",
                "the cascaded coupling cannot exceed √(γaγσ); boosting applies to Hamiltonian schemes only",
            ));
        }
        if self.n_max < 1 {
            return Err(Error::param("n_max", "must be at least 1"));
        }
        if !(self.tail_tol > 0.0 && self.tail_tol < 1.0) {
            return Err(Error::param("tail_tol", format!("must lie in (0, 1), got {}", self.tail_tol)));
        }
        if self.drive == Drive::CoherentSingleChannel {
            if self.coupling_scheme != CouplingScheme::Cascaded {
                return Err(Error::InvalidCombination {
                    scheme: self.coupling_scheme.to_string(),
                    drive: self.drive.to_string(),
                });
            }
            if self.gamma_sigma == 0.0 && self.drive_sigma > 0.0 {
                return Err(Error::param("gamma_sigma", "a source that cannot emit cannot be driven through its channel"));
            }
        }
        Ok(())
    }
}
