//! Two-time correlators by the quantum regression theorem.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::liouvillian::Liouvillian;
use super::solve::{propagate, trace_with};
use crate::error::{Error, Result};
use crate::hilbert::{expectation, DensityMatrix, Operator};
use crate::ode::Tolerances;

/// Below this the normalization of a correlator is meaningless.
pub const UNDEFINED_POPULATION: f64 = 1e-12;

/// Relative height below which a local maximum of a spectrum is not a peak.
pub const PEAK_FLOOR: f64 = 1e-3;

fn population(rho: &DensityMatrix, c: &Operator) -> Result<f64> {
    let n = expectation(rho, &(&c.dagger() * c))?.re;
    if n < UNDEFINED_POPULATION {
        return Err(Error::UndefinedCorrelator { population: n });
    }
    Ok(n)
}

/// Integrates from τ = 0 even when the requested grid starts later.
fn with_origin(grid: &[f64]) -> Result<(Vec<f64>, usize)> {
    if grid.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::param("tau_grid", "entries must be finite and ≥ 0"));
    }
    match grid.first() {
        Some(&t) if t > 0.0 => Ok((std::iter::once(0.0).chain(grid.iter().copied()).collect(), 1)),
        _ => Ok((grid.to_vec(), 0)),
    }
}

/// `g⁽²⁾(τ) = Tr[c†c e^{Lτ}(c ρ c†)] / ⟨c†c⟩²`.
pub fn two_time_g2(l: &Liouvillian, rho_ss: &DensityMatrix, c: &Operator, tau_grid: &[f64]) -> Result<Vec<f64>> {
    l.spec().check_same(&rho_ss.spec())?;
    l.spec().check_same(&c.spec())?;
    let n = population(rho_ss, c)?;
    let (grid, skip) = with_origin(tau_grid)?;
    let cd = c.dagger();
    // Scaled by 1/n so the integrator tolerances act relative to the signal.
    let x0 = c.entries().dot(rho_ss.entries()).dot(cd.entries()) / C64::new(n, 0.0);
    let number = (&cd * c).into_entries();
    let mut out = vec![0.0; grid.len()];
    propagate(l, &x0, &grid, Tolerances::default(), |k, x| {
        out[k] = trace_with(&number, x).re / n;
    })?;
    Ok(out.split_off(skip))
}

/// Incoherent emission spectrum on a frequency grid, with the elastic part
/// reported separately.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub omega: Vec<f64>,
    /// Spectral density of the fluctuations, `∫ S dω = ⟨c†c⟩ − |⟨c⟩|²`.
    pub density: Vec<f64>,
    /// `|⟨c⟩|²`, the weight of the δ-peak at the laser frequency.
    pub coherent_weight: f64,
    /// `⟨c†c⟩`.
    pub population: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumOptions {
    /// Upper limit of the τ integral.
    pub tau_max: f64,
    /// Sampling step of the correlator.
    pub dt: f64,
}

impl SpectrumOptions {
    /// `τ_max = 20/min(γσ, γa)` with the correlator sampled finely enough
    /// for frequencies up to `omega_max`.
    pub fn for_rates(gamma_sigma: f64, gamma_a: f64, omega_max: f64) -> Self {
        let slow = [gamma_sigma, gamma_a].into_iter().filter(|g| *g > 0.0).fold(f64::INFINITY, f64::min);
        let tau_max = if slow.is_finite() { 20.0 / slow } else { 20.0 };
        let dt = (0.1 / omega_max.abs().max(1.0)).min(tau_max / 2000.0);
        Self { tau_max, dt }
    }
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self { tau_max: 20.0, dt: 5e-3 }
    }
}

/// `S(ω) = (1/π) Re ∫₀^∞ ⟨δc†(0) δc(τ)⟩ e^{iωτ} dτ`, frequencies measured in
/// the frame of the Liouvillian. The correlator is propagated by regression
/// and integrated by the trapezoidal rule.
pub fn emission_spectrum(
    l: &Liouvillian,
    rho_ss: &DensityMatrix,
    c: &Operator,
    omega_grid: &[f64],
    options: SpectrumOptions,
) -> Result<Spectrum> {
    l.spec().check_same(&rho_ss.spec())?;
    l.spec().check_same(&c.spec())?;
    if !(options.tau_max > 0.0 && options.dt > 0.0 && options.dt < options.tau_max) {
        return Err(Error::param("options", "need 0 < dt < tau_max"));
    }
    let n = population(rho_ss, c)?;
    let mean = expectation(rho_ss, c)?;
    let coherent = mean.norm_sqr();

    let steps = (options.tau_max / options.dt).ceil() as usize;
    let h = options.tau_max / steps as f64;
    let grid: Vec<f64> = (0..=steps).map(|k| k as f64 * h).collect();
    // e^{Lτ} fixes ρ, so propagating ρc† − ⟨c†⟩ρ subtracts |⟨c⟩|² exactly.
    let mut x0 = rho_ss.entries().dot(c.dagger().entries()) - rho_ss.entries() * mean.conj();
    let scale = x0.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let scale = if scale > 0.0 { scale } else { 1.0 };
    x0.mapv_inplace(|z| z / scale);
    let mut f = vec![C64::new(0.0, 0.0); grid.len()];
    propagate(l, &x0, &grid, Tolerances::default(), |k, x| {
        f[k] = trace_with(c.entries(), x) * scale;
    })?;

    let density = omega_grid
        .iter()
        .map(|&w| {
            let rot = C64::from_polar(1.0, w * h);
            let mut phase = C64::new(1.0, 0.0);
            let mut acc = C64::new(0.0, 0.0);
            for (k, fk) in f.iter().enumerate() {
                let weight = if k == 0 || k == steps { 0.5 } else { 1.0 };
                acc += fk * phase * weight;
                phase *= rot;
                if k % 256 == 255 {
                    // Resynchronize the phase recurrence.
                    phase = C64::from_polar(1.0, w * h * (k + 1) as f64);
                }
            }
            (acc * h).re / std::f64::consts::PI
        })
        .collect();

    Ok(Spectrum {
        omega: omega_grid.to_vec(),
        density,
        coherent_weight: coherent,
        population: n,
    })
}

impl Spectrum {
    /// Indices of local maxima of the density at least `PEAK_FLOOR` times
    /// the global maximum. The floor discards the ripple left in the tails
    /// by cutting the correlator off at `tau_max`.
    pub fn peaks(&self) -> Vec<usize> {
        let s = &self.density;
        let floor = PEAK_FLOOR * s.iter().copied().fold(0.0, f64::max);
        (1..s.len().saturating_sub(1))
            .filter(|&k| s[k] > s[k - 1] && s[k] >= s[k + 1] && s[k] >= floor)
            .collect()
    }

    /// Full width at half maximum of the peak at index `k`, by linear
    /// interpolation of the half-height crossings. `None` if the curve does
    /// not fall to half height on both sides within the grid.
    pub fn fwhm(&self, k: usize) -> Option<f64> {
        let s = &self.density;
        let w = &self.omega;
        let half = s[k] / 2.0;
        let mut left = None;
        for j in (0..k).rev() {
            if s[j] <= half {
                let t = (half - s[j]) / (s[j + 1] - s[j]);
                left = Some(w[j] + t * (w[j + 1] - w[j]));
                break;
            }
        }
        let mut right = None;
        for j in k + 1..s.len() {
            if s[j] <= half {
                let t = (s[j - 1] - half) / (s[j - 1] - s[j]);
                right = Some(w[j - 1] + t * (w[j] - w[j - 1]));
                break;
            }
        }
        Some(right? - left?)
    }

    /// Trapezoidal integral of the density over the grid.
    pub fn integral(&self) -> f64 {
        self.omega
            .windows(2)
            .zip(self.density.windows(2))
            .map(|(w, s)| 0.5 * (w[1] - w[0]) * (s[0] + s[1]))
            .sum()
    }
}
