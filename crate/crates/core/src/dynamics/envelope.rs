//! Envelopes of best antibunching computed from the steady state, for the
//! configurations without closed forms.

use super::config::{Drive, SystemConfig};
use super::liouvillian::{build_liouvillian_with, BuildOptions};
use super::solve::{solve_adaptive_with, steady_state, tail_mass, AdaptiveOptions};
use crate::analytic::{envelope_over_ratio, scan_roots, EnvelopePoint};
use crate::error::{Error, Result};
use crate::observables::{gn_equal_time, population, Mode};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeOptions {
    /// `log₁₀(γa/γσ)` range scanned before refinement.
    pub log_ratio: (f64, f64),
    pub ratio_points: usize,
    /// Final bracket width in `log₁₀ r`.
    pub refine_tol: f64,
    /// Drive (pump or `Ω`) range in units of `γσ(1+r)`.
    pub drive_range: (f64, f64),
    pub drive_points: usize,
    /// Truncations beyond this count as a population above any target.
    pub max_n_max: usize,
    pub build: BuildOptions,
}

impl Default for EnvelopeOptions {
    fn default() -> Self {
        Self {
            log_ratio: (-2.0, 2.0),
            ratio_points: 17,
            refine_tol: 1e-3,
            drive_range: (1e-3, 1e2),
            drive_points: 36,
            max_n_max: 48,
            build: BuildOptions::default(),
        }
    }
}

/// Sets the searched drive: `Pσ`, `Ωσ`, or for the two-channel arrangement
/// the effective `Ω₀ = √ε₁·Ωσ`, which keeps `ε₁ → 0` usable.
fn set_drive(c: &mut SystemConfig, drive: f64) {
    match c.drive {
        Drive::Incoherent => c.pump_sigma = drive,
        Drive::CoherentSingleChannel => c.drive_sigma = drive,
        Drive::CoherentTwoChannel => c.drive_sigma = drive / c.epsilon_1.sqrt(),
    }
}

/// Target `(n_a, g⁽²⁾)` of `base` with `γa = r·γσ` and the drive set to `d`.
pub fn target_point(base: &SystemConfig, ratio: f64, drive: f64, options: AdaptiveOptions) -> Result<(f64, f64)> {
    let mut c = *base;
    c.gamma_a = ratio * base.gamma_sigma;
    set_drive(&mut c, drive);
    let sol = solve_adaptive_with(&c, options)?;
    Ok((population(&sol.rho, Mode::Target)?, gn_equal_time(&sol.rho, 2)?))
}

/// Lowest target `g⁽²⁾` at population `n_a` over the drive and `γa/γσ`,
/// with every other parameter taken from `base`. The drive is `Pσ` for the
/// incoherent source, `Ω₀` for the two-channel drive and `Ωσ` otherwise.
pub fn numeric_envelope(base: &SystemConfig, n_a: f64, options: EnvelopeOptions) -> Result<EnvelopePoint> {
    base.validate()?;
    if base.drive == Drive::CoherentTwoChannel && base.epsilon_1 == 0.0 {
        return Err(Error::param("epsilon_1", "the two-channel source is undriven at ε₁ = 0"));
    }
    if !(n_a.is_finite() && n_a > 0.0) {
        return Err(Error::param("n_a", format!("must be finite and > 0, got {n_a}")));
    }
    let (lo, hi) = options.drive_range;
    if !(lo > 0.0 && lo < hi && options.drive_points >= 2) {
        return Err(Error::param("drive_range", "need 0 < lo < hi and at least 2 points"));
    }
    let adaptive = AdaptiveOptions {
        max_n_max: options.max_n_max,
        build: options.build,
    };
    let mut point = envelope_over_ratio(n_a, options.log_ratio, options.ratio_points, options.refine_tol, |r| {
        let scale = base.gamma_sigma * (1.0 + r);
        let excess = |d: f64| {
            if above(base, r, d, n_a, &options.build) {
                return f64::INFINITY;
            }
            match target_point(base, r, d, adaptive) {
                Ok((n, _)) => n - n_a,
                Err(Error::Truncation { .. }) => f64::INFINITY,
                Err(_) => f64::NAN,
            }
        };
        scan_roots(excess, lo * scale, hi * scale, options.drive_points, 1e-9)
            .into_iter()
            .filter_map(|d| target_point(base, r, d, adaptive).ok().map(|(_, g2)| (g2, d)))
            .min_by(|a, b| a.0.total_cmp(&b.0))
    })?;
    point.drive /= base.gamma_sigma;
    Ok(point)
}

/// Cheap rejection at the base truncation: an unconverged tail together
/// with a population well past the target means the point cannot be a root.
fn above(base: &SystemConfig, ratio: f64, drive: f64, n_a: f64, build: &BuildOptions) -> bool {
    let mut c = *base;
    c.gamma_a = ratio * base.gamma_sigma;
    set_drive(&mut c, drive);
    let Ok(rho) = build_liouvillian_with(&c, build).and_then(|l| steady_state(&l)) else {
        return false;
    };
    tail_mass(&rho) >= c.tail_tol && population(&rho, Mode::Target).is_ok_and(|n| n > 2.0 * n_a + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{coherent_envelope, incoherent_envelope};

    #[test]
    fn incoherent_envelope_from_dynamics() {
        let base = SystemConfig::cascaded_incoherent(1.0, 1.0);
        let e = numeric_envelope(&base, 0.5, EnvelopeOptions::default()).unwrap();
        assert!((e.g2 - incoherent_envelope(0.5)).abs() < 1e-6, "{e:?}");
        assert!((e.drive - 1.0).abs() < 1e-2);
    }

    #[test]
    fn coherent_envelope_from_dynamics() {
        let base = SystemConfig::cascaded_coherent(1.0, 1.0, 0.5);
        let e = numeric_envelope(&base, 0.25, EnvelopeOptions::default()).unwrap();
        let exact = coherent_envelope(0.25, 0.5).unwrap();
        assert!((e.g2 - exact.g2).abs() < 1e-5 * exact.g2.max(1e-3), "{e:?} vs {exact:?}");
    }

    #[test]
    fn unreachable_population() {
        let base = SystemConfig::cascaded_incoherent(1.0, 1.0);
        assert!(matches!(
            numeric_envelope(&base, 1.5, EnvelopeOptions::default()),
            Err(Error::Infeasible(_))
        ));
    }
}
