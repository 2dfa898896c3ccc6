//! Closed-form results for the cascaded source–target problem and the
//! envelopes of best antibunching derived from them.
//!
//! Geometry functions take rates in units of `γσ`: `r = γa/γσ`, and pumps and
//! drives are likewise divided by `γσ`.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn nonneg(name: &'static str, v: f64) -> Result<()> {
    if !(v.is_finite() && v >= 0.0) {
        return Err(Error::param(name, format!("must be finite and ≥ 0, got {v}")));
    }
    Ok(())
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::param(name, format!("must be finite and > 0, got {v}")));
    }
    Ok(())
}

/// The family `γ_ij = i·γa + j·γσ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateCombo {
    pub gamma_a: f64,
    pub gamma_sigma: f64,
}

impl RateCombo {
    pub fn new(gamma_sigma: f64, gamma_a: f64) -> Self {
        Self { gamma_a, gamma_sigma }
    }

    pub fn g(&self, i: u32, j: u32) -> f64 {
        i as f64 * self.gamma_a + j as f64 * self.gamma_sigma
    }
}

/// Population and second-order correlation of the target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetStats {
    pub n_a: f64,
    pub g2: f64,
}

/// The incoherently pumped two-level source on its own.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IncoherentSourceStats {
    pub n_sigma: f64,
    /// Width of the Lorentzian emission line, `γσ + P`.
    pub linewidth: f64,
}

impl IncoherentSourceStats {
    /// `g⁽²⁾(τ) = 1 − e^{−(γσ+P)τ}`.
    pub fn g2_tau(&self, tau: f64) -> f64 {
        1.0 - (-self.linewidth * tau.abs()).exp()
    }
}

pub fn incoherent_source_stats(pump: f64, gamma_sigma: f64) -> Result<IncoherentSourceStats> {
    nonneg("P_sigma", pump)?;
    nonneg("gamma_sigma", gamma_sigma)?;
    let total = gamma_sigma + pump;
    if total == 0.0 {
        return Err(Error::param("gamma_sigma", "γσ + P must be > 0"));
    }
    Ok(IncoherentSourceStats {
        n_sigma: pump / total,
        linewidth: total,
    })
}

/// `n_a = 4Pγσ/((γσ+P)(γσ+P+γa))`, `g⁽²⁾ = 2(γσ+P)/(γσ+P+3γa)`.
pub fn incoherent_target_stats(pump: f64, gamma_sigma: f64, gamma_a: f64) -> Result<TargetStats> {
    nonneg("P_sigma", pump)?;
    nonneg("gamma_sigma", gamma_sigma)?;
    nonneg("gamma_a", gamma_a)?;
    let s = gamma_sigma + pump;
    if s == 0.0 || s + gamma_a == 0.0 {
        return Err(Error::param("gamma_sigma", "rates must not all vanish"));
    }
    Ok(TargetStats {
        n_a: 4.0 * pump * gamma_sigma / (s * (s + gamma_a)),
        g2: 2.0 * s / (s + 3.0 * gamma_a),
    })
}

/// Trajectories of the incoherently excited target in the `(n_a, g⁽²⁾)`
/// plane at fixed `r = γa/γσ`, parametrized by the pump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IncoherentGeometry {
    pub ratio: f64,
}

pub fn incoherent_geometry(ratio: f64) -> Result<IncoherentGeometry> {
    positive("gamma_a/gamma_sigma", ratio)?;
    Ok(IncoherentGeometry { ratio })
}

/// `g⁽²⁾ = 2n_a/(3 − 2n_a)`, the best antibunching an incoherent source can
/// give at population `n_a < 1`.
pub fn incoherent_envelope(n_a: f64) -> f64 {
    2.0 * n_a / (3.0 - 2.0 * n_a)
}

impl IncoherentGeometry {
    /// Vanishing pump: `(0, 2/(1+3r))`.
    pub fn start(&self) -> (f64, f64) {
        (0.0, 2.0 / (1.0 + 3.0 * self.ratio))
    }

    /// Pump (in units of `γσ`) with the largest population, `√(1+r)`.
    pub fn turning_pump(&self) -> f64 {
        (1.0 + self.ratio).sqrt()
    }

    /// `(4(2+r−2√(1+r))/r², 2/(3√(1+r)−2))`.
    pub fn turning_point(&self) -> (f64, f64) {
        let r = self.ratio;
        let s = (1.0 + r).sqrt();
        // 4(2+r−2s)/r² rewritten without the cancellation at small r.
        (4.0 / ((1.0 + s) * (1.0 + s)), 2.0 / (3.0 * s - 2.0))
    }

    /// Pump at which the trajectory touches the envelope, `P = γσ`.
    pub fn optimum_pump(&self) -> f64 {
        1.0
    }

    /// Point reached at pump `p` (units of `γσ`).
    pub fn at_pump(&self, p: f64) -> TargetStats {
        let s = 1.0 + p;
        TargetStats {
            n_a: 4.0 * p / (s * (s + self.ratio)),
            g2: 2.0 * s / (s + 3.0 * self.ratio),
        }
    }

    /// The trajectory with the pump eliminated:
    /// `n_a = (2/3)(2−g)(3gr − (2−g)) / (g(1+g)r²)`.
    pub fn trajectory(&self, g2: f64) -> f64 {
        let (g, r) = (g2, self.ratio);
        2.0 / 3.0 * (2.0 - g) * (3.0 * g * r - (2.0 - g)) / (g * (1.0 + g) * r * r)
    }

    /// Pumps (units of `γσ`, ascending) giving population `n_a`: two below
    /// the turning point, one at it, none above.
    pub fn pumps_for_population(&self, n_a: f64) -> Vec<f64> {
        // With u = 1+P: n_a u² + (n_a r − 4)u + 4 = 0.
        let r = self.ratio;
        let b = n_a * r - 4.0;
        let disc = b * b - 16.0 * n_a;
        if n_a <= 0.0 || disc < 0.0 {
            return Vec::new();
        }
        let q = -0.5 * (b - disc.sqrt());
        let mut u = vec![q / n_a, 4.0 / q];
        u.sort_by(f64::total_cmp);
        if disc == 0.0 {
            u.pop();
        }
        u.into_iter().filter(|&u| u > 1.0).map(|u| u - 1.0).collect()
    }
}

/// A point on an envelope together with the parameters that realize it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopePoint {
    pub n_a: f64,
    pub g2: f64,
    /// `γa/γσ` at the optimum.
    pub ratio: f64,
    /// Pump `P/γσ` (incoherent) or effective drive `Ω₀/γσ` (coherent).
    pub drive: f64,
}

/// Minimizes `branch(r)` over `log₁₀ r ∈ [log_lo, log_hi]`: a uniform scan
/// followed by golden-section refinement around the best grid point down to
/// a bracket of width `refine_tol` in `log₁₀ r`.
/// `branch(r)` returns the lowest `g⁽²⁾` reaching `n_a` at ratio `r` and the
/// drive realizing it, or `None` if the trajectory never gets there.
pub fn envelope_over_ratio<F>(
    n_a: f64,
    (log_lo, log_hi): (f64, f64),
    points: usize,
    refine_tol: f64,
    branch: F,
) -> Result<EnvelopePoint>
where
    F: Fn(f64) -> Option<(f64, f64)> + Sync,
{
    if !(log_lo < log_hi) || points < 3 {
        return Err(Error::param("ratio_grid", "need log_lo < log_hi and at least 3 points"));
    }
    let eval = |lr: f64| branch(10f64.powf(lr)).map_or(f64::INFINITY, |b| b.0);
    let step = (log_hi - log_lo) / (points - 1) as f64;
    let grid: Vec<f64> = (0..points).map(|k| log_lo + k as f64 * step).collect();
    let vals: Vec<f64> = grid.par_iter().map(|&lr| eval(lr)).collect();
    let (k, _) = vals
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty grid");
    if !vals[k].is_finite() {
        return Err(Error::Infeasible(format!("no trajectory reaches n_a = {n_a}")));
    }
    let (mut a, mut b) = (grid[k.saturating_sub(1)], grid[(k + 1).min(points - 1)]);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (eval(c), eval(d));
    for _ in 0..100 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = eval(d);
        }
        if b - a < refine_tol {
            break;
        }
    }
    let lr = if fc <= fd { c } else { d };
    let best = if vals[k] < fc.min(fd) { grid[k] } else { lr };
    let ratio = 10f64.powf(best);
    let (g2, drive) = branch(ratio).expect("evaluated before");
    Ok(EnvelopePoint { n_a, g2, ratio, drive })
}

/// Roots of `f` on `[lo, hi]` (both > 0): sign changes on a log grid of
/// `points` nodes, each refined by the Illinois variant of regula falsi to
/// relative width `rel_tol`. Non-finite samples break brackets.
pub fn scan_roots<F>(f: F, lo: f64, hi: f64, points: usize, rel_tol: f64) -> Vec<f64>
where
    F: Fn(f64) -> f64 + Sync,
{
    let (llo, lhi) = (lo.log10(), hi.log10());
    let xs: Vec<f64> = (0..points)
        .map(|k| 10f64.powf(llo + (lhi - llo) * k as f64 / (points - 1) as f64))
        .collect();
    let ys: Vec<f64> = xs.par_iter().map(|&x| f(x)).collect();
    let mut roots = Vec::new();
    for k in 0..points {
        if ys[k] == 0.0 {
            roots.push(xs[k]);
            continue;
        }
        if k + 1 == points || !(ys[k] * ys[k + 1] < 0.0) {
            continue;
        }
        let (mut a, mut b, mut fa, mut fb) = (xs[k], xs[k + 1], ys[k], ys[k + 1]);
        let mut side = 0;
        for _ in 0..200 {
            if b - a <= rel_tol * b {
                break;
            }
            let m = (a * fb - b * fa) / (fb - fa);
            let m = if m > a && m < b { m } else { 0.5 * (a + b) };
            let fm = f(m);
            if fm == 0.0 || !fm.is_finite() {
                a = m;
                b = m;
                break;
            }
            if fa * fm < 0.0 {
                b = m;
                fb = fm;
                if side == -1 {
                    fa *= 0.5;
                }
                side = -1;
            } else {
                a = m;
                fa = fm;
                if side == 1 {
                    fb *= 0.5;
                }
                side = 1;
            }
        }
        roots.push(0.5 * (a + b));
    }
    roots
}

/// Numerical envelope of the incoherent trajectories: at each `r` the lower
/// of the two pumps reaching `n_a`, minimized over `r`.
pub fn incoherent_envelope_numeric(n_a: f64) -> Result<EnvelopePoint> {
    positive("n_a", n_a)?;
    envelope_over_ratio(n_a, (-4.0, 4.0), 401, 1e-9, |r| {
        let geo = IncoherentGeometry { ratio: r };
        let p = *geo.pumps_for_population(n_a).first()?;
        Some((geo.at_pump(p).g2, p))
    })
}

/// Two-channel coherent drive, resonant: the closed forms for `n_a` and
/// `g⁽²⁾` in terms of `Ω₀ = √ε₁·Ω`.
pub fn coherent_target_stats(omega: f64, epsilon_1: f64, gamma_sigma: f64, gamma_a: f64) -> Result<TargetStats> {
    nonneg("Omega_sigma", omega)?;
    if !(0.0..=1.0).contains(&epsilon_1) {
        return Err(Error::param("epsilon_1", format!("must lie in [0, 1], got {epsilon_1}")));
    }
    positive("gamma_sigma", gamma_sigma)?;
    positive("gamma_a", gamma_a)?;
    Ok(coherent_stats_omega0(epsilon_1.sqrt() * omega, epsilon_1, RateCombo::new(gamma_sigma, gamma_a)))
}

/// The same closed forms with the effective drive `Ω₀` as the argument. This
/// stays meaningful as `ε₁ → 0` at fixed `Ω₀`.
pub fn coherent_stats_omega0(omega0: f64, epsilon_1: f64, rates: RateCombo) -> TargetStats {
    let g = |i, j| rates.g(i, j);
    let w2 = omega0 * omega0;
    let w4 = w2 * w2;
    let (g01, g10, g11, g12, g21, g31, g32) = (g(0, 1), g(1, 0), g(1, 1), g(1, 2), g(2, 1), g(3, 1), g(3, 2));

    let n_a = 16.0 * (1.0 - epsilon_1) * g01 * w2 * (g11 * g11 * g12 + 8.0 * g10 * w2)
        / (g10 * g11 * (g01 * g01 + 8.0 * w2) * (g11 * g12 + 16.0 * w2));

    let poly = g11 * g21 * g21 * g31 * g31 * g12 * g32
        + 8.0 * g10 * g31 * (17.0 * g10.powi(3) + 29.0 * g10 * g10 * g01 + 18.0 * g10 * g01 * g01 + 4.0 * g01.powi(3)) * w2
        + 192.0 * g10 * g10 * g21 * w4;
    let num = g11 * (g01 * g01 + 8.0 * w2) * (g11 * g12 + 16.0 * w2) * poly;
    let inner = g11 * g11 * g12 + 8.0 * g10 * w2;
    let den = g21 * g31 * (g11 * g21 + 8.0 * w2) * (g31 * g32 + 16.0 * w2) * inner * inner;
    TargetStats { n_a, g2: num / den }
}

/// Curves of the coherent drive at fixed `ε₁`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherentGeometry {
    pub epsilon_1: f64,
}

pub fn coherent_geometry(epsilon_1: f64) -> Result<CoherentGeometry> {
    if !(0.0..=1.0).contains(&epsilon_1) {
        return Err(Error::param("epsilon_1", format!("must lie in [0, 1], got {epsilon_1}")));
    }
    Ok(CoherentGeometry { epsilon_1 })
}

impl CoherentGeometry {
    /// Start of every trajectory: `(0, 1/(1+r)²)`.
    pub fn start(&self, ratio: f64) -> (f64, f64) {
        (0.0, 1.0 / ((1.0 + ratio) * (1.0 + ratio)))
    }

    /// Strong-drive limit at ratio `r`: `((1−ε₁)/(1+r), 3(1+r)/(1+3r))`.
    pub fn quench_point(&self, ratio: f64) -> (f64, f64) {
        ((1.0 - self.epsilon_1) / (1.0 + ratio), 3.0 * (1.0 + ratio) / (1.0 + 3.0 * ratio))
    }

    /// Locus of the quench points, `g⁽²⁾ = 3(1−ε₁)/(3(1−ε₁) − 2n_a)`, defined
    /// for `n_a < 1 − ε₁`.
    pub fn quench_curve(&self, n_a: f64) -> Option<f64> {
        let e2 = 1.0 - self.epsilon_1;
        (n_a >= 0.0 && n_a < e2).then(|| 3.0 * e2 / (3.0 * e2 - 2.0 * n_a))
    }

    /// Small-population asymptote of the envelope as printed, `5n_a²`.
    pub fn envelope_small(n_a: f64) -> f64 {
        5.0 * n_a * n_a
    }

    /// Large-population asymptote of the envelope as printed,
    /// `1 − 1/(3(n_a+5))`.
    pub fn envelope_large(n_a: f64) -> f64 {
        1.0 - 1.0 / (3.0 * (n_a + 5.0))
    }

    /// Numerical envelope at this `ε₁`.
    pub fn envelope(&self, n_a: f64) -> Result<EnvelopePoint> {
        coherent_envelope(n_a, self.epsilon_1)
    }
}

/// Roots in `Ω₀` of `n_a(Ω₀) = target` at ratio `r`.
fn coherent_drives_for_population(n_a: f64, epsilon_1: f64, ratio: f64) -> Vec<f64> {
    let rates = RateCombo::new(1.0, ratio);
    let scale = 1.0 + ratio;
    scan_roots(
        |w| coherent_stats_omega0(w, epsilon_1, rates).n_a - n_a,
        1e-6 * scale,
        1e4 * scale,
        400,
        1e-14,
    )
}

/// Lowest `g⁽²⁾` the resonant two-channel coherent drive reaches at
/// population `n_a`, over drive and `r`, at fixed `ε₁`. The `drive` field of
/// the result is `Ω₀/γσ`; `ε₁ = 0` is allowed as the limit at fixed `Ω₀`.
pub fn coherent_envelope(n_a: f64, epsilon_1: f64) -> Result<EnvelopePoint> {
    positive("n_a", n_a)?;
    if !(0.0..1.0).contains(&epsilon_1) {
        return Err(Error::param("epsilon_1", format!("must lie in [0, 1), got {epsilon_1}")));
    }
    envelope_over_ratio(n_a, (-6.0, 5.0), 221, 1e-9, |r| {
        let rates = RateCombo::new(1.0, r);
        coherent_drives_for_population(n_a, epsilon_1, r)
            .into_iter()
            .map(|w| (coherent_stats_omega0(w, epsilon_1, rates).g2, w))
            .min_by(|a, b| a.0.total_cmp(&b.0))
    })
}

/// Population of a resonantly driven two-level system with
/// `H = Ω(σ + σ†)`: `4Ω²/(γσ² + 8Ω²)`.
pub fn coherent_source_population(omega: f64, gamma_sigma: f64) -> f64 {
    let w2 = omega * omega;
    4.0 * w2 / (gamma_sigma * gamma_sigma + 8.0 * w2)
}

/// Second-order correlation of resonance fluorescence for `H = Ω(σ+σ†)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherentSourceG2 {
    pub omega: f64,
    pub gamma_sigma: f64,
}

pub fn coherent_source_g2tau(omega: f64, gamma_sigma: f64) -> Result<CoherentSourceG2> {
    nonneg("Omega_sigma", omega)?;
    positive("gamma_sigma", gamma_sigma)?;
    Ok(CoherentSourceG2 { omega, gamma_sigma })
}

impl CoherentSourceG2 {
    /// `Γσ = √(γσ² − 64Ω²)`, imaginary above `Ω = γσ/8`.
    pub fn big_gamma(&self) -> C64 {
        C64::new(self.gamma_sigma * self.gamma_sigma - 64.0 * self.omega * self.omega, 0.0).sqrt()
    }

    /// `1 − e^{−3γστ/4}[cosh(Γστ/4) + (3γσ/Γσ) sinh(Γστ/4)]`.
    pub fn eval(&self, tau: f64) -> f64 {
        let tau = tau.abs();
        let g = self.gamma_sigma;
        let big = self.big_gamma();
        let x = big * (tau / 4.0);
        // sinh(x)/Γ, finite as Γ → 0.
        let sinh_over = if big.norm() < 1e-8 * g { C64::new(tau / 4.0, 0.0) } else { x.sinh() / big };
        let bracket = x.cosh() + sinh_over * (3.0 * g);
        1.0 - (-0.75 * g * tau).exp() * bracket.re
    }

    /// Weak-drive form `(1 − e^{−γστ/2})²`.
    pub fn weak_drive(&self, tau: f64) -> f64 {
        let e = 1.0 - (-0.5 * self.gamma_sigma * tau.abs()).exp();
        e * e
    }
}

/// `g⁽³⁾ ≈ coefficient · (g⁽²⁾)^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonomialFit {
    pub coefficient: f64,
    pub exponent: f64,
}

impl MonomialFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.coefficient * x.powf(self.exponent)
    }
}

/// The two monomials confining `(g⁽²⁾, g⁽³⁾)`: `0.2(g⁽²⁾)²` at low pump and
/// `4.5 g⁽²⁾` at high pump.
pub fn g2g3_fits() -> (MonomialFit, MonomialFit) {
    (
        MonomialFit {
            coefficient: 0.2,
            exponent: 2.0,
        },
        MonomialFit {
            coefficient: 4.5,
            exponent: 1.0,
        },
    )
}

/// Least-squares fit of `log y = log c + k log x`.
pub fn fit_power_law(x: &[f64], y: &[f64]) -> Result<MonomialFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::param("x", "need at least two paired points"));
    }
    if x.iter().chain(y).any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::param("x", "power-law fit needs positive data"));
    }
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(Error::param("x", "all abscissae coincide"));
    }
    let k = sxy / sxx;
    Ok(MonomialFit {
        coefficient: (my - k * mx).exp(),
        exponent: k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rate_combo() {
        let r = RateCombo::new(2.0, 0.5);
        assert_eq!(r.g(1, 0), 0.5);
        assert_eq!(r.g(0, 1), 2.0);
        assert_eq!(r.g(3, 1), 3.5);
    }

    #[test]
    fn incoherent_source() {
        let s = incoherent_source_stats(1.0, 1.0).unwrap();
        assert_eq!(s.n_sigma, 0.5);
        assert_eq!(incoherent_source_stats(0.0, 1.0).unwrap().n_sigma, 0.0);
        for p in [0.0, 0.3, 4.0] {
            assert_eq!(incoherent_source_stats(p, 1.0).unwrap().g2_tau(0.0), 0.0);
        }
    }

    #[test]
    fn incoherent_target() {
        let t = incoherent_target_stats(1.0, 1.0, 1.0).unwrap();
        assert!((t.n_a - 2.0 / 3.0).abs() < 1e-15 && (t.g2 - 0.8).abs() < 1e-15);
        let t = incoherent_target_stats(1e9, 1.0, 1.0).unwrap();
        assert!(t.n_a < 1e-8 && (t.g2 - 2.0).abs() < 1e-8);
    }

    #[test]
    fn incoherent_geometry_points() {
        let geo = incoherent_geometry(1.0 / 3.0).unwrap();
        assert!((geo.start().1 - 1.0).abs() < 1e-15);
        let big = incoherent_geometry(1e8).unwrap();
        let (n, g) = big.turning_point();
        assert!(n < 1e-3 && g < 1e-3);
        // Turning point coordinates against the pump parametrization.
        for r in [0.1, 1.0, 10.0] {
            let geo = incoherent_geometry(r).unwrap();
            let at = geo.at_pump(geo.turning_pump());
            let (n, g) = geo.turning_point();
            assert!((at.n_a - n).abs() < 1e-14 && (at.g2 - g).abs() < 1e-14);
            let printed = 4.0 * (2.0 + r - 2.0 * (1.0 + r).sqrt()) / (r * r);
            assert!((printed - n).abs() < 1e-12);
        }
    }

    #[test]
    fn trajectory_is_pump_elimination() {
        for r in [0.2, 1.0, 2.0, 30.0] {
            let geo = incoherent_geometry(r).unwrap();
            for p in [0.01, 0.5, 1.0, 3.0, 50.0] {
                let t = geo.at_pump(p);
                assert!((geo.trajectory(t.g2) - t.n_a).abs() < 1e-12 * t.n_a.max(1.0), "r={r} p={p}");
            }
        }
    }

    #[test]
    fn envelope_touches_at_unit_pump() {
        for r in [0.1, 1.0, 7.0] {
            let t = incoherent_geometry(r).unwrap().at_pump(1.0);
            assert!((incoherent_envelope(t.n_a) - t.g2).abs() < 1e-14);
        }
    }

    #[test]
    fn numeric_incoherent_envelope() {
        for k in 1..=18 {
            let n_a = 0.05 * k as f64;
            let e = incoherent_envelope_numeric(n_a).unwrap();
            assert!((e.g2 - incoherent_envelope(n_a)).abs() < 1e-6, "n_a={n_a}: {}", e.g2);
            assert!((e.drive - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn coherent_limits() {
        for r in [0.1, 1.0, 5.0] {
            let t = coherent_target_stats(1e-5, 0.5, 1.0, r).unwrap();
            assert!((t.g2 - 1.0 / (1.0 + r).powi(2)).abs() < 1e-8);
            let t = coherent_target_stats(1e6, 0.3, 1.0, r).unwrap();
            let (n, g) = coherent_geometry(0.3).unwrap().quench_point(r);
            assert!((t.n_a - n).abs() < 1e-8 && (t.g2 - g).abs() < 1e-8);
        }
    }

    #[test]
    fn quench_curve_matches_quench_points() {
        let geo = coherent_geometry(0.5).unwrap();
        assert!((geo.quench_curve(0.25).unwrap() - 1.5).abs() < 1e-15);
        for r in [0.2, 1.0, 4.0] {
            let (n, g) = geo.quench_point(r);
            assert!((geo.quench_curve(n).unwrap() - g).abs() < 1e-14);
        }
        assert!(geo.quench_curve(0.6).is_none());
    }

    #[test]
    fn coherent_envelope_epsilon_scaling() {
        // g⁽²⁾ depends on Ω₀ only and n_a scales with 1−ε₁.
        let half = coherent_envelope(0.2, 0.5).unwrap();
        let zero = coherent_envelope(0.4, 0.0).unwrap();
        assert!((half.g2 - zero.g2).abs() < 1e-9);
        // Slightly over one half at unit population, and monotone.
        let one = coherent_envelope(1.0, 0.0).unwrap();
        assert!(one.g2 > 0.5 && one.g2 < 0.6, "{}", one.g2);
        assert!(half.g2 < one.g2);
    }

    #[test]
    fn strong_drive_g2_reduces_to_weak_form() {
        let f = coherent_source_g2tau(1e-4, 1.0).unwrap();
        for t in [0.0, 0.3, 1.0, 4.0, 10.0] {
            assert!((f.eval(t) - f.weak_drive(t)).abs() < 1e-6);
        }
        let s = coherent_source_g2tau(3.0, 1.0).unwrap();
        assert_eq!(s.eval(0.0), 0.0);
        assert!(s.big_gamma().re.abs() < 1e-15);
        // Exactly at Γ = 0.
        let c = coherent_source_g2tau(0.125, 1.0).unwrap();
        assert!(c.eval(2.0).is_finite());
    }

    #[test]
    fn fits() {
        let (lo, hi) = g2g3_fits();
        assert!((lo.eval(0.1) - 0.002).abs() < 1e-15);
        assert!((hi.eval(10.0) - 45.0).abs() < 1e-12);
        let x = [0.1, 0.2, 0.4, 0.8];
        let y: Vec<f64> = x.iter().map(|v| 0.3 * v * v).collect();
        let f = fit_power_law(&x, &y).unwrap();
        assert!((f.exponent - 2.0).abs() < 1e-12 && (f.coefficient - 0.3).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn two_pumps_one_population(r in 0.01f64..100.0, frac in 0.01f64..0.99) {
            let geo = incoherent_geometry(r).unwrap();
            let n_a = frac * geo.turning_point().0;
            let pumps = geo.pumps_for_population(n_a);
            prop_assert_eq!(pumps.len(), 2);
            for p in pumps {
                prop_assert!((geo.at_pump(p).n_a - n_a).abs() < 1e-10);
            }
            prop_assert!(geo.pumps_for_population(geo.turning_point().0 * 1.0001).is_empty());
        }

        #[test]
        fn incoherent_population_stays_below_one(log_r in -4.0f64..3.0, log_p in -4.0f64..4.0) {
            let r = 10f64.powf(log_r);
            let geo = incoherent_geometry(r).unwrap();
            let top = geo.turning_point().0;
            prop_assert!(top < 1.0);
            prop_assert!(incoherent_target_stats(10f64.powf(log_p), 1.0, r).unwrap().n_a <= top * (1.0 + 1e-12));
        }

        #[test]
        fn coherent_g2_is_scale_free(omega in 0.0f64..20.0, eps in 0.0f64..1.0, ga in 0.01f64..50.0, lam in 0.01f64..100.0) {
            let a = coherent_target_stats(omega, eps, 1.0, ga).unwrap();
            let b = coherent_target_stats(lam * omega, eps, lam, lam * ga).unwrap();
            prop_assert!((a.g2 - b.g2).abs() < 1e-12 * a.g2.max(1.0));
            prop_assert!((a.n_a - b.n_a).abs() < 1e-12 * a.n_a.max(1.0));
        }
    }
}
