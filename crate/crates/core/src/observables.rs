//! Populations, photon statistics, reduced states and Wigner functions.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{SteadySolution, SystemConfig, UNDEFINED_POPULATION};
use crate::error::{Error, Result};
use crate::hilbert::{expectation, fock_annihilation, tls_lowering, DensityMatrix, HilbertSpec, Subsystems};

const ZERO: C64 = C64::new(0.0, 0.0);

/// One of the two factors of the composite space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    /// The two-level source, `σ`.
    Source,
    /// The oscillator target, `a`.
    Target,
}

/// `⟨a†a⟩` or `⟨σ†σ⟩`.
pub fn population(rho: &DensityMatrix, mode: Mode) -> Result<f64> {
    let spec = rho.spec();
    let c = match mode {
        Mode::Target if spec.has_oscillator() => fock_annihilation(spec),
        Mode::Source if spec.has_tls() => tls_lowering(spec),
        _ => return Err(Error::InvalidState(format!("no {mode:?} factor in a {:?} space", spec.kind()))),
    };
    Ok(expectation(rho, &(&c.dagger() * &c))?.re)
}

/// `g⁽ⁿ⁾ = ⟨a†ⁿaⁿ⟩/⟨a†a⟩ⁿ` of the oscillator, from the operator products.
pub fn gn_equal_time(rho: &DensityMatrix, n: u32) -> Result<f64> {
    if n == 0 {
        return Err(Error::param("n", "order must be ≥ 1"));
    }
    let spec = rho.spec();
    if !spec.has_oscillator() {
        return Err(Error::InvalidState("g⁽ⁿ⁾ needs an oscillator".into()));
    }
    let a = fock_annihilation(spec);
    let na = population(rho, Mode::Target)?;
    if na < UNDEFINED_POPULATION {
        return Err(Error::UndefinedCorrelator { population: na });
    }
    let moment = expectation(rho, &(&a.dagger().pow(n) * &a.pow(n)))?.re;
    Ok(moment / na.powi(n as i32))
}

/// Oscillator occupation probabilities `p(m)`, summed over the 2LS.
pub fn fock_distribution(rho: &DensityMatrix) -> Vec<f64> {
    let spec = rho.spec();
    if !spec.has_oscillator() {
        return Vec::new();
    }
    (0..spec.osc_dim())
        .map(|m| (0..spec.tls_dim()).map(|s| rho.entries()[[spec.index(s, m), spec.index(s, m)]].re).sum())
        .collect()
}

/// `m!/(m−n)!`, zero for `m < n`.
pub fn falling_factorial(m: usize, n: u32) -> f64 {
    let n = n as usize;
    if m < n {
        return 0.0;
    }
    ((m - n + 1)..=m).fold(1.0, |acc, k| acc * k as f64)
}

/// `g⁽ⁿ⁾` of a diagonal distribution: `Σ m!/(m−n)! p(m) / (Σ m p(m))ⁿ`.
pub fn diagonal_gn(p: &[f64], n: u32) -> Result<f64> {
    if n == 0 {
        return Err(Error::param("n", "order must be ≥ 1"));
    }
    if p.iter().any(|x| !x.is_finite() || *x < -1e-12) {
        return Err(Error::param("p", "probabilities must be finite and ≥ 0"));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::param("p", format!("must sum to 1, got {total}")));
    }
    let mean: f64 = p.iter().enumerate().map(|(m, x)| m as f64 * x).sum();
    if mean < UNDEFINED_POPULATION {
        return Err(Error::UndefinedCorrelator { population: mean });
    }
    let moment: f64 = p.iter().enumerate().map(|(m, x)| falling_factorial(m, n) * x).sum();
    Ok(moment / mean.powi(n as i32))
}

/// Partial trace onto one factor. A state that already lives on the
/// requested factor alone is returned unchanged.
pub fn reduced_density_matrix(rho: &DensityMatrix, keep: Mode) -> Result<DensityMatrix> {
    let spec = rho.spec();
    match (spec.kind(), keep) {
        (Subsystems::Composite, _) => {}
        (Subsystems::Oscillator, Mode::Target) | (Subsystems::TwoLevel, Mode::Source) => return Ok(rho.clone()),
        _ => return Err(Error::InvalidState(format!("no {keep:?} factor in a {:?} space", spec.kind()))),
    }
    let e = rho.entries();
    let (out_spec, m) = match keep {
        Mode::Source => {
            let m = Array2::from_shape_fn((2, 2), |(s, t)| {
                (0..spec.osc_dim()).map(|n| e[[spec.index(s, n), spec.index(t, n)]]).sum::<C64>()
            });
            (HilbertSpec::two_level(), m)
        }
        Mode::Target => {
            let o = spec.osc_dim();
            let m = Array2::from_shape_fn((o, o), |(n, k)| e[[spec.index(0, n), spec.index(0, k)]] + e[[spec.index(1, n), spec.index(1, k)]]);
            (HilbertSpec::oscillator(spec.n_max())?, m)
        }
    };
    DensityMatrix::new(out_spec, m)
}

/// Wigner function on a rectangular grid, `values[[i, j]] = W(x_i + i p_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WignerField {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    pub values: Array2<f64>,
    /// Trapezoidal `∫∫ W dx dp` over the grid.
    pub norm: f64,
}

impl WignerField {
    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Largest deviation of the integrated Wigner function from 1 accepted
/// before the grid is declared too small.
pub const WIGNER_NORM_TOL: f64 = 1e-3;

/// `W(α) = (2/π) Tr[ρ D(α) Π D†(α)]` with `α = x + ip` and `Π` the parity.
///
/// With this convention the vacuum has `W(0) = 2/π` and `∫∫ W dx dp = 1`.
pub fn wigner(rho_osc: &DensityMatrix, x_grid: &[f64], p_grid: &[f64]) -> Result<WignerField> {
    if rho_osc.spec().kind() != Subsystems::Oscillator {
        return Err(Error::InvalidState("wigner needs an oscillator-only state".into()));
    }
    if x_grid.len() < 2 || p_grid.len() < 2 {
        return Err(Error::param("grid", "need at least two points per axis"));
    }
    let rows: Vec<Vec<f64>> = x_grid
        .par_iter()
        .map(|&x| p_grid.iter().map(|&p| wigner_point(rho_osc.entries(), C64::new(x, p))).collect())
        .collect();
    let values = Array2::from_shape_fn((x_grid.len(), p_grid.len()), |(i, j)| rows[i][j]);
    let norm = trapezoid_2d(x_grid, p_grid, &values);
    if !((norm - 1.0).abs() <= WIGNER_NORM_TOL) {
        return Err(Error::GridTooSmall { norm });
    }
    Ok(WignerField {
        x: x_grid.to_vec(),
        p: p_grid.to_vec(),
        values,
        norm,
    })
}

/// Single-point evaluation without the grid-norm check.
pub fn wigner_at(rho_osc: &DensityMatrix, alpha: C64) -> Result<f64> {
    if rho_osc.spec().kind() != Subsystems::Oscillator {
        return Err(Error::InvalidState("wigner needs an oscillator-only state".into()));
    }
    Ok(wigner_point(rho_osc.entries(), alpha))
}

/// Sums `(−1)^k ⟨k|D†ρD|k⟩`. Only rows `m ≤ n_max` of `D|k⟩` meet `ρ`, and
/// those follow exactly from `D|k⟩ = (a† − α*) D|k−1⟩ / √k` started from the
/// coherent state `D|0⟩ = |α⟩`.
fn wigner_point(rho: &Array2<C64>, alpha: C64) -> f64 {
    let dim = rho.nrows();
    let n_max = dim - 1;
    let r = alpha.norm();
    let k_max = ((n_max as f64).sqrt() + r + 7.0).powi(2).ceil() as usize + 10;

    let mut v = vec![ZERO; dim];
    v[0] = C64::new((-r * r / 2.0).exp(), 0.0);
    for m in 1..dim {
        v[m] = v[m - 1] * alpha / (m as f64).sqrt();
    }
    let ac = alpha.conj();
    let mut w = vec![ZERO; dim];
    let mut acc = 0.0;
    for k in 0..=k_max {
        if k > 0 {
            let s = 1.0 / (k as f64).sqrt();
            for m in (0..dim).rev() {
                let up = if m > 0 { v[m - 1] * (m as f64).sqrt() } else { ZERO };
                v[m] = (up - ac * v[m]) * s;
            }
        }
        // ⟨v|ρ|v⟩
        for (i, wi) in w.iter_mut().enumerate() {
            *wi = (0..dim).map(|j| rho[[i, j]] * v[j]).sum();
        }
        let q: f64 = v.iter().zip(&w).map(|(a, b)| (a.conj() * b).re).sum();
        acc += if k % 2 == 0 { q } else { -q };
    }
    2.0 / std::f64::consts::PI * acc
}

fn trapezoid_2d(x: &[f64], p: &[f64], v: &Array2<f64>) -> f64 {
    let weights = |g: &[f64]| -> Vec<f64> {
        (0..g.len())
            .map(|i| {
                let lo = if i > 0 { g[i] - g[i - 1] } else { 0.0 };
                let hi = if i + 1 < g.len() { g[i + 1] - g[i] } else { 0.0 };
                0.5 * (lo + hi)
            })
            .collect()
    };
    let (wx, wp) = (weights(x), weights(p));
    let mut acc = 0.0;
    for (i, a) in wx.iter().enumerate() {
        for (j, b) in wp.iter().enumerate() {
            acc += a * b * v[[i, j]];
        }
    }
    acc
}

/// Observables of one steady state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableRecord {
    pub config: SystemConfig,
    pub n_a: f64,
    /// `None` when the target population is below the undefined threshold.
    pub g2: Option<f64>,
    pub g3: Option<f64>,
    pub n_sigma: f64,
    /// `p(2) > max(p(1)/2, p(3))` for the target Fock distribution.
    pub rho22_check: bool,
    pub n_max: usize,
    pub tail_mass: f64,
}

fn defined(r: Result<f64>) -> Result<Option<f64>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::UndefinedCorrelator { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// `p(2) > max(p(1)/2, p(3))`, with missing levels counted as empty.
pub fn rho22_check(p: &[f64]) -> bool {
    let at = |m: usize| p.get(m).copied().unwrap_or(0.0);
    at(2) > (at(1) / 2.0).max(at(3))
}

impl ObservableRecord {
    pub fn from_solution(sol: &SteadySolution) -> Result<Self> {
        let rho = &sol.rho;
        let p = fock_distribution(rho);
        Ok(Self {
            config: sol.config,
            n_a: population(rho, Mode::Target)?,
            g2: defined(gn_equal_time(rho, 2))?,
            g3: defined(gn_equal_time(rho, 3))?,
            n_sigma: population(rho, Mode::Source)?,
            rho22_check: rho22_check(&p),
            n_max: sol.config.n_max,
            tail_mass: sol.tail_mass,
        })
    }
}
