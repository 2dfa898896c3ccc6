//! Geometry of the `(n_a, g⁽ⁿ⁾)` chart: the frontier of accessible states,
//! the Fock duos that sit on it, and an explicit construction of states
//! above it.

use ndarray::Array1;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{HilbertSpec, StateVector};
use crate::observables::{diagonal_gn, falling_factorial};

fn check_population(n_a: f64) -> Result<()> {
    if !(n_a.is_finite() && n_a > 0.0) {
        return Err(Error::param("n_a", format!("must be finite and > 0, got {n_a}")));
    }
    Ok(())
}

/// Lowest `g⁽²⁾` of any state with population `n_a`:
/// `⌊n_a⌋(2n_a − ⌊n_a⌋ − 1)/n_a²`.
pub fn boundary_g2(n_a: f64) -> Result<f64> {
    check_population(n_a)?;
    let f = n_a.floor();
    Ok(f * (2.0 * n_a - f - 1.0) / (n_a * n_a))
}

/// Lowest `g⁽ⁿ⁾` at population `n_a`,
/// `[⌊n_a⌋!/(⌊n_a⌋−n)! + n(n_a−⌊n_a⌋)·⌊n_a⌋!/(⌊n_a⌋+1−n)!] / n_aⁿ`, where
/// the reciprocal factorial of a negative integer is zero.
pub fn boundary_gn(n: u32, n_a: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::param("n", "order must be ≥ 2"));
    }
    check_population(n_a)?;
    let f = n_a.floor() as usize;
    let frac = n_a - f as f64;
    let num = falling_factorial(f, n) + n as f64 * frac * falling_factorial(f, n - 1);
    Ok(num / n_a.powi(n as i32))
}

/// `√p |n⟩ + √(1−p) e^{iθ} |n+1⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DuoState {
    pub n_floor: usize,
    /// Weight `p` of the lower Fock state.
    pub weight: f64,
    pub phase: f64,
}

impl DuoState {
    /// The duo with population `n_a`.
    pub fn new(n_a: f64, phase: f64) -> Result<Self> {
        check_population(n_a)?;
        let f = n_a.floor();
        Ok(Self {
            n_floor: f as usize,
            weight: f - n_a + 1.0,
            phase: phase.rem_euclid(std::f64::consts::TAU),
        })
    }

    pub fn mean(&self) -> f64 {
        self.n_floor as f64 + 1.0 - self.weight
    }

    /// Fock distribution `p(m)` for `m = 0..=n_floor+1`.
    pub fn diagonal(&self) -> Vec<f64> {
        let mut p = vec![0.0; self.n_floor + 2];
        p[self.n_floor] = self.weight;
        p[self.n_floor + 1] = 1.0 - self.weight;
        p
    }

    /// The state on an oscillator truncated at `n_max ≥ n_floor + 1`.
    pub fn to_state(&self, n_max: usize) -> Result<StateVector> {
        if n_max < self.n_floor + 1 {
            return Err(Error::param("n_max", format!("must be ≥ {}", self.n_floor + 1)));
        }
        let spec = HilbertSpec::oscillator(n_max)?;
        let mut amp = Array1::zeros(n_max + 1);
        amp[self.n_floor] = C64::new(self.weight.sqrt(), 0.0);
        amp[self.n_floor + 1] = C64::from_polar((1.0 - self.weight).sqrt(), self.phase);
        StateVector::new(spec, amp)
    }
}

/// Fock duo with population `n_a`, on the smallest oscillator that holds it.
pub fn fock_duo(n_a: f64, phase: f64) -> Result<StateVector> {
    let duo = DuoState::new(n_a, phase)?;
    duo.to_state(duo.n_floor + 1)
}

/// Diagonal distribution with population `n_a` and second-order
/// correlation `g2_target`, supported on three Fock levels.
///
/// The first choice is `{0, ⌊n_a⌋, k}` (`{0, 1, k}` when `n_a < 1`), with `k`
/// the smallest integer above `max(n_a·g2_target, ⌊n_a⌋)` for which all
/// three weights are probabilities. Just above the frontier at non-integer
/// `n_a > 1` no such `k` exists. There the excess over the duo is carried by
/// a single far level instead: on `{⌊n_a⌋, ⌊n_a⌋+1, k}` the excess
/// `n_a²(g⁽²⁾ − g⁽²⁾_duo)` equals `(k−⌊n_a⌋)(k−⌊n_a⌋−1)p(k)`, which fixes
/// `p(k)`, and a large enough `k` keeps the other two weights in `[0, 1]`.
pub fn prop2_state(n_a: f64, g2_target: f64) -> Result<Vec<f64>> {
    let floor = boundary_g2(n_a)?;
    if !g2_target.is_finite() {
        return Err(Error::param("g2_target", "must be finite"));
    }
    if g2_target < floor - 1e-12 {
        return Err(Error::Infeasible(format!(
            "g2 = {g2_target} is below the boundary {floor} at n_a = {n_a}"
        )));
    }
    let p = zero_floor_far(n_a, g2_target)
        .or_else(|| duo_far(n_a, g2_target, floor))
        .ok_or_else(|| Error::Infeasible(format!("no support point k found for ({n_a}, {g2_target})")))?;
    let g = diagonal_gn(&p, 2)?;
    let mean: f64 = p.iter().enumerate().map(|(m, x)| m as f64 * x).sum();
    if (g - g2_target).abs() > 1e-10 * g2_target.max(1.0) || (mean - n_a).abs() > 1e-10 * n_a.max(1.0) {
        return Err(Error::Infeasible(format!("construction missed ({n_a}, {g2_target}): got ({mean}, {g})")));
    }
    Ok(p)
}

const SLACK: f64 = 1e-13;
const K_SEARCH: usize = 1_000_000;

fn in_unit(p: f64) -> bool {
    (-SLACK..=1.0 + SLACK).contains(&p)
}

/// Assembles weights on three levels, clamping round-off and putting the
/// residual of the normalization on the level listed first.
fn assemble(levels: [(usize, f64); 3]) -> Vec<f64> {
    let top = levels.iter().map(|l| l.0).max().unwrap_or(0);
    let mut p = vec![0.0; top + 1];
    for &(m, w) in &levels[1..] {
        p[m] += w.clamp(0.0, 1.0);
    }
    let rest: f64 = p.iter().sum();
    p[levels[0].0] += (1.0 - rest).clamp(0.0, 1.0);
    p
}

fn zero_floor_far(n_a: f64, g2: f64) -> Option<Vec<f64>> {
    let f = (n_a.floor() as usize).max(1);
    let ff = f as f64;
    let m2 = g2 * n_a * n_a;
    let start = ((n_a * g2).max(n_a.floor()).floor() as usize + 1).max(f + 1);
    (start..start + K_SEARCH).find_map(|k| {
        let kf = k as f64;
        let pf = n_a * (kf - 1.0 - n_a * g2) / (ff * (kf - ff));
        let pk = (m2 - n_a * (ff - 1.0)) / (kf * (kf - ff));
        let p0 = 1.0 - pf - pk;
        [p0, pf, pk].into_iter().all(in_unit).then(|| assemble([(0, p0), (f, pf), (k, pk)]))
    })
}

fn duo_far(n_a: f64, g2: f64, g2_duo: f64) -> Option<Vec<f64>> {
    let f = n_a.floor() as usize;
    let ff = f as f64;
    let excess = (g2 - g2_duo).max(0.0) * n_a * n_a;
    (f + 2..f + 2 + K_SEARCH).find_map(|k| {
        let j = (k - f) as f64;
        let pk = excess / (j * (j - 1.0));
        let pf = ff - n_a + 1.0 + (j - 1.0) * pk;
        let pf1 = 1.0 - pf - pk;
        [pf, pf1, pk].into_iter().all(in_unit).then(|| assemble([(f + 1, pf1), (f, pf), (k, pk)]))
    })
}

/// Result of the brute-force search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BruteForceMin {
    pub value: f64,
    pub argmin: Vec<f64>,
}

/// Minimum `g⁽²⁾` over diagonal distributions on `{0..m_max}` with mean
/// `n_a`, by local search from `starts` seeded starting points.
pub fn bruteforce_min_g2(n_a: f64, m_max: usize, starts: usize) -> Result<BruteForceMin> {
    bruteforce_min_gn(2, n_a, m_max, starts)
}

/// Order-`n` version of [`bruteforce_min_g2`].
///
/// Each starting distribution is improved by moves that shift weight among
/// three levels `i < j < k` while keeping the norm and the mean fixed. The
/// objective is linear in `p`, so each move runs to the edge of the simplex.
/// Search stops when no move lowers the objective.
pub fn bruteforce_min_gn(n: u32, n_a: f64, m_max: usize, starts: usize) -> Result<BruteForceMin> {
    if n < 2 {
        return Err(Error::param("n", "order must be ≥ 2"));
    }
    check_population(n_a)?;
    if n_a > m_max as f64 {
        return Err(Error::Infeasible(format!("n_a = {n_a} exceeds m_max = {m_max}")));
    }
    if m_max < n_a.ceil() as usize + 2 {
        return Err(Error::param("m_max", format!("must be ≥ ⌈n_a⌉ + 2 = {}", n_a.ceil() as usize + 2)));
    }
    let starts = starts.max(1);
    let cost: Vec<f64> = (0..=m_max).map(|m| falling_factorial(m, n)).collect();
    let best = (0..starts)
        .into_par_iter()
        .map(|s| {
            let mut p = starting_point(n_a, m_max, s as u64);
            descend(&mut p, &cost);
            let value = p.iter().zip(&cost).map(|(a, b)| a * b).sum::<f64>() / n_a.powi(n as i32);
            (value, s, p)
        })
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .expect("at least one start");
    Ok(BruteForceMin {
        value: best.0,
        argmin: best.2,
    })
}

/// A random distribution on `{0..m_max}` shifted to mean `n_a` by mixing in
/// `|0⟩` or `|m_max⟩`.
fn starting_point(n_a: f64, m_max: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ seed.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let mut q: Vec<f64> = (0..=m_max).map(|_| -rng.gen::<f64>().max(1e-300).ln()).collect();
    let s: f64 = q.iter().sum();
    q.iter_mut().for_each(|x| *x /= s);
    let mu: f64 = q.iter().enumerate().map(|(m, x)| m as f64 * x).sum();
    let top = m_max as f64;
    if mu >= n_a {
        let lam = n_a / mu;
        q.iter_mut().for_each(|x| *x *= lam);
        q[0] += 1.0 - lam;
    } else {
        let lam = (top - n_a) / (top - mu);
        q.iter_mut().for_each(|x| *x *= lam);
        q[m_max] += 1.0 - lam;
    }
    q
}

fn descend(p: &mut [f64], cost: &[f64]) {
    let len = p.len();
    for _sweep in 0..10_000 {
        let mut improved = false;
        for i in 0..len {
            for j in i + 1..len {
                for k in j + 1..len {
                    // Direction moving weight from i and k onto j.
                    let (a, b, c) = ((k - j) as f64, (k - i) as f64, (j - i) as f64);
                    let gain = a * cost[i] - b * cost[j] + c * cost[k];
                    if gain <= 1e-15 * (cost[k] + 1.0) {
                        continue;
                    }
                    let (ti, tk) = (p[i] / a, p[k] / c);
                    let t = ti.min(tk);
                    if t <= 0.0 {
                        continue;
                    }
                    if ti <= tk {
                        p[i] = 0.0;
                        p[k] = (p[k] - t * c).max(0.0);
                    } else {
                        p[k] = 0.0;
                        p[i] = (p[i] - t * a).max(0.0);
                    }
                    p[j] += t * b;
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
    }
}
