//! Steady states, time evolution and adaptive truncation.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use super::config::SystemConfig;
use super::liouvillian::{build_liouvillian_with, unvectorize, vectorize, BuildOptions, Liouvillian};
use crate::error::{Error, Result};
use crate::hilbert::{DensityMatrix, HilbertSpec};
use crate::linalg::{bandwidths, dense_solve, BandLu};
use crate::ode::{integrate, Tolerances};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Largest system solved densely when the banded factorization breaks down.
const DENSE_FALLBACK_ROWS: usize = 1200;

/// Relative residual accepted from the linear solve.
pub const RESIDUAL_TOL: f64 = 1e-8;

/// Reorders `vec(ρ)` so that Fock indices are slowest. Every term of the
/// generator moves each Fock index by at most one, so the permuted matrix is
/// banded with bandwidth of order `4(n_max+1)`.
fn band_order(spec: HilbertSpec) -> Vec<usize> {
    let d = spec.dim();
    let t = spec.tls_dim();
    let o = spec.osc_dim();
    let mut perm = vec![0; d * d];
    for j in 0..d {
        let (sj, nj) = spec.split(j);
        for i in 0..d {
            let (si, ni) = spec.split(i);
            perm[i + d * j] = ((ni * o + nj) * t + si) * t + sj;
        }
    }
    perm
}

fn residual(l: &Liouvillian, v: &[C64]) -> f64 {
    l.matrix().matvec(v).iter().fold(0.0, |m, z| m.max(z.norm()))
}

fn into_density(spec: HilbertSpec, v: &[C64]) -> Result<DensityMatrix> {
    let d = spec.dim();
    let m = unvectorize(v, d);
    let tr: C64 = (0..d).map(|i| m[[i, i]]).sum();
    if tr.norm() < 1e-300 || !tr.is_finite() {
        return Err(Error::InvalidState(format!("solution has trace {tr}")));
    }
    let m = m.mapv(|z| z / tr);
    let herm = Array2::from_shape_fn((d, d), |(i, j)| (m[[i, j]] + m[[j, i]].conj()) * 0.5);
    Ok(DensityMatrix::from_raw(spec, herm))
}

/// Stationary state of `L`, normalized to unit trace.
///
/// The equation for `ρ_{00}` (ground state of both subsystems) is replaced by
/// the pin `ρ_{00} = 1`, the system is solved by banded LU and the result is
/// renormalized. Trace preservation makes the dropped equation redundant.
pub fn steady_state(l: &Liouvillian) -> Result<DensityMatrix> {
    let spec = l.spec();
    let d = spec.dim();
    let n = d * d;
    let scale = l.matrix().max_abs().max(1.0);
    let tolerance = RESIDUAL_TOL * scale;

    if l.is_undriven() {
        let rho = DensityMatrix::basis(spec, 0);
        let r = residual(l, &vectorize(rho.entries()));
        if r > tolerance {
            return Err(Error::Convergence { residual: r, tolerance });
        }
        return Ok(rho);
    }

    let perm = band_order(spec);
    let pinned = perm[0];
    let mut entries: Vec<(usize, usize, C64)> = l
        .matrix()
        .iter()
        .filter(|&(i, _, _)| i != 0)
        .map(|(i, j, v)| (perm[i], perm[j], v))
        .collect();
    entries.push((pinned, pinned, ONE));
    let (kl, ku) = bandwidths(entries.iter().map(|&(i, j, _)| (i, j)));
    let mut rhs = vec![ZERO; n];
    rhs[pinned] = ONE;

    let solution = match BandLu::factor(n, kl, ku, entries.iter().copied(), 1e-14 * scale) {
        Ok(lu) => {
            lu.solve(&mut rhs);
            let mut v = vec![ZERO; n];
            for (k, &p) in perm.iter().enumerate() {
                v[k] = rhs[p];
            }
            v
        }
        Err(sp) if n <= DENSE_FALLBACK_ROWS => dense_trace_solve(l).ok_or(Error::NonUniqueSteadyState {
            row: sp.row,
            pivot: sp.pivot,
        })?,
        Err(sp) => {
            return Err(Error::NonUniqueSteadyState {
                row: sp.row,
                pivot: sp.pivot,
            })
        }
    };

    let rho = into_density(spec, &solution)?;
    let r = residual(l, &vectorize(rho.entries()));
    if !r.is_finite() || r > tolerance {
        return Err(Error::Convergence { residual: r, tolerance });
    }
    Ok(rho)
}

/// Row-replacement with the full trace row, for the case where the ground
/// state carries no weight and the pin above is singular.
fn dense_trace_solve(l: &Liouvillian) -> Option<Vec<C64>> {
    let d = l.spec().dim();
    let mut a = l.to_dense();
    for k in 0..d * d {
        a[[0, k]] = ZERO;
    }
    for i in 0..d {
        a[[0, i + d * i]] = ONE;
    }
    let mut b = vec![ZERO; d * d];
    b[0] = ONE;
    let x = dense_solve(&a, &b)?;
    // A rank-deficient system slips through elimination with a tiny pivot.
    let scale = l.matrix().max_abs().max(1.0);
    let ok = residual(l, &x) <= RESIDUAL_TOL * scale;
    ok.then_some(x)
}

/// Propagates an arbitrary operator `X(0) = x0` under `Ẋ = L X`, handing
/// `vec(X(t_k))` to `record` at each grid point.
pub fn propagate<R>(l: &Liouvillian, x0: &Array2<C64>, t_grid: &[f64], tol: Tolerances, record: R) -> Result<()>
where
    R: FnMut(usize, &[C64]),
{
    let d = l.spec().dim();
    if x0.dim() != (d, d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: x0.nrows(),
        });
    }
    let m = l.matrix();
    integrate(|x, dx| m.matvec_into(x, dx), vectorize(x0), t_grid, tol, record)
}

/// `ρ(t)` on `t_grid`, integrated with local error control well below
/// `1e-9` per unit time.
pub fn evolve(l: &Liouvillian, rho0: &DensityMatrix, t_grid: &[f64]) -> Result<Vec<DensityMatrix>> {
    l.spec().check_same(&rho0.spec())?;
    if t_grid.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::param("t_grid", "must start at t ≥ 0"));
    }
    let spec = l.spec();
    let d = spec.dim();
    let mut out = Vec::with_capacity(t_grid.len());
    propagate(l, rho0.entries(), t_grid, Tolerances::default(), |_, v| {
        out.push(DensityMatrix::from_raw(spec, unvectorize(v, d)));
    })?;
    Ok(out)
}

/// `Tr[M X]` for `X` given as `vec(X)`.
pub(crate) fn trace_with(m: &Array2<C64>, x: &[C64]) -> C64 {
    let d = m.nrows();
    let mut acc = ZERO;
    for ((j, i), &mji) in m.indexed_iter() {
        if mji != ZERO {
            acc += mji * x[i + d * j];
        }
    }
    acc
}

/// Steady state at a truncation large enough that the top Fock level holds
/// less than the configured `tail_tol`.
#[derive(Debug, Clone)]
pub struct SteadySolution {
    /// The configuration with `n_max` set to the truncation actually used.
    pub config: SystemConfig,
    pub liouvillian: Liouvillian,
    pub rho: DensityMatrix,
    /// Population of the top Fock level, `p(n_max)`.
    pub tail_mass: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOptions {
    /// Truncation is never grown past this.
    pub max_n_max: usize,
    pub build: BuildOptions,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self {
            max_n_max: 72,
            build: BuildOptions::default(),
        }
    }
}

/// Oscillator population of the top level kept in the truncation.
pub fn tail_mass(rho: &DensityMatrix) -> f64 {
    let spec = rho.spec();
    if !spec.has_oscillator() {
        return 0.0;
    }
    let top = spec.n_max();
    (0..spec.tls_dim()).map(|s| rho.entries()[[spec.index(s, top), spec.index(s, top)]].re).sum()
}

pub fn solve_adaptive(config: &SystemConfig) -> Result<SteadySolution> {
    solve_adaptive_with(config, AdaptiveOptions::default())
}

/// Solves at `config.n_max` and grows the truncation by half (at least four
/// levels) until `p(n_max) < tail_tol`.
pub fn solve_adaptive_with(config: &SystemConfig, options: AdaptiveOptions) -> Result<SteadySolution> {
    config.validate()?;
    let mut cfg = *config;
    loop {
        let l = build_liouvillian_with(&cfg, &options.build)?;
        let rho = steady_state(&l)?;
        let tail = tail_mass(&rho);
        if tail < cfg.tail_tol {
            return Ok(SteadySolution {
                config: cfg,
                liouvillian: l,
                rho,
                tail_mass: tail,
            });
        }
        if cfg.n_max >= options.max_n_max {
            return Err(Error::Truncation {
                n_max: cfg.n_max,
                tail_mass: tail,
            });
        }
        cfg.n_max = (cfg.n_max + (cfg.n_max / 2).max(4)).min(options.max_n_max);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::config::{CouplingScheme, Drive};
    use crate::dynamics::liouvillian::{build_liouvillian, build_source_liouvillian};
    use crate::hilbert::{expectation, fock_annihilation, tls_lowering, Operator};

    fn incoherent(p: f64, ga: f64) -> SystemConfig {
        SystemConfig {
            n_max: 8,
            ..SystemConfig::cascaded_incoherent(ga, p)
        }
    }

    #[test]
    fn band_order_is_a_permutation() {
        let spec = HilbertSpec::composite(3).unwrap();
        let mut p = band_order(spec);
        p.sort_unstable();
        assert!(p.iter().enumerate().all(|(k, &v)| k == v));
    }

    #[test]
    fn vacuum_when_undriven() {
        let c = SystemConfig {
            drive_sigma: 0.0,
            ..SystemConfig::default()
        };
        let rho = steady_state(&build_liouvillian(&c).unwrap()).unwrap();
        assert_eq!(rho.entries()[[0, 0]], ONE);
        assert!((rho.trace() - ONE).norm() < 1e-15);
    }

    #[test]
    fn incoherent_source_population() {
        for p in [0.1, 1.0, 3.0] {
            let c = SystemConfig::cascaded_incoherent(1.0, p);
            let rho = steady_state(&build_source_liouvillian(&c).unwrap()).unwrap();
            let want = p / (1.0 + p);
            assert!((rho.entries()[[1, 1]].re - want).abs() < 1e-12);
        }
    }

    #[test]
    fn incoherent_target_population() {
        let c = SystemConfig {
            n_max: 14,
            ..incoherent(1.0, 1.0)
        };
        let l = build_liouvillian(&c).unwrap();
        let rho = steady_state(&l).unwrap();
        let a = fock_annihilation(l.spec());
        let na = expectation(&rho, &(&a.dagger() * &a)).unwrap().re;
        assert!((na - 2.0 / 3.0).abs() < 1e-9, "{na}");
        assert!(residual(&l, &vectorize(rho.entries())) < 1e-9);
    }

    #[test]
    fn matches_dense_trace_row_solve() {
        let c = SystemConfig {
            n_max: 4,
            drive_sigma: 1.7,
            gamma_a: 0.6,
            freq_a: 0.3,
            ..SystemConfig::default()
        };
        let l = build_liouvillian(&c).unwrap();
        let banded = steady_state(&l).unwrap();
        let dense = into_density(l.spec(), &dense_trace_solve(&l).unwrap()).unwrap();
        assert!(banded.max_abs_diff(&dense) < 1e-11);
    }

    #[test]
    fn unpopulated_ground_state_uses_fallback() {
        // A pump with no decay parks the source in |e⟩, so the pin on ρ_gg is
        // singular.
        let c = SystemConfig {
            coupling_scheme: CouplingScheme::HamiltonianNoSourceDecay,
            drive: Drive::Incoherent,
            pump_sigma: 1.0,
            ..SystemConfig::default()
        };
        let l = build_source_liouvillian(&c).unwrap();
        let rho = steady_state(&l).unwrap();
        assert!((rho.entries()[[1, 1]] - ONE).norm() < 1e-12);
    }

    #[test]
    fn degenerate_generator_is_rejected() {
        // No dissipation at all: every diagonal state is stationary.
        let spec = HilbertSpec::composite(2).unwrap();
        let h = Operator::zeros(spec);
        let l = Liouvillian::lindblad(&h, &[(1.0, Operator::zeros(spec))]).unwrap();
        assert!(matches!(steady_state(&l), Err(Error::NonUniqueSteadyState { .. })));
    }

    #[test]
    fn evolve_zero_generator_is_constant() {
        let spec = HilbertSpec::composite(2).unwrap();
        let l = Liouvillian::lindblad(&Operator::zeros(spec), &[]).unwrap();
        let rho0 = DensityMatrix::basis(spec, 3);
        let out = evolve(&l, &rho0, &[0.0, 1.0, 5.0]).unwrap();
        assert!(out.iter().all(|r| r.max_abs_diff(&rho0) == 0.0));
    }

    #[test]
    fn evolve_relaxes_to_steady_state() {
        let c = SystemConfig {
            n_max: 10,
            ..incoherent(1.0, 1.0)
        };
        let l = build_liouvillian(&c).unwrap();
        let ss = steady_state(&l).unwrap();
        let rho0 = DensityMatrix::basis(l.spec(), 0);
        let out = evolve(&l, &rho0, &[0.0, 10.0, 40.0]).unwrap();
        for r in &out {
            assert!((r.trace() - ONE).norm() < 1e-8);
        }
        assert!(out[2].max_abs_diff(&ss) < 1e-6);
    }

    #[test]
    fn purity_decreases_under_dephasing() {
        // Dephasing generators are unital, hence contractive in purity.
        let spec = HilbertSpec::composite(4).unwrap();
        let s = tls_lowering(spec);
        let a = fock_annihilation(spec);
        let h = &(&a.dagger() * &s) + &(&s.dagger() * &a);
        let l = Liouvillian::lindblad(&h.scale(0.5), &[(0.4, &s.dagger() * &s), (0.3, &a.dagger() * &a)]).unwrap();
        let psi = Array2::from_shape_fn((spec.dim(), spec.dim()), |(i, j)| {
            let amp = |k: usize| if k == spec.index(1, 0) || k == spec.index(0, 3) { 0.5f64.sqrt() } else { 0.0 };
            C64::new(amp(i) * amp(j), 0.0)
        });
        let rho0 = DensityMatrix::new(spec, psi).unwrap();
        let grid: Vec<f64> = (0..40).map(|k| k as f64 * 0.25).collect();
        let out = evolve(&l, &rho0, &grid).unwrap();
        for w in out.windows(2) {
            assert!(w[1].purity() <= w[0].purity() + 1e-10);
        }
    }

    #[test]
    fn purity_recovers_under_pure_decay() {
        // Amplitude damping is not unital: a superposition decays through a
        // mixed state back to the pure vacuum.
        let c = SystemConfig {
            drive_sigma: 0.0,
            n_max: 3,
            ..SystemConfig::default()
        };
        let l = build_liouvillian(&c).unwrap();
        let spec = l.spec();
        let psi = Array2::from_shape_fn((spec.dim(), spec.dim()), |(i, j)| {
            let amp = |k: usize| if k == spec.index(1, 0) || k == spec.index(0, 2) { 0.5f64.sqrt() } else { 0.0 };
            C64::new(amp(i) * amp(j), 0.0)
        });
        let rho0 = DensityMatrix::new(spec, psi).unwrap();
        let out = evolve(&l, &rho0, &[0.0, 1.0, 60.0]).unwrap();
        assert!(out[1].purity() < 0.9);
        assert!((out[2].purity() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn adaptive_truncation_reaches_tail_tolerance() {
        let c = SystemConfig {
            n_max: 2,
            drive_sigma: 3.0,
            epsilon_1: 0.2,
            gamma_a: 0.3,
            ..SystemConfig::default()
        };
        let sol = solve_adaptive(&c).unwrap();
        assert!(sol.config.n_max > 2);
        assert!(sol.tail_mass < c.tail_tol);
        assert_eq!(sol.rho.spec().n_max(), sol.config.n_max);
    }

    #[test]
    fn source_steady_state_for_coherent_drive() {
        // Resonance fluorescence: ⟨σ†σ⟩ = 4Ω²/(γ²+8Ω²).
        let c = SystemConfig {
            drive_sigma: 0.9,
            epsilon_1: 1.0,
            ..SystemConfig::default()
        };
        let l = build_source_liouvillian(&c).unwrap();
        let rho = steady_state(&l).unwrap();
        let s = tls_lowering(l.spec());
        let n = expectation(&rho, &(&s.dagger() * &s)).unwrap().re;
        assert!((n - 4.0 * 0.81 / (1.0 + 8.0 * 0.81)).abs() < 1e-12);
    }
}
