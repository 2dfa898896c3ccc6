//! Closed forms against the master-equation steady state.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sps_core::analytic::{g2g3_fits, coherent_geometry, coherent_target_stats, incoherent_geometry, incoherent_target_stats};
use sps_core::dynamics::{build_source_liouvillian, solve_adaptive, steady_state, CouplingScheme, SystemConfig};
use sps_core::observables::{gn_equal_time, population, reduced_density_matrix, Mode};

fn target(c: &SystemConfig) -> (f64, f64) {
    let mut c = *c;
    c.tail_tol = 1e-13;
    let sol = solve_adaptive(&c).unwrap();
    (population(&sol.rho, Mode::Target).unwrap(), gn_equal_time(&sol.rho, 2).unwrap())
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

#[test]
fn incoherent_closed_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let ga = 10f64.powf(rng.gen_range(-1.0..1.0));
        let p = 10f64.powf(rng.gen_range(-2.0..1.0));
        let (n, g) = target(&SystemConfig::cascaded_incoherent(ga, p));
        let exact = incoherent_target_stats(p, 1.0, ga).unwrap();
        assert!(close(n, exact.n_a, 1e-8) && close(g, exact.g2, 1e-8), "γa={ga} P={p}: ({n}, {g}) vs {exact:?}");
    }
}

#[test]
fn coherent_closed_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..20 {
        let ga = 10f64.powf(rng.gen_range(-1.0..1.0));
        let omega = 10f64.powf(rng.gen_range(-1.5..0.7));
        let eps = rng.gen_range(0.1..0.9);
        let (n, g) = target(&SystemConfig::cascaded_coherent(ga, omega, eps));
        let exact = coherent_target_stats(omega, eps, 1.0, ga).unwrap();
        assert!(close(n, exact.n_a, 1e-6) && close(g, exact.g2, 1e-6), "γa={ga} Ω={omega} ε₁={eps}: ({n}, {g}) vs {exact:?}");
    }
}

/// `f(0)` from samples at `h` and `2h` of an even function of `h`.
fn extrapolate(f_h: f64, f_2h: f64) -> f64 {
    (4.0 * f_h - f_2h) / 3.0
}

#[test]
fn incoherent_start_point_by_extrapolation() {
    for r in [0.2, 1.0 / 3.0, 1.0, 5.0] {
        // g⁽²⁾ is affine in P, so a linear extrapolation is exact.
        let (_, g1) = target(&SystemConfig::cascaded_incoherent(r, 1e-3));
        let (_, g2) = target(&SystemConfig::cascaded_incoherent(r, 2e-3));
        let g0 = 2.0 * g1 - g2;
        let (n0, start) = incoherent_geometry(r).unwrap().start();
        assert_eq!(n0, 0.0);
        assert!((g0 - start).abs() < 1e-4, "r={r}: {g0} vs {start}");
    }
}

#[test]
fn coherent_limits_from_dynamics() {
    for r in [0.3, 1.0, 4.0] {
        let eps: f64 = 0.5;
        let g = |w: f64| target(&SystemConfig::cascaded_coherent(r, w / eps.sqrt(), eps)).1;
        let weak = extrapolate(g(1e-2), g(2e-2));
        let (_, start) = coherent_geometry(eps).unwrap().start(r);
        assert!((weak - start).abs() < 1e-4, "r={r}: {weak} vs {start}");

        let (n, g) = target(&SystemConfig::cascaded_coherent(r, 1e3 / eps.sqrt(), eps));
        let (qn, qg) = coherent_geometry(eps).unwrap().quench_point(r);
        assert!((n - qn).abs() < 1e-4 && (g - qg).abs() < 1e-4, "r={r}: ({n}, {g}) vs ({qn}, {qg})");
    }
}

#[test]
fn source_is_autonomous() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for k in 0..10 {
        let mut c = if k % 2 == 0 {
            SystemConfig::cascaded_incoherent(rng.gen_range(0.2..5.0), rng.gen_range(0.05..5.0))
        } else {
            SystemConfig::cascaded_coherent(rng.gen_range(0.2..5.0), rng.gen_range(0.05..3.0), rng.gen_range(0.1..0.9))
        };
        c.freq_sigma = rng.gen_range(-1.0..1.0);
        c.freq_a = rng.gen_range(-1.0..1.0);
        c.gamma_sigma_star = rng.gen_range(0.0..0.5);
        c.gamma_phi = rng.gen_range(0.0..0.5);
        let sol = solve_adaptive(&c).unwrap();
        let reduced = reduced_density_matrix(&sol.rho, Mode::Source).unwrap();
        let solo = steady_state(&build_source_liouvillian(&c).unwrap()).unwrap();
        let diff = (reduced.entries() - solo.entries()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-8, "config {k}: {diff:.3e}");
    }
}

/// Fails: with g = √(γaγσ)/2 the target slaved to the source adds a
/// Purcell rate 4g²/γa = γσ to the source at every r, so the two schemes
/// never meet. See `matched_coupling_has_fixed_back_action`.
#[test]
#[ignore = "the 5% reduction does not hold for any r with matched coupling"]
fn hamiltonian_coupling_reduces_to_cascaded() {
    // Matched coupling g = √(γaγσ)/2 with a fast target.
    for r in [10.0, 30.0] {
        for p in [0.1, 1.0] {
            let base = SystemConfig::cascaded_incoherent(r, p);
            let (_, gc) = target(&base);
            let (_, gh) = target(&base.with_scheme(CouplingScheme::Hamiltonian));
            assert!((gc - gh).abs() <= 0.05 * gc, "r={r} P={p}: cascaded {gc} vs hamiltonian {gh}");
        }
    }
}

#[test]
fn deep_antibunching_tracks_the_low_pump_fit() {
    let (low, _) = g2g3_fits();
    let eps: f64 = 0.5;
    for r in [3.0, 10.0, 30.0, 100.0] {
        let sol = solve_adaptive(&SystemConfig::cascaded_coherent(r, 0.01 / eps.sqrt(), eps)).unwrap();
        let (g2, g3) = (gn_equal_time(&sol.rho, 2).unwrap(), gn_equal_time(&sol.rho, 3).unwrap());
        let q = g3 / low.eval(g2);
        assert!((0.5..=2.0).contains(&q), "r={r}: g2={g2} g3={g3}");
    }
}

#[test]
fn matched_coupling_has_fixed_back_action() {
    // Adiabatic elimination of a fast target: a ≈ −2igσ/γa, so the source
    // decays at γσ + 4g²/γa = 2γσ and n_a = (γσ/γa)nσ.
    for p in [0.1, 1.0] {
        let base = SystemConfig::cascaded_incoherent(1000.0, p).with_scheme(CouplingScheme::Hamiltonian);
        let sol = solve_adaptive(&base).unwrap();
        let n_sigma = population(&sol.rho, Mode::Source).unwrap();
        let n_a = population(&sol.rho, Mode::Target).unwrap();
        assert!((n_sigma / (p / (p + 2.0)) - 1.0).abs() < 5e-3, "P={p}: nσ = {n_sigma}");
        assert!((n_a / (n_sigma / 1000.0) - 1.0).abs() < 5e-3, "P={p}: n_a = {n_a}");
    }
}
