//! Structural properties of the generator and its steady state.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sps_core::chart::boundary_g2;
use sps_core::dynamics::{
    build_liouvillian, evolve, solve_adaptive, steady_state, CouplingScheme, Drive, SystemConfig,
};
use sps_core::observables::{gn_equal_time, population, Mode};
use sps_core::DensityMatrix;

fn random_config(rng: &mut ChaCha8Rng) -> SystemConfig {
    let scheme = [CouplingScheme::Cascaded, CouplingScheme::Hamiltonian, CouplingScheme::HamiltonianNoSourceDecay]
        [rng.gen_range(0..3)];
    let drive = if rng.gen_bool(0.5) { Drive::Incoherent } else { Drive::CoherentTwoChannel };
    SystemConfig {
        coupling_scheme: scheme,
        drive,
        gamma_a: rng.gen_range(0.5..3.0),
        pump_sigma: rng.gen_range(0.1..2.0),
        drive_sigma: rng.gen_range(0.1..1.5),
        epsilon_1: rng.gen_range(0.2..0.8),
        freq_sigma: rng.gen_range(-0.5..0.5),
        freq_a: rng.gen_range(-0.5..0.5),
        gamma_phi: rng.gen_range(0.0..0.3),
        coupling_boost: if scheme == CouplingScheme::Cascaded { 1.0 } else { rng.gen_range(1.0..2.0) },
        ..SystemConfig::default()
    }
}

#[test]
fn single_zero_eigenvalue() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for k in 0..6 {
        let c = random_config(&mut rng).with_n_max(3);
        let l = build_liouvillian(&c).unwrap().to_dense();
        let n = l.nrows();
        let m = DMatrix::<C64>::from_fn(n, n, |i, j| l[[i, j]]);
        let schur = Schur::try_new(m, 1e-14, 10_000).expect("Schur converged");
        let (_, t) = schur.unpack();
        let eig: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();
        let zeros = eig.iter().filter(|z| z.norm() < 1e-8).count();
        assert_eq!(zeros, 1, "config {k} ({c:?})");
        assert!(eig.iter().filter(|z| z.norm() >= 1e-8).all(|z| z.re < 0.0), "config {k}");
    }
}

#[test]
fn steady_state_is_the_long_time_limit() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for k in 0..10 {
        let c = random_config(&mut rng).with_n_max(6);
        let l = build_liouvillian(&c).unwrap();
        let rho = steady_state(&l).unwrap();
        let vacuum = DensityMatrix::basis(l.spec(), 0);
        let late = evolve(&l, &vacuum, &[0.0, 150.0]).unwrap().pop().unwrap();
        let diff = (late.entries() - rho.entries()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-6, "config {k}: {diff:.3e}");
    }
}

#[test]
fn doubling_a_converged_truncation() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for k in 0..6 {
        let c = random_config(&mut rng);
        let sol = solve_adaptive(&c).unwrap();
        let n_max = sol.config.n_max;
        let rho2 = steady_state(&build_liouvillian(&sol.config.with_n_max(2 * n_max)).unwrap()).unwrap();
        let tol = 10.0 * c.tail_tol;
        let (n1, n2) = (population(&sol.rho, Mode::Target).unwrap(), population(&rho2, Mode::Target).unwrap());
        let (g1, g2) = (gn_equal_time(&sol.rho, 2).unwrap(), gn_equal_time(&rho2, 2).unwrap());
        assert!((n1 - n2).abs() < tol && (g1 - g2).abs() < tol, "config {k}: n_a {n1} → {n2}, g2 {g1} → {g2}");
    }
}

#[test]
fn dynamics_never_crosses_the_frontier() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for _ in 0..30 {
        let mut c = random_config(&mut rng);
        c.pump_sigma *= 3.0;
        c.drive_sigma *= 3.0;
        let sol = solve_adaptive(&c).unwrap();
        let n_a = population(&sol.rho, Mode::Target).unwrap();
        let g2 = gn_equal_time(&sol.rho, 2).unwrap();
        assert!(g2 >= boundary_g2(n_a).unwrap() - 1e-9, "{c:?}: ({n_a}, {g2})");
    }
}
