//! The acceptance criteria as executable checks.

use std::time::Instant;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sps_core::analytic::{
    coherent_envelope, coherent_geometry, coherent_source_g2tau, coherent_target_stats, fit_power_law, g2g3_fits,
    incoherent_envelope, incoherent_envelope_numeric, incoherent_geometry, incoherent_target_stats, CoherentGeometry,
};
use sps_core::chart::{boundary_g2, bruteforce_min_g2, fock_duo};
use sps_core::dynamics::{
    build_source_liouvillian, emission_spectrum, numeric_envelope, solve_adaptive_with, steady_state, two_time_g2,
    AdaptiveOptions, BuildOptions, CouplingScheme, Drive, EnvelopeOptions, SpectrumOptions, SystemConfig,
};
use sps_core::dynamics::Liouvillian;
use sps_core::DensityMatrix;
use sps_core::hilbert::tls_lowering;
use sps_core::observables::{
    diagonal_gn, fock_distribution, gn_equal_time, population, reduced_density_matrix, rho22_check, wigner, wigner_at,
    Mode,
};
use sps_core::Result as CoreResult;

/// `ε₁` standing in for the limit `ε₁ → 0` at fixed `Ω₀` in simulations.
pub const EPSILON_LIMIT: f64 = 1e-12;

#[derive(Debug, Clone, Copy, Default)]
pub struct VerifyOptions {
    /// Applied to every generator the checks build. The default is the
    /// correct model; scaling the cascaded cross term is the mutation test.
    pub build: BuildOptions,
}

impl VerifyOptions {
    fn adaptive(&self) -> AdaptiveOptions {
        AdaptiveOptions {
            build: self.build,
            ..AdaptiveOptions::default()
        }
    }
}

pub struct Criterion {
    pub id: u8,
    pub suite: &'static str,
    pub name: &'static str,
    run: fn(&VerifyOptions) -> Checks,
}

#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: u8,
    pub suite: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {:<28} {:>7.1}s  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.detail
        )
    }
}

/// Named sub-checks; the criterion passes when all of them do.
#[derive(Debug, Default)]
struct Checks(Vec<(bool, String)>);

impl Checks {
    fn check(&mut self, ok: bool, what: impl Into<String>) {
        self.0.push((ok, what.into()));
    }

    fn error(&mut self, what: &str, e: impl std::fmt::Display) {
        self.0.push((false, format!("{what}: {e}")));
    }

    fn passed(&self) -> bool {
        self.0.iter().all(|c| c.0)
    }

    fn detail(&self) -> String {
        let failed: Vec<&str> = self.0.iter().filter(|c| !c.0).map(|c| c.1.as_str()).collect();
        if failed.is_empty() {
            format!("{} checks: {}", self.0.len(), self.0.iter().map(|c| c.1.as_str()).collect::<Vec<_>>().join("; "))
        } else {
            format!("failed {}/{}: {}", failed.len(), self.0.len(), failed.join("; "))
        }
    }
}

pub fn criteria() -> Vec<Criterion> {
    vec![
        Criterion { id: 1, suite: "chart", name: "boundary correctness", run: boundary },
        Criterion { id: 2, suite: "chart", name: "criterion disproof", run: disproof },
        Criterion { id: 3, suite: "incoherent", name: "incoherent closed forms", run: incoherent },
        Criterion { id: 4, suite: "coherent", name: "coherent closed forms", run: coherent },
        Criterion { id: 5, suite: "coherent", name: "envelope asymptotics", run: asymptotics },
        Criterion { id: 6, suite: "correlations", name: "source correlations", run: correlations },
        Criterion { id: 7, suite: "spectra", name: "spectra", run: spectra },
        Criterion { id: 8, suite: "comparison", name: "cascaded superiority", run: superiority },
        Criterion { id: 9, suite: "autonomy", name: "source autonomy", run: autonomy },
        Criterion { id: 10, suite: "states", name: "envelope states", run: states },
        Criterion { id: 11, suite: "fits", name: "(g2,g3) confinement", run: confinement },
        Criterion { id: 12, suite: "comparison", name: "model degradations", run: degradations },
    ]
}

/// Whether criterion `c` is selected by `filter`: a suite name, `oracles`
/// for the analytic-vs-numeric checks, or a comma list of numbers.
pub fn selected(c: &Criterion, filter: Option<&str>) -> Result<bool, String> {
    let Some(f) = filter else { return Ok(true) };
    if f == "oracles" {
        return Ok(matches!(c.id, 3 | 4 | 6 | 9));
    }
    if criteria().iter().any(|k| k.suite == f) {
        return Ok(c.suite == f);
    }
    let ids: Result<Vec<u8>, _> = f.split(',').map(|s| s.trim().parse::<u8>()).collect();
    match ids {
        Ok(ids) if ids.iter().all(|i| (1..=12).contains(i)) => Ok(ids.contains(&c.id)),
        _ => Err(format!(
            "unknown suite `{f}`; expected one of chart, incoherent, coherent, correlations, spectra, comparison, \
             autonomy, states, fits, oracles, or criterion numbers 1-12"
        )),
    }
}

pub fn run_one(c: &Criterion, options: &VerifyOptions) -> CriterionResult {
    let t = Instant::now();
    let checks = (c.run)(options);
    CriterionResult {
        id: c.id,
        suite: c.suite,
        name: c.name,
        passed: checks.passed(),
        detail: checks.detail(),
        seconds: t.elapsed().as_secs_f64(),
    }
}

/// Runs the selected criteria in order, handing each result to `report`
/// as soon as it is known.
pub fn run(
    filter: Option<&str>,
    options: &VerifyOptions,
    mut report: impl FnMut(&CriterionResult),
) -> Result<Vec<CriterionResult>, String> {
    let mut out = Vec::new();
    for c in criteria() {
        if selected(&c, filter)? {
            let r = run_one(&c, options);
            report(&r);
            out.push(r);
        }
    }
    Ok(out)
}

/// Truncation for comparisons against closed forms at the 1e-8 level.
const CLOSED_FORM_TAIL: f64 = 1e-13;

fn target(c: &SystemConfig, o: &VerifyOptions) -> CoreResult<(f64, f64)> {
    let mut c = *c;
    c.tail_tol = c.tail_tol.min(CLOSED_FORM_TAIL);
    let sol = solve_adaptive_with(&c, o.adaptive())?;
    Ok((population(&sol.rho, Mode::Target)?, gn_equal_time(&sol.rho, 2)?))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn boundary(_: &VerifyOptions) -> Checks {
    let mut c = Checks::default();
    let b = boundary_g2(1.5).unwrap();
    c.check(b == 4.0 / 9.0, format!("boundary_g2(1.5) = {b}"));

    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let (mut worst_under, mut worst_gap, mut worst_duo) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..200 {
        let n_a: f64 = rng.gen_range(1e-3..6.0);
        let edge = boundary_g2(n_a).unwrap();
        match bruteforce_min_g2(n_a, 8, 24) {
            Ok(m) => {
                worst_under = worst_under.max(edge - m.value);
                worst_gap = worst_gap.max(m.value - edge);
            }
            Err(e) => return fail(c, "brute force", e),
        }
        let duo = fock_duo(n_a, 0.0).unwrap();
        let g = diagonal_gn(&duo.probabilities(), 2).unwrap();
        worst_duo = worst_duo.max((g - edge).abs());
    }
    c.check(worst_under <= 1e-9, format!("search never below boundary (max undercut {worst_under:.1e})"));
    c.check(worst_gap <= 1e-6, format!("search attains boundary (max gap {worst_gap:.1e})"));
    c.check(worst_duo <= 1e-6, format!("duo on boundary (max dev {worst_duo:.1e})"));
    c
}

fn fail(mut c: Checks, what: &str, e: impl std::fmt::Display) -> Checks {
    c.error(what, e);
    c
}

fn disproof(_: &VerifyOptions) -> Checks {
    let mut c = Checks::default();
    let duo = fock_duo(1.5, 0.0).unwrap();
    let p = duo.probabilities();
    let n: f64 = p.iter().enumerate().map(|(m, q)| m as f64 * q).sum();
    let g = diagonal_gn(&p, 2).unwrap();
    c.check((n - 1.5).abs() < 1e-12 && g < 0.5, format!("duo n_a = {n}, g2 = {g:.6} < 1/2"));
    c
}

fn incoherent(o: &VerifyOptions) -> Checks {
    let mut c = Checks::default();
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let ga = 10f64.powf(rng.gen_range(-1.0..1.0));
        let p = 10f64.powf(rng.gen_range(-2.0..1.0));
        let exact = incoherent_target_stats(p, 1.0, ga).unwrap();
        match target(&SystemConfig::cascaded_incoherent(ga, p), o) {
            Ok((n, g)) => worst = worst.max(rel(n, exact.n_a)).max(rel(g, exact.g2)),
            Err(e) => return fail(c, "steady state", e),
        }
    }
    c.check(worst <= 1e-8, format!("20 random points (max dev {worst:.1e})"));

    let mut worst = 0.0f64;
    for r in [0.2, 1.0 / 3.0, 1.0, 5.0] {
        let g = |p: f64| target(&SystemConfig::cascaded_incoherent(r, p), o).map(|x| x.1);
        match (g(1e-3), g(2e-3)) {
            // g⁽²⁾ is affine in the pump.
            (Ok(a), Ok(b)) => worst = worst.max((2.0 * a - b - incoherent_geometry(r).unwrap().start().1).abs()),
            (Err(e), _) | (_, Err(e)) => return fail(c, "start point", e),
        }
    }
    c.check(worst <= 1e-4, format!("P→0 start point (max dev {worst:.1e})"));

    let mut worst = 0.0f64;
    for k in 0..=17 {
        let n_a = 0.05 + 0.05 * k as f64;
        match incoherent_envelope_numeric(n_a) {
            Ok(e) => worst = worst.max((e.g2 - incoherent_envelope(n_a)).abs()),
            Err(e) => return fail(c, "envelope", e),
        }
    }
    c.check(worst <= 1e-4, format!("envelope on n_a∈[0.05,0.9] (max dev {worst:.1e})"));

    let base = SystemConfig::cascaded_incoherent(1.0, 1.0);
    let opts = EnvelopeOptions {
        build: o.build,
        ..EnvelopeOptions::default()
    };
    match numeric_envelope(&base, 0.5, opts) {
        Ok(e) => {
            let d = (e.g2 - incoherent_envelope(0.5)).abs();
            c.check(d <= 1e-4, format!("steady-state envelope at n_a=0.5 (dev {d:.1e})"));
        }
        Err(e) => c.error("steady-state envelope", e),
    }
    c
}

fn coherent(o: &VerifyOptions) -> Checks {
    let mut c = Checks::default();
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let ga = 10f64.powf(rng.gen_range(-1.0..1.0));
        let omega = 10f64.powf(rng.gen_range(-1.5..0.7));
        let eps = rng.gen_range(0.1..0.9);
        let exact = coherent_target_stats(omega, eps, 1.0, ga).unwrap();
        match target(&SystemConfig::cascaded_coherent(ga, omega, eps), o) {
            Ok((n, g)) => worst = worst.max(rel(n, exact.n_a)).max(rel(g, exact.g2)),
            Err(e) => return fail(c, "steady state", e),
        }
    }
    c.check(worst <= 1e-6, format!("20 random points (max dev {worst:.1e})"));

    let eps: f64 = 0.5;
    let geo = coherent_geometry(eps).unwrap();
    let (mut weak, mut strong) = (0.0f64, 0.0f64);
    for r in [0.3, 1.0, 4.0] {
        let at = |w0: f64| target(&SystemConfig::cascaded_coherent(r, w0 / eps.sqrt(), eps), o);
        match (at(1e-2), at(2e-2), at(1e3)) {
            (Ok(a), Ok(b), Ok(q)) => {
                // Even in Ω, so Richardson removes the Ω² term.
                weak = weak.max(((4.0 * a.1 - b.1) / 3.0 - geo.start(r).1).abs());
                let (qn, qg) = geo.quench_point(r);
                strong = strong.max((q.0 - qn).abs()).max((q.1 - qg).abs());
            }
            (Err(e), ..) | (_, Err(e), _) | (.., Err(e)) => return fail(c, "limits", e),
        }
    }
    c.check(weak <= 1e-4, format!("Ω→0 limit 1/(1+r)² (max dev {weak:.1e})"));
    c.check(strong <= 1e-4, format!("Ω→∞ quench point (max dev {strong:.1e})"));
    c
}

fn asymptotics(_: &VerifyOptions) -> Checks {
    let mut c = Checks::default();
    let env = |n_a: f64| coherent_envelope(n_a, 0.0);
    match env(0.01) {
        Ok(e) => {
            let ratio = e.g2 / CoherentGeometry::envelope_small(0.01);
            c.check((0.8..=1.2).contains(&ratio), format!("n_a=0.01: g2/(5n_a²) = {ratio:.3}"));
        }
        Err(e) => c.error("n_a=0.01", e),
    }
    match env(10.0) {
        Ok(e) => {
            let expected = 1.0 - CoherentGeometry::envelope_large(10.0);
            let ratio = (1.0 - e.g2) / expected;
            c.check((ratio - 1.0).abs() <= 0.2, format!("n_a=10: (1−g2)·3(n_a+5) = {ratio:.3}"));
        }
        Err(e) => c.error("n_a=10", e),
    }
    match env(3.0) {
        Ok(e) => c.check(e.g2 < 1.0, format!("n_a=3: g2 = {:.4} < 1", e.g2)),
        Err(e) => c.error("n_a=3", e),
    }
    c
}

fn source_solo(drive: Drive, pump: f64, omega: f64) -> CoreResult<(Liouvillian, DensityMatrix)> {
    let c = SystemConfig {
        drive,
        pump_sigma: pump,
        drive_sigma: omega,
        epsilon_1: 1.0,
        ..SystemConfig::default()
    };
    let l = build_source_liouvillian(&c)?;
    let rho = steady_state(&l)?;
    Ok((l, rho))
}

fn correlations(_: &VerifyOptions) -> Checks {
    let mut c = Checks::default();
    let taus: Vec<f64> = (0..=100).map(|k| k as f64 * 0.08).collect();
    let curve = |drive, pump, omega| -> CoreResult<Vec<f64>> {
        let (l, rho) = source_solo(drive, pump, omega)?;
        two_time_g2(&l, &rho, &tls_lowering(l.spec()), &taus)
    };
    let max_dev = |g: &[f64], f: &dyn Fn(f64) -> f64| taus.iter().zip(g).map(|(t, v)| (v - f(*t)).abs()).fold(0.0, f64::max);

    let mut worst = 0.0f64;
    for p in [0.1, 1.0, 3.0] {
        match curve(Drive::Incoherent, p, 0.0) {
            Ok(g) => worst = worst.max(max_dev(&g, &|t| 1.0 - (-(1.0 + p) * t).exp())),
            Err(e) => return fail(c, "incoherent", e),
        }
    }
    c.check(worst <= 1e-6, format!("incoherent 1−e^(−(γσ+P)τ) (max dev {worst:.1e})"));

    let law = coherent_source_g2tau(1e-4, 1.0).unwrap();
    match curve(Drive::CoherentTwoChannel, 0.0, 1e-4) {
        Ok(g) => {
            let d = max_dev(&g, &|t| law.weak_drive(t));
            c.check(d <= 1e-6, format!("weak coherent (1−e^(−γστ/2))² (max dev {d:.1e})"));
        }
        Err(e) => c.error("weak coherent", e),
    }

    let mut worst = 0.0f64;
    for omega in [0.05, 0.125, 1.0, 3.0] {
        let law = coherent_source_g2tau(omega, 1.0).unwrap();
        match curve(Drive::CoherentTwoChannel, 0.0, omega) {
            Ok(g) => worst = worst.max(max_dev(&g, &|t| law.eval(t))),
            Err(e) => return fail(c, "strong coherent", e),
        }
    }
    c.check(worst <= 1e-4, format!("general formula with Γσ=√(γσ²−64Ω²) (max dev {worst:.1e})"));
    c
}

fn spectra(_: &VerifyOptions) -> Checks {
    let mut c = Checks::default();
    let spectrum = |drive, pump, omega, half: f64, step: f64| {
        let (l, rho) = source_solo(drive, pump, omega)?;
        let n = (half / step).round() as i64;
        let grid: Vec<f64> = (-n..=n).map(|k| k as f64 * step).collect();
        emission_spectrum(&l, &rho, &tls_lowering(l.spec()), &grid, SpectrumOptions::for_rates(1.0, 1.0, half))
    };
    for p in [0.2, 2.0] {
        match spectrum(Drive::Incoherent, p, 0.0, 15.0, 0.01) {
            Ok(s) => {
                let peaks = s.peaks();
                let fw = peaks.first().and_then(|&k| s.fwhm(k));
                let ok = peaks.len() == 1 && fw.is_some_and(|w| (w - (1.0 + p)).abs() <= 0.05 * (1.0 + p));
                c.check(ok, format!("P={p}: FWHM {:.4} vs γσ+P = {}", fw.unwrap_or(f64::NAN), 1.0 + p));
            }
            Err(e) => c.error("incoherent spectrum", e),
        }
    }
    let omega0 = 10.0;
    match spectrum(Drive::CoherentTwoChannel, 0.0, omega0, 35.0, 0.01) {
        Ok(s) => {
            let peaks = s.peaks();
            c.check(peaks.len() == 3, format!("Mollow: {} peaks", peaks.len()));
            if peaks.len() == 3 {
                let central = s.fwhm(peaks[1]).unwrap_or(f64::NAN);
                for &k in [peaks[0], peaks[2]].iter() {
                    let w = s.omega[k];
                    let ratio = s.fwhm(k).unwrap_or(f64::NAN) / central;
                    c.check(
                        (w.abs() / (2.0 * omega0) - 1.0).abs() <= 0.1,
                        format!("sideband at {w:.2} vs ±2Ω₀"),
                    );
                    c.check((ratio / 1.5 - 1.0).abs() <= 0.1, format!("width ratio {ratio:.3} vs 3/2"));
                }
            }
        }
        Err(e) => c.error("Mollow spectrum", e),
    }
    c
}

/// Envelope search windows for the Hamiltonian schemes. With
/// `g = N√(γaγσ)/2` the optimum moves to `r ∝ N²`.
fn hamiltonian_options(n: f64, o: &VerifyOptions) -> EnvelopeOptions {
    let shift = 2.0 * n.log10();
    EnvelopeOptions {
        log_ratio: (-2.0 + shift, 2.0 + shift),
        build: o.build,
        ..EnvelopeOptions::default()
    }
}

fn hamiltonian_envelope(scheme: CouplingScheme, n: f64, n_a: f64, o: &VerifyOptions) -> CoreResult<f64> {
    let mut base = SystemConfig::cascaded_coherent(1.0, 1.0, 1.0).with_scheme(scheme);
    base.coupling_boost = n;
    numeric_envelope(&base, n_a, hamiltonian_options(n, o)).map(|e| e.g2)
}

fn superiority(o: &VerifyOptions) -> Checks {
    let mut c = Checks::default();
    for n_a in [0.25, 0.5, 1.0] {
        let cascaded = match coherent_envelope(n_a, 0.0) {
            Ok(e) => e.g2,
            Err(e) => return fail(c, "cascaded envelope", e),
        };
        let mut best = (f64::INFINITY, String::new());
        let variants = [
            (CouplingScheme::Hamiltonian, 1.0),
            (CouplingScheme::Hamiltonian, 3.0),
            (CouplingScheme::Hamiltonian, 10.0),
            (CouplingScheme::HamiltonianNoSourceDecay, 1.0),
        ];
        for (scheme, n) in variants {
            match hamiltonian_envelope(scheme, n, n_a, o) {
                Ok(g) if g < best.0 => best = (g, format!("{scheme} N={n}")),
                Ok(_) => {}
                Err(e) => c.error(&format!("{scheme} N={n} at n_a={n_a}"), e),
            }
        }
        c.check(
            cascaded < best.0,
            format!("n_a={n_a}: cascaded {cascaded:.4} < best hamiltonian {:.4} ({})", best.0, best.1),
        );
    }
    c
}

fn autonomy(o: &VerifyOptions) -> Checks {
    let mut c = Checks::default();
    let mut rng = ChaCha8Rng::seed_from_u64(109);
    let mut worst = 0.0f64;
    for k in 0..10 {
        let mut cfg = if k % 2 == 0 {
            SystemConfig::cascaded_incoherent(rng.gen_range(0.2..5.0), rng.gen_range(0.05..5.0))
        } else {
            SystemConfig::cascaded_coherent(rng.gen_range(0.2..5.0), rng.gen_range(0.05..3.0), rng.gen_range(0.1..0.9))
        };
        cfg.freq_sigma = rng.gen_range(-1.0..1.0);
        cfg.freq_a = rng.gen_range(-1.0..1.0);
        cfg.gamma_sigma_star = rng.gen_range(0.0..0.5);
        cfg.gamma_phi = rng.gen_range(0.0..0.5);
        let diff = solve_adaptive_with(&cfg, o.adaptive()).and_then(|sol| {
            let reduced = reduced_density_matrix(&sol.rho, Mode::Source)?;
            let solo = steady_state(&build_source_liouvillian(&cfg)?)?;
            Ok((reduced.entries() - solo.entries()).iter().map(|z| z.norm()).fold(0.0, f64::max))
        });
        match diff {
            Ok(d) => worst = worst.max(d),
            Err(e) => return fail(c, "autonomy", e),
        }
    }
    c.check(worst <= 1e-8, format!("10 random configs (max dev {worst:.1e})"));
    c
}

fn states(o: &VerifyOptions) -> Checks {
    let mut c = Checks::default();
    for n_a in [1.0, 1.5, 3.0] {
        let point = match coherent_envelope(n_a, 0.0) {
            Ok(p) => p,
            Err(e) => return fail(c, "envelope", e),
        };
        let mut cfg = SystemConfig::cascaded_coherent(point.ratio, point.drive / EPSILON_LIMIT.sqrt(), EPSILON_LIMIT);
        cfg.tail_tol = 1e-10;
        let rho = match solve_adaptive_with(&cfg, o.adaptive()).and_then(|s| reduced_density_matrix(&s.rho, Mode::Target)) {
            Ok(r) => r,
            Err(e) => return fail(c, "steady state", e),
        };
        let p = fock_distribution(&rho);
        c.check(
            rho22_check(&p),
            format!("n_a={n_a}: ρ22={:.4} vs max(ρ11/2={:.4}, ρ33={:.4})", p[2], p[1] / 2.0, p[3]),
        );
        if n_a == 1.0 {
            match wigner_at(&rho, C64::new(0.0, 0.0)) {
                Ok(w) => c.check(w < 0.0, format!("n_a=1: W(0) = {w:.4} < 0")),
                Err(e) => c.error("W(0)", e),
            }
        }
        if n_a == 3.0 {
            let half = n_a.sqrt() + 4.0;
            let grid: Vec<f64> = (0..=120).map(|k| -half + 2.0 * half * k as f64 / 120.0).collect();
            match wigner(&rho, &grid, &grid) {
                Ok(w) => c.check(w.min() >= -1e-3, format!("n_a=3: min W = {:.2e} ≥ −1e-3", w.min())),
                Err(e) => c.error("Wigner grid", e),
            }
        }
    }
    c
}

fn confinement(o: &VerifyOptions) -> Checks {
    let mut c = Checks::default();
    let (_, high_fit) = g2g3_fits();
    let g23 = |cfg: &SystemConfig| -> CoreResult<(f64, f64)> {
        let sol = solve_adaptive_with(cfg, o.adaptive())?;
        Ok((gn_equal_time(&sol.rho, 2)?, gn_equal_time(&sol.rho, 3)?))
    };

    // Antibunching corner: weak resonant drive, r swept.
    let eps: f64 = 0.5;
    let mut low = (Vec::new(), Vec::new());
    for k in 0..9 {
        let r = 10f64.powf(0.25 * k as f64);
        match g23(&SystemConfig::cascaded_coherent(r, 0.01 / eps.sqrt(), eps)) {
            Ok((g2, g3)) => {
                low.0.push(g2);
                low.1.push(g3);
            }
            Err(e) => return fail(c, "low pump", e),
        }
    }
    match fit_power_law(&low.0, &low.1) {
        Ok(fit) => {
            c.check((fit.exponent - 2.0).abs() <= 0.3, format!("low-pump exponent {:.3} (2 ± 0.3)", fit.exponent));
        }
        Err(e) => c.error("low-pump fit", e),
    }

    // Superbunching corner: strong drive, target on the leapfrog line.
    let (mut sxy, mut sxx, mut used) = (0.0, 0.0, 0);
    for w0 in [4.0, 6.0, 8.0, 10.0] {
        for r in [0.1, 0.5] {
            let mut cfg = SystemConfig::cascaded_coherent(r, w0 / eps.sqrt(), eps);
            cfg.freq_a = w0;
            match g23(&cfg) {
                Ok((g2, g3)) if g2 > 3.0 => {
                    sxy += g2 * g3;
                    sxx += g2 * g2;
                    used += 1;
                }
                Ok(_) => {}
                Err(e) => return fail(c, "high pump", e),
            }
        }
    }
    let slope = sxy / sxx;
    let ratio = slope / high_fit.coefficient;
    c.check(
        used >= 4 && (0.5..=2.0).contains(&ratio),
        format!("high-pump slope {slope:.3} from {used} points (4.5 within ×2)"),
    );
    c
}

fn degradations(o: &VerifyOptions) -> Checks {
    let mut c = Checks::default();
    let n_a = 0.5;
    let mut lossy = SystemConfig::cascaded_coherent(1.0, 1.0, EPSILON_LIMIT);
    lossy.gamma_sigma_star = 10.0;
    let lossy = numeric_envelope(
        &lossy,
        n_a,
        EnvelopeOptions {
            build: o.build,
            ..EnvelopeOptions::default()
        },
    );
    let plain = hamiltonian_envelope(CouplingScheme::Hamiltonian, 1.0, n_a, o);
    match (lossy, plain) {
        (Ok(l), Ok(h)) => c.check(l.g2 > h, format!("γσ*=10γσ cascaded {:.4} > hamiltonian {h:.4}", l.g2)),
        (Err(e), _) | (_, Err(e)) => c.error("γσ* comparison", e),
    }

    let boosted: Vec<CoreResult<f64>> =
        [10.0, 20.0].iter().map(|&n| hamiltonian_envelope(CouplingScheme::Hamiltonian, n, n_a, o)).collect();
    let limit = hamiltonian_envelope(CouplingScheme::HamiltonianNoSourceDecay, 1.0, n_a, o);
    match (&boosted[0], &boosted[1], &limit) {
        (Ok(g10), Ok(g20), Ok(lim)) => {
            c.check((g10 - g20).abs() <= 0.05 * g20, format!("N=10 {g10:.4} vs N=20 {g20:.4}"));
            c.check((g10 - lim).abs() <= 0.05 * lim, format!("N=10 {g10:.4} vs no source decay {lim:.4}"));
        }
        _ => c.error("N saturation", "envelope failed"),
    }
    c
}
