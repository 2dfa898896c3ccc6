//! Operator algebra on the truncated space of a two-level system (2LS) and a
//! harmonic oscillator.
//!
//! The composite basis is ordered with the 2LS factor first: the index of
//! `|s, n⟩` is `s·(n_max+1) + n`, with `s = 0` the ground state `|g⟩` and
//! `s = 1` the excited state `|e⟩`. Every superoperator index in the crate
//! derives from this ordering.

use ndarray::{linalg::kron, Array1, Array2};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Which factors a space is made of.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Subsystems {
    /// 2LS ⊗ oscillator, the space of every simulation.
    Composite,
    /// The oscillator alone (reduced states, chart states).
    Oscillator,
    /// The 2LS alone (reduced source states, solo-source runs).
    TwoLevel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HilbertSpec {
    n_max: usize,
    kind: Subsystems,
}

impl HilbertSpec {
    /// 2LS ⊗ oscillator with Fock states `0..=n_max`.
    pub fn composite(n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::param("n_max", "must be at least 1"));
        }
        Ok(Self {
            n_max,
            kind: Subsystems::Composite,
        })
    }

    pub fn oscillator(n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::param("n_max", "must be at least 1"));
        }
        Ok(Self {
            n_max,
            kind: Subsystems::Oscillator,
        })
    }

    pub fn two_level() -> Self {
        Self {
            n_max: 0,
            kind: Subsystems::TwoLevel,
        }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn kind(&self) -> Subsystems {
        self.kind
    }

    pub fn has_tls(&self) -> bool {
        self.kind != Subsystems::Oscillator
    }

    pub fn has_oscillator(&self) -> bool {
        self.kind != Subsystems::TwoLevel
    }

    /// Number of Fock levels kept (1 for a bare 2LS).
    pub fn osc_dim(&self) -> usize {
        self.n_max + 1
    }

    pub fn tls_dim(&self) -> usize {
        if self.has_tls() {
            2
        } else {
            1
        }
    }

    pub fn dim(&self) -> usize {
        self.tls_dim() * self.osc_dim()
    }

    /// Basis index of `|tls, n⟩`.
    pub fn index(&self, tls: usize, n: usize) -> usize {
        debug_assert!(tls < self.tls_dim() && n <= self.n_max);
        tls * self.osc_dim() + n
    }

    /// Inverse of [`HilbertSpec::index`].
    pub fn split(&self, i: usize) -> (usize, usize) {
        (i / self.osc_dim(), i % self.osc_dim())
    }

    pub(crate) fn check_same(&self, other: &HilbertSpec) -> Result<()> {
        if self != other {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }
}

/// Dense complex matrix acting on a [`HilbertSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    spec: HilbertSpec,
    entries: Array2<C64>,
}

impl Operator {
    pub fn new(spec: HilbertSpec, entries: Array2<C64>) -> Result<Self> {
        let d = spec.dim();
        if entries.dim() != (d, d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: entries.nrows().max(entries.ncols()),
            });
        }
        Ok(Self { spec, entries })
    }

    pub fn zeros(spec: HilbertSpec) -> Self {
        let d = spec.dim();
        Self {
            spec,
            entries: Array2::zeros((d, d)),
        }
    }

    pub fn identity(spec: HilbertSpec) -> Self {
        Self {
            spec,
            entries: Array2::eye(spec.dim()),
        }
    }

    pub fn spec(&self) -> HilbertSpec {
        self.spec
    }

    pub fn entries(&self) -> &Array2<C64> {
        &self.entries
    }

    pub fn into_entries(self) -> Array2<C64> {
        self.entries
    }

    pub fn dagger(&self) -> Self {
        Self {
            spec: self.spec,
            entries: self.entries.t().mapv(|z| z.conj()),
        }
    }

    pub fn scale(&self, s: impl Into<C64>) -> Self {
        let s = s.into();
        Self {
            spec: self.spec,
            entries: &self.entries * s,
        }
    }

    pub fn trace(&self) -> C64 {
        self.entries.diag().sum()
    }

    pub fn commutator(&self, other: &Operator) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let d = self.spec.dim();
        (0..d).all(|i| (i..d).all(|j| (self.entries[[i, j]] - self.entries[[j, i]].conj()).norm() <= tol))
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Integer power by repeated multiplication.
    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Operator::identity(self.spec), |acc, _| &acc * self)
    }

    pub fn apply(&self, v: &StateVector) -> Result<Array1<C64>> {
        self.spec.check_same(&v.spec)?;
        Ok(self.entries.dot(&v.amplitudes))
    }
}

impl<'a> Mul<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn mul(self, rhs: &'a Operator) -> Operator {
        assert_eq!(self.spec, rhs.spec, "operator product across different spaces");
        Operator {
            spec: self.spec,
            entries: self.entries.dot(&rhs.entries),
        }
    }
}

impl<'a> Add<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn add(self, rhs: &'a Operator) -> Operator {
        assert_eq!(self.spec, rhs.spec, "operator sum across different spaces");
        Operator {
            spec: self.spec,
            entries: &self.entries + &rhs.entries,
        }
    }
}

impl<'a> Sub<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn sub(self, rhs: &'a Operator) -> Operator {
        assert_eq!(self.spec, rhs.spec, "operator difference across different spaces");
        Operator {
            spec: self.spec,
            entries: &self.entries - &rhs.entries,
        }
    }
}

/// `(n_max+1)×(n_max+1)` ladder block with `⟨n−1|a|n⟩ = √n`.
pub fn ladder_block(n_max: usize) -> Array2<C64> {
    let mut a = Array2::zeros((n_max + 1, n_max + 1));
    for n in 1..=n_max {
        a[[n - 1, n]] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

/// `|g⟩⟨e|` in the `(g, e)` basis.
pub fn lowering_block() -> Array2<C64> {
    let mut s = Array2::zeros((2, 2));
    s[[0, 1]] = ONE;
    s
}

/// Oscillator annihilation operator, embedded as `I₂ ⊗ a` on composite
/// spaces.
///
/// Panics on a bare two-level space, which has no oscillator factor.
pub fn fock_annihilation(spec: HilbertSpec) -> Operator {
    assert!(spec.has_oscillator(), "fock_annihilation on a space without oscillator");
    let a = ladder_block(spec.n_max());
    let entries = if spec.has_tls() {
        kron(&Array2::<C64>::eye(2), &a)
    } else {
        a
    };
    Operator { spec, entries }
}

/// 2LS lowering operator `σ = |g⟩⟨e|`, embedded as `σ ⊗ I`.
///
/// Panics on an oscillator-only space.
pub fn tls_lowering(spec: HilbertSpec) -> Operator {
    assert!(spec.has_tls(), "tls_lowering on a space without two-level system");
    let entries = kron(&lowering_block(), &Array2::<C64>::eye(spec.osc_dim()));
    Operator { spec, entries }
}

/// Kronecker product with the fixed (2LS, oscillator) ordering.
pub fn tensor(tls_block: &Array2<C64>, osc_block: &Array2<C64>) -> Result<Operator> {
    if tls_block.dim() != (2, 2) {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: tls_block.nrows().max(tls_block.ncols()),
        });
    }
    let (r, c) = osc_block.dim();
    if r != c || r < 2 {
        return Err(Error::DimensionMismatch {
            expected: r.max(2),
            found: c,
        });
    }
    let spec = HilbertSpec::composite(r - 1)?;
    Ok(Operator {
        spec,
        entries: kron(tls_block, osc_block),
    })
}

/// `Tr(ρA)`.
pub fn expectation(rho: &DensityMatrix, op: &Operator) -> Result<C64> {
    rho.spec.check_same(&op.spec)?;
    let d = rho.spec.dim();
    let mut acc = ZERO;
    for i in 0..d {
        for k in 0..d {
            acc += rho.entries[[i, k]] * op.entries[[k, i]];
        }
    }
    Ok(acc)
}

/// Normalized pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    spec: HilbertSpec,
    amplitudes: Array1<C64>,
}

impl StateVector {
    pub fn new(spec: HilbertSpec, amplitudes: Array1<C64>) -> Result<Self> {
        if amplitudes.len() != spec.dim() {
            return Err(Error::DimensionMismatch {
                expected: spec.dim(),
                found: amplitudes.len(),
            });
        }
        let norm2: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState(format!("squared norm {norm2} is not 1")));
        }
        Ok(Self { spec, amplitudes })
    }

    /// Basis state `|i⟩`.
    pub fn basis(spec: HilbertSpec, i: usize) -> Self {
        let mut amplitudes = Array1::zeros(spec.dim());
        amplitudes[i] = ONE;
        Self { spec, amplitudes }
    }

    pub fn spec(&self) -> HilbertSpec {
        self.spec
    }

    pub fn amplitudes(&self) -> &Array1<C64> {
        &self.amplitudes
    }

    /// Occupation probabilities `|α_i|²`.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn to_density(&self) -> DensityMatrix {
        let d = self.spec.dim();
        let entries = Array2::from_shape_fn((d, d), |(i, j)| self.amplitudes[i] * self.amplitudes[j].conj());
        DensityMatrix {
            spec: self.spec,
            entries,
        }
    }
}

/// Hermitian, unit-trace state.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    spec: HilbertSpec,
    entries: Array2<C64>,
}

impl DensityMatrix {
    pub const HERMITIAN_TOL: f64 = 1e-10;
    pub const TRACE_TOL: f64 = 1e-10;
    pub const EIGEN_TOL: f64 = 1e-8;

    /// Validates hermiticity and trace. Positivity is checked separately
    /// with [`DensityMatrix::min_eigenvalue`], which costs a diagonalization.
    pub fn new(spec: HilbertSpec, entries: Array2<C64>) -> Result<Self> {
        let op = Operator::new(spec, entries)?;
        if !op.is_hermitian(Self::HERMITIAN_TOL) {
            return Err(Error::InvalidState("not Hermitian".into()));
        }
        let tr = op.trace();
        if (tr - ONE).norm() > Self::TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        Ok(Self {
            spec,
            entries: op.entries,
        })
    }

    pub(crate) fn from_raw(spec: HilbertSpec, entries: Array2<C64>) -> Self {
        Self { spec, entries }
    }

    /// Diagonal state from occupation probabilities of the oscillator.
    pub fn from_diagonal(spec: HilbertSpec, p: &[f64]) -> Result<Self> {
        if p.len() != spec.dim() {
            return Err(Error::DimensionMismatch {
                expected: spec.dim(),
                found: p.len(),
            });
        }
        let mut entries = Array2::zeros((spec.dim(), spec.dim()));
        for (i, &pi) in p.iter().enumerate() {
            entries[[i, i]] = C64::new(pi, 0.0);
        }
        Self::new(spec, entries)
    }

    /// `|i⟩⟨i|`.
    pub fn basis(spec: HilbertSpec, i: usize) -> Self {
        StateVector::basis(spec, i).to_density()
    }

    pub fn spec(&self) -> HilbertSpec {
        self.spec
    }

    pub fn entries(&self) -> &Array2<C64> {
        &self.entries
    }

    pub fn into_entries(self) -> Array2<C64> {
        self.entries
    }

    pub fn trace(&self) -> C64 {
        self.entries.diag().sum()
    }

    pub fn purity(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.entries.diag().iter().map(|z| z.re).collect()
    }

    pub fn as_operator(&self) -> Operator {
        Operator {
            spec: self.spec,
            entries: self.entries.clone(),
        }
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let d = self.spec.dim();
        let m = nalgebra::DMatrix::from_fn(d, d, |i, j| {
            let z = 0.5 * (self.entries[[i, j]] + self.entries[[j, i]].conj());
            nalgebra::Complex::new(z.re, z.im)
        });
        m.symmetric_eigenvalues().iter().fold(f64::INFINITY, |a, &b| a.min(b))
    }

    /// Largest elementwise distance to another state on the same space.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        self.entries
            .iter()
            .zip(other.entries.iter())
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn osc(n: usize) -> HilbertSpec {
        HilbertSpec::oscillator(n).unwrap()
    }

    #[test]
    fn dims() {
        for n in 1..6 {
            assert_eq!(HilbertSpec::composite(n).unwrap().dim(), 2 * (n + 1));
        }
        assert!(HilbertSpec::composite(0).is_err());
        assert_eq!(HilbertSpec::two_level().dim(), 2);
    }

    #[test]
    fn ladder_block_n1() {
        let a = fock_annihilation(osc(1));
        let expect = ndarray::arr2(&[[ZERO, ONE], [ZERO, ZERO]]);
        assert_eq!(a.entries(), &expect);
    }

    #[test]
    fn number_operator_and_vacuum() {
        let spec = osc(6);
        let a = fock_annihilation(spec);
        let num = &a.dagger() * &a;
        for n in 0..=6 {
            let v = StateVector::basis(spec, n);
            let out = num.apply(&v).unwrap();
            for (k, z) in out.iter().enumerate() {
                let want = if k == n { n as f64 } else { 0.0 };
                assert!((z - C64::new(want, 0.0)).norm() < 1e-14);
            }
        }
        let vac = a.apply(&StateVector::basis(spec, 0)).unwrap();
        assert!(vac.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn ccr_broken_only_on_top_row() {
        for n_max in 1..8 {
            let spec = osc(n_max);
            let a = fock_annihilation(spec);
            let c = a.commutator(&a.dagger());
            for i in 0..=n_max {
                for j in 0..=n_max {
                    let want = if i == j && i < n_max {
                        1.0
                    } else if i == j {
                        -(n_max as f64)
                    } else {
                        0.0
                    };
                    assert!((c.entries()[[i, j]].re - want).abs() < 1e-12, "n_max={n_max} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn tls_algebra() {
        let spec = HilbertSpec::composite(3).unwrap();
        let s = tls_lowering(spec);
        assert!((&s * &s).max_abs() == 0.0);
        let comp = &(&s.dagger() * &s) + &(&s * &s.dagger());
        assert_eq!(comp, Operator::identity(spec));
        let a = fock_annihilation(spec);
        assert_eq!(s.commutator(&a).max_abs(), 0.0);
    }

    #[test]
    fn tensor_properties() {
        let n = 4;
        let id = tensor(&Array2::eye(2), &Array2::eye(n + 1)).unwrap();
        assert_eq!(id, Operator::identity(HilbertSpec::composite(n).unwrap()));

        let s = lowering_block();
        let a = ladder_block(n);
        let lhs = &tensor(&s, &Array2::eye(n + 1)).unwrap() * &tensor(&Array2::eye(2), &a).unwrap();
        assert_eq!(lhs, tensor(&s, &a).unwrap());

        let t = ndarray::arr2(&[[C64::new(1.0, 2.0), ONE], [ZERO, C64::new(-0.5, 0.0)]]);
        let b = Array2::from_shape_fn((n + 1, n + 1), |(i, j)| C64::new(i as f64, j as f64 * 0.3));
        let tr_ab = tensor(&t, &b).unwrap().trace();
        let want = t.diag().sum() * b.diag().sum();
        assert!((tr_ab - want).norm() < 1e-12);

        assert!(tensor(&Array2::eye(3), &a).is_err());
        assert!(tensor(&s, &Array2::zeros((3, 4))).is_err());
    }

    #[test]
    fn expectation_values() {
        let spec = osc(5);
        let a = fock_annihilation(spec);
        let rho1 = DensityMatrix::basis(spec, 1);
        let num = &a.dagger() * &a;
        assert!((expectation(&rho1, &Operator::identity(spec)).unwrap() - ONE).norm() < 1e-15);
        assert!((expectation(&rho1, &num).unwrap() - ONE).norm() < 1e-15);
        let rho2 = DensityMatrix::basis(spec, 2);
        let ad2a2 = &a.dagger().pow(2) * &a.pow(2);
        assert!((expectation(&rho2, &ad2a2).unwrap().re - 2.0).abs() < 1e-14);
        let other = DensityMatrix::basis(osc(4), 1);
        assert!(expectation(&other, &num).is_err());
    }

    #[test]
    fn density_validation() {
        let spec = osc(2);
        let mut m = Array2::zeros((3, 3));
        m[[0, 0]] = C64::new(0.5, 0.0);
        m[[1, 1]] = C64::new(0.5, 0.0);
        m[[0, 1]] = C64::new(0.0, 0.1);
        assert!(DensityMatrix::new(spec, m.clone()).is_err());
        m[[1, 0]] = C64::new(0.0, -0.1);
        let rho = DensityMatrix::new(spec, m).unwrap();
        // Spectrum {0.6, 0.4, 0}.
        assert!(rho.min_eigenvalue().abs() < 1e-14);
        assert!(StateVector::new(spec, ndarray::arr1(&[ONE, ONE, ZERO])).is_err());
    }

    proptest::proptest! {
        #[test]
        fn dagger_involution(seed in 0u64..1000, n_max in 1usize..6) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let spec = HilbertSpec::composite(n_max).unwrap();
            let d = spec.dim();
            let m = Array2::from_shape_fn((d, d), |_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let op = Operator::new(spec, m).unwrap();
            proptest::prop_assert_eq!(op.dagger().dagger(), op);
        }

        #[test]
        fn hermitian_expectation_is_real(seed in 0u64..1000) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let spec = HilbertSpec::composite(3).unwrap();
            let d = spec.dim();
            let amps: Array1<C64> = (0..d).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let psi = StateVector::new(spec, amps / C64::new(norm, 0.0)).unwrap();
            let m = Array2::from_shape_fn((d, d), |_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let op = Operator::new(spec, m).unwrap();
            let herm = &op + &op.dagger();
            let val = expectation(&psi.to_density(), &herm).unwrap();
            proptest::prop_assert!(val.im.abs() < 1e-10);
        }
    }
}
