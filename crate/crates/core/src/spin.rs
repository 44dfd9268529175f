//! Spin systems, density matrices and propagators.
//!
//! Basis states are indexed with spin 0 as the most significant bit, and bit
//! value 0 is the low-energy state |0⟩ (I_z = +½).

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_complex::Complex64 as C64;

use thiserror::Error;

use crate::linalg::CMatrix;

/// Largest supported spin count; matrices are stored dense.
pub const MAX_SPINS: usize = 10;

/// Tolerance for exact algebraic identities.
pub const ALGEBRA_TOL: f64 = 1e-9;

/// Tolerance for products of many propagators.
pub const PROPAGATOR_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpinError {
    #[error("a spin system needs between 1 and {MAX_SPINS} spins, got {0}")]
    SpinCount(usize),
    #[error("spin index {index} out of range for a {n}-spin system")]
    SpinIndex { index: usize, n: usize },
    #[error("spin {0} cannot couple to itself")]
    SelfCoupling(usize),
    #[error("non-finite value for {0}")]
    NotFinite(String),
    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),
    #[error("matrix dimension {0} is not a power of two")]
    BadDimension(usize),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("bad product-operator letter {0:?} (expected one of E, x, y, z)")]
    BadLetter(char),
    #[error("label {label:?} has {got} letters, expected {expected}")]
    LabelLength { label: String, got: usize, expected: usize },
}

/// A weakly coupled system of spin-½ nuclei.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinSystem {
    offsets: Vec<f64>,
    couplings: BTreeMap<(usize, usize), f64>,
    species: Vec<String>,
    names: Vec<String>,
}

impl SpinSystem {
    /// Uncoupled system with the given offsets (Hz) and species labels.
    pub fn new(offsets: Vec<f64>, species: Vec<String>) -> Result<Self, SpinError> {
        let n = offsets.len();
        if n == 0 || n > MAX_SPINS {
            return Err(SpinError::SpinCount(n));
        }
        if species.len() != n {
            return Err(SpinError::DimensionMismatch(n, species.len()));
        }
        if let Some(k) = offsets.iter().position(|x| !x.is_finite()) {
            return Err(SpinError::NotFinite(format!("offset of spin {k}")));
        }
        let names = (0..n).map(|k| format!("q{k}")).collect();
        Ok(Self { offsets, couplings: BTreeMap::new(), species, names })
    }

    /// Homonuclear ¹H system with the given offsets.
    pub fn homonuclear(offsets: &[f64]) -> Result<Self, SpinError> {
        Self::new(offsets.to_vec(), offsets.iter().map(|_| "1H".to_string()).collect())
    }

    pub fn with_coupling(mut self, i: usize, j: usize, hz: f64) -> Result<Self, SpinError> {
        self.set_coupling(i, j, hz)?;
        Ok(self)
    }

    pub fn set_coupling(&mut self, i: usize, j: usize, hz: f64) -> Result<(), SpinError> {
        self.check_index(i)?;
        self.check_index(j)?;
        if i == j {
            return Err(SpinError::SelfCoupling(i));
        }
        if !hz.is_finite() {
            return Err(SpinError::NotFinite(format!("J({i},{j})")));
        }
        let key = (i.min(j), i.max(j));
        if hz == 0.0 {
            self.couplings.remove(&key);
        } else {
            self.couplings.insert(key, hz);
        }
        Ok(())
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self, SpinError> {
        if names.len() != self.n() {
            return Err(SpinError::DimensionMismatch(self.n(), names.len()));
        }
        self.names = names;
        Ok(self)
    }

    /// Two ¹H spins of cytosine: multiplets 763 Hz apart, centred on the
    /// carrier, J = 7.2 Hz.
    pub fn cytosine() -> Self {
        Self::homonuclear(&[381.5, -381.5])
            .and_then(|s| s.with_coupling(0, 1, 7.2))
            .and_then(|s| s.with_names(["H5".into(), "H6".into()].into()))
            .expect("valid preset")
    }

    /// ¹H–¹³C pair of labelled chloroform, both spins on resonance in their
    /// own rotating frames. J = 215 Hz is example data.
    pub fn chloroform() -> Self {
        Self::new(alloc::vec![0.0, 0.0], alloc::vec!["1H".into(), "13C".into()])
            .and_then(|s| s.with_coupling(0, 1, 215.0))
            .and_then(|s| s.with_names(["H".into(), "C".into()].into()))
            .expect("valid preset")
    }

    /// Homonuclear system with every pair coupled; handy for tests and for
    /// circuits that need arbitrary two-qubit gates.
    pub fn fully_coupled(offsets: &[f64], j_hz: f64) -> Result<Self, SpinError> {
        let mut s = Self::homonuclear(offsets)?;
        for i in 0..s.n() {
            for j in (i + 1)..s.n() {
                // spread the couplings so no two are equal
                s.set_coupling(i, j, j_hz * (1.0 + 0.1 * (i + 2 * j) as f64))?;
            }
        }
        Ok(s)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.offsets.len()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        1 << self.n()
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn offset(&self, k: usize) -> f64 {
        self.offsets[k]
    }

    pub fn species(&self) -> &[String] {
        &self.species
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// J(i, j) in Hz, zero when uncoupled.
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.couplings.get(&(i.min(j), i.max(j))).copied().unwrap_or(0.0)
    }

    /// Nonzero couplings keyed by (i, j) with i < j.
    pub fn couplings(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.couplings
    }

    /// Spins with a nonzero coupling to `k`, ascending.
    pub fn partners(&self, k: usize) -> Vec<usize> {
        (0..self.n()).filter(|&j| j != k && self.coupling(k, j) != 0.0).collect()
    }

    pub fn is_heteronuclear(&self) -> bool {
        self.species.iter().any(|s| *s != self.species[0])
    }

    pub fn check_index(&self, k: usize) -> Result<(), SpinError> {
        if k < self.n() {
            Ok(())
        } else {
            Err(SpinError::SpinIndex { index: k, n: self.n() })
        }
    }

    /// Bit of spin `k` in basis state `s`.
    #[inline]
    pub fn bit(&self, s: usize, k: usize) -> usize {
        bit_of(self.n(), s, k)
    }
}

#[inline]
pub(crate) fn bit_of(n: usize, s: usize, k: usize) -> usize {
    (s >> (n - 1 - k)) & 1
}

#[inline]
pub(crate) fn stride_of(n: usize, k: usize) -> usize {
    1 << (n - 1 - k)
}

pub(crate) fn spins_for_dim(dim: usize) -> Result<usize, SpinError> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(SpinError::BadDimension(dim));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// A (deviation) density matrix.
///
/// Multiples of the identity carry no NMR signal, so states that differ only
/// in their trace are treated as equivalent by [`DensityState::same_deviation`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityState {
    m: CMatrix,
}

impl DensityState {
    pub fn new(m: CMatrix) -> Result<Self, SpinError> {
        spins_for_dim(m.dim())?;
        let err = m.hermiticity_error();
        if err > ALGEBRA_TOL * m.max_abs().max(1.0) {
            return Err(SpinError::NotHermitian(err));
        }
        Ok(Self { m })
    }

    pub(crate) fn from_matrix_unchecked(m: CMatrix) -> Self {
        Self { m }
    }

    pub fn zero(n: usize) -> Self {
        Self { m: CMatrix::zeros(1 << n) }
    }

    pub fn from_diag(diag: &[f64]) -> Result<Self, SpinError> {
        Self::new(CMatrix::from_real_diag(diag))
    }

    /// |ψ⟩⟨ψ| for a normalised state vector.
    pub fn pure(psi: &[C64]) -> Result<Self, SpinError> {
        Self::new(CMatrix::outer(psi, psi))
    }

    /// |s⟩⟨s| for computational basis state `s`.
    pub fn basis(n: usize, s: usize) -> Self {
        let mut m = CMatrix::zeros(1 << n);
        m[(s, s)] = C64::new(1.0, 0.0);
        Self { m }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.m.dim()
    }

    pub fn n_spins(&self) -> usize {
        self.m.dim().trailing_zeros() as usize
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }

    /// Real diagonal (populations).
    pub fn populations(&self) -> Vec<f64> {
        self.m.diag().iter().map(|z| z.re).collect()
    }

    /// Copy with the identity component removed.
    pub fn traceless(&self) -> Self {
        let shift = self.m.trace() / self.dim() as f64;
        Self { m: &self.m - &CMatrix::identity(self.dim()).scale(shift) }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { m: self.m.scale_real(s) }
    }

    pub fn plus(&self, other: &Self) -> Self {
        Self { m: &self.m + &other.m }
    }

    pub fn minus(&self, other: &Self) -> Self {
        Self { m: &self.m - &other.m }
    }

    pub fn evolve(&self, u: &Propagator) -> Self {
        Self { m: self.m.conjugate_by(u.matrix()) }
    }

    /// Frobenius distance after discarding identity components.
    pub fn deviation_distance(&self, other: &Self) -> f64 {
        self.traceless().minus(&other.traceless()).m.frobenius_norm()
    }

    pub fn same_deviation(&self, other: &Self, tol: f64) -> bool {
        self.deviation_distance(other) <= tol
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        crate::linalg::hermitian_eigenvalues(&self.m)
    }

    /// Unit trace and positive semidefinite, each within 1e-9.
    pub fn is_physical(&self) -> bool {
        (self.trace() - 1.0).abs() <= ALGEBRA_TOL && self.eigenvalues().iter().all(|&e| e >= -ALGEBRA_TOL)
    }

    /// Embeds this state as spin `k` of a larger register with the other
    /// spins given, i.e. the Kronecker product self ⊗ rest.
    pub fn kron(&self, other: &Self) -> Self {
        Self { m: self.m.kron(&other.m) }
    }
}

/// A unitary propagator on 2ⁿ levels.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagator {
    u: CMatrix,
}

impl Propagator {
    pub fn new(u: CMatrix) -> Result<Self, SpinError> {
        spins_for_dim(u.dim())?;
        let err = u.unitarity_error();
        if err > PROPAGATOR_TOL {
            return Err(SpinError::NotUnitary(err));
        }
        Ok(Self { u })
    }

    pub(crate) fn from_matrix_unchecked(u: CMatrix) -> Self {
        Self { u }
    }

    pub fn identity(n: usize) -> Self {
        Self { u: CMatrix::identity(1 << n) }
    }

    /// Diagonal propagator from per-level phases: diag(e^{-i φ_s}).
    pub fn from_phases(phases: &[f64]) -> Self {
        Self { u: CMatrix::from_diag(&phases.iter().map(|&p| C64::from_polar(1.0, -p)).collect::<Vec<_>>()) }
    }

    /// exp(−i·G) for a diagonal Hermitian generator given by its diagonal.
    pub fn exp_diagonal(generator_diag: &[f64]) -> Self {
        Self::from_phases(generator_diag)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.u
    }

    pub fn dim(&self) -> usize {
        self.u.dim()
    }

    pub fn n_spins(&self) -> usize {
        self.u.dim().trailing_zeros() as usize
    }

    /// `other` applied after `self`: other·self.
    pub fn then(&self, other: &Self) -> Self {
        Self { u: other.u.matmul(&self.u) }
    }

    pub fn adjoint(&self) -> Self {
        Self { u: self.u.adjoint() }
    }

    pub fn apply(&self, psi: &[C64]) -> Vec<C64> {
        self.u.apply(psi)
    }
}

/// Frobenius distance between `a` and `b` after removing the best global
/// phase, α = arg Tr(b†a).
pub fn global_phase_distance(a: &Propagator, b: &Propagator) -> Result<f64, SpinError> {
    matrix_phase_distance(a.matrix(), b.matrix())
}

pub(crate) fn matrix_phase_distance(a: &CMatrix, b: &CMatrix) -> Result<f64, SpinError> {
    if a.dim() != b.dim() {
        return Err(SpinError::DimensionMismatch(a.dim(), b.dim()));
    }
    let overlap = b.inner(a);
    let alpha = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { C64::new(1.0, 0.0) };
    Ok((a - &b.scale(alpha)).frobenius_norm())
}

/// True iff a = e^{iα}·b within `tol` (Frobenius norm) for some α.
pub fn equal_up_to_global_phase(a: &Propagator, b: &Propagator, tol: f64) -> Result<bool, SpinError> {
    Ok(global_phase_distance(a, b)? <= tol)
}

/// Coherence order ⟨r|ρ|c⟩ ↦ m(r) − m(c) with m the total z quantum number.
#[inline]
pub fn coherence_order(r: usize, c: usize) -> i32 {
    c.count_ones() as i32 - r.count_ones() as i32
}

/// Zeroes every element whose coherence order is not in `orders`.
pub fn coherence_order_projection(rho: &DensityState, orders: &[i32]) -> DensityState {
    DensityState {
        m: rho.m.map_indexed(|r, c, z| if orders.contains(&coherence_order(r, c)) { z } else { C64::new(0.0, 0.0) }),
    }
}
