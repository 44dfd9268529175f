//! Pseudo-entangled (Werner) states, separability thresholds, the
//! high-temperature signal model and an explicit decomposition of two-qubit
//! states over 36 product states.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // provides float math (sqrt, sin, ...) without std
use num_traits::Float;
use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::linalg::CMatrix;
use crate::spin::{DensityState, SpinError, ALGEBRA_TOL, MAX_SPINS};

/// Weights more negative than this void the separability certificate.
pub const CERTIFICATE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EntanglementError {
    #[error("epsilon must lie in [0, 1], got {0}")]
    EpsilonRange(f64),
    #[error("polarization must lie in (0, 1], got {0}")]
    PolarizationRange(f64),
    #[error("number of qubits must be between 1 and {max}, got {got}")]
    QubitCount { max: usize, got: usize },
    #[error("target state has {got} amplitudes, expected {expected}")]
    TargetDimension { expected: usize, got: usize },
    #[error("target state is not normalised (norm² = {0})")]
    TargetNorm(f64),
    #[error("state must be a two-qubit density matrix with unit trace (trace = {0})")]
    NotTwoQubitState(f64),
    #[error("decomposition does not reproduce the state (residual {0:e})")]
    Reconstruction(f64),
    #[error(transparent)]
    Spin(#[from] SpinError),
}

/// (1−ε)·1/2ⁿ + ε·|target⟩⟨target|.
#[derive(Debug, Clone, PartialEq)]
pub struct WernerState {
    pub epsilon: f64,
    pub target: Vec<C64>,
    pub rho: DensityState,
}

/// (|0…0⟩ + |1…1⟩)/√2, which is ψ⁺ for two qubits.
pub fn cat_vector(n: usize) -> Vec<C64> {
    let dim = 1usize << n;
    let mut v = vec![C64::new(0.0, 0.0); dim];
    let h = core::f64::consts::FRAC_1_SQRT_2;
    v[0] = C64::new(h, 0.0);
    v[dim - 1] += C64::new(h, 0.0);
    v
}

/// Werner state with the given target (default: the cat state, ψ⁺ for
/// n = 2). The result is a full density matrix of unit trace.
pub fn werner(epsilon: f64, target: Option<&[C64]>, n: usize) -> Result<WernerState, EntanglementError> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(EntanglementError::EpsilonRange(epsilon));
    }
    if n == 0 || n > MAX_SPINS {
        return Err(EntanglementError::QubitCount { max: MAX_SPINS, got: n });
    }
    let dim = 1usize << n;
    let target: Vec<C64> = match target {
        Some(t) => t.to_vec(),
        None => cat_vector(n),
    };
    if target.len() != dim {
        return Err(EntanglementError::TargetDimension { expected: dim, got: target.len() });
    }
    let norm: f64 = target.iter().map(|a| a.norm_sqr()).sum();
    if (norm - 1.0).abs() > ALGEBRA_TOL {
        return Err(EntanglementError::TargetNorm(norm));
    }
    let mixed = CMatrix::identity(dim).scale_real((1.0 - epsilon) / dim as f64);
    let pure = CMatrix::outer(&target, &target).scale_real(epsilon);
    let rho = DensityState::new(&mixed + &pure)?;
    Ok(WernerState { epsilon, target, rho })
}

/// Known separability limits for n-qubit Werner states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparabilityBounds {
    /// Every state with ε below this is separable: 1/(1 + 2^(2n−1)).
    pub always_separable_below: f64,
    /// Entangled states exist above this: 1/(1 + 2^(n/2)).
    pub entangled_exists_above: f64,
}

pub fn separability_bounds(n: usize) -> SeparabilityBounds {
    let n = n as f64;
    SeparabilityBounds {
        always_separable_below: 1.0 / (1.0 + 2f64.powf(2.0 * n - 1.0)),
        entangled_exists_above: 1.0 / (1.0 + 2f64.powf(n / 2.0)),
    }
}

/// Pseudo-pure fraction ε ≈ polarization·n/2ⁿ reachable from thermal
/// equilibrium in the high-temperature limit.
pub fn epsilon_high_temperature(n: usize, polarization: f64) -> Result<f64, EntanglementError> {
    if n == 0 {
        return Err(EntanglementError::QubitCount { max: usize::MAX, got: n });
    }
    if !(polarization > 0.0 && polarization <= 1.0) {
        return Err(EntanglementError::PolarizationRange(polarization));
    }
    Ok(polarization * n as f64 / 2f64.powi(n as i32))
}

/// Smallest n ≤ `max_n` at which the high-temperature ε exceeds the
/// always-separable bound, i.e. the smallest register whose pseudo-pure
/// states are not guaranteed separable.
pub fn separability_crossover(polarization: f64, max_n: usize) -> Result<Option<usize>, EntanglementError> {
    for n in 1..=max_n {
        if epsilon_high_temperature(n, polarization)? > separability_bounds(n).always_separable_below {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

/// The six single-qubit states |0⟩, |1⟩, |+⟩, |−⟩, |+i⟩, |−i⟩.
pub fn single_qubit_states() -> [[C64; 2]; 6] {
    let h = core::f64::consts::FRAC_1_SQRT_2;
    let r = |x: f64| C64::new(x, 0.0);
    let i = |x: f64| C64::new(0.0, x);
    [[r(1.0), r(0.0)], [r(0.0), r(1.0)], [r(h), r(h)], [r(h), r(-h)], [r(h), i(h)], [r(h), i(-h)]]
}

/// Labels of [`single_qubit_states`], for reports.
pub const STATE_LABELS: [&str; 6] = ["0", "1", "+", "-", "+i", "-i"];

fn projector(v: &[C64]) -> CMatrix {
    CMatrix::outer(v, v)
}

/// The 36 two-qubit product states β_jk = β_j ⊗ β_k, with j the slower index.
pub fn overcomplete_basis() -> Vec<DensityState> {
    let singles = single_qubit_states();
    let mut out = Vec::with_capacity(36);
    for a in &singles {
        for b in &singles {
            out.push(DensityState::from_matrix_unchecked(projector(a).kron(&projector(b))));
        }
    }
    out
}

/// Weights P_jk of a two-qubit state over the 36 product states.
#[derive(Debug, Clone, PartialEq)]
pub struct OvercompleteDecomposition {
    pub p: [[f64; 6]; 6],
    /// Frobenius norm of ρ − Σ P_jk β_jk.
    pub residual: f64,
    /// All weights are nonnegative, so the state is an explicit mixture of
    /// product states and hence separable.
    pub certificate: bool,
}

impl OvercompleteDecomposition {
    pub fn sum(&self) -> f64 {
        self.p.iter().flatten().sum()
    }

    pub fn min(&self) -> f64 {
        self.p.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Decomposes ρ = Σ P_jk β_jk with P_jk = Tr[ρ (β_j − 1/3)⊗(β_k − 1/3)].
///
/// Since Σ_j β_j = 3·1 and the six states are the ±x, ±y, ±z Bloch
/// vectors, β_j − 1/3 is the dual frame of β_j: the formula reconstructs
/// every two-qubit operator exactly, and the weights of a unit-trace state
/// sum to one. Nonnegative weights certify separability; negative ones only
/// mean this particular decomposition gives no certificate.
pub fn decompose_overcomplete(rho: &DensityState) -> Result<OvercompleteDecomposition, EntanglementError> {
    let trace = rho.trace();
    if rho.dim() != 4 || (trace - 1.0).abs() > ALGEBRA_TOL {
        return Err(EntanglementError::NotTwoQubitState(trace));
    }
    let third = CMatrix::identity(2).scale_real(1.0 / 3.0);
    let duals: Vec<CMatrix> = single_qubit_states().iter().map(|v| &projector(v) - &third).collect();
    let basis = overcomplete_basis();
    let mut p = [[0.0; 6]; 6];
    let mut rebuilt = CMatrix::zeros(4);
    for j in 0..6 {
        for k in 0..6 {
            let w = rho.matrix().inner(&duals[j].kron(&duals[k])).re;
            p[j][k] = w;
            rebuilt = &rebuilt + &basis[6 * j + k].matrix().scale_real(w);
        }
    }
    let residual = (&rebuilt - rho.matrix()).frobenius_norm();
    if residual > ALGEBRA_TOL {
        return Err(EntanglementError::Reconstruction(residual));
    }
    let certificate = p.iter().flatten().all(|&w| w >= -CERTIFICATE_TOL);
    Ok(OvercompleteDecomposition { p, residual, certificate })
}
