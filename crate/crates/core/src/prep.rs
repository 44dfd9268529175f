//! Pseudo-pure state preparation.
//!
//! Every route starts from the equal-polarisation equilibrium deviation
//! Σ_k I_kz (the form in which the standard sequences are written) and
//! reports the fraction of pseudo-pure signal it retains. For routes that
//! produce a state a·1 + ε|0…0⟩⟨0…0| on m qubits the reported scale is
//! ε/2^(m−1), which is the common coefficient of the single-spin z labels in
//! the product-operator expansion (so ½(Iz + Sz + 2IzSz) has scale ½).

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)] // provides float math (sqrt, sin, ...) without std
use num_traits::Float;
use thiserror::Error;

use crate::compiler::{compile_circuit, Circuit, CompileError, Gate};
use crate::linalg::CMatrix;
use crate::product::{expand, ProductLabel};
use crate::pulse::{run_program, Phase, PulseElement, PulseError, PulseProgram};
use crate::spin::{bit_of, DensityState, SpinError, SpinSystem};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PrepError {
    #[error("{method} preparation needs {required} spins, the system has {got}")]
    SpinCount { method: PrepMethod, required: String, got: usize },
    #[error("{method} preparation needs spins {0} and {1} to be coupled", .pair.0, .pair.1)]
    Uncoupled { method: PrepMethod, pair: (usize, usize) },
    #[error(
        "the Pravia sequence leaves zero-quantum terms that survive the crush in a homonuclear system; use the Cory route instead"
    )]
    ZeroQuantumSurvives,
    #[error("exhaustive averaging on {n} spins would take {experiments} experiments; at most 5 spins (31 experiments) are supported")]
    TooManyExperiments { n: usize, experiments: usize },
    #[error("experiment order must be a permutation of 0..{0}")]
    BadOrder(usize),
    #[error("logical labeling needs a homonuclear system")]
    Heteronuclear,
    #[error(transparent)]
    Pulse(#[from] PulseError),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Spin(#[from] SpinError),
}

/// The preparation routes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PrepMethod {
    Cory,
    Pravia,
    Knill,
    Exhaustive,
    LogicalLabel,
    Cat,
}

impl PrepMethod {
    pub const ALL: [PrepMethod; 6] =
        [PrepMethod::Cory, PrepMethod::Pravia, PrepMethod::Knill, PrepMethod::Exhaustive, PrepMethod::LogicalLabel, PrepMethod::Cat];

    pub fn name(self) -> &'static str {
        match self {
            PrepMethod::Cory => "cory",
            PrepMethod::Pravia => "pravia",
            PrepMethod::Knill => "knill",
            PrepMethod::Exhaustive => "exhaustive",
            PrepMethod::LogicalLabel => "logical",
            PrepMethod::Cat => "cat",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == name)
    }
}

impl fmt::Display for PrepMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Output of a preparation route.
#[derive(Debug, Clone, PartialEq)]
pub struct PrepResult {
    /// The prepared (deviation) state. For logical labeling this is the
    /// two-qubit labelled subspace.
    pub rho: DensityState,
    /// Retained pseudo-pure signal, see the module documentation.
    pub scale: f64,
    pub method: PrepMethod,
    /// Number of separate experiments (more than one for temporal averaging).
    pub experiments: usize,
    /// Individual starting states of a temporal average, in canonical order.
    pub parts: Vec<DensityState>,
    /// Full-register state when `rho` is a subspace.
    pub full: Option<DensityState>,
}

/// Relative equilibrium polarisation for a species label: 1 for ¹H, ¼ for
/// ¹³C and 1 for anything else.
pub fn species_weight(species: &str) -> f64 {
    match species {
        "13C" => 0.25,
        _ => 1.0,
    }
}

/// Equilibrium deviation Σ_k γ_k I_kz with weights from [`species_weight`].
pub fn thermal_state(system: &SpinSystem) -> DensityState {
    let weights: Vec<f64> = system.species().iter().map(|s| species_weight(s)).collect();
    thermal_state_weighted(system.n(), &weights)
}

/// Σ_k w_k I_kz.
pub fn thermal_state_weighted(n: usize, weights: &[f64]) -> DensityState {
    let diag: Vec<f64> = (0..1usize << n)
        .map(|s| (0..n).map(|k| if bit_of(n, s, k) == 0 { 0.5 * weights[k] } else { -0.5 * weights[k] }).sum())
        .collect();
    DensityState::from_matrix_unchecked(CMatrix::from_real_diag(&diag))
}

/// Σ_k I_kz with equal weights.
pub fn equal_polarization(n: usize) -> DensityState {
    thermal_state_weighted(n, &vec![1.0; n])
}

fn require_two(system: &SpinSystem, method: PrepMethod) -> Result<(), PrepError> {
    if system.n() != 2 {
        return Err(PrepError::SpinCount { method, required: String::from("exactly 2"), got: system.n() });
    }
    if system.coupling(0, 1) == 0.0 {
        return Err(PrepError::Uncoupled { method, pair: (0, 1) });
    }
    Ok(())
}

/// ε/2^(m−1) for the best pseudo-pure fit with target |0…0⟩.
fn pseudo_pure_scale(rho: &DensityState) -> f64 {
    let n = rho.n_spins();
    verify_pseudo_pure(rho, 0).epsilon / (1usize << (n - 1)) as f64
}

/// Spatial averaging: 60°S_x, crush, 45°I_x, 1/2J coupling, 45°I_−y, crush.
pub fn cory_program(system: &SpinSystem) -> PulseProgram {
    let keep = crate::pulse::default_keep_zq(system);
    PulseProgram::from_elements(vec![
        PulseElement::pulse(&[1], 60.0, Phase::X),
        PulseElement::crush(keep),
        PulseElement::pulse(&[0], 45.0, Phase::X),
        PulseElement::couple(0, 1, 0.5),
        PulseElement::pulse(&[0], 45.0, Phase::MINUS_Y),
        PulseElement::crush(keep),
    ])
}

/// The Cory spatial-averaging route; gives ½(Iz + Sz + 2IzSz).
pub fn prep_spatial_cory(system: &SpinSystem) -> Result<PrepResult, PrepError> {
    require_two(system, PrepMethod::Cory)?;
    let rho = run_program(system, &cory_program(system), &equal_polarization(2))?;
    Ok(single(rho, PrepMethod::Cory))
}

/// 45°(I_x + S_x), 1/2J coupling, 30°(I_−y + S_−y), crush.
pub fn pravia_program(keep_zq: bool) -> PulseProgram {
    PulseProgram::from_elements(vec![
        PulseElement::pulse(&[0, 1], 45.0, Phase::X),
        PulseElement::couple(0, 1, 0.5),
        PulseElement::pulse(&[0, 1], 30.0, Phase::MINUS_Y),
        PulseElement::crush(keep_zq),
    ])
}

/// The Pravia route; gives √(3/8)(Iz + Sz + 2IzSz) when the crush removes
/// zero-quantum coherence, which is the case in heteronuclear systems only.
pub fn prep_spatial_pravia(system: &SpinSystem) -> Result<PrepResult, PrepError> {
    require_two(system, PrepMethod::Pravia)?;
    if crate::pulse::default_keep_zq(system) {
        return Err(PrepError::ZeroQuantumSurvives);
    }
    let rho = run_program(system, &pravia_program(false), &equal_polarization(2))?;
    Ok(single(rho, PrepMethod::Pravia))
}

fn single(rho: DensityState, method: PrepMethod) -> PrepResult {
    PrepResult { scale: pseudo_pure_scale(&rho), rho, method, experiments: 1, parts: Vec::new(), full: None }
}

/// Circuits realising the three population permutations of the Knill
/// scheme: identity, CNOT(0→1) giving Iz + 2IzSz and CNOT(1→0) giving
/// Sz + 2IzSz.
pub fn knill_circuits() -> [Circuit; 3] {
    [
        Circuit::new(2),
        Circuit { n_qubits: 2, gates: vec![Gate::CNot { control: 0, target: 1 }] },
        Circuit { n_qubits: 2, gates: vec![Gate::CNot { control: 1, target: 0 }] },
    ]
}

/// Temporal averaging over the three Knill permutations.
pub fn prep_temporal_knill(system: &SpinSystem) -> Result<PrepResult, PrepError> {
    prep_temporal_knill_ordered(system, &[0, 1, 2])
}

/// As [`prep_temporal_knill`], running the experiments in the given order.
/// The summation always uses canonical experiment order, so the result does
/// not depend on `order`.
pub fn prep_temporal_knill_ordered(system: &SpinSystem, order: &[usize]) -> Result<PrepResult, PrepError> {
    require_two(system, PrepMethod::Knill)?;
    check_order(order, 3)?;
    let circuits = knill_circuits();
    let start = equal_polarization(2);
    let mut parts: Vec<Option<DensityState>> = vec![None; 3];
    for &i in order {
        let program = compile_circuit(&circuits[i], system)?;
        parts[i] = Some(run_program(system, &program, &start)?);
    }
    Ok(temporal_sum(parts.into_iter().map(|p| p.expect("all experiments run")).collect(), PrepMethod::Knill))
}

fn check_order(order: &[usize], len: usize) -> Result<(), PrepError> {
    let mut seen = vec![false; len];
    for &i in order {
        if i >= len || seen[i] {
            return Err(PrepError::BadOrder(len));
        }
        seen[i] = true;
    }
    if order.len() != len {
        return Err(PrepError::BadOrder(len));
    }
    Ok(())
}

fn temporal_sum(parts: Vec<DensityState>, method: PrepMethod) -> PrepResult {
    let n = parts[0].n_spins();
    let rho = parts.iter().fold(DensityState::zero(n), |acc, p| acc.plus(p));
    PrepResult { scale: pseudo_pure_scale(&rho), rho, method, experiments: parts.len(), parts, full: None }
}

/// Exhaustive averaging over the 2ⁿ−1 cyclic permutations of the excited
/// populations (the ground population stays in place).
pub fn prep_temporal_exhaustive(system: &SpinSystem) -> Result<PrepResult, PrepError> {
    prep_temporal_exhaustive_ordered(system, &(0..(1usize << system.n()) - 1).collect::<Vec<_>>())
}

/// As [`prep_temporal_exhaustive`] with an explicit experiment order.
pub fn prep_temporal_exhaustive_ordered(system: &SpinSystem, order: &[usize]) -> Result<PrepResult, PrepError> {
    let n = system.n();
    let experiments = (1usize << n) - 1;
    if n > 5 {
        return Err(PrepError::TooManyExperiments { n, experiments });
    }
    check_order(order, experiments)?;
    let thermal = equal_polarization(n).populations();
    let mut parts: Vec<Option<DensityState>> = vec![None; experiments];
    for &r in order {
        let mut d = vec![thermal[0]; 1 << n];
        for i in 0..experiments {
            d[1 + i] = thermal[1 + (i + r) % experiments];
        }
        parts[r] = Some(DensityState::from_matrix_unchecked(CMatrix::from_real_diag(&d)));
    }
    Ok(temporal_sum(parts.into_iter().map(|p| p.expect("all experiments run")).collect(), PrepMethod::Exhaustive))
}

/// Circuit for the logical-labeling permutation |001⟩↔|101⟩, |010⟩↔|110⟩:
/// spin 0 is flipped by the parity of spins 1 and 2.
pub fn logical_label_circuit() -> Circuit {
    Circuit { n_qubits: 3, gates: vec![Gate::CNot { control: 1, target: 0 }, Gate::CNot { control: 2, target: 0 }] }
}

/// Logical labeling in a homonuclear three-spin system. The returned `rho`
/// is the two-qubit subspace in which spin 0 is |0⟩; the full state is kept
/// in `full`.
pub fn prep_logical_label(system: &SpinSystem) -> Result<PrepResult, PrepError> {
    if system.n() != 3 {
        return Err(PrepError::SpinCount { method: PrepMethod::LogicalLabel, required: String::from("exactly 3"), got: system.n() });
    }
    if system.is_heteronuclear() {
        return Err(PrepError::Heteronuclear);
    }
    let program = compile_circuit(&logical_label_circuit(), system)?;
    let full = run_program(system, &program, &equal_polarization(3))?;
    let m = full.matrix();
    let sub = CMatrix::from_fn(4, |r, c| m[(r, c)]);
    let rho = DensityState::from_matrix_unchecked(sub);
    Ok(PrepResult { scale: pseudo_pure_scale(&rho), rho, method: PrepMethod::LogicalLabel, experiments: 1, parts: Vec::new(), full: Some(full) })
}

/// Cat-state network: Hadamard on spin 0 then CNOTs down the chain.
pub fn cat_circuit(n: usize) -> Circuit {
    let mut c = Circuit::new(n);
    c.push(Gate::H(0));
    for k in 0..n - 1 {
        c.push(Gate::CNot { control: k, target: k + 1 });
    }
    c
}

fn reversed(circuit: &Circuit) -> Circuit {
    // every gate of the cat network is its own inverse
    Circuit { n_qubits: circuit.n_qubits, gates: circuit.gates.iter().rev().cloned().collect() }
}

/// Cat-state method: network, ±n-quantum filter, reversed network. The
/// result is c·I_z ⊗ |0…0⟩⟨0…0|, an (n−1)-qubit pseudo-pure state labelled by
/// spin 0; the reported scale is c.
pub fn prep_cat_method(system: &SpinSystem) -> Result<PrepResult, PrepError> {
    let n = system.n();
    if n < 2 {
        return Err(PrepError::SpinCount { method: PrepMethod::Cat, required: String::from("at least 2"), got: n });
    }
    let forward = cat_circuit(n);
    let mut program = compile_circuit(&forward, system)?;
    program.push(PulseElement::MQFilter { orders: vec![n as i32, -(n as i32)] });
    program.extend(&compile_circuit(&reversed(&forward), system)?);
    let rho = run_program(system, &program, &equal_polarization(n))?;
    let scale = expand(&rho)?.coefficient(&ProductLabel::single(n, 0, crate::product::Letter::Z)) * (1usize << (n - 1)) as f64;
    Ok(PrepResult { rho, scale, method: PrepMethod::Cat, experiments: 1, parts: Vec::new(), full: None })
}

/// Runs a route by method.
pub fn prepare(system: &SpinSystem, method: PrepMethod) -> Result<PrepResult, PrepError> {
    match method {
        PrepMethod::Cory => prep_spatial_cory(system),
        PrepMethod::Pravia => prep_spatial_pravia(system),
        PrepMethod::Knill => prep_temporal_knill(system),
        PrepMethod::Exhaustive => prep_temporal_exhaustive(system),
        PrepMethod::LogicalLabel => prep_logical_label(system),
        PrepMethod::Cat => prep_cat_method(system),
    }
}

/// Fit of a state to a·1 + ε|t⟩⟨t|.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PseudoPureReport {
    pub offset: f64,
    pub epsilon: f64,
    /// Frobenius norm of what the fit leaves unexplained.
    pub residual: f64,
    pub pass: bool,
}

/// Least-squares fit of `rho` to a·1 + ε|target⟩⟨target|; passes when the
/// residual is at most 1e-8 and ε > 0.
pub fn verify_pseudo_pure(rho: &DensityState, target: usize) -> PseudoPureReport {
    let m = rho.matrix();
    let dim = m.dim();
    let d = rho.populations();
    let offset = if dim > 1 { d.iter().enumerate().filter(|&(s, _)| s != target).map(|(_, &x)| x).sum::<f64>() / (dim - 1) as f64 } else { 0.0 };
    let epsilon = d[target] - offset;
    let mut r2 = 0.0;
    for r in 0..dim {
        for c in 0..dim {
            let z = m[(r, c)];
            r2 += if r == c {
                let fit = if r == target { offset + epsilon } else { offset };
                (z.re - fit).powi(2) + z.im.powi(2)
            } else {
                z.norm_sqr()
            };
        }
    }
    let residual = r2.sqrt();
    PseudoPureReport { offset, epsilon, residual, pass: residual <= 1e-8 && epsilon > 0.0 }
}
