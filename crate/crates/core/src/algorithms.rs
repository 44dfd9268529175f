//! Drivers for Deutsch's algorithm (abstract circuit and NMR pulse
//! realizations), the refined Deutsch–Jozsa algorithm, Grover's search and
//! the classical three-bit repetition code.
//!
//! Measurement is the ensemble expectation: probabilities are read exactly
//! from the final state rather than sampled.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cell::Cell;
use core::fmt;
use core::str::FromStr;

#[allow(unused_imports)] // provides float math (sqrt, sin, ...) without std
use num_traits::Float;
use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::compiler::{circuit_unitary, Circuit, CompileError, Gate, OracleKind};
use crate::prep::{prep_spatial_cory, prep_temporal_knill, PrepError};
use crate::pulse::{run_program, Phase, PulseElement, PulseError, PulseProgram};
use crate::readout::{assign_eigenstates, spectrum, EigenstateAssignment, ReadoutError, Spectrum};
use crate::spin::{DensityState, SpinError, SpinSystem};

/// Threshold on |⟨0…0|ψ⟩|² separating constant from balanced outcomes.
pub const PROMISE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgorithmError {
    #[error("function has {got} input bits, expected {expected}")]
    Arity { expected: usize, got: usize },
    #[error("truth table has {got} entries, expected {expected}")]
    TableLength { expected: usize, got: usize },
    #[error("bad truth table character {0:?}; use 0 and 1")]
    TableChar(char),
    #[error("function is neither constant nor balanced: probability of |0…0⟩ is {0}")]
    PromiseViolation(f64),
    #[error("search needs at least one marked item")]
    NoMarked,
    #[error("every item is marked; nothing to search for")]
    AllMarked,
    #[error("marked item {item} out of range for {n} qubits")]
    MarkedRange { item: usize, n: usize },
    #[error("number of qubits must be between 1 and {max}, got {got}")]
    QubitCount { max: usize, got: usize },
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Pulse(#[from] PulseError),
    #[error(transparent)]
    Prep(#[from] PrepError),
    #[error(transparent)]
    Readout(#[from] ReadoutError),
    #[error(transparent)]
    Spin(#[from] SpinError),
}

/// Largest register handled by the state-vector drivers.
pub const MAX_SEARCH_QUBITS: usize = 20;

/// A function from n bits to one bit, given by its truth table
/// (entry x is f(x)).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryFunction {
    n_in: usize,
    table: Vec<bool>,
}

impl BinaryFunction {
    pub fn new(n_in: usize, table: Vec<bool>) -> Result<Self, AlgorithmError> {
        if n_in > MAX_SEARCH_QUBITS {
            return Err(AlgorithmError::QubitCount { max: MAX_SEARCH_QUBITS, got: n_in });
        }
        if table.len() != 1 << n_in {
            return Err(AlgorithmError::TableLength { expected: 1 << n_in, got: table.len() });
        }
        Ok(Self { n_in, table })
    }

    /// The one-bit function f_ab with f(0) = a and f(1) = b.
    pub fn one_bit(a: bool, b: bool) -> Self {
        Self { n_in: 1, table: vec![a, b] }
    }

    pub fn constant(n_in: usize, value: bool) -> Result<Self, AlgorithmError> {
        Self::new(n_in, vec![value; 1 << n_in])
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn table(&self) -> &[bool] {
        &self.table
    }

    pub fn eval(&self, x: usize) -> bool {
        self.table[x]
    }

    pub fn ones(&self) -> usize {
        self.table.iter().filter(|&&b| b).count()
    }
}

impl FromStr for BinaryFunction {
    type Err = AlgorithmError;

    /// Parses a truth table such as `0110`; the length must be a power of two.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let table = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(AlgorithmError::TableChar(other)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let n_in = table.len().max(1).trailing_zeros() as usize;
        Self::new(n_in, table)
    }
}

impl fmt::Display for BinaryFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.table {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FunctionClass {
    Constant,
    Balanced,
    Neither,
}

impl fmt::Display for FunctionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FunctionClass::Constant => "constant",
            FunctionClass::Balanced => "balanced",
            FunctionClass::Neither => "neither",
        })
    }
}

/// Classical classification by counting ones.
pub fn classify_function(f: &BinaryFunction) -> FunctionClass {
    let ones = f.ones();
    let len = f.table.len();
    if ones == 0 || ones == len {
        FunctionClass::Constant
    } else if 2 * ones == len {
        FunctionClass::Balanced
    } else {
        FunctionClass::Neither
    }
}

/// Number of balanced functions of n input bits, C(2ⁿ, 2ⁿ⁻¹); `None` if it
/// does not fit in 128 bits.
pub fn count_balanced(n: usize) -> Option<u128> {
    if n == 0 {
        return Some(0);
    }
    let total = 1u128.checked_shl(n as u32)?;
    let half = total / 2;
    let mut c: u128 = 1;
    for i in 1..=half {
        // c·(total−half+i) is divisible by i after multiplying
        let g = gcd(c, i);
        let (c_red, i_red) = (c / g, i / g);
        let num = (total - half + i) / i_red;
        c = c_red.checked_mul(num)?;
    }
    Some(c)
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// How Deutsch's algorithm is run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeutschRealization {
    /// The textbook circuit on a state vector.
    Circuit,
    /// Homonuclear pulse sequences on cytosine from a spatially averaged
    /// pseudo-pure state.
    Cytosine,
    /// Heteronuclear pulse sequences on chloroform from a temporally averaged
    /// pseudo-pure state.
    Chloroform,
}

impl DeutschRealization {
    pub const ALL: [DeutschRealization; 3] = [DeutschRealization::Circuit, DeutschRealization::Cytosine, DeutschRealization::Chloroform];

    pub fn name(self) -> &'static str {
        match self {
            DeutschRealization::Circuit => "circuit",
            DeutschRealization::Cytosine => "cytosine",
            DeutschRealization::Chloroform => "chloroform",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.name() == s)
    }
}

/// Result of one run of Deutsch's algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct DeutschOutcome {
    /// f(0) ⊕ f(1).
    pub parity: u8,
    /// Final spectrum (NMR realizations only).
    pub spectrum: Option<Spectrum>,
    /// Reference spectrum of the pseudo-pure ground state.
    pub reference: Option<Spectrum>,
    /// Bits read from the spectrum: input qubit, then ancilla.
    pub assignment: Option<EigenstateAssignment>,
}

fn require_one_bit(f: &BinaryFunction) -> Result<(), AlgorithmError> {
    if f.n_in != 1 {
        return Err(AlgorithmError::Arity { expected: 1, got: f.n_in });
    }
    Ok(())
}

/// The f-controlled-NOT |x⟩|y⟩ → |x⟩|y ⊕ f(x)⟩ as a gate.
pub fn bit_flip_oracle(f: &BinaryFunction) -> Gate {
    Gate::Oracle { label: alloc::format!("U_{f}"), qubits: (0..=f.n_in).collect(), kind: OracleKind::BitFlip(f.table.clone()) }
}

/// Deutsch's circuit: |0⟩|1⟩, Hadamards, U_f, Hadamards, measure qubit 0.
pub fn deutsch_circuit(f: &BinaryFunction) -> Result<Circuit, AlgorithmError> {
    require_one_bit(f)?;
    Ok(Circuit::with_gates(2, vec![Gate::Not(1), Gate::H(0), Gate::H(1), bit_flip_oracle(f), Gate::H(0), Gate::H(1)])?)
}

/// Pulse program for the propagator U_f of a one-bit function, in the form
/// used on cytosine: nothing for f_00, a 180°x on the ancilla for f_11, and
/// for the balanced functions
/// 90S_y − 1/4J − 180_x − 1/4J − 180_x 90I_y 90I_x 90_−y 90S_±x,
/// where the final phase is +x for f_01 (controlled-NOT) and −x for f_10
/// (controlled-NOT acting when the control is |0⟩). Spin 0 is the input
/// qubit, spin 1 the ancilla.
pub fn deutsch_oracle_program(f: &BinaryFunction, system: &SpinSystem) -> Result<PulseProgram, AlgorithmError> {
    require_one_bit(f)?;
    let j = system.coupling(0, 1);
    if j == 0.0 {
        return Err(CompileError::Uncoupled(0, 1).into());
    }
    let tau = 1.0 / (4.0 * j.abs());
    let both = [0, 1];
    let mut p = PulseProgram::new();
    match (f.eval(0), f.eval(1)) {
        (false, false) => {}
        (true, true) => {
            p.push(PulseElement::pulse(&[1], 180.0, Phase::X));
        }
        (a, _) => {
            let last = if a { Phase::MINUS_X } else { Phase::X };
            p.push(PulseElement::pulse(&[1], 90.0, Phase::Y))
                .push(PulseElement::delay(tau))
                .push(PulseElement::pulse(&both, 180.0, Phase::X))
                .push(PulseElement::delay(tau))
                .push(PulseElement::pulse(&both, 180.0, Phase::X))
                .push(PulseElement::pulse(&[0], 90.0, Phase::Y))
                .push(PulseElement::pulse(&[0], 90.0, Phase::X))
                .push(PulseElement::pulse(&both, 90.0, Phase::MINUS_Y))
                .push(PulseElement::pulse(&[1], 90.0, last));
        }
    }
    Ok(p)
}

/// The NMR form of Deutsch's algorithm: 180°x on the ancilla, 90°y on both
/// spins, then U_f. The closing 90°−y pulses of the circuit would be undone
/// by the 90°y read pulses, so both are left out and the spectrum is taken
/// directly.
pub fn deutsch_nmr_program(f: &BinaryFunction, system: &SpinSystem) -> Result<PulseProgram, AlgorithmError> {
    let mut p = PulseProgram::new();
    p.push(PulseElement::pulse(&[1], 180.0, Phase::X)).push(PulseElement::pulse(&[0, 1], 90.0, Phase::Y));
    p.extend(&deutsch_oracle_program(f, system)?);
    Ok(p)
}

fn nmr_spectra(system: &SpinSystem, parts: &[DensityState], program: &PulseProgram) -> Result<(Spectrum, Spectrum), AlgorithmError> {
    let read = PulseProgram::from_elements(vec![PulseElement::pulse(&[0, 1], 90.0, Phase::Y)]);
    let mut out = Spectrum::empty(2);
    let mut reference = Spectrum::empty(2);
    for rho in parts {
        out = out.plus(&spectrum(&run_program(system, program, rho)?, system, &[0, 1])?);
        reference = reference.plus(&spectrum(&run_program(system, &read, rho)?, system, &[0, 1])?);
    }
    Ok((out, reference))
}

/// Runs Deutsch's algorithm and returns f(0) ⊕ f(1).
pub fn deutsch(f: &BinaryFunction, realization: DeutschRealization) -> Result<DeutschOutcome, AlgorithmError> {
    require_one_bit(f)?;
    let (system, parts) = match realization {
        DeutschRealization::Circuit => {
            let u = circuit_unitary(&deutsch_circuit(f)?)?;
            let psi = u.apply(&basis_vector(4, 0));
            let p1 = psi[2].norm_sqr() + psi[3].norm_sqr();
            return Ok(DeutschOutcome { parity: u8::from(p1 > 0.5), spectrum: None, reference: None, assignment: None });
        }
        DeutschRealization::Cytosine => {
            let s = SpinSystem::cytosine();
            let rho = prep_spatial_cory(&s)?.rho;
            (s, vec![rho])
        }
        DeutschRealization::Chloroform => {
            let s = SpinSystem::chloroform();
            let parts = prep_temporal_knill(&s)?.parts;
            (s, parts)
        }
    };
    let program = deutsch_nmr_program(f, &system)?;
    let (out, reference) = nmr_spectra(&system, &parts, &program)?;
    let assignment = assign_eigenstates(&out, &reference)?;
    let parity = assignment.bit(0).ok_or(ReadoutError::Indeterminate(0))?;
    Ok(DeutschOutcome { parity, spectrum: Some(out), reference: Some(reference), assignment: Some(assignment) })
}

fn basis_vector(dim: usize, k: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); dim];
    v[k] = C64::new(1.0, 0.0);
    v
}

/// In-place Hadamard on every qubit of a state vector.
fn hadamard_all(psi: &mut [C64]) {
    let n = psi.len();
    let mut h = 1;
    while h < n {
        for i in (0..n).step_by(2 * h) {
            for j in i..i + h {
                let (a, b) = (psi[j], psi[j + h]);
                psi[j] = a + b;
                psi[j + h] = a - b;
            }
        }
        h *= 2;
    }
    let norm = 1.0 / (n as f64).sqrt();
    psi.iter_mut().for_each(|a| *a *= norm);
}

/// Phase oracle |x⟩ → (−1)^{f(x)}|x⟩ that counts how often it is applied.
#[derive(Debug)]
pub struct PhaseOracle<'a> {
    f: &'a BinaryFunction,
    calls: Cell<usize>,
}

impl<'a> PhaseOracle<'a> {
    pub fn new(f: &'a BinaryFunction) -> Self {
        Self { f, calls: Cell::new(0) }
    }

    pub fn apply(&self, psi: &mut [C64]) {
        self.calls.set(self.calls.get() + 1);
        for (x, a) in psi.iter_mut().enumerate() {
            if self.f.eval(x) {
                *a = -*a;
            }
        }
    }

    pub fn calls(&self) -> usize {
        self.calls.get()
    }
}

/// Outcome of the refined Deutsch–Jozsa algorithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeutschJozsaOutcome {
    pub class: FunctionClass,
    /// Probability of finding the register in |0…0⟩.
    pub zero_probability: f64,
    pub oracle_calls: usize,
}

/// The refined Deutsch–Jozsa algorithm: Hadamards, the phase oracle applied
/// once to the input register (no ancilla), Hadamards. All amplitude returns
/// to |0…0⟩ for a constant function and none does for a balanced one.
pub fn deutsch_jozsa_refined(f: &BinaryFunction) -> Result<DeutschJozsaOutcome, AlgorithmError> {
    let oracle = PhaseOracle::new(f);
    let mut psi = basis_vector(1 << f.n_in, 0);
    hadamard_all(&mut psi);
    oracle.apply(&mut psi);
    hadamard_all(&mut psi);
    let p0 = psi[0].norm_sqr();
    let class = if p0 > 1.0 - PROMISE_TOL {
        FunctionClass::Constant
    } else if p0 < PROMISE_TOL {
        FunctionClass::Balanced
    } else {
        return Err(AlgorithmError::PromiseViolation(p0));
    };
    Ok(DeutschJozsaOutcome { class, zero_probability: p0, oracle_calls: oracle.calls() })
}

/// Number of Grover iterations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Iterations {
    Auto,
    Count(usize),
}

/// A search problem: n qubits with the listed basis states marked.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroverSpec {
    pub n: usize,
    pub marked: BTreeSet<usize>,
    pub iterations: Iterations,
}

impl GroverSpec {
    pub fn new(n: usize, marked: &[usize], iterations: Iterations) -> Result<Self, AlgorithmError> {
        let spec = Self { n, marked: marked.iter().copied().collect(), iterations };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), AlgorithmError> {
        if self.n == 0 || self.n > MAX_SEARCH_QUBITS {
            return Err(AlgorithmError::QubitCount { max: MAX_SEARCH_QUBITS, got: self.n });
        }
        let size = 1usize << self.n;
        if let Some(&item) = self.marked.iter().find(|&&m| m >= size) {
            return Err(AlgorithmError::MarkedRange { item, n: self.n });
        }
        if self.marked.is_empty() {
            return Err(AlgorithmError::NoMarked);
        }
        if self.marked.len() == size {
            return Err(AlgorithmError::AllMarked);
        }
        Ok(())
    }

    /// Iteration count actually used.
    pub fn resolved_iterations(&self) -> usize {
        match self.iterations {
            Iterations::Count(c) => c,
            Iterations::Auto => optimal_iterations(self.n, self.marked.len()),
        }
    }
}

/// Iteration count that brings the marked probability closest to one:
/// each iteration rotates by 2θ with sin θ = √(k/N), starting at θ, so the
/// best count is round(π/(4θ) − ½). The resulting marked probability is at
/// least cos²θ = 1 − k/N.
pub fn optimal_iterations(n: usize, k: usize) -> usize {
    let theta = ((k as f64) / (1u64 << n) as f64).sqrt().asin();
    let j = core::f64::consts::PI / (4.0 * theta) - 0.5;
    j.round().max(0.0) as usize
}

/// Final measurement distribution of a search.
#[derive(Debug, Clone, PartialEq)]
pub struct GroverReport {
    pub iterations: usize,
    pub probabilities: Vec<f64>,
    /// Most probable basis state.
    pub best: usize,
    /// Total probability on marked states.
    pub marked_probability: f64,
}

fn grover_step(psi: &mut [C64], marked: &BTreeSet<usize>) {
    for &m in marked {
        psi[m] = -psi[m];
    }
    hadamard_all(psi);
    psi[0] = -psi[0];
    hadamard_all(psi);
}

fn uniform_state(n: usize) -> Vec<C64> {
    let mut psi = basis_vector(1 << n, 0);
    hadamard_all(&mut psi);
    psi
}

fn marked_mass(psi: &[C64], marked: &BTreeSet<usize>) -> f64 {
    marked.iter().map(|&m| psi[m].norm_sqr()).sum()
}

/// Grover's search: a Hadamard layer, then per iteration the phase oracle
/// followed by Hadamards, negation of |0…0⟩ and Hadamards.
pub fn grover(spec: &GroverSpec) -> Result<GroverReport, AlgorithmError> {
    spec.validate()?;
    let iterations = spec.resolved_iterations();
    let mut psi = uniform_state(spec.n);
    for _ in 0..iterations {
        grover_step(&mut psi, &spec.marked);
    }
    let probabilities: Vec<f64> = psi.iter().map(|a| a.norm_sqr()).collect();
    let best = probabilities
        .iter()
        .enumerate()
        .fold((0, f64::MIN), |acc, (i, &p)| if p > acc.1 + 1e-12 { (i, p) } else { acc })
        .0;
    Ok(GroverReport { iterations, marked_probability: marked_mass(&psi, &spec.marked), probabilities, best })
}

/// Marked probability after 0, 1, …, `max_iterations` iterations.
pub fn grover_amplitude_trace(spec: &GroverSpec, max_iterations: usize) -> Result<Vec<(usize, f64)>, AlgorithmError> {
    spec.validate()?;
    let mut psi = uniform_state(spec.n);
    let mut out = vec![(0, marked_mass(&psi, &spec.marked))];
    for i in 1..=max_iterations {
        grover_step(&mut psi, &spec.marked);
        out.push((i, marked_mass(&psi, &spec.marked)));
    }
    Ok(out)
}

/// The combined oracle-plus-inversion propagator U_ab used on chloroform:
/// 1/2J − 90_−y 90S_±x 90I_±x − 1/2J − 90_−y 90_−x (pulses without a spin
/// label act on both). `i_plus` and `s_plus` choose the phases of the
/// selective pulses on spin 0 (I) and spin 1 (S).
pub fn chloroform_grover_program(system: &SpinSystem, i_plus: bool, s_plus: bool) -> Result<PulseProgram, AlgorithmError> {
    let j = system.coupling(0, 1);
    if j == 0.0 {
        return Err(CompileError::Uncoupled(0, 1).into());
    }
    let half = 1.0 / (2.0 * j.abs());
    let sign = |plus: bool| if plus { Phase::X } else { Phase::MINUS_X };
    Ok(PulseProgram::from_elements(vec![
        PulseElement::delay(half),
        PulseElement::pulse(&[0, 1], 90.0, Phase::MINUS_Y),
        PulseElement::pulse(&[1], 90.0, sign(s_plus)),
        PulseElement::pulse(&[0], 90.0, sign(i_plus)),
        PulseElement::delay(half),
        PulseElement::pulse(&[0, 1], 90.0, Phase::MINUS_Y),
        PulseElement::pulse(&[0, 1], 90.0, Phase::MINUS_X),
    ]))
}

/// Basis state found by [`chloroform_grover_program`] for a choice of
/// phases. The selective pulses sit between the two coupling periods, so a
/// −x pulse on S sets the bit of I and vice versa: (+,+) finds |00⟩,
/// (+,−) finds |10⟩, (−,+) finds |01⟩ and (−,−) finds |11⟩.
pub fn chloroform_grover_marked(i_plus: bool, s_plus: bool) -> usize {
    (usize::from(!s_plus) << 1) | usize::from(!i_plus)
}

/// Two-qubit Grover circuit with one iteration for a marked state:
/// H, oracle, H, negate |00⟩, H.
pub fn grover_circuit(marked: usize) -> Result<Circuit, AlgorithmError> {
    let phase = |m: usize| Gate::Oracle {
        label: alloc::format!("f{m:02b}"),
        qubits: vec![0, 1],
        kind: OracleKind::Phase((0..4).map(|x| x == m).collect()),
    };
    Ok(Circuit::with_gates(
        2,
        vec![Gate::H(0), Gate::H(1), phase(marked), Gate::H(0), Gate::H(1), phase(0), Gate::H(0), Gate::H(1)],
    )?)
}

/// Outcome of the three-bit repetition code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TripletOutcome {
    /// Received word, bit k of the code word in bit k.
    pub received: u8,
    pub decoded: u8,
    /// Number of bits flipped in transit.
    pub errors: u32,
    /// An error occurred and majority voting undid it.
    pub corrected: bool,
}

/// Encodes `bit` as three copies, flips the bits set in `error_mask` and
/// decodes by majority vote.
pub fn triplet_code(bit: u8, error_mask: u8) -> TripletOutcome {
    let bit = bit & 1;
    let mask = error_mask & 0b111;
    let word = if bit == 1 { 0b111 } else { 0 };
    let received = word ^ mask;
    let decoded = u8::from(received.count_ones() >= 2);
    let errors = mask.count_ones();
    TripletOutcome { received, decoded, errors, corrected: errors > 0 && decoded == bit }
}

/// Short human-readable summary of a truth table's class, e.g. for CLI output.
pub fn describe_function(f: &BinaryFunction) -> String {
    alloc::format!("{f}: {}", classify_function(f))
}
