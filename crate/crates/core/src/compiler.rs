//! Quantum gates and their compilation into pulse programs.
//!
//! Compilation keeps an abstract reference frame per spin. A z rotation is
//! never emitted as a pulse; it only advances the frame, and later pulses are
//! emitted with their phases shifted back by the accumulated frame angle.
//! With F the product of frame rotations exp(−iα_k I_kz) and P the propagator
//! of the emitted pulses, the compiler maintains U_ideal ∝ F·P, and
//! [`compile_circuit`] appends F as explicit `FrameShift` elements.
//!
//! Two-qubit gates are built from the controlled phase gate, which is a
//! coupling period of 1/2J plus frame rotations. Larger diagonal gates are
//! synthesised from their Walsh expansion.

use alloc::collections::VecDeque;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // provides float math (sqrt, sin, ...) without std
use num_traits::Float;
use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::linalg::CMatrix;
use crate::pulse::{program_propagator, rotation_2x2, wrap_degrees, Phase, PulseElement, PulseError, PulseProgram};
use crate::spin::{bit_of, global_phase_distance, stride_of, Propagator, SpinError, SpinSystem, PROPAGATOR_TOL};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompileError {
    #[error("qubit {index} out of range for {n} qubits")]
    QubitIndex { index: usize, n: usize },
    #[error("gate uses qubit {0} more than once")]
    RepeatedQubit(usize),
    #[error("qubits {0} and {1} are not coupled; insert SWAP gates along a coupling path")]
    Uncoupled(usize, usize),
    #[error("non-finite gate parameter")]
    NotFinite,
    #[error("oracle {label:?} has a table of length {got}, expected {expected}")]
    OracleTable { label: String, got: usize, expected: usize },
    #[error("oracle {0:?} needs at least one qubit")]
    EmptyOracle(String),
    #[error("circuit has {circuit} qubits but the system has {system} spins")]
    SizeMismatch { circuit: usize, system: usize },
    #[error("no coupling path between qubits {0} and {1}")]
    NoPath(usize, usize),
    #[error(transparent)]
    Pulse(#[from] PulseError),
    #[error(transparent)]
    Spin(#[from] SpinError),
}

/// Kind of an oracle gate and its truth table (most significant input
/// first).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleKind {
    /// |x⟩ → (−1)^{f(x)}|x⟩ over all listed qubits.
    Phase(Vec<bool>),
    /// |x⟩|y⟩ → |x⟩|y ⊕ f(x)⟩; the last listed qubit is the target.
    BitFlip(Vec<bool>),
}

/// An abstract gate on qubit indices.
#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    H(usize),
    /// 90° y rotation.
    PseudoH(usize),
    /// 90° −y rotation.
    PseudoHInv(usize),
    Not(usize),
    CNot { control: usize, target: usize },
    /// diag(1, 1, 1, e^{iφ}) on (q1, q2); φ in radians.
    ControlledPhase { q1: usize, q2: usize, phi: f64 },
    Toffoli { c1: usize, c2: usize, target: usize },
    Swap(usize, usize),
    Oracle { label: String, qubits: Vec<usize>, kind: OracleKind },
    /// Rotation exp(−iθ I_φ) of one qubit, with the pulse phase convention.
    Rotate { qubit: usize, angle_deg: f64, phase: Phase },
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::H(q) | Gate::PseudoH(q) | Gate::PseudoHInv(q) | Gate::Not(q) => vec![*q],
            Gate::Rotate { qubit, .. } => vec![*qubit],
            Gate::CNot { control, target } => vec![*control, *target],
            Gate::ControlledPhase { q1, q2, .. } => vec![*q1, *q2],
            Gate::Toffoli { c1, c2, target } => vec![*c1, *c2, *target],
            Gate::Swap(a, b) => vec![*a, *b],
            Gate::Oracle { qubits, .. } => qubits.clone(),
        }
    }

    pub fn validate(&self, n: usize) -> Result<(), CompileError> {
        let qs = self.qubits();
        for (i, &q) in qs.iter().enumerate() {
            if q >= n {
                return Err(CompileError::QubitIndex { index: q, n });
            }
            if qs[..i].contains(&q) {
                return Err(CompileError::RepeatedQubit(q));
            }
        }
        match self {
            Gate::ControlledPhase { phi, .. } if !phi.is_finite() => Err(CompileError::NotFinite),
            Gate::Rotate { angle_deg, phase, .. } => {
                let phase_ok = match phase {
                    Phase::Angle(a) => a.is_finite(),
                    Phase::Z => true,
                };
                if angle_deg.is_finite() && phase_ok {
                    Ok(())
                } else {
                    Err(CompileError::NotFinite)
                }
            }
            Gate::Oracle { label, qubits, kind } => {
                if qubits.is_empty() {
                    return Err(CompileError::EmptyOracle(label.clone()));
                }
                let (got, expected) = match kind {
                    OracleKind::Phase(t) => (t.len(), 1 << qubits.len()),
                    OracleKind::BitFlip(t) => (t.len(), 1 << (qubits.len() - 1)),
                };
                if got != expected || (matches!(kind, OracleKind::BitFlip(_)) && qubits.len() < 2) {
                    return Err(CompileError::OracleTable { label: label.clone(), got, expected });
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// An ordered list of gates on `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self { n_qubits, gates: Vec::new() }
    }

    pub fn with_gates(n_qubits: usize, gates: Vec<Gate>) -> Result<Self, CompileError> {
        let c = Self { n_qubits, gates };
        c.validate()?;
        Ok(c)
    }

    pub fn push(&mut self, g: Gate) -> &mut Self {
        self.gates.push(g);
        self
    }

    pub fn validate(&self) -> Result<(), CompileError> {
        self.gates.iter().try_for_each(|g| g.validate(self.n_qubits))
    }
}

/// Accumulated z rotation of each spin's reference frame, in degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameState {
    phases: Vec<f64>,
}

impl FrameState {
    pub fn new(n: usize) -> Self {
        Self { phases: vec![0.0; n] }
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn phase(&self, k: usize) -> f64 {
        self.phases[k]
    }

    /// Advances spin `k`'s frame by `deg`, keeping the result in [0, 360).
    pub fn advance(&mut self, k: usize, deg: f64) {
        self.phases[k] = wrap_degrees(self.phases[k] + deg);
    }

    /// Frame shift elements realising the accumulated frames.
    pub fn terminal_elements(&self) -> Vec<PulseElement> {
        self.phases
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != 0.0)
            .map(|(k, &p)| PulseElement::frame(k, p))
            .collect()
    }
}

fn check_system(n_qubits: usize, system: &SpinSystem) -> Result<(), CompileError> {
    if n_qubits != system.n() {
        return Err(CompileError::SizeMismatch { circuit: n_qubits, system: system.n() });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Ideal unitaries

fn local(n: usize, k: usize, u: &[[C64; 2]; 2]) -> CMatrix {
    let mut m = CMatrix::identity(1 << n);
    m.left_apply_local(stride_of(n, k), u);
    m
}

fn permutation(n: usize, f: impl Fn(usize) -> usize) -> CMatrix {
    let dim = 1 << n;
    let mut m = CMatrix::zeros(dim);
    for s in 0..dim {
        m[(f(s), s)] = C64::new(1.0, 0.0);
    }
    m
}

/// Index of the sub-register formed by `qubits` (first qubit most
/// significant) within basis state `s`.
fn sub_index(n: usize, s: usize, qubits: &[usize]) -> usize {
    qubits.iter().fold(0, |acc, &q| (acc << 1) | bit_of(n, s, q))
}

/// Exact matrix of a gate on the full 2ⁿ-dimensional space.
pub fn ideal_unitary(gate: &Gate, n: usize) -> Result<Propagator, CompileError> {
    gate.validate(n)?;
    let r = core::f64::consts::FRAC_1_SQRT_2;
    let re = |x: f64| C64::new(x, 0.0);
    let flip = |s: usize, q: usize| s ^ (1 << (n - 1 - q));
    let m = match gate {
        Gate::H(q) => local(n, *q, &[[re(r), re(r)], [re(r), re(-r)]]),
        Gate::PseudoH(q) => local(n, *q, &rotation_2x2(PI / 2.0, Phase::Y)),
        Gate::PseudoHInv(q) => local(n, *q, &rotation_2x2(PI / 2.0, Phase::MINUS_Y)),
        Gate::Not(q) => local(n, *q, &[[re(0.0), re(1.0)], [re(1.0), re(0.0)]]),
        Gate::Rotate { qubit, angle_deg, phase } => local(n, *qubit, &rotation_2x2(angle_deg.to_radians(), *phase)),
        Gate::CNot { control, target } => {
            permutation(n, |s| if bit_of(n, s, *control) == 1 { flip(s, *target) } else { s })
        }
        Gate::Toffoli { c1, c2, target } => permutation(n, |s| {
            if bit_of(n, s, *c1) == 1 && bit_of(n, s, *c2) == 1 {
                flip(s, *target)
            } else {
                s
            }
        }),
        Gate::Swap(a, b) => permutation(n, |s| {
            if bit_of(n, s, *a) != bit_of(n, s, *b) {
                flip(flip(s, *a), *b)
            } else {
                s
            }
        }),
        Gate::ControlledPhase { q1, q2, phi } => CMatrix::from_diag(
            &(0..1 << n)
                .map(|s| if bit_of(n, s, *q1) == 1 && bit_of(n, s, *q2) == 1 { C64::from_polar(1.0, *phi) } else { re(1.0) })
                .collect::<Vec<_>>(),
        ),
        Gate::Oracle { qubits, kind: OracleKind::Phase(table), .. } => CMatrix::from_diag(
            &(0..1 << n)
                .map(|s| if table[sub_index(n, s, qubits)] { re(-1.0) } else { re(1.0) })
                .collect::<Vec<_>>(),
        ),
        Gate::Oracle { qubits, kind: OracleKind::BitFlip(table), .. } => {
            let (inputs, target) = qubits.split_at(qubits.len() - 1);
            permutation(n, |s| if table[sub_index(n, s, inputs)] { flip(s, target[0]) } else { s })
        }
    };
    Ok(Propagator::from_matrix_unchecked(m))
}

/// Product of the ideal unitaries of a circuit (first gate applied first).
pub fn circuit_unitary(circuit: &Circuit) -> Result<Propagator, CompileError> {
    let mut u = Propagator::identity(circuit.n_qubits);
    for g in &circuit.gates {
        u = u.then(&ideal_unitary(g, circuit.n_qubits)?);
    }
    Ok(u)
}

// ---------------------------------------------------------------------------
// Compilation

struct Emitter<'a> {
    system: &'a SpinSystem,
    frame: FrameState,
    program: PulseProgram,
}

impl<'a> Emitter<'a> {
    /// A pulse as seen in the current frames: the emitted phase is the
    /// requested phase minus each target's frame angle.
    fn pulse(&mut self, targets: &[usize], angle_deg: f64, phase_deg: f64) {
        let mut groups: Vec<(f64, Vec<usize>)> = Vec::new();
        for &k in targets {
            let p = wrap_degrees(phase_deg - self.frame.phase(k));
            match groups.iter_mut().find(|(q, _)| *q == p) {
                Some((_, ts)) => ts.push(k),
                None => groups.push((p, vec![k])),
            }
        }
        for (p, ts) in groups {
            self.program.push(PulseElement::pulse(&ts, angle_deg, Phase::Angle(p)));
        }
    }

    fn zrot(&mut self, k: usize, deg: f64) {
        self.frame.advance(k, deg);
    }

    /// exp(−iθ·2I_zS_z) as a coupling period, with whole half-turns moved
    /// into the frames.
    fn zz(&mut self, i: usize, j: usize, theta: f64) -> Result<(), CompileError> {
        let jhz = self.system.coupling(i, j);
        if jhz == 0.0 {
            return Err(CompileError::Uncoupled(i.min(j), i.max(j)));
        }
        let mut f = (theta / (PI * jhz.signum())).rem_euclid(2.0);
        if f >= 1.0 - 1e-12 {
            // exp(−iπ·2IzSz) ∝ exp(−iπIz)·exp(−iπSz)
            f -= 1.0;
            self.zrot(i, 180.0);
            self.zrot(j, 180.0);
        }
        if f > 1e-12 && f < 1.0 - 1e-12 {
            self.program.push(PulseElement::couple(i.min(j), i.max(j), f));
        }
        Ok(())
    }

    /// diag(e^{iθ(x)}) over the register `qubits` (first qubit most
    /// significant), from its Walsh expansion θ(x) = Σ_S a_S (−1)^{x·S}.
    fn diagonal(&mut self, qubits: &[usize], theta: &[f64]) -> Result<(), CompileError> {
        let m = qubits.len();
        let size = 1usize << m;
        for mask in 1..size {
            let a: f64 = theta
                .iter()
                .enumerate()
                .map(|(x, &t)| if (x & mask).count_ones() % 2 == 0 { t } else { -t })
                .sum::<f64>()
                / size as f64;
            if a.abs() < 1e-14 {
                continue;
            }
            let set: Vec<usize> = (0..m).filter(|&i| mask & (1 << (m - 1 - i)) != 0).map(|i| qubits[i]).collect();
            // exp(i·a·Z_S): Z = 2I_z, so one qubit gives a z rotation by −2a
            // and two give exp(−i(−2a)·2IzSz).
            match set.len() {
                1 => self.zrot(set[0], (-2.0 * a).to_degrees()),
                2 => self.zz(set[0], set[1], -2.0 * a)?,
                _ => {
                    // accumulate the parity of the leading qubits onto the
                    // second-to-last one, couple it with the last, then undo
                    let k = set.len();
                    for w in set[..k - 1].windows(2) {
                        self.cnot(w[0], w[1])?;
                    }
                    self.zz(set[k - 2], set[k - 1], -2.0 * a)?;
                    for w in set[..k - 1].windows(2).rev() {
                        self.cnot(w[0], w[1])?;
                    }
                }
            }
        }
        Ok(())
    }

    fn cphase(&mut self, a: usize, b: usize, phi: f64) -> Result<(), CompileError> {
        self.diagonal(&[a, b], &[0.0, 0.0, 0.0, phi])
    }

    /// Controlled-NOT from inverse pseudo-Hadamard, controlled π phase and
    /// pseudo-Hadamard on the target.
    fn cnot(&mut self, c: usize, t: usize) -> Result<(), CompileError> {
        self.controlled_x_power(c, t, PI)
    }

    /// Controlled e^{iφ/2}·exp(−iφ/2·X): φ = π gives CNOT, φ = ±π/2 the
    /// controlled square root of NOT and its inverse.
    fn controlled_x_power(&mut self, c: usize, t: usize, phi: f64) -> Result<(), CompileError> {
        self.pulse(&[t], 90.0, 270.0);
        self.cphase(c, t, phi)?;
        self.pulse(&[t], 90.0, 90.0);
        Ok(())
    }

    fn gate(&mut self, gate: &Gate) -> Result<(), CompileError> {
        match gate {
            Gate::H(q) => {
                self.pulse(&[*q], 90.0, 90.0);
                self.pulse(&[*q], 180.0, 0.0);
            }
            Gate::PseudoH(q) => self.pulse(&[*q], 90.0, 90.0),
            Gate::PseudoHInv(q) => self.pulse(&[*q], 90.0, 270.0),
            Gate::Not(q) => self.pulse(&[*q], 180.0, 0.0),
            Gate::Rotate { qubit, angle_deg, phase } => match phase {
                Phase::Z => self.zrot(*qubit, *angle_deg),
                Phase::Angle(p) => self.pulse(&[*qubit], *angle_deg, *p),
            },
            Gate::CNot { control, target } => self.cnot(*control, *target)?,
            Gate::ControlledPhase { q1, q2, phi } => self.cphase(*q1, *q2, *phi)?,
            Gate::Toffoli { c1, c2, target } => {
                self.controlled_x_power(*c2, *target, PI / 2.0)?;
                self.cnot(*c1, *c2)?;
                self.controlled_x_power(*c2, *target, -PI / 2.0)?;
                self.cnot(*c1, *c2)?;
                self.controlled_x_power(*c1, *target, PI / 2.0)?;
            }
            Gate::Swap(a, b) => {
                self.cnot(*a, *b)?;
                self.cnot(*b, *a)?;
                self.cnot(*a, *b)?;
            }
            Gate::Oracle { qubits, kind: OracleKind::Phase(table), .. } => {
                let theta: Vec<f64> = table.iter().map(|&f| if f { PI } else { 0.0 }).collect();
                self.diagonal(qubits, &theta)?;
            }
            Gate::Oracle { qubits, kind: OracleKind::BitFlip(table), .. } => {
                // X on the target is h·Z·h⁻¹, so the oracle is a diagonal
                // (−1)^{f(x)·y} between pseudo-Hadamards.
                let t = qubits[qubits.len() - 1];
                let theta: Vec<f64> = (0..table.len() * 2).map(|xy| if table[xy >> 1] && xy & 1 == 1 { PI } else { 0.0 }).collect();
                self.pulse(&[t], 90.0, 270.0);
                self.diagonal(qubits, &theta)?;
                self.pulse(&[t], 90.0, 90.0);
            }
        }
        Ok(())
    }
}

/// Compiles one gate starting from `frame`; returns the emitted pulses and
/// the updated frame.
pub fn compile_gate(gate: &Gate, system: &SpinSystem, frame: &FrameState) -> Result<(PulseProgram, FrameState), CompileError> {
    gate.validate(system.n())?;
    if frame.phases.len() != system.n() {
        return Err(CompileError::SizeMismatch { circuit: frame.phases.len(), system: system.n() });
    }
    let mut em = Emitter { system, frame: frame.clone(), program: PulseProgram::new() };
    em.gate(gate)?;
    Ok((em.program, em.frame))
}

/// Compiles a circuit, threading frames through the gates and appending the
/// terminal frame shifts.
pub fn compile_circuit(circuit: &Circuit, system: &SpinSystem) -> Result<PulseProgram, CompileError> {
    circuit.validate()?;
    check_system(circuit.n_qubits, system)?;
    let mut frame = FrameState::new(system.n());
    let mut program = PulseProgram::new();
    for g in &circuit.gates {
        let (p, f) = compile_gate(g, system, &frame)?;
        program.extend(&p);
        frame = f;
    }
    for e in frame.terminal_elements() {
        program.push(e);
    }
    Ok(program)
}

/// The two standard decompositions of the controlled π phase gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PiForm {
    /// exp[−iπ/2(½E − Iz − Sz + 2IzSz)]: a 1/2J coupling period and −90°
    /// frame rotations.
    NegativeZeeman,
    /// exp[−iπ/2(−½E + Iz + Sz − 2IzSz)]: a 3/2J coupling period and +90°
    /// frame rotations.
    PositiveZeeman,
}

/// Controlled π phase gate on a positively coupled pair written out in one
/// of its two product-operator decompositions.
pub fn pi_gate_program(system: &SpinSystem, i: usize, j: usize, form: PiForm) -> Result<PulseProgram, CompileError> {
    let jhz = system.coupling(i, j);
    if jhz == 0.0 {
        return Err(CompileError::Uncoupled(i.min(j), i.max(j)));
    }
    // a negative J reverses the sense of the coupling evolution
    let (mut fraction, frame) = match form {
        PiForm::NegativeZeeman => (0.5, -90.0),
        PiForm::PositiveZeeman => (1.5, 90.0),
    };
    if jhz < 0.0 {
        fraction = 2.0 - fraction;
    }
    Ok(PulseProgram::from_elements(vec![
        PulseElement::couple(i, j, fraction),
        PulseElement::frame(i, frame),
        PulseElement::frame(j, frame),
    ]))
}

/// Controlled-NOT built with true Hadamards around the controlled π phase.
pub fn cnot_hadamard_circuit(n: usize, control: usize, target: usize) -> Circuit {
    Circuit {
        n_qubits: n,
        gates: vec![Gate::H(target), Gate::ControlledPhase { q1: control, q2: target, phi: PI }, Gate::H(target)],
    }
}

// ---------------------------------------------------------------------------
// Refocusing

/// Rewrites every coupling period (and every delay) as free precession
/// interrupted by nested 180°x echo pulses, so that only the intended
/// evolution survives.
///
/// Each refocused period is split into 2^k equal segments. Spin groups are
/// assigned distinct Rademacher sign patterns (r_1, r_2, …) and a spin is
/// inverted whenever its pattern changes sign; any Zeeman or coupling term
/// whose net sign pattern is a nonconstant Walsh function averages to zero.
///
/// * `Couple(i, j)`: both spins of the pair follow r_1, so their coupling
///   survives while their offsets cancel; bystander k follows its own r_m.
/// * `Delay`: with `active_pair` the pair evolves freely and only the
///   bystanders are toggled; without it every spin is toggled and the delay
///   becomes the identity.
///
/// Systems of one or two spins are returned unchanged.
pub fn insert_refocusing(program: &PulseProgram, system: &SpinSystem, active_pair: Option<(usize, usize)>) -> Result<PulseProgram, CompileError> {
    program.validate(system)?;
    let n = system.n();
    if n <= 2 {
        return Ok(program.clone());
    }
    let mut out = PulseProgram::new();
    for e in &program.elements {
        match e {
            PulseElement::Couple { pair: (i, j), fraction } => {
                let t = fraction / system.coupling(*i, *j).abs();
                let mut groups = vec![vec![*i, *j]];
                groups.extend((0..n).filter(|k| k != i && k != j).map(|k| vec![k]));
                toggled_delay(&mut out, t, &groups);
            }
            PulseElement::Delay { seconds } => {
                let groups: Vec<Vec<usize>> = match active_pair {
                    Some((i, j)) => (0..n).filter(|&k| k != i && k != j).map(|k| vec![k]).collect(),
                    None => (0..n).map(|k| vec![k]).collect(),
                };
                toggled_delay(&mut out, *seconds, &groups);
            }
            other => {
                out.push(other.clone());
            }
        }
    }
    Ok(out)
}

fn toggled_delay(out: &mut PulseProgram, t: f64, groups: &[Vec<usize>]) {
    if groups.is_empty() {
        out.push(PulseElement::delay(t));
        return;
    }
    let segments = 1usize << groups.len();
    let dt = t / segments as f64;
    let sign = |g: usize, s: usize| (s >> g) & 1;
    let mut current = vec![0usize; groups.len()];
    for s in 0..segments {
        let flips: Vec<usize> = (0..groups.len()).filter(|&g| sign(g, s) != current[g]).flat_map(|g| groups[g].iter().copied()).collect();
        if !flips.is_empty() {
            out.push(PulseElement::pulse(&flips, 180.0, Phase::X));
        }
        for (g, c) in current.iter_mut().enumerate() {
            *c = sign(g, s);
        }
        out.push(PulseElement::delay(dt));
    }
    let restore: Vec<usize> = (0..groups.len()).filter(|&g| current[g] == 1).flat_map(|g| groups[g].iter().copied()).collect();
    if !restore.is_empty() {
        out.push(PulseElement::pulse(&restore, 180.0, Phase::X));
    }
}

// ---------------------------------------------------------------------------
// Transition-selective pulses

/// A 180°x pulse on `target` confined to the states in which `control` has
/// value `control_state` (a perfectly selective pulse on one line of the
/// target doublet).
pub fn transition_selective_pulse(system: &SpinSystem, control: usize, target: usize, control_state: u8) -> Result<Propagator, CompileError> {
    let n = system.n();
    Gate::CNot { control, target }.validate(n)?;
    if system.coupling(control, target) == 0.0 {
        return Err(CompileError::Uncoupled(control.min(target), control.max(target)));
    }
    let r = rotation_2x2(PI, Phase::X);
    let dim = system.dim();
    let mut u = CMatrix::identity(dim);
    let st = stride_of(n, target);
    for s in 0..dim {
        if bit_of(n, s, control) as u8 != control_state || s & st != 0 {
            continue;
        }
        let (s0, s1) = (s, s | st);
        u[(s0, s0)] = r[0][0];
        u[(s0, s1)] = r[0][1];
        u[(s1, s0)] = r[1][0];
        u[(s1, s1)] = r[1][1];
    }
    Ok(Propagator::from_matrix_unchecked(u))
}

/// Controlled-NOT realised by a transition-selective 180°x pulse.
///
/// The selective pulse multiplies the flipped pair of levels by −i. The
/// returned propagator follows it with a z rotation of the control's frame
/// (+90° when flipping on control |1⟩, −90° on control |0⟩), which removes
/// that relative phase: the result is e^{−iπ/4} times the ideal CNOT (or
/// zero-controlled CNOT), and it is self-inverse up to a global phase.
pub fn transition_selective_cnot(system: &SpinSystem, control: usize, target: usize, control_state: u8) -> Result<Propagator, CompileError> {
    let sel = transition_selective_pulse(system, control, target, control_state)?;
    let frame = crate::pulse::frame_shift_propagator(system, control, if control_state == 1 { 90.0 } else { -90.0 })?;
    Ok(sel.then(&frame))
}

// ---------------------------------------------------------------------------
// Verification and routing

/// Outcome of comparing a compiled propagator with its ideal unitary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerificationReport {
    pub max_deviation: f64,
    pub pass: bool,
}

/// Compares a unitary program with an ideal propagator up to global phase.
pub fn verify_program(program: &PulseProgram, system: &SpinSystem, ideal: &Propagator) -> Result<VerificationReport, CompileError> {
    let u = program_propagator(system, program)?;
    let d = global_phase_distance(&u, ideal)?;
    Ok(VerificationReport { max_deviation: d, pass: d <= PROPAGATOR_TOL })
}

/// Compiles a circuit and checks the result against the product of ideal
/// gate unitaries. For three or more spins the refocused program is checked
/// as well and the larger deviation is reported.
pub fn verify_compilation(circuit: &Circuit, system: &SpinSystem) -> Result<VerificationReport, CompileError> {
    let program = compile_circuit(circuit, system)?;
    let ideal = circuit_unitary(circuit)?;
    let mut report = verify_program(&program, system, &ideal)?;
    if system.n() >= 3 {
        let refocused = verify_program(&insert_refocusing(&program, system, None)?, system, &ideal)?;
        report.max_deviation = report.max_deviation.max(refocused.max_deviation);
        report.pass = report.max_deviation <= PROPAGATOR_TOL;
    }
    Ok(report)
}

fn coupling_path(system: &SpinSystem, from: usize, to: usize) -> Option<Vec<usize>> {
    let n = system.n();
    let mut prev = vec![usize::MAX; n];
    let mut queue = VecDeque::from([from]);
    prev[from] = from;
    while let Some(k) = queue.pop_front() {
        if k == to {
            let mut path = vec![to];
            let mut c = to;
            while c != from {
                c = prev[c];
                path.push(c);
            }
            path.reverse();
            return Some(path);
        }
        for p in system.partners(k) {
            if prev[p] == usize::MAX {
                prev[p] = k;
                queue.push_back(p);
            }
        }
    }
    None
}

/// Rewrites two-qubit gates between uncoupled spins by swapping the first
/// qubit along a shortest coupling path, applying the gate to coupled
/// neighbours and swapping back.
pub fn route_circuit(circuit: &Circuit, system: &SpinSystem) -> Result<Circuit, CompileError> {
    circuit.validate()?;
    check_system(circuit.n_qubits, system)?;
    let mut out = Circuit::new(circuit.n_qubits);
    for g in &circuit.gates {
        let (a, b) = match g {
            Gate::CNot { control, target } => (*control, *target),
            Gate::ControlledPhase { q1, q2, .. } => (*q1, *q2),
            Gate::Swap(a, b) => (*a, *b),
            _ => {
                out.push(g.clone());
                continue;
            }
        };
        if system.coupling(a, b) != 0.0 {
            out.push(g.clone());
            continue;
        }
        let path = coupling_path(system, a, b).ok_or(CompileError::NoPath(a, b))?;
        let k = path.len();
        let swaps: Vec<Gate> = path[..k - 1].windows(2).map(|w| Gate::Swap(w[0], w[1])).collect();
        let moved = path[k - 2];
        for s in &swaps {
            out.push(s.clone());
        }
        out.push(match g {
            Gate::CNot { .. } => Gate::CNot { control: moved, target: b },
            Gate::ControlledPhase { phi, .. } => Gate::ControlledPhase { q1: moved, q2: b, phi: *phi },
            _ => Gate::Swap(moved, b),
        });
        for s in swaps.iter().rev() {
            out.push(s.clone());
        }
    }
    Ok(out)
}
