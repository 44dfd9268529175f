//! Ideal pulse programs and their action on density matrices.
//!
//! Pulses are instantaneous rotations exp(−iθ Σ_k I_kφ) with
//! I_φ = I_x cos φ + I_y sin φ; phase `x` is 0°, `y` 90°, `−x` 180° and `−y`
//! 270°. Free precession uses the weak-coupling Hamiltonian
//! H = Σ_k 2πν_k I_kz + Σ_{i<j} 2πJ_ij I_iz I_jz.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

#[allow(unused_imports)] // provides float math (sqrt, sin, ...) without std
use num_traits::Float;
use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::linalg::CMatrix;
use crate::spin::{bit_of, coherence_order_projection, stride_of, DensityState, Propagator, SpinError, SpinSystem};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PulseError {
    #[error("rotation has no target spins")]
    EmptyTargets,
    #[error("spin {index} out of range for a {n}-spin system")]
    SpinIndex { index: usize, n: usize },
    #[error("spin {0} listed twice")]
    DuplicateTarget(usize),
    #[error("negative delay {0} s")]
    NegativeDelay(f64),
    #[error("negative coupling fraction {0}")]
    NegativeFraction(f64),
    #[error("non-finite {0}")]
    NotFinite(&'static str),
    #[error("spins {0} and {1} are not coupled")]
    Uncoupled(usize, usize),
    #[error("coupling period needs two distinct spins, got ({0}, {0})")]
    SamePair(usize),
    #[error("program contains a non-unitary element at {0}")]
    NotUnitary(usize),
    #[error("state has {got} spins but the system has {expected}")]
    StateSize { got: usize, expected: usize },
    #[error("element {index}: {source}")]
    Element {
        index: usize,
        #[source]
        source: Box<PulseError>,
    },
    #[error(transparent)]
    Spin(#[from] SpinError),
}

/// Rotation axis: an angle in the transverse plane (degrees) or the z axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Phase {
    Angle(f64),
    Z,
}

impl Phase {
    pub const X: Phase = Phase::Angle(0.0);
    pub const Y: Phase = Phase::Angle(90.0);
    pub const MINUS_X: Phase = Phase::Angle(180.0);
    pub const MINUS_Y: Phase = Phase::Angle(270.0);

    /// Reduces transverse angles to [0, 360).
    pub fn normalized(self) -> Self {
        match self {
            Phase::Angle(a) => Phase::Angle(wrap_degrees(a)),
            Phase::Z => Phase::Z,
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.normalized() {
            Phase::Z => write!(f, "z"),
            Phase::Angle(0.0) => write!(f, "x"),
            Phase::Angle(90.0) => write!(f, "y"),
            Phase::Angle(180.0) => write!(f, "-x"),
            Phase::Angle(270.0) => write!(f, "-y"),
            Phase::Angle(a) => write!(f, "{a}"),
        }
    }
}

/// Reduces an angle in degrees to [0, 360).
pub fn wrap_degrees(a: f64) -> f64 {
    let r = a % 360.0;
    let r = if r < 0.0 { r + 360.0 } else { r };
    // fold values that round to 360 back onto 0
    if r >= 360.0 || (360.0 - r) < 1e-12 || r.abs() < 1e-12 {
        0.0
    } else {
        r
    }
}

/// One step of a pulse program.
#[derive(Debug, Clone, PartialEq)]
pub enum PulseElement {
    /// Hard (or perfectly selective) pulse on every spin in `targets`.
    Rotation { targets: Vec<usize>, angle_deg: f64, phase: Phase },
    /// Free precession under offsets and all couplings.
    Delay { seconds: f64 },
    /// Evolution under the coupling of one pair only for `fraction`/|J|.
    Couple { pair: (usize, usize), fraction: f64 },
    /// Gradient crusher; `None` uses the system default (zero-quantum terms
    /// survive in homonuclear systems only).
    Crush { keep_zq: Option<bool> },
    /// Keeps only the listed coherence orders.
    MQFilter { orders: Vec<i32> },
    /// Rotation of one spin's reference frame: exp(−iφ I_z).
    FrameShift { spin: usize, phase_deg: f64 },
}

impl PulseElement {
    pub fn pulse(targets: &[usize], angle_deg: f64, phase: Phase) -> Self {
        PulseElement::Rotation { targets: targets.to_vec(), angle_deg, phase }
    }

    pub fn delay(seconds: f64) -> Self {
        PulseElement::Delay { seconds }
    }

    pub fn couple(i: usize, j: usize, fraction: f64) -> Self {
        PulseElement::Couple { pair: (i, j), fraction }
    }

    pub fn crush(keep_zq: bool) -> Self {
        PulseElement::Crush { keep_zq: Some(keep_zq) }
    }

    pub fn frame(spin: usize, phase_deg: f64) -> Self {
        PulseElement::FrameShift { spin, phase_deg }
    }

    /// True for elements that act by conjugation with a propagator.
    pub fn is_unitary(&self) -> bool {
        !matches!(self, PulseElement::Crush { .. } | PulseElement::MQFilter { .. })
    }

    /// Spin indices the element refers to.
    pub fn spins(&self) -> Vec<usize> {
        match self {
            PulseElement::Rotation { targets, .. } => targets.clone(),
            PulseElement::Couple { pair, .. } => vec![pair.0, pair.1],
            PulseElement::FrameShift { spin, .. } => vec![*spin],
            _ => Vec::new(),
        }
    }

    /// Checks the element against a system.
    pub fn validate(&self, system: &SpinSystem) -> Result<(), PulseError> {
        let n = system.n();
        for &k in &self.spins() {
            if k >= n {
                return Err(PulseError::SpinIndex { index: k, n });
            }
        }
        match self {
            PulseElement::Rotation { targets, angle_deg, .. } => {
                if targets.is_empty() {
                    return Err(PulseError::EmptyTargets);
                }
                for (i, t) in targets.iter().enumerate() {
                    if targets[..i].contains(t) {
                        return Err(PulseError::DuplicateTarget(*t));
                    }
                }
                if !angle_deg.is_finite() {
                    return Err(PulseError::NotFinite("pulse angle"));
                }
                if let PulseElement::Rotation { phase: Phase::Angle(p), .. } = self {
                    if !p.is_finite() {
                        return Err(PulseError::NotFinite("pulse phase"));
                    }
                }
            }
            PulseElement::Delay { seconds } => {
                if !seconds.is_finite() {
                    return Err(PulseError::NotFinite("delay"));
                }
                if *seconds < 0.0 {
                    return Err(PulseError::NegativeDelay(*seconds));
                }
            }
            PulseElement::Couple { pair: (i, j), fraction } => {
                if i == j {
                    return Err(PulseError::SamePair(*i));
                }
                if !fraction.is_finite() {
                    return Err(PulseError::NotFinite("coupling fraction"));
                }
                if *fraction < 0.0 {
                    return Err(PulseError::NegativeFraction(*fraction));
                }
                if system.coupling(*i, *j) == 0.0 {
                    return Err(PulseError::Uncoupled(*i, *j));
                }
            }
            PulseElement::FrameShift { phase_deg, .. } => {
                if !phase_deg.is_finite() {
                    return Err(PulseError::NotFinite("frame phase"));
                }
            }
            PulseElement::Crush { .. } | PulseElement::MQFilter { .. } => {}
        }
        Ok(())
    }
}

/// An ordered list of pulse elements. Programs are plain data; the spin
/// system is supplied when they are run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PulseProgram {
    pub elements: Vec<PulseElement>,
}

impl PulseProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_elements(elements: Vec<PulseElement>) -> Self {
        Self { elements }
    }

    pub fn push(&mut self, e: PulseElement) -> &mut Self {
        self.elements.push(e);
        self
    }

    pub fn extend(&mut self, other: &PulseProgram) -> &mut Self {
        self.elements.extend(other.elements.iter().cloned());
        self
    }

    /// `self` followed by `other`.
    pub fn then(&self, other: &PulseProgram) -> PulseProgram {
        let mut p = self.clone();
        p.extend(other);
        p
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn is_unitary(&self) -> bool {
        self.elements.iter().all(PulseElement::is_unitary)
    }

    /// Total free-evolution time in seconds (delays and coupling periods).
    pub fn duration(&self, system: &SpinSystem) -> f64 {
        self.elements
            .iter()
            .map(|e| match e {
                PulseElement::Delay { seconds } => *seconds,
                PulseElement::Couple { pair, fraction } => fraction / system.coupling(pair.0, pair.1).abs(),
                _ => 0.0,
            })
            .sum()
    }

    pub fn validate(&self, system: &SpinSystem) -> Result<(), PulseError> {
        for (index, e) in self.elements.iter().enumerate() {
            e.validate(system).map_err(|source| PulseError::Element { index, source: Box::new(source) })?;
        }
        Ok(())
    }
}

/// Single-spin rotation matrix for angle θ (radians) about `phase`.
pub(crate) fn rotation_2x2(theta: f64, phase: Phase) -> [[C64; 2]; 2] {
    let (s, c) = (theta / 2.0).sin_cos();
    match phase {
        Phase::Z => [
            [C64::from_polar(1.0, -theta / 2.0), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::from_polar(1.0, theta / 2.0)],
        ],
        Phase::Angle(deg) => {
            let phi = deg.to_radians();
            let mis = C64::new(0.0, -s);
            [
                [C64::new(c, 0.0), mis * C64::from_polar(1.0, -phi)],
                [mis * C64::from_polar(1.0, phi), C64::new(c, 0.0)],
            ]
        }
    }
}

/// exp(−iθ Σ_{k∈targets} I_kφ).
pub fn rotation_propagator(system: &SpinSystem, targets: &[usize], angle_deg: f64, phase: Phase) -> Result<Propagator, PulseError> {
    let e = PulseElement::pulse(targets, angle_deg, phase);
    e.validate(system)?;
    let mut u = CMatrix::identity(system.dim());
    let r = rotation_2x2(angle_deg.to_radians(), phase);
    for &k in targets {
        u.left_apply_local(stride_of(system.n(), k), &r);
    }
    Ok(Propagator::from_matrix_unchecked(u))
}

fn delay_phases(system: &SpinSystem, t: f64) -> Vec<f64> {
    let n = system.n();
    (0..system.dim())
        .map(|s| {
            let m = |k: usize| if bit_of(n, s, k) == 0 { 0.5 } else { -0.5 };
            let zeeman: f64 = (0..n).map(|k| 2.0 * PI * system.offset(k) * m(k)).sum();
            let coupling: f64 = system.couplings().iter().map(|(&(i, j), &jhz)| 2.0 * PI * jhz * m(i) * m(j)).sum();
            (zeeman + coupling) * t
        })
        .collect()
}

fn couple_phases(system: &SpinSystem, (i, j): (usize, usize), fraction: f64) -> Vec<f64> {
    let n = system.n();
    let sign = system.coupling(i, j).signum();
    (0..system.dim())
        .map(|s| {
            let mi = if bit_of(n, s, i) == 0 { 0.5 } else { -0.5 };
            let mj = if bit_of(n, s, j) == 0 { 0.5 } else { -0.5 };
            2.0 * PI * sign * fraction * mi * mj
        })
        .collect()
}

fn frame_phases(system: &SpinSystem, spin: usize, phase_deg: f64) -> Vec<f64> {
    let n = system.n();
    let phi = phase_deg.to_radians();
    (0..system.dim()).map(|s| if bit_of(n, s, spin) == 0 { phi / 2.0 } else { -phi / 2.0 }).collect()
}

fn phases_to_diag(phases: &[f64]) -> Vec<C64> {
    phases.iter().map(|&p| C64::from_polar(1.0, -p)).collect()
}

/// exp(−iHt) for the weak-coupling free-precession Hamiltonian.
pub fn delay_propagator(system: &SpinSystem, t: f64) -> Result<Propagator, PulseError> {
    PulseElement::delay(t).validate(system)?;
    Ok(Propagator::from_phases(&delay_phases(system, t)))
}

/// Evolution under the coupling of `pair` alone for `fraction`/|J| seconds.
pub fn couple_propagator(system: &SpinSystem, pair: (usize, usize), fraction: f64) -> Result<Propagator, PulseError> {
    PulseElement::couple(pair.0, pair.1, fraction).validate(system)?;
    Ok(Propagator::from_phases(&couple_phases(system, pair, fraction)))
}

/// z rotation of one spin's frame, exp(−iφ I_z).
pub fn frame_shift_propagator(system: &SpinSystem, spin: usize, phase_deg: f64) -> Result<Propagator, PulseError> {
    PulseElement::frame(spin, phase_deg).validate(system)?;
    Ok(Propagator::from_phases(&frame_phases(system, spin, phase_deg)))
}

/// Idealised gradient crusher. With `keep_zq` every zero-quantum term
/// survives; otherwise only the diagonal does.
pub fn crush(rho: &DensityState, keep_zq: bool) -> DensityState {
    if keep_zq {
        coherence_order_projection(rho, &[0])
    } else {
        DensityState::from_matrix_unchecked(rho.matrix().map_indexed(|r, c, z| if r == c { z } else { C64::new(0.0, 0.0) }))
    }
}

/// Crusher behaviour used when an element does not specify it.
pub fn default_keep_zq(system: &SpinSystem) -> bool {
    !system.is_heteronuclear()
}

/// Propagator of a unitary element; `None` for crushers and filters.
pub fn element_propagator(system: &SpinSystem, element: &PulseElement) -> Result<Option<Propagator>, PulseError> {
    element.validate(system)?;
    Ok(match element {
        PulseElement::Rotation { targets, angle_deg, phase } => Some(rotation_propagator(system, targets, *angle_deg, *phase)?),
        PulseElement::Delay { seconds } => Some(delay_propagator(system, *seconds)?),
        PulseElement::Couple { pair, fraction } => Some(couple_propagator(system, *pair, *fraction)?),
        PulseElement::FrameShift { spin, phase_deg } => Some(frame_shift_propagator(system, *spin, *phase_deg)?),
        PulseElement::Crush { .. } | PulseElement::MQFilter { .. } => None,
    })
}

fn diagonal_of(system: &SpinSystem, element: &PulseElement) -> Option<Vec<C64>> {
    match element {
        PulseElement::Delay { seconds } => Some(phases_to_diag(&delay_phases(system, *seconds))),
        PulseElement::Couple { pair, fraction } => Some(phases_to_diag(&couple_phases(system, *pair, *fraction))),
        PulseElement::FrameShift { spin, phase_deg } => Some(phases_to_diag(&frame_phases(system, *spin, *phase_deg))),
        _ => None,
    }
}

/// Applies one element to a state.
pub fn apply_element(system: &SpinSystem, element: &PulseElement, rho: &DensityState) -> Result<DensityState, PulseError> {
    element.validate(system)?;
    if rho.n_spins() != system.n() {
        return Err(PulseError::StateSize { got: rho.n_spins(), expected: system.n() });
    }
    let mut m = rho.matrix().clone();
    match element {
        PulseElement::Rotation { targets, angle_deg, phase } => {
            let r = rotation_2x2(angle_deg.to_radians(), *phase);
            for &k in targets {
                let stride = stride_of(system.n(), k);
                m.left_apply_local(stride, &r);
                m.right_apply_local_adjoint(stride, &r);
            }
        }
        PulseElement::Crush { keep_zq } => return Ok(crush(rho, keep_zq.unwrap_or_else(|| default_keep_zq(system)))),
        PulseElement::MQFilter { orders } => return Ok(coherence_order_projection(rho, orders)),
        other => {
            let d = diagonal_of(system, other).expect("diagonal element");
            m.conjugate_by_diag(&d);
        }
    }
    Ok(DensityState::from_matrix_unchecked(m))
}

/// Runs a program element by element; errors carry the element index.
pub fn run_program(system: &SpinSystem, program: &PulseProgram, rho0: &DensityState) -> Result<DensityState, PulseError> {
    if rho0.n_spins() != system.n() {
        return Err(PulseError::StateSize { got: rho0.n_spins(), expected: system.n() });
    }
    let mut rho = rho0.clone();
    for (index, e) in program.elements.iter().enumerate() {
        rho = apply_element(system, e, &rho).map_err(|source| PulseError::Element { index, source: Box::new(source) })?;
    }
    Ok(rho)
}

/// Overall propagator of a program made only of unitary elements.
pub fn program_propagator(system: &SpinSystem, program: &PulseProgram) -> Result<Propagator, PulseError> {
    let n = system.n();
    let mut u = CMatrix::identity(system.dim());
    for (index, e) in program.elements.iter().enumerate() {
        e.validate(system).map_err(|source| PulseError::Element { index, source: Box::new(source) })?;
        match e {
            PulseElement::Rotation { targets, angle_deg, phase } => {
                let r = rotation_2x2(angle_deg.to_radians(), *phase);
                for &k in targets {
                    u.left_apply_local(stride_of(n, k), &r);
                }
            }
            PulseElement::Crush { .. } | PulseElement::MQFilter { .. } => return Err(PulseError::NotUnitary(index)),
            other => u.left_apply_diag(&diagonal_of(system, other).expect("diagonal element")),
        }
    }
    Ok(Propagator::from_matrix_unchecked(u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::product::{assemble_labels, basis_element, expand};
    use crate::spin::equal_up_to_global_phase;

    fn op(label: &str) -> DensityState {
        DensityState::new(basis_element(label).unwrap()).unwrap()
    }

    fn close(a: &DensityState, b: &DensityState) -> bool {
        (a.matrix() - b.matrix()).max_abs() < 1e-12
    }

    fn one_spin() -> SpinSystem {
        SpinSystem::homonuclear(&[0.0]).unwrap()
    }

    #[test]
    fn inversion_pulse_negates_iz() {
        let s = one_spin();
        let p = PulseProgram::from_elements(vec![PulseElement::pulse(&[0], 180.0, Phase::X)]);
        assert!(close(&run_program(&s, &p, &op("z")).unwrap(), &op("z").scaled(-1.0)));
    }

    #[test]
    fn zero_angle_rotation_is_identity() {
        let s = SpinSystem::cytosine();
        let u = rotation_propagator(&s, &[0, 1], 0.0, Phase::Y).unwrap();
        assert_eq!(u, Propagator::identity(2));
    }

    #[test]
    fn ninety_y_takes_iz_to_ix() {
        let s = one_spin();
        let p = PulseProgram::from_elements(vec![PulseElement::pulse(&[0], 90.0, Phase::Y)]);
        assert!(close(&run_program(&s, &p, &op("z")).unwrap(), &op("x")));
    }

    #[test]
    fn sixty_x_rotates_z_towards_minus_y() {
        let s = one_spin();
        let p = PulseProgram::from_elements(vec![PulseElement::pulse(&[0], 60.0, Phase::X)]);
        let want = assemble_labels(&[("z", 0.5), ("y", -(3.0_f64).sqrt() / 2.0)]).unwrap();
        assert!(close(&run_program(&s, &p, &op("z")).unwrap(), &want));
    }

    #[test]
    fn empty_targets_rejected() {
        assert_eq!(rotation_propagator(&one_spin(), &[], 90.0, Phase::X), Err(PulseError::EmptyTargets));
    }

    #[test]
    fn delay_of_half_over_j_gives_antiphase() {
        let s = SpinSystem::homonuclear(&[0.0, 0.0]).unwrap().with_coupling(0, 1, 7.2).unwrap();
        let p = PulseProgram::from_elements(vec![PulseElement::delay(1.0 / (2.0 * 7.2))]);
        assert!(close(&run_program(&s, &p, &op("xE")).unwrap(), &op("yz")));
        assert_eq!(delay_propagator(&s, 0.0).unwrap(), Propagator::identity(2));
        assert_eq!(delay_propagator(&s, -1.0), Err(PulseError::NegativeDelay(-1.0)));
    }

    #[test]
    fn offset_precession_half_turn() {
        let nu = 250.0;
        let s = SpinSystem::homonuclear(&[nu]).unwrap();
        let p = PulseProgram::from_elements(vec![PulseElement::delay(1.0 / (2.0 * nu))]);
        assert!(close(&run_program(&s, &p, &op("x")).unwrap(), &op("x").scaled(-1.0)));
    }

    #[test]
    fn coupling_periods() {
        let s = SpinSystem::cytosine();
        let run = |f: f64, rho: &DensityState| run_program(&s, &PulseProgram::from_elements(vec![PulseElement::couple(0, 1, f)]), rho).unwrap();
        assert!(close(&run(0.5, &op("xE")), &op("yz")));
        assert!(close(&run(0.5, &op("xz")), &op("yE")));
        assert!(close(&run(1.0, &op("xE")), &op("xE").scaled(-1.0)));
        assert_eq!(couple_propagator(&s, (0, 1), 0.0).unwrap(), Propagator::identity(2));
        let uncoupled = SpinSystem::homonuclear(&[0.0, 0.0]).unwrap();
        assert_eq!(couple_propagator(&uncoupled, (0, 1), 0.5), Err(PulseError::Uncoupled(0, 1)));
    }

    #[test]
    fn couple_matches_spin_echo() {
        let s = SpinSystem::cytosine();
        let t = 0.5 / 7.2;
        let echo = PulseProgram::from_elements(vec![
            PulseElement::delay(t / 2.0),
            PulseElement::pulse(&[0, 1], 180.0, Phase::X),
            PulseElement::delay(t / 2.0),
            PulseElement::pulse(&[0, 1], 180.0, Phase::X),
        ]);
        let a = program_propagator(&s, &echo).unwrap();
        let b = couple_propagator(&s, (0, 1), 0.5).unwrap();
        assert!(equal_up_to_global_phase(&a, &b, 1e-10).unwrap());
    }

    #[test]
    fn first_cory_crush() {
        let rho = assemble_labels(&[("zE", 1.0), ("Ez", 0.5), ("Ey", -(3.0_f64).sqrt() / 2.0)]).unwrap();
        let want = assemble_labels(&[("zE", 1.0), ("Ez", 0.5)]).unwrap();
        assert!(close(&crush(&rho, false), &want));
        let diag = DensityState::from_diag(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(crush(&diag, false), diag);
        assert_eq!(crush(&diag, true), diag);
    }

    #[test]
    fn zero_quantum_survives_only_homonuclear_crush() {
        // ZQx = (2IxSx + 2IySy)/2
        let zq = assemble_labels(&[("xx", 0.5), ("yy", 0.5)]).unwrap();
        assert!(close(&crush(&zq, true), &zq));
        assert!(crush(&zq, false).matrix().max_abs() == 0.0);
    }

    #[test]
    fn pi_gate_pulse_sequence() {
        for offsets in [[0.0, 0.0], [381.5, -381.5]] {
            let s = SpinSystem::homonuclear(&offsets).unwrap().with_coupling(0, 1, 7.2).unwrap();
            let q = 1.0 / (4.0 * 7.2);
            let both = [0, 1];
            let prog = PulseProgram::from_elements(vec![
                PulseElement::delay(q),
                PulseElement::pulse(&both, 180.0, Phase::X),
                PulseElement::delay(q),
                PulseElement::pulse(&both, 90.0, Phase::X),
                PulseElement::pulse(&both, 90.0, Phase::MINUS_Y),
                PulseElement::pulse(&both, 90.0, Phase::X),
            ]);
            let u = program_propagator(&s, &prog).unwrap();
            let cz = Propagator::new(CMatrix::from_real_diag(&[1.0, 1.0, 1.0, -1.0])).unwrap();
            assert!(equal_up_to_global_phase(&u, &cz, 1e-8).unwrap());
        }
    }

    #[test]
    fn composite_z_rotation() {
        let s = one_spin();
        let composite = PulseProgram::from_elements(vec![
            PulseElement::pulse(&[0], 90.0, Phase::MINUS_X),
            PulseElement::pulse(&[0], 37.0, Phase::Y),
            PulseElement::pulse(&[0], 90.0, Phase::X),
        ]);
        let a = program_propagator(&s, &composite).unwrap();
        let b = rotation_propagator(&s, &[0], 37.0, Phase::Z).unwrap();
        assert!(equal_up_to_global_phase(&a, &b, 1e-12).unwrap());
    }

    #[test]
    fn frame_shift_is_z_rotation() {
        let s = SpinSystem::cytosine();
        let a = frame_shift_propagator(&s, 1, 90.0).unwrap();
        let b = rotation_propagator(&s, &[1], 90.0, Phase::Z).unwrap();
        assert!((a.matrix() - b.matrix()).max_abs() < 1e-15);
    }

    #[test]
    fn errors_carry_element_index() {
        let s = SpinSystem::cytosine();
        let p = PulseProgram::from_elements(vec![PulseElement::delay(0.1), PulseElement::pulse(&[2], 90.0, Phase::X)]);
        let err = run_program(&s, &p, &DensityState::zero(2)).unwrap_err();
        assert!(matches!(err, PulseError::Element { index: 1, .. }));
        let with_crush = PulseProgram::from_elements(vec![PulseElement::crush(true)]);
        assert_eq!(program_propagator(&s, &with_crush), Err(PulseError::NotUnitary(0)));
    }

    #[test]
    fn run_agrees_with_propagator() {
        let s = SpinSystem::homonuclear(&[40.0, -13.0, 7.0]).unwrap().with_coupling(0, 2, 5.0).unwrap();
        let p = PulseProgram::from_elements(vec![
            PulseElement::pulse(&[0, 2], 73.0, Phase::Angle(31.0)),
            PulseElement::delay(0.013),
            PulseElement::couple(0, 2, 0.3),
            PulseElement::frame(1, 12.0),
            PulseElement::pulse(&[1], 45.0, Phase::Z),
        ]);
        let rho = assemble_labels(&[("zEE", 1.0), ("xyz", 0.3), ("Exy", -0.2)]).unwrap();
        let direct = run_program(&s, &p, &rho).unwrap();
        let via_u = rho.evolve(&program_propagator(&s, &p).unwrap());
        assert!((direct.matrix() - via_u.matrix()).max_abs() < 1e-12);
        let _ = expand(&direct).unwrap();
    }

    #[test]
    fn wrap_degrees_range() {
        assert_eq!(wrap_degrees(-90.0), 270.0);
        assert_eq!(wrap_degrees(720.0), 0.0);
        assert_eq!(wrap_degrees(359.9999999999999), 0.0);
        assert_eq!(alloc::format!("{}", Phase::Angle(-90.0)), "-y");
    }
}
