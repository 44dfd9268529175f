//! Stick spectra, eigenstate assignment from line phases, and state
//! tomography.
//!
//! A line of spin i belongs to one configuration b of the spins coupled to
//! i. Its frequency is ν_i + Σ_j J_ij·m_j with m_j = +½ for b_j = 0 and −½
//! for b_j = 1, and its complex amplitude is
//! 2^(2−n)·Σ ρ[s₁, s₀] over the transitions s₀ → s₁ of spin i that share the
//! partner configuration b (non-partner spins are summed over). With this
//! normalisation the amplitudes of all lines of spin i add up to c_x + i·c_y,
//! the coefficients of I_ix and I_iy in the product-operator expansion, so
//! I_x gives positive real (absorption) lines.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)] // provides float math (sqrt, sin, ...) without std
use num_traits::Float;
use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::linalg::least_squares;
use crate::product::{assemble, basis_matrix, expand, ProductLabel, ProductOperatorExpansion};
use crate::pulse::{apply_element, Phase, PulseElement, PulseError};
use crate::spin::{bit_of, stride_of, DensityState, SpinError, SpinSystem};

/// Lines weaker than this are omitted from spectra.
pub const LINE_THRESHOLD: f64 = 1e-12;

/// Relative signal (against the reference) below which a spin cannot be
/// assigned.
pub const INDETERMINATE_RATIO: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReadoutError {
    #[error("spin {index} out of range for a {n}-spin system")]
    SpinIndex { index: usize, n: usize },
    #[error("state has {got} spins but the system has {expected}")]
    StateSize { got: usize, expected: usize },
    #[error("spin {0}: signal is too weak relative to the reference to assign a state")]
    Indeterminate(usize),
    #[error("spin {0} has no line in the reference spectrum")]
    NoReference(usize),
    #[error("spin {spin}: line position implies spin {partner} is {implied}, but its own signal says {observed}")]
    Inconsistent { spin: usize, partner: usize, implied: u8, observed: u8 },
    #[error("tomography supports at most 3 spins, got {0}")]
    TooManySpins(usize),
    #[error("readout scheme cannot determine coefficient {0}; add experiments")]
    SchemeRank(ProductLabel),
    #[error(transparent)]
    Pulse(#[from] PulseError),
    #[error(transparent)]
    Spin(#[from] SpinError),
}

/// One stick of a spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumLine {
    pub spin: usize,
    /// Spins coupled to `spin`, ascending.
    pub partners: Vec<usize>,
    /// State of each partner for this line (same order as `partners`).
    pub partner_bits: Vec<u8>,
    pub freq_hz: f64,
    pub amp: C64,
}

/// An idealised spectrum as a list of lines.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub n_spins: usize,
    pub lines: Vec<SpectrumLine>,
}

impl Spectrum {
    pub fn empty(n_spins: usize) -> Self {
        Self { n_spins, lines: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    /// Lines of one spin.
    pub fn lines_of(&self, spin: usize) -> impl Iterator<Item = &SpectrumLine> {
        self.lines.iter().filter(move |l| l.spin == spin)
    }

    /// Sum of the amplitudes of one spin's lines.
    pub fn total(&self, spin: usize) -> C64 {
        self.lines_of(spin).map(|l| l.amp).sum()
    }

    /// Line-by-line sum of two spectra of the same system (adding the
    /// spectra of a temporal average). Lines that cancel are removed.
    pub fn plus(&self, other: &Spectrum) -> Spectrum {
        let mut lines = self.lines.clone();
        for l in &other.lines {
            match lines.iter_mut().find(|m| m.spin == l.spin && m.partner_bits == l.partner_bits && m.partners == l.partners) {
                Some(m) => m.amp += l.amp,
                None => lines.push(l.clone()),
            }
        }
        lines.retain(|l| l.amp.norm() > LINE_THRESHOLD);
        lines.sort_by(|a, b| (a.spin, &a.partner_bits).cmp(&(b.spin, &b.partner_bits)));
        Spectrum { n_spins: self.n_spins.max(other.n_spins), lines }
    }

    /// Complex Lorentzian line shape (full width at half height `width_hz`)
    /// evaluated at `freq_hz`, for plotting.
    pub fn lineshape(&self, freq_hz: f64, width_hz: f64) -> C64 {
        let g = width_hz / 2.0;
        self.lines
            .iter()
            .map(|l| {
                let d = freq_hz - l.freq_hz;
                l.amp * C64::new(g * g, g * d) / (g * g + d * d)
            })
            .sum()
    }
}

fn check_state(rho: &DensityState, system: &SpinSystem) -> Result<(), ReadoutError> {
    if rho.n_spins() != system.n() {
        return Err(ReadoutError::StateSize { got: rho.n_spins(), expected: system.n() });
    }
    Ok(())
}

fn lines_for_spin(rho: &DensityState, system: &SpinSystem, spin: usize) -> Vec<SpectrumLine> {
    let n = system.n();
    let m = rho.matrix();
    let partners = system.partners(spin);
    let norm = 4.0 / system.dim() as f64;
    let stride = stride_of(n, spin);
    let mut amps = vec![C64::new(0.0, 0.0); 1 << partners.len()];
    for s0 in 0..system.dim() {
        if s0 & stride != 0 {
            continue;
        }
        let b = partners.iter().fold(0, |acc, &p| (acc << 1) | bit_of(n, s0, p));
        amps[b] += m[(s0 | stride, s0)] * norm;
    }
    amps.into_iter()
        .enumerate()
        .map(|(b, amp)| {
            let bits: Vec<u8> = (0..partners.len()).map(|i| ((b >> (partners.len() - 1 - i)) & 1) as u8).collect();
            let freq_hz = system.offset(spin)
                + partners.iter().zip(&bits).map(|(&p, &bit)| system.coupling(spin, p) * if bit == 0 { 0.5 } else { -0.5 }).sum::<f64>();
            SpectrumLine { spin, partners: partners.clone(), partner_bits: bits, freq_hz, amp }
        })
        .collect()
}

/// Every line of the observed spins, including those with zero amplitude.
pub fn spectrum_all_lines(rho: &DensityState, system: &SpinSystem, observe: &[usize]) -> Result<Spectrum, ReadoutError> {
    check_state(rho, system)?;
    let mut lines = Vec::new();
    for &spin in observe {
        if spin >= system.n() {
            return Err(ReadoutError::SpinIndex { index: spin, n: system.n() });
        }
        lines.extend(lines_for_spin(rho, system, spin));
    }
    Ok(Spectrum { n_spins: system.n(), lines })
}

/// The stick spectrum of the observed spins. Populations and multiple
/// quantum terms are invisible, so a diagonal state gives an empty spectrum
/// until the caller applies an excitation pulse.
pub fn spectrum(rho: &DensityState, system: &SpinSystem, observe: &[usize]) -> Result<Spectrum, ReadoutError> {
    let mut s = spectrum_all_lines(rho, system, observe)?;
    s.lines.retain(|l| l.amp.norm() > LINE_THRESHOLD);
    Ok(s)
}

/// Applies a 90°y read pulse to the listed spins and returns the spectrum
/// of the same spins.
pub fn excite_and_observe(rho: &DensityState, system: &SpinSystem, spins: &[usize]) -> Result<Spectrum, ReadoutError> {
    let excited = apply_element(system, &PulseElement::pulse(spins, 90.0, Phase::Y), rho)?;
    spectrum(&excited, system, spins)
}

/// Bits read from a spectrum; `None` where a spin was neither observed nor
/// implied by a line position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EigenstateAssignment {
    pub bits: Vec<Option<u8>>,
}

impl EigenstateAssignment {
    pub fn bit(&self, k: usize) -> Option<u8> {
        self.bits.get(k).copied().flatten()
    }
}

impl fmt::Display for EigenstateAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bits {
            match b {
                Some(0) => f.write_str("0")?,
                Some(_) => f.write_str("1")?,
                None => f.write_str("?")?,
            }
        }
        Ok(())
    }
}

/// Reads eigenstate bits from a spectrum by comparing each spin's signal
/// phase with a reference spectrum of |0…0⟩: in phase means 0, inverted
/// means 1. When a spin shows a single line, its position within the
/// multiplet gives the partner states, which are checked against (or fill
/// in) the partners' own bits.
pub fn assign_eigenstates(spec: &Spectrum, reference: &Spectrum) -> Result<EigenstateAssignment, ReadoutError> {
    let n = spec.n_spins.max(reference.n_spins);
    let mut bits: Vec<Option<u8>> = vec![None; n];
    let mut spins: Vec<usize> = spec.lines.iter().map(|l| l.spin).collect();
    spins.sort_unstable();
    spins.dedup();
    for &spin in &spins {
        let r = reference.total(spin);
        if r.norm() <= LINE_THRESHOLD {
            return Err(ReadoutError::NoReference(spin));
        }
        let projection = (spec.total(spin) * r.conj()).re / r.norm();
        if projection.abs() < INDETERMINATE_RATIO * r.norm() {
            return Err(ReadoutError::Indeterminate(spin));
        }
        bits[spin] = Some(if projection > 0.0 { 0 } else { 1 });
    }
    for &spin in &spins {
        let lines: Vec<&SpectrumLine> = spec.lines_of(spin).collect();
        let strongest = lines.iter().map(|l| l.amp.norm()).fold(0.0, f64::max);
        let visible: Vec<&&SpectrumLine> = lines.iter().filter(|l| l.amp.norm() > INDETERMINATE_RATIO * strongest).collect();
        if visible.len() != 1 || visible[0].partners.is_empty() {
            continue;
        }
        let line = visible[0];
        for (&p, &implied) in line.partners.iter().zip(&line.partner_bits) {
            match bits[p] {
                Some(observed) if spins.contains(&p) && observed != implied => {
                    return Err(ReadoutError::Inconsistent { spin, partner: p, implied, observed });
                }
                _ => bits[p] = Some(implied),
            }
        }
    }
    Ok(EigenstateAssignment { bits })
}

/// One tomography experiment: an optional 90° read pulse per spin.
pub type ReadoutSetting = Vec<Option<Phase>>;

/// All per-spin combinations of {no pulse, 90°x, 90°y}: 3ⁿ experiments.
pub fn default_scheme(n: usize) -> Vec<ReadoutSetting> {
    let choices = [None, Some(Phase::X), Some(Phase::Y)];
    (0..3usize.pow(n as u32))
        .map(|mut i| {
            let mut setting = vec![None; n];
            for k in (0..n).rev() {
                setting[k] = choices[i % 3];
                i /= 3;
            }
            setting
        })
        .collect()
}

/// Result of a tomographic reconstruction.
#[derive(Debug, Clone, PartialEq)]
pub struct TomographyReport {
    /// Traceless estimate of the state.
    pub rho_est: DensityState,
    pub coefficients: ProductOperatorExpansion,
    /// Frobenius distance to the traceless part of the true state.
    pub error: f64,
    pub experiments: usize,
}

fn measure(rho: &DensityState, system: &SpinSystem, setting: &ReadoutSetting) -> Result<Vec<f64>, ReadoutError> {
    let mut state = rho.clone();
    for (k, p) in setting.iter().enumerate() {
        if let Some(phase) = p {
            state = apply_element(system, &PulseElement::pulse(&[k], 90.0, *phase), &state)?;
        }
    }
    let all: Vec<usize> = (0..system.n()).collect();
    let spec = spectrum_all_lines(&state, system, &all)?;
    Ok(spec.lines.iter().flat_map(|l| [l.amp.re, l.amp.im]).collect())
}

/// Simulates the readout experiments of `scheme` on `rho_true` and
/// reconstructs all 4ⁿ−1 traceless product-operator coefficients by linear
/// least squares.
pub fn tomography(rho_true: &DensityState, system: &SpinSystem, scheme: &[ReadoutSetting]) -> Result<TomographyReport, ReadoutError> {
    let n = system.n();
    if n > 3 {
        return Err(ReadoutError::TooManySpins(n));
    }
    check_state(rho_true, system)?;
    let labels: Vec<ProductLabel> = (1..1usize << (2 * n)).map(|i| ProductLabel::from_index(n, i)).collect();
    // design matrix, one column per basis element
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(labels.len());
    for l in &labels {
        let b = DensityState::from_matrix_unchecked(basis_matrix(l));
        let mut col = Vec::new();
        for setting in scheme {
            col.extend(measure(&b, system, setting)?);
        }
        columns.push(col);
    }
    let mut data = Vec::new();
    for setting in scheme {
        data.extend(measure(rho_true, system, setting)?);
    }
    let rows = data.len();
    let cols = labels.len();
    let mut a = vec![0.0; rows * cols];
    for (j, col) in columns.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            a[i * cols + j] = v;
        }
    }
    let x = least_squares(&a, rows, cols, &data).map_err(|e| ReadoutError::SchemeRank(labels[e.column].clone()))?;
    let mut coefficients = ProductOperatorExpansion::zero(n);
    for (l, c) in labels.iter().zip(x) {
        coefficients.set(l, c)?;
    }
    let rho_est = assemble(&coefficients, n)?;
    let error = (rho_est.matrix() - rho_true.traceless().matrix()).frobenius_norm();
    Ok(TomographyReport { rho_est, coefficients, error, experiments: scheme.len() })
}

/// Expansion of a state with its identity term removed, for comparing with
/// tomography output.
pub fn traceless_expansion(rho: &DensityState) -> Result<ProductOperatorExpansion, ReadoutError> {
    let mut e = expand(rho)?;
    e.set(&ProductLabel::identity(rho.n_spins()), 0.0)?;
    Ok(e)
}
