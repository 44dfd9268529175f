//! CSV and plain-text emitters. Every number goes through [`sig6`] so output
//! is locale-independent and byte-stable.

use std::fmt::Write;

use nmrqc_core::algorithms::{DeutschJozsaOutcome, GroverReport};
use nmrqc_core::compiler::VerificationReport;
use nmrqc_core::entanglement::{OvercompleteDecomposition, SeparabilityBounds, STATE_LABELS};
use nmrqc_core::prep::{PrepResult, PseudoPureReport};
use nmrqc_core::readout::{Spectrum, TomographyReport};
use nmrqc_core::{ProductOperatorExpansion, SpinSystem};

use crate::text::sig6;

/// Coefficients smaller than this are left out of term listings.
pub const TERM_TOL: f64 = 1e-12;

/// Amplitudes below this are rounding noise and print as zero.
pub const AMPLITUDE_FLOOR: f64 = 1e-12;

fn amp(x: f64) -> String {
    sig6(if x.abs() < AMPLITUDE_FLOOR { 0.0 } else { x })
}

/// `spin,partner_bits,freq_hz,amp_re,amp_im`, one row per line.
pub fn spectrum_csv(spectrum: &Spectrum, system: &SpinSystem) -> String {
    let mut out = String::from("spin,partner_bits,freq_hz,amp_re,amp_im\n");
    for l in &spectrum.lines {
        let bits: String = if l.partner_bits.is_empty() {
            "-".to_string()
        } else {
            l.partner_bits.iter().map(|b| char::from(b'0' + b)).collect()
        };
        let _ = writeln!(out, "{},{},{},{},{}", system.names()[l.spin], bits, sig6(l.freq_hz), amp(l.amp.re), amp(l.amp.im));
    }
    out
}

/// Lorentzian lineshape sampled on `points` frequencies spanning all lines
/// with a margin of ten widths: `freq_hz,re,im`.
pub fn lineshape_csv(spectrum: &Spectrum, width_hz: f64, points: usize) -> String {
    let mut out = String::from("freq_hz,re,im\n");
    if spectrum.lines.is_empty() || points < 2 {
        return out;
    }
    let lo = spectrum.lines.iter().map(|l| l.freq_hz).fold(f64::INFINITY, f64::min) - 10.0 * width_hz;
    let hi = spectrum.lines.iter().map(|l| l.freq_hz).fold(f64::NEG_INFINITY, f64::max) + 10.0 * width_hz;
    for k in 0..points {
        let f = lo + (hi - lo) * k as f64 / (points - 1) as f64;
        let v = spectrum.lineshape(f, width_hz);
        let _ = writeln!(out, "{},{},{}", sig6(f), amp(v.re), amp(v.im));
    }
    out
}

/// Nonzero product-operator terms, one `label value` pair per line.
pub fn terms(expansion: &ProductOperatorExpansion) -> String {
    let mut out = String::new();
    for (label, c) in expansion.nonzero(TERM_TOL) {
        let _ = writeln!(out, "  {label:<6} {}", sig6(c));
    }
    out
}

pub fn verification(report: &VerificationReport) -> String {
    format!(
        "# verification: max deviation {} (tolerance 1e-08) {}\n",
        sig6(report.max_deviation),
        if report.pass { "PASS" } else { "FAIL" }
    )
}

pub fn prep(result: &PrepResult, fit: Option<&PseudoPureReport>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "method {}", result.method);
    let _ = writeln!(out, "experiments {}", result.experiments);
    let _ = writeln!(out, "scale {}", sig6(result.scale));
    if let Ok(expansion) = nmrqc_core::expand(&result.rho) {
        let _ = writeln!(out, "terms");
        out.push_str(&terms(&expansion));
    }
    if let Some(fit) = fit {
        let _ = writeln!(
            out,
            "pseudo-pure fit: epsilon {} residual {} {}",
            sig6(fit.epsilon),
            sig6(fit.residual),
            if fit.pass { "PASS" } else { "FAIL" }
        );
    }
    out
}

pub fn tomography(report: &TomographyReport, exact: &ProductOperatorExpansion) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "experiments {}", report.experiments);
    let _ = writeln!(out, "term   estimate exact");
    let n = exact.n();
    for index in 1..(1usize << (2 * n)) {
        let label = nmrqc_core::ProductLabel::from_index(n, index);
        let (e, x) = (report.coefficients.coefficient(&label), exact.coefficient(&label));
        if e.abs() > TERM_TOL || x.abs() > TERM_TOL {
            let _ = writeln!(out, "{:<6} {} {}", label.to_string(), sig6(e), sig6(x));
        }
    }
    let _ = writeln!(out, "frobenius error {}", sig6(report.error));
    out
}

pub fn grover(report: &GroverReport, n: usize, marked: &[usize], counts: Option<&[usize]>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "iterations {}", report.iterations);
    let _ = writeln!(out, "{}", if counts.is_some() { "state probability marked counts" } else { "state probability marked" });
    for (s, p) in report.probabilities.iter().enumerate() {
        let label = format!("{s:0n$b}");
        let mark = if marked.contains(&s) { "*" } else { "-" };
        match counts {
            Some(c) => {
                let _ = writeln!(out, "{label} {} {mark} {}", sig6(*p), c[s]);
            }
            None => {
                let _ = writeln!(out, "{label} {} {mark}", sig6(*p));
            }
        }
    }
    let _ = writeln!(out, "marked probability {}", sig6(report.marked_probability));
    let _ = writeln!(out, "most likely {:0n$b}", report.best);
    out
}

pub fn deutsch_jozsa(outcome: &DeutschJozsaOutcome) -> String {
    format!(
        "class {}\nzero probability {}\noracle calls {}\n",
        outcome.class,
        sig6(outcome.zero_probability),
        outcome.oracle_calls
    )
}

pub fn separability(
    epsilon: f64,
    n: usize,
    bounds: &SeparabilityBounds,
    decomposition: Option<&OvercompleteDecomposition>,
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "epsilon {}", sig6(epsilon));
    let _ = writeln!(out, "qubits {n}");
    let _ = writeln!(out, "separable below {}", sig6(bounds.always_separable_below));
    let _ = writeln!(out, "entangled states above {}", sig6(bounds.entangled_exists_above));
    let region = if epsilon <= bounds.always_separable_below {
        "separable"
    } else if epsilon > bounds.entangled_exists_above {
        "entangled"
    } else {
        "undetermined"
    };
    let _ = writeln!(out, "region {region}");
    if let Some(d) = decomposition {
        let _ = writeln!(out, "certificate {}", if d.certificate { "PASS" } else { "NONE" });
        let _ = writeln!(out, "min weight {}", sig6(d.min()));
        let _ = writeln!(out, "residual {}", sig6(d.residual));
        let _ = writeln!(out, "P {}", STATE_LABELS.join(" "));
        for (j, row) in d.p.iter().enumerate() {
            let cells: Vec<String> = row.iter().map(|v| sig6(*v)).collect();
            let _ = writeln!(out, "{} {}", STATE_LABELS[j], cells.join(" "));
        }
    }
    out
}
