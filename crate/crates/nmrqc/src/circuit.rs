//! Circuit files: one gate per line.
//!
//! ```text
//! H q0                          # Hadamard
//! PH q0                         # pseudo-Hadamard, 90°y
//! PHI q0                        # inverse pseudo-Hadamard, 90°−y
//! X q0                          # NOT
//! CNOT q0 q1                    # control, target
//! CPHASE q0 q1 180              # controlled phase, degrees
//! TOFFOLI q0 q1 q2              # two controls, target
//! SWAP q0 q1
//! ROT q0 45 y                   # rotation: angle (degrees), phase
//! ORACLE f01 q0 q1              # function by truth table
//! ORACLE table=0110 qubits=q0,q1
//! MEASURE q0                    # spins to read out (default: all)
//! ```
//!
//! An oracle whose table has 2^k entries for k listed qubits applies the
//! phase (−1)^f(x); a table of 2^(k−1) entries is an f-controlled NOT onto the
//! last listed qubit. Tables list f(x) for x = 0, 1, …, with the first listed
//! qubit as the most significant input bit. Qubits are referred to by spin
//! name or as `q<index>`.


use nmrqc_core::compiler::{Circuit, Gate, OracleKind};
use nmrqc_core::pulse::Phase;

use crate::text::{exact, key_value, lines, suggest, Line, ParseError};

const MNEMONICS: [&str; 11] = ["H", "PH", "PHI", "X", "CNOT", "CPHASE", "TOFFOLI", "SWAP", "ROT", "ORACLE", "MEASURE"];

/// A circuit together with the spins chosen for readout.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitFile {
    pub circuit: Circuit,
    /// Spins to observe, in ascending order; `None` means all.
    pub measure: Option<Vec<usize>>,
}

impl CircuitFile {
    pub fn observed(&self) -> Vec<usize> {
        self.measure.clone().unwrap_or_else(|| (0..self.circuit.n_qubits).collect())
    }
}

fn resolve(line: &Line<'_>, token: usize, text: &str, names: &[String]) -> Result<usize, ParseError> {
    if let Some(k) = names.iter().position(|n| n == text) {
        return Ok(k);
    }
    if let Some(k) = text.strip_prefix('q').and_then(|d| d.parse::<usize>().ok()) {
        if k < names.len() {
            return Ok(k);
        }
    }
    Err(line.error(token, format!("unknown qubit {text:?}; this system has {}", names.join(", "))))
}

fn qubit(line: &Line<'_>, token: usize, names: &[String]) -> Result<usize, ParseError> {
    resolve(line, token, line.tokens[token].text, names)
}

fn distinct(line: &Line<'_>, qubits: &[usize]) -> Result<(), ParseError> {
    for i in 0..qubits.len() {
        if qubits[..i].contains(&qubits[i]) {
            return Err(line.error(i + 1, "a gate cannot act twice on the same qubit"));
        }
    }
    Ok(())
}

pub fn parse_phase(text: &str) -> Option<Phase> {
    match text.to_ascii_lowercase().as_str() {
        "x" | "+x" => Some(Phase::X),
        "y" | "+y" => Some(Phase::Y),
        "-x" => Some(Phase::MINUS_X),
        "-y" => Some(Phase::MINUS_Y),
        "z" => Some(Phase::Z),
        other => other.parse::<f64>().ok().filter(|v| v.is_finite()).map(Phase::Angle),
    }
}

pub fn print_phase(p: Phase) -> String {
    match p {
        Phase::Z => "z".to_string(),
        Phase::Angle(0.0) => "x".to_string(),
        Phase::Angle(90.0) => "y".to_string(),
        Phase::Angle(180.0) => "-x".to_string(),
        Phase::Angle(270.0) => "-y".to_string(),
        Phase::Angle(a) => exact(a),
    }
}

fn parse_table(line: &Line<'_>, token: usize, bits: &str) -> Result<Vec<bool>, ParseError> {
    if bits.is_empty() {
        return Err(line.error(token, "empty truth table"));
    }
    bits.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(line.error(token, format!("truth table may contain only 0 and 1, found {c:?}"))),
        })
        .collect()
}

fn oracle(line: &Line<'_>, names: &[String]) -> Result<Gate, ParseError> {
    let usage = "ORACLE f<bits> q.. | ORACLE table=<bits> qubits=q,q..";
    if line.tokens.len() < 3 {
        return Err(line.error(line.tokens.len(), format!("missing arguments; usage: {usage}")));
    }
    let (table, qubits) = if key_value(&line.tokens[1]).is_some() {
        let mut table = None;
        let mut qubits = None;
        for (t, tok) in line.tokens.iter().enumerate().skip(1) {
            match key_value(tok) {
                Some(("table", v)) => table = Some(parse_table(line, t, v)?),
                Some(("qubits", v)) => {
                    qubits = Some(v.split(',').map(|q| resolve(line, t, q, names)).collect::<Result<Vec<_>, _>>()?);
                }
                _ => return Err(line.error(t, format!("expected table=… or qubits=…; usage: {usage}"))),
            }
        }
        (
            table.ok_or_else(|| line.error(1, "missing table=…"))?,
            qubits.ok_or_else(|| line.error(1, "missing qubits=…"))?,
        )
    } else {
        let label = line.tokens[1].text;
        let bits = label.strip_prefix('f').ok_or_else(|| line.error(1, format!("oracle name must be f<bits>, e.g. f01; usage: {usage}")))?;
        let table = parse_table(line, 1, bits)?;
        let qubits = (2..line.tokens.len()).map(|t| qubit(line, t, names)).collect::<Result<Vec<_>, _>>()?;
        (table, qubits)
    };
    distinct(line, &qubits)?;
    let k = qubits.len();
    let label = format!("f{}", table.iter().map(|&b| if b { '1' } else { '0' }).collect::<String>());
    let kind = if table.len() == 1 << k {
        OracleKind::Phase(table)
    } else if k >= 2 && table.len() == 1 << (k - 1) {
        OracleKind::BitFlip(table)
    } else {
        return Err(line.error(
            1,
            format!("a table of {} entries does not fit {k} qubits (need 2^{k} for a phase oracle or 2^{} with a target)", table.len(), k.max(1) - 1),
        ));
    };
    Ok(Gate::Oracle { label, qubits, kind })
}

/// Parses a circuit for a system whose spins have the given names.
pub fn parse_circuit(text: &str, names: &[String]) -> Result<CircuitFile, ParseError> {
    let mut circuit = Circuit::new(names.len());
    let mut measure: Option<Vec<usize>> = None;
    for line in lines(text) {
        let word = line.tokens[0].text.to_ascii_uppercase();
        let gate = match word.as_str() {
            "H" | "PH" | "PHI" | "X" | "NOT" => {
                line.expect_args(1, &format!("{word} qubit"))?;
                let q = qubit(&line, 1, names)?;
                match word.as_str() {
                    "H" => Gate::H(q),
                    "PH" => Gate::PseudoH(q),
                    "PHI" => Gate::PseudoHInv(q),
                    _ => Gate::Not(q),
                }
            }
            "CNOT" | "SWAP" => {
                line.expect_args(2, &format!("{word} qubit qubit"))?;
                let (a, b) = (qubit(&line, 1, names)?, qubit(&line, 2, names)?);
                distinct(&line, &[a, b])?;
                if word == "CNOT" {
                    Gate::CNot { control: a, target: b }
                } else {
                    Gate::Swap(a, b)
                }
            }
            "CPHASE" => {
                line.expect_args(3, "CPHASE qubit qubit degrees")?;
                let (a, b) = (qubit(&line, 1, names)?, qubit(&line, 2, names)?);
                distinct(&line, &[a, b])?;
                let deg = line.number(3, "angle")?;
                Gate::ControlledPhase { q1: a, q2: b, phi: deg.to_radians() }
            }
            "TOFFOLI" => {
                line.expect_args(3, "TOFFOLI control control target")?;
                let q: Vec<usize> = (1..4).map(|t| qubit(&line, t, names)).collect::<Result<_, _>>()?;
                distinct(&line, &q)?;
                Gate::Toffoli { c1: q[0], c2: q[1], target: q[2] }
            }
            "ROT" => {
                line.expect_args(3, "ROT qubit degrees phase")?;
                let q = qubit(&line, 1, names)?;
                let angle_deg = line.number(2, "angle")?;
                let phase = parse_phase(line.tokens[3].text).ok_or_else(|| line.error(3, "phase must be x, y, -x, -y, z or degrees"))?;
                Gate::Rotate { qubit: q, angle_deg, phase }
            }
            "ORACLE" => oracle(&line, names)?,
            "MEASURE" => {
                if line.tokens.len() < 2 {
                    return Err(line.error(1, "MEASURE needs at least one qubit"));
                }
                let mut q: Vec<usize> = (1..line.tokens.len()).map(|t| qubit(&line, t, names)).collect::<Result<_, _>>()?;
                distinct(&line, &q)?;
                q.sort_unstable();
                if measure.is_some() {
                    return Err(line.error(0, "only one MEASURE line is allowed"));
                }
                measure = Some(q);
                continue;
            }
            _ => {
                let hint = suggest(line.tokens[0].text, &MNEMONICS).map(|s| format!("; did you mean {s}?")).unwrap_or_default();
                return Err(line.error(0, format!("unknown gate {:?}{hint}", line.tokens[0].text)));
            }
        };
        if measure.is_some() {
            return Err(line.error(0, "gates must come before MEASURE"));
        }
        circuit.push(gate);
    }
    Ok(CircuitFile { circuit, measure })
}

fn angle_text(deg: f64) -> String {
    // twelve significant digits survive the degree/radian conversion
    let rounded: f64 = format!("{deg:.11e}").parse().unwrap_or(deg);
    exact(rounded)
}

fn table_text(t: &[bool]) -> String {
    t.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// Canonical text form, using the given spin names.
pub fn print_circuit(file: &CircuitFile, names: &[String]) -> String {
    let q = |k: usize| names[k].as_str();
    let mut out = String::new();
    for g in &file.circuit.gates {
        let line = match g {
            Gate::H(a) => format!("H {}", q(*a)),
            Gate::PseudoH(a) => format!("PH {}", q(*a)),
            Gate::PseudoHInv(a) => format!("PHI {}", q(*a)),
            Gate::Not(a) => format!("X {}", q(*a)),
            Gate::CNot { control, target } => format!("CNOT {} {}", q(*control), q(*target)),
            Gate::ControlledPhase { q1, q2, phi } => format!("CPHASE {} {} {}", q(*q1), q(*q2), angle_text(phi.to_degrees())),
            Gate::Toffoli { c1, c2, target } => format!("TOFFOLI {} {} {}", q(*c1), q(*c2), q(*target)),
            Gate::Swap(a, b) => format!("SWAP {} {}", q(*a), q(*b)),
            Gate::Rotate { qubit, angle_deg, phase } => format!("ROT {} {} {}", q(*qubit), exact(*angle_deg), print_phase(*phase)),
            Gate::Oracle { qubits, kind, .. } => {
                let table = match kind {
                    OracleKind::Phase(t) | OracleKind::BitFlip(t) => table_text(t),
                };
                let list: Vec<&str> = qubits.iter().map(|&k| q(k)).collect();
                format!("ORACLE table={table} qubits={}", list.join(","))
            }
        };
        out.push_str(&line);
        out.push('\n');
    }
    if let Some(m) = &file.measure {
        let list: Vec<&str> = m.iter().map(|&k| q(k)).collect();
        out.push_str(&format!("MEASURE {}\n", list.join(" ")));
    }
    out
}
