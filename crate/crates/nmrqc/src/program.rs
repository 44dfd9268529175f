//! Pulse-program files: one element per line, spins numbered from 1.
//!
//! ```text
//! PULSE targets=1,2 angle=90 phase=y    # phase: x, y, -x, -y, z or degrees
//! DELAY t=0.069444                      # seconds
//! COUPLE pair=1,2 frac=0.5              # evolution under one coupling for frac/|J|
//! CRUSH zq=keep                         # keep, drop or auto
//! MQFILTER orders=+3,-3
//! FRAME spin=1 phase=90                 # degrees
//! ```
//!
//! Spins may also be given by name.

use nmrqc_core::pulse::{PulseElement, PulseProgram};

use crate::circuit::{parse_phase, print_phase};
use crate::text::{exact, key_value, lines, suggest, Line, ParseError};

const KEYWORDS: [&str; 6] = ["PULSE", "DELAY", "COUPLE", "CRUSH", "MQFILTER", "FRAME"];

struct Fields<'l, 'a> {
    line: &'l Line<'a>,
    values: Vec<(&'a str, &'a str, usize)>,
}

impl<'l, 'a> Fields<'l, 'a> {
    fn new(line: &'l Line<'a>, allowed: &[&str], usage: &str) -> Result<Self, ParseError> {
        let mut values: Vec<(&'a str, &'a str, usize)> = Vec::new();
        for (t, tok) in line.tokens.iter().enumerate().skip(1) {
            let (k, v) = key_value(tok).ok_or_else(|| line.error(t, format!("expected key=value; usage: {usage}")))?;
            if !allowed.contains(&k) {
                return Err(line.error(t, format!("unknown field {k:?}; usage: {usage}")));
            }
            if values.iter().any(|(seen, _, _)| *seen == k) {
                return Err(line.error(t, format!("field {k:?} given twice")));
            }
            values.push((k, v, t));
        }
        for key in allowed {
            if !values.iter().any(|(k, _, _)| k == key) {
                return Err(line.error(line.tokens.len(), format!("missing {key}=…; usage: {usage}")));
            }
        }
        Ok(Self { line, values })
    }

    fn get(&self, key: &str) -> (&'a str, usize) {
        let (_, v, t) = self.values.iter().find(|(k, _, _)| *k == key).expect("checked in new");
        (v, *t)
    }

    fn number(&self, key: &str) -> Result<f64, ParseError> {
        let (v, t) = self.get(key);
        v.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| self.line.error(t, format!("malformed {key} {v:?}")))
    }

    fn spins(&self, key: &str, names: &[String]) -> Result<Vec<usize>, ParseError> {
        let (v, t) = self.get(key);
        v.split(',').map(|s| spin(self.line, t, s, names)).collect()
    }
}

fn spin(line: &Line<'_>, token: usize, text: &str, names: &[String]) -> Result<usize, ParseError> {
    if let Ok(k) = text.parse::<usize>() {
        if (1..=names.len()).contains(&k) {
            return Ok(k - 1);
        }
        return Err(line.error(token, format!("spin {k} out of range 1..={}", names.len())));
    }
    names
        .iter()
        .position(|n| n == text)
        .ok_or_else(|| line.error(token, format!("unknown spin {text:?}")))
}

/// Parses a pulse program for a system whose spins have the given names.
pub fn parse_program(text: &str, names: &[String]) -> Result<PulseProgram, ParseError> {
    let mut program = PulseProgram::new();
    for line in lines(text) {
        let word = line.tokens[0].text.to_ascii_uppercase();
        let element = match word.as_str() {
            "PULSE" => {
                let f = Fields::new(&line, &["targets", "angle", "phase"], "PULSE targets=1,2 angle=90 phase=y")?;
                let targets = f.spins("targets", names)?;
                let (p, t) = f.get("phase");
                let phase = parse_phase(p).ok_or_else(|| line.error(t, "phase must be x, y, -x, -y, z or degrees"))?;
                PulseElement::Rotation { targets, angle_deg: f.number("angle")?, phase }
            }
            "DELAY" => {
                let f = Fields::new(&line, &["t"], "DELAY t=seconds")?;
                PulseElement::Delay { seconds: f.number("t")? }
            }
            "COUPLE" => {
                let f = Fields::new(&line, &["pair", "frac"], "COUPLE pair=1,2 frac=0.5")?;
                let pair = f.spins("pair", names)?;
                if pair.len() != 2 {
                    return Err(line.error(f.get("pair").1, "pair needs exactly two spins"));
                }
                PulseElement::Couple { pair: (pair[0], pair[1]), fraction: f.number("frac")? }
            }
            "CRUSH" => {
                let f = Fields::new(&line, &["zq"], "CRUSH zq=keep|drop|auto")?;
                let (v, t) = f.get("zq");
                let keep_zq = match v {
                    "keep" => Some(true),
                    "drop" => Some(false),
                    "auto" => None,
                    _ => return Err(line.error(t, "zq must be keep, drop or auto")),
                };
                PulseElement::Crush { keep_zq }
            }
            "MQFILTER" => {
                let f = Fields::new(&line, &["orders"], "MQFILTER orders=+3,-3")?;
                let (v, t) = f.get("orders");
                let orders = v
                    .split(',')
                    .map(|o| o.parse::<i32>().map_err(|_| line.error(t, format!("malformed coherence order {o:?}"))))
                    .collect::<Result<Vec<_>, _>>()?;
                PulseElement::MQFilter { orders }
            }
            "FRAME" => {
                let f = Fields::new(&line, &["spin", "phase"], "FRAME spin=1 phase=90")?;
                let (v, t) = f.get("spin");
                PulseElement::FrameShift { spin: spin(&line, t, v, names)?, phase_deg: f.number("phase")? }
            }
            _ => {
                let hint = suggest(line.tokens[0].text, &KEYWORDS).map(|s| format!("; did you mean {s}?")).unwrap_or_default();
                return Err(line.error(0, format!("unknown element {:?}{hint}", line.tokens[0].text)));
            }
        };
        program.push(element);
    }
    Ok(program)
}

fn spin_list(spins: &[usize]) -> String {
    spins.iter().map(|k| (k + 1).to_string()).collect::<Vec<_>>().join(",")
}

/// Canonical text form with 1-based spin numbers and exact numbers.
pub fn print_program(program: &PulseProgram) -> String {
    let mut out = String::new();
    for e in &program.elements {
        let line = match e {
            PulseElement::Rotation { targets, angle_deg, phase } => {
                format!("PULSE targets={} angle={} phase={}", spin_list(targets), exact(*angle_deg), print_phase(*phase))
            }
            PulseElement::Delay { seconds } => format!("DELAY t={}", exact(*seconds)),
            PulseElement::Couple { pair, fraction } => format!("COUPLE pair={} frac={}", spin_list(&[pair.0, pair.1]), exact(*fraction)),
            PulseElement::Crush { keep_zq } => format!(
                "CRUSH zq={}",
                match keep_zq {
                    Some(true) => "keep",
                    Some(false) => "drop",
                    None => "auto",
                }
            ),
            PulseElement::MQFilter { orders } => {
                let list: Vec<String> = orders.iter().map(|o| if *o > 0 { format!("+{o}") } else { o.to_string() }).collect();
                format!("MQFILTER orders={}", list.join(","))
            }
            PulseElement::FrameShift { spin, phase_deg } => format!("FRAME spin={} phase={}", spin + 1, exact(*phase_deg)),
        };
        out.push_str(&line);
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use nmrqc_core::pulse::Phase;

    fn names() -> Vec<String> {
        vec!["I".to_string(), "S".to_string()]
    }

    #[test]
    fn all_elements() {
        let text = "PULSE targets=1,2 angle=90 phase=y\nDELAY t=0.069444\nCOUPLE pair=1,2 frac=0.5\nCRUSH zq=keep\nMQFILTER orders=+3,-3\nFRAME spin=1 phase=90\n";
        let p = parse_program(text, &names()).unwrap();
        assert_eq!(p.elements[0], PulseElement::pulse(&[0, 1], 90.0, Phase::Y));
        assert_eq!(p.elements[2], PulseElement::couple(0, 1, 0.5));
        assert_eq!(print_program(&p), text);
    }

    #[test]
    fn names_and_errors() {
        let p = parse_program("pulse targets=S angle=180 phase=-x", &names()).unwrap();
        assert_eq!(p.elements[0], PulseElement::pulse(&[1], 180.0, Phase::MINUS_X));
        let e = parse_program("PULSE targets=3 angle=90 phase=x", &names()).unwrap_err();
        assert_eq!((e.line, e.column), (1, 7));
        assert!(parse_program("PULSE targets=1 angle=90", &names()).unwrap_err().message.contains("missing phase"));
        assert!(parse_program("DELAY t=abc", &names()).is_err());
        assert!(parse_program("DELY t=1", &names()).unwrap_err().message.contains("did you mean DELAY"));
        assert!(parse_program("COUPLE pair=1 frac=1", &names()).is_err());
    }
}
