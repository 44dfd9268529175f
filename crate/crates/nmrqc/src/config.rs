//! Spin-system description files.
//!
//! ```text
//! # cytosine, 500 MHz
//! SPIN H5 1H 763      # name species offset_hz
//! SPIN H6 1H 0
//! J H5 H6 7.2         # name name coupling_hz
//! CENTER              # shift each species' offsets to a zero mean
//! ```
//!
//! Keywords are case-insensitive. Spins are numbered in the order they are
//! declared; couplings not listed are zero.

use std::collections::BTreeMap;

use nmrqc_core::spin::MAX_SPINS;
use nmrqc_core::SpinSystem;

use crate::text::{exact, lines, suggest, ParseError};

const KEYWORDS: [&str; 3] = ["SPIN", "J", "CENTER"];

/// Parses a spin-system file.
pub fn parse_system(text: &str) -> Result<SpinSystem, ParseError> {
    let mut names: Vec<String> = Vec::new();
    let mut species: Vec<String> = Vec::new();
    let mut offsets: Vec<f64> = Vec::new();
    let mut couplings: BTreeMap<(usize, usize), (f64, usize)> = BTreeMap::new();
    let mut center = false;
    let all = lines(text);
    for line in &all {
        let keyword = line.tokens[0].text.to_ascii_uppercase();
        match keyword.as_str() {
            "SPIN" => {
                line.expect_args(3, "SPIN name species offset_hz")?;
                let name = line.tokens[1].text;
                if !valid_name(name) {
                    return Err(line.error(1, format!("spin name {name:?} must start with a letter and contain only letters, digits and _")));
                }
                if names.iter().any(|n| n == name) {
                    return Err(line.error(1, format!("duplicate spin name {name:?}")));
                }
                if names.len() == MAX_SPINS {
                    return Err(line.error(0, format!("at most {MAX_SPINS} spins are supported")));
                }
                let offset = line.number(3, "offset")?;
                names.push(name.to_string());
                species.push(line.tokens[2].text.to_string());
                offsets.push(offset);
            }
            "J" => {
                line.expect_args(3, "J name name coupling_hz")?;
                let mut idx = [0; 2];
                for (k, slot) in idx.iter_mut().enumerate() {
                    let name = line.tokens[k + 1].text;
                    *slot = names
                        .iter()
                        .position(|n| n == name)
                        .ok_or_else(|| line.error(k + 1, format!("unknown spin {name:?}; declare it with SPIN first")))?;
                }
                if idx[0] == idx[1] {
                    return Err(line.error(2, "a spin cannot be coupled to itself"));
                }
                let hz = line.number(3, "coupling")?;
                let key = (idx[0].min(idx[1]), idx[0].max(idx[1]));
                if let Some((_, first)) = couplings.insert(key, (hz, line.number)) {
                    return Err(line.error(1, format!("coupling between these spins already given on line {first}")));
                }
            }
            "CENTER" => {
                line.expect_args(0, "CENTER")?;
                center = true;
            }
            other => {
                let hint = suggest(other, &KEYWORDS).map(|s| format!("; did you mean {s}?")).unwrap_or_default();
                return Err(line.error(0, format!("unknown keyword {:?}{hint}", line.tokens[0].text)));
            }
        }
    }
    if names.is_empty() {
        let line = all.last().map_or(1, |l| l.number);
        return Err(ParseError::new(line, 1, "no spins"));
    }
    if center {
        center_offsets(&mut offsets, &species);
    }
    let build = || -> Result<SpinSystem, nmrqc_core::SpinError> {
        let mut s = SpinSystem::new(offsets.clone(), species.clone())?.with_names(names.clone())?;
        for (&(i, j), &(hz, _)) in &couplings {
            s.set_coupling(i, j, hz)?;
        }
        Ok(s)
    };
    build().map_err(|e| ParseError::new(1, 1, e.to_string()))
}

fn valid_name(name: &str) -> bool {
    name.starts_with(|c: char| c.is_ascii_alphabetic()) && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Subtracts the mean offset of each species, giving equal and opposite
/// offsets for a homonuclear pair.
fn center_offsets(offsets: &mut [f64], species: &[String]) {
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (k, s) in species.iter().enumerate() {
        groups.entry(s.as_str()).or_default().push(k);
    }
    for members in groups.values() {
        let mean = members.iter().map(|&k| offsets[k]).sum::<f64>() / members.len() as f64;
        for &k in members {
            offsets[k] -= mean;
        }
    }
}

/// Canonical text form: one SPIN line per spin in index order (offsets
/// already centred), then the nonzero couplings in index order.
pub fn print_system(system: &SpinSystem) -> String {
    let mut out = String::new();
    for k in 0..system.n() {
        out.push_str(&format!("SPIN {} {} {}\n", system.names()[k], system.species()[k], exact(system.offset(k))));
    }
    for (&(i, j), &hz) in system.couplings() {
        out.push_str(&format!("J {} {} {}\n", system.names()[i], system.names()[j], exact(hz)));
    }
    out
}
