//! Command dispatch. [`run`] parses arguments, executes one subcommand and
//! returns the process exit status:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | usage error |
//! | 2 | data error (unreadable file, parse error, module error) |
//! | 3 | verification failure |

use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, Subcommand};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use nmrqc_core::algorithms::{
    deutsch, deutsch_jozsa_refined, grover, BinaryFunction, DeutschRealization, GroverSpec, Iterations,
};
use nmrqc_core::compiler::{circuit_unitary, compile_circuit, insert_refocusing, route_circuit, verify_program};
use nmrqc_core::entanglement::{
    decompose_overcomplete, epsilon_high_temperature, separability_bounds, separability_crossover, werner,
};
use nmrqc_core::prep::{prepare, verify_pseudo_pure, PrepMethod};
use nmrqc_core::pulse::{run_program, PulseElement, PulseProgram};
use nmrqc_core::readout::{assign_eigenstates, default_scheme, spectrum, tomography, traceless_expansion, Spectrum};
use nmrqc_core::{DensityState, SpinSystem};

use crate::circuit::{parse_circuit, CircuitFile};
use crate::config::parse_system;
use crate::program::{parse_program, print_program};
use crate::report;
use crate::text::{sig6, ParseError};

/// Largest register the crossover search scans.
const CROSSOVER_MAX_QUBITS: usize = 64;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Verification(_) => 3,
        }
    }
}

fn data(e: impl std::fmt::Display) -> CliError {
    CliError::Data(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "nmrqc", version, about = "NMR quantum computing simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compile a circuit to a pulse program and verify it against the ideal unitary.
    Compile {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        circuit: PathBuf,
        /// Insert refocusing pulses for bystander spins.
        #[arg(long)]
        refocus: bool,
        /// Write the pulse program here instead of standard output.
        #[arg(long, short, conflicts_with = "check")]
        output: Option<PathBuf>,
        /// Verify this pulse program against the circuit instead of compiling.
        #[arg(long, conflicts_with = "refocus")]
        check: Option<PathBuf>,
    },
    /// Prepare a pseudo-pure state and report its product-operator terms.
    Prep {
        #[arg(long)]
        system: PathBuf,
        /// cory, pravia, knill, exhaustive, logical or cat.
        #[arg(long)]
        method: String,
    },
    /// Prepare, run a circuit, read the spectrum and assign bits.
    Run {
        #[arg(long)]
        system: PathBuf,
        /// cory, pravia, knill or exhaustive.
        #[arg(long)]
        prep: String,
        #[arg(long)]
        circuit: PathBuf,
        /// Write the spectrum CSV here instead of standard output.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Prepare, apply a pulse program and emit the spectrum.
    Spectrum {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        prep: String,
        /// Pulse program applied after preparation.
        #[arg(long)]
        program: Option<PathBuf>,
        /// Skip the final 90° y read pulse on every spin.
        #[arg(long)]
        no_read: bool,
        /// Emit a sampled Lorentzian lineshape of this width (Hz) instead of lines.
        #[arg(long)]
        lineshape: Option<f64>,
        #[arg(long, default_value_t = 2048)]
        points: usize,
    },
    /// Reconstruct a prepared (and optionally processed) state from simulated spectra.
    Tomography {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        prep: String,
        #[arg(long)]
        circuit: Option<PathBuf>,
    },
    /// Grover search over n qubits.
    Grover {
        #[arg(long)]
        n: usize,
        /// Comma-separated bit strings, e.g. 01,10.
        #[arg(long)]
        marked: String,
        /// A count or `auto`.
        #[arg(long, default_value = "auto")]
        iterations: String,
        /// Sample this many measurement outcomes.
        #[arg(long)]
        shots: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Deutsch's algorithm for a one-bit function such as f01.
    Deutsch {
        #[arg(long)]
        function: String,
        /// circuit, cytosine, chloroform or all.
        #[arg(long, default_value = "all")]
        realization: String,
    },
    /// Refined Deutsch–Jozsa classification of a truth table.
    Dj {
        #[arg(long)]
        table: String,
    },
    /// Separability bounds and product-state decomposition of a Werner state.
    Separability {
        #[arg(long, required_unless_present = "polarization")]
        epsilon: Option<f64>,
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// Derive ε from a per-spin polarisation instead.
        #[arg(long)]
        polarization: Option<f64>,
    },
}

/// Runs the command line `args` (including the program name), writing
/// results to `out` and diagnostics to `err`; returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    1
                }
            };
        }
    };
    match dispatch(cli.command) {
        Ok(text) => {
            let _ = out.write_all(text.as_bytes());
            0
        }
        Err(Failure { output, error }) => {
            let _ = out.write_all(output.as_bytes());
            let _ = writeln!(err, "error: {error}");
            error.exit_code()
        }
    }
}

/// An error together with whatever output was produced before it.
struct Failure {
    output: String,
    error: CliError,
}

impl From<CliError> for Failure {
    fn from(error: CliError) -> Self {
        Failure { output: String::new(), error }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn located(path: &Path, e: ParseError) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

fn load_system(path: &Path) -> Result<SpinSystem, CliError> {
    parse_system(&read(path)?).map_err(|e| located(path, e))
}

fn load_circuit(path: &Path, system: &SpinSystem) -> Result<CircuitFile, CliError> {
    parse_circuit(&read(path)?, system.names()).map_err(|e| located(path, e))
}

fn prep_method(name: &str) -> Result<PrepMethod, CliError> {
    PrepMethod::from_name(name).ok_or_else(|| {
        let all: Vec<&str> = PrepMethod::ALL.iter().map(|m| m.name()).collect();
        CliError::Usage(format!("unknown preparation {name:?}; expected one of {}", all.join(", ")))
    })
}

/// Starting states of a preparation: the parts of a temporal average, or
/// the single prepared state.
fn prepared_parts(system: &SpinSystem, method: PrepMethod) -> Result<Vec<DensityState>, CliError> {
    if !matches!(method, PrepMethod::Cory | PrepMethod::Pravia | PrepMethod::Knill | PrepMethod::Exhaustive) {
        return Err(CliError::Usage(format!(
            "preparation {method} does not act on the full register; use cory, pravia, knill or exhaustive"
        )));
    }
    let result = prepare(system, method).map_err(data)?;
    Ok(if result.parts.is_empty() { vec![result.rho] } else { result.parts })
}

fn compiled(file: &CircuitFile, system: &SpinSystem, refocus: bool) -> Result<PulseProgram, CliError> {
    let routed = route_circuit(&file.circuit, system).map_err(data)?;
    let program = compile_circuit(&routed, system).map_err(data)?;
    if refocus {
        insert_refocusing(&program, system, None).map_err(data)
    } else {
        Ok(program)
    }
}

fn read_pulses(spins: &[usize]) -> PulseProgram {
    let mut p = PulseProgram::new();
    if !spins.is_empty() {
        p.push(PulseElement::pulse(spins, 90.0, nmrqc_core::pulse::Phase::Y));
    }
    p
}

/// Sum over the parts of the spectra observed after `program` and a 90° y
/// read pulse on `observe`.
fn summed_spectrum(
    system: &SpinSystem,
    parts: &[DensityState],
    program: &PulseProgram,
    observe: &[usize],
) -> Result<Spectrum, CliError> {
    let full = program.then(&read_pulses(observe));
    let mut total = Spectrum::empty(system.n());
    for rho in parts {
        let out = run_program(system, &full, rho).map_err(data)?;
        total = total.plus(&spectrum(&out, system, observe).map_err(data)?);
    }
    Ok(total)
}

fn dispatch(command: Command) -> Result<String, Failure> {
    match command {
        Command::Compile { system, circuit, refocus, output, check } => {
            let sys = load_system(&system)?;
            let file = load_circuit(&circuit, &sys)?;
            let ideal = circuit_unitary(&file.circuit).map_err(data)?;
            let mut text = String::new();
            let program = match check {
                Some(path) => {
                    let program = parse_program(&read(&path)?, sys.names()).map_err(|e| located(&path, e))?;
                    if !program.is_unitary() {
                        return Err(CliError::Data(format!("{}: only unitary elements can be verified", path.display())).into());
                    }
                    program
                }
                None => {
                    let program = compiled(&file, &sys, refocus)?;
                    match output {
                        Some(path) => write(&path, &print_program(&program))?,
                        None => text.push_str(&print_program(&program)),
                    }
                    program
                }
            };
            let check = verify_program(&program, &sys, &ideal).map_err(data)?;
            text.push_str(&report::verification(&check));
            if check.pass {
                Ok(text)
            } else {
                Err(Failure {
                    output: text,
                    error: CliError::Verification(format!(
                        "pulse program deviates from the circuit by {}",
                        sig6(check.max_deviation)
                    )),
                })
            }
        }
        Command::Prep { system, method } => {
            let sys = load_system(&system)?;
            let method = prep_method(&method)?;
            let result = prepare(&sys, method).map_err(data)?;
            let fit = (method != PrepMethod::Cat).then(|| verify_pseudo_pure(&result.rho, 0));
            let text = report::prep(&result, fit.as_ref());
            match fit {
                Some(f) if !f.pass => Err(Failure {
                    output: text,
                    error: CliError::Verification("prepared state is not pseudo-pure".into()),
                }),
                _ => Ok(text),
            }
        }
        Command::Run { system, prep, circuit, csv } => {
            let sys = load_system(&system)?;
            let parts = prepared_parts(&sys, prep_method(&prep)?)?;
            let file = load_circuit(&circuit, &sys)?;
            let observe = file.observed();
            let program = compiled(&file, &sys, sys.n() >= 3)?;
            let spec = summed_spectrum(&sys, &parts, &program, &observe)?;
            let reference = summed_spectrum(&sys, &parts, &PulseProgram::new(), &observe)?;
            let table = report::spectrum_csv(&spec, &sys);
            let mut text = String::new();
            match csv {
                Some(path) => write(&path, &table)?,
                None => text.push_str(&table),
            }
            match assign_eigenstates(&spec, &reference) {
                Ok(assignment) => {
                    let bits: String = observe
                        .iter()
                        .map(|&k| match assignment.bit(k) {
                            Some(b) => char::from(b'0' + b),
                            None => '?',
                        })
                        .collect();
                    text.push_str(&format!("bits {bits}\n"));
                    Ok(text)
                }
                Err(e) => Err(Failure { output: text, error: data(format!("readout: {e}")) }),
            }
        }
        Command::Spectrum { system, prep, program, no_read, lineshape, points } => {
            let sys = load_system(&system)?;
            let parts = prepared_parts(&sys, prep_method(&prep)?)?;
            let pulses = match program {
                Some(path) => parse_program(&read(&path)?, sys.names()).map_err(|e| located(&path, e))?,
                None => PulseProgram::new(),
            };
            pulses.validate(&sys).map_err(data)?;
            let all: Vec<usize> = (0..sys.n()).collect();
            let spec = if no_read {
                let mut total = Spectrum::empty(sys.n());
                for rho in &parts {
                    let out = run_program(&sys, &pulses, rho).map_err(data)?;
                    total = total.plus(&spectrum(&out, &sys, &all).map_err(data)?);
                }
                total
            } else {
                summed_spectrum(&sys, &parts, &pulses, &all)?
            };
            Ok(match lineshape {
                Some(width) if width > 0.0 && width.is_finite() => report::lineshape_csv(&spec, width, points),
                Some(width) => return Err(CliError::Usage(format!("lineshape width must be positive, got {width}")).into()),
                None => report::spectrum_csv(&spec, &sys),
            })
        }
        Command::Tomography { system, prep, circuit } => {
            let sys = load_system(&system)?;
            let parts = prepared_parts(&sys, prep_method(&prep)?)?;
            let mut rho = parts.iter().skip(1).fold(parts[0].clone(), |acc, p| acc.plus(p));
            if let Some(path) = circuit {
                let file = load_circuit(&path, &sys)?;
                rho = run_program(&sys, &compiled(&file, &sys, sys.n() >= 3)?, &rho).map_err(data)?;
            }
            let result = tomography(&rho, &sys, &default_scheme(sys.n())).map_err(data)?;
            let exact = traceless_expansion(&rho).map_err(data)?;
            Ok(report::tomography(&result, &exact))
        }
        Command::Grover { n, marked, iterations, shots, seed } => {
            let marked = parse_marked(&marked, n)?;
            let iterations = match iterations.as_str() {
                "auto" => Iterations::Auto,
                s => Iterations::Count(
                    s.parse().map_err(|_| CliError::Usage(format!("iterations must be a count or auto, got {s:?}")))?,
                ),
            };
            let spec = GroverSpec::new(n, &marked, iterations).map_err(data)?;
            let result = grover(&spec).map_err(data)?;
            let counts = match shots {
                Some(s) => Some(sample(&result.probabilities, s, seed)?),
                None => None,
            };
            Ok(report::grover(&result, n, &marked, counts.as_deref()))
        }
        Command::Deutsch { function, realization } => {
            let bits = function.strip_prefix('f').unwrap_or(&function);
            let f = BinaryFunction::from_str(bits).map_err(data)?;
            let realizations = if realization == "all" {
                DeutschRealization::ALL.to_vec()
            } else {
                vec![DeutschRealization::from_name(&realization).ok_or_else(|| {
                    CliError::Usage(format!(
                        "unknown realization {realization:?}; expected circuit, cytosine, chloroform or all"
                    ))
                })?]
            };
            let mut text = format!("function f{bits}\n");
            for r in realizations {
                let outcome = deutsch(&f, r).map_err(data)?;
                let read = outcome.assignment.map(|a| format!(" bits {a}")).unwrap_or_default();
                text.push_str(&format!("{} parity {}{read}\n", r.name(), outcome.parity));
            }
            Ok(text)
        }
        Command::Dj { table } => {
            let f = BinaryFunction::from_str(&table).map_err(data)?;
            Ok(report::deutsch_jozsa(&deutsch_jozsa_refined(&f).map_err(data)?))
        }
        Command::Separability { epsilon, n, polarization } => {
            let mut text = String::new();
            let eps = match (epsilon, polarization) {
                (Some(e), _) => e,
                (None, Some(p)) => {
                    let e = epsilon_high_temperature(n, p).map_err(data)?;
                    let crossover = separability_crossover(p, CROSSOVER_MAX_QUBITS).map_err(data)?;
                    text.push_str(&format!("polarization {}\n", sig6(p)));
                    text.push_str(&match crossover {
                        Some(k) => format!("entanglement possible from {k} qubits\n"),
                        None => format!("separable up to {CROSSOVER_MAX_QUBITS} qubits\n"),
                    });
                    e
                }
                (None, None) => return Err(CliError::Usage("give --epsilon or --polarization".into()).into()),
            };
            let bounds = separability_bounds(n);
            let decomposition = if n == 2 {
                let state = werner(eps, None, 2).map_err(data)?;
                Some(decompose_overcomplete(&state.rho).map_err(data)?)
            } else {
                None
            };
            text.push_str(&report::separability(eps, n, &bounds, decomposition.as_ref()));
            Ok(text)
        }
    }
}

fn parse_marked(list: &str, n: usize) -> Result<Vec<usize>, CliError> {
    list.split(',')
        .map(|s| {
            if s.len() != n || !s.chars().all(|c| c == '0' || c == '1') {
                return Err(CliError::Usage(format!("marked state {s:?} must be a bit string of length {n}")));
            }
            Ok(usize::from_str_radix(s, 2).expect("validated bit string"))
        })
        .collect()
}

/// Seeded measurement histogram over basis states.
fn sample(probabilities: &[f64], shots: usize, seed: u64) -> Result<Vec<usize>, CliError> {
    let dist = WeightedIndex::new(probabilities).map_err(data)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0; probabilities.len()];
    for _ in 0..shots {
        counts[dist.sample(&mut rng)] += 1;
    }
    Ok(counts)
}
