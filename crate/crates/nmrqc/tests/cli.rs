//! End-to-end runs of the `nmrqc` binary.

use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name).display().to_string()
}

fn nmrqc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nmrqc")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn deutsch_runs_read_parity_from_the_spectrum() {
    for (f, bit) in [("00", "0"), ("01", "1"), ("10", "1"), ("11", "0")] {
        for (system, prep) in [("cytosine.cfg", "cory"), ("cytosine.cfg", "knill"), ("chloroform.cfg", "pravia")] {
            let o = nmrqc(&["run", "--system", &data(system), "--prep", prep, "--circuit", &data(&format!("deutsch_f{f}.qc"))]);
            assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
            let out = stdout(&o);
            assert!(out.starts_with("spin,partner_bits,freq_hz,amp_re,amp_im\n"), "{out}");
            assert!(out.ends_with(&format!("bits {bit}\n")), "f{f} {system} {prep}: {out}");
        }
    }
}

#[test]
fn run_writes_csv_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("spectrum.csv");
    let o = nmrqc(&[
        "run",
        "--system",
        &data("cytosine.cfg"),
        "--prep",
        "cory",
        "--circuit",
        &data("deutsch_f01.qc"),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(stdout(&o), "bits 1\n");
    let table = std::fs::read_to_string(&csv).unwrap();
    // the input qubit's line sits where the ancilla is |1⟩, inverted
    assert_eq!(table, "spin,partner_bits,freq_hz,amp_re,amp_im\nH5,1,377.9,-0.5,0\n");
}

#[test]
fn grover_table_for_one_marked_state() {
    let o = nmrqc(&["grover", "--n", "2", "--marked", "01", "--iterations", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        "iterations 1\nstate probability marked\n00 0 -\n01 1 *\n10 0 -\n11 0 -\nmarked probability 1\nmost likely 01\n"
    );
    let shots = nmrqc(&["grover", "--n", "3", "--marked", "011,110", "--shots", "500", "--seed", "3"]);
    let counts: usize = stdout(&shots)
        .lines()
        .skip(2)
        .take(8)
        .map(|l| l.split(' ').nth(3).unwrap().parse::<usize>().unwrap())
        .sum();
    assert_eq!(counts, 500);
}

#[test]
fn separability_certificate() {
    let o = nmrqc(&["separability", "--epsilon", "0.1111", "--n", "2"]);
    let out = stdout(&o);
    assert!(out.contains("certificate PASS\n"), "{out}");
    assert!(out.contains("\nP 0 1 + - +i -i\n"));
    let strong = stdout(&nmrqc(&["separability", "--epsilon", "0.5", "--n", "2"]));
    assert!(strong.contains("certificate NONE\n") && strong.contains("region entangled\n"));
    let hot = stdout(&nmrqc(&["separability", "--polarization", "1e-4", "--n", "4"]));
    assert!(hot.contains("entanglement possible from 11 qubits\n"), "{hot}");
}

#[test]
fn compile_emits_a_parseable_program_and_verification() {
    let o = nmrqc(&["compile", "--system", &data("three_spin.cfg"), "--circuit", &data("cat3.qc"), "--refocus"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.lines().last().unwrap().ends_with("PASS"));
    let names: Vec<String> = ["A", "B", "C"].map(String::from).to_vec();
    let program = nmrqc::program::parse_program(&out, &names).unwrap();
    assert!(program.len() > 10);
}

#[test]
fn other_subcommands() {
    let prep = stdout(&nmrqc(&["prep", "--system", &data("cytosine.cfg"), "--method", "cory"]));
    assert!(prep.contains("scale 0.5\n") && prep.contains("PASS"), "{prep}");
    let dj = stdout(&nmrqc(&["dj", "--table", "01101001"]));
    assert_eq!(dj, "class balanced\nzero probability 0\noracle calls 1\n");
    let d = stdout(&nmrqc(&["deutsch", "--function", "f10", "--realization", "cytosine"]));
    assert_eq!(d, "function f10\ncytosine parity 1 bits 11\n");
    let tomo = stdout(&nmrqc(&["tomography", "--system", &data("cytosine.cfg"), "--prep", "cory", "--circuit", &data("bell.qc")]));
    assert!(tomo.contains("experiments 9\n") && tomo.contains("xx     0.5 0.5\n"), "{tomo}");
    let spec = stdout(&nmrqc(&["spectrum", "--system", &data("cytosine.cfg"), "--prep", "cory", "--program", &data("echo.pulse")]));
    assert_eq!(spec.lines().count(), 5);
    let shape = stdout(&nmrqc(&["spectrum", "--system", &data("chloroform.cfg"), "--prep", "pravia", "--lineshape", "2", "--points", "11"]));
    assert_eq!(shape.lines().count(), 12);
}

#[test]
fn exit_codes() {
    assert_eq!(nmrqc(&["--help"]).status.code(), Some(0));
    assert_eq!(nmrqc(&["--version"]).status.code(), Some(0));
    assert_eq!(nmrqc(&[]).status.code(), Some(1));
    assert_eq!(nmrqc(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(nmrqc(&["grover", "--n", "2", "--marked", "3"]).status.code(), Some(1));
    assert_eq!(nmrqc(&["prep", "--system", &data("cytosine.cfg"), "--method", "magic"]).status.code(), Some(1));

    let missing = nmrqc(&["prep", "--system", "/nonexistent.cfg", "--method", "cory"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(stderr(&missing).starts_with("error: /nonexistent.cfg"));
    assert_eq!(nmrqc(&["dj", "--table", "0111"]).status.code(), Some(2));
    assert_eq!(nmrqc(&["prep", "--system", &data("cytosine.cfg"), "--method", "pravia"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.qc");
    std::fs::write(&bad, "H q0\nCNOT q0 q7\n").unwrap();
    let o = nmrqc(&["compile", "--system", &data("cytosine.cfg"), "--circuit", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2, column 9"), "{}", stderr(&o));
}

#[test]
fn checking_a_hand_written_program() {
    let dir = tempfile::tempdir().unwrap();
    let circuit = dir.path().join("x.qc");
    std::fs::write(&circuit, "X q0\n").unwrap();
    let good = dir.path().join("good.pulse");
    std::fs::write(&good, "PULSE targets=1 angle=180 phase=x\n").unwrap();
    let bad = dir.path().join("bad.pulse");
    std::fs::write(&bad, "PULSE targets=1 angle=170 phase=x\n").unwrap();
    let check = |program: &PathBuf| {
        nmrqc(&["compile", "--system", &data("cytosine.cfg"), "--circuit", circuit.to_str().unwrap(), "--check", program.to_str().unwrap()])
    };
    let ok = check(&good);
    assert_eq!(ok.status.code(), Some(0), "{}", stderr(&ok));
    assert!(stdout(&ok).ends_with("PASS\n"));
    let fail = check(&bad);
    assert_eq!(fail.status.code(), Some(3));
    assert!(stdout(&fail).ends_with("FAIL\n"));
    assert!(stderr(&fail).contains("deviates"));
}

#[test]
fn repeated_invocations_are_byte_identical() {
    let args = ["run", "--system", &data("chloroform.cfg"), "--prep", "knill", "--circuit", &data("grover_11.qc")];
    let a = nmrqc(&args);
    let b = nmrqc(&args);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.status.code(), Some(0));
    assert!(stdout(&a).ends_with("bits 11\n"));
}
