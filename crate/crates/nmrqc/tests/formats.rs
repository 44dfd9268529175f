//! Round trips and error reporting for the three text formats.

use nmrqc::circuit::{parse_circuit, print_circuit, CircuitFile};
use nmrqc::config::{parse_system, print_system};
use nmrqc::program::{parse_program, print_program};
use nmrqc::text::sig6;
use nmrqc_core::compiler::{Circuit, Gate, OracleKind};
use nmrqc_core::pulse::{Phase, PulseElement, PulseProgram};
use nmrqc_core::SpinSystem;
use proptest::prelude::*;

fn names(n: usize) -> Vec<String> {
    (0..n).map(|k| format!("S{k}")).collect()
}

fn phase() -> impl Strategy<Value = Phase> {
    prop_oneof![
        Just(Phase::X),
        Just(Phase::Y),
        Just(Phase::MINUS_X),
        Just(Phase::MINUS_Y),
        Just(Phase::Z),
        (1.0f64..359.0).prop_map(Phase::Angle),
    ]
}

fn distinct(n: usize, k: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle().prop_map(move |v| v[..k].to_vec())
}

fn gate(n: usize) -> BoxedStrategy<Gate> {
    let one = 0..n;
    let mut options: Vec<BoxedStrategy<Gate>> = vec![
        one.clone().prop_map(Gate::H).boxed(),
        one.clone().prop_map(Gate::PseudoH).boxed(),
        one.clone().prop_map(Gate::PseudoHInv).boxed(),
        one.clone().prop_map(Gate::Not).boxed(),
        (one, -720.0f64..720.0, phase())
            .prop_map(|(qubit, angle_deg, phase)| Gate::Rotate { qubit, angle_deg, phase })
            .boxed(),
    ];
    if n >= 2 {
        options.push(distinct(n, 2).prop_map(|q| Gate::CNot { control: q[0], target: q[1] }).boxed());
        options.push(distinct(n, 2).prop_map(|q| Gate::Swap(q[0], q[1])).boxed());
        // whole degrees print exactly, so the value survives the round trip
        options.push(
            (distinct(n, 2), -360i32..360)
                .prop_map(|(q, d)| Gate::ControlledPhase { q1: q[0], q2: q[1], phi: (d as f64).to_radians() })
                .boxed(),
        );
        options.push(
            (1..=n)
                .prop_flat_map(move |k| (distinct(n, k), prop::collection::vec(any::<bool>(), 1 << k), any::<bool>()))
                .prop_map(|(qubits, table, flip)| oracle(qubits, table, flip))
                .boxed(),
        );
    }
    if n >= 3 {
        options.push(distinct(n, 3).prop_map(|q| Gate::Toffoli { c1: q[0], c2: q[1], target: q[2] }).boxed());
    }
    prop::strategy::Union::new(options).boxed()
}

fn oracle(qubits: Vec<usize>, table: Vec<bool>, bit_flip: bool) -> Gate {
    let k = qubits.len();
    let kind = if bit_flip && k >= 2 { OracleKind::BitFlip(table[..1 << (k - 1)].to_vec()) } else { OracleKind::Phase(table) };
    let table = match &kind {
        OracleKind::Phase(t) | OracleKind::BitFlip(t) => t,
    };
    let label = format!("f{}", table.iter().map(|&b| if b { '1' } else { '0' }).collect::<String>());
    Gate::Oracle { label, qubits, kind }
}

fn circuit_file() -> impl Strategy<Value = CircuitFile> {
    (1usize..=4).prop_flat_map(|n| {
        (
            prop::collection::vec(gate(n), 0..10),
            prop::option::of(prop::sample::subsequence((0..n).collect::<Vec<_>>(), 1..=n)),
        )
            .prop_map(move |(gates, measure)| CircuitFile { circuit: Circuit { n_qubits: n, gates }, measure })
    })
}

fn system() -> impl Strategy<Value = SpinSystem> {
    (1usize..=5).prop_flat_map(|n| {
        (
            prop::collection::vec(-2000.0f64..2000.0, n),
            prop::collection::vec(prop::sample::select(vec!["1H", "13C", "15N", "19F"]), n),
            prop::collection::vec(prop::option::of(-300.0f64..300.0), n * (n - 1) / 2),
        )
            .prop_map(move |(offsets, species, js)| {
                let species = species.into_iter().map(String::from).collect();
                let mut s = SpinSystem::new(offsets, species).unwrap().with_names(names(n)).unwrap();
                let pairs = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)));
                for ((i, j), hz) in pairs.zip(js) {
                    if let Some(hz) = hz.filter(|h| *h != 0.0) {
                        s.set_coupling(i, j, hz).unwrap();
                    }
                }
                s
            })
    })
}

fn element(n: usize) -> BoxedStrategy<PulseElement> {
    let mut options: Vec<BoxedStrategy<PulseElement>> = vec![
        (prop::sample::subsequence((0..n).collect::<Vec<_>>(), 1..=n), -720.0f64..720.0, phase())
            .prop_map(|(t, a, p)| PulseElement::pulse(&t, a, p))
            .boxed(),
        (0.0f64..1.0).prop_map(PulseElement::delay).boxed(),
        (0..n, -720.0f64..720.0).prop_map(|(k, a)| PulseElement::frame(k, a)).boxed(),
        prop::option::of(any::<bool>()).prop_map(|keep_zq| PulseElement::Crush { keep_zq }).boxed(),
        prop::collection::vec((1i32..=4, any::<bool>()).prop_map(|(o, neg)| if neg { -o } else { o }), 1..4)
            .prop_map(|orders| PulseElement::MQFilter { orders })
            .boxed(),
    ];
    if n >= 2 {
        options.push((distinct(n, 2), 0.0f64..3.0).prop_map(|(p, f)| PulseElement::couple(p[0], p[1], f)).boxed());
    }
    prop::strategy::Union::new(options).boxed()
}

fn program() -> impl Strategy<Value = (usize, PulseProgram)> {
    (1usize..=4).prop_flat_map(|n| {
        prop::collection::vec(element(n), 0..12).prop_map(move |e| (n, PulseProgram::from_elements(e)))
    })
}

proptest! {
    #[test]
    fn circuits_round_trip(file in circuit_file()) {
        let names = names(file.circuit.n_qubits);
        let text = print_circuit(&file, &names);
        let parsed = parse_circuit(&text, &names).unwrap();
        prop_assert_eq!(&parsed, &file);
        prop_assert_eq!(print_circuit(&parsed, &names), text);
    }

    #[test]
    fn systems_round_trip(s in system()) {
        let text = print_system(&s);
        let parsed = parse_system(&text).unwrap();
        prop_assert_eq!(&parsed, &s);
        prop_assert_eq!(print_system(&parsed), text);
    }

    #[test]
    fn pulse_programs_round_trip((n, p) in program()) {
        let text = print_program(&p);
        let parsed = parse_program(&text, &names(n)).unwrap();
        prop_assert_eq!(&parsed, &p);
        prop_assert_eq!(print_program(&parsed), text);
    }

    #[test]
    fn arbitrary_controlled_phases_print_canonically(q in distinct(2, 2), phi in -10.0f64..10.0) {
        let file = CircuitFile {
            circuit: Circuit { n_qubits: 2, gates: vec![Gate::ControlledPhase { q1: q[0], q2: q[1], phi }] },
            measure: None,
        };
        let text = print_circuit(&file, &names(2));
        let again = parse_circuit(&text, &names(2)).unwrap();
        prop_assert_eq!(print_circuit(&again, &names(2)), text);
        match &again.circuit.gates[0] {
            Gate::ControlledPhase { phi: back, .. } => prop_assert!((back - phi).abs() < 1e-10),
            other => prop_assert!(false, "unexpected gate {:?}", other),
        }
    }

    #[test]
    fn numbers_are_locale_independent(x in prop::num::f64::NORMAL | prop::num::f64::ZERO) {
        let s = sig6(x);
        prop_assert!(!s.contains(','));
        let back: f64 = s.parse().unwrap();
        prop_assert!((back - x).abs() <= 1e-5 * x.abs());
    }

    #[test]
    fn parsers_never_panic(text in "[ -~\n]{0,200}") {
        let n = names(3);
        let _ = parse_system(&text);
        let _ = parse_circuit(&text, &n);
        let _ = parse_program(&text, &n);
    }
}

#[test]
fn shipped_data_files_parse() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let cytosine = parse_system(&std::fs::read_to_string(dir.join("cytosine.cfg")).unwrap()).unwrap();
    assert_eq!(cytosine, SpinSystem::cytosine().with_names(vec!["H5".into(), "H6".into()]).unwrap());
    let chloroform = parse_system(&std::fs::read_to_string(dir.join("chloroform.cfg")).unwrap()).unwrap();
    assert!(chloroform.is_heteronuclear());
    for f in ["00", "01", "10", "11"] {
        let text = std::fs::read_to_string(dir.join(format!("deutsch_f{f}.qc"))).unwrap();
        let file = parse_circuit(&text, cytosine.names()).unwrap();
        assert_eq!(file.circuit.gates.len(), 6);
        assert_eq!(file.measure, Some(vec![0]));
    }
    let echo = std::fs::read_to_string(dir.join("echo.pulse")).unwrap();
    assert_eq!(parse_program(&echo, cytosine.names()).unwrap().len(), 2);
}

#[test]
fn errors_point_at_the_offending_token() {
    let n = names(2);
    let e = parse_circuit("H S0\nCNOT S0 S3\n", &n).unwrap_err();
    assert_eq!((e.line, e.column), (2, 9));
    let e = parse_circuit("CNTO S0 S1", &n).unwrap_err();
    assert!(e.message.contains("CNOT"), "{e}");
    let e = parse_circuit("CNOT S0", &n).unwrap_err();
    assert_eq!(e.line, 1);
    let e = parse_system("SPIN a 1H 0\n\nJ a b 7").unwrap_err();
    assert_eq!((e.line, e.column), (3, 5));
    assert_eq!(parse_system("# nothing\n").unwrap_err().message, "no spins");
    let e = parse_program("PULSE targets=1 angle=ninety phase=x", &n).unwrap_err();
    assert_eq!((e.line, e.column), (1, 17));
    assert_eq!(e.to_string(), "line 1, column 17: malformed angle \"ninety\"");
}
