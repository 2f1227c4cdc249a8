//! Parser, validator and builder tests against the shipped netlists.

use num_complex::Complex64;
use qnet::netdsl::{build_graph, parse_dmatrix, parse_dnum, parse_network, ErrorCode};
use qnet::{DMatrix, DNum, Error};

const FEEDBACK_LOOP: &str = include_str!("../../../netlists/feedback_loop.qn");
const TWO_BATH: &str = include_str!("../../../netlists/two_bath.qn");
const SPLITTER_FEEDBACK: &str = include_str!("../../../netlists/splitter_feedback.qn");
const CAVITY: &str = include_str!("../../../netlists/cavity.qn");
const TWOBATH_EQ: &str = include_str!("../../../netlists/twobath_eq.qn");
const TWOBATH_NEQ: &str = include_str!("../../../netlists/twobath_neq.qn");
const ACTIVE: &str = include_str!("../../../netlists/active.qn");
const IDENTITY: &str = include_str!("../../../netlists/identity.qn");

fn all_netlists() -> Vec<(&'static str, &'static str)> {
    vec![
        ("feedback_loop", FEEDBACK_LOOP),
        ("two_bath", TWO_BATH),
        ("splitter_feedback", SPLITTER_FEEDBACK),
        ("cavity", CAVITY),
        ("twobath_eq", TWOBATH_EQ),
        ("twobath_neq", TWOBATH_NEQ),
        ("active", ACTIVE),
        ("identity", IDENTITY),
    ]
}

#[test]
fn smallest_system_file() {
    let spec = parse_network("system cav modes 1 P [d(0,1,0,0)]").unwrap();
    assert_eq!(spec.systems.len(), 1);
    assert_eq!(spec.systems[0].modes, 1);
    assert!(spec.systems[0].p[(0, 0)].approx_eq(&DNum::I, 1e-15));
    assert!(spec.queries.is_empty());
}

#[test]
fn literal_parsers() {
    let p = parse_dnum("d(1,-2,3.5,4e-1)").unwrap();
    assert!(p.approx_eq(&DNum::new(1.0, -2.0, 3.5, 0.4), 1e-15));
    let q = parse_dnum("c(1,2,3,4)").unwrap();
    assert!(q.approx_eq(
        &DNum::from_complex(Complex64::new(1.0, 2.0), Complex64::new(3.0, 4.0)),
        1e-15
    ));
    let m = parse_dmatrix("[d(1,0,0,0), d(0,1,0,0); d(0,0,1,0), d(0,0,0,1)]").unwrap();
    assert_eq!(m.shape(), (2, 2));
    assert!(m[(1, 1)].approx_eq(&DNum::K, 1e-15));

    assert!(parse_dnum("d(1,2,3)").is_err());
    assert!(parse_dmatrix("[d(1,0,0,0); d(0,1,0,0), d(0,0,1,0)]").is_err());
    assert!(parse_dmatrix("[d(1,0,0,0) trailing]").is_err());
}

#[test]
fn splitter_feedback_has_two_forward_paths() {
    let spec = parse_network(SPLITTER_FEEDBACK).unwrap();
    let net = build_graph(&spec).unwrap();
    let b1 = net.graph.node("b1").unwrap();
    let c1 = net.graph.node("c1").unwrap();
    let paths = net.graph.enumerate_forward_paths(b1, c1);
    assert_eq!(paths.len(), 2);
    let names: Vec<Vec<&str>> = paths
        .iter()
        .map(|p| p.iter().map(|&n| net.graph.node_name(n)).collect())
        .collect();
    assert!(names.contains(&vec!["b1", "c1"]));
    assert!(names.contains(&vec!["b1", "c2", "b2", "c1"]));
}

#[test]
fn feedback_loop_rebuilds_documented_gain() {
    let spec = parse_network(FEEDBACK_LOOP).unwrap();
    let net = build_graph(&spec).unwrap();
    let (from, to) = net.queries[0];
    let s = Complex64::new(0.7, 1.1);
    let solve = net.graph.gain_direct_solve(from, to).unwrap().eval(s).unwrap();
    let riegle = net.graph.gain_riegle(from, to).unwrap().eval(s).unwrap();
    assert!(solve[(0, 0)].approx_eq(&DNum::real(4.0), 1e-12));
    assert!(riegle[(0, 0)].approx_eq(&DNum::real(4.0), 1e-12));
}

#[test]
fn two_bath_routes_agree() {
    let spec = parse_network(TWO_BATH).unwrap();
    let net = build_graph(&spec).unwrap();
    let (from, to) = net.queries[0];
    let solve = net.graph.gain_direct_solve(from, to).unwrap();
    let riegle = net.graph.gain_riegle(from, to).unwrap();
    for i in 0..10 {
        let s = Complex64::new(0.4 + 0.17 * i as f64, -1.5 + 0.3 * i as f64);
        let a = solve.eval(s).unwrap();
        let b = riegle.eval(s).unwrap();
        assert!(a.approx_eq(&b, 1e-10));
    }
}

#[test]
fn empty_arc_set_gives_zero_gain() {
    let spec = parse_network("node a width 1\nnode b width 1\nquery gain from a to b").unwrap();
    let net = build_graph(&spec).unwrap();
    let (from, to) = net.queries[0];
    let v = net
        .graph
        .gain_riegle(from, to)
        .unwrap()
        .eval(Complex64::new(1.0, 0.0))
        .unwrap();
    assert!(v.approx_eq(&DMatrix::zeros(1, 1), 1e-15));
}

#[test]
fn unresolved_io_reference_with_span() {
    let text = "node a width 1\nnode b width 1\narc a -> b gain io(missing)";
    let err = parse_network(text).unwrap_err();
    assert_eq!(err.code, ErrorCode::UnresolvedIdentifier);
    assert_eq!(err.span.line, 3);
    assert_eq!(err.span.col, 17);
}

#[test]
fn error_catalogue() {
    // (text, code, line, col)
    let cases: Vec<(&str, ErrorCode, usize, usize)> = vec![
        ("systm cav modes 1 P [d(0,1,0,0)]", ErrorCode::Syntax, 1, 1),
        ("system cav modes 2 P [d(0,1,0,0)]", ErrorCode::ShapeMismatch, 1, 1),
        ("system cav modes 1 P [d(1,0,0,0)]", ErrorCode::ShapeMismatch, 1, 1),
        ("kernel k lorentzian kappa=0 gamma=2", ErrorCode::InvalidNumber, 1, 1),
        ("node a width 0", ErrorCode::InvalidNumber, 1, 14),
        ("node a width 1\nnode a width 1", ErrorCode::DuplicateIdentifier, 2, 1),
        ("delay d tau=-1", ErrorCode::InvalidNumber, 1, 13),
        ("query gain from a to b", ErrorCode::UnresolvedIdentifier, 1, 17),
        (
            "node a width 1\nnode b width 2\narc a -> b gain [d(1,0,0,0)]",
            ErrorCode::ShapeMismatch,
            3,
            17,
        ),
        ("node a width 1\nnode b width 1\narc a -> b gain", ErrorCode::Syntax, 3, 16),
    ];
    for (text, code, line, col) in cases {
        let err = parse_network(text).unwrap_err();
        assert_eq!(err.code, code, "wrong code for: {text}\n  got {err}");
        assert_eq!(err.span.line, line, "wrong line for: {text}\n  got {err}");
        assert_eq!(err.span.col, col, "wrong column for: {text}\n  got {err}");
    }
}

#[test]
fn build_reports_non_passive_splitter() {
    let text = "splitter s t1=[d(2,0,0,0)] r1=[d(0,0,0,0)] r2=[d(0,0,0,0)] t2=[d(1,0,0,0)]";
    let spec = parse_network(text).unwrap();
    match build_graph(&spec) {
        Err(Error::Parse(p)) => {
            assert_eq!(p.code, ErrorCode::ShapeMismatch);
            assert!(p.message.contains("not passive"), "message: {}", p.message);
        }
        other => panic!("expected a spanned build error, got {other:?}"),
    }
}

#[test]
fn round_trip_is_structural_identity() {
    for (name, text) in all_netlists() {
        let spec = parse_network(text).unwrap_or_else(|e| panic!("{name}: {e}"));
        let canon = spec.to_text();
        let spec2 = parse_network(&canon).unwrap_or_else(|e| panic!("{name} reparse: {e}"));
        assert!(spec.structurally_eq(&spec2), "{name} round trip changed");
        assert_eq!(canon, spec2.to_text(), "{name} canonical form unstable");
    }
}

#[test]
fn comments_and_blank_lines_are_skipped() {
    let text = "# header\n\n   \nnode a width 1 # trailing comment\nnode b width 1\narc a -> b gain [d(1,0,0,0)]\n";
    let spec = parse_network(text).unwrap();
    assert_eq!(spec.nodes.len(), 2);
    assert_eq!(spec.arcs.len(), 1);
}
