//! Benchmark inputs shared by the criterion targets.

use cx_core::api::Session;
use cx_core::{BasicOp, Diagram, DiagramBuilder, GateId, Trace, Value, ValueKind};

pub const CASE_MODEL: &str = include_str!("../../../fixtures/mode_selection.smv");
pub const CASE_TRACE: &str = include_str!("../../../fixtures/mode_selection.trace");
pub const CASE_FORMULA: &str = include_str!("../../../fixtures/mode_selection.ltl");

/// `n` DELAY blocks in series behind input `u`; returns the last output.
pub fn delay_chain(n: usize) -> (Diagram, GateId) {
    let mut db = DiagramBuilder::new("chain", "chain");
    let root = db.root();
    let u = db.input(root, "u", ValueKind::Bool);
    db.declare_variable("u", u);
    let mut prev = u;
    for k in 1..=n {
        let b = db.basic(root, &format!("d{k}"), BasicOp::Delay, &[ValueKind::Bool; 2], ValueKind::Bool);
        db.bind_constant(db.input_gate(b, 0), Value::Bool(false));
        db.connect(prev, db.input_gate(b, 1), false);
        prev = db.output_gate(b);
    }
    (db.finish(), prev)
}

/// Input trace for `u` toggling with period three.
pub fn toggling_input(steps: usize) -> Trace {
    let rows = (0..steps).map(|s| vec![Value::Bool(s % 3 == 0)]).collect();
    Trace::new(vec!["u".into()], rows, None).expect("well-formed trace")
}

pub fn case_session() -> Session {
    Session::load(CASE_MODEL, CASE_TRACE, Some(CASE_FORMULA.trim())).expect("fixture loads")
}
