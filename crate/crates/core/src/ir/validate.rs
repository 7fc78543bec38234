//! Structural checks for diagrams.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use super::{flatten, topo_order, BasicOp, BlockBody, BlockId, Diagram, Direction, GateId};
use crate::value::ValueKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    Structure,
    Arity,
    TypeMismatch,
    Scope,
    Driver,
    Inversion,
    Constant,
    DuplicateName,
    CombinationalCycle,
}

/// One broken invariant, naming the offending entity by key.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub subject: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.subject, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, kind: ViolationKind) -> usize {
        self.violations.iter().filter(|v| v.kind == kind).count()
    }

    fn push(&mut self, kind: ViolationKind, subject: &str, message: impl Into<String>) {
        self.violations.push(Violation {
            kind,
            subject: subject.to_string(),
            message: message.into(),
        });
    }
}

/// Checks every structural invariant of the IR; violations are returned as data.
pub fn validate_diagram(d: &Diagram) -> ValidationReport {
    let mut r = ValidationReport::default();
    check_hierarchy(d, &mut r);
    check_gates(d, &mut r);
    for (id, _) in d.blocks() {
        check_block_signature(d, id, &mut r);
    }
    let drivers_ok = check_connections(d, &mut r);
    if drivers_ok && r.is_clean() {
        if let Err(cycle) = topo_order(&flatten(d)) {
            r.push(
                ViolationKind::CombinationalCycle,
                &cycle.blocks.join(","),
                "combinational cycle not broken by a DELAY",
            );
        }
    }
    r
}

fn check_hierarchy(d: &Diagram, r: &mut ValidationReport) {
    let root = d.block(d.root());
    if root.parent.is_some() {
        r.push(ViolationKind::Structure, &root.key, "root block has a parent");
    }
    if !root.is_complex() {
        r.push(ViolationKind::Structure, &root.key, "root block must be complex");
    }
    for (id, b) in d.blocks() {
        if id == d.root() {
            continue;
        }
        match b.parent {
            None => r.push(ViolationKind::Structure, &b.key, "block is not contained in any complex block"),
            Some(p) => {
                if !d.block(p).children().contains(&id) {
                    r.push(ViolationKind::Structure, &b.key, "parent does not list block as child");
                }
            }
        }
        if !d.is_within(id, d.root()) {
            r.push(ViolationKind::Structure, &b.key, "block is not reachable from the root");
        }
    }
    for (_, b) in d.blocks() {
        let mut seen = BTreeSet::new();
        for c in b.children() {
            if !seen.insert(d.block(*c).name.as_str()) {
                r.push(
                    ViolationKind::DuplicateName,
                    &d.block(*c).key,
                    format!("duplicate block name `{}` in `{}`", d.block(*c).name, b.name),
                );
            }
        }
    }
}

fn check_gates(d: &Diagram, r: &mut ValidationReport) {
    let mut keys = BTreeSet::new();
    for (id, g) in d.gates() {
        if !keys.insert(g.key.as_str()) {
            r.push(ViolationKind::DuplicateName, &g.key, "duplicate gate id");
        }
        let owner = d.block(g.owner);
        let side = match g.direction {
            Direction::Input => &owner.inputs,
            Direction::Output => &owner.outputs,
        };
        if !side.contains(&id) {
            r.push(ViolationKind::Structure, &g.key, "gate is not listed on its owner's interface");
        }
        if let ValueKind::Int { lo, hi } = g.kind {
            if lo > hi {
                r.push(ViolationKind::TypeMismatch, &g.key, "empty integer range");
            }
        }
    }
    for (_, b) in d.blocks() {
        for side in [&b.inputs, &b.outputs] {
            let mut names = BTreeSet::new();
            for g in side {
                if !names.insert(d.gate(*g).name.as_str()) {
                    r.push(
                        ViolationKind::DuplicateName,
                        &d.gate(*g).key,
                        format!("duplicate gate name `{}` on `{}`", d.gate(*g).name, b.name),
                    );
                }
            }
        }
    }
}

fn check_block_signature(d: &Diagram, id: BlockId, r: &mut ValidationReport) {
    let b = d.block(id);
    let BlockBody::Basic { op, constants } = &b.body else {
        return;
    };
    let ins: Vec<ValueKind> = b.inputs.iter().map(|g| d.gate(*g).kind).collect();
    let n = ins.len();
    if b.outputs.len() != 1 {
        r.push(ViolationKind::Arity, &b.key, format!("{op} must have exactly one output"));
        return;
    }
    let out = d.gate(b.outputs[0]).kind;
    let mut mismatch = |msg: String| r.push(ViolationKind::TypeMismatch, &b.key, msg);
    let all_bool = ins.iter().all(|k| k.is_bool());
    let all_int = ins.iter().all(|k| k.is_int());
    let arity_ok = match op {
        BasicOp::And | BasicOp::Or => {
            if !all_bool || !out.is_bool() {
                mismatch(format!("{op} requires boolean inputs and output"));
            }
            n >= 1
        }
        BasicOp::Count => {
            if !all_bool || !out.is_int() {
                mismatch("COUNT requires boolean inputs and an integer output".into());
            }
            n >= 1
        }
        BasicOp::Iff => {
            if !all_bool || !out.is_bool() {
                mismatch("IFF requires boolean inputs and output".into());
            }
            n == 2
        }
        BasicOp::Add | BasicOp::Sub | BasicOp::Mul | BasicOp::Div => {
            if !all_int || !out.is_int() {
                mismatch(format!("{op} requires integer inputs and output"));
            }
            n == 2
        }
        BasicOp::Gt | BasicOp::Lt | BasicOp::Le | BasicOp::Ge | BasicOp::Eq => {
            if !all_int || !out.is_bool() {
                mismatch(format!("{op} requires integer inputs and a boolean output"));
            }
            n == 2
        }
        BasicOp::Assign => {
            if ins.iter().any(|k| !k.same_sort(out)) {
                mismatch("ASSIGN input and output sorts differ".into());
            }
            n == 1
        }
        BasicOp::Delay => {
            if ins.iter().any(|k| !k.same_sort(out)) {
                mismatch("DELAY inputs and output sorts differ".into());
            }
            n == 2
        }
        BasicOp::Choice => {
            for (i, k) in ins.iter().enumerate() {
                if i % 2 == 0 && !k.is_bool() {
                    mismatch(format!("CHOICE condition {} is not boolean", i / 2 + 1));
                } else if i % 2 == 1 && !k.same_sort(out) {
                    mismatch(format!("CHOICE result {} sort differs from output", i / 2 + 1));
                }
            }
            n >= 2 && n % 2 == 0
        }
    };
    if !arity_ok {
        r.push(ViolationKind::Arity, &b.key, format!("{op} cannot have {n} inputs"));
    }
    for (g, v) in constants {
        let gate = d.gate(*g);
        if gate.owner != id || gate.direction != Direction::Input {
            r.push(ViolationKind::Constant, &b.key, format!("constant bound to foreign gate {}", gate.key));
        } else if !gate.kind.contains(*v) {
            r.push(
                ViolationKind::Constant,
                &gate.key,
                format!("constant {v} outside gate kind {}", gate.kind),
            );
        }
    }
}

/// Checks connection endpoints and driver counts; returns whether every gate
/// that needs a driver has exactly one.
fn check_connections(d: &Diagram, r: &mut ValidationReport) -> bool {
    let mut incoming: BTreeMap<GateId, usize> = BTreeMap::new();
    for (_, c) in d.connections() {
        if c.from.0 >= d.gate_count() || c.to.0 >= d.gate_count() {
            r.push(ViolationKind::Structure, &c.key, "connection references a missing gate");
            continue;
        }
        *incoming.entry(c.to).or_default() += 1;
        let from = d.gate(c.from);
        let to = d.gate(c.to);
        // The complex block whose net contains the connection, seen from each end.
        let src_scope = match from.direction {
            Direction::Input if d.block(from.owner).is_complex() => Some(from.owner),
            Direction::Output => d.block(from.owner).parent,
            Direction::Input => None,
        };
        let dst_scope = match to.direction {
            Direction::Output if d.block(to.owner).is_complex() => Some(to.owner),
            Direction::Input => d.block(to.owner).parent,
            Direction::Output => None,
        };
        match (src_scope, dst_scope) {
            (Some(a), Some(b)) if a == b => {}
            _ => r.push(
                ViolationKind::Scope,
                &c.key,
                format!("connection {} -> {} crosses block boundaries", from.key, to.key),
            ),
        }
        if !from.kind.same_sort(to.kind) {
            r.push(
                ViolationKind::TypeMismatch,
                &c.key,
                format!("connection joins {} and {}", from.kind, to.kind),
            );
        }
        if c.inverted && !(from.kind.is_bool() && to.kind.is_bool()) {
            r.push(ViolationKind::Inversion, &c.key, "inverted connection on integer gates");
        }
    }
    let mut ok = true;
    for (id, g) in d.gates() {
        let owner = d.block(g.owner);
        let n = incoming.get(&id).copied().unwrap_or(0);
        let constant = owner.constant(id).is_some();
        let needed = match (owner.is_complex(), g.direction) {
            (false, Direction::Input) => n + constant as usize == 1,
            (false, Direction::Output) => n == 0,
            (true, Direction::Output) => n == 1,
            (true, Direction::Input) if g.owner == d.root() => n == 0,
            (true, Direction::Input) => n == 1,
        };
        if !needed {
            ok = false;
            r.push(
                ViolationKind::Driver,
                &g.key,
                format!(
                    "gate `{}` has {n} incoming connection(s){}",
                    d.gate_path(id),
                    if constant { " and a constant" } else { "" }
                ),
            );
        }
    }
    ok
}
