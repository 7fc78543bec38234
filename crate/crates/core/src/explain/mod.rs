//! Backward explanation of assignments.
//!
//! Starting from a target `(gate, value, step)`, the search follows each
//! gate's driver: a connection leads to the assignment at its source, a
//! basic-block output to the inputs selected by [`local_cause`], and a root
//! input or bound constant ends the path. Every `(gate, step)` pair is
//! expanded once, so the cost is linear in gates times steps.

use std::collections::{BTreeSet, HashSet};

use serde::Serialize;

use crate::ir::{flatten, Assignment, BasicOp, BlockId, ConnId, Diagram, Direction, Driver, FlatNet, GateId};
use crate::trace::ExtendedTrace;
use crate::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    /// Paths end at root inputs and constants.
    Global,
    /// Paths also end at the input interface of this complex block.
    Block(BlockId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Target {
    pub gate: GateId,
    pub step: usize,
    pub scope: Scope,
}

impl Target {
    pub fn global(gate: GateId, step: usize) -> Self {
        Target {
            gate,
            step,
            scope: Scope::Global,
        }
    }

    pub fn within(gate: GateId, step: usize, block: BlockId) -> Self {
        Target {
            gate,
            step,
            scope: Scope::Block(block),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum ExplainError {
    #[error("unknown gate `{0}`")]
    UnknownGate(String),
    #[error("step {step} outside the extended trace of length {len}")]
    TargetOutsideTrace { step: usize, len: usize },
    #[error("gate `{gate}` is not inside scope block `{block}`")]
    OutsideScope { gate: String, block: String },
}

/// The constraint that justified an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Via {
    Block(BlockId),
    Connection(ConnId),
}

/// Cause-to-effect edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub from: Assignment,
    pub to: Assignment,
    pub via: Via,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExplanationResult {
    pub target: Assignment,
    /// Every assignment on a path to the target, target included.
    pub nodes: Vec<Assignment>,
    pub edges: Vec<Edge>,
    /// Nodes where paths end: inputs and constants within the scope.
    pub terminating: Vec<Assignment>,
    /// Distinct `(gate, step)` pairs expanded.
    pub activations: usize,
}

/// One line of the terminating list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TerminatingRow {
    pub step: usize,
    pub display_step: usize,
    pub var: String,
    pub block: String,
    pub value: Value,
}

impl TerminatingRow {
    /// `displayStep varName blockName value`.
    pub fn line(&self) -> String {
        format!("{} {} {} {}", self.display_step, self.var, self.block, self.value)
    }
}

impl ExplanationResult {
    pub fn contains(&self, a: &Assignment) -> bool {
        self.nodes.binary_search(a).is_ok()
    }

    /// Terminating assignments sorted by step, block name and variable name.
    pub fn terminating_rows(&self, d: &Diagram) -> Vec<TerminatingRow> {
        let mut rows: Vec<TerminatingRow> = self
            .terminating
            .iter()
            .map(|a| TerminatingRow {
                step: a.step,
                display_step: a.step - 1,
                var: gate_var_name(d, a.gate),
                block: d.block(d.gate(a.gate).owner).name.clone(),
                value: a.value,
            })
            .collect();
        rows.sort_by(|x, y| (x.step, &x.block, &x.var).cmp(&(y.step, &y.block, &y.var)));
        rows
    }
}

/// Declared variable name of a gate, or its plain name.
pub fn gate_var_name(d: &Diagram, g: GateId) -> String {
    d.variables()
        .iter()
        .find(|(_, v)| **v == g)
        .map(|(n, _)| n.clone())
        .unwrap_or_else(|| d.gate(g).name.clone())
}

/// Input assignments that justify a basic block's output at `step`.
///
/// AND: every input when TRUE, else the FALSE inputs. OR: the dual. CHOICE:
/// the conditions up to the first satisfied one plus its result. DELAY: the
/// delayed source one step earlier, or the default at step 1. Any other
/// block: every input. Values are as consumed, after inversion.
pub fn local_cause(d: &Diagram, ext: &ExtendedTrace, block: BlockId, step: usize) -> Vec<Assignment> {
    let b = d.block(block);
    let at = |g: GateId, s: usize| Assignment {
        gate: g,
        value: ext.value(g, s),
        step: s,
    };
    let op = b.op().expect("local causes are defined for basic blocks");
    let out = ext.value(b.outputs[0], step);
    match op {
        BasicOp::And | BasicOp::Or => {
            let dominating = Value::Bool(op == BasicOp::Or);
            if out == dominating {
                b.inputs
                    .iter()
                    .filter(|g| ext.value(**g, step) == dominating)
                    .map(|g| at(*g, step))
                    .collect()
            } else {
                b.inputs.iter().map(|g| at(*g, step)).collect()
            }
        }
        BasicOp::Choice => {
            let mut out = Vec::new();
            for pair in b.inputs.chunks(2) {
                out.push(at(pair[0], step));
                if ext.value(pair[0], step) == Value::Bool(true) {
                    out.push(at(pair[1], step));
                    break;
                }
            }
            out
        }
        BasicOp::Delay if step == 1 => vec![at(b.inputs[0], 1)],
        BasicOp::Delay => vec![at(b.inputs[1], step - 1)],
        _ => b.inputs.iter().map(|g| at(*g, step)).collect(),
    }
}

/// Explains `target` against the extended trace.
pub fn explain(d: &Diagram, ext: &ExtendedTrace, target: &Target) -> Result<ExplanationResult, ExplainError> {
    explain_with(d, &flatten(d), ext, target)
}

/// Like [`explain`], reusing a flattened net.
pub fn explain_with(
    d: &Diagram,
    net: &FlatNet,
    ext: &ExtendedTrace,
    target: &Target,
) -> Result<ExplanationResult, ExplainError> {
    if target.gate.0 >= d.gate_count() {
        return Err(ExplainError::UnknownGate(format!("g{}", target.gate.0)));
    }
    if target.step < 1 || target.step > ext.len() {
        return Err(ExplainError::TargetOutsideTrace {
            step: target.step,
            len: ext.len(),
        });
    }
    if let Scope::Block(b) = target.scope {
        if !d.is_within(d.gate(target.gate).owner, b) {
            return Err(ExplainError::OutsideScope {
                gate: d.gate_path(target.gate),
                block: d.block_path(b),
            });
        }
    }
    let at = |g: GateId, s: usize| Assignment {
        gate: g,
        value: ext.value(g, s),
        step: s,
    };
    let boundary = |g: GateId| match target.scope {
        Scope::Global => false,
        Scope::Block(b) => {
            let gate = d.gate(g);
            gate.owner == b && gate.direction == Direction::Input
        }
    };
    let root = at(target.gate, target.step);
    let mut seen: HashSet<(GateId, usize)> = HashSet::new();
    let mut nodes = BTreeSet::new();
    let mut edges = BTreeSet::new();
    let mut terminating = BTreeSet::new();
    let mut work = vec![root];
    while let Some(a) = work.pop() {
        if !seen.insert((a.gate, a.step)) {
            continue;
        }
        nodes.insert(a);
        if boundary(a.gate) {
            terminating.insert(a);
            continue;
        }
        match net.driver(a.gate) {
            Driver::Free | Driver::Const(_) => {
                terminating.insert(a);
            }
            Driver::Wire { conn, from, .. } => {
                let src = at(from, a.step);
                edges.insert(Edge {
                    from: src,
                    to: a,
                    via: Via::Connection(conn),
                });
                work.push(src);
            }
            Driver::Block(i) => {
                let block = net.blocks[i].block;
                for c in local_cause(d, ext, block, a.step) {
                    edges.insert(Edge {
                        from: c,
                        to: a,
                        via: Via::Block(block),
                    });
                    work.push(c);
                }
            }
        }
    }
    Ok(ExplanationResult {
        target: root,
        activations: seen.len(),
        nodes: nodes.into_iter().collect(),
        edges: edges.into_iter().collect(),
        terminating: terminating.into_iter().collect(),
    })
}
