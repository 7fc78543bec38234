//! A loaded model, trace and formula, with the JSON payloads served by the
//! command line and the HTTP service.
//!
//! Every payload is built here and rendered by [`render`], so both front ends
//! print byte-identical documents. Steps in payloads carry both the 1-based
//! `step` and the 0-based `displayStep`; query parameters use display steps.

use serde::Serialize;
use serde_json::{json, Value as Json};

use crate::explain::{explain_with, gate_var_name, ExplainError, ExplanationResult, Target, Via};
use crate::ir::{flatten, Assignment, BlockId, Diagram, FlatNet, GateId};
use crate::ltl::{annotate_tree, evaluate, explain_formula, EvalTable, FormulaCause, LtlEvalError};
use crate::sim::{check_consistency, extend_trace, Mismatch, SimError};
use crate::smv::formula::{parse_ltl, FormulaTree, LtlError};
use crate::smv::{build_diagram, parse_model, SmvError};
use crate::trace::{declared_variables, ExtendedTrace, Trace, TraceError};
use crate::value::ValueKind;

/// Failure while loading the inputs; the CLI maps all of these to exit 3.
#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("model: {0}")]
    Model(#[from] SmvError),
    #[error("trace: {0}")]
    Trace(#[from] TraceError),
    #[error("formula: {0}")]
    Formula(#[from] LtlError),
    #[error("formula evaluation: {0}")]
    Eval(#[from] LtlEvalError),
    #[error("simulation: {0}")]
    Simulation(#[from] SimError),
}

impl LoadError {
    /// Machine-readable form, with source positions where known.
    pub fn to_json(&self) -> Json {
        let (stage, detail) = match self {
            LoadError::Model(e) => ("model", serde_json::to_value(e)),
            LoadError::Trace(e) => ("trace", Ok(json!({ "message": e.to_string() }))),
            LoadError::Formula(e) => ("formula", serde_json::to_value(e)),
            LoadError::Eval(e) => ("formula", serde_json::to_value(e)),
            LoadError::Simulation(e) => ("simulation", Ok(json!({ "message": e.to_string() }))),
        };
        json!({
            "error": self.to_string(),
            "stage": stage,
            "detail": detail.unwrap_or(Json::Null),
        })
    }
}

/// Failure of a query against a loaded session.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QueryError {
    #[error("unknown gate `{0}`")]
    UnknownGate(String),
    #[error("unknown block `{0}`")]
    UnknownBlock(String),
    #[error("display step {display_step} outside trace of length {len}")]
    StepOutOfRange { display_step: usize, len: usize },
    #[error("no formula loaded")]
    NoFormula,
    #[error(transparent)]
    Explain(#[from] ExplainError),
    #[error(transparent)]
    Eval(#[from] LtlEvalError),
}

impl QueryError {
    /// Whether the query named a gate, block or step that does not exist.
    pub fn is_not_found(&self) -> bool {
        matches!(
            self,
            QueryError::UnknownGate(_)
                | QueryError::UnknownBlock(_)
                | QueryError::StepOutOfRange { .. }
                | QueryError::Explain(ExplainError::UnknownGate(_) | ExplainError::TargetOutsideTrace { .. })
        )
    }

    pub fn kind(&self) -> &'static str {
        match self {
            QueryError::UnknownGate(_) | QueryError::Explain(ExplainError::UnknownGate(_)) => "unknownGate",
            QueryError::UnknownBlock(_) => "unknownBlock",
            QueryError::StepOutOfRange { .. } | QueryError::Explain(ExplainError::TargetOutsideTrace { .. }) => {
                "stepOutOfRange"
            }
            QueryError::NoFormula => "noFormula",
            QueryError::Explain(ExplainError::OutsideScope { .. }) => "outsideScope",
            QueryError::Eval(_) => "evaluation",
        }
    }

    pub fn to_json(&self) -> Json {
        json!({ "error": self.to_string(), "kind": self.kind() })
    }
}

/// Everything loaded at startup; immutable afterwards.
#[derive(Debug, Clone)]
pub struct Session {
    pub diagram: Diagram,
    pub net: FlatNet,
    pub declared: Vec<(String, ValueKind)>,
    pub trace: Trace,
    pub extended: ExtendedTrace,
    pub mismatches: Vec<Mismatch>,
    pub formula: Option<FormulaTree>,
    pub table: Option<EvalTable>,
}

/// Pretty-printed JSON with a trailing newline.
pub fn render(doc: &Json) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("JSON values serialize");
    s.push('\n');
    s
}

impl Session {
    /// Parses the model and trace, replays the trace and evaluates the
    /// formula if one is given.
    pub fn load(model: &str, trace: &str, formula: Option<&str>) -> Result<Session, LoadError> {
        let ast = parse_model(model)?;
        let diagram = build_diagram(&ast)?;
        let declared = declared_variables(&diagram);
        let trace = Trace::parse_auto(trace, &declared)?;
        let extended = extend_trace(&diagram, &trace, trace.len())?;
        let mismatches = check_consistency(&diagram, &trace)?;
        let (formula, table) = match formula {
            Some(text) => {
                let f = parse_ltl(text, &declared)?;
                let table = evaluate(&f, &trace)?;
                (Some(f), Some(table))
            }
            None => (None, None),
        };
        Ok(Session {
            net: flatten(&diagram),
            diagram,
            declared,
            trace,
            extended,
            mismatches,
            formula,
            table,
        })
    }

    /// Converts a 0-based display step to a 1-based step.
    pub fn step(&self, display_step: usize) -> Result<usize, QueryError> {
        if display_step < self.trace.len() {
            Ok(display_step + 1)
        } else {
            Err(QueryError::StepOutOfRange {
                display_step,
                len: self.trace.len(),
            })
        }
    }

    fn block(&self, name: &str) -> Result<BlockId, QueryError> {
        match self.diagram.find_blocks(name).as_slice() {
            [b] => Ok(*b),
            _ => Err(QueryError::UnknownBlock(name.to_string())),
        }
    }

    /// Resolves a gate. With `block`, `var` names a pin of that block;
    /// otherwise it is a declared variable (full name or unique dotted
    /// suffix), a gate path, or a gate id.
    pub fn gate(&self, var: &str, block: Option<&str>) -> Result<GateId, QueryError> {
        let d = &self.diagram;
        if let Some(b) = block {
            let b = self.block(b)?;
            let blk = d.block(b);
            return blk
                .inputs
                .iter()
                .chain(&blk.outputs)
                .copied()
                .find(|g| d.gate(*g).name == var)
                .ok_or_else(|| QueryError::UnknownGate(var.to_string()));
        }
        if let Some(g) = d.variable(var) {
            return Ok(g);
        }
        let suffix = format!(".{var}");
        let hits: Vec<GateId> = d
            .variables()
            .iter()
            .filter(|(n, _)| n.ends_with(&suffix))
            .map(|(_, g)| *g)
            .collect();
        if let [g] = hits.as_slice() {
            return Ok(*g);
        }
        d.find_gate(var)
            .ok_or_else(|| QueryError::UnknownGate(var.to_string()))
    }

    pub fn explain(
        &self,
        var: &str,
        block: Option<&str>,
        display_step: usize,
        scope: Option<&str>,
    ) -> Result<ExplanationResult, QueryError> {
        let gate = self.gate(var, block)?;
        let step = self.step(display_step)?;
        let target = match scope {
            Some(s) => Target::within(gate, step, self.block(s)?),
            None => Target::global(gate, step),
        };
        Ok(explain_with(&self.diagram, &self.net, &self.extended, &target)?)
    }

    pub fn explain_formula(&self, display_step: usize) -> Result<FormulaCause, QueryError> {
        let (f, table) = self.formula_parts()?;
        let step = self.step(display_step)?;
        Ok(explain_formula(f, &self.trace, table, step)?)
    }

    fn formula_parts(&self) -> Result<(&FormulaTree, &EvalTable), QueryError> {
        match (&self.formula, &self.table) {
            (Some(f), Some(t)) => Ok((f, t)),
            _ => Err(QueryError::NoFormula),
        }
    }

    fn assignment_json(&self, a: &Assignment) -> Json {
        let d = &self.diagram;
        json!({
            "gate": d.gate(a.gate).key,
            "var": d.gate_label(a.gate),
            "block": d.block(d.gate(a.gate).owner).key,
            "value": a.value,
            "step": a.step,
            "displayStep": a.step - 1,
        })
    }

    pub fn explanation_json(&self, r: &ExplanationResult) -> Json {
        let d = &self.diagram;
        let edges: Vec<Json> = r
            .edges
            .iter()
            .map(|e| {
                let via = match e.via {
                    Via::Block(b) => json!({ "kind": "block", "id": d.block(b).key, "name": d.block(b).name }),
                    Via::Connection(c) => json!({
                        "kind": "connection",
                        "id": d.connection(c).key,
                        "inverted": d.connection(c).inverted,
                    }),
                };
                json!({
                    "from": self.assignment_json(&e.from),
                    "to": self.assignment_json(&e.to),
                    "via": via,
                })
            })
            .collect();
        let rows = r.terminating_rows(d);
        let mut term: Vec<&Assignment> = r.terminating.iter().collect();
        term.sort_by_key(|a| {
            (
                a.step,
                d.block(d.gate(a.gate).owner).name.clone(),
                gate_var_name(d, a.gate),
            )
        });
        json!({
            "target": self.assignment_json(&r.target),
            "nodes": r.nodes.iter().map(|a| self.assignment_json(a)).collect::<Vec<_>>(),
            "edges": edges,
            "terminating": term.iter().map(|a| self.assignment_json(a)).collect::<Vec<_>>(),
            "terminatingLines": rows.iter().map(|r| r.line()).collect::<Vec<_>>(),
            "activations": r.activations,
        })
    }

    /// The terminating list, one `displayStep varName blockName value` line each.
    pub fn terminating_text(&self, r: &ExplanationResult) -> String {
        r.terminating_rows(&self.diagram)
            .iter()
            .map(|row| row.line() + "\n")
            .collect()
    }

    pub fn formula_tree_json(&self, display_step: usize) -> Result<Json, QueryError> {
        let (f, table) = self.formula_parts()?;
        let step = self.step(display_step)?;
        Ok(json!({
            "formula": f.to_string(),
            "step": step,
            "displayStep": display_step,
            "root": f.root(),
            "nodes": annotate_tree(f, table, step),
        }))
    }

    pub fn formula_cause_json(&self, cause: &FormulaCause) -> Result<Json, QueryError> {
        let f = self.formula_parts()?.0;
        let assignments: Vec<Json> = cause
            .assignments
            .iter()
            .map(|a| {
                json!({
                    "var": a.var,
                    "value": a.value,
                    "step": a.step,
                    "displayStep": a.step - 1,
                })
            })
            .collect();
        Ok(json!({
            "formula": f.to_string(),
            "step": cause.step,
            "displayStep": cause.step - 1,
            "value": cause.value,
            "assignments": assignments,
            "contributions": cause.contributions,
            "tree": self.formula_tree_json(cause.step - 1)?,
        }))
    }

    pub fn diagram_json(&self) -> Json {
        serde_json::to_value(self.diagram.to_document()).expect("document serializes")
    }

    pub fn trace_json(&self) -> Json {
        let native = self.trace.to_native();
        json!({
            "length": native.length,
            "loopStart": native.loop_start,
            "displayLoopStart": native.loop_start.map(|j| j - 1),
            "variables": self.declared.iter().map(|(n, k)| json!({ "name": n, "valueKind": k })).collect::<Vec<_>>(),
            "states": native.states,
        })
    }

    /// Gate values for steps `1..=up_to`; the default is the whole trace.
    pub fn extended_json(&self, up_to: Option<usize>) -> Result<Json, QueryError> {
        let len = self.extended.len();
        let up_to = up_to.unwrap_or(len);
        if up_to > len {
            return Err(QueryError::StepOutOfRange {
                display_step: up_to,
                len,
            });
        }
        let d = &self.diagram;
        let gates: Vec<Json> = d
            .gates()
            .map(|(g, gate)| json!({ "id": gate.key, "path": d.gate_path(g) }))
            .collect();
        let steps: Vec<Json> = (1..=up_to)
            .map(|s| {
                json!({
                    "step": s,
                    "displayStep": s - 1,
                    "values": self.extended.values[s - 1],
                })
            })
            .collect();
        Ok(json!({ "upTo": up_to, "gates": gates, "steps": steps }))
    }

    /// Summary printed by `check`.
    pub fn check_json(&self) -> Json {
        let formula = match (&self.formula, &self.table) {
            (Some(f), Some(t)) => json!({
                "text": f.to_string(),
                "value": t.value(f.root(), 1),
                "step": 1,
                "displayStep": 0,
            }),
            _ => Json::Null,
        };
        json!({
            "variables": self.declared.len(),
            "blocks": self.diagram.block_count(),
            "basicBlocks": self.diagram.basic_block_count(),
            "gates": self.diagram.gate_count(),
            "length": self.trace.len(),
            "loopStart": self.trace.loop_start(),
            "consistent": self.mismatches.is_empty(),
            "mismatches": self.mismatches,
            "formula": formula,
        })
    }

    pub fn health_json(&self) -> Json {
        json!({
            "status": "ok",
            "length": self.trace.len(),
            "formula": self.formula.as_ref().map(|f| f.to_string()),
        })
    }
}

/// Request body of `POST /api/explain`.
#[derive(Debug, Clone, PartialEq, Eq, serde::Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExplainRequest {
    pub var: String,
    #[serde(default)]
    pub block: Option<String>,
    /// Display step (0-based).
    pub step: usize,
    #[serde(default)]
    pub scope: Option<String>,
    #[serde(default, rename = "terminatingOnly")]
    pub terminating_only: bool,
}

/// Request body of `POST /api/explain-formula`.
#[derive(Debug, Clone, Default, PartialEq, Eq, serde::Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExplainFormulaRequest {
    /// Display step (0-based); defaults to the first step.
    #[serde(default)]
    pub step: usize,
}

impl Session {
    /// Full response for an explain request.
    pub fn explain_request(&self, req: &ExplainRequest) -> Result<Json, QueryError> {
        let r = self.explain(&req.var, req.block.as_deref(), req.step, req.scope.as_deref())?;
        Ok(if req.terminating_only {
            json!({ "lines": r.terminating_rows(&self.diagram).iter().map(|r| r.line()).collect::<Vec<_>>() })
        } else {
            self.explanation_json(&r)
        })
    }

    pub fn explain_formula_request(&self, req: &ExplainFormulaRequest) -> Result<Json, QueryError> {
        let cause = self.explain_formula(req.step)?;
        self.formula_cause_json(&cause)
    }
}
