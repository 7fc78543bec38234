//! Counterexample traces: parsing, export and the extended (simulated) trace.

pub mod sim;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::ir::{Diagram, GateId};
use crate::value::{Value, ValueKind};

pub use sim::{check_consistency, extend_trace, Mismatch, SimError, Simulator};

/// A finite counterexample with an optional loop-back point.
///
/// Steps are 1-based: `states[0]` is step 1. `loop_start`, when present, is the
/// 1-based step the last state loops back to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    vars: Vec<String>,
    index: HashMap<String, usize>,
    states: Vec<Vec<Value>>,
    loop_start: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TraceError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown variable `{name}`")]
    UnknownVariable { line: usize, name: String },
    #[error("variable `{0}` has no value in the first state")]
    MissingInitialValue(String),
    #[error("line {line}: value {value} of `{name}` does not fit type {kind}")]
    TypeMismatch {
        line: usize,
        name: String,
        value: Value,
        kind: ValueKind,
    },
    #[error("schema error: {0}")]
    Schema(String),
}

impl TraceError {
    fn schema(msg: impl Into<String>) -> Self {
        TraceError::Schema(msg.into())
    }
}

/// Native JSON document: `{ "length", "loopStart", "states": [ {var: value} ] }`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct NativeTrace {
    pub length: usize,
    #[serde(default)]
    pub loop_start: Option<usize>,
    pub states: Vec<BTreeMap<String, Value>>,
}

impl Trace {
    /// Builds a trace; every state must list one value per variable.
    pub fn new(
        vars: Vec<String>,
        states: Vec<Vec<Value>>,
        loop_start: Option<usize>,
    ) -> Result<Trace, TraceError> {
        if states.is_empty() {
            return Err(TraceError::schema("trace has no states"));
        }
        if let Some(j) = loop_start {
            if j < 1 || j > states.len() {
                return Err(TraceError::schema(format!(
                    "loopStart {j} outside [1, {}]",
                    states.len()
                )));
            }
        }
        if let Some(s) = states.iter().position(|s| s.len() != vars.len()) {
            return Err(TraceError::schema(format!(
                "state {} has {} values for {} variables",
                s + 1,
                states[s].len(),
                vars.len()
            )));
        }
        let mut index = HashMap::new();
        for (i, v) in vars.iter().enumerate() {
            if index.insert(v.clone(), i).is_some() {
                return Err(TraceError::schema(format!("duplicate variable `{v}`")));
            }
        }
        Ok(Trace {
            vars,
            index,
            states,
            loop_start,
        })
    }

    /// Trace length `l`.
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn loop_start(&self) -> Option<usize> {
        self.loop_start
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    /// Value of `var` at 1-based `step`.
    pub fn value(&self, var: &str, step: usize) -> Option<Value> {
        let i = self.var_index(var)?;
        self.states.get(step.checked_sub(1)?).map(|s| s[i])
    }

    pub fn value_at(&self, var: usize, step: usize) -> Value {
        self.states[step - 1][var]
    }

    pub fn state(&self, step: usize) -> &[Value] {
        &self.states[step - 1]
    }

    /// Replaces one value; used to probe edited traces.
    pub fn set(&mut self, var: &str, step: usize, value: Value) -> bool {
        match (self.var_index(var), self.states.get_mut(step.wrapping_sub(1))) {
            (Some(i), Some(s)) => {
                s[i] = value;
                true
            }
            _ => false,
        }
    }

    /// Lasso successor of a 1-based position.
    pub fn successor(&self, j: usize) -> Option<usize> {
        if j < self.len() {
            Some(j + 1)
        } else {
            self.loop_start
        }
    }

    /// Parses the textual trace format printed by NuSMV's `show_traces`.
    ///
    /// Variables omitted from a state keep their previous value. Values in an
    /// `-> Input: k.j <-` block belong to state `j`.
    pub fn parse_nusmv(text: &str, declared: &[(String, ValueKind)]) -> Result<Trace, TraceError> {
        let kinds: HashMap<&str, (usize, ValueKind)> = declared
            .iter()
            .enumerate()
            .map(|(i, (n, k))| (n.as_str(), (i, *k)))
            .collect();
        let mut states: Vec<Vec<Option<Value>>> = Vec::new();
        // Input values seen since the last state header.
        let mut pending: Vec<(usize, Value)> = Vec::new();
        let mut in_input = false;
        let mut loop_start = None;
        let mut loop_pending = false;
        let mut started = false;
        for (ln, raw) in text.lines().enumerate() {
            let line_no = ln + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with("***") {
                continue;
            }
            if let Some(comment) = line.strip_prefix("--") {
                if comment.trim().eq_ignore_ascii_case("loop starts here") {
                    loop_pending = true;
                }
                continue;
            }
            if line.starts_with("Trace Description") || line.starts_with("Trace Type") {
                continue;
            }
            if let Some(header) = line.strip_prefix("->") {
                let header = header.trim();
                let header = header.strip_suffix("<-").map(str::trim).ok_or_else(|| {
                    TraceError::Syntax {
                        line: line_no,
                        message: "expected `<-` at end of header".into(),
                    }
                })?;
                let (word, num) = header.split_once(':').ok_or_else(|| TraceError::Syntax {
                    line: line_no,
                    message: format!("malformed header `{header}`"),
                })?;
                let num = num.trim();
                let well_formed = num
                    .split_once('.')
                    .map(|(a, b)| a.parse::<usize>().is_ok() && b.parse::<usize>().is_ok())
                    .unwrap_or(false);
                if !well_formed {
                    return Err(TraceError::Syntax {
                        line: line_no,
                        message: format!("expected `k.j` step number, found `{num}`"),
                    });
                }
                match word.trim() {
                    "State" => {
                        let mut state = match states.last() {
                            Some(prev) => prev.clone(),
                            None => vec![None; declared.len()],
                        };
                        for (i, v) in pending.drain(..) {
                            state[i] = Some(v);
                        }
                        states.push(state);
                        if loop_pending {
                            loop_start = Some(states.len());
                            loop_pending = false;
                        }
                        in_input = false;
                        started = true;
                    }
                    "Input" => {
                        in_input = true;
                        started = true;
                    }
                    other => {
                        return Err(TraceError::Syntax {
                            line: line_no,
                            message: format!("unknown header kind `{other}`"),
                        })
                    }
                }
                continue;
            }
            let (name, value) = line.split_once('=').ok_or_else(|| TraceError::Syntax {
                line: line_no,
                message: format!("expected `name = value`, found `{line}`"),
            })?;
            if !started {
                return Err(TraceError::Syntax {
                    line: line_no,
                    message: "assignment before the first state header".into(),
                });
            }
            let name = name.trim();
            let value_text = value.trim();
            let (i, kind) = *kinds.get(name).ok_or_else(|| TraceError::UnknownVariable {
                line: line_no,
                name: name.to_string(),
            })?;
            let value = Value::parse_smv(value_text).ok_or_else(|| TraceError::Syntax {
                line: line_no,
                message: format!("cannot parse value `{value_text}`"),
            })?;
            if !kind.contains(value) {
                return Err(TraceError::TypeMismatch {
                    line: line_no,
                    name: name.to_string(),
                    value,
                    kind,
                });
            }
            if in_input {
                pending.push((i, value));
            } else {
                states.last_mut().expect("state header seen")[i] = Some(value);
            }
        }
        if states.is_empty() {
            return Err(TraceError::Syntax {
                line: text.lines().count(),
                message: "no `-> State: k.j <-` block".into(),
            });
        }
        if loop_pending {
            return Err(TraceError::Syntax {
                line: text.lines().count(),
                message: "loop marker is not followed by a state".into(),
            });
        }
        if let Some(i) = states[0].iter().position(|v| v.is_none()) {
            return Err(TraceError::MissingInitialValue(declared[i].0.clone()));
        }
        let states = states
            .into_iter()
            .map(|s| s.into_iter().map(|v| v.expect("carried forward")).collect())
            .collect();
        Trace::new(
            declared.iter().map(|(n, _)| n.clone()).collect(),
            states,
            loop_start,
        )
    }

    /// Reads the native JSON format; inverse of [`Trace::to_native`].
    pub fn parse_native(text: &str, declared: &[(String, ValueKind)]) -> Result<Trace, TraceError> {
        let doc: NativeTrace =
            serde_json::from_str(text).map_err(|e| TraceError::schema(e.to_string()))?;
        Trace::from_native(&doc, declared)
    }

    pub fn from_native(doc: &NativeTrace, declared: &[(String, ValueKind)]) -> Result<Trace, TraceError> {
        if doc.length != doc.states.len() {
            return Err(TraceError::schema(format!(
                "length {} but {} states",
                doc.length,
                doc.states.len()
            )));
        }
        let mut states = Vec::with_capacity(doc.states.len());
        for (s, st) in doc.states.iter().enumerate() {
            if let Some(unknown) = st.keys().find(|k| !declared.iter().any(|(n, _)| n == *k)) {
                return Err(TraceError::schema(format!(
                    "state {}: unknown variable `{unknown}`",
                    s + 1
                )));
            }
            let mut row = Vec::with_capacity(declared.len());
            for (name, kind) in declared {
                let v = *st.get(name).ok_or_else(|| {
                    TraceError::schema(format!("state {}: missing variable `{name}`", s + 1))
                })?;
                if !kind.contains(v) {
                    return Err(TraceError::schema(format!(
                        "state {}: value {v} of `{name}` does not fit type {kind}",
                        s + 1
                    )));
                }
                row.push(v);
            }
            states.push(row);
        }
        Trace::new(
            declared.iter().map(|(n, _)| n.clone()).collect(),
            states,
            doc.loop_start,
        )
    }

    pub fn to_native(&self) -> NativeTrace {
        NativeTrace {
            length: self.len(),
            loop_start: self.loop_start,
            states: self
                .states
                .iter()
                .map(|s| self.vars.iter().cloned().zip(s.iter().copied()).collect())
                .collect(),
        }
    }

    /// Picks the parser by content: a leading `{` selects the native format.
    pub fn parse_auto(text: &str, declared: &[(String, ValueKind)]) -> Result<Trace, TraceError> {
        if text.trim_start().starts_with('{') {
            Trace::parse_native(text, declared)
        } else {
            Trace::parse_nusmv(text, declared)
        }
    }

    /// Renders the trace in NuSMV's textual format with every variable listed.
    pub fn to_nusmv(&self) -> String {
        let mut out = String::from("Trace Type: Counterexample\n");
        for (s, state) in self.states.iter().enumerate() {
            if self.loop_start == Some(s + 1) {
                out.push_str("  -- Loop starts here\n");
            }
            out.push_str(&format!("  -> State: 1.{} <-\n", s + 1));
            for (n, v) in self.vars.iter().zip(state) {
                out.push_str(&format!("    {n} = {v}\n"));
            }
        }
        out
    }
}

/// Declared variables of a diagram with their kinds, in name order.
pub fn declared_variables(d: &Diagram) -> Vec<(String, ValueKind)> {
    d.variables()
        .iter()
        .map(|(n, g)| (n.clone(), d.gate(*g).kind))
        .collect()
}

/// A trace together with simulated values of every gate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtendedTrace {
    pub base: Trace,
    /// `values[s - 1][g]` is the value of gate `g` at step `s`.
    pub values: Vec<Vec<Value>>,
}

impl ExtendedTrace {
    /// Number of simulated steps.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, gate: GateId, step: usize) -> Value {
        self.values[step - 1][gate.0]
    }

    pub fn get(&self, gate: GateId, step: usize) -> Option<Value> {
        self.values.get(step.checked_sub(1)?)?.get(gate.0).copied()
    }

    /// The first `k` simulated steps.
    pub fn prefix(&self, k: usize) -> ExtendedTrace {
        ExtendedTrace {
            base: self.base.clone(),
            values: self.values[..k.min(self.values.len())].to_vec(),
        }
    }
}
