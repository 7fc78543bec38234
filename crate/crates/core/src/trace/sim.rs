//! Synchronous step-by-step simulation of a flattened diagram.

use serde::Serialize;

use super::{ExtendedTrace, Trace};
use crate::ir::{
    flatten, topo_order, BasicOp, CombinationalCycle, Diagram, Driver, FlatNet, GateId, OpError,
};
use crate::value::Value;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error("division by zero in block {block} at step {step}")]
    DivisionByZero { block: String, step: usize },
    #[error("value {value} of gate {gate} escapes its range at step {step} (block {block})")]
    RangeEscape {
        block: String,
        gate: String,
        value: Value,
        step: usize,
    },
    #[error("no CHOICE condition holds in block {block} at step {step}")]
    ChoiceUnsatisfied { block: String, step: usize },
    #[error("integer overflow in block {block} at step {step}")]
    Overflow { block: String, step: usize },
    #[error("ill-typed operands in block {block} at step {step}")]
    Sort { block: String, step: usize },
    #[error("no trace value for input `{var}` at step {step}")]
    MissingInput { var: String, step: usize },
    #[error("step {step} outside trace of length {len}")]
    StepOutOfRange { step: usize, len: usize },
    #[error(transparent)]
    Cycle(#[from] CombinationalCycle),
}

/// A trace value that disagrees with simulation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Mismatch {
    pub var: String,
    pub step: usize,
    pub trace_value: Value,
    pub simulated_value: Value,
}

/// A diagram prepared for repeated single-step evaluation.
#[derive(Debug, Clone)]
pub struct Simulator<'d> {
    d: &'d Diagram,
    net: FlatNet,
    order: Vec<usize>,
    /// Root input gates with the trace variable that feeds each.
    inputs: Vec<(GateId, String)>,
}

impl<'d> Simulator<'d> {
    pub fn new(d: &'d Diagram) -> Result<Self, SimError> {
        let net = flatten(d);
        let order = topo_order(&net)?;
        let inputs = d
            .root_inputs()
            .iter()
            .map(|g| {
                let name = d
                    .variables()
                    .iter()
                    .find(|(_, v)| *v == g)
                    .map(|(n, _)| n.clone())
                    .unwrap_or_else(|| d.gate(*g).name.clone());
                (*g, name)
            })
            .collect();
        Ok(Simulator {
            d,
            net,
            order,
            inputs,
        })
    }

    pub fn net(&self) -> &FlatNet {
        &self.net
    }

    /// Root inputs and the variable names that feed them.
    pub fn inputs(&self) -> &[(GateId, String)] {
        &self.inputs
    }

    /// Evaluates one step. `inputs` is parallel to [`Simulator::inputs`];
    /// `prev` holds every gate value of the previous step (absent at step 1).
    pub fn step_eval(
        &self,
        step: usize,
        inputs: &[Value],
        prev: Option<&[Value]>,
    ) -> Result<Vec<Value>, SimError> {
        let n = self.net.gate_count();
        let mut vals: Vec<Option<Value>> = vec![None; n];
        for ((g, _), v) in self.inputs.iter().zip(inputs) {
            vals[g.0] = Some(*v);
        }
        for &bi in &self.order {
            let b = &self.net.blocks[bi];
            let key = || self.d.block(b.block).key.clone();
            let out = if b.op == BasicOp::Delay {
                match (step, prev) {
                    (1, _) | (_, None) => self.gate_value(b.inputs[0], &mut vals),
                    (_, Some(p)) => p[b.inputs[1].0],
                }
            } else {
                let args: Vec<Value> = b
                    .inputs
                    .iter()
                    .map(|g| self.gate_value(*g, &mut vals))
                    .collect();
                b.op.apply(&args).map_err(|e| match e {
                    OpError::DivisionByZero => SimError::DivisionByZero { block: key(), step },
                    OpError::ChoiceUnsatisfied => SimError::ChoiceUnsatisfied { block: key(), step },
                    OpError::Overflow => SimError::Overflow { block: key(), step },
                    OpError::Sort | OpError::Delay => SimError::Sort { block: key(), step },
                })?
            };
            vals[b.output.0] = Some(out);
        }
        let mut result = Vec::with_capacity(n);
        for g in 0..n {
            let v = self.gate_value(GateId(g), &mut vals);
            let gate = self.d.gate(GateId(g));
            if !gate.kind.contains(v) {
                return Err(SimError::RangeEscape {
                    block: self.d.block(gate.owner).key.clone(),
                    gate: self.d.gate_path(GateId(g)),
                    value: v,
                    step,
                });
            }
            result.push(v);
        }
        Ok(result)
    }

    /// Value of a gate at the current step, following drivers.
    fn gate_value(&self, g: GateId, vals: &mut [Option<Value>]) -> Value {
        if let Some(v) = vals[g.0] {
            return v;
        }
        let v = match self.net.driver(g) {
            Driver::Const(v) => v,
            Driver::Wire { from, inverted, .. } => {
                let v = self.gate_value(from, vals);
                if inverted {
                    v.negate()
                } else {
                    v
                }
            }
            // Blocks are evaluated in topological order, so a block driver
            // without a value only occurs on invalid diagrams.
            Driver::Block(_) | Driver::Free => self.d.gate(g).kind.default_value(),
        };
        vals[g.0] = Some(v);
        v
    }

    /// Simulates steps `1..=up_to`, feeding root inputs from `t`.
    pub fn run(&self, t: &Trace, up_to: usize) -> Result<Vec<Vec<Value>>, SimError> {
        if up_to > t.len() {
            return Err(SimError::StepOutOfRange {
                step: up_to,
                len: t.len(),
            });
        }
        let idx: Vec<usize> = self
            .inputs
            .iter()
            .map(|(_, name)| {
                t.var_index(name).ok_or_else(|| SimError::MissingInput {
                    var: name.clone(),
                    step: 1,
                })
            })
            .collect::<Result<_, _>>()?;
        let mut out: Vec<Vec<Value>> = Vec::with_capacity(up_to);
        for step in 1..=up_to {
            let ins: Vec<Value> = idx.iter().map(|i| t.value_at(*i, step)).collect();
            let row = self.step_eval(step, &ins, out.last().map(|r| r.as_slice()))?;
            out.push(row);
        }
        Ok(out)
    }
}

/// Computes every gate value for steps `1..=up_to`.
pub fn extend_trace(d: &Diagram, t: &Trace, up_to: usize) -> Result<ExtendedTrace, SimError> {
    let sim = Simulator::new(d)?;
    Ok(ExtendedTrace {
        base: t.clone(),
        values: sim.run(t, up_to)?,
    })
}

/// Compares every declared non-input variable of the trace with simulation.
pub fn check_consistency(d: &Diagram, t: &Trace) -> Result<Vec<Mismatch>, SimError> {
    let ext = extend_trace(d, t, t.len())?;
    let inputs = d.root_inputs();
    let mut out = Vec::new();
    for step in 1..=t.len() {
        for (name, g) in d.variables() {
            if inputs.contains(g) {
                continue;
            }
            let Some(tv) = t.value(name, step) else {
                continue;
            };
            let sv = ext.value(*g, step);
            if tv != sv {
                out.push(Mismatch {
                    var: name.clone(),
                    step,
                    trace_value: tv,
                    simulated_value: sv,
                });
            }
        }
    }
    Ok(out)
}
