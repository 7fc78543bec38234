//! Direct evaluation on the block hierarchy, without flattening.

use std::collections::HashMap;

use cx_core::ir::{BasicOp, Diagram, Direction, GateId, OpError};
use cx_core::{Trace, Value};

pub struct HierEval<'a> {
    d: &'a Diagram,
    t: &'a Trace,
    incoming: HashMap<GateId, (GateId, bool)>,
    memo: HashMap<(GateId, usize), Value>,
}

impl<'a> HierEval<'a> {
    pub fn new(d: &'a Diagram, t: &'a Trace) -> Self {
        let incoming = d.connections().map(|(_, c)| (c.to, (c.from, c.inverted))).collect();
        HierEval {
            d,
            t,
            incoming,
            memo: HashMap::new(),
        }
    }

    pub fn value(&mut self, g: GateId, s: usize) -> Result<Value, OpError> {
        if let Some(v) = self.memo.get(&(g, s)) {
            return Ok(*v);
        }
        let gate = self.d.gate(g);
        let owner = self.d.block(gate.owner);
        let v = if let Some((from, inv)) = self.incoming.get(&g).copied() {
            let v = self.value(from, s)?;
            if inv {
                v.negate()
            } else {
                v
            }
        } else if gate.direction == Direction::Input && gate.owner == self.d.root() {
            let name = self
                .d
                .variables()
                .iter()
                .find(|(_, x)| **x == g)
                .map(|(n, _)| n.clone())
                .unwrap_or_else(|| gate.name.clone());
            self.t.value(&name, s).expect("input missing from trace")
        } else if gate.direction == Direction::Input {
            owner.constant(g).expect("unbound input")
        } else {
            let op = owner.op().expect("undriven complex output");
            let inputs = owner.inputs.clone();
            if op == BasicOp::Delay {
                if s == 1 {
                    self.value(inputs[0], 1)?
                } else {
                    self.value(inputs[1], s - 1)?
                }
            } else {
                let args = inputs
                    .iter()
                    .map(|x| self.value(*x, s))
                    .collect::<Result<Vec<_>, _>>()?;
                op.apply(&args)?
            }
        };
        self.memo.insert((g, s), v);
        Ok(v)
    }
}
