//! Flattening of the block hierarchy into a net of basic blocks.
//!
//! Gate identities are kept: the flat net is indexed by the same [`GateId`]s as
//! the hierarchy, so the gate map back to the hierarchy is the identity and
//! every hierarchical assignment stays addressable. Complex-block interface
//! gates survive as junctions whose driver is a wire.

use std::collections::VecDeque;

use super::{BasicOp, BlockId, ConnId, Diagram, Direction, GateId};
use crate::value::Value;

/// What determines a gate's value at a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Driver {
    /// A system input (root input gate), or an undriven gate of an invalid diagram.
    Free,
    /// A literal bound to a basic-block input.
    Const(Value),
    /// Output of the flat block with this index.
    Block(usize),
    /// Copy of another gate, possibly negated.
    Wire {
        conn: ConnId,
        from: GateId,
        inverted: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlatBlock {
    pub block: BlockId,
    pub op: BasicOp,
    pub inputs: Vec<GateId>,
    pub output: GateId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlatNet {
    pub blocks: Vec<FlatBlock>,
    /// Driver of every gate, indexed by gate id.
    pub drivers: Vec<Driver>,
    /// Interface gates of complex blocks (the root included).
    pub junctions: Vec<GateId>,
    /// Flat block index of each hierarchy block, if basic.
    pub block_index: Vec<Option<usize>>,
}

impl FlatNet {
    pub fn gate_count(&self) -> usize {
        self.drivers.len()
    }

    pub fn driver(&self, g: GateId) -> Driver {
        self.drivers[g.0]
    }

    /// Follows wires back to the gate that carries the value originally,
    /// returning it together with the accumulated inversion.
    pub fn resolve(&self, mut g: GateId) -> (GateId, bool) {
        let mut inv = false;
        while let Driver::Wire { from, inverted, .. } = self.drivers[g.0] {
            inv ^= inverted;
            g = from;
        }
        (g, inv)
    }

    /// Number of wires (connections) in the net.
    pub fn wire_count(&self) -> usize {
        self.drivers
            .iter()
            .filter(|d| matches!(d, Driver::Wire { .. }))
            .count()
    }
}

/// Replaces every complex block by its internal net.
pub fn flatten(d: &Diagram) -> FlatNet {
    let mut drivers = vec![Driver::Free; d.gate_count()];
    let mut blocks = Vec::new();
    let mut junctions = Vec::new();
    let mut block_index = vec![None; d.block_count()];
    for (id, b) in d.blocks() {
        match b.op() {
            Some(op) => {
                let idx = blocks.len();
                block_index[id.0] = Some(idx);
                if let Some(out) = b.outputs.first() {
                    drivers[out.0] = Driver::Block(idx);
                    blocks.push(FlatBlock {
                        block: id,
                        op,
                        inputs: b.inputs.clone(),
                        output: *out,
                    });
                }
                for g in &b.inputs {
                    if let Some(v) = b.constant(*g) {
                        drivers[g.0] = Driver::Const(v);
                    }
                }
            }
            None => junctions.extend(b.inputs.iter().chain(&b.outputs).copied()),
        }
    }
    for (cid, c) in d.connections() {
        if c.to.0 >= drivers.len() || c.from.0 >= drivers.len() {
            continue;
        }
        let sink = d.gate(c.to);
        if sink.direction == Direction::Input || d.block(sink.owner).is_complex() {
            drivers[c.to.0] = Driver::Wire {
                conn: cid,
                from: c.from,
                inverted: c.inverted,
            };
        }
    }
    FlatNet {
        blocks,
        drivers,
        junctions,
        block_index,
    }
}

/// Blocks that could not be ordered because they lie on or behind a cycle.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("combinational cycle through blocks {}", blocks.join(", "))]
pub struct CombinationalCycle {
    pub blocks: Vec<String>,
}

/// Orders flat blocks so that every block follows the producers of its
/// inputs, except for a DELAY's delayed-source input, which reads the
/// previous step.
pub fn topo_order(net: &FlatNet) -> Result<Vec<usize>, CombinationalCycle> {
    let n = net.blocks.len();
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut indeg = vec![0usize; n];
    for (i, b) in net.blocks.iter().enumerate() {
        for (k, g) in b.inputs.iter().enumerate() {
            if b.op == BasicOp::Delay && k == 1 {
                continue;
            }
            if let Some(p) = producer(net, *g) {
                succ[p].push(i);
                indeg[i] += 1;
            }
        }
    }
    let mut queue: VecDeque<usize> = (0..n).filter(|i| indeg[*i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(i) = queue.pop_front() {
        order.push(i);
        for &s in &succ[i] {
            indeg[s] -= 1;
            if indeg[s] == 0 {
                queue.push_back(s);
            }
        }
    }
    if order.len() == n {
        Ok(order)
    } else {
        let blocks = (0..n)
            .filter(|i| indeg[*i] > 0)
            .map(|i| format!("b{}", net.blocks[i].block.0))
            .collect();
        Err(CombinationalCycle { blocks })
    }
}

/// Flat block whose output ultimately drives `g`, if any. Wire chains that
/// loop among junctions only are treated as undriven.
fn producer(net: &FlatNet, mut g: GateId) -> Option<usize> {
    for _ in 0..=net.drivers.len() {
        match net.drivers[g.0] {
            Driver::Block(b) => return Some(b),
            Driver::Wire { from, .. } => g = from,
            Driver::Free | Driver::Const(_) => return None,
        }
    }
    None
}
