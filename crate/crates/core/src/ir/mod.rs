//! Function block diagram intermediate representation.
//!
//! A [`Diagram`] is an arena of blocks, gates and connections. The root block
//! is a complex block that no other block contains. Complex blocks own child
//! blocks and the connections of their internal net; basic blocks are the
//! atomic operators of [`BasicOp`].
//!
//! Gate, block and connection handles are dense indices into the arena. Each
//! entity also carries a string `key` that is used by the JSON interchange
//! format and by API payloads.

mod flatten;
pub mod interchange;
mod ops;
mod validate;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::value::{Value, ValueKind};

pub use flatten::{flatten, topo_order, CombinationalCycle, Driver, FlatBlock, FlatNet};
pub use ops::OpError;
pub use validate::{validate_diagram, ValidationReport, Violation, ViolationKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GateId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConnId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Input,
    Output,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gate {
    pub key: String,
    pub name: String,
    pub direction: Direction,
    pub owner: BlockId,
    pub kind: ValueKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Connection {
    pub key: String,
    pub from: GateId,
    pub to: GateId,
    pub inverted: bool,
}

/// The atomic block types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum BasicOp {
    And,
    Or,
    Iff,
    Sub,
    Add,
    Mul,
    Div,
    Gt,
    Lt,
    Le,
    Ge,
    Eq,
    Delay,
    Choice,
    Count,
    Assign,
}

impl BasicOp {
    pub const ALL: [BasicOp; 16] = [
        BasicOp::And,
        BasicOp::Or,
        BasicOp::Iff,
        BasicOp::Sub,
        BasicOp::Add,
        BasicOp::Mul,
        BasicOp::Div,
        BasicOp::Gt,
        BasicOp::Lt,
        BasicOp::Le,
        BasicOp::Ge,
        BasicOp::Eq,
        BasicOp::Delay,
        BasicOp::Choice,
        BasicOp::Count,
        BasicOp::Assign,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BasicOp::And => "AND",
            BasicOp::Or => "OR",
            BasicOp::Iff => "IFF",
            BasicOp::Sub => "SUB",
            BasicOp::Add => "ADD",
            BasicOp::Mul => "MUL",
            BasicOp::Div => "DIV",
            BasicOp::Gt => "GT",
            BasicOp::Lt => "LT",
            BasicOp::Le => "LE",
            BasicOp::Ge => "GE",
            BasicOp::Eq => "EQ",
            BasicOp::Delay => "DELAY",
            BasicOp::Choice => "CHOICE",
            BasicOp::Count => "COUNT",
            BasicOp::Assign => "ASSIGN",
        }
    }

    pub fn is_arithmetic(self) -> bool {
        matches!(self, BasicOp::Add | BasicOp::Sub | BasicOp::Mul | BasicOp::Div)
    }

    pub fn is_relational(self) -> bool {
        matches!(
            self,
            BasicOp::Gt | BasicOp::Lt | BasicOp::Le | BasicOp::Ge | BasicOp::Eq
        )
    }

    /// Conventional input gate names for a block with `arity` inputs.
    pub fn input_names(self, arity: usize) -> Vec<String> {
        match self {
            BasicOp::Delay => vec!["default".into(), "src".into()],
            BasicOp::Choice => (0..arity)
                .map(|i| {
                    if i % 2 == 0 {
                        format!("c{}", i / 2 + 1)
                    } else {
                        format!("r{}", i / 2 + 1)
                    }
                })
                .collect(),
            _ => (1..=arity).map(|i| format!("in{i}")).collect(),
        }
    }
}

impl fmt::Display for BasicOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BlockBody {
    Basic {
        op: BasicOp,
        /// Literals bound to input gates that have no incoming connection.
        constants: BTreeMap<GateId, Value>,
    },
    Complex {
        type_name: String,
        children: Vec<BlockId>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub key: String,
    pub name: String,
    pub parent: Option<BlockId>,
    pub inputs: Vec<GateId>,
    pub outputs: Vec<GateId>,
    pub body: BlockBody,
}

impl Block {
    pub fn op(&self) -> Option<BasicOp> {
        match &self.body {
            BlockBody::Basic { op, .. } => Some(*op),
            BlockBody::Complex { .. } => None,
        }
    }

    pub fn is_complex(&self) -> bool {
        matches!(self.body, BlockBody::Complex { .. })
    }

    pub fn type_name(&self) -> &str {
        match &self.body {
            BlockBody::Basic { op, .. } => op.name(),
            BlockBody::Complex { type_name, .. } => type_name,
        }
    }

    pub fn children(&self) -> &[BlockId] {
        match &self.body {
            BlockBody::Complex { children, .. } => children,
            BlockBody::Basic { .. } => &[],
        }
    }

    pub fn constant(&self, gate: GateId) -> Option<Value> {
        match &self.body {
            BlockBody::Basic { constants, .. } => constants.get(&gate).copied(),
            BlockBody::Complex { .. } => None,
        }
    }
}

/// An assignment `(variable, value, step)`; steps are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment {
    pub gate: GateId,
    pub value: Value,
    pub step: usize,
}

/// A hierarchical block diagram.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagram {
    pub(crate) blocks: Vec<Block>,
    pub(crate) gates: Vec<Gate>,
    pub(crate) connections: Vec<Connection>,
    pub(crate) root: BlockId,
    /// Declared model variables: name to gate.
    pub(crate) variables: BTreeMap<String, GateId>,
}

impl Diagram {
    pub fn root(&self) -> BlockId {
        self.root
    }

    pub fn block(&self, id: BlockId) -> &Block {
        &self.blocks[id.0]
    }

    pub fn gate(&self, id: GateId) -> &Gate {
        &self.gates[id.0]
    }

    pub fn connection(&self, id: ConnId) -> &Connection {
        &self.connections[id.0]
    }

    pub fn blocks(&self) -> impl Iterator<Item = (BlockId, &Block)> {
        self.blocks.iter().enumerate().map(|(i, b)| (BlockId(i), b))
    }

    pub fn gates(&self) -> impl Iterator<Item = (GateId, &Gate)> {
        self.gates.iter().enumerate().map(|(i, g)| (GateId(i), g))
    }

    pub fn connections(&self) -> impl Iterator<Item = (ConnId, &Connection)> {
        self.connections.iter().enumerate().map(|(i, c)| (ConnId(i), c))
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn variables(&self) -> &BTreeMap<String, GateId> {
        &self.variables
    }

    pub fn variable(&self, name: &str) -> Option<GateId> {
        self.variables.get(name).copied()
    }

    /// Input gates of the root block: the free inputs of the system.
    pub fn root_inputs(&self) -> &[GateId] {
        &self.block(self.root).inputs
    }

    /// Dotted instance path of a block; the root has the empty path.
    pub fn block_path(&self, id: BlockId) -> String {
        let mut parts = Vec::new();
        let mut cur = Some(id);
        while let Some(b) = cur {
            let block = self.block(b);
            if block.parent.is_some() {
                parts.push(block.name.as_str());
            }
            cur = block.parent;
        }
        parts.reverse();
        parts.join(".")
    }

    /// Dotted path of a gate: owner path plus gate name.
    pub fn gate_path(&self, id: GateId) -> String {
        let gate = self.gate(id);
        let owner = self.block_path(gate.owner);
        if owner.is_empty() {
            gate.name.clone()
        } else {
            format!("{owner}.{}", gate.name)
        }
    }

    /// Variable name of a gate: the declared variable name if any, otherwise its path.
    pub fn gate_label(&self, id: GateId) -> String {
        self.variables
            .iter()
            .find(|(_, g)| **g == id)
            .map(|(n, _)| n.clone())
            .unwrap_or_else(|| self.gate_path(id))
    }

    pub fn find_gate_by_key(&self, key: &str) -> Option<GateId> {
        self.gates.iter().position(|g| g.key == key).map(GateId)
    }

    pub fn find_block_by_key(&self, key: &str) -> Option<BlockId> {
        self.blocks.iter().position(|b| b.key == key).map(BlockId)
    }

    /// Blocks whose key, path or name equals `name`.
    pub fn find_blocks(&self, name: &str) -> Vec<BlockId> {
        let exact: Vec<BlockId> = self
            .blocks()
            .filter(|(id, b)| b.key == name || self.block_path(*id) == name)
            .map(|(id, _)| id)
            .collect();
        if !exact.is_empty() {
            return exact;
        }
        self.blocks()
            .filter(|(_, b)| b.name == name)
            .map(|(id, _)| id)
            .collect()
    }

    /// Resolves a gate by exact path, declared variable name, or key.
    pub fn find_gate(&self, name: &str) -> Option<GateId> {
        if let Some(g) = self.variable(name) {
            return Some(g);
        }
        let by_path: Vec<GateId> = self
            .gates()
            .filter(|(id, _)| self.gate_path(*id) == name)
            .map(|(id, _)| id)
            .collect();
        if by_path.len() == 1 {
            return Some(by_path[0]);
        }
        self.find_gate_by_key(name)
    }

    /// Whether `block` is `ancestor` or nested inside it.
    pub fn is_within(&self, block: BlockId, ancestor: BlockId) -> bool {
        let mut cur = Some(block);
        while let Some(b) = cur {
            if b == ancestor {
                return true;
            }
            cur = self.block(b).parent;
        }
        false
    }

    /// Number of basic blocks in the hierarchy.
    pub fn basic_block_count(&self) -> usize {
        self.blocks.iter().filter(|b| !b.is_complex()).count()
    }
}

/// Incremental construction of a [`Diagram`].
#[derive(Debug, Clone)]
pub struct DiagramBuilder {
    d: Diagram,
}

impl DiagramBuilder {
    pub fn new(root_name: &str, type_name: &str) -> Self {
        let root = Block {
            key: "b0".into(),
            name: root_name.into(),
            parent: None,
            inputs: Vec::new(),
            outputs: Vec::new(),
            body: BlockBody::Complex {
                type_name: type_name.into(),
                children: Vec::new(),
            },
        };
        DiagramBuilder {
            d: Diagram {
                blocks: vec![root],
                gates: Vec::new(),
                connections: Vec::new(),
                root: BlockId(0),
                variables: BTreeMap::new(),
            },
        }
    }

    pub fn root(&self) -> BlockId {
        self.d.root
    }

    pub fn diagram(&self) -> &Diagram {
        &self.d
    }

    fn push_block(&mut self, parent: BlockId, name: &str, body: BlockBody) -> BlockId {
        let id = BlockId(self.d.blocks.len());
        self.d.blocks.push(Block {
            key: format!("b{}", id.0),
            name: name.into(),
            parent: Some(parent),
            inputs: Vec::new(),
            outputs: Vec::new(),
            body,
        });
        if let BlockBody::Complex { children, .. } = &mut self.d.blocks[parent.0].body {
            children.push(id);
        }
        id
    }

    pub fn complex(&mut self, parent: BlockId, name: &str, type_name: &str) -> BlockId {
        self.push_block(
            parent,
            name,
            BlockBody::Complex {
                type_name: type_name.into(),
                children: Vec::new(),
            },
        )
    }

    /// Adds a basic block with conventionally named gates.
    pub fn basic(
        &mut self,
        parent: BlockId,
        name: &str,
        op: BasicOp,
        inputs: &[ValueKind],
        output: ValueKind,
    ) -> BlockId {
        let id = self.push_block(
            parent,
            name,
            BlockBody::Basic {
                op,
                constants: BTreeMap::new(),
            },
        );
        for (gate_name, kind) in op.input_names(inputs.len()).iter().zip(inputs) {
            self.input(id, gate_name, *kind);
        }
        self.output(id, "out", output);
        id
    }

    fn push_gate(&mut self, owner: BlockId, name: &str, direction: Direction, kind: ValueKind) -> GateId {
        let id = GateId(self.d.gates.len());
        self.d.gates.push(Gate {
            key: format!("g{}", id.0),
            name: name.into(),
            direction,
            owner,
            kind,
        });
        let block = &mut self.d.blocks[owner.0];
        match direction {
            Direction::Input => block.inputs.push(id),
            Direction::Output => block.outputs.push(id),
        }
        id
    }

    pub fn input(&mut self, block: BlockId, name: &str, kind: ValueKind) -> GateId {
        self.push_gate(block, name, Direction::Input, kind)
    }

    pub fn output(&mut self, block: BlockId, name: &str, kind: ValueKind) -> GateId {
        self.push_gate(block, name, Direction::Output, kind)
    }

    pub fn connect(&mut self, from: GateId, to: GateId, inverted: bool) -> ConnId {
        let id = ConnId(self.d.connections.len());
        self.d.connections.push(Connection {
            key: format!("c{}", id.0),
            from,
            to,
            inverted,
        });
        id
    }

    /// Binds a literal to a basic-block input gate.
    pub fn bind_constant(&mut self, gate: GateId, value: Value) {
        let owner = self.d.gates[gate.0].owner;
        if let BlockBody::Basic { constants, .. } = &mut self.d.blocks[owner.0].body {
            constants.insert(gate, value);
        }
    }

    pub fn declare_variable(&mut self, name: &str, gate: GateId) {
        self.d.variables.insert(name.into(), gate);
    }

    pub fn set_block_key(&mut self, block: BlockId, key: &str) {
        self.d.blocks[block.0].key = key.into();
    }

    pub fn set_gate_key(&mut self, gate: GateId, key: &str) {
        self.d.gates[gate.0].key = key.into();
    }

    pub fn set_gate_name(&mut self, gate: GateId, name: &str) {
        self.d.gates[gate.0].name = name.into();
    }

    pub fn set_gate_kind(&mut self, gate: GateId, kind: ValueKind) {
        self.d.gates[gate.0].kind = kind;
    }

    pub fn gate_kind(&self, gate: GateId) -> ValueKind {
        self.d.gates[gate.0].kind
    }

    pub fn set_connection_key(&mut self, conn: ConnId, key: &str) {
        self.d.connections[conn.0].key = key.into();
    }

    pub fn input_gate(&self, block: BlockId, index: usize) -> GateId {
        self.d.blocks[block.0].inputs[index]
    }

    pub fn output_gate(&self, block: BlockId) -> GateId {
        self.d.blocks[block.0].outputs[0]
    }

    pub fn finish(self) -> Diagram {
        self.d
    }
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paths_and_lookup() {
        let d = fixtures::or_or_and();
        let and = d.find_blocks("AND")[0];
        let out = d.block(and).outputs[0];
        assert_eq!(d.gate_path(out), "AND.u14");
        assert_eq!(d.find_gate("AND.u14"), Some(out));
        assert_eq!(d.find_gate("u3"), Some(d.root_inputs()[2]));
        assert_eq!(d.block_path(d.root()), "");
        assert!(d.is_within(and, d.root()));
        assert_eq!(d.basic_block_count(), 3);
    }
}
