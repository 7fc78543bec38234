//! JSON interchange document for diagrams.
//!
//! The document carries topology only: flat arrays of blocks, gates and
//! connections cross-referenced by string ids.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::{BasicOp, Block, BlockBody, BlockId, Connection, Diagram, Direction, Gate, GateId};
use crate::value::{Value, ValueKind};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DiagramDocument {
    pub root: String,
    pub blocks: Vec<BlockRecord>,
    pub gates: Vec<GateRecord>,
    pub connections: Vec<ConnectionRecord>,
    pub variables: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockClass {
    Basic,
    Complex,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BlockRecord {
    pub id: String,
    pub name: String,
    pub path: String,
    pub parent: Option<String>,
    pub class: BlockClass,
    #[serde(rename = "type")]
    pub type_name: String,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub constants: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GateRecord {
    pub id: String,
    pub name: String,
    pub path: String,
    pub direction: Direction,
    pub owner: String,
    pub value_kind: ValueKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConnectionRecord {
    pub id: String,
    pub from: String,
    pub to: String,
    pub inverted: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InterchangeError {
    #[error("unknown id `{0}`")]
    UnknownId(String),
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("unknown basic block type `{0}`")]
    UnknownType(String),
    #[error("root `{0}` is not a complex block")]
    BadRoot(String),
}

impl Diagram {
    pub fn to_document(&self) -> DiagramDocument {
        let blocks = self
            .blocks()
            .map(|(id, b)| BlockRecord {
                id: b.key.clone(),
                name: b.name.clone(),
                path: self.block_path(id),
                parent: b.parent.map(|p| self.block(p).key.clone()),
                class: if b.is_complex() {
                    BlockClass::Complex
                } else {
                    BlockClass::Basic
                },
                type_name: b.type_name().to_string(),
                inputs: b.inputs.iter().map(|g| self.gate(*g).key.clone()).collect(),
                outputs: b.outputs.iter().map(|g| self.gate(*g).key.clone()).collect(),
                constants: match &b.body {
                    BlockBody::Basic { constants, .. } => constants
                        .iter()
                        .map(|(g, v)| (self.gate(*g).key.clone(), *v))
                        .collect(),
                    BlockBody::Complex { .. } => BTreeMap::new(),
                },
            })
            .collect();
        let gates = self
            .gates()
            .map(|(id, g)| GateRecord {
                id: g.key.clone(),
                name: g.name.clone(),
                path: self.gate_path(id),
                direction: g.direction,
                owner: self.block(g.owner).key.clone(),
                value_kind: g.kind,
            })
            .collect();
        let connections = self
            .connections()
            .map(|(_, c)| ConnectionRecord {
                id: c.key.clone(),
                from: self.gate(c.from).key.clone(),
                to: self.gate(c.to).key.clone(),
                inverted: c.inverted,
            })
            .collect();
        let variables = self
            .variables
            .iter()
            .map(|(n, g)| (n.clone(), self.gate(*g).key.clone()))
            .collect();
        DiagramDocument {
            root: self.block(self.root).key.clone(),
            blocks,
            gates,
            connections,
            variables,
        }
    }

    pub fn from_document(doc: &DiagramDocument) -> Result<Diagram, InterchangeError> {
        let block_ids = index(doc.blocks.iter().map(|b| b.id.as_str()))?;
        let gate_ids = index(doc.gates.iter().map(|g| g.id.as_str()))?;
        let block = |k: &str| {
            block_ids
                .get(k)
                .map(|i| BlockId(*i))
                .ok_or_else(|| InterchangeError::UnknownId(k.to_string()))
        };
        let gate = |k: &str| {
            gate_ids
                .get(k)
                .map(|i| GateId(*i))
                .ok_or_else(|| InterchangeError::UnknownId(k.to_string()))
        };
        let mut blocks = Vec::with_capacity(doc.blocks.len());
        for b in &doc.blocks {
            let body = match b.class {
                BlockClass::Complex => BlockBody::Complex {
                    type_name: b.type_name.clone(),
                    children: Vec::new(),
                },
                BlockClass::Basic => {
                    let op = BasicOp::ALL
                        .into_iter()
                        .find(|op| op.name() == b.type_name)
                        .ok_or_else(|| InterchangeError::UnknownType(b.type_name.clone()))?;
                    let mut constants = BTreeMap::new();
                    for (g, v) in &b.constants {
                        constants.insert(gate(g)?, *v);
                    }
                    BlockBody::Basic { op, constants }
                }
            };
            blocks.push(Block {
                key: b.id.clone(),
                name: b.name.clone(),
                parent: b.parent.as_deref().map(block).transpose()?,
                inputs: b.inputs.iter().map(|g| gate(g)).collect::<Result<_, _>>()?,
                outputs: b.outputs.iter().map(|g| gate(g)).collect::<Result<_, _>>()?,
                body,
            });
        }
        for i in 0..blocks.len() {
            if let Some(p) = blocks[i].parent {
                if let BlockBody::Complex { children, .. } = &mut blocks[p.0].body {
                    children.push(BlockId(i));
                }
            }
        }
        let gates = doc
            .gates
            .iter()
            .map(|g| {
                Ok(Gate {
                    key: g.id.clone(),
                    name: g.name.clone(),
                    direction: g.direction,
                    owner: block(&g.owner)?,
                    kind: g.value_kind,
                })
            })
            .collect::<Result<Vec<_>, InterchangeError>>()?;
        let connections = doc
            .connections
            .iter()
            .map(|c| {
                Ok(Connection {
                    key: c.id.clone(),
                    from: gate(&c.from)?,
                    to: gate(&c.to)?,
                    inverted: c.inverted,
                })
            })
            .collect::<Result<Vec<_>, InterchangeError>>()?;
        let root = block(&doc.root)?;
        if !blocks[root.0].is_complex() {
            return Err(InterchangeError::BadRoot(doc.root.clone()));
        }
        let variables = doc
            .variables
            .iter()
            .map(|(n, g)| Ok((n.clone(), gate(g)?)))
            .collect::<Result<_, InterchangeError>>()?;
        Ok(Diagram {
            blocks,
            gates,
            connections,
            root,
            variables,
        })
    }
}

fn index<'a>(ids: impl Iterator<Item = &'a str>) -> Result<HashMap<&'a str, usize>, InterchangeError> {
    let mut m = HashMap::new();
    for (i, k) in ids.enumerate() {
        if m.insert(k, i).is_some() {
            return Err(InterchangeError::DuplicateId(k.to_string()));
        }
    }
    Ok(m)
}
