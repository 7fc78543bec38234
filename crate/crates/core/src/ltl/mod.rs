//! LTL evaluation and explanation over lasso-shaped traces.
//!
//! Positions run from 1 to the trace length `l`; the successor of `l` is the
//! loop start. `G`, `F` and `U` at position `j` range over the positions
//! reachable from `j`, which is the interval from `min(j, loopStart)` to `l`
//! once the walk has entered the loop.

use std::collections::{BTreeSet, HashSet};

use serde::Serialize;

use crate::smv::ast::BinOp;
use crate::smv::formula::{FormulaTree, NodeId, NodeOp};
use crate::trace::Trace;
use crate::value::Value;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum LtlEvalError {
    #[error("the trace has no loop; temporal operators need a lasso-shaped trace")]
    NoLoopForTemporal,
    #[error("step {step} outside trace of length {len}")]
    StepOutOfRange { step: usize, len: usize },
    #[error("trace has no values for `{name}`")]
    MissingVariable { name: String },
    #[error("division by zero in formula at step {step}")]
    DivisionByZero { step: usize },
    #[error("integer overflow in formula at step {step}")]
    Overflow { step: usize },
}

/// Value of every formula node at every trace position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalTable {
    len: usize,
    loop_start: Option<usize>,
    values: Vec<Vec<Value>>,
}

impl EvalTable {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Value of `node` at 1-based `pos`.
    pub fn value(&self, node: NodeId, pos: usize) -> Value {
        self.values[node][pos - 1]
    }

    pub fn row(&self, node: NodeId) -> &[Value] {
        &self.values[node]
    }

    fn succ(&self, j: usize) -> usize {
        successor(j, self.len, self.loop_start)
    }
}

fn successor(j: usize, len: usize, loop_start: Option<usize>) -> usize {
    if j < len {
        j + 1
    } else {
        loop_start.expect("temporal evaluation requires a loop")
    }
}

pub fn evaluate(f: &FormulaTree, t: &Trace) -> Result<EvalTable, LtlEvalError> {
    let len = t.len();
    if f.has_temporal() && t.loop_start().is_none() {
        return Err(LtlEvalError::NoLoopForTemporal);
    }
    let mut table = EvalTable {
        len,
        loop_start: t.loop_start(),
        values: Vec::with_capacity(f.len()),
    };
    let ls = t.loop_start().unwrap_or(1);
    let b = |v: Value| v.as_bool().unwrap_or(false);
    // Children precede parents in the arena.
    for id in 0..f.len() {
        let n = f.node(id);
        let kid = |k: usize| &table.values[n.children[k]];
        let row: Vec<Value> = match &n.op {
            NodeOp::True => vec![Value::Bool(true); len],
            NodeOp::False => vec![Value::Bool(false); len],
            NodeOp::Int(i) => vec![Value::Int(*i); len],
            NodeOp::Var { name, .. } => {
                let idx = t
                    .var_index(name)
                    .ok_or_else(|| LtlEvalError::MissingVariable { name: name.clone() })?;
                (1..=len).map(|s| t.value_at(idx, s)).collect()
            }
            NodeOp::Not => kid(0).iter().map(|v| Value::Bool(!b(*v))).collect(),
            NodeOp::And => zip(kid(0), kid(1), |x, y| Value::Bool(b(x) && b(y))),
            NodeOp::Or => zip(kid(0), kid(1), |x, y| Value::Bool(b(x) || b(y))),
            NodeOp::Implies => zip(kid(0), kid(1), |x, y| Value::Bool(!b(x) || b(y))),
            NodeOp::Iff => zip(kid(0), kid(1), |x, y| Value::Bool(b(x) == b(y))),
            NodeOp::Next => (1..=len).map(|j| kid(0)[table.succ(j) - 1]).collect(),
            NodeOp::Globally | NodeOp::Finally => {
                let all = n.op == NodeOp::Globally;
                let a = kid(0);
                // Suffix aggregate over [j, l], then fold in the loop part.
                let mut suffix = vec![all; len + 1];
                for j in (1..=len).rev() {
                    suffix[j - 1] = if all {
                        b(a[j - 1]) && suffix[j]
                    } else {
                        b(a[j - 1]) || suffix[j]
                    };
                }
                let looped = suffix[ls - 1];
                (1..=len)
                    .map(|j| {
                        let v = if j <= ls { suffix[j - 1] } else if all { suffix[j - 1] && looped } else { suffix[j - 1] || looped };
                        Value::Bool(v)
                    })
                    .collect()
            }
            NodeOp::Until => {
                let (a, c) = (kid(0), kid(1));
                (1..=len)
                    .map(|j| {
                        let mut seen = HashSet::new();
                        let mut k = j;
                        loop {
                            if b(c[k - 1]) {
                                return Value::Bool(true);
                            }
                            if !b(a[k - 1]) || !seen.insert(k) {
                                return Value::Bool(false);
                            }
                            k = table.succ(k);
                        }
                    })
                    .collect()
            }
            NodeOp::Neg => {
                let mut row = Vec::with_capacity(len);
                for (s, v) in kid(0).iter().enumerate() {
                    let x = v.as_int().unwrap_or(0);
                    row.push(Value::Int(x.checked_neg().ok_or(LtlEvalError::Overflow { step: s + 1 })?));
                }
                row
            }
            NodeOp::Arith(op) | NodeOp::Rel(op) => {
                let mut row = Vec::with_capacity(len);
                for s in 0..len {
                    row.push(binary(*op, kid(0)[s], kid(1)[s], s + 1)?);
                }
                row
            }
        };
        table.values.push(row);
    }
    Ok(table)
}

fn zip(a: &[Value], b: &[Value], f: impl Fn(Value, Value) -> Value) -> Vec<Value> {
    a.iter().zip(b).map(|(x, y)| f(*x, *y)).collect()
}

fn binary(op: BinOp, x: Value, y: Value, step: usize) -> Result<Value, LtlEvalError> {
    if let (BinOp::Eq | BinOp::Ne, true) = (op, x.is_bool()) {
        return Ok(Value::Bool((x == y) == (op == BinOp::Eq)));
    }
    let (a, b) = (x.as_int().unwrap_or(0), y.as_int().unwrap_or(0));
    let over = LtlEvalError::Overflow { step };
    Ok(match op {
        BinOp::Eq => Value::Bool(a == b),
        BinOp::Ne => Value::Bool(a != b),
        BinOp::Lt => Value::Bool(a < b),
        BinOp::Le => Value::Bool(a <= b),
        BinOp::Gt => Value::Bool(a > b),
        BinOp::Ge => Value::Bool(a >= b),
        BinOp::Add => Value::Int(a.checked_add(b).ok_or(over)?),
        BinOp::Sub => Value::Int(a.checked_sub(b).ok_or(over)?),
        BinOp::Mul => Value::Int(a.checked_mul(b).ok_or(over)?),
        BinOp::Div if b == 0 => return Err(LtlEvalError::DivisionByZero { step }),
        BinOp::Div => Value::Int(a.checked_div(b).ok_or(over)?),
        _ => unreachable!("boolean connectives are separate nodes"),
    })
}

/// A variable assignment that the formula value depends on.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CauseAssignment {
    pub step: usize,
    pub var: String,
    pub value: Value,
}

/// A `(node, position)` pair whose value had to be justified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Obligation {
    pub node: NodeId,
    pub step: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Contribution {
    pub node: NodeId,
    pub step: usize,
    pub value: Value,
    /// Sub-obligations chosen to justify this one.
    pub obligations: Vec<Obligation>,
}

/// Assignments sufficient for the formula value at one step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FormulaCause {
    pub step: usize,
    pub value: Value,
    /// Sorted by step, then variable.
    pub assignments: Vec<CauseAssignment>,
    pub contributions: Vec<Contribution>,
}

/// Justifies the value of the whole formula at `step` by recursive descent.
///
/// `G`, `F` and `U` are unfolded one step at a time with their expansion
/// laws. A conjunction that is FALSE contributes every FALSE conjunct and a
/// TRUE disjunction every TRUE disjunct, so the result is the union of the
/// minimal choices. Pairs already visited add nothing, which cuts the loop.
pub fn explain_formula(
    f: &FormulaTree,
    t: &Trace,
    table: &EvalTable,
    step: usize,
) -> Result<FormulaCause, LtlEvalError> {
    if step < 1 || step > table.len() {
        return Err(LtlEvalError::StepOutOfRange {
            step,
            len: table.len(),
        });
    }
    let truth = |n: NodeId, j: usize| table.value(n, j) == Value::Bool(true);
    let mut visited = HashSet::new();
    let mut assignments = BTreeSet::new();
    let mut contributions = Vec::new();
    let mut work = vec![Obligation {
        node: f.root(),
        step,
    }];
    while let Some(ob) = work.pop() {
        if !visited.insert(ob) {
            continue;
        }
        let (id, j) = (ob.node, ob.step);
        let n = f.node(id);
        let v = table.value(id, j);
        let here = |k: usize| Obligation {
            node: n.children[k],
            step: j,
        };
        let mut next: Vec<Obligation> = Vec::new();
        match &n.op {
            NodeOp::True | NodeOp::False | NodeOp::Int(_) => {}
            NodeOp::Var { .. } | NodeOp::Rel(_) | NodeOp::Arith(_) | NodeOp::Neg => {
                for name in f.variables_under(id) {
                    let idx = t.var_index(&name).expect("evaluated variables exist");
                    assignments.insert(CauseAssignment {
                        step: j,
                        var: name,
                        value: t.value_at(idx, j),
                    });
                }
            }
            NodeOp::Not => next.push(here(0)),
            NodeOp::And | NodeOp::Or => {
                // The children that agree with the node's value decide it
                // when that value is the dominating one.
                let dominating = n.op == NodeOp::Or;
                for k in 0..2 {
                    let c = here(k);
                    if v.as_bool() != Some(dominating) || truth(c.node, j) == dominating {
                        next.push(c);
                    }
                }
            }
            NodeOp::Implies => {
                if v == Value::Bool(true) {
                    if !truth(n.children[0], j) {
                        next.push(here(0));
                    }
                    if truth(n.children[1], j) {
                        next.push(here(1));
                    }
                } else {
                    next.extend([here(0), here(1)]);
                }
            }
            NodeOp::Iff => next.extend([here(0), here(1)]),
            NodeOp::Next => next.push(Obligation {
                node: n.children[0],
                step: table.succ(j),
            }),
            NodeOp::Globally | NodeOp::Finally => {
                // G p = p & X G p;  F p = p | X F p.
                let dominating = n.op == NodeOp::Finally;
                let later = Obligation {
                    node: id,
                    step: table.succ(j),
                };
                for c in [here(0), later] {
                    if v.as_bool() != Some(dominating) || truth(c.node, c.step) == dominating {
                        next.push(c);
                    }
                }
            }
            NodeOp::Until => {
                // p U q = q | (p & X (p U q)).
                let (p, q) = (here(0), here(1));
                let later = Obligation {
                    node: id,
                    step: table.succ(j),
                };
                let q_true = truth(q.node, j);
                let rest_true = truth(p.node, j) && truth(id, later.step);
                if v == Value::Bool(true) {
                    if q_true {
                        next.push(q);
                    }
                    if rest_true {
                        next.extend([p, later]);
                    }
                } else {
                    next.push(q);
                    if !truth(p.node, j) {
                        next.push(p);
                    }
                    if !truth(id, later.step) {
                        next.push(later);
                    }
                }
            }
        }
        contributions.push(Contribution {
            node: id,
            step: j,
            value: v,
            obligations: next.clone(),
        });
        work.extend(next.into_iter().rev());
    }
    contributions.sort_by_key(|c| (c.node, c.step));
    Ok(FormulaCause {
        step,
        value: table.value(f.root(), step),
        assignments: assignments.into_iter().collect(),
        contributions,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    True,
    False,
    Arithmetic,
}

/// Display record of one formula node at one step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AnnotatedNode {
    pub id: NodeId,
    pub label: String,
    pub text: String,
    pub children: Vec<NodeId>,
    pub value: Value,
    pub color: Color,
}

/// Every node with its value at `step`; integer subterms are colored as
/// arithmetic.
pub fn annotate_tree(f: &FormulaTree, table: &EvalTable, step: usize) -> Vec<AnnotatedNode> {
    (0..f.len())
        .map(|id| {
            let n = f.node(id);
            let value = table.value(id, step);
            let color = match value {
                Value::Int(_) => Color::Arithmetic,
                Value::Bool(true) => Color::True,
                Value::Bool(false) => Color::False,
            };
            AnnotatedNode {
                id,
                label: n.op.label(),
                text: f.text(id),
                children: n.children.clone(),
                value,
                color,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smv::formula::parse_ltl;
    use crate::value::ValueKind;

    fn trace(cols: &[(&str, &[i64])], loop_start: Option<usize>) -> (Trace, Vec<(String, ValueKind)>) {
        let len = cols[0].1.len();
        let vars: Vec<String> = cols.iter().map(|c| c.0.to_string()).collect();
        let states = (0..len)
            .map(|s| {
                cols.iter()
                    .map(|(n, vs)| {
                        if n.starts_with('x') {
                            Value::Int(vs[s])
                        } else {
                            Value::Bool(vs[s] != 0)
                        }
                    })
                    .collect()
            })
            .collect();
        let decl = cols
            .iter()
            .map(|(n, _)| {
                let k = if n.starts_with('x') { ValueKind::int(-10, 10) } else { ValueKind::Bool };
                (n.to_string(), k)
            })
            .collect();
        (Trace::new(vars, states, loop_start).unwrap(), decl)
    }

    fn bools(row: &[Value]) -> Vec<bool> {
        row.iter().map(|v| v.as_bool().unwrap()).collect()
    }

    #[test]
    fn globally_true_everywhere() {
        let (t, d) = trace(&[("p", &[1, 1, 1])], Some(1));
        let f = parse_ltl("G p", &d).unwrap();
        assert_eq!(bools(evaluate(&f, &t).unwrap().row(f.root())), [true; 3]);
    }

    #[test]
    fn until_with_loop() {
        let (t, d) = trace(&[("p", &[1, 1, 0]), ("q", &[0, 0, 1])], Some(3));
        let f = parse_ltl("p U q", &d).unwrap();
        assert_eq!(bools(evaluate(&f, &t).unwrap().row(f.root())), [true; 3]);
    }

    #[test]
    fn globally_sees_loop_part_only_from_inside() {
        // p fails only at step 1, which is outside the loop 2..3.
        let (t, d) = trace(&[("p", &[0, 1, 1])], Some(2));
        let f = parse_ltl("G p", &d).unwrap();
        assert_eq!(bools(evaluate(&f, &t).unwrap().row(f.root())), [false, true, true]);
        let f = parse_ltl("F !p", &d).unwrap();
        assert_eq!(bools(evaluate(&f, &t).unwrap().row(f.root())), [true, false, false]);
    }

    #[test]
    fn temporal_needs_loop() {
        let (t, d) = trace(&[("p", &[1, 1])], None);
        let f = parse_ltl("X p", &d).unwrap();
        assert_eq!(evaluate(&f, &t), Err(LtlEvalError::NoLoopForTemporal));
        let f = parse_ltl("p & !p", &d).unwrap();
        assert!(evaluate(&f, &t).is_ok());
    }

    #[test]
    fn single_witness_for_globally() {
        let (t, d) = trace(&[("p", &[1, 0, 1])], Some(1));
        let f = parse_ltl("G p", &d).unwrap();
        let table = evaluate(&f, &t).unwrap();
        let c = explain_formula(&f, &t, &table, 1).unwrap();
        assert_eq!(c.value, Value::Bool(false));
        assert_eq!(
            c.assignments,
            vec![CauseAssignment {
                step: 2,
                var: "p".into(),
                value: Value::Bool(false)
            }]
        );
    }

    #[test]
    fn finally_false_needs_every_reachable_position() {
        let (t, d) = trace(&[("q", &[0, 0, 0])], Some(2));
        let f = parse_ltl("F q", &d).unwrap();
        let table = evaluate(&f, &t).unwrap();
        let c = explain_formula(&f, &t, &table, 1).unwrap();
        let steps: Vec<usize> = c.assignments.iter().map(|a| a.step).collect();
        assert_eq!(steps, [1, 2, 3]);
    }

    #[test]
    fn globally_true_constant() {
        let (t, d) = trace(&[("p", &[1, 1, 1])], Some(2));
        let f = parse_ltl("G p", &d).unwrap();
        let table = evaluate(&f, &t).unwrap();
        let c = explain_formula(&f, &t, &table, 1).unwrap();
        assert_eq!(c.assignments.len(), 3);
        assert!(matches!(explain_formula(&f, &t, &table, 4), Err(LtlEvalError::StepOutOfRange { .. })));
    }

    #[test]
    fn arithmetic_is_grey() {
        let (t, d) = trace(&[("x", &[1, 2]), ("p", &[1, 0])], Some(1));
        let f = parse_ltl("x + 1 > 2 & p", &d).unwrap();
        let table = evaluate(&f, &t).unwrap();
        let nodes = annotate_tree(&f, &table, 1);
        let plus = nodes.iter().find(|n| n.label == "+").unwrap();
        assert_eq!((plus.color, plus.value), (Color::Arithmetic, Value::Int(2)));
        let gt = nodes.iter().find(|n| n.label == ">").unwrap();
        assert_eq!(gt.color, Color::False);
        let p = nodes.iter().find(|n| n.label == "p").unwrap();
        assert_eq!(p.color, Color::True);
        assert_eq!(nodes[f.root()].color, Color::False);
    }

    #[test]
    fn division_by_zero_is_reported() {
        let (t, d) = trace(&[("x", &[0, 1])], Some(1));
        let f = parse_ltl("1 / x = 1", &d).unwrap();
        assert_eq!(evaluate(&f, &t), Err(LtlEvalError::DivisionByZero { step: 1 }));
    }
}
