//! LTL by bounded unrolling of the lasso.
//!
//! The trace `s1..sl` with loop start `j` is unrolled to `L = l + 2(l - j + 1)`
//! positions, and each position folds back onto the trace. A temporal operator
//! at position `p` scans unrolled positions `p..=L`, which visits every
//! position reachable from `p` at least once.

use std::collections::HashMap;

use cx_core::smv::ast::BinOp;
use cx_core::smv::formula::{FormulaTree, NodeId, NodeOp};
use cx_core::{Trace, Value};

pub struct Unrolled<'a> {
    f: &'a FormulaTree,
    t: &'a Trace,
    horizon: usize,
    memo: HashMap<(NodeId, usize), Value>,
}

impl<'a> Unrolled<'a> {
    pub fn new(f: &'a FormulaTree, t: &'a Trace) -> Self {
        let l = t.len();
        let horizon = match t.loop_start() {
            Some(j) => l + 2 * (l - j + 1),
            None => l,
        };
        Unrolled {
            f,
            t,
            horizon,
            memo: HashMap::new(),
        }
    }

    fn fold(&self, p: usize) -> usize {
        let l = self.t.len();
        if p <= l {
            return p;
        }
        let j = self.t.loop_start().expect("no loop");
        j + (p - j) % (l - j + 1)
    }

    pub fn root(&mut self, pos: usize) -> Value {
        self.eval(self.f.root(), pos)
    }

    pub fn eval(&mut self, n: NodeId, pos: usize) -> Value {
        let p = self.fold(pos);
        if let Some(v) = self.memo.get(&(n, p)) {
            return *v;
        }
        let node = self.f.node(n).clone();
        let c = &node.children;
        let b = |v: Value| v.as_bool().unwrap();
        let i = |v: Value| v.as_int().unwrap();
        let v = match &node.op {
            NodeOp::True => Value::Bool(true),
            NodeOp::False => Value::Bool(false),
            NodeOp::Int(k) => Value::Int(*k),
            NodeOp::Var { name, .. } => self.t.value(name, p).expect("variable missing"),
            NodeOp::Not => Value::Bool(!b(self.eval(c[0], p))),
            NodeOp::Neg => Value::Int(-i(self.eval(c[0], p))),
            NodeOp::And => Value::Bool(b(self.eval(c[0], p)) && b(self.eval(c[1], p))),
            NodeOp::Or => Value::Bool(b(self.eval(c[0], p)) || b(self.eval(c[1], p))),
            NodeOp::Implies => Value::Bool(!b(self.eval(c[0], p)) || b(self.eval(c[1], p))),
            NodeOp::Iff => Value::Bool(b(self.eval(c[0], p)) == b(self.eval(c[1], p))),
            NodeOp::Next => self.eval(c[0], p + 1),
            NodeOp::Globally => Value::Bool((p..=self.horizon).all(|k| b(self.eval(c[0], k)))),
            NodeOp::Finally => Value::Bool((p..=self.horizon).any(|k| b(self.eval(c[0], k)))),
            NodeOp::Until => {
                let mut holds = false;
                for k in p..=self.horizon {
                    if b(self.eval(c[1], k)) {
                        holds = true;
                        break;
                    }
                    if !b(self.eval(c[0], k)) {
                        break;
                    }
                }
                Value::Bool(holds)
            }
            NodeOp::Arith(op) => {
                let (x, y) = (i(self.eval(c[0], p)), i(self.eval(c[1], p)));
                Value::Int(match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => x / y,
                    _ => unreachable!(),
                })
            }
            NodeOp::Rel(op) => {
                let (x, y) = (self.eval(c[0], p), self.eval(c[1], p));
                Value::Bool(match op {
                    BinOp::Eq => x == y,
                    BinOp::Ne => x != y,
                    BinOp::Lt => i(x) < i(y),
                    BinOp::Le => i(x) <= i(y),
                    BinOp::Gt => i(x) > i(y),
                    BinOp::Ge => i(x) >= i(y),
                    _ => unreachable!(),
                })
            }
        };
        self.memo.insert((n, p), v);
        v
    }
}

/// Root value of `f` at every position of `t`.
pub fn root_values(f: &FormulaTree, t: &Trace) -> Vec<Value> {
    let mut u = Unrolled::new(f, t);
    (1..=t.len()).map(|p| u.root(p)).collect()
}

/// Whether fixing `fixed` forces the root value at `step` for every
/// completion of the remaining boolean cells of `t`.
pub fn is_sufficient(f: &FormulaTree, t: &Trace, fixed: &[(String, usize)], step: usize) -> bool {
    let expected = Unrolled::new(f, t).root(step);
    let used = f.variables_under(f.root());
    let free: Vec<(String, usize)> = used
        .iter()
        .flat_map(|v| (1..=t.len()).map(move |s| (v.clone(), s)))
        .filter(|cell| !fixed.contains(cell))
        .collect();
    assert!(free.len() <= 20, "too many free cells");
    for m in 0u32..(1 << free.len()) {
        let mut t2 = t.clone();
        for (k, (v, s)) in free.iter().enumerate() {
            t2.set(v, *s, Value::Bool(m & (1 << k) != 0));
        }
        if Unrolled::new(f, &t2).root(step) != expected {
            return false;
        }
    }
    true
}
