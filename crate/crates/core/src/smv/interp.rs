//! Direct interpreter of the init/next semantics of a model.
//!
//! Works on the syntax tree only and shares no code with the diagram encoder
//! or the simulator, so it serves as their oracle. Values are computed on
//! demand: a variable is its `init` at step 1 and its `next` expression
//! evaluated one step earlier afterwards; `next(e)` evaluates `e` one step
//! later.

use std::collections::{HashMap, HashSet};

use super::ast::*;
use crate::ltl;
use crate::smv::formula::FormulaTree;
use crate::trace::Trace;
use crate::value::{Value, ValueKind};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InterpError {
    #[error("division by zero at step {step}")]
    DivisionByZero { step: usize },
    #[error("integer overflow at step {step}")]
    Overflow { step: usize },
    #[error("`{name}` = {value} escapes its range at step {step}")]
    RangeEscape { name: String, value: Value, step: usize },
    #[error("no input values for step {step}")]
    MissingInput { step: usize },
    #[error("`{name}` depends on itself")]
    Cyclic { name: String },
    #[error("{0}")]
    Model(String),
}

type IResult<T> = Result<T, InterpError>;

struct Inst<'m> {
    module: &'m Module,
    parent: Option<usize>,
    args: &'m [Expr],
    path: String,
    children: HashMap<&'m str, usize>,
}

/// The instance tree of a model, ready for evaluation.
pub struct Interpreter<'m> {
    insts: Vec<Inst<'m>>,
    inputs: Vec<(String, ValueKind)>,
    /// Observable names with their owning instance and local name.
    outputs: Vec<(String, usize, &'m str)>,
}

#[derive(Default)]
struct Memo<'m> {
    values: HashMap<(usize, &'m str, usize), Value>,
    busy: HashSet<(usize, &'m str, usize)>,
}

impl<'m> Interpreter<'m> {
    pub fn new(model: &'m Model) -> IResult<Self> {
        let main = model
            .main()
            .ok_or_else(|| InterpError::Model("no `main` module".into()))?;
        let mut it = Interpreter {
            insts: vec![Inst {
                module: main,
                parent: None,
                args: &[],
                path: String::new(),
                children: HashMap::new(),
            }],
            inputs: main.inputs.iter().map(|(n, k, _)| (n.clone(), *k)).collect(),
            outputs: Vec::new(),
        };
        for (n, _, _) in &main.inputs {
            it.outputs.push((n.clone(), 0, n.as_str()));
        }
        it.expand(model, 0, &mut vec!["main"])?;
        it.outputs.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(it)
    }

    fn expand(&mut self, model: &'m Model, id: usize, stack: &mut Vec<&'m str>) -> IResult<()> {
        let module = self.insts[id].module;
        for inst in &module.instances {
            let m = model
                .module(&inst.module)
                .ok_or_else(|| InterpError::Model(format!("unknown module `{}`", inst.module)))?;
            if stack.contains(&m.name.as_str()) {
                return Err(InterpError::Model(format!("`{}` instantiates itself", m.name)));
            }
            if m.params.len() != inst.args.len() {
                return Err(InterpError::Model(format!("wrong argument count for `{}`", inst.name)));
            }
            let path = if self.insts[id].path.is_empty() {
                inst.name.clone()
            } else {
                format!("{}.{}", self.insts[id].path, inst.name)
            };
            let child = self.insts.len();
            self.insts.push(Inst {
                module: m,
                parent: Some(id),
                args: &inst.args,
                path: path.clone(),
                children: HashMap::new(),
            });
            self.insts[id].children.insert(&inst.name, child);
            for name in m.output_names() {
                self.outputs.push((format!("{path}.{name}"), child, name));
            }
            stack.push(&m.name);
            self.expand(model, child, stack)?;
            stack.pop();
        }
        Ok(())
    }

    /// Free inputs of `main`, in declaration order.
    pub fn inputs(&self) -> &[(String, ValueKind)] {
        &self.inputs
    }

    /// Observable names: inputs, then every instance variable and define.
    pub fn names(&self) -> Vec<String> {
        self.outputs.iter().map(|o| o.0.clone()).collect()
    }

    /// Runs the model on one input row per step.
    pub fn run(&self, rows: &[Vec<Value>]) -> IResult<Trace> {
        let mut memo = Memo::default();
        let mut states = Vec::with_capacity(rows.len());
        for t in 1..=rows.len() {
            let mut state = Vec::with_capacity(self.outputs.len());
            for (_, inst, name) in &self.outputs {
                state.push(self.lookup(&mut memo, rows, *inst, name, t)?);
            }
            states.push(state);
        }
        Trace::new(self.names(), states, None).map_err(|e| InterpError::Model(e.to_string()))
    }

    /// Whether looping back to `loop_start` after the last row yields a
    /// genuine lasso: the state after the last step equals the loop-start
    /// state when the loop-start inputs are replayed.
    pub fn is_lasso(&self, rows: &[Vec<Value>], loop_start: usize) -> IResult<bool> {
        let mut ext = rows.to_vec();
        ext.push(rows[loop_start - 1].clone());
        let t = self.run(&ext)?;
        Ok(t.state(ext.len()) == t.state(loop_start))
    }

    fn lookup(&self, memo: &mut Memo<'m>, rows: &[Vec<Value>], inst: usize, name: &'m str, t: usize) -> IResult<Value> {
        let key = (inst, name, t);
        if let Some(v) = memo.values.get(&key) {
            return Ok(*v);
        }
        let cx = &self.insts[inst];
        if inst == 0 {
            if let Some(i) = self.inputs.iter().position(|(n, _)| n == name) {
                let row = rows.get(t - 1).ok_or(InterpError::MissingInput { step: t })?;
                return Ok(row[i]);
            }
        }
        if let Some(i) = cx.module.params.iter().position(|p| p.name == name) {
            let parent = cx.parent.expect("parameters only on instances");
            let v = self.eval(memo, rows, parent, &cx.args[i], t)?;
            return self.checked(cx, name, cx.module.params[i].kind, v, t);
        }
        if !memo.busy.insert(key) {
            return Err(InterpError::Cyclic {
                name: self.qualified(cx, name),
            });
        }
        let v = if let Some(var) = cx.module.var(name) {
            let v = if t == 1 {
                self.eval(memo, rows, inst, &var.init, 1)?
            } else {
                self.eval(memo, rows, inst, &var.next, t - 1)?
            };
            self.checked(cx, name, var.kind, v, t)?
        } else if let Some(d) = cx.module.define(name) {
            self.eval(memo, rows, inst, &d.body, t)?
        } else {
            return Err(InterpError::Model(format!("unknown name `{}`", self.qualified(cx, name))));
        };
        memo.busy.remove(&key);
        memo.values.insert(key, v);
        Ok(v)
    }

    fn qualified(&self, cx: &Inst, name: &str) -> String {
        if cx.path.is_empty() {
            name.to_string()
        } else {
            format!("{}.{name}", cx.path)
        }
    }

    fn checked(&self, cx: &Inst, name: &str, kind: ValueKind, v: Value, t: usize) -> IResult<Value> {
        if kind.contains(v) {
            Ok(v)
        } else if kind.admits_sort(v) {
            Err(InterpError::RangeEscape {
                name: self.qualified(cx, name),
                value: v,
                step: t,
            })
        } else {
            Err(InterpError::Model(format!("`{}` has the wrong sort", self.qualified(cx, name))))
        }
    }

    fn eval(&self, memo: &mut Memo<'m>, rows: &[Vec<Value>], inst: usize, e: &'m Expr, t: usize) -> IResult<Value> {
        let b = |v: Value| v.as_bool().ok_or_else(|| InterpError::Model("expected a boolean".into()));
        let i = |v: Value| v.as_int().ok_or_else(|| InterpError::Model("expected an integer".into()));
        let overflow = InterpError::Overflow { step: t };
        Ok(match &e.kind {
            ExprKind::Bool(x) => Value::Bool(*x),
            ExprKind::Int(x) => Value::Int(*x),
            ExprKind::Ref(path) => match path.as_slice() {
                [name] => self.lookup(memo, rows, inst, name, t)?,
                [child, name] => {
                    let c = *self.insts[inst]
                        .children
                        .get(child.as_str())
                        .ok_or_else(|| InterpError::Model(format!("unknown instance `{child}`")))?;
                    self.lookup(memo, rows, c, name, t)?
                }
                _ => return Err(InterpError::Model("deep references are not supported".into())),
            },
            ExprKind::Next(a) => self.eval(memo, rows, inst, a, t + 1)?,
            ExprKind::Unary(UnOp::Not, a) => Value::Bool(!b(self.eval(memo, rows, inst, a, t)?)?),
            ExprKind::Unary(UnOp::Neg, a) => {
                Value::Int(i(self.eval(memo, rows, inst, a, t)?)?.checked_neg().ok_or(overflow)?)
            }
            ExprKind::Binary(op, l, r) => {
                let x = self.eval(memo, rows, inst, l, t)?;
                let y = self.eval(memo, rows, inst, r, t)?;
                match op {
                    BinOp::And => Value::Bool(b(x)? && b(y)?),
                    BinOp::Or => Value::Bool(b(x)? || b(y)?),
                    BinOp::Xor => Value::Bool(b(x)? != b(y)?),
                    BinOp::Xnor | BinOp::Iff => Value::Bool(b(x)? == b(y)?),
                    BinOp::Implies => Value::Bool(!b(x)? || b(y)?),
                    BinOp::Eq => Value::Bool(x == y),
                    BinOp::Ne => Value::Bool(x != y),
                    BinOp::Lt => Value::Bool(i(x)? < i(y)?),
                    BinOp::Le => Value::Bool(i(x)? <= i(y)?),
                    BinOp::Gt => Value::Bool(i(x)? > i(y)?),
                    BinOp::Ge => Value::Bool(i(x)? >= i(y)?),
                    BinOp::Add => Value::Int(i(x)?.checked_add(i(y)?).ok_or(overflow)?),
                    BinOp::Sub => Value::Int(i(x)?.checked_sub(i(y)?).ok_or(overflow)?),
                    BinOp::Mul => Value::Int(i(x)?.checked_mul(i(y)?).ok_or(overflow)?),
                    BinOp::Div => {
                        let d = i(y)?;
                        if d == 0 {
                            return Err(InterpError::DivisionByZero { step: t });
                        }
                        Value::Int(i(x)?.checked_div(d).ok_or(overflow)?)
                    }
                }
            }
            ExprKind::Case(branches) => {
                for (g, r) in branches {
                    if b(self.eval(memo, rows, inst, g, t)?)? {
                        return self.eval(memo, rows, inst, r, t);
                    }
                }
                return Err(InterpError::Model("no case branch applies".into()));
            }
            ExprKind::Count(args) => {
                let mut n = 0;
                for a in args {
                    n += b(self.eval(memo, rows, inst, a, t)?)? as i64;
                }
                Value::Int(n)
            }
        })
    }
}

/// Searches for the shortest lasso on which `formula` is FALSE at step 1.
///
/// Lengths are tried in increasing order; for each length, input sequences
/// are enumerated in lexicographic order (earlier steps vary slowest, each
/// domain in ascending order) and loop starts from 1 upward.
pub fn find_counterexample(
    model: &Model,
    formula: &FormulaTree,
    max_len: usize,
) -> IResult<Option<Trace>> {
    let it = Interpreter::new(model)?;
    let domains: Vec<Vec<Value>> = it.inputs().iter().map(|(_, k)| k.domain().collect()).collect();
    let rows_per_step: Vec<Vec<Value>> = cartesian(&domains);
    for len in 1..=max_len {
        let mut idx = vec![0usize; len];
        loop {
            let rows: Vec<Vec<Value>> = idx.iter().map(|i| rows_per_step[*i].clone()).collect();
            if let Ok(base) = it.run(&rows) {
                for j in 1..=len {
                    let t = Trace::new(base.vars().to_vec(), (1..=len).map(|s| base.state(s).to_vec()).collect(), Some(j))
                        .map_err(|e| InterpError::Model(e.to_string()))?;
                    let violated = ltl::evaluate(formula, &t)
                        .map(|table| table.value(formula.root(), 1) == Value::Bool(false))
                        .unwrap_or(false);
                    if violated && it.is_lasso(&rows, j).unwrap_or(false) {
                        return Ok(Some(t));
                    }
                }
            }
            // Odometer, last step fastest.
            let mut k = len;
            let wrapped = loop {
                if k == 0 {
                    break true;
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < rows_per_step.len() {
                    break false;
                }
                idx[k] = 0;
            };
            if wrapped {
                break;
            }
        }
    }
    Ok(None)
}

fn cartesian(domains: &[Vec<Value>]) -> Vec<Vec<Value>> {
    let mut out: Vec<Vec<Value>> = vec![vec![]];
    for d in domains {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                d.iter().map(move |v| {
                    let mut p = prefix.clone();
                    p.push(*v);
                    p
                })
            })
            .collect();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smv::parse_model;

    const ALT: &str = "MODULE main\nVAR a : boolean; m : alt(a);\n\
        MODULE alt(p) --@ p : boolean\nVAR x : boolean;\nDEFINE both := x & p;\n\
        ASSIGN init(x) := TRUE; next(x) := !x;\n";

    #[test]
    fn alternation_by_hand() {
        let m = parse_model(ALT).unwrap();
        let it = Interpreter::new(&m).unwrap();
        assert_eq!(it.names(), ["a", "m.both", "m.x"]);
        let rows: Vec<Vec<Value>> = (0..4).map(|_| vec![Value::Bool(true)]).collect();
        let t = it.run(&rows).unwrap();
        let xs: Vec<Value> = (1..=4).map(|s| t.value("m.x", s).unwrap()).collect();
        assert_eq!(xs, [true, false, true, false].map(Value::Bool));
        assert_eq!(t.value("m.both", 3), Some(Value::Bool(true)));
    }

    #[test]
    fn lasso_check() {
        let m = parse_model(ALT).unwrap();
        let it = Interpreter::new(&m).unwrap();
        let rows: Vec<Vec<Value>> = (0..2).map(|_| vec![Value::Bool(false)]).collect();
        // x alternates with period 2, so only a loop to step 1 closes.
        assert!(it.is_lasso(&rows, 1).unwrap());
        assert!(!it.is_lasso(&rows, 2).unwrap());
    }

    #[test]
    fn range_escape_reported() {
        let m = parse_model(
            "MODULE main\nVAR a : boolean; c : cnt(a);\n\
             MODULE cnt(p) --@ p : boolean\nVAR n : 0..2;\nASSIGN init(n) := 0; next(n) := n + 1;\n",
        )
        .unwrap();
        let it = Interpreter::new(&m).unwrap();
        let rows = vec![vec![Value::Bool(true)]; 4];
        assert!(matches!(it.run(&rows), Err(InterpError::RangeEscape { step: 4, .. })));
    }
}
