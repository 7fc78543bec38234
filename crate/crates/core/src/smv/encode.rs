//! Encoding of modules as complex blocks.
//!
//! Each internal variable `x` becomes a CHOICE that selects the `init` net on
//! the first step and the `next` net afterwards. Plain references inside a
//! `next` expression read the previous step, so they are routed through a
//! DELAY twin of the referenced signal; `next(y)` reads the current net of
//! `y`. Parameters always get a twin; other signals only when referenced. The first-step signal is a DELAY whose default is `TRUE` and whose
//! source is the constant `FALSE`.

use std::collections::{HashMap, HashSet};

use super::ast::*;
use super::lexer::Pos;
use super::SmvError;
use crate::ir::{validate_diagram, BasicOp, BlockId, Diagram, DiagramBuilder, GateId};
use crate::value::{Value, ValueKind};

type EResult<T> = Result<T, SmvError>;

/// A value source inside one complex block's net.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Signal {
    Gate { gate: GateId, inverted: bool },
    Const(Value),
}

impl Signal {
    fn gate(gate: GateId) -> Self {
        Signal::Gate {
            gate,
            inverted: false,
        }
    }

    fn negated(self) -> Self {
        match self {
            Signal::Gate { gate, inverted } => Signal::Gate {
                gate,
                inverted: !inverted,
            },
            Signal::Const(v) => Signal::Const(v.negate()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    /// Values at the current step.
    Current,
    /// Inside a `next` expression: plain references read the previous step.
    Delayed,
}

struct Child<'m> {
    module: &'m Module,
    outputs: HashMap<String, GateId>,
}

struct Scope<'m> {
    module: &'m Module,
    block: BlockId,
    /// Interface inputs: parameters, or the free inputs of `main`.
    sources: HashMap<String, GateId>,
    outputs: HashMap<String, GateId>,
    children: HashMap<String, Child<'m>>,
    current: HashMap<String, Signal>,
    in_progress: HashSet<String>,
    inferring: HashSet<String>,
    delayed: HashMap<String, GateId>,
    pending: Vec<(Vec<String>, BlockId, Pos)>,
    first_cycle: Option<GateId>,
    names: HashSet<String>,
}

struct Encoder<'m> {
    model: &'m Model,
    db: DiagramBuilder,
    stack: Vec<&'m str>,
}

/// Encodes the instance tree rooted at `main`.
///
/// Declared variables are `main`'s inputs plus the dotted paths of every
/// instance's variables and defines (`inst.sub.var`).
pub fn build_diagram(model: &Model) -> Result<Diagram, SmvError> {
    let main = model.main().ok_or_else(|| SmvError::UnknownModule {
        pos: Pos::default(),
        name: "main".into(),
    })?;
    let mut enc = Encoder {
        model,
        db: DiagramBuilder::new("main", "main"),
        stack: vec!["main"],
    };
    let root = enc.db.root();
    let mut sources = HashMap::new();
    for (name, kind, _) in &main.inputs {
        let g = enc.db.input(root, name, *kind);
        enc.db.declare_variable(name, g);
        sources.insert(name.clone(), g);
    }
    enc.encode_body(main, root, sources, "")?;
    enc.finish()
}

/// Encodes a single module as the root block; its parameters become the free
/// inputs and its variables and defines the root outputs.
pub fn encode_module(model: &Model, name: &str) -> Result<Diagram, SmvError> {
    let module = model.module(name).ok_or_else(|| SmvError::UnknownModule {
        pos: Pos::default(),
        name: name.to_string(),
    })?;
    if name == "main" {
        return build_diagram(model);
    }
    let mut enc = Encoder {
        model,
        db: DiagramBuilder::new(name, name),
        stack: vec![&module.name],
    };
    let root = enc.db.root();
    let mut sources = HashMap::new();
    for p in &module.params {
        let g = enc.db.input(root, &p.name, p.kind);
        enc.db.declare_variable(&p.name, g);
        sources.insert(p.name.clone(), g);
    }
    enc.encode_body(module, root, sources, "")?;
    enc.finish()
}

impl<'m> Encoder<'m> {
    fn finish(self) -> EResult<Diagram> {
        let d = self.db.finish();
        let report = validate_diagram(&d);
        if !report.is_clean() {
            let msgs: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
            return Err(SmvError::InvalidDiagram(msgs.join("; ")));
        }
        Ok(d)
    }

    /// Builds the net of `module` inside `block`; returns its output gates.
    fn encode_body(
        &mut self,
        module: &'m Module,
        block: BlockId,
        sources: HashMap<String, GateId>,
        path: &str,
    ) -> EResult<HashMap<String, GateId>> {
        let mut sc = Scope {
            module,
            block,
            sources,
            outputs: HashMap::new(),
            children: HashMap::new(),
            current: HashMap::new(),
            in_progress: HashSet::new(),
            inferring: HashSet::new(),
            delayed: HashMap::new(),
            pending: Vec::new(),
            first_cycle: None,
            names: module.instances.iter().map(|i| i.name.clone()).collect(),
        };
        let is_root = self.db.diagram().block(block).parent.is_none();
        for v in &module.vars {
            let g = self.db.output(block, &v.name, v.kind);
            sc.outputs.insert(v.name.clone(), g);
        }
        for d in &module.defines {
            // Kind fixed once the body is encoded.
            let g = self.db.output(block, &d.name, ValueKind::Bool);
            sc.outputs.insert(d.name.clone(), g);
        }
        for (name, g) in &sc.outputs {
            let var = if path.is_empty() {
                if is_root && module.name == "main" {
                    continue;
                }
                name.clone()
            } else {
                format!("{path}.{name}")
            };
            self.db.declare_variable(&var, *g);
        }
        // Every parameter gets its delayed twin, used or not.
        for p in &module.params {
            self.reference(&mut sc, std::slice::from_ref(&p.name), p.pos, Mode::Delayed)?;
        }
        for inst in &module.instances {
            let child = self.encode_instance(block, inst, path)?;
            sc.children.insert(inst.name.clone(), child);
        }
        for inst in &module.instances {
            let target: &Module = sc.children[&inst.name].module;
            let inputs: Vec<GateId> = {
                let bid = self.child_block(block, &inst.name);
                self.db.diagram().block(bid).inputs.clone()
            };
            for ((arg, param), gate) in inst.args.iter().zip(&target.params).zip(inputs) {
                let s = self.expr(&mut sc, arg, Mode::Current)?;
                let k = self.kind_of(s);
                if !k.same_sort(param.kind) {
                    return Err(SmvError::Type {
                        pos: arg.pos,
                        message: format!(
                            "argument for `{}` of `{}` has type {k}, expected {}",
                            param.name, inst.name, param.kind
                        ),
                    });
                }
                self.drive(&mut sc, s, gate);
            }
        }
        for v in &module.vars {
            let s = self.current(&mut sc, &v.name, v.pos)?;
            let out = sc.outputs[&v.name];
            self.drive(&mut sc, s, out);
        }
        for d in &module.defines {
            let s = self.current(&mut sc, &d.name, d.pos)?;
            let out = sc.outputs[&d.name];
            let k = self.kind_of(s);
            self.db.set_gate_kind(out, k);
            self.drive(&mut sc, s, out);
        }
        while let Some((path, dl, pos)) = sc.pending.pop() {
            let s = self.current_ref(&mut sc, &path, pos)?;
            let src = self.db.input_gate(dl, 1);
            self.bind(s, src);
        }
        Ok(sc.outputs)
    }

    fn child_block(&self, parent: BlockId, name: &str) -> BlockId {
        let d = self.db.diagram();
        *d.block(parent)
            .children()
            .iter()
            .find(|c| d.block(**c).name == name && d.block(**c).is_complex())
            .expect("instance block exists")
    }

    fn encode_instance(&mut self, parent: BlockId, inst: &'m Instance, path: &str) -> EResult<Child<'m>> {
        let module = self.model.module(&inst.module).ok_or_else(|| SmvError::UnknownModule {
            pos: inst.pos,
            name: inst.module.clone(),
        })?;
        if module.name == "main" || self.stack.contains(&module.name.as_str()) {
            return Err(SmvError::RecursiveInstantiation {
                pos: inst.pos,
                module: module.name.clone(),
            });
        }
        if inst.args.len() != module.params.len() {
            return Err(SmvError::UnboundInstanceParam {
                pos: inst.pos,
                instance: inst.name.clone(),
                module: module.name.clone(),
                message: format!(
                    "{} argument(s) given, {} parameter(s) declared",
                    inst.args.len(),
                    module.params.len()
                ),
            });
        }
        let block = self.db.complex(parent, &inst.name, &module.name);
        let mut sources = HashMap::new();
        for p in &module.params {
            sources.insert(p.name.clone(), self.db.input(block, &p.name, p.kind));
        }
        let child_path = if path.is_empty() {
            inst.name.clone()
        } else {
            format!("{path}.{}", inst.name)
        };
        self.stack.push(&module.name);
        let outputs = self.encode_body(module, block, sources, &child_path)?;
        self.stack.pop();
        Ok(Child { module, outputs })
    }

    fn kind_of(&self, s: Signal) -> ValueKind {
        match s {
            Signal::Gate { gate, .. } => self.db.gate_kind(gate),
            Signal::Const(v) => ValueKind::of_value(v),
        }
    }

    fn fresh_name(sc: &mut Scope, base: &str) -> String {
        let base = base.replace('.', "_");
        if sc.names.insert(base.clone()) {
            return base;
        }
        (2..)
            .map(|i| format!("{base}_{i}"))
            .find(|n| sc.names.insert(n.clone()))
            .expect("unbounded")
    }

    fn counted_name(sc: &mut Scope, op: BasicOp) -> String {
        let base = op.name().to_lowercase();
        (1..)
            .map(|i| format!("{base}{i}"))
            .find(|n| sc.names.insert(n.clone()))
            .expect("unbounded")
    }

    /// Connects a signal to a basic-block input, binding constants.
    fn bind(&mut self, s: Signal, input: GateId) {
        match s {
            Signal::Gate { gate, inverted } => {
                self.db.connect(gate, input, inverted);
            }
            Signal::Const(v) => self.db.bind_constant(input, v),
        }
    }

    /// Connects a signal to a complex-block interface gate; constants go
    /// through an ASSIGN block.
    fn drive(&mut self, sc: &mut Scope, s: Signal, sink: GateId) {
        let s = match s {
            Signal::Const(v) => {
                let name = format!("const_{}", self.db.diagram().gate(sink).name);
                let name = Self::fresh_name(sc, &name);
                let k = ValueKind::of_value(v);
                let b = self.db.basic(sc.block, &name, BasicOp::Assign, &[k], k);
                self.db.bind_constant(self.db.input_gate(b, 0), v);
                Signal::gate(self.db.output_gate(b))
            }
            s => s,
        };
        if let Signal::Gate { gate, inverted } = s {
            self.db.connect(gate, sink, inverted);
        }
    }

    fn block(&mut self, sc: &mut Scope, name: Option<String>, op: BasicOp, args: &[Signal], out: ValueKind) -> Signal {
        let name = name.unwrap_or_else(|| Self::counted_name(sc, op));
        let kinds: Vec<ValueKind> = args.iter().map(|s| self.kind_of(*s)).collect();
        let b = self.db.basic(sc.block, &name, op, &kinds, out);
        for (k, s) in args.iter().enumerate() {
            let g = self.db.input_gate(b, k);
            self.bind(*s, g);
        }
        Signal::gate(self.db.output_gate(b))
    }

    fn first_cycle(&mut self, sc: &mut Scope) -> GateId {
        if let Some(g) = sc.first_cycle {
            return g;
        }
        let name = Self::fresh_name(sc, "first_cycle");
        let b = ValueKind::Bool;
        let dl = self.db.basic(sc.block, &name, BasicOp::Delay, &[b, b], b);
        self.db.bind_constant(self.db.input_gate(dl, 0), Value::Bool(true));
        self.db.bind_constant(self.db.input_gate(dl, 1), Value::Bool(false));
        let g = self.db.output_gate(dl);
        sc.first_cycle = Some(g);
        g
    }

    /// Current-step signal of a variable or define of this module.
    fn current(&mut self, sc: &mut Scope, name: &str, pos: Pos) -> EResult<Signal> {
        if let Some(s) = sc.current.get(name) {
            return Ok(*s);
        }
        if !sc.in_progress.insert(name.to_string()) {
            return Err(SmvError::CyclicDefinition {
                pos,
                name: name.to_string(),
            });
        }
        let s = if let Some(v) = sc.module.var(name) {
            let fc = self.first_cycle(sc);
            let init = self.expr(sc, &v.init, Mode::Current)?;
            let next = self.expr(sc, &v.next, Mode::Delayed)?;
            for (s, e, which) in [(init, &v.init, "init"), (next, &v.next, "next")] {
                let k = self.kind_of(s);
                if !k.same_sort(v.kind) {
                    return Err(SmvError::Type {
                        pos: e.pos,
                        message: format!("{which}({}) has type {k}, declared {}", v.name, v.kind),
                    });
                }
            }
            let name = Self::fresh_name(sc, &format!("choice_{name}"));
            self.block(
                sc,
                Some(name),
                BasicOp::Choice,
                &[Signal::gate(fc), init, Signal::Const(Value::Bool(true)), next],
                v.kind,
            )
        } else if let Some(d) = sc.module.define(name) {
            self.expr(sc, &d.body, Mode::Current)?
        } else {
            return Err(SmvError::UnknownVariable {
                pos,
                name: name.to_string(),
            });
        };
        sc.in_progress.remove(name);
        sc.current.insert(name.to_string(), s);
        Ok(s)
    }

    fn current_ref(&mut self, sc: &mut Scope, path: &[String], pos: Pos) -> EResult<Signal> {
        match path {
            [name] => {
                if let Some(g) = sc.sources.get(name) {
                    Ok(Signal::gate(*g))
                } else if sc.module.var(name).is_some() || sc.module.define(name).is_some() {
                    self.current(sc, name, pos)
                } else if sc.children.contains_key(name) {
                    Err(SmvError::Type {
                        pos,
                        message: format!("instance `{name}` used as a value"),
                    })
                } else {
                    Err(SmvError::UnknownVariable {
                        pos,
                        name: name.clone(),
                    })
                }
            }
            [inst, out] => sc
                .children
                .get(inst)
                .and_then(|c| c.outputs.get(out))
                .map(|g| Signal::gate(*g))
                .ok_or_else(|| SmvError::UnknownVariable {
                    pos,
                    name: path.join("."),
                }),
            _ => Err(SmvError::Unsupported {
                pos,
                rule: format!(
                    "`{}`: only outputs of direct child instances can be referenced",
                    path.join(".")
                ),
            }),
        }
    }

    fn reference(&mut self, sc: &mut Scope, path: &[String], pos: Pos, mode: Mode) -> EResult<Signal> {
        let kind = self.ref_kind(sc, path, pos)?;
        if mode == Mode::Current {
            return self.current_ref(sc, path, pos);
        }
        let key = path.join(".");
        if let Some(g) = sc.delayed.get(&key) {
            return Ok(Signal::gate(*g));
        }
        let name = Self::fresh_name(sc, &format!("delay_{key}"));
        let dl = self.db.basic(sc.block, &name, BasicOp::Delay, &[kind, kind], kind);
        self.db.bind_constant(self.db.input_gate(dl, 0), kind.default_value());
        let out = self.db.output_gate(dl);
        sc.delayed.insert(key, out);
        sc.pending.push((path.to_vec(), dl, pos));
        Ok(Signal::gate(out))
    }

    /// Type of a reference without building anything.
    fn ref_kind(&self, sc: &mut Scope, path: &[String], pos: Pos) -> EResult<ValueKind> {
        match path {
            [name] => {
                if let Some(g) = sc.sources.get(name) {
                    Ok(self.db.gate_kind(*g))
                } else if let Some(v) = sc.module.var(name) {
                    Ok(v.kind)
                } else if let Some(d) = sc.module.define(name) {
                    if let Some(s) = sc.current.get(name) {
                        return Ok(self.kind_of(*s));
                    }
                    if !sc.inferring.insert(name.clone()) {
                        return Err(SmvError::CyclicDefinition {
                            pos,
                            name: name.clone(),
                        });
                    }
                    let k = self.infer(sc, &d.body);
                    sc.inferring.remove(name);
                    k
                } else {
                    self.current_ref_kind(sc, path, pos)
                }
            }
            _ => self.current_ref_kind(sc, path, pos),
        }
    }

    fn current_ref_kind(&self, sc: &Scope, path: &[String], pos: Pos) -> EResult<ValueKind> {
        match path {
            [inst, out] => sc
                .children
                .get(inst)
                .and_then(|c| c.outputs.get(out))
                .map(|g| self.db.gate_kind(*g))
                .ok_or_else(|| SmvError::UnknownVariable {
                    pos,
                    name: path.join("."),
                }),
            [name] if sc.children.contains_key(name) => Err(SmvError::Type {
                pos,
                message: format!("instance `{name}` used as a value"),
            }),
            [name] => Err(SmvError::UnknownVariable {
                pos,
                name: name.clone(),
            }),
            _ => Err(SmvError::Unsupported {
                pos,
                rule: format!(
                    "`{}`: only outputs of direct child instances can be referenced",
                    path.join(".")
                ),
            }),
        }
    }

    /// Result type of an expression, mirroring [`Encoder::expr`].
    fn infer(&self, sc: &mut Scope, e: &Expr) -> EResult<ValueKind> {
        Ok(match &e.kind {
            ExprKind::Bool(_) => ValueKind::Bool,
            ExprKind::Int(i) => ValueKind::int(*i, *i),
            ExprKind::Ref(p) => self.ref_kind(sc, p, e.pos)?,
            ExprKind::Next(a) => self.infer(sc, a)?,
            ExprKind::Unary(UnOp::Not, _) => ValueKind::Bool,
            ExprKind::Unary(UnOp::Neg, a) => {
                let k = self.infer(sc, a)?;
                arith_kind(BinOp::Sub, ValueKind::int(0, 0), k).unwrap_or(k)
            }
            ExprKind::Binary(op, a, b) if op.is_arithmetic() => {
                let (ka, kb) = (self.infer(sc, a)?, self.infer(sc, b)?);
                arith_kind(*op, ka, kb).unwrap_or(ka)
            }
            ExprKind::Binary(..) => ValueKind::Bool,
            ExprKind::Case(bs) => {
                let mut k = self.infer(sc, &bs[0].1)?;
                for (_, r) in &bs[1..] {
                    let kr = self.infer(sc, r)?;
                    k = k.hull(kr).unwrap_or(k);
                }
                k
            }
            ExprKind::Count(args) => ValueKind::int(0, args.len() as i64),
        })
    }

    fn expect_bool(&self, s: Signal, e: &Expr, what: &str) -> EResult<()> {
        let k = self.kind_of(s);
        if k.is_bool() {
            Ok(())
        } else {
            Err(SmvError::Type {
                pos: e.pos,
                message: format!("{what} expects a boolean operand, found {k}"),
            })
        }
    }

    fn expect_int(&self, s: Signal, e: &Expr, what: &str) -> EResult<ValueKind> {
        let k = self.kind_of(s);
        if k.is_int() {
            Ok(k)
        } else {
            Err(SmvError::Type {
                pos: e.pos,
                message: format!("{what} expects an integer operand, found {k}"),
            })
        }
    }

    fn expr(&mut self, sc: &mut Scope, e: &Expr, mode: Mode) -> EResult<Signal> {
        match &e.kind {
            ExprKind::Bool(b) => Ok(Signal::Const(Value::Bool(*b))),
            ExprKind::Int(i) => Ok(Signal::Const(Value::Int(*i))),
            ExprKind::Ref(path) => self.reference(sc, path, e.pos, mode),
            ExprKind::Next(inner) => match mode {
                Mode::Delayed => self.expr(sc, inner, Mode::Current),
                Mode::Current => Err(SmvError::Unsupported {
                    pos: e.pos,
                    rule: "`next` is only allowed inside `next(..)` assignments".into(),
                }),
            },
            ExprKind::Unary(UnOp::Not, a) => {
                let s = self.expr(sc, a, mode)?;
                self.expect_bool(s, a, "`!`")?;
                Ok(s.negated())
            }
            ExprKind::Unary(UnOp::Neg, a) => {
                let s = self.expr(sc, a, mode)?;
                let k = self.expect_int(s, a, "unary `-`")?;
                let out = arith_kind(BinOp::Sub, ValueKind::int(0, 0), k).expect("int kinds");
                Ok(self.block(sc, None, BasicOp::Sub, &[Signal::Const(Value::Int(0)), s], out))
            }
            ExprKind::Binary(op @ (BinOp::And | BinOp::Or), _, _) => {
                let mut operands = Vec::new();
                collect_chain(e, *op, &mut operands);
                let mut sigs = Vec::with_capacity(operands.len());
                for o in operands {
                    let s = self.expr(sc, o, mode)?;
                    self.expect_bool(s, o, op.symbol())?;
                    sigs.push(s);
                }
                let bop = if *op == BinOp::And { BasicOp::And } else { BasicOp::Or };
                Ok(self.block(sc, None, bop, &sigs, ValueKind::Bool))
            }
            ExprKind::Binary(op, a, b) => {
                let sa = self.expr(sc, a, mode)?;
                let sb = self.expr(sc, b, mode)?;
                match op {
                    BinOp::Implies => {
                        self.expect_bool(sa, a, "`->`")?;
                        self.expect_bool(sb, b, "`->`")?;
                        Ok(self.block(sc, None, BasicOp::Or, &[sa.negated(), sb], ValueKind::Bool))
                    }
                    BinOp::Iff | BinOp::Xnor | BinOp::Xor => {
                        self.expect_bool(sa, a, op.symbol())?;
                        self.expect_bool(sb, b, op.symbol())?;
                        let s = self.block(sc, None, BasicOp::Iff, &[sa, sb], ValueKind::Bool);
                        Ok(if *op == BinOp::Xor { s.negated() } else { s })
                    }
                    BinOp::Eq | BinOp::Ne => {
                        let (ka, kb) = (self.kind_of(sa), self.kind_of(sb));
                        if !ka.same_sort(kb) {
                            return Err(SmvError::Type {
                                pos: e.pos,
                                message: format!("`{}` compares {ka} with {kb}", op.symbol()),
                            });
                        }
                        let bop = if ka.is_bool() { BasicOp::Iff } else { BasicOp::Eq };
                        let s = self.block(sc, None, bop, &[sa, sb], ValueKind::Bool);
                        Ok(if *op == BinOp::Ne { s.negated() } else { s })
                    }
                    BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                        self.expect_int(sa, a, op.symbol())?;
                        self.expect_int(sb, b, op.symbol())?;
                        let bop = match op {
                            BinOp::Lt => BasicOp::Lt,
                            BinOp::Le => BasicOp::Le,
                            BinOp::Gt => BasicOp::Gt,
                            _ => BasicOp::Ge,
                        };
                        Ok(self.block(sc, None, bop, &[sa, sb], ValueKind::Bool))
                    }
                    BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div => {
                        let ka = self.expect_int(sa, a, op.symbol())?;
                        let kb = self.expect_int(sb, b, op.symbol())?;
                        let out = arith_kind(*op, ka, kb).expect("int kinds");
                        let bop = match op {
                            BinOp::Add => BasicOp::Add,
                            BinOp::Sub => BasicOp::Sub,
                            BinOp::Mul => BasicOp::Mul,
                            _ => BasicOp::Div,
                        };
                        Ok(self.block(sc, None, bop, &[sa, sb], out))
                    }
                    BinOp::And | BinOp::Or => unreachable!("handled above"),
                }
            }
            ExprKind::Case(branches) => {
                let mut sigs = Vec::with_capacity(branches.len() * 2);
                let mut out: Option<ValueKind> = None;
                for (g, r) in branches {
                    let sg = self.expr(sc, g, mode)?;
                    self.expect_bool(sg, g, "case guard")?;
                    let sr = self.expr(sc, r, mode)?;
                    let kr = self.kind_of(sr);
                    out = match out {
                        None => Some(kr),
                        Some(k) => Some(k.hull(kr).ok_or_else(|| SmvError::Type {
                            pos: r.pos,
                            message: format!("case branches mix {k} and {kr}"),
                        })?),
                    };
                    sigs.push(sg);
                    sigs.push(sr);
                }
                let out = out.expect("case has a branch");
                Ok(self.block(sc, None, BasicOp::Choice, &sigs, out))
            }
            ExprKind::Count(args) => {
                let mut sigs = Vec::with_capacity(args.len());
                for a in args {
                    let s = self.expr(sc, a, mode)?;
                    self.expect_bool(s, a, "count")?;
                    sigs.push(s);
                }
                let out = ValueKind::int(0, sigs.len() as i64);
                Ok(self.block(sc, None, BasicOp::Count, &sigs, out))
            }
        }
    }
}

fn collect_chain<'e>(e: &'e Expr, op: BinOp, out: &mut Vec<&'e Expr>) {
    match &e.kind {
        ExprKind::Binary(o, a, b) if *o == op => {
            collect_chain(a, op, out);
            collect_chain(b, op, out);
        }
        _ => out.push(e),
    }
}

fn clamp(v: i128) -> i64 {
    v.clamp(i64::MIN as i128, i64::MAX as i128) as i64
}

/// Interval bounds of an arithmetic result.
pub(crate) fn arith_kind(op: BinOp, a: ValueKind, b: ValueKind) -> Option<ValueKind> {
    let (ValueKind::Int { lo: a0, hi: a1 }, ValueKind::Int { lo: b0, hi: b1 }) = (a, b) else {
        return None;
    };
    let (a0, a1, b0, b1) = (a0 as i128, a1 as i128, b0 as i128, b1 as i128);
    let (lo, hi) = match op {
        BinOp::Add => (a0 + b0, a1 + b1),
        BinOp::Sub => (a0 - b1, a1 - b0),
        BinOp::Mul => {
            let ps = [a0 * b0, a0 * b1, a1 * b0, a1 * b1];
            (*ps.iter().min()?, *ps.iter().max()?)
        }
        BinOp::Div => {
            // Extremes of truncating division lie at dividend endpoints and
            // at divisor endpoints or +-1.
            let divisors: Vec<i128> = [b0, b1, -1, 1]
                .into_iter()
                .filter(|d| *d != 0 && b0 <= *d && *d <= b1)
                .collect();
            if divisors.is_empty() {
                (0, 0)
            } else {
                let qs: Vec<i128> = [a0, a1]
                    .iter()
                    .flat_map(|x| divisors.iter().map(move |d| x / d))
                    .collect();
                (*qs.iter().min()?, *qs.iter().max()?)
            }
        }
        _ => return None,
    };
    Some(ValueKind::int(clamp(lo), clamp(hi)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::ViolationKind;
    use crate::smv::parse_model;
    use crate::trace::Trace;

    fn diagram(src: &str) -> Diagram {
        build_diagram(&parse_model(src).unwrap()).unwrap()
    }

    fn run(d: &Diagram, input_rows: &[Vec<Value>]) -> crate::trace::ExtendedTrace {
        let sim = crate::sim::Simulator::new(d).unwrap();
        let names: Vec<String> = sim.inputs().iter().map(|(_, n)| n.clone()).collect();
        let t = Trace::new(names, input_rows.to_vec(), None).unwrap();
        crate::sim::extend_trace(d, &t, t.len()).unwrap()
    }

    #[test]
    fn identity_recurrence_holds_init_value() {
        let d = diagram(
            "MODULE main\nVAR a : boolean; m : keep(a);\n\
             MODULE keep(p) --@ p : boolean\nVAR x : boolean;\nASSIGN init(x) := TRUE; next(x) := x;\n",
        );
        let rows = vec![vec![Value::Bool(false)]; 4];
        let ext = run(&d, &rows);
        let x = d.variable("m.x").unwrap();
        assert!((1..=4).all(|s| ext.value(x, s) == Value::Bool(true)));
    }

    #[test]
    fn negation_recurrence_alternates() {
        let d = diagram(
            "MODULE main\nVAR a : boolean; m : alt(a);\n\
             MODULE alt(p) --@ p : boolean\nVAR x : boolean;\nASSIGN init(x) := TRUE; next(x) := !x;\n",
        );
        let ext = run(&d, &vec![vec![Value::Bool(false)]; 4]);
        let x = d.variable("m.x").unwrap();
        let got: Vec<Value> = (1..=4).map(|s| ext.value(x, s)).collect();
        assert_eq!(
            got,
            [true, false, true, false].map(Value::Bool).to_vec()
        );
    }

    #[test]
    fn flip_flop_shape() {
        let m = parse_model(
            "MODULE main\nVAR s : boolean; r : boolean; ff : flip_flop(s, r);\n\
             MODULE flip_flop(S, R) --@ S : boolean; R : boolean\nVAR out : boolean;\n\
             ASSIGN init(out) := FALSE;\n next(out) := case S & !R : TRUE; R : FALSE; TRUE : out; esac;\n",
        )
        .unwrap();
        let d = encode_module(&m, "flip_flop").unwrap();
        let root = d.root();
        let names: Vec<String> = d.block(root).children().iter().map(|c| d.block(*c).name.clone()).collect();
        for n in ["first_cycle", "choice_out", "delay_S", "delay_R", "delay_out", "choice1", "and1"] {
            assert!(names.contains(&n.to_string()), "missing {n} in {names:?}");
        }
        let choice = d.find_blocks("choice_out")[0];
        assert_eq!(d.block(choice).op(), Some(BasicOp::Choice));
        assert_eq!(d.block(choice).inputs.len(), 4);
        // First step selects the init net (constant FALSE).
        assert_eq!(d.block(choice).constant(d.block(choice).inputs[1]), Some(Value::Bool(false)));
    }

    #[test]
    fn next_reference_reads_current_value() {
        // y copies x's next value, so y(s) = x(s) for s >= 2.
        let d = diagram(
            "MODULE main\nVAR a : boolean; m : pair(a);\n\
             MODULE pair(p) --@ p : boolean\nVAR x : boolean; y : boolean;\n\
             ASSIGN init(x) := FALSE; next(x) := p; init(y) := TRUE; next(y) := next(x);\n",
        );
        let rows: Vec<Vec<Value>> = [true, false, true, true].iter().map(|b| vec![Value::Bool(*b)]).collect();
        let ext = run(&d, &rows);
        let (x, y) = (d.variable("m.x").unwrap(), d.variable("m.y").unwrap());
        for s in 2..=4 {
            assert_eq!(ext.value(x, s), ext.value(y, s));
        }
        assert_eq!(ext.value(y, 1), Value::Bool(true));
    }

    #[test]
    fn shared_input_has_two_outgoing_connections() {
        let d = diagram(
            "MODULE main\nVAR a : boolean; m1 : keep(a); m2 : keep(a);\n\
             MODULE keep(p) --@ p : boolean\nVAR x : boolean;\nASSIGN init(x) := p; next(x) := p;\n",
        );
        let a = d.variable("a").unwrap();
        assert_eq!(d.connections().filter(|(_, c)| c.from == a).count(), 2);
    }

    #[test]
    fn single_instance_gives_one_nested_block() {
        let d = diagram(
            "MODULE main\nVAR a : boolean; m : keep(a);\n\
             MODULE keep(p) --@ p : boolean\nVAR x : boolean;\nASSIGN init(x) := p; next(x) := x;\n",
        );
        let kids = d.block(d.root()).children();
        assert_eq!(kids.len(), 1);
        assert!(d.block(kids[0]).is_complex());
    }

    #[test]
    fn type_errors_carry_position() {
        let e = build_diagram(
            &parse_model(
                "MODULE main\nVAR a : boolean; m : bad(a);\n\
                 MODULE bad(p) --@ p : 0..3\nVAR x : boolean;\nASSIGN init(x) := FALSE; next(x) := !p;\n",
            )
            .unwrap(),
        )
        .unwrap_err();
        assert!(matches!(e, SmvError::Type { .. }), "{e:?}");
    }

    #[test]
    fn instance_errors() {
        let m = parse_model(
            "MODULE main\nVAR a : boolean; m : keep(a, a);\n\
             MODULE keep(p) --@ p : boolean\nVAR x : boolean;\nASSIGN init(x) := p; next(x) := x;\n",
        )
        .unwrap();
        assert!(matches!(build_diagram(&m), Err(SmvError::UnboundInstanceParam { .. })));
        let m = parse_model("MODULE main\nVAR m : nothing;\n").unwrap();
        assert!(matches!(build_diagram(&m), Err(SmvError::UnknownModule { .. })));
        let m = parse_model(
            "MODULE main\nVAR m : r;\nMODULE r\nVAR inner : r;\n",
        )
        .unwrap();
        assert!(matches!(build_diagram(&m), Err(SmvError::RecursiveInstantiation { .. })));
    }

    #[test]
    fn combinational_loop_between_defines_rejected() {
        let m = parse_model(
            "MODULE main\nVAR m : loopy;\nMODULE loopy\nDEFINE a := !b; b := a;\n",
        )
        .unwrap();
        assert!(matches!(build_diagram(&m), Err(SmvError::CyclicDefinition { .. })));
    }

    #[test]
    fn integer_module_ranges() {
        let d = diagram(
            "MODULE main\nVAR n : 0..3; c : counter(n);\n\
             MODULE counter(inc) --@ inc : 0..3\nVAR total : 0..20;\n\
             DEFINE big := total > 10;\n\
             ASSIGN init(total) := 0; next(total) := case total + inc <= 20 : total + inc; TRUE : total; esac;\n",
        );
        assert!(validate_diagram(&d).is_clean());
        assert_eq!(d.gate(d.variable("c.big").unwrap()).kind, ValueKind::Bool);
        let rows: Vec<Vec<Value>> = (0..5).map(|_| vec![Value::Int(3)]).collect();
        let ext = run(&d, &rows);
        assert_eq!(ext.value(d.variable("c.total").unwrap(), 5), Value::Int(12));
        assert_eq!(ext.value(d.variable("c.big").unwrap(), 5), Value::Bool(true));
    }

    #[test]
    fn div_interval_is_sound() {
        let k = arith_kind(BinOp::Div, ValueKind::int(-7, 9), ValueKind::int(-2, 3)).unwrap();
        for x in -7..=9i64 {
            for y in -2..=3i64 {
                if y != 0 {
                    assert!(k.contains(Value::Int(x / y)), "{x}/{y} not in {k}");
                }
            }
        }
        let _ = ViolationKind::Structure;
    }
}
