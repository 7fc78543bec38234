//! Random diagrams, traces, formulas and models.

use cx_core::ir::{BasicOp, BlockId, Diagram, DiagramBuilder, GateId};
use cx_core::{Trace, Value, ValueKind};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

const B: ValueKind = ValueKind::Bool;

/// Shape knobs for [`random_diagram`].
#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub max_basic: usize,
    pub max_inputs: usize,
    pub max_depth: usize,
    pub with_choice: bool,
}

impl Shape {
    pub fn flat(max_basic: usize) -> Self {
        Shape {
            max_basic,
            max_inputs: 3,
            max_depth: 0,
            with_choice: true,
        }
    }
}

struct DiagramGen<'r> {
    rng: &'r mut StdRng,
    db: DiagramBuilder,
    budget: usize,
    counter: usize,
    shape: Shape,
}

impl DiagramGen<'_> {
    fn fresh(&mut self, stem: &str) -> String {
        self.counter += 1;
        format!("{stem}{}", self.counter)
    }

    fn feed(&mut self, to: GateId, signals: &[GateId]) {
        if self.rng.gen_bool(0.12) {
            let v = self.rng.gen_bool(0.5);
            self.db.bind_constant(to, Value::Bool(v));
        } else {
            let from = *signals.choose(self.rng).expect("no signal");
            let inv = self.rng.gen_bool(0.3);
            self.db.connect(from, to, inv);
        }
    }

    fn net(&mut self, parent: BlockId, sources: Vec<GateId>, depth: usize) -> GateId {
        let mut signals = sources;
        let mut pending = Vec::new();
        let elements = self.rng.gen_range(1..=3);
        for _ in 0..elements {
            if self.budget == 0 {
                break;
            }
            if depth > 0 && self.budget >= 2 && self.rng.gen_bool(0.35) {
                let name = self.fresh("C");
                let c = self.db.complex(parent, &name, &format!("T{name}"));
                let mut inner = Vec::new();
                for i in 0..self.rng.gen_range(1..=2) {
                    let g = self.db.input(c, &format!("i{i}"), B);
                    let from = *signals.choose(self.rng).unwrap();
                    let inv = self.rng.gen_bool(0.3);
                    self.db.connect(from, g, inv);
                    inner.push(g);
                }
                let inner_out = self.net(c, inner, depth - 1);
                let o = self.db.output(c, "o", B);
                self.db.connect(inner_out, o, false);
                signals.push(o);
                continue;
            }
            self.budget -= 1;
            let mut ops = vec![BasicOp::And, BasicOp::Or, BasicOp::Iff, BasicOp::Delay, BasicOp::Assign];
            if self.shape.with_choice {
                ops.push(BasicOp::Choice);
            }
            let op = *ops.choose(self.rng).unwrap();
            let arity = match op {
                BasicOp::And | BasicOp::Or => self.rng.gen_range(1..=3),
                BasicOp::Iff | BasicOp::Delay => 2,
                BasicOp::Choice => 2 * self.rng.gen_range(1..=2),
                _ => 1,
            };
            let name = self.fresh(&op.name().to_lowercase());
            let b = self.db.basic(parent, &name, op, &vec![B; arity], B);
            for i in 0..arity {
                let g = self.db.input_gate(b, i);
                match (op, i) {
                    (BasicOp::Delay, 0) => {
                        let v = self.rng.gen_bool(0.5);
                        self.db.bind_constant(g, Value::Bool(v));
                    }
                    (BasicOp::Delay, _) => pending.push(g),
                    (BasicOp::Choice, i) if i == arity - 2 && self.rng.gen_bool(0.6) => {
                        self.db.bind_constant(g, Value::Bool(true));
                    }
                    _ => self.feed(g, &signals),
                }
            }
            signals.push(self.db.output_gate(b));
        }
        for g in pending {
            let from = *signals.choose(self.rng).unwrap();
            let inv = self.rng.gen_bool(0.3);
            self.db.connect(from, g, inv);
        }
        *signals.last().unwrap()
    }
}

/// A boolean diagram with root inputs `u1..` and root output `out`. DELAY
/// sources may come from later blocks, so feedback through DELAY occurs.
pub fn random_diagram(rng: &mut StdRng, shape: Shape) -> Diagram {
    let mut db = DiagramBuilder::new("R", "R");
    let root = db.root();
    let mut inputs = Vec::new();
    for i in 1..=rng.gen_range(1..=shape.max_inputs) {
        let name = format!("u{i}");
        let g = db.input(root, &name, B);
        db.declare_variable(&name, g);
        inputs.push(g);
    }
    let budget = rng.gen_range(1..=shape.max_basic);
    let mut gen = DiagramGen {
        rng,
        db,
        budget,
        counter: 0,
        shape,
    };
    let last = gen.net(root, inputs, shape.max_depth);
    let out = gen.db.output(root, "out", B);
    gen.db.connect(last, out, false);
    gen.db.declare_variable("out", out);
    gen.db.finish()
}

/// A diagram in which every gate feeds at most one connection and every
/// root input is read once, so no two paths reconverge.
pub fn random_tree(rng: &mut StdRng, max_basic: usize) -> Diagram {
    fn subtree(rng: &mut StdRng, db: &mut DiagramBuilder, budget: &mut usize, n: &mut usize) -> GateId {
        let root = db.root();
        if *budget == 0 || rng.gen_bool(0.25) {
            *n += 1;
            let name = format!("u{n}");
            let g = db.input(root, &name, B);
            db.declare_variable(&name, g);
            return g;
        }
        *budget -= 1;
        let op = *[BasicOp::And, BasicOp::Or, BasicOp::Iff, BasicOp::Delay, BasicOp::Assign]
            .choose(rng)
            .unwrap();
        let arity = match op {
            BasicOp::And | BasicOp::Or => rng.gen_range(1..=3),
            BasicOp::Iff | BasicOp::Delay => 2,
            _ => 1,
        };
        *n += 1;
        let b = db.basic(root, &format!("{}{n}", op.name().to_lowercase()), op, &vec![B; arity], B);
        for i in 0..arity {
            let g = db.input_gate(b, i);
            if (op == BasicOp::Delay && i == 0) || rng.gen_bool(0.1) {
                let v = rng.gen_bool(0.5);
                db.bind_constant(g, Value::Bool(v));
            } else {
                let from = subtree(rng, db, budget, n);
                let inv = rng.gen_bool(0.3);
                db.connect(from, g, inv);
            }
        }
        db.output_gate(b)
    }
    let mut db = DiagramBuilder::new("R", "R");
    let mut budget = rng.gen_range(1..=max_basic);
    let mut n = 0;
    let top = subtree(rng, &mut db, &mut budget, &mut n);
    let root = db.root();
    let out = db.output(root, "out", B);
    db.connect(top, out, false);
    db.declare_variable("out", out);
    db.finish()
}

/// Random values for the root inputs of `d`.
pub fn random_input_trace(rng: &mut StdRng, d: &Diagram, len: usize) -> Trace {
    let vars: Vec<String> = d
        .variables()
        .iter()
        .filter(|(_, g)| d.root_inputs().contains(g))
        .map(|(n, _)| n.clone())
        .collect();
    let states = (0..len)
        .map(|_| vars.iter().map(|_| Value::Bool(rng.gen_bool(0.5))).collect())
        .collect();
    Trace::new(vars, states, None).unwrap()
}

/// A random lasso over boolean variables and, optionally, one integer in `0..=3`.
pub fn random_lasso(rng: &mut StdRng, bools: &[&str], int: Option<&str>, max_len: usize) -> Trace {
    let len = rng.gen_range(1..=max_len);
    let mut vars: Vec<String> = bools.iter().map(|s| s.to_string()).collect();
    vars.extend(int.map(str::to_string));
    let states = (0..len)
        .map(|_| {
            let mut row: Vec<Value> = bools.iter().map(|_| Value::Bool(rng.gen_bool(0.5))).collect();
            if int.is_some() {
                row.push(Value::Int(rng.gen_range(0..=3)));
            }
            row
        })
        .collect();
    let loop_start = rng.gen_range(1..=len);
    Trace::new(vars, states, Some(loop_start)).unwrap()
}

/// Random LTL text of nesting depth at most `depth`.
pub fn random_formula(rng: &mut StdRng, depth: usize, bools: &[&str], int: Option<&str>) -> String {
    if depth == 0 || rng.gen_bool(0.2) {
        return match rng.gen_range(0..10) {
            0 => if rng.gen_bool(0.5) { "TRUE" } else { "FALSE" }.to_string(),
            1 | 2 if int.is_some() => {
                let x = int.unwrap();
                let c = rng.gen_range(0..=3);
                match rng.gen_range(0..4) {
                    0 => format!("{x} > {c}"),
                    1 => format!("{x} + 1 = {c}"),
                    2 => format!("{x} <= {c}"),
                    _ => format!("{x} - {c} != 0"),
                }
            }
            _ => bools.choose(rng).unwrap().to_string(),
        };
    }
    let sub = |rng: &mut StdRng| {
        let d = rng.gen_range(0..depth);
        random_formula(rng, d, bools, int)
    };
    match rng.gen_range(0..9) {
        0 => format!("!({})", sub(rng)),
        1 => format!("X ({})", sub(rng)),
        2 => format!("G ({})", sub(rng)),
        3 => format!("F ({})", sub(rng)),
        4 => format!("(({}) U ({}))", sub(rng), sub(rng)),
        5 => format!("(({}) & ({}))", sub(rng), sub(rng)),
        6 => format!("(({}) | ({}))", sub(rng), sub(rng)),
        7 => format!("(({}) -> ({}))", sub(rng), sub(rng)),
        _ => format!("(({}) <-> ({}))", sub(rng), sub(rng)),
    }
}

struct ModuleScope {
    bools: Vec<String>,
    ints: Vec<String>,
}

fn bool_expr(rng: &mut StdRng, cx: &ModuleScope, depth: usize) -> String {
    if depth == 0 || rng.gen_bool(0.3) {
        if !cx.ints.is_empty() && rng.gen_bool(0.2) {
            let x = cx.ints.choose(rng).unwrap();
            let op = ["<", "<=", ">", ">=", "=", "!="].choose(rng).unwrap();
            return format!("{x} {op} {}", rng.gen_range(0..=4));
        }
        if cx.bools.is_empty() || rng.gen_bool(0.1) {
            return if rng.gen_bool(0.5) { "TRUE" } else { "FALSE" }.into();
        }
        return cx.bools.choose(rng).unwrap().clone();
    }
    let a = bool_expr(rng, cx, depth - 1);
    match rng.gen_range(0..7) {
        0 => format!("!({a})"),
        1 => format!("({a}) & ({})", bool_expr(rng, cx, depth - 1)),
        2 => format!("({a}) | ({})", bool_expr(rng, cx, depth - 1)),
        3 => format!("({a}) xor ({})", bool_expr(rng, cx, depth - 1)),
        4 => format!("({a}) -> ({})", bool_expr(rng, cx, depth - 1)),
        5 => format!("({a}) <-> ({})", bool_expr(rng, cx, depth - 1)),
        _ => format!(
            "case {a} : {}; TRUE : {}; esac",
            bool_expr(rng, cx, depth - 1),
            bool_expr(rng, cx, depth - 1)
        ),
    }
}

fn int_expr(rng: &mut StdRng, cx: &ModuleScope, depth: usize) -> String {
    if depth == 0 || rng.gen_bool(0.3) {
        if !cx.ints.is_empty() && rng.gen_bool(0.6) {
            return cx.ints.choose(rng).unwrap().clone();
        }
        if cx.bools.len() >= 2 && rng.gen_bool(0.3) {
            let a = cx.bools.choose(rng).unwrap();
            let b = cx.bools.choose(rng).unwrap();
            return format!("count({a}, {b})");
        }
        return rng.gen_range(0..=3).to_string();
    }
    let op = ["+", "-", "*"].choose(rng).unwrap();
    format!("({}) {op} ({})", int_expr(rng, cx, depth - 1), int_expr(rng, cx, depth - 1))
}

/// A random deterministic model whose main module has boolean inputs, an
/// optional integer input and one or two instances of submodules.
pub fn random_model(rng: &mut StdRng) -> String {
    let mut out = String::new();
    let types = rng.gen_range(1..=2);
    // Per type: number of bool params, has int param, bool var names, int var names.
    let mut sigs = Vec::new();
    let mut bodies = Vec::new();
    for t in 0..types {
        let np = rng.gen_range(1..=3);
        let int_param = rng.gen_bool(0.4);
        let mut params: Vec<String> = (0..np).map(|i| format!("p{i}")).collect();
        let mut ann: Vec<String> = params.iter().map(|p| format!("{p} : boolean")).collect();
        if int_param {
            params.push("q".into());
            ann.push("q : 0..3".into());
        }
        let bvars: Vec<String> = (0..rng.gen_range(1..=3)).map(|i| format!("b{i}")).collect();
        let ivars: Vec<String> = if rng.gen_bool(0.5) { vec!["n0".into()] } else { vec![] };
        let mut body = format!("MODULE M{t}({}) --@ {}\nVAR\n", params.join(", "), ann.join("; "));
        for v in &bvars {
            body += &format!("  {v} : boolean;\n");
        }
        for v in &ivars {
            body += &format!("  {v} : 0..7;\n");
        }
        let pb: Vec<String> = params.iter().filter(|p| *p != "q").cloned().collect();
        let pi: Vec<String> = if int_param { vec!["q".into()] } else { vec![] };
        let ndef = rng.gen_range(0..=2);
        let mut defs = Vec::new();
        if ndef > 0 {
            body += "DEFINE\n";
            for d in 0..ndef {
                let mut bools = pb.clone();
                bools.extend(bvars.iter().cloned());
                bools.extend(defs.iter().cloned());
                let mut ints = pi.clone();
                ints.extend(ivars.iter().cloned());
                let e = bool_expr(rng, &ModuleScope { bools, ints }, 2);
                body += &format!("  d{d} := {e};\n");
                defs.push(format!("d{d}"));
            }
        }
        body += "ASSIGN\n";
        for (i, v) in bvars.iter().enumerate() {
            let mut init_bools = pb.clone();
            init_bools.extend(bvars[..i].iter().cloned());
            let init = bool_expr(rng, &ModuleScope { bools: init_bools, ints: pi.clone() }, 1);
            let mut bools = pb.clone();
            bools.extend(bvars.iter().cloned());
            bools.extend(defs.iter().cloned());
            bools.extend(bvars[..i].iter().map(|b| format!("next({b})")));
            let mut ints = pi.clone();
            ints.extend(ivars.iter().cloned());
            let next = bool_expr(rng, &ModuleScope { bools, ints }, 2);
            body += &format!("  init({v}) := {init};\n  next({v}) := {next};\n");
        }
        for v in &ivars {
            let init = if int_param && rng.gen_bool(0.5) {
                "q".to_string()
            } else {
                rng.gen_range(0..=7).to_string()
            };
            let mut bools = pb.clone();
            bools.extend(bvars.iter().cloned());
            let mut ints = pi.clone();
            ints.extend(ivars.iter().cloned());
            let e = int_expr(rng, &ModuleScope { bools, ints }, 2);
            body += &format!(
                "  init({v}) := {init};\n  next({v}) := case ({e}) >= 0 & ({e}) <= 7 : {e}; TRUE : 0; esac;\n"
            );
        }
        sigs.push((np, int_param, bvars));
        bodies.push(body);
    }
    let ni = rng.gen_range(1..=3);
    let int_input = rng.gen_bool(0.4);
    out += "MODULE main\nVAR\n";
    let mut bools: Vec<String> = (0..ni).map(|i| format!("i{i}")).collect();
    for b in &bools {
        out += &format!("  {b} : boolean;\n");
    }
    let ints: Vec<String> = if int_input { vec!["k0".into()] } else { vec![] };
    for k in &ints {
        out += &format!("  {k} : 0..3;\n");
    }
    for m in 0..rng.gen_range(1..=2) {
        let t = rng.gen_range(0..types);
        let (np, int_param, bvars) = &sigs[t];
        let cx = ModuleScope {
            bools: bools.clone(),
            ints: ints.clone(),
        };
        let mut args: Vec<String> = (0..*np).map(|_| bool_expr(rng, &cx, 1)).collect();
        if *int_param {
            args.push(if int_input && rng.gen_bool(0.7) {
                "k0".into()
            } else {
                rng.gen_range(0..=3).to_string()
            });
        }
        out += &format!("  m{m} : M{t}({});\n", args.join(", "));
        bools.extend(bvars.iter().map(|b| format!("m{m}.{b}")));
    }
    for b in bodies {
        out += &b;
    }
    out
}
