//! Syntax tree of the supported NuSMV subset.

use std::fmt;

use super::lexer::Pos;
use crate::value::ValueKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    Not,
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    And,
    Or,
    Xor,
    Xnor,
    Implies,
    Iff,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::And => "&",
            BinOp::Or => "|",
            BinOp::Xor => "xor",
            BinOp::Xnor => "xnor",
            BinOp::Implies => "->",
            BinOp::Iff => "<->",
            BinOp::Eq => "=",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }

    pub fn is_boolean(self) -> bool {
        matches!(
            self,
            BinOp::And | BinOp::Or | BinOp::Xor | BinOp::Xnor | BinOp::Implies | BinOp::Iff
        )
    }

    pub fn is_arithmetic(self) -> bool {
        matches!(self, BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div)
    }
}

#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub pos: Pos,
}

/// Positions are ignored so that re-parsed trees compare equal.
impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Eq for Expr {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprKind {
    Bool(bool),
    Int(i64),
    /// Dotted reference: `x` or `inst.x`.
    Ref(Vec<String>),
    Next(Box<Expr>),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    /// Guarded branches; the last guard is the literal `TRUE`.
    Case(Vec<(Expr, Expr)>),
    Count(Vec<Expr>),
}

impl Expr {
    pub fn new(kind: ExprKind, pos: Pos) -> Self {
        Expr { kind, pos }
    }

    pub fn contains_next(&self) -> bool {
        let mut found = false;
        self.visit(&mut |e| found |= matches!(e.kind, ExprKind::Next(_)));
        found
    }

    /// Pre-order traversal.
    pub fn visit(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match &self.kind {
            ExprKind::Bool(_) | ExprKind::Int(_) | ExprKind::Ref(_) => {}
            ExprKind::Next(e) | ExprKind::Unary(_, e) => e.visit(f),
            ExprKind::Binary(_, a, b) => {
                a.visit(f);
                b.visit(f);
            }
            ExprKind::Case(bs) => {
                for (g, r) in bs {
                    g.visit(f);
                    r.visit(f);
                }
            }
            ExprKind::Count(es) => es.iter().for_each(|e| e.visit(f)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub kind: ValueKind,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VarType {
    Scalar(ValueKind),
    Instance { module: String, args: Vec<Expr> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarDecl {
    pub name: String,
    pub ty: VarType,
    /// Declared in an `IVAR` section.
    pub input: bool,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Define {
    pub name: String,
    pub body: Expr,
    pub pos: Pos,
}

/// An internal variable with its `init` and `next` expressions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateVar {
    pub name: String,
    pub kind: ValueKind,
    pub init: Expr,
    pub next: Expr,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub name: String,
    pub module: String,
    pub args: Vec<Expr>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Module {
    pub name: String,
    pub params: Vec<Param>,
    /// Unassigned scalar variables: the free inputs of `main`.
    pub inputs: Vec<(String, ValueKind, Pos)>,
    pub vars: Vec<StateVar>,
    pub instances: Vec<Instance>,
    pub defines: Vec<Define>,
    pub ltlspecs: Vec<String>,
    pub pos: Pos,
}

impl Module {
    pub fn var(&self, name: &str) -> Option<&StateVar> {
        self.vars.iter().find(|v| v.name == name)
    }

    pub fn define(&self, name: &str) -> Option<&Define> {
        self.defines.iter().find(|d| d.name == name)
    }

    pub fn instance(&self, name: &str) -> Option<&Instance> {
        self.instances.iter().find(|i| i.name == name)
    }

    pub fn param(&self, name: &str) -> Option<&Param> {
        self.params.iter().find(|p| p.name == name)
    }

    pub fn input(&self, name: &str) -> Option<ValueKind> {
        self.inputs.iter().find(|i| i.0 == name).map(|i| i.1)
    }

    /// Names visible as outputs from a parent: variables then defines.
    pub fn output_names(&self) -> impl Iterator<Item = &str> {
        self.vars
            .iter()
            .map(|v| v.name.as_str())
            .chain(self.defines.iter().map(|d| d.name.as_str()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    pub modules: Vec<Module>,
}

impl Model {
    pub fn module(&self, name: &str) -> Option<&Module> {
        self.modules.iter().find(|m| m.name == name)
    }

    pub fn main(&self) -> Option<&Module> {
        self.module("main")
    }

    /// Copy with declaration positions reset, for structural comparison.
    /// Expression positions are already ignored by equality.
    pub fn without_positions(&self) -> Model {
        let mut m = self.clone();
        let zero = Pos::default();
        for module in &mut m.modules {
            module.pos = zero;
            module.params.iter_mut().for_each(|p| p.pos = zero);
            module.inputs.iter_mut().for_each(|i| i.2 = zero);
            module.vars.iter_mut().for_each(|v| v.pos = zero);
            module.defines.iter_mut().for_each(|d| d.pos = zero);
            module.instances.iter_mut().for_each(|i| i.pos = zero);
        }
        m
    }

    /// All `LTLSPEC` texts in declaration order.
    pub fn ltlspecs(&self) -> impl Iterator<Item = &str> {
        self.modules
            .iter()
            .flat_map(|m| m.ltlspecs.iter().map(String::as_str))
    }
}

impl fmt::Display for UnOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UnOp::Not => "!",
            UnOp::Neg => "-",
        })
    }
}
