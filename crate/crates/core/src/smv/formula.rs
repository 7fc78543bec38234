//! LTL formulas over model variables.
//!
//! Precedence, tightest first: unary (`!`, `X`, `G`, `F`), `U` (right
//! associative), `&`, `|`, then `->` and `<->` (right associative).
//! Relational and arithmetic expressions form atoms. Bounded and past-time
//! operators are rejected.

use std::fmt::Write;

use serde::Serialize;

use super::ast::BinOp;
use super::lexer::{tokenize, Pos, Tok, Token};
use crate::value::ValueKind;

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeOp {
    True,
    False,
    Int(i64),
    /// A model variable: resolved full name and the text as written.
    Var { name: String, text: String, kind: ValueKind },
    Not,
    And,
    Or,
    Implies,
    Iff,
    Next,
    Globally,
    Finally,
    Until,
    /// Unary minus.
    Neg,
    /// `+ - * /`.
    Arith(BinOp),
    /// `= != < <= > >=`.
    Rel(BinOp),
}

impl NodeOp {
    pub fn is_temporal(&self) -> bool {
        matches!(self, NodeOp::Next | NodeOp::Globally | NodeOp::Finally | NodeOp::Until)
    }

    /// Short label for tree displays.
    pub fn label(&self) -> String {
        match self {
            NodeOp::True => "TRUE".into(),
            NodeOp::False => "FALSE".into(),
            NodeOp::Int(i) => i.to_string(),
            NodeOp::Var { text, .. } => text.clone(),
            NodeOp::Not => "!".into(),
            NodeOp::And => "&".into(),
            NodeOp::Or => "|".into(),
            NodeOp::Implies => "->".into(),
            NodeOp::Iff => "<->".into(),
            NodeOp::Next => "X".into(),
            NodeOp::Globally => "G".into(),
            NodeOp::Finally => "F".into(),
            NodeOp::Until => "U".into(),
            NodeOp::Neg => "-".into(),
            NodeOp::Arith(op) | NodeOp::Rel(op) => op.symbol().into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub op: NodeOp,
    pub children: Vec<NodeId>,
    /// Boolean, or the integer range of an arithmetic subterm.
    pub kind: ValueKind,
    /// Whether a temporal operator occurs in this subtree.
    pub temporal: bool,
}

/// Parsed formula. Nodes are stored children-first, so every child id is
/// smaller than its parent's.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormulaTree {
    nodes: Vec<Node>,
    root: NodeId,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum LtlError {
    #[error("{pos}: syntax error: {message}")]
    Syntax { pos: Pos, message: String },
    #[error("{pos}: unsupported operator `{operator}` (bounded and past-time operators are not supported)")]
    UnsupportedOperator { pos: Pos, operator: String },
    #[error("{pos}: unknown variable `{name}`")]
    UnknownVariable { pos: Pos, name: String },
    #[error("{pos}: `{name}` is ambiguous: {}", candidates.join(", "))]
    AmbiguousVariable {
        pos: Pos,
        name: String,
        candidates: Vec<String>,
    },
    #[error("{pos}: type error: {message}")]
    Type { pos: Pos, message: String },
}

impl FormulaTree {
    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn has_temporal(&self) -> bool {
        self.nodes[self.root].temporal
    }

    /// Full variable names occurring under `id`, sorted and deduplicated.
    pub fn variables_under(&self, id: NodeId) -> Vec<String> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(n) = stack.pop() {
            if let NodeOp::Var { name, .. } = &self.nodes[n].op {
                out.push(name.clone());
            }
            stack.extend(&self.nodes[n].children);
        }
        out.sort();
        out.dedup();
        out
    }

    /// Depth of the tree: a single atom has depth 0.
    pub fn depth(&self) -> usize {
        fn go(t: &FormulaTree, id: NodeId) -> usize {
            t.nodes[id].children.iter().map(|c| 1 + go(t, *c)).max().unwrap_or(0)
        }
        go(self, self.root)
    }

    /// Text of the subformula rooted at `id`.
    pub fn text(&self, id: NodeId) -> String {
        let mut s = String::new();
        self.write(&mut s, id, false);
        s
    }

    fn write(&self, out: &mut String, id: NodeId, nested: bool) {
        let n = &self.nodes[id];
        match n.children.as_slice() {
            [] => out.push_str(&n.op.label()),
            [a] => {
                let sep = if matches!(n.op, NodeOp::Not | NodeOp::Neg) { "" } else { " " };
                let _ = write!(out, "{}{sep}", n.op.label());
                // `--` would start a comment.
                if n.op == NodeOp::Neg && self.nodes[*a].op == NodeOp::Neg {
                    out.push('(');
                    self.write(out, *a, false);
                    out.push(')');
                } else {
                    self.write(out, *a, true);
                }
            }
            [a, b] => {
                if nested {
                    out.push('(');
                }
                self.write(out, *a, true);
                let _ = write!(out, " {} ", n.op.label());
                self.write(out, *b, true);
                if nested {
                    out.push(')');
                }
            }
            _ => unreachable!("nodes have at most two children"),
        }
    }

    /// Builds a tree from parts; used by generators in tests and benches.
    pub fn builder() -> TreeBuilder {
        TreeBuilder { nodes: Vec::new() }
    }
}

impl std::fmt::Display for FormulaTree {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.text(self.root))
    }
}

/// Incremental construction of a well-typed tree.
pub struct TreeBuilder {
    nodes: Vec<Node>,
}

impl TreeBuilder {
    pub fn var(&mut self, name: &str, kind: ValueKind) -> NodeId {
        self.push(
            NodeOp::Var {
                name: name.into(),
                text: name.into(),
                kind,
            },
            vec![],
            kind,
        )
    }

    pub fn constant(&mut self, b: bool) -> NodeId {
        let op = if b { NodeOp::True } else { NodeOp::False };
        self.push(op, vec![], ValueKind::Bool)
    }

    pub fn unary(&mut self, op: NodeOp, a: NodeId) -> NodeId {
        self.push(op, vec![a], ValueKind::Bool)
    }

    pub fn binary(&mut self, op: NodeOp, a: NodeId, b: NodeId) -> NodeId {
        self.push(op, vec![a, b], ValueKind::Bool)
    }

    fn push(&mut self, op: NodeOp, children: Vec<NodeId>, kind: ValueKind) -> NodeId {
        let temporal = op.is_temporal() || children.iter().any(|c| self.nodes[*c].temporal);
        self.nodes.push(Node {
            op,
            children,
            kind,
            temporal,
        });
        self.nodes.len() - 1
    }

    /// Finishes with the most recently added node as root.
    pub fn finish(self) -> FormulaTree {
        let root = self.nodes.len() - 1;
        FormulaTree {
            nodes: self.nodes,
            root,
        }
    }
}

/// Parses `text`, resolving atoms against the declared variables. A name
/// resolves to an exact match or else to the unique variable whose dotted
/// path ends with it.
pub fn parse_ltl(text: &str, vars: &[(String, ValueKind)]) -> Result<FormulaTree, LtlError> {
    let toks = tokenize(text).map_err(|e| LtlError::Syntax {
        pos: e.pos,
        message: e.message,
    })?;
    let mut p = LtlParser {
        toks,
        i: 0,
        vars,
        b: TreeBuilder { nodes: Vec::new() },
    };
    let root = p.formula()?;
    if !matches!(p.peek(), Tok::Eof) {
        return Err(p.expected("end of formula"));
    }
    let kind = p.b.nodes[root].kind;
    if !kind.is_bool() {
        return Err(LtlError::Type {
            pos: Pos::default(),
            message: format!("formula has type {kind}, expected boolean"),
        });
    }
    Ok(FormulaTree {
        nodes: p.b.nodes,
        root,
    })
}

struct LtlParser<'a> {
    toks: Vec<Token>,
    i: usize,
    vars: &'a [(String, ValueKind)],
    b: TreeBuilder,
}

type PResult<T> = Result<T, LtlError>;

impl LtlParser<'_> {
    fn peek(&self) -> &Tok {
        // Annotations carry no meaning in formulas.
        let mut i = self.i;
        while let Tok::Annotation(_) = self.toks[i].tok {
            i += 1;
        }
        &self.toks[i].tok
    }

    fn peek2(&self) -> &Tok {
        let mut i = self.i;
        let mut seen = 0;
        loop {
            if !matches!(self.toks[i].tok, Tok::Annotation(_)) {
                if seen == 1 || matches!(self.toks[i].tok, Tok::Eof) {
                    return &self.toks[i].tok;
                }
                seen += 1;
            }
            i += 1;
        }
    }

    fn pos(&self) -> Pos {
        let mut i = self.i;
        while let Tok::Annotation(_) = self.toks[i].tok {
            i += 1;
        }
        self.toks[i].pos
    }

    fn bump(&mut self) -> Token {
        while let Tok::Annotation(_) = self.toks[self.i].tok {
            self.i += 1;
        }
        let t = self.toks[self.i].clone();
        if !matches!(t.tok, Tok::Eof) {
            self.i += 1;
        }
        t
    }

    fn at_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn at_word(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == w)
    }

    fn expected(&self, what: &str) -> LtlError {
        LtlError::Syntax {
            pos: self.pos(),
            message: format!("expected {what}, found {}", self.peek()),
        }
    }

    fn is_declared(&self, name: &str) -> bool {
        self.vars.iter().any(|(v, _)| v == name)
    }

    fn type_error(pos: Pos, message: String) -> LtlError {
        LtlError::Type { pos, message }
    }

    fn require_bool(&self, id: NodeId, pos: Pos, what: &str) -> PResult<()> {
        let k = self.b.nodes[id].kind;
        if k.is_bool() {
            Ok(())
        } else {
            Err(Self::type_error(pos, format!("{what} expects a boolean operand, found {k}")))
        }
    }

    fn require_int(&self, id: NodeId, pos: Pos, what: &str) -> PResult<ValueKind> {
        let n = &self.b.nodes[id];
        if n.temporal {
            return Err(Self::type_error(
                pos,
                format!("temporal operator inside the operand of `{what}`"),
            ));
        }
        if n.kind.is_int() {
            Ok(n.kind)
        } else {
            Err(Self::type_error(pos, format!("`{what}` expects an integer operand, found {}", n.kind)))
        }
    }

    fn formula(&mut self) -> PResult<NodeId> {
        let pos = self.pos();
        let a = self.or()?;
        let op = if self.at_sym("->") {
            NodeOp::Implies
        } else if self.at_sym("<->") {
            NodeOp::Iff
        } else {
            return Ok(a);
        };
        let label = op.label();
        self.bump();
        let rpos = self.pos();
        let b = self.formula()?;
        self.require_bool(a, pos, &label)?;
        self.require_bool(b, rpos, &label)?;
        Ok(self.b.binary(op, a, b))
    }

    fn or(&mut self) -> PResult<NodeId> {
        let pos = self.pos();
        let mut a = self.and()?;
        while self.at_sym("|") {
            self.bump();
            let rpos = self.pos();
            let b = self.and()?;
            self.require_bool(a, pos, "`|`")?;
            self.require_bool(b, rpos, "`|`")?;
            a = self.b.binary(NodeOp::Or, a, b);
        }
        Ok(a)
    }

    fn and(&mut self) -> PResult<NodeId> {
        let pos = self.pos();
        let mut a = self.until()?;
        while self.at_sym("&") {
            self.bump();
            let rpos = self.pos();
            let b = self.until()?;
            self.require_bool(a, pos, "`&`")?;
            self.require_bool(b, rpos, "`&`")?;
            a = self.b.binary(NodeOp::And, a, b);
        }
        Ok(a)
    }

    fn until(&mut self) -> PResult<NodeId> {
        let pos = self.pos();
        let a = self.unary()?;
        for w in ["S", "T", "V"] {
            if self.at_word(w) && !self.is_declared(w) {
                return Err(LtlError::UnsupportedOperator {
                    pos: self.pos(),
                    operator: w.into(),
                });
            }
        }
        if !self.at_word("U") {
            return Ok(a);
        }
        self.bump();
        let rpos = self.pos();
        let b = self.until()?;
        self.require_bool(a, pos, "`U`")?;
        self.require_bool(b, rpos, "`U`")?;
        Ok(self.b.binary(NodeOp::Until, a, b))
    }

    fn unary(&mut self) -> PResult<NodeId> {
        let pos = self.pos();
        let op = match self.peek() {
            Tok::Sym("!") => NodeOp::Not,
            Tok::Ident(w) if matches!(w.as_str(), "X" | "G" | "F") => {
                let op = match w.as_str() {
                    "X" => NodeOp::Next,
                    "G" => NodeOp::Globally,
                    _ => NodeOp::Finally,
                };
                if matches!(self.peek2(), Tok::Sym("[")) {
                    return Err(LtlError::UnsupportedOperator {
                        pos,
                        operator: format!("{w}[..]"),
                    });
                }
                op
            }
            Tok::Ident(w) if matches!(w.as_str(), "H" | "O" | "Y" | "Z") && !self.is_declared(w) => {
                return Err(LtlError::UnsupportedOperator {
                    pos,
                    operator: w.clone(),
                });
            }
            _ => return self.rel(),
        };
        let label = op.label();
        self.bump();
        let apos = self.pos();
        let a = self.unary()?;
        self.require_bool(a, apos, &format!("`{label}`"))?;
        Ok(self.b.unary(op, a))
    }

    fn rel(&mut self) -> PResult<NodeId> {
        let pos = self.pos();
        let a = self.arith()?;
        let op = match self.peek() {
            Tok::Sym("=") => BinOp::Eq,
            Tok::Sym("!=") => BinOp::Ne,
            Tok::Sym("<") => BinOp::Lt,
            Tok::Sym("<=") => BinOp::Le,
            Tok::Sym(">") => BinOp::Gt,
            Tok::Sym(">=") => BinOp::Ge,
            _ => return Ok(a),
        };
        self.bump();
        let rpos = self.pos();
        let b = self.arith()?;
        if matches!(op, BinOp::Eq | BinOp::Ne) {
            for (id, p) in [(a, pos), (b, rpos)] {
                if self.b.nodes[id].temporal {
                    return Err(Self::type_error(
                        p,
                        format!("temporal operator inside the operand of `{}`", op.symbol()),
                    ));
                }
            }
            let (ka, kb) = (self.b.nodes[a].kind, self.b.nodes[b].kind);
            if !ka.same_sort(kb) {
                return Err(Self::type_error(pos, format!("`{}` compares {ka} with {kb}", op.symbol())));
            }
        } else {
            self.require_int(a, pos, op.symbol())?;
            self.require_int(b, rpos, op.symbol())?;
        }
        Ok(self.b.push(NodeOp::Rel(op), vec![a, b], ValueKind::Bool))
    }

    fn arith(&mut self) -> PResult<NodeId> {
        let pos = self.pos();
        let mut a = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Sym("+") => BinOp::Add,
                Tok::Sym("-") => BinOp::Sub,
                _ => return Ok(a),
            };
            self.bump();
            let rpos = self.pos();
            let b = self.term()?;
            a = self.arith_node(op, a, b, pos, rpos)?;
        }
    }

    fn term(&mut self) -> PResult<NodeId> {
        let pos = self.pos();
        let mut a = self.factor()?;
        loop {
            let op = match self.peek() {
                Tok::Sym("*") => BinOp::Mul,
                Tok::Sym("/") => BinOp::Div,
                Tok::Ident(w) if w == "mod" => {
                    return Err(LtlError::UnsupportedOperator {
                        pos: self.pos(),
                        operator: "mod".into(),
                    })
                }
                _ => return Ok(a),
            };
            self.bump();
            let rpos = self.pos();
            let b = self.factor()?;
            a = self.arith_node(op, a, b, pos, rpos)?;
        }
    }

    fn arith_node(&mut self, op: BinOp, a: NodeId, b: NodeId, pa: Pos, pb: Pos) -> PResult<NodeId> {
        let ka = self.require_int(a, pa, op.symbol())?;
        let kb = self.require_int(b, pb, op.symbol())?;
        let k = super::encode::arith_kind(op, ka, kb).expect("integer kinds");
        Ok(self.b.push(NodeOp::Arith(op), vec![a, b], k))
    }

    fn factor(&mut self) -> PResult<NodeId> {
        if self.at_sym("-") {
            let pos = self.pos();
            self.bump();
            let a = self.factor()?;
            let k = self.require_int(a, pos, "-")?;
            let k = super::encode::arith_kind(BinOp::Sub, ValueKind::int(0, 0), k).expect("integer kinds");
            return Ok(self.b.push(NodeOp::Neg, vec![a], k));
        }
        self.atom()
    }

    fn atom(&mut self) -> PResult<NodeId> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Int(i) => {
                self.bump();
                Ok(self.b.push(NodeOp::Int(i), vec![], ValueKind::int(i, i)))
            }
            Tok::Sym("(") => {
                self.bump();
                let a = self.formula()?;
                if !self.at_sym(")") {
                    return Err(self.expected("`)`"));
                }
                self.bump();
                Ok(a)
            }
            Tok::Ident(w) if w == "TRUE" => {
                self.bump();
                Ok(self.b.constant(true))
            }
            Tok::Ident(w) if w == "FALSE" => {
                self.bump();
                Ok(self.b.constant(false))
            }
            Tok::Ident(_) => {
                let mut text = match self.bump().tok {
                    Tok::Ident(w) => w,
                    _ => unreachable!(),
                };
                while self.at_sym(".") {
                    self.bump();
                    match self.bump().tok {
                        Tok::Ident(w) => {
                            text.push('.');
                            text.push_str(&w);
                        }
                        _ => return Err(self.expected("identifier after `.`")),
                    }
                }
                let (name, kind) = self.resolve(&text, pos)?;
                Ok(self.b.push(NodeOp::Var { name, text, kind }, vec![], kind))
            }
            _ => Err(self.expected("an atom")),
        }
    }

    fn resolve(&self, text: &str, pos: Pos) -> PResult<(String, ValueKind)> {
        if let Some((n, k)) = self.vars.iter().find(|(n, _)| n == text) {
            return Ok((n.clone(), *k));
        }
        let suffix = format!(".{text}");
        let hits: Vec<&(String, ValueKind)> = self.vars.iter().filter(|(n, _)| n.ends_with(&suffix)).collect();
        match hits.as_slice() {
            [(n, k)] => Ok((n.clone(), *k)),
            [] => Err(LtlError::UnknownVariable {
                pos,
                name: text.to_string(),
            }),
            many => Err(LtlError::AmbiguousVariable {
                pos,
                name: text.to_string(),
                candidates: many.iter().map(|(n, _)| n.clone()).collect(),
            }),
        }
    }
}
