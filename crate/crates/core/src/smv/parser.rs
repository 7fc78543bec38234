//! Recursive-descent parser for the model language.

use std::collections::{BTreeMap, HashSet};

use super::ast::*;
use super::lexer::{tokenize, Pos, Tok, Token};
use super::SmvError;
use crate::value::ValueKind;

/// Section keywords that end an `LTLSPEC` body.
const SECTIONS: [&str; 20] = [
    "MODULE", "VAR", "IVAR", "FROZENVAR", "DEFINE", "ASSIGN", "INIT", "TRANS", "INVAR", "FAIRNESS",
    "JUSTICE", "COMPASSION", "SPEC", "CTLSPEC", "LTLSPEC", "INVARSPEC", "PSLSPEC", "COMPUTE",
    "CONSTANTS", "ISA",
];

pub(crate) struct Parser<'a> {
    src: &'a str,
    toks: Vec<Token>,
    i: usize,
    annotations: Vec<(String, Pos)>,
}

type PResult<T> = Result<T, SmvError>;

impl<'a> Parser<'a> {
    pub fn new(src: &'a str) -> PResult<Self> {
        let toks = tokenize(src).map_err(|e| SmvError::Syntax {
            pos: e.pos,
            message: e.message,
        })?;
        Ok(Parser {
            src,
            toks,
            i: 0,
            annotations: Vec::new(),
        })
    }

    fn skip_annotations(&mut self) {
        while let Tok::Annotation(a) = &self.toks[self.i].tok {
            self.annotations.push((a.clone(), self.toks[self.i].pos));
            self.i += 1;
        }
    }

    pub fn peek(&mut self) -> &Tok {
        self.skip_annotations();
        &self.toks[self.i].tok
    }

    fn peek_at(&mut self, k: usize) -> &Tok {
        self.skip_annotations();
        let mut j = self.i;
        let mut seen = 0;
        while seen < k {
            j += 1;
            if j >= self.toks.len() - 1 {
                return &self.toks[self.toks.len() - 1].tok;
            }
            if !matches!(self.toks[j].tok, Tok::Annotation(_)) {
                seen += 1;
            }
        }
        &self.toks[j].tok
    }

    pub fn pos(&mut self) -> Pos {
        self.skip_annotations();
        self.toks[self.i].pos
    }

    pub fn bump(&mut self) -> Token {
        self.skip_annotations();
        let t = self.toks[self.i].clone();
        if t.tok != Tok::Eof {
            self.i += 1;
        }
        t
    }

    pub fn at_sym(&mut self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    pub fn at_ident(&mut self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == s)
    }

    pub fn eat_sym(&mut self, s: &str) -> bool {
        if self.at_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn error_expected(&mut self, expected: &[&str]) -> SmvError {
        let pos = self.pos();
        let found = self.peek().to_string();
        SmvError::Syntax {
            pos,
            message: format!("expected {}, found {found}", expected.join(" or ")),
        }
    }

    pub fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(self.error_expected(&[&format!("`{s}`")]))
        }
    }

    pub fn expect_ident(&mut self) -> PResult<(String, Pos)> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok((s, pos))
            }
            _ => Err(self.error_expected(&["identifier"])),
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> PResult<Pos> {
        let pos = self.pos();
        if self.at_ident(kw) {
            self.bump();
            Ok(pos)
        } else {
            Err(self.error_expected(&[&format!("`{kw}`")]))
        }
    }

    pub fn at_eof(&mut self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    fn unsupported(pos: Pos, rule: impl Into<String>) -> SmvError {
        SmvError::Unsupported {
            pos,
            rule: rule.into(),
        }
    }

    // ---- model ----

    pub fn parse_model(&mut self) -> PResult<Model> {
        let mut modules = Vec::new();
        let mut names = HashSet::new();
        if self.at_eof() {
            return Err(self.error_expected(&["`MODULE`"]));
        }
        while !self.at_eof() {
            let m = self.parse_module()?;
            if !names.insert(m.name.clone()) {
                return Err(SmvError::DuplicateName {
                    pos: m.pos,
                    name: m.name,
                });
            }
            modules.push(m);
        }
        Ok(Model { modules })
    }

    fn parse_module(&mut self) -> PResult<Module> {
        let pos = self.expect_keyword("MODULE")?;
        self.annotations.clear();
        let (name, _) = self.expect_ident()?;
        let mut raw_params: Vec<(String, Option<ValueKind>, Pos)> = Vec::new();
        if self.eat_sym("(") {
            if !self.at_sym(")") {
                loop {
                    let (p, ppos) = self.expect_ident()?;
                    let kind = if self.eat_sym(":") {
                        Some(self.parse_type()?)
                    } else {
                        None
                    };
                    raw_params.push((p, kind, ppos));
                    if !self.eat_sym(",") {
                        break;
                    }
                }
            }
            self.expect_sym(")")?;
        }
        let mut decls: Vec<VarDecl> = Vec::new();
        let mut defines: Vec<Define> = Vec::new();
        let mut inits: BTreeMap<String, (Expr, Pos)> = BTreeMap::new();
        let mut nexts: BTreeMap<String, (Expr, Pos)> = BTreeMap::new();
        let mut ltlspecs = Vec::new();
        loop {
            let spos = self.pos();
            let kw = match self.peek() {
                Tok::Ident(s) if SECTIONS.contains(&s.as_str()) => s.clone(),
                Tok::Eof => break,
                _ => return Err(self.error_expected(&["section keyword"])),
            };
            match kw.as_str() {
                "MODULE" => break,
                "VAR" | "IVAR" => {
                    self.bump();
                    while self.starts_decl() {
                        decls.push(self.parse_var_decl(kw == "IVAR")?);
                    }
                }
                "DEFINE" => {
                    self.bump();
                    while self.starts_decl() {
                        let (n, npos) = self.expect_ident()?;
                        self.expect_sym(":=")?;
                        let body = self.parse_expr()?;
                        self.expect_sym(";")?;
                        if body.contains_next() {
                            return Err(Self::unsupported(
                                npos,
                                "DEFINE declarations may not use the `next` operator",
                            ));
                        }
                        defines.push(Define {
                            name: n,
                            body,
                            pos: npos,
                        });
                    }
                }
                "ASSIGN" => {
                    self.bump();
                    while self.starts_decl() {
                        let apos = self.pos();
                        let (which, _) = self.expect_ident()?;
                        if which != "init" && which != "next" {
                            return Err(Self::unsupported(
                                apos,
                                "variables must be assigned with `init(..)` and `next(..)`",
                            ));
                        }
                        self.expect_sym("(")?;
                        let (target, _) = self.expect_ident()?;
                        self.expect_sym(")")?;
                        self.expect_sym(":=")?;
                        let e = self.parse_expr()?;
                        self.expect_sym(";")?;
                        let table = if which == "init" { &mut inits } else { &mut nexts };
                        if which == "init" && e.contains_next() {
                            return Err(Self::unsupported(e.pos, "`init` expressions may not use `next`"));
                        }
                        if table.insert(target.clone(), (e, apos)).is_some() {
                            return Err(SmvError::DuplicateName {
                                pos: apos,
                                name: format!("{which}({target})"),
                            });
                        }
                    }
                }
                "LTLSPEC" => {
                    self.bump();
                    ltlspecs.push(self.capture_spec()?);
                }
                "INIT" | "TRANS" | "INVAR" => {
                    return Err(Self::unsupported(spos, format!("{kw} declarations are not allowed")))
                }
                "FAIRNESS" | "JUSTICE" | "COMPASSION" => {
                    return Err(Self::unsupported(spos, "fairness constraints are not supported"))
                }
                "SPEC" | "CTLSPEC" | "INVARSPEC" | "PSLSPEC" | "COMPUTE" => {
                    return Err(Self::unsupported(spos, format!("{kw}: only LTL specifications are supported")))
                }
                _ => return Err(Self::unsupported(spos, format!("{kw} sections are not supported"))),
            }
        }
        let annotations = std::mem::take(&mut self.annotations);
        self.assemble(name, pos, raw_params, annotations, decls, defines, inits, nexts, ltlspecs)
    }

    /// Whether the next token starts a declaration rather than a new section.
    fn starts_decl(&mut self) -> bool {
        match self.peek() {
            Tok::Ident(s) => !SECTIONS.contains(&s.as_str()),
            _ => false,
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        &mut self,
        name: String,
        pos: Pos,
        raw_params: Vec<(String, Option<ValueKind>, Pos)>,
        annotations: Vec<(String, Pos)>,
        decls: Vec<VarDecl>,
        defines: Vec<Define>,
        mut inits: BTreeMap<String, (Expr, Pos)>,
        mut nexts: BTreeMap<String, (Expr, Pos)>,
        ltlspecs: Vec<String>,
    ) -> PResult<Module> {
        let mut annotated: BTreeMap<String, ValueKind> = BTreeMap::new();
        for (text, apos) in annotations {
            for item in text.split([';', ',']).map(str::trim).filter(|s| !s.is_empty()) {
                let (n, ty) = item.split_once(':').ok_or_else(|| SmvError::Syntax {
                    pos: apos,
                    message: format!("malformed type annotation `{item}`, expected `name : type`"),
                })?;
                let kind = ty.trim().parse::<ValueKind>().map_err(|e| SmvError::Syntax {
                    pos: apos,
                    message: e.to_string(),
                })?;
                let n = n.trim();
                if !raw_params.iter().any(|p| p.0 == n) {
                    return Err(SmvError::UnknownVariable {
                        pos: apos,
                        name: n.to_string(),
                    });
                }
                annotated.insert(n.to_string(), kind);
            }
        }
        let mut params = Vec::new();
        for (p, kind, ppos) in raw_params {
            let kind = kind.or_else(|| annotated.get(&p).copied()).ok_or_else(|| {
                Self::unsupported(
                    ppos,
                    format!("module input `{p}` needs a type annotation `{p} : type`"),
                )
            })?;
            params.push(Param {
                name: p,
                kind,
                pos: ppos,
            });
        }
        let is_main = name == "main";
        if is_main && !params.is_empty() {
            return Err(Self::unsupported(pos, "module `main` cannot have parameters"));
        }
        let mut seen: HashSet<String> = params.iter().map(|p| p.name.clone()).collect();
        let mut check_name = |n: &str, p: Pos| {
            if seen.insert(n.to_string()) {
                Ok(())
            } else {
                Err(SmvError::DuplicateName {
                    pos: p,
                    name: n.to_string(),
                })
            }
        };
        let mut inputs = Vec::new();
        let mut vars = Vec::new();
        let mut instances = Vec::new();
        for d in decls {
            check_name(&d.name, d.pos)?;
            match d.ty {
                VarType::Instance { module, args } => instances.push(Instance {
                    name: d.name,
                    module,
                    args,
                    pos: d.pos,
                }),
                VarType::Scalar(kind) if is_main => {
                    if inits.contains_key(&d.name) || nexts.contains_key(&d.name) {
                        return Err(Self::unsupported(
                            d.pos,
                            "module `main` may only declare input variables and module instances",
                        ));
                    }
                    inputs.push((d.name, kind, d.pos));
                }
                VarType::Scalar(_) if d.input => {
                    return Err(Self::unsupported(
                        d.pos,
                        "IVAR is only allowed in module `main`; other modules receive inputs as parameters",
                    ))
                }
                VarType::Scalar(kind) => {
                    let init = inits.remove(&d.name);
                    let next = nexts.remove(&d.name);
                    match (init, next) {
                        (Some((init, _)), Some((next, _))) => vars.push(StateVar {
                            name: d.name,
                            kind,
                            init: init,
                            next,
                            pos: d.pos,
                        }),
                        _ => {
                            return Err(Self::unsupported(
                                d.pos,
                                format!("variable `{}` must be declared with both init and next", d.name),
                            ))
                        }
                    }
                }
            }
        }
        for d in &defines {
            if is_main {
                return Err(Self::unsupported(
                    d.pos,
                    "module `main` may only declare input variables and module instances",
                ));
            }
            check_name(&d.name, d.pos)?;
        }
        if let Some((n, (_, p))) = inits.into_iter().chain(nexts).next() {
            return Err(if is_main {
                Self::unsupported(p, "module `main` may only declare input variables and module instances")
            } else {
                SmvError::UnknownVariable { pos: p, name: n }
            });
        }
        Ok(Module {
            name,
            params,
            inputs,
            vars,
            instances,
            defines,
            ltlspecs,
            pos,
        })
    }

    fn parse_type(&mut self) -> PResult<ValueKind> {
        let pos = self.pos();
        if self.at_ident("boolean") {
            self.bump();
            return Ok(ValueKind::Bool);
        }
        if self.at_sym("{") {
            return Err(Self::unsupported(pos, "enumerated types are not supported; use boolean or lo..hi"));
        }
        if matches!(self.peek(), Tok::Ident(s) if s == "word" || s == "unsigned" || s == "signed" || s == "array" || s == "integer" || s == "real")
        {
            return Err(Self::unsupported(pos, "only boolean and bounded integer types are supported"));
        }
        let lo = self.parse_signed_int()?;
        self.expect_sym("..")?;
        let hi = self.parse_signed_int()?;
        if lo > hi {
            return Err(SmvError::Type {
                pos,
                message: format!("empty range {lo}..{hi}"),
            });
        }
        Ok(ValueKind::int(lo, hi))
    }

    fn parse_signed_int(&mut self) -> PResult<i64> {
        let neg = self.eat_sym("-");
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(if neg { -n } else { n })
            }
            _ => Err(self.error_expected(&["integer", "`boolean`"])),
        }
    }

    fn parse_var_decl(&mut self, input: bool) -> PResult<VarDecl> {
        let (name, pos) = self.expect_ident()?;
        self.expect_sym(":")?;
        let is_instance = match self.peek() {
            Tok::Ident(s) => s != "boolean" && !matches!(s.as_str(), "word" | "unsigned" | "signed" | "array" | "integer" | "real"),
            _ => false,
        };
        let ty = if is_instance {
            let (module, mpos) = self.expect_ident()?;
            if module == "process" {
                return Err(Self::unsupported(mpos, "processes are not supported"));
            }
            let mut args = Vec::new();
            if self.eat_sym("(") {
                if !self.at_sym(")") {
                    loop {
                        let a = self.parse_expr()?;
                        if a.contains_next() {
                            return Err(Self::unsupported(a.pos, "instance arguments may not use `next`"));
                        }
                        args.push(a);
                        if !self.eat_sym(",") {
                            break;
                        }
                    }
                }
                self.expect_sym(")")?;
            }
            VarType::Instance { module, args }
        } else {
            VarType::Scalar(self.parse_type()?)
        };
        self.expect_sym(";")?;
        Ok(VarDecl {
            name,
            ty,
            input,
            pos,
        })
    }

    /// Raw text of an `LTLSPEC` body, up to the next section or module.
    fn capture_spec(&mut self) -> PResult<String> {
        let start = self.pos();
        let mut end = start.offset;
        loop {
            match self.peek() {
                Tok::Eof => break,
                Tok::Ident(s) if SECTIONS.contains(&s.as_str()) => break,
                _ => {
                    let t = self.bump();
                    end = t.end;
                }
            }
        }
        let text = self.src[start.offset..end].trim().trim_end_matches(';').trim();
        if text.is_empty() {
            return Err(SmvError::Syntax {
                pos: start,
                message: "empty LTLSPEC".into(),
            });
        }
        Ok(text.to_string())
    }

    // ---- expressions ----

    pub fn parse_expr(&mut self) -> PResult<Expr> {
        self.parse_implies()
    }

    fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        let pos = a.pos;
        Expr::new(ExprKind::Binary(op, Box::new(a), Box::new(b)), pos)
    }

    fn parse_implies(&mut self) -> PResult<Expr> {
        let lhs = self.parse_iff()?;
        if self.eat_sym("->") {
            let rhs = self.parse_implies()?;
            return Ok(Self::bin(BinOp::Implies, lhs, rhs));
        }
        Ok(lhs)
    }

    fn parse_iff(&mut self) -> PResult<Expr> {
        let mut lhs = self.parse_or()?;
        while self.eat_sym("<->") {
            let rhs = self.parse_or()?;
            lhs = Self::bin(BinOp::Iff, lhs, rhs);
        }
        Ok(lhs)
    }

    fn parse_or(&mut self) -> PResult<Expr> {
        let mut lhs = self.parse_and()?;
        loop {
            let op = if self.eat_sym("|") {
                BinOp::Or
            } else if self.at_ident("xor") {
                self.bump();
                BinOp::Xor
            } else if self.at_ident("xnor") {
                self.bump();
                BinOp::Xnor
            } else {
                return Ok(lhs);
            };
            let rhs = self.parse_and()?;
            lhs = Self::bin(op, lhs, rhs);
        }
    }

    fn parse_and(&mut self) -> PResult<Expr> {
        let mut lhs = self.parse_rel()?;
        while self.eat_sym("&") {
            let rhs = self.parse_rel()?;
            lhs = Self::bin(BinOp::And, lhs, rhs);
        }
        Ok(lhs)
    }

    fn parse_rel(&mut self) -> PResult<Expr> {
        let lhs = self.parse_add()?;
        let op = match self.peek() {
            Tok::Sym("=") => BinOp::Eq,
            Tok::Sym("!=") => BinOp::Ne,
            Tok::Sym("<") => BinOp::Lt,
            Tok::Sym("<=") => BinOp::Le,
            Tok::Sym(">") => BinOp::Gt,
            Tok::Sym(">=") => BinOp::Ge,
            _ => return Ok(lhs),
        };
        self.bump();
        let rhs = self.parse_add()?;
        Ok(Self::bin(op, lhs, rhs))
    }

    fn parse_add(&mut self) -> PResult<Expr> {
        let mut lhs = self.parse_mul()?;
        loop {
            let op = match self.peek() {
                Tok::Sym("+") => BinOp::Add,
                Tok::Sym("-") => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.parse_mul()?;
            lhs = Self::bin(op, lhs, rhs);
        }
    }

    fn parse_mul(&mut self) -> PResult<Expr> {
        let mut lhs = self.parse_unary()?;
        loop {
            let op = match self.peek() {
                Tok::Sym("*") => BinOp::Mul,
                Tok::Sym("/") => BinOp::Div,
                Tok::Ident(s) if s == "mod" => {
                    let pos = self.pos();
                    return Err(Self::unsupported(pos, "`mod` is not a supported operator"));
                }
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.parse_unary()?;
            lhs = Self::bin(op, lhs, rhs);
        }
    }

    fn parse_unary(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        if self.eat_sym("!") {
            let e = self.parse_unary()?;
            return Ok(Expr::new(ExprKind::Unary(UnOp::Not, Box::new(e)), pos));
        }
        if self.eat_sym("-") {
            // A negative literal stays a literal.
            if let Tok::Int(n) = *self.peek() {
                self.bump();
                return Ok(Expr::new(ExprKind::Int(-n), pos));
            }
            let e = self.parse_unary()?;
            return Ok(Expr::new(ExprKind::Unary(UnOp::Neg, Box::new(e)), pos));
        }
        self.parse_primary()
    }

    fn parse_primary(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Expr::new(ExprKind::Int(n), pos))
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.parse_expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Sym("{") => Err(Self::unsupported(
                pos,
                "set notation is not allowed; assignments must be deterministic",
            )),
            Tok::Ident(s) => match s.as_str() {
                "TRUE" => {
                    self.bump();
                    Ok(Expr::new(ExprKind::Bool(true), pos))
                }
                "FALSE" => {
                    self.bump();
                    Ok(Expr::new(ExprKind::Bool(false), pos))
                }
                "next" if matches!(self.peek_at(1), Tok::Sym("(")) => {
                    self.bump();
                    self.bump();
                    let e = self.parse_expr()?;
                    self.expect_sym(")")?;
                    if e.contains_next() {
                        return Err(Self::unsupported(pos, "nested `next` is not allowed"));
                    }
                    Ok(Expr::new(ExprKind::Next(Box::new(e)), pos))
                }
                "count" if matches!(self.peek_at(1), Tok::Sym("(")) => {
                    self.bump();
                    self.bump();
                    let mut args = vec![self.parse_expr()?];
                    while self.eat_sym(",") {
                        args.push(self.parse_expr()?);
                    }
                    self.expect_sym(")")?;
                    Ok(Expr::new(ExprKind::Count(args), pos))
                }
                "case" => self.parse_case(),
                "init" | "toint" | "bool" | "word1" | "unsigned" | "signed" | "extend" | "resize"
                | "abs" | "max" | "min" | "floor" | "swconst" | "uwconst" | "READ" | "WRITE"
                | "typeof" | "sizeof"
                    if matches!(self.peek_at(1), Tok::Sym("(")) =>
                {
                    Err(Self::unsupported(pos, format!("function `{s}` is not supported")))
                }
                _ => {
                    self.bump();
                    let mut path = vec![s];
                    while self.eat_sym(".") {
                        let (p, _) = self.expect_ident()?;
                        path.push(p);
                    }
                    if self.at_sym("[") {
                        let p = self.pos();
                        return Err(Self::unsupported(p, "arrays are not supported"));
                    }
                    Ok(Expr::new(ExprKind::Ref(path), pos))
                }
            },
            _ => Err(self.error_expected(&["expression"])),
        }
    }

    fn parse_case(&mut self) -> PResult<Expr> {
        let pos = self.expect_keyword("case")?;
        let mut branches = Vec::new();
        while !self.at_ident("esac") {
            if self.at_eof() {
                return Err(self.error_expected(&["`esac`"]));
            }
            let g = self.parse_expr()?;
            self.expect_sym(":")?;
            let r = self.parse_expr()?;
            self.expect_sym(";")?;
            branches.push((g, r));
        }
        self.bump();
        match branches.last() {
            Some((g, _)) if g.kind == ExprKind::Bool(true) => {}
            _ => {
                return Err(Self::unsupported(
                    pos,
                    "`case` must end with a `TRUE :` branch",
                ))
            }
        }
        Ok(Expr::new(ExprKind::Case(branches), pos))
    }
}

/// Parses a standalone expression (used by tests and tools).
pub fn parse_expr(src: &str) -> Result<Expr, SmvError> {
    let mut p = Parser::new(src)?;
    let e = p.parse_expr()?;
    if !p.at_eof() {
        return Err(p.error_expected(&["end of expression"]));
    }
    Ok(e)
}
