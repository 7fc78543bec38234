//! Frontend for the supported NuSMV subset.
//!
//! [`parse_model`] reads model text, [`build_diagram`] encodes the instance
//! tree rooted at `main` as a hierarchical diagram, and
//! [`formula::parse_ltl`] reads LTL properties. The accepted grammar is
//! described in `docs/grammar.md`.

pub mod ast;
mod encode;
pub mod formula;
pub mod interp;
pub mod lexer;
mod parser;
pub mod print;

pub use encode::{build_diagram, encode_module};
pub use lexer::Pos;
pub use parser::parse_expr;

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum SmvError {
    #[error("{pos}: syntax error: {message}")]
    Syntax { pos: Pos, message: String },
    #[error("{pos}: unsupported: {rule}")]
    Unsupported { pos: Pos, rule: String },
    #[error("{pos}: type error: {message}")]
    Type { pos: Pos, message: String },
    #[error("{pos}: unknown variable `{name}`")]
    UnknownVariable { pos: Pos, name: String },
    #[error("{pos}: unknown module `{name}`")]
    UnknownModule { pos: Pos, name: String },
    #[error("{pos}: instance `{instance}` of `{module}`: {message}")]
    UnboundInstanceParam {
        pos: Pos,
        instance: String,
        module: String,
        message: String,
    },
    #[error("{pos}: duplicate name `{name}`")]
    DuplicateName { pos: Pos, name: String },
    #[error("{pos}: `{name}` depends on itself within one step")]
    CyclicDefinition { pos: Pos, name: String },
    #[error("{pos}: module `{module}` instantiates itself")]
    RecursiveInstantiation { pos: Pos, module: String },
    #[error("encoded diagram is invalid: {0}")]
    InvalidDiagram(String),
}

impl SmvError {
    /// Source position, when the error has one.
    pub fn pos(&self) -> Option<Pos> {
        match self {
            SmvError::Syntax { pos, .. }
            | SmvError::Unsupported { pos, .. }
            | SmvError::Type { pos, .. }
            | SmvError::UnknownVariable { pos, .. }
            | SmvError::UnknownModule { pos, .. }
            | SmvError::UnboundInstanceParam { pos, .. }
            | SmvError::DuplicateName { pos, .. }
            | SmvError::CyclicDefinition { pos, .. }
            | SmvError::RecursiveInstantiation { pos, .. } => Some(*pos),
            SmvError::InvalidDiagram(_) => None,
        }
    }
}

/// Parses model text into modules; `main` must be present.
pub fn parse_model(text: &str) -> Result<ast::Model, SmvError> {
    let mut p = parser::Parser::new(text)?;
    let model = p.parse_model()?;
    if model.main().is_none() {
        return Err(SmvError::Unsupported {
            pos: Pos::default(),
            rule: "the model must contain a `main` module".into(),
        });
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::ast::*;
    use super::*;
    use crate::value::ValueKind;

    const FLIP_FLOP: &str = "MODULE main
VAR s : boolean; r : boolean; ff : flip_flop(s, r);
MODULE flip_flop(S, R) --@ S : boolean; R : boolean
VAR out : boolean;
ASSIGN init(out) := FALSE; next(out) := s_and_not_r;
DEFINE s_and_not_r := S & !R;
";

    #[test]
    fn parses_module_with_annotation() {
        let m = parse_model(
            "MODULE main\nVAR a : boolean; f : m(a);\n\
             MODULE m(s, r) --@ s : boolean; r : 0..100\n\
             VAR out : boolean;\nASSIGN init(out) := FALSE; next(out) := s & !r;\n",
        );
        // `r` is an integer, so `!r` is a type error later, but parsing succeeds.
        let m = m.unwrap();
        let mm = m.module("m").unwrap();
        assert_eq!(mm.vars.len(), 1);
        assert_eq!(mm.params[1].kind, ValueKind::int(0, 100));
        assert!(matches!(
            mm.vars[0].next.kind,
            ExprKind::Binary(BinOp::And, _, _)
        ));
    }

    #[test]
    fn in_list_annotation_is_accepted() {
        let m = parse_model("MODULE main\nMODULE m(x : boolean)\n").unwrap();
        assert_eq!(m.module("m").unwrap().params[0].kind, ValueKind::Bool);
    }

    #[test]
    fn trans_is_unsupported() {
        let e = parse_model("MODULE main\nVAR a : boolean;\nTRANS next(a) = a;\n").unwrap_err();
        match e {
            SmvError::Unsupported { rule, .. } => assert!(rule.contains("TRANS")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn restrictions_are_enforced() {
        let cases = [
            "MODULE main\nVAR a : boolean; i : m;\nMODULE m\nVAR x : boolean;\nASSIGN init(x) := {TRUE, FALSE}; next(x) := x;\n",
            "MODULE main\nVAR i : m(TRUE);\nMODULE m(p)\nVAR x : boolean;\nASSIGN init(x) := p; next(x) := x;\n",
            "MODULE main\nVAR i : m;\nMODULE m\nVAR x : boolean;\nDEFINE d := next(x);\nASSIGN init(x) := TRUE; next(x) := x;\n",
            "MODULE main\nVAR i : m;\nMODULE m\nVAR x : boolean;\nASSIGN init(x) := TRUE;\n",
            "MODULE main\nVAR i : m;\nMODULE m\nVAR x : boolean;\nASSIGN init(x) := TRUE; next(x) := case x : FALSE; esac;\n",
            "MODULE main\nVAR a : boolean;\nDEFINE d := a;\n",
            "MODULE main\nVAR a : {on, off};\n",
            "MODULE main\nVAR a : boolean;\nINIT a;\n",
            "MODULE main\nVAR a : boolean;\nSPEC AG a\n",
            "MODULE main\nVAR i : m;\nMODULE m\nVAR x : 0..3;\nASSIGN init(x) := 1; next(x) := x mod 2;\n",
        ];
        for c in cases {
            match parse_model(c) {
                Err(SmvError::Unsupported { .. }) => {}
                other => panic!("expected Unsupported for {c:?}, got {other:?}"),
            }
        }
    }

    #[test]
    fn syntax_error_has_position() {
        let e = parse_model("MODULE main\nVAR a : boolean\nb : boolean;\n").unwrap_err();
        match e {
            SmvError::Syntax { pos, message } => {
                assert_eq!(pos.line, 3);
                assert!(message.contains("expected `;`"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn precedence_follows_nusmv() {
        let e = parse_expr("a | b & c -> d <-> e").unwrap();
        let expect = parse_expr("(a | (b & c)) -> (d <-> e)").unwrap();
        assert_eq!(e, expect);
        let e = parse_expr("x + 1 * y < 3 & z").unwrap();
        assert_eq!(e, parse_expr("((x + (1 * y)) < 3) & z").unwrap());
        let e = parse_expr("a -> b -> c").unwrap();
        assert_eq!(e, parse_expr("a -> (b -> c)").unwrap());
    }

    #[test]
    fn ltlspec_text_is_captured() {
        let m = parse_model(&format!("{FLIP_FLOP}LTLSPEC G (ff.out -> F !ff.out);\n")).unwrap();
        assert_eq!(m.ltlspecs().collect::<Vec<_>>(), vec!["G (ff.out -> F !ff.out)"]);
    }

    #[test]
    fn model_roundtrip() {
        let m = parse_model(FLIP_FLOP).unwrap();
        let text = print::print_model(&m);
        assert_eq!(parse_model(&text).unwrap().without_positions(), m.without_positions());
    }

    #[test]
    fn negative_literal_roundtrip() {
        for src in ["-3", "-(3)", "x - -2", "-x * 4", "count(a, !b) = 2"] {
            let e = parse_expr(src).unwrap();
            assert_eq!(parse_expr(&print::print_expr(&e)).unwrap(), e, "{src}");
        }
    }
}
