//! Pretty-printer for models and expressions; output re-parses to the same tree.

use std::fmt::Write;

use super::ast::*;

pub fn print_expr(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(&mut s, e, false);
    s
}

fn write_expr(out: &mut String, e: &Expr, nested: bool) {
    match &e.kind {
        ExprKind::Bool(true) => out.push_str("TRUE"),
        ExprKind::Bool(false) => out.push_str("FALSE"),
        ExprKind::Int(i) if *i < 0 && nested => {
            let _ = write!(out, "({i})");
        }
        ExprKind::Int(i) => {
            let _ = write!(out, "{i}");
        }
        ExprKind::Ref(path) => out.push_str(&path.join(".")),
        ExprKind::Next(inner) => {
            out.push_str("next(");
            write_expr(out, inner, false);
            out.push(')');
        }
        ExprKind::Unary(UnOp::Neg, inner) if matches!(inner.kind, ExprKind::Int(_)) => {
            // `-3` would re-parse as a literal.
            out.push_str("-(");
            write_expr(out, inner, false);
            out.push(')');
        }
        ExprKind::Unary(op, inner) => {
            let _ = write!(out, "{op}");
            write_expr(out, inner, true);
        }
        ExprKind::Binary(op, a, b) => {
            if nested {
                out.push('(');
            }
            write_expr(out, a, true);
            let _ = write!(out, " {} ", op.symbol());
            write_expr(out, b, true);
            if nested {
                out.push(')');
            }
        }
        ExprKind::Case(branches) => {
            out.push_str("case ");
            for (g, r) in branches {
                write_expr(out, g, false);
                out.push_str(" : ");
                write_expr(out, r, false);
                out.push_str("; ");
            }
            out.push_str("esac");
        }
        ExprKind::Count(args) => {
            out.push_str("count(");
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, a, false);
            }
            out.push(')');
        }
    }
}

pub fn print_model(m: &Model) -> String {
    let mut out = String::new();
    for (i, module) in m.modules.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        print_module(&mut out, module);
    }
    out
}

fn print_module(out: &mut String, m: &Module) {
    out.push_str("MODULE ");
    out.push_str(&m.name);
    if !m.params.is_empty() {
        let names: Vec<&str> = m.params.iter().map(|p| p.name.as_str()).collect();
        let _ = write!(out, "({})", names.join(", "));
        let notes: Vec<String> = m.params.iter().map(|p| format!("{} : {}", p.name, p.kind)).collect();
        let _ = write!(out, " --@ {}", notes.join("; "));
    }
    out.push('\n');
    if !m.inputs.is_empty() || !m.vars.is_empty() || !m.instances.is_empty() {
        out.push_str("VAR\n");
        for (n, k, _) in &m.inputs {
            let _ = writeln!(out, "  {n} : {k};");
        }
        for v in &m.vars {
            let _ = writeln!(out, "  {} : {};", v.name, v.kind);
        }
        for inst in &m.instances {
            let _ = write!(out, "  {} : {}", inst.name, inst.module);
            if !inst.args.is_empty() {
                let args: Vec<String> = inst.args.iter().map(print_expr).collect();
                let _ = write!(out, "({})", args.join(", "));
            }
            out.push_str(";\n");
        }
    }
    if !m.defines.is_empty() {
        out.push_str("DEFINE\n");
        for d in &m.defines {
            let _ = writeln!(out, "  {} := {};", d.name, print_expr(&d.body));
        }
    }
    if !m.vars.is_empty() {
        out.push_str("ASSIGN\n");
        for v in &m.vars {
            let _ = writeln!(out, "  init({}) := {};", v.name, print_expr(&v.init));
            let _ = writeln!(out, "  next({}) := {};", v.name, print_expr(&v.next));
        }
    }
    for s in &m.ltlspecs {
        let _ = writeln!(out, "LTLSPEC {s}");
    }
}
