//! Pretty-printer. The output of every printer here re-parses to the
//! identical AST (`parse ∘ pretty = id`); the round-trip property tests in
//! `tests/roundtrip.rs` hold the two sides together.
//!
//! Numeric literals always print as `p/q`, matching the value syntax, so a
//! printed program can look slightly more explicit than its hand-written
//! source (`i <- 0` prints as `i <- 0/1`). Both spellings parse to the
//! same AST.

use super::{Axiom, AxiomBody, DExpr, Decls, Expr, Program, Quant, Stmt};
use std::fmt::Write;

/// Precedence levels used by both the parser and this printer; a node
/// whose own level is below the context's gets parenthesised.
fn level(e: &Expr) -> u8 {
    match e {
        Expr::QuantExpr(..) => 0,
        Expr::Implies(..) => 1,
        Expr::Or(..) => 2,
        Expr::And(..) => 3,
        Expr::Eq(..) | Expr::Ne(..) | Expr::Lt(..) | Expr::Le(..) | Expr::Gt(..)
        | Expr::Ge(..) => 4,
        Expr::Add(..) | Expr::Sub(..) => 5,
        Expr::Mul(..) => 6,
        Expr::Neg(..) | Expr::Not(..) => 7,
        Expr::Index(..) | Expr::Update(..) => 8,
        _ => 9,
    }
}

pub fn expr_to_string(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(&mut s, e, 0);
    s
}

fn write_expr(out: &mut String, e: &Expr, prec: u8) {
    let l = level(e);
    if l < prec {
        out.push('(');
        write_expr_raw(out, e);
        out.push(')');
    } else {
        write_expr_raw(out, e);
    }
}

fn write_expr_raw(out: &mut String, e: &Expr) {
    match e {
        Expr::Lit(v) => {
            let _ = write!(out, "{v}");
        }
        Expr::Var(x, None) => out.push_str(x),
        Expr::Var(x, Some(s)) => {
            let _ = write!(out, "{x}<{}>", s.index());
        }
        Expr::Neg(a) => {
            out.push('-');
            write_expr(out, a, 7);
        }
        Expr::Not(a) => {
            out.push('!');
            write_expr(out, a, 7);
        }
        Expr::Add(a, b) => bin(out, a, "+", b, 5, 6),
        Expr::Sub(a, b) => bin(out, a, "-", b, 5, 6),
        Expr::Mul(a, b) => bin(out, a, "*", b, 6, 7),
        Expr::And(a, b) => bin(out, a, "&&", b, 3, 4),
        Expr::Or(a, b) => bin(out, a, "||", b, 2, 3),
        Expr::Implies(a, b) => bin(out, a, "=>", b, 2, 1),
        Expr::Eq(a, b) => bin(out, a, "==", b, 5, 5),
        Expr::Ne(a, b) => bin(out, a, "!=", b, 5, 5),
        Expr::Lt(a, b) => bin(out, a, "<", b, 5, 5),
        Expr::Le(a, b) => bin(out, a, "<=", b, 5, 5),
        Expr::Gt(a, b) => bin(out, a, ">", b, 5, 5),
        Expr::Ge(a, b) => bin(out, a, ">=", b, 5, 5),
        Expr::Ite(c, a, b) => {
            out.push_str("ite(");
            write_expr(out, c, 0);
            out.push_str(", ");
            write_expr(out, a, 0);
            out.push_str(", ");
            write_expr(out, b, 0);
            out.push(')');
        }
        Expr::Ind(a) => call1(out, "ind", a),
        Expr::Abs(a) => call1(out, "abs", a),
        Expr::Norm1(a) => call1(out, "norm1", a),
        Expr::IsInt(a) => call1(out, "isint", a),
        Expr::Index(m, k) => {
            write_expr(out, m, 8);
            out.push('[');
            write_expr(out, k, 0);
            out.push(']');
        }
        Expr::Update(m, k, v) => {
            write_expr(out, m, 8);
            out.push('[');
            write_expr(out, k, 0);
            out.push_str(" -> ");
            write_expr(out, v, 0);
            out.push(']');
        }
        Expr::VecLit(es) => {
            out.push('[');
            for (i, e) in es.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, e, 0);
            }
            out.push(']');
        }
        Expr::MapLit(kvs) => {
            out.push('{');
            for (i, (k, v)) in kvs.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, k, 0);
                out.push_str(" = ");
                write_expr(out, v, 0);
            }
            out.push('}');
        }
        Expr::Apply(f, args) => {
            out.push_str(f);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, a, 0);
            }
            out.push(')');
        }
        Expr::QuantExpr(q, v, d, body) => {
            let kw = match q {
                Quant::Forall => "forall",
                Quant::Exists => "exists",
                Quant::Sum => "sum",
            };
            let _ = write!(out, "{kw} {v} in {d} . ");
            write_expr(out, body, 0);
        }
    }
}

fn bin(out: &mut String, a: &Expr, op: &str, b: &Expr, la: u8, lb: u8) {
    write_expr(out, a, la);
    let _ = write!(out, " {op} ");
    write_expr(out, b, lb);
}

fn call1(out: &mut String, name: &str, a: &Expr) {
    out.push_str(name);
    out.push('(');
    write_expr(out, a, 0);
    out.push(')');
}

pub fn dexpr_to_string(d: &DExpr) -> String {
    match d {
        DExpr::Unif(dom) => format!("unif({dom})"),
        DExpr::Bern(e) => format!("bern({})", expr_to_string(e)),
        DExpr::Mult(e) => format!("mult({})", expr_to_string(e)),
        DExpr::Unit(e) => format!("unit({})", expr_to_string(e)),
    }
}

/// Multi-line statement printer with two-space indentation.
pub fn stmt_to_string(s: &Stmt) -> String {
    let mut out = String::new();
    write_stmt(&mut out, s, 0);
    out
}

/// Single-line statement printer (used when a statement is embedded in a
/// line-oriented format). Parses to the same AST as the multi-line form.
pub fn stmt_to_line(s: &Stmt) -> String {
    stmt_to_string(s)
        .lines()
        .map(str::trim)
        .collect::<Vec<_>>()
        .join(" ")
}

fn write_stmt(out: &mut String, s: &Stmt, indent: usize) {
    // Flatten nested sequencing into one statement list.
    let mut items = Vec::new();
    flatten_seq(s, &mut items);
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            out.push_str(";\n");
        }
        write_one(out, item, indent);
    }
}

fn flatten_seq<'a>(s: &'a Stmt, out: &mut Vec<&'a Stmt>) {
    match s {
        Stmt::Seq(a, b) => {
            flatten_seq(a, out);
            flatten_seq(b, out);
        }
        _ => out.push(s),
    }
}

fn write_one(out: &mut String, s: &Stmt, indent: usize) {
    let pad = "  ".repeat(indent);
    match s {
        Stmt::Skip => {
            let _ = write!(out, "{pad}skip");
        }
        Stmt::Abort => {
            let _ = write!(out, "{pad}abort");
        }
        Stmt::Assign(x, e) => {
            let _ = write!(out, "{pad}{x} <- {}", expr_to_string(e));
        }
        Stmt::Sample(x, d) => {
            let _ = write!(out, "{pad}{x} <$ {}", dexpr_to_string(d));
        }
        Stmt::Seq(..) => write_stmt(out, s, indent),
        Stmt::If(c, a, b) => {
            let _ = write!(out, "{pad}if {} then {{\n", expr_to_string(c));
            write_stmt(out, a, indent + 1);
            let _ = write!(out, "\n{pad}}} else {{\n");
            write_stmt(out, b, indent + 1);
            let _ = write!(out, "\n{pad}}}");
        }
        Stmt::While(c, body) => {
            let _ = write!(out, "{pad}while {} do {{\n", expr_to_string(c));
            write_stmt(out, body, indent + 1);
            let _ = write!(out, "\n{pad}}}");
        }
    }
}

pub fn decls_to_string(d: &Decls) -> String {
    let mut out = String::new();
    for v in &d.vars {
        match &v.domain {
            Some(dom) => {
                let _ = writeln!(out, "var {} : {} in {dom};", v.name, v.ty);
            }
            None => {
                let _ = writeln!(out, "var {} : {};", v.name, v.ty);
            }
        }
    }
    for f in &d.funs {
        let args = f.args.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(", ");
        let _ = writeln!(out, "fun {}({args}) : {};", f.name, f.ret);
    }
    for (name, r) in &d.consts {
        let _ = writeln!(out, "const {name} = {};", crate::rat::fmt_rat(r));
    }
    for Axiom { name, body } in &d.axioms {
        match body {
            AxiomBody::Rel(e) => {
                let _ = writeln!(out, "axiom {name} : {};", expr_to_string(e));
            }
            AxiomBody::Prob { stmt, guard, prob } => {
                let _ = writeln!(
                    out,
                    "axiom {name} : Pr[ {} ][ {} ] = {};",
                    stmt_to_line(stmt),
                    expr_to_string(guard),
                    crate::rat::fmt_rat(prob)
                );
            }
        }
    }
    out
}

pub fn program_to_string(p: &Program) -> String {
    let decls = decls_to_string(&p.decls);
    let body = stmt_to_string(&p.body);
    if decls.is_empty() {
        format!("{body}\n")
    } else {
        format!("{decls}\n{body}\n")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parser::{parse_program, parse_rel_expr, parse_stmt};

    fn rt_expr(src: &str) {
        let e = parse_rel_expr(src).unwrap();
        let printed = expr_to_string(&e);
        let e2 = parse_rel_expr(&printed).unwrap_or_else(|err| {
            panic!("printed form failed to parse: {printed:?}: {err}")
        });
        assert_eq!(e, e2, "round-trip through {printed:?}");
    }

    #[test]
    fn expr_round_trips() {
        for src in [
            "x<1> + -x<2> * 3",
            "-1/2 + abs(a - b)",
            "a - (b - c)",
            "!(a == b) && (c || d => e)",
            "w[v -> c][z] == w[z]",
            "sum z in [0..2] . ind(w<1>[z] != w<2>[z])",
            "(forall u in {0, 1} . u >= 0) && p",
            "ite(b, [1/2, 1/2], q)",
            "{0 = 1, 1 = x + 1}",
            "norm1(x<1> - x<2>) <= 1/4",
            "f(a, b + 1) == g()",
            "isint(2 * n)",
        ] {
            rt_expr(src);
        }
    }

    #[test]
    fn stmt_round_trips() {
        for src in [
            "skip",
            "abort",
            "x <- x + 1; b <$ bern(1/3); skip",
            "if b then { x <- 1 } else { y <$ unif([0..4]) }",
            "i <- 0; while i < 3 do { if b then { x <- 1 } else { skip }; i <- i + 1 }",
            "p <$ mult([1/2, 1/2]); u <$ unit(p)",
        ] {
            let s = parse_stmt(src).unwrap();
            let printed = stmt_to_string(&s);
            assert_eq!(s, parse_stmt(&printed).unwrap(), "via {printed:?}");
            let line = stmt_to_line(&s);
            assert_eq!(s, parse_stmt(&line).unwrap(), "via {line:?}");
        }
    }

    #[test]
    fn program_round_trips() {
        let src = "\
var w : map([0..2], int) in maps([0..2], [0..4]);
var i : int in [0..3];
const beta = 14/15;
fun valid(map([0..2], int), int, int) : bool;
axiom nonneg : forall u in [0..2] . u >= 0;
axiom hit : Pr[ j <$ unif([0..9]); k <- j ][ k == 0 ] = 1/10;

i <- 0;
while i < 3 do { i <- i + 1; w <- w[0 -> i] }
";
        let p = parse_program(src).unwrap();
        let printed = program_to_string(&p);
        let p2 = parse_program(&printed)
            .unwrap_or_else(|e| panic!("printed program failed to parse: {e}\n{printed}"));
        assert_eq!(p, p2);
    }
}
