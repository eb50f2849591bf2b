//! Typechecker. Mostly plain inference; map and vector literals are
//! checked *against* an expected type because their type is not inferable
//! from the bare syntax. `int` promotes implicitly to `rat`; nothing else
//! coerces.
//!
//! Expressions play two roles with different scoping:
//!
//! * **program expressions** — side tags are forbidden; plain names are
//!   program variables, declared constants or quantifier-bound;
//! * **relational expressions** — program variables must carry a side tag
//!   (`x<1>`); plain names are quantifier-bound variables, declared
//!   constants, or caller-provided extras (e.g. the parameter of a
//!   distance family).

use super::{AxiomBody, DExpr, Decls, Domain, Expr, Program, Quant, Stmt, Type, Value};
use crate::rat::Rat;
use thiserror::Error;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("type error: {0}")]
pub struct TypeError(pub String);

fn err<T>(msg: impl Into<String>) -> Result<T, TypeError> {
    Err(TypeError(msg.into()))
}

/// Is `sub` usable where `sup` is expected?
pub fn subtype(sub: &Type, sup: &Type) -> bool {
    match (sub, sup) {
        (Type::Int, Type::Rat) => true,
        (Type::Map(d1, t1), Type::Map(d2, t2)) => d1 == d2 && subtype(t1, t2),
        _ => sub == sup,
    }
}

/// Least common supertype, if any.
fn join(a: &Type, b: &Type) -> Result<Type, TypeError> {
    if subtype(a, b) {
        Ok(b.clone())
    } else if subtype(b, a) {
        Ok(a.clone())
    } else {
        err(format!("incompatible types `{a}` and `{b}`"))
    }
}

fn is_numeric(t: &Type) -> bool {
    matches!(t, Type::Int | Type::Rat)
}

/// The type of a literal value. Integral rationals type as `int` and
/// promote where needed.
pub fn value_type(v: &Value) -> Result<Type, TypeError> {
    match v {
        Value::Bool(_) => Ok(Type::Bool),
        Value::Rat(r) => Ok(if r.is_integer() { Type::Int } else { Type::Rat }),
        Value::Vect(es) => Ok(Type::Vec(es.len())),
        Value::Map(m) => {
            let keys: Vec<Value> = m.keys().cloned().collect();
            if keys.is_empty() {
                return err("cannot type an empty map literal");
            }
            let mut vt: Option<Type> = None;
            for val in m.values() {
                let t = value_type(val)?;
                vt = Some(match vt {
                    None => t,
                    Some(u) => join(&u, &t)?,
                });
            }
            Ok(Type::Map(Domain::Explicit(keys), Box::new(vt.unwrap())))
        }
    }
}

/// The type of the elements of a domain.
pub fn elem_type(d: &Domain) -> Result<Type, TypeError> {
    match d {
        Domain::Range(..) => Ok(Type::Int),
        Domain::Explicit(vs) => {
            if vs.is_empty() {
                return err("empty explicit domain");
            }
            let mut t = value_type(&vs[0])?;
            for v in &vs[1..] {
                t = join(&t, &value_type(v)?)?;
            }
            Ok(t)
        }
        Domain::Maps(k, v) => Ok(Type::Map((**k).clone(), Box::new(elem_type(v)?))),
        Domain::Vecs(n, d) => {
            let t = elem_type(d)?;
            if !is_numeric(&t) {
                return err(format!("vecs(..) requires numeric entries, got `{t}`"));
            }
            Ok(Type::Vec(*n))
        }
    }
}

/// Whether expressions are typed in the program role or the relational
/// role (see the module docs).
#[derive(Clone, Copy, PartialEq, Eq)]
enum Role {
    Program,
    Relational,
}

struct Ck<'a> {
    decls: &'a Decls,
    role: Role,
    /// Extra plain variables in scope (family parameters, quantifier
    /// binders), innermost last.
    scope: Vec<(String, Type)>,
}

impl<'a> Ck<'a> {
    fn lookup_plain(&self, x: &str) -> Result<Type, TypeError> {
        if let Some((_, t)) = self.scope.iter().rev().find(|(n, _)| n == x) {
            return Ok(t.clone());
        }
        if self.decls.constant(x).is_some() {
            return Ok(Type::Rat);
        }
        match self.role {
            Role::Program => match self.decls.var(x) {
                Some(v) => Ok(v.ty.clone()),
                None => err(format!("unknown variable `{x}`")),
            },
            Role::Relational => {
                if self.decls.var(x).is_some() {
                    err(format!(
                        "program variable `{x}` needs a side tag (`{x}<1>` or `{x}<2>`) here"
                    ))
                } else {
                    err(format!("unknown name `{x}`"))
                }
            }
        }
    }

    fn infer(&mut self, e: &Expr) -> Result<Type, TypeError> {
        match e {
            Expr::Lit(v) => value_type(v),
            Expr::Var(x, None) => self.lookup_plain(x),
            Expr::Var(x, Some(_)) => {
                if self.role == Role::Program {
                    return err(format!("side-tagged `{x}` not allowed in a program expression"));
                }
                match self.decls.var(x) {
                    Some(v) => Ok(v.ty.clone()),
                    None => err(format!("unknown program variable `{x}`")),
                }
            }
            Expr::Neg(a) => {
                let t = self.infer(a)?;
                match t {
                    Type::Int | Type::Rat | Type::Vec(_) => Ok(t),
                    _ => err(format!("cannot negate `{t}`")),
                }
            }
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                let ta = self.infer(a)?;
                let tb = self.infer(b)?;
                match (&ta, &tb) {
                    (Type::Vec(n), Type::Vec(m)) if n == m => Ok(ta),
                    _ if is_numeric(&ta) && is_numeric(&tb) => join(&ta, &tb),
                    _ => err(format!("cannot add/subtract `{ta}` and `{tb}`")),
                }
            }
            Expr::Mul(a, b) => {
                let ta = self.infer(a)?;
                let tb = self.infer(b)?;
                match (&ta, &tb) {
                    (Type::Vec(_), t) if is_numeric(t) => Ok(ta),
                    (t, Type::Vec(_)) if is_numeric(t) => Ok(tb),
                    _ if is_numeric(&ta) && is_numeric(&tb) => join(&ta, &tb),
                    _ => err(format!("cannot multiply `{ta}` and `{tb}`")),
                }
            }
            Expr::Not(a) => {
                self.check(a, &Type::Bool)?;
                Ok(Type::Bool)
            }
            Expr::And(a, b) | Expr::Or(a, b) | Expr::Implies(a, b) => {
                self.check(a, &Type::Bool)?;
                self.check(b, &Type::Bool)?;
                Ok(Type::Bool)
            }
            Expr::Eq(a, b) | Expr::Ne(a, b) => {
                let ta = self.infer(a);
                // Allow a literal on either side to be checked against the
                // other side's type (maps/vectors are not inferable).
                match ta {
                    Ok(t) => self.check(b, &t).or_else(|_| {
                        let u = self.infer(b)?;
                        join(&t, &u).map(|_| ())
                    })?,
                    Err(e) => {
                        let t = self.infer(b).map_err(|_| e)?;
                        self.check(a, &t)?;
                    }
                }
                Ok(Type::Bool)
            }
            Expr::Lt(a, b) | Expr::Le(a, b) | Expr::Gt(a, b) | Expr::Ge(a, b) => {
                let ta = self.infer(a)?;
                let tb = self.infer(b)?;
                if is_numeric(&ta) && is_numeric(&tb) {
                    Ok(Type::Bool)
                } else {
                    err(format!("cannot order `{ta}` and `{tb}`"))
                }
            }
            Expr::Ite(c, a, b) => {
                self.check(c, &Type::Bool)?;
                let ta = self.infer(a)?;
                let tb = self.infer(b)?;
                join(&ta, &tb)
            }
            Expr::Ind(a) => {
                self.check(a, &Type::Bool)?;
                Ok(Type::Int)
            }
            Expr::Abs(a) => {
                let t = self.infer(a)?;
                if is_numeric(&t) {
                    Ok(t)
                } else {
                    err(format!("abs(..) needs a number, got `{t}`"))
                }
            }
            Expr::Norm1(a) => {
                let t = self.infer(a)?;
                match t {
                    Type::Vec(_) => Ok(Type::Rat),
                    _ => err(format!("norm1(..) needs a vector, got `{t}`")),
                }
            }
            Expr::IsInt(a) => {
                let t = self.infer(a)?;
                if is_numeric(&t) {
                    Ok(Type::Bool)
                } else {
                    err(format!("isint(..) needs a number, got `{t}`"))
                }
            }
            Expr::Index(m, k) => {
                let tm = self.infer(m)?;
                match tm {
                    Type::Map(d, t) => {
                        self.check(k, &elem_type(&d)?)?;
                        Ok(*t)
                    }
                    Type::Vec(_) => {
                        self.check(k, &Type::Int)?;
                        Ok(Type::Rat)
                    }
                    _ => err(format!("cannot index into `{tm}`")),
                }
            }
            Expr::Update(m, k, v) => {
                let tm = self.infer(m)?;
                match &tm {
                    Type::Map(d, t) => {
                        self.check(k, &elem_type(d)?)?;
                        self.check(v, t)?;
                        Ok(tm)
                    }
                    Type::Vec(_) => {
                        self.check(k, &Type::Int)?;
                        self.check(v, &Type::Rat)?;
                        Ok(tm)
                    }
                    _ => err(format!("cannot update `{tm}`")),
                }
            }
            Expr::VecLit(es) => {
                for e in es {
                    self.check(e, &Type::Rat)?;
                }
                Ok(Type::Vec(es.len()))
            }
            Expr::MapLit(_) => err("cannot infer the type of a map literal without context"),
            Expr::Apply(f, args) => {
                let fd = self
                    .decls
                    .fun(f)
                    .ok_or_else(|| TypeError(format!("unknown function `{f}`")))?
                    .clone();
                if fd.args.len() != args.len() {
                    return err(format!(
                        "`{f}` expects {} arguments, got {}",
                        fd.args.len(),
                        args.len()
                    ));
                }
                for (a, t) in args.iter().zip(&fd.args) {
                    self.check(a, t)?;
                }
                Ok(fd.ret)
            }
            Expr::QuantExpr(q, v, d, body) => {
                let t = elem_type(d)?;
                self.scope.push((v.clone(), t));
                let r = match q {
                    Quant::Forall | Quant::Exists => {
                        self.check(body, &Type::Bool).map(|()| Type::Bool)
                    }
                    Quant::Sum => {
                        let bt = self.infer(body)?;
                        if is_numeric(&bt) {
                            Ok(bt)
                        } else {
                            err(format!("sum body must be numeric, got `{bt}`"))
                        }
                    }
                };
                self.scope.pop();
                r
            }
        }
    }

    fn check(&mut self, e: &Expr, expected: &Type) -> Result<(), TypeError> {
        match (e, expected) {
            (Expr::MapLit(kvs), Type::Map(d, t)) => {
                for (k, v) in kvs {
                    match k {
                        Expr::Lit(kv) => {
                            if !d.contains(kv) {
                                return err(format!("map key `{kv}` outside domain `{d}`"));
                            }
                        }
                        _ => return err("map literal keys must be literal values"),
                    }
                    self.check(v, t)?;
                }
                Ok(())
            }
            (Expr::VecLit(es), Type::Vec(n)) => {
                if es.len() != *n {
                    return err(format!("vector literal has {} entries, expected {n}", es.len()));
                }
                for e in es {
                    self.check(e, &Type::Rat)?;
                }
                Ok(())
            }
            (Expr::Ite(c, a, b), _) => {
                self.check(c, &Type::Bool)?;
                self.check(a, expected)?;
                self.check(b, expected)
            }
            (Expr::Lit(Value::Map(_)), Type::Map(..)) => {
                let t = self.infer(e)?;
                // A literal map's inferred key set must sit inside the
                // expected domain; value types must promote.
                if let (Type::Map(dk, tv), Type::Map(ed, et)) = (&t, expected) {
                    if let Domain::Explicit(keys) = dk {
                        for k in keys {
                            if !ed.contains(k) {
                                return err(format!("map key `{k}` outside domain `{ed}`"));
                            }
                        }
                    }
                    if subtype(tv, et) {
                        return Ok(());
                    }
                }
                err(format!("expected `{expected}`, got `{t}`"))
            }
            _ => {
                let t = self.infer(e)?;
                if subtype(&t, expected) {
                    Ok(())
                } else {
                    err(format!("expected `{expected}`, got `{t}`"))
                }
            }
        }
    }
}

/// Typecheck a program expression (no side tags). Returns its type.
pub fn typecheck_expr(decls: &Decls, e: &Expr) -> Result<Type, TypeError> {
    Ck { decls, role: Role::Program, scope: Vec::new() }.infer(e)
}

/// Typecheck a program expression against an expected type.
pub fn typecheck_expr_at(decls: &Decls, e: &Expr, expected: &Type) -> Result<(), TypeError> {
    Ck { decls, role: Role::Program, scope: Vec::new() }.check(e, expected)
}

/// Typecheck a relational expression. Program variables must be tagged;
/// `extra` names additional plain variables in scope (e.g. a distance
/// family's parameter). Returns the expression's type.
pub fn typecheck_rel(
    decls: &Decls,
    e: &Expr,
    extra: &[(String, Type)],
) -> Result<Type, TypeError> {
    Ck { decls, role: Role::Relational, scope: extra.to_vec() }.infer(e)
}

fn check_dexpr(decls: &Decls, x: &str, xt: &Type, d: &DExpr) -> Result<(), TypeError> {
    let mut ck = Ck { decls, role: Role::Program, scope: Vec::new() };
    match d {
        DExpr::Unif(dom) => {
            let t = elem_type(dom)?;
            if subtype(&t, xt) {
                Ok(())
            } else {
                err(format!("`{x}` has type `{xt}` but unif samples `{t}`"))
            }
        }
        DExpr::Bern(e) => {
            ck.check(e, &Type::Rat)?;
            if *xt == Type::Bool {
                Ok(())
            } else {
                err(format!("bern(..) target `{x}` must be bool, is `{xt}`"))
            }
        }
        DExpr::Mult(e) => {
            let t = ck.infer(e)?;
            match (&t, xt) {
                (Type::Vec(n), Type::Vec(m)) if n == m => Ok(()),
                _ => err(format!(
                    "mult(..) samples a basis vector of the same length as its \
                     argument; `{x}` is `{xt}`, argument is `{t}`"
                )),
            }
        }
        DExpr::Unit(e) => ck.check(e, xt),
    }
}

/// Typecheck a statement against declarations.
pub fn typecheck_stmt(decls: &Decls, s: &Stmt) -> Result<(), TypeError> {
    match s {
        Stmt::Skip | Stmt::Abort => Ok(()),
        Stmt::Assign(x, e) => {
            let v = decls
                .var(x)
                .ok_or_else(|| TypeError(format!("assignment to undeclared variable `{x}`")))?;
            let mut ck = Ck { decls, role: Role::Program, scope: Vec::new() };
            ck.check(e, &v.ty)
                .map_err(|TypeError(m)| TypeError(format!("in `{x} <- ..`: {m}")))
        }
        Stmt::Sample(x, d) => {
            let v = decls
                .var(x)
                .ok_or_else(|| TypeError(format!("sampling into undeclared variable `{x}`")))?;
            check_dexpr(decls, x, &v.ty, d)
        }
        Stmt::Seq(a, b) => {
            typecheck_stmt(decls, a)?;
            typecheck_stmt(decls, b)
        }
        Stmt::If(c, a, b) => {
            typecheck_expr_at(decls, c, &Type::Bool)?;
            typecheck_stmt(decls, a)?;
            typecheck_stmt(decls, b)
        }
        Stmt::While(c, body) => {
            typecheck_expr_at(decls, c, &Type::Bool)?;
            typecheck_stmt(decls, body)
        }
    }
}

fn prob_in_unit_interval(p: &Rat) -> bool {
    let zero = Rat::from_integer(0.into());
    let one = Rat::from_integer(1.into());
    &zero <= p && p <= &one
}

/// Typecheck a whole program: declarations are well-formed, axiom bodies
/// type, and the body statement types.
pub fn typecheck_program(p: &Program) -> Result<(), TypeError> {
    for v in &p.decls.vars {
        if let Some(d) = &v.domain {
            let t = elem_type(d)
                .map_err(|TypeError(m)| TypeError(format!("domain of `{}`: {m}", v.name)))?;
            if !subtype(&t, &v.ty) {
                return err(format!(
                    "variable `{}` has type `{}` but its domain holds `{t}`",
                    v.name, v.ty
                ));
            }
        }
    }
    for a in &p.decls.axioms {
        match &a.body {
            AxiomBody::Rel(e) => {
                let t = typecheck_rel(&p.decls, e, &[])
                    .map_err(|TypeError(m)| TypeError(format!("axiom `{}`: {m}", a.name)))?;
                if t != Type::Bool {
                    return err(format!("axiom `{}` must be a formula, has type `{t}`", a.name));
                }
            }
            AxiomBody::Prob { stmt, guard, prob } => {
                typecheck_stmt(&p.decls, stmt)
                    .map_err(|TypeError(m)| TypeError(format!("axiom `{}`: {m}", a.name)))?;
                typecheck_expr_at(&p.decls, guard, &Type::Bool)
                    .map_err(|TypeError(m)| TypeError(format!("axiom `{}`: {m}", a.name)))?;
                if !prob_in_unit_interval(prob) {
                    return err(format!("axiom `{}`: probability outside [0, 1]", a.name));
                }
            }
        }
    }
    typecheck_stmt(&p.decls, &p.body)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parser::{parse_program, parse_rel_expr};

    fn decls() -> Decls {
        let p = parse_program(
            "var i : int in [0..3];\n\
             var r : rat;\n\
             var b : bool;\n\
             var x : vec(2) in vecs(2, {0, 1/2, 1});\n\
             var w : map([0..2], int) in maps([0..2], [0..4]);\n\
             const gamma = 1/10;\n\
             fun valid(map([0..2], int), int, int) : bool;\n\
             skip",
        )
        .unwrap();
        p.decls
    }

    #[test]
    fn int_promotes_to_rat() {
        let p = parse_program("var r : rat; r <- 1 + 2").unwrap();
        typecheck_program(&p).unwrap();
        let q = parse_program("var i : int; i <- 1/2").unwrap();
        assert!(typecheck_program(&q).is_err());
    }

    #[test]
    fn map_and_vec_literals_check_against_context() {
        let p = parse_program(
            "var w : map([0..2], int) in maps([0..2], [0..4]);\n\
             var x : vec(2);\n\
             w <- {0 = 1, 1 = 0, 2 = 4};\n\
             x <- [1/2, 1/2]",
        )
        .unwrap();
        typecheck_program(&p).unwrap();
        let bad = parse_program("var w : map([0..2], int); w <- {7 = 1}").unwrap();
        assert!(typecheck_program(&bad).is_err());
        let badvec = parse_program("var x : vec(2); x <- [1/2]").unwrap();
        assert!(typecheck_program(&badvec).is_err());
    }

    #[test]
    fn relational_role_requires_tags() {
        let d = decls();
        let ok = parse_rel_expr("i<1> == i<2> && gamma <= 1/1").unwrap();
        assert_eq!(typecheck_rel(&d, &ok, &[]).unwrap(), Type::Bool);
        let bare = parse_rel_expr("i == i").unwrap();
        assert!(typecheck_rel(&d, &bare, &[]).is_err());
        // ...unless the plain name is an extra in scope.
        let fam = parse_rel_expr("norm1(x<1> - x<2>) + k * 1/2").unwrap();
        assert_eq!(
            typecheck_rel(&d, &fam, &[("k".into(), Type::Rat)]).unwrap(),
            Type::Rat
        );
    }

    #[test]
    fn program_role_rejects_tags() {
        let d = decls();
        let e = parse_rel_expr("i<1> + 1").unwrap();
        assert!(typecheck_expr(&d, &e).is_err());
    }

    #[test]
    fn dexpr_targets() {
        let ok = parse_program(
            "var b : bool; var x : vec(2); var i : int in [0..2];\n\
             b <$ bern(1/3); x <$ mult([1/2, 1/2]); i <$ unif([0..2])",
        )
        .unwrap();
        typecheck_program(&ok).unwrap();
        let bad = parse_program("var i : int; i <$ bern(1/2)").unwrap();
        assert!(typecheck_program(&bad).is_err());
    }

    #[test]
    fn quantifiers_bind() {
        let d = decls();
        let e = parse_rel_expr("sum z in [0..2] . ind(w<1>[z] != w<2>[z])").unwrap();
        assert_eq!(typecheck_rel(&d, &e, &[]).unwrap(), Type::Int);
        let f = parse_rel_expr("forall u in [0..2] . valid(w<1>, u, 0)").unwrap();
        assert_eq!(typecheck_rel(&d, &f, &[]).unwrap(), Type::Bool);
    }

    #[test]
    fn uninterpreted_functions() {
        let d = decls();
        let e = parse_rel_expr("valid(w<1>, 0, 1)").unwrap();
        assert_eq!(typecheck_rel(&d, &e, &[]).unwrap(), Type::Bool);
        let bad = parse_rel_expr("valid(w<1>, 0)").unwrap();
        assert!(typecheck_rel(&d, &bad, &[]).is_err());
    }
}
