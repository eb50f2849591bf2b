//! Operations on relational expressions: substitution, tagging,
//! normalisation, and α-equivalence.
//!
//! [`normalize`] is the structural workhorse of the proof checker: two
//! expressions are treated as "the same assertion" exactly when their
//! normal forms are structurally equal (or α-equivalent where binders are
//! in play). It folds literal arithmetic, collapses units and zeros,
//! flattens `&&`/`||`/`+`/`*` chains into canonical right-associated
//! spines, and cancels `e - e`. It deliberately does *not* sort operands
//! or otherwise chase a minimal form — determinism and idempotence are
//! what matters, and both sides of every comparison the checker makes are
//! built from the same constructors.

use crate::lang::{Decls, Domain, Expr, Quant, Side, Value};
use crate::rat::{rat_abs, rat_int, Rat};
use crate::semantics::{eval_rel_with, EvalError, Memory};

/// Substitute `repl` for every free occurrence of the plain variable
/// `name`. Panics if a quantifier would capture a free plain variable of
/// `repl` (the toolkit only substitutes closed or tagged expressions).
pub fn subst_plain(e: &Expr, name: &str, repl: &Expr) -> Expr {
    match e {
        Expr::Var(x, None) if x == name => repl.clone(),
        Expr::QuantExpr(q, v, d, body) => {
            if v == name {
                // Shadowed: no substitution under the binder.
                e.clone()
            } else {
                assert!(
                    !repl.free_plain_vars().contains(v),
                    "substitution would capture `{v}`"
                );
                Expr::QuantExpr(*q, v.clone(), d.clone(), Box::new(subst_plain(body, name, repl)))
            }
        }
        _ => map_children(e, &mut |c| subst_plain(c, name, repl)),
    }
}

/// Substitute `repl` for every occurrence of the tagged variable
/// `name<side>`. Tagged names are never quantifier-bound, so no capture
/// is possible through them.
pub fn subst_tagged(e: &Expr, name: &str, side: Side, repl: &Expr) -> Expr {
    match e {
        Expr::Var(x, Some(s)) if x == name && *s == side => repl.clone(),
        _ => map_children(e, &mut |c| subst_tagged(c, name, side, repl)),
    }
}

/// Tag every free plain occurrence of a *program variable* with `side`,
/// turning a program expression into the relational expression that reads
/// it in that execution. Constants and quantifier-bound names stay plain.
pub fn inj(decls: &Decls, e: &Expr, side: Side) -> Expr {
    fn go(decls: &Decls, e: &Expr, side: Side, bound: &mut Vec<String>) -> Expr {
        match e {
            Expr::Var(x, None) => {
                if bound.iter().any(|b| b == x) || decls.var(x).is_none() {
                    e.clone()
                } else {
                    Expr::Var(x.clone(), Some(side))
                }
            }
            Expr::QuantExpr(q, v, d, body) => {
                bound.push(v.clone());
                let b = go(decls, body, side, bound);
                bound.pop();
                Expr::QuantExpr(*q, v.clone(), d.clone(), Box::new(b))
            }
            _ => map_children(e, &mut |c| go(decls, c, side, bound)),
        }
    }
    go(decls, e, side, &mut Vec::new())
}

/// Rebuild a node with every child passed through `f`.
fn map_children(e: &Expr, f: &mut impl FnMut(&Expr) -> Expr) -> Expr {
    use Expr::*;
    match e {
        Lit(_) | Var(..) => e.clone(),
        Neg(a) => Neg(Box::new(f(a))),
        Not(a) => Not(Box::new(f(a))),
        Ind(a) => Ind(Box::new(f(a))),
        Abs(a) => Abs(Box::new(f(a))),
        Norm1(a) => Norm1(Box::new(f(a))),
        IsInt(a) => IsInt(Box::new(f(a))),
        Add(a, b) => Add(Box::new(f(a)), Box::new(f(b))),
        Sub(a, b) => Sub(Box::new(f(a)), Box::new(f(b))),
        Mul(a, b) => Mul(Box::new(f(a)), Box::new(f(b))),
        And(a, b) => And(Box::new(f(a)), Box::new(f(b))),
        Or(a, b) => Or(Box::new(f(a)), Box::new(f(b))),
        Implies(a, b) => Implies(Box::new(f(a)), Box::new(f(b))),
        Eq(a, b) => Eq(Box::new(f(a)), Box::new(f(b))),
        Ne(a, b) => Ne(Box::new(f(a)), Box::new(f(b))),
        Lt(a, b) => Lt(Box::new(f(a)), Box::new(f(b))),
        Le(a, b) => Le(Box::new(f(a)), Box::new(f(b))),
        Gt(a, b) => Gt(Box::new(f(a)), Box::new(f(b))),
        Ge(a, b) => Ge(Box::new(f(a)), Box::new(f(b))),
        Ite(c, a, b) => Ite(Box::new(f(c)), Box::new(f(a)), Box::new(f(b))),
        Index(a, b) => Index(Box::new(f(a)), Box::new(f(b))),
        Update(a, b, c) => Update(Box::new(f(a)), Box::new(f(b)), Box::new(f(c))),
        VecLit(es) => VecLit(es.iter().map(|e| f(e)).collect()),
        MapLit(kvs) => MapLit(kvs.iter().map(|(k, v)| (f(k), f(v))).collect()),
        Apply(name, es) => Apply(name.clone(), es.iter().map(|e| f(e)).collect()),
        QuantExpr(q, v, d, b) => QuantExpr(*q, v.clone(), d.clone(), Box::new(f(b))),
    }
}

fn lit_rat(e: &Expr) -> Option<&Rat> {
    match e {
        Expr::Lit(Value::Rat(r)) => Some(r),
        _ => None,
    }
}

fn lit_bool(e: &Expr) -> Option<bool> {
    match e {
        Expr::Lit(Value::Bool(b)) => Some(*b),
        _ => None,
    }
}

fn rat_lit(r: Rat) -> Expr {
    Expr::Lit(Value::Rat(r))
}

fn bool_lit(b: bool) -> Expr {
    Expr::Lit(Value::Bool(b))
}

/// Literal addition/subtraction over numbers and vectors.
fn lit_add(a: &Value, b: &Value, sub: bool) -> Option<Value> {
    match (a, b) {
        (Value::Rat(x), Value::Rat(y)) => Some(Value::Rat(if sub {
            x.clone() - y.clone()
        } else {
            x.clone() + y.clone()
        })),
        (Value::Vect(x), Value::Vect(y)) if x.len() == y.len() => Some(Value::Vect(
            x.iter()
                .zip(y)
                .map(|(p, q)| if sub { p.clone() - q.clone() } else { p.clone() + q.clone() })
                .collect(),
        )),
        _ => None,
    }
}

fn lit_mul(a: &Value, b: &Value) -> Option<Value> {
    match (a, b) {
        (Value::Rat(x), Value::Rat(y)) => Some(Value::Rat(x.clone() * y.clone())),
        (Value::Rat(s), Value::Vect(v)) | (Value::Vect(v), Value::Rat(s)) => Some(Value::Vect(
            v.iter().map(|r| r.clone() * s.clone()).collect(),
        )),
        _ => None,
    }
}

fn flatten_add(e: &Expr, out: &mut Vec<Expr>) {
    match e {
        Expr::Add(a, b) => {
            flatten_add(a, out);
            flatten_add(b, out);
        }
        _ => out.push(e.clone()),
    }
}

fn flatten_mul(e: &Expr, out: &mut Vec<Expr>) {
    match e {
        Expr::Mul(a, b) => {
            flatten_mul(a, out);
            flatten_mul(b, out);
        }
        _ => out.push(e.clone()),
    }
}

fn flatten_and(e: &Expr, out: &mut Vec<Expr>) {
    match e {
        Expr::And(a, b) => {
            flatten_and(a, out);
            flatten_and(b, out);
        }
        _ => out.push(e.clone()),
    }
}

fn flatten_or(e: &Expr, out: &mut Vec<Expr>) {
    match e {
        Expr::Or(a, b) => {
            flatten_or(a, out);
            flatten_or(b, out);
        }
        _ => out.push(e.clone()),
    }
}

fn rebuild_right<Fjoin: Fn(Expr, Expr) -> Expr>(mut es: Vec<Expr>, empty: Expr, join: Fjoin) -> Expr {
    match es.len() {
        0 => empty,
        1 => es.pop().unwrap(),
        _ => {
            let mut it = es.into_iter().rev();
            let last = it.next().unwrap();
            it.fold(last, |acc, e| join(e, acc))
        }
    }
}

/// The conjuncts of a (normalised) formula: `a && b && c` flattens to
/// `[a, b, c]`; anything else is a single conjunct. `true` flattens to
/// nothing.
pub fn conjuncts(e: &Expr) -> Vec<Expr> {
    let mut out = Vec::new();
    flatten_and(e, &mut out);
    out.retain(|c| lit_bool(c) != Some(true));
    out
}

/// Conjunction of a list, right-associated; empty list is `true`.
pub fn and_all(es: Vec<Expr>) -> Expr {
    rebuild_right(es, bool_lit(true), |a, b| Expr::And(Box::new(a), Box::new(b)))
}

/// Normalise an expression (see the module docs). Idempotent and
/// deterministic; semantics-preserving on well-typed expressions.
pub fn normalize(e: &Expr) -> Expr {
    use Expr::*;
    // Normalise children first.
    let e = map_children(e, &mut |c| normalize(c));
    match &e {
        Neg(a) => match &**a {
            Lit(Value::Rat(r)) => rat_lit(-r.clone()),
            Lit(Value::Vect(v)) => Lit(Value::Vect(v.iter().map(|r| -r.clone()).collect())),
            Neg(inner) => (**inner).clone(),
            _ => e,
        },
        Add(..) => {
            let mut terms = Vec::new();
            flatten_add(&e, &mut terms);
            let mut acc: Option<Value> = None;
            let mut rest = Vec::new();
            for t in terms {
                match t {
                    Lit(v) => {
                        acc = Some(match acc {
                            None => v,
                            Some(a) => match lit_add(&a, &v, false) {
                                Some(s) => s,
                                None => {
                                    rest.push(Lit(a));
                                    v
                                }
                            },
                        });
                    }
                    t => rest.push(t),
                }
            }
            if let Some(a) = acc {
                let zero = matches!(&a, Value::Rat(r) if *r == rat_int(0));
                if !zero || rest.is_empty() {
                    rest.push(Lit(a));
                }
            }
            rebuild_right(rest, rat_lit(rat_int(0)), |a, b| Add(Box::new(a), Box::new(b)))
        }
        Sub(a, b) => {
            if let (Lit(x), Lit(y)) = (&**a, &**b) {
                if let Some(v) = lit_add(x, y, true) {
                    return Lit(v);
                }
            }
            if lit_rat(b) == Some(&rat_int(0)) {
                return (**a).clone();
            }
            if a == b {
                return rat_lit(rat_int(0));
            }
            e
        }
        Mul(..) => {
            let mut factors = Vec::new();
            flatten_mul(&e, &mut factors);
            let mut coef: Option<Value> = None;
            let mut rest = Vec::new();
            for f in factors {
                match f {
                    Lit(v) => {
                        coef = Some(match coef {
                            None => v,
                            Some(c) => match lit_mul(&c, &v) {
                                Some(p) => p,
                                None => {
                                    rest.push(Lit(c));
                                    v
                                }
                            },
                        });
                    }
                    f => rest.push(f),
                }
            }
            match coef {
                Some(Value::Rat(r)) if r == rat_int(0) => rat_lit(rat_int(0)),
                Some(Value::Rat(r)) if r == rat_int(1) && !rest.is_empty() => {
                    rebuild_right(rest, rat_lit(rat_int(1)), |a, b| Mul(Box::new(a), Box::new(b)))
                }
                Some(v) => {
                    let mut all = vec![Lit(v)];
                    all.extend(rest);
                    rebuild_right(all, rat_lit(rat_int(1)), |a, b| Mul(Box::new(a), Box::new(b)))
                }
                None => {
                    rebuild_right(rest, rat_lit(rat_int(1)), |a, b| Mul(Box::new(a), Box::new(b)))
                }
            }
        }
        Not(a) => match &**a {
            Lit(Value::Bool(b)) => bool_lit(!b),
            Not(inner) => (**inner).clone(),
            _ => e,
        },
        And(..) => {
            let mut cs = Vec::new();
            flatten_and(&e, &mut cs);
            let mut out: Vec<Expr> = Vec::new();
            for c in cs {
                match lit_bool(&c) {
                    Some(true) => {}
                    Some(false) => return bool_lit(false),
                    None => {
                        if !out.contains(&c) {
                            out.push(c);
                        }
                    }
                }
            }
            rebuild_right(out, bool_lit(true), |a, b| And(Box::new(a), Box::new(b)))
        }
        Or(..) => {
            let mut cs = Vec::new();
            flatten_or(&e, &mut cs);
            let mut out: Vec<Expr> = Vec::new();
            for c in cs {
                match lit_bool(&c) {
                    Some(false) => {}
                    Some(true) => return bool_lit(true),
                    None => {
                        if !out.contains(&c) {
                            out.push(c);
                        }
                    }
                }
            }
            rebuild_right(out, bool_lit(false), |a, b| Or(Box::new(a), Box::new(b)))
        }
        Implies(a, b) => match (lit_bool(a), lit_bool(b)) {
            (Some(true), _) => (**b).clone(),
            (Some(false), _) => bool_lit(true),
            (_, Some(true)) => bool_lit(true),
            _ if a == b => bool_lit(true),
            _ => e,
        },
        Eq(a, b) => fold_cmp(&e, a, b, |o| o == std::cmp::Ordering::Equal, true),
        Ne(a, b) => fold_cmp(&e, a, b, |o| o != std::cmp::Ordering::Equal, false),
        Lt(a, b) => fold_cmp(&e, a, b, |o| o == std::cmp::Ordering::Less, false),
        Le(a, b) => fold_cmp(&e, a, b, |o| o != std::cmp::Ordering::Greater, true),
        Gt(a, b) => fold_cmp(&e, a, b, |o| o == std::cmp::Ordering::Greater, false),
        Ge(a, b) => fold_cmp(&e, a, b, |o| o != std::cmp::Ordering::Less, true),
        Ite(c, a, b) => match lit_bool(c) {
            Some(true) => (**a).clone(),
            Some(false) => (**b).clone(),
            None if a == b => (**a).clone(),
            None => e,
        },
        Ind(a) => match lit_bool(a) {
            Some(true) => rat_lit(rat_int(1)),
            Some(false) => rat_lit(rat_int(0)),
            None => e,
        },
        Abs(a) => match &**a {
            Lit(Value::Rat(r)) => rat_lit(rat_abs(r)),
            Neg(inner) => Abs(inner.clone()),
            _ => e,
        },
        Norm1(a) => match &**a {
            Lit(Value::Vect(v)) => rat_lit(v.iter().map(rat_abs).fold(rat_int(0), |x, y| x + y)),
            Neg(inner) => Norm1(inner.clone()),
            _ => e,
        },
        IsInt(a) => match lit_rat(a) {
            Some(r) => bool_lit(r.is_integer()),
            None => e,
        },
        Index(m, k) => {
            if let Lit(kv) = &**k {
                match &**m {
                    Lit(Value::Map(map)) => {
                        if let Some(v) = map.get(kv) {
                            return Lit(v.clone());
                        }
                    }
                    Lit(Value::Vect(v)) => {
                        if let Some(r) = kv.as_rat().filter(|r| r.is_integer()) {
                            if let Some(i) = num::ToPrimitive::to_usize(&r.to_integer()) {
                                if i < v.len() {
                                    return rat_lit(v[i].clone());
                                }
                            }
                        }
                    }
                    Update(inner, uk, uv) => {
                        if let Lit(ukv) = &**uk {
                            if ukv == kv {
                                return (**uv).clone();
                            } else {
                                return normalize(&Index(inner.clone(), k.clone()));
                            }
                        }
                    }
                    _ => {}
                }
            }
            e
        }
        VecLit(es) => {
            let mut lits = Vec::with_capacity(es.len());
            for x in es {
                match lit_rat(x) {
                    Some(r) => lits.push(r.clone()),
                    None => return e,
                }
            }
            Lit(Value::Vect(lits))
        }
        MapLit(kvs) => {
            let mut m = std::collections::BTreeMap::new();
            for (k, v) in kvs {
                match (k, v) {
                    (Lit(kv), Lit(vv)) => {
                        m.insert(kv.clone(), vv.clone());
                    }
                    _ => return e,
                }
            }
            Lit(Value::Map(m))
        }
        QuantExpr(q, _, d, body) => {
            let n = d.size();
            if n == Some(0) {
                return match q {
                    Quant::Forall => bool_lit(true),
                    Quant::Exists => bool_lit(false),
                    Quant::Sum => rat_lit(rat_int(0)),
                };
            }
            match (q, &**body) {
                (Quant::Forall, Lit(Value::Bool(b))) => bool_lit(*b),
                (Quant::Exists, Lit(Value::Bool(b))) => bool_lit(*b),
                (Quant::Sum, Lit(Value::Rat(r))) => match n {
                    Some(n) => rat_lit(rat_int(n as i64) * r.clone()),
                    None => e,
                },
                _ => e,
            }
        }
        _ => e,
    }
}

fn fold_cmp(
    e: &Expr,
    a: &Expr,
    b: &Expr,
    ok: impl Fn(std::cmp::Ordering) -> bool,
    refl: bool,
) -> Expr {
    if let (Some(x), Some(y)) = (lit_rat(a), lit_rat(b)) {
        return bool_lit(ok(x.cmp(y)));
    }
    // Non-numeric literal equality (booleans, vectors, maps).
    if let (Expr::Lit(x), Expr::Lit(y)) = (a, b) {
        if std::mem::discriminant(x) == std::mem::discriminant(y) {
            let eq = x == y;
            // Only Eq/Ne reach here with non-numeric literals; for those,
            // `ok` applied to Equal/Less encodes the polarity.
            return bool_lit(if eq { ok(std::cmp::Ordering::Equal) } else { ok(std::cmp::Ordering::Less) && ok(std::cmp::Ordering::Greater) });
        }
    }
    if a == b {
        return bool_lit(refl);
    }
    e.clone()
}

/// α-equivalence: structural equality up to renaming of quantifier-bound
/// variables.
pub fn alpha_eq(e1: &Expr, e2: &Expr) -> bool {
    fn go(e1: &Expr, e2: &Expr, env: &mut Vec<(String, String)>) -> bool {
        use Expr::*;
        match (e1, e2) {
            (Lit(a), Lit(b)) => a == b,
            (Var(x, None), Var(y, None)) => {
                // Innermost binding wins.
                for (a, b) in env.iter().rev() {
                    let xa = a == x;
                    let yb = b == y;
                    if xa || yb {
                        return xa && yb;
                    }
                }
                x == y
            }
            (Var(x, Some(s)), Var(y, Some(t))) => x == y && s == t,
            (Neg(a), Neg(b))
            | (Not(a), Not(b))
            | (Ind(a), Ind(b))
            | (Abs(a), Abs(b))
            | (Norm1(a), Norm1(b))
            | (IsInt(a), IsInt(b)) => go(a, b, env),
            (Add(a1, b1), Add(a2, b2))
            | (Sub(a1, b1), Sub(a2, b2))
            | (Mul(a1, b1), Mul(a2, b2))
            | (And(a1, b1), And(a2, b2))
            | (Or(a1, b1), Or(a2, b2))
            | (Implies(a1, b1), Implies(a2, b2))
            | (Eq(a1, b1), Eq(a2, b2))
            | (Ne(a1, b1), Ne(a2, b2))
            | (Lt(a1, b1), Lt(a2, b2))
            | (Le(a1, b1), Le(a2, b2))
            | (Gt(a1, b1), Gt(a2, b2))
            | (Ge(a1, b1), Ge(a2, b2))
            | (Index(a1, b1), Index(a2, b2)) => go(a1, a2, env) && go(b1, b2, env),
            (Ite(c1, a1, b1), Ite(c2, a2, b2)) | (Update(c1, a1, b1), Update(c2, a2, b2)) => {
                go(c1, c2, env) && go(a1, a2, env) && go(b1, b2, env)
            }
            (VecLit(xs), VecLit(ys)) => {
                xs.len() == ys.len() && xs.iter().zip(ys).all(|(a, b)| go(a, b, env))
            }
            (MapLit(xs), MapLit(ys)) => {
                xs.len() == ys.len()
                    && xs
                        .iter()
                        .zip(ys)
                        .all(|((k1, v1), (k2, v2))| go(k1, k2, env) && go(v1, v2, env))
            }
            (Apply(f, xs), Apply(g, ys)) => {
                f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(a, b)| go(a, b, env))
            }
            (QuantExpr(q1, v1, d1, b1), QuantExpr(q2, v2, d2, b2)) => {
                q1 == q2 && d1 == d2 && {
                    env.push((v1.clone(), v2.clone()));
                    let r = go(b1, b2, env);
                    env.pop();
                    r
                }
            }
            _ => false,
        }
    }
    go(e1, e2, &mut Vec::new())
}

/// Evaluate a relational expression on a memory pair to a boolean.
pub fn rel_bool(
    decls: &Decls,
    left: &Memory,
    right: &Memory,
    locals: &[(String, Value)],
    e: &Expr,
) -> Result<bool, EvalError> {
    match eval_rel_with(decls, left, right, locals, e)? {
        Value::Bool(b) => Ok(b),
        v => Err(EvalError::TypeMismatch(format!("expected a boolean, got {v}"))),
    }
}

/// Evaluate a relational expression on a memory pair to a rational
/// (distances).
pub fn rel_rat(
    decls: &Decls,
    left: &Memory,
    right: &Memory,
    locals: &[(String, Value)],
    e: &Expr,
) -> Result<Rat, EvalError> {
    match eval_rel_with(decls, left, right, locals, e)? {
        Value::Rat(r) => Ok(r),
        v => Err(EvalError::TypeMismatch(format!("expected a number, got {v}"))),
    }
}

/// The memory pair `(m1, m2)` restricted to the tagged variables of `e`,
/// rendered for counterexample messages.
pub fn describe_pair(e: &Expr, m1: &Memory, m2: &Memory) -> String {
    let names: std::collections::BTreeSet<String> = e.tagged_var_names();
    let show = |m: &Memory| {
        let mut s = String::from("{");
        let mut first = true;
        for n in &names {
            if let Some(v) = m.get(n) {
                if !first {
                    s.push_str(", ");
                }
                s.push_str(&format!("{n} = {v}"));
                first = false;
            }
        }
        s.push('}');
        s
    };
    format!("left {} / right {}", show(m1), show(m2))
}

/// Substitute a whole memory's values for one side's tagged variables.
pub fn subst_side_memory(e: &Expr, side: Side, m: &Memory) -> Expr {
    let mut out = e.clone();
    for (name, v) in &m.0 {
        out = subst_tagged(&out, name, side, &Expr::Lit(v.clone()));
    }
    out
}

/// `domain` helper: the declared domain of variable `x`, or an error
/// message naming the variable.
pub fn domain_of<'d>(decls: &'d Decls, x: &str) -> Result<&'d Domain, String> {
    decls
        .domain_of(x)
        .ok_or_else(|| format!("variable `{x}` has no declared finite domain"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parser::{parse_program, parse_rel_expr};
    use crate::rat::rat;

    fn norm(src: &str) -> Expr {
        normalize(&parse_rel_expr(src).unwrap())
    }

    #[test]
    fn folds_literals_and_units() {
        assert_eq!(norm("1 + 2 * 3"), Expr::lit_rat(rat(7, 1)));
        assert_eq!(norm("0 + x<1> * 1"), parse_rel_expr("x<1>").unwrap());
        assert_eq!(norm("x<1> * 0"), Expr::lit_rat(rat(0, 1)));
        assert_eq!(norm("x<1> - x<1>"), Expr::lit_rat(rat(0, 1)));
        assert_eq!(norm("abs(-3/4)"), Expr::lit_rat(rat(3, 4)));
        assert_eq!(norm("norm1([1/2, -1/2])"), Expr::lit_rat(rat(1, 1)));
        assert_eq!(norm("ind(true) + ind(false)"), Expr::lit_rat(rat(1, 1)));
        assert_eq!(norm("isint(4/2)"), Expr::lit_bool(true));
    }

    #[test]
    fn boolean_normal_forms() {
        assert_eq!(norm("true && x<1> == 1 && true"), norm("x<1> == 1"));
        assert_eq!(norm("false && x<1> == 1"), Expr::lit_bool(false));
        assert_eq!(norm("x<1> == 1 || true"), Expr::lit_bool(true));
        assert_eq!(norm("a<1> == 1 && a<1> == 1"), norm("a<1> == 1"));
        assert_eq!(norm("x<1> <= x<1>"), Expr::lit_bool(true));
        assert_eq!(norm("true => x<1> == 1"), norm("x<1> == 1"));
        assert_eq!(norm("!(!(b<1>))"), parse_rel_expr("b<1>").unwrap());
    }

    #[test]
    fn add_chains_canonicalise() {
        // Same multiset of terms written with different association and
        // literal placement normalises identically.
        assert_eq!(norm("(d<1> + 1) + 2"), norm("d<1> + 3"));
        assert_eq!(norm("1 + d<1> + 2"), norm("d<1> + 3"));
        assert_eq!(norm("2 * (3 * d<1>)"), norm("6 * d<1>"));
    }

    #[test]
    fn update_index_cancellation() {
        assert_eq!(norm("w<1>[0 -> 5][0]"), Expr::lit_rat(rat(5, 1)));
        assert_eq!(norm("w<1>[0 -> 5][1]"), norm("w<1>[1]"));
        assert_eq!(norm("{0 = 3, 1 = 4}[1]"), Expr::lit_rat(rat(4, 1)));
        assert_eq!(norm("[1/2, 3/4][1]"), Expr::lit_rat(rat(3, 4)));
    }

    #[test]
    fn quantifier_folding() {
        assert_eq!(norm("forall z in [0..5] . true"), Expr::lit_bool(true));
        assert_eq!(norm("sum z in [0..2] . 1/3"), Expr::lit_rat(rat(1, 1)));
        assert_eq!(norm("exists z in [1..0] . z == z"), Expr::lit_bool(false));
    }

    #[test]
    fn normalize_is_idempotent() {
        for src in [
            "1 + d<1> + 2 * 3",
            "a<1> && (b<2> || true) && a<1>",
            "abs(x<1> - x<2>) + norm1(p<1> - p<2>) * 0",
            "w<1>[i<1> -> 0][j<2>]",
            "sum z in [0..2] . ind(w<1>[z] != w<2>[z])",
        ] {
            let n1 = norm(src);
            assert_eq!(n1, normalize(&n1), "not idempotent on {src}");
        }
    }

    #[test]
    fn substitution_and_injection() {
        let p = parse_program("var x : int; var i : int; const c = 1/2; skip").unwrap();
        let e = parse_rel_expr("x + c + (sum x in [0..1] . x)").unwrap();
        // Plain substitution respects shadowing.
        let s = subst_plain(&e, "x", &Expr::lit_int(7));
        assert_eq!(
            normalize(&s),
            norm("7 + c + (sum x in [0..1] . x)")
        );
        // Injection tags declared vars only.
        let tagged = inj(&p.decls, &e, Side::Left);
        assert_eq!(
            tagged,
            parse_rel_expr("x<1> + c + (sum x in [0..1] . x)").unwrap()
        );
        // Tagged substitution.
        let t = subst_tagged(&tagged, "x", Side::Left, &Expr::lit_int(3));
        assert_eq!(normalize(&t), norm("3 + c + (sum x in [0..1] . x)"));
    }

    #[test]
    fn alpha_equivalence() {
        let a = parse_rel_expr("sum z in [0..2] . ind(w<1>[z] != w<2>[z])").unwrap();
        let b = parse_rel_expr("sum u in [0..2] . ind(w<1>[u] != w<2>[u])").unwrap();
        let c = parse_rel_expr("sum z in [0..3] . ind(w<1>[z] != w<2>[z])").unwrap();
        assert!(alpha_eq(&a, &b));
        assert!(!alpha_eq(&a, &c));
        // Bound/free mix-ups are not equivalent.
        let d = parse_rel_expr("forall z in [0..1] . z == k").unwrap();
        let e = parse_rel_expr("forall k in [0..1] . k == k").unwrap();
        assert!(!alpha_eq(&d, &e));
    }

    #[test]
    fn conjunct_flattening() {
        let e = norm("a<1> == 1 && b<2> == 2 && c<1> == 3");
        assert_eq!(conjuncts(&e).len(), 3);
        assert_eq!(normalize(&and_all(conjuncts(&e))), e);
    }
}
