//! The programming language: values, expressions, statements and
//! declarations, together with the text format and typechecker.
//!
//! Programs are written in a small imperative language with exact rational
//! arithmetic and discrete random sampling:
//!
//! ```text
//! var w : map([0..2], int) in maps([0..2], [0..4]);
//! var i : int in [0..3];
//!
//! i <- 0;
//! while i < 3 do {
//!   v <$ unif([0..2]);
//!   c <$ unif([0..4]);
//!   if valid(w, v, c) then { w <- w[v -> c] } else { skip };
//!   i <- i + 1
//! }
//! ```
//!
//! One expression type serves three roles: program expressions (no tagged
//! variables), relational assertions/distances over a *pair* of memories
//! (`x<1>` reads from the left memory, `x<2>` from the right), and axiom
//! bodies. Bound variables of `forall`/`exists`/`sum` quantifiers are
//! always untagged. The typechecker and the evaluators enforce the role
//! restrictions; the grammar is shared.

mod lexer;
pub mod parser;
pub mod pretty;
pub mod typecheck;

pub use parser::{parse_memory_literal, parse_program, parse_rel_expr, ParseError};
pub use typecheck::{typecheck_program, typecheck_rel, TypeError};

use crate::rat::{fmt_rat, Rat};
use num::bigint::BigInt;
use num::ToPrimitive;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// A runtime value. All numbers are exact rationals — the `int`/`rat`
/// distinction is purely static — so a map key computed two different ways
/// is always the *same* key. `Ord` gives every value type a total order so
/// values can key the (deterministic) B-tree maps used for distributions
/// and map values; the order itself carries no semantic meaning.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Bool(bool),
    Rat(Rat),
    /// Fixed-length vector of rationals.
    Vect(Vec<Rat>),
    /// Finite map; keys and values are themselves values.
    Map(BTreeMap<Value, Value>),
}

impl Value {
    pub fn int(n: i64) -> Value {
        Value::Rat(Rat::from_integer(BigInt::from(n)))
    }

    pub fn rat(r: Rat) -> Value {
        Value::Rat(r)
    }

    /// Numeric value as a rational. `None` for booleans, vectors and maps.
    pub fn as_rat(&self) -> Option<Rat> {
        match self {
            Value::Rat(r) => Some(r.clone()),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    /// Literal syntax: booleans `true`/`false`, numbers always `p/q` (so
    /// every printed value re-parses to the identical value), vectors
    /// `[p/q, ...]`, maps `{k = v, ...}` with keys in sorted order.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Rat(r) => write!(f, "{}", fmt_rat(r)),
            Value::Vect(v) => {
                write!(f, "[")?;
                for (i, r) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{}", fmt_rat(r))?;
                }
                write!(f, "]")
            }
            Value::Map(m) => {
                write!(f, "{{")?;
                for (i, (k, v)) in m.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{k} = {v}")?;
                }
                write!(f, "}}")
            }
        }
    }
}

/// A finite domain of values, used for variable ranges (enumeration),
/// uniform sampling, map key sets and bounded quantifiers.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Domain {
    /// An explicit list of literals: `{0, 1, 2}`.
    Explicit(Vec<Value>),
    /// Inclusive integer range: `[0..4]`.
    Range(BigInt, BigInt),
    /// All maps from one domain to another: `maps([0..2], [0..4])`.
    Maps(Box<Domain>, Box<Domain>),
    /// All vectors of a given length with entries from a domain of numeric
    /// values: `vecs(2, {0/1, 1/2, 1/1})`.
    Vecs(usize, Box<Domain>),
}

/// Guard against accidentally exploding enumerations; domains past this
/// many elements refuse to enumerate.
pub const MAX_DOMAIN: usize = 1 << 20;

impl Domain {
    /// Number of elements, or `None` if it overflows the enumeration guard.
    pub fn size(&self) -> Option<usize> {
        match self {
            Domain::Explicit(vs) => Some(vs.len()),
            Domain::Range(lo, hi) => {
                if hi < lo {
                    Some(0)
                } else {
                    (hi - lo + 1u8).to_usize().filter(|&n| n <= MAX_DOMAIN)
                }
            }
            Domain::Maps(k, v) => {
                let kn = k.size()?;
                let vn = v.size()?;
                vn.checked_pow(kn.try_into().ok()?).filter(|&n| n <= MAX_DOMAIN)
            }
            Domain::Vecs(m, d) => {
                let dn = d.size()?;
                dn.checked_pow((*m).try_into().ok()?).filter(|&n| n <= MAX_DOMAIN)
            }
        }
    }

    /// Enumerate all elements in a deterministic order.
    pub fn enumerate(&self) -> Result<Vec<Value>, String> {
        self.size()
            .ok_or_else(|| format!("domain too large to enumerate: {self}"))?;
        match self {
            Domain::Explicit(vs) => Ok(vs.clone()),
            Domain::Range(lo, hi) => {
                let mut out = Vec::new();
                let mut n = lo.clone();
                while &n <= hi {
                    out.push(Value::Rat(Rat::from_integer(n.clone())));
                    n += 1u8;
                }
                Ok(out)
            }
            Domain::Maps(k, v) => {
                let keys = k.enumerate()?;
                let vals = v.enumerate()?;
                if keys.is_empty() {
                    return Ok(vec![Value::Map(BTreeMap::new())]);
                }
                let mut out = vec![BTreeMap::new()];
                for key in &keys {
                    let mut next = Vec::with_capacity(out.len() * vals.len());
                    for partial in &out {
                        for val in &vals {
                            let mut m = partial.clone();
                            m.insert(key.clone(), val.clone());
                            next.push(m);
                        }
                    }
                    out = next;
                }
                Ok(out.into_iter().map(Value::Map).collect())
            }
            Domain::Vecs(m, d) => {
                let entries: Vec<Rat> = d
                    .enumerate()?
                    .into_iter()
                    .map(|v| {
                        v.as_rat()
                            .ok_or_else(|| format!("vecs(..) entries must be numeric, got {v}"))
                    })
                    .collect::<Result<_, _>>()?;
                let mut out: Vec<Vec<Rat>> = vec![vec![]];
                for _ in 0..*m {
                    let mut next = Vec::with_capacity(out.len() * entries.len());
                    for partial in &out {
                        for e in &entries {
                            let mut v = partial.clone();
                            v.push(e.clone());
                            next.push(v);
                        }
                    }
                    out = next;
                }
                Ok(out.into_iter().map(Value::Vect).collect())
            }
        }
    }

    pub fn contains(&self, v: &Value) -> bool {
        match self {
            Domain::Explicit(vs) => vs.contains(v),
            Domain::Range(lo, hi) => match v {
                Value::Rat(r) if r.is_integer() => {
                    let n = r.to_integer();
                    lo <= &n && &n <= hi
                }
                _ => false,
            },
            _ => self
                .enumerate()
                .map(|vs| vs.contains(v))
                .unwrap_or(false),
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Explicit(vs) => {
                write!(f, "{{")?;
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, "}}")
            }
            Domain::Range(lo, hi) => write!(f, "[{lo}..{hi}]"),
            Domain::Maps(k, v) => write!(f, "maps({k}, {v})"),
            Domain::Vecs(m, d) => write!(f, "vecs({m}, {d})"),
        }
    }
}

/// Types. `int` promotes implicitly to `rat` wherever a rational is
/// expected; no other coercions exist.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Type {
    Bool,
    Int,
    Rat,
    /// `vec(n)`: vector of `n` rationals.
    Vec(usize),
    /// `map(keys, t)`: finite map from a key domain to `t`.
    Map(Domain, Box<Type>),
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Bool => write!(f, "bool"),
            Type::Int => write!(f, "int"),
            Type::Rat => write!(f, "rat"),
            Type::Vec(n) => write!(f, "vec({n})"),
            Type::Map(d, t) => write!(f, "map({d}, {t})"),
        }
    }
}

/// Which memory a tagged variable reads from in a relational expression.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn index(self) -> u8 {
        match self {
            Side::Left => 1,
            Side::Right => 2,
        }
    }
}

/// Quantifier kinds for bounded quantification over a finite domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Quant {
    Forall,
    Exists,
    /// `sum v in D. e` — the sum of a numeric body over the domain.
    Sum,
}

/// Expressions. One grammar for program expressions and relational
/// expressions; `Var(_, Some(side))` only appears in the relational role.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Lit(Value),
    /// A variable (or declared constant) reference; the side tag is `None`
    /// in programs and for quantifier-bound variables.
    Var(String, Option<Side>),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    /// `a => b`, material implication.
    Implies(Box<Expr>, Box<Expr>),
    Eq(Box<Expr>, Box<Expr>),
    Ne(Box<Expr>, Box<Expr>),
    Lt(Box<Expr>, Box<Expr>),
    Le(Box<Expr>, Box<Expr>),
    Gt(Box<Expr>, Box<Expr>),
    Ge(Box<Expr>, Box<Expr>),
    /// `ite(c, a, b)` — conditional expression.
    Ite(Box<Expr>, Box<Expr>, Box<Expr>),
    /// `ind(b)` — 1/1 if the boolean holds, 0/1 otherwise.
    Ind(Box<Expr>),
    Abs(Box<Expr>),
    /// `norm1(v)` — the L1 norm of a vector.
    Norm1(Box<Expr>),
    /// `isint(r)` — does the rational have denominator 1?
    IsInt(Box<Expr>),
    /// `m[k]` (map lookup) or `v[i]` (vector entry).
    Index(Box<Expr>, Box<Expr>),
    /// `m[k -> v]` — functional map update.
    Update(Box<Expr>, Box<Expr>, Box<Expr>),
    /// `[e, ...]` — vector literal (entries must be numeric).
    VecLit(Vec<Expr>),
    /// `{k = v, ...}` — map literal with literal keys.
    MapLit(Vec<(Expr, Expr)>),
    /// Application of a declared (uninterpreted) function symbol.
    /// Evaluation of these blocks; they exist for axiomatised reasoning.
    Apply(String, Vec<Expr>),
    /// `forall v in D. e` / `exists v in D. e` / `sum v in D. e`.
    QuantExpr(Quant, String, Domain, Box<Expr>),
}

impl Expr {
    pub fn lit_bool(b: bool) -> Expr {
        Expr::Lit(Value::Bool(b))
    }
    pub fn lit_int(n: i64) -> Expr {
        Expr::Lit(Value::int(n))
    }
    pub fn lit_rat(r: Rat) -> Expr {
        Expr::Lit(Value::Rat(r))
    }
    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string(), None)
    }
    pub fn lvar(name: &str) -> Expr {
        Expr::Var(name.to_string(), Some(Side::Left))
    }
    pub fn rvar(name: &str) -> Expr {
        Expr::Var(name.to_string(), Some(Side::Right))
    }

    /// Walk the expression tree, calling `f` on every node.
    pub fn visit(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Lit(_) | Expr::Var(..) => {}
            Expr::Neg(a) | Expr::Not(a) | Expr::Ind(a) | Expr::Abs(a) | Expr::Norm1(a)
            | Expr::IsInt(a) => a.visit(f),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::And(a, b)
            | Expr::Or(a, b)
            | Expr::Implies(a, b)
            | Expr::Eq(a, b)
            | Expr::Ne(a, b)
            | Expr::Lt(a, b)
            | Expr::Le(a, b)
            | Expr::Gt(a, b)
            | Expr::Ge(a, b)
            | Expr::Index(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Expr::Ite(a, b, c) | Expr::Update(a, b, c) => {
                a.visit(f);
                b.visit(f);
                c.visit(f);
            }
            Expr::VecLit(es) => {
                for e in es {
                    e.visit(f);
                }
            }
            Expr::MapLit(kvs) => {
                for (k, v) in kvs {
                    k.visit(f);
                    v.visit(f);
                }
            }
            Expr::Apply(_, es) => {
                for e in es {
                    e.visit(f);
                }
            }
            Expr::QuantExpr(_, _, _, b) => b.visit(f),
        }
    }

    /// Free *plain* (untagged) variable names, excluding quantifier-bound
    /// names and declared constants/functions (the caller filters those).
    pub fn free_plain_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        fn go(e: &Expr, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
            match e {
                Expr::Var(x, None) => {
                    if !bound.iter().any(|b| b == x) {
                        out.insert(x.clone());
                    }
                }
                Expr::QuantExpr(_, v, _, body) => {
                    bound.push(v.clone());
                    go(body, bound, out);
                    bound.pop();
                }
                _ => {
                    // Recurse without re-visiting self.
                    let mut kids: Vec<&Expr> = Vec::new();
                    collect_children(e, &mut kids);
                    for k in kids {
                        go(k, bound, out);
                    }
                }
            }
        }
        let mut bound = Vec::new();
        go(self, &mut bound, &mut out);
        out
    }

    /// Free tagged variables `(name, side)`.
    pub fn free_tagged_vars(&self) -> BTreeSet<(String, Side)> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| {
            if let Expr::Var(x, Some(s)) = e {
                out.insert((x.clone(), *s));
            }
        });
        out
    }

    /// Underlying program-variable names of all tagged occurrences.
    pub fn tagged_var_names(&self) -> BTreeSet<String> {
        self.free_tagged_vars().into_iter().map(|(x, _)| x).collect()
    }

    /// Does any tagged variable occur?
    pub fn has_tags(&self) -> bool {
        let mut found = false;
        self.visit(&mut |e| {
            if matches!(e, Expr::Var(_, Some(_))) {
                found = true;
            }
        });
        found
    }
}

/// Immediate children of an expression node (shared by several walkers).
fn collect_children<'a>(e: &'a Expr, out: &mut Vec<&'a Expr>) {
    match e {
        Expr::Lit(_) | Expr::Var(..) => {}
        Expr::Neg(a) | Expr::Not(a) | Expr::Ind(a) | Expr::Abs(a) | Expr::Norm1(a)
        | Expr::IsInt(a) => out.push(a),
        Expr::Add(a, b)
        | Expr::Sub(a, b)
        | Expr::Mul(a, b)
        | Expr::And(a, b)
        | Expr::Or(a, b)
        | Expr::Implies(a, b)
        | Expr::Eq(a, b)
        | Expr::Ne(a, b)
        | Expr::Lt(a, b)
        | Expr::Le(a, b)
        | Expr::Gt(a, b)
        | Expr::Ge(a, b)
        | Expr::Index(a, b) => {
            out.push(a);
            out.push(b);
        }
        Expr::Ite(a, b, c) | Expr::Update(a, b, c) => {
            out.push(a);
            out.push(b);
            out.push(c);
        }
        Expr::VecLit(es) => out.extend(es.iter()),
        Expr::MapLit(kvs) => {
            for (k, v) in kvs {
                out.push(k);
                out.push(v);
            }
        }
        Expr::Apply(_, es) => out.extend(es.iter()),
        Expr::QuantExpr(_, _, _, b) => out.push(b),
    }
}

/// Distribution expressions on the right of `<$`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DExpr {
    /// Uniform over a finite domain.
    Unif(Domain),
    /// Bernoulli over booleans with success probability `e` (a rational
    /// expression in `[0,1]`).
    Bern(Expr),
    /// Multinomial: given a probability vector `p` of length m (entries
    /// non-negative, summing to exactly 1), sample the i-th basis vector
    /// of length m with probability `p[i]`.
    Mult(Expr),
    /// Point distribution at the value of `e`.
    Unit(Expr),
}

/// Statements.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stmt {
    Skip,
    /// Produces the zero sub-distribution (no outcomes).
    Abort,
    /// `x <- e`
    Assign(String, Expr),
    /// `x <$ d`
    Sample(String, DExpr),
    Seq(Box<Stmt>, Box<Stmt>),
    /// `if e then { s1 } else { s2 }`
    If(Expr, Box<Stmt>, Box<Stmt>),
    /// `while e do { s }`
    While(Expr, Box<Stmt>),
}

impl Stmt {
    pub fn seq(ss: Vec<Stmt>) -> Stmt {
        let mut it = ss.into_iter().rev();
        let last = it.next().unwrap_or(Stmt::Skip);
        it.fold(last, |acc, s| Stmt::Seq(Box::new(s), Box::new(acc)))
    }

    pub fn visit(&self, f: &mut impl FnMut(&Stmt)) {
        f(self);
        match self {
            Stmt::Seq(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Stmt::If(_, a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Stmt::While(_, a) => a.visit(f),
            _ => {}
        }
    }

    /// Variables written anywhere in the statement (assignment or sampling
    /// target), syntactically.
    pub fn modified_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |s| match s {
            Stmt::Assign(x, _) | Stmt::Sample(x, _) => {
                out.insert(x.clone());
            }
            _ => {}
        });
        out
    }

    /// Variables read anywhere (in expressions, guards and distribution
    /// parameters). Over-approximate: a variable both read and written
    /// counts as read.
    pub fn read_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let add_expr = |e: &Expr, out: &mut BTreeSet<String>| {
            for v in e.free_plain_vars() {
                out.insert(v);
            }
        };
        self.visit(&mut |s| match s {
            Stmt::Assign(_, e) => add_expr(e, &mut out),
            Stmt::Sample(_, d) => match d {
                DExpr::Unif(_) => {}
                DExpr::Bern(e) | DExpr::Mult(e) | DExpr::Unit(e) => add_expr(e, &mut out),
            },
            Stmt::If(e, _, _) | Stmt::While(e, _) => add_expr(e, &mut out),
            _ => {}
        });
        out
    }

    /// Variables written on *every* execution path (used to decide which
    /// initial values a probability computation can ignore). Loops promise
    /// nothing because the body may run zero times.
    pub fn certainly_written(&self) -> BTreeSet<String> {
        match self {
            Stmt::Assign(x, _) | Stmt::Sample(x, _) => [x.clone()].into(),
            Stmt::Seq(a, b) => {
                let mut s = a.certainly_written();
                s.extend(b.certainly_written());
                s
            }
            Stmt::If(_, a, b) => a
                .certainly_written()
                .intersection(&b.certainly_written())
                .cloned()
                .collect(),
            _ => BTreeSet::new(),
        }
    }

    /// Does the statement contain a `while` loop?
    pub fn has_loop(&self) -> bool {
        let mut found = false;
        self.visit(&mut |s| {
            if matches!(s, Stmt::While(..)) {
                found = true;
            }
        });
        found
    }

    /// Is the statement free of sampling (deterministic)?
    pub fn is_deterministic(&self) -> bool {
        let mut det = true;
        self.visit(&mut |s| {
            if matches!(s, Stmt::Sample(..)) {
                det = false;
            }
        });
        det
    }
}

/// A variable declaration: type plus an optional finite domain. The domain
/// is what side-condition enumeration and `unif` quantify over; execution
/// itself never range-checks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarDecl {
    pub name: String,
    pub ty: Type,
    pub domain: Option<Domain>,
}

/// An uninterpreted function symbol.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunDecl {
    pub name: String,
    pub args: Vec<Type>,
    pub ret: Type,
}

/// The body of a named axiom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AxiomBody {
    /// A relational formula assumed to hold on all memory pairs.
    Rel(Expr),
    /// A probability fact: running `stmt` from any memory, the probability
    /// that `guard` holds of the result is exactly `prob`. Used by the
    /// SeqCase rule when the program state cannot be enumerated.
    Prob { stmt: Stmt, guard: Expr, prob: Rat },
}

/// A named axiom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Axiom {
    pub name: String,
    pub body: AxiomBody,
}

/// All declarations in scope for a program or proof: variables (with
/// optional finite domains), uninterpreted function symbols, named
/// rational constants, and named axioms.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Decls {
    pub vars: Vec<VarDecl>,
    pub funs: Vec<FunDecl>,
    pub consts: Vec<(String, Rat)>,
    pub axioms: Vec<Axiom>,
}

impl Decls {
    pub fn var(&self, name: &str) -> Option<&VarDecl> {
        self.vars.iter().find(|v| v.name == name)
    }

    pub fn fun(&self, name: &str) -> Option<&FunDecl> {
        self.funs.iter().find(|f| f.name == name)
    }

    pub fn constant(&self, name: &str) -> Option<&Rat> {
        self.consts.iter().find(|(n, _)| n == name).map(|(_, r)| r)
    }

    pub fn axiom(&self, name: &str) -> Option<&Axiom> {
        self.axioms.iter().find(|a| a.name == name)
    }

    pub fn domain_of(&self, name: &str) -> Option<&Domain> {
        self.var(name).and_then(|v| v.domain.as_ref())
    }

    pub fn add_var(&mut self, name: &str, ty: Type, domain: Option<Domain>) {
        self.vars.push(VarDecl { name: name.to_string(), ty, domain });
    }
}

/// A parsed program file: declarations followed by one statement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub decls: Decls,
    pub body: Stmt,
}
