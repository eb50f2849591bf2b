//! Exact semantics: memories, discrete sub-distributions, expression
//! evaluation and program execution.
//!
//! A program denotes a map from an input memory to a *sub*-distribution
//! over output memories — total mass at most one, with the deficit
//! accounting for non-termination. Loops are interpreted by truncated
//! iteration: a fuel budget bounds how many times each loop may re-enter
//! its body, entries still running when the budget runs out are dropped,
//! and the result is monotone in fuel, converging to the true semantics
//! from below. All arithmetic is exact rational arithmetic; nothing in
//! this module rounds.

use crate::lang::{parse_memory_literal, DExpr, Decls, Domain, Expr, Quant, Side, Stmt, Value};
use crate::rat::{fmt_rat, Rat};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("unknown variable `{0}`")]
    UnknownVar(String),
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("uninterpreted function `{0}` cannot be evaluated")]
    Uninterpreted(String),
    #[error("map has no key `{0}`")]
    MissingKey(String),
    #[error("vector index {0} out of bounds for length {1}")]
    IndexOutOfBounds(String, usize),
    #[error("`{0}` is not a probability in [0, 1]")]
    NotAProbability(String),
    #[error("ill-formed distribution: {0}")]
    BadDistribution(String),
    #[error("{0}")]
    DomainTooLarge(String),
}

fn mismatch<T>(msg: impl Into<String>) -> Result<T, EvalError> {
    Err(EvalError::TypeMismatch(msg.into()))
}

// ---------------------------------------------------------------- memories

/// A program memory: a finite map from variable names to values.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Memory(pub BTreeMap<String, Value>);

impl Memory {
    pub fn new() -> Memory {
        Memory(BTreeMap::new())
    }

    pub fn get(&self, x: &str) -> Option<&Value> {
        self.0.get(x)
    }

    /// Functional update.
    pub fn set(&self, x: &str, v: Value) -> Memory {
        let mut m = self.0.clone();
        m.insert(x.to_string(), v);
        Memory(m)
    }

    pub fn set_mut(&mut self, x: &str, v: Value) {
        self.0.insert(x.to_string(), v);
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (String, Value)>) -> Memory {
        Memory(pairs.into_iter().collect())
    }

    /// Parse a memory literal `{x = 1, w = {0 = 2}}`, checking every name
    /// against the declarations.
    pub fn from_literal(decls: &Decls, src: &str) -> Result<Memory, String> {
        let pairs = parse_memory_literal(src).map_err(|e| e.to_string())?;
        let mut m = Memory::new();
        for (name, v) in pairs {
            if decls.var(&name).is_none() {
                return Err(format!("memory literal sets undeclared variable `{name}`"));
            }
            m.set_mut(&name, v);
        }
        Ok(m)
    }
}

impl fmt::Display for Memory {
    /// Memory-literal syntax, names in sorted order: `{i = 1/1, w = {...}}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{k} = {v}")?;
        }
        write!(f, "}}")
    }
}

/// The canonical default for a type: `false`, zero, the all-zero vector,
/// or the map sending every key of the declared domain to the value
/// type's default.
pub fn default_value(ty: &crate::lang::Type) -> Result<Value, EvalError> {
    use crate::lang::Type;
    Ok(match ty {
        Type::Bool => Value::Bool(false),
        Type::Int | Type::Rat => Value::int(0),
        Type::Vec(n) => Value::Vect(vec![Rat::from_integer(0.into()); *n]),
        Type::Map(d, t) => {
            let keys = d
                .enumerate()
                .map_err(EvalError::DomainTooLarge)?;
            let dv = default_value(t)?;
            Value::Map(keys.into_iter().map(|k| (k, dv.clone())).collect())
        }
    })
}

/// A memory giving every declared variable its default value; inputs are
/// overlaid on top of this.
pub fn default_memory(decls: &Decls) -> Result<Memory, EvalError> {
    let mut m = Memory::new();
    for v in &decls.vars {
        m.set_mut(&v.name, default_value(&v.ty)?);
    }
    Ok(m)
}

// --------------------------------------------------------- sub-distributions

/// A discrete sub-distribution: finitely many outcomes with positive
/// rational probabilities summing to at most one. Zero-probability
/// entries are never stored, so equality of values is equality of
/// distributions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubDist<T: Ord>(BTreeMap<T, Rat>);

impl<T: Ord + Clone> SubDist<T> {
    pub fn zero() -> SubDist<T> {
        SubDist(BTreeMap::new())
    }

    pub fn unit(t: T) -> SubDist<T> {
        SubDist(BTreeMap::from([(t, Rat::from_integer(1.into()))]))
    }

    /// Build from outcome/probability pairs, merging duplicates and
    /// dropping zeros. Fails on negative probabilities or total mass
    /// above one.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (T, Rat)>) -> Result<SubDist<T>, EvalError> {
        let mut d = SubDist::zero();
        for (t, p) in pairs {
            d.add_mass(t, p)?;
        }
        if d.weight() > Rat::from_integer(1.into()) {
            return Err(EvalError::BadDistribution(format!(
                "total mass {} exceeds 1",
                fmt_rat(&d.weight())
            )));
        }
        Ok(d)
    }

    pub fn add_mass(&mut self, t: T, p: Rat) -> Result<(), EvalError> {
        let zero = Rat::from_integer(0.into());
        if p < zero {
            return Err(EvalError::BadDistribution(format!(
                "negative probability {}",
                fmt_rat(&p)
            )));
        }
        if p == zero {
            return Ok(());
        }
        *self.0.entry(t).or_insert_with(|| zero.clone()) += p;
        Ok(())
    }

    pub fn weight(&self) -> Rat {
        self.0.values().fold(Rat::from_integer(0.into()), |a, b| a + b)
    }

    pub fn prob(&self, t: &T) -> Rat {
        self.0.get(t).cloned().unwrap_or_else(|| Rat::from_integer(0.into()))
    }

    pub fn support(&self) -> impl Iterator<Item = &T> {
        self.0.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&T, &Rat)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Monadic bind: run `f` on each outcome and mix the results.
    pub fn bind<U: Ord + Clone, E>(
        &self,
        mut f: impl FnMut(&T) -> Result<SubDist<U>, E>,
    ) -> Result<SubDist<U>, E> {
        let mut out: BTreeMap<U, Rat> = BTreeMap::new();
        for (t, p) in &self.0 {
            for (u, q) in f(t)?.0 {
                *out.entry(u).or_insert_with(|| Rat::from_integer(0.into())) += p.clone() * q;
            }
        }
        Ok(SubDist(out))
    }

    /// Relabel outcomes, merging any that collide.
    pub fn map<U: Ord + Clone>(&self, mut f: impl FnMut(&T) -> U) -> SubDist<U> {
        let mut out: BTreeMap<U, Rat> = BTreeMap::new();
        for (t, p) in &self.0 {
            *out.entry(f(t)).or_insert_with(|| Rat::from_integer(0.into())) += p.clone();
        }
        SubDist(out)
    }

    /// Expectation of a non-negative function over the sub-distribution
    /// (not normalised by the weight).
    pub fn expect<E>(&self, mut f: impl FnMut(&T) -> Result<Rat, E>) -> Result<Rat, E> {
        let mut acc = Rat::from_integer(0.into());
        for (t, p) in &self.0 {
            acc += p.clone() * f(t)?;
        }
        Ok(acc)
    }

    /// Total-variation distance, defined here only between distributions
    /// of equal weight: ½ Σ |μ₁(x) − μ₂(x)|.
    pub fn tv(&self, other: &SubDist<T>) -> Result<Rat, String> {
        if self.weight() != other.weight() {
            return Err(format!(
                "total variation needs equal weights, got {} and {}",
                fmt_rat(&self.weight()),
                fmt_rat(&other.weight())
            ));
        }
        let keys: std::collections::BTreeSet<&T> = self.0.keys().chain(other.0.keys()).collect();
        let mut acc = Rat::from_integer(0.into());
        for k in keys {
            acc += crate::rat::rat_abs(&(self.prob(k) - other.prob(k)));
        }
        Ok(acc / Rat::from_integer(2.into()))
    }
}

impl<T: Ord + Clone + fmt::Display> SubDist<T> {
    /// Tab-separated dump, outcomes in sorted order, with a final WEIGHT
    /// line. Every number prints as `p/q`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (t, p) in &self.0 {
            out.push_str(&format!("{t}\t{}\n", fmt_rat(p)));
        }
        out.push_str(&format!("WEIGHT\t{}\n", fmt_rat(&self.weight())));
        out
    }
}

// -------------------------------------------------------------- evaluation

/// Evaluation looks plain variables up through this, so the same
/// evaluator serves program expressions (one memory) and relational
/// expressions (a memory per side).
pub trait VarLookup {
    fn lookup(&self, x: &str, side: Option<Side>) -> Option<Value>;
}

/// Program-role lookup: one memory, tags rejected.
pub struct OneMem<'a>(pub &'a Memory);

impl VarLookup for OneMem<'_> {
    fn lookup(&self, x: &str, side: Option<Side>) -> Option<Value> {
        match side {
            None => self.0.get(x).cloned(),
            Some(_) => None,
        }
    }
}

/// Relational lookup: tagged variables read the respective memory, plain
/// variables are not program state (quantifier binders and constants are
/// handled before this is consulted).
pub struct PairMem<'a> {
    pub left: &'a Memory,
    pub right: &'a Memory,
}

impl VarLookup for PairMem<'_> {
    fn lookup(&self, x: &str, side: Option<Side>) -> Option<Value> {
        match side {
            Some(Side::Left) => self.left.get(x).cloned(),
            Some(Side::Right) => self.right.get(x).cloned(),
            None => None,
        }
    }
}

struct Evaluator<'a, L: VarLookup> {
    decls: &'a Decls,
    mem: &'a L,
    locals: Vec<(String, Value)>,
}

impl<'a, L: VarLookup> Evaluator<'a, L> {
    fn eval(&mut self, e: &Expr) -> Result<Value, EvalError> {
        match e {
            Expr::Lit(v) => Ok(v.clone()),
            Expr::Var(x, side) => {
                if side.is_none() {
                    if let Some((_, v)) = self.locals.iter().rev().find(|(n, _)| n == x) {
                        return Ok(v.clone());
                    }
                    if let Some(r) = self.decls.constant(x) {
                        return Ok(Value::Rat(r.clone()));
                    }
                }
                self.mem
                    .lookup(x, *side)
                    .ok_or_else(|| EvalError::UnknownVar(x.clone()))
            }
            Expr::Neg(a) => match self.eval(a)? {
                Value::Rat(r) => Ok(Value::Rat(-r)),
                Value::Vect(v) => Ok(Value::Vect(v.into_iter().map(|r| -r).collect())),
                v => mismatch(format!("cannot negate {v}")),
            },
            Expr::Add(a, b) => self.arith(a, b, "+"),
            Expr::Sub(a, b) => self.arith(a, b, "-"),
            Expr::Mul(a, b) => self.arith(a, b, "*"),
            Expr::Not(a) => Ok(Value::Bool(!self.eval_bool(a)?)),
            Expr::And(a, b) => {
                if self.eval_bool(a)? {
                    Ok(Value::Bool(self.eval_bool(b)?))
                } else {
                    Ok(Value::Bool(false))
                }
            }
            Expr::Or(a, b) => {
                if self.eval_bool(a)? {
                    Ok(Value::Bool(true))
                } else {
                    Ok(Value::Bool(self.eval_bool(b)?))
                }
            }
            Expr::Implies(a, b) => {
                if self.eval_bool(a)? {
                    Ok(Value::Bool(self.eval_bool(b)?))
                } else {
                    Ok(Value::Bool(true))
                }
            }
            Expr::Eq(a, b) => {
                let va = self.eval(a)?;
                let vb = self.eval(b)?;
                Ok(Value::Bool(values_equal(&va, &vb)?))
            }
            Expr::Ne(a, b) => {
                let va = self.eval(a)?;
                let vb = self.eval(b)?;
                Ok(Value::Bool(!values_equal(&va, &vb)?))
            }
            Expr::Lt(a, b) => self.order(a, b, |o| o == std::cmp::Ordering::Less),
            Expr::Le(a, b) => self.order(a, b, |o| o != std::cmp::Ordering::Greater),
            Expr::Gt(a, b) => self.order(a, b, |o| o == std::cmp::Ordering::Greater),
            Expr::Ge(a, b) => self.order(a, b, |o| o != std::cmp::Ordering::Less),
            Expr::Ite(c, a, b) => {
                if self.eval_bool(c)? {
                    self.eval(a)
                } else {
                    self.eval(b)
                }
            }
            Expr::Ind(a) => Ok(Value::int(if self.eval_bool(a)? { 1 } else { 0 })),
            Expr::Abs(a) => {
                let r = self.eval_rat(a)?;
                Ok(Value::Rat(crate::rat::rat_abs(&r)))
            }
            Expr::Norm1(a) => match self.eval(a)? {
                Value::Vect(v) => Ok(Value::Rat(
                    v.iter().map(crate::rat::rat_abs).fold(Rat::from_integer(0.into()), |x, y| x + y),
                )),
                v => mismatch(format!("norm1 of non-vector {v}")),
            },
            Expr::IsInt(a) => Ok(Value::Bool(self.eval_rat(a)?.is_integer())),
            Expr::Index(m, k) => {
                let mv = self.eval(m)?;
                let kv = self.eval(k)?;
                index_value(&mv, &kv)
            }
            Expr::Update(m, k, v) => {
                let mv = self.eval(m)?;
                let kv = self.eval(k)?;
                let vv = self.eval(v)?;
                match mv {
                    Value::Map(mut map) => {
                        map.insert(kv, vv);
                        Ok(Value::Map(map))
                    }
                    Value::Vect(mut vec) => {
                        let i = vec_index(&kv, vec.len())?;
                        match vv {
                            Value::Rat(r) => {
                                vec[i] = r;
                                Ok(Value::Vect(vec))
                            }
                            other => mismatch(format!("vector entry must be a number, got {other}")),
                        }
                    }
                    other => mismatch(format!("cannot update {other}")),
                }
            }
            Expr::VecLit(es) => {
                let mut out = Vec::with_capacity(es.len());
                for e in es {
                    out.push(self.eval_rat(e)?);
                }
                Ok(Value::Vect(out))
            }
            Expr::MapLit(kvs) => {
                let mut m = BTreeMap::new();
                for (k, v) in kvs {
                    let kv = self.eval(k)?;
                    let vv = self.eval(v)?;
                    m.insert(kv, vv);
                }
                Ok(Value::Map(m))
            }
            Expr::Apply(f, _) => Err(EvalError::Uninterpreted(f.clone())),
            Expr::QuantExpr(q, v, d, body) => {
                let elems = d.enumerate().map_err(EvalError::DomainTooLarge)?;
                match q {
                    Quant::Forall => {
                        for el in elems {
                            self.locals.push((v.clone(), el));
                            let b = self.eval_bool(body);
                            self.locals.pop();
                            if !b? {
                                return Ok(Value::Bool(false));
                            }
                        }
                        Ok(Value::Bool(true))
                    }
                    Quant::Exists => {
                        for el in elems {
                            self.locals.push((v.clone(), el));
                            let b = self.eval_bool(body);
                            self.locals.pop();
                            if b? {
                                return Ok(Value::Bool(true));
                            }
                        }
                        Ok(Value::Bool(false))
                    }
                    Quant::Sum => {
                        let mut acc = Rat::from_integer(0.into());
                        for el in elems {
                            self.locals.push((v.clone(), el));
                            let r = self.eval_rat(body);
                            self.locals.pop();
                            acc += r?;
                        }
                        Ok(Value::Rat(acc))
                    }
                }
            }
        }
    }

    fn arith(&mut self, a: &Expr, b: &Expr, op: &str) -> Result<Value, EvalError> {
        let va = self.eval(a)?;
        let vb = self.eval(b)?;
        match (va, vb) {
            (Value::Rat(x), Value::Rat(y)) => Ok(Value::Rat(match op {
                "+" => x + y,
                "-" => x - y,
                _ => x * y,
            })),
            (Value::Vect(x), Value::Vect(y)) if op != "*" => {
                if x.len() != y.len() {
                    return mismatch(format!(
                        "vector lengths differ: {} vs {}",
                        x.len(),
                        y.len()
                    ));
                }
                Ok(Value::Vect(
                    x.into_iter()
                        .zip(y)
                        .map(|(p, q)| if op == "+" { p + q } else { p - q })
                        .collect(),
                ))
            }
            (Value::Rat(s), Value::Vect(v)) | (Value::Vect(v), Value::Rat(s)) if op == "*" => {
                Ok(Value::Vect(v.into_iter().map(|r| r * s.clone()).collect()))
            }
            (x, y) => mismatch(format!("cannot compute {x} {op} {y}")),
        }
    }

    fn order(
        &mut self,
        a: &Expr,
        b: &Expr,
        ok: impl Fn(std::cmp::Ordering) -> bool,
    ) -> Result<Value, EvalError> {
        let x = self.eval_rat(a)?;
        let y = self.eval_rat(b)?;
        Ok(Value::Bool(ok(x.cmp(&y))))
    }

    fn eval_bool(&mut self, e: &Expr) -> Result<bool, EvalError> {
        match self.eval(e)? {
            Value::Bool(b) => Ok(b),
            v => mismatch(format!("expected a boolean, got {v}")),
        }
    }

    fn eval_rat(&mut self, e: &Expr) -> Result<Rat, EvalError> {
        match self.eval(e)? {
            Value::Rat(r) => Ok(r),
            v => mismatch(format!("expected a number, got {v}")),
        }
    }
}

fn values_equal(a: &Value, b: &Value) -> Result<bool, EvalError> {
    match (a, b) {
        (Value::Bool(_), Value::Bool(_))
        | (Value::Rat(_), Value::Rat(_))
        | (Value::Vect(_), Value::Vect(_))
        | (Value::Map(_), Value::Map(_)) => Ok(a == b),
        _ => mismatch(format!("cannot compare {a} and {b} for equality")),
    }
}

fn vec_index(k: &Value, len: usize) -> Result<usize, EvalError> {
    let r = k
        .as_rat()
        .filter(|r| r.is_integer())
        .ok_or_else(|| EvalError::TypeMismatch(format!("vector index must be an integer, got {k}")))?;
    let i = num::ToPrimitive::to_usize(&r.to_integer())
        .ok_or_else(|| EvalError::IndexOutOfBounds(k.to_string(), len))?;
    if i < len {
        Ok(i)
    } else {
        Err(EvalError::IndexOutOfBounds(k.to_string(), len))
    }
}

fn index_value(m: &Value, k: &Value) -> Result<Value, EvalError> {
    match m {
        Value::Map(map) => map
            .get(k)
            .cloned()
            .ok_or_else(|| EvalError::MissingKey(k.to_string())),
        Value::Vect(v) => {
            let i = vec_index(k, v.len())?;
            Ok(Value::Rat(v[i].clone()))
        }
        other => mismatch(format!("cannot index into {other}")),
    }
}

/// Evaluate a program expression in one memory.
pub fn eval_expr(decls: &Decls, mem: &Memory, e: &Expr) -> Result<Value, EvalError> {
    Evaluator { decls, mem: &OneMem(mem), locals: Vec::new() }.eval(e)
}

/// Evaluate a relational expression over a pair of memories, with extra
/// plain bindings (e.g. an instantiated family parameter).
pub fn eval_rel_with(
    decls: &Decls,
    left: &Memory,
    right: &Memory,
    locals: &[(String, Value)],
    e: &Expr,
) -> Result<Value, EvalError> {
    Evaluator { decls, mem: &PairMem { left, right }, locals: locals.to_vec() }.eval(e)
}

/// Evaluate a distribution expression to a distribution over values.
pub fn eval_dexpr(decls: &Decls, mem: &Memory, d: &DExpr) -> Result<SubDist<Value>, EvalError> {
    match d {
        DExpr::Unif(dom) => {
            let elems = dom.enumerate().map_err(EvalError::DomainTooLarge)?;
            if elems.is_empty() {
                return Err(EvalError::BadDistribution("unif over an empty domain".into()));
            }
            let n = Rat::from_integer((elems.len() as i64).into());
            let p = Rat::from_integer(1.into()) / n;
            SubDist::from_pairs(elems.into_iter().map(|v| (v, p.clone())))
        }
        DExpr::Bern(e) => {
            let p = match eval_expr(decls, mem, e)? {
                Value::Rat(r) => r,
                v => return mismatch(format!("bern needs a number, got {v}")),
            };
            let zero = Rat::from_integer(0.into());
            let one = Rat::from_integer(1.into());
            if p < zero || p > one {
                return Err(EvalError::NotAProbability(fmt_rat(&p)));
            }
            SubDist::from_pairs([
                (Value::Bool(true), p.clone()),
                (Value::Bool(false), one - p),
            ])
        }
        DExpr::Mult(e) => {
            let probs = match eval_expr(decls, mem, e)? {
                Value::Vect(v) => v,
                v => return mismatch(format!("mult needs a probability vector, got {v}")),
            };
            let zero = Rat::from_integer(0.into());
            let one = Rat::from_integer(1.into());
            if probs.iter().any(|p| p < &zero) {
                return Err(EvalError::BadDistribution(
                    "mult probabilities must be non-negative".into(),
                ));
            }
            let total: Rat = probs.iter().fold(zero.clone(), |a, b| a + b);
            if total != one {
                return Err(EvalError::BadDistribution(format!(
                    "mult probabilities sum to {}, not 1",
                    fmt_rat(&total)
                )));
            }
            let m = probs.len();
            SubDist::from_pairs(probs.into_iter().enumerate().map(|(i, p)| {
                let mut basis = vec![zero.clone(); m];
                basis[i] = one.clone();
                (Value::Vect(basis), p)
            }))
        }
        DExpr::Unit(e) => Ok(SubDist::unit(eval_expr(decls, mem, e)?)),
    }
}

// --------------------------------------------------------------- execution

/// Run a statement from one memory, producing the sub-distribution over
/// final memories. `fuel` bounds the number of body entries of each
/// `while` loop (per encounter); mass still looping when fuel runs out is
/// dropped, so the result under-approximates the true semantics and is
/// monotone in `fuel`.
pub fn exec(decls: &Decls, s: &Stmt, mem: &Memory, fuel: u64) -> Result<SubDist<Memory>, EvalError> {
    match s {
        Stmt::Skip => Ok(SubDist::unit(mem.clone())),
        Stmt::Abort => Ok(SubDist::zero()),
        Stmt::Assign(x, e) => {
            let v = eval_expr(decls, mem, e)?;
            Ok(SubDist::unit(mem.set(x, v)))
        }
        Stmt::Sample(x, d) => {
            let dist = eval_dexpr(decls, mem, d)?;
            Ok(dist.map(|v| mem.set(x, v.clone())))
        }
        Stmt::Seq(a, b) => {
            let da = exec(decls, a, mem, fuel)?;
            da.bind(|m| exec(decls, b, m, fuel))
        }
        Stmt::If(c, a, b) => {
            let cond = eval_expr(decls, mem, c)?;
            match cond {
                Value::Bool(true) => exec(decls, a, mem, fuel),
                Value::Bool(false) => exec(decls, b, mem, fuel),
                v => mismatch(format!("guard evaluated to {v}")),
            }
        }
        Stmt::While(c, body) => {
            // Iterative truncated fixpoint: `running` holds mass still in
            // the loop; guard-false mass settles into `done`.
            let mut done: SubDist<Memory> = SubDist::zero();
            let mut running = SubDist::unit(mem.clone());
            let mut budget = fuel;
            loop {
                let mut still: SubDist<Memory> = SubDist::zero();
                for (m, p) in running.iter() {
                    match eval_expr(decls, m, c)? {
                        Value::Bool(true) => still.add_mass(m.clone(), p.clone())?,
                        Value::Bool(false) => done.add_mass(m.clone(), p.clone())?,
                        v => return mismatch(format!("guard evaluated to {v}")),
                    }
                }
                if still.is_empty() || budget == 0 {
                    // Mass remaining in `still` when the budget is gone is
                    // truncated away (it models non-termination).
                    return Ok(done);
                }
                budget -= 1;
                running = still.bind(|m| exec(decls, body, m, fuel))?;
            }
        }
    }
}

/// Run a whole program from a memory (the declared defaults overlaid with
/// `inputs`).
pub fn run_program(
    prog: &crate::lang::Program,
    inputs: &Memory,
    fuel: u64,
) -> Result<SubDist<Memory>, EvalError> {
    let mut mem = default_memory(&prog.decls)?;
    for (k, v) in &inputs.0 {
        mem.set_mut(k, v.clone());
    }
    exec(&prog.decls, &prog.body, &mem, fuel)
}

/// Probability that `guard` holds after running `s` from `mem` (with the
/// given fuel): the expectation of the guard's indicator.
pub fn prob_after(
    decls: &Decls,
    s: &Stmt,
    mem: &Memory,
    guard: &Expr,
    fuel: u64,
) -> Result<Rat, EvalError> {
    let out = exec(decls, s, mem, fuel)?;
    out.expect(|m| match eval_expr(decls, m, guard)? {
        Value::Bool(true) => Ok(Rat::from_integer(1.into())),
        Value::Bool(false) => Ok(Rat::from_integer(0.into())),
        v => mismatch(format!("guard evaluated to {v}")),
    })
}

/// Enumerate all memories assigning each variable in `names` a value from
/// its declared domain. Errors if any named variable lacks a finite
/// domain. The base memory supplies all other variables.
pub fn enumerate_memories(
    decls: &Decls,
    names: &[String],
    base: &Memory,
) -> Result<Vec<Memory>, String> {
    let mut doms: Vec<(String, Vec<Value>)> = Vec::new();
    let mut total: usize = 1;
    for n in names {
        let d = decls
            .domain_of(n)
            .ok_or_else(|| format!("variable `{n}` has no finite domain to enumerate"))?;
        let vs = d.enumerate()?;
        total = total
            .checked_mul(vs.len())
            .filter(|&t| t <= crate::lang::MAX_DOMAIN)
            .ok_or_else(|| format!("memory space over {names:?} is too large to enumerate"))?;
        doms.push((n.clone(), vs));
    }
    let mut out = vec![base.clone()];
    for (name, vs) in doms {
        let mut next = Vec::with_capacity(out.len() * vs.len());
        for m in &out {
            for v in &vs {
                next.push(m.set(&name, v.clone()));
            }
        }
        out = next;
    }
    let _ = total;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parser::{parse_program, parse_stmt};
    use crate::rat::rat;

    fn run(src: &str, fuel: u64) -> SubDist<Memory> {
        let p = parse_program(src).unwrap();
        crate::lang::typecheck_program(&p).unwrap();
        run_program(&p, &Memory::new(), fuel).unwrap()
    }

    #[test]
    fn tv_of_two_bernoullis() {
        // tv(bern(1/2), bern(1/3)) = 1/6.
        let d1 = run("var b : bool; b <$ bern(1/2)", 8);
        let d2 = run("var b : bool; b <$ bern(1/3)", 8);
        assert_eq!(d1.tv(&d2).unwrap(), rat(1, 6));
    }

    #[test]
    fn uniform_and_arithmetic() {
        let d = run("var x : int in [0..3]; var y : int; x <$ unif([0..3]); y <- x * 2", 8);
        assert_eq!(d.weight(), rat(1, 1));
        assert_eq!(d.len(), 4);
        let m = d.support().next().unwrap();
        assert_eq!(m.get("y"), Some(&Value::int(0)));
    }

    #[test]
    fn abort_gives_zero_mass() {
        let d = run("var x : int; x <- 1; abort", 8);
        assert!(d.is_empty());
        assert_eq!(d.weight(), rat(0, 1));
    }

    #[test]
    fn loop_truncation_is_monotone_and_exact() {
        // b starts true; each iteration re-flips it fairly. The chance of
        // still running after k iterations is 2^-k.
        let src = "var b : bool; b <- true; while b do { b <$ bern(1/2) }";
        let p = parse_program(src).unwrap();
        let mut prev = rat(0, 1);
        for fuel in 0..6 {
            let d = run_program(&p, &Memory::new(), fuel).unwrap();
            let expected = rat(1, 1) - crate::rat::rat_pow(&rat(1, 2), fuel);
            assert_eq!(d.weight(), expected, "fuel {fuel}");
            assert!(d.weight() >= prev);
            prev = d.weight();
        }
    }

    #[test]
    fn nested_loops_get_fresh_fuel() {
        let src = "\
var i : int; var j : int; var k : int;
i <- 0; k <- 0;
while i < 2 do {
  j <- 0;
  while j < 3 do { k <- k + 1; j <- j + 1 };
  i <- i + 1
}";
        let d = run(src, 4);
        assert_eq!(d.weight(), rat(1, 1), "fuel 4 covers both loops' entries");
        let m = d.support().next().unwrap();
        assert_eq!(m.get("k"), Some(&Value::int(6)));
    }

    #[test]
    fn multinomial_sampling() {
        let d = run("var p : vec(2); var x : vec(2); p <- [1/4, 3/4]; x <$ mult(p)", 8);
        assert_eq!(d.len(), 2);
        let probs: Vec<Rat> = d.iter().map(|(_, p)| p.clone()).collect();
        assert!(probs.contains(&rat(1, 4)) && probs.contains(&rat(3, 4)));
    }

    #[test]
    fn map_update_and_lookup() {
        let d = run(
            "var w : map([0..2], int) in maps([0..2], [0..4]); var y : int;\n\
             w <- {0 = 1, 1 = 2, 2 = 3}; w <- w[1 -> 4]; y <- w[1]",
            8,
        );
        let m = d.support().next().unwrap();
        assert_eq!(m.get("y"), Some(&Value::int(4)));
    }

    #[test]
    fn prob_after_guard() {
        let p = parse_program("var j : int in [0..9]; j <$ unif([0..9])").unwrap();
        let guard = crate::lang::parser::parse_rel_expr("j == 0").unwrap();
        let q = prob_after(&p.decls, &p.body, &default_memory(&p.decls).unwrap(), &guard, 8)
            .unwrap();
        assert_eq!(q, rat(1, 10));
    }

    #[test]
    fn memory_literal_round_trip() {
        let p = parse_program(
            "var i : int in [0..3]; var w : map([0..1], int) in maps([0..1], [0..2]); skip",
        )
        .unwrap();
        let m = Memory::from_literal(&p.decls, "{i = 2, w = {0 = 1, 1 = 0}}").unwrap();
        let s = m.to_string();
        let m2 = Memory::from_literal(&p.decls, &s).unwrap();
        assert_eq!(m, m2);
        assert!(Memory::from_literal(&p.decls, "{zz = 1}").is_err());
    }

    #[test]
    fn sequencing_of_samples() {
        let s = parse_stmt("a <$ bern(1/2); b <$ bern(1/2)").unwrap();
        let mut decls = Decls::default();
        decls.add_var("a", crate::lang::Type::Bool, None);
        decls.add_var("b", crate::lang::Type::Bool, None);
        let d = exec(&decls, &s, &Memory::new(), 8).unwrap();
        assert_eq!(d.len(), 4);
        for (_, p) in d.iter() {
            assert_eq!(*p, rat(1, 4));
        }
    }

    #[test]
    fn enumerate_memories_over_domains() {
        let p = parse_program("var i : int in [0..2]; var b : bool in {true, false}; skip")
            .unwrap();
        let ms =
            enumerate_memories(&p.decls, &["i".into(), "b".into()], &Memory::new()).unwrap();
        assert_eq!(ms.len(), 6);
    }
}
