//! Logical side conditions and how they get discharged.
//!
//! Proof rules spin off obligations — "this assertion implies that one",
//! "this distance satisfies the triangle inequality" — and the checker
//! discharges them through a fixed pipeline of sound (never complete)
//! routes:
//!
//! 1. **syntactic**: the consequent normalises to `true`, the antecedent
//!    to `false`, or every consequent conjunct appears verbatim among the
//!    antecedent's;
//! 2. **non-negative linear arithmetic**: `Σcᵢ·Aᵢ + c ≤ Σdᵢ·Aᵢ + d`
//!    coefficient-wise over atoms known to be non-negative
//!    (`abs`, `norm1`, `ind`, sums thereof);
//! 3. **enumeration**: complete search over the declared finite domains
//!    of every variable mentioned, with unit propagation and early
//!    conjunct evaluation to prune, under a global step budget;
//! 4. **axiom matching**: the obligation α-matches a declared axiom
//!    (consequent α-equivalent, axiom antecedent conjuncts a subset of the
//!    obligation's) — the result is then *assumed*, not proven.
//!
//! A failed complete enumeration is a refutation and reports a
//! counterexample. When enumeration had to drop antecedent conjuncts it
//! could not enumerate (a sound strengthening), failure proves nothing
//! and the obligation comes back unresolved instead.

use super::relexpr::{alpha_eq, and_all, conjuncts, describe_pair, normalize, rel_bool, rel_rat};
use crate::lang::{AxiomBody, Decls, Expr, Quant, Side, Value};
use crate::rat::{rat_int, Rat};
use crate::semantics::{enumerate_memories, EvalError, Memory};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// What a single obligation claims, quantified over all memories (pairs,
/// or triples for the metric laws) drawn from the declared domains.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ObligationBody {
    /// ⊨ ante ⟹ cons on all memory pairs.
    RelImplies { ante: Expr, cons: Expr },
    /// dist(m₁,m₃) ≤ dist(m₁,m₂) + dist(m₂,m₃) on all triples.
    Triangle { dist: Expr },
    /// rel(m₁,m₂) ∧ rel(m₂,m₃) ⟹ rel(m₁,m₃) on all triples.
    Transitive { rel: Expr },
    /// Whenever rel(m₁,m₂) and dist(m₁,m₂) ≥ 2, some midpoint u has
    /// rel(m₁,u) ∧ rel(u,m₂), dist(m₁,u) = 1 and
    /// dist(u,m₂) = dist(m₁,m₂) − 1.
    PathDecomp { dist: Expr, rel: Expr },
}

impl ObligationBody {
    /// `dist` is integer-valued (under an optional assumption).
    pub fn int_valued(dist: Expr, under: Option<Expr>) -> ObligationBody {
        ObligationBody::RelImplies {
            ante: under.unwrap_or_else(|| Expr::lit_bool(true)),
            cons: Expr::IsInt(Box::new(dist)),
        }
    }

    /// `dist` vanishes on the diagonal: expressed as "all mentioned
    /// variables agree across the two sides ⟹ dist = 0".
    pub fn reflexive(dist: Expr) -> ObligationBody {
        let eqs: Vec<Expr> = dist
            .tagged_var_names()
            .into_iter()
            .map(|x| {
                Expr::Eq(
                    Box::new(Expr::Var(x.clone(), Some(Side::Left))),
                    Box::new(Expr::Var(x, Some(Side::Right))),
                )
            })
            .collect();
        ObligationBody::RelImplies {
            ante: and_all(eqs),
            cons: Expr::Eq(Box::new(dist), Box::new(Expr::lit_rat(rat_int(0)))),
        }
    }
}

/// How the author of a proof asks for an obligation to be discharged.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub enum Mode {
    /// Full pipeline: syntactic → linear → enumeration → axioms.
    #[default]
    Auto,
    /// Enumeration only (used to pin down that a condition really is
    /// checked exhaustively).
    Enumerate,
    /// Cite a named axiom; fails if the axiom does not match.
    Axiom(String),
}

/// A labelled obligation with its requested discharge mode.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Obligation {
    /// Human-readable provenance, e.g. `"loop rule: guards agree"`.
    pub label: String,
    pub body: ObligationBody,
    pub mode: Mode,
}

impl Obligation {
    pub fn auto(label: impl Into<String>, body: ObligationBody) -> Obligation {
        Obligation { label: label.into(), body, mode: Mode::Auto }
    }

    pub fn implies(label: impl Into<String>, ante: Expr, cons: Expr) -> Obligation {
        Obligation::auto(label, ObligationBody::RelImplies { ante, cons })
    }
}

/// The outcome of a discharge attempt.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    /// Established by a sound route.
    Proven,
    /// Granted by citing the named axiom.
    Assumed(String),
    /// Refuted (complete enumeration found a counterexample) or
    /// structurally ill-posed; the string says why.
    Failed(String),
    /// No route applied within budget; neither proven nor refuted.
    Unresolved(String),
}

impl Status {
    pub fn is_ok(&self) -> bool {
        matches!(self, Status::Proven | Status::Assumed(_))
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Proven => write!(f, "PROVEN"),
            Status::Assumed(n) => write!(f, "ASSUMED({n})"),
            Status::Failed(m) => write!(f, "FAILED: {m}"),
            Status::Unresolved(m) => write!(f, "UNRESOLVED: {m}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct DischargeOptions {
    /// Upper bound on elementary evaluation steps a single obligation may
    /// spend before coming back unresolved.
    pub budget: u64,
}

impl Default for DischargeOptions {
    fn default() -> Self {
        DischargeOptions { budget: 20_000_000 }
    }
}

/// Discharge one obligation against the declarations.
pub fn discharge(decls: &Decls, ob: &Obligation, opts: &DischargeOptions) -> Status {
    match &ob.mode {
        Mode::Auto => discharge_auto(decls, &ob.body, opts),
        Mode::Enumerate => match &ob.body {
            ObligationBody::RelImplies { ante, cons } => {
                let ante = normalize(ante);
                let cons = normalize(cons);
                enumerate_implies(decls, &ante, &cons, opts).into_status(false)
            }
            other => enumerate_metric_law(decls, other, opts).into_status(false),
        },
        Mode::Axiom(name) => match &ob.body {
            ObligationBody::RelImplies { ante, cons } => {
                match match_axiom(decls, name, ante, cons) {
                    Ok(()) => Status::Assumed(name.clone()),
                    Err(why) => Status::Failed(format!("cited axiom `{name}` does not apply: {why}")),
                }
            }
            _ => Status::Failed(format!(
                "axiom `{name}` cited for a metric-law obligation; axioms discharge implications only"
            )),
        },
    }
}

fn discharge_auto(decls: &Decls, body: &ObligationBody, opts: &DischargeOptions) -> Status {
    match body {
        ObligationBody::RelImplies { ante, cons } => {
            let ante = normalize(ante);
            let cons = normalize(cons);
            if syntactic_implies(&ante, &cons) {
                return Status::Proven;
            }
            if linear_le_implies(&ante, &cons) {
                return Status::Proven;
            }
            let enumerated = enumerate_implies(decls, &ante, &cons, opts);
            if let EnumOutcome::Proven = enumerated {
                return Status::Proven;
            }
            // Try the declared axioms before settling for the
            // enumeration's non-answer.
            for ax in &decls.axioms {
                if let AxiomBody::Rel(_) = ax.body {
                    if match_axiom(decls, &ax.name, &ante, &cons).is_ok() {
                        return Status::Assumed(ax.name.clone());
                    }
                }
            }
            enumerated.into_status(false)
        }
        other => enumerate_metric_law(decls, other, opts).into_status(false),
    }
}

// ------------------------------------------------------------- route 1 & 2

/// Purely syntactic implication on normal forms.
fn syntactic_implies(ante: &Expr, cons: &Expr) -> bool {
    if *cons == Expr::lit_bool(true) || *ante == Expr::lit_bool(false) {
        return true;
    }
    let have = conjuncts(ante);
    conjuncts(cons).iter().all(|c| have.contains(c))
}

/// Decompose a normalised numeric expression into a linear combination
/// `Σ coeff·atom + constant` (atoms are compared structurally).
fn linear_decompose(e: &Expr) -> (BTreeMap<Expr, Rat>, Rat) {
    fn go(e: &Expr, sign: Rat, atoms: &mut BTreeMap<Expr, Rat>, cst: &mut Rat) {
        match e {
            Expr::Lit(Value::Rat(r)) => *cst += sign * r.clone(),
            Expr::Add(a, b) => {
                go(a, sign.clone(), atoms, cst);
                go(b, sign, atoms, cst);
            }
            Expr::Sub(a, b) => {
                go(a, sign.clone(), atoms, cst);
                go(b, -sign, atoms, cst);
            }
            Expr::Neg(a) => go(a, -sign, atoms, cst),
            Expr::Mul(a, b) => {
                if let Expr::Lit(Value::Rat(c)) = &**a {
                    go(b, sign * c.clone(), atoms, cst);
                } else if let Expr::Lit(Value::Rat(c)) = &**b {
                    go(a, sign * c.clone(), atoms, cst);
                } else {
                    *atoms.entry(e.clone()).or_insert_with(|| rat_int(0)) += sign;
                }
            }
            _ => {
                *atoms.entry(e.clone()).or_insert_with(|| rat_int(0)) += sign;
            }
        }
    }
    let mut atoms = BTreeMap::new();
    let mut cst = rat_int(0);
    go(e, rat_int(1), &mut atoms, &mut cst);
    atoms.retain(|_, c| *c != rat_int(0));
    (atoms, cst)
}

/// Is this atom non-negative in every memory pair, by its shape alone?
fn known_nonneg(e: &Expr) -> bool {
    match e {
        Expr::Lit(Value::Rat(r)) => *r >= rat_int(0),
        Expr::Abs(_) | Expr::Norm1(_) | Expr::Ind(_) => true,
        Expr::Add(a, b) => known_nonneg(a) && known_nonneg(b),
        Expr::Mul(a, b) => known_nonneg(a) && known_nonneg(b),
        Expr::QuantExpr(Quant::Sum, _, _, body) => known_nonneg(body),
        Expr::Ite(_, a, b) => known_nonneg(a) && known_nonneg(b),
        _ => false,
    }
}

/// Route 2: consequents of the form `lhs ≤ rhs` where both sides are
/// non-negative linear combinations of the same atoms. Sound for any
/// antecedent (it ignores it).
fn linear_le_implies(_ante: &Expr, cons: &Expr) -> bool {
    let all = conjuncts(cons);
    if all.is_empty() {
        return false;
    }
    all.iter().all(|c| match c {
        Expr::Le(lhs, rhs) => {
            let (la, lc) = linear_decompose(lhs);
            let (ra, rc) = linear_decompose(rhs);
            if lc > rc {
                return false;
            }
            let keys: BTreeSet<&Expr> = la.keys().chain(ra.keys()).collect();
            let ok = keys.iter().all(|k| {
                let l = la.get(k).cloned().unwrap_or_else(|| rat_int(0));
                let r = ra.get(k).cloned().unwrap_or_else(|| rat_int(0));
                if known_nonneg(k) {
                    l <= r
                } else {
                    l == r
                }
            });
            ok
        }
        _ => false,
    })
}

// ---------------------------------------------------------------- route 3

enum EnumOutcome {
    Proven,
    /// A counterexample was found while *no* antecedent conjunct had been
    /// dropped — a genuine refutation. The bool on `into_status` callers
    /// distinguishes the sliced case.
    Counterexample(String, /*sliced:*/ bool),
    OutOfBudget,
    NotEnumerable(String),
    EvalFailed(String),
    Uninterpreted(String),
}

impl EnumOutcome {
    fn into_status(self, _strict: bool) -> Status {
        match self {
            EnumOutcome::Proven => Status::Proven,
            EnumOutcome::Counterexample(cex, false) => {
                Status::Failed(format!("counterexample: {cex}"))
            }
            EnumOutcome::Counterexample(cex, true) => Status::Unresolved(format!(
                "enumeration after dropping non-finite antecedent conjuncts found {cex}; \
                 the original implication is neither proven nor refuted"
            )),
            EnumOutcome::OutOfBudget => {
                Status::Unresolved("enumeration exceeded the step budget".into())
            }
            EnumOutcome::NotEnumerable(why) => Status::Unresolved(why),
            EnumOutcome::EvalFailed(why) => Status::Failed(why),
            EnumOutcome::Uninterpreted(f) => Status::Unresolved(format!(
                "`{f}` is uninterpreted; only an axiom can discharge this"
            )),
        }
    }
}

/// Names tagged in an expression that have no declared finite domain,
/// plus free plain variables that are not declared constants.
fn blockers(decls: &Decls, e: &Expr) -> (BTreeSet<(String, Side)>, BTreeSet<String>) {
    let mut tagged = BTreeSet::new();
    for (x, s) in e.free_tagged_vars() {
        if decls.domain_of(&x).is_none() {
            tagged.insert((x, s));
        }
    }
    let plain: BTreeSet<String> = e
        .free_plain_vars()
        .into_iter()
        .filter(|x| decls.constant(x).is_none())
        .collect();
    (tagged, plain)
}

fn enumerate_implies(
    decls: &Decls,
    ante: &Expr,
    cons: &Expr,
    opts: &DischargeOptions,
) -> EnumOutcome {
    // The consequent must be fully enumerable.
    let (ct, cp) = blockers(decls, cons);
    if !cp.is_empty() {
        return EnumOutcome::NotEnumerable(format!(
            "consequent has free non-constant names {cp:?}"
        ));
    }
    if !ct.is_empty() {
        return EnumOutcome::NotEnumerable(format!(
            "consequent mentions variables with no finite domain: {ct:?}"
        ));
    }

    // Keep antecedent conjuncts that are enumerable; drop the rest
    // (sound: the implication only gets stronger).
    let mut sliced = false;
    let mut kept: Vec<Expr> = Vec::new();
    for c in conjuncts(ante) {
        let (bt, bp) = blockers(decls, &c);
        if bt.is_empty() && bp.is_empty() {
            kept.push(c);
        } else {
            sliced = true;
        }
    }

    // Unit propagation: `x<i> == lit` pins the variable.
    let mut fixed: BTreeMap<(String, Side), Value> = BTreeMap::new();
    for c in &kept {
        if let Expr::Eq(a, b) = c {
            let pin = match (&**a, &**b) {
                (Expr::Var(x, Some(s)), Expr::Lit(v)) | (Expr::Lit(v), Expr::Var(x, Some(s))) => {
                    Some(((x.clone(), *s), v.clone()))
                }
                _ => None,
            };
            if let Some((key, v)) = pin {
                if let Some(prev) = fixed.get(&key) {
                    if *prev != v {
                        // Antecedent is unsatisfiable: vacuously true.
                        return EnumOutcome::Proven;
                    }
                } else {
                    let dom = decls.domain_of(&key.0).expect("kept conjunct is enumerable");
                    if !dom.contains(&v) {
                        return EnumOutcome::Proven;
                    }
                    fixed.insert(key, v);
                }
            }
        }
    }

    // Variable order: pinned first, then ascending domain size.
    let mut vars: Vec<(String, Side)> = BTreeSet::from_iter(
        kept.iter()
            .flat_map(|c| c.free_tagged_vars())
            .chain(cons.free_tagged_vars()),
    )
    .into_iter()
    .collect();
    let size_of = |v: &(String, Side)| -> usize {
        if fixed.contains_key(v) {
            1
        } else {
            decls.domain_of(&v.0).and_then(|d| d.size()).unwrap_or(usize::MAX)
        }
    };
    vars.sort_by_key(|v| (size_of(v), v.clone()));
    if let Some(v) = vars.iter().find(|v| size_of(v) == usize::MAX) {
        return EnumOutcome::NotEnumerable(format!("domain of `{}` too large", v.0));
    }

    // Schedule each conjunct at the position where its last variable is
    // assigned (position 0 = before any assignment, for closed conjuncts).
    let pos_of = |needle: &(String, Side)| vars.iter().position(|v| v == needle);
    let mut schedule: Vec<Vec<&Expr>> = vec![Vec::new(); vars.len() + 1];
    for c in &kept {
        let p = c
            .free_tagged_vars()
            .iter()
            .filter_map(|v| pos_of(v))
            .max()
            .map(|i| i + 1)
            .unwrap_or(0);
        schedule[p].push(c);
    }

    let domains: Vec<Vec<Value>> = {
        let mut ds = Vec::with_capacity(vars.len());
        for v in &vars {
            if let Some(val) = fixed.get(v) {
                ds.push(vec![val.clone()]);
            } else {
                match decls.domain_of(&v.0).unwrap().enumerate() {
                    Ok(vals) => ds.push(vals),
                    Err(why) => return EnumOutcome::NotEnumerable(why),
                }
            }
        }
        ds
    };

    let mut budget = opts.budget;
    let mut left = Memory::new();
    let mut right = Memory::new();

    enum Walk {
        Done,
        Cex(String),
        Budget,
        Err(EvalError),
    }

    fn dfs(
        decls: &Decls,
        vars: &[(String, Side)],
        domains: &[Vec<Value>],
        schedule: &[Vec<&Expr>],
        cons: &Expr,
        level: usize,
        left: &mut Memory,
        right: &mut Memory,
        budget: &mut u64,
    ) -> Walk {
        // Evaluate every conjunct that became closed at this level.
        for c in &schedule[level] {
            if *budget == 0 {
                return Walk::Budget;
            }
            *budget -= 1;
            match rel_bool(decls, left, right, &[], c) {
                Ok(true) => {}
                Ok(false) => return Walk::Done, // antecedent false: prune
                Err(e) => return Walk::Err(e),
            }
        }
        if level == vars.len() {
            if *budget == 0 {
                return Walk::Budget;
            }
            *budget -= 1;
            return match rel_bool(decls, left, right, &[], cons) {
                Ok(true) => Walk::Done,
                Ok(false) => Walk::Cex(describe_pair(cons, left, right)),
                Err(e) => Walk::Err(e),
            };
        }
        let (name, side) = &vars[level];
        for val in &domains[level] {
            match side {
                Side::Left => left.set_mut(name, val.clone()),
                Side::Right => right.set_mut(name, val.clone()),
            }
            match dfs(decls, vars, domains, schedule, cons, level + 1, left, right, budget) {
                Walk::Done => {}
                stop => return stop,
            }
        }
        match side {
            Side::Left => {
                left.0.remove(name);
            }
            Side::Right => {
                right.0.remove(name);
            }
        }
        Walk::Done
    }

    match dfs(
        decls, &vars, &domains, &schedule, cons, 0, &mut left, &mut right, &mut budget,
    ) {
        Walk::Done => EnumOutcome::Proven,
        Walk::Cex(cex) => EnumOutcome::Counterexample(cex, sliced),
        Walk::Budget => EnumOutcome::OutOfBudget,
        Walk::Err(EvalError::Uninterpreted(f)) => EnumOutcome::Uninterpreted(f),
        Walk::Err(e) => EnumOutcome::EvalFailed(format!("evaluation failed: {e}")),
    }
}

/// Enumerate the state space for a metric-law obligation: all memories
/// assigning the mentioned variables values from their domains.
fn metric_states(
    decls: &Decls,
    exprs: &[&Expr],
    opts: &DischargeOptions,
    arity_exponent: u32,
) -> Result<Vec<Memory>, EnumOutcome> {
    let mut names: BTreeSet<String> = BTreeSet::new();
    for e in exprs {
        let (bt, bp) = blockers(decls, e);
        if !bt.is_empty() || !bp.is_empty() {
            return Err(EnumOutcome::NotEnumerable(format!(
                "not enumerable (no finite domain): tagged {bt:?}, plain {bp:?}"
            )));
        }
        names.extend(e.tagged_var_names());
    }
    let names: Vec<String> = names.into_iter().collect();
    let states = enumerate_memories(decls, &names, &Memory::new())
        .map_err(EnumOutcome::NotEnumerable)?;
    let n = states.len() as u64;
    if n.checked_pow(arity_exponent).map_or(true, |c| c > opts.budget) {
        return Err(EnumOutcome::OutOfBudget);
    }
    Ok(states)
}

fn enumerate_metric_law(
    decls: &Decls,
    body: &ObligationBody,
    opts: &DischargeOptions,
) -> EnumOutcome {
    match body {
        ObligationBody::Triangle { dist } => {
            let dist = normalize(dist);
            let states = match metric_states(decls, &[&dist], opts, 3) {
                Ok(s) => s,
                Err(o) => return o,
            };
            let n = states.len();
            // Precompute the full distance matrix, then compare triples.
            let mut d = Vec::with_capacity(n * n);
            for a in &states {
                for b in &states {
                    match rel_rat(decls, a, b, &[], &dist) {
                        Ok(r) => d.push(r),
                        Err(EvalError::Uninterpreted(f)) => {
                            return EnumOutcome::Uninterpreted(f)
                        }
                        Err(e) => return EnumOutcome::EvalFailed(e.to_string()),
                    }
                }
            }
            for i in 0..n {
                for j in 0..n {
                    let dij = &d[i * n + j];
                    for k in 0..n {
                        if d[i * n + k] > dij.clone() + d[j * n + k].clone() {
                            return EnumOutcome::Counterexample(
                                format!(
                                    "triangle inequality fails on {}, via midpoint {}",
                                    describe_pair(&dist, &states[i], &states[k]),
                                    &states[j]
                                ),
                                false,
                            );
                        }
                    }
                }
            }
            EnumOutcome::Proven
        }
        ObligationBody::Transitive { rel } => {
            let rel = normalize(rel);
            if rel == Expr::lit_bool(true) {
                return EnumOutcome::Proven;
            }
            let states = match metric_states(decls, &[&rel], opts, 2) {
                Ok(s) => s,
                Err(o) => return o,
            };
            let n = states.len();
            let mut r = Vec::with_capacity(n * n);
            for a in &states {
                for b in &states {
                    match rel_bool(decls, a, b, &[], &rel) {
                        Ok(v) => r.push(v),
                        Err(EvalError::Uninterpreted(f)) => {
                            return EnumOutcome::Uninterpreted(f)
                        }
                        Err(e) => return EnumOutcome::EvalFailed(e.to_string()),
                    }
                }
            }
            for i in 0..n {
                for j in 0..n {
                    if !r[i * n + j] {
                        continue;
                    }
                    for k in 0..n {
                        if r[j * n + k] && !r[i * n + k] {
                            return EnumOutcome::Counterexample(
                                describe_pair(&rel, &states[i], &states[k]),
                                false,
                            );
                        }
                    }
                }
            }
            EnumOutcome::Proven
        }
        ObligationBody::PathDecomp { dist, rel } => {
            let dist = normalize(dist);
            let rel = normalize(rel);
            let states = match metric_states(decls, &[&dist, &rel], opts, 2) {
                Ok(s) => s,
                Err(o) => return o,
            };
            let n = states.len();
            let one = rat_int(1);
            let two = rat_int(2);
            let mut d = Vec::with_capacity(n * n);
            let mut r = Vec::with_capacity(n * n);
            for a in &states {
                for b in &states {
                    match rel_rat(decls, a, b, &[], &dist) {
                        Ok(x) => d.push(x),
                        Err(EvalError::Uninterpreted(f)) => {
                            return EnumOutcome::Uninterpreted(f)
                        }
                        Err(e) => return EnumOutcome::EvalFailed(e.to_string()),
                    }
                    match rel_bool(decls, a, b, &[], &rel) {
                        Ok(x) => r.push(x),
                        Err(EvalError::Uninterpreted(f)) => {
                            return EnumOutcome::Uninterpreted(f)
                        }
                        Err(e) => return EnumOutcome::EvalFailed(e.to_string()),
                    }
                }
            }
            for i in 0..n {
                for j in 0..n {
                    if !r[i * n + j] || d[i * n + j] < two {
                        continue;
                    }
                    let want = d[i * n + j].clone() - one.clone();
                    let found = (0..n).any(|k| {
                        r[i * n + k]
                            && r[k * n + j]
                            && d[i * n + k] == one
                            && d[k * n + j] == want
                    });
                    if !found {
                        return EnumOutcome::Counterexample(
                            format!(
                                "no unit-step midpoint decomposes {}",
                                describe_pair(&dist, &states[i], &states[j])
                            ),
                            false,
                        );
                    }
                }
            }
            EnumOutcome::Proven
        }
        ObligationBody::RelImplies { .. } => unreachable!("handled by enumerate_implies"),
    }
}

// ---------------------------------------------------------------- route 4

/// Does the named axiom syntactically cover the obligation
/// `ante ⟹ cons`? The axiom's consequent must be α-equivalent to the
/// obligation's, and every axiom antecedent conjunct must α-match some
/// obligation antecedent conjunct (the obligation may assume more).
fn match_axiom(decls: &Decls, name: &str, ante: &Expr, cons: &Expr) -> Result<(), String> {
    let ax = decls.axiom(name).ok_or_else(|| format!("no axiom named `{name}`"))?;
    let body = match &ax.body {
        AxiomBody::Rel(e) => e,
        AxiomBody::Prob { .. } => {
            return Err("probability axioms apply to sequencing steps, not implications".into())
        }
    };
    let body = normalize(body);
    let ante = normalize(ante);
    let cons = normalize(cons);
    let (ax_ante, ax_cons) = match &body {
        Expr::Implies(a, c) => (conjuncts(a), (**c).clone()),
        _ => (Vec::new(), body.clone()),
    };
    if !alpha_eq(&ax_cons, &cons) {
        return Err("conclusion does not match".into());
    }
    let have = conjuncts(&ante);
    for need in &ax_ante {
        if !have.iter().any(|h| alpha_eq(h, need)) {
            return Err(format!(
                "axiom assumes `{}` which the obligation does not",
                crate::lang::pretty::expr_to_string(need)
            ));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parser::{parse_program, parse_rel_expr};

    fn decls(src: &str) -> Decls {
        parse_program(src).unwrap().decls
    }

    fn implies(decls: &Decls, ante: &str, cons: &str) -> Status {
        let ob = Obligation::implies(
            "test",
            parse_rel_expr(ante).unwrap(),
            parse_rel_expr(cons).unwrap(),
        );
        discharge(decls, &ob, &DischargeOptions::default())
    }

    #[test]
    fn syntactic_route() {
        let d = decls("var x : int in [0..3]; skip");
        assert_eq!(implies(&d, "x<1> == x<2>", "true"), Status::Proven);
        assert_eq!(
            implies(&d, "x<1> == 1 && x<2> == 2", "x<2> == 2"),
            Status::Proven
        );
        assert_eq!(implies(&d, "false", "x<1> == 5"), Status::Proven);
    }

    #[test]
    fn linear_route() {
        // Holds for every value of the (unbounded) variables because the
        // atoms are non-negative — no enumeration is possible here, so
        // only the linear route can prove it.
        let d = decls("var r : rat; var p : vec(2); skip");
        assert_eq!(
            implies(
                &d,
                "true",
                "1/2 * abs(r<1> - r<2>) <= abs(r<1> - r<2>) + 1/4"
            ),
            Status::Proven
        );
        assert_eq!(
            implies(
                &d,
                "true",
                "norm1(p<1> - p<2>) + 1/3 <= 2 * norm1(p<1> - p<2>) + 1/2"
            ),
            Status::Proven
        );
        // Not provable coefficient-wise (and indeed false at 0).
        assert!(!implies(&d, "true", "abs(r<1>) + 1 <= abs(r<1>)").is_ok());
    }

    #[test]
    fn enumeration_route_proves_and_refutes() {
        let d = decls("var i : int in [0..3]; var j : int in [0..3]; skip");
        assert_eq!(
            implies(&d, "i<1> == i<2> && i<1> <= 1", "i<2> <= 2"),
            Status::Proven
        );
        match implies(&d, "i<1> <= 2", "i<1> <= 1") {
            Status::Failed(msg) => assert!(msg.contains("counterexample"), "{msg}"),
            s => panic!("expected refutation, got {s:?}"),
        }
    }

    #[test]
    fn unit_propagation_handles_contradictions() {
        let d = decls("var i : int in [0..3]; skip");
        // Contradictory pins make the antecedent unsatisfiable.
        assert_eq!(
            implies(&d, "i<1> == 1 && i<1> == 2", "i<1> == 99"),
            Status::Proven
        );
        // Pin outside the domain: vacuous over the modelled space.
        assert_eq!(implies(&d, "i<1> == 7", "i<1> == 0"), Status::Proven);
    }

    #[test]
    fn slicing_never_refutes() {
        // `r` has no finite domain, so the conjunct about it is dropped;
        // the strengthened implication is false, but that is not a
        // refutation of the original.
        let d = decls("var r : rat; var i : int in [0..1]; skip");
        match implies(&d, "r<1> == 1/2 && i<1> == 0", "i<1> == 1") {
            Status::Unresolved(_) => {}
            s => panic!("expected unresolved, got {s:?}"),
        }
    }

    #[test]
    fn axiom_route() {
        let d = decls(
            "var r : rat; fun g(rat) : rat;\n\
             axiom lip : r<1> == r<2> => abs(g(r<1>) - g(r<2>)) <= 0/1;\n\
             skip",
        );
        let ob = Obligation {
            label: "test".into(),
            body: ObligationBody::RelImplies {
                ante: parse_rel_expr("r<1> == r<2> && r<1> >= 0").unwrap(),
                cons: parse_rel_expr("abs(g(r<1>) - g(r<2>)) <= 0/1").unwrap(),
            },
            mode: Mode::Axiom("lip".into()),
        };
        assert_eq!(
            discharge(&d, &ob, &DischargeOptions::default()),
            Status::Assumed("lip".into())
        );
        // Auto also finds it (enumeration is blocked by `g`).
        let auto = Obligation { mode: Mode::Auto, ..ob.clone() };
        assert_eq!(
            discharge(&d, &auto, &DischargeOptions::default()),
            Status::Assumed("lip".into())
        );
        // A mismatched citation fails.
        let wrong = Obligation {
            body: ObligationBody::RelImplies {
                ante: parse_rel_expr("r<1> >= 0").unwrap(),
                cons: parse_rel_expr("abs(g(r<1>) - g(r<2>)) <= 0/1").unwrap(),
            },
            ..ob
        };
        match discharge(&d, &wrong, &DischargeOptions::default()) {
            Status::Failed(m) => assert!(m.contains("does not apply")),
            s => panic!("expected failure, got {s:?}"),
        }
    }

    #[test]
    fn metric_laws_on_hamming_distance() {
        let d = decls("var w : map([0..1], int) in maps([0..1], [0..2]); skip");
        let dist =
            parse_rel_expr("sum z in [0..1] . ind(w<1>[z] != w<2>[z])").unwrap();
        let opts = DischargeOptions::default();
        for (label, body) in [
            ("triangle", ObligationBody::Triangle { dist: dist.clone() }),
            ("reflexive", ObligationBody::reflexive(dist.clone())),
            ("int", ObligationBody::int_valued(dist.clone(), None)),
            (
                "path",
                ObligationBody::PathDecomp { dist: dist.clone(), rel: Expr::lit_bool(true) },
            ),
        ] {
            let ob = Obligation::auto(label, body);
            assert_eq!(discharge(&d, &ob, &opts), Status::Proven, "{label}");
        }
        // A non-metric "distance" flunks the triangle law.
        let bogus = parse_rel_expr(
            "ind(w<1>[0] != w<2>[0]) * ind(w<1>[1] != w<2>[1]) * 5",
        )
        .unwrap();
        let ob = Obligation::auto("bogus", ObligationBody::Triangle { dist: bogus });
        assert!(matches!(discharge(&d, &ob, &opts), Status::Failed(_)));
    }

    #[test]
    fn transitivity_of_equality_pattern() {
        let d = decls("var i : int in [0..2]; skip");
        let rel = parse_rel_expr("i<1> == i<2>").unwrap();
        let ob = Obligation::auto("trans", ObligationBody::Transitive { rel });
        assert_eq!(
            discharge(&d, &ob, &DischargeOptions::default()),
            Status::Proven
        );
        let ne = parse_rel_expr("i<1> != i<2>").unwrap();
        let ob2 = Obligation::auto("trans-ne", ObligationBody::Transitive { rel: ne });
        assert!(matches!(
            discharge(&d, &ob2, &DischargeOptions::default()),
            Status::Failed(_)
        ));
    }
}
