//! Couplings of discrete distributions and the constructions used to
//! certify expected-distance bounds.
//!
//! A *coupling* of `μ₁ ∈ D(A)` and `μ₂ ∈ D(B)` is a joint sub-distribution
//! over pairs whose projections are exactly `μ₁` and `μ₂`. An *expectation
//! coupling* additionally carries a distance expression, a support
//! relation and a bound `δ`, and promises `E[d] ≤ δ` with all support
//! pairs satisfying the relation.
//!
//! Everything here is exact: probabilities, masses and expectations are
//! rationals, and every check is an equality or ordering on rationals —
//! never a tolerance.

pub mod transport;

pub use transport::{enumerate_vertex_plans, min_expected_distance};

use crate::lang::{Decls, Expr, Value};
use crate::metric::relexpr::{rel_bool, rel_rat};
use crate::metric::Transformer;
use crate::rat::{rat_int, Rat};
use crate::semantics::{Memory, SubDist};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum CouplingError {
    #[error("weight mismatch: {0}")]
    WeightMismatch(String),
    #[error("marginal mismatch: {0}")]
    MarginalMismatch(String),
    #[error("not a bijection between the supports: {0}")]
    NotBijection(String),
    #[error("probability-mass mismatch: {0}")]
    MassMismatch(String),
    #[error("not a probability vector: {0}")]
    BadSimplex(String),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("distance must be non-negative, got {0} on a support pair")]
    NegativeDistance(String),
    #[error("evaluation failed: {0}")]
    EvalFailed(String),
    #[error("composition premise violated: {0}")]
    PremiseViolation(String),
}

// ------------------------------------------------------------------ joints

/// A joint sub-distribution over pairs — the carrier of a coupling.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Joint<A: Ord + Clone, B: Ord + Clone>(pub SubDist<(A, B)>);

impl<A: Ord + Clone, B: Ord + Clone> Joint<A, B> {
    pub fn weight(&self) -> Rat {
        self.0.weight()
    }

    pub fn left_marginal(&self) -> SubDist<A> {
        self.0.map(|(a, _)| a.clone())
    }

    pub fn right_marginal(&self) -> SubDist<B> {
        self.0.map(|(_, b)| b.clone())
    }

    /// Do the projections equal the two given distributions exactly?
    pub fn check_marginals(&self, mu1: &SubDist<A>, mu2: &SubDist<B>) -> bool {
        self.left_marginal() == *mu1 && self.right_marginal() == *mu2
    }

    /// `Σ μ(a,b)·d(a,b)`, rejecting negative or non-evaluable distances
    /// on support points.
    pub fn expected_distance(
        &self,
        mut d: impl FnMut(&A, &B) -> Result<Rat, String>,
    ) -> Result<Rat, CouplingError> {
        let mut acc = rat_int(0);
        for ((a, b), p) in self.0.iter() {
            let v = d(a, b).map_err(CouplingError::EvalFailed)?;
            if v < rat_int(0) {
                return Err(CouplingError::NegativeDistance(crate::rat::fmt_rat(&v)));
            }
            acc += p.clone() * v;
        }
        Ok(acc)
    }

    /// Does every support pair satisfy the predicate?
    pub fn support_within(
        &self,
        mut rel: impl FnMut(&A, &B) -> Result<bool, String>,
    ) -> Result<bool, CouplingError> {
        for ((a, b), _) in self.0.iter() {
            if !rel(a, b).map_err(CouplingError::EvalFailed)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Probability that the two sides differ (for same-typed sides).
    pub fn prob_differ(&self) -> Rat
    where
        A: PartialEq<B>,
    {
        let mut acc = rat_int(0);
        for ((a, b), p) in self.0.iter() {
            if a != b {
                acc += p.clone();
            }
        }
        acc
    }
}

impl<A, B> Joint<A, B>
where
    A: Ord + Clone + fmt::Display,
    B: Ord + Clone + fmt::Display,
{
    /// Tab-separated dump mirroring the distribution dump:
    /// `left<TAB>right<TAB>p/q` rows in sorted order, then a WEIGHT line.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for ((a, b), p) in self.0.iter() {
            out.push_str(&format!("{a}\t{b}\t{}\n", crate::rat::fmt_rat(p)));
        }
        out.push_str(&format!("WEIGHT\t{}\n", crate::rat::fmt_rat(&self.weight())));
        out
    }
}

/// The diagonal coupling of a distribution with itself.
pub fn diagonal<A: Ord + Clone>(mu: &SubDist<A>) -> Joint<A, A> {
    Joint(mu.map(|a| (a.clone(), a.clone())))
}

/// The independent product coupling.
pub fn product<A: Ord + Clone, B: Ord + Clone>(
    mu1: &SubDist<A>,
    mu2: &SubDist<B>,
) -> Joint<A, B> {
    let mut out = SubDist::zero();
    for (a, p) in mu1.iter() {
        for (b, q) in mu2.iter() {
            out.add_mass((a.clone(), b.clone()), p.clone() * q.clone())
                .expect("product of non-negative masses");
        }
    }
    Joint(out)
}

// ----------------------------------------------------------- constructions

/// Couple two distributions along a bijection `h` between their supports
/// that preserves mass pointwise: all mass of `v` rides on `(v, h(v))`.
pub fn bijection_coupling<A: Ord + Clone + fmt::Display, B: Ord + Clone + fmt::Display>(
    mu1: &SubDist<A>,
    mu2: &SubDist<B>,
    h: &BTreeMap<A, B>,
) -> Result<Joint<A, B>, CouplingError> {
    let mut seen: BTreeMap<&B, &A> = BTreeMap::new();
    let mut out = SubDist::zero();
    for (a, p) in mu1.iter() {
        let b = h.get(a).ok_or_else(|| {
            CouplingError::NotBijection(format!("`{a}` has no image"))
        })?;
        if let Some(prev) = seen.insert(b, a) {
            return Err(CouplingError::NotBijection(format!(
                "`{prev}` and `{a}` both map to `{b}`"
            )));
        }
        let q = mu2.prob(b);
        if q != *p {
            return Err(CouplingError::MassMismatch(format!(
                "mass {} of `{a}` vs mass {} of its image `{b}`",
                crate::rat::fmt_rat(p),
                crate::rat::fmt_rat(&q)
            )));
        }
        out.add_mass((a.clone(), b.clone()), p.clone())
            .expect("masses are positive");
    }
    // Pointwise mass equality over an injective map plus equal weights
    // forces surjectivity onto the support of mu2.
    if mu1.weight() != mu2.weight() {
        return Err(CouplingError::WeightMismatch(format!(
            "{} vs {}",
            crate::rat::fmt_rat(&mu1.weight()),
            crate::rat::fmt_rat(&mu2.weight())
        )));
    }
    Ok(Joint(out))
}

/// The maximal (optimal) coupling of two equal-weight distributions:
/// shared mass sits on the diagonal, the leftovers are coupled by the
/// normalised product of the residuals. `Pr[left ≠ right]` equals the
/// total-variation distance exactly.
pub fn maximal_coupling<A: Ord + Clone>(
    mu1: &SubDist<A>,
    mu2: &SubDist<A>,
) -> Result<Joint<A, A>, CouplingError> {
    if mu1.weight() != mu2.weight() {
        return Err(CouplingError::WeightMismatch(format!(
            "{} vs {}",
            crate::rat::fmt_rat(&mu1.weight()),
            crate::rat::fmt_rat(&mu2.weight())
        )));
    }
    let mut out = SubDist::zero();
    let mut res1: Vec<(A, Rat)> = Vec::new();
    let mut res2: Vec<(A, Rat)> = Vec::new();
    let mut tv = rat_int(0);
    for (a, p) in mu1.iter() {
        let q = mu2.prob(a);
        let shared = p.clone().min(q.clone());
        if shared > rat_int(0) {
            out.add_mass((a.clone(), a.clone()), shared.clone())
                .expect("positive shared mass");
        }
        if *p > shared {
            let left = p.clone() - shared.clone();
            tv += left.clone();
            res1.push((a.clone(), left));
        }
    }
    for (b, q) in mu2.iter() {
        let p = mu1.prob(b);
        if *q > p {
            res2.push((b.clone(), q.clone() - p));
        }
    }
    if tv > rat_int(0) {
        for (a, pa) in &res1 {
            for (b, pb) in &res2 {
                out.add_mass(
                    (a.clone(), b.clone()),
                    pa.clone() * pb.clone() / tv.clone(),
                )
                .expect("positive residual mass");
            }
        }
    }
    Ok(Joint(out))
}

/// The distribution of standard-basis vectors under `mult(p)`.
pub fn multinomial_dist(p: &[Rat]) -> Result<SubDist<Value>, CouplingError> {
    let mut sum = rat_int(0);
    for c in p {
        if *c < rat_int(0) {
            return Err(CouplingError::BadSimplex(format!(
                "negative entry {}",
                crate::rat::fmt_rat(c)
            )));
        }
        sum += c.clone();
    }
    if sum != rat_int(1) {
        return Err(CouplingError::BadSimplex(format!(
            "entries sum to {}",
            crate::rat::fmt_rat(&sum)
        )));
    }
    let mut out = SubDist::zero();
    for (i, c) in p.iter().enumerate() {
        if *c > rat_int(0) {
            out.add_mass(basis_vector(p.len(), i), c.clone())
                .expect("positive mass");
        }
    }
    Ok(out)
}

/// The `i`-th standard basis vector of dimension `n`, as a vector value.
pub fn basis_vector(n: usize, i: usize) -> Value {
    Value::Vect((0..n).map(|j| rat_int(i64::from(j == i))).collect())
}

/// Maximal coupling of two multinomial (one-hot) distributions. Distinct
/// basis vectors are at `norm1`-distance 2, so the expected distance is
/// `2·tv = ‖p1 − p2‖₁` exactly.
pub fn multinomial_maximal_coupling(
    p1: &[Rat],
    p2: &[Rat],
) -> Result<Joint<Value, Value>, CouplingError> {
    if p1.len() != p2.len() {
        return Err(CouplingError::DimensionMismatch(p1.len(), p2.len()));
    }
    maximal_coupling(&multinomial_dist(p1)?, &multinomial_dist(p2)?)
}

/// Glue two couplings along a shared middle marginal:
/// `μ(x,y) = Σ_z μ₁(x,z)·μₙ(z,y) / mid(z)`. Requires
/// `π₂(μ₁) = π₁(μₙ) = mid`. For any distance obeying the triangle
/// inequality, the glued expected distance is at most the sum of the two
/// inputs' expected distances.
pub fn path_glue<A, B, C>(
    mu1: &Joint<A, B>,
    mun: &Joint<B, C>,
    mid: &SubDist<B>,
) -> Result<Joint<A, C>, CouplingError>
where
    A: Ord + Clone,
    B: Ord + Clone,
    C: Ord + Clone,
{
    if mu1.right_marginal() != *mid {
        return Err(CouplingError::MarginalMismatch(
            "right marginal of the first coupling differs from the middle".into(),
        ));
    }
    if mun.left_marginal() != *mid {
        return Err(CouplingError::MarginalMismatch(
            "left marginal of the second coupling differs from the middle".into(),
        ));
    }
    let mut out = SubDist::zero();
    for ((x, z1), p) in mu1.0.iter() {
        let m = mid.prob(z1);
        for ((z2, y), q) in mun.0.iter() {
            if z1 == z2 {
                out.add_mass(
                    (x.clone(), y.clone()),
                    p.clone() * q.clone() / m.clone(),
                )
                .expect("positive glued mass");
            }
        }
    }
    Ok(Joint(out))
}

// ------------------------------------------------- expectation couplings

/// An expectation coupling over memory pairs: a joint plus the distance
/// expression, support relation and bound it promises.
#[derive(Clone, Debug)]
pub struct ExpCoupling {
    pub joint: Joint<Memory, Memory>,
    /// Relational distance expression, evaluated with `⟨1⟩`/`⟨2⟩` reading
    /// the left/right memory.
    pub distance: Expr,
    /// Relational support assertion.
    pub support: Expr,
    /// The promised bound `δ` on the expected distance.
    pub bound: Rat,
}

impl ExpCoupling {
    /// Check all three defining conditions against the intended marginals:
    /// projections match exactly, every support pair satisfies the
    /// relation, and the expected distance is at most the bound.
    pub fn validate(
        &self,
        decls: &Decls,
        mu1: &SubDist<Memory>,
        mu2: &SubDist<Memory>,
    ) -> Result<(), CouplingError> {
        if !self.joint.check_marginals(mu1, mu2) {
            return Err(CouplingError::MarginalMismatch(
                "projections differ from the coupled distributions".into(),
            ));
        }
        let ok = self.joint.support_within(|a, b| {
            rel_bool(decls, a, b, &[], &self.support).map_err(|e| e.to_string())
        })?;
        if !ok {
            return Err(CouplingError::PremiseViolation(
                "a support pair falls outside the support relation".into(),
            ));
        }
        let e = self.joint.expected_distance(|a, b| {
            rel_rat(decls, a, b, &[], &self.distance).map_err(|e| e.to_string())
        })?;
        if e > self.bound {
            return Err(CouplingError::PremiseViolation(format!(
                "expected distance {} exceeds the bound {}",
                crate::rat::fmt_rat(&e),
                crate::rat::fmt_rat(&self.bound)
            )));
        }
        Ok(())
    }

    pub fn expected(&self, decls: &Decls) -> Result<Rat, CouplingError> {
        self.joint.expected_distance(|a, b| {
            rel_rat(decls, a, b, &[], &self.distance).map_err(|e| e.to_string())
        })
    }
}

/// Sequential composition of expectation couplings: run the outer
/// coupling, then from every support pair `(a,b)` continue with the
/// kernel's coupling of `η₁(a)` and `η₂(b)`.
///
/// Premises checked pointwise on the outer support: the continuation is a
/// genuine expectation coupling of `(η₁(a), η₂(b))` with the common
/// `post_distance`/`post_support`, and its bound is at most
/// `f(distance(a,b))`. The result couples the monadic binds and promises
/// `E[post_distance] ≤ f(δ)`.
pub fn compose_couplings(
    decls: &Decls,
    outer: &ExpCoupling,
    eta1: &dyn Fn(&Memory) -> Result<SubDist<Memory>, String>,
    eta2: &dyn Fn(&Memory) -> Result<SubDist<Memory>, String>,
    kernel: &dyn Fn(&Memory, &Memory) -> Result<ExpCoupling, String>,
    f: &Transformer,
) -> Result<ExpCoupling, CouplingError> {
    let mut post_distance: Option<Expr> = None;
    let mut post_support: Option<Expr> = None;
    let mut joint: SubDist<(Memory, Memory)> = SubDist::zero();
    for ((a, b), p) in outer.joint.0.iter() {
        let sat = rel_bool(decls, a, b, &[], &outer.support)
            .map_err(|e| CouplingError::EvalFailed(e.to_string()))?;
        if !sat {
            return Err(CouplingError::PremiseViolation(
                "outer support pair falls outside its own support relation".into(),
            ));
        }
        let m1 = eta1(a).map_err(CouplingError::EvalFailed)?;
        let m2 = eta2(b).map_err(CouplingError::EvalFailed)?;
        let inner = kernel(a, b).map_err(CouplingError::EvalFailed)?;
        match (&post_distance, &post_support) {
            (None, None) => {
                post_distance = Some(inner.distance.clone());
                post_support = Some(inner.support.clone());
            }
            (Some(d), Some(s)) => {
                if *d != inner.distance || *s != inner.support {
                    return Err(CouplingError::PremiseViolation(
                        "continuations disagree on the post distance or support".into(),
                    ));
                }
            }
            _ => unreachable!(),
        }
        inner.validate(decls, &m1, &m2)?;
        let here = rel_rat(decls, a, b, &[], &outer.distance)
            .map_err(|e| CouplingError::EvalFailed(e.to_string()))?;
        let allowed = f.apply(&here);
        if inner.bound > allowed {
            return Err(CouplingError::PremiseViolation(format!(
                "continuation bound {} exceeds f(distance) = {}",
                crate::rat::fmt_rat(&inner.bound),
                crate::rat::fmt_rat(&allowed)
            )));
        }
        for ((a2, b2), q) in inner.joint.0.iter() {
            joint
                .add_mass((a2.clone(), b2.clone()), p.clone() * q.clone())
                .expect("positive composed mass");
        }
    }
    let (post_distance, post_support) = match (post_distance, post_support) {
        (Some(d), Some(s)) => (d, s),
        // Empty outer coupling: the zero sub-distribution trivially
        // satisfies any post.
        _ => (outer.distance.clone(), outer.support.clone()),
    };
    Ok(ExpCoupling {
        joint: Joint(joint),
        distance: post_distance,
        support: post_support,
        bound: f.apply(&outer.bound),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parser::parse_rel_expr;
    use crate::rat::rat;

    fn bern(p: Rat) -> SubDist<bool> {
        SubDist::from_pairs([(true, p.clone()), (false, rat_int(1) - p)]).unwrap()
    }

    #[test]
    fn marginals_of_diagonal_and_product() {
        let mu = SubDist::from_pairs([(0, rat(1, 2)), (1, rat(1, 4)), (2, rat(1, 4))]).unwrap();
        let d = diagonal(&mu);
        assert!(d.check_marginals(&mu, &mu));
        assert_eq!(d.prob_differ(), rat_int(0));
        let nu = SubDist::from_pairs([(7, rat(1, 3)), (9, rat(2, 3))]).unwrap();
        let pr = product(&mu, &nu);
        assert!(pr.check_marginals(&mu, &nu));
        // A mismatched claim is rejected.
        assert!(!pr.check_marginals(&nu, &nu));
    }

    #[test]
    fn expected_distance_sums_exactly() {
        // {(0,0): 1/2, (1,0): 1/2} with |a-b| costs 1/2.
        let j: Joint<i64, i64> = Joint(
            SubDist::from_pairs([((0, 0), rat(1, 2)), ((1, 0), rat(1, 2))]).unwrap(),
        );
        let d = j
            .expected_distance(|a, b| Ok(Rat::from_integer((a - b).abs().into())))
            .unwrap();
        assert_eq!(d, rat(1, 2));
        // Negative distances are rejected.
        let bad = j.expected_distance(|a, b| Ok(Rat::from_integer((a - b).into())));
        assert!(matches!(bad, Err(CouplingError::NegativeDistance(_))));
    }

    #[test]
    fn bijection_couplings() {
        let u2 = SubDist::from_pairs([(0, rat(1, 2)), (1, rat(1, 2))]).unwrap();
        let id: BTreeMap<i32, i32> = BTreeMap::from([(0, 0), (1, 1)]);
        let j = bijection_coupling(&u2, &u2, &id).unwrap();
        assert_eq!(j, diagonal(&u2));
        // Anti-diagonal: v ↦ v+1 mod 2.
        let flip: BTreeMap<i32, i32> = BTreeMap::from([(0, 1), (1, 0)]);
        let j = bijection_coupling(&u2, &u2, &flip).unwrap();
        assert!(j.check_marginals(&u2, &u2));
        assert_eq!(j.prob_differ(), rat_int(1));
        // Mass mismatch is rejected.
        let skew = SubDist::from_pairs([(0, rat(1, 3)), (1, rat(2, 3))]).unwrap();
        assert!(matches!(
            bijection_coupling(&u2, &skew, &id),
            Err(CouplingError::MassMismatch(_))
        ));
        // Non-injective map is rejected.
        let squash: BTreeMap<i32, i32> = BTreeMap::from([(0, 0), (1, 0)]);
        assert!(matches!(
            bijection_coupling(&u2, &u2, &squash),
            Err(CouplingError::NotBijection(_))
        ));
    }

    #[test]
    fn maximal_coupling_matches_hand_construction() {
        // bern(1/2) vs bern(1/3): overlap (F,F)=1/2, (T,T)=1/3, residual
        // (T,F)=1/6; Pr[differ] = TV = 1/6.
        let m1 = bern(rat(1, 2));
        let m2 = bern(rat(1, 3));
        let j = maximal_coupling(&m1, &m2).unwrap();
        let expect = SubDist::from_pairs([
            ((false, false), rat(1, 2)),
            ((true, true), rat(1, 3)),
            ((true, false), rat(1, 6)),
        ])
        .unwrap();
        assert_eq!(j.0, expect);
        assert_eq!(j.prob_differ(), m1.tv(&m2).unwrap());
        // Identical inputs give the diagonal.
        let d = maximal_coupling(&m1, &m1).unwrap();
        assert_eq!(d, diagonal(&m1));
        // Disjoint supports: all mass moves.
        let a = SubDist::unit(0);
        let b = SubDist::unit(1);
        let j = maximal_coupling(&a, &b).unwrap();
        assert_eq!(j.0, SubDist::from_pairs([((0, 1), rat_int(1))]).unwrap());
        assert_eq!(j.prob_differ(), rat_int(1));
    }

    #[test]
    fn multinomial_maximal_examples() {
        let norm1 = |a: &Value, b: &Value| -> Result<Rat, String> {
            match (a, b) {
                (Value::Vect(x), Value::Vect(y)) => Ok(x
                    .iter()
                    .zip(y)
                    .map(|(u, v)| crate::rat::rat_abs(&(u.clone() - v.clone())))
                    .fold(rat_int(0), |s, t| s + t)),
                _ => Err("not vectors".into()),
            }
        };
        // Equal parameters: diagonal, distance 0.
        let p = [rat(1, 3), rat(2, 3)];
        let j = multinomial_maximal_coupling(&p, &p).unwrap();
        assert_eq!(j.expected_distance(norm1).unwrap(), rat_int(0));
        // Disjoint: distance 2.
        let j =
            multinomial_maximal_coupling(&[rat_int(1), rat_int(0)], &[rat_int(0), rat_int(1)])
                .unwrap();
        assert_eq!(j.expected_distance(norm1).unwrap(), rat_int(2));
        // (1/2,1/2) vs (1/4,3/4): TV = 1/4, expected distance 1/2.
        let j = multinomial_maximal_coupling(&[rat(1, 2), rat(1, 2)], &[rat(1, 4), rat(3, 4)])
            .unwrap();
        assert_eq!(j.expected_distance(norm1).unwrap(), rat(1, 2));
        // Simplex violations are rejected.
        assert!(multinomial_maximal_coupling(&[rat(1, 2)], &[rat(1, 4), rat(3, 4)]).is_err());
        assert!(multinomial_dist(&[rat(1, 2), rat(1, 4)]).is_err());
    }

    #[test]
    fn path_glue_examples() {
        let u2 = SubDist::from_pairs([(0, rat(1, 2)), (1, rat(1, 2))]).unwrap();
        // Gluing with a diagonal second leg returns the first coupling.
        let anti: Joint<i32, i32> = Joint(
            SubDist::from_pairs([((0, 1), rat(1, 2)), ((1, 0), rat(1, 2))]).unwrap(),
        );
        let diag = diagonal(&u2);
        let glued = path_glue(&anti, &diag, &u2).unwrap();
        assert_eq!(glued, anti);
        // Two anti-diagonals compose to the diagonal.
        let glued = path_glue(&anti, &anti, &u2).unwrap();
        assert_eq!(glued, diag);
        // Middle-marginal mismatch is rejected.
        let skew = SubDist::from_pairs([(0, rat(1, 3)), (1, rat(2, 3))]).unwrap();
        assert!(matches!(
            path_glue(&anti, &diag, &skew),
            Err(CouplingError::MarginalMismatch(_))
        ));
    }

    #[test]
    fn glue_is_subadditive_for_triangle_distances() {
        // A 3-state chain: d = |a−b| obeys the triangle inequality, so the
        // glued expected distance never exceeds the sum of the legs.
        let mid = SubDist::from_pairs([(0, rat(1, 4)), (1, rat(1, 2)), (2, rat(1, 4))]).unwrap();
        let leg1: Joint<i64, i64> = Joint(
            SubDist::from_pairs([
                ((0, 0), rat(1, 4)),
                ((1, 1), rat(1, 4)),
                ((2, 1), rat(1, 4)),
                ((2, 2), rat(1, 4)),
            ])
            .unwrap(),
        );
        let leg2: Joint<i64, i64> = Joint(
            SubDist::from_pairs([
                ((0, 2), rat(1, 4)),
                ((1, 0), rat(1, 4)),
                ((1, 1), rat(1, 4)),
                ((2, 0), rat(1, 4)),
            ])
            .unwrap(),
        );
        assert_eq!(leg1.right_marginal(), mid);
        assert_eq!(leg2.left_marginal(), mid);
        let d = |a: &i64, b: &i64| -> Result<Rat, String> {
            Ok(Rat::from_integer((a - b).abs().into()))
        };
        let glued = path_glue(&leg1, &leg2, &mid).unwrap();
        let e = glued.expected_distance(d).unwrap();
        let e1 = leg1.expected_distance(d).unwrap();
        let e2 = leg2.expected_distance(d).unwrap();
        assert!(e <= e1 + e2);
        assert!(glued.check_marginals(&leg1.left_marginal(), &leg2.right_marginal()));
    }

    #[test]
    fn exp_coupling_validation() {
        let src = "var x : int in [0..1]; skip";
        let decls = crate::lang::parser::parse_program(src).unwrap().decls;
        let mem = |v: i64| Memory::from_pairs([("x".to_string(), Value::int(v))]);
        let mu = SubDist::from_pairs([(mem(0), rat(1, 2)), (mem(1), rat(1, 2))]).unwrap();
        let c = ExpCoupling {
            joint: diagonal(&mu),
            distance: parse_rel_expr("ind(x<1> != x<2>)").unwrap(),
            support: parse_rel_expr("x<1> == x<2>").unwrap(),
            bound: rat_int(0),
        };
        c.validate(&decls, &mu, &mu).unwrap();
        // The product coupling violates both the support and the bound.
        let bad = ExpCoupling { joint: product(&mu, &mu), ..c.clone() };
        assert!(bad.validate(&decls, &mu, &mu).is_err());
    }

    #[test]
    fn composition_keeps_diagonals_diagonal() {
        let src = "var x : int in [0..1]; skip";
        let decls = crate::lang::parser::parse_program(src).unwrap().decls;
        let mem = |v: i64| Memory::from_pairs([("x".to_string(), Value::int(v))]);
        let mu = SubDist::from_pairs([(mem(0), rat(1, 2)), (mem(1), rat(1, 2))]).unwrap();
        let dist = parse_rel_expr("ind(x<1> != x<2>)").unwrap();
        let support = parse_rel_expr("x<1> == x<2>").unwrap();
        let outer = ExpCoupling {
            joint: diagonal(&mu),
            distance: dist.clone(),
            support: support.clone(),
            bound: rat_int(0),
        };
        // The continuation flips x deterministically on both sides.
        let flip = |m: &Memory| -> Result<SubDist<Memory>, String> {
            let v = m.get("x").unwrap().as_rat().unwrap();
            let flipped = if v == rat_int(0) { mem(1) } else { mem(0) };
            Ok(SubDist::unit(flipped))
        };
        let kernel = |a: &Memory, b: &Memory| -> Result<ExpCoupling, String> {
            let ja = flip(a)?;
            let jb = flip(b)?;
            let mut j = SubDist::zero();
            for (x, p) in ja.iter() {
                for (y, q) in jb.iter() {
                    j.add_mass((x.clone(), y.clone()), p.clone() * q.clone())
                        .map_err(|e| e.to_string())?;
                }
            }
            Ok(ExpCoupling {
                joint: Joint(j),
                distance: dist.clone(),
                support: support.clone(),
                bound: rat_int(0),
            })
        };
        let composed =
            compose_couplings(&decls, &outer, &flip, &flip, &kernel, &Transformer::id())
                .unwrap();
        let out1 = mu.bind(&flip).unwrap();
        composed.validate(&decls, &out1, &out1).unwrap();
        assert_eq!(composed.joint.prob_differ(), rat_int(0));
        assert_eq!(composed.bound, rat_int(0));
    }
}
