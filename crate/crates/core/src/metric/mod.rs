//! Distances and how programs transform them.
//!
//! A *distance* here is a relational expression evaluating to a
//! non-negative rational on a pair of memories (e.g. the number of
//! disagreeing vertices between two colourings). Judgments bound the
//! expected output distance by an affine function — a [`Transformer`] —
//! of the input distance. Composing program fragments composes their
//! transformers; this module implements that algebra exactly, plus
//! parameterised families of distances (for loop invariants that shrink
//! with the iteration count) and the machinery for discharging the logical
//! side conditions that proofs generate.

pub mod oblig;
pub mod relexpr;

pub use oblig::{discharge, DischargeOptions, Mode, Obligation, ObligationBody, Status};
pub use relexpr::{alpha_eq, conjuncts, inj, normalize, subst_plain, subst_tagged};

use crate::rat::{fmt_rat, rat_int, Rat};
use std::fmt;

/// An affine distance transformer `z ↦ α·z + β` with `α, β ≥ 0`.
///
/// The non-negativity of both coefficients is what makes the algebra
/// below sound: such functions are monotone on the non-negative reals and
/// closed under composition, addition, scaling and pointwise ordering.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transformer {
    alpha: Rat,
    beta: Rat,
}

impl Transformer {
    /// `z ↦ α·z + β`. Panics if either coefficient is negative; the
    /// parsers and builders validate before constructing.
    pub fn new(alpha: Rat, beta: Rat) -> Transformer {
        assert!(
            alpha >= rat_int(0) && beta >= rat_int(0),
            "transformer coefficients must be non-negative"
        );
        Transformer { alpha, beta }
    }

    pub fn try_new(alpha: Rat, beta: Rat) -> Result<Transformer, String> {
        if alpha < rat_int(0) || beta < rat_int(0) {
            Err(format!(
                "transformer coefficients must be non-negative, got ({}, {})",
                fmt_rat(&alpha),
                fmt_rat(&beta)
            ))
        } else {
            Ok(Transformer { alpha, beta })
        }
    }

    /// The identity `z ↦ z`.
    pub fn id() -> Transformer {
        Transformer::new(rat_int(1), rat_int(0))
    }

    /// The constant function `z ↦ β`.
    pub fn constant(beta: Rat) -> Transformer {
        Transformer::new(rat_int(0), beta)
    }

    /// Pure scaling `z ↦ α·z`.
    pub fn linear(alpha: Rat) -> Transformer {
        Transformer::new(alpha, rat_int(0))
    }

    pub fn alpha(&self) -> &Rat {
        &self.alpha
    }

    pub fn beta(&self) -> &Rat {
        &self.beta
    }

    pub fn apply(&self, z: &Rat) -> Rat {
        self.alpha.clone() * z + self.beta.clone()
    }

    /// `outer ∘ inner`: first `inner`, then `outer`. With
    /// `inner = (α, β)` and `outer = (α′, β′)` this is `(α′α, α′β + β′)`.
    pub fn compose(outer: &Transformer, inner: &Transformer) -> Transformer {
        Transformer {
            alpha: outer.alpha.clone() * inner.alpha.clone(),
            beta: outer.alpha.clone() * inner.beta.clone() + outer.beta.clone(),
        }
    }

    /// Pointwise sum `(α+α′, β+β′)`.
    pub fn add(&self, other: &Transformer) -> Transformer {
        Transformer {
            alpha: self.alpha.clone() + other.alpha.clone(),
            beta: self.beta.clone() + other.beta.clone(),
        }
    }

    /// Scaling by a non-negative constant: `γ·f = z ↦ γ(αz + β)`.
    pub fn scale(gamma: &Rat, f: &Transformer) -> Transformer {
        assert!(gamma >= &rat_int(0), "scaling factor must be non-negative");
        Transformer {
            alpha: gamma.clone() * f.alpha.clone(),
            beta: gamma.clone() * f.beta.clone(),
        }
    }

    /// Vertical translation `f + γ = z ↦ αz + β + γ`.
    pub fn translate(&self, gamma: &Rat) -> Transformer {
        assert!(gamma >= &rat_int(0), "translation must be non-negative");
        Transformer {
            alpha: self.alpha.clone(),
            beta: self.beta.clone() + gamma.clone(),
        }
    }

    /// `f` composed with itself `n` times (`n = 0` gives the identity).
    /// Closed form: `α^n` and `β·(α^n − 1)/(α − 1)` (or `n·β` at `α = 1`).
    pub fn power(&self, n: u64) -> Transformer {
        let one = rat_int(1);
        let an = crate::rat::rat_pow(&self.alpha, n);
        let beta = if self.alpha == one {
            rat_int(n as i64) * self.beta.clone()
        } else {
            self.beta.clone() * (an.clone() - one.clone()) / (self.alpha.clone() - one)
        };
        Transformer { alpha: an, beta }
    }

    /// Pointwise order on the non-negative reals. Coefficient-wise
    /// comparison is sound *and* complete for affine functions with
    /// non-negative coefficients: `αz+β ≤ α′z+β′` for all `z ≥ 0` iff
    /// `α ≤ α′` (behaviour at large `z`) and `β ≤ β′` (at `z = 0`).
    pub fn le(&self, other: &Transformer) -> bool {
        self.alpha <= other.alpha && self.beta <= other.beta
    }

    /// Linear transformers (`β = 0`) distribute over convex mixtures.
    pub fn is_linear(&self) -> bool {
        self.beta == rat_int(0)
    }

    /// Linear with `α ≥ 1`: these dominate the identity, which is what
    /// framing an untouched distance term requires.
    pub fn is_expansive_linear(&self) -> bool {
        self.is_linear() && self.alpha >= rat_int(1)
    }

    /// Constant functions (`α = 0`) ignore the input distance.
    pub fn is_constant(&self) -> bool {
        self.alpha == rat_int(0)
    }
}

impl fmt::Display for Transformer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} * z + {}", fmt_rat(&self.alpha), fmt_rat(&self.beta))
    }
}

/// A distance family: one relational expression with a distinguished
/// plain parameter, giving a distance for every rational instantiation of
/// the parameter. Loop proofs use families like
/// `norm1(x<1> - x<2>) + k * 1/2 * norm1(p<1> - p<2>)` indexed by the
/// remaining iteration count `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistFamily {
    pub param: String,
    pub body: crate::lang::Expr,
}

impl DistFamily {
    pub fn new(param: impl Into<String>, body: crate::lang::Expr) -> DistFamily {
        DistFamily { param: param.into(), body }
    }

    /// A family that ignores its parameter.
    pub fn constant(body: crate::lang::Expr) -> DistFamily {
        DistFamily { param: "_k".into(), body }
    }

    /// Instantiate the parameter with a rational, normalising the result.
    pub fn at(&self, k: &Rat) -> crate::lang::Expr {
        let e = subst_plain(
            &self.body,
            &self.param,
            &crate::lang::Expr::Lit(crate::lang::Value::Rat(k.clone())),
        );
        normalize(&e)
    }

    pub fn at_int(&self, k: i64) -> crate::lang::Expr {
        self.at(&rat_int(k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    #[test]
    fn compose_applies_inner_first() {
        let inner = Transformer::new(rat(2, 1), rat(1, 1));
        let outer = Transformer::new(rat(3, 1), rat(2, 1));
        let c = Transformer::compose(&outer, &inner);
        assert_eq!(c, Transformer::new(rat(6, 1), rat(5, 1)));
        // Agrees with pointwise application on a sample point.
        let z = rat(7, 3);
        assert_eq!(c.apply(&z), outer.apply(&inner.apply(&z)));
    }

    #[test]
    fn power_closed_forms() {
        // (1, c)^T = (1, T·c).
        let f = Transformer::new(rat(1, 1), rat(3, 7));
        assert_eq!(f.power(5), Transformer::new(rat(1, 1), rat(15, 7)));
        // General α: check against iterated composition.
        let g = Transformer::new(rat(14, 15), rat(1, 2));
        let mut it = Transformer::id();
        for _ in 0..4 {
            it = Transformer::compose(&g, &it);
        }
        assert_eq!(g.power(4), it);
        assert_eq!(g.power(0), Transformer::id());
    }

    #[test]
    fn order_is_pointwise() {
        let f = Transformer::new(rat(1, 2), rat(1, 3));
        let g = Transformer::new(rat(1, 2), rat(1, 2));
        assert!(f.le(&g));
        assert!(!g.le(&f));
        // Incomparable pair.
        let h = Transformer::new(rat(2, 1), rat(0, 1));
        assert!(!f.le(&h) || !h.le(&f));
    }

    #[test]
    fn classes() {
        assert!(Transformer::linear(rat(3, 2)).is_expansive_linear());
        assert!(!Transformer::linear(rat(1, 2)).is_expansive_linear());
        assert!(Transformer::constant(rat(5, 1)).is_constant());
        assert!(Transformer::id().is_linear());
    }

    #[test]
    #[should_panic]
    fn negative_coefficients_rejected() {
        let _ = Transformer::new(rat(-1, 2), rat(0, 1));
    }
}
