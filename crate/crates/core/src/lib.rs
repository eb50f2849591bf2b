//! Exact construction and checking of *expectation couplings* for
//! discrete probabilistic programs.
//!
//! An expectation coupling witnesses a quantitative relationship between
//! two runs of (possibly the same) probabilistic program: a joint
//! sub-distribution over pairs of output states whose marginals are the two
//! output distributions, whose support stays inside a relational assertion
//! Ψ, and whose expected distance E[d′] is bounded by an affine function
//! `f(δ)` of the input distance δ. Chains of such couplings certify
//! sensitivity, uniform stability, and mixing-rate bounds that plain
//! relational reasoning cannot express.
//!
//! The crate is organised as a small stack:
//!
//! - [`lang`] — the programming language: values, expressions, statements,
//!   declarations, a text format with parser and pretty-printer, and a
//!   typechecker. All numerics are arbitrary-precision rationals; nothing
//!   in this crate ever rounds.
//! - [`semantics`] — exact denotational semantics: finitely-supported
//!   sub-distributions over memories, fuel-bounded loop unrolling (mass
//!   that would run past the fuel is dropped, never approximated),
//!   expectations, and total-variation distance.
//! - [`metric`] — the quantitative layer: relational expressions over
//!   tagged memories `x<1>`/`x<2>`, affine distance transformers
//!   `z ↦ αz + β`, distance families indexed by a loop counter, and the
//!   side-condition (obligation) discharge engine.
//! - [`coupling`] — joint sub-distributions and the coupling toolbox:
//!   marginal checks, maximal and multinomial-maximal couplings, bijection
//!   couplings, sequential composition, path gluing, and an exact
//!   min-cost-transport oracle for "what is the best possible coupling".
//! - [`logic`] — judgments, proof trees, the rule-by-rule proof checker,
//!   program-equivalence checking, weakest preconditions for loop-free
//!   deterministic pairs, semantic validation of judgments against the
//!   transport oracle, and the `.eps` proof-script format.
//! - [`harness`] — executable case studies (Glauber dynamics for graph
//!   colorings, resampling population dynamics, convex SGM stability),
//!   the mixing-time experiment, and instance builders that assemble full
//!   derivations programmatically.
//!
//! The `epcheck` binary exposes all of it as a command line tool; see the
//! repository README for the format and CLI reference.

pub mod coupling;
pub mod harness;
pub mod lang;
pub mod logic;
pub mod metric;
pub mod rat;
pub mod semantics;

pub use rat::Rat;
