//! Arbitrary-precision rational numbers, plus the few helpers the rest of
//! the crate needs. Everything numeric in this crate is a [`Rat`]; there is
//! deliberately no floating point anywhere.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use std::str::FromStr;

/// The one number type used throughout: an arbitrary-precision rational.
pub type Rat = BigRational;

/// Shorthand for a rational from an integer.
pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Shorthand for `p/q`. Panics on `q = 0`, which is a programming error.
pub fn rat(p: i64, q: i64) -> Rat {
    assert!(q != 0, "rational with zero denominator");
    Rat::new(BigInt::from(p), BigInt::from(q))
}

/// Parse `p/q` or a plain integer into a rational. Accepts an optional
/// leading minus on the numerator. This is the format used everywhere a
/// rational appears in text: program sources, CLI arguments, dumps.
pub fn parse_rat(s: &str) -> Result<Rat, String> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|e| format!("bad numerator {p:?}: {e}"))?;
        let q = BigInt::from_str(q.trim()).map_err(|e| format!("bad denominator {q:?}: {e}"))?;
        if q.is_zero() {
            return Err(format!("zero denominator in {s:?}"));
        }
        Ok(Rat::new(p, q))
    } else {
        let p = BigInt::from_str(s).map_err(|e| format!("bad rational {s:?}: {e}"))?;
        Ok(Rat::from_integer(p))
    }
}

/// Render a rational as `p/q`, always including the denominator (`3/1`),
/// so that the output re-parses as a rational and never as an integer.
pub fn fmt_rat(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Is this rational an integer?
pub fn is_integer(r: &Rat) -> bool {
    r.denom().is_one()
}

/// `r^n` by repeated squaring (exact).
pub fn rat_pow(r: &Rat, mut n: u64) -> Rat {
    let mut base = r.clone();
    let mut acc = Rat::one();
    while n > 0 {
        if n & 1 == 1 {
            acc *= &base;
        }
        n >>= 1;
        if n > 0 {
            base = &base * &base;
        }
    }
    acc
}

/// Absolute value.
pub fn rat_abs(r: &Rat) -> Rat {
    r.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print_round_trip() {
        for s in ["1/2", "-3/4", "7/1", "0/1"] {
            let r = parse_rat(s).unwrap();
            assert_eq!(parse_rat(&fmt_rat(&r)).unwrap(), r);
        }
        assert_eq!(parse_rat("5").unwrap(), rat_int(5));
        assert_eq!(parse_rat(" -2/6 ").unwrap(), rat(-1, 3));
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("x").is_err());
    }

    #[test]
    fn pow_is_exact() {
        assert_eq!(rat_pow(&rat(14, 15), 3), rat(2744, 3375));
        assert_eq!(rat_pow(&rat(2, 1), 10), rat_int(1024));
        assert_eq!(rat_pow(&rat(3, 7), 0), rat_int(1));
    }
}
