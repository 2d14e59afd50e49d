//! Exact rational arithmetic helpers.
//!
//! Everything the algorithm compares is an exact rational: the main loop
//! branches on strict inequalities between slacks, and a floating-point tie
//! would silently break the invariants the run certifies.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rat = BigRational;

/// `n/d` as an exact rational. Panics on `d == 0`.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat_zero() -> Rat {
    Rat::zero()
}

pub fn rat_one() -> Rat {
    Rat::one()
}

/// Exact integer power. `r` is kept in lowest terms so the power is too.
pub fn rat_pow(r: &Rat, p: usize) -> Rat {
    let p = u32::try_from(p).expect("exponent out of range");
    Rat::new_raw(r.numer().pow(p), r.denom().pow(p))
}

/// Smallest integer `>= 2/eps`, used for the potential exponent.
pub fn ceil_two_over(eps: &Rat) -> Result<usize> {
    if !eps.is_positive() {
        return Err(Error::InvalidInput("epsilon must be positive".into()));
    }
    let two = rat_int(2);
    let q = (two / eps).ceil().to_integer();
    usize::try_from(&q).map_err(|_| Error::InvalidInput(format!("2/epsilon = {} out of range", q)))
}

/// Parse `"p/q"` or `"p"` into an exact rational.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = num
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational numerator in {:?}", s)))?;
    let d: BigInt = den
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational denominator in {:?}", s)))?;
    if d.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {:?}", s)));
    }
    Ok(Rat::new(n, d))
}

/// Canonical text form: `"p"` for integers, `"p/q"` otherwise.
pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Decimal rendering for human-facing output (exact values stay rational).
pub fn approx_f64(r: &Rat) -> f64 {
    let numer = r.numer();
    let denom = r.denom();
    let nf = numer.to_string().parse::<f64>().unwrap_or(f64::NAN);
    let df = denom.to_string().parse::<f64>().unwrap_or(f64::NAN);
    nf / df
}
