//! Exact rationals used for every timestamp, delay and clock value.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn floor(x: &Q) -> Q {
    Q::from_integer(x.numer().div_floor(x.denom()))
}

pub fn ceil(x: &Q) -> Q {
    -floor(&-x)
}

/// Fractional part in [0, 1).
pub fn frac(x: &Q) -> Q {
    x - floor(x)
}

pub fn to_i64(x: &Q) -> Option<i64> {
    if x.is_integer() {
        i64::try_from(x.numer().clone()).ok()
    } else {
        None
    }
}

/// `3/2`, `2`, `-1/3`.
pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Accepts integers, fractions `p/q` and decimals `1.25`.
pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Q::new(n, d));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s),
    };
    let (ip, fp) = body.split_once('.').unwrap_or((body, ""));
    if ip.is_empty() && fp.is_empty() {
        return None;
    }
    if !ip.chars().all(|c| c.is_ascii_digit()) || !fp.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{ip}{fp}");
    let n: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let d = num_traits::pow(BigInt::from(10), fp.len());
    let v = Q::new(n, d);
    Some(if neg { -v } else { v })
}

pub fn is_unit_interval(x: &Q) -> bool {
    !x.is_negative() && x < &Q::one()
}
