//! Exact integers and rationals, plus p-adic valuations on them.
//!
//! Rationals are `num_rational::BigRational`, which keeps values reduced with
//! a positive denominator. Their textual form is always `num/den`, so zero is
//! written `0/1`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{MnError, Result};

pub type Rat = BigRational;

/// Builds the rational `n/d`. Panics if `d == 0`.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat_big(n: BigInt) -> Rat {
    Rat::from_integer(n)
}

/// `1 / p^k` as a rational.
pub fn inv_pow(p: u64, k: u32) -> Rat {
    Rat::new(BigInt::one(), BigInt::from(p).pow(k))
}

/// Formats a rational as `num/den`.
pub fn fmt_rat(q: &Rat) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Parses `num/den` or a bare integer.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let bad = || MnError::InvalidInput(format!("not a rational: {s:?}"));
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
            if d.is_zero() {
                return Err(MnError::DivisionByZero);
            }
            Ok(Rat::new(n, d))
        }
        None => Ok(rat_big(BigInt::from_str(s).map_err(|_| bad())?)),
    }
}

/// Ceiling of a rational as `i64`.
pub fn ceil_i64(q: &Rat) -> i64 {
    q.ceil().to_integer().to_i64().expect("ceiling out of i64 range")
}

/// Floor of a rational as `i64`.
pub fn floor_i64(q: &Rat) -> i64 {
    q.floor().to_integer().to_i64().expect("floor out of i64 range")
}

/// A p-adic valuation of an exact rational: an integer or `+inf` for zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    pub fn add(self, other: Valuation) -> Valuation {
        match (self, other) {
            (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a + b),
            _ => Valuation::Infinite,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

/// Deterministic primality test by trial division; inputs here are small.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Rejects anything that is not an odd prime.
pub fn check_odd_prime(p: i64) -> Result<u64> {
    if p < 3 || p % 2 == 0 || !is_prime(p as u64) {
        return Err(MnError::InvalidPrime(p));
    }
    Ok(p as u64)
}

/// Multiplicity of `p` in a nonzero integer.
pub fn vp_int(n: &BigInt, p: u64) -> Valuation {
    if n.is_zero() {
        return Valuation::Infinite;
    }
    let pb = BigInt::from(p);
    let mut n = n.abs();
    let mut v = 0i64;
    loop {
        let (q, r) = n.div_rem(&pb);
        if !r.is_zero() {
            break;
        }
        n = q;
        v += 1;
    }
    Valuation::Finite(v)
}

/// `v_p(q)` for a rational `q`; `+inf` when `q = 0`.
///
/// Rejects `p < 3`, even `p` and composite `p`.
pub fn vp_rational(q: &Rat, p: i64) -> Result<Valuation> {
    let p = check_odd_prime(p)?;
    Ok(vp_rat_unchecked(q, p))
}

/// Same as [`vp_rational`] for a prime already known to be valid.
pub fn vp_rat_unchecked(q: &Rat, p: u64) -> Valuation {
    if q.is_zero() {
        return Valuation::Infinite;
    }
    let a = vp_int(q.numer(), p).finite().unwrap();
    let b = vp_int(q.denom(), p).finite().unwrap();
    Valuation::Finite(a - b)
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Residue of a `p`-integral rational modulo `m = p^s`, as an integer in `[0, m)`.
///
/// The denominator must be prime to `p`.
pub fn rat_mod(q: &Rat, p: u64, m: u128) -> Result<u128> {
    let mb = BigInt::from(m);
    let den = q.denom().mod_floor(&mb);
    if (q.denom() % BigInt::from(p)).is_zero() {
        return Err(MnError::Precondition(format!(
            "{} is not p-integral for p={p}",
            fmt_rat(q)
        )));
    }
    let inv = mod_inverse(&den, &mb)
        .ok_or_else(|| MnError::Internal("denominator not invertible".into()))?;
    let r = (q.numer().mod_floor(&mb) * inv).mod_floor(&mb);
    Ok(r.to_u128().unwrap())
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.extended_gcd(m);
    if !e.gcd.is_one() {
        return None;
    }
    Some(e.x.mod_floor(m))
}
