//! Finite fields `F_p` and `F_(p^2)`.
//!
//! `F_(p^2)` is `F_p[g]/(g^2 + c1*g + c0)` where the modulus defaults to the
//! lexicographically smallest monic irreducible quadratic, comparing the
//! coefficient tuple `(c1, c0)`. For `p = 3` that is `g^2 + 1`.
//!
//! Elements are enumerated as `c0 + c1*p`, so the order is
//! `0, 1, .., p-1, g, g+1, ..`; every "smallest" choice in the crate refers
//! to this order.

use std::fmt;

use crate::error::{MnError, Result};
use crate::exact_arith::check_odd_prime;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldCtx {
    pub p: u64,
    pub m: u32,
    /// `(c0, c1)` of the modulus `g^2 + c1*g + c0`; unused when `m = 1`.
    pub modulus: (u64, u64),
}

/// An element `c0 + c1*g`. For `m = 1` the `c1` part is always zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FqElem {
    pub c0: u32,
    pub c1: u32,
}

impl FqElem {
    pub const ZERO: FqElem = FqElem { c0: 0, c1: 0 };
    pub const ONE: FqElem = FqElem { c0: 1, c1: 0 };

    pub fn is_zero(self) -> bool {
        self.c0 == 0 && self.c1 == 0
    }
}

fn quadratic_is_irreducible(p: u64, c0: u64, c1: u64) -> bool {
    (0..p).all(|x| (x * x + c1 * x + c0) % p != 0)
}

impl FieldCtx {
    /// `F_p` (`m = 1`) or `F_(p^2)` (`m = 2`) with the default modulus.
    pub fn new(p: i64, m: u32) -> Result<FieldCtx> {
        let p = check_odd_prime(p)?;
        match m {
            1 => Ok(FieldCtx { p, m, modulus: (0, 0) }),
            2 => {
                let modulus = Self::irreducible_quadratics(p)
                    .next()
                    .expect("an irreducible quadratic always exists");
                Ok(FieldCtx { p, m, modulus })
            }
            _ => Err(MnError::InvalidInput(format!("field degree m={m} not in {{1,2}}"))),
        }
    }

    /// `F_(p^2)` with an explicit modulus `g^2 + c1*g + c0`.
    pub fn with_modulus(p: i64, c0: u64, c1: u64) -> Result<FieldCtx> {
        let p = check_odd_prime(p)?;
        if !quadratic_is_irreducible(p, c0 % p, c1 % p) {
            return Err(MnError::InvalidInput(format!(
                "g^2+{c1}*g+{c0} is reducible over F_{p}"
            )));
        }
        Ok(FieldCtx { p, m: 2, modulus: (c0 % p, c1 % p) })
    }

    /// All monic irreducible quadratics in lexicographic order of `(c1, c0)`.
    pub fn irreducible_quadratics(p: u64) -> impl Iterator<Item = (u64, u64)> {
        (0..p)
            .flat_map(move |c1| (0..p).map(move |c0| (c0, c1)))
            .filter(move |&(c0, c1)| quadratic_is_irreducible(p, c0, c1))
    }

    pub fn order(&self) -> u64 {
        self.p.pow(self.m)
    }

    pub fn from_int(&self, n: i64) -> FqElem {
        FqElem { c0: n.rem_euclid(self.p as i64) as u32, c1: 0 }
    }

    pub fn elem(&self, c0: u64, c1: u64) -> FqElem {
        let c1 = if self.m == 1 { 0 } else { c1 % self.p };
        FqElem { c0: (c0 % self.p) as u32, c1: c1 as u32 }
    }

    pub fn gen(&self) -> FqElem {
        self.elem(0, 1)
    }

    pub fn index(&self, a: FqElem) -> u64 {
        a.c0 as u64 + a.c1 as u64 * self.p
    }

    pub fn from_index(&self, i: u64) -> FqElem {
        self.elem(i % self.p, i / self.p)
    }

    /// Every element in enumeration order.
    pub fn elements(&self) -> impl Iterator<Item = FqElem> + '_ {
        (0..self.order()).map(move |i| self.from_index(i))
    }

    pub fn add(&self, a: FqElem, b: FqElem) -> FqElem {
        let p = self.p as u32;
        FqElem { c0: (a.c0 + b.c0) % p, c1: (a.c1 + b.c1) % p }
    }

    pub fn neg(&self, a: FqElem) -> FqElem {
        let p = self.p as u32;
        FqElem { c0: (p - a.c0) % p, c1: (p - a.c1) % p }
    }

    pub fn sub(&self, a: FqElem, b: FqElem) -> FqElem {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: FqElem, b: FqElem) -> FqElem {
        let p = self.p;
        let (a0, a1, b0, b1) = (a.c0 as u64, a.c1 as u64, b.c0 as u64, b.c1 as u64);
        // g^2 = -c1*g - c0
        let hi = a1 * b1 % p;
        let (m0, m1) = self.modulus;
        let c0 = (a0 * b0 + hi * (p - m0)) % p;
        let c1 = (a0 * b1 + a1 * b0 + hi * (p - m1)) % p;
        FqElem { c0: c0 as u32, c1: c1 as u32 }
    }

    pub fn pow(&self, a: FqElem, mut e: u64) -> FqElem {
        let mut base = a;
        let mut acc = FqElem::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: FqElem) -> Result<FqElem> {
        if a.is_zero() {
            return Err(MnError::DivisionByZero);
        }
        Ok(self.pow(a, self.order() - 2))
    }

    pub fn div(&self, a: FqElem, b: FqElem) -> Result<FqElem> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn frobenius(&self, a: FqElem) -> FqElem {
        self.pow(a, self.p)
    }

    /// The unique `p`-th root. Frobenius has order `m`, so it is `a^(p^(m-1))`.
    pub fn pth_root(&self, a: FqElem) -> FqElem {
        self.pow(a, self.p.pow(self.m - 1))
    }

    /// Multiplicative order of a nonzero element.
    pub fn mult_order(&self, a: FqElem) -> Result<u64> {
        if a.is_zero() {
            return Err(MnError::DivisionByZero);
        }
        let n = self.order() - 1;
        let mut best = n;
        for d in 1..=n {
            if n % d == 0 && self.pow(a, d) == FqElem::ONE {
                best = d;
                break;
            }
        }
        Ok(best)
    }

    /// Smallest element (in enumeration order) of exact multiplicative order `k`.
    pub fn smallest_of_order(&self, k: u64) -> Option<FqElem> {
        self.elements().skip(1).find(|&a| self.mult_order(a).ok() == Some(k))
    }

    /// Textual form: `2*g+1`, `g`, `0`.
    pub fn format(&self, a: FqElem) -> String {
        match (a.c1, a.c0) {
            (0, c0) => format!("{c0}"),
            (c1, c0) => {
                let g = if c1 == 1 { "g".to_string() } else { format!("{c1}*g") };
                if c0 == 0 {
                    g
                } else {
                    format!("{g}+{c0}")
                }
            }
        }
    }

    pub fn parse(&self, s: &str) -> Result<FqElem> {
        let bad = || MnError::InvalidInput(format!("not a field element: {s:?}"));
        let (mut c0, mut c1) = (0u64, 0u64);
        for part in s.trim().split('+') {
            let part = part.trim();
            if let Some(coef) = part.strip_suffix('g') {
                let coef = coef.trim_end_matches('*');
                c1 += if coef.is_empty() { 1 } else { coef.parse::<u64>().map_err(|_| bad())? };
            } else {
                c0 += part.parse::<u64>().map_err(|_| bad())?;
            }
        }
        if self.m == 1 && c1 % self.p != 0 {
            return Err(bad());
        }
        Ok(self.elem(c0, c1))
    }

    /// The modulus as text, e.g. `g^2+1`; `F_p` contexts print `g`.
    pub fn modulus_string(&self) -> String {
        if self.m == 1 {
            return "g".into();
        }
        let (c0, c1) = self.modulus;
        let mut s = "g^2".to_string();
        if c1 != 0 {
            s += &if c1 == 1 { "+g".to_string() } else { format!("+{c1}*g") };
        }
        if c0 != 0 {
            s += &format!("+{c0}");
        }
        s
    }

    /// Evaluates a polynomial given low-to-high.
    pub fn poly_eval(&self, poly: &[FqElem], x: FqElem) -> FqElem {
        poly.iter().rev().fold(FqElem::ZERO, |acc, &c| self.add(self.mul(acc, x), c))
    }

    /// Divides by `(T - r)`; returns the quotient when the remainder is zero.
    fn poly_div_linear(&self, poly: &[FqElem], r: FqElem) -> Option<Vec<FqElem>> {
        let n = poly.len();
        if n < 2 {
            return None;
        }
        let mut q = vec![FqElem::ZERO; n - 1];
        let mut carry = FqElem::ZERO;
        for i in (1..n).rev() {
            carry = self.add(poly[i], self.mul(carry, r));
            q[i - 1] = carry;
        }
        let rem = self.add(poly[0], self.mul(carry, r));
        rem.is_zero().then_some(q)
    }

    /// Distinct roots of a polynomial (low-to-high coefficients) in
    /// enumeration order, found by exhaustive evaluation.
    pub fn poly_roots(&self, poly: &[FqElem]) -> Result<Vec<FqElem>> {
        let poly = trim(poly);
        if poly.is_empty() {
            return Err(MnError::InvalidInput("zero polynomial has every element as root".into()));
        }
        Ok(self.elements().filter(|&x| self.poly_eval(&poly, x).is_zero()).collect())
    }

    /// Roots with multiplicity, plus the degree left over by factors that
    /// have no root in this field.
    pub fn poly_roots_with_multiplicity(&self, poly: &[FqElem]) -> Result<(Vec<(FqElem, usize)>, usize)> {
        let roots = self.poly_roots(poly)?;
        let mut rest = trim(poly);
        let mut out = Vec::new();
        for r in roots {
            let mut mult = 0;
            while let Some(q) = self.poly_div_linear(&rest, r) {
                rest = q;
                mult += 1;
            }
            out.push((r, mult));
        }
        Ok((out, rest.len() - 1))
    }
}

fn trim(poly: &[FqElem]) -> Vec<FqElem> {
    let mut v = poly.to_vec();
    while v.last().is_some_and(|c| c.is_zero()) {
        v.pop();
    }
    v
}

impl fmt::Display for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.m == 1 {
            write!(f, "F_{}", self.p)
        } else {
            write!(f, "F_{}^2[{}]", self.p, self.modulus_string())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_moduli() {
        assert_eq!(FieldCtx::new(3, 2).unwrap().modulus_string(), "g^2+1");
        assert_eq!(FieldCtx::new(5, 2).unwrap().modulus_string(), "g^2+2");
        assert!(FieldCtx::new(4, 2).is_err());
    }

    #[test]
    fn text_forms() {
        let f = FieldCtx::new(3, 2).unwrap();
        for (s, e) in [("2*g+1", f.elem(1, 2)), ("0", FqElem::ZERO), ("g", f.gen()), ("2*g", f.elem(0, 2))] {
            assert_eq!(f.format(e), s);
            assert_eq!(f.parse(s).unwrap(), e);
        }
    }

    #[test]
    fn orders() {
        let f3 = FieldCtx::new(3, 2).unwrap();
        assert_eq!(f3.mult_order(f3.gen()).unwrap(), 4);
        let f5 = FieldCtx::new(5, 2).unwrap();
        assert!(f5.elements().any(|a| f5.mult_order(a).ok() == Some(24)));
        assert_eq!(f3.inv(FqElem::ZERO), Err(MnError::DivisionByZero));
    }

    #[test]
    fn roots() {
        let f1 = FieldCtx::new(3, 1).unwrap();
        let m1 = f1.from_int(-1);
        assert_eq!(f1.poly_roots(&[m1, FqElem::ZERO, FqElem::ONE]).unwrap(), vec![f1.from_int(1), f1.from_int(2)]);
        // (T-1)^6 = T^6 - 2T^3 + 1 in characteristic 3
        let mut p6 = vec![FqElem::ZERO; 7];
        p6[0] = FqElem::ONE;
        p6[3] = f1.from_int(-2);
        p6[6] = FqElem::ONE;
        assert_eq!(f1.poly_roots(&p6).unwrap(), vec![FqElem::ONE]);
        let t2p1 = [FqElem::ONE, FqElem::ZERO, FqElem::ONE];
        assert!(f1.poly_roots(&t2p1).unwrap().is_empty());
        let f2 = FieldCtx::new(3, 2).unwrap();
        assert_eq!(f2.poly_roots(&t2p1).unwrap(), vec![f2.gen(), f2.elem(0, 2)]);
        let (mult, rest) = f1.poly_roots_with_multiplicity(&p6).unwrap();
        assert_eq!((mult, rest), (vec![(FqElem::ONE, 6)], 0));
    }
}
