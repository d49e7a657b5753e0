//! Truncated Witt vectors `W_s(F_q)`, realised as `(Z/p^s)[y]/(lifted modulus)`.
//!
//! The lifted modulus uses the same small integer coefficients as the
//! finite-field modulus, which is enough because any monic lift of an
//! irreducible polynomial defines the unramified extension.

use std::sync::Arc;

use crate::error::{MnError, Result};
use crate::gfq::{FieldCtx, FqElem};

/// Largest `s` for which `p^s < 2^62`, so products fit in `u128`.
pub fn capacity(p: u64) -> u32 {
    let mut s = 0;
    let mut acc: u128 = 1;
    while acc * (p as u128) < (1u128 << 62) {
        acc *= p as u128;
        s += 1;
    }
    s
}

/// `a + b*y` with `a, b` in `[0, p^s)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct WittElem {
    pub a: u128,
    pub b: u128,
}

#[derive(Debug, Clone)]
pub struct WittCtx {
    pub field: Arc<FieldCtx>,
    pub s: u32,
    pub modulus: u128,
    teich: Arc<Vec<WittElem>>,
}

impl WittCtx {
    pub fn new(field: Arc<FieldCtx>, s: u32) -> Result<WittCtx> {
        if s == 0 || s > capacity(field.p) {
            return Err(MnError::InvalidInput(format!(
                "Witt precision s={s} outside 1..={}",
                capacity(field.p)
            )));
        }
        let modulus = (field.p as u128).pow(s);
        let mut ctx = WittCtx { field, s, modulus, teich: Arc::new(Vec::new()) };
        let table: Vec<WittElem> = ctx.field.elements().map(|a| ctx.teich_lift_iter(a).0).collect();
        ctx.teich = Arc::new(table);
        Ok(ctx)
    }

    /// Same ring at a lower precision, sharing the Teichmüller table.
    pub fn at_precision(&self, s: u32) -> WittCtx {
        assert!(s >= 1 && s <= self.s, "precision {s} outside 1..={}", self.s);
        WittCtx {
            field: self.field.clone(),
            s,
            modulus: (self.field.p as u128).pow(s),
            teich: self.teich.clone(),
        }
    }

    pub fn p(&self) -> u64 {
        self.field.p
    }

    pub fn reduce(&self, w: WittElem) -> WittElem {
        WittElem { a: w.a % self.modulus, b: w.b % self.modulus }
    }

    pub fn from_int(&self, n: i128) -> WittElem {
        WittElem { a: n.rem_euclid(self.modulus as i128) as u128, b: 0 }
    }

    /// The naive lift with the same small coefficients.
    pub fn naive_lift(&self, a: FqElem) -> WittElem {
        WittElem { a: a.c0 as u128, b: a.c1 as u128 }
    }

    pub fn add(&self, x: WittElem, y: WittElem) -> WittElem {
        let m = self.modulus;
        WittElem { a: (x.a % m + y.a % m) % m, b: (x.b % m + y.b % m) % m }
    }

    pub fn neg(&self, x: WittElem) -> WittElem {
        let m = self.modulus;
        WittElem { a: (m - x.a % m) % m, b: (m - x.b % m) % m }
    }

    pub fn sub(&self, x: WittElem, y: WittElem) -> WittElem {
        self.add(x, self.neg(y))
    }

    pub fn mul(&self, x: WittElem, y: WittElem) -> WittElem {
        let m = self.modulus;
        let (x0, x1, y0, y1) = (x.a % m, x.b % m, y.a % m, y.b % m);
        let hi = x1 * y1 % m;
        let (c0, c1) = self.field.modulus;
        let (c0, c1) = (c0 as u128 % m, c1 as u128 % m);
        // y^2 = -c1*y - c0
        let a = (x0 * y0 % m + hi * ((m - c0) % m)) % m;
        let b = ((x0 * y1 % m + x1 * y0 % m) % m + hi * ((m - c1) % m)) % m;
        WittElem { a, b }
    }

    pub fn pow(&self, x: WittElem, mut e: u64) -> WittElem {
        let mut base = x;
        let mut acc = self.from_int(1);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplies by `p^k`.
    pub fn mul_p_pow(&self, x: WittElem, k: u32) -> WittElem {
        if k >= self.s {
            return WittElem::default();
        }
        let f = (self.field.p as u128).pow(k);
        self.mul(x, WittElem { a: f, b: 0 })
    }

    /// Residue modulo `p`.
    pub fn residue(&self, x: WittElem) -> FqElem {
        self.field.elem((x.a % self.field.p as u128) as u64, (x.b % self.field.p as u128) as u64)
    }

    pub fn is_zero(&self, x: WittElem) -> bool {
        x.a % self.modulus == 0 && x.b % self.modulus == 0
    }

    /// Largest `k <= s` with `p^k | x`.
    pub fn valuation(&self, x: WittElem) -> u32 {
        let p = self.field.p as u128;
        let (mut a, mut b) = (x.a % self.modulus, x.b % self.modulus);
        let mut k = 0;
        while k < self.s && a % p == 0 && b % p == 0 {
            a /= p;
            b /= p;
            k += 1;
        }
        k
    }

    pub fn inv(&self, x: WittElem) -> Result<WittElem> {
        let r = self.residue(x);
        if r.is_zero() {
            return Err(MnError::NotInvertible("Witt element divisible by p".into()));
        }
        let mut y = self.naive_lift(self.field.inv(r)?);
        let two = self.from_int(2);
        // Each Newton step doubles the number of correct digits.
        let mut correct = 1;
        while correct < self.s {
            y = self.mul(y, self.sub(two, self.mul(x, y)));
            correct *= 2;
        }
        Ok(y)
    }

    /// Teichmüller lift by iterating `w <- w^q` from the naive lift, returning
    /// the lift and the number of iterations until it stopped changing.
    pub fn teich_lift_iter(&self, a: FqElem) -> (WittElem, u32) {
        let q = self.field.order();
        let mut w = self.naive_lift(a);
        for i in 0..=self.s {
            let next = self.pow(w, q);
            if next == w {
                return (w, i);
            }
            w = next;
        }
        unreachable!("Teichmüller iteration converges within s steps")
    }

    pub fn teich_lift(&self, a: FqElem) -> WittElem {
        self.reduce(self.teich[self.field.index(a) as usize])
    }

    /// Teichmüller digits `(c_0, .., c_(s-1))` with `w = sum tau(c_i) p^i`.
    pub fn teich_digits(&self, w: WittElem) -> Vec<FqElem> {
        let p = self.field.p as u128;
        let mut w = self.reduce(w);
        let mut m = self.modulus;
        let mut out = Vec::with_capacity(self.s as usize);
        for _ in 0..self.s {
            let c = self.residue(w);
            out.push(c);
            let t = self.teich[self.field.index(c) as usize];
            let (ta, tb) = (t.a % m, t.b % m);
            let a = (w.a + m - ta) % m;
            let b = (w.b + m - tb) % m;
            debug_assert!(a % p == 0 && b % p == 0);
            w = WittElem { a: a / p, b: b / p };
            m /= p;
        }
        out
    }

    /// Inverse of [`teich_digits`](Self::teich_digits).
    pub fn from_digits(&self, digits: &[FqElem]) -> WittElem {
        digits.iter().enumerate().fold(WittElem::default(), |acc, (i, &d)| {
            self.add(acc, self.mul_p_pow(self.teich_lift(d), i as u32))
        })
    }
}
