//! Truncated elements of the Mal'cev–Neumann field `L_p`.
//!
//! An element is a finite list of terms `[d] p^x` with `d` a nonzero digit of
//! `F_(p^2)` (`[d]` its Teichmüller lift) and `x` rational, together with a
//! truncation `t` meaning "plus an unknown error of valuation `>= t`". The
//! canonical form has strictly increasing exponents, all below `t`.
//!
//! Carries only move a digit from `x` to `x + 1`, so terms whose exponents
//! differ by an integer form a single Witt number in `W(F_(p^2))`. Sums are
//! computed per such coset and re-expanded into Teichmüller digits, which is
//! exact: digit `i` of a Witt number depends only on it modulo `p^(i+1)`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{MnError, Result};
use crate::exact_arith::{binomial, ceil_i64, fmt_rat, parse_rat, rat_int, rat_mod, vp_int, vp_rat_unchecked, Rat};
use crate::gfq::{FieldCtx, FqElem};
use crate::witt::{capacity, WittCtx, WittElem};

/// Shared arithmetic context: the residue field and the guard-digit policy.
#[derive(Clone)]
pub struct MnCtx(Arc<Inner>);

struct Inner {
    field: Arc<FieldCtx>,
    witt: WittCtx,
    guard: u32,
}

impl fmt::Debug for MnCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MnCtx({}, guard={})", self.0.field, self.0.guard)
    }
}

impl PartialEq for MnCtx {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (*self.0.field == *other.0.field && self.0.guard == other.0.guard)
    }
}

impl MnCtx {
    /// Context over `F_(p^2)` with the default modulus and two guard digits.
    pub fn new(p: i64) -> Result<MnCtx> {
        Self::with_field(FieldCtx::new(p, 2)?, 2)
    }

    pub fn with_field(field: FieldCtx, guard: u32) -> Result<MnCtx> {
        let field = Arc::new(field);
        let witt = WittCtx::new(field.clone(), capacity(field.p))?;
        Ok(MnCtx(Arc::new(Inner { field, witt, guard })))
    }

    pub fn p(&self) -> u64 {
        self.0.field.p
    }

    pub fn field(&self) -> &FieldCtx {
        &self.0.field
    }

    pub fn witt(&self) -> &WittCtx {
        &self.0.witt
    }

    pub fn guard(&self) -> u32 {
        self.0.guard
    }
}

/// A term coefficient before normalisation.
#[derive(Debug, Clone, Copy)]
pub enum Raw {
    Digit(FqElem),
    /// A Witt number exact modulo `p^capacity`.
    Witt(WittElem),
}

#[derive(Clone)]
pub struct MNElement {
    ctx: MnCtx,
    terms: Vec<(Rat, FqElem)>,
    trunc: Rat,
}

impl PartialEq for MNElement {
    fn eq(&self, other: &Self) -> bool {
        self.ctx == other.ctx && self.trunc == other.trunc && self.terms == other.terms
    }
}

impl fmt::Debug for MNElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for MNElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.ctx.p();
        for (x, d) in &self.terms {
            write!(f, "[{}]*{p}^({}) + ", self.ctx.field().format(*d), fmt_rat(x))?;
        }
        write!(f, "O({p}^({}))", fmt_rat(&self.trunc))
    }
}

fn frac_floor(x: &Rat) -> (Rat, i64) {
    let fl = x.floor();
    (x - &fl, fl.to_integer().to_i64().expect("exponent out of range"))
}

/// Builds the canonical element from raw terms: the carry normalisation.
pub fn mn_normalize(ctx: &MnCtx, raw: Vec<(Rat, Raw)>, trunc: Rat) -> MNElement {
    let mut cosets: BTreeMap<Rat, Vec<(i64, Raw)>> = BTreeMap::new();
    for (x, c) in raw {
        if x >= trunc {
            continue;
        }
        if let Raw::Digit(d) = c {
            if d.is_zero() {
                continue;
            }
        }
        let (f, i) = frac_floor(&x);
        cosets.entry(f).or_default().push((i, c));
    }
    let cap = ctx.witt().s;
    let p = ctx.p();
    let mut terms = Vec::new();
    for (f, entries) in cosets {
        if entries.len() == 1 {
            if let (i, Raw::Digit(d)) = entries[0] {
                terms.push((&f + rat_int(i), d));
                continue;
            }
        }
        let base = entries.iter().map(|e| e.0).min().unwrap();
        let start = &f + rat_int(base);
        let needed = ceil_i64(&(&trunc - &start));
        if needed <= 0 {
            continue;
        }
        let s = needed as u64 + ctx.guard() as u64;
        let s = s.min(cap as u64) as u32;
        assert!(
            needed as u64 <= cap as u64,
            "{}",
            MnError::PrecisionTooLow(format!("coset needs {needed} digits, Witt capacity for p={p} is {cap}"))
        );
        let w = ctx.witt().at_precision(s);
        let mut acc = WittElem::default();
        for (i, c) in entries {
            let off = (i - base) as u32;
            if off >= s {
                continue;
            }
            let val = match c {
                Raw::Digit(d) => w.teich_lift(d),
                Raw::Witt(x) => w.reduce(x),
            };
            acc = w.add(acc, w.mul_p_pow(val, off));
        }
        for (j, d) in w.teich_digits(acc).into_iter().enumerate() {
            if j as i64 >= needed {
                break;
            }
            if !d.is_zero() {
                terms.push((&start + rat_int(j as i64), d));
            }
        }
    }
    terms.sort_by(|a, b| a.0.cmp(&b.0));
    MNElement { ctx: ctx.clone(), terms, trunc }
}

impl MNElement {
    pub fn zero(ctx: &MnCtx, trunc: Rat) -> MNElement {
        MNElement { ctx: ctx.clone(), terms: Vec::new(), trunc }
    }

    pub fn one(ctx: &MnCtx, trunc: Rat) -> MNElement {
        Self::monomial(ctx, Rat::zero(), FqElem::ONE, trunc)
    }

    /// `[d] p^x + O(p^trunc)`.
    pub fn monomial(ctx: &MnCtx, x: Rat, d: FqElem, trunc: Rat) -> MNElement {
        let terms = if d.is_zero() || x >= trunc { vec![] } else { vec![(x, d)] };
        MNElement { ctx: ctx.clone(), terms, trunc }
    }

    /// Sum of Teichmüller terms, normalised.
    pub fn from_terms(ctx: &MnCtx, terms: Vec<(Rat, FqElem)>, trunc: Rat) -> MNElement {
        mn_normalize(ctx, terms.into_iter().map(|(x, d)| (x, Raw::Digit(d))).collect(), trunc)
    }

    /// Builds from terms that are already canonical, checking the invariants.
    pub fn from_canonical(ctx: &MnCtx, terms: Vec<(Rat, FqElem)>, trunc: Rat) -> Result<MNElement> {
        for w in terms.windows(2) {
            if w[0].0 >= w[1].0 {
                return Err(MnError::InvalidInput("exponents must strictly increase".into()));
            }
        }
        if terms.iter().any(|(x, d)| d.is_zero() || *x >= trunc) {
            return Err(MnError::InvalidInput("zero digit or exponent at/above trunc".into()));
        }
        Ok(MNElement { ctx: ctx.clone(), terms, trunc })
    }

    /// The embedding of a rational number.
    pub fn from_rational(ctx: &MnCtx, q: &Rat, trunc: Rat) -> MNElement {
        if q.is_zero() {
            return Self::zero(ctx, trunc);
        }
        let p = ctx.p();
        let v = vp_rat_unchecked(q, p).finite().unwrap();
        let pv = BigInt::from(p).pow(v.unsigned_abs() as u32);
        let u = if v >= 0 { q / Rat::from_integer(pv) } else { q * Rat::from_integer(pv) };
        let w = ctx.witt();
        let r = rat_mod(&u, p, w.modulus).expect("unit part is p-integral");
        mn_normalize(ctx, vec![(rat_int(v), Raw::Witt(WittElem { a: r, b: 0 }))], trunc)
    }

    pub fn from_int(ctx: &MnCtx, n: i64, trunc: Rat) -> MNElement {
        Self::from_rational(ctx, &rat_int(n), trunc)
    }

    pub fn ctx(&self) -> &MnCtx {
        &self.ctx
    }

    pub fn terms(&self) -> &[(Rat, FqElem)] {
        &self.terms
    }

    pub fn trunc(&self) -> &Rat {
        &self.trunc
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Exact valuation; an element with no terms has none.
    pub fn valuation(&self) -> Result<Rat> {
        self.terms
            .first()
            .map(|t| t.0.clone())
            .ok_or_else(|| MnError::PrecisionTooLow("valuation of an element with no known terms".into()))
    }

    /// Valuation if known, otherwise the truncation (a lower bound).
    pub fn v_lb(&self) -> Rat {
        self.terms.first().map(|t| t.0.clone()).unwrap_or_else(|| self.trunc.clone())
    }

    /// Digit at exponent `x`.
    pub fn coeff_at(&self, x: &Rat) -> Result<FqElem> {
        if *x >= self.trunc {
            return Err(MnError::OutOfWindow);
        }
        Ok(self.terms.iter().find(|t| t.0 == *x).map(|t| t.1).unwrap_or(FqElem::ZERO))
    }

    /// Lowers the truncation to `min(trunc, t)`.
    pub fn truncate(&self, t: &Rat) -> MNElement {
        if *t >= self.trunc {
            return self.clone();
        }
        MNElement {
            ctx: self.ctx.clone(),
            terms: self.terms.iter().filter(|x| x.0 < *t).cloned().collect(),
            trunc: t.clone(),
        }
    }

    /// Treats the finite sum of terms as exact and declares it to precision
    /// `t`. Only sound when the caller knows the represented value is exactly
    /// that finite sum.
    pub fn exact_to(&self, t: &Rat) -> MNElement {
        if *t <= self.trunc {
            return self.truncate(t);
        }
        MNElement { ctx: self.ctx.clone(), terms: self.terms.clone(), trunc: t.clone() }
    }

    fn same_ctx(&self, other: &MNElement) {
        assert!(self.ctx == other.ctx, "elements from different contexts");
    }

    pub fn neg(&self) -> MNElement {
        // [-d] = -[d] for odd p, so negation never carries.
        let f = self.ctx.field();
        MNElement {
            ctx: self.ctx.clone(),
            terms: self.terms.iter().map(|(x, d)| (x.clone(), f.neg(*d))).collect(),
            trunc: self.trunc.clone(),
        }
    }

    pub fn add(&self, other: &MNElement) -> MNElement {
        self.same_ctx(other);
        let trunc = (&self.trunc).min(&other.trunc).clone();
        let raw = self
            .terms
            .iter()
            .chain(other.terms.iter())
            .map(|(x, d)| (x.clone(), Raw::Digit(*d)))
            .collect();
        mn_normalize(&self.ctx, raw, trunc)
    }

    pub fn sub(&self, other: &MNElement) -> MNElement {
        self.add(&other.neg())
    }

    /// Product; the truncation is `min(t_a + v(b), t_b + v(a))`, using the
    /// truncation as the valuation bound of an element with no terms.
    pub fn mul(&self, other: &MNElement) -> MNElement {
        self.same_ctx(other);
        let trunc = (&self.trunc + other.v_lb()).min(&other.trunc + self.v_lb());
        let f = self.ctx.field();
        let mut raw = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (x, c) in &self.terms {
            for (y, d) in &other.terms {
                let e = x + y;
                if e < trunc {
                    raw.push((e, Raw::Digit(f.mul(*c, *d))));
                }
            }
        }
        mn_normalize(&self.ctx, raw, trunc)
    }

    /// Multiplies by the exact monomial `[d] p^x`; no carries occur.
    pub fn mul_monomial(&self, x: &Rat, d: FqElem) -> MNElement {
        let f = self.ctx.field();
        if d.is_zero() {
            return MNElement::zero(&self.ctx, &self.trunc + x);
        }
        MNElement {
            ctx: self.ctx.clone(),
            terms: self.terms.iter().map(|(y, c)| (y + x, f.mul(*c, d))).collect(),
            trunc: &self.trunc + x,
        }
    }

    /// Multiplies by `p^x`.
    pub fn shift(&self, x: &Rat) -> MNElement {
        self.mul_monomial(x, FqElem::ONE)
    }

    /// Multiplies by an exact rational, keeping the relative precision.
    pub fn mul_rat(&self, q: &Rat) -> MNElement {
        if q.is_zero() {
            return MNElement::zero(&self.ctx, self.trunc.clone().max(self.v_lb() + Rat::one()));
        }
        let vq = rat_int(vp_rat_unchecked(q, self.ctx.p()).finite().unwrap());
        let tq = &self.trunc - self.v_lb() + &vq;
        self.mul(&MNElement::from_rational(&self.ctx, q, tq))
    }

    pub fn add_rat(&self, q: &Rat) -> MNElement {
        self.add(&MNElement::from_rational(&self.ctx, q, self.trunc.clone()))
    }

    /// Multiplicative inverse through the geometric series.
    /// With `v = v(a)` the output truncation is `trunc - 2v`.
    pub fn inv(&self) -> Result<MNElement> {
        let (v, d) = self
            .terms
            .first()
            .cloned()
            .ok_or_else(|| MnError::NotInvertible("element has no known terms".into()))?;
        let f = self.ctx.field();
        let dinv = f.inv(d)?;
        let u = self.mul_monomial(&-&v, dinv);
        let tu = u.trunc.clone();
        let eps = u.sub(&MNElement::one(&self.ctx, tu.clone()));
        let ve = eps.v_lb();
        if ve <= Rat::zero() {
            return Err(MnError::Internal("leading term did not normalise".into()));
        }
        let n = ceil_i64(&(&tu / &ve));
        let one = MNElement::one(&self.ctx, tu.clone());
        let mut s = one.clone();
        for _ in 0..n {
            s = one.sub(&eps.mul(&s));
        }
        Ok(s.truncate(&tu).mul_monomial(&-&v, dinv))
    }

    /// `a^k` for `k >= 0`. Writing `a = x + O(p^t)` with `v(x) >= v`, the
    /// truncation is `min_j (v_p(C(k,j)) + (k-j) v + j t)`, which is sharper
    /// than repeated multiplication whenever `p | k`.
    pub fn pow(&self, k: u64) -> MNElement {
        if k == 0 {
            return MNElement::one(&self.ctx, self.trunc.clone().max(Rat::one()));
        }
        let v = self.v_lb();
        let t = self.trunc.clone();
        let target = pow_trunc(self.ctx.p(), k, &v, &t);
        let rep = self.exact_to(&(&target - &v * rat_int(k as i64 - 1)));
        pow_by_squaring(&rep, k, |a, b| a.mul(b)).truncate(&target)
    }

    /// `a^k` for any integer `k`; negative powers need an exact valuation.
    pub fn pow_i(&self, k: i64) -> Result<MNElement> {
        if k >= 0 {
            Ok(self.pow(k as u64))
        } else {
            Ok(self.inv()?.pow(k.unsigned_abs()))
        }
    }

    /// The unique `B = sum [a_g^(1/p)] p^(g/p)` over the terms `g < 1`;
    /// it satisfies `v(B^p - a) >= min(1, trunc)`.
    ///
    /// Requires every term below 1 to have nonnegative exponent.
    pub fn pth_root(&self) -> Result<MNElement> {
        let p = self.ctx.p();
        let one = Rat::one();
        if self.terms.iter().any(|(x, _)| *x < Rat::zero()) {
            return Err(MnError::Precondition("pth_root needs support in [0, 1)".into()));
        }
        let f = self.ctx.field();
        let pr = rat_int(p as i64);
        let terms: Vec<_> = self
            .terms
            .iter()
            .filter(|(x, _)| *x < one)
            .map(|(x, d)| (x / &pr, f.pth_root(*d)))
            .collect();
        let t_in = (&self.trunc).min(&one).clone();
        let b = MNElement { ctx: self.ctx.clone(), terms, trunc: &t_in / &pr };
        let diff = b.exact_to(&t_in).pow(p).sub(&self.truncate(&t_in));
        if !diff.is_empty() {
            return Err(MnError::Internal(format!("p-th root post-condition failed: {diff}")));
        }
        Ok(b)
    }

    pub fn to_json(&self) -> Value {
        let f = self.ctx.field();
        json!({
            "p": self.ctx.p(),
            "modulus": f.modulus_string(),
            "trunc": fmt_rat(&self.trunc),
            "terms": self.terms.iter().map(|(x, d)| json!({"exp": fmt_rat(x), "digit": f.format(*d)})).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(ctx: &MnCtx, v: &Value) -> Result<MNElement> {
        let bad = |m: &str| MnError::InvalidInput(format!("bad element JSON: {m}"));
        if v["p"].as_u64() != Some(ctx.p()) {
            return Err(bad("prime mismatch"));
        }
        if v["modulus"].as_str() != Some(&ctx.field().modulus_string()) {
            return Err(bad("modulus mismatch"));
        }
        let trunc = parse_rat(v["trunc"].as_str().ok_or_else(|| bad("trunc"))?)?;
        let mut terms = Vec::new();
        for t in v["terms"].as_array().ok_or_else(|| bad("terms"))? {
            let x = parse_rat(t["exp"].as_str().ok_or_else(|| bad("exp"))?)?;
            let d = ctx.field().parse(t["digit"].as_str().ok_or_else(|| bad("digit"))?)?;
            terms.push((x, d));
        }
        MNElement::from_canonical(ctx, terms, trunc)
    }
}

/// Truncation of `(x + O(p^t))^k` when `v(x) >= v`.
pub fn pow_trunc(p: u64, k: u64, v: &Rat, t: &Rat) -> Rat {
    (1..=k)
        .map(|j| {
            let c = vp_int(&binomial(k, j), p).finite().unwrap();
            rat_int(c) + v * rat_int((k - j) as i64) + t * rat_int(j as i64)
        })
        .min()
        .unwrap()
}

/// Square-and-multiply for any associative product.
pub fn pow_by_squaring<T: Clone>(x: &T, k: u64, mul: impl Fn(&T, &T) -> T) -> T {
    assert!(k >= 1);
    let mut base = x.clone();
    let mut acc: Option<T> = None;
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            acc = Some(match acc {
                None => base.clone(),
                Some(a) => mul(&a, &base),
            });
        }
        e >>= 1;
        if e > 0 {
            base = mul(&base, &base);
        }
    }
    acc.unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_arith::rat;

    fn c3() -> MnCtx {
        MnCtx::new(3).unwrap()
    }

    #[test]
    fn normalize_examples() {
        let ctx = c3();
        let w = ctx.witt();
        let e = mn_normalize(&ctx, vec![(rat(0, 1), Raw::Witt(w.from_int(4)))], rat(3, 1));
        assert_eq!(e.terms(), &[(rat(0, 1), FqElem::ONE), (rat(1, 1), FqElem::ONE)]);
        let c5 = MnCtx::new(5).unwrap();
        let e = mn_normalize(&c5, vec![(rat(0, 1), Raw::Witt(c5.witt().from_int(2)))], rat(2, 1));
        let f = c5.field();
        assert_eq!(e.terms(), &[(rat(0, 1), f.from_int(2)), (rat(1, 1), f.from_int(4))]);
    }

    #[test]
    fn add_cancels() {
        let ctx = c3();
        let f = ctx.field();
        let a = MNElement::monomial(&ctx, rat(0, 1), FqElem::ONE, rat(2, 1));
        let b = MNElement::monomial(&ctx, rat(0, 1), f.from_int(2), rat(2, 1));
        assert!(a.add(&b).is_empty());
        let twice = b.add(&b);
        // [2]+[2] = -2 = 7 mod 9 = [1] + [2]*3
        assert_eq!(twice.terms(), &[(rat(0, 1), FqElem::ONE), (rat(1, 1), f.from_int(2))]);
    }

    #[test]
    fn mul_example() {
        let ctx = c3();
        let f = ctx.field();
        let a = MNElement::from_terms(&ctx, vec![(rat(0, 1), FqElem::ONE), (rat(1, 2), FqElem::ONE)], rat(2, 1));
        let sq = a.mul(&a);
        assert_eq!(
            sq.terms(),
            &[
                (rat(0, 1), FqElem::ONE),
                (rat(1, 2), f.from_int(2)),
                (rat(1, 1), FqElem::ONE),
                (rat(3, 2), FqElem::ONE)
            ]
        );
    }

    #[test]
    fn inv_example() {
        let ctx = c3();
        let a = MNElement::from_int(&ctx, -2, rat(3, 1));
        let inv = a.inv().unwrap();
        assert_eq!(inv, MNElement::from_rational(&ctx, &rat(-1, 2), rat(3, 1)));
        let one_minus_p = MNElement::from_int(&ctx, 1 - 3, rat(3, 1));
        let g = one_minus_p.inv().unwrap();
        let expect = MNElement::from_int(&ctx, 1 + 3 + 9, rat(3, 1));
        assert_eq!(g, expect);
        assert!(MNElement::zero(&ctx, rat(1, 1)).inv().is_err());
    }

    #[test]
    fn coeff_window() {
        let ctx = c3();
        let a = MNElement::one(&ctx, rat(1, 1));
        assert_eq!(a.coeff_at(&rat(0, 1)).unwrap(), FqElem::ONE);
        assert_eq!(a.coeff_at(&rat(1, 1)), Err(MnError::OutOfWindow));
    }

    #[test]
    fn pth_root_example() {
        let ctx = c3();
        let f = ctx.field();
        let a = MNElement::monomial(&ctx, rat(1, 9), f.from_int(2), rat(1, 1));
        let b = a.pth_root().unwrap();
        assert_eq!(b.terms(), &[(rat(1, 27), f.from_int(2))]);
        assert_eq!(b.trunc(), &rat(1, 3));
    }

    #[test]
    fn json_roundtrip() {
        let ctx = c3();
        let f = ctx.field();
        let a = MNElement::from_terms(&ctx, vec![(rat(-1, 9), FqElem::ONE), (rat(1, 6), f.gen())], rat(2, 3));
        let v = a.to_json();
        assert_eq!(
            v.to_string(),
            r#"{"p":3,"modulus":"g^2+1","trunc":"2/3","terms":[{"exp":"-1/9","digit":"1"},{"exp":"1/6","digit":"g"}]}"#
        );
        assert_eq!(MNElement::from_json(&ctx, &v).unwrap(), a);
    }
}
