//! Symbolic arithmetic with the tails `sigma_n = sum_{k >= n} p^(-1/p^k)`.
//!
//! A [`SigmaElement`] at level `n` is `sum_{j<p} c_j sigma_n^j + O(p^t)` with
//! Mal'cev–Neumann coefficients. Two exact facts drive the calculus:
//!
//! * shift: `sigma_n = p^(-1/p^n) + sigma_(n+1)`;
//! * rewrite: `sigma_n^p = p^(-1/p^(n-1)) + sigma_n + O(p^(1 - 1/p^(n-1)))`.
//!
//! Because `v(sigma_n) = -1/p^n`, the coefficient `c_j` is kept to precision
//! `t + j/p^n`, so every summand `c_j sigma_n^j` is known modulo `p^t`.

use std::fmt;

use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::error::{MnError, Result};
use crate::exact_arith::{binomial, ceil_i64, fmt_rat, inv_pow, parse_rat, rat_big, rat_int, Rat};
use crate::gfq::FqElem;
use crate::mn_series::{pow_by_squaring, pow_trunc, MNElement, MnCtx};

#[derive(Clone, PartialEq)]
pub struct SigmaElement {
    level: u32,
    coeffs: Vec<MNElement>,
    trunc: Rat,
}

/// Valuation of a sigma element: the minimum over `v(c_j) - j/p^n`, exact
/// when a single summand attains it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SigValuation {
    pub value: Rat,
    pub exact: bool,
}

/// Result of a componentwise congruence test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Congruence {
    pub holds: bool,
    /// Certified lower bound on `v(a - b)`.
    pub achieved: Rat,
    pub level: u32,
}

impl fmt::Debug for SigmaElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for SigmaElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.ctx().p();
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_empty() {
                continue;
            }
            let terms: Vec<String> = c
                .terms()
                .iter()
                .map(|(x, d)| format!("[{}]*{p}^({})", self.ctx().field().format(*d), fmt_rat(x)))
                .collect();
            write!(f, "({})", terms.join(" + "))?;
            if j > 0 {
                write!(f, "*sigma_{}^{j}", self.level)?;
            }
            write!(f, " + ")?;
        }
        write!(f, "O({p}^({}))", fmt_rat(&self.trunc))
    }
}

impl SigmaElement {
    /// Builds an element from coefficients `c_0, c_1, ..` (at most `p`).
    /// The truncation drops to whatever the coefficients can support.
    pub fn new(level: u32, coeffs: Vec<MNElement>, trunc: Rat) -> Result<SigmaElement> {
        if level == 0 {
            return Err(MnError::InvalidInput("sigma level must be >= 1".into()));
        }
        let ctx = coeffs
            .first()
            .ok_or_else(|| MnError::InvalidInput("at least one coefficient required".into()))?
            .ctx()
            .clone();
        let p = ctx.p() as usize;
        if coeffs.len() > p {
            return Err(MnError::InvalidInput(format!("{} coefficients exceed p={p}", coeffs.len())));
        }
        let step = inv_pow(p as u64, level);
        let mut t = trunc;
        for (j, c) in coeffs.iter().enumerate() {
            let support = c.trunc() - &step * rat_int(j as i64);
            if support < t {
                t = support;
            }
        }
        let mut out = Vec::with_capacity(p);
        for j in 0..p {
            let bound = &t + &step * rat_int(j as i64);
            out.push(match coeffs.get(j) {
                Some(c) => c.truncate(&bound),
                None => MNElement::zero(&ctx, bound),
            });
        }
        Ok(SigmaElement { level, coeffs: out, trunc: t })
    }

    /// A constant, viewed at the given level.
    pub fn from_mn(a: &MNElement, level: u32) -> SigmaElement {
        Self::new(level, vec![a.clone()], a.trunc().clone()).expect("valid level")
    }

    /// `sigma_n` itself, to precision `trunc`.
    pub fn sigma(ctx: &MnCtx, level: u32, trunc: Rat) -> Result<SigmaElement> {
        let step = inv_pow(ctx.p(), level);
        let c0 = MNElement::zero(ctx, trunc.clone());
        let c1 = MNElement::one(ctx, &trunc + &step);
        Self::new(level, vec![c0, c1], trunc)
    }

    pub fn ctx(&self) -> &MnCtx {
        self.coeffs[0].ctx()
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn coeffs(&self) -> &[MNElement] {
        &self.coeffs
    }

    pub fn trunc(&self) -> &Rat {
        &self.trunc
    }

    fn step(&self) -> Rat {
        inv_pow(self.ctx().p(), self.level)
    }

    /// Drops the truncation to `min(trunc, t)`.
    pub fn truncate(&self, t: &Rat) -> SigmaElement {
        if *t >= self.trunc {
            return self.clone();
        }
        Self::new(self.level, self.coeffs.clone(), t.clone()).unwrap()
    }

    /// Declares the symbolic expression exact up to `t` (see [`MNElement::exact_to`]).
    pub fn exact_to(&self, t: &Rat) -> SigmaElement {
        let step = self.step();
        let coeffs =
            self.coeffs.iter().enumerate().map(|(j, c)| c.exact_to(&(t + &step * rat_int(j as i64)))).collect();
        Self::new(self.level, coeffs, t.clone()).unwrap()
    }

    /// Rewrites at level `to >= level` with `sigma_n = p^(-1/p^n) + sigma_(n+1)`.
    pub fn level_shift(&self, to: u32) -> Result<SigmaElement> {
        if to < self.level {
            return Err(MnError::LevelDownshift { from: self.level, to });
        }
        let mut cur = self.clone();
        while cur.level < to {
            cur = cur.shift_once();
        }
        Ok(cur)
    }

    fn shift_once(&self) -> SigmaElement {
        let p = self.ctx().p() as usize;
        let step = self.step();
        let mut out = Vec::with_capacity(p);
        for t in 0..p {
            let mut acc = self.coeffs[t].clone();
            for j in (t + 1)..p {
                if self.coeffs[j].is_empty() {
                    let bound = self.coeffs[j].trunc() - &step * rat_int((j - t) as i64);
                    acc = acc.truncate(&bound);
                    continue;
                }
                let c = rat_big(binomial(j as u64, t as u64));
                let term = self.coeffs[j].mul_rat(&c).shift(&-(&step * rat_int((j - t) as i64)));
                acc = acc.add(&term);
            }
            out.push(acc);
        }
        Self::new(self.level + 1, out, self.trunc.clone()).unwrap()
    }

    fn aligned(&self, other: &SigmaElement) -> (SigmaElement, SigmaElement) {
        let n = self.level.max(other.level);
        (self.level_shift(n).unwrap(), other.level_shift(n).unwrap())
    }

    pub fn add(&self, other: &SigmaElement) -> SigmaElement {
        let (a, b) = self.aligned(other);
        let coeffs = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x.add(y)).collect();
        Self::new(a.level, coeffs, (&a.trunc).min(&b.trunc).clone()).unwrap()
    }

    pub fn neg(&self) -> SigmaElement {
        SigmaElement {
            level: self.level,
            coeffs: self.coeffs.iter().map(|c| c.neg()).collect(),
            trunc: self.trunc.clone(),
        }
    }

    pub fn sub(&self, other: &SigmaElement) -> SigmaElement {
        self.add(&other.neg())
    }

    pub fn add_mn(&self, a: &MNElement) -> SigmaElement {
        self.add(&SigmaElement::from_mn(a, self.level))
    }

    /// Multiplies by a Mal'cev–Neumann scalar.
    pub fn mul_mn(&self, a: &MNElement) -> SigmaElement {
        self.mul(&SigmaElement::from_mn(a, self.level))
    }

    /// Multiplies by the exact monomial `[d] p^x`.
    pub fn mul_monomial(&self, x: &Rat, d: FqElem) -> SigmaElement {
        let coeffs = self.coeffs.iter().map(|c| c.mul_monomial(x, d)).collect();
        Self::new(self.level, coeffs, &self.trunc + x).unwrap()
    }

    pub fn shift(&self, x: &Rat) -> SigmaElement {
        self.mul_monomial(x, FqElem::ONE)
    }

    pub fn mul_rat(&self, q: &Rat) -> SigmaElement {
        let vq = match crate::exact_arith::vp_rat_unchecked(q, self.ctx().p()).finite() {
            Some(v) => rat_int(v),
            None => {
                let t = self.trunc.clone().max(self.v_lb() + Rat::one());
                return Self::from_mn(&MNElement::zero(self.ctx(), t), self.level);
            }
        };
        let coeffs = self.coeffs.iter().map(|c| c.mul_rat(q)).collect();
        Self::new(self.level, coeffs, &self.trunc + vq).unwrap()
    }

    /// Lower bound on the valuation; the truncation if nothing is known.
    pub fn v_lb(&self) -> Rat {
        let step = self.step();
        let mut best = self.trunc.clone();
        for (j, c) in self.coeffs.iter().enumerate() {
            if let Some((x, _)) = c.terms().first() {
                let v = x - &step * rat_int(j as i64);
                if v < best {
                    best = v;
                }
            }
        }
        best
    }

    /// `min_j v(c_j) - j/p^n`, exact iff attained by exactly one summand and
    /// strictly below the truncation.
    pub fn valuation(&self) -> Result<SigValuation> {
        let step = self.step();
        let vals: Vec<Rat> = self
            .coeffs
            .iter()
            .enumerate()
            .filter_map(|(j, c)| c.terms().first().map(|(x, _)| x - &step * rat_int(j as i64)))
            .collect();
        let min = vals
            .iter()
            .min()
            .cloned()
            .filter(|m| *m < self.trunc)
            .ok_or_else(|| MnError::PrecisionTooLow("no summand below the truncation".into()))?;
        let exact = vals.iter().filter(|v| **v == min).count() == 1;
        Ok(SigValuation { value: min, exact })
    }

    /// Valuation, shifting up to `extra` levels to break ties between summands.
    pub fn valuation_resolved(&self, extra: u32) -> Result<SigValuation> {
        let mut cur = self.clone();
        let mut val = cur.valuation()?;
        for _ in 0..extra {
            if val.exact {
                break;
            }
            cur = cur.shift_once();
            val = cur.valuation()?;
        }
        Ok(val)
    }

    /// Product; degrees `>= p` are folded back with the rewrite rule and its
    /// error term lowers the truncation.
    pub fn mul(&self, other: &SigmaElement) -> SigmaElement {
        let (a, b) = self.aligned(other);
        let ctx = a.ctx().clone();
        let p = ctx.p() as usize;
        let n = a.level;
        let step = a.step();
        let mut t = (&a.trunc + b.v_lb()).min(&b.trunc + a.v_lb());
        let mut prod: Vec<Option<MNElement>> = vec![None; 2 * p - 1];
        for i in 0..p {
            for j in 0..p {
                let bound = &t + &step * rat_int((i + j) as i64);
                let term = if a.coeffs[i].is_empty() || b.coeffs[j].is_empty() {
                    MNElement::zero(&ctx, bound.clone())
                } else {
                    a.coeffs[i].mul(&b.coeffs[j]).truncate(&bound)
                };
                let slot = &mut prod[i + j];
                *slot = Some(match slot.take() {
                    None => term.truncate(&bound),
                    Some(acc) => acc.add(&term).truncate(&bound),
                });
            }
        }
        let mut coeffs: Vec<MNElement> = prod[..p].iter().map(|c| c.clone().unwrap()).collect();
        if p > 1 {
            let drop = inv_pow(p as u64, n - 1);
            let err = Rat::one() - &drop;
            for k in p..(2 * p - 1) {
                let d = prod[k].take().unwrap();
                if d.is_empty() {
                    continue;
                }
                let e = k - p;
                let carrier_err = d.v_lb() - &step * rat_int(e as i64) + &err;
                if carrier_err < t {
                    t = carrier_err;
                }
                coeffs[e] = coeffs[e].add(&d.shift(&-&drop));
                coeffs[e + 1] = coeffs[e + 1].add(&d);
            }
        }
        Self::new(n, coeffs, t).unwrap()
    }

    /// `a^k` for `k >= 0`, with the binomial precision gain of
    /// [`MNElement::pow`].
    pub fn pow(&self, k: u64) -> SigmaElement {
        if k == 0 {
            let one = MNElement::one(self.ctx(), self.trunc.clone().max(Rat::one()));
            return Self::from_mn(&one, self.level);
        }
        let v = self.v_lb();
        let target = pow_trunc(self.ctx().p(), k, &v, &self.trunc);
        let rep = self.exact_to(&(&target - &v * rat_int(k as i64 - 1)));
        pow_by_squaring(&rep, k, |a, b| a.mul(b)).truncate(&target)
    }

    /// Inverse. The leading summand must be a unique minimiser sitting in
    /// the constant coefficient.
    pub fn inv(&self) -> Result<SigmaElement> {
        let val = self.valuation()?;
        if !val.exact {
            return Err(MnError::NotInvertible("valuation is not certified exact".into()));
        }
        let (v, d) = match self.coeffs[0].terms().first() {
            Some((x, d)) if *x == val.value => (x.clone(), *d),
            _ => return Err(MnError::NotInvertible("leading summand carries a power of sigma".into())),
        };
        let dinv = self.ctx().field().inv(d)?;
        let u = self.mul_monomial(&-&v, dinv);
        let one = SigmaElement::from_mn(&MNElement::one(self.ctx(), u.trunc.clone()), self.level);
        let eps = u.sub(&one);
        let ve = eps.v_lb();
        if ve <= Rat::zero() {
            return Err(MnError::Internal("unit part does not have positive-valuation tail".into()));
        }
        let n = ceil_i64(&(&u.trunc / &ve));
        let mut s = one.clone();
        for _ in 0..n {
            s = one.sub(&eps.mul(&s));
        }
        Ok(s.truncate(&u.trunc).mul_monomial(&-&v, dinv))
    }

    /// `a^k` for any integer `k`.
    pub fn pow_i(&self, k: i64) -> Result<SigmaElement> {
        if k >= 0 {
            Ok(self.pow(k as u64))
        } else {
            Ok(self.pow(k.unsigned_abs()).inv()?)
        }
    }

    /// Componentwise test of `a = b mod p^r` at the common level.
    pub fn congruent(&self, other: &SigmaElement, r: &Rat) -> Result<Congruence> {
        if *r > self.trunc || *r > other.trunc {
            return Err(MnError::PrecisionTooLow(format!(
                "congruence modulo p^{} requested, operands known to p^{} and p^{}",
                fmt_rat(r),
                fmt_rat(&self.trunc),
                fmt_rat(&other.trunc)
            )));
        }
        let d = self.sub(other).truncate(r);
        let achieved = d.v_lb();
        Ok(Congruence { holds: achieved >= *r, achieved, level: d.level })
    }

    /// Congruence, retrying after up to `extra` exact level shifts; a shift
    /// can expose cancellations between different powers of sigma.
    pub fn congruent_shifting(&self, other: &SigmaElement, r: &Rat, extra: u32) -> Result<Congruence> {
        let (mut a, mut b) = self.aligned(other);
        let mut best = a.congruent(&b, r)?;
        for _ in 0..extra {
            if best.holds {
                break;
            }
            a = a.shift_once();
            b = b.shift_once();
            best = a.congruent(&b, r)?;
        }
        Ok(best)
    }

    /// Replaces `sigma_n` by its first `k` terms. The result is accurate up
    /// to `min(t, v(c_j) - (j-1)/p^n - 1/p^(n+k))` over nonzero `c_j`, `j >= 1`.
    pub fn substitute(&self, k: u32) -> Result<MNElement> {
        if k < 1 {
            return Err(MnError::InvalidInput("need at least one sigma term".into()));
        }
        let ctx = self.ctx();
        let p = ctx.p();
        let n = self.level;
        let step = self.step();
        let tail = inv_pow(p, n + k);
        let mut acc_t = self.trunc.clone();
        for (j, c) in self.coeffs.iter().enumerate().skip(1) {
            if let Some((x, _)) = c.terms().first() {
                let b = x - &step * rat_int(j as i64 - 1) - &tail;
                if b < acc_t {
                    acc_t = b;
                }
            }
        }
        let min_v = self.coeffs.iter().map(|c| c.v_lb()).min().unwrap();
        let t_s = &acc_t + &step * rat_int(p as i64) - min_v.min(Rat::zero());
        let s = sigma_trunc(ctx, n, k, &t_s);
        let mut out = MNElement::zero(ctx, acc_t.clone());
        let mut power = MNElement::one(ctx, t_s);
        for c in self.coeffs.iter() {
            if !c.is_empty() {
                out = out.add(&c.mul(&power));
            }
            power = power.mul(&s);
        }
        Ok(out.truncate(&acc_t))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "level": self.level,
            "trunc": fmt_rat(&self.trunc),
            "coeffs": self.coeffs.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(ctx: &MnCtx, v: &Value) -> Result<SigmaElement> {
        let bad = |m: &str| MnError::InvalidInput(format!("bad sigma JSON: {m}"));
        let level = v["level"].as_u64().ok_or_else(|| bad("level"))? as u32;
        let trunc = parse_rat(v["trunc"].as_str().ok_or_else(|| bad("trunc"))?)?;
        let coeffs = v["coeffs"]
            .as_array()
            .ok_or_else(|| bad("coeffs"))?
            .iter()
            .map(|c| MNElement::from_json(ctx, c))
            .collect::<Result<Vec<_>>>()?;
        Self::new(level, coeffs, trunc)
    }
}

/// `sum_{k=n}^{n+K-1} p^(-1/p^k)`, a concrete stand-in for `sigma_n`.
pub fn sigma_trunc(ctx: &MnCtx, n: u32, k: u32, trunc: &Rat) -> MNElement {
    let terms = (n..n + k).map(|i| (-inv_pow(ctx.p(), i), FqElem::ONE)).collect();
    MNElement::from_terms(ctx, terms, trunc.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_arith::rat;

    #[test]
    fn cube_rewrite() {
        let ctx = MnCtx::new(3).unwrap();
        let s = SigmaElement::sigma(&ctx, 2, rat(2, 1)).unwrap();
        let s3 = s.mul(&s).mul(&s);
        let expected = SigmaElement::new(
            2,
            vec![
                MNElement::monomial(&ctx, rat(-1, 3), FqElem::ONE, rat(3, 1)),
                MNElement::one(&ctx, rat(3, 1)),
            ],
            rat(2, 3),
        )
        .unwrap();
        assert_eq!(s3.trunc(), &rat(2, 3));
        assert!(s3.congruent(&expected, &rat(2, 3)).unwrap().holds);
        assert_eq!(s3.coeffs()[0].terms(), &[(rat(-1, 3), FqElem::ONE)]);
    }

    #[test]
    fn downshift_rejected() {
        let ctx = MnCtx::new(3).unwrap();
        let s = SigmaElement::sigma(&ctx, 3, rat(1, 1)).unwrap();
        assert!(matches!(s.level_shift(2), Err(MnError::LevelDownshift { .. })));
    }

    #[test]
    fn shift_is_exact() {
        let ctx = MnCtx::new(5).unwrap();
        let s2 = SigmaElement::sigma(&ctx, 2, rat(1, 1)).unwrap();
        let s3 = s2.level_shift(3).unwrap();
        let direct = SigmaElement::sigma(&ctx, 3, rat(1, 1))
            .unwrap()
            .add_mn(&MNElement::monomial(&ctx, rat(-1, 25), FqElem::ONE, rat(1, 1)));
        assert_eq!(s3, direct);
    }
}
