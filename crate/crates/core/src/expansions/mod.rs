//! Closed-form elements built around `zeta_(2(p-1))` and the tails
//! `sigma_n`, the identity registry that checks them, uniformizers of
//! `Q_p(zeta_(p^m), p^(1/p))`, and a numeric cross-check against the Newton loop.
//!
//! All constructors go through [`Ex`], which fixes the prime, the residue
//! field and the digit `z` whose Teichmüller lift plays the role of
//! `zeta_(2(p-1))`.

mod registry;
mod report;
mod uniformizer;

pub use registry::{registry, verify_identity, verify_identity_in, Method, RegistryEntry};
pub use report::{Ext, Status, VerificationReport, Witness};
pub use registry::verify_many;
pub use self::Named as NamedElement;
pub use uniformizer::{residual_check, residual_r_eff, uniformizer, uniformizer_in, UniformizerResult};

use num_traits::{One, Zero};
use serde_json::Value;

use crate::combinatorics::harmonic;
use crate::error::{MnError, Result};
use crate::exact_arith::{factorial, inv_pow, rat, rat_big, rat_int, Rat};
use crate::gfq::FqElem;
use crate::mn_series::{MNElement, MnCtx};
use crate::sigma_ring::{sigma_trunc, SigmaElement};

/// Fixed data for the closed forms at one prime.
#[derive(Clone, Debug)]
pub struct Ex {
    ctx: MnCtx,
    z: FqElem,
}

impl Ex {
    /// Uses the smallest element of order `2(p-1)` as `zeta_(2(p-1))` mod p.
    pub fn new(ctx: &MnCtx) -> Result<Ex> {
        let p = ctx.p();
        let z = ctx
            .field()
            .smallest_of_order(2 * (p - 1))
            .ok_or_else(|| MnError::Internal("F_(p^2) has no element of order 2(p-1)".into()))?;
        Ok(Ex { ctx: ctx.clone(), z })
    }

    /// Uses a caller-chosen digit, which must have order `2(p-1)`.
    pub fn with_zeta(ctx: &MnCtx, z: FqElem) -> Result<Ex> {
        let p = ctx.p();
        let order = ctx.field().mult_order(z)?;
        if order != 2 * (p - 1) {
            return Err(MnError::InvalidInput(format!(
                "digit {} has order {order}, expected {}",
                ctx.field().format(z),
                2 * (p - 1)
            )));
        }
        Ok(Ex { ctx: ctx.clone(), z })
    }

    pub fn ctx(&self) -> &MnCtx {
        &self.ctx
    }

    pub fn zeta_digit(&self) -> FqElem {
        self.z
    }

    pub fn p(&self) -> u64 {
        self.ctx.p()
    }

    fn pi(&self) -> i64 {
        self.ctx.p() as i64
    }

    /// `z^k` for any integer `k`.
    fn zd(&self, k: i64) -> FqElem {
        let ord = 2 * (self.pi() - 1);
        self.ctx.field().pow(self.z, k.rem_euclid(ord) as u64)
    }

    /// `q * [z]^k * p^x + O(p^t)`.
    pub(crate) fn term(&self, q: &Rat, k: i64, x: &Rat, t: &Rat) -> MNElement {
        if q.is_zero() {
            return MNElement::zero(&self.ctx, t.clone());
        }
        MNElement::from_rational(&self.ctx, q, t - x).mul_monomial(x, self.zd(k))
    }

    /// `[d] p^x + O(p^t)`.
    fn digit_term(&self, d: FqElem, x: &Rat, t: &Rat) -> MNElement {
        MNElement::monomial(&self.ctx, x.clone(), d, t.clone())
    }

    fn zero(&self, t: &Rat) -> MNElement {
        MNElement::zero(&self.ctx, t.clone())
    }

    fn sum(&self, t: &Rat, parts: impl IntoIterator<Item = MNElement>) -> MNElement {
        parts.into_iter().fold(self.zero(t), |acc, x| acc.add(&x))
    }

    /// A sigma element at `level` whose coefficient `j` is produced by
    /// `coeff(j, t_j)` with `t_j = t + j/p^level`.
    pub(crate) fn sig(&self, level: u32, t: &Rat, coeff: impl Fn(usize, &Rat) -> MNElement) -> SigmaElement {
        let step = inv_pow(self.p(), level);
        let coeffs = (0..self.p() as usize).map(|j| coeff(j, &(t + &step * rat_int(j as i64)))).collect();
        SigmaElement::new(level, coeffs, t.clone()).expect("level >= 1")
    }

    /// Inverse of `k!` modulo `p`, as a residue digit.
    fn inv_fact_digit(&self, k: u64) -> FqElem {
        let f = self.ctx.field();
        let kf = (factorial(k) % self.p()).to_string().parse::<i64>().unwrap();
        f.inv(f.from_int(kf)).expect("k < p")
    }

    fn inv_fact(k: u64) -> Rat {
        Rat::one() / rat_big(factorial(k))
    }

    fn e_pp1(&self) -> Rat {
        rat(1, self.pi() * (self.pi() - 1))
    }

    fn e_p1(&self) -> Rat {
        rat(1, self.pi() - 1)
    }

    pub fn u_p_rational(&self) -> Rat {
        Rat::one() + Self::inv_fact(self.p() - 1)
    }

    // ---- named elements -------------------------------------------------

    /// `lambda = zeta p^(1/(p(p-1)))`.
    pub fn lambda(&self, t: &Rat) -> MNElement {
        self.digit_term(self.z, &self.e_pp1(), t)
    }

    /// `Lambda_(p-1) = sum_{k<p} lambda^k / [k!]`, already canonical.
    pub fn cap_lambda(&self, t: &Rat) -> MNElement {
        let f = self.ctx.field();
        let p = self.p();
        self.sum(
            t,
            (0..p).map(|k| {
                let d = f.mul(self.zd(k as i64), self.inv_fact_digit(k));
                self.digit_term(d, &(self.e_pp1() * rat_int(k as i64)), t)
            }),
        )
    }

    /// `sum_{k<p} lambda^k / k!` with rational coefficients.
    pub fn cap_lambda_hat(&self, t: &Rat) -> MNElement {
        self.sum(
            t,
            (0..self.p()).map(|k| self.term(&Self::inv_fact(k), k as i64, &(self.e_pp1() * rat_int(k as i64)), t)),
        )
    }

    /// `sum_{k<p} lambda^(kp) / [k!]`.
    pub fn cap_lambda_tilde(&self, t: &Rat) -> MNElement {
        let f = self.ctx.field();
        let p = self.p();
        self.sum(
            t,
            (0..p).map(|k| {
                let d = f.mul(self.zd((k * p) as i64), self.inv_fact_digit(k));
                self.digit_term(d, &(self.e_p1() * rat_int(k as i64)), t)
            }),
        )
    }

    /// `sum_{k<p} lambda^(kp) / k!`.
    pub fn cap_lambda_hat_tilde(&self, t: &Rat) -> MNElement {
        let p = self.p();
        self.sum(
            t,
            (0..p).map(|k| self.term(&Self::inv_fact(k), (k * p) as i64, &(self.e_p1() * rat_int(k as i64)), t)),
        )
    }

    /// `zeta p^(1/(p-1)) U_p`, the correction carried by the `+` variant.
    fn u_correction(&self, t: &Rat) -> MNElement {
        self.term(&self.u_p_rational(), 1, &self.e_p1(), t)
    }

    pub fn cap_lambda_tilde_plus(&self, t: &Rat) -> MNElement {
        self.cap_lambda_tilde(t).add(&self.u_correction(t))
    }

    pub fn u_p(&self, t: &Rat) -> MNElement {
        MNElement::from_rational(&self.ctx, &self.u_p_rational(), t.clone())
    }

    /// `kappa = -sum_{n=2}^{p-1} (-1)^(n+1) / (n! n) zeta^(n+1) p^(1 + 1/(p-1) + n/(p(p-1)))`.
    pub fn kappa(&self, t: &Rat) -> MNElement {
        let p = self.pi();
        self.sum(
            t,
            (2..p).map(|n| {
                let sign = if n % 2 == 1 { 1 } else { -1 };
                let q = -Self::inv_fact(n as u64) / rat_int(n) * rat_int(sign);
                let x = Rat::one() + self.e_p1() + self.e_pp1() * rat_int(n);
                self.term(&q, n + 1, &x, t)
            }),
        )
    }

    /// `eta = -zeta p^(1/(p-1))`.
    pub fn eta(&self, t: &Rat) -> MNElement {
        self.term(&rat_int(-1), 1, &self.e_p1(), t)
    }

    /// `Lambda_(p-1) + zeta p^(1/(p-1)) sigma_2`.
    pub fn mu0(&self, t: &Rat) -> SigmaElement {
        self.sig(2, t, |j, tj| match j {
            0 => self.cap_lambda(tj),
            1 => self.digit_term(self.z, &self.e_p1(), tj),
            _ => self.zero(tj),
        })
    }

    /// `Lambda_(p-1) + (1 + lambda) zeta p^(1/(p-1)) sigma_2`.
    pub fn zeta_p2_first(&self, t: &Rat) -> SigmaElement {
        self.sig(2, t, |j, tj| match j {
            0 => self.cap_lambda(tj),
            1 => self.digit_term(self.z, &self.e_p1(), tj).add(&self.digit_term(
                self.zd(2),
                &(self.e_p1() + self.e_pp1()),
                tj,
            )),
            _ => self.zero(tj),
        })
    }

    /// `Lambda_(p-1) (1 + zeta p^(1/(p-1)) sigma_2)`.
    pub fn mu(&self, t: &Rat) -> SigmaElement {
        self.sig(2, t, |j, tj| match j {
            0 => self.cap_lambda(tj),
            1 => self.cap_lambda(&(tj - self.e_p1())).mul_monomial(&self.e_p1(), self.z),
            _ => self.zero(tj),
        })
    }

    /// The auxiliary element `W` with `Lambda~+ / mu^p = W / Lambda_(p-1)^p`
    /// to precision `1 + 2/(p-1)`. The `sigma_2` carries a square.
    pub fn cal_w(&self, t: &Rat) -> SigmaElement {
        let p = self.pi();
        let one = Rat::one();
        self.sig(2, t, |j, tj| match j {
            0 => {
                let alt = (0..p).map(|l| {
                    let s = if l % 2 == 0 { 1 } else { -1 };
                    self.term(&(Self::inv_fact(l as u64) * rat_int(s)), l, &(self.e_p1() * rat_int(l)), tj)
                });
                self.sum(tj, alt)
                    .add(&self.u_correction(tj))
                    .add(&self.term(&one, 1, &(&one + self.e_pp1()), tj))
                    .sub(&self.term(&one, 2, &(&one + self.e_pp1() + self.e_p1()), tj))
            }
            2 => self.term(&rat(1, 2), 2, &(&one + self.e_p1() * rat_int(2)), tj),
            _ => self.zero(tj),
        })
    }

    /// `- sum_{k=1}^{p-1} H_k/k! zeta^(k+1) p^(e + k e')` for the two scales
    /// used by the closed forms.
    fn harmonic_sum(&self, base: &Rat, step: &Rat, sign: impl Fn(i64) -> i64, t: &Rat) -> MNElement {
        self.sum(
            t,
            (1..self.pi()).map(|k| {
                let q = harmonic(k).unwrap() * Self::inv_fact(k as u64) * rat_int(-sign(k));
                self.term(&q, k + 1, &(base + step * rat_int(k)), t)
            }),
        )
    }

    /// Closed form of the correction `M` solving `p M = mu (Lambda~+/mu^p - 1)`.
    pub fn cal_m(&self, t: &Rat) -> SigmaElement {
        let p = self.pi();
        let two_e = self.e_p1() * rat_int(2);
        self.sig(2, t, |j, tj| match j {
            0 => {
                let x3 = &two_e - rat(p - 2, p * p * (p - 1));
                self.term(&rat(1, 2), 3, &x3, tj).add(&self.harmonic_sum(&self.e_p1(), &self.e_pp1(), |_| 1, tj))
            }
            2 => self.term(&rat(1, 2), 2, &two_e, tj),
            _ => self.zero(tj),
        })
    }

    /// `(2/(p-1))`-truncated expansion of `zeta_(p^2)`: `mu + M`.
    pub fn zeta_p2(&self, t: &Rat) -> SigmaElement {
        self.mu(t).add(&self.cal_m(t))
    }

    /// `(2/(p^(n-2)(p-1)))`-truncated expansion of `zeta_(p^n)`, level `n`.
    pub fn zeta_pn(&self, n: u32, t: &Rat) -> Result<SigmaElement> {
        if n < 2 {
            return Err(MnError::InvalidInput("zeta_pn needs n >= 2".into()));
        }
        let p = self.pi();
        let ni = n as i64;
        let d = rat_int(p.pow(n - 1) * (p - 1));
        let sgn = |e: i64| if e.rem_euclid(2) == 0 { 1 } else { -1 };
        let top = rat(2, p.pow(n - 2) * (p - 1));
        Ok(self.sig(n, t, |j, tj| match j {
            0 => {
                let lead = self.sum(
                    tj,
                    (0..p).map(|k| {
                        self.term(&(Self::inv_fact(k as u64) * rat_int(sgn(ni * k))), k, &(rat_int(k) / &d), tj)
                    }),
                );
                let h = self.harmonic_sum(&(rat_int(p) / &d), &(Rat::one() / &d), |k| sgn(ni * (k + 1)), tj);
                let x3 = &top - rat(p - 2, p.pow(n) * (p - 1));
                lead.add(&h).add(&self.term(&rat(sgn(ni), 2), 3, &x3, tj))
            }
            1 => self.sum(
                tj,
                (0..p).map(|k| {
                    self.term(
                        &(Self::inv_fact(k as u64) * rat_int(sgn(ni * (k + 1)))),
                        k + 1,
                        &(rat_int(k + p) / &d),
                        tj,
                    )
                }),
            ),
            2 => self.term(&rat(1, 2), 2, &top, tj),
            _ => self.zero(tj),
        }))
    }

    /// `A_(p,n)^(beta) = (-1)^n zeta p^a sigma_n (1 + (-1)^n beta zeta p^a)`
    /// with `a = 1/(p^(n-1)(p-1))`.
    pub fn a_pnb(&self, n: u32, beta: i64, t: &Rat) -> Result<SigmaElement> {
        if n < 2 {
            return Err(MnError::InvalidInput("A_(p,n) needs n >= 2".into()));
        }
        let p = self.pi();
        let a = rat(1, p.pow(n - 1) * (p - 1));
        let s = if n % 2 == 0 { 1 } else { -1 };
        Ok(self.sig(n, t, |j, tj| match j {
            1 => self.term(&rat_int(s), 1, &a, tj).add(&self.term(&rat_int(beta), 2, &(&a * rat_int(2)), tj)),
            _ => self.zero(tj),
        }))
    }

    /// `pi^(2,1) = p^(-1/p) (zeta_(p^2) - Lambda_(p-1))`, from the
    /// `(2/(p-1))`-truncated expansion of `zeta_(p^2)`.
    pub fn pi_2_1(&self) -> SigmaElement {
        let t = self.e_p1() * rat_int(2);
        let x = self.zeta_p2(&t).add_mn(&self.cap_lambda(&t).neg());
        x.shift(&rat(-1, self.pi()))
    }

    /// Canonical terms of the `i`-th approximation of `zeta_(p^2)` produced
    /// by the Newton loop, which equals the approximation after `i + 1` steps.
    /// Up to `i = p - 1` these are the terms of `Lambda_(p-1)`; afterwards the
    /// digits `z` at `1/(p-1) - 1/p^l`, `l = 2..=i-p+2`, follow.
    pub fn zeta_p2_approximation(&self, i: usize) -> Vec<(Rat, FqElem)> {
        let p = self.pi();
        let f = self.ctx.field();
        let mut out: Vec<(Rat, FqElem)> = (0..=i.min(p as usize - 1) as u64)
            .map(|k| (rat(k as i64, p * (p - 1)), f.mul(self.inv_fact_digit(k), self.zd(k as i64))))
            .collect();
        for l in 2..=(i as i64 - p + 2) {
            out.push((self.e_p1() - inv_pow(self.p(), l as u32), self.z));
        }
        out
    }

    /// Stated truncation of a named element; `None` when the element is an
    /// exact finite sum.
    pub fn stated_trunc(&self, name: &str, n: u32) -> Option<Rat> {
        let p = self.pi();
        match name {
            "cal-w" => Some(Rat::one() + self.e_p1() * rat_int(2)),
            "cal-m" | "zeta-p2" => Some(self.e_p1() * rat_int(2)),
            "zeta-p2-first" => Some(self.e_p1() + self.e_pp1()),
            "mu0" => Some(self.e_p1()),
            "zeta-pn" => Some(rat(2, p.pow(n.max(2) - 2) * (p - 1))),
            "a-pnb" => Some(rat(2, p.pow(n.max(2) - 1) * (p - 1))),
            "kappa" | "cap-lambda-tilde-plus" => Some(Rat::one() + self.e_p1() * rat_int(2)),
            _ => None,
        }
    }
}

/// Output of [`build_named`].
#[derive(Clone, Debug)]
pub enum Named {
    Mn(MNElement),
    Sigma(SigmaElement),
}

impl Named {
    pub fn to_json(&self) -> Value {
        match self {
            Named::Mn(a) => a.to_json(),
            Named::Sigma(s) => {
                let mut v = s.to_json();
                v["p"] = s.ctx().p().into();
                v["modulus"] = s.ctx().field().modulus_string().into();
                v
            }
        }
    }
}

impl std::fmt::Display for Named {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Named::Mn(a) => write!(f, "{a}"),
            Named::Sigma(s) => write!(f, "{s}"),
        }
    }
}

/// Parameters accepted by [`build_named`].
#[derive(Clone, Debug)]
pub struct NamedParams {
    pub n: u32,
    pub beta: i64,
    pub sigma_terms: u32,
    /// Truncation for elements that are exact finite sums.
    pub trunc: Rat,
}

impl Default for NamedParams {
    fn default() -> Self {
        NamedParams { n: 2, beta: 1, sigma_terms: 3, trunc: rat_int(3) }
    }
}

pub const NAMED_IDS: &[&str] = &[
    "a-pnb",
    "cal-m",
    "cal-w",
    "cap-lambda",
    "cap-lambda-hat",
    "cap-lambda-hat-tilde",
    "cap-lambda-tilde",
    "cap-lambda-tilde-plus",
    "eta",
    "kappa",
    "lambda",
    "mu",
    "mu0",
    "pi-2-1",
    "pi-3-1",
    "pi-m-1",
    "sigma-trunc",
    "u-p",
    "zeta-p2",
    "zeta-p2-first",
    "zeta-pn",
];

/// Builds a named closed-form element at its stated truncation.
pub fn build_named(name: &str, p: i64, params: &NamedParams) -> Result<Named> {
    let ctx = MnCtx::new(p)?;
    build_named_in(&Ex::new(&ctx)?, name, params)
}

pub fn build_named_in(ex: &Ex, name: &str, params: &NamedParams) -> Result<Named> {
    let t = ex.stated_trunc(name, params.n).unwrap_or_else(|| params.trunc.clone());
    let need_level = |min: u32| {
        if params.n < min {
            Err(MnError::InvalidInput(format!("{name} needs n >= {min}")))
        } else {
            Ok(())
        }
    };
    Ok(match name {
        "lambda" => Named::Mn(ex.lambda(&t)),
        "cap-lambda" => Named::Mn(ex.cap_lambda(&t)),
        "cap-lambda-hat" => Named::Mn(ex.cap_lambda_hat(&t)),
        "cap-lambda-tilde" => Named::Mn(ex.cap_lambda_tilde(&t)),
        "cap-lambda-hat-tilde" => Named::Mn(ex.cap_lambda_hat_tilde(&t)),
        "cap-lambda-tilde-plus" => Named::Mn(ex.cap_lambda_tilde_plus(&t)),
        "u-p" => Named::Mn(ex.u_p(&t)),
        "kappa" => Named::Mn(ex.kappa(&t)),
        "eta" => Named::Mn(ex.eta(&t)),
        "mu0" => Named::Sigma(ex.mu0(&t)),
        "mu" => Named::Sigma(ex.mu(&t)),
        "cal-w" => Named::Sigma(ex.cal_w(&t)),
        "cal-m" => Named::Sigma(ex.cal_m(&t)),
        "sigma-trunc" => {
            need_level(1)?;
            if params.sigma_terms < 1 {
                return Err(MnError::InvalidInput("sigma-trunc needs K >= 1".into()));
            }
            Named::Mn(sigma_trunc(ex.ctx(), params.n, params.sigma_terms, &t))
        }
        "a-pnb" => {
            need_level(2)?;
            Named::Sigma(ex.a_pnb(params.n, params.beta, &t)?)
        }
        "zeta-p2-first" => Named::Sigma(ex.zeta_p2_first(&t)),
        "zeta-p2" => Named::Sigma(ex.zeta_p2(&t)),
        "zeta-pn" => {
            need_level(2)?;
            Named::Sigma(ex.zeta_pn(params.n, &t)?)
        }
        "pi-2-1" => Named::Sigma(ex.pi_2_1()),
        "pi-3-1" => Named::Sigma(uniformizer::pi_m_1(ex, 3)?),
        "pi-m-1" => {
            need_level(2)?;
            Named::Sigma(uniformizer::pi_m_1(ex, params.n)?)
        }
        other => return Err(MnError::UnknownId(other.to_string())),
    })
}
