use super::registry::uniformizer_step;
use super::report::{Ext, VerificationReport, Witness};
use super::Ex;
use crate::error::{MnError, Result};
use crate::exact_arith::{check_odd_prime, fmt_rat, inv_pow, rat, Rat};
use crate::gfq::FqElem;
use crate::mn_series::{MNElement, MnCtx};
use crate::newton::{phi_cyclotomic, smallest_root, work_precision_ladder, NewtonRunner};
use crate::sigma_ring::SigmaElement;

/// `pi^(m,1)` as a level-`m` sigma element.
///
/// For `m = 2` this is `p^(-1/p)(zeta_(p^2) - Lambda_(p-1))`. Higher levels
/// feed the previous uniformizer into the recursion with `beta = 1` at
/// `m = 3` and `beta = 2` beyond.
pub(crate) fn pi_m_1(ex: &Ex, m: u32) -> Result<SigmaElement> {
    if m < 2 {
        return Err(MnError::InvalidInput("the uniformizer recursion starts at m = 2".into()));
    }
    let mut a = ex.pi_2_1();
    for level in 3..=m {
        let beta = if level == 3 { 1 } else { 2 };
        a = uniformizer_step(ex, &a, beta)?;
    }
    Ok(a)
}

#[derive(Clone, Debug)]
pub struct UniformizerResult {
    pub element: SigmaElement,
    /// The certified valuation, or `None` if the leading coefficient could
    /// not be separated from the truncation.
    pub valuation: Option<Rat>,
}

/// Builds `pi^(m,1)` and certifies its valuation.
pub fn uniformizer(p: i64, m: u32) -> Result<UniformizerResult> {
    check_odd_prime(p)?;
    let ex = Ex::new(&MnCtx::new(p)?)?;
    uniformizer_in(&ex, m)
}

pub fn uniformizer_in(ex: &Ex, m: u32) -> Result<UniformizerResult> {
    let element = pi_m_1(ex, m)?;
    let v = element.valuation_resolved(2)?;
    Ok(UniformizerResult { element, valuation: if v.exact { Some(v.value) } else { None } })
}

/// Precision at which the `K`-term substitution of the `zeta_(p^n)`
/// expansion is compared with the Newton root.
pub fn residual_r_eff(p: u64, n: u32, k: u32) -> Rat {
    let pi = p as i64;
    rat(1, pi.pow(n - 2) * (pi - 1)) - inv_pow(p, n + k)
}

/// Newton root of `Phi_(p^n)` known to at least `target`, together with the
/// root digit picked in the second step.
fn newton_root(ctx: &MnCtx, n: u32, target: &Rat) -> Result<(MNElement, FqElem)> {
    let mut ladder = work_precision_ladder(n);
    ladder.retain(|w| w > target);
    let mut last = None;
    for w in &ladder {
        match newton_root_at(ctx, n, target, w) {
            Err(e @ MnError::PrecisionTooLow(_)) => last = Some(e),
            other => return other,
        }
    }
    Err(last.unwrap_or_else(|| MnError::PrecisionTooLow("no usable working precision".into())))
}

fn newton_root_at(ctx: &MnCtx, n: u32, target: &Rat, work: &Rat) -> Result<(MNElement, FqElem)> {
    let mut runner = NewtonRunner::new(phi_cyclotomic(ctx, n, work)?, work.clone(), smallest_root)?;
    for _ in 0..64 {
        match runner.peek_slope()? {
            Some(s) if s < *target => runner.step()?,
            _ => break,
        }
    }
    let root = runner.approximation()?;
    if root.trunc() < target {
        return Err(MnError::PrecisionTooLow(format!(
            "Newton root only known to p^{} after 64 steps",
            fmt_rat(root.trunc())
        )));
    }
    let second = runner
        .trace
        .steps
        .get(1)
        .ok_or_else(|| MnError::Internal("Newton loop stopped before its second step".into()))?;
    Ok((root, second.root))
}

/// Compares the `K`-term substitution of the truncated `zeta_(p^n)`
/// expansion with an independent Newton root of `Phi_(p^n)`.
///
/// The digit of `zeta_(2(p-1))` is read off the Newton trace, so both sides
/// describe the same root of unity.
pub fn residual_check(p: i64, n: u32, k: u32) -> VerificationReport {
    let id = format!("residual(n={n},K={k})");
    let run = || -> Result<Vec<Witness>> {
        let pu = check_odd_prime(p)?;
        if n < 2 {
            return Err(MnError::InvalidInput("residual check needs n >= 2".into()));
        }
        if k < 1 {
            return Err(MnError::InvalidInput("residual check needs K >= 1".into()));
        }
        let ctx = MnCtx::new(p)?;
        let r = residual_r_eff(pu, n, k);
        let (root, c2) = newton_root(&ctx, n, &r)?;
        let f = ctx.field();
        let z = if n % 2 == 0 { c2 } else { f.neg(c2) };
        let ex = Ex::with_zeta(&ctx, z)?;
        let t = ex.stated_trunc("zeta-pn", n).expect("zeta-pn has a stated truncation");
        let zeta = ex.zeta_pn(n, &t)?;
        // Independent of the formula above: the dominant summand dropped when
        // sigma_n is cut after K terms is j c_j sigma_n^(j-1) p^(-1/p^(n+K)).
        let tail = inv_pow(pu, n + k);
        let step = inv_pow(pu, n);
        let mut omitted: Option<Rat> = None;
        for (j, c) in zeta.coeffs().iter().enumerate().skip(1) {
            if let Some((x, _)) = c.terms().first() {
                let v = x - &step * rat((j - 1) as i64, 1) - &tail;
                omitted = Some(omitted.map_or(v.clone(), |o| o.min(v)));
            }
        }
        let omitted = omitted.ok_or_else(|| MnError::Internal("expansion has no sigma terms".into()))?;
        let mut w = vec![Witness::equal("first omitted sigma term", &r, &omitted)];
        let hat = zeta.substitute(k)?;
        let finer = zeta.substitute(k + 3)?;
        for (label, other) in [("substitution stable in K", &finer), ("substitution vs Newton root", &root)] {
            let d = hat.sub(other);
            if d.trunc() < &r {
                return Err(MnError::PrecisionTooLow(format!(
                    "{label}: difference known to p^{}, need p^{}",
                    fmt_rat(d.trunc()),
                    fmt_rat(&r)
                )));
            }
            w.push(Witness::new(label, Ext::Fin(r.clone()), Ext::Fin(d.v_lb())));
        }
        Ok(w)
    };
    match run() {
        Ok(w) => VerificationReport::from_witnesses(&id, p, w, false),
        Err(e) => VerificationReport::error(&id, p, e.to_string()),
    }
}
