//! Argument parsing and result shaping shared by the Python classes. Nothing
//! here touches Python, so the crate's tests can compile it on its own.

use mn_core::exact_arith::{fmt_rat, parse_rat, Rat};
use mn_core::expansions::{NamedParams, VerificationReport};
use mn_core::gfq::FqElem;
use mn_core::mn_series::{MNElement, MnCtx};

pub type Terms = Vec<(String, String)>;

/// `(q, required, achieved, slack)`.
pub type WitnessRow = (String, String, String, String);

pub fn rat_arg(s: &str) -> Result<Rat, String> {
    parse_rat(s).map_err(|e| e.to_string())
}

pub fn digit_arg(ctx: &MnCtx, s: &str) -> Result<FqElem, String> {
    ctx.field().parse(s).map_err(|e| e.to_string())
}

pub fn monomial(ctx: &MnCtx, exp: &str, digit: &str, trunc: &str) -> Result<MNElement, String> {
    Ok(MNElement::monomial(ctx, rat_arg(exp)?, digit_arg(ctx, digit)?, rat_arg(trunc)?))
}

/// Builds an element from `(exponent, digit)` strings; the terms need not be
/// canonical.
pub fn from_terms(ctx: &MnCtx, terms: &[(String, String)], trunc: &str) -> Result<MNElement, String> {
    let parsed = terms
        .iter()
        .map(|(x, d)| Ok((rat_arg(x)?, digit_arg(ctx, d)?)))
        .collect::<Result<Vec<_>, String>>()?;
    Ok(MNElement::from_terms(ctx, parsed, rat_arg(trunc)?))
}

pub fn terms(a: &MNElement) -> Terms {
    let f = a.ctx().field();
    a.terms().iter().map(|(x, d)| (fmt_rat(x), f.format(*d))).collect()
}

pub fn named_params(n: u32, beta: i64, sigma_terms: u32, trunc: &str) -> Result<NamedParams, String> {
    Ok(NamedParams { n, beta, sigma_terms, trunc: rat_arg(trunc)? })
}

pub fn witness_rows(r: &VerificationReport) -> Vec<WitnessRow> {
    r.witness
        .iter()
        .map(|w| (w.q.clone(), w.required.to_string(), w.achieved.to_string(), w.slack.to_string()))
        .collect()
}
