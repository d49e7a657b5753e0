//! Polynomials over `L_p`, their Newton polygons, residue polynomials and
//! the digit-by-digit root approximation loop.
//!
//! Coefficients are stored leading-first: `P(T) = sum_i a_i T^(n-i)`, and
//! the polygon is the lower convex hull of the points `(i, v(a_i))`. The
//! largest slope `s_max` is the valuation of the roots closest to zero.

use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::error::{MnError, Result};
use crate::exact_arith::{fmt_rat, rat_int, Rat};
use crate::gfq::FqElem;
use crate::mn_series::{MNElement, MnCtx};

/// A polynomial over `L_p`; `None` marks a coefficient that is exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct MNPoly {
    pub coeffs: Vec<Option<MNElement>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonPolygon {
    /// Hull vertices `(i, v(a_i))`, left to right, collinear points removed.
    pub vertices: Vec<(usize, Rat)>,
    /// Largest slope; `None` when the constant term is exactly zero.
    pub s_max: Option<Rat>,
    /// Left end of the last segment.
    pub m_max: usize,
}

impl MNPoly {
    /// Integer coefficients, leading first, each known to precision `trunc`.
    pub fn from_ints(ctx: &MnCtx, coeffs: &[i64], trunc: &Rat) -> MNPoly {
        MNPoly {
            coeffs: coeffs
                .iter()
                .map(|&c| (c != 0).then(|| MNElement::from_int(ctx, c, trunc.clone())))
                .collect(),
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Evaluation by Horner's rule.
    pub fn eval(&self, x: &MNElement) -> MNElement {
        let mut acc: Option<MNElement> = None;
        for c in &self.coeffs {
            acc = match (acc, c) {
                (None, None) => None,
                (None, Some(c)) => Some(c.clone()),
                (Some(a), None) => Some(a.mul(x)),
                (Some(a), Some(c)) => Some(a.mul(x).add(c)),
            };
        }
        acc.unwrap_or_else(|| MNElement::zero(x.ctx(), x.trunc().clone()))
    }

    /// `P(T + mu)` by repeated synthetic division (Taylor shift).
    pub fn perturb(&self, mu: &MNElement) -> MNPoly {
        let mut b = self.coeffs.clone();
        let n = self.degree();
        for i in 0..n {
            for j in 1..=(n - i) {
                if let Some(prev) = &b[j - 1] {
                    let add = prev.mul(mu);
                    b[j] = Some(match b[j].take() {
                        None => add,
                        Some(cur) => cur.add(&add),
                    });
                }
            }
        }
        MNPoly { coeffs: b }
    }

    /// Lowers the truncation of each coefficient to `bound(i)`.
    pub fn truncate_with(&mut self, bound: impl Fn(usize) -> Rat) {
        for (i, c) in self.coeffs.iter_mut().enumerate() {
            if let Some(e) = c {
                *e = e.truncate(&bound(i));
            }
        }
    }

    /// The Newton polygon. Coefficients with no known terms must lie on or
    /// above the hull, otherwise precision is too low to decide it.
    pub fn newton_polygon(&self) -> Result<NewtonPolygon> {
        let n = self.degree();
        let lead = self.coeffs[0]
            .as_ref()
            .and_then(|c| c.terms().first().map(|t| t.0.clone()))
            .ok_or_else(|| MnError::InvalidInput("leading coefficient must be a known nonzero".into()))?;
        let mut pts: Vec<(usize, Rat)> = vec![(0, lead)];
        for (i, c) in self.coeffs.iter().enumerate().skip(1) {
            if let Some(Ok(v)) = c.as_ref().map(|c| c.valuation()) {
                pts.push((i, v));
            }
        }
        match &self.coeffs[n] {
            None => {
                let last = pts.last().unwrap().0;
                let hull = lower_hull(&pts);
                return Ok(NewtonPolygon { vertices: hull, s_max: None, m_max: last });
            }
            Some(c) if c.is_empty() => {
                return Err(MnError::PrecisionTooLow(format!(
                    "constant term vanishes to precision {}",
                    fmt_rat(c.trunc())
                )))
            }
            _ => {}
        }
        let hull = lower_hull(&pts);
        for (i, c) in self.coeffs.iter().enumerate() {
            if let Some(c) = c {
                if c.is_empty() && *c.trunc() < hull_at(&hull, i) {
                    return Err(MnError::PrecisionTooLow(format!("coefficient {i} unknown below the hull")));
                }
            }
        }
        let k = hull.len();
        let (s_max, m_max) = if k >= 2 {
            let (i0, v0) = &hull[k - 2];
            let (i1, v1) = &hull[k - 1];
            ((v1 - v0) / rat_int((i1 - i0) as i64), *i0)
        } else {
            (Rat::zero(), 0)
        };
        Ok(NewtonPolygon { vertices: hull, s_max: Some(s_max), m_max })
    }

    /// The last segment only: `(s_max, m_max)`. Unknown coefficients need only
    /// lie strictly above the line of that segment, which is all the residue
    /// polynomial and the root step depend on.
    pub fn last_segment(&self) -> Result<Option<(Rat, usize)>> {
        let n = self.degree();
        let vn = match &self.coeffs[n] {
            None => return Ok(None),
            Some(c) => c.valuation().map_err(|_| {
                MnError::PrecisionTooLow(format!("constant term vanishes to precision {}", fmt_rat(c.trunc())))
            })?,
        };
        let mut best: Option<(Rat, usize)> = None;
        for (i, c) in self.coeffs.iter().enumerate().take(n) {
            if let Some(Ok(v)) = c.as_ref().map(|c| c.valuation()) {
                let s = (&vn - v) / rat_int((n - i) as i64);
                // largest slope, and among equal slopes the leftmost point
                if best.as_ref().map_or(true, |(b, _)| s >= *b) {
                    if best.as_ref().map_or(true, |(b, _)| s > *b) {
                        best = Some((s, i));
                    } else if let Some(bst) = best.as_mut() {
                        bst.1 = bst.1.min(i);
                    }
                }
            }
        }
        let (s, m) = best.ok_or_else(|| MnError::InvalidInput("constant polynomial".into()))?;
        for (i, c) in self.coeffs.iter().enumerate().take(n) {
            if let Some(c) = c {
                if c.is_empty() {
                    let line = &vn - &s * rat_int((n - i) as i64);
                    if *c.trunc() <= line {
                        return Err(MnError::PrecisionTooLow(format!(
                            "coefficient {i} unknown at or below the last segment"
                        )));
                    }
                }
            }
        }
        Ok(Some((s, m)))
    }

    /// `Res(T) = sum_{k=0}^{n-m} C_e(a_(n-k)) T^k` with
    /// `e = v(a_m) + s (n - m - k)`, returned low-to-high.
    pub fn residue_polynomial(&self, s: &Rat, m: usize) -> Result<Vec<FqElem>> {
        let n = self.degree();
        let vm = self.coeffs[m]
            .as_ref()
            .ok_or_else(|| MnError::Internal("segment end is zero".into()))?
            .valuation()?;
        let mut out = Vec::with_capacity(n - m + 1);
        for k in 0..=(n - m) {
            let e = &vm + s * rat_int((n - m - k) as i64);
            out.push(match &self.coeffs[n - k] {
                None => FqElem::ZERO,
                Some(c) => c.coeff_at(&e).map_err(|_| {
                    MnError::PrecisionTooLow(format!("digit at {} of coefficient {} unknown", fmt_rat(&e), n - k))
                })?,
            });
        }
        Ok(out)
    }
}

fn cross(o: &(usize, Rat), a: &(usize, Rat), b: &(usize, Rat)) -> Rat {
    let (ox, ax, bx) = (rat_int(o.0 as i64), rat_int(a.0 as i64), rat_int(b.0 as i64));
    (&ax - &ox) * (&b.1 - &o.1) - (&a.1 - &o.1) * (&bx - &ox)
}

/// Lower convex hull of points sorted by abscissa.
pub fn lower_hull(pts: &[(usize, Rat)]) -> Vec<(usize, Rat)> {
    let mut hull: Vec<(usize, Rat)> = Vec::new();
    for pt in pts {
        while hull.len() >= 2 && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], pt) <= Rat::zero() {
            hull.pop();
        }
        hull.push(pt.clone());
    }
    hull
}

/// Height of the hull above abscissa `i`; `+inf` is reported as a huge value
/// only outside the hull's range, where callers never ask.
pub fn hull_at(hull: &[(usize, Rat)], i: usize) -> Rat {
    for w in hull.windows(2) {
        let ((i0, v0), (i1, v1)) = (&w[0], &w[1]);
        if *i0 <= i && i <= *i1 {
            return v0 + (v1 - v0) * Rat::new((i - i0).into(), (i1 - i0).into());
        }
    }
    hull.iter().find(|(j, _)| *j == i).map(|(_, v)| v.clone()).unwrap_or_else(|| rat_int(i64::MAX))
}

/// `Phi_(p^n)(T) = sum_{k<p} T^(p^(n-1) k)`.
pub fn phi_cyclotomic(ctx: &MnCtx, n: u32, trunc: &Rat) -> Result<MNPoly> {
    if n < 1 {
        return Err(MnError::InvalidInput("cyclotomic level n must be >= 1".into()));
    }
    let p = ctx.p() as usize;
    let stride = p.pow(n - 1);
    let deg = stride * (p - 1);
    let mut ints = vec![0i64; deg + 1];
    for k in 0..p {
        ints[deg - stride * k] = 1;
    }
    Ok(MNPoly::from_ints(ctx, &ints, trunc))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonStep {
    pub step: usize,
    pub m_max: usize,
    pub s_max: Rat,
    /// Residue polynomial, low-to-high.
    pub residue: Vec<FqElem>,
    pub root: FqElem,
    /// `v(P(r_i))` after the step; `None` when `P(r_i)` is zero or has no
    /// known terms at the working precision.
    pub value_valuation: Option<Rat>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonTrace {
    pub p: u64,
    pub steps: Vec<NewtonStep>,
    /// Slope of the polygon after the final step: the certified accuracy.
    pub next_slope: Option<Rat>,
}

/// How a Newton run chooses among several residue roots.
pub type RootPicker = fn(&[(FqElem, usize)]) -> FqElem;

/// The default picker: the smallest root in enumeration order.
pub fn smallest_root(roots: &[(FqElem, usize)]) -> FqElem {
    roots[0].0
}

/// State of a digit-by-digit root approximation.
pub struct NewtonRunner {
    ctx: MnCtx,
    poly: MNPoly,
    work: Rat,
    terms: Vec<(Rat, FqElem)>,
    pub trace: NewtonTrace,
    picker: RootPicker,
    finished: bool,
    /// Set when `P(r)` has no known terms: `r` is a root to the working
    /// precision and the loop cannot resolve anything further.
    vanished: bool,
}

impl NewtonRunner {
    /// `work` is the working precision of the coefficients of `poly`.
    pub fn new(poly: MNPoly, work: Rat, picker: RootPicker) -> Result<NewtonRunner> {
        let ctx = poly
            .coeffs
            .iter()
            .flatten()
            .next()
            .ok_or_else(|| MnError::InvalidInput("zero polynomial".into()))?
            .ctx()
            .clone();
        Ok(NewtonRunner {
            trace: NewtonTrace { p: ctx.p(), steps: vec![], next_slope: None },
            ctx,
            poly,
            work,
            terms: vec![],
            picker,
            finished: false,
            vanished: false,
        })
    }

    pub fn finished(&self) -> bool {
        self.finished
    }

    /// Largest slope of the current shifted polynomial; `None` if an exact
    /// root has been reached.
    pub fn peek_slope(&self) -> Result<Option<Rat>> {
        Ok(self.poly.last_segment()?.map(|(s, _)| s))
    }

    /// One loop iteration: `r <- r + [c] p^s`, `P <- P(T + [c] p^s)`.
    pub fn step(&mut self) -> Result<()> {
        if self.finished {
            return Ok(());
        }
        if self.vanished {
            return Err(MnError::PrecisionTooLow(format!(
                "P(r) vanishes to the working precision {}",
                fmt_rat(&self.work)
            )));
        }
        let (s, m) = match self.poly.last_segment()? {
            None => {
                self.finished = true;
                return Ok(());
            }
            Some(x) => x,
        };
        if let Some(prev) = self.trace.steps.last() {
            if s <= prev.s_max {
                return Err(MnError::Internal("slopes of the Newton loop must increase".into()));
            }
        }
        let res = self.poly.residue_polynomial(&s, m)?;
        let field = self.ctx.field();
        let (roots, leftover) = field.poly_roots_with_multiplicity(&res)?;
        if leftover > 0 || roots.is_empty() {
            return Err(MnError::RootOutsideField(format!(
                "residue polynomial of degree {} has {leftover} roots outside F_(p^2)",
                res.len() - 1
            )));
        }
        let c = (self.picker)(&roots);
        let mu = MNElement::monomial(&self.ctx, s.clone(), c, self.work.clone());
        self.poly = self.poly.perturb(&mu);
        // Later shifts have valuation > s, so coefficient i only influences
        // the constant term to precision work - (n - i) s.
        let n = self.poly.degree();
        let (work, sc) = (self.work.clone(), s.clone());
        self.poly.truncate_with(|i| &work - &sc * rat_int((n - i) as i64));
        self.terms.push((s.clone(), c));
        let value_valuation = match &self.poly.coeffs[n] {
            Some(c) if !c.is_empty() => Some(c.valuation()?),
            Some(_) => {
                self.vanished = true;
                None
            }
            None => None,
        };
        if let (Some(prev), Some(cur)) =
            (self.trace.steps.last().and_then(|x| x.value_valuation.clone()), value_valuation.as_ref())
        {
            if *cur <= prev {
                return Err(MnError::Internal("v(P(r_i)) must increase".into()));
            }
        }
        self.trace.steps.push(NewtonStep {
            step: self.trace.steps.len() + 1,
            m_max: m,
            s_max: s,
            residue: res,
            root: c,
            value_valuation,
        });
        Ok(())
    }

    /// The current approximation, truncated at its certified accuracy
    /// (the next slope) when that is known.
    pub fn approximation(&mut self) -> Result<MNElement> {
        let next = if self.vanished {
            // A constant term of valuation `work` bounds the next slope from below.
            let mut lower = self.poly.clone();
            let n = lower.degree();
            lower.coeffs[n] = Some(MNElement::monomial(&self.ctx, self.work.clone(), FqElem::ONE, &self.work + Rat::one()));
            lower.last_segment()?.map(|(s, _)| s)
        } else {
            self.peek_slope()?
        };
        self.trace.next_slope = next.clone();
        let t = next.unwrap_or_else(|| self.work.clone());
        Ok(MNElement::from_terms(&self.ctx, self.terms.clone(), t))
    }
}

/// Runs at most `max_steps` iterations of the Newton loop on `poly`.
pub fn newton_run(poly: &MNPoly, max_steps: usize, work: &Rat) -> Result<(MNElement, NewtonTrace)> {
    newton_run_with(poly, max_steps, work, smallest_root)
}

pub fn newton_run_with(
    poly: &MNPoly,
    max_steps: usize,
    work: &Rat,
    picker: RootPicker,
) -> Result<(MNElement, NewtonTrace)> {
    let mut runner = NewtonRunner::new(poly.clone(), work.clone(), picker)?;
    for _ in 0..max_steps {
        runner.step()?;
        if runner.finished() {
            break;
        }
    }
    let approx = runner.approximation()?;
    Ok((approx, runner.trace))
}

impl NewtonTrace {
    pub fn to_json(&self, ctx: &MnCtx) -> Value {
        let f = ctx.field();
        json!({
            "p": self.p,
            "steps": self.steps.iter().map(|s| json!({
                "step": s.step,
                "m_max": s.m_max,
                "s_max": fmt_rat(&s.s_max),
                "residue": s.residue.iter().map(|c| f.format(*c)).collect::<Vec<_>>(),
                "root": f.format(s.root),
                "value_valuation": s.value_valuation.as_ref().map(fmt_rat).unwrap_or_else(|| "inf".into()),
            })).collect::<Vec<_>>(),
            "next_slope": self.next_slope.as_ref().map(fmt_rat).unwrap_or_else(|| "inf".into()),
        })
    }
}

/// Working precisions tried for `Phi_(p^n)` when the caller does not fix one.
/// The constant term of a shifted `Phi_(p^n)` has valuation below `n`, so a
/// precision of `n + 1` always suffices. Smaller ones are much cheaper and
/// usually enough; a run that needs more fails loudly with
/// [`MnError::PrecisionTooLow`] and is retried one unit higher.
pub fn work_precision_ladder(n: u32) -> Vec<Rat> {
    (2..=(n as i64 + 1).max(2)).map(rat_int).collect()
}

/// Runs the Newton loop on `Phi_(p^n)`, either at the given working
/// precision or along [`work_precision_ladder`].
pub fn newton_cyclotomic(
    ctx: &MnCtx,
    n: u32,
    max_steps: usize,
    work: Option<&Rat>,
) -> Result<(MNElement, NewtonTrace)> {
    let ladder = match work {
        Some(w) => vec![w.clone()],
        None => work_precision_ladder(n),
    };
    let mut last = None;
    for w in &ladder {
        match newton_run(&phi_cyclotomic(ctx, n, w)?, max_steps, w) {
            Err(e @ MnError::PrecisionTooLow(_)) => last = Some(e),
            other => return other,
        }
    }
    Err(last.expect("ladder is never empty"))
}
