//! Randomised and exhaustive property suites, shared by `mnexp selftest`
//! and the test targets.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::combinatorics::{stirling2_restricted, stirling2_restricted_recurrence};
use crate::exact_arith::{rat, rat_int, Rat};
use crate::gfq::{FieldCtx, FqElem};
use crate::mn_series::{MNElement, MnCtx};
use crate::newton::{hull_at, MNPoly};
use crate::sigma_ring::SigmaElement;
use crate::witt::{WittCtx, WittElem};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Size {
    Reduced,
    Full,
}

impl Size {
    fn pick(self, reduced: usize, full: usize) -> usize {
        match self {
            Size::Reduced => reduced,
            Size::Full => full,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SuiteResult {
    pub name: String,
    pub cases: usize,
    pub passed: bool,
    /// First failing case, if any.
    pub detail: Option<String>,
}

impl SuiteResult {
    fn from_failures(name: String, cases: usize, failures: Vec<String>) -> SuiteResult {
        SuiteResult { name, cases, passed: failures.is_empty(), detail: failures.into_iter().next() }
    }
}

impl fmt::Display for SuiteResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{}: {} cases {s}", self.name, self.cases)?;
        if let Some(d) = &self.detail {
            write!(f, " ({d})")?;
        }
        Ok(())
    }
}

fn rng(tag: &str, p: u64) -> ChaCha8Rng {
    let seed = tag.bytes().fold(p, |h, b| h.wrapping_mul(1_000_003).wrapping_add(b as u64));
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random element with up to `max_terms` terms at exponents in
/// `[lo, lo + span)` with denominators dividing `den`.
pub fn random_mn(ctx: &MnCtx, r: &mut ChaCha8Rng, lo: i64, span: i64, den: i64, max_terms: usize, t: &Rat) -> MNElement {
    let f = ctx.field();
    let n = r.gen_range(0..=max_terms);
    let terms = (0..n)
        .map(|_| {
            let x = rat_int(lo) + rat(r.gen_range(0..span * den), den);
            (x, f.from_index(r.gen_range(1..f.order())))
        })
        .collect();
    MNElement::from_terms(ctx, terms, t.clone())
}

/// Agreement up to the common truncation.
fn agree(a: &MNElement, b: &MNElement) -> bool {
    a.sub(b).is_empty()
}

/// Commutativity, associativity, distributivity and inverses on random
/// truncated elements.
pub fn ring_axioms(p: i64, cases: usize) -> SuiteResult {
    let ctx = MnCtx::new(p).expect("odd prime");
    let mut r = rng("ring", p as u64);
    let mut fails = vec![];
    let den = 2 * p;
    for case in 0..cases {
        let gen = |r: &mut ChaCha8Rng| {
            let t = rat_int(r.gen_range(2..=3)) + rat(r.gen_range(0..den), den);
            random_mn(&ctx, r, -1, 3, den, 4, &t)
        };
        let (a, b, c) = (gen(&mut r), gen(&mut r), gen(&mut r));
        let mut checks = vec![
            ("a+b=b+a", agree(&a.add(&b), &b.add(&a))),
            ("(a+b)+c=a+(b+c)", agree(&a.add(&b).add(&c), &a.add(&b.add(&c)))),
            ("ab=ba", agree(&a.mul(&b), &b.mul(&a))),
            ("(ab)c=a(bc)", agree(&a.mul(&b).mul(&c), &a.mul(&b.mul(&c)))),
            ("a(b+c)=ab+ac", agree(&a.mul(&b.add(&c)), &a.mul(&b).add(&a.mul(&c)))),
            ("a-a=0", a.sub(&a).is_empty()),
        ];
        if !a.is_empty() {
            let one = MNElement::one(&ctx, rat_int(10));
            checks.push(("a*inv(a)=1", a.inv().map(|i| agree(&a.mul(&i), &one)).unwrap_or(false)));
        }
        for (name, ok) in checks {
            if !ok {
                fails.push(format!("case {case}: {name} for a={a}, b={b}, c={c}"));
            }
        }
    }
    SuiteResult::from_failures(format!("ring-axioms p={p}"), cases, fails)
}

/// Exhaustive Teichmüller multiplicativity and idempotence in `W_s(F_9)` for
/// `s <= max_s`, and the digit roundtrip on all of `W_s(F_9)` for `s <= 4`.
pub fn teichmuller_exhaustive(max_s: u32) -> SuiteResult {
    let field = Arc::new(FieldCtx::new(3, 2).expect("F_9"));
    let mut fails = vec![];
    let mut cases = 0;
    let elems: Vec<FqElem> = field.elements().collect();
    for s in 1..=max_s {
        let w = WittCtx::new(field.clone(), s).expect("small precision");
        for &a in &elems {
            let ta = w.teich_lift(a);
            cases += 1;
            if w.residue(ta) != a || w.pow(ta, field.order()) != ta {
                fails.push(format!("s={s}: lift of {} is not a fixed Teichmüller representative", field.format(a)));
            }
            for &b in &elems {
                cases += 1;
                if w.mul(ta, w.teich_lift(b)) != w.teich_lift(field.mul(a, b)) {
                    fails.push(format!("s={s}: tau({})tau({}) != tau(product)", field.format(a), field.format(b)));
                }
            }
        }
        let m = if s <= 4 { 3u128.pow(s) } else { 0 };
        for x in 0..m {
            for y in 0..m {
                let e = WittElem { a: x, b: y };
                cases += 1;
                if w.from_digits(&w.teich_digits(e)) != e {
                    fails.push(format!("s={s}: digit roundtrip of ({x},{y})"));
                }
            }
        }
    }
    SuiteResult::from_failures(format!("teichmuller p=3 s<={max_s}"), cases, fails)
}

fn random_sigma(ctx: &MnCtx, r: &mut ChaCha8Rng, level: u32, t: &Rat) -> SigmaElement {
    let p = ctx.p() as i64;
    let step = Rat::new(1.into(), (p.pow(level)).into());
    let coeffs =
        (0..p).map(|j| random_mn(ctx, r, 0, 1, 2 * p, 3, &(t + &step * rat_int(j)))).collect();
    SigmaElement::new(level, coeffs, t.clone()).expect("level >= 1")
}

/// Substituting finite sums for `sigma_n` commutes with the sigma-ring
/// operations, up to the accuracy each side reports.
pub fn sigma_substitution(p: i64, cases: usize) -> SuiteResult {
    let ctx = MnCtx::new(p).expect("odd prime");
    let mut r = rng("sigma", p as u64);
    let mut fails = vec![];
    let mut total = 0;
    let t = rat_int(2);
    for n in 2..=3u32 {
        for k in 2..=4u32 {
            for case in 0..cases {
                total += 1;
                let a = random_sigma(&ctx, &mut r, n, &t);
                let b = random_sigma(&ctx, &mut r, n, &t);
                let res = (|| -> crate::error::Result<Vec<(&str, bool)>> {
                    let (sa, sb) = (a.substitute(k)?, b.substitute(k)?);
                    let mut out = vec![
                        ("sum", agree(&a.add(&b).substitute(k)?, &sa.add(&sb))),
                        ("product", agree(&a.mul(&b).substitute(k)?, &sa.mul(&sb))),
                        ("p-th power", agree(&a.pow(ctx.p()).substitute(k)?, &sa.pow(ctx.p()))),
                        ("shift", agree(&a.level_shift(n + 1)?.substitute(k)?, &sa)),
                    ];
                    let unit = a.add_mn(&MNElement::one(&ctx, t.clone()));
                    if let Ok(i) = unit.inv() {
                        out.push(("inverse", agree(&i.substitute(k)?, &unit.substitute(k)?.inv()?)));
                    }
                    Ok(out)
                })();
                match res {
                    Ok(list) => {
                        for (name, ok) in list {
                            if !ok {
                                fails.push(format!("n={n} K={k} case {case}: {name}"));
                            }
                        }
                    }
                    Err(e) => fails.push(format!("n={n} K={k} case {case}: {e}")),
                }
            }
        }
    }
    SuiteResult::from_failures(format!("sigma-substitution p={p}"), total, fails)
}

/// `A^p = sum [a^p] p^(pq) + O(p^(1 + p v(A)))` for `A` supported in `[0, 1/p)`.
pub fn frobenius_power(p: i64, cases: usize) -> SuiteResult {
    let ctx = MnCtx::new(p).expect("odd prime");
    let f = ctx.field();
    let mut r = rng("frobenius", p as u64);
    let mut fails = vec![];
    let t = rat_int(3);
    for case in 0..cases {
        let den = p * r.gen_range(1..=4);
        let n = r.gen_range(1..=5);
        let mut numers: Vec<i64> = (0..n).map(|_| r.gen_range(0..den / p)).collect();
        numers.sort_unstable();
        numers.dedup();
        let terms: Vec<(Rat, FqElem)> =
            numers.into_iter().map(|a| (rat(a, den), f.from_index(r.gen_range(1..f.order())))).collect();
        let a = MNElement::from_terms(&ctx, terms, t.clone());
        if a.is_empty() {
            continue;
        }
        let v = a.valuation().expect("nonempty");
        let lhs = a.pow(p as u64);
        let rhs = MNElement::from_terms(
            &ctx,
            a.terms().iter().map(|(x, d)| (x * rat_int(p), f.frobenius(*d))).collect(),
            t.clone(),
        );
        let d = lhs.sub(&rhs);
        let need = rat_int(1) + v * rat_int(p);
        if d.trunc() < &need || d.v_lb() < need {
            fails.push(format!("case {case}: A={a}"));
        }
    }
    SuiteResult::from_failures(format!("frobenius-power p={p}"), cases, fails)
}

/// Newton polygons of random polynomials: every point lies on or above the
/// hull, the hull passes through both end points and slopes increase.
pub fn hull_validity(p: i64, cases: usize) -> SuiteResult {
    let ctx = MnCtx::new(p).expect("odd prime");
    let f = ctx.field();
    let mut r = rng("hull", p as u64);
    let mut fails = vec![];
    let t = rat_int(12);
    for case in 0..cases {
        let deg = r.gen_range(1..=12);
        let mut coeffs: Vec<Option<MNElement>> = (0..=deg)
            .map(|_| {
                if r.gen_bool(0.25) {
                    None
                } else {
                    let x = rat(r.gen_range(-6..=18), r.gen_range(2..=4));
                    Some(MNElement::monomial(&ctx, x, f.from_index(r.gen_range(1..f.order())), t.clone()))
                }
            })
            .collect();
        coeffs[0] = Some(MNElement::one(&ctx, t.clone()));
        if r.gen_bool(0.9) && coeffs[deg].is_none() {
            coeffs[deg] = Some(MNElement::from_int(&ctx, 1, t.clone()));
        }
        let poly = MNPoly { coeffs };
        let pts: Vec<(usize, Rat)> = poly
            .coeffs
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.as_ref().map(|c| (i, c.valuation().expect("monomial"))))
            .collect();
        let np = match poly.newton_polygon() {
            Ok(np) => np,
            Err(e) => {
                fails.push(format!("case {case}: {e}"));
                continue;
            }
        };
        let hull = &np.vertices;
        let mut ok = hull.first().map(|v| v.0) == pts.first().map(|v| v.0)
            && hull.last().map(|v| v.0) == pts.last().map(|v| v.0);
        ok &= pts.iter().all(|(i, v)| *v >= hull_at(hull, *i));
        let slopes: Vec<Rat> = hull
            .windows(2)
            .map(|w| (&w[1].1 - &w[0].1) / rat_int((w[1].0 - w[0].0) as i64))
            .collect();
        ok &= slopes.windows(2).all(|s| s[0] < s[1]);
        if !ok {
            fails.push(format!("case {case}: points {pts:?} hull {hull:?}"));
        }
    }
    SuiteResult::from_failures(format!("hull-validity p={p}"), cases, fails)
}

/// Restricted Stirling numbers against a direct enumeration of set
/// partitions by restricted growth strings.
pub fn stirling_partitions(max_n: usize) -> SuiteResult {
    let mut fails = vec![];
    let mut cases = 0;
    for n in 1..=max_n {
        // counts[k][b] = partitions into k blocks whose largest block has size b
        let mut counts = vec![vec![0u64; n + 1]; n + 1];
        let mut rgs = vec![0usize; n];
        loop {
            let k = rgs.iter().max().unwrap() + 1;
            let mut sizes = vec![0usize; k];
            for &b in &rgs {
                sizes[b] += 1;
            }
            counts[k][*sizes.iter().max().unwrap()] += 1;
            // next restricted growth string
            let mut i = n - 1;
            loop {
                if i == 0 {
                    break;
                }
                let bound = rgs[..i].iter().max().unwrap() + 1;
                if rgs[i] < bound {
                    rgs[i] += 1;
                    for x in rgs.iter_mut().skip(i + 1) {
                        *x = 0;
                    }
                    break;
                }
                i -= 1;
            }
            if i == 0 {
                break;
            }
        }
        for k in 1..=n {
            for r in 1..=n {
                cases += 1;
                let expect: u64 = counts[k][..=r].iter().sum();
                let got = stirling2_restricted(n, k, r);
                if got != expect.into() || stirling2_restricted_recurrence(n, k, r) != got {
                    fails.push(format!("S_<={r}({n},{k}): enumeration {expect}, formula {got}"));
                }
            }
        }
    }
    SuiteResult::from_failures(format!("stirling-partitions n<={max_n}"), cases, fails)
}

/// Every suite at the given size.
pub fn run_all(size: Size) -> Vec<SuiteResult> {
    let primes: &[i64] = &[3, 5, 7];
    let mut out = vec![];
    for &p in primes {
        out.push(ring_axioms(p, size.pick(100, 1000)));
    }
    out.push(teichmuller_exhaustive(size.pick(2, 6) as u32));
    for &p in &[3, 5] {
        out.push(sigma_substitution(p, size.pick(2, 8)));
    }
    for &p in primes {
        out.push(frobenius_power(p, size.pick(40, 200)));
        out.push(hull_validity(p, size.pick(100, 500)));
    }
    out.push(stirling_partitions(size.pick(6, 9)));
    out
}
