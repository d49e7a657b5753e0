use proptest::prelude::*;

use mn_core::exact_arith::{rat, rat_int, Rat};
use mn_core::gfq::FqElem;
use mn_core::mn_series::{mn_normalize, MNElement, MnCtx, Raw};
use mn_core::witt::WittElem;

fn ctx(p: i64) -> MnCtx {
    MnCtx::new(p).unwrap()
}

fn d(c: &MnCtx, n: i64) -> FqElem {
    c.field().from_int(n)
}

#[test]
fn normalisation_examples() {
    let c = ctx(3);
    let four = mn_normalize(&c, vec![(rat_int(0), Raw::Witt(WittElem { a: 4, b: 0 }))], rat_int(5));
    assert_eq!(four.terms(), &[(rat_int(0), d(&c, 1)), (rat_int(1), d(&c, 1))]);
    let t2 = c.witt().teich_lift(d(&c, 2));
    let two = mn_normalize(&c, vec![(rat_int(0), Raw::Witt(t2))], rat_int(5));
    assert_eq!(two.terms(), &[(rat_int(0), d(&c, 2))]);
    let c5 = ctx(5);
    let x = MNElement::from_int(&c5, 2, rat_int(2));
    assert_eq!(x.to_string(), "[2]*5^(0/1) + [4]*5^(1/1) + O(5^(2/1))");
}

#[test]
fn addition_examples() {
    let c = ctx(3);
    let t = rat_int(4);
    let one = MNElement::one(&c, t.clone());
    let m2 = MNElement::monomial(&c, rat_int(0), d(&c, 2), t.clone());
    let sum = one.add(&m2);
    assert!(sum.is_empty());
    assert_eq!(sum.trunc(), &t);
    // [2] + [2] = -2 = 1 - 3 = [1] + [2]*3
    assert_eq!(m2.add(&m2).terms(), &[(rat_int(0), d(&c, 1)), (rat_int(1), d(&c, 2))]);
    let a = MNElement::monomial(&c, rat(1, 2), d(&c, 1), t.clone());
    let b = MNElement::monomial(&c, rat(1, 3), d(&c, 1), t.clone());
    assert_eq!(a.add(&b).terms(), &[(rat(1, 3), d(&c, 1)), (rat(1, 2), d(&c, 1))]);
}

#[test]
fn multiplication_examples() {
    let c = ctx(3);
    let t = rat_int(3);
    let a = MNElement::monomial(&c, rat(1, 2), d(&c, 1), t.clone());
    let b = MNElement::monomial(&c, rat(1, 3), d(&c, 1), t.clone());
    assert_eq!(a.mul(&b).terms(), &[(rat(5, 6), d(&c, 1))]);
    let x = MNElement::from_terms(&c, vec![(rat_int(0), d(&c, 1)), (rat(1, 2), d(&c, 1))], rat_int(4));
    let sq = x.mul(&x);
    let expect = vec![
        (rat_int(0), d(&c, 1)),
        (rat(1, 2), d(&c, 2)),
        (rat_int(1), d(&c, 1)),
        (rat(3, 2), d(&c, 1)),
    ];
    assert_eq!(sq.terms(), expect.as_slice());
    let y = MNElement::from_int(&c, 5, rat_int(2));
    let shifted = y.shift(&rat_int(2));
    assert_eq!(shifted.trunc(), &rat_int(4));
    assert!(shifted.terms().iter().all(|(e, _)| *e >= rat_int(2)));
}

#[test]
fn inverse_examples() {
    let c = ctx(3);
    let a = MNElement::monomial(&c, rat(1, 2), d(&c, 1), rat_int(3));
    assert_eq!(a.inv().unwrap().terms(), &[(rat(-1, 2), d(&c, 1))]);
    let x = MNElement::from_int(&c, -2, rat_int(3));
    let inv = x.inv().unwrap();
    assert_eq!(inv.terms(), &[(rat_int(0), d(&c, 1)), (rat_int(1), d(&c, 1)), (rat_int(2), d(&c, 1))]);
    assert_eq!(inv.trunc(), &rat_int(3));
    assert!(MNElement::zero(&c, rat_int(2)).inv().is_err());
}

#[test]
fn valuation_and_coefficients() {
    let c = ctx(3);
    let x = MNElement::from_terms(&c, vec![(rat(-1, 9), d(&c, 1)), (rat_int(0), d(&c, 1))], rat_int(2));
    assert_eq!(x.valuation().unwrap(), rat(-1, 9));
    assert!(MNElement::zero(&c, rat_int(2)).valuation().is_err());
    let h = MNElement::monomial(&c, rat(1, 2), d(&c, 1), rat_int(2));
    assert_eq!(h.coeff_at(&rat(1, 2)).unwrap(), FqElem::ONE);
    assert_eq!(h.coeff_at(&rat(1, 3)).unwrap(), FqElem::ZERO);
    assert!(h.coeff_at(&rat_int(7)).is_err());
}

#[test]
fn pth_root_examples() {
    let c = ctx(3);
    let one = MNElement::one(&c, rat_int(1));
    assert_eq!(one.pth_root().unwrap().terms(), &[(rat_int(0), FqElem::ONE)]);
    let a = MNElement::monomial(&c, rat(1, 9), d(&c, 2), rat_int(1));
    assert_eq!(a.pth_root().unwrap().terms(), &[(rat(1, 27), d(&c, 2))]);
    let neg = MNElement::monomial(&c, rat(-1, 2), d(&c, 1), rat_int(1));
    assert!(neg.pth_root().is_err());
}

#[test]
fn integer_digits_match_witt_expansion() {
    for p in [3i64, 5, 7] {
        let c = ctx(p);
        let s = 4u32;
        let w = c.witt().at_precision(s);
        for n in [-50i64, -7, -1, 1, 2, 13, 99, 343] {
            let x = MNElement::from_int(&c, n, rat_int(s as i64));
            let digits = w.teich_digits(w.from_int(n as i128));
            let expect: Vec<(Rat, FqElem)> = digits
                .into_iter()
                .enumerate()
                .filter(|(_, dg)| !dg.is_zero())
                .map(|(i, dg)| (rat_int(i as i64), dg))
                .collect();
            assert_eq!(x.terms(), expect.as_slice(), "p={p} n={n}");
        }
    }
}

#[test]
fn json_roundtrip_and_mismatch() {
    let c = ctx(5);
    let g = c.field().gen();
    let x = MNElement::from_terms(&c, vec![(rat(-1, 4), g), (rat(2, 3), d(&c, 3))], rat(7, 2));
    let v = x.to_json();
    assert_eq!(v["trunc"], "7/2");
    assert_eq!(MNElement::from_json(&c, &v).unwrap(), x);
    assert!(MNElement::from_json(&ctx(7), &v).is_err());
}

fn element(c: MnCtx) -> impl Strategy<Value = MNElement> {
    let q = c.field().order();
    prop::collection::vec((-4i64..12, prop::sample::select(vec![1i64, 2, 3, 6]), 1..q), 0..5).prop_map(move |ts| {
        let f = c.field();
        let terms = ts.into_iter().map(|(n, den, i)| (rat(n, den), f.from_index(i))).collect();
        MNElement::from_terms(&c, terms, rat_int(3))
    })
}

fn agree(a: &MNElement, b: &MNElement) -> bool {
    a.sub(b).is_empty()
}

fn small_int() -> impl Strategy<Value = i64> {
    -2000i64..2000
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_axioms(a in element(ctx(3)), b in element(ctx(3)), e in element(ctx(3))) {
        prop_assert!(agree(&a.add(&b), &b.add(&a)));
        prop_assert!(agree(&a.mul(&b), &b.mul(&a)));
        prop_assert!(agree(&a.add(&b).add(&e), &a.add(&b.add(&e))));
        prop_assert!(agree(&a.mul(&b).mul(&e), &a.mul(&b.mul(&e))));
        prop_assert!(agree(&a.mul(&b.add(&e)), &a.mul(&b).add(&a.mul(&e))));
        prop_assert!(a.sub(&a).is_empty());
        prop_assert!(a.add(&b).trunc() <= a.trunc());
    }

    #[test]
    fn inverse_is_inverse(a in element(ctx(5))) {
        prop_assume!(!a.is_empty());
        let prod = a.mul(&a.inv().unwrap());
        prop_assert!(agree(&prod, &MNElement::one(a.ctx(), prod.trunc().clone())));
    }

    #[test]
    fn integers_embed_homomorphically(x in small_int(), y in small_int(), p in prop::sample::select(vec![3i64, 5, 7])) {
        let c = ctx(p);
        let t = rat_int(5);
        let (a, b) = (MNElement::from_int(&c, x, t.clone()), MNElement::from_int(&c, y, t.clone()));
        prop_assert_eq!(a.add(&b), MNElement::from_int(&c, x + y, t.clone()));
        prop_assert!(agree(&a.mul(&b), &MNElement::from_int(&c, x * y, t.clone())));
    }

    #[test]
    fn rationals_embed_homomorphically(n in -300i64..300, den in 1i64..60, m in 1i64..300) {
        let c = ctx(3);
        let (q, r) = (rat(n, den), rat(m, 7));
        let t = rat_int(4);
        let a = MNElement::from_rational(&c, &q, t.clone());
        let b = MNElement::from_rational(&c, &r, t.clone());
        prop_assert!(agree(&a.mul(&b), &MNElement::from_rational(&c, &(&q * &r), t.clone())));
        prop_assert!(agree(&a.add(&b), &MNElement::from_rational(&c, &(&q + &r), t.clone())));
    }

    #[test]
    fn json_roundtrip(a in element(ctx(7))) {
        prop_assert_eq!(MNElement::from_json(a.ctx(), &a.to_json()).unwrap(), a);
    }

    #[test]
    fn frobenius_via_pth_root(idx in 1u64..9, num in 0i64..3) {
        let c = ctx(3);
        let x = MNElement::monomial(&c, rat(num, 3), c.field().from_index(idx), rat_int(1));
        let r = x.pth_root().unwrap();
        prop_assert!(agree(&r.exact_to(&rat_int(1)).pow(3), &x));
    }
}
