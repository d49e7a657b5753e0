use proptest::prelude::*;

use mn_core::exact_arith::{rat, rat_int, Rat};
use mn_core::expansions::Ex;
use mn_core::gfq::FqElem;
use mn_core::mn_series::{MNElement, MnCtx};
use mn_core::newton::{hull_at, lower_hull, newton_cyclotomic, newton_run, phi_cyclotomic, MNPoly};

fn ctx(p: i64) -> MnCtx {
    MnCtx::new(p).unwrap()
}

#[test]
fn cyclotomic_coefficients() {
    let c = ctx(3);
    let t = rat_int(3);
    let present = |poly: &MNPoly| poly.coeffs.iter().map(Option::is_some).collect::<Vec<_>>();
    let phi9 = phi_cyclotomic(&c, 2, &t).unwrap();
    assert_eq!(present(&phi9), vec![true, false, false, true, false, false, true]);
    let phi3 = phi_cyclotomic(&c, 1, &t).unwrap();
    assert_eq!(present(&phi3), vec![true, true, true]);
    let phi25 = phi_cyclotomic(&ctx(5), 2, &t).unwrap();
    assert_eq!(phi25.degree(), 20);
    assert_eq!(phi25.coeffs.iter().flatten().count(), 5);
    for a in phi25.coeffs.iter().flatten() {
        assert_eq!(a.terms(), &[(rat_int(0), FqElem::ONE)]);
    }
}

#[test]
fn polygons_and_residues() {
    let c = ctx(3);
    let t = rat_int(4);
    let f = c.field();
    let quad = MNPoly::from_ints(&c, &[1, 0, -3], &t);
    let poly = quad.newton_polygon().unwrap();
    assert_eq!(poly.vertices, vec![(0, rat_int(0)), (2, rat_int(1))]);
    assert_eq!(poly.s_max, Some(rat(1, 2)));
    // T^2 - 1, low-to-high
    assert_eq!(quad.residue_polynomial(&rat(1, 2), 0).unwrap(), vec![f.from_int(-1), FqElem::ZERO, FqElem::ONE]);

    let phi9 = phi_cyclotomic(&c, 2, &t).unwrap();
    let poly9 = phi9.newton_polygon().unwrap();
    assert_eq!(poly9.s_max, Some(rat_int(0)));
    assert!(poly9.vertices.iter().all(|(_, v)| *v == rat_int(0)));
    let res = phi9.residue_polynomial(&rat_int(0), 0).unwrap();
    let (roots, rest) = f.poly_roots_with_multiplicity(&res).unwrap();
    assert_eq!((roots, rest), (vec![(FqElem::ONE, 6)], 0));

    let c5 = ctx(5);
    let phi25 = phi_cyclotomic(&c5, 2, &t).unwrap();
    let res = phi25.residue_polynomial(&rat_int(0), 0).unwrap();
    assert_eq!(c5.field().poly_roots_with_multiplicity(&res).unwrap(), (vec![(FqElem::ONE, 20)], 0));

    let zero_const = MNPoly { coeffs: vec![Some(MNElement::one(&c, t.clone())), Some(MNElement::one(&c, t.clone())), None] };
    assert_eq!(zero_const.newton_polygon().unwrap().s_max, None);
}

#[test]
fn square_root_of_p() {
    let c = ctx(3);
    let work = rat_int(3);
    let quad = MNPoly::from_ints(&c, &[1, 0, -3], &work);
    let (root, trace) = newton_run(&quad, 1, &work).unwrap();
    assert_eq!(root.terms(), &[(rat(1, 2), FqElem::ONE)]);
    assert_eq!(trace.steps[0].s_max, rat(1, 2));
    // The first digit is already an exact root, so a further step has nothing
    // left to resolve at the working precision.
    assert!(newton_run(&quad, 2, &work).is_err());
    // sqrt(6) = 3^(1/2) sqrt(2) with sqrt(2) in the unramified part: digits
    // at 1/2, 3/2, 5/2.
    let work = rat_int(5);
    let six = MNPoly::from_ints(&c, &[1, 0, -6], &work);
    let (root, trace) = newton_run(&six, 3, &work).unwrap();
    let slopes: Vec<Rat> = trace.steps.iter().map(|s| s.s_max.clone()).collect();
    assert_eq!(slopes, vec![rat(1, 2), rat(3, 2), rat(5, 2)]);
    let sq = root.mul(&root);
    assert!(sq.sub(&MNElement::from_int(&c, 6, sq.trunc().clone())).is_empty());
    assert!(sq.trunc() > &rat_int(1));
}

#[test]
fn cyclotomic_roots_follow_closed_form() {
    for p in [3i64, 5] {
        let c = ctx(p);
        let steps = p as usize + 2;
        let (full, trace) = newton_cyclotomic(&c, 2, steps, None).unwrap();
        assert_eq!(trace.steps[0].root, FqElem::ONE);
        let ex = Ex::with_zeta(&c, trace.steps[1].root).unwrap();
        assert_eq!(full.terms(), ex.zeta_p2_approximation(steps - 1).as_slice());
        let (three, _) = newton_cyclotomic(&c, 2, 3, None).unwrap();
        let z = trace.steps[1].root;
        let f = c.field();
        // 1 + [z] p^(1/(p(p-1))) + [z^2 / 2] p^(2/(p(p-1)))
        let half = f.inv(f.from_int(2)).unwrap();
        let e = rat(1, p * (p - 1));
        let expect = vec![(rat_int(0), FqElem::ONE), (e.clone(), z), (e * rat_int(2), f.mul(f.mul(z, z), half))];
        assert_eq!(three.terms(), expect.as_slice());
        // The sigma phase: exponents 1/(p-1) - 1/p^l for l = 2..
        let tail: Vec<Rat> = full.terms()[p as usize..].iter().map(|(x, _)| x.clone()).collect();
        let expect_tail: Vec<Rat> = (2..=steps as i64 - p + 1).map(|l| rat(1, p - 1) - rat(1, p.pow(l as u32))).collect();
        assert_eq!(tail, expect_tail);
    }
}

/// Lower hull by brute force: a point is a vertex iff no segment between
/// two other points passes on or below it, and it is not above any segment.
fn brute_hull_height(pts: &[(usize, Rat)], i: usize) -> Rat {
    let mut best = pts.iter().find(|q| q.0 == i).map(|q| q.1.clone());
    for a in pts {
        for b in pts {
            if a.0 < i && i < b.0 {
                let h = &a.1 + (&b.1 - &a.1) * rat((i - a.0) as i64, (b.0 - a.0) as i64);
                best = Some(best.map_or(h.clone(), |x: Rat| x.min(h)));
            }
        }
    }
    best.unwrap()
}

proptest! {
    #[test]
    fn hull_matches_brute_force(vals in prop::collection::vec(prop::option::of((-6i64..18, 1i64..4)), 2..9)) {
        let mut pts: Vec<(usize, Rat)> = vals
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|(n, d)| (i, rat(n, d))))
            .collect();
        prop_assume!(pts.len() >= 2);
        pts.sort_by_key(|q| q.0);
        let hull = lower_hull(&pts);
        prop_assert_eq!(hull.first().map(|q| q.0), pts.first().map(|q| q.0));
        prop_assert_eq!(hull.last().map(|q| q.0), pts.last().map(|q| q.0));
        for v in &hull {
            prop_assert!(pts.contains(v));
        }
        for w in hull.windows(3) {
            let s1 = (&w[1].1 - &w[0].1) / rat_int((w[1].0 - w[0].0) as i64);
            let s2 = (&w[2].1 - &w[1].1) / rat_int((w[2].0 - w[1].0) as i64);
            prop_assert!(s1 < s2);
        }
        for i in pts.first().unwrap().0..=pts.last().unwrap().0 {
            prop_assert_eq!(hull_at(&hull, i), brute_hull_height(&pts, i));
        }
    }
}
