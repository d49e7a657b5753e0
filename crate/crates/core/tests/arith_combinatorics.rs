use num_bigint::BigInt;
use num_traits::{One, Zero};
use proptest::prelude::*;

use mn_core::combinatorics::{
    bell_complete_seq, bell_incomplete, bell_inverse, falling_factorial, harmonic, stirling2, stirling2_restricted,
    stirling2_restricted_recurrence, InverseMethod,
};
use mn_core::exact_arith::{rat, rat_int, vp_rational, Rat, Valuation};

/// All set partitions of `{0..n}` as block-size lists, from restricted
/// growth strings.
fn partitions(n: usize) -> Vec<Vec<usize>> {
    fn go(i: usize, n: usize, rgs: &mut Vec<usize>, max: usize, out: &mut Vec<Vec<usize>>) {
        if i == n {
            let blocks = rgs.iter().max().map_or(0, |m| m + 1);
            let mut sizes = vec![0; blocks];
            for &b in rgs.iter() {
                sizes[b] += 1;
            }
            out.push(sizes);
            return;
        }
        for b in 0..=max + 1 {
            if i == 0 && b > 0 {
                break;
            }
            rgs.push(b);
            go(i + 1, n, rgs, if i == 0 { 0 } else { max.max(b) }, out);
            rgs.pop();
        }
    }
    let mut out = vec![];
    go(0, n, &mut vec![], 0, &mut out);
    out
}

fn brute_bell(n: usize, k: usize, xs: &[Rat]) -> Rat {
    partitions(n)
        .into_iter()
        .filter(|sizes| sizes.len() == k)
        .map(|sizes| sizes.iter().fold(Rat::one(), |acc, &s| acc * xs.get(s - 1).cloned().unwrap_or_else(Rat::zero)))
        .fold(Rat::zero(), |a, b| a + b)
}

fn naive_vp(q: &Rat, p: i64) -> Option<i64> {
    if q.is_zero() {
        return None;
    }
    let count = |mut n: BigInt| {
        let mut c = 0;
        while (&n % p).is_zero() {
            n /= p;
            c += 1;
        }
        c
    };
    Some(count(q.numer().clone()) - count(q.denom().clone()))
}

#[test]
fn valuation_examples() {
    assert_eq!(vp_rational(&rat(9, 2), 3).unwrap(), Valuation::Finite(2));
    assert_eq!(vp_rational(&rat(0, 1), 5).unwrap(), Valuation::Infinite);
    assert_eq!(vp_rational(&rat(11, 6), 3).unwrap(), Valuation::Finite(-1));
    assert!(vp_rational(&rat(1, 1), 4).is_err());
    assert!(vp_rational(&rat(1, 1), 2).is_err());
}

#[test]
fn harmonic_matches_summation() {
    assert_eq!(harmonic(1).unwrap(), rat(1, 1));
    assert_eq!(harmonic(3).unwrap(), rat(11, 6));
    assert_eq!(harmonic(4).unwrap(), rat(25, 12));
    for k in 1..30 {
        let direct = (1..=k).fold(Rat::zero(), |a, i| a + rat(1, i));
        assert_eq!(harmonic(k).unwrap(), direct);
    }
    assert!(harmonic(0).is_err());
}

#[test]
fn falling_factorial_examples() {
    assert_eq!(falling_factorial(&rat(5, 1), 3), rat(60, 1));
    assert_eq!(falling_factorial(&rat(7, 3), 0), rat(1, 1));
    assert_eq!(falling_factorial(&rat(3, 1), 5), rat(0, 1));
    // (1/2)(-1/2)(-3/2) = 3/8
    assert_eq!(falling_factorial(&rat(1, 2), 3), rat(3, 8));
}

#[test]
fn bell_polynomials_against_enumeration() {
    assert_eq!(bell_incomplete(4, 2, &[rat_int(1), rat_int(1), rat_int(0)]).unwrap(), rat_int(3));
    assert_eq!(bell_incomplete(3, 3, &[rat_int(2)]).unwrap(), rat_int(8));
    assert_eq!(bell_incomplete(6, 3, &vec![rat_int(1); 4]).unwrap(), rat_int(90));
    assert!(bell_incomplete(4, 2, &[rat_int(1)]).is_err());
    let xs: Vec<Rat> = (1..=7).map(|i| rat(i * i - 3, i + 1)).collect();
    for n in 1..=7 {
        for k in 1..=n {
            assert_eq!(bell_incomplete(n, k, &xs[..n - k + 1]).unwrap(), brute_bell(n, k, &xs), "B_({n},{k})");
        }
    }
}

#[test]
fn stirling_against_enumeration() {
    assert_eq!(stirling2(1, 1), BigInt::from(1));
    assert_eq!(stirling2(4, 2), BigInt::from(7));
    assert_eq!(stirling2(5, 3), BigInt::from(25));
    assert_eq!(stirling2(2, 5), BigInt::from(0));
    assert_eq!(stirling2_restricted(4, 2, 2), BigInt::from(3));
    assert_eq!(stirling2_restricted(4, 3, 2), BigInt::from(6));
    for p in [3usize, 5, 7] {
        assert_eq!(stirling2_restricted(p, 1, p - 1), BigInt::from(0));
    }
    for n in 1..=9 {
        let parts = partitions(n);
        for k in 1..=n {
            for r in 1..=n {
                let count = parts.iter().filter(|s| s.len() == k && s.iter().all(|&b| b <= r)).count();
                assert_eq!(stirling2_restricted(n, k, r), BigInt::from(count), "S_{r}({n},{k})");
                assert_eq!(stirling2_restricted_recurrence(n, k, r), BigInt::from(count));
            }
        }
    }
}

#[test]
fn complete_bell_examples() {
    assert_eq!(bell_complete_seq(&[rat(3, 7)]).unwrap(), vec![rat(3, 7)]);
    assert_eq!(bell_complete_seq(&[rat_int(1), rat_int(0)]).unwrap(), vec![rat_int(1), rat_int(1)]);
    assert_eq!(bell_complete_seq(&vec![rat_int(1); 3]).unwrap(), vec![rat_int(1), rat_int(2), rat_int(5)]);
    assert!(bell_complete_seq(&[]).is_err());
}

#[test]
fn bell_inverse_examples() {
    let (y1, y2) = (rat(2, 3), rat(5, 1));
    for m in [InverseMethod::Recurrence, InverseMethod::Riordan] {
        assert_eq!(bell_inverse(&[y1.clone(), y2.clone()], m).unwrap(), vec![y1.clone(), &y2 - &y1 * &y1]);
        let delta = bell_inverse(&[rat_int(1), rat_int(1), rat_int(0), rat_int(0)], m).unwrap();
        assert_eq!(delta, vec![rat_int(1), rat_int(0), rat_int(-1), rat_int(3)]);
    }
}

fn small_rat() -> impl Strategy<Value = Rat> {
    (-40i64..40, 1i64..12).prop_map(|(n, d)| rat(n, d))
}

proptest! {
    #[test]
    fn vp_is_multiplicative(a in small_rat(), b in small_rat(), p in prop::sample::select(vec![3i64, 5, 7, 11])) {
        let va = vp_rational(&a, p).unwrap();
        let vb = vp_rational(&b, p).unwrap();
        prop_assert_eq!(vp_rational(&(&a * &b), p).unwrap(), va.add(vb));
        prop_assert_eq!(va.finite(), naive_vp(&a, p));
    }

    #[test]
    fn bell_inverse_roundtrip(ys in prop::collection::vec(small_rat(), 1..7)) {
        let rec = bell_inverse(&ys, InverseMethod::Recurrence).unwrap();
        let rio = bell_inverse(&ys, InverseMethod::Riordan).unwrap();
        prop_assert_eq!(&rec, &rio);
        prop_assert_eq!(bell_complete_seq(&rec).unwrap(), ys);
    }

    #[test]
    fn complete_bell_is_sum_of_partials(xs in prop::collection::vec(small_rat(), 1..7)) {
        let b = bell_complete_seq(&xs).unwrap();
        for n in 1..=xs.len() {
            let sum = (1..=n).fold(Rat::zero(), |a, k| a + bell_incomplete(n, k, &xs[..n - k + 1]).unwrap());
            prop_assert_eq!(&b[n - 1], &sum);
        }
    }
}
