use mn_core::exact_arith::{rat, rat_int};
use mn_core::expansions::{
    build_named, registry, residual_check, residual_r_eff, uniformizer, verify_identity, verify_many, Ex, Ext, Method,
    NamedElement, NamedParams, Status, VerificationReport, Witness,
};
use mn_core::gfq::FqElem;
use mn_core::mn_series::{MNElement, MnCtx};

fn ex(p: i64) -> Ex {
    Ex::new(&MnCtx::new(p).unwrap()).unwrap()
}

#[test]
fn lambda_uses_a_primitive_root_of_order_twice_p_minus_one() {
    for p in [3i64, 5, 7] {
        let e = ex(p);
        let z = e.zeta_digit();
        assert_eq!(e.ctx().field().mult_order(z).unwrap(), 2 * (p as u64 - 1));
        let lam = e.lambda(&rat_int(2));
        assert_eq!(lam.terms(), &[(rat(1, p * (p - 1)), z)]);
    }
    let e3 = ex(3);
    assert_eq!(e3.zeta_digit(), e3.ctx().field().gen());
}

#[test]
fn u_p_is_a_scalar() {
    let e = ex(5);
    assert_eq!(e.u_p_rational(), rat(25, 24));
    let t = rat_int(3);
    assert_eq!(e.u_p(&t), MNElement::from_rational(e.ctx(), &rat(25, 24), t));
}

#[test]
fn named_sigma_trunc() {
    let params = NamedParams { n: 2, sigma_terms: 2, trunc: rat_int(1), ..NamedParams::default() };
    match build_named("sigma-trunc", 3, &params).unwrap() {
        NamedElement::Mn(x) => assert_eq!(x.terms(), &[(rat(-1, 9), FqElem::ONE), (rat(-1, 27), FqElem::ONE)]),
        NamedElement::Sigma(_) => panic!("expected a plain element"),
    }
    assert!(build_named("no-such-element", 3, &params).is_err());
    assert!(build_named("lambda", 9, &params).is_err());
}

#[test]
fn lowest_uniformizer_valuation() {
    for p in [3i64, 5, 7] {
        let v = ex(p).pi_2_1().valuation().unwrap();
        assert_eq!(v.value, rat(1, p - 1) - rat(1, p) - rat(1, p * p));
        assert_eq!(v.value, rat(1, p * p * (p - 1)));
        assert!(v.exact);
    }
}

#[test]
fn uniformizer_valuations() {
    for (p, m, v) in [(3, 2, rat(1, 18)), (3, 3, rat(1, 54)), (5, 4, rat(1, 2500))] {
        assert_eq!(uniformizer(p, m).unwrap().valuation, Some(v), "p={p} m={m}");
    }
    assert!(uniformizer(6, 2).is_err());
}

#[test]
fn registry_is_sorted_and_complete() {
    let ids: Vec<&str> = registry().iter().map(|e| e.id).collect();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);
    assert_eq!(ids.len(), 31);
    for m in [Method::Congruence, Method::MnExact, Method::Sigma, Method::Slope] {
        assert!(registry().iter().any(|e| e.method == m), "{}", m.as_str());
    }
}

#[test]
fn harmonic_theorem_at_seven() {
    let r = verify_identity("thm-harmonic", 7);
    assert_eq!(r.status, Status::Pass);
    assert_eq!(r.witness.len(), 6);
    assert!(r.witness.iter().all(Witness::ok));
}

#[test]
fn corollary_at_five() {
    let r = verify_identity("coro-38801", 5);
    assert_eq!(r.status, Status::Pass);
    assert!(!r.witness.is_empty());
    for w in &r.witness {
        assert_eq!(w.required, Ext::Fin(rat_int(2)));
        assert!(w.achieved >= Ext::Fin(rat_int(2)));
    }
}

#[test]
fn bad_inputs_become_error_reports() {
    let r = verify_identity("thm-harmonic", 4);
    assert_eq!(r.status, Status::Error);
    assert!(r.error.is_some());
    let v = r.to_json();
    assert_eq!(v["status"], "ERROR");
    assert!(v["error"].as_str().unwrap().contains('4'));
    assert_eq!(verify_identity("no-such-id", 3).status, Status::Error);
    assert_eq!(residual_check(3, 2, 0).status, Status::Error);
    assert_eq!(residual_check(3, 1, 2).status, Status::Error);
}

#[test]
fn congruence_ids_pass_at_three() {
    let ids: Vec<&str> = registry().iter().filter(|e| e.method == Method::Congruence).map(|e| e.id).collect();
    let reports = verify_many(&ids, 3);
    let got: Vec<&str> = reports.iter().map(|r| r.id.as_str()).collect();
    assert_eq!(got, ids);
    for r in &reports {
        assert!(r.passed(), "{r}");
        let v = r.to_json();
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(keys, vec!["id", "p", "status", "witness"]);
    }
}

#[test]
fn residual_examples() {
    assert_eq!(residual_r_eff(3, 2, 3), rat(1, 2) - rat(1, 243));
    assert_eq!(residual_r_eff(3, 3, 2), rat(1, 6) - rat(1, 243));
    for (n, k) in [(2, 3), (3, 2)] {
        let r = residual_check(3, n, k);
        assert!(r.passed(), "{r}");
        let first = &r.witness[0];
        assert_eq!(first.achieved, Ext::Fin(residual_r_eff(3, n, k)));
    }
}

#[test]
fn report_text_and_status_rules() {
    let ok = Witness::new("a", Ext::Fin(rat_int(1)), Ext::Fin(rat(3, 2)));
    let bad = Witness::new("b", Ext::Fin(rat_int(2)), Ext::Fin(rat(3, 2)));
    assert_eq!(ok.slack, Ext::Fin(rat(1, 2)));
    let pass = VerificationReport::from_witnesses("x", 3, vec![ok.clone()], false);
    assert_eq!(pass.to_string(), "x p=3 PASS\n  a: required 1 achieved 3/2 slack 1/2");
    let fail = VerificationReport::from_witnesses("x", 3, vec![ok.clone(), bad.clone()], false);
    assert_eq!(fail.status, Status::Fail);
    let review = VerificationReport::from_witnesses("x", 3, vec![ok, bad], true);
    assert_eq!(review.status, Status::NeedsReview);
    let inf = Witness::new("c", Ext::Inf, Ext::Inf);
    assert!(inf.ok());
    assert_eq!(Witness::equal("d", &rat(1, 3), &rat(1, 2)).slack, Ext::Fin(rat(-1, 6)));
}
