#[path = "../src/convert.rs"]
mod convert;

use mn_core::exact_arith::rat;
use mn_core::expansions::{verify_identity, Named};
use mn_core::mn_series::MnCtx;

#[test]
fn string_arguments() {
    assert_eq!(convert::rat_arg("-3/6").unwrap(), rat(-1, 2));
    assert_eq!(convert::rat_arg("4").unwrap(), rat(4, 1));
    assert!(convert::rat_arg("1/0").is_err());
    assert!(convert::rat_arg("x").is_err());
    let ctx = MnCtx::new(5).unwrap();
    let f = ctx.field();
    assert_eq!(convert::digit_arg(&ctx, "2*g+1").unwrap(), f.elem(1, 2));
    assert!(convert::digit_arg(&ctx, "h").is_err());
}

#[test]
fn terms_roundtrip_through_strings() {
    let ctx = MnCtx::new(3).unwrap();
    let raw = vec![("0".to_string(), "2".to_string()), ("0".to_string(), "2".to_string()), ("1/2".to_string(), "g".to_string())];
    let x = convert::from_terms(&ctx, &raw, "3").unwrap();
    // [2] + [2] = [1] + [2]*3
    let expect = vec![("0/1".to_string(), "1".to_string()), ("1/2".to_string(), "g".to_string()), ("1/1".to_string(), "2".to_string())];
    assert_eq!(convert::terms(&x), expect);
    let y = convert::from_terms(&ctx, &convert::terms(&x), "3").unwrap();
    assert_eq!(x, y);
    let m = convert::monomial(&ctx, "1/6", "g", "2").unwrap();
    assert_eq!(convert::terms(&m), vec![("1/6".to_string(), "g".to_string())]);
}

#[test]
fn reports_and_named_parameters() {
    let rows = convert::witness_rows(&verify_identity("thm-harmonic", 5));
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0], ("k=1".into(), "1".into(), "1".into(), "0".into()));
    let params = convert::named_params(2, 1, 2, "1").unwrap();
    match mn_core::expansions::build_named("sigma-trunc", 3, &params).unwrap() {
        Named::Mn(a) => assert_eq!(convert::terms(&a).len(), 2),
        Named::Sigma(_) => panic!("expected a plain element"),
    }
    assert!(convert::named_params(2, 1, 2, "?").is_err());
}
