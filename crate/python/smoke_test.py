"""Smoke test for the mnfield extension.

Build and install it first, for example:

    cd crates/py && maturin build --release -o dist && pip install dist/mnfield-*.whl

Then run `python python/smoke_test.py` or `pytest python/smoke_test.py`.
"""

import json

import mnfield


def test_element_arithmetic():
    ctx = mnfield.MnCtx(3)
    assert ctx.modulus == "g^2+1"
    two = ctx.monomial("0", "2", "3")
    s = two + two
    assert s.terms() == [("0/1", "1"), ("1/1", "2")]
    x = ctx.rational("-2", "3")
    assert x.inv().terms() == [("0/1", "1"), ("1/1", "1"), ("2/1", "1")]
    half = ctx.monomial("1/2", "1", "3")
    assert (half * half).terms() == [("1/1", "1")]
    assert (x - x).is_zero()
    assert ctx.from_json(x.to_json()) == x
    assert str(half) == "[1]*3^(1/2) + O(3^(3/1))"


def test_named_and_uniformizer():
    lam = mnfield.build_named("lambda", 3)
    assert lam.terms() == [("1/6", "g")]
    pi, v = mnfield.uniformizer(3, 3)
    assert v == "1/54"
    assert pi.level == 3


def test_reports():
    r = mnfield.verify_identity("thm-harmonic", 5)
    assert r.passed() and len(r.witness) == 4
    assert json.loads(r.json)["status"] == "PASS"
    bad = mnfield.verify_identity("thm-harmonic", 4)
    assert bad.status == "ERROR" and bad.error
    assert mnfield.residual_check(3, 2, 2).passed()
    assert "thm-mainexpansion" in mnfield.registry_ids()


def test_newton():
    root, trace = mnfield.newton(3, 2, 3)
    assert [t[0] for t in root.terms()] == ["0/1", "1/6", "1/3"]
    assert len(json.loads(trace)["steps"]) == 3


if __name__ == "__main__":
    for name, f in list(globals().items()):
        if name.startswith("test_"):
            f()
            print(f"{name}: ok")
