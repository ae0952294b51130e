"""Smoke test for the divflow Python bindings.

Build first:  pip install --no-build-isolation -e crates/divflow-py
Run:          python -m pytest python/smoke_test.py   (or plain python)
"""

import json
import math
import pathlib

import divflow_py as dv

SCHEMAS = pathlib.Path(__file__).resolve().parent.parent / "schemas"

CROSSING = json.dumps(
    {"kind": "hermitian_path", "knots": [{"s": 0, "re": [[-1]]}, {"s": 1, "re": [[1]]}]}
)


def load(text):
    rec = json.loads(text)
    try:
        import jsonschema
    except ImportError:
        return rec
    schema = json.loads((SCHEMAS / "result_record.v1.json").read_text())
    jsonschema.validate(rec, schema)
    return rec


def test_winding():
    rec = load(dv.df(json.dumps({"kind": "winding", "n": 1}), k=0))
    re, im = rec["value"]
    assert rec["snapped"] == 1
    assert abs(re - 1) < 1e-8 and abs(im) < 1e-8


def test_suspension_both_signs():
    for sign in (1.0, -1.0):
        rec = load(dv.suspend(CROSSING, p=1, sign=sign))
        assert rec["snapped"] == int(sign)
        assert rec["checks"]["match"]


def test_spectral_flow_and_eta():
    assert load(dv.sf(CROSSING))["snapped"] == 1
    d = json.dumps({"kind": "hermitian_path", "knots": [
        {"s": 0, "re": [[1, 0, 0], [0, 2, 0], [0, 0, -3]]},
        {"s": 1, "re": [[1, 0, 0], [0, 2, 0], [0, 0, -3]]},
    ]})
    rec = load(dv.eta(d, p=1))
    assert abs(rec["value"][0] - 1) < 1e-6


def test_regint():
    rec = load(dv.regint(json.dumps({"kind": "rational", "num": [[0, 0], [0, 0], [1, 0]], "den": [[1, 0], [0, 0], [1, 0]]})))
    assert abs(rec["value"][0] + math.pi) < 1e-7


def test_deterministic_output():
    spec = json.dumps({"kind": "winding", "size": 2, "max_degree": 2, "seed": 3})
    assert dv.df(spec) == dv.df(spec)


def test_errors():
    for bad in ("{", json.dumps({"kind": "winding", "n": 1, "version": 9})):
        try:
            dv.df(bad)
        except ValueError:
            continue
        raise AssertionError("expected ValueError for %r" % bad)


def test_trace_and_verify():
    rows = dv.trace(CROSSING).splitlines()
    assert rows[0] == "s,lambda_0,eta_reduced,eta_reduced_mod1"
    rec = load(dv.verify("cyclic", seed=7))
    assert all(rec["checks"].values())


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_"):
            fn()
            print("ok", name)
