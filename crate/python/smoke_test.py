"""Smoke test for the cokinetic_py extension module.

Build first, e.g. `maturin develop -m crates/py/Cargo.toml`, or copy the
cdylib from `cargo build -p cokinetic-py --release --features extension-module`
next to this script as `cokinetic_py.so`.
"""

import json
import math
import sys

import cokinetic_py as ck


def main():
    model = ck.ModelSpec(1)
    assert model.dim == 3 and model.is_circle

    # F = sin(y): both co-Hofer lengths equal 2
    pendulum = ck.Isotopy(model, [([0, 1, 0], [0.0], [1.0])], steps=256)
    for flavor in ("L1inf", "Linf"):
        rep = pendulum.length(flavor)
        assert rep.lower - 1e-6 <= 2.0 <= rep.upper + 1e-6, rep

    p = [0.3, 1.1, 2.0]
    q = pendulum.map(p, 0.7)
    back = pendulum.inverse_map(q, 0.7)
    assert max(abs(a - b) for a, b in zip(p, back)) < 1e-8

    lo, value, hi = ck.osc(3, [([1, 0, 0], 1.0, 0.0), ([0, 1, 0], 1.0, 0.0)])
    assert lo <= 4.0 <= hi and abs(value - 4.0) < 1e-9

    wells = ck.Isotopy(model, [([1, 0, 0], [0.1], []), ([0, 1, 0], [0.1], [])], steps=256)
    assert len(wells.fixed_points()) == 4

    d = pendulum.distance(wells, "Linf")
    assert d.value > 0.0

    try:
        ck.Isotopy(model, [([0, 0, 1], [0.5], [])])
    except ValueError as e:
        assert "z-dependence" in str(e)
    else:
        raise AssertionError("z-dependent co-Hamiltonian generator accepted")

    scenario = {
        "schema": ck.SCENARIO_SCHEMA,
        "seed": 11,
        "model": {"n": 1, "z_topology": "circle"},
        "isotopies": [{"name": "f", "kind": "co-hamiltonian",
                       "generator": [{"k": [0, 1, 0], "b": 1.0}]}],
        "tasks": [{"command": "length", "arguments": {"isotopy": "f", "expect": 2.0}}],
    }
    text = json.dumps(scenario)
    assert ck.validate_scenario(text) == 1
    ok, report = ck.run_scenario(text)
    assert ok and json.loads(report)["pass"] is True
    ok2, report2 = ck.run_scenario(text)
    assert report == report2

    ok, _ = ck.run_suite("infrastructure", quick=True)
    assert ok

    print("python smoke test: ok")
    return 0


if __name__ == "__main__":
    sys.exit(main())
