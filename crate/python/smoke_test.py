"""Build the extension module and exercise it from Python.

    python3 python/smoke_test.py
"""

import math
import os
import shutil
import subprocess
import sys
import tempfile

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def build():
    subprocess.run(
        ["cargo", "build", "--release", "-p", "qvar-py", "--features", "extension-module"],
        cwd=ROOT,
        check=True,
    )
    lib = os.path.join(ROOT, "target", "release", "libqvar.so")
    out = tempfile.mkdtemp(prefix="qvar-py-")
    shutil.copy(lib, os.path.join(out, "qvar.so"))
    sys.path.insert(0, out)


def close(a, b, tol=1e-9):
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def main():
    build()
    import qvar

    ce = qvar.counterexample()
    assert close(ce["R_over_L"], 2.25), ce
    ce = qvar.counterexample(hbar=0.7, fock_dim=60)
    assert close(ce["R_over_L"], 2.25, 1e-6), ce
    assert close(ce["L"], (0.7 / math.sqrt(3)) ** 3, 1e-6), ce

    ids = [e["id"] for e in qvar.catalog()]
    assert len(ids) >= 16 and "eq5-INCORRECT" in ids, ids

    ms = qvar.moments({"family": "spin", "params": {"two_j": 2}}, {"tuple": "spin_xyz"})
    assert ms.n == 3 and len(ms) == 3
    r = qvar.evaluate("zero-comm", ms)
    assert close(r["lhs"] / r["rhs"], 1.125), r
    assert all(r["satisfied"] for r in qvar.applicable_suite(ms) if not r.get("known_incorrect"))

    ccs = qvar.MomentSet.from_scenario('{"family": "ccs"}', '{"tuple": "xpxi"}')
    eq5 = qvar.evaluate("eq5-INCORRECT", ccs)
    assert not eq5["satisfied"] and eq5["known_incorrect"]
    again = qvar.MomentSet.from_json(ccs.to_json())
    assert again.x == ccs.x and again.y == ccs.y

    pair = qvar.MomentSet([0.0, 0.0], [[0.5, 0.0], [0.0, 0.5]], [[0.0, 0.5], [-0.5, 0.0]], labels=["x", "p"])
    assert qvar.evaluate("robertson-pair", pair, [1, 2])["margin"] == 0.0

    try:
        qvar.evaluate("no-such-bound", pair)
    except KeyError:
        pass
    else:
        raise AssertionError("unknown id accepted")

    problem = {
        "inequality_id": "prod4",
        "family": {"family": "gaussian2d", "params": {"a": 1.0, "c": 1.0}},
        "tuple": {"tuple": "xy_phase_space"},
        "objective": "margin",
        "bounds": [{"name": "b", "lo": 0.0, "hi": 0.9}],
    }
    margins = [row["margin"] for row in qvar.sweep(problem, [6])["rows"]]
    assert all(b > a for a, b in zip(margins, margins[1:])), margins

    with open(os.path.join(ROOT, "specs", "problems", "spin1_ratio.json")) as f:
        res = qvar.minimize(f.read())
    assert abs(res["best_objective"] - 1.125) < 1e-6, res

    print("python smoke test passed")


if __name__ == "__main__":
    main()
