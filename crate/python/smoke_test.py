"""Smoke test for the maxlab extension.

Build with `cargo build -p maxlab-py --release` (or maturin), then run
`python3 python/smoke_test.py`. Without an installed `maxlab` module the
script loads target/{release,debug}/libmaxlab.so directly.
"""

import importlib.machinery
import importlib.util
import math
import os
import sys
import tempfile

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def load():
    try:
        import maxlab

        return maxlab
    except ImportError:
        pass
    for profile in ("release", "debug"):
        path = os.path.join(ROOT, "target", profile, "libmaxlab.so")
        if os.path.exists(path):
            loader = importlib.machinery.ExtensionFileLoader("maxlab", path)
            spec = importlib.util.spec_from_loader("maxlab", loader)
            mod = importlib.util.module_from_spec(spec)
            loader.exec_module(mod)
            return mod
    sys.exit("maxlab extension not found; run `cargo build -p maxlab-py` first")


def main():
    mx = load()
    g = mx.Grid.cube(2, 32, 2 * math.pi)
    assert g.shape == [32, 32] and g.normal_axis == 1

    flat = mx.Coefficients.preset(g, "flat")
    solver = mx.LinearSolver(flat)
    u0 = mx.State.standing_wave(g, [1, 2], 0.0)
    dt = 0.05
    u1 = solver.evolve(u0, 0.02, 100, "rk4")
    exact = mx.State.standing_wave(g, [1, 2], u1.time)
    assert u1.max_diff(exact) < 1e-6, u1.max_diff(exact)

    smooth = mx.Coefficients.preset(g, "smooth", 0.2)
    lin = mx.LinearSolver(smooth)
    v0 = mx.State.random(g, smooth, 7, 2.0, 8.0, "charged")
    m0 = lin.discrete_energy(v0, dt)
    v1 = lin.evolve(v0, dt, 20)
    drift = abs(lin.discrete_energy(v1, dt) - m0) / m0
    assert drift < 1e-10, drift
    back = lin.evolve(v1, -dt, 20)
    assert back.max_diff(v0) < 1e-10

    e = mx.kerr_root(2.0)
    assert abs(e + e**3 - 2.0) < 1e-14 and abs(e - 1.0) < 1e-14

    t = mx.admissible(4.0, 8.0, 3)
    assert t["gamma"] == 7.0 / 8.0
    try:
        mx.admissible(4.0, float("inf"), 3)
        raise AssertionError("q = inf accepted")
    except ValueError:
        pass

    rows = mx.factorization_residuals(flat, 8.0, 50, 0)
    assert all(r["max_residual"] < 1e-10 for r in rows), rows

    with tempfile.TemporaryDirectory() as d:
        p = os.path.join(d, "s.bin")
        v1.save(p)
        assert mx.State.load(p).max_diff(v1) == 0.0

    print("maxlab smoke test: ok")


if __name__ == "__main__":
    main()
