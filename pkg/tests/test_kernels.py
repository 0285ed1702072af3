"""Backend cross-checks.

The active backend is chosen at import time by env flag, so the opposite
backend runs in a subprocess and results are compared through files.
"""

import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest

from mincopy import _kernels
from mincopy.value import theta_grid

_PROBE = r"""
import json, sys
import numpy as np
from mincopy import _kernels
from mincopy.value import theta_grid

T = 901
theta = theta_grid(T)
c2, s2 = np.cos(2 * theta), np.sin(2 * theta)
out = {"jitted": _kernels.JITTED, "searches": []}
rng = np.random.default_rng(123)
for case in range(6):
    coeffs = rng.normal(size=3) * np.array([1.0, 0.5, 0.3])
    phases = rng.uniform(0, 2 * np.pi, size=3)
    g = np.full(T, 2.0)
    for k, (c, ph) in enumerate(zip(coeffs, phases)):
        g = g + c * np.sin(2 * (k + 1) * theta + ph)
    g = g - g.min() + 0.1
    st, cond, i1, i2, i3, a, b = _kernels.support_search(g, c2, s2, -1.0)
    out["searches"].append({"status": int(st), "cond": int(cond),
                            "idx": [int(i1), int(i2), int(i3)],
                            "a": float(a), "b": float(b)})

# one simulation batch
G = 101
K = 3
grid = np.linspace(0, 1, G)
A = np.zeros((G, K)); B = np.zeros((G, K))
A[:, 0] = 0.85; A[:, 1] = 0.15
B[:, 0] = 0.25; B[:, 1] = 0.75
ptab = np.stack([A, B]).reshape(-1)
compcum = np.zeros((2, G, 2))
compcum[0, :, 0] = 1.0
compcum[:, :, 1] = 1.0
status, copies, correct, dec, tru, fq = _kernels.simulate_batch(
    0.4, 0.02, 4000, np.uint64(99), ptab, compcum.reshape(-1),
    A.reshape(-1), B.reshape(-1), np.ones(G, dtype=np.int64), 2, K, 10**6, 1, G - 2)
out["sim"] = {
    "status": int(status),
    "copies_sum": int(copies.sum()),
    "copies_head": [int(c) for c in copies[:25]],
    "correct_sum": int(correct.sum()),
    "fq_head": [float(x) for x in fq[:10]],
}
json.dump(out, open(sys.argv[1], "w"))
"""


def _run_probe(tmp_path, disable):
    env = dict(os.environ)
    if disable:
        env["MINCOPY_DISABLE_NUMBA"] = "1"
    else:
        env.pop("MINCOPY_DISABLE_NUMBA", None)
        env.pop("NUMBA_DISABLE_JIT", None)
    out = tmp_path / f"probe-{disable}.json"
    subprocess.run(
        [sys.executable, "-c", _PROBE, str(out)],
        check=True,
        env=env,
        timeout=900,
        cwd=os.path.dirname(os.path.dirname(os.path.abspath(__file__))),
    )
    return json.loads(out.read_text())


@pytest.mark.slow
def test_backends_agree(tmp_path):
    pytest.importorskip("numba")
    np_res = _run_probe(tmp_path, disable=True)
    nb_res = _run_probe(tmp_path, disable=False)
    assert not np_res["jitted"]
    assert nb_res["jitted"]
    for s_np, s_nb in zip(np_res["searches"], nb_res["searches"]):
        assert s_np["status"] == s_nb["status"] == 0
        assert s_np["cond"] == s_nb["cond"]
        for a, b in zip(s_np["idx"], s_nb["idx"]):
            assert abs(a - b) <= 1
        assert s_np["a"] == pytest.approx(s_nb["a"], abs=1e-6)
        assert s_np["b"] == pytest.approx(s_nb["b"], abs=1e-6)
    # the simulator must agree bit for bit
    assert np_res["sim"] == nb_res["sim"]


def test_interp_uniform_matches_numpy():
    values = np.array([0.0, 1.0, 4.0, 9.0, 16.0])
    x = np.array([0.0, 0.1, 0.25, 0.5, 0.99, 1.0])
    got = _kernels._interp_uniform(values, x)
    want = np.interp(x, np.linspace(0, 1, 5), values)
    assert np.allclose(got, want)


def test_interp_circular_wraps():
    g = np.array([1.0, 2.0, 3.0, 4.0])
    assert _kernels._interp_circular(g, 3.5) == pytest.approx(2.5)  # between g[3] and g[0]
    assert _kernels._interp_circular(g, 4.0) == pytest.approx(1.0)
    assert _kernels._interp_circular(g, 1.25) == pytest.approx(2.25)


def test_stream_uniform_is_counter_based():
    ids = np.arange(8).astype(np.uint64)
    u1 = _kernels._stream_uniform(np.uint64(5), ids, np.uint64(3))
    u2 = _kernels._stream_uniform(np.uint64(5), ids[::2].copy(), np.uint64(3))
    assert np.array_equal(u1[::2], u2)
    assert np.all((u1 >= 0) & (u1 < 1))
    u3 = _kernels._stream_uniform(np.uint64(6), ids, np.uint64(3))
    assert not np.array_equal(u1, u3)


def test_clusters_circular_merge():
    h = np.array([0.0, 5.0, 5.0, 0.0, 0.0, 0.0, 5.0, 0.1])
    rows = _kernels._clusters(h, 0.2)
    # runs: {7,0} wraps, {3,4,5}
    reps = sorted(rows[:, 1].tolist())
    assert reps == [0, 3]


def test_fixed_sweep_orthogonal_outcome():
    G = 101
    grid = np.linspace(0, 1, G)
    stop = np.minimum(grid, 1 - grid) <= 0.01
    ak = np.array([1.0, 0.0])
    bk = np.array([0.0, 1.0])
    values = np.zeros(G)
    new = _kernels.fixed_sweep(values, stop, ak, bk, 1)
    assert np.all(new[stop] == 0)
    assert np.allclose(new[~stop], 1.0)
