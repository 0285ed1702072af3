"""Benchmark the hot kernels on both backends.

Each measurement runs in a subprocess so the env flag genuinely selects
the backend at import time, exactly as a user run would.
"""

from __future__ import annotations

import json
import os
import subprocess
import sys

_WORKER = r"""
import json, sys, time
import numpy as np

def timeit(fn, repeats):
    fn()  # warm-up / compile
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - t0) / repeats

def main():
    spec = json.loads(sys.argv[1])
    from mincopy import _kernels, problems, simulate, solver
    from mincopy.value import theta_grid

    T = spec["theta_points"]
    theta = theta_grid(T)
    c2, s2 = np.cos(2 * theta), np.sin(2 * theta)
    g = (2 + np.sin(4 * theta) - np.sin(6 * theta)) / np.pi
    out = {"backend": "numba" if _kernels.JITTED else "numpy"}

    out["support_search"] = timeit(
        lambda: _kernels.support_search(g, c2, s2, -1.0), 20
    )

    p = problems.pure_problem(np.pi / 6, 0.01)
    vf = solver.initial_value(p, q_points=spec["q_points"])
    out["goal_sweep_exact"] = timeit(
        lambda: solver.bellman_sweep_local(vf, p, theta, mode="exact"), 2
    )
    out["goal_sweep_fast"] = timeit(
        lambda: solver.bellman_sweep_local(vf, p, theta, mode="fast"), 5
    )

    pm = problems.overlap_mixture_problem(0.05, 1e-3)
    vfm = solver.initial_value(pm, q_points=spec["q_points"])
    from mincopy.solver import collective_arm_grid, local_arm_grid
    out["goac_sweep"] = timeit(
        lambda: solver.bellman_sweep_goac(
            vfm, pm, local_arm_grid(300), collective_arm_grid(51)
        ),
        5,
    )

    vfp, pol, _ = solver.solve_goal(p, q_points=spec["q_points"],
                                    theta_points=T, mode="hybrid")
    tables = simulate.build_tables(pol, p)
    out["simulate"] = timeit(
        lambda: simulate.monte_carlo(pol, p, 0.3, spec["trials"], seed=1,
                                     tables=tables),
        3,
    )
    print(json.dumps(out))

main()
"""


def _run_backend(disable_numba: bool, spec: dict) -> dict:
    env = dict(os.environ)
    if disable_numba:
        env["MINCOPY_DISABLE_NUMBA"] = "1"
    else:
        env.pop("MINCOPY_DISABLE_NUMBA", None)
    proc = subprocess.run(
        [sys.executable, "-c", _WORKER, json.dumps(spec)],
        capture_output=True,
        text=True,
        env=env,
        check=False,
    )
    if proc.returncode != 0:
        raise RuntimeError(f"benchmark worker failed:\n{proc.stderr}")
    return json.loads(proc.stdout.strip().splitlines()[-1])


def run_benchmarks(trials=100000, q_points=1001, theta_points=901):
    """Time each kernel under both backends; returns a list of rows."""
    from .backend import numba_available

    spec = {"trials": trials, "q_points": q_points, "theta_points": theta_points}
    results = [_run_backend(True, spec)]
    if numba_available():
        results.append(_run_backend(False, spec))
    kernels = ["support_search", "goal_sweep_exact", "goal_sweep_fast",
               "goac_sweep", "simulate"]
    rows = []
    for kernel in kernels:
        row = {"kernel": kernel}
        for res in results:
            row[res["backend"]] = res[kernel]
        if "numba" in row and "numpy" in row and row["numba"] > 0:
            row["speedup"] = row["numpy"] / row["numba"]
        rows.append(row)
    return rows


def format_table(rows) -> str:
    lines = ["kernel,numpy_ms,numba_ms,speedup"]
    for row in rows:
        np_ms = row.get("numpy")
        nb_ms = row.get("numba")
        lines.append(
            "{},{},{},{}".format(
                row["kernel"],
                f"{np_ms * 1e3:.3f}" if np_ms is not None else "-",
                f"{nb_ms * 1e3:.3f}" if nb_ms is not None else "-",
                f"{row['speedup']:.2f}" if "speedup" in row else "-",
            )
        )
    return "\n".join(lines)
