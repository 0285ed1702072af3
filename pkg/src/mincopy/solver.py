"""Value iteration for the adaptive strategies.

`solve_goal` iterates the local Bellman sweep (full POVM search per prior)
until the value function is a fixed point; `solve_goac` does the same for
the mixed local-projective / two-copy-collective measurement set.  Sweeps
start from a realizable fixed-measurement strategy, so iterates decrease
pointwise and bound the optimum from above throughout.
"""

from __future__ import annotations

import math

import numpy as np

from . import _kernels, states
from .exceptions import DomainError, InfeasibleError, SupportSearchError
from .problems import DiscriminationProblem
from .povm_search import trace_profile
from .value import (
    ARM_COLLECTIVE,
    ARM_LOCAL,
    GoacPolicy,
    GoalPolicy,
    SolveReport,
    Stopwatch,
    ValueFunction,
    stop_mask,
    theta_grid,
    uniform_q_grid,
)

DEFAULT_Q_POINTS = 2001
DEFAULT_THETA_POINTS = 1801
DEFAULT_TOL = 1e-4
VALUE_CAP = 1e7

LOCAL_ARM_DEGREES = (0.0, 90.0)
COLLECTIVE_ARM_DEGREES = (-5.0, 20.0)
DEFAULT_LOCAL_ARM_POINTS = 900
DEFAULT_COLLECTIVE_ARM_POINTS = 101


def local_arm_grid(points: int = DEFAULT_LOCAL_ARM_POINTS) -> np.ndarray:
    """Projective-pair angles over [0, 90) degrees."""
    lo, hi = LOCAL_ARM_DEGREES
    return np.radians(lo + (hi - lo) * np.arange(points) / points)


def collective_arm_grid(points: int = DEFAULT_COLLECTIVE_ARM_POINTS) -> np.ndarray:
    """Entangled-measurement angles over [-5, 20] degrees inclusive."""
    lo, hi = COLLECTIVE_ARM_DEGREES
    return np.radians(np.linspace(lo, hi, points))


def _validate_start(values: np.ndarray, mask: np.ndarray):
    undecided = ~mask
    if np.any(values[undecided] < 1.0 - 1e-9):
        raise DomainError(
            "value function is not realizable: undecided priors need at least one copy"
        )
    if np.any(values[mask] != 0.0):
        raise DomainError("value function must vanish on the stop region")


def initial_value(problem: DiscriminationProblem, q_points: int = DEFAULT_Q_POINTS,
                  tol: float = 1e-9) -> ValueFunction:
    """Consumption of a concrete repeated-measurement strategy.

    For eps > 0 this is the balanced-prior Helstrom projective pair; for
    eps = 0 (pure states only) that repetition never reaches an exact
    decision, so the start is the inconclusive-elimination POVM whose two
    conclusive outcomes each exclude one state outright.
    """
    from .baselines import fixed_value

    if problem.epsilon == 0.0:
        if not problem.is_pure:
            raise InfeasibleError(
                "perfect discrimination of mixed states needs unbounded copies"
            )
        m = _elimination_povm(problem)
    else:
        m = states.projective_pair(problem.helstrom_angle(0.5))
    return fixed_value(problem, m, q_points=q_points, tol=tol)


def _elimination_povm(problem: DiscriminationProblem) -> states.Measurement:
    """Three-outcome POVM whose side outcomes exclude one pure state each."""
    a0 = problem.rho0.bloch_angle
    a1 = problem.rho1.bloch_angle
    mid = 0.5 * (a0 + a1)
    exclude0 = a0 + math.pi / 2.0  # orthogonal to |psi0>
    exclude1 = a1 + math.pi / 2.0
    support = sorted([mid % math.pi, exclude0 % math.pi, exclude1 % math.pi])
    return states.three_element_povm(tuple(support))


def bellman_sweep_local(
    value_fn: ValueFunction,
    problem: DiscriminationProblem,
    thetas: np.ndarray | None = None,
    mode: str = "exact",
    cache: tuple | None = None,
    search_tol: float = -1.0,
):
    """One local sweep; returns (ValueFunction, policy arrays).

    `mode="exact"` runs the support search at every undecided prior (the
    reference); `mode="fast"` scans exact projective pairs and re-evaluates
    the cached three-point supports from the last exact sweep.
    """
    if thetas is None:
        thetas = theta_grid(DEFAULT_THETA_POINTS)
    mask = stop_mask(value_fn.q_grid, problem.epsilon)
    _validate_start(value_fn.values, mask)
    t0 = trace_profile(problem.rho0.matrix, thetas)
    t1 = trace_profile(problem.rho1.matrix, thetas)
    if mode == "exact":
        new, kinds, angles, weights, status = _kernels.goal_sweep_exact(
            value_fn.values, mask, t0, t1, search_tol
        )
        if np.any(status != 0):
            j = int(np.argmax(status != 0))
            raise SupportSearchError(
                f"support search failed at q={value_fn.q_grid[j]:.6f}"
            )
    elif mode == "fast":
        if cache is None:
            kinds0 = np.zeros(value_fn.points, dtype=np.int8)
            angles0 = np.zeros((value_fn.points, 3))
            weights0 = np.zeros((value_fn.points, 3))
        else:
            kinds0, angles0, weights0 = cache
        new, kinds, angles, weights = _kernels.goal_sweep_fast(
            value_fn.values, mask, t0, t1,
            problem.rho0.matrix, problem.rho1.matrix,
            kinds0, angles0, weights0,
        )
    else:
        raise DomainError(f"unknown sweep mode {mode!r}")
    return ValueFunction(new, problem.epsilon), (kinds, angles, weights)


def solve_goal(
    problem: DiscriminationProblem,
    q_points: int = DEFAULT_Q_POINTS,
    theta_points: int = DEFAULT_THETA_POINTS,
    tol: float = DEFAULT_TOL,
    max_iter: int = 2000,
    mode: str = "hybrid",
    start: ValueFunction | None = None,
):
    """Iterate local sweeps to the optimal one-copy-adaptive value function.

    mode "exact" uses the support search every sweep; "hybrid" converges
    with fast sweeps first, then polishes with exact sweeps until the exact
    operator is a fixed point (same limit, fewer searches).
    """
    thetas = theta_grid(theta_points)
    vf = start if start is not None else initial_value(problem, q_points)
    if vf.points != q_points:
        raise DomainError("start grid size mismatch")
    history = []
    policy_arrays = None
    with Stopwatch() as watch:
        if mode == "hybrid":
            vf, policy_arrays, hist1 = _iterate(
                problem, vf, thetas, "exact", None, tol, 1
            )
            history.extend(hist1)
            vf, policy_arrays, hist2 = _iterate(
                problem, vf, thetas, "fast", policy_arrays, tol, max_iter
            )
            history.extend(hist2)
            vf, policy_arrays, hist3 = _iterate(
                problem, vf, thetas, "exact", policy_arrays, tol, max_iter
            )
            history.extend(hist3)
            converged = bool(hist3) and hist3[-1] < tol
        elif mode == "exact":
            vf, policy_arrays, history = _iterate(
                problem, vf, thetas, "exact", None, tol, max_iter
            )
            converged = bool(history) and history[-1] < tol
        else:
            raise DomainError(f"unknown solve mode {mode!r}")
    kinds, angles, weights = policy_arrays
    policy = GoalPolicy(kinds=kinds, angles=angles, weights=weights, epsilon=problem.epsilon)
    report = SolveReport(
        iterations=len(history),
        sup_norm_history=history,
        converged=converged,
        wall_time=watch.elapsed,
        notes={
            "solver": "goal",
            "mode": mode,
            "measurement_arity": "restricted to 1-copy measurements",
        },
    )
    return vf, policy, report


def _iterate(problem, vf, thetas, mode, cache, tol, max_iter):
    history = []
    for _ in range(max_iter):
        new_vf, policy_arrays = bellman_sweep_local(
            vf, problem, thetas, mode=mode, cache=cache
        )
        sup = float(np.abs(new_vf.values - vf.values).max())
        history.append(sup)
        vf = new_vf
        if sup < tol:
            break
    if not history:
        # max_iter == 0: still run one sweep to extract a policy
        vf, policy_arrays = bellman_sweep_local(vf, problem, thetas, mode=mode, cache=cache)
    return vf, policy_arrays, history


def _collective_tables(problem: DiscriminationProblem, thetas_c: np.ndarray):
    """Born traces of the four entangled elements against each two-copy state."""
    tc0 = np.zeros((thetas_c.shape[0], 4))
    tc1 = np.zeros((thetas_c.shape[0], 4))
    m0 = problem.rho0_pair.matrix
    m1 = problem.rho1_pair.matrix
    for i, th in enumerate(thetas_c):
        bases = states.collective_bases(th)
        for k in range(4):
            v = bases[k]
            tc0[i, k] = v @ m0 @ v
            tc1[i, k] = v @ m1 @ v
    return tc0, tc1


def _local_pair_tables(problem: DiscriminationProblem, thetas_l: np.ndarray):
    t0a = trace_profile(problem.rho0.matrix, thetas_l)
    t1a = trace_profile(problem.rho1.matrix, thetas_l)
    tl0 = np.stack([t0a, 1.0 - t0a], axis=1)
    tl1 = np.stack([t1a, 1.0 - t1a], axis=1)
    return tl0, tl1


def bellman_sweep_goac(
    value_fn: ValueFunction,
    problem: DiscriminationProblem,
    thetas_local: np.ndarray,
    thetas_collective: np.ndarray,
):
    """One sweep over both arms; returns (ValueFunction, arms, theta indices)."""
    mask = stop_mask(value_fn.q_grid, problem.epsilon)
    _validate_start(value_fn.values, mask)
    tl0, tl1 = _local_pair_tables(problem, thetas_local)
    if thetas_collective.shape[0]:
        tc0, tc1 = _collective_tables(problem, thetas_collective)
    else:
        tc0 = np.zeros((0, 4))
        tc1 = np.zeros((0, 4))
    new, arms, theta_idx = _kernels.goac_sweep(
        value_fn.values, mask, tl0.ravel(), tl1.ravel(), tc0.ravel(), tc1.ravel()
    )
    return ValueFunction(new, problem.epsilon), arms, theta_idx


def solve_goac(
    problem: DiscriminationProblem,
    q_points: int = DEFAULT_Q_POINTS,
    local_points: int = DEFAULT_LOCAL_ARM_POINTS,
    collective_points: int = DEFAULT_COLLECTIVE_ARM_POINTS,
    tol: float = DEFAULT_TOL,
    max_iter: int = 5000,
    start: ValueFunction | None = None,
    include_collective: bool = True,
):
    """Iterate the two-arm sweep to its fixed point.

    With include_collective=False this solves the projective-pair-only
    restriction on the same local grid (the collective arm's lower bound
    partner for monotonicity checks).
    """
    thetas_l = local_arm_grid(local_points)
    thetas_c = collective_arm_grid(collective_points) if include_collective else np.zeros(0)
    vf = start if start is not None else initial_value(problem, q_points)
    mask = stop_mask(vf.q_grid, problem.epsilon)
    tl0, tl1 = _local_pair_tables(problem, thetas_l)
    if thetas_c.shape[0]:
        tc0, tc1 = _collective_tables(problem, thetas_c)
    else:
        tc0 = np.zeros((0, 4))
        tc1 = np.zeros((0, 4))
    tl0f, tl1f = tl0.ravel(), tl1.ravel()
    tc0f, tc1f = tc0.ravel(), tc1.ravel()

    history = []
    arms = np.zeros(q_points, dtype=np.int8)
    theta_idx = np.zeros(q_points, dtype=np.int64)
    values = vf.values
    converged = False
    with Stopwatch() as watch:
        _validate_start(values, mask)
        for _ in range(max_iter):
            new, arms, theta_idx = _kernels.goac_sweep(values, mask, tl0f, tl1f, tc0f, tc1f)
            sup = float(np.abs(new - values).max())
            history.append(sup)
            values = new
            if sup < tol:
                converged = True
                break
    thetas = np.zeros(q_points)
    local_sel = arms == ARM_LOCAL
    coll_sel = arms == ARM_COLLECTIVE
    thetas[local_sel] = thetas_l[theta_idx[local_sel]]
    if thetas_c.shape[0]:
        thetas[coll_sel] = thetas_c[theta_idx[coll_sel]]
    policy = GoacPolicy(arms=arms, thetas=thetas, epsilon=problem.epsilon)
    vf = ValueFunction(values, problem.epsilon)
    report = SolveReport(
        iterations=len(history),
        sup_norm_history=history,
        converged=converged,
        wall_time=watch.elapsed,
        notes={
            "solver": "goac" if include_collective else "goac-local-only",
            "measurement_arity": "restricted to {1,2}-copy measurements",
        },
    )
    return vf, policy, report


def goal_policy_tables(policy: GoalPolicy, problem: DiscriminationProblem):
    """Born-trace tables (A, B) of each policy element against the model states.

    Row j holds tr(M_k rho0) and tr(M_k rho1) for the measurement at grid
    point j, zero-padded to three outcomes.
    """
    G = policy.kinds.shape[0]
    A = np.zeros((G, 3))
    B = np.zeros((G, 3))
    for j in range(G):
        kind = int(policy.kinds[j])
        if kind == 0:
            continue
        m = policy.measurement_at(j)
        for k, (op, _) in enumerate(m.elements):
            A[j, k] = states.born_probability(op, problem.rho0.matrix)
            B[j, k] = states.born_probability(op, problem.rho1.matrix)
    return A, B


def goac_policy_tables(policy: GoacPolicy, problem: DiscriminationProblem):
    """Born-trace tables for a two-arm policy (four outcome slots)."""
    G = policy.arms.shape[0]
    A = np.zeros((G, 4))
    B = np.zeros((G, 4))
    for j in range(G):
        arm = int(policy.arms[j])
        if arm == 0:
            continue
        m = policy.measurement_at(j)
        r0 = problem.rho0.matrix if arm == ARM_LOCAL else problem.rho0_pair.matrix
        r1 = problem.rho1.matrix if arm == ARM_LOCAL else problem.rho1_pair.matrix
        for k, (op, _) in enumerate(m.elements):
            A[j, k] = states.born_probability(op, r0)
            B[j, k] = states.born_probability(op, r1)
    return A, B
