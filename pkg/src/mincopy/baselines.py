"""Fixed-measurement baselines and small-error efficiency rates.

A fixed strategy repeats one measurement with Bayesian stopping; its value
function solves N(q) = n + sum_k P_k N(q_k) on the undecided region.  The
baselines optimize the measurement angle for a queried initial prior.  The
eta ratio is the small-error asymptote: copies per unit of -ln(eps),
governed by the maximized outcome relative-entropy rates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels, states
from .exceptions import DomainError, InfeasibleError
from .problems import DiscriminationProblem
from .solver import collective_arm_grid, local_arm_grid
from .value import Stopwatch, ValueFunction, stop_mask, theta_grid, uniform_q_grid

VALUE_CAP = 1e7


def _element_traces(measurement: states.Measurement, problem: DiscriminationProblem):
    if measurement.copy_cost == 1:
        r0, r1 = problem.rho0.matrix, problem.rho1.matrix
    else:
        r0, r1 = problem.rho0_pair.matrix, problem.rho1_pair.matrix
    a = np.array([states.born_probability(op, r0) for op, _ in measurement.elements])
    b = np.array([states.born_probability(op, r1) for op, _ in measurement.elements])
    return a, b


def fixed_value(
    problem: DiscriminationProblem,
    measurement: states.Measurement,
    q_points: int = 2001,
    tol: float = 1e-9,
    max_iter: int = 200000,
) -> ValueFunction:
    """Value of repeating one measurement until the error requirement is met.

    Iterates the one-step recursion from zero (so iterates increase to the
    strategy's true consumption); raises InfeasibleError when the value
    escapes past the cap, i.e. the measurement cannot reach epsilon.
    """
    if problem.epsilon == 0.0 and not problem.is_pure:
        raise InfeasibleError("perfect discrimination of mixed states is infeasible")
    ak, bk = _element_traces(measurement, problem)
    mask = stop_mask(uniform_q_grid(q_points), problem.epsilon)
    values = np.zeros(q_points)
    n = measurement.copy_cost
    for _ in range(max_iter):
        new = _kernels.fixed_sweep(values, mask, ak, bk, n)
        if new.max() > VALUE_CAP:
            raise InfeasibleError(
                "fixed-measurement value diverged: measurement cannot reach epsilon"
            )
        sup = float(np.abs(new - values).max())
        values = new
        if sup < tol:
            break
    else:
        raise InfeasibleError("fixed-measurement value iteration did not converge")
    return ValueFunction(values, problem.epsilon)


@dataclass
class FixedStrategyResult:
    best_theta: float
    value_fn: ValueFunction
    consumption_at: dict
    family: str
    scanned: list = field(default_factory=list)


def _family_measurement(family: str, theta: float) -> states.Measurement:
    if family == "local":
        return states.projective_pair(theta)
    if family == "collective":
        return states.collective_measurement(theta)
    raise DomainError(f"unknown fixed family {family!r}")


def _family_grid(family: str, points: int | None):
    if family == "local":
        return local_arm_grid(points or 181)
    return collective_arm_grid(points or 101)


def optimize_fixed(
    problem: DiscriminationProblem,
    family: str,
    at_q: float = 0.5,
    q_points: int = 2001,
    theta_points: int | None = None,
    tol: float = 1e-9,
    refine: bool = True,
) -> FixedStrategyResult:
    """Best fixed measurement of the family for a given initial prior.

    Scans the family's angle grid, then runs one golden-section refinement
    around the best grid angle.  Angles whose value diverges are skipped;
    if all diverge the family is infeasible.
    """
    grid = _family_grid(family, theta_points)
    best = (None, math.inf, None)
    scanned = []
    for th in grid:
        try:
            vf = fixed_value(problem, _family_measurement(family, th), q_points, tol)
        except InfeasibleError:
            scanned.append((float(th), math.inf))
            continue
        val = float(vf(at_q))
        scanned.append((float(th), val))
        if val < best[1]:
            best = (float(th), val, vf)
    if best[0] is None:
        raise InfeasibleError(f"every {family} angle diverged")
    theta_star, val_star, vf_star = best
    if refine:
        step = float(grid[1] - grid[0]) if grid.shape[0] > 1 else 0.01
        lo, hi = theta_star - step, theta_star + step
        invphi = (math.sqrt(5.0) - 1.0) / 2.0
        evaluations = {}

        def val_at(th):
            if th not in evaluations:
                try:
                    v = fixed_value(problem, _family_measurement(family, th), q_points, tol)
                    evaluations[th] = (float(v(at_q)), v)
                except InfeasibleError:
                    evaluations[th] = (math.inf, None)
            return evaluations[th][0]

        x1 = hi - invphi * (hi - lo)
        x2 = lo + invphi * (hi - lo)
        for _ in range(24):
            if val_at(x1) < val_at(x2):
                hi = x2
                x2 = x1
                x1 = hi - invphi * (hi - lo)
            else:
                lo = x1
                x1 = x2
                x2 = lo + invphi * (hi - lo)
        for th, (v, vf) in evaluations.items():
            if v < val_star and vf is not None:
                theta_star, val_star, vf_star = th, v, vf
    return FixedStrategyResult(
        best_theta=theta_star,
        value_fn=vf_star,
        consumption_at={at_q: val_star},
        family=family,
        scanned=scanned,
    )


# ---------------------------------------------------------------------------
# relative-entropy rates and the eta ratio


@dataclass(frozen=True)
class EntropyRates:
    """Per-copy outcome relative entropies of a measurement.

    A rate is infinite when some outcome excludes one state outright
    (perfect-exclusion events); `finite` reflects that.
    """

    e0: float
    e1: float
    copies: int

    @property
    def finite(self) -> bool:
        return math.isfinite(self.e0) and math.isfinite(self.e1)


def entropy_rates(rho0, rho1, measurement: states.Measurement) -> EntropyRates:
    """Outcome relative entropies divided by the copies measured jointly."""
    a = np.array([states.born_probability(op, rho0.matrix) for op, _ in measurement.elements])
    b = np.array([states.born_probability(op, rho1.matrix) for op, _ in measurement.elements])
    n = measurement.copy_cost
    return EntropyRates(e0=_rel_entropy(a, b) / n, e1=_rel_entropy(b, a) / n, copies=n)


def _rel_entropy(p: np.ndarray, q: np.ndarray) -> float:
    total = 0.0
    for pk, qk in zip(p, q):
        if pk <= 0.0:
            continue  # 0 ln 0 = 0
        if qk <= 0.0:
            return math.inf  # perfect exclusion
        total += pk * math.log(pk / qk)
    return max(total, 0.0)


@dataclass(frozen=True)
class EtaResult:
    eta: float
    max_e0: float
    max_e1: float
    theta_e0: float | None
    theta_e1: float | None
    family: str
    adaptive: bool

    @property
    def degenerate(self) -> bool:
        return math.isinf(self.max_e0) or math.isinf(self.max_e1)


def _local_povm_max_rate(problem: DiscriminationProblem, thetas, swap: bool) -> tuple:
    """Max outcome relative entropy over all one-copy POVMs (moment LP).

    The rate of a rank-one POVM is linear in its weight density, so the
    maximizer has at most three support angles; reuse the support search on
    the negated per-angle rate density.
    """
    from .povm_search import CostDensity, build_povm, find_optimal_support, integral_value

    p0 = problem.rho0.matrix if not swap else problem.rho1.matrix
    p1 = problem.rho1.matrix if not swap else problem.rho0.matrix
    from .povm_search import trace_profile

    ta = trace_profile(p0, thetas)
    tb = trace_profile(p1, thetas)
    with np.errstate(divide="ignore"):
        ratio = np.log(np.maximum(ta, 1e-300)) - np.log(np.maximum(tb, 1e-300))
    h = ta * ratio
    if np.any(tb <= 1e-300) and np.any(ta[tb <= 1e-300] > 1e-12):
        return math.inf, None
    g = CostDensity(theta_grid=thetas, values=-h)
    support = find_optimal_support(g)
    rate = -integral_value(g, build_povm(support))
    return rate, support.support[0]


def _collective_max_rate(problem: DiscriminationProblem, thetas, swap: bool) -> tuple:
    best = -math.inf
    best_th = None
    for th in thetas:
        m = states.collective_measurement(th)
        r = entropy_rates(problem.rho0_pair, problem.rho1_pair, m)
        rate = r.e0 if not swap else r.e1
        if rate > best:
            best = rate
            best_th = float(th)
    return best, best_th


def eta_ratio(
    q: float,
    problem: DiscriminationProblem,
    family: str = "local-povm",
    theta_points: int | None = None,
) -> EtaResult:
    """Small-error copies per unit -ln(eps) with per-rate adaptive maxima.

    The two rates are maximized independently (different measurements may
    achieve each), matching the best adaptive strategy of the family.
    """
    if not 0.0 < q < 1.0:
        raise DomainError("eta ratio needs an interior prior")
    if family == "local-povm":
        thetas = theta_grid(theta_points or 1801)
        e0, th0 = _local_povm_max_rate(problem, thetas, swap=False)
        e1, th1 = _local_povm_max_rate(problem, thetas, swap=True)
    elif family == "local-projective":
        thetas = local_arm_grid(theta_points or 721)
        e0, th0 = _projective_max_rate(problem, thetas, swap=False)
        e1, th1 = _projective_max_rate(problem, thetas, swap=True)
    elif family == "collective":
        thetas = collective_arm_grid(theta_points or 101)
        e0, th0 = _collective_max_rate(problem, thetas, swap=False)
        e1, th1 = _collective_max_rate(problem, thetas, swap=True)
    else:
        raise DomainError(f"unknown eta family {family!r}")
    eta = _combine_eta(q, e0, e1)
    return EtaResult(eta=eta, max_e0=e0, max_e1=e1, theta_e0=th0, theta_e1=th1,
                     family=family, adaptive=True)


def _projective_max_rate(problem, thetas, swap: bool):
    best = -math.inf
    best_th = None
    for th in thetas:
        m = states.projective_pair(th)
        r = entropy_rates(problem.rho0, problem.rho1, m)
        rate = r.e0 if not swap else r.e1
        if rate > best:
            best = rate
            best_th = float(th)
    return best, best_th


def _combine_eta(q, e0, e1):
    term0 = 0.0 if math.isinf(e0) else q / e0 if e0 > 0 else math.inf
    term1 = 0.0 if math.isinf(e1) else (1.0 - q) / e1 if e1 > 0 else math.inf
    return term0 + term1


def eta_ratio_fixed(
    q: float,
    problem: DiscriminationProblem,
    family: str = "local",
    theta_points: int | None = None,
) -> EtaResult:
    """Eta of the best single fixed measurement (no per-rate adaptivity)."""
    if not 0.0 < q < 1.0:
        raise DomainError("eta ratio needs an interior prior")
    grid = _family_grid(family, theta_points)
    best = math.inf
    best_rates = (0.0, 0.0)
    best_th = None
    for th in grid:
        m = _family_measurement(family, th)
        if family == "local":
            r = entropy_rates(problem.rho0, problem.rho1, m)
        else:
            r = entropy_rates(problem.rho0_pair, problem.rho1_pair, m)
        eta = _combine_eta(q, r.e0, r.e1)
        if eta < best:
            best = eta
            best_rates = (r.e0, r.e1)
            best_th = float(th)
    return EtaResult(eta=best, max_e0=best_rates[0], max_e1=best_rates[1],
                     theta_e0=best_th, theta_e1=best_th,
                     family=f"{family}-fixed", adaptive=False)
