"""Closed-form local-optimal consumption for two pure states.

The fitted expression: measurement angles from three arcsine formulas, a
five-case evaluation of the consumption recursion, and the perfect-
discrimination series (failure probabilities of collective measurements on
n copies), whose sum is the unbeatable average consumption at zero error.

States are |psi_0/1> = cos(x/2)|0> +- sin(x/2)|1>, overlap cos(x).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError, NonProgressError
from .states import ket, projector, triple_weights

CASE_DEPTH_CAP = 10**6


class GoalCase(enum.IntEnum):
    BALANCED = 1          # q = 1/2: fixed three-element POVM
    POVM = 2              # three-element POVM, inconclusive branch -> 1/2
    PROJECTIVE = 3        # projective, inconclusive branch raises q
    SINGLE_COPY = 4       # one Helstrom measurement finishes
    MIRROR = 5            # q > 1/2: reflect


@dataclass(frozen=True)
class PureProblem:
    separation: float  # x, with overlap <psi0|psi1> = cos x
    epsilon: float
    q: float

    def __post_init__(self):
        if not 0.0 < self.separation < math.pi / 2.0 + 1e-12:
            raise DomainError("separation must lie in (0, pi/2]")
        if not 0.0 <= self.epsilon < 0.5:
            raise DomainError("epsilon must lie in [0, 0.5)")
        if not 0.0 <= self.q <= 1.0:
            raise DomainError("prior must lie in [0, 1]")


@dataclass(frozen=True)
class GoalAngles:
    theta0: float
    theta1: float
    theta2: float
    theta4: float  # theta0 - pi/2
    case: GoalCase
    lam: float     # delta mass of the inconclusive (theta2) element


def _asin_clamped(value: float) -> float:
    if value > 1.0:
        if value > 1.0 + 1e-12:
            raise DomainError(f"arcsine argument {value} outside [-1, 1]")
        value = 1.0
    elif value < -1.0:
        if value < -1.0 - 1e-12:
            raise DomainError(f"arcsine argument {value} outside [-1, 1]")
        value = -1.0
    return math.asin(value)


def case4_boundary(x: float, eps: float) -> float:
    """Largest prior from which a single Helstrom measurement meets eps."""
    arg = 1.0 - 4.0 * eps * (1.0 - eps) / math.cos(x) ** 2
    if arg < 0.0:
        return 0.5  # requirement met from any prior with one copy
    return 0.5 * (1.0 - math.sqrt(arg))


def critical_q(x: float) -> float:
    """Prior where the zero-error measurement switches projective <-> POVM."""
    if not 0.0 < x <= math.pi / 2.0:
        raise DomainError("separation must lie in (0, pi/2]")
    c2 = math.cos(x) ** 2
    return c2 / (1.0 + c2)


def _raw_angles(q: float, x: float, eps: float) -> tuple:
    """The three arcsine angle formulas, evaluated verbatim."""
    c2x = math.cos(2.0 * x)
    s2x = math.sin(2.0 * x)
    r0 = math.hypot(c2x * eps * (1.0 - q) - (1.0 - eps) * q, eps * (1.0 - q) * s2x)
    theta0 = (
        math.pi
        - 0.5 * _asin_clamped((q - eps) / r0)
        - 0.5 * _asin_clamped(((1.0 - eps) * q - c2x * eps * (1.0 - q)) / r0)
        + x / 2.0
    )
    r1 = math.hypot((1.0 - eps) * (1.0 - q) - eps * q * c2x, eps * q * s2x)
    theta1 = (
        -x / 2.0
        + 0.5 * _asin_clamped(((1.0 - eps) * (1.0 - q) - eps * q * c2x) / r1)
        + 0.5 * _asin_clamped((1.0 - eps - q) / r1)
    )
    cx = math.cos(x)
    r2 = math.sqrt(max(q * q * cx * cx + 0.25 - q * cx * cx, 0.0))
    theta2 = 0.5 * _asin_clamped((0.5 - q) / r2) + 0.5 * _asin_clamped((0.5 - q) * cx / r2)
    return theta0, theta1, theta2


def _classify(q: float, x: float, eps: float, theta0: float, theta2: float) -> GoalCase:
    if q > 0.5:
        return GoalCase.MIRROR
    if q <= case4_boundary(x, eps):
        return GoalCase.SINGLE_COPY
    if abs(q - 0.5) < 1e-12:
        return GoalCase.BALANCED
    if theta0 - math.pi / 2.0 > theta2:
        return GoalCase.POVM
    return GoalCase.PROJECTIVE


def goal_angles(q: float, x: float, eps: float) -> GoalAngles:
    """Measurement angles and case for a pure problem at prior q.

    Priors above one half are mapped by the central symmetry
    (q, theta) -> (1-q, pi-theta).
    """
    if not eps < q < 1.0 - eps:
        raise DomainError("angles are defined on the undecided region")
    qq = 1.0 - q if q > 0.5 else q
    theta0, theta1, theta2 = _raw_angles(qq, x, eps)
    case = _classify(q, x, eps, theta0, theta2)
    lam = _lambda_mass(theta0, theta1, theta2)
    theta4 = theta0 - math.pi / 2.0
    if q > 0.5:
        theta0, theta1, theta2, theta4 = (
            math.pi - theta0,
            math.pi - theta1,
            math.pi - theta2,
            math.pi - theta4,
        )
    return GoalAngles(theta0=theta0, theta1=theta1, theta2=theta2, theta4=theta4,
                      case=case, lam=lam)


def _lambda_mass(theta0: float, theta1: float, theta2: float) -> float:
    """Delta mass of the theta2 element among the three support angles."""
    support = sorted([theta2 % math.pi, theta1 % math.pi, theta0 % math.pi])
    weights = triple_weights(*support)
    idx = support.index(theta2 % math.pi)
    return weights[idx]


def _mixture_matrix(q: float, x: float) -> np.ndarray:
    return q * projector(x / 2.0) + (1.0 - q) * projector(-x / 2.0)


def _element_prob(theta: float, q: float, x: float) -> float:
    v = ket(theta)
    return float(v @ _mixture_matrix(q, x) @ v)


def n_goal_analytic(q: float, x: float, eps: float) -> float:
    """Average copies of the locally optimal strategy, by case recursion.

    The projective case chains through increasing posteriors; the POVM
    cases bottom out at the balanced prior's closed form.
    """
    if min(q, 1.0 - q) <= eps:
        return 0.0
    if q > 0.5:
        q = 1.0 - q  # mirror case
    n_half = _n_balanced(x, eps)
    total = 0.0
    mult = 1.0
    for _ in range(CASE_DEPTH_CAP):
        if q <= case4_boundary(x, eps):
            return total + mult * 1.0
        if abs(q - 0.5) < 1e-9:
            return total + mult * n_half
        angles = goal_angles(q, x, eps)
        if angles.case == GoalCase.POVM:
            p_inconclusive = angles.lam * _element_prob(angles.theta2, q, x)
            return total + mult * (1.0 + p_inconclusive * n_half)
        # projective case: outcome along theta0 decides, theta4 continues
        p4 = _element_prob(angles.theta4, q, x)
        v = ket(angles.theta4)
        p4_given_0 = float(v @ projector(x / 2.0) @ v)
        total += mult
        mult *= p4
        q_next = q * p4_given_0 / p4
        if q_next <= q + 1e-15:
            raise NonProgressError("projective chain failed to increase the prior")
        q = min(q_next, 1.0 - q_next) if q_next > 0.5 else q_next
    raise NonProgressError("case recursion exceeded its depth cap")


def _n_balanced(x: float, eps: float) -> float:
    """Closed form at q = 1/2: geometric repetition of the fixed POVM.

    The inconclusive outcome keeps the prior balanced, so consumption is
    1 / P(conclusive) = 2 / (2 - lam * tr[|0><0|(rho0 + rho1)]).
    """
    theta0, theta1, theta2 = _raw_angles(0.5, x, eps)
    lam = _lambda_mass(theta0, theta1, theta2)
    overlap_trace = 2.0 * math.cos(x / 2.0) ** 2  # tr[|0><0|(rho0+rho1)]
    return 2.0 / (2.0 - lam * overlap_trace)


def p_n_col(q: float, x: float, n: int) -> float:
    """Minimum failure probability of perfect discrimination on n copies."""
    if n < 1:
        raise DomainError("n must be at least 1")
    if not 0.0 < q < 1.0:
        return 0.0
    cn = math.cos(x) ** n
    qc = cn * cn / (1.0 + cn * cn)
    if qc <= q <= 1.0 - qc:
        return 2.0 * math.sqrt(q * (1.0 - q)) * cn
    lo = min(q, 1.0 - q)
    hi = max(q, 1.0 - q)
    return lo + hi * cn * cn


def lower_bound(q: float, x: float, tol: float = 1e-12) -> float:
    """1 + sum of the failure series: the zero-error consumption floor.

    Terms eventually decay geometrically with ratio cos(x); the series is
    truncated when a term drops below tol and closed with the geometric
    tail bound.
    """
    if not 0.0 < x <= math.pi / 2.0:
        raise DomainError("separation must lie in (0, pi/2]")
    if min(q, 1.0 - q) <= 0.0:
        return 0.0
    cx = math.cos(x)
    total = 1.0
    term = 1.0
    for n in range(1, 100000):
        term = p_n_col(q, x, n)
        total += term
        if term < tol:
            if cx < 1.0:
                total += term * cx / (1.0 - cx)
            break
    return total


def small_prior_limits(x: float) -> dict:
    """The two printed small-prior consumption claims next to the series limit.

    The claims conflict with each other; nothing asserts them, they are
    surfaced for reports only.
    """
    return {
        "claim_upper_1_over_1_minus_cos": 1.0 / (1.0 - math.cos(x)),
        "claim_lower_2_over_sin2": 2.0 / math.sin(x) ** 2,
        "series_limit_q_to_0": lower_bound(1e-12, x),
    }
