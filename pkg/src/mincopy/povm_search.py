"""Optimal one-copy POVM support search over a discretized cost density.

The inner minimization of the local Bellman step: given g(theta) =
P_theta * N(q_theta) on a uniform theta grid, find the support and delta
masses of the admissible weight density f minimizing the integral of f*g
subject to f >= 0 and the three completeness moments (total mass 2, zero
cos(2 theta) and sin(2 theta) moments).  The minimizer is supported on at
most three angles; the search finds a tilt a*cos(2t)+b*sin(2t) whose
minimizer set carries an admissible support, which certifies optimality.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels, states
from .exceptions import DomainError, InvalidSupportError, SupportSearchError
from .value import ValueFunction


class Condition(enum.IntEnum):
    TWO_POINT = 1
    THREE_POINT = 2


@dataclass(frozen=True)
class CostDensity:
    """g(theta_j) on a uniform grid over [0, pi)."""

    theta_grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.theta_grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.shape != v.shape or t.ndim != 1:
            raise DomainError("theta grid and values must be 1-d arrays of equal length")
        steps = np.diff(t)
        if t.shape[0] >= 2 and not np.allclose(steps, steps[0], atol=1e-12):
            raise DomainError("theta grid must be uniform")
        if not np.all(np.isfinite(v)):
            raise DomainError("cost density must be finite")
        object.__setattr__(self, "theta_grid", t)
        object.__setattr__(self, "values", v)

    @property
    def step(self) -> float:
        return float(self.theta_grid[1] - self.theta_grid[0])

    def at(self, theta: float) -> float:
        """Linear interpolation, circular over [0, pi)."""
        pos = (theta % math.pi) / self.step
        return float(_kernels._interp_circular(self.values, pos))


@dataclass(frozen=True)
class TiltedSupport:
    """Certified support: global minimizers of g + a cos2t + b sin2t."""

    tilt_a: float
    tilt_b: float
    support: tuple
    condition: Condition


def _trig_tables(theta: np.ndarray):
    return np.cos(2.0 * theta), np.sin(2.0 * theta)


def build_cost_density(q, rho0, rho1, value_fn: ValueFunction, theta_grid) -> CostDensity:
    """g(theta) = tr(|psi_theta><psi_theta| rho_mix) * N(q_theta)."""
    if not 0.0 <= q <= 1.0:
        raise DomainError(f"prior must lie in [0, 1], got {q}")
    theta = np.asarray(theta_grid, dtype=float)
    t0 = trace_profile(rho0.matrix, theta)
    t1 = trace_profile(rho1.matrix, theta)
    p = q * t0 + (1.0 - q) * t1
    with np.errstate(invalid="ignore", divide="ignore"):
        q_theta = np.where(p > 1e-300, q * t0 / np.maximum(p, 1e-300), q)
    q_theta = np.clip(q_theta, 0.0, 1.0)
    g = p * value_fn(q_theta)
    return CostDensity(theta_grid=theta, values=g)


def trace_profile(matrix: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """tr(|psi_theta><psi_theta| rho) for every grid angle."""
    c = np.cos(theta)
    s = np.sin(theta)
    return matrix[0, 0] * c * c + 2.0 * matrix[0, 1] * c * s + matrix[1, 1] * s * s


def find_optimal_support(g: CostDensity, tol: float | None = None) -> TiltedSupport:
    """Run the tilt search; raises SupportSearchError if it fails to terminate."""
    theta = g.theta_grid
    c2, s2 = _trig_tables(theta)
    status, cond, i1, i2, i3, a, b = _kernels.support_search(
        g.values, c2, s2, -1.0 if tol is None else float(tol)
    )
    if status != _kernels.STATUS_OK:
        raise SupportSearchError(
            "support search failed to satisfy either optimality condition",
            tilt_a=a,
            tilt_b=b,
            minimizers=(i1,),
        )
    if cond == 1:
        support = (float(theta[i1]), float(theta[i2]))
        return TiltedSupport(a, b, support, Condition.TWO_POINT)
    support = (float(theta[i1]), float(theta[i2]), float(theta[i3]))
    return TiltedSupport(a, b, support, Condition.THREE_POINT)


def build_povm(support: TiltedSupport) -> states.Measurement:
    """Measurement realizing the support's delta masses.

    Two-point supports become an exactly orthogonal projective pair at
    {theta_1, theta_1 + pi/2}; three-point supports get the sine-rule
    masses, which satisfy the completeness moments identically.
    """
    if support.condition == Condition.TWO_POINT:
        t1, t2 = support.support
        if abs((t2 - t1) - math.pi / 2.0) > 2.0 * math.pi / 180.0:
            # tolerate grid offsets but not arbitrary pairs
            raise InvalidSupportError(
                f"two-point support gap {t2 - t1:.4f} is not close to pi/2"
            )
        return states.projective_pair(t1)
    t1, t2, t3 = support.support
    weights = states.triple_weights(t1, t2, t3)
    if min(weights) < -1e-10:
        raise InvalidSupportError(f"negative support weight {min(weights)}")
    return states.three_element_povm((t1, t2, t3), weights)


def integral_value(g: CostDensity, m: states.Measurement) -> float:
    """Sum of weight_i * g(theta_i) over the measurement's support."""
    if m.copy_cost != 1:
        raise DomainError("integral_value expects a one-copy measurement")
    total = 0.0
    for w, t in zip(m.weights, m.angles):
        total += w * g.at(t)
    return total


def optimal_value(g: CostDensity, tol: float | None = None) -> float:
    """Convenience: search, build, integrate."""
    return integral_value(g, build_povm(find_optimal_support(g, tol)))
