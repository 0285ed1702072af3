"""Discrimination problem definitions and the named study configurations."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import states
from .exceptions import DomainError


@dataclass(frozen=True)
class MixtureSpec:
    """Cross-contaminated preparation: rho_i mixes two pure components.

    rho_0 = (1-s)|a0><a0| + s|a1><a1| and rho_1 with the weights swapped.
    Two-copy preparations factor into the four pure products with weights
    (1-s)^2, s(1-s), s(1-s), s^2.
    """

    s: float
    angle0: float
    angle1: float

    def component_weights(self, which: int) -> np.ndarray:
        s = self.s
        if which == 0:
            return np.array([(1 - s) ** 2, s * (1 - s), s * (1 - s), s**2])
        return np.array([s**2, s * (1 - s), s * (1 - s), (1 - s) ** 2])

    def component_weights_single(self, which: int) -> np.ndarray:
        s = self.s
        return np.array([1 - s, s]) if which == 0 else np.array([s, 1 - s])


@dataclass(frozen=True)
class DiscriminationProblem:
    """Two candidate qubit states and an admissible error rate."""

    rho0: states.QubitState
    rho1: states.QubitState
    epsilon: float
    mixture: MixtureSpec | None = None
    label: str = ""
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if not 0.0 <= self.epsilon < 0.5:
            raise DomainError(f"epsilon must lie in [0, 0.5), got {self.epsilon}")

    @property
    def rho0_pair(self) -> states.TwoCopyState:
        if "r0p" not in self._cache:
            pair = states.tensor_power(self.rho0, 2)
            if self.mixture is not None:
                pair = states.TwoCopyState(pair.matrix, mixture_weight_s=self.mixture.s)
            self._cache["r0p"] = pair
        return self._cache["r0p"]

    @property
    def rho1_pair(self) -> states.TwoCopyState:
        if "r1p" not in self._cache:
            pair = states.tensor_power(self.rho1, 2)
            if self.mixture is not None:
                pair = states.TwoCopyState(pair.matrix, mixture_weight_s=self.mixture.s)
            self._cache["r1p"] = pair
        return self._cache["r1p"]

    @property
    def is_pure(self) -> bool:
        return self.rho0.is_pure and self.rho1.is_pure

    @property
    def pure_separation(self) -> float:
        """Angle x with |<psi0|psi1>| = cos x (pure problems only)."""
        if not self.is_pure:
            raise DomainError("separation angle is defined for pure problems")
        return abs(self.rho0.bloch_angle - self.rho1.bloch_angle)

    def helstrom_angle(self, q: float = 0.5) -> float:
        """Basis angle of the minimum-error projective measurement at prior q."""
        delta = q * self.rho0.matrix - (1.0 - q) * self.rho1.matrix
        dz = 0.5 * (delta[0, 0] - delta[1, 1])
        dx = delta[0, 1]
        return 0.5 * math.atan2(dx, dz)


def depolarized_problem(x0, x1, d0, d1, epsilon, label="") -> DiscriminationProblem:
    return DiscriminationProblem(
        rho0=states.make_state(x0, d0),
        rho1=states.make_state(x1, d1),
        epsilon=epsilon,
        label=label,
    )


def pure_problem(separation: float, epsilon: float, label="") -> DiscriminationProblem:
    """Symmetric pure states at +-separation/2 (overlap cos(separation))."""
    if not 0.0 < separation <= math.pi / 2.0:
        raise DomainError("separation must lie in (0, pi/2]")
    return DiscriminationProblem(
        rho0=states.make_state(separation / 2.0, 0.0),
        rho1=states.make_state(-separation / 2.0, 0.0),
        epsilon=epsilon,
        label=label or f"pure(x={separation:.4f})",
    )


def overlap_mixture_problem(
    s: float, epsilon: float, angle0: float = 0.0, angle1: float = math.pi / 12.0, label=""
) -> DiscriminationProblem:
    """Cross-contaminated pair built from two fixed pure components."""
    if not 0.0 <= s <= 0.5:
        raise DomainError("mixing weight s must lie in [0, 0.5]")
    mix = MixtureSpec(s=s, angle0=angle0, angle1=angle1)
    return DiscriminationProblem(
        rho0=states.mixture_state(s, angle0, angle1),
        rho1=states.mixture_state(1.0 - s, angle0, angle1),
        epsilon=epsilon,
        mixture=mix,
        label=label or f"mixture(s={s})",
    )


def fig1_problem() -> DiscriminationProblem:
    """Depolarized pair at +-15 degrees, eps = 0.01."""
    return depolarized_problem(
        x0=math.pi / 12.0, x1=-math.pi / 12.0, d0=0.01, d1=0.001, epsilon=0.01, label="fig1"
    )


def fig3_problem() -> DiscriminationProblem:
    """Cross-contaminated pair (s = 0.05) at eps = 1e-4."""
    return overlap_mixture_problem(s=0.05, epsilon=1e-4, label="fig3")
