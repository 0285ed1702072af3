"""State and measurement algebra for real-valued qubit discrimination.

Everything here lives in the real span {I, sigma_x, sigma_z} (and its
two-copy tensor square), which covers all states and measurement bases
used anywhere in the package.  Types are immutable after construction and
all operations are pure functions.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ArityError, DimensionError, DomainError, InvalidSupportError

TRACE_TOL = 1e-12
PSD_TOL = 1e-12
COMPLETENESS_TOL = 1e-10


def ket(theta: float) -> np.ndarray:
    """Real qubit ket cos(theta)|0> + sin(theta)|1>."""
    return np.array([math.cos(theta), math.sin(theta)])


def ket_minus(theta: float) -> np.ndarray:
    """Orthogonal partner sin(theta)|0> - cos(theta)|1> (sign convention fixed)."""
    return np.array([math.sin(theta), -math.cos(theta)])


def projector(theta: float) -> np.ndarray:
    v = ket(theta)
    return np.outer(v, v)


@dataclass(frozen=True)
class QubitState:
    """Real single-qubit density matrix (1-d)|v><v| + (d/2) I.

    `bloch_angle` is the angle of |v> in the real plane; `depolarization`
    the admixture of the maximally mixed state.
    """

    bloch_angle: float
    depolarization: float
    matrix: np.ndarray = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        d = self.depolarization
        if not 0.0 <= d <= 1.0:
            raise DomainError(f"depolarization must lie in [0, 1], got {d}")
        if self.matrix is None:
            m = (1.0 - d) * projector(self.bloch_angle) + (d / 2.0) * np.eye(2)
            object.__setattr__(self, "matrix", m)
        self.matrix.setflags(write=False)
        _check_density_matrix(self.matrix)

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "QubitState":
        """Recover (bloch_angle, depolarization) from any real 2x2 density matrix."""
        m = np.asarray(matrix, dtype=float)
        _check_density_matrix(m)
        evals, evecs = np.linalg.eigh(m)
        # eigh sorts ascending: evals[1] is the dominant eigenvalue
        v = evecs[:, 1]
        if v[0] < 0 or (v[0] == 0 and v[1] < 0):
            v = -v
        angle = math.atan2(v[1], v[0])
        depol = 2.0 * min(max(evals[0], 0.0), 0.5)
        return cls(bloch_angle=angle, depolarization=depol, matrix=m.copy())

    @property
    def is_pure(self) -> bool:
        return self.depolarization < 1e-12


@dataclass(frozen=True)
class TwoCopyState:
    """Real 4x4 density matrix of a two-copy preparation."""

    matrix: np.ndarray = field(repr=False)
    mixture_weight_s: float | None = None

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        object.__setattr__(self, "matrix", m)
        m.setflags(write=False)
        _check_density_matrix(m, dim=4)
        if self.mixture_weight_s is not None and not 0.0 <= self.mixture_weight_s <= 1.0:
            raise DomainError("mixture_weight_s must lie in [0, 1]")


def _check_density_matrix(m: np.ndarray, dim: int | None = None) -> None:
    if dim is not None and m.shape != (dim, dim):
        raise DimensionError(f"expected a {dim}x{dim} matrix, got {m.shape}")
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"density matrix must be square, got {m.shape}")
    if abs(np.trace(m) - 1.0) > TRACE_TOL:
        raise DomainError(f"trace must be 1, got {np.trace(m)}")
    if not np.allclose(m, m.T, atol=TRACE_TOL):
        raise DomainError("density matrix must be symmetric")
    if np.linalg.eigvalsh(m).min() < -PSD_TOL:
        raise DomainError("density matrix must be positive semidefinite")


def make_state(bloch_angle: float, depolarization: float) -> QubitState:
    """Build (1-d)|v><v| + (d/2) I with |v> at the given real angle."""
    return QubitState(bloch_angle=bloch_angle, depolarization=depolarization)


def mixture_state(weight: float, angle_a: float, angle_b: float) -> QubitState:
    """(1-w)|a><a| + w|b><b| as a QubitState."""
    if not 0.0 <= weight <= 1.0:
        raise DomainError("mixture weight must lie in [0, 1]")
    m = (1.0 - weight) * projector(angle_a) + weight * projector(angle_b)
    return QubitState.from_matrix(m)


def tensor_power(state: QubitState, n: int):
    """state^{tensor n} for n in {1, 2}."""
    if n == 1:
        return state
    if n == 2:
        m = np.kron(state.matrix, state.matrix)
        return TwoCopyState(matrix=m, mixture_weight_s=None)
    raise ArityError(f"only 1- and 2-copy states are supported, got n={n}")


def born_probability(element: np.ndarray, state: np.ndarray) -> float:
    """tr(M rho), clamped into [0, 1] only when within 1e-10 of the boundary."""
    element = np.asarray(element, dtype=float)
    state = np.asarray(state, dtype=float)
    if element.shape != state.shape:
        raise DimensionError(
            f"element shape {element.shape} does not match state shape {state.shape}"
        )
    p = float(np.trace(element @ state))
    if -1e-10 < p < 0.0:
        return 0.0
    if 1.0 < p < 1.0 + 1e-10:
        return 1.0
    return p


class MeasurementKind(enum.Enum):
    LOCAL_PROJECTIVE = "local_projective"
    THREE_ELEMENT_POVM = "three_element_povm"
    COLLECTIVE_ENTANGLED = "collective_entangled"


@dataclass(frozen=True)
class Measurement:
    """A finite POVM on 1 or 2 copies: elements sum to identity."""

    kind: MeasurementKind
    elements: tuple  # of (operator, label)
    copy_cost: int
    angles: tuple
    weights: tuple

    def __post_init__(self):
        if self.copy_cost not in (1, 2):
            raise ArityError(f"copy_cost must be 1 or 2, got {self.copy_cost}")
        dim = 2 if self.copy_cost == 1 else 4
        total = np.zeros((dim, dim))
        for op, _label in self.elements:
            if op.shape != (dim, dim):
                raise DimensionError(f"element shape {op.shape} mismatches {dim}-dim space")
            if np.linalg.eigvalsh(op).min() < -COMPLETENESS_TOL:
                raise InvalidSupportError("POVM element is not positive semidefinite")
            total = total + op
        if np.abs(total - np.eye(dim)).max() > COMPLETENESS_TOL:
            raise InvalidSupportError("POVM elements do not sum to identity")

    @property
    def operators(self) -> list:
        return [op for op, _ in self.elements]


def projective_pair(theta: float) -> Measurement:
    """Two-outcome projective measurement along theta / theta + pi/2."""
    p0 = projector(theta)
    p1 = np.eye(2) - p0
    return Measurement(
        kind=MeasurementKind.LOCAL_PROJECTIVE,
        elements=((p0, f"theta={theta:.6f}"), (p1, f"theta={theta + math.pi / 2:.6f}")),
        copy_cost=1,
        angles=(theta, theta + math.pi / 2.0),
        weights=(1.0, 1.0),
    )


def triple_weights(t1: float, t2: float, t3: float) -> tuple:
    """Delta masses making {w_i |psi_i><psi_i|} complete for a 3-angle support.

    For support t1 < t2 < t3 the masses are proportional to the sine of
    twice the opposite gap; they are nonnegative exactly when the support
    satisfies the three-point feasibility inequalities.
    """
    s12 = math.sin(2.0 * (t2 - t1))
    s23 = math.sin(2.0 * (t3 - t2))
    s31 = math.sin(2.0 * (t1 - t3))
    denom = s12 + s23 + s31
    if abs(denom) < 1e-14:
        raise InvalidSupportError("degenerate three-angle support")
    return (2.0 * s23 / denom, 2.0 * s31 / denom, 2.0 * s12 / denom)


def three_element_povm(thetas, weights=None) -> Measurement:
    """Rank-one POVM w_i |psi_theta_i><psi_theta_i| from a sorted 3-angle support."""
    t1, t2, t3 = thetas
    if not t1 < t2 < t3:
        raise InvalidSupportError("support angles must be strictly increasing")
    if weights is None:
        weights = triple_weights(t1, t2, t3)
    if min(weights) < -1e-10:
        raise InvalidSupportError(f"negative POVM weight {min(weights)}")
    weights = tuple(max(w, 0.0) for w in weights)
    elements = tuple(
        (w * projector(t), f"theta={t:.6f}") for w, t in zip(weights, thetas)
    )
    return Measurement(
        kind=MeasurementKind.THREE_ELEMENT_POVM,
        elements=elements,
        copy_cost=1,
        angles=tuple(thetas),
        weights=weights,
    )


def collective_bases(theta: float) -> np.ndarray:
    """Four orthonormal two-copy basis vectors built from |theta+-> pairs.

    Rows: |++>, (|+-> + |-+>)/sqrt2, (|+-> - |-+>)/sqrt2, |-->.  The third
    row is the singlet and is theta-independent up to sign.
    """
    plus = ket(theta)
    minus = ket_minus(theta)
    pp = np.kron(plus, plus)
    pm = np.kron(plus, minus)
    mp = np.kron(minus, plus)
    mm = np.kron(minus, minus)
    sym = (pm + mp) / math.sqrt(2.0)
    anti = (pm - mp) / math.sqrt(2.0)
    return np.stack([pp, sym, anti, mm])


def collective_measurement(theta: float) -> Measurement:
    """Entangled two-copy projective measurement onto the four collective bases."""
    bases = collective_bases(theta)
    labels = ("psi1", "psi2", "psi3", "psi4")
    elements = tuple(
        (np.outer(v, v), f"{lbl}(theta={theta:.6f})") for v, lbl in zip(bases, labels)
    )
    return Measurement(
        kind=MeasurementKind.COLLECTIVE_ENTANGLED,
        elements=elements,
        copy_cost=2,
        angles=(theta,) * 4,
        weights=(1.0,) * 4,
    )


@dataclass(frozen=True)
class PosteriorUpdate:
    """One Bayesian update branch: outcome probability and posterior prior."""

    prior_q: float
    probability: float
    posterior_q: float
    zero_probability: bool = False
    label: str = ""


def posterior(q: float, rho0, rho1, measurement: Measurement) -> list:
    """Bayesian update branches for prior q under the given measurement.

    rho0/rho1 may be QubitState or TwoCopyState; their copy count must
    match the measurement's copy cost.  Outcomes with vanishing total
    probability are flagged rather than dropped so expectation sums stay
    auditable.
    """
    if not 0.0 <= q <= 1.0:
        raise DomainError(f"prior must lie in [0, 1], got {q}")
    m0 = rho0.matrix
    m1 = rho1.matrix
    dim = 2 if measurement.copy_cost == 1 else 4
    if m0.shape != (dim, dim) or m1.shape != (dim, dim):
        raise DimensionError(
            f"measurement acts on {measurement.copy_cost} copies; state dimension mismatch"
        )
    updates = []
    for op, label in measurement.elements:
        a = float(np.trace(op @ m0))
        b = float(np.trace(op @ m1))
        a = max(a, 0.0)
        b = max(b, 0.0)
        p = q * a + (1.0 - q) * b
        if p < 1e-14:
            if a > 0.0:
                qk = q * a / (q * a + (1.0 - q) * b) if (q * a + (1.0 - q) * b) > 0 else q
                updates.append(PosteriorUpdate(q, p, qk, zero_probability=True, label=label))
            else:
                updates.append(PosteriorUpdate(q, p, q, zero_probability=True, label=label))
            continue
        qk = q * a / p
        qk = min(max(qk, 0.0), 1.0)
        updates.append(PosteriorUpdate(q, p, qk, zero_probability=False, label=label))
    return updates
