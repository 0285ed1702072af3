"""Value functions, policies and solve reports, plus their file format."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DomainError

FORMAT_VERSION = 1

KIND_STOP = 0
KIND_PROJECTIVE = 1
KIND_THREE_POVM = 2
ARM_LOCAL = 1
ARM_COLLECTIVE = 2


def uniform_q_grid(points: int) -> np.ndarray:
    if points < 3:
        raise DomainError("q grid needs at least 3 points")
    return np.linspace(0.0, 1.0, points)


def theta_grid(points: int) -> np.ndarray:
    """Uniform measurement-angle grid over [0, pi)."""
    if points < 8:
        raise DomainError("theta grid needs at least 8 points")
    return np.arange(points) * (np.pi / points)


def stop_mask(q_grid: np.ndarray, epsilon: float) -> np.ndarray:
    """Grid points where the error requirement is already met."""
    guard = epsilon * (1.0 + 1e-12) + 1e-15
    return np.minimum(q_grid, 1.0 - q_grid) <= guard


@dataclass
class ValueFunction:
    """Expected copies-to-decision N(q) on a uniform prior grid.

    Linear interpolation between grid points; zero exactly on the stop
    region min(q, 1-q) <= epsilon.
    """

    values: np.ndarray
    epsilon: float

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1:
            raise DomainError("value function must be one-dimensional")

    @property
    def points(self) -> int:
        return self.values.shape[0]

    @property
    def q_grid(self) -> np.ndarray:
        return uniform_q_grid(self.points)

    def __call__(self, q):
        return np.interp(q, self.q_grid, self.values)

    @property
    def stop_mask(self) -> np.ndarray:
        return stop_mask(self.q_grid, self.epsilon)


@dataclass
class GoalPolicy:
    """Per-grid-point one-copy measurement achieving the local value.

    kinds: 0 stop, 1 projective pair, 2 three-element POVM.  `angles` holds
    up to three support angles (the second projective angle is the first
    plus pi/2), `weights` the matching delta masses.
    """

    kinds: np.ndarray
    angles: np.ndarray
    weights: np.ndarray
    epsilon: float

    def measurement_at(self, index: int):
        from . import states

        kind = int(self.kinds[index])
        if kind == KIND_STOP:
            return None
        if kind == KIND_PROJECTIVE:
            return states.projective_pair(float(self.angles[index, 0]))
        return states.three_element_povm(
            tuple(self.angles[index]), tuple(self.weights[index])
        )


@dataclass
class GoacPolicy:
    """Per-grid-point arm choice (local pair vs two-copy collective) and angle."""

    arms: np.ndarray  # 0 stop, 1 local, 2 collective
    thetas: np.ndarray
    epsilon: float

    def measurement_at(self, index: int):
        from . import states

        arm = int(self.arms[index])
        if arm == 0:
            return None
        if arm == ARM_LOCAL:
            return states.projective_pair(float(self.thetas[index]))
        return states.collective_measurement(float(self.thetas[index]))

    @property
    def copies_per_round(self) -> np.ndarray:
        return np.where(self.arms == ARM_COLLECTIVE, 2, 1).astype(np.int64)


@dataclass
class SolveReport:
    iterations: int
    sup_norm_history: list
    converged: bool
    wall_time: float
    notes: dict = field(default_factory=dict)


class Stopwatch:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0
        return False


# ---------------------------------------------------------------------------
# persistence: versioned binary container (.npz) + JSON sidecar


def save_solution(path, value_fn, policy, report, config_hash="", extra=None):
    """Write value function + policy + report to `path` (.npz) and a sidecar."""
    path = str(path)
    if not path.endswith(".npz"):
        path += ".npz"
    arrays = {
        "format_version": np.array([FORMAT_VERSION]),
        "values": value_fn.values,
        "epsilon": np.array([value_fn.epsilon]),
        "config_hash": np.frombuffer(config_hash.encode(), dtype=np.uint8),
    }
    if isinstance(policy, GoalPolicy):
        arrays["policy_type"] = np.array([1])
        arrays["kinds"] = policy.kinds
        arrays["angles"] = policy.angles
        arrays["weights"] = policy.weights
    elif isinstance(policy, GoacPolicy):
        arrays["policy_type"] = np.array([2])
        arrays["arms"] = policy.arms
        arrays["thetas"] = policy.thetas
    else:
        raise DomainError(f"cannot serialize policy of type {type(policy)!r}")
    np.savez_compressed(path, **arrays)

    sidecar = {
        "format_version": FORMAT_VERSION,
        "config_hash": config_hash,
        "epsilon": value_fn.epsilon,
        "q_points": value_fn.points,
        "report": {
            "iterations": report.iterations,
            "sup_norm_history": [float(x) for x in report.sup_norm_history],
            "converged": report.converged,
            "wall_time": report.wall_time,
            "notes": report.notes,
        },
        "points": _sidecar_points(value_fn, policy),
    }
    if extra:
        sidecar.update(extra)
    with open(path[: -len(".npz")] + ".json", "w") as fh:
        json.dump(sidecar, fh)
    return path


def _sidecar_points(value_fn, policy):
    qs = value_fn.q_grid
    rows = []
    if isinstance(policy, GoalPolicy):
        for j in range(value_fn.points):
            rows.append(
                {
                    "q": round(float(qs[j]), 12),
                    "value": float(value_fn.values[j]),
                    "kind": int(policy.kinds[j]),
                    "angles": [float(a) for a in policy.angles[j]],
                    "weights": [float(w) for w in policy.weights[j]],
                }
            )
    else:
        for j in range(value_fn.points):
            rows.append(
                {
                    "q": round(float(qs[j]), 12),
                    "value": float(value_fn.values[j]),
                    "arm": int(policy.arms[j]),
                    "theta": float(policy.thetas[j]),
                }
            )
    return rows


def load_solution(path):
    """Read back (value_fn, policy, config_hash)."""
    path = str(path)
    if not path.endswith(".npz"):
        path += ".npz"
    with np.load(path) as data:
        version = int(data["format_version"][0])
        if version != FORMAT_VERSION:
            raise DomainError(f"unsupported solution format version {version}")
        eps = float(data["epsilon"][0])
        vf = ValueFunction(values=data["values"].copy(), epsilon=eps)
        config_hash = bytes(data["config_hash"]).decode()
        if int(data["policy_type"][0]) == 1:
            policy = GoalPolicy(
                kinds=data["kinds"].copy(),
                angles=data["angles"].copy(),
                weights=data["weights"].copy(),
                epsilon=eps,
            )
        else:
            policy = GoacPolicy(
                arms=data["arms"].copy(), thetas=data["thetas"].copy(), epsilon=eps
            )
    return vf, policy, config_hash
