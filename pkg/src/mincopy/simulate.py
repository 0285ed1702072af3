"""Monte Carlo execution of solved policies against a hidden true state.

Each trial draws the true state from the prior, then repeatedly looks up
the policy measurement at the nearest grid prior, samples an outcome from
the Born probabilities of the true state, and updates the prior by Bayes'
rule until the error requirement is met.  All randomness comes from
counter-based streams keyed by (seed, trial, round), so runs are
reproducible and order-independent at any parallelism.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels, states
from .exceptions import DomainError, RunawayTrialError
from .problems import DiscriminationProblem
from .solver import goac_policy_tables, goal_policy_tables
from .value import ARM_COLLECTIVE, ARM_LOCAL, GoacPolicy, GoalPolicy, ValueFunction

COPY_CAP = 10**6
EXCLUSION_SNAP = 1e-12


@dataclass(frozen=True)
class TrialRecord:
    true_state: int            # 0 or 1
    copies_used: int
    decision: int
    correct: bool
    final_posterior: float
    outcome_trace: tuple | None = None


@dataclass
class SimulationSummary:
    trials: int
    mean_copies: float
    stderr_copies: float | None
    empirical_error: float
    histogram: dict
    seed: int
    q0: float
    epsilon: float
    error_flagged: bool = False

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "mean_copies": self.mean_copies,
            "stderr_copies": self.stderr_copies,
            "empirical_error": self.empirical_error,
            "histogram": {str(k): int(v) for k, v in sorted(self.histogram.items())},
            "seed": self.seed,
            "q0": self.q0,
            "epsilon": self.epsilon,
            "error_flagged": self.error_flagged,
        }


@dataclass(frozen=True)
class PolicyTables:
    """Flat lookup tables driving the simulation kernel.

    ptab: outcome probabilities per (component, grid row, outcome) under
    each preparation component; compcum: cumulative component weights per
    (true state, grid row); atab/btab: model Born traces for the Bayes
    update; ncopies: copies consumed per round at each grid row.
    """

    ptab: np.ndarray
    compcum: np.ndarray
    atab: np.ndarray
    btab: np.ndarray
    ncopies: np.ndarray
    n_comp: int
    n_out: int
    epsilon: float
    j_lo: int
    j_hi: int


def _snap_exclusions(table: np.ndarray) -> np.ndarray:
    """Clamp numerically-zero Born traces to exact zeros.

    Perfect-exclusion outcomes must drive the posterior to an exact 0/1 so
    zero-error policies terminate; float trigonometry leaves ~1e-33 dust."""
    out = table.copy()
    out[np.abs(out) < EXCLUSION_SNAP] = 0.0
    return out


def build_tables(
    policy,
    problem: DiscriminationProblem,
    component_sampling: bool = False,
) -> PolicyTables:
    """Precompute the per-grid-point lookup tables for a solved policy.

    With component_sampling=True (mixture problems only) each round first
    draws the pure preparation component, mirroring a source that emits
    randomly chosen pure states; otherwise outcomes are sampled directly
    from the mixed state, which is statistically identical.
    """
    if isinstance(policy, GoalPolicy):
        A, B = goal_policy_tables(policy, problem)
        ncopies = np.ones(A.shape[0], dtype=np.int64)
        arms = None
        active = policy.kinds != 0
    elif isinstance(policy, GoacPolicy):
        A, B = goac_policy_tables(policy, problem)
        ncopies = policy.copies_per_round
        arms = policy.arms
        active = policy.arms != 0
    else:
        raise DomainError(f"unsupported policy type {type(policy)!r}")
    if not np.any(active):
        raise DomainError("policy has no undecided region to simulate")
    undecided = np.where(active)[0]
    A = _snap_exclusions(A)
    B = _snap_exclusions(B)
    G, K = A.shape

    if not component_sampling:
        # one "component" per true state: outcomes sampled straight from
        # the mixed density matrix
        ptab = np.stack([A, B])
        compcum = np.zeros((2, G, 2))
        compcum[0, :, 0] = 1.0  # true 0 -> component 0 surely
        compcum[1, :, 0] = 0.0  # true 1 -> component 1 surely
        compcum[:, :, 1] = 1.0
        n_comp = 2
    else:
        if problem.mixture is None:
            raise DomainError("component sampling needs a mixture problem")
        ptab, compcum, n_comp = _component_tables(policy, problem, arms, G, K)

    return PolicyTables(
        ptab=np.ascontiguousarray(ptab.reshape(-1)),
        compcum=np.ascontiguousarray(compcum.reshape(-1)),
        atab=np.ascontiguousarray(A.reshape(-1)),
        btab=np.ascontiguousarray(B.reshape(-1)),
        ncopies=ncopies,
        n_comp=n_comp,
        n_out=K,
        epsilon=problem.epsilon,
        j_lo=int(undecided[0]),
        j_hi=int(undecided[-1]),
    )


def _component_tables(policy, problem, arms, G, K):
    """Outcome tables per pure preparation component.

    Components: for one-copy rounds the two pure states (weights 1-s, s);
    for two-copy rounds the four ordered pure products (weights (1-s)^2,
    s(1-s), s(1-s), s^2).  Rows mix the two layouts by arm.
    """
    mix = problem.mixture
    pures = [states.projector(mix.angle0), states.projector(mix.angle1)]
    C = 4
    ptab = np.zeros((C, G, K))
    compcum = np.zeros((2, G, C))
    for j in range(G):
        if isinstance(policy, GoalPolicy):
            arm = ARM_LOCAL if policy.kinds[j] != 0 else 0
        else:
            arm = int(arms[j])
        if arm == 0:
            continue
        m = policy.measurement_at(j)
        if arm == ARM_LOCAL:
            comps = [pures[0], pures[1]]
            w0 = mix.component_weights_single(0)
            w1 = mix.component_weights_single(1)
        else:
            comps = [
                np.kron(pures[a], pures[b]) for a, b in ((0, 0), (0, 1), (1, 0), (1, 1))
            ]
            w0 = mix.component_weights(0)
            w1 = mix.component_weights(1)
        for c, comp in enumerate(comps):
            for k, (op, _) in enumerate(m.elements):
                ptab[c, j, k] = states.born_probability(op, comp)
        compcum[0, j, : len(w0)] = np.cumsum(w0)
        compcum[1, j, : len(w1)] = np.cumsum(w1)
        compcum[0, j, len(w0):] = 1.0
        compcum[1, j, len(w1):] = 1.0
    ptab = _snap_exclusions(ptab)
    return ptab, compcum, C


def monte_carlo(
    policy,
    problem: DiscriminationProblem,
    q0: float,
    trials: int,
    seed: int,
    component_sampling: bool = False,
    tables: PolicyTables | None = None,
) -> SimulationSummary:
    """Aggregate many trials into consumption and error statistics."""
    if trials < 1:
        raise DomainError("at least one trial is required")
    if not 0.0 <= q0 <= 1.0:
        raise DomainError("initial prior must lie in [0, 1]")
    if tables is None:
        tables = build_tables(policy, problem, component_sampling)
    status, copies, correct, decisions, true_states, final_q = _kernels.simulate_batch(
        float(q0),
        float(problem.epsilon),
        int(trials),
        np.uint64(seed & 0xFFFFFFFFFFFFFFFF),
        tables.ptab,
        tables.compcum,
        tables.atab,
        tables.btab,
        tables.ncopies,
        tables.n_comp,
        tables.n_out,
        COPY_CAP,
        tables.j_lo,
        tables.j_hi,
    )
    if status != _kernels.STATUS_OK:
        raise RunawayTrialError(f"a trial exceeded the copy cap {COPY_CAP}")
    total = int(copies.sum())
    mean = total / trials
    if trials > 1:
        var = float(np.sum((copies - mean) ** 2)) / (trials - 1)
        stderr = math.sqrt(var / trials)
    else:
        stderr = None
    n_err = int(trials - correct.sum())
    emp_error = n_err / trials
    counts = np.bincount(copies)
    histogram = {int(c): int(n) for c, n in enumerate(counts) if n > 0}
    eps = problem.epsilon
    flag = False
    if trials > 1:
        binom_se = math.sqrt(max(eps * (1 - eps), 1e-300) / trials)
        flag = emp_error > eps + 4.0 * binom_se
    return SimulationSummary(
        trials=trials,
        mean_copies=mean,
        stderr_copies=stderr,
        empirical_error=emp_error,
        histogram=histogram,
        seed=seed,
        q0=q0,
        epsilon=eps,
        error_flagged=flag,
    )


def run_trial(
    policy,
    problem: DiscriminationProblem,
    true_state: int,
    rng_stream: tuple,
    component_sampling: bool = False,
    q0: float = 0.5,
    trace: bool = False,
    tables: PolicyTables | None = None,
) -> TrialRecord:
    """One sequential trial with a forced true state; pure-python reference.

    rng_stream is (seed, trial_index); draws follow exactly the same
    counter scheme as the batched kernel, so records match it bit for bit.
    """
    if true_state not in (0, 1):
        raise DomainError("true_state must be 0 or 1")
    seed, trial = rng_stream
    if tables is None:
        tables = build_tables(policy, problem, component_sampling)
    G = tables.ncopies.shape[0]
    K = tables.n_out
    C = tables.n_comp
    eps = problem.epsilon
    q = q0
    copies = 0
    outcomes = []
    r = 1
    while min(q, 1.0 - q) > eps:
        j = min(max(int(q * (G - 1) + 0.5), tables.j_lo), tables.j_hi)
        if C > 1:
            uc = _uniform(seed, trial, 4 * r + 1)
            comp = 0
            base_c = (true_state * G + j) * C
            for c in range(C - 1):
                if uc >= tables.compcum[base_c + c]:
                    comp += 1
        else:
            comp = 0
        uo = _uniform(seed, trial, 4 * r)
        base_p = (comp * G + j) * K
        k = 0
        acc = 0.0
        for kk in range(K - 1):
            acc += tables.ptab[base_p + kk]
            if uo >= acc:
                k += 1
        a = tables.atab[j * K + k]
        b = tables.btab[j * K + k]
        den = q * a + (1.0 - q) * b
        if den > 0.0:
            q = q * a / den
        copies += int(tables.ncopies[j])
        if trace:
            outcomes.append((j, k))
        if copies >= COPY_CAP:
            raise RunawayTrialError(f"trial exceeded the copy cap {COPY_CAP}")
        r += 1
    decision = 1 if q <= eps else 0
    return TrialRecord(
        true_state=true_state,
        copies_used=copies,
        decision=decision,
        correct=decision == true_state,
        final_posterior=q,
        outcome_trace=tuple(outcomes) if trace else None,
    )


def _mix1(z: int) -> int:
    mask = 0xFFFFFFFFFFFFFFFF
    z = (z + 0x9E3779B97F4A7C15) & mask
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
    return z ^ (z >> 31)


def _uniform(seed: int, trial: int, counter: int) -> float:
    z = _mix1(seed & 0xFFFFFFFFFFFFFFFF)
    z = _mix1(z ^ trial)
    z = _mix1(z ^ counter)
    return (z >> 11) * (1.0 / 9007199254740992.0)


def draw_true_state(seed: int, trial: int, q0: float) -> int:
    """The batched kernel's true-state draw for one trial."""
    return 0 if _uniform(seed, trial, 0) < q0 else 1


@dataclass
class ConsistencyReport:
    rows: list = field(default_factory=list)
    passed: bool = True

    def add(self, q0, simulated, expected, stderr, slack):
        ok = abs(simulated - expected) <= 3.0 * (stderr or 0.0) + slack
        self.rows.append(
            {
                "q0": q0,
                "simulated_mean": simulated,
                "solver_value": expected,
                "stderr": stderr,
                "slack": slack,
                "ok": ok,
            }
        )
        if not ok:
            self.passed = False


def consumption_consistency(
    policy,
    value_fn: ValueFunction,
    problem: DiscriminationProblem,
    q_samples,
    trials: int = 100000,
    seed: int = 2024,
) -> ConsistencyReport:
    """Check simulated means against the solver's expectations.

    The allowed slack on top of three standard errors covers the grid
    interpolation and nearest-point policy lookup bias.
    """
    report = ConsistencyReport()
    tables = build_tables(policy, problem)
    dq = 1.0 / (value_fn.points - 1)
    for q0 in q_samples:
        summary = monte_carlo(policy, problem, q0, trials, seed, tables=tables)
        slack = max(10.0 * dq * max(value_fn.values.max(), 1.0) * 0.01, 1e-6)
        report.add(q0, summary.mean_copies, float(value_fn(q0)), summary.stderr_copies, slack)
    return report
