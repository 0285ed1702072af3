"""mincopy: minimum-copy adaptive discrimination of two qubit states.

Computes globally optimal adaptive measurement strategies (local POVMs,
or mixed local/two-copy collective) that minimize the average number of
state copies consumed to reach a target error rate, plus fixed-measurement
baselines, pure-state closed forms, and a reproducible Monte Carlo
simulator for solved policies.
"""

__version__ = "0.1.0"

from .backend import active_backend
from .problems import (
    DiscriminationProblem,
    depolarized_problem,
    fig1_problem,
    fig3_problem,
    overlap_mixture_problem,
    pure_problem,
)
from .states import (
    Measurement,
    MeasurementKind,
    QubitState,
    TwoCopyState,
    born_probability,
    collective_bases,
    collective_measurement,
    make_state,
    mixture_state,
    posterior,
    projective_pair,
    tensor_power,
    three_element_povm,
)
from .value import GoacPolicy, GoalPolicy, SolveReport, ValueFunction

__all__ = [
    "DiscriminationProblem",
    "GoacPolicy",
    "GoalPolicy",
    "Measurement",
    "MeasurementKind",
    "QubitState",
    "SolveReport",
    "TwoCopyState",
    "ValueFunction",
    "active_backend",
    "born_probability",
    "collective_bases",
    "collective_measurement",
    "depolarized_problem",
    "fig1_problem",
    "fig3_problem",
    "make_state",
    "mixture_state",
    "overlap_mixture_problem",
    "posterior",
    "projective_pair",
    "pure_problem",
    "tensor_power",
    "three_element_povm",
    "__version__",
]
