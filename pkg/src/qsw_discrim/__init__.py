"""Quantum stochastic walks on layered sink networks for quantum state
discrimination: dynamics, parameterization schemes, optimal bounds and a
derivative-free optimization sweep."""

from .topology import NetworkTopology, build_layered, degree_matrix, transition_from_adjacency
from .schemes import Scheme, WalkParameters, materialize, param_count
from .dynamics import (
    Liouvillian,
    SinkReport,
    build_liouvillian,
    classical_propagate,
    propagate,
    sink_populations,
)
from .discrimination import (
    StateEnsemble,
    binary_pair_paper,
    brute_force_binary_bound,
    helstrom_binary,
    helstrom_pure,
    prob_correct,
    symmetric_bound,
    symmetric_ensemble,
)
from .optimizer import (
    OptimizeOptions,
    SweepRecord,
    maximize_binary,
    maximize_continuous,
    sweep,
)

__all__ = [
    "NetworkTopology",
    "build_layered",
    "degree_matrix",
    "transition_from_adjacency",
    "Scheme",
    "WalkParameters",
    "materialize",
    "param_count",
    "Liouvillian",
    "SinkReport",
    "build_liouvillian",
    "classical_propagate",
    "propagate",
    "sink_populations",
    "StateEnsemble",
    "binary_pair_paper",
    "brute_force_binary_bound",
    "helstrom_binary",
    "helstrom_pure",
    "prob_correct",
    "symmetric_bound",
    "symmetric_ensemble",
    "OptimizeOptions",
    "SweepRecord",
    "maximize_binary",
    "maximize_continuous",
    "sweep",
]

__version__ = "0.1.0"
