"""State ensembles, network detection probability, and optimal bounds.

The detection probability routes each hypothesis state through the network
and reads the population of its dedicated sink; anything left outside the
sinks is inconclusive and counts as failure. Bounds come from the binary
trace-norm formula and, for commuting equal-prior ensembles, from maximum
likelihood in the common eigenbasis. A Bloch-sphere grid search provides an
independent oracle for the binary case.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import Tolerances, trace_norm, validate_density
from .schemes import Scheme, materialize
from .topology import NetworkTopology
from .dynamics import (
    _restore_and_validate,
    build_liouvillian,
    propagator,
    sink_populations,
    unvec,
    vec,
)

ENSEMBLE_STATE_TOL = Tolerances(hermiticity=1e-9, trace=1e-9, psd=1e-9)
PRIOR_SUM_TOL = 1e-12
COMMUTATOR_TOL = 1e-9
MEASUREMENT_TOL = 1e-9


class EnsembleError(ValueError):
    pass


class UnsupportedEnsembleError(EnsembleError):
    """No exact solver covers this ensemble; use brute_force_binary_bound for
    two-state ensembles or supply a commuting equal-prior ensemble."""


@dataclass(frozen=True, eq=False)
class StateEnsemble:
    states: tuple[np.ndarray, ...]
    priors: np.ndarray

    def __post_init__(self):
        if len(self.states) != len(self.priors):
            raise EnsembleError("states and priors must have equal length")
        if np.any(self.priors < 0):
            raise EnsembleError("priors must be non-negative")
        if abs(self.priors.sum() - 1.0) > PRIOR_SUM_TOL:
            raise EnsembleError(f"priors sum to {self.priors.sum():.15g}, not 1")
        for st in self.states:
            validate_density(st, ENSEMBLE_STATE_TOL)
            if st.shape != self.states[0].shape:
                raise EnsembleError("all states must share one dimension")

    @property
    def dim(self) -> int:
        return self.states[0].shape[0]

    def __len__(self) -> int:
        return len(self.states)


@dataclass(frozen=True, eq=False)
class MeasurementSet:
    operators: tuple[np.ndarray, ...]

    def __post_init__(self):
        total = sum(self.operators)
        d = self.operators[0].shape[0]
        if np.max(np.abs(total - np.eye(d))) > MEASUREMENT_TOL:
            raise EnsembleError("measurement operators do not sum to identity")
        for op in self.operators:
            if np.linalg.eigvalsh(0.5 * (op + op.conj().T))[0] < -MEASUREMENT_TOL:
                raise EnsembleError("measurement operator is not positive semidefinite")


def binary_pair_paper() -> StateEnsemble:
    """Equiprobable pure/mixed qubit pair used on the 2-2-2 model."""
    rho1 = np.array(
        [
            [(2 + np.sqrt(2)) / 4, (1 + 1j) / 4],
            [(1 - 1j) / 4, (2 - np.sqrt(2)) / 4],
        ]
    )
    rho2 = np.array(
        [
            [0.68, -0.13 - 0.13j],
            [-0.13 + 0.13j, 0.32],
        ]
    )
    return StateEnsemble(states=(rho1, rho2), priors=np.array([0.5, 0.5]))


def symmetric_ensemble(n_states: int, alpha: float, dim: int) -> StateEnsemble:
    """Equiprobable mixtures (1 - alpha) I/dim + alpha |phi_m><phi_m| with
    |phi_m> the Fourier (mutually unbiased) basis of the input nodes."""
    if not 0.0 <= alpha <= 1.0:
        raise EnsembleError(f"alpha={alpha} outside [0, 1]")
    if dim != n_states:
        raise EnsembleError("supported case has one basis state per hypothesis (dim == n_states)")
    states = []
    for m in range(1, n_states + 1):
        k = np.arange(1, dim + 1)
        phi = np.exp(-2j * np.pi * m * k / dim) / np.sqrt(dim)
        states.append((1 - alpha) * np.eye(dim) / dim + alpha * np.outer(phi, phi.conj()))
    return StateEnsemble(states=tuple(states), priors=np.full(n_states, 1.0 / n_states))


def embed_on_inputs(state: np.ndarray, topo: NetworkTopology) -> np.ndarray:
    """Place an input-subspace state in the leading block of the full network."""
    if state.shape[0] != topo.n_input:
        raise EnsembleError(f"state dim {state.shape[0]} != input layer size {topo.n_input}")
    full = np.zeros((topo.n_nodes, topo.n_nodes), dtype=complex)
    full[: topo.n_input, : topo.n_input] = state
    return full


def prob_correct(
    scheme: Scheme,
    theta,
    topo: NetworkTopology,
    ens: StateEnsemble,
    p: float,
    tau: float,
    gamma_s: float = 1.0,
) -> float:
    """Probability of correctly identifying the prepared hypothesis from the
    sink that fires; inconclusive (non-sink) mass counts as failure."""
    if len(ens) > topo.n_output:
        raise EnsembleError(f"{len(ens)} hypotheses need at least that many sinks, have {topo.n_output}")
    wp = materialize(scheme, topo, theta, p=p, gamma_s=gamma_s)
    liou = build_liouvillian(wp, topo)
    u = propagator(liou, tau)
    pc = 0.0
    for n, (prior, state) in enumerate(zip(ens.priors, ens.states)):
        rho0 = embed_on_inputs(state, topo)
        rho = _restore_and_validate(unvec(u @ vec(rho0), topo.n_nodes))
        pc += prior * sink_populations(rho, topo).populations[n]
    return float(min(max(pc, 0.0), 1.0))


def helstrom_binary(rho1, rho2, p1: float) -> float:
    """Optimal binary success probability (1 + ||p1 rho1 - p2 rho2||_1) / 2."""
    rho1 = validate_density(rho1, ENSEMBLE_STATE_TOL)
    rho2 = validate_density(rho2, ENSEMBLE_STATE_TOL)
    if not 0.0 <= p1 <= 1.0:
        raise EnsembleError(f"p1={p1} outside [0, 1]")
    return 0.5 * (1.0 + trace_norm(p1 * rho1 - (1.0 - p1) * rho2))


def helstrom_pure(rho1, rho2, p1: float, purity_tol: float = 1e-9) -> float:
    """Pure-state specialization (1 + sqrt(1 - 4 p1 p2 tr(rho1 rho2))) / 2."""
    rho1 = validate_density(rho1, ENSEMBLE_STATE_TOL)
    rho2 = validate_density(rho2, ENSEMBLE_STATE_TOL)
    for name, rho in (("rho1", rho1), ("rho2", rho2)):
        purity = np.trace(rho @ rho).real
        if abs(purity - 1.0) > purity_tol:
            raise EnsembleError(f"{name} is not pure (tr rho^2 = {purity:.12g})")
    p2 = 1.0 - p1
    overlap = np.trace(rho1 @ rho2).real
    return 0.5 * (1.0 + np.sqrt(max(1.0 - 4.0 * p1 * p2 * overlap, 0.0)))


def _common_eigenbasis(ens: StateEnsemble) -> np.ndarray:
    """Basis simultaneously diagonalizing a pairwise-commuting ensemble."""
    n = len(ens)
    for m in range(n):
        for mp in range(m + 1, n):
            comm = ens.states[m] @ ens.states[mp] - ens.states[mp] @ ens.states[m]
            defect = float(np.max(np.abs(comm)))
            if defect > COMMUTATOR_TOL:
                raise UnsupportedEnsembleError(
                    f"states {m} and {mp} do not commute (||[.,.]||_max = {defect:.3e}); "
                    "use brute_force_binary_bound for two-state ensembles"
                )
    # eigenvectors of a generic combination diagonalize every member
    rng = np.random.default_rng(20210114)
    for _ in range(8):
        coeffs = rng.uniform(1.0, 2.0, n)
        combo = sum(c * s for c, s in zip(coeffs, ens.states))
        _, v = np.linalg.eigh(combo)
        if all(
            np.max(np.abs(v.conj().T @ s @ v - np.diag(np.diag(v.conj().T @ s @ v)))) < 1e-8
            for s in ens.states
        ):
            return v
    raise UnsupportedEnsembleError("failed to find a common eigenbasis")


def symmetric_measurement(ens: StateEnsemble) -> MeasurementSet:
    """Maximum-likelihood projective measurement in the common eigenbasis of
    a commuting equal-prior ensemble (optimal: the problem is classical in
    that basis)."""
    if np.max(np.abs(ens.priors - ens.priors[0])) > PRIOR_SUM_TOL:
        raise UnsupportedEnsembleError("exact solver requires equal priors")
    v = _common_eigenbasis(ens)
    weighted = np.array(
        [ens.priors[m] * np.diag(v.conj().T @ ens.states[m] @ v).real for m in range(len(ens))]
    )
    assignment = np.argmax(weighted, axis=0)
    ops = []
    for m in range(len(ens)):
        cols = v[:, assignment == m]
        ops.append(cols @ cols.conj().T)
    return MeasurementSet(operators=tuple(ops))


def symmetric_bound(ens: StateEnsemble) -> float:
    """Optimal success probability of a commuting equal-prior ensemble."""
    meas = symmetric_measurement(ens)
    return float(
        sum(
            prior * np.trace(op @ state).real
            for prior, op, state in zip(ens.priors, meas.operators, ens.states)
        )
    )


def brute_force_binary_bound(rho1, rho2, p1: float, grid: int = 512) -> float:
    """Grid search over orthonormal qubit measurement bases; lower-bounds the
    Helstrom value and converges to it as the grid refines."""
    rho1 = np.asarray(rho1, dtype=complex)
    rho2 = np.asarray(rho2, dtype=complex)
    if rho1.shape != (2, 2) or rho2.shape != (2, 2):
        raise EnsembleError("brute-force oracle only covers dimension 2")
    p2 = 1.0 - p1
    theta = np.linspace(0.0, np.pi, grid)
    phi = np.linspace(0.0, 2.0 * np.pi, grid, endpoint=False)
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    c = np.cos(tt / 2).ravel()
    s = (np.exp(1j * pp) * np.sin(tt / 2)).ravel()
    v = np.stack([c, s], axis=1)  # measurement vector for hypothesis 1
    w = np.stack([-s.conj(), c], axis=1)  # orthogonal complement
    succ1 = np.einsum("ki,ij,kj->k", v.conj(), rho1, v).real
    succ2 = np.einsum("ki,ij,kj->k", w.conj(), rho2, w).real
    return float(np.max(p1 * succ1 + p2 * succ2))


def ensemble_bound(ens: StateEnsemble) -> tuple[float, str]:
    """Best exact bound available for the ensemble, with the solver name."""
    if len(ens) == 2:
        return helstrom_binary(ens.states[0], ens.states[1], float(ens.priors[0])), "helstrom-trace-norm"
    return symmetric_bound(ens), "common-eigenbasis-ml"


def ensemble_to_json(ens: StateEnsemble) -> dict:
    def encode(m: np.ndarray):
        return [[[float(x.real), float(x.imag)] for x in row] for row in m]

    return {"states": [encode(s) for s in ens.states], "priors": [float(p) for p in ens.priors]}


def ensemble_from_json(doc: dict) -> StateEnsemble:
    try:
        states = tuple(
            np.array([[complex(re, im) for re, im in row] for row in mat]) for mat in doc["states"]
        )
        priors = np.array([float(p) for p in doc["priors"]])
    except (KeyError, TypeError, ValueError) as exc:
        raise EnsembleError(f"malformed ensemble document: {exc}") from exc
    return StateEnsemble(states=states, priors=priors)


BUILTIN_ENSEMBLES = {
    "paper-binary": binary_pair_paper,
    "paper-4ary": lambda: symmetric_ensemble(4, 0.7, 4),
}


def resolve_ensemble(spec) -> StateEnsemble:
    """Accept a built-in name or an inline JSON document."""
    if isinstance(spec, str):
        try:
            return BUILTIN_ENSEMBLES[spec]()
        except KeyError:
            raise EnsembleError(
                f"unknown ensemble {spec!r}; built-ins: {sorted(BUILTIN_ENSEMBLES)}"
            ) from None
    if isinstance(spec, dict):
        return ensemble_from_json(spec)
    raise EnsembleError(f"ensemble must be a name or document, got {type(spec).__name__}")
