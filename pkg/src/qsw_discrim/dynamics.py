"""Master-equation dynamics on the network.

The generator combines a coherent commutator term weighted by (1 - p), a
classical hopping dissipator weighted by p, and an irreversible sinker-to-sink
transfer term that is *not* scaled by p (sinks absorb in the purely coherent
limit too). It is assembled as a dense d^2 x d^2 superoperator acting on the
column-stacked density matrix: vec(rho)[d*j + i] = rho[i, j], so that
vec(A rho B) = kron(B.T, A) vec(rho).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import (
    Tolerances,
    MatrixValidationError,
    hermiticity_defect,
    matrix_exponential,
    validate_density,
)
from .schemes import WalkParameters
from .topology import NetworkTopology

TRACE_PRESERVATION_TOL = 1e-10
HERMITICITY_DRIFT_TOL = 1e-7
PROPAGATION_TOL = Tolerances(hermiticity=1e-7, trace=1e-7, psd=1e-7)


class NumericalInstabilityError(RuntimeError):
    """Propagation produced a state violating density-matrix invariants."""


@dataclass(frozen=True, eq=False)
class Liouvillian:
    dim: int
    matrix: np.ndarray  # (dim^2, dim^2), acts on column-stacked rho


@dataclass(frozen=True)
class SinkReport:
    populations: np.ndarray  # one entry per sink, layer order
    residual: float  # population not yet absorbed


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho, dtype=complex).flatten(order="F")


def unvec(v: np.ndarray, d: int) -> np.ndarray:
    return np.asarray(v).reshape(d, d, order="F")


def sink_superoperator(topo: NetworkTopology, gamma_s: float) -> np.ndarray:
    """Irreversible transfer 2*Gamma_s * sum_n D[|n><s_n|], theta-independent."""
    d = topo.n_nodes
    gen = np.zeros((d * d, d * d), dtype=complex)
    diag = np.arange(d) * (d + 1)
    sinker = np.zeros(d)
    for s, n in topo.sink_map:
        gen[diag[n], diag[s]] += 2.0 * gamma_s
        sinker[s] = 1.0
    # anticommutator loss: -Gamma_s * (1_{i sinker} + 1_{j sinker}) on rho_ij
    loss = gamma_s * (sinker[:, None] + sinker[None, :])
    gen -= np.diag(loss.flatten(order="F"))
    return gen


def build_liouvillian(wp: WalkParameters, topo: NetworkTopology) -> Liouvillian:
    d = topo.n_nodes
    ident = np.eye(d)
    gen = np.zeros((d * d, d * d), dtype=complex)

    if wp.p < 1.0:
        gen += -(1.0 - wp.p) * 1j * (np.kron(ident, wp.H) - np.kron(wp.H.T, ident))

    if wp.p > 0.0:
        diag = np.arange(d) * (d + 1)
        gain = np.zeros((d * d, d * d))
        gain[np.ix_(diag, diag)] = wp.T
        w = wp.T.sum(axis=0)
        loss = 0.5 * (w[:, None] + w[None, :])
        gen += wp.p * (gain - np.diag(loss.flatten(order="F")))

    gen += sink_superoperator(topo, wp.gamma_s)

    trace_row = vec(np.eye(d)).conj() @ gen
    defect = float(np.max(np.abs(trace_row)))
    if defect > TRACE_PRESERVATION_TOL:
        raise NumericalInstabilityError(
            f"assembled generator is not trace preserving: defect {defect:.3e}"
        )
    return Liouvillian(dim=d, matrix=gen)


def propagator(liou: Liouvillian, tau: float) -> np.ndarray:
    """exp(L * tau), reusable across initial states."""
    if tau < 0:
        raise ValueError(f"tau must be >= 0, got {tau}")
    return matrix_exponential(liou.matrix * tau)


def propagate(rho0, liou: Liouvillian, tau: float) -> np.ndarray:
    """Evolve rho0 for time tau and re-validate the result."""
    rho0 = validate_density(rho0)
    if rho0.shape[0] != liou.dim:
        raise ValueError(f"state dim {rho0.shape[0]} != generator dim {liou.dim}")
    rho = unvec(propagator(liou, tau) @ vec(rho0), liou.dim)
    return _restore_and_validate(rho)


def _restore_and_validate(rho: np.ndarray) -> np.ndarray:
    drift = hermiticity_defect(rho)
    if drift > HERMITICITY_DRIFT_TOL:
        raise NumericalInstabilityError(f"Hermiticity drift {drift:.3e} exceeds {HERMITICITY_DRIFT_TOL:.1e}")
    rho = 0.5 * (rho + rho.conj().T)
    try:
        return validate_density(rho, PROPAGATION_TOL)
    except MatrixValidationError as exc:
        raise NumericalInstabilityError(f"propagated state invalid: {exc}") from exc


def sink_populations(rho, topo: NetworkTopology) -> SinkReport:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape[0] != topo.n_nodes:
        raise ValueError(f"state dim {rho.shape[0]} != network size {topo.n_nodes}")
    pops = np.array([rho[n, n].real for _, n in topo.sink_map])
    return SinkReport(populations=pops, residual=float(1.0 - pops.sum()))


def classical_propagate(q0, t_matrix, tau: float) -> np.ndarray:
    """Continuous-time random walk q(tau) = exp((T - I) tau) q0."""
    q0 = np.asarray(q0, dtype=float)
    t_matrix = np.asarray(t_matrix, dtype=float)
    if tau < 0:
        raise ValueError(f"tau must be >= 0, got {tau}")
    gen = t_matrix - np.eye(t_matrix.shape[0])
    return matrix_exponential(gen * tau).real @ q0


def master_equation_rhs(rho: np.ndarray, wp: WalkParameters, topo: NetworkTopology) -> np.ndarray:
    """Right-hand side of the master equation evaluated term by term on rho,
    without any superoperator vectorization. Used as a cross-check oracle for
    the Liouvillian assembly."""
    h, t, p, gamma = wp.H, wp.T, wp.p, wp.gamma_s
    out = -(1.0 - p) * 1j * (h @ rho - rho @ h)
    w = t.sum(axis=0)
    gain = np.diag(t.astype(complex) @ np.diag(rho))
    out = out + p * (gain - 0.5 * (w[:, None] + w[None, :]) * rho)
    for s, n in topo.sink_map:
        sink_term = np.zeros_like(rho)
        sink_term[n, n] = rho[s, s]
        sink_term[s, :] -= 0.5 * rho[s, :]
        sink_term[:, s] -= 0.5 * rho[:, s]
        out = out + 2.0 * gamma * sink_term
    return out


def rk4_propagate(rho0, wp: WalkParameters, topo: NetworkTopology, tau: float, step: float = 1e-3) -> np.ndarray:
    """Fixed-step 4th-order integration of the master equation. Slow; kept as
    an independent cross-validation oracle for the exponential propagator."""
    rho = np.asarray(validate_density(rho0), dtype=complex)
    remaining = float(tau)
    while remaining > 0:
        h = min(step, remaining)
        k1 = master_equation_rhs(rho, wp, topo)
        k2 = master_equation_rhs(rho + 0.5 * h * k1, wp, topo)
        k3 = master_equation_rhs(rho + 0.5 * h * k2, wp, topo)
        k4 = master_equation_rhs(rho + h * k3, wp, topo)
        rho = rho + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        remaining -= h
    return _restore_and_validate(rho)
