"""Parameterization schemes mapping an unconstrained vector theta onto a
valid (H, T) pair respecting the topology mask.

Four schemes:
  a -- non-negative symmetric Hamiltonian weights, T = H D_H^{-1}
  b -- binary 0/1 Hamiltonian weights, T = H D_H^{-1}
  c -- directed hop rates in [0, 1] held un-normalized in T; H built from
       them as H_ij = -max(T_ij, T_ji), diagonal closing the column sums
  d -- H and T independently optimized (signed H weights; T columns
       normalized over the masked support by squared weights)

Parameters live on the non-sink edges of the mask. Undirected edges are
enumerated row-major with i < j; each undirected edge (i, j) contributes the
directed pair (i, j), (j, i) in that order.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.special

from .topology import NetworkTopology


class Scheme(Enum):
    A = "a"
    B = "b"
    C = "c"
    D = "d"


class ParameterError(ValueError):
    """theta does not match the scheme's expectations."""


# columns whose squared weight mass falls below this map to the zero column
ZERO_COLUMN_GUARD = 1e-30

STOCHASTIC_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class WalkParameters:
    """Materialized Hamiltonian and hop matrix plus the mixing parameters of
    the master equation."""

    H: np.ndarray  # real symmetric, supported on the mask
    T: np.ndarray  # non-negative, supported on the mask
    p: float
    gamma_s: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ParameterError(f"p={self.p} outside [0, 1]")
        if self.gamma_s < 0:
            raise ParameterError(f"gamma_s={self.gamma_s} must be >= 0")


def directed_edges(topo: NetworkTopology) -> list[tuple[int, int]]:
    out = []
    for i, j in topo.edges:
        out.append((i, j))
        out.append((j, i))
    return out


def param_count(scheme: Scheme, topo: NetworkTopology) -> int:
    e = topo.n_edges
    if scheme in (Scheme.A, Scheme.B):
        return e
    if scheme == Scheme.C:
        return 2 * e
    return e + 2 * e  # Scheme.D


def _symmetric_from_weights(topo: NetworkTopology, w: np.ndarray) -> np.ndarray:
    h = np.zeros((topo.n_nodes, topo.n_nodes))
    for (i, j), wij in zip(topo.edges, w):
        h[i, j] = h[j, i] = wij
    return h


def _column_normalized(h: np.ndarray) -> np.ndarray:
    deg = h.sum(axis=0)
    t = np.zeros_like(h)
    nz = deg > 0
    t[:, nz] = h[:, nz] / deg[nz]
    return t


def materialize(
    scheme: Scheme,
    topo: NetworkTopology,
    theta,
    p: float = 0.0,
    gamma_s: float = 1.0,
) -> WalkParameters:
    """Build (H, T) from the flat parameter vector theta."""
    theta = np.asarray(theta, dtype=float)
    n = param_count(scheme, topo)
    if theta.shape != (n,):
        raise ParameterError(
            f"scheme {scheme.value!r} on this topology needs {n} parameters, got shape {theta.shape}"
        )
    e = topo.n_edges
    d = topo.n_nodes

    if scheme == Scheme.A:
        h = _symmetric_from_weights(topo, theta**2)
        t = _column_normalized(h)
    elif scheme == Scheme.B:
        if not np.all((theta == 0.0) | (theta == 1.0)):
            raise ParameterError("scheme 'b' parameters must be exactly 0 or 1")
        h = _symmetric_from_weights(topo, theta)
        t = _column_normalized(h)
    elif scheme == Scheme.C:
        rates = scipy.special.expit(theta)  # logistic squash into (0, 1)
        t = np.zeros((d, d))
        for (i, j), r in zip(directed_edges(topo), rates):
            t[i, j] = r
        h = np.zeros((d, d))
        for i, j in topo.edges:
            h[i, j] = h[j, i] = -max(t[i, j], t[j, i])
        np.fill_diagonal(h, -h.sum(axis=0))
    else:  # Scheme.D
        h = _symmetric_from_weights(topo, theta[:e])
        sq = np.zeros((d, d))
        for (i, j), w in zip(directed_edges(topo), theta[e:]):
            sq[i, j] = w * w
        t = np.zeros((d, d))
        mass = sq.sum(axis=0)
        nz = mass > ZERO_COLUMN_GUARD
        t[:, nz] = sq[:, nz] / mass[nz]

    return WalkParameters(H=h, T=t, p=p, gamma_s=gamma_s)
