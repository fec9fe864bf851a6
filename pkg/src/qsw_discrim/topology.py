"""Layered M-N-O networks with sinker/sink structure.

Node ordering convention: input nodes first (0 .. M-1), intermediate nodes
next (M .. M+N-1), sink nodes last (M+N .. M+N+O-1). Sink k is fed by sinker
M+k (the k-th intermediate node). Sinks carry no adjacency: they receive
population only through the irreversible transfer term of the dynamics.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class ConfigurationError(ValueError):
    """Invalid network configuration."""


@dataclass(frozen=True, eq=False)
class NetworkTopology:
    n_input: int
    n_intermediate: int
    n_output: int
    adjacency: np.ndarray  # (d, d) symmetric 0/1, zero sink rows/columns
    sink_map: tuple[tuple[int, int], ...]  # (sinker, sink) pairs
    reduced_input: bool = False
    reduced_intermediate: bool = False

    def __post_init__(self):
        a = np.asarray(self.adjacency)
        d = self.n_nodes
        if a.shape != (d, d):
            raise ConfigurationError(f"adjacency shape {a.shape} != ({d}, {d})")
        if not np.array_equal(a, a.T):
            raise ConfigurationError("adjacency must be symmetric")
        if np.any(np.diag(a) != 0):
            raise ConfigurationError("adjacency diagonal must be zero")
        if not np.all((a == 0) | (a == 1)):
            raise ConfigurationError("adjacency entries must be 0 or 1")
        for sink in self.sink_nodes:
            if a[sink].any():
                raise ConfigurationError(f"sink node {sink} has nonzero adjacency degree")
        if len(self.sink_map) != self.n_output:
            raise ConfigurationError("sink_map must have one entry per output node")
        sinkers = [s for s, _ in self.sink_map]
        sinks = [n for _, n in self.sink_map]
        if len(set(sinkers)) != len(sinkers) or len(set(sinks)) != len(sinks):
            raise ConfigurationError("sink_map must be injective on both sides")
        for s, n in self.sink_map:
            if not (self.n_input <= s < self.n_input + self.n_intermediate):
                raise ConfigurationError(f"sinker {s} is not an intermediate node")
            if n not in self.sink_nodes:
                raise ConfigurationError(f"sink {n} is not an output node")

    @property
    def n_nodes(self) -> int:
        return self.n_input + self.n_intermediate + self.n_output

    @property
    def input_nodes(self) -> range:
        return range(self.n_input)

    @property
    def intermediate_nodes(self) -> range:
        return range(self.n_input, self.n_input + self.n_intermediate)

    @property
    def sink_nodes(self) -> range:
        return range(self.n_input + self.n_intermediate, self.n_nodes)

    @property
    def edges(self) -> list[tuple[int, int]]:
        """Undirected masked edges (i < j), row-major order."""
        i, j = np.nonzero(np.triu(self.adjacency))
        return list(zip(i.tolist(), j.tolist()))

    @property
    def n_edges(self) -> int:
        return len(self.edges)


def build_layered(
    M: int,
    N: int,
    O: int,
    reduced_input: bool = False,
    reduced_intermediate: bool = False,
) -> NetworkTopology:
    """Fully-connected layered network: intra-layer cliques on the input and
    intermediate layers (dropped for layers flagged reduced), complete
    input-intermediate bipartite coupling, and one sink per intermediate node
    k for k < O.
    """
    if M < 1 or N < 1 or O < 1:
        raise ConfigurationError("layer sizes must be >= 1")
    if O > N:
        raise ConfigurationError(f"O={O} sinks need O distinct sinkers but N={N}")
    d = M + N + O
    a = np.zeros((d, d), dtype=int)
    inputs = range(M)
    inters = range(M, M + N)
    if not reduced_input:
        for i in inputs:
            for j in inputs:
                if i < j:
                    a[i, j] = a[j, i] = 1
    for i in inputs:
        for j in inters:
            a[i, j] = a[j, i] = 1
    if not reduced_intermediate:
        for i in inters:
            for j in inters:
                if i < j:
                    a[i, j] = a[j, i] = 1
    sink_map = tuple((M + k, M + N + k) for k in range(O))
    return NetworkTopology(M, N, O, a, sink_map, reduced_input, reduced_intermediate)


def degree_matrix(a) -> np.ndarray:
    """Diagonal matrix of column sums of a non-negative matrix."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ConfigurationError(f"expected square matrix, got shape {a.shape}")
    if np.any(a < 0):
        raise ConfigurationError("adjacency entries must be non-negative")
    return np.diag(a.sum(axis=0))


def transition_from_adjacency(a) -> np.ndarray:
    """Column-normalized hop matrix; zero-degree columns stay zero (sinks
    are absorbing and never emit)."""
    a = np.asarray(a, dtype=float)
    deg = np.diag(degree_matrix(a))
    t = np.zeros_like(a)
    nz = deg > 0
    t[:, nz] = a[:, nz] / deg[nz]
    return t


def topology_to_json(topo: NetworkTopology) -> dict:
    return {
        "M": topo.n_input,
        "N": topo.n_intermediate,
        "O": topo.n_output,
        "reduced_input": topo.reduced_input,
        "reduced_intermediate": topo.reduced_intermediate,
    }


def topology_from_json(doc: dict) -> NetworkTopology:
    try:
        return build_layered(
            int(doc["M"]),
            int(doc["N"]),
            int(doc["O"]),
            bool(doc.get("reduced_input", False)),
            bool(doc.get("reduced_intermediate", False)),
        )
    except KeyError as exc:
        raise ConfigurationError(f"topology document missing key {exc}") from exc
