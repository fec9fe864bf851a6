"""Derivative-free maximization of the detection probability and the
(scheme, p, tau) sweep driver.

Continuous schemes use multi-start Nelder-Mead on the unconstrained
parameter vector; the binary scheme enumerates all bit-vectors when the
edge count allows it and falls back to steepest-ascent bit flipping
otherwise. Everything is deterministic given the seed: restart r draws its
start from a generator seeded with seed + r.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.optimize

from .discrimination import StateEnsemble, embed_on_inputs
from .dynamics import build_liouvillian, propagator, vec
from .schemes import Scheme, materialize, param_count
from .topology import NetworkTopology

log = logging.getLogger(__name__)

DEFAULT_P_GRID = tuple(round(0.1 * k, 1) for k in range(11))
DEFAULT_TAU_GRID = (1.0, 3.0, 10.0, 30.0, 100.0)

EXHAUSTIVE_EDGE_LIMIT = 20


class OptimizationError(RuntimeError):
    pass


@dataclass(frozen=True)
class OptimizeOptions:
    n_restarts: int = 16
    max_iters: int = 2000
    ftol: float = 1e-7
    seed: int = 0
    p_grid: tuple[float, ...] = DEFAULT_P_GRID
    tau_grid: tuple[float, ...] = DEFAULT_TAU_GRID

    def __post_init__(self):
        if self.n_restarts < 1:
            raise ValueError("n_restarts must be >= 1")
        if self.max_iters < 0:
            raise ValueError("max_iters must be >= 0")
        if self.ftol <= 0:
            raise ValueError("ftol must be > 0")
        for name, grid in (("p_grid", self.p_grid), ("tau_grid", self.tau_grid)):
            if len(grid) == 0:
                raise ValueError(f"{name} must be non-empty")
            if list(grid) != sorted(grid):
                raise ValueError(f"{name} must be sorted ascending")
        if min(self.p_grid) < 0 or max(self.p_grid) > 1:
            raise ValueError("p_grid values must lie in [0, 1]")


@dataclass(frozen=True)
class SweepRecord:
    scheme: Scheme
    p: float
    tau: float
    pc: float
    theta: np.ndarray
    restarts_used: int
    evaluations: int
    seed: int
    note: str | None = None


def make_objective(
    scheme: Scheme,
    topo: NetworkTopology,
    ens: StateEnsemble,
    p: float,
    tau: float,
    gamma_s: float = 1.0,
):
    """Fast theta -> detection probability map with hypothesis states and
    sink indices precomputed. One matrix exponential serves the whole
    ensemble."""
    d = topo.n_nodes
    init_vecs = [vec(embed_on_inputs(state, topo)) for state in ens.states]
    sink_vec_idx = [n * (d + 1) for _, n in topo.sink_map]
    priors = np.asarray(ens.priors)

    def objective(theta) -> float:
        wp = materialize(scheme, topo, theta, p=p, gamma_s=gamma_s)
        liou = build_liouvillian(wp, topo)
        u = propagator(liou, tau)
        pc = 0.0
        for n, (prior, v0) in enumerate(zip(priors, init_vecs)):
            pc += prior * (u[sink_vec_idx[n]] @ v0).real
        return float(min(max(pc, 0.0), 1.0))

    return objective


def _counted(fn):
    count = {"n": 0}

    def wrapped(x):
        count["n"] += 1
        return fn(x)

    return wrapped, count


def maximize_continuous(
    scheme: Scheme,
    topo: NetworkTopology,
    ens: StateEnsemble,
    p: float,
    tau: float,
    opts: OptimizeOptions,
    gamma_s: float = 1.0,
    extra_starts: tuple = (),
) -> SweepRecord:
    """Multi-start Nelder-Mead over the continuous schemes a, c, d.

    extra_starts are deterministic additional start vectors (e.g. the best
    point of a neighbouring grid cell) appended to the seeded random ones.
    """
    if scheme == Scheme.B:
        raise OptimizationError("scheme 'b' is combinatorial; use maximize_binary")
    n = param_count(scheme, topo)
    objective, count = _counted(make_objective(scheme, topo, ens, p, tau, gamma_s))
    starts = [
        np.random.default_rng(opts.seed + r).uniform(-1.0, 1.0, n) for r in range(opts.n_restarts)
    ]
    starts.extend(np.asarray(x, dtype=float) for x in extra_starts)
    best_pc, best_theta = -1.0, None
    restarts_used = 0
    for r, x0 in enumerate(starts):
        try:
            if opts.max_iters == 0:
                x_opt, pc = x0, objective(x0)
            else:
                res = scipy.optimize.minimize(
                    lambda x: -objective(x),
                    x0,
                    method="Nelder-Mead",
                    options={"maxiter": opts.max_iters, "fatol": opts.ftol, "disp": False},
                )
                x_opt, pc = res.x, -res.fun
        except Exception:
            log.warning("restart %d failed, discarding", r, exc_info=True)
            continue
        restarts_used += 1
        if pc > best_pc:
            best_pc, best_theta = pc, np.array(x_opt)
    if best_theta is None:
        raise OptimizationError(f"all {opts.n_restarts} restarts failed")
    return SweepRecord(
        scheme=scheme,
        p=p,
        tau=tau,
        pc=best_pc,
        theta=best_theta,
        restarts_used=restarts_used,
        evaluations=count["n"],
        seed=opts.seed,
    )


def _hill_climb(objective, bits: np.ndarray):
    """Steepest-ascent single-bit flips until no flip improves."""
    bits = bits.astype(float)
    current = objective(bits)
    improved = True
    while improved and bits.size:
        improved = False
        best_k, best_val = -1, current
        for k in range(bits.size):
            bits[k] = 1.0 - bits[k]
            val = objective(bits)
            bits[k] = 1.0 - bits[k]
            if val > best_val:
                best_k, best_val = k, val
        if best_k >= 0:
            bits[best_k] = 1.0 - bits[best_k]
            current = best_val
            improved = True
    return bits, current


def maximize_binary(
    topo: NetworkTopology,
    ens: StateEnsemble,
    p: float,
    tau: float,
    opts: OptimizeOptions,
    gamma_s: float = 1.0,
    exhaustive_limit: int = EXHAUSTIVE_EDGE_LIMIT,
    extra_starts: tuple = (),
) -> SweepRecord:
    """Scheme b: exhaustive search over the 2^E edge on/off patterns when
    small enough, otherwise seeded bit-flip hill climbing (the all-ones
    pattern is always among the starts; extra_starts add further climbs)."""
    e = topo.n_edges
    objective, count = _counted(make_objective(Scheme.B, topo, ens, p, tau, gamma_s))
    best_pc, best_theta = -1.0, None
    restarts_used = 0
    if e <= exhaustive_limit:
        for code in range(2**e):
            bits = np.array([(code >> k) & 1 for k in range(e)], dtype=float)
            pc = objective(bits)
            if pc > best_pc:
                best_pc, best_theta = pc, bits
        restarts_used = 1
    else:
        starts = [np.ones(e)]
        for r in range(1, opts.n_restarts):
            starts.append(np.random.default_rng(opts.seed + r).integers(0, 2, e).astype(float))
        starts.extend(np.asarray(x, dtype=float) for x in extra_starts)
        for bits0 in starts:
            try:
                bits, pc = _hill_climb(objective, bits0.copy())
            except Exception:
                log.warning("hill-climb start failed, discarding", exc_info=True)
                continue
            restarts_used += 1
            if pc > best_pc:
                best_pc, best_theta = pc, bits
        if best_theta is None:
            raise OptimizationError("all hill-climb starts failed")
    return SweepRecord(
        scheme=Scheme.B,
        p=p,
        tau=tau,
        pc=best_pc,
        theta=best_theta,
        restarts_used=restarts_used,
        evaluations=count["n"],
        seed=opts.seed,
    )


def _sweep_cell(args) -> list[SweepRecord]:
    """All tau points of one (scheme, p) cell, ascending. The best parameter
    vector found at each tau seeds the next, larger tau: sink populations are
    pointwise non-decreasing in tau, so optimized pc inherits monotonicity."""
    scheme, topo, ens, p, opts, gamma_s = args
    records: list[SweepRecord] = []
    prev_theta = None
    for tau in opts.tau_grid:
        extra = () if prev_theta is None else (prev_theta,)
        try:
            if scheme == Scheme.B:
                rec = maximize_binary(topo, ens, p, tau, opts, gamma_s, extra_starts=extra)
            else:
                rec = maximize_continuous(scheme, topo, ens, p, tau, opts, gamma_s, extra_starts=extra)
            prev_theta = rec.theta
        except Exception as exc:
            rec = _failed_record(scheme, topo, p, tau, opts, exc)
        records.append(rec)
    return records


def sweep(
    schemes: list[Scheme],
    topo: NetworkTopology,
    ens: StateEnsemble,
    opts: OptimizeOptions,
    gamma_s: float = 1.0,
    jobs: int = 1,
) -> list[SweepRecord]:
    """One optimized record per (scheme, p, tau) grid point, ordered by
    (scheme, p, tau). (scheme, p) cells are independent; within a cell the
    tau points chain ascending (see _sweep_cell). A failing point yields a
    NaN record instead of aborting the sweep."""
    cells = [(scheme, topo, ens, p, opts, gamma_s) for scheme in schemes for p in opts.p_grid]
    records: list[SweepRecord] = []
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for cell_records in pool.map(_sweep_cell, cells):
                records.extend(cell_records)
    else:
        for cell in cells:
            records.extend(_sweep_cell(cell))
    return records


def _failed_record(scheme, topo, p, tau, opts, exc: Exception) -> SweepRecord:
    log.warning("grid point (%s, p=%s, tau=%s) failed: %s", scheme.value, p, tau, exc)
    return SweepRecord(
        scheme=scheme,
        p=p,
        tau=tau,
        pc=math.nan,
        theta=np.full(param_count(scheme, topo), math.nan),
        restarts_used=0,
        evaluations=0,
        seed=opts.seed,
        note=str(exc),
    )
