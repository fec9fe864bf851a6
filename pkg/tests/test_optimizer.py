import math

import numpy as np
import pytest

from qsw_discrim.discrimination import StateEnsemble, binary_pair_paper, ensemble_bound
from qsw_discrim.optimizer import (
    OptimizeOptions,
    maximize_binary,
    maximize_continuous,
    make_objective,
    sweep,
)
from qsw_discrim.schemes import Scheme, param_count
from qsw_discrim.topology import NetworkTopology, build_layered

TOPO_222 = build_layered(2, 2, 2)
BINARY = binary_pair_paper()

FAST = OptimizeOptions(n_restarts=2, max_iters=200, seed=11, p_grid=(0.5,), tau_grid=(100.0,))


def single_state_ensemble():
    return StateEnsemble(states=(np.array([[1.0 + 0j]]),), priors=np.array([1.0]))


class TestOptions:
    def test_defaults_match_contract(self):
        opts = OptimizeOptions()
        assert opts.n_restarts == 16
        assert opts.max_iters == 2000
        assert opts.ftol == 1e-7
        assert opts.p_grid == tuple(round(0.1 * k, 1) for k in range(11))
        assert opts.tau_grid == (1.0, 3.0, 10.0, 30.0, 100.0)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"n_restarts": 0},
            {"ftol": 0.0},
            {"p_grid": ()},
            {"p_grid": (0.5, 0.2)},
            {"p_grid": (0.0, 1.5)},
            {"tau_grid": ()},
        ],
    )
    def test_invalid_options_rejected(self, kwargs):
        with pytest.raises(ValueError):
            OptimizeOptions(**kwargs)


class TestMaximizeContinuous:
    def test_degenerate_budget_evaluates_initial_point(self):
        opts = OptimizeOptions(n_restarts=1, max_iters=0, seed=3)
        rec = maximize_continuous(Scheme.A, TOPO_222, BINARY, 0.5, 10.0, opts)
        assert rec.evaluations == 1
        assert rec.restarts_used == 1
        objective = make_objective(Scheme.A, TOPO_222, BINARY, 0.5, 10.0)
        x0 = np.random.default_rng(3).uniform(-1, 1, 6)
        assert rec.pc == objective(x0)
        assert np.array_equal(rec.theta, x0)

    def test_single_state_reaches_full_absorption(self):
        topo = build_layered(1, 1, 1)
        opts = OptimizeOptions(n_restarts=2, max_iters=300, seed=5, p_grid=(0.5,), tau_grid=(100.0,))
        for scheme in (Scheme.A, Scheme.C, Scheme.D):
            rec = maximize_continuous(scheme, topo, single_state_ensemble(), 0.5, 100.0, opts)
            assert rec.pc >= 0.99

    def test_deterministic_given_seed(self):
        rec1 = maximize_continuous(Scheme.C, TOPO_222, BINARY, 0.3, 10.0, FAST)
        rec2 = maximize_continuous(Scheme.C, TOPO_222, BINARY, 0.3, 10.0, FAST)
        assert rec1.pc == rec2.pc
        assert np.array_equal(rec1.theta, rec2.theta)
        assert rec1.evaluations == rec2.evaluations

    def test_more_restarts_never_hurt(self):
        small = OptimizeOptions(n_restarts=1, max_iters=150, seed=2)
        large = OptimizeOptions(n_restarts=4, max_iters=150, seed=2)
        pc1 = maximize_continuous(Scheme.A, TOPO_222, BINARY, 0.5, 10.0, small).pc
        pc4 = maximize_continuous(Scheme.A, TOPO_222, BINARY, 0.5, 10.0, large).pc
        assert pc4 >= pc1

    def test_rejects_scheme_b(self):
        with pytest.raises(Exception, match="maximize_binary"):
            maximize_continuous(Scheme.B, TOPO_222, BINARY, 0.5, 10.0, FAST)

    def test_bound_dominance(self):
        bound, _ = ensemble_bound(BINARY)
        rec = maximize_continuous(Scheme.D, TOPO_222, BINARY, 0.2, 50.0, FAST)
        assert rec.pc <= bound + 1e-6


class TestMaximizeBinary:
    def test_exhaustive_on_small_network(self):
        rec = maximize_binary(TOPO_222, BINARY, 0.5, 100.0, FAST)
        assert rec.evaluations == 64
        assert rec.scheme == Scheme.B

    def test_hill_climb_beats_all_ones(self):
        # force the hill-climbing path on the small model
        forced = maximize_binary(TOPO_222, BINARY, 0.5, 100.0, FAST, exhaustive_limit=0)
        objective = make_objective(Scheme.B, TOPO_222, BINARY, 0.5, 100.0)
        assert forced.pc >= objective(np.ones(6))

    def test_hill_climb_matches_exhaustive_here(self):
        opts = OptimizeOptions(n_restarts=16, max_iters=1, seed=4)
        exhaustive = maximize_binary(TOPO_222, BINARY, 0.5, 100.0, opts)
        climbed = maximize_binary(TOPO_222, BINARY, 0.5, 100.0, opts, exhaustive_limit=0)
        assert climbed.pc == exhaustive.pc

    def test_empty_edge_set(self):
        a = np.zeros((3, 3), dtype=int)
        topo = NetworkTopology(1, 1, 1, a, ((1, 2),))
        rec = maximize_binary(topo, single_state_ensemble(), 0.5, 10.0, FAST)
        assert rec.pc == 0.0
        assert rec.evaluations == 1


class TestSweep:
    def test_grid_cardinality_and_order(self):
        opts = OptimizeOptions(n_restarts=1, max_iters=20, seed=1, p_grid=(0.0, 1.0), tau_grid=(10.0,))
        records = sweep([Scheme.A], TOPO_222, BINARY, opts)
        assert len(records) == 2
        assert [(r.scheme, r.p, r.tau) for r in records] == [
            (Scheme.A, 0.0, 10.0),
            (Scheme.A, 1.0, 10.0),
        ]

    def test_pc_non_decreasing_in_tau(self):
        opts = OptimizeOptions(n_restarts=4, max_iters=400, seed=8, p_grid=(0.5,), tau_grid=(1.0, 10.0, 100.0))
        records = sweep([Scheme.A], TOPO_222, BINARY, opts)
        pcs = [r.pc for r in records]
        assert pcs[1] >= pcs[0] - 1e-3
        assert pcs[2] >= pcs[1] - 1e-3

    def test_failures_become_nan_rows(self):
        # three hypotheses but only two sinks: every evaluation fails
        bad = StateEnsemble(
            states=(np.eye(2) / 2, np.diag([1.0, 0.0]).astype(complex), np.diag([0.0, 1.0]).astype(complex)),
            priors=np.array([1 / 3, 1 / 3, 1 / 3]),
        )
        opts = OptimizeOptions(n_restarts=1, max_iters=10, seed=1, p_grid=(0.5,), tau_grid=(1.0,))
        records = sweep([Scheme.A], TOPO_222, bad, opts)
        assert len(records) == 1
        assert math.isnan(records[0].pc)
        assert records[0].note

    def test_parallel_jobs_match_serial(self):
        opts = OptimizeOptions(n_restarts=1, max_iters=50, seed=9, p_grid=(0.0, 0.5), tau_grid=(5.0,))
        serial = sweep([Scheme.A, Scheme.B], TOPO_222, BINARY, opts, jobs=1)
        parallel = sweep([Scheme.A, Scheme.B], TOPO_222, BINARY, opts, jobs=2)
        assert [(r.scheme, r.p, r.tau, r.pc) for r in serial] == [
            (r.scheme, r.p, r.tau, r.pc) for r in parallel
        ]
