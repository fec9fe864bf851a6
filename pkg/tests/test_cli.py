import csv
import json
import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np
import pytest

from qsw_discrim.cli import main
from qsw_discrim.discrimination import binary_pair_paper, ensemble_to_json, prob_correct
from qsw_discrim.schemes import Scheme

BASE_CONFIG = {
    "topology": {"M": 2, "N": 2, "O": 2},
    "ensemble": "paper-binary",
    "schemes": ["a", "b"],
    "p_grid": [0.0, 0.5, 1.0],
    "tau_grid": [10.0],
    "optimizer": {"n_restarts": 1, "max_iters": 40, "seed": 13},
}


def write_config(tmp_path, doc=None, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc if doc is not None else BASE_CONFIG))
    return path


class TestBounds:
    def test_paper_binary(self, tmp_path, capsys):
        cfg = write_config(tmp_path)
        assert main(["bounds", "--config", str(cfg), "--out-dir", str(tmp_path)]) == 0
        out = capsys.readouterr().out
        assert "0.782365357023" in out
        rows = list(csv.reader((tmp_path / "bounds.csv").open()))
        assert rows[0] == ["ensemble", "solver", "bound"]
        assert rows[1][0] == "paper-binary"
        assert float(rows[1][2]) == pytest.approx(0.78236535702278598, abs=1e-12)

    def test_paper_4ary(self, tmp_path, capsys):
        doc = dict(BASE_CONFIG, ensemble="paper-4ary", topology={"M": 4, "N": 4, "O": 4, "reduced_input": True})
        cfg = write_config(tmp_path, doc)
        assert main(["bounds", "--config", str(cfg), "--out-dir", str(tmp_path)]) == 0
        assert "0.775" in capsys.readouterr().out

    def test_inline_orthogonal_pair(self, tmp_path, capsys):
        inline = {
            "states": [
                [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]],
                [[[0.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]],
            ],
            "priors": [0.5, 0.5],
        }
        cfg = write_config(tmp_path, dict(BASE_CONFIG, ensemble=inline))
        assert main(["bounds", "--config", str(cfg), "--out-dir", str(tmp_path)]) == 0
        assert "optimal P_c = 1" in capsys.readouterr().out

    def test_unsupported_ensemble_exits_2(self, tmp_path, capsys):
        # three pairwise non-commuting states: no exact solver applies
        states = [
            np.diag([1.0, 0.0]).astype(complex),
            np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex),
            np.array([[0.5, -0.5j], [0.5j, 0.5]], dtype=complex),
        ]
        inline = ensemble_to_json(
            __import__("qsw_discrim.discrimination", fromlist=["StateEnsemble"]).StateEnsemble(
                states=tuple(states), priors=np.array([1 / 3, 1 / 3, 1 / 3])
            )
        )
        doc = dict(BASE_CONFIG, ensemble=inline, topology={"M": 2, "N": 3, "O": 3})
        cfg = write_config(tmp_path, doc)
        assert main(["bounds", "--config", str(cfg), "--out-dir", str(tmp_path)]) == 2
        assert "supported solvers" in capsys.readouterr().err


class TestConfigErrors:
    def test_missing_file(self, tmp_path, capsys):
        assert main(["bounds", "--config", str(tmp_path / "none.json")]) == 2

    def test_invalid_json(self, tmp_path, capsys):
        cfg = tmp_path / "bad.json"
        cfg.write_text("{not json")
        assert main(["bounds", "--config", str(cfg)]) == 2

    def test_missing_topology(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"ensemble": "paper-binary"})
        assert main(["bounds", "--config", str(cfg)]) == 2
        assert "topology" in capsys.readouterr().err

    def test_bad_scheme_name(self, tmp_path, capsys):
        cfg = write_config(tmp_path, dict(BASE_CONFIG, schemes=["z"]))
        assert main(["bounds", "--config", str(cfg)]) == 2


class TestSweep:
    def test_emits_csv_and_svg(self, tmp_path):
        cfg = write_config(tmp_path)
        assert main(["sweep", "--config", str(cfg), "--out-dir", str(tmp_path)]) == 0
        rows = list(csv.reader((tmp_path / "sweep.csv").open()))
        assert rows[0] == ["scheme", "p", "tau", "pc", "evaluations", "restarts_used", "seed"]
        assert len(rows) == 1 + 2 * 3  # 2 schemes x 3 p-values x 1 tau
        schemes = [r[0] for r in rows[1:]]
        assert schemes == ["a", "a", "a", "b", "b", "b"]
        for row in rows[1:]:
            assert 0.0 <= float(row[3]) <= 1.0

    def test_svg_well_formed_with_bound_line(self, tmp_path):
        cfg = write_config(tmp_path)
        main(["sweep", "--config", str(cfg), "--out-dir", str(tmp_path)])
        svg = (tmp_path / "sweep.svg").read_text()
        ET.fromstring(svg)  # well-formed XML
        assert "stroke-dasharray" in svg  # dashed bound line
        assert "scheme (a)" in svg and "scheme (b)" in svg

    def test_rerun_is_byte_identical(self, tmp_path):
        cfg = write_config(tmp_path)
        main(["sweep", "--config", str(cfg), "--out-dir", str(tmp_path / "run1")])
        main(["sweep", "--config", str(cfg), "--out-dir", str(tmp_path / "run2")])
        assert (tmp_path / "run1/sweep.csv").read_bytes() == (tmp_path / "run2/sweep.csv").read_bytes()
        assert (tmp_path / "run1/sweep.svg").read_bytes() == (tmp_path / "run2/sweep.svg").read_bytes()

    def test_seed_flag_changes_output(self, tmp_path):
        cfg = write_config(tmp_path)
        main(["sweep", "--config", str(cfg), "--out-dir", str(tmp_path / "s1"), "--seed", "1"])
        main(["sweep", "--config", str(cfg), "--out-dir", str(tmp_path / "s2"), "--seed", "2"])
        c1 = (tmp_path / "s1/sweep.csv").read_text()
        c2 = (tmp_path / "s2/sweep.csv").read_text()
        assert c1 != c2

    def test_total_failure_exits_3(self, tmp_path):
        # 4 hypotheses on a 2-sink network: every grid point fails
        doc = dict(BASE_CONFIG, ensemble="paper-4ary")
        doc["topology"] = {"M": 4, "N": 2, "O": 2}
        cfg = write_config(tmp_path, doc)
        assert main(["sweep", "--config", str(cfg), "--out-dir", str(tmp_path)]) == 3
        rows = list(csv.reader((tmp_path / "sweep.csv").open()))
        assert all(row[3] == "nan" for row in rows[1:])


class TestSimulate:
    def write_theta(self, tmp_path, theta):
        path = tmp_path / "theta.json"
        path.write_text(json.dumps(list(theta)))
        return path

    def test_matches_library_prob_correct(self, tmp_path, capsys):
        cfg = write_config(tmp_path)
        theta = self.write_theta(tmp_path, np.ones(6))
        rc = main(
            [
                "simulate",
                "--config",
                str(cfg),
                "--out-dir",
                str(tmp_path),
                "--scheme",
                "b",
                "--theta",
                str(theta),
                "--p",
                "0.5",
                "--tau",
                "100",
            ]
        )
        assert rc == 0
        report = json.loads(capsys.readouterr().out)
        from qsw_discrim.topology import build_layered

        expected = prob_correct(
            Scheme.B, np.ones(6), build_layered(2, 2, 2), binary_pair_paper(), 0.5, 100.0
        )
        assert report["pc"] == expected
        assert report["trace_residual"] <= 1e-8
        assert json.loads((tmp_path / "simulate.json").read_text()) == report

    def test_tau_zero(self, tmp_path, capsys):
        cfg = write_config(tmp_path)
        theta = self.write_theta(tmp_path, np.ones(6))
        main(
            ["simulate", "--config", str(cfg), "--out-dir", str(tmp_path), "--scheme", "b",
             "--theta", str(theta), "--p", "0.5", "--tau", "0"]
        )
        report = json.loads(capsys.readouterr().out)
        assert report["pc"] == 0.0
        for hyp in report["hypotheses"]:
            assert hyp["residual"] == pytest.approx(1.0)

    def test_wrong_theta_length_exits_2(self, tmp_path, capsys):
        cfg = write_config(tmp_path)
        theta = self.write_theta(tmp_path, np.ones(4))
        rc = main(
            ["simulate", "--config", str(cfg), "--out-dir", str(tmp_path), "--scheme", "b",
             "--theta", str(theta), "--p", "0.5", "--tau", "1"]
        )
        assert rc == 2
        assert "needs 6 parameters" in capsys.readouterr().err
