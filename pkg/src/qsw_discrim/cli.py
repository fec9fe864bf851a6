"""Command-line entry point.

Subcommands:
  bounds    -- evaluate the theoretical optimum for the configured ensemble
  sweep     -- optimize every (scheme, p, tau) grid point; emit CSV + SVG
  simulate  -- propagate a fixed parameter vector and report sink statistics

Exit codes: 0 success, 2 configuration error, 3 total sweep failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from pathlib import Path

import numpy as np

from .discrimination import (
    EnsembleError,
    StateEnsemble,
    UnsupportedEnsembleError,
    ensemble_bound,
    prob_correct,
    resolve_ensemble,
)
from .dynamics import build_liouvillian, propagate, sink_populations
from .discrimination import embed_on_inputs
from .optimizer import OptimizeOptions, sweep
from .report import render_sweep_figure, write_bounds_csv, write_sweep_csv
from .schemes import ParameterError, Scheme, materialize, param_count
from .topology import ConfigurationError, NetworkTopology, topology_from_json

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SWEEP_FAILED = 3


class ConfigError(ValueError):
    pass


@dataclasses.dataclass
class RunConfig:
    topology: NetworkTopology
    ensemble: StateEnsemble
    ensemble_name: str
    schemes: list[Scheme]
    opts: OptimizeOptions
    gamma_s: float
    csv_name: str = "sweep.csv"
    figure_name: str = "sweep.svg"
    bounds_csv_name: str = "bounds.csv"


def load_config(path) -> RunConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if "topology" not in doc:
        raise ConfigError("config missing 'topology' section")
    if "ensemble" not in doc:
        raise ConfigError("config missing 'ensemble' section")
    try:
        topo = topology_from_json(doc["topology"])
        ens = resolve_ensemble(doc["ensemble"])
        scheme_names = doc.get("schemes", ["a", "b", "c", "d"])
        schemes = [Scheme(s) for s in scheme_names]
        opt_doc = doc.get("optimizer", {})
        opts = OptimizeOptions(
            n_restarts=int(opt_doc.get("n_restarts", 16)),
            max_iters=int(opt_doc.get("max_iters", 2000)),
            ftol=float(opt_doc.get("ftol", 1e-7)),
            seed=int(opt_doc.get("seed", 0)),
            p_grid=tuple(doc.get("p_grid", OptimizeOptions().p_grid)),
            tau_grid=tuple(doc.get("tau_grid", OptimizeOptions().tau_grid)),
        )
        gamma_s = float(doc.get("gamma_s", 1.0))
        out_doc = doc.get("output", {})
        return RunConfig(
            topology=topo,
            ensemble=ens,
            ensemble_name=doc["ensemble"] if isinstance(doc["ensemble"], str) else "inline",
            schemes=schemes,
            opts=opts,
            gamma_s=gamma_s,
            csv_name=out_doc.get("csv", "sweep.csv"),
            figure_name=out_doc.get("figure", "sweep.svg"),
            bounds_csv_name=out_doc.get("bounds_csv", "bounds.csv"),
        )
    except (ConfigurationError, EnsembleError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


_SOLVER_FORMULAS = {
    "helstrom-trace-norm": "0.5 * (1 + ||p1*rho1 - p2*rho2||_1)",
    "common-eigenbasis-ml": "sum_k max_m p_m <v_k|rho_m|v_k> in the common eigenbasis",
}


def cmd_bounds(cfg: RunConfig, out_dir: Path) -> int:
    try:
        bound, solver = ensemble_bound(cfg.ensemble)
    except UnsupportedEnsembleError as exc:
        print(
            f"error: {exc}\nsupported solvers: binary trace-norm Helstrom; "
            "common-eigenbasis maximum likelihood (commuting, equal priors)",
            file=sys.stderr,
        )
        return EXIT_CONFIG
    print(f"ensemble: {cfg.ensemble_name}")
    print(f"optimal P_c = {bound:.12g}")
    print(f"solver: {solver} ({_SOLVER_FORMULAS[solver]})")
    write_bounds_csv(cfg.ensemble_name, solver, bound, out_dir / cfg.bounds_csv_name)
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, out_dir: Path, jobs: int) -> int:
    records = sweep(
        cfg.schemes, cfg.topology, cfg.ensemble, cfg.opts, gamma_s=cfg.gamma_s, jobs=jobs
    )
    write_sweep_csv(records, out_dir / cfg.csv_name)
    bound, _ = ensemble_bound(cfg.ensemble)
    render_sweep_figure(records, bound, out_dir / cfg.figure_name)
    n_ok = sum(1 for r in records if not math.isnan(r.pc))
    print(f"sweep: {n_ok}/{len(records)} grid points succeeded")
    print(f"wrote {out_dir / cfg.csv_name} and {out_dir / cfg.figure_name}")
    return EXIT_OK if n_ok else EXIT_SWEEP_FAILED


def cmd_simulate(cfg: RunConfig, out_dir: Path, scheme: Scheme, theta_file, p: float, tau: float) -> int:
    try:
        theta = np.asarray(json.loads(Path(theta_file).read_text()), dtype=float)
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: cannot read theta file: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    expected = param_count(scheme, cfg.topology)
    if theta.shape != (expected,):
        print(
            f"error: scheme {scheme.value!r} needs {expected} parameters, got {theta.size}",
            file=sys.stderr,
        )
        return EXIT_CONFIG
    try:
        wp = materialize(scheme, cfg.topology, theta, p=p, gamma_s=cfg.gamma_s)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    liou = build_liouvillian(wp, cfg.topology)
    hypotheses = []
    trace_residual = 0.0
    for state in cfg.ensemble.states:
        rho = propagate(embed_on_inputs(state, cfg.topology), liou, tau)
        rep = sink_populations(rho, cfg.topology)
        trace_residual = max(trace_residual, abs(np.trace(rho).real - 1.0))
        hypotheses.append(
            {
                "sink_populations": [float(x) for x in rep.populations],
                "residual": rep.residual,
            }
        )
    pc = prob_correct(scheme, theta, cfg.topology, cfg.ensemble, p, tau, cfg.gamma_s)
    report = {
        "scheme": scheme.value,
        "p": p,
        "tau": tau,
        "gamma_s": cfg.gamma_s,
        "pc": pc,
        "trace_residual": trace_residual,
        "hypotheses": hypotheses,
    }
    text = json.dumps(report, indent=2)
    print(text)
    (out_dir / "simulate.json").write_text(text + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qsw-discrim",
        description="Optimize quantum stochastic walks on layered networks for state discrimination.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p_):
        p_.add_argument("--config", required=True, help="JSON run configuration")
        p_.add_argument("--out-dir", default=".", help="directory for output files")
        p_.add_argument("--seed", type=int, default=None, help="override the optimizer seed")
        p_.add_argument("--jobs", type=int, default=1, help="parallel grid-point workers")

    common(sub.add_parser("bounds", help="print and save the theoretical optimum"))
    common(sub.add_parser("sweep", help="run the (scheme, p, tau) optimization sweep"))
    sim = sub.add_parser("simulate", help="propagate one fixed parameter vector")
    common(sim)
    sim.add_argument("--scheme", required=True, choices=[s.value for s in Scheme])
    sim.add_argument("--theta", required=True, help="JSON file with the parameter vector")
    sim.add_argument("--p", type=float, required=True)
    sim.add_argument("--tau", type=float, required=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.seed is not None:
        cfg.opts = dataclasses.replace(cfg.opts, seed=args.seed)
    out_dir = Path(args.out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"error: cannot create out-dir: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "bounds":
        return cmd_bounds(cfg, out_dir)
    if args.command == "sweep":
        return cmd_sweep(cfg, out_dir, jobs=max(1, args.jobs))
    return cmd_simulate(cfg, out_dir, Scheme(args.scheme), args.theta, args.p, args.tau)


if __name__ == "__main__":
    sys.exit(main())
