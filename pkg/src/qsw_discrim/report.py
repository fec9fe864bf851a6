"""CSV tables and the detection-probability figure.

Output is deterministic: floats are printed with 12 significant digits and
the SVG backend is configured with a fixed hash salt and no timestamp, so
repeat runs with the same seed are byte-identical.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .optimizer import SweepRecord

SWEEP_HEADER = ["scheme", "p", "tau", "pc", "evaluations", "restarts_used", "seed"]

# marker/color per scheme, matching the sweep figure legend
_STYLE = {
    "a": dict(color="gold", marker="s", mfc="none"),
    "b": dict(color="tab:blue", marker="^", mfc="none"),
    "c": dict(color="tab:red", marker="o", mfc="none"),
    "d": dict(color="tab:green", marker="o"),
}


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def write_sweep_csv(records: list[SweepRecord], path) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_HEADER)
        for r in records:
            writer.writerow(
                [
                    r.scheme.value,
                    _fmt(r.p),
                    _fmt(r.tau),
                    _fmt(r.pc),
                    r.evaluations,
                    r.restarts_used,
                    r.seed,
                ]
            )


def write_bounds_csv(ensemble_name: str, solver: str, bound: float, path) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["ensemble", "solver", "bound"])
        writer.writerow([ensemble_name, solver, _fmt(bound)])


def render_sweep_figure(records: list[SweepRecord], bound: float, path) -> None:
    """Detection probability versus p, one line per scheme at the largest
    tau in the sweep, with the theoretical optimum as a dashed line."""
    path = Path(path)
    finite_taus = [r.tau for r in records]
    if not finite_taus:
        raise ValueError("no records to plot")
    tau_max = max(finite_taus)
    with matplotlib.rc_context({"svg.hashsalt": "qsw-discrim"}):
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        schemes = []
        for r in records:
            if r.scheme not in schemes:
                schemes.append(r.scheme)
        for scheme in schemes:
            pts = sorted(
                [(r.p, r.pc) for r in records if r.scheme == scheme and r.tau == tau_max]
            )
            if not pts:
                continue
            ax.plot(
                [p for p, _ in pts],
                [pc for _, pc in pts],
                label=f"scheme ({scheme.value})",
                **_STYLE[scheme.value],
            )
        ax.axhline(bound, color="red", linestyle="--", label="optimal bound")
        ax.set_xlabel("p")
        ax.set_ylabel("probability of correct detection")
        ax.set_xticks([round(0.1 * k, 1) for k in range(11)])
        ax.set_xlim(-0.02, 1.02)
        ax.legend(loc="best")
        ax.set_title(f"tau = {_fmt(tau_max)} s")
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
