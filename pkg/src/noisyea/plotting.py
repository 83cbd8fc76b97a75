"""Render report rows as error-bar figures.

One line per (policy, q_rule) series over a log2 size axis.  IGNORE
series are solid with filled markers, REEVALUATE series dashed with
hollow markers, so both policies can share one colour per noise rule.
"""
from __future__ import annotations

import os
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .exp import ReportKind, ReportRow  # noqa: E402

_MARKERS = ("o", "s", "^", "D", "v", "P")
_Y_LABEL = {
    ReportKind.FITNESS: "mean best true fitness / n",
    ReportKind.RUNTIME: "mean iterations / n$^2$",
}


def _series(rows: Sequence[ReportRow]) -> dict[tuple[str, str], list[ReportRow]]:
    out: dict[tuple[str, str], list[ReportRow]] = {}
    for row in rows:
        out.setdefault((row.policy, row.q_rule), []).append(row)
    return out


def plot_report(rows: Sequence[ReportRow], kind: ReportKind | str, path: str | os.PathLike,
                title: str | None = None) -> None:
    """Write the figure to ``path``; the format follows the file suffix."""
    kind = ReportKind(kind)
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    rules = sorted({r.q_rule for r in rows})
    colors = {rule: f"C{i}" for i, rule in enumerate(rules)}
    markers = {rule: _MARKERS[i % len(_MARKERS)] for i, rule in enumerate(rules)}
    for (policy, rule), pts in sorted(_series(rows).items()):
        pts = sorted(pts, key=lambda r: r.n)
        dashed = policy == "reevaluate"
        ax.errorbar(
            [p.n for p in pts], [p.mean for p in pts], yerr=[p.std for p in pts],
            color=colors[rule], marker=markers[rule], linestyle="--" if dashed else "-",
            markerfacecolor="none" if dashed else colors[rule], capsize=3,
            label=f"{policy}, q={rule}",
        )
    ax.set_xscale("log", base=2)
    ax.set_xlabel("n")
    ax.set_ylabel(_Y_LABEL[kind])
    if title:
        ax.set_title(title)
    ax.grid(True, which="major", alpha=0.3)
    if rows:
        ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
