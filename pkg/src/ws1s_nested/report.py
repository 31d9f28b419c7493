"""CSV tables and figures for comparison runs."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .bench import CorpusReport  # noqa: E402


def write_csv(report: CorpusReport, path: Path) -> Path:
    rows = report.table()
    fields = list(rows[0]) if rows else ["formula_id"]
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        writer.writerows(rows)
    return path


def plot_space(report: CorpusReport, path: Path) -> Path:
    """Term nodes against classical states, one point per compared formula."""
    xs, ys = [], []
    for r in report.compared:
        if r.classical_states and r.term_nodes:
            xs.append(r.classical_states)
            ys.append(r.term_nodes)
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.scatter(xs, ys, s=8, alpha=0.5)
    if xs:
        top = max(max(xs), max(ys))
        ax.plot([1, top], [1, top], color="grey", lw=0.8, ls="--")
        ax.set_xscale("log")
        ax.set_yscale("log")
    ax.set_xlabel("classical states (prefix automata)")
    ax.set_ylabel("antichain term nodes")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_time(report: CorpusReport, path: Path) -> Path:
    labels, classical, antichain = [], [], []
    for r in report.compared:
        labels.append(r.formula_id)
        classical.append(r.time_ms.get("classical", math.nan))
        antichain.append(r.time_ms.get("antichain", math.nan))
    fig, ax = plt.subplots(figsize=(max(5, 0.35 * len(labels)), 4))
    if len(labels) <= 40:
        idx = range(len(labels))
        ax.bar([i - 0.2 for i in idx], classical, width=0.4, label="classical")
        ax.bar([i + 0.2 for i in idx], antichain, width=0.4, label="antichain")
        ax.set_xticks(list(idx))
        ax.set_xticklabels(labels, rotation=60, ha="right", fontsize=7)
    else:
        ax.scatter(classical, antichain, s=8, alpha=0.5)
        ax.set_xlabel("classical time [ms]")
        ax.set_xscale("log")
        ax.set_yscale("log")
    ax.set_ylabel("time [ms]" if len(labels) <= 40 else "antichain time [ms]")
    if len(labels) <= 40:
        ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def write_report(report: CorpusReport, out_dir: Path | str, stem: str = "compare") -> dict[str, Path]:
    """Write the table, the summary and both figures into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "csv": write_csv(report, out / f"{stem}.csv"),
        "space": plot_space(report, out / f"{stem}_space.png"),
        "time": plot_time(report, out / f"{stem}_time.png"),
    }
    summary = out / f"{stem}_summary.json"
    summary.write_text(json.dumps(report.summary(), indent=2, sort_keys=True) + "\n")
    paths["summary"] = summary
    return paths
