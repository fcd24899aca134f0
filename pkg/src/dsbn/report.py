"""File-based rendering of graphs and learning reports.

Figures are drawn with a non-interactive matplotlib backend: nodes on a
circle, orientation marks as arrowheads.  A learning report directory
collects the orientation figure, the enumerated graphs, the oracle
audit trail as CSV, and the full result as JSON.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .graphs import Dag, Pog
from .independence import AuditRecord

_ARROWSTYLES = {
    "none": "-",
    "forward": "-|>",
    "back": "<|-",
    "both": "<|-|>",
}


def _layout(nodes: Sequence[str]) -> dict[str, tuple[float, float]]:
    count = max(len(nodes), 1)
    out = {}
    for i, v in enumerate(nodes):
        angle = math.pi / 2 - 2 * math.pi * i / count
        out[v] = (math.cos(angle), math.sin(angle))
    return out


def _links_of(graph: Dag | Pog) -> list[tuple[str, str, str]]:
    if isinstance(graph, Dag):
        return [(u, v, "forward") for u, v in sorted(graph.arcs)]
    links = []
    for a, b in graph.edges:
        pairs = graph.orient[(a, b)]
        if len(pairs) == 2:
            style = "both"
        elif (a, b) in pairs:
            style = "forward"
        elif (b, a) in pairs:
            style = "back"
        else:
            style = "none"
        links.append((a, b, style))
    return links


def _draw_on(ax, graph: Dag | Pog, title: str | None = None) -> None:
    pos = _layout(graph.nodes)
    for a, b, style in _links_of(graph):
        ax.annotate(
            "",
            xy=pos[b], xytext=pos[a],
            arrowprops=dict(arrowstyle=_ARROWSTYLES[style], color="black",
                            shrinkA=16, shrinkB=16, lw=1.2,
                            mutation_scale=18),
        )
    for v, (x, y) in pos.items():
        ax.text(x, y, v, ha="center", va="center", fontsize=10,
                bbox=dict(boxstyle="circle,pad=0.3", fc="white", ec="black"))
    if title:
        ax.set_title(title, fontsize=10)
    ax.set_xlim(-1.45, 1.45)
    ax.set_ylim(-1.45, 1.45)
    ax.set_aspect("equal")
    ax.axis("off")


def draw_graph(graph: Dag | Pog, path: str | Path, title: str | None = None) -> Path:
    """Render one graph to an image file."""
    fig, ax = plt.subplots(figsize=(4, 4))
    _draw_on(ax, graph, title)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def draw_dag_grid(dags: Iterable[Dag], path: str | Path, columns: int = 3) -> Path:
    """Render several directed graphs side by side."""
    dags = list(dags)
    count = max(len(dags), 1)
    columns = max(1, min(columns, count))
    rows = (count + columns - 1) // columns
    fig, axes = plt.subplots(rows, columns, figsize=(3.2 * columns, 3.2 * rows))
    flat = [axes] if rows * columns == 1 else list(axes.flat)
    for i, ax in enumerate(flat):
        if i < len(dags):
            _draw_on(ax, dags[i], f"graph {i + 1}")
        else:
            ax.axis("off")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def write_audit_csv(audit: Iterable[AuditRecord], path: str | Path) -> Path:
    """Dump the oracle audit trail as delimited text."""
    path = Path(path)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["j", "k", "l", "independent", "statistic", "df", "reason"])
        for rec in audit:
            stat = rec.statistic
            if stat is not None and math.isinf(stat):
                stat = "inf"
            writer.writerow([rec.j, rec.k, "|".join(rec.l), rec.independent,
                             stat, rec.df, rec.reason])
    return path


def render_report(result, outdir: str | Path) -> list[Path]:
    """Write the learning report: orientation figure, enumerated graphs
    (when present), audit CSV, and the result JSON."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = [
        draw_graph(result.pog, outdir / "pog.png", "learned orientation"),
        write_audit_csv(result.audit, outdir / "audit.csv"),
    ]
    if result.dags:
        written.append(draw_dag_grid(result.dags, outdir / "dags.png"))
    result_path = outdir / "result.json"
    result_path.write_text(json.dumps(result.to_obj(), indent=2) + "\n")
    written.append(result_path)
    return written
