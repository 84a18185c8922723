"""SVG charts from the pipeline's TSV side tables.

Reads the tables a run writes (hist.tsv, sweep.tsv, singular.tsv,
scores.tsv, clusters.tsv) and renders simple matplotlib figures, so no
plotting is needed anywhere else in the package.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .errors import DataError
from .pipeline import read_scores_tsv


def _load_tsv(path) -> tuple[list[str], np.ndarray]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"missing table {path}")
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        rows = [line.rstrip("\n").split("\t") for line in fh if line.strip()]
    data = np.array([[float(x) for x in row] for row in rows]) if rows else np.empty((0, len(header)))
    return header, data


def plot_histogram(hist_tsv, out_svg, critical: float | None = None) -> None:
    _, data = _load_tsv(hist_tsv)
    lo, hi, counts = data[:, 0], data[:, 1], data[:, 2]
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.bar(lo, counts, width=hi - lo, align="edge", color="#4878a8", edgecolor="white")
    if critical is not None:
        ax.plot([critical], [0], "rx", markersize=10, clip_on=False)
    ax.set_xlabel("phi")
    ax.set_ylabel("edge count")
    ax.set_title("Association strength of neighbor pairs")
    fig.tight_layout()
    fig.savefig(out_svg, format="svg")
    plt.close(fig)


def plot_sweep(sweep_tsv, out_svg) -> None:
    _, data = _load_tsv(sweep_tsv)
    thresholds, n_edges, log_ratio = data[:, 0], data[:, 1], data[:, 3]
    ok = ~np.isnan(log_ratio)
    fig, ax = plt.subplots(figsize=(8, 4))
    sc = ax.scatter(
        thresholds[ok],
        log_ratio[ok],
        c=np.log10(np.maximum(n_edges[ok], 1)),
        cmap="viridis",
        s=18,
    )
    fig.colorbar(sc, ax=ax, label="log10 edges")
    ax.set_xlabel("phi threshold")
    ax.set_ylabel("log10(edges / LCC edges)")
    ax.set_title("Network fragmentation by threshold")
    fig.tight_layout()
    fig.savefig(out_svg, format="svg")
    plt.close(fig)


def plot_scree(singular_tsv, out_svg) -> None:
    _, data = _load_tsv(singular_tsv)
    dims, sigmas = data[:, 0], data[:, 1]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(dims, sigmas, "o-")
    ax.set_xlabel("dimension")
    ax.set_ylabel("singular value")
    ax.set_title("Scree of the latent sharing space")
    ax.set_xticks(dims)
    fig.tight_layout()
    fig.savefig(out_svg, format="svg")
    plt.close(fig)


def plot_scores(scores_tsv, out_svg, clusters_tsv=None) -> None:
    """Pairwise scatter of the first (up to) three latent dimensions."""
    tokens, scores = read_scores_tsv(scores_tsv)
    labels = np.zeros(len(tokens), dtype=int)
    if clusters_tsv is not None and Path(clusters_tsv).exists():
        with open(clusters_tsv, "r", encoding="utf-8") as fh:
            fh.readline()
            by_user = {}
            for line in fh:
                parts = line.rstrip("\n").split("\t")
                by_user[parts[0]] = int(parts[1])
        labels = np.array([by_user.get(t, -1) for t in tokens])
    r = min(scores.shape[1], 3)
    pairs = [(i, j) for i in range(r) for j in range(i + 1, r)] or [(0, 0)]
    fig, axes = plt.subplots(1, len(pairs), figsize=(4.5 * len(pairs), 4))
    if len(pairs) == 1:
        axes = [axes]
    for ax, (i, j) in zip(axes, pairs):
        ax.scatter(scores[:, i], scores[:, j], c=labels, cmap="tab10", s=6, alpha=0.6)
        ax.set_xlabel(f"dim {i + 1}")
        ax.set_ylabel(f"dim {j + 1}")
    fig.suptitle("Users in the latent sharing space")
    fig.tight_layout()
    fig.savefig(out_svg, format="svg")
    plt.close(fig)


def plot_all(out_dir) -> list[Path]:
    """Render every available chart for a completed run directory."""
    out_dir = Path(out_dir)
    made = []
    jobs = [
        (out_dir / "hist.tsv", lambda p, o: plot_histogram(p, o), "hist.svg"),
        (out_dir / "sweep.tsv", lambda p, o: plot_sweep(p, o), "sweep.svg"),
        (out_dir / "singular.tsv", lambda p, o: plot_scree(p, o), "scree.svg"),
        (
            out_dir / "scores.tsv",
            lambda p, o: plot_scores(p, o, out_dir / "clusters.tsv"),
            "scores.svg",
        ),
    ]
    for table, fn, name in jobs:
        if table.exists():
            out = out_dir / name
            fn(table, out)
            made.append(out)
    return made
