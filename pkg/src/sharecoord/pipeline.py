"""End-to-end pipeline: ingest, associate, analyze, decompose, cluster, report.

``run_pipeline`` executes every stage in order and writes all artifacts to
the output directory: a JSON master report plus TSV side tables that any
external plotting tool can consume, and a GraphML export of the scored
graph.  Outputs are byte-identical for identical config and input; stage
wall-clock timings, which inherently vary, go to a separate timings.json so
the report itself stays reproducible.
"""

from __future__ import annotations

import json
import math
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__
from .association import critical_phi, edge_contingencies, score_graph
from .cluster import ClusterAssignment, ClusterParams, cluster
from .errors import ConfigError, DataError, StageError
from .graphml import export_graphml, max_incident_phi
from .ingest import FilterConfig, build_corpus, parse_events
from .latent import CenteredOperator, LatentSpace, l2_normalize_rows, scree, truncated_svd
from .matrix import NeighborGraph, SparseBinaryMatrix, knn_graph
from .network import (
    CandidateSet,
    PhiHistogram,
    SweepPoint,
    extract_candidates,
    find_valley,
    phi_histogram,
    threshold_sweep,
)

REPORT_ALPHA = 0.0001  # significance level echoed in the report's critical phi

SCORE_SCALINGS = ("singular", "raw")


@dataclass(frozen=True)
class PipelineConfig:
    """Every knob of the pipeline; serializable to a single TOML file."""

    input_path: str = ""
    input_format: str = "csv"
    filters: FilterConfig = FilterConfig()
    k: int = 3
    phi_threshold: float = 0.67
    sweep_points: int = 100
    hist_bins: int = 50
    latent_rank: int = 3
    score_scaling: str = "singular"
    cluster_params: ClusterParams = ClusterParams()
    output_dir: str = "out"
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if self.input_format not in ("csv", "jsonl"):
            raise ConfigError(f"unknown input format {self.input_format!r}")
        if self.k < 1:
            raise ConfigError("k must be >= 1")
        if not (0.0 <= self.phi_threshold <= 1.0):
            raise ConfigError("phi_threshold must be in [0, 1]")
        if self.sweep_points < 1 or self.hist_bins < 1:
            raise ConfigError("sweep_points and hist_bins must be >= 1")
        if self.latent_rank < 1:
            raise ConfigError("latent_rank must be >= 1")
        if self.score_scaling not in SCORE_SCALINGS:
            raise ConfigError(f"unknown score_scaling {self.score_scaling!r}")
        if self.seed < 0:
            raise ConfigError("seed must be >= 0")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")

    def to_dict(self) -> dict:
        out = {
            "input": {"path": self.input_path, "format": self.input_format},
            "filter": {
                "min_user_activity": self.filters.min_user_activity,
                "min_tweet_audience": self.filters.min_tweet_audience,
                "mode": self.filters.filter_mode,
            },
            "graph": {
                "k": self.k,
                "phi_threshold": self.phi_threshold,
                "sweep_points": self.sweep_points,
                "hist_bins": self.hist_bins,
            },
            "latent": {"rank": self.latent_rank, "scaling": self.score_scaling},
            "cluster": {
                "min_cluster_size": self.cluster_params.min_cluster_size,
                "selection": self.cluster_params.selection,
            },
            "run": {"output_dir": self.output_dir, "seed": self.seed, "threads": self.threads},
        }
        if self.cluster_params.min_samples is not None:
            out["cluster"]["min_samples"] = self.cluster_params.min_samples
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        known = {
            "input": {"path", "format"},
            "filter": {"min_user_activity", "min_tweet_audience", "mode"},
            "graph": {"k", "phi_threshold", "sweep_points", "hist_bins"},
            "latent": {"rank", "scaling"},
            "cluster": {"min_cluster_size", "min_samples", "selection"},
            "run": {"output_dir", "seed", "threads"},
        }
        for section, keys in data.items():
            if section not in known:
                raise ConfigError(f"unknown config section [{section}]")
            if not isinstance(keys, dict):
                raise ConfigError(f"config section [{section}] must be a table")
            for key in keys:
                if key not in known[section]:
                    raise ConfigError(f"unknown config key {key!r} in [{section}]")

        def get(section, key, default):
            return data.get(section, {}).get(key, default)

        base = cls()
        filters = FilterConfig(
            min_user_activity=get("filter", "min_user_activity", base.filters.min_user_activity),
            min_tweet_audience=get(
                "filter", "min_tweet_audience", base.filters.min_tweet_audience
            ),
            filter_mode=get("filter", "mode", base.filters.filter_mode),
        )
        cluster_params = ClusterParams(
            min_cluster_size=get(
                "cluster", "min_cluster_size", base.cluster_params.min_cluster_size
            ),
            min_samples=get("cluster", "min_samples", None),
            selection=get("cluster", "selection", base.cluster_params.selection),
        )
        return cls(
            input_path=get("input", "path", base.input_path),
            input_format=get("input", "format", base.input_format),
            filters=filters,
            k=get("graph", "k", base.k),
            phi_threshold=get("graph", "phi_threshold", base.phi_threshold),
            sweep_points=get("graph", "sweep_points", base.sweep_points),
            hist_bins=get("graph", "hist_bins", base.hist_bins),
            latent_rank=get("latent", "rank", base.latent_rank),
            score_scaling=get("latent", "scaling", base.score_scaling),
            cluster_params=cluster_params,
            output_dir=get("run", "output_dir", base.output_dir),
            seed=get("run", "seed", base.seed),
            threads=get("run", "threads", base.threads),
        )


def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, str):
        escaped = v.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    raise ConfigError(f"cannot serialize config value {v!r}")


def dumps_config(cfg: PipelineConfig) -> str:
    """Canonical TOML text for a config: fixed section and key order."""
    lines = []
    for section, keys in cfg.to_dict().items():
        lines.append(f"[{section}]")
        for key, value in keys.items():
            lines.append(f"{key} = {_toml_value(value)}")
        lines.append("")
    return "\n".join(lines)


def save_config(cfg: PipelineConfig, path) -> None:
    Path(path).write_text(dumps_config(cfg), encoding="utf-8")


def load_config(path) -> PipelineConfig:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid config file {path}: {exc}") from exc
    return PipelineConfig.from_dict(data)


@dataclass
class RunReport:
    """Everything a run produced, minus wall-clock timings (kept separate)."""

    version: str
    config: dict
    corpus_stats: dict
    n_edges: int
    n_scored_edges: int
    critical_phi: float | None
    valley: float | None
    candidate_threshold: float
    n_candidates: int
    scree: list[dict]
    cluster_summary: list[dict]
    candidates: list[dict]
    sweep: list[dict]
    histogram: list[dict]
    timings: dict = field(default_factory=dict)

    def to_json(self) -> str:
        payload = {
            "version": self.version,
            "config": self.config,
            "corpus_stats": self.corpus_stats,
            "n_edges": self.n_edges,
            "n_scored_edges": self.n_scored_edges,
            "critical_phi": self.critical_phi,
            "valley": self.valley,
            "candidate_threshold": self.candidate_threshold,
            "n_candidates": self.n_candidates,
            "scree": self.scree,
            "cluster_summary": self.cluster_summary,
            "candidates": self.candidates,
            "sweep": self.sweep,
            "histogram": self.histogram,
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _fmt(x) -> str:
    """Shortest round-trip decimal for floats; None and NaN become 'nan'."""
    if x is None:
        return "nan"
    x = float(x)
    if math.isnan(x):
        return "nan"
    return repr(x)


def write_edges_tsv(g: NeighborGraph, m: SparseBinaryMatrix, users, path) -> None:
    a, b, c, d = edge_contingencies(g, m)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("user1\tuser2\tcosine\tphi\ta\tb\tc\td\n")
        for i in range(g.n_edges):
            fh.write(
                f"{users[g.u[i]]}\t{users[g.v[i]]}\t{_fmt(g.cosine[i])}\t"
                f"{_fmt(g.phi[i] if g.phi is not None else None)}\t"
                f"{a[i]}\t{b[i]}\t{c[i]}\t{d[i]}\n"
            )


def write_sweep_tsv(points: list[SweepPoint], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("threshold\tn_edges\tn_lcc_edges\tlog_ratio\tn_components\n")
        for p in points:
            fh.write(
                f"{_fmt(p.threshold)}\t{p.n_edges}\t{p.n_lcc_edges}\t"
                f"{_fmt(p.log_ratio)}\t{p.n_components}\n"
            )


def write_hist_tsv(hist: PhiHistogram, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("bin_lo\tbin_hi\tcount\n")
        for i in range(hist.n_bins):
            fh.write(f"{_fmt(hist.edges[i])}\t{_fmt(hist.edges[i + 1])}\t{hist.counts[i]}\n")


def write_singular_tsv(ls: LatentSpace, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("dimension\tsingular_value\tvariance_fraction\n")
        for dim, sigma, frac in scree(ls):
            fh.write(f"{dim}\t{_fmt(sigma)}\t{_fmt(frac)}\n")


def write_matrix_tsv(tokens, matrix: np.ndarray, first_column: str, path) -> None:
    r = matrix.shape[1]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(first_column + "".join(f"\tdim{i + 1}" for i in range(r)) + "\n")
        for tok, row in zip(tokens, matrix):
            fh.write(tok + "".join(f"\t{_fmt(x)}" for x in row) + "\n")


def read_scores_tsv(path) -> tuple[list[str], np.ndarray]:
    """Read a score table written by :func:`write_matrix_tsv`."""
    tokens: list[str] = []
    rows: list[list[float]] = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline()
        if not header.strip():
            raise DataError(f"empty scores file {path}")
        for line in fh:
            parts = line.rstrip("\n").split("\t")
            tokens.append(parts[0])
            rows.append([float(x) for x in parts[1:]])
    if not tokens:
        raise DataError(f"no score rows in {path}")
    return tokens, np.asarray(rows, dtype=np.float64)


def write_clusters_tsv(users, assignment: ClusterAssignment, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("user\tlabel\tstrength\n")
        for tok, lab, s in zip(users, assignment.labels, assignment.membership_strength):
            fh.write(f"{tok}\t{lab}\t{_fmt(s)}\n")


def write_candidates_tsv(users, cands: CandidateSet, labels, max_phi, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("user\tcluster\tmax_phi\n")
        for i in sorted(cands.members):
            fh.write(f"{users[i]}\t{labels[i]}\t{_fmt(max_phi[i])}\n")


def summarize_candidates(
    labels: ClusterAssignment, cands: CandidateSet
) -> dict[int, tuple[int, int]]:
    """Map cluster label -> (size, candidate count); -1 is the noise row."""
    member_labels = labels.labels
    out: dict[int, tuple[int, int]] = {}
    cand_idx = np.zeros(len(member_labels), dtype=bool)
    cand_idx[list(cands.members)] = True
    for lab in range(-1, labels.n_clusters):
        in_cluster = member_labels == lab
        out[lab] = (int(in_cluster.sum()), int((in_cluster & cand_idx).sum()))
    return out


class _StageTimer:
    def __init__(self):
        self.timings: dict[str, float] = {}

    @contextmanager
    def stage(self, name: str):
        start = time.perf_counter()
        try:
            yield
        except Exception as exc:
            raise StageError(name, exc) from exc
        self.timings[name] = time.perf_counter() - start


def run_pipeline(cfg: PipelineConfig) -> RunReport:
    """Execute every stage and write all artifacts to the output directory.

    Raises :class:`StageError` naming the failing stage; files already
    written by a failed run are removed so no partial output lingers.
    """
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    def target(name: str) -> Path:
        p = out_dir / name
        written.append(p)
        return p

    timer = _StageTimer()
    try:
        with timer.stage("ingest"):
            events = parse_events(cfg.input_path, cfg.input_format)
            corpus = build_corpus(events, cfg.filters)

        with timer.stage("matrix"):
            m = SparseBinaryMatrix(corpus.incidence)

        with timer.stage("knn"):
            graph = knn_graph(m, k=cfg.k, threads=cfg.threads)

        with timer.stage("score"):
            graph = score_graph(graph, m)
            n_scored = int(graph.defined_phi_mask().sum())
            crit = (
                critical_phi(REPORT_ALPHA, n_scored, m.n_cols) if n_scored else None
            )
            write_edges_tsv(graph, m, corpus.users, target("edges.tsv"))

        with timer.stage("sweep"):
            sweep_points = threshold_sweep(graph, n_points=cfg.sweep_points)
            write_sweep_tsv(sweep_points, target("sweep.tsv"))

        with timer.stage("histogram"):
            if n_scored:
                hist = phi_histogram(graph, cfg.hist_bins)
                valley = find_valley(hist)
                write_hist_tsv(hist, target("hist.tsv"))
            else:
                hist = None
                valley = None

        with timer.stage("candidates"):
            cands = extract_candidates(graph, cfg.phi_threshold)

        with timer.stage("latent"):
            rank = min(cfg.latent_rank, min(m.n_rows, m.n_cols))
            op = CenteredOperator(m)
            ls = truncated_svd(
                op, rank, seed=cfg.seed, scaled=cfg.score_scaling == "singular"
            )
            write_singular_tsv(ls, target("singular.tsv"))
            write_matrix_tsv(corpus.users, ls.user_scores, "user", target("scores.tsv"))
            write_matrix_tsv(corpus.tweets, ls.tweet_loadings, "tweet", target("loadings.tsv"))

        with timer.stage("normalize"):
            normalized = l2_normalize_rows(ls.user_scores)

        with timer.stage("cluster"):
            assignment = cluster(normalized, cfg.cluster_params, seed=cfg.seed)
            write_clusters_tsv(corpus.users, assignment, target("clusters.tsv"))

        with timer.stage("report"):
            max_phi = max_incident_phi(graph)
            write_candidates_tsv(
                corpus.users, cands, assignment.labels, max_phi, target("candidates.tsv")
            )
            summary = summarize_candidates(assignment, cands)
            # echo only keys that influence the results: where the output
            # lands and how many threads ran must not break byte-identical
            # reports for identical analyses
            config_echo = cfg.to_dict()
            config_echo["run"] = {"seed": cfg.seed}
            report = RunReport(
                version=__version__,
                config=config_echo,
                corpus_stats=corpus.stats(),
                n_edges=graph.n_edges,
                n_scored_edges=n_scored,
                critical_phi=crit,
                valley=valley,
                candidate_threshold=cfg.phi_threshold,
                n_candidates=len(cands),
                scree=[
                    {"dimension": d, "singular_value": s, "variance_fraction": f}
                    for d, s, f in scree(ls)
                ],
                cluster_summary=[
                    {"label": lab, "size": size, "n_candidates": n_cand}
                    for lab, (size, n_cand) in sorted(summary.items())
                ],
                candidates=[
                    {"user": corpus.users[i], "cluster": int(assignment.labels[i])}
                    for i in sorted(cands.members, key=lambda i: corpus.users[i])
                ],
                sweep=[
                    {
                        "threshold": p.threshold,
                        "n_edges": p.n_edges,
                        "n_lcc_edges": p.n_lcc_edges,
                        "log_ratio": p.log_ratio,
                        "n_components": p.n_components,
                    }
                    for p in sweep_points
                ],
                histogram=(
                    [
                        {
                            "bin_lo": float(hist.edges[i]),
                            "bin_hi": float(hist.edges[i + 1]),
                            "count": int(hist.counts[i]),
                        }
                        for i in range(hist.n_bins)
                    ]
                    if hist is not None
                    else []
                ),
                timings={},
            )
            target("report.json").write_text(report.to_json(), encoding="utf-8")

        with timer.stage("export"):
            export_graphml(
                graph, corpus.users, target("graph.graphml"), labels=assignment, candidates=cands
            )
    except Exception:
        for p in written:
            try:
                p.unlink(missing_ok=True)
            except OSError:
                pass
        raise

    report.timings = dict(timer.timings)
    (out_dir / "timings.json").write_text(
        json.dumps(report.timings, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return report
