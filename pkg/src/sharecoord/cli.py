"""Command-line interface for the coordination-detection pipeline.

Subcommands mirror the pipeline stages so each intermediate product can be
produced on its own: ``corpus stats``, ``assoc``, ``sweep``, ``hist``,
``latent``, ``cluster``, ``candidates``, ``export``, plus ``run`` for the
whole pipeline, ``synth`` for benchmark corpora, and ``plot`` for SVG
charts.  All config-file keys are overridable by flags.  Exit codes:
0 success, 1 configuration error, 2 data error, 3 numerical
non-convergence.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .association import score_graph
from .cluster import cluster as run_cluster
from .errors import ConfigError, ShareCoordError
from .graphml import export_graphml, max_incident_phi
from .ingest import build_corpus, parse_events
from .latent import CenteredOperator, l2_normalize_rows, truncated_svd
from .matrix import SparseBinaryMatrix, knn_graph
from .network import extract_candidates, phi_histogram, threshold_sweep
from .pipeline import (
    PipelineConfig,
    load_config,
    read_scores_tsv,
    run_pipeline,
    write_clusters_tsv,
    write_edges_tsv,
    write_hist_tsv,
    write_matrix_tsv,
    write_singular_tsv,
    write_sweep_tsv,
)
from .synth import CoordGroup, SynthConfig, generate, write_events_csv, write_ground_truth_json


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="TOML config file; flags override its values")
    p.add_argument("--input", help="events file (CSV or JSONL)")
    p.add_argument("--format", choices=["csv", "jsonl"], help="input format")
    p.add_argument("--min-user-activity", type=int, help="minimum distinct tweets per user")
    p.add_argument("--min-tweet-audience", type=int, help="minimum unique sharers per tweet")
    p.add_argument(
        "--filter-mode", choices=["single_pass", "fixed_point"], help="filter application order"
    )
    p.add_argument("--k", type=int, help="neighbors per user")
    p.add_argument("--phi-threshold", type=float, help="candidate threshold")
    p.add_argument("--sweep-points", type=int, help="thresholds in the sweep grid")
    p.add_argument("--hist-bins", type=int, help="histogram bins")
    p.add_argument("--rank", type=int, help="latent dimensions")
    p.add_argument("--scaling", choices=["singular", "raw"], help="score scaling")
    p.add_argument("--min-cluster-size", type=int, help="HDBSCAN minimum cluster size")
    p.add_argument("--min-samples", type=int, help="HDBSCAN core-distance neighbor count")
    p.add_argument(
        "--selection", choices=["excess_of_mass", "leaf"], help="cluster selection method"
    )
    p.add_argument("--outdir", help="output directory")
    p.add_argument("--seed", type=int, help="random seed")
    p.add_argument("--threads", type=int, help="parallelism cap; 1 reproduces any N exactly")


def build_pipeline_config(args: argparse.Namespace) -> PipelineConfig:
    cfg = load_config(args.config) if args.config else PipelineConfig()
    filters = cfg.filters
    if args.min_user_activity is not None:
        filters = replace(filters, min_user_activity=args.min_user_activity)
    if args.min_tweet_audience is not None:
        filters = replace(filters, min_tweet_audience=args.min_tweet_audience)
    if args.filter_mode is not None:
        filters = replace(filters, filter_mode=args.filter_mode)
    cparams = cfg.cluster_params
    if args.min_cluster_size is not None:
        cparams = replace(cparams, min_cluster_size=args.min_cluster_size)
    if args.min_samples is not None:
        cparams = replace(cparams, min_samples=args.min_samples)
    if args.selection is not None:
        cparams = replace(cparams, selection=args.selection)
    overrides = {
        "input_path": args.input,
        "input_format": args.format,
        "k": args.k,
        "phi_threshold": args.phi_threshold,
        "sweep_points": args.sweep_points,
        "hist_bins": args.hist_bins,
        "latent_rank": args.rank,
        "score_scaling": args.scaling,
        "output_dir": args.outdir,
        "seed": args.seed,
        "threads": args.threads,
    }
    kwargs = {k: v for k, v in overrides.items() if v is not None}
    return replace(cfg, filters=filters, cluster_params=cparams, **kwargs)


def _require_input(cfg: PipelineConfig) -> PipelineConfig:
    if not cfg.input_path:
        raise ConfigError("no input file given (use --input or a config file)")
    return cfg


def _corpus_and_matrix(cfg: PipelineConfig):
    events = parse_events(cfg.input_path, cfg.input_format)
    corpus = build_corpus(events, cfg.filters)
    return corpus, SparseBinaryMatrix(corpus.incidence)


def _scored_graph(cfg: PipelineConfig):
    corpus, m = _corpus_and_matrix(cfg)
    graph = knn_graph(m, k=cfg.k, threads=cfg.threads)
    return corpus, m, score_graph(graph, m)


def _write_or_print(writer, out_path: str | None) -> None:
    """Run a path-based writer into a file or echo its output to stdout."""
    if out_path:
        parent = Path(out_path).parent
        if str(parent):
            parent.mkdir(parents=True, exist_ok=True)
        writer(out_path)
    else:
        import tempfile

        with tempfile.NamedTemporaryFile("r", suffix=".tsv", delete=False) as tmp:
            tmp_path = tmp.name
        writer(tmp_path)
        sys.stdout.write(Path(tmp_path).read_text(encoding="utf-8"))
        Path(tmp_path).unlink()


def cmd_run(args) -> int:
    cfg = _require_input(build_pipeline_config(args))
    report = run_pipeline(cfg)
    summary = {
        "output_dir": cfg.output_dir,
        "corpus_stats": report.corpus_stats,
        "n_candidates": report.n_candidates,
        "n_clusters": sum(1 for row in report.cluster_summary if row["label"] >= 0),
    }
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def cmd_corpus(args) -> int:
    cfg = _require_input(build_pipeline_config(args))
    corpus, _ = _corpus_and_matrix(cfg)
    print(json.dumps(corpus.stats(), indent=2, sort_keys=True))
    return 0


def cmd_assoc(args) -> int:
    cfg = _require_input(build_pipeline_config(args))
    corpus, m, graph = _scored_graph(cfg)
    _write_or_print(lambda path: write_edges_tsv(graph, m, corpus.users, path), args.out)
    return 0


def cmd_sweep(args) -> int:
    cfg = _require_input(build_pipeline_config(args))
    _, _, graph = _scored_graph(cfg)
    points = threshold_sweep(graph, n_points=cfg.sweep_points)
    _write_or_print(lambda path: write_sweep_tsv(points, path), args.out)
    return 0


def cmd_hist(args) -> int:
    cfg = _require_input(build_pipeline_config(args))
    _, _, graph = _scored_graph(cfg)
    hist = phi_histogram(graph, cfg.hist_bins)
    _write_or_print(lambda path: write_hist_tsv(hist, path), args.out)
    return 0


def cmd_latent(args) -> int:
    cfg = _require_input(build_pipeline_config(args))
    corpus, m = _corpus_and_matrix(cfg)
    rank = min(cfg.latent_rank, min(m.n_rows, m.n_cols))
    ls = truncated_svd(
        CenteredOperator(m), rank, seed=cfg.seed, scaled=cfg.score_scaling == "singular"
    )
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_singular_tsv(ls, out_dir / "singular.tsv")
    write_matrix_tsv(corpus.users, ls.user_scores, "user", out_dir / "scores.tsv")
    write_matrix_tsv(corpus.tweets, ls.tweet_loadings, "tweet", out_dir / "loadings.tsv")
    print(json.dumps({"output_dir": str(out_dir), "rank": rank}, sort_keys=True))
    return 0


def cmd_cluster(args) -> int:
    cfg = build_pipeline_config(args)
    tokens, scores = read_scores_tsv(args.scores)
    points = l2_normalize_rows(scores) if not args.no_normalize else scores
    assignment = run_cluster(points, cfg.cluster_params, seed=cfg.seed)
    _write_or_print(lambda path: write_clusters_tsv(tokens, assignment, path), args.out)
    return 0


def cmd_candidates(args) -> int:
    cfg = _require_input(build_pipeline_config(args))
    corpus, _, graph = _scored_graph(cfg)
    cands = extract_candidates(graph, cfg.phi_threshold)
    max_phi = max_incident_phi(graph)
    lines = ["user\tmax_phi"]
    for i in sorted(cands.members, key=lambda i: corpus.users[i]):
        lines.append(f"{corpus.users[i]}\t{max_phi[i]!r}")
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_export(args) -> int:
    cfg = _require_input(build_pipeline_config(args))
    corpus, m, graph = _scored_graph(cfg)
    cands = extract_candidates(graph, cfg.phi_threshold)
    rank = min(cfg.latent_rank, min(m.n_rows, m.n_cols))
    ls = truncated_svd(
        CenteredOperator(m), rank, seed=cfg.seed, scaled=cfg.score_scaling == "singular"
    )
    assignment = run_cluster(
        l2_normalize_rows(ls.user_scores), cfg.cluster_params, seed=cfg.seed
    )
    out = args.out or str(Path(cfg.output_dir) / "graph.graphml")
    Path(out).parent.mkdir(parents=True, exist_ok=True)
    export_graphml(graph, corpus.users, out, labels=assignment, candidates=cands)
    print(json.dumps({"graphml": str(out), "n_nodes": graph.n_nodes, "n_edges": graph.n_edges}))
    return 0


def _parse_group(spec: str) -> CoordGroup:
    parts = spec.split(":")
    if len(parts) != 3:
        raise ConfigError(f"group spec must be SIZE:POOL:OVERLAP, got {spec!r}")
    try:
        return CoordGroup(size=int(parts[0]), shared_pool=int(parts[1]), overlap_rate=float(parts[2]))
    except ValueError as exc:
        raise ConfigError(f"bad group spec {spec!r}: {exc}") from exc


def cmd_synth(args) -> int:
    groups = tuple(_parse_group(s) for s in args.group or [])
    cfg = SynthConfig(
        n_organic_users=args.organic_users,
        n_organic_clusters=args.organic_clusters,
        n_tweets=args.tweets,
        coord_groups=groups,
        organic_activity=args.activity,
        noise_rate=args.noise_rate,
        seed=args.seed if args.seed is not None else 0,
    )
    events, truth = generate(cfg)
    write_events_csv(events, args.out)
    if args.truth:
        write_ground_truth_json(truth, args.truth)
    print(
        json.dumps(
            {
                "events": len(events),
                "coordinated_users": len(truth.coordinated_users),
                "organic_users": len(truth.organic_cluster_of),
                "out": args.out,
            },
            sort_keys=True,
        )
    )
    return 0


def cmd_plot(args) -> int:
    from .plots import plot_all

    made = plot_all(args.outdir)
    print(json.dumps({"charts": [str(p) for p in made]}))
    return 0


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sharecoord",
        description="Coordination-candidate detection in sharing networks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute the full pipeline")
    _add_config_flags(p_run)
    p_run.set_defaults(fn=cmd_run)

    p_corpus = sub.add_parser("corpus", help="corpus inspection")
    p_corpus.add_argument("action", choices=["stats"], help="what to report")
    _add_config_flags(p_corpus)
    p_corpus.set_defaults(fn=cmd_corpus)

    p_assoc = sub.add_parser("assoc", help="scored edge list as TSV")
    _add_config_flags(p_assoc)
    p_assoc.add_argument("--out", help="write TSV here instead of stdout")
    p_assoc.set_defaults(fn=cmd_assoc)

    p_sweep = sub.add_parser("sweep", help="threshold fragmentation sweep as TSV")
    _add_config_flags(p_sweep)
    p_sweep.add_argument("--out", help="write TSV here instead of stdout")
    p_sweep.set_defaults(fn=cmd_sweep)

    p_hist = sub.add_parser("hist", help="phi histogram as TSV")
    _add_config_flags(p_hist)
    p_hist.add_argument("--out", help="write TSV here instead of stdout")
    p_hist.set_defaults(fn=cmd_hist)

    p_latent = sub.add_parser("latent", help="latent space tables (singular values, scores, loadings)")
    _add_config_flags(p_latent)
    p_latent.set_defaults(fn=cmd_latent)

    p_cluster = sub.add_parser("cluster", help="cluster a latent-score TSV")
    _add_config_flags(p_cluster)
    p_cluster.add_argument("--scores", required=True, help="scores.tsv from the latent stage")
    p_cluster.add_argument(
        "--no-normalize", action="store_true", help="skip row L2 normalization"
    )
    p_cluster.add_argument("--out", help="write TSV here instead of stdout")
    p_cluster.set_defaults(fn=cmd_cluster)

    p_cand = sub.add_parser("candidates", help="coordination candidates as TSV")
    _add_config_flags(p_cand)
    p_cand.add_argument("--out", help="write TSV here instead of stdout")
    p_cand.set_defaults(fn=cmd_candidates)

    p_export = sub.add_parser("export", help="GraphML export of the scored graph")
    _add_config_flags(p_export)
    p_export.add_argument("--out", help="GraphML path (default OUTDIR/graph.graphml)")
    p_export.set_defaults(fn=cmd_export)

    p_synth = sub.add_parser("synth", help="generate a synthetic benchmark corpus")
    p_synth.add_argument("--out", required=True, help="events CSV path")
    p_synth.add_argument("--truth", help="ground-truth JSON path")
    p_synth.add_argument("--organic-users", type=int, default=0)
    p_synth.add_argument("--organic-clusters", type=int, default=1)
    p_synth.add_argument("--tweets", type=int, default=1000)
    p_synth.add_argument(
        "--group",
        action="append",
        metavar="SIZE:POOL:OVERLAP",
        help="planted group spec; repeatable",
    )
    p_synth.add_argument("--activity", type=float, default=20.0, help="mean shares per organic user")
    p_synth.add_argument("--noise-rate", type=float, default=0.0)
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.set_defaults(fn=cmd_synth)

    p_plot = sub.add_parser("plot", help="SVG charts from a run's TSV tables")
    p_plot.add_argument("--outdir", required=True, help="directory holding the run outputs")
    p_plot.set_defaults(fn=cmd_plot)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ShareCoordError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
