"""Coordination-candidate detection in sharing networks.

The pipeline builds a filtered user-by-tweet incidence matrix from share
events, links each user to its nearest neighbors by cosine similarity,
scores those pairs with the phi association coefficient, analyzes how the
network fragments as the association threshold rises, embeds users in a
latent sharing space via truncated SVD of the double-centered matrix, and
clusters them with density-based clustering.  Users holding at least one
sufficiently strong association edge are flagged as coordination
candidates and situated within the clusters.
"""

__version__ = "0.1.0"

from .association import (
    ContingencyTable,
    PhiScore,
    contingency,
    critical_phi,
    phi,
    phi_cell_product,
    score_graph,
)
from .cluster import ClusterAssignment, ClusterParams, cluster
from .errors import (
    ConfigError,
    ConvergenceError,
    DataError,
    EmptyCorpusError,
    ParseError,
    ShareCoordError,
    StageError,
)
from .ingest import FilterConfig, ShareCorpus, ShareEvent, build_corpus, parse_events
from .latent import (
    CenteredOperator,
    LatentSpace,
    centered_matvec,
    centered_rmatvec,
    l2_normalize_rows,
    scree,
    truncated_svd,
)
from .matrix import NeighborGraph, SparseBinaryMatrix, cosine, knn_graph
from .network import (
    CandidateSet,
    PhiHistogram,
    SweepPoint,
    extract_candidates,
    find_valley,
    phi_histogram,
    threshold_sweep,
)
from .pipeline import PipelineConfig, RunReport, run_pipeline, summarize_candidates
from .synth import CoordGroup, GroundTruth, SynthConfig, generate

__all__ = [
    "__version__",
    "CandidateSet",
    "CenteredOperator",
    "ClusterAssignment",
    "ClusterParams",
    "ConfigError",
    "ContingencyTable",
    "ConvergenceError",
    "CoordGroup",
    "DataError",
    "EmptyCorpusError",
    "FilterConfig",
    "GroundTruth",
    "LatentSpace",
    "NeighborGraph",
    "ParseError",
    "PhiHistogram",
    "PhiScore",
    "PipelineConfig",
    "RunReport",
    "ShareCoordError",
    "ShareCorpus",
    "ShareEvent",
    "SparseBinaryMatrix",
    "StageError",
    "SweepPoint",
    "SynthConfig",
    "build_corpus",
    "centered_matvec",
    "centered_rmatvec",
    "cluster",
    "contingency",
    "cosine",
    "critical_phi",
    "extract_candidates",
    "find_valley",
    "generate",
    "knn_graph",
    "l2_normalize_rows",
    "parse_events",
    "phi",
    "phi_cell_product",
    "phi_histogram",
    "run_pipeline",
    "score_graph",
    "scree",
    "summarize_candidates",
    "threshold_sweep",
    "truncated_svd",
]
