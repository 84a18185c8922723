"""Synthetic share corpora with planted coordinated groups and organic clusters.

Organic users sample tweets from their cluster's Zipf popularity
distribution (exponent 1.0) plus uniform background noise; each coordinated
group shares a fixed fraction of its private tweet pool per member.  The
generator is deterministic for a fixed seed, and ground truth (which users
are planted, which organic cluster each user belongs to) is returned
alongside the event stream for end-to-end validation.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .ingest import ShareEvent

ZIPF_EXPONENT = 1.0


@dataclass(frozen=True)
class CoordGroup:
    """One planted group: members share ``overlap_rate`` of a private pool."""

    size: int
    shared_pool: int
    overlap_rate: float

    def __post_init__(self):
        if self.size < 1 or self.shared_pool < 1:
            raise ConfigError("group size and shared_pool must be >= 1")
        if not (0.0 < self.overlap_rate <= 1.0):
            raise ConfigError("overlap_rate must be in (0, 1]")
        if round(self.overlap_rate * self.shared_pool) < 1:
            raise ConfigError("overlap_rate * shared_pool must round to >= 1")


@dataclass(frozen=True)
class SynthConfig:
    n_organic_users: int = 0
    n_organic_clusters: int = 1
    n_tweets: int = 1000
    coord_groups: tuple[CoordGroup, ...] = ()
    organic_activity: float = 20.0
    noise_rate: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.n_tweets < 1:
            raise ConfigError("n_tweets must be >= 1")
        if not (0.0 <= self.noise_rate < 1.0):
            raise ConfigError("noise_rate must be in [0, 1)")
        if self.n_organic_users < 0:
            raise ConfigError("n_organic_users must be >= 0")
        if self.n_organic_users > 0 and self.n_organic_clusters < 1:
            raise ConfigError("n_organic_clusters must be >= 1 when organic users exist")
        if self.n_organic_users == 0 and not self.coord_groups:
            raise ConfigError("config generates no users at all")
        for g in self.coord_groups:
            if g.overlap_rate <= self.noise_rate:
                raise ConfigError(
                    "planted groups must be denser than background: "
                    f"overlap_rate {g.overlap_rate} <= noise_rate {self.noise_rate}"
                )


@dataclass(frozen=True)
class GroundTruth:
    coordinated_users: frozenset[str]
    organic_cluster_of: dict[str, int] = field(default_factory=dict)


def _cluster_pools(cfg: SynthConfig) -> tuple[list[np.ndarray], int]:
    """Carve disjoint tweet pools: one per coordinated group, then per cluster."""
    offset = 0
    group_pools = []
    for g in cfg.coord_groups:
        group_pools.append(np.arange(offset, offset + g.shared_pool))
        offset += g.shared_pool
    if offset > cfg.n_tweets:
        raise ConfigError(
            f"coordinated pools need {offset} tweets but only {cfg.n_tweets} exist"
        )
    organic_pools = []
    if cfg.n_organic_users > 0:
        remaining = cfg.n_tweets - offset
        if remaining < cfg.n_organic_clusters:
            raise ConfigError("not enough tweets left for the organic clusters")
        per = remaining // cfg.n_organic_clusters
        if cfg.organic_activity > per:
            raise ConfigError(
                f"organic_activity {cfg.organic_activity} exceeds the per-cluster "
                f"tweet pool ({per})"
            )
        for c in range(cfg.n_organic_clusters):
            lo = offset + c * per
            hi = offset + (c + 1) * per if c < cfg.n_organic_clusters - 1 else cfg.n_tweets
            organic_pools.append(np.arange(lo, hi))
    return group_pools, organic_pools


def generate(cfg: SynthConfig) -> tuple[list[ShareEvent], GroundTruth]:
    """Generate the event stream and ground truth for a synthetic corpus.

    Events are emitted coordinated groups first, then organic users, with a
    running integer timestamp, so a fixed seed reproduces the stream
    byte-for-byte when serialized.
    """
    group_pools, organic_pools = _cluster_pools(cfg)
    rng = np.random.default_rng(cfg.seed)
    width_u = len(str(max(cfg.n_organic_users, 1) - 1))
    width_t = len(str(cfg.n_tweets - 1))

    events: list[ShareEvent] = []
    ts = 0

    def emit(user: str, tweet_idx: int):
        nonlocal ts
        events.append(ShareEvent(user, f"t{tweet_idx:0{width_t}d}", ts))
        ts += 1

    coordinated: set[str] = set()
    for gi, (g, pool) in enumerate(zip(cfg.coord_groups, group_pools)):
        n_share = int(round(g.overlap_rate * g.shared_pool))
        for j in range(g.size):
            user = f"coord{gi:02d}-{j:03d}"
            coordinated.add(user)
            shared = np.sort(rng.choice(pool, size=n_share, replace=False))
            for t in shared:
                emit(user, int(t))
            n_noise = rng.binomial(n_share, cfg.noise_rate)
            if n_noise:
                for t in rng.choice(cfg.n_tweets, size=n_noise, replace=False):
                    emit(user, int(t))

    organic_cluster_of: dict[str, int] = {}
    for i in range(cfg.n_organic_users):
        cid = i % cfg.n_organic_clusters
        pool = organic_pools[cid]
        user = f"org{i:0{width_u}d}"
        organic_cluster_of[user] = cid
        activity = max(1, min(int(rng.poisson(cfg.organic_activity)), len(pool)))
        n_noise = rng.binomial(activity, cfg.noise_rate)
        n_pool = activity - n_noise
        if n_pool:
            ranks = np.arange(1, len(pool) + 1, dtype=np.float64)
            weights = ranks**-ZIPF_EXPONENT
            weights /= weights.sum()
            picks = rng.choice(pool, size=n_pool, replace=False, p=weights)
            for t in np.sort(picks):
                emit(user, int(t))
        if n_noise:
            for t in rng.choice(cfg.n_tweets, size=n_noise, replace=False):
                emit(user, int(t))

    truth = GroundTruth(
        coordinated_users=frozenset(coordinated),
        organic_cluster_of=organic_cluster_of,
    )
    return events, truth


def write_events_csv(events: list[ShareEvent], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["user_id", "tweet_id", "timestamp"])
        for ev in events:
            writer.writerow([ev.user_id, ev.tweet_id, "" if ev.timestamp is None else ev.timestamp])


def write_ground_truth_json(truth: GroundTruth, path) -> None:
    payload = {
        "coordinated_users": sorted(truth.coordinated_users),
        "organic_clusters": dict(sorted(truth.organic_cluster_of.items())),
    }
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def load_ground_truth_json(path) -> GroundTruth:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return GroundTruth(
        coordinated_users=frozenset(payload["coordinated_users"]),
        organic_cluster_of={k: int(v) for k, v in payload["organic_clusters"].items()},
    )
