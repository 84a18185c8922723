"""Share-event parsing, activity filtering, and the binary incidence corpus.

Raw share records (user, tweet) are interned to dense integer indices and
reduced to a sparse 0/1 user-by-tweet matrix.  Two activity filters are
applied: tweets must reach a minimum audience of unique sharers, and users
must share a minimum number of surviving tweets.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Iterator

import numpy as np
from scipy import sparse

from .errors import ConfigError, DataError, EmptyCorpusError, ParseError

EVENT_FORMATS = ("csv", "jsonl")
FILTER_MODES = ("single_pass", "fixed_point")


@dataclass(frozen=True)
class ShareEvent:
    """One observed share: a user re-shared a tweet, optionally timestamped."""

    user_id: str
    tweet_id: str
    timestamp: int | None = None


@dataclass(frozen=True)
class FilterConfig:
    """Activity thresholds applied when building a corpus.

    ``min_user_activity`` is the minimum number of distinct tweets a user
    must share; ``min_tweet_audience`` the minimum number of unique users a
    tweet must reach.  ``filter_mode`` selects whether the two filters run
    once in sequence (tweets first, then users) or iterate to a fixed point.
    """

    min_user_activity: int = 20
    min_tweet_audience: int = 10
    filter_mode: str = "single_pass"

    def __post_init__(self):
        if self.min_user_activity < 1 or self.min_tweet_audience < 1:
            raise ConfigError("filter thresholds must be >= 1")
        if self.filter_mode not in FILTER_MODES:
            raise ConfigError(f"unknown filter_mode {self.filter_mode!r}")


@dataclass(frozen=True)
class ShareCorpus:
    """Filtered binary incidence matrix plus the token <-> index interning.

    Rows are users, columns are tweets; ``incidence`` is CSR with 0/1
    entries.  Index maps assign row/column indices in ascending lexicographic
    token order, so identical input yields an identical corpus.
    """

    users: tuple[str, ...]
    tweets: tuple[str, ...]
    incidence: sparse.csr_array
    user_index: dict[str, int] = field(repr=False, default_factory=dict)
    tweet_index: dict[str, int] = field(repr=False, default_factory=dict)

    @property
    def n_users(self) -> int:
        return len(self.users)

    @property
    def n_tweets(self) -> int:
        return len(self.tweets)

    @property
    def n_entries(self) -> int:
        return int(self.incidence.nnz)

    def stats(self) -> dict:
        return {
            "n_users": self.n_users,
            "n_tweets": self.n_tweets,
            "n_entries": self.n_entries,
        }


def _open_text(stream) -> IO[str]:
    if isinstance(stream, (str, Path)):
        return open(stream, "r", encoding="utf-8", newline="")
    if isinstance(stream, io.TextIOBase):
        return stream
    # binary file object
    return io.TextIOWrapper(stream, encoding="utf-8", newline="")


def _parse_timestamp(raw, line_no: int) -> int | None:
    if raw is None:
        return None
    if isinstance(raw, str):
        raw = raw.strip()
        if not raw:
            return None
    try:
        return int(raw)
    except (TypeError, ValueError):
        raise ParseError(f"invalid timestamp {raw!r}", line_no) from None


def _parse_csv(text: IO[str]) -> Iterator[ShareEvent]:
    reader = csv.DictReader(text)
    if reader.fieldnames is None:
        raise ParseError("missing header row", 1)
    names = [n.strip() for n in reader.fieldnames]
    for required in ("user_id", "tweet_id"):
        if required not in names:
            raise ParseError(f"header lacks required column {required!r}", 1)
    has_ts = "timestamp" in names
    for row in reader:
        line_no = reader.line_num
        if None in row and row[None]:
            raise ParseError("too many fields", line_no)
        user = (row.get("user_id") or "").strip()
        tweet = (row.get("tweet_id") or "").strip()
        if not user:
            raise ParseError("missing user_id", line_no)
        if not tweet:
            raise ParseError("missing tweet_id", line_no)
        ts = _parse_timestamp(row.get("timestamp"), line_no) if has_ts else None
        yield ShareEvent(user, tweet, ts)


def _parse_jsonl(text: IO[str]) -> Iterator[ShareEvent]:
    for line_no, line in enumerate(text, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON ({exc.msg})", line_no) from None
        if not isinstance(obj, dict):
            raise ParseError("record is not a JSON object", line_no)
        user = obj.get("user_id")
        tweet = obj.get("tweet_id")
        if not isinstance(user, str) or not user.strip():
            raise ParseError("missing user_id", line_no)
        if not isinstance(tweet, str) or not tweet.strip():
            raise ParseError("missing tweet_id", line_no)
        ts = obj.get("timestamp")
        if ts is not None and not isinstance(ts, int):
            raise ParseError(f"invalid timestamp {ts!r}", line_no)
        yield ShareEvent(user.strip(), tweet.strip(), ts)


def parse_events(stream, fmt: str) -> Iterator[ShareEvent]:
    """Yield :class:`ShareEvent` records from a CSV or JSONL stream.

    ``stream`` may be a path, a text file object, or a binary file object
    (decoded as UTF-8).  Records are yielded in input order; malformed
    records raise :class:`ParseError` carrying the line number.
    """
    if fmt not in EVENT_FORMATS:
        raise ConfigError(f"unknown event format {fmt!r}; expected one of {EVENT_FORMATS}")
    text = _open_text(stream)
    parser = _parse_csv if fmt == "csv" else _parse_jsonl
    return parser(text)


def _apply_filters(
    user_tweets: dict[str, set[str]], cfg: FilterConfig
) -> tuple[set[str], set[str]]:
    """Return the surviving (users, tweets) under the configured filter mode."""
    audience: dict[str, int] = {}
    for tweets in user_tweets.values():
        for t in tweets:
            audience[t] = audience.get(t, 0) + 1

    # Tweet-audience filter evaluated on the raw (deduplicated) incidence.
    kept_tweets = {t for t, n in audience.items() if n >= cfg.min_tweet_audience}
    kept_users = {
        u for u, ts in user_tweets.items() if len(ts & kept_tweets) >= cfg.min_user_activity
    }

    if cfg.filter_mode == "fixed_point":
        while True:
            audience = {}
            for u in kept_users:
                for t in user_tweets[u] & kept_tweets:
                    audience[t] = audience.get(t, 0) + 1
            next_tweets = {t for t, n in audience.items() if n >= cfg.min_tweet_audience}
            next_users = {
                u
                for u in kept_users
                if len(user_tweets[u] & next_tweets) >= cfg.min_user_activity
            }
            if next_tweets == kept_tweets and next_users == kept_users:
                break
            kept_tweets, kept_users = next_tweets, next_users
            if not kept_tweets or not kept_users:
                break

    return kept_users, kept_tweets


def build_corpus(events: Iterable[ShareEvent], cfg: FilterConfig | None = None) -> ShareCorpus:
    """Build the filtered binary incidence corpus from share events.

    Duplicate (user, tweet) pairs collapse to a single entry before any
    filtering, so both thresholds count distinct entities.  Under
    ``single_pass`` the tweet-audience filter is applied to the raw
    incidence and the user-activity filter once to the remainder; note that
    removing low-activity users can leave some final columns below the
    audience threshold.  ``fixed_point`` iterates both filters until stable.
    """
    cfg = cfg or FilterConfig()
    user_tweets: dict[str, set[str]] = {}
    n_events = 0
    for ev in events:
        n_events += 1
        if not ev.user_id or not ev.tweet_id:
            raise DataError("event with empty user_id or tweet_id")
        user_tweets.setdefault(ev.user_id, set()).add(ev.tweet_id)
    if n_events == 0:
        raise DataError("no events to build a corpus from")

    kept_users, kept_tweets = _apply_filters(user_tweets, cfg)
    # a tweet whose every sharer was dropped by the user pass has no entries
    # left; it is not part of the corpus universe (this is not a second
    # audience pass, just not indexing empty columns)
    if kept_users:
        kept_tweets = set().union(*(user_tweets[u] & kept_tweets for u in kept_users))
    if not kept_users or not kept_tweets:
        raise EmptyCorpusError(
            "empty corpus: no users or tweets survive the activity filters "
            f"(min_user_activity={cfg.min_user_activity}, "
            f"min_tweet_audience={cfg.min_tweet_audience})"
        )

    users = tuple(sorted(kept_users))
    tweets = tuple(sorted(kept_tweets))
    user_index = {u: i for i, u in enumerate(users)}
    tweet_index = {t: j for j, t in enumerate(tweets)}

    rows, cols = [], []
    for u in users:
        i = user_index[u]
        for t in sorted(user_tweets[u] & kept_tweets):
            rows.append(i)
            cols.append(tweet_index[t])
    incidence = sparse.csr_array(
        (np.ones(len(rows), dtype=np.int32), (rows, cols)),
        shape=(len(users), len(tweets)),
    )
    incidence.sort_indices()

    return ShareCorpus(
        users=users,
        tweets=tweets,
        incidence=incidence,
        user_index=user_index,
        tweet_index=tweet_index,
    )
