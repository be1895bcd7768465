"""Tick-driven discrete-event simulation of the VOD delivery pipeline.

Per tick: finish searches whose results arrive now (store-on-fetch into the
web cache), then generate requests. Each request goes

    web cache -> admission -> least-loaded application server -> session search

and lands in exactly one bucket: cache hit, dropped, served (by hop count),
expired, not found, or queue overflow.

Sessions are fixed windows of `session.duration_ticks`; the admitted
aggregate B(s) resets at each window boundary and every search must finish
before its window closes.
"""
from __future__ import annotations

import heapq
import math
import os
from dataclasses import asdict, dataclass, field, replace
from typing import Dict, List, Optional

import numpy as np

from .cache import LrfuCache
from .capacity import BandwidthDemand, SessionCapacity
from .popularity import ZipfCatalog
from .topology import (
    ContentPlacement, Outcome, SearchResult, SearchSession, TopologyConfig, bfs_distances, build_topology,
    place_content, session_search,
)

CHECK_ENV = "VODSIM_CHECK"


class ConfigError(ValueError):
    pass


@dataclass
class CatalogParams:
    n_videos: int = 1000
    alpha: float = 0.8


@dataclass
class CacheParams:
    capacity: int = 20
    lam: float = 0.5


@dataclass
class SessionParams:
    duration_ticks: int = 60
    total_ticks: int = 600


@dataclass
class CapacityParams:
    rate: float = 1e12  # C(s), bits/s
    loss_threshold: float = 0.1


@dataclass
class StreamParams:
    size_bits: float = 8e9
    duration_s: float = 2000.0

    @property
    def demand(self) -> BandwidthDemand:
        return BandwidthDemand(self.size_bits, self.duration_s)


@dataclass
class SimConfig:
    seed: int = 0
    topology: TopologyConfig = field(default_factory=lambda: TopologyConfig(14, 1))
    catalog: CatalogParams = field(default_factory=CatalogParams)
    cache: CacheParams = field(default_factory=CacheParams)
    session: SessionParams = field(default_factory=SessionParams)
    capacity: CapacityParams = field(default_factory=CapacityParams)
    stream: StreamParams = field(default_factory=StreamParams)
    replication: int = 1
    request_rate: float = 1.0  # requests per tick
    arrival: str = "fixed"  # or "poisson"
    # application server the web cache hands misses to; they are relayed
    # over the interconnect to the least-loaded server. None: no relay leg.
    ingress: Optional[int] = 0
    prewarm: bool = False
    queue_capacity: Optional[int] = None
    tick_unit: str = "1 s"

    def validate(self) -> List[str]:
        """Every constraint violation, as human-readable messages."""
        problems = []
        if not (isinstance(self.seed, int) and not isinstance(self.seed, bool) and self.seed >= 0):
            problems.append(f"seed must be a non-negative integer, got {self.seed!r}")
        c = self.catalog
        if not (isinstance(c.n_videos, int) and c.n_videos >= 1):
            problems.append(f"catalog.n_videos must be a positive integer, got {c.n_videos!r}")
        if not (0.0 < c.alpha <= 1.0):
            problems.append(f"catalog.alpha must be in (0,1], got {c.alpha!r}")
        if not (isinstance(self.cache.capacity, int) and self.cache.capacity >= 1):
            problems.append(f"cache.capacity must be a positive integer, got {self.cache.capacity!r}")
        if not self.cache.lam >= 0:
            problems.append(f"cache.lambda must be >= 0, got {self.cache.lam!r}")
        s = self.session
        if not (isinstance(s.duration_ticks, int) and s.duration_ticks >= 1):
            problems.append(f"session.duration_ticks must be a positive integer, got {s.duration_ticks!r}")
        if not isinstance(s.total_ticks, int) or s.total_ticks < max(1, s.duration_ticks):
            problems.append(
                f"session.total_ticks must be an integer >= session.duration_ticks, got {s.total_ticks!r}")
        if not self.capacity.rate > 0:
            problems.append(f"capacity.rate must be > 0, got {self.capacity.rate!r}")
        if not (0.0 < self.capacity.loss_threshold < 1.0):
            problems.append(f"capacity.loss_threshold must be in (0,1), got {self.capacity.loss_threshold!r}")
        if not (self.stream.size_bits > 0 and self.stream.duration_s > 0):
            problems.append("stream.size_bits and stream.duration_s must be > 0")
        if not (isinstance(self.replication, int) and self.replication >= 1):
            problems.append(f"replication must be a positive integer, got {self.replication!r}")
        if not self.request_rate > 0:
            problems.append(f"request_rate must be > 0, got {self.request_rate!r}")
        if self.arrival not in ("fixed", "poisson"):
            problems.append(f"arrival must be 'fixed' or 'poisson', got {self.arrival!r}")
        if self.ingress is not None and not (0 <= self.ingress < self.topology.num_app_servers):
            problems.append(
                f"ingress must name an application server in [0, {self.topology.num_app_servers}), "
                f"got {self.ingress!r}")
        if self.queue_capacity is not None and self.queue_capacity < 1:
            problems.append(f"queue_capacity must be >= 1, got {self.queue_capacity!r}")
        return problems

    def to_dict(self) -> dict:
        d = asdict(self)
        d["topology"] = {
            "num_app_servers": self.topology.num_app_servers,
            "db_per_app": self.topology.db_per_app,
            "interconnect": self.topology.interconnect.value,
        }
        d["cache"] = {"capacity": self.cache.capacity, "lambda": self.cache.lam}
        return d


@dataclass
class SimMetrics:
    requests: int = 0
    hits: int = 0
    misses: int = 0
    admitted: int = 0
    dropped: int = 0
    expired: int = 0
    not_found: int = 0
    queue_overflow: int = 0
    hop_histogram: Dict[int, int] = field(default_factory=dict)
    score: int = 0
    hit_ratio: float = 0.0
    bandwidth_series: List[float] = field(default_factory=list)  # B(s) at each session close
    session_requests: List[int] = field(default_factory=list)
    session_hits: List[int] = field(default_factory=list)

    @property
    def served(self) -> int:
        return sum(self.hop_histogram.values())

    @property
    def hit_ratio_series(self) -> List[float]:
        return [h / r if r else 0.0 for h, r in zip(self.session_hits, self.session_requests)]

    def mean_hops(self) -> float:
        served = self.served
        return score(self) / served if served else math.nan

    def modal_hop(self) -> Optional[int]:
        if not self.hop_histogram:
            return None
        return max(sorted(self.hop_histogram), key=lambda h: self.hop_histogram[h])

    def conservation_gap(self) -> int:
        accounted = self.served + self.dropped + self.expired + self.not_found + self.queue_overflow + self.hits
        return self.requests - accounted

    def to_dict(self) -> dict:
        d = asdict(self)
        d["hop_histogram"] = {str(h): c for h, c in sorted(self.hop_histogram.items())}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SimMetrics":
        d = dict(d)
        d["hop_histogram"] = {int(h): int(c) for h, c in d.get("hop_histogram", {}).items()}
        return cls(**d)


def score(metrics: SimMetrics) -> int:
    """Search cost: sum over the hop histogram of served requests times hops."""
    return sum(hop * count for hop, count in metrics.hop_histogram.items())


def within_budget(result: SearchResult, budget: int) -> SearchResult:
    """Outcome of the same search given only `budget` ticks before the deadline.

    `result` must come from an unbounded search. BFS pops nodes in depth
    order, so a budget only matters if it runs out before the level at which
    the unbounded search stopped.
    """
    stop_depth = result.elapsed - 1 if result.found else result.elapsed
    if stop_depth < budget:
        return result
    return SearchResult(Outcome.EXPIRED, elapsed=budget)


def _check_enabled() -> bool:
    return os.environ.get(CHECK_ENV, "").lower() not in ("", "0", "false", "no")


def _verify(m: SimMetrics, sess: SessionCapacity, tick: int) -> None:
    # explicit raises so the checks survive `python -O`
    if m.conservation_gap() != 0:
        raise AssertionError(f"tick {tick}: request conservation off by {m.conservation_gap()}")
    if m.admitted + m.dropped != m.misses:
        raise AssertionError(f"tick {tick}: admitted + dropped != offered")
    if sess.aggregate > sess.capacity:
        raise AssertionError(f"tick {tick}: B(s)={sess.aggregate} exceeds C(s)={sess.capacity}")


def run(config: SimConfig, check: Optional[bool] = None,
        placement: Optional[ContentPlacement] = None) -> SimMetrics:
    """Simulate `config`; identical configs give identical metrics.

    With check=True (default: the VODSIM_CHECK environment variable) request
    conservation and B(s) <= C(s) are asserted after every tick. `placement`
    replaces the seeded random content placement.
    """
    problems = config.validate()
    if problems:
        raise ConfigError("; ".join(problems))
    check = _check_enabled() if check is None else check

    place_seq, req_seq = np.random.SeedSequence(config.seed).spawn(2)
    req_rng = np.random.default_rng(req_seq)
    catalog = ZipfCatalog(config.catalog.n_videos, config.catalog.alpha)
    topo = build_topology(config.topology)
    if placement is None:
        placement = place_content(topo, catalog.n_videos, config.replication,
                                  np.random.default_rng(place_seq))
    cache = LrfuCache(config.cache.capacity, config.cache.lam)
    if config.prewarm:
        for video in range(1, min(catalog.n_videos, cache.capacity) + 1):
            cache.insert(video, 0)

    apps = list(topo.app_servers)
    n_apps = len(apps)
    if config.ingress is None:
        relay = {a: 0 for a in apps}
    else:
        relay = bfs_distances(topo, config.ingress)
    load = [0] * n_apps  # in-flight searches; app server ids are 0..A-1
    stream_rate = config.stream.demand.rate
    duration = config.session.duration_ticks
    unbounded = SearchSession(0, math.inf, 0, config.queue_capacity)
    memo: dict = {}

    m = SimMetrics()
    pending: list = []  # (finish_tick, seq, origin, video or None)
    seq = 0
    sess = SessionCapacity(config.capacity.rate)
    sess_requests = sess_hits = 0

    for tick in range(config.session.total_ticks):
        if tick and tick % duration == 0:
            m.bandwidth_series.append(sess.aggregate)
            m.session_requests.append(sess_requests)
            m.session_hits.append(sess_hits)
            sess = SessionCapacity(config.capacity.rate)
            sess_requests = sess_hits = 0
        t_start = tick - tick % duration

        while pending and pending[0][0] <= tick:
            finish, _, origin, video = heapq.heappop(pending)
            load[origin] -= 1
            if video is not None:
                cache.insert(video, finish)

        if config.arrival == "poisson":
            n_req = int(req_rng.poisson(config.request_rate))
        else:
            n_req = math.ceil((tick + 1) * config.request_rate) - math.ceil(tick * config.request_rate)
        ranks = catalog.sample(req_rng, n_req).tolist() if n_req else []

        for video in ranks:
            m.requests += 1
            sess_requests += 1
            if cache.reference(video, tick, insert=False):
                m.hits += 1
                sess_hits += 1
                continue
            m.misses += 1
            if not sess.admit(stream_rate):
                m.dropped += 1
                continue
            m.admitted += 1
            origin = min(range(n_apps), key=load.__getitem__)
            lead = relay[origin]
            budget = t_start + duration - (tick + lead)
            if budget <= 0:
                m.expired += 1
                continue
            key = (origin, video)
            full = memo.get(key)
            if full is None:
                full = session_search(topo, placement, video, replace(unbounded, origin=origin), 0)
                memo[key] = full
            result = within_budget(full, budget)
            if result.outcome is Outcome.FOUND:
                total = lead + result.hops
                m.hop_histogram[total] = m.hop_histogram.get(total, 0) + 1
            elif result.outcome is Outcome.EXPIRED:
                m.expired += 1
            elif result.outcome is Outcome.NOT_FOUND:
                m.not_found += 1
            else:
                m.queue_overflow += 1
            load[origin] += 1
            seq += 1
            finish = max(tick + lead + result.elapsed, tick + 1)
            heapq.heappush(pending, (finish, seq, origin, video if result.found else None))

        if check:
            _verify(m, sess, tick)

    m.bandwidth_series.append(sess.aggregate)
    m.session_requests.append(sess_requests)
    m.session_hits.append(sess_hits)
    m.hop_histogram = dict(sorted(m.hop_histogram.items()))
    m.score = score(m)
    m.hit_ratio = m.hits / m.requests if m.requests else 0.0
    return m


@dataclass(frozen=True)
class ClusterPoint:
    clusters: int
    viewers_per_cluster: int  # largest cluster
    per_cluster_bandwidth: float  # load at the largest cluster's head
    aggregate_bandwidth: float  # all clusters together
    unclustered_bandwidth: float  # one stream per viewer


def expected_distinct(pmf: np.ndarray, draws: int) -> float:
    """Expected number of distinct videos among `draws` independent requests."""
    if draws <= 0:
        return 0.0
    return math.fsum((-np.expm1(draws * np.log1p(-pmf))).tolist())


def run_cluster_sweep(catalog: ZipfCatalog, viewers: int, cluster_counts, per_cluster_rate: float,
                      interactive_fraction: float = 0.0) -> List[ClusterPoint]:
    """Bandwidth needed when viewers are grouped into clusters that share streams.

    Viewers are split as evenly as possible over k clusters. Inside a cluster
    all non-interactive viewers of the same video share one stream; an
    interactive viewer (pause/skip/seek) holds a stream of its own.
    """
    if viewers < 1:
        raise ValueError(f"viewers must be >= 1, got {viewers}")
    if not (0.0 <= interactive_fraction <= 1.0):
        raise ValueError(f"interactive_fraction must be in [0,1], got {interactive_fraction}")
    pmf = catalog.pmf()
    cache: Dict[int, float] = {}

    def cluster_load(size: int) -> float:
        if size not in cache:
            shared = expected_distinct(pmf, size - round(size * interactive_fraction))
            cache[size] = per_cluster_rate * (shared + round(size * interactive_fraction))
        return cache[size]

    series = []
    for k in cluster_counts:
        if k < 1:
            raise ValueError(f"cluster counts must be >= 1, got {k}")
        base, extra = divmod(viewers, k)
        largest = base + (1 if extra else 0)
        aggregate = extra * cluster_load(base + 1) + (k - extra) * cluster_load(base)
        series.append(ClusterPoint(k, largest, cluster_load(largest), aggregate,
                                   viewers * per_cluster_rate))
    return series
