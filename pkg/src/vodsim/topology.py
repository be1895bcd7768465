"""Storage domain graph, content placement, and session-bounded BFS search.

Node ids are integers. Application servers come first (0..A-1); database
leaves follow, grouped by the application server they hang off.
"""
from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

import numpy as np


class Interconnect(str, enum.Enum):
    RING = "ring"
    CHAIN = "chain"
    COMPLETE = "complete"


class UnreachableError(ValueError):
    pass


@dataclass(frozen=True)
class TopologyConfig:
    num_app_servers: int
    db_per_app: int
    interconnect: Interconnect = Interconnect.RING

    def __post_init__(self):
        if self.num_app_servers < 1:
            raise ValueError(f"num_app_servers must be >= 1, got {self.num_app_servers}")
        if self.db_per_app < 1:
            raise ValueError(f"db_per_app must be >= 1, got {self.db_per_app}")
        object.__setattr__(self, "interconnect", Interconnect(self.interconnect))

    @property
    def label(self) -> str:
        return f"{self.num_app_servers}x{self.db_per_app}"


@dataclass(frozen=True)
class StorageTopology:
    app_servers: Tuple[int, ...]
    db_nodes: Tuple[int, ...]
    adjacency: Dict[int, Tuple[int, ...]]
    config: Optional[TopologyConfig] = None

    @classmethod
    def from_edges(cls, app_servers: Iterable[int], db_nodes: Iterable[int],
                   edges: Iterable[Tuple[int, int]], config=None) -> "StorageTopology":
        app_servers = tuple(sorted(app_servers))
        db_nodes = tuple(sorted(db_nodes))
        nodes = set(app_servers) | set(db_nodes)
        if len(nodes) != len(app_servers) + len(db_nodes):
            raise ValueError("a node cannot be both an application server and a database node")
        nbrs: Dict[int, set] = {n: set() for n in nodes}
        for a, b in edges:
            if a == b:
                raise ValueError(f"self-loop on node {a}")
            if a not in nbrs or b not in nbrs:
                raise ValueError(f"edge ({a}, {b}) references an unknown node")
            nbrs[a].add(b)
            nbrs[b].add(a)
        adjacency = {n: tuple(sorted(nbrs[n])) for n in sorted(nodes)}
        return cls(app_servers, db_nodes, adjacency, config)

    @property
    def nodes(self) -> Tuple[int, ...]:
        return tuple(self.adjacency)

    def edges(self) -> List[Tuple[int, int]]:
        return [(a, b) for a, nb in self.adjacency.items() for b in nb if a < b]

    def num_edges(self) -> int:
        return sum(len(nb) for nb in self.adjacency.values()) // 2

    def is_connected(self) -> bool:
        if not self.adjacency:
            return True
        start = next(iter(self.adjacency))
        return len(bfs_distances(self, start)) == len(self.adjacency)

    def to_edge_list(self) -> str:
        """Plain `node_a node_b` lines, one per undirected edge."""
        return "".join(f"{a} {b}\n" for a, b in self.edges())


def build_topology(config: TopologyConfig) -> StorageTopology:
    """Wire application servers per the interconnect and hang db leaves off each."""
    n_app, n_db = config.num_app_servers, config.db_per_app
    apps = list(range(n_app))
    edges = []
    if config.interconnect is Interconnect.COMPLETE:
        edges += [(a, b) for a in apps for b in apps if a < b]
    else:
        edges += [(a, a + 1) for a in range(n_app - 1)]
        if config.interconnect is Interconnect.RING and n_app > 2:
            edges.append((n_app - 1, 0))
    dbs = []
    for a in apps:
        for j in range(n_db):
            node = n_app + a * n_db + j
            dbs.append(node)
            edges.append((a, node))
    return StorageTopology.from_edges(apps, dbs, edges, config)


def bfs_distances(topology: StorageTopology, source: int) -> Dict[int, int]:
    dist = {source: 0}
    queue = deque([source])
    while queue:
        v = queue.popleft()
        for w in topology.adjacency[v]:
            if w not in dist:
                dist[w] = dist[v] + 1
                queue.append(w)
    return dist


def hop_distance(topology: StorageTopology, a: int, b: int) -> int:
    for n in (a, b):
        if n not in topology.adjacency:
            raise ValueError(f"node {n} is not in the topology")
    dist = bfs_distances(topology, a)
    if b not in dist:
        raise UnreachableError(f"node {b} is unreachable from node {a}")
    return dist[b]


@dataclass(frozen=True)
class ContentPlacement:
    holders: Dict[int, FrozenSet[int]]
    replication: int

    def holders_of(self, video: int) -> FrozenSet[int]:
        return self.holders.get(video, frozenset())

    def load(self) -> Dict[int, int]:
        """Number of videos stored on each db node that holds anything."""
        counts: Dict[int, int] = {}
        for nodes in self.holders.values():
            for n in nodes:
                counts[n] = counts.get(n, 0) + 1
        return counts

    def with_replica(self, video: int, node: int) -> "ContentPlacement":
        holders = dict(self.holders)
        holders[video] = self.holders_of(video) | {node}
        return ContentPlacement(holders, self.replication)


def place_content(topology: StorageTopology, catalog_size: int, replication: int,
                  rng: np.random.Generator) -> ContentPlacement:
    """Put each video (ids 1..catalog_size) on distinct db nodes chosen uniformly."""
    if replication < 1:
        raise ValueError(f"replication must be >= 1, got {replication}")
    nodes = np.asarray(topology.db_nodes)
    r = min(replication, len(nodes))
    holders = {}
    for video in range(1, catalog_size + 1):
        picked = rng.choice(nodes, size=r, replace=False) if r < len(nodes) else nodes
        holders[video] = frozenset(int(n) for n in picked)
    return ContentPlacement(holders, replication)


class Outcome(str, enum.Enum):
    FOUND = "found"
    NOT_FOUND = "not_found"
    EXPIRED = "expired"
    QUEUE_OVERFLOW = "queue_overflow"


@dataclass(frozen=True)
class SearchSession:
    t_start: int
    duration: float
    origin: int
    queue_capacity: Optional[int] = None  # None: one slot per node

    def __post_init__(self):
        if not self.duration > 0:
            raise ValueError(f"session duration must be > 0, got {self.duration}")
        if self.queue_capacity is not None and self.queue_capacity < 1:
            raise ValueError(f"queue_capacity must be >= 1, got {self.queue_capacity}")


@dataclass(frozen=True)
class SearchResult:
    outcome: Outcome
    node: Optional[int] = None
    hops: Optional[int] = None
    elapsed: int = 0  # ticks consumed, one per BFS level
    examined: int = 0  # node pops + holder checks on newly reached nodes

    @property
    def found(self) -> bool:
        return self.outcome is Outcome.FOUND


def session_search(topology: StorageTopology, placement: ContentPlacement, video: int,
                   session: SearchSession, now: int) -> SearchResult:
    """Breadth-first search from the session's application server for a holder of `video`.

    Each BFS level costs one tick. Before a node is expanded the clock
    (now + its depth) is compared with the session deadline; a search that
    runs past it is reported as expired. Neighbors are expanded in ascending
    id order, which fixes the choice among equidistant holders.
    """
    origin = session.origin
    if origin not in topology.adjacency or origin not in topology.app_servers:
        raise ValueError(f"origin {origin} is not an application server of this topology")
    if now < session.t_start:
        raise ValueError(f"search at tick {now} precedes session start {session.t_start}")
    holders = placement.holders_of(video)
    deadline = session.t_start + session.duration
    capacity = session.queue_capacity or len(topology.adjacency)

    depth = {origin: 0}
    queue = deque([origin])
    examined = 0
    elapsed = 0
    while queue:
        v = queue.popleft()
        examined += 1
        d = depth[v]
        elapsed = d
        if now + d >= deadline:
            return SearchResult(Outcome.EXPIRED, elapsed=d, examined=examined)
        for w in topology.adjacency[v]:
            if w in depth:
                continue
            examined += 1
            if w in holders:
                return SearchResult(Outcome.FOUND, w, d + 1, elapsed=d + 1, examined=examined)
            if len(queue) >= capacity:
                return SearchResult(Outcome.QUEUE_OVERFLOW, elapsed=d, examined=examined)
            depth[w] = d + 1
            queue.append(w)
    return SearchResult(Outcome.NOT_FOUND, elapsed=elapsed, examined=examined)


def diameter(topology: StorageTopology, nodes: Optional[Iterable[int]] = None) -> int:
    """Largest finite hop distance among `nodes` (default: every node)."""
    nodes = list(topology.adjacency if nodes is None else nodes)
    best = 0
    for a in nodes:
        dist = bfs_distances(topology, a)
        best = max([best] + [dist[b] for b in nodes if b in dist])
    return best

