"""Independent reference implementations and random inputs shared by the tests.

The reference implementations do not depend on vodsim.
"""
from collections import OrderedDict
from fractions import Fraction
from math import comb

import networkx as nx

from vodsim.topology import StorageTopology


class EagerLrfu:
    """LRFU applying the two-branch rule to every entry on every tick."""

    def __init__(self, capacity, lam):
        self.capacity = capacity
        self.factor = 2.0 ** -lam
        self.count = {}
        self.last = {}
        self.tick = None
        self.evicted = []

    def _advance(self, t):
        if self.tick is not None:
            for _ in range(t - self.tick):
                for k in self.count:
                    self.count[k] = self.factor * self.count[k]
        self.tick = t

    def reference(self, key, t):
        self._advance(t)
        if key in self.count:
            self.count[key] += 1.0
            self.last[key] = t
            return True
        if len(self.count) >= self.capacity:
            victim = min(self.count, key=lambda k: (self.count[k], self.last[k], k))
            del self.count[victim], self.last[victim]
            self.evicted.append(victim)
        self.count[key] = 1.0
        self.last[key] = t
        return False

    def counts_at(self, t):
        self._advance(t)
        return dict(self.count)


class ReferenceLfu:
    """Frequency since admission; ties to the least recently referenced, then key."""

    def __init__(self, capacity):
        self.capacity = capacity
        self.freq = {}
        self.last = {}
        self.evicted = []

    def reference(self, key, t):
        if key in self.freq:
            self.freq[key] += 1
            self.last[key] = t
            return True
        if len(self.freq) >= self.capacity:
            victim = min(self.freq, key=lambda k: (self.freq[k], self.last[k], k))
            del self.freq[victim], self.last[victim]
            self.evicted.append(victim)
        self.freq[key] = 1
        self.last[key] = t
        return False


class ReferenceLru:
    def __init__(self, capacity):
        self.capacity = capacity
        self.order = OrderedDict()
        self.evicted = []

    def reference(self, key, t):
        if key in self.order:
            self.order.move_to_end(key)
            return True
        if len(self.order) >= self.capacity:
            victim, _ = self.order.popitem(last=False)
            self.evicted.append(victim)
        self.order[key] = t
        return False


def binom_pmf_exact(n, rho, k):
    r = Fraction(rho)
    return comb(n, k) * r ** k * (1 - r) ** (n - k)


def binom_tail_exact(n, rho, k):
    return sum(binom_pmf_exact(n, rho, j) for j in range(k, n + 1))


def random_trace(rng, length, n_keys, max_gap=3):
    t = 0
    trace = []
    for _ in range(length):
        t += int(rng.integers(1, max_gap + 1))
        trace.append((t, int(rng.integers(0, n_keys))))
    return trace


def as_nx(topo):
    g = nx.Graph()
    g.add_nodes_from(topo.nodes)
    g.add_edges_from(topo.edges())
    return g


def random_topology(rng, max_apps=8, max_db=4):
    """Random connected app graph (spanning tree plus extra edges) with db leaves."""
    n_app = int(rng.integers(1, max_apps + 1))
    n_db = int(rng.integers(1, max_db + 1))
    edges = [(int(rng.integers(0, i)), i) for i in range(1, n_app)]
    for _ in range(int(rng.integers(0, n_app + 1))):
        a, b = (int(x) for x in rng.integers(0, n_app, 2))
        if a != b:
            edges.append((a, b))
    dbs = list(range(n_app, n_app + n_app * n_db))
    edges += [(i // n_db, dbs[i]) for i in range(len(dbs))]
    return StorageTopology.from_edges(range(n_app), dbs, edges)
