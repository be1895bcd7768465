"""Bandwidth demand, per-session admission, and the enthusiastic-server binomial model."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, List, Optional

from .popularity import ZipfCatalog, pmf_exact


@dataclass(frozen=True)
class BandwidthDemand:
    """A (size, duration) pair; the rate it implies is size/duration.

    `rank` is the popularity rank of the requested video when known, used by
    the popularity-weighted aggregate.
    """

    size: float  # bits
    duration: float  # seconds
    rank: Optional[int] = None

    def __post_init__(self):
        if self.duration == 0:
            raise ValueError("duration must be nonzero")
        if self.size <= 0 or self.duration < 0:
            raise ValueError(f"size and duration must be positive, got ({self.size}, {self.duration})")

    @property
    def rate(self) -> float:
        return self.size / self.duration


def bandwidth_demand(d: BandwidthDemand) -> float:
    return d.rate


@dataclass(frozen=True)
class EnthusiasmModel:
    n_servers: int
    rho: float = 0.5
    loss_threshold: float = 0.1

    def __post_init__(self):
        if self.n_servers < 1:
            raise ValueError(f"n_servers must be >= 1, got {self.n_servers}")
        if not (0.0 <= self.rho <= 1.0):
            raise ValueError(f"rho must be in [0,1], got {self.rho}")
        if not (0.0 < self.loss_threshold < 1.0):
            raise ValueError(f"loss_threshold must be in (0,1), got {self.loss_threshold}")


@dataclass(frozen=True)
class AggregateDemand:
    plain: float  # sum of miss rates, used for admission
    cache_weighted: float  # sum_i sum_{j<=C} p_N(j) * rate_i
    approx: Optional[float]  # loss_threshold * C^(1-alpha) * sum_i p_N(rank_i) * rate_i


def aggregate_demand(misses: Iterable[BandwidthDemand], model: EnthusiasmModel,
                     cache_size: int, catalog: ZipfCatalog) -> AggregateDemand:
    """Aggregate the bandwidth of a session's cache-miss stream.

    `approx` is None when any miss lacks a popularity rank.
    """
    misses = list(misses)
    if not misses:
        return AggregateDemand(0.0, 0.0, 0.0)
    plain = math.fsum(m.rate for m in misses)
    top = min(cache_size, catalog.n_videos)
    cache_mass = math.fsum(pmf_exact(catalog, j) for j in range(1, top + 1))
    approx = None
    if all(m.rank is not None for m in misses):
        scale = model.loss_threshold * cache_size ** (1.0 - catalog.alpha)
        approx = scale * math.fsum(pmf_exact(catalog, m.rank) * m.rate for m in misses)
    return AggregateDemand(plain, cache_mass * plain, approx)


class SessionCapacity:
    """Admission state for one session: admit while B(s) + incoming <= C(s)."""

    def __init__(self, capacity: float, aggregate: float = 0.0):
        if capacity <= 0:
            raise ValueError(f"capacity must be > 0, got {capacity}")
        if aggregate < 0:
            raise ValueError(f"aggregate must be >= 0, got {aggregate}")
        self.capacity = capacity
        self.aggregate = aggregate
        self.admitted = 0
        self.dropped = 0

    @property
    def offered(self) -> int:
        return self.admitted + self.dropped

    def admit(self, incoming: float) -> bool:
        if incoming < 0:
            raise ValueError(f"incoming rate must be >= 0, got {incoming}")
        if self.aggregate + incoming <= self.capacity:
            self.aggregate += incoming
            self.admitted += 1
            return True
        self.dropped += 1
        return False


def admit(session: SessionCapacity, incoming: float) -> bool:
    return session.admit(incoming)


_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_S0, _S1, _S2, _S3, _S4 = 1 / 12, 1 / 360, 1 / 1260, 1 / 1680, 1 / 1188


def _stirlerr(n: int) -> float:
    """log(n!) - log(sqrt(2 pi n) (n/e)^n)."""
    if n <= 15:
        return math.lgamma(n + 1.0) - (n + 0.5) * math.log(n) + n - _LOG_SQRT_2PI
    nn = float(n) * n
    if n > 500:
        return (_S0 - _S1 / nn) / n
    if n > 80:
        return (_S0 - (_S1 - _S2 / nn) / nn) / n
    if n > 35:
        return (_S0 - (_S1 - (_S2 - _S3 / nn) / nn) / nn) / n
    return (_S0 - (_S1 - (_S2 - (_S3 - _S4 / nn) / nn) / nn) / nn) / n


def _bd0(x: float, np_: float) -> float:
    """x log(x/np) + np - x without cancellation when x is close to np."""
    if abs(x - np_) < 0.1 * (x + np_):
        v = (x - np_) / (x + np_)
        s = (x - np_) * v
        ej = 2.0 * x * v
        v2 = v * v
        j = 1
        while True:
            ej *= v2
            s1 = s + ej / (2 * j + 1)
            if s1 == s:
                return s1
            s = s1
            j += 1
    return x * math.log(x / np_) + np_ - x


def _log_binom_pmf(n: int, rho: float, k: int) -> float:
    # saddle-point form with Stirling-series corrections, stable for large n
    q = 1.0 - rho
    if rho == 0.0:
        return 0.0 if k == 0 else -math.inf
    if q == 0.0:
        return 0.0 if k == n else -math.inf
    if k == 0:
        return n * math.log1p(-rho)
    if k == n:
        return n * math.log(rho)
    lc = (_stirlerr(n) - _stirlerr(k) - _stirlerr(n - k)
          - _bd0(k, n * rho) - _bd0(n - k, n * q))
    return lc + 0.5 * math.log(n / (2.0 * math.pi * k * (n - k)))


def enthusiastic_pmf(model: EnthusiasmModel, k: int) -> float:
    """P(exactly k of the N storage servers are enthusiastic)."""
    if not (0 <= k <= model.n_servers):
        raise ValueError(f"k must be in [0, {model.n_servers}], got {k}")
    return math.exp(_log_binom_pmf(model.n_servers, model.rho, k))


def enthusiastic_pmf_table(model: EnthusiasmModel) -> List[float]:
    return [enthusiastic_pmf(model, k) for k in range(model.n_servers + 1)]


def tail_probability(model: EnthusiasmModel, k: int) -> float:
    """P(at least k servers are enthusiastic)."""
    if k <= 0:
        return 1.0
    if k > model.n_servers:
        return 0.0
    return min(1.0, math.fsum(enthusiastic_pmf(model, j) for j in range(k, model.n_servers + 1)))


def min_active_servers(model: EnthusiasmModel, target: float) -> int:
    """Largest k' such that P(at least k' servers are enthusiastic) >= target.

    This is the tightest server count the session can still rely on at the
    requested confidence.
    """
    if not (0.0 < target < 1.0):
        raise ValueError(f"target must be in (0,1), got {target}")
    tail = 0.0
    for k in range(model.n_servers, -1, -1):
        tail += enthusiastic_pmf(model, k)
        if tail >= target:
            return k
    return 0
