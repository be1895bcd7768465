"""Zipf-like request popularity for a video catalog.

Videos are identified by their popularity rank, 1 being the most requested.
The exact normalized pmf drives sampling; the asymptotic cumulative forms are
kept separate for model analysis.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class UnsupportedAsymptoteError(ValueError):
    """Raised when an asymptotic form is evaluated at alpha == 1."""


@dataclass(frozen=True)
class ZipfCatalog:
    n_videos: int
    alpha: float
    norm: float = field(init=False, repr=False)
    _cdf: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n_videos < 1:
            raise ValueError(f"n_videos must be >= 1, got {self.n_videos}")
        if not (0.0 < self.alpha <= 1.0):
            raise ValueError(f"alpha must be in (0,1], got {self.alpha}")
        weights = np.arange(1, self.n_videos + 1, dtype=np.float64) ** -self.alpha
        norm = math.fsum(weights)
        cdf = np.cumsum(weights / norm)
        # cumsum drift: pin the last bucket so every u in [0,1) maps to a rank
        cdf[-1] = 1.0
        cdf.flags.writeable = False
        object.__setattr__(self, "norm", norm)
        object.__setattr__(self, "_cdf", cdf)

    @property
    def delta(self) -> float:
        """Coefficient of the asymptotic cumulative form, (1-alpha)/N^(1-alpha)."""
        _require_asymptotic(self)
        return (1.0 - self.alpha) / self.n_videos ** (1.0 - self.alpha)

    def pmf(self) -> np.ndarray:
        """The full pmf as an array indexed by rank - 1."""
        return np.arange(1, self.n_videos + 1, dtype=np.float64) ** -self.alpha / self.norm

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draw `size` ranks by inverse CDF over the exact pmf."""
        u = rng.random(size)
        return np.searchsorted(self._cdf, u, side="right") + 1


def _require_asymptotic(catalog: ZipfCatalog) -> None:
    if catalog.alpha >= 1.0:
        raise UnsupportedAsymptoteError(
            "asymptotic cumulative form is undefined for alpha == 1 (strict Zipf)"
        )


def _check_rank(catalog: ZipfCatalog, rank: int) -> None:
    if not (1 <= rank <= catalog.n_videos):
        raise ValueError(f"rank must be in [1, {catalog.n_videos}], got {rank}")


def pmf_exact(catalog: ZipfCatalog, rank: int) -> float:
    _check_rank(catalog, rank)
    return rank ** -catalog.alpha / catalog.norm


def psi_cumulative(catalog: ZipfCatalog, k: int) -> float:
    """Asymptotic probability that a request hits one of the k most popular videos."""
    _check_rank(catalog, k)
    _require_asymptotic(catalog)
    return (k / catalog.n_videos) ** (1.0 - catalog.alpha)


def p_unpopular(catalog: ZipfCatalog, k_popular: int) -> float:
    """Probability that a request falls outside the k_popular most popular videos."""
    return 1.0 - psi_cumulative(catalog, k_popular)


def sample_rank(catalog: ZipfCatalog, rng: np.random.Generator) -> int:
    return int(catalog.sample(rng, 1)[0])
