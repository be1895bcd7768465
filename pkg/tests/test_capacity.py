from fractions import Fraction

import mpmath
import numpy as np
import pytest

from oracles import binom_pmf_exact, binom_tail_exact
from vodsim.capacity import (
    BandwidthDemand, EnthusiasmModel, SessionCapacity, admit, aggregate_demand, bandwidth_demand,
    enthusiastic_pmf, enthusiastic_pmf_table, min_active_servers, tail_probability,
)
from vodsim.popularity import ZipfCatalog


class TestBandwidthDemand:
    def test_rate(self):
        assert bandwidth_demand(BandwidthDemand(8e9, 2000)) == 4e6

    def test_zero_duration(self):
        with pytest.raises(ValueError, match="nonzero"):
            BandwidthDemand(8e9, 0)

    def test_negative(self):
        with pytest.raises(ValueError):
            BandwidthDemand(-1, 10)

    @pytest.mark.parametrize("scale", [0.5, 3.0, 1e6])
    def test_scale_invariant(self, scale):
        base = BandwidthDemand(8e9, 2000).rate
        assert BandwidthDemand(8e9 * scale, 2000 * scale).rate == pytest.approx(base, rel=1e-15)


class TestAdmission:
    def test_fits_exactly(self):
        s = SessionCapacity(10.0, 9.0)
        assert admit(s, 1.0) is True
        assert s.aggregate == 10.0

    def test_overflows(self):
        s = SessionCapacity(10.0, 9.0)
        assert admit(s, 1.5) is False
        assert s.aggregate == 9.0 and s.dropped == 1

    def test_bad_values(self):
        with pytest.raises(ValueError):
            SessionCapacity(0)
        with pytest.raises(ValueError):
            SessionCapacity(5, -1)
        with pytest.raises(ValueError):
            SessionCapacity(5).admit(-1)

    @pytest.mark.parametrize("seed", range(10))
    def test_conservation(self, seed):
        rng = np.random.default_rng(seed)
        s = SessionCapacity(float(rng.uniform(10, 100)))
        offered = rng.uniform(0, 8, 200)
        for i, x in enumerate(offered, 1):
            s.admit(float(x))
            assert s.aggregate <= s.capacity
            assert s.admitted + s.dropped == i == s.offered


class TestEnthusiasm:
    def test_half_of_ten(self):
        m = EnthusiasmModel(10, 0.5)
        assert enthusiastic_pmf(m, 6) == pytest.approx(210 / 1024, rel=1e-14)

    @pytest.mark.parametrize("n", [1, 2, 5, 13, 30])
    @pytest.mark.parametrize("rho", ["0.1", "0.5", "0.73", "0.99"])
    def test_against_rationals(self, n, rho):
        m = EnthusiasmModel(n, float(rho))
        rho_q = Fraction(rho)
        for k in range(n + 1):
            exact = float(binom_pmf_exact(n, rho_q, k))
            assert enthusiastic_pmf(m, k) == pytest.approx(exact, rel=1e-12)
            assert tail_probability(m, k) == pytest.approx(float(binom_tail_exact(n, rho_q, k)), rel=1e-12)

    @pytest.mark.parametrize("n", [1, 10, 100, 1000, 10_000])
    @pytest.mark.parametrize("rho", [0.0, 0.01, 0.3, 0.5, 0.9, 1.0])
    def test_sums_to_one(self, n, rho):
        total = mpmath.fsum(enthusiastic_pmf_table(EnthusiasmModel(n, rho)))
        assert abs(total - 1) <= 1e-12

    def test_degenerate_rho(self):
        assert enthusiastic_pmf(EnthusiasmModel(4, 0.0), 0) == 1.0
        assert enthusiastic_pmf(EnthusiasmModel(4, 1.0), 4) == 1.0
        assert enthusiastic_pmf(EnthusiasmModel(4, 1.0), 3) == 0.0

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            enthusiastic_pmf(EnthusiasmModel(4), 5)
        with pytest.raises(ValueError):
            EnthusiasmModel(0)
        with pytest.raises(ValueError):
            EnthusiasmModel(4, 1.5)


class TestMinActiveServers:
    def test_example(self):
        assert min_active_servers(EnthusiasmModel(10, 0.5), 0.35) == 6

    def test_limits(self):
        m = EnthusiasmModel(10, 0.5)
        assert min_active_servers(m, 1e-12) == 10
        assert min_active_servers(m, 1 - 1e-12) == 0

    def test_definition(self):
        m = EnthusiasmModel(25, 0.4)
        for target in np.linspace(0.01, 0.99, 50):
            k = min_active_servers(m, float(target))
            assert float(binom_tail_exact(25, Fraction(0.4), k)) >= target
            if k < 25:
                assert float(binom_tail_exact(25, Fraction(0.4), k + 1)) < target

    @pytest.mark.parametrize("n", [5, 14, 30, 200])
    def test_monotone_in_target(self, n):
        m = EnthusiasmModel(n, 0.5)
        ks = [min_active_servers(m, t) for t in np.linspace(0.001, 0.999, 200)]
        assert all(b <= a for a, b in zip(ks, ks[1:]))

    @pytest.mark.parametrize("target", [0.0, 1.0, -0.1])
    def test_bad_target(self, target):
        with pytest.raises(ValueError):
            min_active_servers(EnthusiasmModel(5), target)


class TestAggregate:
    def _misses(self, seed=3, count=100):
        cat = ZipfCatalog(1000, 0.8)
        ranks = cat.sample(np.random.default_rng(seed), count)
        rng = np.random.default_rng(seed + 1)
        return cat, [BandwidthDemand(float(rng.uniform(1e9, 9e9)), float(rng.uniform(600, 4000)), int(r))
                     for r in ranks]

    def test_against_high_precision_sum(self):
        cat, misses = self._misses()
        model = EnthusiasmModel(14, 0.5, 0.1)
        got = aggregate_demand(misses, model, 20, cat)
        with mpmath.workdps(40):
            norm = mpmath.fsum(mpmath.mpf(j) ** -0.8 for j in range(1, 1001))
            p = lambda j: mpmath.mpf(j) ** -0.8 / norm
            rates = [mpmath.mpf(m.size) / mpmath.mpf(m.duration) for m in misses]
            plain = mpmath.fsum(rates)
            approx = mpmath.mpf("0.1") * mpmath.mpf(20) ** mpmath.mpf("0.2") * mpmath.fsum(
                p(m.rank) * r for m, r in zip(misses, rates))
            weighted = mpmath.fsum(p(j) for j in range(1, 21)) * plain
        assert got.plain == pytest.approx(float(plain), rel=1e-9)
        assert got.approx == pytest.approx(float(approx), rel=1e-9)
        assert got.cache_weighted == pytest.approx(float(weighted), rel=1e-9)

    def test_empty(self):
        got = aggregate_demand([], EnthusiasmModel(3), 5, ZipfCatalog(10, 0.5))
        assert (got.plain, got.cache_weighted, got.approx) == (0.0, 0.0, 0.0)

    def test_missing_rank(self):
        got = aggregate_demand([BandwidthDemand(1e9, 10)], EnthusiasmModel(3), 5, ZipfCatalog(10, 0.5))
        assert got.approx is None and got.plain == 1e8

    def test_additive(self):
        cat, misses = self._misses(seed=8, count=60)
        model = EnthusiasmModel(8)
        whole = aggregate_demand(misses, model, 20, cat)
        left = aggregate_demand(misses[:25], model, 20, cat)
        right = aggregate_demand(misses[25:], model, 20, cat)
        for field in ("plain", "cache_weighted", "approx"):
            assert getattr(whole, field) == pytest.approx(getattr(left, field) + getattr(right, field), rel=1e-12)
