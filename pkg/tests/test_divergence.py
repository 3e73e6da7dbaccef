import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from newsflow.divergence import jsd, jsd_distance, kld, validate_distribution
from newsflow.errors import DomainError, SupportError

from oracles import mp_jsd, mp_kld


def simplex_strategy(k=4):
    return st.lists(
        st.floats(1e-6, 1.0), min_size=k, max_size=k
    ).map(lambda v: (np.array(v) / np.sum(v)).tolist())


class TestValidation:
    def test_negative(self):
        with pytest.raises(DomainError):
            validate_distribution([-0.1, 1.1])

    def test_sum_off(self):
        with pytest.raises(DomainError):
            validate_distribution([0.5, 0.6])

    def test_too_short(self):
        with pytest.raises(DomainError):
            validate_distribution([1.0])

    def test_dimension_mismatch(self):
        with pytest.raises(DomainError):
            kld([0.5, 0.5], [0.3, 0.3, 0.4])


class TestKld:
    def test_identity_is_exact_zero(self):
        p = [0.3, 0.7]
        assert kld(p, p) == 0.0

    def test_one_bit(self):
        assert abs(kld([1.0, 0.0], [0.5, 0.5]) - 1.0) < 1e-15

    def test_half_half_vs_ninety_ten(self):
        # 0.5*log2(25/9), frozen from the arbitrary-precision oracle
        expected = mp_kld([0.5, 0.5], [0.9, 0.1])
        assert abs(expected - 0.7369655941662062) < 1e-12
        assert abs(kld([0.5, 0.5], [0.9, 0.1]) - expected) < 1e-12

    def test_unsupported_mass_raises(self):
        with pytest.raises(SupportError):
            kld([0.5, 0.5], [1.0, 0.0])

    def test_zero_mass_terms_skipped(self):
        # q may be zero wherever p is zero
        assert kld([0.0, 1.0], [0.0, 1.0]) == 0.0

    def test_against_oracle_100_pairs(self, rng):
        for _ in range(100):
            k = int(rng.integers(2, 12))
            p = rng.dirichlet(np.ones(k))
            q = rng.dirichlet(np.ones(k))
            assert abs(kld(p, q) - mp_kld(p, q)) < 1e-12

    def test_non_negative(self, rng):
        for _ in range(500):
            p = rng.dirichlet(np.ones(6))
            q = rng.dirichlet(np.ones(6))
            assert kld(p, q) >= 0.0


class TestJsd:
    def test_identity(self):
        assert jsd([0.2, 0.8], [0.2, 0.8]) == 0.0

    def test_disjoint_support_is_one_bit(self):
        assert abs(jsd([1.0, 0.0], [0.0, 1.0]) - 1.0) < 1e-15

    def test_against_oracle(self, rng):
        for _ in range(100):
            k = int(rng.integers(2, 12))
            p = rng.dirichlet(np.ones(k))
            q = rng.dirichlet(np.ones(k))
            assert abs(jsd(p, q) - mp_jsd(p, q)) < 1e-12

    def test_bounds_and_symmetry_bulk(self, rng):
        # 10^4 random pairs: 0 <= jsd <= 1 bit and symmetric
        for _ in range(10_000):
            k = int(rng.integers(2, 8))
            p = rng.dirichlet(np.ones(k))
            q = rng.dirichlet(np.ones(k))
            v = jsd(p, q)
            assert 0.0 <= v <= 1.0 + 1e-12
            assert abs(v - jsd(q, p)) < 1e-12

    @given(simplex_strategy(), simplex_strategy())
    @settings(max_examples=200)
    def test_property_symmetric(self, p, q):
        assert abs(jsd(p, q) - jsd(q, p)) < 1e-12


class TestJsdDistance:
    def test_identity(self):
        assert jsd_distance([0.4, 0.6], [0.4, 0.6]) == 0.0

    def test_disjoint(self):
        assert abs(jsd_distance([1.0, 0.0], [0.0, 1.0]) - 1.0) < 1e-12

    def test_triangle_inequality_bulk(self, rng):
        # 10^4 random simplex triples, slack 1e-9
        for _ in range(10_000):
            k = int(rng.integers(2, 6))
            p, q, r = rng.dirichlet(np.ones(k), 3)
            dpq = jsd_distance(p, q)
            dqr = jsd_distance(q, r)
            dpr = jsd_distance(p, r)
            assert dpr <= dpq + dqr + 1e-9

    def test_is_sqrt_of_jsd(self, rng):
        p, q = rng.dirichlet(np.ones(5), 2)
        assert abs(jsd_distance(p, q) - math.sqrt(jsd(p, q))) < 1e-15
