import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qgaudin.algebra import DeformParams, casimir, structure_matrix
from qgaudin.chain import (
    ChainState, casimir_tower, chain_from, cluster, cluster_jacobian, cluster_table, complementary_cluster,
    complementary_table, compose, deltas, exclusive_prefix, random_sites,
)
from qgaudin.errors import DomainError

# 2 + 3 e^{-0.1}, evaluated with 30-digit mpmath
SPM_Z01 = 4.7145122541078787195

sites_st = st.integers(2, 12).flatmap(
    lambda n: arrays(np.float64, (n, 3), elements=st.floats(-1, 1, allow_nan=False)))


def rand_chain(seed, n, z, kappa=1.0):
    return ChainState(random_sites(np.random.default_rng(seed), n, ((-1, 1), (-1, 1), (-1, 1))),
                      DeformParams(z, kappa))


def test_chain_state_validation():
    p = DeformParams(0.1, 1.0)
    with pytest.raises(DomainError):
        ChainState(np.zeros((0, 3)), p)
    with pytest.raises(DomainError):
        ChainState(np.zeros((2, 2)), p)
    with pytest.raises(DomainError, match="non-finite"):
        ChainState([[0.0, np.inf, 0.0]], p)
    c = ChainState([[1.0, 2.0, 3.0]], p)
    with pytest.raises(ValueError):
        c.sites[0, 0] = 5.0
    assert c == ChainState.from_flat([1.0, 2.0, 3.0], p)
    assert hash(c) == hash(ChainState.from_flat([1.0, 2.0, 3.0], p))


def test_cluster_m1_is_first_site():
    c = rand_chain(0, 5, 0.4)
    assert cluster(c, 1)[1:] == tuple(c.sites[0])


def test_cluster_undeformed_is_plain_sum():
    c = rand_chain(1, 6, 0.0)
    for m in range(1, 7):
        assert np.allclose(cluster(c, m)[1:], c.sites[:m].sum(axis=0), atol=1e-15)


def test_cluster_deformed_value():
    c = chain_from([(1, 2, 0), (0, 3, 0)], z=0.1)
    v = cluster(c, 2)
    assert v.s3 == 1.0
    assert v.splus == pytest.approx(SPM_Z01, abs=1e-15)
    assert v.sminus == 0.0


def test_cluster_range_errors():
    c = rand_chain(2, 4, 0.2)
    for bad in (0, 5):
        with pytest.raises(DomainError, match=r"valid range \[1, 4\]"):
            cluster(c, bad)
    with pytest.raises(DomainError, match=r"\[1, 3\]"):
        complementary_cluster(c, 4)
    with pytest.raises(DomainError):
        cluster_jacobian(c, 0)


def test_complementary_examples():
    c = rand_chain(3, 2, 0.5)
    v = complementary_cluster(c, 1)
    assert v.m == 1 and v[1:] == tuple(c.sites[1])
    c0 = rand_chain(4, 5, 0.0)
    assert np.allclose(complementary_cluster(c0, 2)[1:], c0.sites[2:].sum(axis=0), atol=1e-15)
    assert complementary_cluster(c0, 2).m == 3


@given(sites_st, st.floats(-1, 1, allow_nan=False))
def test_composition_and_split_independence(sites, z):
    c = ChainState(sites, DeformParams(z, 1.0))
    full = np.array(cluster(c, c.n)[1:])
    for m in range(1, c.n):
        comp = compose(cluster(c, m), complementary_cluster(c, m), z)
        assert comp.m == c.n
        assert np.max(np.abs(np.array(comp[1:]) - full)) <= 1e-13 * max(1.0, np.max(np.abs(full)))


@given(sites_st, st.floats(-1, 1, allow_nan=False), st.data())
def test_cluster_ignores_later_sites(sites, z, data):
    c = ChainState(sites, DeformParams(z, 1.0))
    m = data.draw(st.integers(1, c.n - 1))
    other = sites.copy()
    other[m:] += 1.2345
    assert cluster(c, m) == cluster(ChainState(other, c.params), m)


def test_coproduct_is_poisson_map():
    rng = np.random.default_rng(5)
    for _ in range(100):
        p = DeformParams(rng.uniform(-1, 1), rng.uniform(0, 1))
        c = ChainState(rng.uniform(-1, 1, (2, 3)), p)
        block = np.zeros((6, 6))
        block[:3, :3] = structure_matrix(p, c.sites[0])
        block[3:, 3:] = structure_matrix(p, c.sites[1])
        Jc = cluster_jacobian(c, 2)
        lhs = Jc @ block @ Jc.T
        rhs = structure_matrix(p, cluster(c, 2)[1:])
        assert np.max(np.abs(lhs - rhs)) <= 1e-12


def test_cluster_jacobian_examples():
    c0 = rand_chain(6, 4, 0.0)
    J = cluster_jacobian(c0, 3)
    expected = np.zeros((3, 12))
    for k in range(3):
        expected[:, 3 * k:3 * k + 3] = np.eye(3)
    assert np.array_equal(J, expected)
    c = rand_chain(7, 4, 0.6)
    J1 = cluster_jacobian(c, 1)
    assert np.array_equal(J1[:, :3], np.eye(3)) and not np.any(J1[:, 3:])


def test_cluster_jacobian_finite_differences():
    rng = np.random.default_rng(8)
    h = 1e-6
    for _ in range(100):
        p = DeformParams(rng.uniform(-1, 1), 1.0)
        n = int(rng.integers(1, 7))
        y = rng.uniform(-1, 1, 3 * n)
        m = int(rng.integers(1, n + 1))
        c = ChainState.from_flat(y, p)
        fd = np.array([
            (np.array(cluster(ChainState.from_flat(y + h * e, p), m)[1:])
             - np.array(cluster(ChainState.from_flat(y - h * e, p), m)[1:])) / (2 * h)
            for e in np.eye(3 * n)
        ]).T
        J = cluster_jacobian(c, m)
        assert np.max(np.abs(J - fd)) <= 1e-6 * max(1.0, np.max(np.abs(J)))


def test_casimir_tower_examples():
    c1 = rand_chain(9, 1, 0.3, 0.5)
    t1 = casimir_tower(c1)
    assert t1.shape == (1,) and t1[0] == pytest.approx(casimir(c1.params, c1.sites[0]), rel=1e-15)
    c = chain_from([(2, 0, 0), (0, 1, 1)], z=0.0, kappa=1.0)
    assert np.allclose(casimir_tower(c), [1.0, 2.0, 1.0], atol=1e-15)


def test_tables_match_single_cluster_calls():
    for n, z in ((1, 0.3), (5, -0.7), (40, 0.2)):
        c = rand_chain(n, n, z, 0.4)
        tab = cluster_table(c)
        for m in range(1, n + 1):
            assert np.allclose(tab[m - 1], cluster(c, m)[1:], rtol=1e-13, atol=1e-14)
        comp = complementary_table(c)
        assert comp.shape == (n - 1, 3)
        for m in range(1, n):
            assert np.allclose(comp[m - 1], complementary_cluster(c, m)[1:], rtol=1e-13, atol=1e-14)


def test_deltas_equal_full_cluster():
    c = rand_chain(10, 6, 0.25)
    assert tuple(deltas(c)) == cluster(c, 6)[1:]


def test_long_chain_prefix_is_compensated():
    rng = np.random.default_rng(11)
    s3 = rng.uniform(-1, 1, 5000) * 1e3 + 1e-3
    P = exclusive_prefix(s3)
    exact = [math.fsum(s3[:i]) for i in range(0, 5000, 499)]
    assert np.max(np.abs(P[::499] - exact)) <= 1e-12 * np.max(np.abs(exact))
    c = ChainState(np.column_stack([s3 * 1e-3, rng.uniform(0, 1, 5000), rng.uniform(0, 1, 5000)]),
                   DeformParams(0.01, 1.0))
    full = cluster(c, 5000)
    assert full.s3 == pytest.approx(math.fsum(c.sites[:, 0]), rel=1e-15)


def test_random_sites_respects_ranges():
    s = random_sites(np.random.default_rng(0), 1000, ((-1, 1), (0.1, 1), (-1, -0.1)))
    assert s.shape == (1000, 3)
    assert s[:, 1].min() >= 0.1 and s[:, 2].max() <= -0.1
    with pytest.raises(DomainError):
        random_sites(np.random.default_rng(0), 0)
