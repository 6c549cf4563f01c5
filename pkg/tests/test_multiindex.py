import math

import numpy as np
import pytest

from sphereopt.multiindex import (MultiIndex, basis_catalog,
                                  dense_number_state, dense_symmetrizer,
                                  enumerate_multiindices, number_state_overlap,
                                  sym_dimension)


def test_multiindex_basics():
    mi = MultiIndex((2, 0, 1))
    assert mi.degree == 3
    assert len(mi) == 3
    assert mi[0] == 2 and mi[2] == 1
    assert tuple(mi) == (2, 0, 1)
    assert mi == (2, 0, 1)
    assert mi + MultiIndex((0, 1, 0)) == (2, 1, 1)
    assert mi.shifted(1, 2) == (2, 2, 1)
    assert mi.factorial() == 2
    assert MultiIndex((3, 1)).factorial() == 6


def test_multiindex_rejects_negative():
    with pytest.raises(ValueError):
        MultiIndex((1, -1))
    with pytest.raises(ValueError):
        MultiIndex((0, 2)).shifted(1, -3)


def test_multiindex_ordering_graded_then_x1_major():
    a = MultiIndex((1, 0))
    b = MultiIndex((0, 2))
    assert a < b  # lower degree first
    assert MultiIndex((2, 0)) < MultiIndex((1, 1)) < MultiIndex((0, 2))
    listed = enumerate_multiindices(3, 3)
    assert listed == sorted(listed)


def test_enumerate_multiindices_counts_and_order():
    assert [tuple(m) for m in enumerate_multiindices(2, 2)] == [
        (2, 0), (1, 1), (0, 2)]
    for n in (1, 2, 3, 4):
        for d in (0, 1, 2, 5):
            got = enumerate_multiindices(n, d)
            assert len(got) == math.comb(n + d - 1, d)
            assert len(set(got)) == len(got)
            assert all(m.degree == d for m in got)


def test_sym_dimension_matches_binomial():
    for n in (1, 2, 3, 5, 8):
        for level in (0, 1, 2, 7):
            assert sym_dimension(n, level) == math.comb(level + n - 1, level)
    with pytest.raises(ValueError):
        sym_dimension(0, 2)
    with pytest.raises(ValueError):
        sym_dimension(3, -1)


def test_basis_catalog_positions_roundtrip():
    cat = basis_catalog(3, 4)
    assert len(cat.indices) == sym_dimension(3, 4)
    for pos, mi in enumerate(cat.indices):
        assert cat.position[mi] == pos
        assert tuple(cat.expmat[pos]) == mi.exponents
    assert cat.expmat.sum(axis=1).tolist() == [4] * len(cat.indices)


def test_number_state_overlap_small_values():
    # l = 1, n = 2: the only split of k = (1,1) is (1,0)+(0,1) twice,
    # each with weight sqrt(1/2).
    w = number_state_overlap((1, 0), (0, 1), (1, 1))
    assert w == pytest.approx(math.sqrt(0.5), abs=1e-15)
    assert number_state_overlap((1, 0), (1, 0), (2, 0)) == pytest.approx(
        math.sqrt(1.0), abs=1e-15)
    # mismatched split is exactly zero
    assert number_state_overlap((1, 0), (1, 0), (1, 1)) == 0.0


def test_number_state_overlap_rows_are_unit_vectors():
    # For every k of degree 2l, the overlaps over all (i, j) splits of k
    # form a unit vector.
    for n, level in ((2, 3), (3, 2), (4, 2)):
        cat_l = basis_catalog(n, level)
        for k in enumerate_multiindices(n, 2 * level):
            total = 0.0
            for i in cat_l.indices:
                for j in cat_l.indices:
                    total += number_state_overlap(i, j, k) ** 2
            assert total == pytest.approx(1.0, abs=1e-12)


def test_number_state_overlap_validates_degrees():
    with pytest.raises(ValueError):
        number_state_overlap((1, 0), (2, 0), (3, 0))
    with pytest.raises(ValueError):
        number_state_overlap((1, 0), (1, 0), (1, 1, 0))
    with pytest.raises(ValueError):
        number_state_overlap((1, 0), (1, 0), (3, 0))


def test_dense_number_state_matches_product_expansion():
    # <mi | x^{(x)l}> = sqrt(l!/mi!) x^mi, checked against explicit
    # Kronecker powers.
    rng = np.random.default_rng(5)
    for n, level in ((2, 3), (3, 2)):
        x = rng.standard_normal(n)
        xl = np.array([1.0])
        for _ in range(level):
            xl = np.kron(xl, x)
        for mi in enumerate_multiindices(n, level):
            expect = math.sqrt(math.factorial(level) / mi.factorial())
            expect *= float(np.prod(x ** np.array(mi.exponents)))
            assert float(dense_number_state(mi) @ xl) == pytest.approx(
                expect, abs=1e-12)


def test_dense_number_states_are_orthonormal():
    for n, level in ((2, 3), (3, 2)):
        states = [dense_number_state(mi)
                  for mi in enumerate_multiindices(n, level)]
        G = np.array([[si @ sj for sj in states] for si in states])
        assert np.allclose(G, np.eye(len(states)), atol=1e-12)


def test_dense_symmetrizer_projects_onto_symmetric_subspace():
    for n, level in ((2, 3), (3, 2)):
        P = dense_symmetrizer(n, level)
        assert np.allclose(P, P.T, atol=1e-13)
        assert np.allclose(P @ P, P, atol=1e-12)
        assert np.trace(P) == pytest.approx(sym_dimension(n, level), abs=1e-9)
        # number states span the fixed subspace
        for mi in enumerate_multiindices(n, level):
            v = dense_number_state(mi)
            assert np.allclose(P @ v, v, atol=1e-12)


def test_dense_size_guard():
    with pytest.raises(ValueError):
        dense_number_state(MultiIndex((20,) * 6))
