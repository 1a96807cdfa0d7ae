"""Tests for the low-rank matrix poset."""

import numpy as np
import pytest

from lowrank_hdx.errors import DimensionError, SizeCapError
from lowrank_hdx.gf_linalg import GFMatrix
from lowrank_hdx.matrix_poset import (
    MatrixPosetSpec,
    all_matrices,
    check_poset_axioms,
    count_dominated_by_identity,
    count_rank,
    dominated_below,
    dominated_by_identity,
    dominates,
    gaussian_binomial,
    gl_order,
    identity_decompositions,
    idempotents,
    meet_maximal,
    packed_rank,
    enumerate_rank,
)


def test_counting_formulas():
    """Test Gaussian binomials and GL orders on small cases."""
    assert gaussian_binomial(3, 1, 2) == 7
    assert gaussian_binomial(4, 2, 2) == 35
    assert gl_order(2, 2) == 6
    assert gl_order(3, 2) == 168
    assert count_rank(2, 1, 2) == 9
    assert count_rank(3, 3, 2) == 168
    assert count_dominated_by_identity(2, 1, 2) == 6


@pytest.mark.parametrize("m,b", [(2, 1), (3, 1), (2, 2), (2, 4)])
def test_enumerate_rank_matches_count(m, b):
    """Test each rank level is enumerated exactly once."""
    from lowrank_hdx.gf_linalg import get_field

    spec = MatrixPosetSpec(get_field(b), m)
    for s in range(0, m + 1):
        level = enumerate_rank(spec, s)
        packed = {M.pack() for M in level}
        assert len(packed) == len(level) == count_rank(m, s, spec.q)
        assert all(M.rank() == s for M in level)


def test_rank_levels_partition_the_poset(f2):
    """Test the rank levels of M_2^2 cover all 16 matrices."""
    spec = MatrixPosetSpec(f2, 2)
    total = sum(len(enumerate_rank(spec, s)) for s in range(3))
    assert total == 16 == len(all_matrices(spec))


def test_enumerate_rank_cap(f16):
    """Test a level beyond the cap raises SizeCapError with the projection."""
    spec = MatrixPosetSpec(f16, 3)
    with pytest.raises(SizeCapError) as excinfo:
        enumerate_rank(spec, 3, cap=1000)
    assert excinfo.value.projected == count_rank(3, 3, 16)


def test_enumerate_rank_out_of_range(f2):
    """Test asking for rank above m raises DimensionError."""
    with pytest.raises(DimensionError):
        enumerate_rank(MatrixPosetSpec(f2, 2), 3)


def test_dominates_examples(f2):
    """Test E11 ⪯ I but E12 is not."""
    I = GFMatrix.identity(f2, 2)
    E11 = GFMatrix.from_rows(f2, [[1, 0], [0, 0]])
    E12 = GFMatrix.from_rows(f2, [[0, 1], [0, 0]])
    assert dominates(E11, I)
    assert not dominates(E12, I)
    assert dominates(GFMatrix.zeros(f2, 2), E12)
    assert dominates(I, I)


def test_dominates_shape_mismatch(f2):
    """Test comparing different shapes raises DimensionError."""
    with pytest.raises(DimensionError):
        dominates(GFMatrix.identity(f2, 2), GFMatrix.identity(f2, 3))


def test_packed_rank_agrees(f2, f4):
    """Test packed rank against GFMatrix.rank."""
    for field_ in (f2, f4):
        for value in range(0, field_.q**4, 3):
            M = GFMatrix.from_packed(field_, 2, 2, value)
            assert packed_rank(field_, 2, value) == M.rank()


def test_dominated_by_identity_exhaustive(f2):
    """Test the factorization criterion against the rank criterion on all of M_2^3."""
    spec = MatrixPosetSpec(f2, 3)
    I = spec.identity()
    for M in all_matrices(spec, cap=512):
        assert bool(dominated_by_identity(M)) == dominates(M, I)


def test_dominated_by_identity_random(f4, rng):
    """Test the factorization criterion on random matrices of M_4^3."""
    I = GFMatrix.identity(f4, 3)
    for value in rng.integers(0, 4**9, size=300):
        M = GFMatrix.from_packed(f4, 3, 3, int(value))
        witness = dominated_by_identity(M)
        assert bool(witness) == dominates(M, I)
        if witness:
            assert witness.v1 @ witness.v2.T == M


def test_idempotents_count(f4):
    """Test the rank-s matrices ⪯ I_r are counted by binom_q(r, s) q^{s(r-s)}."""
    for s in range(0, 4):
        assert len(idempotents(f4, 3, s)) == count_dominated_by_identity(3, s, 4)


def test_dominated_below(f2):
    """Test everything returned is dominated, and the count for the identity."""
    I = GFMatrix.identity(f2, 2)
    below = dominated_below(I, 1)
    assert len(below) == 6
    assert all(dominates(L, I) and L.rank() == 1 for L in below)


def test_identity_decompositions(f2):
    """Test I_2 over F2 splits into two rank-1 idempotents in 6 ordered ways."""
    decompositions = identity_decompositions(f2, 2, 1)
    assert len(decompositions) == 6
    I = GFMatrix.identity(f2, 2)
    for A, B in decompositions:
        assert A + B == I
        assert dominates(A, I) and dominates(B, I)


def test_identity_decompositions_rejects_bad_split(f2):
    """Test rho must divide T."""
    with pytest.raises(DimensionError):
        identity_decompositions(f2, 3, 2)


def test_meet_maximal(f2):
    """Test the meet of a dominated pair is the smaller one."""
    I = GFMatrix.identity(f2, 2)
    E11 = GFMatrix.from_rows(f2, [[1, 0], [0, 0]])
    assert meet_maximal(E11, I) == E11
    assert meet_maximal(I, I) == I


def test_meet_of_disjoint_matrices_is_zero(f2):
    """Test matrices with trivially intersecting row spaces meet at 0."""
    E11 = GFMatrix.from_rows(f2, [[1, 0], [0, 0]])
    E22 = GFMatrix.from_rows(f2, [[0, 0], [0, 1]])
    assert meet_maximal(E11, E22).is_zero()


def test_poset_axioms_m2_3(f2):
    """Test transitivity, antisymmetry, gradedness and purity on all 512 matrices of M_2^3."""
    result = check_poset_axioms(MatrixPosetSpec(f2, 3), cap=512)
    assert result["matrices"] == 512
    assert result["transitive"]
    assert result["antisymmetric"]
    assert result["graded"]
    assert result["pure"]


def test_domination_is_consistent_with_packed_order(f2):
    """Test the relation matrix is reflexive."""
    from lowrank_hdx.matrix_poset import domination_relation

    members = all_matrices(MatrixPosetSpec(f2, 2))
    D = domination_relation(members)
    assert np.all(np.diag(D))
