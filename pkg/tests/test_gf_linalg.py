"""Tests for field arithmetic and linear algebra over GF(2^b) and GF(2)."""

import itertools

import pytest

from lowrank_hdx.errors import DimensionError, FieldError
from lowrank_hdx.gf_linalg import (
    FieldSpec,
    GFMatrix,
    GFVector,
    SpanBasis,
    canonical_subspace,
    default_reduction_poly,
    f2_dot,
    f2_kernel,
    f2_rank,
    f2_span_elements,
    from_hex,
    get_field,
    gf_mul,
    intersect_subspaces,
    is_irreducible,
    outer_product,
    to_hex,
)


class TestFieldSpec:
    """Tests for GF(2^b) tables."""

    def test_default_polynomials(self):
        """Test the smallest irreducible polynomial is picked for each degree."""
        assert default_reduction_poly(1) == 0b11
        assert default_reduction_poly(2) == 0b111
        assert default_reduction_poly(3) == 0b1011
        assert default_reduction_poly(4) == 0b10011

    def test_irreducibility(self):
        """Test irreducibility against known polynomials."""
        assert is_irreducible(0b10011)
        assert not is_irreducible(0b10001)
        assert not is_irreducible(1)

    def test_reducible_polynomial_rejected(self):
        """Test that a reducible reduction polynomial raises FieldError."""
        with pytest.raises(FieldError):
            FieldSpec(4, 0b10001)

    def test_degree_mismatch_rejected(self):
        """Test that a polynomial of the wrong degree raises FieldError."""
        with pytest.raises(FieldError):
            FieldSpec(3, 0b10011)

    def test_field_error_is_value_error(self):
        """Test FieldError can be caught as ValueError."""
        with pytest.raises(ValueError):
            FieldSpec(0)

    def test_mul_matches_galois(self, f16):
        """Test table multiplication agrees with the galois reference field."""
        GF = f16.reference()
        for a, b in itertools.product(range(16), repeat=2):
            assert f16.mul(a, b) == int(GF(a) * GF(b))

    def test_inverse(self, f16):
        """Test every nonzero element times its inverse is 1."""
        for a in f16.nonzero():
            assert f16.mul(a, f16.inv(a)) == 1
        with pytest.raises(ZeroDivisionError):
            f16.inv(0)

    def test_gf_mul_checks_operands(self, f4):
        """Test gf_mul multiplies elements and refuses values outside the field."""
        assert gf_mul(f4, 2, 3) == f4.mul(2, 3)
        with pytest.raises(FieldError):
            gf_mul(f4, 4, 1)

    def test_mul_array(self, f4):
        """Test vectorised multiplication matches scalar multiplication."""
        a = [0, 1, 2, 3]
        b = [3, 3, 3, 3]
        assert f4.mul_array(a, b).tolist() == [f4.mul(x, 3) for x in a]

    def test_pow(self, f16):
        """Test the multiplicative group has order 15."""
        for a in f16.nonzero():
            assert f16.pow(a, 15) == 1

    def test_get_field_is_cached(self):
        """Test get_field returns a shared instance."""
        assert get_field(3) is get_field(3)


class TestGFMatrix:
    """Tests for matrices over GF(2^b)."""

    def test_identity_rank(self, f4):
        """Test the identity has full rank."""
        assert GFMatrix.identity(f4, 3).rank() == 3

    def test_outer_product_has_rank_one(self, f16):
        """Test u vᵀ has rank 1 for nonzero u and v."""
        u = GFVector(f16, (1, 7, 0))
        v = GFVector(f16, (3, 0, 9))
        assert outer_product(u, v).rank() == 1

    def test_pack_layout(self, f4):
        """Test entry (i, j) occupies b bits at offset b(i*cols + j)."""
        M = GFMatrix.from_rows(f4, [[1, 0], [0, 3]])
        assert M.pack() == 1 | (3 << 6)
        assert GFMatrix.from_packed(f4, 2, 2, M.pack()) == M

    def test_rank_factorization(self, f16):
        """Test M = V1 V2ᵀ with full column rank factors."""
        M = GFMatrix.from_rows(f16, [[1, 2, 3], [2, 4, 6], [0, 1, 5]])
        V1, V2 = M.rank_factorization()
        assert V1.cols == V2.cols == M.rank() == 2
        assert V1 @ V2.T == M

    def test_kernel_basis(self, f4):
        """Test kernel vectors are annihilated."""
        M = GFMatrix.from_rows(f4, [[1, 2, 3], [0, 1, 1]])
        basis = M.kernel_basis()
        assert len(basis) == 1
        assert M.apply(basis[0]).is_zero()

    def test_matmul_shape_mismatch(self, f2):
        """Test multiplying incompatible shapes raises DimensionError."""
        with pytest.raises(DimensionError):
            GFMatrix.zeros(f2, 2, 3) @ GFMatrix.zeros(f2, 2, 3)

    def test_entry_outside_field(self, f2):
        """Test entries must be field elements."""
        with pytest.raises(FieldError):
            GFMatrix(f2, 1, 1, (2,))

    def test_intersect_subspaces(self, f2):
        """Test span{e0, e1} ∩ span{e1, e2} = span{e1}."""
        e = [GFVector.unit(f2, 3, i) for i in range(3)]
        meet = intersect_subspaces([e[0], e[1]], [e[1], e[2]])
        assert meet == [e[1]]


class TestF2Bitsets:
    """Tests for the F2 bitset helpers."""

    def test_span_basis(self):
        """Test dependent vectors are rejected."""
        basis = SpanBasis()
        assert basis.add(0b011)
        assert basis.add(0b110)
        assert not basis.add(0b101)
        assert 0b101 in basis
        assert len(basis) == 2

    def test_canonical_subspace_is_span_invariant(self):
        """Test equal spans give equal canonical tuples."""
        assert canonical_subspace([0b011, 0b110]) == canonical_subspace([0b101, 0b011])
        assert canonical_subspace([0b011, 0b110]) != canonical_subspace([0b001, 0b010])

    def test_f2_rank(self):
        """Test rank of the nonzero vectors of F2^3."""
        assert f2_rank(range(1, 8)) == 3
        assert f2_rank([]) == 0

    def test_f2_kernel(self):
        """Test kernel vectors are orthogonal to every row and have the right count."""
        rows = [0b1011, 0b0110]
        kernel = f2_kernel(rows, 4)
        assert len(kernel) == 4 - f2_rank(rows)
        assert all(f2_dot(x, r) == 0 for x in kernel for r in rows)
        assert f2_rank(kernel) == len(kernel)

    def test_span_elements_gray_order(self):
        """Test span elements come out in Gray-code order starting at zero."""
        assert f2_span_elements([1, 2]) == [0, 1, 3, 2]
        assert sorted(f2_span_elements([1, 2, 4])) == list(range(8))

    def test_hex_is_little_endian(self):
        """Test bit 0 of byte 0 is coordinate 0."""
        assert to_hex(1, 16) == "0100"
        assert to_hex(1 << 8, 16) == "0001"
        assert to_hex(0, 0) == "00"
        assert from_hex("0001") == 1 << 8
