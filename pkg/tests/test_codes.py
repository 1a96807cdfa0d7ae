"""Tests for the code pair (G_X, H_X), covers and bias."""

import json

import pytest

from lowrank_hdx.codes import (
    balanced_check,
    bias,
    build_code_pair,
    code_to_json,
    codeword_weights,
    cover_lift,
    expansion_to_distance_check,
    generator_code,
    h_rank,
    incidence_sets,
    kernel_H,
    parity_check_text,
    quotient_dimension,
    span_coordinates,
    universal_cover,
    vertex_degrees,
)
from lowrank_hdx.errors import DimensionError, HdxError
from lowrank_hdx.gf_linalg import f2_dot, f2_rank
from lowrank_hdx.homology import random_rank1_complex
from lowrank_hdx.poset_core import simplicial_closure


class TestCodePair:
    """Tests for building G_X and H_X."""

    def test_triangle(self, triangle):
        """Test the single check of a triangle covers all three vertices."""
        pair = build_code_pair(triangle)
        assert pair.G == [1, 2, 3]
        assert pair.H == [0b111]
        assert pair.check_weights()
        assert pair.orthogonal()
        assert pair.rank_G() == 2

    def test_fano(self, fano):
        """Test the Fano complex gives seven weight-3 checks orthogonal to G."""
        pair = build_code_pair(fano)
        assert pair.n == pair.n_checks == 7
        assert pair.orthogonal()
        assert h_rank(pair)[0] == 4

    def test_h_rank_stops_early(self, fano):
        """Test the streaming rank stops at the target."""
        rank, basis, stopped = h_rank(build_code_pair(fano), target=2)
        assert rank == 2
        assert len(basis) == 2
        assert stopped

    def test_needs_grassmannian(self):
        """Test simplicial input is refused."""
        with pytest.raises(ValueError):
            build_code_pair(simplicial_closure([(1, 2)]))

    def test_needs_vertices(self, make_rank1):
        """Test an empty complex is refused."""
        with pytest.raises(DimensionError):
            build_code_pair(make_rank1(2, []))

    def test_random_toys_are_orthogonal(self, rng):
        """Test H·G = 0 on random rank-1 complexes."""
        for _ in range(30):
            X = random_rank1_complex(rng, int(rng.integers(3, 8)), int(rng.integers(3, 15)), int(rng.integers(0, 8)))
            pair = build_code_pair(X)
            assert pair.orthogonal()
            assert pair.check_weights()

    def test_exports(self, triangle):
        """Test the parity-check text and JSON forms."""
        pair = build_code_pair(triangle)
        assert parity_check_text(pair) == "0 1 2\n"
        obj = json.loads(code_to_json(pair))
        assert obj["generator"] == ["01", "02", "03"]
        assert obj["checks"] == [[0, 1, 2]]


class TestKernelAndCover:
    """Tests for ker H_X and the universal cover."""

    def test_quotient_dimension(self, triangle, triangle_free):
        """Test the triangle has no quotient and the triangle-free complex has one dimension."""
        assert quotient_dimension(build_code_pair(triangle)) == 0
        assert quotient_dimension(build_code_pair(triangle_free)) == 1

    def test_kernel_is_annihilated(self, triangle_free, fano):
        """Test every kernel vector is orthogonal to every check."""
        for X in (triangle_free, fano):
            pair = build_code_pair(X)
            kernel = kernel_H(pair)
            assert len(kernel) == pair.n - h_rank(pair)[0]
            assert all(f2_dot(w, row) == 0 for w in kernel for row in pair.H)

    def test_kernel_equals_image_when_certified(self, triangle):
        """Test the rank certificate returns the image of G."""
        pair = build_code_pair(triangle)
        assert kernel_H(pair) == pair.codewords_basis()

    def test_cover_of_triangle_free(self, triangle_free):
        """Test the cover of three free vertices is the coordinate basis of F2^3."""
        cover = universal_cover(triangle_free)
        assert cover.ambient_dim == 3
        assert sorted(v for (v,) in cover.faces_at(0)) == [1, 2, 4]

    def test_cover_keeps_incidence(self, fano, triangle):
        """Test the cover has the same faces under the lift."""
        for X in (fano, triangle):
            lift = cover_lift(X)
            cover = universal_cover(X)
            assert incidence_sets(cover) == incidence_sets(X, relabel=lift)
            pair = build_code_pair(X)
            assert generator_code(cover, [lift[v] for v in pair.G]) == tuple(kernel_H(pair))

    def test_random_covers(self, rng):
        """Test the generator code of each cover is ker H_X, or the cover is reported degenerate."""
        for _ in range(30):
            X = random_rank1_complex(rng, int(rng.integers(3, 7)), int(rng.integers(3, 12)), int(rng.integers(0, 6)))
            pair = build_code_pair(X)
            try:
                lift = cover_lift(X)
            except HdxError:
                continue
            cover = universal_cover(X)
            assert generator_code(cover, [lift[v] for v in pair.G]) == tuple(kernel_H(pair))


class TestBiasAndDistance:
    """Tests for bias, balance and the expansion-to-distance check."""

    def test_bias(self):
        """Test the bias of the nonzero vectors of F2^2 and F2^3."""
        assert bias([1, 2, 3], 2) == pytest.approx(1 / 3)
        assert bias(list(range(1, 8)), 3) == pytest.approx(1 / 7)
        with pytest.raises(ValueError):
            bias([], 2)

    def test_codeword_weights(self):
        """Test the Gray-code sweep over a small code."""
        assert codeword_weights([0b011, 0b101]).tolist() == [2, 2, 2]

    def test_balanced(self):
        """Test balance against a wide and a narrow window."""
        assert balanced_check([0b011, 0b101], 3, 1 / 3).passed
        assert not balanced_check([0b011, 0b101], 3, 0.1).passed
        assert balanced_check([], 3, 0.1).passed

    def test_span_coordinates(self):
        """Test coordinates rebuild each vector from the reduced basis."""
        d, coords = span_coordinates([3, 5, 6])
        assert d == 2
        assert f2_rank(coords) == 2
        assert coords[0] ^ coords[1] == coords[2]

    def test_vertex_degrees(self, fano, make_rank1):
        """Test the degree histogram of regular and irregular complexes."""
        assert vertex_degrees(fano) == {3: 7}
        assert vertex_degrees(make_rank1(3, [1, 2, 3, 4], [(1, 2)])) == {1: 3, 0: 1}

    def test_distance_on_fano(self, fano):
        """Test the simplex code of the Fano complex sits in the window from λ = 1/6."""
        report = expansion_to_distance_check(fano, 1 / 6)
        assert report.status == "pass"
        assert report.bias == pytest.approx(1 / 7)
        assert report.bound == pytest.approx(0.2)
        assert report.min_fraction == report.max_fraction == pytest.approx(4 / 7)

    def test_distance_skips_irregular(self, make_rank1):
        """Test irregular complexes are skipped."""
        report = expansion_to_distance_check(make_rank1(3, [1, 2, 3, 4], [(1, 2)]), 0.5)
        assert report.status == "skipped"
        assert report.note.startswith("irregular")

    def test_distance_vacuous(self, triangle):
        """Test λ = 1 gives no bound."""
        assert expansion_to_distance_check(triangle, 1.0).status == "skipped"

    @pytest.mark.slow
    def test_x114_checks(self, x114):
        """Test H·G = 0 on the 1058400 checks of X^{1,1,4}."""
        pair = build_code_pair(x114)
        assert pair.n == 7350
        assert pair.check_weights()
        assert pair.orthogonal()
