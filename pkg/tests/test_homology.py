"""Tests for F2 homology, swap cycles and quotienting."""

import itertools
import json

import pytest

from lowrank_hdx.errors import DimensionError, HypothesisError
from lowrank_hdx.homology import (
    ChainComplexF2,
    admissible_vector,
    boundary_matrix,
    cayley_chain_complex,
    homology_dim,
    homology_report,
    hommodswap_check,
    quotient_hypothesis,
    quotient_iterate,
    quotient_once,
    random_rank1_complex,
    swap_cycle_space,
)
from lowrank_hdx.poset_core import simplicial_closure
from lowrank_hdx.reports import quotient_toy


@pytest.fixture
def sphere():
    """Boundary of the 3-simplex."""
    return simplicial_closure(itertools.combinations(range(4), 3))


@pytest.fixture
def circle():
    return simplicial_closure([(0, 1), (1, 2), (0, 2)])


class TestChainComplex:
    """Tests for boundary maps and Betti numbers."""

    def test_sphere(self, sphere):
        """Test the 2-sphere has b1 = 0 and b2 = 1."""
        chain = ChainComplexF2(sphere)
        assert chain.is_complex()
        assert chain.betti(1) == 0
        assert chain.betti(2) == 1

    def test_circle(self, circle):
        """Test the circle has reduced b0 = 0 and b1 = 1."""
        assert ChainComplexF2(circle).betti_numbers() == {0: 0, 1: 1}

    def test_reduced_b0(self):
        """Test two points have reduced b0 = 1."""
        assert homology_dim(simplicial_closure([(0,), (1,)]), 0) == 1

    def test_disjoint_union_doubles_higher_betti(self, circle, sphere):
        """Test two disjoint copies double b_i for i >= 1 while reduced b0 becomes 1."""
        circles = simplicial_closure([(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
        assert homology_dim(circles, 1) == 2 * homology_dim(circle, 1) == 2
        assert homology_dim(circles, 0) == 1
        spheres = simplicial_closure(
            list(itertools.combinations(range(4), 3)) + list(itertools.combinations(range(4, 8), 3))
        )
        assert homology_dim(spheres, 2) == 2 * homology_dim(sphere, 2) == 2
        assert homology_dim(spheres, 1) == 0
        assert homology_dim(spheres, 0) == 1

    def test_filled_triangle_is_acyclic(self):
        """Test the filled triangle has no homology."""
        assert ChainComplexF2(simplicial_closure([(0, 1, 2)])).betti_numbers() == {0: 0, 1: 0, 2: 0}

    def test_cycles_are_cycles(self, sphere):
        """Test every basis cycle has zero boundary."""
        chain = ChainComplexF2(sphere)
        lower = chain.boundary(1)
        for z in chain.cycles(1):
            out = 0
            for k in range(len(lower)):
                if z >> k & 1:
                    out ^= lower[k]
            assert out == 0

    def test_boundary_needs_simplicial(self, triangle):
        """Test Grassmannian input and negative ranks are refused."""
        with pytest.raises(ValueError):
            boundary_matrix(triangle, 1)
        with pytest.raises(DimensionError):
            boundary_matrix(simplicial_closure([(0, 1)]), -1)

    def test_triplets(self, circle):
        """Test the sparse export of ∂_1."""
        obj = json.loads(ChainComplexF2(circle).to_triplets(1))
        assert obj["shape"] == [3, 3]
        assert len(obj["entries"]) == 6


class TestHomModSwap:
    """Tests for H_1 modulo swap cycles against the code quotient."""

    def test_cayley_chain_complex(self, triangle):
        """Test the Cayley complex of a triangle is the boundary of the 3-simplex."""
        Y = cayley_chain_complex(triangle)
        assert Y.counts() == {-1: 1, 0: 4, 1: 6, 2: 4}

    def test_triangle(self, triangle):
        """Test the triangle has both sides 0."""
        report = hommodswap_check(triangle)
        assert (report.lhs, report.rhs) == (0, 0)
        assert report.passed

    def test_triangle_free(self, triangle_free):
        """Test the triangle-free complex has both sides 1."""
        report = hommodswap_check(triangle_free)
        assert (report.lhs, report.rhs) == (1, 1)
        assert report.passed

    def test_swap_cycles_of_k4(self, triangle_free):
        """Test the swap 4-cycles of K4 are cycles."""
        Y = cayley_chain_complex(triangle_free)
        swaps = swap_cycle_space(Y)
        assert swaps.all_cycles
        assert swaps.generators == 4 * 3 * 2
        assert swaps.dim >= 1

    def test_random_toys(self, rng):
        """Test both sides agree and b1 bounds the quotient on random toys."""
        for _ in range(20):
            X = random_rank1_complex(rng, int(rng.integers(2, 6)), int(rng.integers(3, 10)), int(rng.integers(0, 6)))
            report = hommodswap_check(X)
            assert report.passed
            assert report.betti.get(1, 0) >= report.rhs

    def test_report_json(self, triangle):
        """Test the report lists the dimensions it compared."""
        obj = homology_report(triangle)
        assert obj["quotient_dim"] == obj["h1_mod_swap_dim"] == 0
        assert obj["passed"]


class TestQuotient:
    """Tests for quotienting a rank-1 complex by one direction."""

    def test_hypothesis(self, triangle):
        """Test the counting hypothesis on the triangle."""
        assert quotient_hypothesis(triangle) == (8, 16)
        assert admissible_vector(triangle) is None
        with pytest.raises(HypothesisError) as excinfo:
            quotient_once(triangle)
        assert (excinfo.value.lhs, excinfo.value.rhs) == (8, 16)

    def test_one_step(self):
        """Test one quotient drops the span by one and raises the code quotient by one."""
        X = quotient_toy(7)
        step = quotient_once(X)
        assert step.after == step.before + 1
        assert step.complex.count(0) == X.count(0)
        assert step.complex.count(1) == 1
        assert step.complex.ambient_dim == 8

    def test_three_steps(self):
        """Test ten vertices spanning F2^9 take three quotients."""
        trace = quotient_iterate(quotient_toy(7), 3, homology=False)
        assert trace.completed
        assert trace.passed
        assert [row.span_dim for row in trace.rows] == [9, 8, 7, 6]

    def test_partial_trace(self):
        """Test six vertices stop after one step once the hypothesis fails."""
        trace = quotient_iterate(quotient_toy(3), 3, homology=False)
        assert not trace.completed
        assert len(trace.rows) == 2
        assert trace.passed
        assert trace.stop_reason.startswith("step 2")

    @pytest.mark.slow
    def test_trace_with_homology(self):
        """Test b1 of each Cayley complex bounds the code quotient along the trace."""
        trace = quotient_iterate(quotient_toy(7), 3)
        assert all(row.h1 is not None for row in trace.rows)
        assert trace.passed


def test_random_complex_needs_vertices(rng):
    """Test an empty ambient space is refused."""
    with pytest.raises(DimensionError):
        random_rank1_complex(rng, 0, 5, 1)
