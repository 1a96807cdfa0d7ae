"""Tests for the low-rank Grassmannian construction."""

import pytest

from lowrank_hdx.errors import DimensionError, MembershipError, SizeCapError
from lowrank_hdx.gf_linalg import GFMatrix
from lowrank_hdx.grassmann_lowrank import (
    GrassConstructSpec,
    GrassFace,
    LinkGraphSpec,
    brute_force_minimal_matrices,
    build_X,
    build_link_graph,
    decomposition_count,
    face_counts,
    hadamard_generator,
    is_face,
    link_vertex_count,
    link_vertices,
    minimal_matrices,
    neighbors_in_link,
    random_vertex,
    rank1_characterization,
    span_dimension_of_vertices,
    tensor_projection_check,
    vertex_degree,
)


@pytest.fixture
def spec114():
    return GrassConstructSpec(1, 1, 4)


def unit(spec, *positions):
    """Sum of the diagonal units E_kk for k in positions."""
    rows = [[1 if (i == j and i in positions) else 0 for j in range(spec.n)] for i in range(spec.n)]
    return GFMatrix.from_rows(spec.field, rows)


class TestHadamard:
    """Tests for the Hadamard generator matrices."""

    def test_rows_for_r1(self):
        """Test row k is 2^{r+1}-k written most significant bit first."""
        assert hadamard_generator(1).rows == ((1, 1), (1, 0), (0, 1))

    @pytest.mark.parametrize("r", [0, 1, 2, 3])
    def test_constant_weight(self, r):
        """Test every nonzero codeword has weight 2^r."""
        assert hadamard_generator(r).is_hadamard()

    def test_truncation(self):
        """Test i selects the leading columns."""
        gen = hadamard_generator(2, 0)
        assert gen.length == 7
        assert all(len(row) == 1 for row in gen.rows)

    def test_cutoff_out_of_range(self):
        """Test i above r raises DimensionError."""
        with pytest.raises(DimensionError):
            hadamard_generator(1, 2)


class TestSpec:
    """Tests for construction parameters and counting."""

    def test_n_too_small(self):
        """Test n must be at least 2^(r+1)."""
        with pytest.raises(DimensionError):
            GrassConstructSpec(1, 1, 3)
        with pytest.raises(DimensionError):
            GrassConstructSpec(0, 1, 4)

    def test_levels(self, spec114):
        """Test (rho, t, T) per rank and the ambient dimension."""
        assert spec114.k == 16
        assert spec114.level(0) == (2, 1, 2)
        assert spec114.level(1) == (1, 3, 3)
        with pytest.raises(DimensionError):
            spec114.level(2)

    def test_decomposition_count(self):
        """Test I_2 over F2 has 6 ordered splittings into rank-1 idempotents."""
        assert decomposition_count(2, 1, 2) == 6
        assert decomposition_count(2, 2, 2) == 1

    def test_face_counts(self, spec114):
        """Test |X(0)| = 7350 and |X(1)| = 1058400."""
        assert face_counts(spec114) == {-1: 1, 0: 7350, 1: 1_058_400}

    def test_vertex_degree(self, spec114):
        """Test each vertex lies in 3·|X(1)|/|X(0)| rank-1 faces."""
        assert vertex_degree(spec114) == 3 * 1_058_400 // 7350 == 432
        assert link_vertex_count(spec114, 0) == 432


class TestFaces:
    """Tests for faces, minimal matrices and the face predicate."""

    def test_elements(self, spec114):
        """Test span elements are indexed by coefficient bitmask."""
        x = GrassFace(spec114, (3, 5))
        assert x.elements() == [3, 5, 6]
        assert x.rank == 1

    def test_wrong_shape(self, spec114):
        """Test matrices of the wrong size are rejected."""
        with pytest.raises(DimensionError):
            GrassFace.from_matrices(spec114, [GFMatrix.identity(spec114.field, 3)])

    def test_vertex_minimal_matrix(self, spec114):
        """Test a vertex is its own minimal matrix."""
        A = unit(spec114, 0, 1)
        x = GrassFace.from_matrices(spec114, [A])
        assert minimal_matrices(x) == [A]

    def test_rank1_face(self, spec114):
        """Test {E11+E22, E11+E33} spans a face with minimal matrices E11, E22, E33."""
        A, B = unit(spec114, 0, 1), unit(spec114, 0, 2)
        x = GrassFace.from_matrices(spec114, [A, B])
        assert is_face(spec114, [A, B])
        assert rank1_characterization(x)
        expected = [unit(spec114, 0), unit(spec114, 1), unit(spec114, 2)]
        assert minimal_matrices(x) == expected
        assert brute_force_minimal_matrices(x) == expected

    def test_not_a_face(self, spec114):
        """Test spans with disjoint supports or wrong ranks are rejected."""
        assert not is_face(spec114, [unit(spec114, 0, 1), unit(spec114, 2, 3)])
        assert not is_face(spec114, [unit(spec114, 0, 1), unit(spec114, 0, 1, 2)])
        assert is_face(spec114, [])

    def test_rank1_characterization_needs_rank1(self, spec114):
        """Test the characterization refuses vertices."""
        with pytest.raises(DimensionError):
            rank1_characterization(GrassFace.from_matrices(spec114, [unit(spec114, 0, 1)]))

    def test_link_vertices(self, spec114):
        """Test a vertex has every rank-1 coface listed twice."""
        x = GrassFace.from_matrices(spec114, [unit(spec114, 0, 1)])
        found = list(link_vertices(x))
        assert len(found) == 2 * vertex_degree(spec114)
        A = x.matrices()[0]
        for M in found[:25]:
            assert is_face(spec114, [A, M])

    def test_neighbors_in_link(self, spec114):
        """Test the neighbours of a vertex in the link of the empty face span rank-1 faces with it."""
        A = unit(spec114, 0, 1)
        found = list(neighbors_in_link(GrassFace(spec114, ()), A))
        assert len(found) == len({M.pack() for M in found}) == 2 * vertex_degree(spec114)
        for M in found[:25]:
            assert is_face(spec114, [A, M])

    def test_neighbors_need_room_above(self, spec114):
        """Test a vertex of a rank-1 complex has no rank-2 cofaces."""
        x = GrassFace.from_matrices(spec114, [unit(spec114, 0, 1)])
        with pytest.raises(MembershipError):
            next(neighbors_in_link(x, unit(spec114, 0, 2)))

    def test_random_vertex(self, spec114):
        """Test random vertices have rank 2^r and are reproducible."""
        x = random_vertex(spec114, seed=4)
        assert x.matrices()[0].rank() == 2
        assert random_vertex(spec114, seed=4) == x


class TestBuild:
    """Tests for enumerating X."""

    def test_vertices(self, spec114):
        """Test the enumerated vertices are the rank-2 matrices spanning F2^16."""
        X = build_X(spec114, max_rank=0)
        assert X.count(0) == 7350
        assert X.count(1) == 0
        assert span_dimension_of_vertices(X) == 16
        assert X.params == {"r": 1, "b": 1, "n": 4}
        assert all(GrassFace(spec114, f).matrices()[0].rank() == 2 for f in X.faces_at(0)[:200])

    def test_cap(self, spec114):
        """Test building past the cap raises SizeCapError with the projected counts."""
        with pytest.raises(SizeCapError) as excinfo:
            build_X(spec114, cap=1000)
        assert excinfo.value.projected[0] == 7350

    def test_max_rank_out_of_range(self, spec114):
        """Test a max rank above r is rejected."""
        with pytest.raises(DimensionError):
            build_X(spec114, max_rank=2)

    @pytest.mark.slow
    def test_rank1_faces(self, x114, spec114):
        """Test every rank-1 face of X^{1,1,4} satisfies the rank-1 characterization."""
        assert x114.counts() == {-1: 1, 0: 7350, 1: 1_058_400}
        assert all(rank1_characterization(GrassFace(spec114, f)) for f in x114.faces_at(1)[::997])


class TestLinkGraphs:
    """Tests for the factor graphs of a link."""

    def test_unknown_graph(self):
        """Test only G1 and G2 exist."""
        with pytest.raises(ValueError):
            LinkGraphSpec("G3", 1, -1)

    def test_g2_needs_n(self):
        """Test G2 without a large enough n is rejected."""
        with pytest.raises(DimensionError):
            LinkGraphSpec("G2", 1, -1, n=3)

    def test_g1_counts(self):
        """Test G1 for rho = 4 over F2 has the projected vertex and edge counts."""
        spec = LinkGraphSpec("G1", 1, -1)
        G = build_link_graph(spec)
        assert G.n == spec.projected_vertices() == 560
        assert int(G.counts.sum()) == spec.projected_edges()

    @pytest.mark.slow
    def test_full_projection(self, x114, spec114):
        """Test G2 maps onto the 1-skeleton of X^{1,1,4} with exact edge masses."""
        report = tensor_projection_check(GrassFace(spec114, ()), mode="full", X=x114)
        assert report.passed
        assert report.lambda_link <= report.lambda_factors["G2"] + 1e-9

    def test_full_projection_needs_r1(self):
        """Test the full mode refuses r = 2."""
        spec = GrassConstructSpec(2, 1, 8)
        with pytest.raises(DimensionError):
            tensor_projection_check(GrassFace(spec, ()), mode="full")

    @pytest.mark.slow
    def test_sampled_projection(self):
        """Test sampled product edges land on link edges with the expected fibres."""
        spec = GrassConstructSpec(2, 1, 8)
        report = tensor_projection_check(random_vertex(spec, seed=1), mode="sampled", samples=3, seed=2)
        assert report.checked == 3
        assert report.passed
