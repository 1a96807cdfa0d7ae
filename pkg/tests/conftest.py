"""Pytest configuration and fixtures for lowrank-hdx tests."""

import numpy as np
import pytest

from lowrank_hdx.gf_linalg import canonical_subspace, get_field
from lowrank_hdx.grassmann_lowrank import GrassConstructSpec, build_X
from lowrank_hdx.poset_core import GradedComplex


def rank1_complex(k, vertices, faces=()):
    """Rank-1 Grassmannian complex in F2^k from vertex vectors and (a, b) face pairs."""
    out = {-1: [()], 0: sorted((v,) for v in vertices)}
    if faces:
        out[1] = sorted(canonical_subspace(f) for f in faces)
    return GradedComplex("grassmannian", out, None, ambient_dim=k)


@pytest.fixture
def make_rank1():
    return rank1_complex


@pytest.fixture
def f2():
    return get_field(1)


@pytest.fixture
def f4():
    return get_field(2)


@pytest.fixture
def f16():
    return get_field(4)


@pytest.fixture
def rng():
    """A fixed-seed generator so toy complexes are the same on every run."""
    return np.random.default_rng(12345)


@pytest.fixture
def triangle():
    """One triangle {1, 2, 3} in F2^2."""
    return rank1_complex(2, [1, 2, 3], [(1, 2)])


@pytest.fixture
def triangle_free():
    """The three nonzero vectors of F2^2 with no faces."""
    return rank1_complex(2, [1, 2, 3])


@pytest.fixture
def fano():
    """All seven points and seven lines of the Fano plane, as a rank-1 complex in F2^3."""
    lines = {canonical_subspace([a, b]) for a in range(1, 8) for b in range(1, 8) if a != b}
    return rank1_complex(3, range(1, 8), list(lines))


@pytest.fixture(scope="session")
def x114():
    """X^{1,1,4}: 7350 vertices and 1058400 rank-1 faces."""
    return build_X(GrassConstructSpec(1, 1, 4))
