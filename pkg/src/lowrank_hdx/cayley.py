"""Cayley simplicial complexes Cay(F2^k, S).

Vertices are the group elements (ints below 2^k). A generator face s of S realises
the faces g + (s ∪ {0}) for every g; every vertex link is a translate of S, so most
quantities are computed from S alone and the full complex is only built for small k.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import DimensionError, MembershipError, SizeCapError
from .gf_linalg import f2_span_elements, canonical_subspace
from .grassmann_lowrank import GrassConstructSpec, face_counts
from .poset_core import (
    GradedComplex,
    TrickleRow,
    WeightedGraph,
    basisify,
    one_skeleton,
    trickle_bound,
    unordered_bases,
)
from .walks_spectral import graph_lambda

logger = logging.getLogger(__name__)

SWEEP_LIMIT = 24
DENSE_CAYLEY_LIMIT = 10
MATERIALIZE_LIMIT = 12


@dataclass
class CayleySpec:
    k: int
    S: GradedComplex

    def __post_init__(self):
        if self.S.kind != "simplicial":
            raise ValueError("Cayley generator complexes are simplicial")
        for (v,) in self.S.faces_at(0):
            if v <= 0 or v >> self.k:
                raise DimensionError(f"generator {v:#x} is not a nonzero vector of F2^{self.k}")

    @classmethod
    def from_grassmannian(cls, X: GradedComplex) -> "CayleySpec":
        """Cay(F2^k, β(X)) for a Grassmannian complex X."""
        return cls(X.ambient_dim, basisify(X))

    @property
    def generators(self) -> list:
        return [v for (v,) in self.S.faces_at(0)]


@dataclass(frozen=True)
class CayleyFace:
    v: int
    s: tuple

    @property
    def vertices(self) -> tuple:
        return tuple(sorted({self.v} | {self.v ^ x for x in self.s}))

    def weight(self, spec: CayleySpec) -> Fraction:
        return Fraction(len(self.s) + 1, 1 << spec.k) * spec.S.weight(self.s, len(self.s) - 1)


def translate(g: int, s: Sequence[int]) -> tuple:
    """g + (s ∪ {0}) ∖ {0}, sorted."""
    return tuple(sorted([g] + [g ^ x for x in s if x != g]))


# ---------- symmetry


@dataclass
class SymmetryReport:
    passed: bool
    checked: int
    violation: tuple | None = None
    reason: str = ""


def check_symmetry(S: GradedComplex, k: int) -> SymmetryReport:
    """For every face s and g in s, g + (s ∪ {0}) ∖ {0} must be a face of the same weight."""
    checked = 0
    for i in range(0, S.rank + 1):
        index = S.index(i)
        uniform = S.is_uniform(i)
        for s in S.faces_at(i):
            for g in s:
                if g <= 0 or g >> k:
                    return SymmetryReport(False, checked, (s, g), f"vertex {g:#x} outside F2^{k} minus 0")
                t = translate(g, s)
                checked += 1
                if t not in index:
                    return SymmetryReport(False, checked, (s, g), f"{t} is not a face")
                if not uniform and S.weight(t, i) != S.weight(s, i):
                    return SymmetryReport(False, checked, (s, g), f"weight of {t} differs from {s}")
    logger.info("Cayley symmetry holds on %d (face, vertex) pairs", checked)
    return SymmetryReport(True, checked)


# ---------- faces and links


def iter_realized(spec: CayleySpec, g: int, i: int) -> Iterator[tuple]:
    """(vertex set, pair mass) for every (g, s) with s in S(i-1); pair mass is m_S(s)."""
    for s, mass in zip(spec.S.faces_at(i - 1), spec.S.weights_at(i - 1)):
        yield tuple(sorted((g,) + tuple(g ^ x for x in s))), mass


def _as_level(merged: dict) -> tuple:
    faces = sorted(merged)
    total = sum(merged.values())
    masses = {f: Fraction(merged[f]) / total for f in faces}
    return faces, masses


def cayley_vertex_link(spec: CayleySpec, v: int) -> GradedComplex:
    """Link of v built from the (g, s) pairs whose realised face contains v.

    Each link face is checked against the translate v + s of a face of S, with equal
    weight, before the link is returned.
    """
    if v < 0 or v >> spec.k:
        raise DimensionError(f"{v:#x} is not a vector of F2^{spec.k}")
    S = spec.S
    faces = {-1: [()]}
    weights = {-1: {(): Fraction(1)}}
    for i in range(0, S.rank + 1):
        merged = {}
        masses_i = [1] * S.count(i) if S.is_uniform(i) else S.weights_at(i)
        for s, mass in zip(S.faces_at(i), masses_i):
            # g = v + y for y in s ∪ {0} realises a face through v
            for y in (0,) + tuple(s):
                realized = {v ^ y} | {v ^ y ^ x for x in s}
                rest = tuple(sorted(realized - {v}))
                merged[rest] = merged.get(rest, 0) + mass
        level, masses = _as_level(merged)
        faces[i] = level
        weights[i] = masses
        expected = {tuple(sorted(v ^ x for x in s)): w for s, w in zip(S.faces_at(i), S.weights_at(i))}
        if set(expected) != set(masses):
            raise MembershipError(f"link of {v:#x} at rank {i} is not the translate of S")
        for face, w in masses.items():
            if w != expected[face]:
                raise MembershipError(f"link face {face} of {v:#x} has weight {w}, S has {expected[face]}")
    uniform = all(len(set(weights[i].values())) <= 1 for i in faces if i >= 0)
    return GradedComplex(
        "simplicial",
        faces,
        None if uniform else weights,
        ambient_dim=spec.k,
        params={"link_of": v},
    )


def build_cayley_complex(spec: CayleySpec, group: Sequence[int] | None = None) -> GradedComplex:
    """Materialise Cay(G, S) for G = F2^k (or a supplied subgroup); distinct faces merge."""
    if group is None:
        if spec.k > MATERIALIZE_LIMIT:
            raise SizeCapError(
                f"Cay(F2^{spec.k}, S) has 2^{spec.k} vertices; materialisation stops at k = {MATERIALIZE_LIMIT}",
                projected=1 << spec.k,
                cap=1 << MATERIALIZE_LIMIT,
            )
        group = range(1 << spec.k)
    group = sorted(group)
    order = len(group)
    members = set(group)
    for x in spec.generators:
        if x not in members:
            raise MembershipError(f"generator {x:#x} is outside the group")
    faces = {-1: [()]}
    weights = {-1: {(): Fraction(1)}}
    for i in range(0, spec.S.rank + 2):
        merged = {}
        for g in group:
            for face, mass in iter_realized(spec, g, i):
                merged[face] = merged.get(face, 0) + Fraction(mass) / order
        faces[i] = sorted(merged)
        weights[i] = merged
    logger.debug("Cayley complex with counts %s", {i: len(f) for i, f in faces.items()})
    return GradedComplex("simplicial", faces, weights, ambient_dim=spec.k, params={"cayley_k": spec.k})


def check_weight_display(spec: CayleySpec, Y: GradedComplex) -> bool:
    """Merged face mass equals (|s|+1)/|G| · m_S(s) for the generator face of each realised face."""
    order = Y.count(0)
    for i in range(1, Y.rank + 1):
        for face in Y.faces_at(i):
            g = face[0]
            s = tuple(sorted(g ^ x for x in face[1:]))
            if Y.weight(face, i) != Fraction(i + 1, order) * spec.S.weight(s, i - 1):
                return False
    return True


# ---------- spectra


def walsh_hadamard(values) -> np.ndarray:
    """Unnormalised Walsh–Hadamard transform: out[u] = Σ_x (-1)^{popcount(x & u)} values[x]."""
    a = np.array(values, copy=True)
    n = len(a)
    if n & (n - 1):
        raise DimensionError("Walsh–Hadamard transform needs a power-of-two length")
    h = 1
    while h < n:
        a = a.reshape(-1, 2, h)
        a = np.stack((a[:, 0] + a[:, 1], a[:, 0] - a[:, 1]), axis=1).reshape(-1)
        h <<= 1
    return a


def character_sums(k: int, generators: Sequence[int], weights: Sequence | None = None) -> np.ndarray:
    """Σ_s w(s)(-1)^{s·u} for every u in F2^k."""
    if k > SWEEP_LIMIT:
        raise SizeCapError(
            f"a 2^{k} character sweep is too large; sample characters instead",
            projected=1 << k,
            cap=1 << SWEEP_LIMIT,
        )
    gens = np.asarray(list(generators), dtype=np.int64)
    if len(gens) and (gens.min() < 0 or int(gens.max()) >> k):
        raise DimensionError(f"generators outside F2^{k}")
    if weights is None:
        counts = np.bincount(gens, minlength=1 << k).astype(np.int64)
    else:
        counts = np.bincount(gens, weights=np.asarray(weights, dtype=float), minlength=1 << k)
    return walsh_hadamard(counts)


def cayley_graph_lambda(k: int, generators: Sequence[int], weights: Sequence | None = None) -> float:
    """max over u != 0 of |1 - 2 Pr_s[s·u = 1]| for the generator multiset."""
    gens = list(generators)
    if not gens:
        raise ValueError("empty generator multiset")
    if any(g == 0 for g in gens):
        raise ValueError("Cayley generators must be nonzero")
    if k == 0:
        return 0.0
    sums = character_sums(k, gens, weights)
    return float(np.abs(sums[1:]).max() / sums[0])


def cayley_graph(k: int, generators: Sequence[int]) -> WeightedGraph:
    """Cay(F2^k, generators) with one edge per (x, s) pair."""
    n = 1 << k
    xs = np.arange(n, dtype=np.int64)
    gens = np.asarray(list(generators), dtype=np.int64)
    heads = np.repeat(xs, len(gens))
    tails = (heads.reshape(n, -1) ^ gens[None, :]).reshape(-1)
    return WeightedGraph(range(n), heads, tails, np.ones(len(heads), dtype=np.int64))


def dense_cayley_lambda(k: int, generators: Sequence[int]) -> float:
    """λ of the Cayley graph through the eigensolver, for cross-checking the character sweep."""
    if k > DENSE_CAYLEY_LIMIT:
        raise SizeCapError(f"dense Cayley spectra stop at k = {DENSE_CAYLEY_LIMIT}", 1 << k, 1 << DENSE_CAYLEY_LIMIT)
    return graph_lambda(cayley_graph(k, generators)).value


# ---------- counting and trickle-down


@dataclass
class CountingReport:
    vertices: int
    faces_of_x: int
    faces_per_vertex: int
    bound: int
    projected: bool
    counts: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.faces_per_vertex <= self.bound


def cayley_counting_check(spec: GrassConstructSpec, X: GradedComplex | None = None) -> CountingReport:
    """Vertex count 2^{bn²} and faces per vertex of Cay(F2^{bn²}, β(X)) against 2^{2^{r+2}bn}."""
    if X is None:
        counts = face_counts(spec)
        projected = True
    else:
        counts = X.counts()
        projected = False
    ranks = [i for i in counts if i >= 0]
    faces_of_x = sum(counts[i] for i in ranks)
    # a vertex sits in itself plus one face per face of its link β(X)
    per_vertex = 1 + sum(counts[i] * unordered_bases(i + 1) for i in ranks)
    bound = 1 << ((1 << (spec.r + 2)) * spec.b * spec.n)
    report = CountingReport(1 << spec.k, faces_of_x, per_vertex, bound, projected, dict(counts))
    logger.info("Cayley counting: %d faces per vertex against 2^%d", per_vertex, bound.bit_length() - 1)
    return report


def cayley_trickle_check(X: GradedComplex, tol: float = 1e-9) -> TrickleRow:
    """Trickle-down on Cay(F2^k, β(X)) at rank -1 from the common vertex-link expansion."""
    if X.kind != "grassmannian":
        raise ValueError("the Cayley trickle check takes a Grassmannian complex")
    lam0 = graph_lambda(one_skeleton(X))
    generators = [v for (v,) in X.faces_at(0)]
    weights = None if X.is_uniform(0) else [float(w) for w in X.weights_at(0)]
    lam_minus = cayley_graph_lambda(X.ambient_dim, generators, weights)
    if lam0.disconnected:
        return TrickleRow(-1, lam_minus, lam0.value, None, "skipped", "disconnected vertex link")
    bound = trickle_bound(lam0.value)
    if bound is None:
        return TrickleRow(-1, lam_minus, lam0.value, None, "skipped", "vacuous: link λ >= 1")
    status = "pass" if lam_minus <= bound + tol else "fail"
    return TrickleRow(-1, lam_minus, lam0.value, bound, status)


def span_group(vectors: Iterable[int]) -> list:
    """Sorted elements of the F2 span of ``vectors``."""
    return sorted(f2_span_elements(list(canonical_subspace(vectors))))


def degree_statistics(spec: CayleySpec) -> dict:
    """Faces through a vertex per rank, identical at every vertex."""
    return {0: 1} | {i + 1: spec.S.count(i) for i in range(0, spec.S.rank + 1)}
