"""F2 homology of simplicial complexes, swap cycles and quotienting of rank-1 complexes.

Chains are int bitsets over the faces of one rank in canonical order; a boundary
matrix is stored column-wise (one bitset over rank i-1 per rank-i face).
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from .cayley import MATERIALIZE_LIMIT, CayleySpec, build_cayley_complex, span_group
from .codes import build_code_pair, incidence_sets, quotient_dimension, span_coordinates
from .errors import DimensionError, DisconnectedError, HdxError, HypothesisError, MembershipError, SizeCapError
from .gf_linalg import SpanBasis, canonical_subspace, f2_kernel, f2_rank, to_hex
from .poset_core import GradedComplex, basisify, one_skeleton

logger = logging.getLogger(__name__)

HOMOLOGY_K_LIMIT = 10


def _bits(word: int):
    while word:
        low = word & -word
        yield low.bit_length() - 1
        word ^= low


def _transpose(columns: list, nrows: int) -> list:
    rows = [0] * nrows
    for c, col in enumerate(columns):
        for r in _bits(col):
            rows[r] |= 1 << c
    return rows


def boundary_matrix(Y: GradedComplex, i: int) -> list:
    """Columns of ∂_i: for each rank-i face, the bitset of its rank-(i-1) faces."""
    if Y.kind != "simplicial":
        raise ValueError("boundary matrices are built on simplicial complexes")
    if i < 0:
        raise DimensionError("∂_i is defined for i >= 0")
    if not Y.count(i):
        return []
    columns = []
    for lows in Y.incidence(i):
        col = 0
        for k in lows:
            col |= 1 << k
        columns.append(col)
    return columns


def apply_boundary(columns: list, chain: int) -> int:
    out = 0
    for c in _bits(chain):
        out ^= columns[c]
    return out


class ChainComplexF2:
    """Boundary maps ∂_0..∂_r of a simplicial complex, built on demand."""

    def __init__(self, Y: GradedComplex):
        self.Y = Y
        self._boundary = {}
        self._rank = {}

    def boundary(self, i: int) -> list:
        if i not in self._boundary:
            self._boundary[i] = boundary_matrix(self.Y, i) if i <= self.Y.rank else []
        return self._boundary[i]

    def rank(self, i: int) -> int:
        if i not in self._rank:
            self._rank[i] = f2_rank(self.boundary(i))
        return self._rank[i]

    def cycles(self, i: int) -> list:
        """Basis of Z_i = ker ∂_i."""
        n = self.Y.count(i)
        return f2_kernel(_transpose(self.boundary(i), self.Y.count(i - 1)), n)

    def boundaries(self, i: int) -> list:
        """Spanning set of B_i = im ∂_{i+1}."""
        return self.boundary(i + 1)

    def is_complex(self) -> bool:
        """∂_{i-1} ∂_i = 0 for every i."""
        for i in range(1, self.Y.rank + 1):
            lower = self.boundary(i - 1)
            for col in self.boundary(i):
                if apply_boundary(lower, col):
                    return False
        return True

    def betti(self, i: int) -> int:
        return self.Y.count(i) - self.rank(i) - self.rank(i + 1)

    def betti_numbers(self) -> dict:
        return {i: self.betti(i) for i in range(0, self.Y.rank + 1)}

    def to_triplets(self, i: int) -> str:
        entries = [[r, c, 1] for c, col in enumerate(self.boundary(i)) for r in _bits(col)]
        shape = [self.Y.count(i - 1), self.Y.count(i)]
        return json.dumps({"shape": shape, "entries": entries}, sort_keys=True)


def homology_dim(Y: GradedComplex, i: int) -> int:
    """dim ker ∂_i - rank ∂_{i+1}.

    b_0 is reduced (one less than the number of components), so a disjoint
    union of two copies doubles b_i only for i >= 1.
    """
    return ChainComplexF2(Y).betti(i)


# ---------- Cayley complexes of rank-1 Grassmannian complexes


def cayley_chain_complex(X: GradedComplex) -> GradedComplex:
    """Y = Cay(span X(0), β(X)) on the span elements."""
    if X.kind != "grassmannian":
        raise ValueError("expected a Grassmannian complex")
    vectors = [v for (v,) in X.faces_at(0)]
    d = f2_rank(vectors)
    if d > MATERIALIZE_LIMIT:
        raise SizeCapError(
            f"span X(0) has dimension {d}; Cayley chain complexes stop at {MATERIALIZE_LIMIT}",
            projected=1 << d,
            cap=1 << MATERIALIZE_LIMIT,
        )
    spec = CayleySpec(X.ambient_dim, basisify(X))
    return build_cayley_complex(spec, span_group(vectors))


class LabelMap:
    """Edge {v, v'} of a Cayley complex -> generator v + v'."""

    def __init__(self, Y: GradedComplex, generators):
        self.labels = [a ^ b for a, b in Y.faces_at(1)]
        self.generators = set(generators)
        for (a, b), label in zip(Y.faces_at(1), self.labels):
            if label not in self.generators:
                raise MembershipError(f"edge {{{a:#x}, {b:#x}}} has label {label:#x} outside X(0)")

    def __call__(self, edge_index: int) -> int:
        return self.labels[edge_index]


@dataclass
class SwapCycleSpace:
    generators: int
    basis: SpanBasis
    all_cycles: bool

    @property
    def dim(self) -> int:
        return len(self.basis)


def swap_cycle_space(Y: GradedComplex, generators=None) -> SwapCycleSpace:
    """Span of the 4-cycles v, v+x, v+x+x', v+x' over distinct generators x != x'."""
    if generators is None:
        generators = sorted({a ^ b for a, b in Y.faces_at(1)})
    generators = sorted(set(generators))
    edges = Y.index(1)
    d1 = boundary_matrix(Y, 1)
    basis = SpanBasis()
    made = 0
    all_cycles = True
    for (v,) in Y.faces_at(0):
        for x in generators:
            for x2 in generators:
                if x == x2:
                    continue
                corners = (v, v ^ x, v ^ x ^ x2, v ^ x2)
                chain = 0
                for a, b in zip(corners, corners[1:] + corners[:1]):
                    chain |= 1 << edges[(min(a, b), max(a, b))]
                made += 1
                if chain.bit_count() != 4 or apply_boundary(d1, chain):
                    all_cycles = False
                basis.add(chain)
    logger.debug("%d swap cycles span dimension %d", made, len(basis))
    return SwapCycleSpace(made, basis, all_cycles)


@dataclass
class HomModSwapReport:
    lhs: int
    rhs: int
    z1: int
    b1: int
    swap: int
    phi_psi: bool
    psi_phi: bool
    well_defined: bool
    swap_cycles_ok: bool
    betti: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.lhs == self.rhs and self.phi_psi and self.psi_phi and self.well_defined and self.swap_cycles_ok

    def to_json(self) -> dict:
        return {
            "betti": {str(i): b for i, b in self.betti.items()},
            "swap_dim": self.swap,
            "quotient_dim": self.rhs,
            "h1_mod_swap_dim": self.lhs,
            "passed": self.passed,
        }


def hommodswap_check(X: GradedComplex, Y: GradedComplex | None = None) -> HomModSwapReport:
    """H_1(Y)/(S_1 + B_1) against ker G_Xᵀ / im H_Xᵀ, with both maps materialised."""
    Y = Y if Y is not None else cayley_chain_complex(X)
    if not one_skeleton(Y).is_connected():
        raise DisconnectedError("the 1-skeleton of the Cayley complex is disconnected")
    pair = build_code_pair(X)
    chain = ChainComplexF2(Y)
    labels = LabelMap(Y, pair.G)
    edges = Y.index(1)

    z1 = chain.cycles(1)
    b1 = chain.boundaries(1)
    swaps = swap_cycle_space(Y, pair.G)
    quotient = SpanBasis(b1)
    for w in swaps.basis.vectors():
        quotient.add(w)
    lhs = len(z1) - len(quotient)

    ker_gt = f2_kernel(pair.codewords_basis(), pair.n)
    im_ht = SpanBasis(pair.H)
    rhs = len(ker_gt) - len(im_ht)

    def phi(alpha: int) -> int:
        out = 0
        for e in _bits(alpha):
            out ^= 1 << pair.vertex_index[labels(e)]
        return out

    def psi(c: int) -> int:
        out, here = 0, 0
        for j in _bits(c):
            there = here ^ pair.G[j]
            out ^= 1 << edges[(min(here, there), max(here, there))]
            here = there
        if here:
            raise HdxError("ψ was applied to a vector outside ker G_Xᵀ")
        return out

    well_defined = all(phi(w) in im_ht for w in b1) and all(phi(w) == 0 for w in swaps.basis.vectors())
    well_defined = well_defined and all(psi(h) in quotient for h in pair.H)
    phi_psi = all((phi(psi(c)) ^ c) in im_ht for c in ker_gt)
    psi_phi = all((psi(phi(a)) ^ a) in quotient for a in z1)
    report = HomModSwapReport(
        lhs,
        rhs,
        len(z1),
        chain.rank(2),
        swaps.dim,
        phi_psi,
        psi_phi,
        well_defined,
        swaps.all_cycles,
        chain.betti_numbers(),
    )
    logger.info("H1/(S1+B1) = %d, ker Gᵀ/im Hᵀ = %d", lhs, rhs)
    return report


# ---------- quotienting


def admissible_vector(X: GradedComplex):
    """First v of span X(0) in hex order with v outside {0} ∪ X(0) ∪ (X(0)+X(0)), or None."""
    vectors = [v for (v,) in X.faces_at(0)]
    forbidden = {0} | set(vectors) | {a ^ b for a in vectors for b in vectors}
    for v in sorted(span_group(vectors), key=lambda w: to_hex(w, X.ambient_dim)):
        if v not in forbidden:
            return v
    return None


def quotient_hypothesis(X: GradedComplex) -> tuple:
    """(2|span X(0)|, |X(0)|² + |X(0)| + 4)."""
    vectors = [v for (v,) in X.faces_at(0)]
    n = len(vectors)
    return 2 << f2_rank(vectors), n * n + n + 4


@dataclass
class QuotientStep:
    complex: GradedComplex
    v: int
    relabel: dict
    before: int
    after: int


def _drop_direction(c_v: int):
    pivot = c_v.bit_length() - 1
    low_mask = (1 << pivot) - 1

    def project(x: int) -> int:
        if x >> pivot & 1:
            x ^= c_v
        return ((x >> (pivot + 1)) << pivot) | (x & low_mask)

    return project


def quotient_once(X: GradedComplex) -> QuotientStep:
    """X′ = X in span X(0) / span{v}, keeping the incidence of X."""
    lhs, rhs = quotient_hypothesis(X)
    if lhs < rhs:
        raise HypothesisError(f"2|span X(0)| = {lhs} is below |X(0)|² + |X(0)| + 4 = {rhs}", lhs, rhs)
    v = admissible_vector(X)
    if v is None:
        raise HdxError("no admissible quotient vector although the counting hypothesis holds")
    vectors = [w for (w,) in X.faces_at(0)]
    d, coords = span_coordinates(vectors + [v])
    # coordinates of the span basis, completed by v in place of its leading direction
    project = _drop_direction(coords[-1])
    relabel = {w: project(c) for w, c in zip(vectors, coords)}
    images = set(relabel.values())
    if len(images) != len(vectors) or 0 in images:
        raise HdxError("quotient collapsed vertices; the admissible vector was not admissible")
    faces = {-1: [()], 0: sorted((w,) for w in images)}
    if X.count(1):
        faces[1] = sorted({canonical_subspace([relabel[a], relabel[b]]) for a, b in X.faces_at(1)})
    for face in faces.get(1, ()):
        a, b = face
        if a ^ b not in images:
            raise HdxError("quotient broke a triangle")
    X2 = GradedComplex("grassmannian", faces, None, ambient_dim=d - 1, params=dict(X.params) | {"quotient_by": v})
    if incidence_sets(X, relabel) != incidence_sets(X2):
        raise HdxError("quotient changed the incidence of X")
    before = quotient_dimension(build_code_pair(X))
    after = quotient_dimension(build_code_pair(X2))
    if after != before + 1:
        raise HdxError(f"quotient dimension went from {before} to {after}")
    logger.debug("quotient by %s: span %d -> %d", to_hex(v, X.ambient_dim), d, d - 1)
    return QuotientStep(X2, v, relabel, before, after)


@dataclass
class QuotientTraceRow:
    step: int
    span_dim: int
    quotient_dim: int
    v: str = ""
    h1: int | None = None

    @property
    def h1_ok(self) -> bool:
        return self.h1 is None or self.h1 >= self.quotient_dim


@dataclass
class QuotientTrace:
    complex: GradedComplex
    rows: list
    requested: int
    stop_reason: str = ""

    @property
    def completed(self) -> bool:
        return len(self.rows) - 1 == self.requested

    @property
    def increments_ok(self) -> bool:
        dims = [row.quotient_dim for row in self.rows]
        return all(b == a + 1 for a, b in zip(dims, dims[1:]))

    @property
    def passed(self) -> bool:
        return self.increments_ok and all(row.h1_ok for row in self.rows)

    def to_json(self) -> list:
        return [
            {"step": r.step, "span_dim": r.span_dim, "quotient_dim": r.quotient_dim, "v": r.v, "h1": r.h1}
            for r in self.rows
        ]


def _trace_row(X: GradedComplex, step: int, v: str, homology: bool) -> QuotientTraceRow:
    span_dim = f2_rank(w for (w,) in X.faces_at(0))
    row = QuotientTraceRow(step, span_dim, quotient_dimension(build_code_pair(X)), v)
    if homology and span_dim <= HOMOLOGY_K_LIMIT:
        row.h1 = homology_dim(cayley_chain_complex(X), 1)
    return row


def quotient_iterate(X: GradedComplex, t: int, homology: bool = True) -> QuotientTrace:
    """t successive quotients; stops early with a reason once the hypothesis fails."""
    rows = [_trace_row(X, 0, "", homology)]
    trace = QuotientTrace(X, rows, t)
    current = X
    for step in range(1, t + 1):
        try:
            result = quotient_once(current)
        except HypothesisError as exc:
            trace.stop_reason = f"step {step}: hypothesis fails ({exc.lhs} < {exc.rhs})"
            logger.warning("quotient trace stopped at %s", trace.stop_reason)
            break
        label = to_hex(result.v, current.ambient_dim)
        current = result.complex
        rows.append(_trace_row(current, step, label, homology))
    trace.complex = current
    return trace


# ---------- toy complexes


def random_rank1_complex(rng: np.random.Generator, k: int, max_vertices: int, n_faces: int) -> GradedComplex:
    """Seeded rank-1 Grassmannian complex in F2^k with at most ``max_vertices`` vertices."""
    if k < 1 or max_vertices < 1:
        raise DimensionError("need k >= 1 and at least one vertex")
    vertices = set()
    faces = set()
    for _ in range(n_faces):
        a, b = (int(x) for x in rng.integers(1, 1 << k, size=2))
        if a == b:
            continue
        new = {a, b, a ^ b} - vertices
        if len(vertices) + len(new) > max_vertices:
            continue
        vertices |= {a, b, a ^ b}
        faces.add(canonical_subspace([a, b]))
    while not vertices or (len(vertices) < max_vertices and rng.random() < 0.5):
        vertices.add(int(rng.integers(1, 1 << k)))
    out = {-1: [()], 0: sorted((v,) for v in vertices)}
    if faces:
        out[1] = sorted(faces)
    return GradedComplex("grassmannian", out, None, ambient_dim=k)


def homology_report(X: GradedComplex, quotient_steps: int = 0) -> dict:
    report = hommodswap_check(X).to_json()
    if quotient_steps:
        report["quotient_trace"] = quotient_iterate(X, quotient_steps).to_json()
    return report
