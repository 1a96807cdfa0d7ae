"""The code pair (G_X, H_X) of a rank-1 Grassmannian complex.

G_X has one row per vertex (its F2^k vector); H_X has one weight-3 row per rank-1
face, the indicator of the face's three nonzero elements. All matrices are lists of
int bitsets: rows of G over k coordinates, rows of H over |X(0)| coordinates.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from .cayley import character_sums
from .errors import DegenerateCoverError, DimensionError, SizeCapError
from .gf_linalg import SpanBasis, canonical_subspace, f2_kernel, f2_rank, to_hex
from .poset_core import GradedComplex

logger = logging.getLogger(__name__)

CODEWORD_LIMIT = 24
BIAS_TOL = 1e-9


@dataclass
class CodePair:
    k: int
    G: list
    H: list
    vertex_index: dict
    face_index: dict

    @property
    def n(self) -> int:
        return len(self.G)

    @property
    def n_checks(self) -> int:
        return len(self.H)

    def check_weights(self) -> bool:
        return all(row.bit_count() == 3 for row in self.H)

    def orthogonal(self) -> bool:
        """H·G = 0 over F2."""
        for row in self.H:
            acc = 0
            while row:
                low = row & -row
                acc ^= self.G[low.bit_length() - 1]
                row ^= low
            if acc:
                return False
        return True

    def codewords_basis(self) -> list:
        """Basis of im G_X ⊆ F2^{|X(0)|}: one codeword per ambient coordinate, reduced."""
        columns = []
        for t in range(self.k):
            word = 0
            for j, v in enumerate(self.G):
                if v >> t & 1:
                    word |= 1 << j
            columns.append(word)
        return list(canonical_subspace(columns))

    def rank_G(self) -> int:
        return f2_rank(self.G)

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "n": self.n,
            "generator": [to_hex(v, self.k) for v in self.G],
            "checks": [_support(row) for row in self.H],
        }


def _support(row: int) -> list:
    out = []
    while row:
        low = row & -row
        out.append(low.bit_length() - 1)
        row ^= low
    return out


def build_code_pair(X: GradedComplex) -> CodePair:
    """G_X and H_X with vertices and faces in canonical order."""
    if X.kind != "grassmannian":
        raise ValueError("code pairs are defined for Grassmannian complexes")
    if X.count(0) == 0:
        raise DimensionError("X has no vertices")
    vertices = sorted(v for (v,) in X.faces_at(0))
    vertex_index = {v: j for j, v in enumerate(vertices)}
    faces = sorted(X.faces_at(1))
    face_index = {f: j for j, f in enumerate(faces)}
    H = []
    for a, b in faces:
        row = 0
        for v in (a, b, a ^ b):
            row |= 1 << vertex_index[v]
        H.append(row)
    return CodePair(X.ambient_dim, vertices, H, vertex_index, face_index)


def h_rank(pair: CodePair, target: int | None = None) -> tuple:
    """Streaming rank of H_X; stops once ``target`` is reached. Returns (rank, basis, stopped_early)."""
    basis = SpanBasis()
    for m, row in enumerate(pair.H):
        basis.add(row)
        if target is not None and len(basis) >= target:
            logger.debug("rank of H reached %d after %d of %d rows", target, m + 1, pair.n_checks)
            return len(basis), basis, m + 1 < pair.n_checks
    return len(basis), basis, False


def kernel_H(pair: CodePair) -> list:
    """Reduced echelon basis of ker H_X; equals im G_X when the rank certificate is met."""
    image = pair.codewords_basis()
    target = pair.n - len(image)
    rank, basis, _ = h_rank(pair, target)
    if rank == target:
        return image
    return list(canonical_subspace(f2_kernel(basis.vectors(), pair.n)))


def quotient_dimension(pair: CodePair) -> int:
    """dim ker G_Xᵀ - rank H_Xᵀ = |X(0)| - rank G - rank H."""
    return pair.n - pair.rank_G() - h_rank(pair)[0]


def _generator_rows(kernel: list, n: int) -> list:
    """Rows of the generator matrix whose columns are the kernel basis vectors."""
    rows = []
    for j in range(n):
        vec = 0
        for t, w in enumerate(kernel):
            if w >> j & 1:
                vec |= 1 << t
        rows.append(vec)
    return rows


def cover_lift(X: GradedComplex) -> dict:
    """Vertex of X -> vertex of its universal cover."""
    pair = build_code_pair(X)
    lifted = _generator_rows(kernel_H(pair), pair.n)
    seen = {}
    for j, vec in enumerate(lifted):
        if vec == 0:
            raise DegenerateCoverError(f"ker H_X forces vertex {to_hex(pair.G[j], pair.k)} to zero", pair.G[j])
        if vec in seen:
            raise DegenerateCoverError(
                f"vertices {to_hex(pair.G[seen[vec]], pair.k)} and {to_hex(pair.G[j], pair.k)} lift to the same vector",
                pair.G[j],
            )
        seen[vec] = j
    return dict(zip(pair.G, lifted))


def universal_cover(X: GradedComplex) -> GradedComplex:
    """Rank-1 complex with the incidence of X whose generator code is ker H_X."""
    lift = cover_lift(X)
    d = f2_rank(lift.values())
    faces = {-1: [()], 0: sorted((v,) for v in lift.values())}
    if X.count(1):
        faces[1] = sorted({canonical_subspace([lift[a], lift[b]]) for a, b in X.faces_at(1)})
    params = dict(X.params) | {"cover_of": X.ambient_dim}
    logger.info("universal cover: ambient dimension %d -> %d", X.ambient_dim, d)
    return GradedComplex("grassmannian", faces, None, ambient_dim=d, params=params)


def generator_code(X: GradedComplex, order: list | None = None) -> tuple:
    """Reduced basis of im G_X ⊆ F2^{|X(0)|} with coordinates in ``order`` (default sorted vertices)."""
    order = order or sorted(v for (v,) in X.faces_at(0))
    words = []
    for t in range(X.ambient_dim):
        word = 0
        for j, v in enumerate(order):
            if v >> t & 1:
                word |= 1 << j
        words.append(word)
    return canonical_subspace(words)


def incidence_sets(X: GradedComplex, relabel: dict | None = None) -> set:
    """Rank-1 faces as frozensets of vertex labels (optionally relabelled)."""
    relabel = relabel or {}
    out = set()
    for a, b in X.faces_at(1):
        out.add(frozenset(relabel.get(v, v) for v in (a, b, a ^ b)))
    return out


# ---------- bias and balance


def span_coordinates(vectors: list) -> tuple:
    """Coordinates of ``vectors`` in the reduced echelon basis of their span."""
    basis = canonical_subspace(vectors)
    pivots = [w.bit_length() - 1 for w in basis]
    coords = []
    for v in vectors:
        c = 0
        for t, p in enumerate(pivots):
            if v >> p & 1:
                c |= 1 << t
        coords.append(c)
    return len(basis), coords


def bias(generators: list, k: int, weights=None) -> float:
    """Largest |E_s (-1)^{s·u}| over nonzero characters u of F2^k."""
    gens = list(generators)
    if not gens:
        raise ValueError("empty generator multiset")
    if k == 0:
        return 0.0
    sums = character_sums(k, gens, weights)
    return float(np.abs(sums[1:]).max() / sums[0])


def codeword_weights(basis: list) -> np.ndarray:
    """Weights of all nonzero codewords of span(basis), in Gray-code order."""
    d = len(basis)
    if d > CODEWORD_LIMIT:
        raise SizeCapError(f"2^{d} codewords exceed the enumeration limit", 1 << d, 1 << CODEWORD_LIMIT)
    weights = np.empty((1 << d) - 1, dtype=np.int64)
    current = 0
    for m in range(1, 1 << d):
        current ^= basis[(m & -m).bit_length() - 1]
        weights[m - 1] = current.bit_count()
    return weights


@dataclass
class BalancedReport:
    epsilon: float
    length: int
    min_weight: int
    max_weight: int
    codewords: int

    @property
    def passed(self) -> bool:
        low = (1 - self.epsilon) * self.length / 2
        high = (1 + self.epsilon) * self.length / 2
        return self.codewords == 0 or (self.min_weight >= low - BIAS_TOL and self.max_weight <= high + BIAS_TOL)


def balanced_check(basis: list, length: int, epsilon: float) -> BalancedReport:
    """Every nonzero codeword weight within [(1-ε)N/2, (1+ε)N/2]."""
    independent = list(canonical_subspace(basis))
    weights = codeword_weights(independent)
    if not len(weights):
        return BalancedReport(epsilon, length, 0, 0, 0)
    return BalancedReport(epsilon, length, int(weights.min()), int(weights.max()), len(weights))


@dataclass
class DistanceReport:
    status: str
    lam: float
    bias: float = 0.0
    bound: float = 0.0
    window: tuple = ()
    min_fraction: float | None = None
    max_fraction: float | None = None
    dimension: int = 0
    note: str = ""
    degrees: dict = field(default_factory=dict)


def vertex_degrees(X: GradedComplex) -> dict:
    """Rank-1 faces per vertex, as a histogram {degree: vertices}."""
    above = X.above_indices(0)
    hist = {}
    for faces in above:
        hist[len(faces)] = hist.get(len(faces), 0) + 1
    return hist


def expansion_to_distance_check(X: GradedComplex, lam: float, tol: float = BIAS_TOL) -> DistanceReport:
    """bias(X(0)) ≤ λ/(1-λ) and codeword weights of im G_X in the matching window."""
    degrees = vertex_degrees(X)
    if len(degrees) > 1:
        logger.warning("X is irregular (%s); skipping the expansion-to-distance check", degrees)
        return DistanceReport("skipped", lam, note="irregular: vertex degrees differ", degrees=degrees)
    if lam >= 1:
        return DistanceReport("skipped", lam, note="vacuous: λ >= 1", degrees=degrees)
    bound = lam / (1 - lam)
    half_width = bound / 2
    window = (0.5 - half_width, 0.5 + half_width)
    vectors = [v for (v,) in X.faces_at(0)]
    d, coords = span_coordinates(vectors)
    N = len(vectors)
    sums = character_sums(d, coords)
    measured = float(np.abs(sums[1:]).max() / N) if d else 0.0
    report = DistanceReport("pass", lam, measured, bound, window, dimension=d, degrees=degrees)
    if measured > bound + tol:
        report.status = "fail"
        report.note = f"bias {measured:.12g} exceeds λ/(1-λ) = {bound:.12g}"
    if d <= CODEWORD_LIMIT and d:
        # weight of the codeword for character u is (N - sums[u]) / 2
        fractions = (N - sums[1:]) / (2 * N)
        report.min_fraction = float(fractions.min())
        report.max_fraction = float(fractions.max())
        gray = codeword_weights(list(generator_code(X)))
        if int(gray.min()) != round(report.min_fraction * N) or int(gray.max()) != round(report.max_fraction * N):
            report.status = "fail"
            report.note = (report.note + "; " if report.note else "") + "Gray-code sweep disagrees with character sums"
        if report.min_fraction < window[0] - tol or report.max_fraction > window[1] + tol:
            report.status = "fail"
            report.note = (report.note + "; " if report.note else "") + "codeword weight outside the window"
    logger.info("expansion to distance: bias %.6g, bound %.6g, status %s", measured, bound, report.status)
    return report


# ---------- export


def parity_check_text(pair: CodePair) -> str:
    """One check per line: the three column indices, ascending."""
    return "".join(" ".join(str(c) for c in _support(row)) + "\n" for row in pair.H)


def code_to_json(pair: CodePair) -> str:
    return json.dumps(pair.to_json(), sort_keys=True)
