"""Pure graded weighted posets: standard weights, links, 1-skeletons, local expansion.

A :class:`GradedComplex` keeps its faces per rank (rank -1 holds the single bottom
face) together with a kind tag that fixes how faces are compared:

* ``simplicial``   faces are sorted tuples of vertex labels
* ``grassmannian`` faces are canonical F2 echelon bases (tuples of int bitsets)
* ``matrix``       faces are :class:`GFMatrix`; level i holds rank-(i+1) matrices
* ``generic``      faces are arbitrary hashables compared by a supplied ``leq``

Weights are exact :class:`Fraction` masses. ``weights=None`` means uniform on every
rank, which keeps million-face complexes cheap.
"""

from __future__ import annotations

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Sequence

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import DimensionError, MembershipError, PurityError
from .gf_linalg import GFMatrix, SpanBasis, canonical_subspace, f2_kernel, f2_rank, f2_span_elements, from_hex, to_hex
from .matrix_poset import dominates, gl_order

logger = logging.getLogger(__name__)

KINDS = ("simplicial", "grassmannian", "matrix", "generic")
WEIGHT_TOL = 1e-12
EXHAUSTIVE_LIMIT = 5000
DEFAULT_SAMPLE = 32


class GradedComplex:
    def __init__(
        self,
        kind: str,
        faces: dict,
        weights: dict | None = None,
        ambient_dim: int | None = None,
        leq: Callable | None = None,
        params: dict | None = None,
        parent: "GradedComplex | None" = None,
        shift: int = 0,
    ):
        if kind not in KINDS:
            raise ValueError(f"unknown complex kind {kind!r}")
        if kind == "generic" and leq is None and parent is None:
            raise ValueError("generic complexes need a leq oracle")
        self.kind = kind
        self.faces = {int(i): list(fs) for i, fs in faces.items()}
        if -1 not in self.faces or len(self.faces[-1]) != 1:
            raise DimensionError("a graded complex has exactly one rank -1 face")
        self.weights = weights
        self.ambient_dim = ambient_dim
        self.params = dict(params or {})
        self._leq = leq
        self.parent = parent
        self.shift = shift
        self._index = {}
        self._incidence = {}
        self._above = {}

    # structure

    @property
    def rank(self) -> int:
        return max((i for i, fs in self.faces.items() if fs), default=-1)

    @property
    def bottom(self):
        return self.faces[-1][0]

    def faces_at(self, i: int) -> list:
        return self.faces.get(i, [])

    def count(self, i: int) -> int:
        return len(self.faces.get(i, ()))

    def counts(self) -> dict:
        return {i: len(fs) for i, fs in sorted(self.faces.items())}

    def __len__(self) -> int:
        return sum(len(fs) for fs in self.faces.values())

    def index(self, i: int) -> dict:
        if i not in self._index:
            self._index[i] = {f: k for k, f in enumerate(self.faces_at(i))}
        return self._index[i]

    def contains(self, face, i: int) -> bool:
        return face in self.index(i)

    def rank_of(self, face) -> int:
        for i in sorted(self.faces):
            if face in self.index(i):
                return i
        raise MembershipError(f"{face!r} is not a face of this complex")

    # weights

    def is_uniform(self, i: int) -> bool:
        return self.weights is None or i not in self.weights

    def weight(self, face, i: int) -> Fraction:
        if self.is_uniform(i):
            if not self.contains(face, i):
                raise MembershipError(f"{face!r} is not a rank-{i} face")
            return Fraction(1, self.count(i))
        return self.weights[i][face]

    def weights_at(self, i: int) -> list:
        if self.is_uniform(i):
            w = Fraction(1, self.count(i)) if self.count(i) else Fraction(0)
            return [w] * self.count(i)
        return [self.weights[i][f] for f in self.faces_at(i)]

    def weight_array(self, i: int) -> np.ndarray:
        if self.is_uniform(i):
            n = self.count(i)
            return np.full(n, 1.0 / n) if n else np.zeros(0)
        return np.array([float(w) for w in self.weights_at(i)])

    # order

    def leq(self, a, b) -> bool:
        if self.parent is not None:
            return self.parent.leq(a, b)
        if self.kind == "simplicial":
            return set(a) <= set(b)
        if self.kind == "grassmannian":
            span = SpanBasis(b)
            return all(v in span for v in a)
        if self.kind == "matrix":
            return dominates(a, b)
        return bool(self._leq(a, b))

    def below(self, face, i: int) -> list:
        """Faces of rank i-1 covered by the rank-i face ``face``."""
        if i == 0:
            return [self.bottom]
        if self.parent is not None:
            members = self.index(i - 1)
            return [f for f in self.parent.below(face, i + self.shift) if f in members]
        members = self.index(i - 1)
        if self.kind == "simplicial":
            candidates = [tuple(c) for c in itertools.combinations(face, len(face) - 1)]
        elif self.kind == "grassmannian":
            candidates = hyperplanes(face)
        else:
            return [f for f in self.faces_at(i - 1) if self.leq(f, face)]
        return [c for c in candidates if c in members]

    def incidence(self, i: int) -> list:
        """For each rank-i face (by index), the indices of its rank-(i-1) subfaces."""
        if i not in self._incidence:
            lower = self.index(i - 1)
            self._incidence[i] = [[lower[f] for f in self.below(face, i)] for face in self.faces_at(i)]
        return self._incidence[i]

    def above_indices(self, i: int) -> list:
        """For each rank-i face, the indices of the rank-(i+1) faces covering it."""
        if i not in self._above:
            up = [[] for _ in self.faces_at(i)]
            for k, lows in enumerate(self.incidence(i + 1)):
                for low in lows:
                    up[low].append(k)
            self._above[i] = up
        return self._above[i]

    def above(self, face, i: int) -> list:
        upper = self.faces_at(i + 1)
        return [upper[k] for k in self.above_indices(i)[self.index(i)[face]]]

    def __repr__(self) -> str:
        return f"<GradedComplex kind={self.kind} counts={self.counts()}>"


def hyperplanes(face: Sequence[int]) -> list:
    """Canonical (d-1)-dimensional subspaces of the F2 span of a d-element basis."""
    d = len(face)
    if d == 1:
        return [()]
    if d == 2:
        a, b = face
        return [canonical_subspace([a]), canonical_subspace([b]), canonical_subspace([a ^ b])]
    out = []
    for functional in range(1, 1 << d):
        coeffs = f2_kernel([functional], d)
        vectors = []
        for c in coeffs:
            v = 0
            for j in range(d):
                if c >> j & 1:
                    v ^= face[j]
            vectors.append(v)
        out.append(canonical_subspace(vectors))
    return out


# ---------- weighted graphs


class WeightedGraph:
    """Undirected multigraph with integer edge multiplicities and one exact scale.

    The mass of edge {u, v} is ``counts * scale``; a self-loop is stored once.
    """

    def __init__(self, vertices: Sequence, heads, tails, counts, scale: Fraction = Fraction(1)):
        self.vertices = list(vertices)
        heads = np.asarray(heads, dtype=np.int64)
        tails = np.asarray(tails, dtype=np.int64)
        counts = np.asarray(counts, dtype=np.int64)
        lo = np.minimum(heads, tails)
        hi = np.maximum(heads, tails)
        n = len(self.vertices)
        keys, inverse = np.unique(lo * max(n, 1) + hi, return_inverse=True)
        merged = np.zeros(len(keys), dtype=np.int64)
        np.add.at(merged, inverse, counts)
        keep = merged > 0
        self.heads = (keys // max(n, 1))[keep]
        self.tails = (keys % max(n, 1))[keep]
        self.counts = merged[keep]
        self.scale = Fraction(scale)
        self._vindex = None

    @classmethod
    def from_edges(cls, vertices: Sequence, edges: Iterable, scale: Fraction = Fraction(1)) -> "WeightedGraph":
        """Build from (u, v, count) triples over vertex labels."""
        index = {v: k for k, v in enumerate(vertices)}
        heads, tails, counts = [], [], []
        for u, v, c in edges:
            heads.append(index[u])
            tails.append(index[v])
            counts.append(c)
        return cls(vertices, heads, tails, counts, scale)

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.counts)

    def vertex_index(self) -> dict:
        if self._vindex is None:
            self._vindex = {v: k for k, v in enumerate(self.vertices)}
        return self._vindex

    def mass(self, u, v) -> Fraction:
        idx = self.vertex_index()
        a, b = sorted((idx[u], idx[v]))
        hit = np.nonzero((self.heads == a) & (self.tails == b))[0]
        return self.scale * int(self.counts[hit[0]]) if len(hit) else Fraction(0)

    def total_mass(self) -> Fraction:
        return self.scale * int(self.counts.sum())

    def edge_masses(self) -> dict:
        """Exact masses keyed by vertex-index pairs (i <= j)."""
        return {(int(a), int(b)): self.scale * int(c) for a, b, c in zip(self.heads, self.tails, self.counts)}

    def adjacency(self) -> csr_matrix:
        """Symmetric adjacency of multiplicities (loops once on the diagonal)."""
        off = self.heads != self.tails
        rows = np.concatenate([self.heads, self.tails[off]])
        cols = np.concatenate([self.tails, self.heads[off]])
        data = np.concatenate([self.counts, self.counts[off]]).astype(float)
        return coo_matrix((data, (rows, cols)), shape=(self.n, self.n)).tocsr()

    def degrees(self) -> np.ndarray:
        return np.asarray(self.adjacency().sum(axis=1)).ravel()

    def isolated(self) -> list:
        deg = self.degrees()
        return [self.vertices[k] for k in np.nonzero(deg == 0)[0]]

    def components(self) -> tuple:
        return connected_components(self.adjacency(), directed=False)

    def is_connected(self) -> bool:
        return self.n > 0 and self.components()[0] == 1

    def to_csv(self) -> str:
        lines = ["source,target,mass"]
        for a, b, c in zip(self.heads, self.tails, self.counts):
            lines.append(f"{a},{b},{self.scale * int(c)}")
        return "\n".join(lines) + "\n"

    def __repr__(self) -> str:
        return f"<WeightedGraph vertices={self.n} edges={self.n_edges}>"


def _integer_masses(weights: Sequence[Fraction]) -> tuple:
    denominator = 1
    for w in weights:
        denominator = math.lcm(denominator, w.denominator)
    return [int(w * denominator) for w in weights], Fraction(1, denominator)


def one_skeleton(X: GradedComplex) -> WeightedGraph:
    """Graph on X(0); edge mass is the total weight of rank-1 faces containing both ends."""
    if X.count(1) == 0 and X.count(0) == 0:
        raise DimensionError("the 1-skeleton needs rank-0 faces")
    incidence = X.incidence(1) if X.count(1) else []
    if X.is_uniform(1):
        face_counts = [1] * len(incidence)
        scale = Fraction(1, len(incidence)) if incidence else Fraction(1)
    else:
        face_counts, scale = _integer_masses(X.weights_at(1))
    heads, tails, counts = [], [], []
    for lows, c in zip(incidence, face_counts):
        for a, b in itertools.combinations(lows, 2):
            heads.append(a)
            tails.append(b)
            counts.append(c)
    return WeightedGraph(X.faces_at(0), heads, tails, counts, scale)


# ---------- weights


def standard_weights_from_top(X: GradedComplex, top: dict | None = None) -> GradedComplex:
    """Push a top-rank distribution down through uniform choice of subfaces."""
    r = X.rank
    top_faces = X.faces_at(r)
    if top is None:
        current = [Fraction(1, len(top_faces))] * len(top_faces)
    else:
        current = [Fraction(top.get(f, 0)) for f in top_faces]
        if sum(current) != 1:
            raise ValueError("top weights must sum to 1")
    weights = {r: dict(zip(top_faces, current))}
    for i in range(r - 1, -2, -1):
        lower = [Fraction(0)] * X.count(i)
        covered = [False] * X.count(i)
        for mass, lows in zip(current, X.incidence(i + 1)):
            share = mass / len(lows)
            for low in lows:
                lower[low] += share
                covered[low] = True
        for k, ok in enumerate(covered):
            if not ok:
                raise PurityError(f"rank-{i} face {X.faces_at(i)[k]!r} lies under no top face", X.faces_at(i)[k])
        weights[i] = dict(zip(X.faces_at(i), lower))
        current = lower
    return GradedComplex(X.kind, X.faces, weights, X.ambient_dim, X._leq, X.params, X.parent, X.shift)


def check_standard(X: GradedComplex) -> float:
    """Largest gap between m_X(i) and the pushdown of m_X(i+1), over all ranks."""
    worst = 0.0
    for i in range(X.rank - 1, -2, -1):
        pushed = [Fraction(0)] * X.count(i)
        for mass, lows in zip(X.weights_at(i + 1), X.incidence(i + 1)):
            share = mass / len(lows)
            for low in lows:
                pushed[low] += share
        for a, b in zip(pushed, X.weights_at(i)):
            worst = max(worst, abs(float(a - b)))
        total = sum(X.weights_at(i), Fraction(0))
        worst = max(worst, abs(float(total - 1)))
    return worst


# ---------- links


def link(X: GradedComplex, x) -> GradedComplex:
    """Faces dominating x, ranks shifted down by rank(x)+1, weights renormalized."""
    i = X.rank_of(x)
    shift = i + 1
    faces = {-1: [x]}
    level = [x]
    j = i
    while j < X.rank:
        upper = X.faces_at(j + 1)
        idx = X.index(j)
        picked = sorted({k for f in level for k in X.above_indices(j)[idx[f]]})
        level = [upper[k] for k in picked]
        if not level:
            break
        faces[j + 1 - shift] = level
        j += 1
    weights = None
    if X.weights is not None:
        weights = {}
        for rel, fs in faces.items():
            if rel == -1:
                continue
            masses = [X.weight(f, rel + shift) for f in fs]
            total = sum(masses, Fraction(0))
            weights[rel] = {f: m / total for f, m in zip(fs, masses)}
        weights[-1] = {x: Fraction(1)}
    return GradedComplex(X.kind, faces, weights, X.ambient_dim, X._leq, X.params, parent=X, shift=shift)


@dataclass
class LinkQuotientReport:
    passed: bool
    faces: int
    reason: str = ""


def coset_reducer(x: Sequence[int]) -> Callable[[int], int]:
    """Linear map F2^k -> F2^k with kernel span(x): clears every pivot bit of x's echelon form."""
    rows = sorted(canonical_subspace(x), reverse=True)

    def reduce(v: int) -> int:
        for row in rows:
            if v >> (row.bit_length() - 1) & 1:
                v ^= row
        return v

    return reduce


def check_link_quotient(X: GradedComplex, x) -> LinkQuotientReport:
    """The link of a Grassmannian face x against the quotient complex {y/x : y ⊇ x}.

    Each face y of the link is sent to the canonical basis of its image modulo span(x).
    The map must be injective and rank-preserving, land exactly on the quotient complex
    built from X, and send the faces covered by y onto the hyperplanes of y/x.
    """
    if X.kind != "grassmannian":
        raise ValueError("quotient complexes are defined for Grassmannian complexes")
    i = X.rank_of(x)
    reduce = coset_reducer(x)

    def project(face):
        return canonical_subspace(reduce(v) for v in face)

    quotient = {}
    for j in range(i + 1, X.rank + 1):
        for y in X.faces_at(j):
            if X.leq(x, y):
                quotient.setdefault(j - i - 1, set()).add(project(y))

    L = link(X, x)
    checked = 0
    ranks = sorted(r for r in L.faces if r >= 0 and L.faces[r])
    if set(ranks) != set(quotient):
        return LinkQuotientReport(False, 0, f"link ranks {ranks} against quotient ranks {sorted(quotient)}")
    for rel in ranks:
        images = {}
        for y in L.faces_at(rel):
            image = project(y)
            if len(image) != rel + 1:
                return LinkQuotientReport(False, checked, f"{y!r} projects to dimension {len(image)}")
            if image in images:
                return LinkQuotientReport(False, checked, f"{y!r} and {images[image]!r} share the image {image!r}")
            images[image] = y
            if rel >= 1:
                covered = {project(b) for b in L.below(y, rel)}
                expected = {h for h in hyperplanes(image) if h in quotient[rel - 1]}
                if covered != expected:
                    return LinkQuotientReport(False, checked, f"covers of {y!r} do not match those of {image!r}")
            checked += 1
        if set(images) != quotient[rel]:
            return LinkQuotientReport(False, checked, f"rank {rel}: image differs from the quotient complex")
    return LinkQuotientReport(True, checked)


# ---------- local expansion


@dataclass
class LocalExpansion:
    rank: int
    value: float
    worst_face: object = None
    disconnected: list = field(default_factory=list)
    faces_checked: int = 0
    sampled: bool = False

    @property
    def label(self) -> str:
        return "sampled lower bound" if self.sampled else "exhaustive"


def local_expansion(
    X: GradedComplex,
    i: int,
    sample: int | None = None,
    seed: int = 0,
    exhaustive_limit: int = EXHAUSTIVE_LIMIT,
    threads: int = 1,
) -> LocalExpansion:
    """max over x in X(i) of λ of the 1-skeleton of the link of x."""
    from .walks_spectral import graph_lambda

    faces = X.faces_at(i)
    if not faces:
        raise DimensionError(f"rank {i} has no faces")
    sampled = False
    if sample is None and len(faces) > exhaustive_limit:
        sample = DEFAULT_SAMPLE
    if sample is not None and sample < len(faces):
        rng = np.random.default_rng(seed)
        picks = sorted(rng.choice(len(faces), size=sample, replace=False).tolist())
        faces = [faces[k] for k in picks]
        sampled = True
        logger.warning("rank-%d local expansion sampled over %d faces", i, len(faces))

    def one(face):
        L = link(X, face)
        if L.count(0) == 0:
            return face, 1.0, True
        G = one_skeleton(L)
        result = graph_lambda(G)
        return face, result.value, result.disconnected

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, faces))
    else:
        results = [one(f) for f in faces]
    out = LocalExpansion(i, 0.0, faces_checked=len(results), sampled=sampled)
    for face, value, disconnected in results:
        if disconnected:
            out.disconnected.append(face)
        if out.worst_face is None or value > out.value:
            out.value, out.worst_face = value, face
    return out


# ---------- basisification


def unordered_bases(d: int) -> int:
    """Number of unordered bases of F2^d."""
    return gl_order(d, 2) // math.factorial(d)


def bases_of(face: Sequence[int]) -> list:
    """Every basis (sorted tuple) of the F2 span of ``face``."""
    d = len(face)
    elements = sorted(f2_span_elements(list(face))[1:])
    return [c for c in itertools.combinations(elements, d) if f2_rank(c) == d]


def basisify(X: GradedComplex) -> GradedComplex:
    """Simplicial complex of all bases of faces of a Grassmannian complex."""
    if X.kind != "grassmannian":
        raise ValueError("basisification applies to Grassmannian complexes")
    faces = {-1: [()]}
    weights = None if X.weights is None else {-1: {(): Fraction(1)}}
    for i in range(0, X.rank + 1):
        level = []
        masses = {}
        n_i = unordered_bases(i + 1)
        for face in X.faces_at(i):
            share = None if weights is None else X.weight(face, i) / n_i
            for basis in bases_of(face):
                level.append(basis)
                if share is not None:
                    masses[basis] = share
        faces[i] = level
        if weights is not None:
            weights[i] = masses
    return GradedComplex("simplicial", faces, weights, X.ambient_dim, params=X.params)


# ---------- trickle-down


@dataclass
class TrickleRow:
    rank: int
    lam: float
    lam_next: float
    bound: float | None
    status: str
    note: str = ""


def trickle_bound(lam_next: float, q: int | None = None) -> float | None:
    if lam_next >= 1:
        return None
    bound = lam_next / (1 - lam_next)
    return bound / q if q else bound


def trickle_check(X: GradedComplex, tol: float = 1e-9, threads: int = 1) -> list:
    """Check λ^(i) against the trickle-down bound from λ^(i+1) for -1 <= i <= r-3."""
    q = 2 if X.kind == "grassmannian" else None
    rows = []
    for i in range(-1, X.rank - 2):
        low = local_expansion(X, i, exhaustive_limit=10**9, threads=threads)
        high = local_expansion(X, i + 1, exhaustive_limit=10**9, threads=threads)
        if low.disconnected or high.disconnected:
            face = (low.disconnected or high.disconnected)[0]
            rows.append(TrickleRow(i, low.value, high.value, None, "skipped", f"disconnected link at {face!r}"))
            continue
        bound = trickle_bound(high.value, q)
        if bound is None:
            rows.append(TrickleRow(i, low.value, high.value, None, "skipped", "vacuous: next level λ >= 1"))
            continue
        status = "pass" if low.value <= bound + tol else "fail"
        rows.append(TrickleRow(i, low.value, high.value, bound, status))
    return rows


# ---------- serialisation


def _encode_face(X: GradedComplex, face):
    if X.kind == "matrix":
        return face.to_json()
    if X.kind == "grassmannian" or (X.kind == "simplicial" and X.ambient_dim):
        return [to_hex(v, X.ambient_dim) for v in face]
    if X.kind == "simplicial":
        return list(face)
    return repr(face)


def _decode_face(kind: str, ambient_dim, obj):
    if kind == "matrix":
        return GFMatrix.from_json(obj)
    if kind == "grassmannian" or (kind == "simplicial" and ambient_dim):
        return tuple(from_hex(h) for h in obj)
    if kind == "simplicial":
        return tuple(obj)
    raise ValueError("generic complexes cannot be loaded from JSON")


def complex_to_json(X: GradedComplex) -> dict:
    ranks = {str(i): [_encode_face(X, f) for f in fs] for i, fs in sorted(X.faces.items())}
    if X.weights is None:
        weights = "uniform"
    else:
        weights = {str(i): [str(X.weight(f, i)) for f in X.faces_at(i)] for i in sorted(X.faces)}
    return {
        "kind": X.kind,
        "ambient_dim": X.ambient_dim,
        "params": X.params,
        "ranks": ranks,
        "weights": weights,
    }


def complex_from_json(obj: dict) -> GradedComplex:
    kind = obj["kind"]
    ambient = obj.get("ambient_dim")
    faces = {int(i): [_decode_face(kind, ambient, f) for f in fs] for i, fs in obj["ranks"].items()}
    if -1 not in faces:
        faces[-1] = [()]
    weights = None
    if obj.get("weights", "uniform") != "uniform":
        weights = {
            int(i): {f: Fraction(w) for f, w in zip(faces[int(i)], ws)} for i, ws in obj["weights"].items()
        }
    return GradedComplex(kind, faces, weights, ambient, params=obj.get("params"))


def simplicial_closure(top_faces: Iterable[Sequence], ambient_dim: int | None = None) -> GradedComplex:
    """Downward closure of a list of simplices, uniform weights pushed down from the top."""
    tops = sorted({tuple(sorted(f)) for f in top_faces})
    if not tops:
        return GradedComplex("simplicial", {-1: [()]}, ambient_dim=ambient_dim)
    faces = {-1: {()}}
    for f in tops:
        for k in range(1, len(f) + 1):
            for sub in itertools.combinations(f, k):
                faces.setdefault(k - 1, set()).add(sub)
    ordered = {i: sorted(fs) for i, fs in faces.items()}
    r = max(ordered)
    X = GradedComplex("simplicial", ordered, ambient_dim=ambient_dim)
    top = {f: Fraction(1, len(ordered[r])) for f in ordered[r]}
    return standard_weights_from_top(X, top)


def grassmannian_closure(top_spans: Iterable[Sequence[int]], ambient_dim: int) -> GradedComplex:
    """Every nonzero subspace of the given F2 spans, uniform weights pushed down from the top."""
    tops = sorted({canonical_subspace(f) for f in top_spans} - {()})
    if not tops:
        return GradedComplex("grassmannian", {-1: [()]}, ambient_dim=ambient_dim)
    if len({len(t) for t in tops}) != 1:
        raise DimensionError("top spans must all have the same dimension")
    faces = {-1: {()}}
    for top in tops:
        elements = f2_span_elements(list(top))[1:]
        for k in range(1, len(top) + 1):
            for sub in itertools.combinations(elements, k):
                if f2_rank(sub) == k:
                    faces.setdefault(k - 1, set()).add(canonical_subspace(sub))
    ordered = {i: sorted(fs) for i, fs in faces.items()}
    r = max(ordered)
    X = GradedComplex("grassmannian", ordered, ambient_dim=ambient_dim)
    top = {f: Fraction(1, len(ordered[r])) for f in ordered[r]}
    return standard_weights_from_top(X, top)
