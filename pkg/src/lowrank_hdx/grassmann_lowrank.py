"""Grassmannian complexes X^{r,b,n} built from low-rank matrices.

Faces of rank i are (i+1)-dimensional F2-subspaces of F_q^{n×n} (packed as F2
bitsets, see :meth:`GFMatrix.pack`). A face is determined by its minimal matrices:
2^{i+1}-1 matrices of rank 2^{r-i} with independent row and column spans, combined
through the Hadamard generator. Enumeration walks over the rank-T sum N of the
minimal matrices and over orbit representatives of the ways to split I_T.
"""

from __future__ import annotations

import functools
import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .errors import AmbiguousMeetError, DimensionError, HdxError, MembershipError, SizeCapError
from .gf_linalg import (
    FieldSpec,
    GFMatrix,
    GFVector,
    canonical_subspace,
    f2_rank,
    f2_span_elements,
    get_field,
    to_hex,
)
from .matrix_poset import (
    MatrixPosetSpec,
    combine_columns,
    count_dominated_by_identity,
    count_rank,
    dominated_below,
    dominates,
    echelon_bases,
    enumerate_rank,
    gaussian_binomial,
    gl_elements,
    gl_order,
    idempotents,
    identity_decompositions,
    meet_maximal,
    packed_outer,
    packed_rank,
)
from .poset_core import GradedComplex, WeightedGraph, one_skeleton

logger = logging.getLogger(__name__)

DEFAULT_FACE_CAP = 10_000_000
TEMPLATE_CAP = 1_000_000


# ---------- parameters


@dataclass(frozen=True)
class HadamardGen:
    """Generator of the length-(2^{r+1}-1) Hadamard code, truncated to i+1 columns."""

    r: int
    i: int
    rows: tuple

    @property
    def length(self) -> int:
        return len(self.rows)

    def column_masks(self) -> list:
        """Columns as bitsets over the code coordinates (bit k = row k)."""
        masks = []
        for c in range(self.i + 1):
            value = 0
            for k, row in enumerate(self.rows):
                if row[c]:
                    value |= 1 << k
            masks.append(value)
        return masks

    def codewords(self) -> list:
        return f2_span_elements(self.column_masks())[1:]

    def is_hadamard(self) -> bool:
        cols = self.column_masks()
        return f2_rank(cols) == len(cols) and all(
            bin(c).count("1") == 1 << self.r for c in self.codewords()
        )

    def matrix(self) -> GFMatrix:
        return GFMatrix.from_rows(get_field(1), self.rows, self.i + 1)


def hadamard_generator(r: int, i: int | None = None) -> HadamardGen:
    """Row k (1-based) is 2^{r+1}-k in binary, most significant bit first."""
    if r < 0:
        raise DimensionError(f"r must be non-negative, got {r}")
    i = r if i is None else i
    if not 0 <= i <= r:
        raise DimensionError(f"column cutoff {i} outside [0, {r}]")
    width = r + 1
    rows = []
    for k in range(1, 1 << width):
        value = (1 << width) - k
        bits = tuple((value >> (width - 1 - c)) & 1 for c in range(width))
        rows.append(bits[: i + 1])
    return HadamardGen(r, i, tuple(rows))


@dataclass(frozen=True)
class GrassConstructSpec:
    r: int
    b: int
    n: int

    def __post_init__(self):
        if self.r < 1 or self.b < 1:
            raise DimensionError("the construction needs r >= 1 and b >= 1")
        if self.n < 1 << (self.r + 1):
            raise DimensionError(f"n = {self.n} is below 2^(r+1) = {1 << (self.r + 1)}")

    @property
    def field(self) -> FieldSpec:
        return get_field(self.b)

    @property
    def q(self) -> int:
        return 1 << self.b

    @property
    def k(self) -> int:
        """F2-dimension of the ambient space F_q^{n×n}."""
        return self.b * self.n * self.n

    @property
    def poset(self) -> MatrixPosetSpec:
        return MatrixPosetSpec(self.field, self.n)

    def level(self, i: int) -> tuple:
        """(rho, t, T): minimal-matrix rank, their number and the rank of their sum."""
        if not -1 <= i <= self.r:
            raise DimensionError(f"rank {i} outside [-1, {self.r}]")
        rho = 1 << (self.r - i)
        t = (1 << (i + 1)) - 1
        return rho, t, t * rho

    def params(self) -> dict:
        return {"r": self.r, "b": self.b, "n": self.n}


# ---------- counting


def decomposition_count(T: int, rho: int, q: int) -> int:
    """Ordered splittings of I_T into T/rho rank-rho idempotents with direct sums."""
    return gl_order(T, q) // gl_order(rho, q) ** (T // rho)


def face_counts(spec: GrassConstructSpec) -> dict:
    """|X(i)| for -1 <= i <= r, without enumeration."""
    counts = {-1: 1}
    for i in range(0, spec.r + 1):
        rho, t, T = spec.level(i)
        total = count_rank(spec.n, T, spec.q) * decomposition_count(T, rho, spec.q)
        counts[i] = total // gl_order(i + 1, 2)
    return counts


def avoiding_count(n: int, w: int, s: int, q: int) -> int:
    """Rank-s n×n matrices whose row and column spans miss fixed w-dimensional subspaces."""
    subspaces = q ** (w * s) * gaussian_binomial(n - w, s, q)
    return subspaces * subspaces * gl_order(s, q)


def link_vertex_count(spec: GrassConstructSpec, i: int) -> int:
    """Number of rank-(i+1) faces containing a fixed rank-i face."""
    rho, t, T = spec.level(i)
    inner = count_dominated_by_identity(rho, rho // 2, spec.q) ** t
    return inner * avoiding_count(spec.n, T, rho // 2, spec.q) // (1 << (i + 1))


def vertex_degree(spec: GrassConstructSpec) -> int:
    """Rank-1 faces per vertex."""
    return link_vertex_count(spec, 0)


# ---------- faces


@dataclass(frozen=True)
class GrassFace:
    spec: GrassConstructSpec
    basis: tuple

    @classmethod
    def from_matrices(cls, spec: GrassConstructSpec, matrices: Sequence[GFMatrix]) -> "GrassFace":
        for M in matrices:
            if M.field != spec.field or (M.rows, M.cols) != (spec.n, spec.n):
                raise DimensionError(f"expected {spec.n}x{spec.n} matrices over GF({spec.q})")
        return cls(spec, tuple(M.pack() for M in matrices))

    @property
    def rank(self) -> int:
        return len(self.basis) - 1

    @property
    def canonical(self) -> tuple:
        return canonical_subspace(self.basis)

    def is_independent(self) -> bool:
        return f2_rank(self.basis) == len(self.basis)

    def unpack(self, value: int) -> GFMatrix:
        return GFMatrix.from_packed(self.spec.field, self.spec.n, self.spec.n, value)

    def matrices(self) -> list:
        return [self.unpack(v) for v in self.basis]

    def elements(self) -> list:
        """Nonzero elements of the span, indexed by coefficient bitmask 1..2^{i+1}-1."""
        out = [0] * (1 << len(self.basis))
        for alpha in range(1, len(out)):
            low = (alpha & -alpha).bit_length() - 1
            out[alpha] = out[alpha & (alpha - 1)] ^ self.basis[low]
        return out[1:]

    def extend(self, M: GFMatrix) -> "GrassFace":
        return GrassFace(self.spec, self.basis + (M.pack(),))

    def hex(self) -> list:
        return [to_hex(v, self.spec.k) for v in self.basis]


def _parity(x: int) -> int:
    return bin(x).count("1") & 1


def _fold_meet(members: Sequence[GFMatrix]) -> GFMatrix:
    current = members[0]
    for M in members[1:]:
        current = meet_maximal(current, M)
    return current


def _independent_spans(mats: Sequence[GFMatrix]) -> bool:
    field_ = mats[0].field
    rows = [v.entries for M in mats for v in M.row_space()]
    cols = [v.entries for M in mats for v in M.col_space()]
    total = sum(M.rank() for M in mats)
    return (
        GFMatrix.from_rows(field_, rows).rank() == total
        and GFMatrix.from_rows(field_, cols).rank() == total
    )


def minimal_matrices(x: GrassFace) -> list:
    """The unique rank-2^{r-i} matrices whose Hadamard combinations span x.

    The matrix attached to a nonzero functional p is the meet of the face elements
    on which p evaluates to 1.
    """
    i = x.rank
    spec = x.spec
    if i < 0:
        return []
    if i > spec.r:
        raise MembershipError(f"rank-{i} subspace exceeds the top rank {spec.r}")
    if not x.is_independent():
        raise MembershipError("face basis is not F2-independent")
    rho = 1 << (spec.r - i)
    elements = x.elements()
    minimal = {}
    for p in range(1, 1 << (i + 1)):
        members = [x.unpack(elements[alpha - 1]) for alpha in range(1, 1 << (i + 1)) if _parity(alpha & p)]
        try:
            M = _fold_meet(members)
        except AmbiguousMeetError as e:
            raise MembershipError(f"no unique meet for functional {p}") from e
        if M.rank() != rho:
            raise MembershipError(f"meet for functional {p} has rank {M.rank()}, expected {rho}")
        minimal[p] = M
    mats = list(minimal.values())
    if not _independent_spans(mats):
        raise MembershipError("minimal matrices do not have independent row and column spans")
    packed = {p: M.pack() for p, M in minimal.items()}
    for alpha in range(1, 1 << (i + 1)):
        value = 0
        for p, v in packed.items():
            if _parity(alpha & p):
                value ^= v
        if value != elements[alpha - 1]:
            raise MembershipError("Hadamard recombination does not reproduce the face")
    return sorted(mats, key=lambda M: M.pack())


def brute_force_minimal_matrices(x: GrassFace) -> list:
    """Minimal matrices by scanning every matrix of the target rank (small n only)."""
    i = x.rank
    spec = x.spec
    rho = 1 << (spec.r - i)
    candidates = enumerate_rank(spec.poset, rho).members
    elements = x.elements()
    found = []
    for p in range(1, 1 << (i + 1)):
        members = [x.unpack(elements[alpha - 1]) for alpha in range(1, 1 << (i + 1)) if _parity(alpha & p)]
        hits = [L for L in candidates if all(dominates(L, M) for M in members)]
        if len(hits) != 1:
            raise MembershipError(f"functional {p} has {len(hits)} common dominated rank-{rho} matrices")
        found.append(hits[0])
    return sorted(found, key=lambda M: M.pack())


def is_face(spec: GrassConstructSpec, matrices: Sequence[GFMatrix]) -> bool:
    if not matrices:
        return True
    try:
        x = GrassFace.from_matrices(spec, matrices)
        if not x.is_independent() or x.rank > spec.r:
            return False
        target = 1 << spec.r
        if any(x.unpack(v).rank() != target for v in x.elements()):
            return False
        minimal_matrices(x)
    except HdxError:
        return False
    return True


def rank1_characterization(x: GrassFace) -> bool:
    """A rank-1 face is {0, L1+L2, L1+L3, L2+L3} with L1+L2+L3 of rank 3·2^{r-1}."""
    if x.rank != 1:
        raise DimensionError("characterization applies to rank-1 faces")
    if x.spec.b == 1 and x.spec.r == 1:
        return _rank1_characterization_f2(x.spec.n, x.basis)
    L1, L2, L3 = minimal_matrices(x)
    expected = {(L1 + L2).pack(), (L1 + L3).pack(), (L2 + L3).pack()}
    return set(x.elements()) == expected and (L1 + L2 + L3).rank() == 3 << (x.spec.r - 1)


def _f2_rows(n: int, value: int) -> list:
    mask = (1 << n) - 1
    return [(value >> (i * n)) & mask for i in range(n)]


def _f2_transpose(n: int, value: int) -> int:
    out = 0
    for i in range(n):
        for j in range(n):
            if value >> (i * n + j) & 1:
                out |= 1 << (j * n + i)
    return out


def _f2_common_line(n: int, a: int, b: int) -> int | None:
    """The single nonzero vector in rowspan(a) ∩ rowspan(b), if the intersection is a line."""
    span_b = f2_span_elements([r for r in _f2_rows(n, b) if r])
    common = {v for v in f2_span_elements([r for r in _f2_rows(n, a) if r]) if v} & set(span_b)
    return common.pop() if len(common) == 1 else None


def _rank1_characterization_f2(n: int, basis: Sequence[int]) -> bool:
    """Bitset version for r = 1 over F2: meets of rank-2 matrices are outer products."""
    a, b = basis
    v = _f2_common_line(n, a, b)
    u = _f2_common_line(n, _f2_transpose(n, a), _f2_transpose(n, b))
    if v is None or u is None:
        return False
    L1 = 0
    for i in range(n):
        if u >> i & 1:
            L1 |= v << (i * n)
    L2, L3 = a ^ L1, b ^ L1
    field_ = get_field(1)
    ranks = [packed_rank(field_, n, L) for L in (L1, L2, L3)]
    return ranks == [1, 1, 1] and packed_rank(field_, n, L1 ^ L2 ^ L3) == 3


# ---------- enumeration


def _entries(A: GFMatrix) -> tuple:
    return tuple((a, b, A[a, b]) for a in range(A.rows) for b in range(A.cols) if A[a, b])


@functools.lru_cache(maxsize=None)
def face_templates(field_: FieldSpec, r: int, i: int) -> tuple:
    """One splitting of I_T per face of the identity frame, as per-column coefficient lists.

    Each template lists, for every Hadamard column c, the nonzero entries of
    sum_j G[j][c] A_j, so that the face basis for N = V1 V2ᵀ is V1 (…) V2ᵀ.
    """
    rho = 1 << (r - i)
    t = (1 << (i + 1)) - 1
    T = t * rho
    projected = decomposition_count(T, rho, field_.q)
    if projected > TEMPLATE_CAP:
        raise SizeCapError(f"{projected} splittings of I_{T} (cap {TEMPLATE_CAP})", projected, TEMPLATE_CAP)
    had = hadamard_generator(i)
    seen = set()
    templates = []
    for parts in identity_decompositions(field_, T, rho):
        columns = []
        for c in range(i + 1):
            acc = GFMatrix.zeros(field_, T)
            for j, A in enumerate(parts):
                if had.rows[j][c]:
                    acc = acc + A
            columns.append(acc)
        key = canonical_subspace(C.pack() for C in columns)
        if key in seen:
            continue
        seen.add(key)
        templates.append(tuple(_entries(C) for C in columns))
    logger.debug("rank %d of r=%d: %d face templates over GF(%d)", i, r, len(templates), field_.q)
    return tuple(templates)


def outer_table(field_: FieldSpec, U: Sequence[Sequence[int]], R: Sequence[Sequence[int]]) -> dict:
    """Packed c·outer(U[a], R[b]) for every index pair and nonzero scalar c."""
    table = {}
    for a, u in enumerate(U):
        for c in field_.nonzero():
            cu = [field_.mul(c, e) for e in u] if c != 1 else list(u)
            for b_, row in enumerate(R):
                table[(a, b_, c)] = packed_outer(field_, cu, row)
    return table


def combine_packed(table: dict, entries: Sequence[tuple]) -> int:
    value = 0
    for key in entries:
        value ^= table[key]
    return value


def _row_chunks(spec: GrassConstructSpec, T: int) -> list:
    return list(echelon_bases(spec.field, spec.n, T))


def _faces_for_rows(spec: GrassConstructSpec, T: int, R: tuple, templates: tuple) -> list:
    field_ = spec.field
    out = []
    for C in echelon_bases(field_, spec.n, T):
        for A in gl_elements(field_, T):
            U = combine_columns(field_, C, A)
            table = outer_table(field_, U, R)
            for tpl in templates:
                out.append(canonical_subspace(combine_packed(table, col) for col in tpl))
    return out


def enumerate_faces(spec: GrassConstructSpec, i: int, threads: int = 1) -> list:
    """X(i) as canonical F2 bases, in (row space, column space, core, template) order."""
    if i == -1:
        return [()]
    rho, t, T = spec.level(i)
    templates = face_templates(spec.field, spec.r, i)
    rows = _row_chunks(spec, T)
    work = functools.partial(_faces_for_rows, spec, T, templates=templates)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(work, rows))
    else:
        chunks = [work(R) for R in rows]
    faces = [f for chunk in chunks for f in chunk]
    logger.info("enumerated %d rank-%d faces of X^{%d,%d,%d}", len(faces), i, spec.r, spec.b, spec.n)
    return faces


def build_X(
    spec: GrassConstructSpec,
    cap: int = DEFAULT_FACE_CAP,
    max_rank: int | None = None,
    threads: int = 1,
) -> GradedComplex:
    """X^{r,b,n} up to ``max_rank`` with uniform weights on every rank."""
    top = spec.r if max_rank is None else max_rank
    if not -1 <= top <= spec.r:
        raise DimensionError(f"max rank {top} outside [-1, {spec.r}]")
    counts = face_counts(spec)
    wanted = {i: c for i, c in counts.items() if i <= top}
    over = {i: c for i, c in wanted.items() if c > cap}
    if over:
        raise SizeCapError(
            f"X^{{{spec.r},{spec.b},{spec.n}}} exceeds the cap of {cap} faces per rank: {over}",
            projected=wanted,
            cap=cap,
        )
    faces = {i: enumerate_faces(spec, i, threads) for i in range(-1, top + 1)}
    for i in range(0, top + 1):
        if len(faces[i]) != counts[i]:
            raise MembershipError(f"enumerated {len(faces[i])} rank-{i} faces, expected {counts[i]}")
    return GradedComplex("grassmannian", faces, None, ambient_dim=spec.k, params=spec.params())


def face_from_canonical(spec: GrassConstructSpec, face: Sequence[int]) -> GrassFace:
    return GrassFace(spec, tuple(face))


def span_dimension_of_vertices(X: GradedComplex) -> int:
    return f2_rank(face[0] for face in X.faces_at(0))


# ---------- link structure


def _avoids(field_: FieldSpec, basis: Sequence[Sequence[int]], W: Sequence[Sequence[int]]) -> bool:
    if not W:
        return True
    return GFMatrix.from_rows(field_, [*W, *basis]).rank() == len(W) + len(basis)


def iter_avoiding_factored(
    field_: FieldSpec,
    n: int,
    s: int,
    row_avoid: Sequence[Sequence[int]] = (),
    col_avoid: Sequence[Sequence[int]] = (),
) -> Iterator[tuple]:
    """(U, R) with sum_b outer(U[b], R[b]) ranging over rank-s matrices avoiding the given spans."""
    row_ok = [R for R in echelon_bases(field_, n, s) if _avoids(field_, R, row_avoid)]
    col_ok = [C for C in echelon_bases(field_, n, s) if _avoids(field_, C, col_avoid)]
    cores = gl_elements(field_, s)
    for R in row_ok:
        for C in col_ok:
            for A in cores:
                yield combine_columns(field_, C, A), R


def packed_from_factors(field_: FieldSpec, U: Sequence, R: Sequence) -> int:
    value = 0
    for u, row in zip(U, R):
        value ^= packed_outer(field_, u, row)
    return value


def link_decomposition(x: GrassFace, M: GFMatrix) -> tuple:
    """Split M into parts under each minimal matrix of x plus a part avoiding them all.

    Returns (minimal matrices of x, [M''_1, ..., M''_t], M''_last).
    """
    spec = x.spec
    mins = minimal_matrices(x)
    if x.rank == -1:
        if M.rank() != 1 << spec.r:
            raise MembershipError("matrix is not a vertex of X")
        return mins, [], M
    y = x.extend(M)
    if y.rank > spec.r or not y.is_independent():
        raise MembershipError("matrix does not extend the face")
    ks = [K for K in minimal_matrices(y) if dominates(K, M)]
    inner = []
    for Mp in mins:
        under = [K for K in ks if dominates(K, Mp)]
        if len(under) != 1:
            raise MembershipError("matrix does not split along the minimal matrices")
        inner.append(under[0])
    rest = [K for K in ks if all(K is not U for U in inner)]
    if len(rest) != 1:
        raise MembershipError("matrix has no unique avoiding part")
    return mins, inner, rest[0]


def _span_rows(mats: Sequence[GFMatrix]) -> list:
    rows = [v.entries for M in mats for v in M.row_space()]
    if not rows:
        return []
    return [tuple(r) for r in GFMatrix.from_rows(mats[0].field, rows).rref()[0]]


def _span_cols(mats: Sequence[GFMatrix]) -> list:
    return _span_rows([M.transpose() for M in mats])


def inner_neighbors(Mp: GFMatrix, A: GFMatrix) -> list:
    """B with {A, B} an edge of G1 inside the minimal matrix Mp."""
    quarter = Mp.rank() // 4
    lows = dominated_below(A, quarter)
    others = dominated_below(Mp - A, quarter)
    return [L1 + L3 for L1 in lows for L3 in others]


def outer_neighbors(avoid: Sequence[GFMatrix], A: GFMatrix) -> list:
    """B with {A, B} an edge of G2 relative to the spans of ``avoid``."""
    field_ = A.field
    n = A.rows
    quarter = A.rank() // 2
    lows = dominated_below(A, quarter)
    row_avoid = _span_rows([*avoid, A])
    col_avoid = _span_cols([*avoid, A])
    others = [
        GFMatrix.from_packed(field_, n, n, packed_from_factors(field_, U, R))
        for U, R in iter_avoiding_factored(field_, n, quarter, row_avoid, col_avoid)
    ]
    return [L1 + L3 for L1 in lows for L3 in others]


def neighbors_in_link(x: GrassFace, M: GFMatrix) -> Iterator[GFMatrix]:
    """Every M' with span{x, M, M'} a face, generated component by component."""
    spec = x.spec
    if x.rank + 2 > spec.r:
        raise MembershipError(f"rank-{x.rank} faces have no rank-{x.rank + 2} cofaces in a rank-{spec.r} complex")
    mins, inner, last = link_decomposition(x, M)
    choices = [inner_neighbors(Mp, A) for Mp, A in zip(mins, inner)]
    choices.append(outer_neighbors(mins, last))
    zero = GFMatrix.zeros(spec.field, spec.n)
    for parts in itertools.product(*choices):
        total = zero
        for P in parts:
            total = total + P
        yield total


def link_vertices(x: GrassFace) -> Iterator[GFMatrix]:
    """Every M with span{x, M} a face one rank up (each such face appears 2^{i+1} times)."""
    spec = x.spec
    field_ = spec.field
    n = spec.n
    mins = minimal_matrices(x)
    rho, _, _ = spec.level(x.rank)
    half = rho // 2
    choices = [dominated_below(Mp, half) for Mp in mins]
    row_avoid = _span_rows(mins)
    col_avoid = _span_cols(mins)
    choices.append([
        GFMatrix.from_packed(field_, n, n, packed_from_factors(field_, U, R))
        for U, R in iter_avoiding_factored(field_, n, half, row_avoid, col_avoid)
    ])
    zero = GFMatrix.zeros(field_, n)
    for parts in itertools.product(*choices):
        total = zero
        for P in parts:
            total = total + P
        yield total


# ---------- the factor graphs


@dataclass(frozen=True)
class LinkGraphSpec:
    which: str
    r: int
    i: int
    b: int = 1
    n: int | None = None
    row_avoid: tuple | None = None
    col_avoid: tuple | None = None

    def __post_init__(self):
        if self.which not in ("G1", "G2"):
            raise ValueError(f"unknown link graph {self.which!r}")
        if not -1 <= self.i <= self.r - 2:
            raise DimensionError(f"link graphs need -1 <= i <= r-2, got i={self.i}, r={self.r}")
        if self.which == "G2" and (self.n is None or self.n < 1 << (self.r + 1)):
            raise DimensionError("G2 needs n >= 2^(r+1)")

    @property
    def field(self) -> FieldSpec:
        return get_field(self.b)

    @property
    def q(self) -> int:
        return 1 << self.b

    @property
    def rho(self) -> int:
        return 1 << (self.r - self.i)

    @property
    def avoid_dim(self) -> int:
        return (1 << (self.r + 1)) - self.rho

    def avoid_spaces(self) -> tuple:
        """(rows, cols) to avoid; the first avoid_dim coordinates unless overridden."""
        w = self.avoid_dim
        default = tuple(tuple(1 if j == c else 0 for j in range(self.n)) for c in range(w))
        rows = default if self.row_avoid is None else self.row_avoid
        cols = default if self.col_avoid is None else self.col_avoid
        return rows, cols

    def projected_vertices(self) -> int:
        if self.which == "G1":
            return count_dominated_by_identity(self.rho, self.rho // 2, self.q)
        return avoiding_count(self.n, self.avoid_dim, self.rho // 2, self.q)

    def projected_edges(self) -> int:
        s = self.rho // 4
        splits = decomposition_count(3 * s, s, self.q) // 2
        if self.which == "G1":
            return count_dominated_by_identity(self.rho, 3 * s, self.q) * splits
        return avoiding_count(self.n, self.avoid_dim, 3 * s, self.q) * splits


def _factored_idempotents(field_: FieldSpec, m: int, s: int) -> Iterator[tuple]:
    for N in idempotents(field_, m, s):
        V1, V2 = N.rank_factorization()
        yield [V1.col(a) for a in range(V1.cols)], [V2.col(b) for b in range(V2.cols)]


@functools.lru_cache(maxsize=None)
def _edge_templates(field_: FieldSpec, s: int) -> tuple:
    """For each ordered split (L1, L2, L3) of I_{3s}: entries of L1+L2 and of L1+L3."""
    out = []
    for L1, L2, L3 in identity_decompositions(field_, 3 * s, s):
        out.append((_entries(L1 + L2), _entries(L1 + L3)))
    return tuple(out)


def build_link_graph(spec: LinkGraphSpec, cap: int = DEFAULT_FACE_CAP) -> WeightedGraph:
    """G1 or G2 with unit edge masses (each edge {L1+L2, L1+L3} once)."""
    if spec.rho < 4:
        raise DimensionError("link graphs need rho = 2^(r-i) >= 4")
    projected = spec.projected_vertices()
    if projected > cap:
        raise SizeCapError(f"{spec.which} has {projected} vertices (cap {cap})", projected, cap)
    field_ = spec.field
    half = spec.rho // 2
    quarter = spec.rho // 4
    if spec.which == "G1":
        vertices = [M.pack() for M in idempotents(field_, spec.rho, half)]
        sums = _factored_idempotents(field_, spec.rho, 3 * quarter)
    else:
        rows, cols = spec.avoid_spaces()
        vertices = [
            packed_from_factors(field_, U, R)
            for U, R in iter_avoiding_factored(field_, spec.n, half, rows, cols)
        ]
        sums = iter_avoiding_factored(field_, spec.n, 3 * quarter, rows, cols)
    index = {v: k for k, v in enumerate(vertices)}
    templates = _edge_templates(field_, quarter)
    heads, tails = [], []
    for U, R in sums:
        table = outer_table(field_, U, R)
        for left, right in templates:
            a = combine_packed(table, left)
            b_ = combine_packed(table, right)
            if a < b_:
                try:
                    heads.append(index[a])
                    tails.append(index[b_])
                except KeyError as e:
                    raise MembershipError(f"{spec.which} edge endpoint is not a vertex") from e
    logger.info("%s(r=%d, i=%d, q=%d): %d vertices, %d edges", spec.which, spec.r, spec.i, spec.q,
                len(vertices), len(heads))
    return WeightedGraph(vertices, heads, tails, np.ones(len(heads), dtype=np.int64))


# ---------- projection onto a link


@dataclass
class TensorProjectionReport:
    mode: str
    face_rank: int
    checked: int = 0
    vertex_fibres: set = field(default_factory=set)
    edge_fibres: set = field(default_factory=set)
    failures: list = field(default_factory=list)
    lambda_link: float | None = None
    lambda_factors: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.failures and len(self.vertex_fibres) <= 1 and len(self.edge_fibres) <= 1


def _random_full_rank(rng, field_: FieldSpec, n: int, s: int, avoid: Sequence) -> list:
    while True:
        vecs = [tuple(int(e) for e in rng.integers(0, field_.q, size=n)) for _ in range(s)]
        if GFMatrix.from_rows(field_, vecs).rank() == s and _avoids(field_, vecs, avoid):
            return vecs


def _sample_inner_edge(rng, Mp: GFMatrix) -> tuple:
    quarter = Mp.rank() // 4
    choices = dominated_below(Mp, 3 * quarter)
    N = choices[int(rng.integers(len(choices)))]
    return _sample_split(rng, N, quarter)


def _sample_split(rng, N: GFMatrix, quarter: int) -> tuple:
    V1, V2 = N.rank_factorization()
    splits = identity_decompositions(N.field, 3 * quarter, quarter)
    L1, L2, L3 = splits[int(rng.integers(len(splits)))]
    V2t = V2.transpose()
    L1, L2, L3 = (V1 @ L @ V2t for L in (L1, L2, L3))
    return L1 + L2, L1 + L3


def _sample_outer_edge(rng, mins: Sequence[GFMatrix], n: int, field_: FieldSpec, quarter: int) -> tuple:
    rows = _span_rows(mins)
    cols = _span_cols(mins)
    R = _random_full_rank(rng, field_, n, 3 * quarter, rows)
    U = _random_full_rank(rng, field_, n, 3 * quarter, cols)
    N = GFMatrix.from_packed(field_, n, n, packed_from_factors(field_, U, R))
    return _sample_split(rng, N, quarter)


def _is_inner_edge(Mp: GFMatrix, A: GFMatrix, B: GFMatrix) -> bool:
    quarter = Mp.rank() // 4
    try:
        L1 = meet_maximal(A, B)
    except AmbiguousMeetError:
        return False
    N = A + B + L1
    return L1.rank() == quarter and N.rank() == 3 * quarter and dominates(N, Mp)


def _is_outer_edge(mins: Sequence[GFMatrix], A: GFMatrix, B: GFMatrix) -> bool:
    quarter = A.rank() // 2
    try:
        L1 = meet_maximal(A, B)
    except AmbiguousMeetError:
        return False
    N = A + B + L1
    if L1.rank() != quarter or N.rank() != 3 * quarter:
        return False
    if not mins:
        return True
    field_ = A.field
    return _avoids(field_, _span_rows([N]), _span_rows(mins)) and _avoids(field_, _span_cols([N]), _span_cols(mins))


def _product_edge(x: GrassFace, u: GFMatrix, v: GFMatrix) -> bool:
    try:
        mins, inner_u, last_u = link_decomposition(x, u)
        _, inner_v, last_v = link_decomposition(x, v)
    except HdxError:
        return False
    if not all(_is_inner_edge(Mp, a, b) for Mp, a, b in zip(mins, inner_u, inner_v)):
        return False
    return _is_outer_edge(mins, last_u, last_v)


def _coset(x: GrassFace, M: GFMatrix) -> list:
    """The elements of span{x, M} outside x."""
    shift = [0] + x.elements()
    value = M.pack()
    return [x.unpack(value ^ s) for s in shift]


def random_vertex(spec: GrassConstructSpec, seed: int = 0) -> GrassFace:
    """A uniformly random rank-2^r matrix as a rank-0 face."""
    rng = np.random.default_rng(seed)
    field_ = spec.field
    s = 1 << spec.r
    R = _random_full_rank(rng, field_, spec.n, s, ())
    U = _random_full_rank(rng, field_, spec.n, s, ())
    return GrassFace(spec, (packed_from_factors(field_, U, R),))


def tensor_projection_check(
    x: GrassFace,
    mode: str = "auto",
    samples: int = 20,
    seed: int = 0,
    X: GradedComplex | None = None,
    cap: int = DEFAULT_FACE_CAP,
) -> TensorProjectionReport:
    """Check that summing components maps G1^{⊗t} ⊗ G2 onto the link 1-skeleton of x.

    ``full`` (bottom face of a rank-1 complex only) compares the whole of G2 with the
    1-skeleton of X exactly. ``sampled`` draws product edges, checks that their images
    are link edges and counts every vertex and edge fibre.
    """
    from .walks_spectral import projection_check

    spec = x.spec
    i = x.rank
    if not -1 <= i <= spec.r - 2:
        raise DimensionError(f"projection needs -1 <= i <= r-2, got {i}")
    if mode == "auto":
        mode = "full" if spec.r == 1 else "sampled"
    if mode == "full":
        if spec.r != 1:
            raise DimensionError("the full projection check needs r = 1")
        report = TensorProjectionReport("full", i)
        G2 = build_link_graph(LinkGraphSpec("G2", spec.r, -1, spec.b, spec.n), cap)
        if X is None:
            X = build_X(spec, cap, max_rank=1)
        outcome = projection_check(lambda v: (v,), G2, one_skeleton(X))
        report.checked = G2.n_edges
        report.failures.extend(outcome.failures)
        report.vertex_fibres.add(1)
        report.edge_fibres.add(1)
        report.lambda_link = outcome.lambda_small
        report.lambda_factors["G2"] = outcome.lambda_big
        return report
    if mode != "sampled":
        raise ValueError(f"unknown projection mode {mode!r}")

    report = TensorProjectionReport("sampled", i)
    rng = np.random.default_rng(seed)
    field_ = spec.field
    mins = minimal_matrices(x)
    rho, _, _ = spec.level(i)
    quarter = rho // 4
    expected = 1 << (i + 1)
    base = x.matrices()
    for _ in range(samples):
        us, vs = [], []
        for Mp in mins:
            a, b_ = _sample_inner_edge(rng, Mp)
            us.append(a)
            vs.append(b_)
        a, b_ = _sample_outer_edge(rng, mins, spec.n, field_, quarter)
        us.append(a)
        vs.append(b_)
        u = sum(us[1:], us[0])
        v = sum(vs[1:], vs[0])
        report.checked += 1
        if not (is_face(spec, [*base, u]) and is_face(spec, [*base, v])):
            report.failures.append(("vertex outside the link", u.hex(), v.hex()))
            continue
        if not is_face(spec, [*base, u, v]):
            report.failures.append(("edge outside the link", u.hex(), v.hex()))
            continue
        cu, cv = _coset(x, u), _coset(x, v)
        fibre = sum(1 for z in cu if _decomposes(x, z))
        edges = sum(1 for z in cu for w in cv if _product_edge(x, z, w))
        report.vertex_fibres.add(fibre)
        report.edge_fibres.add(edges)
        if fibre != expected:
            report.failures.append(("vertex fibre", fibre, expected))
        elif edges != expected * expected:
            report.failures.append(("edge fibre", edges, expected * expected))
    logger.info("sampled projection at rank %d: %d samples, %d failures", i, report.checked, len(report.failures))
    return report


def _decomposes(x: GrassFace, M: GFMatrix) -> bool:
    try:
        link_decomposition(x, M)
    except HdxError:
        return False
    return True
