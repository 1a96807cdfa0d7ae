"""The matrix poset: square matrices over F_q with M1 ⪯ M2 iff rank is additive.

Besides the relation itself this module enumerates rank levels (in the canonical
order row space, column space, invertible core), computes meets of pairs of matrices
and decides domination by the identity through a rank factorization.
"""

from __future__ import annotations

import functools
import itertools
import logging
from dataclasses import dataclass, field
from math import prod
from typing import Iterator, Sequence

import numpy as np

from .errors import AmbiguousMeetError, DimensionError, SizeCapError
from .gf_linalg import FieldSpec, GFMatrix, GFVector, intersect_subspaces

logger = logging.getLogger(__name__)

DEFAULT_ENUM_CAP = 10**8
MEET_CANDIDATE_CAP = 1 << 20


@dataclass(frozen=True)
class MatrixPosetSpec:
    field: FieldSpec
    m: int

    def __post_init__(self):
        if self.m < 1:
            raise DimensionError(f"matrix side length must be positive, got {self.m}")

    @property
    def q(self) -> int:
        return self.field.q

    def identity(self) -> GFMatrix:
        return GFMatrix.identity(self.field, self.m)

    def zero(self) -> GFMatrix:
        return GFMatrix.zeros(self.field, self.m)


@dataclass
class RankLevel:
    spec: MatrixPosetSpec
    s: int
    members: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def to_json(self) -> list:
        return [M.to_json() for M in self.members]

    def iter_jsonl(self) -> Iterator[dict]:
        for M in self.members:
            yield M.to_json()


# ---------- counting


def gaussian_binomial(m: int, s: int, q: int) -> int:
    """Number of s-dimensional subspaces of F_q^m."""
    if s < 0 or s > m:
        return 0
    num = prod(q ** (m - i) - 1 for i in range(s))
    den = prod(q ** (i + 1) - 1 for i in range(s))
    return num // den


def gl_order(s: int, q: int) -> int:
    return prod(q**s - q**i for i in range(s))


def count_rank(m: int, s: int, q: int) -> int:
    """Number of rank-s matrices in F_q^{m×m}."""
    if s < 0 or s > m:
        return 0
    return gaussian_binomial(m, s, q) * prod(q**m - q**i for i in range(s))


def count_dominated_by_identity(m: int, s: int, q: int) -> int:
    """Number of rank-s matrices ⪯ I_m (the rank-s idempotents)."""
    return gaussian_binomial(m, s, q) * q ** (s * (m - s))


# ---------- enumeration


def echelon_bases(field_: FieldSpec, m: int, s: int) -> Iterator[tuple]:
    """Reduced echelon s×m matrices (as tuples of row tuples), one per s-subspace."""
    q = field_.q
    for pivots in itertools.combinations(range(m), s):
        pivot_set = set(pivots)
        free = [(i, c) for i, p in enumerate(pivots) for c in range(p + 1, m) if c not in pivot_set]
        for values in itertools.product(range(q), repeat=len(free)):
            rows = [[0] * m for _ in range(s)]
            for i, p in enumerate(pivots):
                rows[i][p] = 1
            for (i, c), v in zip(free, values):
                rows[i][c] = v
            yield tuple(tuple(r) for r in rows)


def _vector_key(field_: FieldSpec, v: Sequence[int]) -> int:
    key = 0
    for j, e in enumerate(v):
        key |= e << (field_.b * j)
    return key


def invertible_matrices(field_: FieldSpec, s: int) -> Iterator[tuple]:
    """GL_s(F_q) as tuples of rows, each row chosen outside the span of the earlier ones."""
    q = field_.q
    vectors = list(itertools.product(range(q), repeat=s))

    def extend(rows, span):
        if len(rows) == s:
            yield tuple(rows)
            return
        for v in vectors:
            if _vector_key(field_, v) in span:
                continue
            grown = set(span)
            for c in range(1, q):
                cv = [field_.mul(c, e) for e in v]
                for w in span:
                    grown.add(w ^ _vector_key(field_, cv))
            yield from extend(rows + [v], grown)

    yield from extend([], {0})


@functools.lru_cache(maxsize=None)
def gl_elements(field_: FieldSpec, s: int) -> tuple:
    return tuple(invertible_matrices(field_, s))


def packed_outer(field_: FieldSpec, u: Sequence[int], v: Sequence[int]) -> int:
    """pack(outer(u, v)) for an m×m matrix, computed directly on the bitset."""
    b = field_.b
    m = len(v)
    if b == 1:
        vmask = 0
        for j, e in enumerate(v):
            if e:
                vmask |= 1 << j
        value = 0
        for i, e in enumerate(u):
            if e:
                value |= vmask << (i * m)
        return value
    value = 0
    mul = field_.mul
    for i, a in enumerate(u):
        if not a:
            continue
        for j, c in enumerate(v):
            if c:
                value |= mul(a, c) << (b * (i * m + j))
    return value


def iter_rank_factored(spec: MatrixPosetSpec, s: int) -> Iterator[tuple]:
    """Yield (row basis, column basis, core) for every rank-s matrix, canonical order.

    The matrix is ``sum_b outer(u_b, r_b)`` with ``u_b = sum_a core[a][b] * c_a``.
    """
    field_ = spec.field
    if s == 0:
        yield (), (), ()
        return
    cores = gl_elements(field_, s)
    col_bases = list(echelon_bases(field_, spec.m, s))
    for R in echelon_bases(field_, spec.m, s):
        for C in col_bases:
            for A in cores:
                yield R, C, A


def combine_columns(field_: FieldSpec, C: Sequence[Sequence[int]], A: Sequence[Sequence[int]]) -> list:
    """Vectors u_b = sum_a A[a][b] * C[a]."""
    m = len(C[0])
    mul = field_.mul
    out = []
    for b_ in range(len(A[0])):
        u = [0] * m
        for a, c in enumerate(C):
            coeff = A[a][b_]
            if coeff:
                for i, e in enumerate(c):
                    if e:
                        u[i] ^= mul(coeff, e)
        out.append(u)
    return out


def iter_rank_packed(spec: MatrixPosetSpec, s: int) -> Iterator[int]:
    """Packed (F2-flattened) rank-s matrices in canonical enumeration order."""
    field_ = spec.field
    for R, C, A in iter_rank_factored(spec, s):
        if s == 0:
            yield 0
            continue
        value = 0
        for u, r in zip(combine_columns(field_, C, A), R):
            value ^= packed_outer(field_, u, r)
        yield value


def enumerate_rank(spec: MatrixPosetSpec, s: int, cap: int = DEFAULT_ENUM_CAP) -> RankLevel:
    if not 0 <= s <= spec.m:
        raise DimensionError(f"rank {s} outside [0, {spec.m}]")
    projected = count_rank(spec.m, s, spec.q)
    if projected > cap:
        raise SizeCapError(
            f"rank-{s} level of M_{spec.q}^{spec.m} has {projected} matrices (cap {cap})",
            projected=projected,
            cap=cap,
        )
    members = [GFMatrix.from_packed(spec.field, spec.m, spec.m, v) for v in iter_rank_packed(spec, s)]
    logger.debug("enumerated %d rank-%d matrices of M_%d^%d", len(members), s, spec.q, spec.m)
    return RankLevel(spec, s, members)


def all_matrices(spec: MatrixPosetSpec, cap: int = 1 << 16) -> list:
    """Every matrix of the poset (brute-force oracle for small specs)."""
    total = spec.q ** (spec.m * spec.m)
    if total > cap:
        raise SizeCapError(f"M_{spec.q}^{spec.m} has {total} matrices (cap {cap})", projected=total, cap=cap)
    return [GFMatrix.from_packed(spec.field, spec.m, spec.m, v) for v in range(total)]


# ---------- the relation


def dominates(M1: GFMatrix, M2: GFMatrix) -> bool:
    """M1 ⪯ M2."""
    if M1.field != M2.field or (M1.rows, M1.cols) != (M2.rows, M2.cols):
        raise DimensionError(
            f"cannot compare {M1.rows}x{M1.cols} and {M2.rows}x{M2.cols} matrices"
        )
    return (M2 - M1).rank() == M2.rank() - M1.rank()


def packed_rank(field_: FieldSpec, n: int, value: int) -> int:
    """Rank of a packed n×n matrix."""
    if field_.b == 1:
        mask = (1 << n) - 1
        rows = {}
        rank = 0
        for i in range(n):
            v = (value >> (i * n)) & mask
            while v:
                lead = v.bit_length() - 1
                row = rows.get(lead)
                if row is None:
                    rows[lead] = v
                    rank += 1
                    break
                v ^= row
        return rank
    return GFMatrix.from_packed(field_, n, n, value).rank()


def dominates_packed(field_: FieldSpec, n: int, lower: int, upper: int) -> bool:
    return packed_rank(field_, n, upper ^ lower) == packed_rank(field_, n, upper) - packed_rank(field_, n, lower)


@dataclass(frozen=True)
class IdentityDomination:
    """Outcome of :func:`dominated_by_identity` with the witnessing factorization."""

    dominated: bool
    v1: GFMatrix
    v2: GFMatrix

    def __bool__(self) -> bool:
        return self.dominated


def dominated_by_identity(M: GFMatrix) -> IdentityDomination:
    if not M.is_square():
        raise DimensionError("domination by the identity needs a square matrix")
    v1, v2 = M.rank_factorization()
    r = v1.cols
    gram = v2.transpose() @ v1 if r else GFMatrix.zeros(M.field, 0, 0)
    return IdentityDomination(gram == GFMatrix.identity(M.field, r), v1, v2)


@functools.lru_cache(maxsize=None)
def idempotents(field_: FieldSpec, r: int, s: int) -> tuple:
    """Rank-s matrices ⪯ I_r, in enumeration order."""
    if s == 0:
        return (GFMatrix.zeros(field_, r),)
    spec = MatrixPosetSpec(field_, r)
    found = []
    for value in iter_rank_packed(spec, s):
        A = GFMatrix.from_packed(field_, r, r, value)
        if dominated_by_identity(A):
            found.append(A)
    return tuple(found)


def dominated_below(M: GFMatrix, s: int) -> list:
    """All rank-s matrices L ⪯ M, as V1 A V2ᵀ with A ⪯ I_rank(M)."""
    v1, v2 = M.rank_factorization()
    r = v1.cols
    if s > r:
        return []
    v2t = v2.transpose()
    return [v1 @ A @ v2t for A in idempotents(M.field, r, s)]


@functools.lru_cache(maxsize=None)
def identity_decompositions(field_: FieldSpec, T: int, rho: int) -> tuple:
    """Ordered tuples of rank-rho matrices summing to I_T with direct row and column sums."""
    if T % rho:
        raise DimensionError(f"{T} is not a multiple of {rho}")

    def split(residual):
        if residual.rank() == rho:
            return [(residual,)]
        out = []
        for A in dominated_below(residual, rho):
            for rest in split(residual - A):
                out.append((A,) + rest)
        return out

    return tuple(split(GFMatrix.identity(field_, T)))


# ---------- meets


def _combine(field_: FieldSpec, C: Sequence[GFVector], R: Sequence[GFVector], coeffs) -> GFMatrix:
    m = len(R[0]) if R else len(C[0])
    n = len(C[0]) if C else m
    acc = [0] * (n * m)
    mul = field_.mul
    k = 0
    for c in C:
        for r in R:
            a = coeffs[k]
            k += 1
            if not a:
                continue
            for i, ci in enumerate(c.entries):
                if ci:
                    s = mul(a, ci)
                    for j, rj in enumerate(r.entries):
                        if rj:
                            acc[i * m + j] ^= mul(s, rj)
    return GFMatrix(field_, n, m, tuple(acc))


def meet_maximal(M0: GFMatrix, M1: GFMatrix) -> GFMatrix:
    """Unique maximal matrix dominated by both M0 and M1."""
    if M0.field != M1.field or (M0.rows, M0.cols) != (M1.rows, M1.cols):
        raise DimensionError("meet of matrices of different shapes")
    if M0 == M1:
        return M0
    field_ = M0.field
    rows = intersect_subspaces(M0.row_space(), M1.row_space())
    cols = intersect_subspaces(M0.col_space(), M1.col_space())
    n_coeffs = len(rows) * len(cols)
    if field_.q**n_coeffs > MEET_CANDIDATE_CAP:
        raise SizeCapError(
            f"meet search over {field_.q}^{n_coeffs} candidates",
            projected=field_.q**n_coeffs,
            cap=MEET_CANDIDATE_CAP,
        )
    zero = GFMatrix.zeros(field_, M0.rows, M0.cols)
    common = [zero]
    if n_coeffs:
        for coeffs in itertools.product(range(field_.q), repeat=n_coeffs):
            if not any(coeffs):
                continue
            N = _combine(field_, cols, rows, coeffs)
            if dominates(N, M0) and dominates(N, M1):
                common.append(N)
    ranks = [N.rank() for N in common]
    top_rank = max(ranks)
    tops = [N for N, r in zip(common, ranks) if r == top_rank]
    if len(tops) > 1:
        raise AmbiguousMeetError("two incomparable common dominated matrices of equal rank", tops[:2])
    top = tops[0]
    for N in common:
        if not dominates(N, top):
            raise AmbiguousMeetError("common dominated matrices have no unique maximum", (top, N))
    return top


# ---------- poset axioms


def domination_relation(members: Sequence[GFMatrix]) -> np.ndarray:
    """Boolean matrix D[a, b] = members[a] ⪯ members[b]."""
    n = len(members)
    if not members:
        return np.zeros((0, 0), dtype=bool)
    field_ = members[0].field
    side = members[0].rows
    packed = [M.pack() for M in members]
    ranks = [packed_rank(field_, side, v) for v in packed]
    D = np.zeros((n, n), dtype=bool)
    for a in range(n):
        pa, ra = packed[a], ranks[a]
        for b in range(n):
            if ranks[b] >= ra and packed_rank(field_, side, packed[b] ^ pa) == ranks[b] - ra:
                D[a, b] = True
    return D


def check_poset_axioms(spec: MatrixPosetSpec, cap: int = 1 << 12) -> dict:
    """Exhaustive transitivity, antisymmetry, gradedness and purity over the whole poset."""
    members = all_matrices(spec, cap)
    D = domination_relation(members)
    n = len(members)
    ranks = np.array([M.rank() for M in members])
    counts = D.astype(np.int64)
    through = (counts @ counts) > 0
    strict = D & ~np.eye(n, dtype=bool)
    covers = strict & ~((strict.astype(np.int64) @ strict.astype(np.int64)) > 0)
    cover_a, cover_b = np.nonzero(covers)
    full = ranks == spec.m
    return {
        "matrices": n,
        "transitive": bool(np.all(D | ~through)),
        "antisymmetric": bool(not np.any(strict & strict.T)),
        "graded": bool(np.all(ranks[cover_b] - ranks[cover_a] == 1)),
        "pure": bool(np.all(D[:, full].any(axis=1))),
    }
