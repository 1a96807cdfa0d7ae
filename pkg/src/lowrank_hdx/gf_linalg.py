"""Exact arithmetic and linear algebra over GF(2^b) and GF(2).

Field elements are ints in [0, q). Multiplication in GF(2^b) goes through log/antilog
tables built once per field. F2 vectors are Python ints used as bitsets, bit j being
coordinate j, so that spans, ranks and kernels over F2 reduce to integer XORs.
"""

from __future__ import annotations

import functools
import logging
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import galois
import numpy as np

from .errors import DimensionError, FieldError

logger = logging.getLogger(__name__)

MAX_DEGREE = 16


def poly_mulmod(a: int, b: int, poly: int) -> int:
    """Carry-less product of ``a`` and ``b`` reduced modulo ``poly``."""
    degree = poly.bit_length() - 1
    result = 0
    while b:
        if b & 1:
            result ^= a
        b >>= 1
        a <<= 1
        if a >> degree & 1:
            a ^= poly
    return result


def is_irreducible(poly: int) -> bool:
    """Whether the F2 polynomial with coefficient bitmask ``poly`` is irreducible."""
    if poly < 2:
        return False
    return bool(galois.Poly.Int(poly).is_irreducible())


@functools.lru_cache(maxsize=None)
def default_reduction_poly(b: int) -> int:
    """Lexicographically smallest irreducible polynomial of degree b (x+1 for b=1)."""
    if b == 1:
        return 0b11
    for poly in range((1 << b) | 1, 1 << (b + 1), 2):
        if is_irreducible(poly):
            return poly
    raise FieldError(f"no irreducible polynomial of degree {b}")


def _find_generator(q: int, poly: int) -> int:
    if q == 2:
        return 1
    for g in range(2, q):
        x, order = g, 1
        while x != 1:
            x = poly_mulmod(x, g, poly)
            order += 1
        if order == q - 1:
            return g
    raise FieldError(f"no multiplicative generator modulo {poly:#x}")


@dataclass(frozen=True)
class FieldSpec:
    """GF(2^b) with a fixed reduction polynomial.

    Passing ``reduction_poly=0`` selects :func:`default_reduction_poly`.
    """

    b: int
    reduction_poly: int = 0
    generator: int = field(init=False, compare=False)
    exp: tuple = field(init=False, repr=False, compare=False)
    log: tuple = field(init=False, repr=False, compare=False)
    exp_array: np.ndarray = field(init=False, repr=False, compare=False)
    log_array: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 1 <= self.b <= MAX_DEGREE:
            raise FieldError(f"extension degree must lie in [1, {MAX_DEGREE}], got {self.b}")
        poly = self.reduction_poly or default_reduction_poly(self.b)
        if poly.bit_length() - 1 != self.b:
            raise FieldError(f"reduction polynomial {poly:#x} does not have degree {self.b}")
        if not is_irreducible(poly):
            raise FieldError(f"reduction polynomial {poly:#x} is reducible")
        object.__setattr__(self, "reduction_poly", poly)

        q = 1 << self.b
        g = _find_generator(q, poly)
        exp = [1] * (2 * (q - 1))
        log = [0] * q
        x = 1
        for k in range(q - 1):
            exp[k] = x
            log[x] = k
            x = poly_mulmod(x, g, poly)
        for k in range(q - 1, 2 * (q - 1)):
            exp[k] = exp[k - (q - 1)]
        object.__setattr__(self, "generator", g)
        object.__setattr__(self, "exp", tuple(exp))
        object.__setattr__(self, "log", tuple(log))
        object.__setattr__(self, "exp_array", np.array(exp, dtype=np.int64))
        object.__setattr__(self, "log_array", np.array(log, dtype=np.int64))
        logger.debug("built GF(2^%d) tables, poly=%#x generator=%d", self.b, poly, g)

    @property
    def q(self) -> int:
        return 1 << self.b

    def check(self, a: int) -> int:
        if not 0 <= a < self.q:
            raise FieldError(f"{a} is not an element of GF({self.q})")
        return a

    def mul(self, a, b):
        if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
            return self.mul_array(a, b)
        if not a or not b:
            return 0
        return self.exp[self.log[a] + self.log[b]]

    def mul_array(self, a, b) -> np.ndarray:
        """Elementwise product of broadcastable integer arrays."""
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        out = self.exp_array[self.log_array[a] + self.log_array[b]]
        return np.where((a == 0) | (b == 0), 0, out)

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("zero has no inverse in GF(2^b)")
        return self.exp[(self.q - 1 - self.log[a]) % (self.q - 1)]

    def inv_array(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        if np.any(a == 0):
            raise ZeroDivisionError("zero has no inverse in GF(2^b)")
        return self.exp_array[(self.q - 1 - self.log_array[a]) % (self.q - 1)]

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, e: int) -> int:
        if a == 0:
            return 1 if e == 0 else 0
        return self.exp[(self.log[a] * e) % (self.q - 1)]

    def elements(self) -> range:
        return range(self.q)

    def nonzero(self) -> range:
        return range(1, self.q)

    def reference(self):
        """The matching ``galois`` field class, for cross-checking."""
        return galois.GF(self.q, irreducible_poly=galois.Poly.Int(self.reduction_poly))


@functools.lru_cache(maxsize=None)
def get_field(b: int, reduction_poly: int = 0) -> FieldSpec:
    """Shared FieldSpec instance; tables are built once per (b, poly)."""
    return FieldSpec(b, reduction_poly)


def gf_mul(field_: FieldSpec, a: int, b: int) -> int:
    return field_.mul(field_.check(a), field_.check(b))


def gf_inv(field_: FieldSpec, a: int) -> int:
    return field_.inv(field_.check(a))


# ---------- vectors and matrices over GF(2^b)


@dataclass(frozen=True)
class GFVector:
    field: FieldSpec
    entries: tuple

    def __post_init__(self):
        entries = tuple(int(e) for e in self.entries)
        if not entries:
            raise DimensionError("vectors must have positive length")
        q = self.field.q
        for e in entries:
            if not 0 <= e < q:
                raise FieldError(f"{e} is not an element of GF({q})")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def zeros(cls, field_: FieldSpec, n: int) -> "GFVector":
        return cls(field_, (0,) * n)

    @classmethod
    def unit(cls, field_: FieldSpec, n: int, i: int) -> "GFVector":
        return cls(field_, tuple(1 if j == i else 0 for j in range(n)))

    @classmethod
    def from_int(cls, field_: FieldSpec, n: int, value: int) -> "GFVector":
        mask = field_.q - 1
        return cls(field_, tuple((value >> (field_.b * j)) & mask for j in range(n)))

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[int]:
        return iter(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def _same_shape(self, other: "GFVector") -> None:
        if self.field != other.field or len(self) != len(other):
            raise DimensionError("vectors live in different spaces")

    def __add__(self, other: "GFVector") -> "GFVector":
        self._same_shape(other)
        return GFVector(self.field, tuple(a ^ b for a, b in zip(self.entries, other.entries)))

    __sub__ = __add__

    def scale(self, c: int) -> "GFVector":
        return GFVector(self.field, tuple(self.field.mul(c, a) for a in self.entries))

    def dot(self, other: "GFVector") -> int:
        self._same_shape(other)
        total = 0
        for a, b in zip(self.entries, other.entries):
            total ^= self.field.mul(a, b)
        return total

    def is_zero(self) -> bool:
        return not any(self.entries)

    def to_int(self) -> int:
        value = 0
        for j, e in enumerate(self.entries):
            value |= e << (self.field.b * j)
        return value

    def hex(self) -> str:
        return to_hex(self.to_int(), self.field.b * len(self))


@dataclass(frozen=True)
class GFMatrix:
    """Dense matrix over GF(2^b), entries row-major."""

    field: FieldSpec
    rows: int
    cols: int
    entries: tuple

    def __post_init__(self):
        entries = tuple(int(e) for e in self.entries)
        if self.rows < 0 or self.cols < 0 or len(entries) != self.rows * self.cols:
            raise DimensionError(
                f"{len(entries)} entries do not fill a {self.rows}x{self.cols} matrix"
            )
        q = self.field.q
        for e in entries:
            if not 0 <= e < q:
                raise FieldError(f"{e} is not an element of GF({q})")
        object.__setattr__(self, "entries", entries)

    # construction

    @classmethod
    def zeros(cls, field_: FieldSpec, rows: int, cols: int | None = None) -> "GFMatrix":
        cols = rows if cols is None else cols
        return cls(field_, rows, cols, (0,) * (rows * cols))

    @classmethod
    def identity(cls, field_: FieldSpec, m: int) -> "GFMatrix":
        return cls(field_, m, m, tuple(1 if i == j else 0 for i in range(m) for j in range(m)))

    @classmethod
    def from_rows(cls, field_: FieldSpec, rows: Sequence[Sequence[int]], cols: int | None = None) -> "GFMatrix":
        rows = [tuple(r) for r in rows]
        if cols is None:
            if not rows:
                raise DimensionError("cannot infer the width of an empty matrix")
            cols = len(rows[0])
        if any(len(r) != cols for r in rows):
            raise DimensionError("ragged rows")
        return cls(field_, len(rows), cols, tuple(e for r in rows for e in r))

    @classmethod
    def from_columns(cls, field_: FieldSpec, columns: Sequence[Sequence[int]], rows: int) -> "GFMatrix":
        width = len(columns)
        return cls(field_, rows, width, tuple(columns[j][i] for i in range(rows) for j in range(width)))

    @classmethod
    def from_array(cls, field_: FieldSpec, array) -> "GFMatrix":
        array = np.asarray(array, dtype=np.int64)
        if array.ndim != 2:
            raise DimensionError("expected a 2-d array")
        return cls(field_, array.shape[0], array.shape[1], tuple(array.ravel().tolist()))

    @classmethod
    def from_packed(cls, field_: FieldSpec, rows: int, cols: int, value: int) -> "GFMatrix":
        """Inverse of :meth:`pack`."""
        mask = field_.q - 1
        b = field_.b
        return cls(field_, rows, cols, tuple((value >> (b * k)) & mask for k in range(rows * cols)))

    @classmethod
    def from_json(cls, obj: dict) -> "GFMatrix":
        return cls(get_field(obj["b"]), obj["rows"], obj["cols"], tuple(obj["entries"]))

    # views

    def __getitem__(self, index):
        i, j = index
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> tuple:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def col(self, j: int) -> tuple:
        return self.entries[j::self.cols] if self.cols else ()

    def row_lists(self) -> list:
        return [list(self.row(i)) for i in range(self.rows)]

    def to_array(self) -> np.ndarray:
        return np.array(self.entries, dtype=np.int64).reshape(self.rows, self.cols)

    def transpose(self) -> "GFMatrix":
        return GFMatrix(self.field, self.cols, self.rows,
                        tuple(self.entries[i * self.cols + j] for j in range(self.cols) for i in range(self.rows)))

    @property
    def T(self) -> "GFMatrix":
        return self.transpose()

    def is_zero(self) -> bool:
        return not any(self.entries)

    def is_square(self) -> bool:
        return self.rows == self.cols

    # arithmetic

    def _same_shape(self, other: "GFMatrix") -> None:
        if self.field != other.field or self.rows != other.rows or self.cols != other.cols:
            raise DimensionError(
                f"cannot combine {self.rows}x{self.cols} and {other.rows}x{other.cols} matrices"
            )

    def __add__(self, other: "GFMatrix") -> "GFMatrix":
        self._same_shape(other)
        return GFMatrix(self.field, self.rows, self.cols,
                        tuple(a ^ b for a, b in zip(self.entries, other.entries)))

    __sub__ = __add__

    def __matmul__(self, other: "GFMatrix") -> "GFMatrix":
        if self.field != other.field or self.cols != other.rows:
            raise DimensionError(
                f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}"
            )
        mul = self.field.mul
        cols = [other.col(j) for j in range(other.cols)]
        out = []
        for i in range(self.rows):
            row = self.row(i)
            for col in cols:
                acc = 0
                for a, b in zip(row, col):
                    if a and b:
                        acc ^= mul(a, b)
                out.append(acc)
        return GFMatrix(self.field, self.rows, other.cols, tuple(out))

    def scale(self, c: int) -> "GFMatrix":
        return GFMatrix(self.field, self.rows, self.cols, tuple(self.field.mul(c, a) for a in self.entries))

    def apply(self, v: GFVector) -> GFVector:
        if len(v) != self.cols:
            raise DimensionError("vector length does not match the number of columns")
        mul = self.field.mul
        out = []
        for i in range(self.rows):
            acc = 0
            for a, b in zip(self.row(i), v.entries):
                acc ^= mul(a, b)
            out.append(acc)
        return GFVector(self.field, tuple(out))

    # elimination

    def rref(self) -> tuple:
        """Reduced row echelon form: (nonzero rows as lists, pivot columns)."""
        return _rref(self.field, self.row_lists(), self.cols)

    def rank(self) -> int:
        if self.rows == 0 or self.cols == 0:
            return 0
        if self.field.b == 1:
            return f2_rank(f2_row_masks(self))
        return len(self.rref()[1])

    def kernel_basis(self) -> list:
        """Basis of the right kernel {x : Mx = 0}."""
        reduced, pivots = self.rref()
        pivot_set = set(pivots)
        basis = []
        for free in range(self.cols):
            if free in pivot_set:
                continue
            x = [0] * self.cols
            x[free] = 1
            for row, p in zip(reduced, pivots):
                x[p] = row[free]
            basis.append(GFVector(self.field, tuple(x)))
        return basis

    def row_space(self) -> list:
        """Reduced echelon basis of the row span."""
        reduced, _ = self.rref()
        return [GFVector(self.field, tuple(r)) for r in reduced]

    def col_space(self) -> list:
        return self.transpose().row_space()

    def rank_factorization(self) -> tuple:
        """(V1, V2) with full column rank and ``self == V1 @ V2.T``."""
        reduced, pivots = self.rref()
        r = len(pivots)
        v2t = GFMatrix(self.field, r, self.cols, tuple(e for row in reduced for e in row))
        v1 = GFMatrix(self.field, self.rows, r,
                      tuple(self.entries[i * self.cols + p] for i in range(self.rows) for p in pivots))
        return v1, v2t.transpose()

    # encodings

    def pack(self) -> int:
        """F2 flattening: entry (i, j) occupies bits b*(i*cols + j) onward."""
        b = self.field.b
        value = 0
        for k, e in enumerate(self.entries):
            if e:
                value |= e << (b * k)
        return value

    def hex(self) -> str:
        return to_hex(self.pack(), self.field.b * self.rows * self.cols)

    def to_json(self) -> dict:
        return {"b": self.field.b, "rows": self.rows, "cols": self.cols, "entries": list(self.entries)}

    def __repr__(self) -> str:
        body = "; ".join(" ".join(str(e) for e in self.row(i)) for i in range(self.rows))
        return f"GFMatrix(q={self.field.q}, [{body}])"


def _rref(field_: FieldSpec, rows: list, ncols: int) -> tuple:
    rows = [list(r) for r in rows]
    mul = field_.mul
    pivots = []
    top = 0
    for c in range(ncols):
        if top == len(rows):
            break
        pivot = next((i for i in range(top, len(rows)) if rows[i][c]), None)
        if pivot is None:
            continue
        rows[top], rows[pivot] = rows[pivot], rows[top]
        lead = rows[top][c]
        if lead != 1:
            inv = field_.inv(lead)
            rows[top] = [mul(inv, x) for x in rows[top]]
        prow = rows[top]
        for i in range(len(rows)):
            f = rows[i][c]
            if i != top and f:
                rows[i] = [x ^ mul(f, y) for x, y in zip(rows[i], prow)]
        pivots.append(c)
        top += 1
    return rows[:top], pivots


def outer_product(u: GFVector, v: GFVector) -> GFMatrix:
    if u.field != v.field:
        raise DimensionError("vectors over different fields")
    mul = u.field.mul
    return GFMatrix(u.field, len(u), len(v), tuple(mul(a, b) for a in u.entries for b in v.entries))


def intersect_subspaces(A: Sequence[GFVector], B: Sequence[GFVector]) -> list:
    """Basis of span(A) ∩ span(B), from the kernel of the stacked coefficient system."""
    if not A or not B:
        return []
    field_ = A[0].field
    n = len(A[0])
    if any(len(v) != n or v.field != field_ for v in (*A, *B)):
        raise DimensionError("subspaces live in different ambient spaces")
    stacked = GFMatrix(field_, n, len(A) + len(B),
                       tuple(v[t] for t in range(n) for v in (*A, *B)))
    mul = field_.mul
    meets = []
    for coeffs in stacked.kernel_basis():
        acc = [0] * n
        for alpha, a in zip(coeffs.entries[:len(A)], A):
            if alpha:
                for t in range(n):
                    acc[t] ^= mul(alpha, a[t])
        meets.append(acc)
    if not meets:
        return []
    reduced, _ = _rref(field_, meets, n)
    return [GFVector(field_, tuple(r)) for r in reduced]


def span_dimension(vectors: Sequence[GFVector]) -> int:
    if not vectors:
        return 0
    return GFMatrix.from_rows(vectors[0].field, [v.entries for v in vectors]).rank()


# ---------- F2 bitset helpers


def f2_row_masks(M: GFMatrix) -> list:
    """Rows of an F2 matrix as int bitsets (bit j = column j)."""
    masks = []
    for i in range(M.rows):
        value = 0
        for j, e in enumerate(M.row(i)):
            if e:
                value |= 1 << j
        masks.append(value)
    return masks


def f2_dot(a: int, b: int) -> int:
    return (a & b).bit_count() & 1


class SpanBasis:
    """Incremental echelon basis of an F2 span, one row per leading bit."""

    __slots__ = ("_rows",)

    def __init__(self, vectors: Iterable[int] = ()):
        self._rows = {}
        for v in vectors:
            self.add(v)

    def reduce(self, v: int) -> int:
        rows = self._rows
        while v:
            row = rows.get(v.bit_length() - 1)
            if row is None:
                return v
            v ^= row
        return 0

    def add(self, v: int) -> bool:
        """Insert ``v``; returns False when it was already in the span."""
        v = self.reduce(v)
        if not v:
            return False
        self._rows[v.bit_length() - 1] = v
        return True

    def __contains__(self, v: int) -> bool:
        return self.reduce(v) == 0

    def __len__(self) -> int:
        return len(self._rows)

    def vectors(self) -> list:
        return [self._rows[k] for k in sorted(self._rows, reverse=True)]

    def leads(self) -> list:
        return sorted(self._rows)

    def canonical(self) -> tuple:
        """Fully reduced echelon basis, leading bits descending."""
        reduced = {}
        for lead in sorted(self._rows):
            row = self._rows[lead]
            for low, low_row in reduced.items():
                if row >> low & 1:
                    row ^= low_row
            reduced[lead] = row
        return tuple(reduced[k] for k in sorted(reduced, reverse=True))


def f2_rank(vectors: Iterable[int]) -> int:
    return len(SpanBasis(vectors))


def canonical_subspace(vectors: Iterable[int]) -> tuple:
    """Reduced echelon basis of an F2 span; equal spans give equal tuples."""
    return SpanBasis(vectors).canonical()


def f2_kernel(rows: Sequence[int], ncols: int) -> list:
    """Basis of {x in F2^ncols : <row, x> = 0 for every row}."""
    basis = SpanBasis(rows)
    reduced = basis.canonical()
    pivots = {r.bit_length() - 1: r for r in reduced}
    kernel = []
    for free in range(ncols):
        if free in pivots:
            continue
        x = 1 << free
        for p, r in pivots.items():
            if r >> free & 1:
                x |= 1 << p
        kernel.append(x)
    return kernel


def f2_span_elements(basis: Sequence[int]) -> list:
    """All 2^d elements of the span of d independent vectors, in Gray-code order."""
    elements = [0]
    current = 0
    for k in range(1, 1 << len(basis)):
        current ^= basis[(k & -k).bit_length() - 1]
        elements.append(current)
    return elements


def to_hex(value: int, nbits: int) -> str:
    """Lowercase hex of the little-endian byte encoding (bit 0 = coordinate 0)."""
    return value.to_bytes(max(1, (nbits + 7) // 8), "little").hex()


def from_hex(text: str) -> int:
    return int.from_bytes(bytes.fromhex(text), "little")
