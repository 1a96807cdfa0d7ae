"""Random walks on graded posets and their spectral expansion.

Operators are scipy sparse matrices, optionally kept as a product of sparse factors
so that walks on ~10^5 states never materialise their dense product. λ is the
second largest absolute eigenvalue of the π-symmetrised operator.
"""

from __future__ import annotations

import itertools
import json
import logging
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy.sparse import csr_matrix, diags, identity, kron
from scipy.sparse import bmat, coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from .errors import ConvergenceError, DimensionError, PurityError, SizeCapError, ZeroWeightError
from .gf_linalg import FieldSpec, get_field
from .matrix_poset import (
    MatrixPosetSpec,
    count_dominated_by_identity,
    count_rank,
    dominated_below,
    echelon_bases,
    enumerate_rank,
    gl_elements,
)
from .poset_core import GradedComplex, WeightedGraph

logger = logging.getLogger(__name__)

DENSE_LIMIT = 3000
ROW_TOL = 1e-12
RESIDUAL_TOL = 1e-7
RAYLEIGH_TOL = 1e-9
MAX_ITERATIONS = 100_000
TRIPLET_LIMIT = 100_000
CSV_HEADER = "n_states,lambda,residual,iterations,wall_time,method"


# ---------- operators


class WalkOperator:
    """Row-stochastic operator from ``states`` to ``targets`` (default: the same states).

    Either ``matrix`` is given, or ``factors`` whose left-to-right product is the walk.
    ``pi`` is the distribution on ``states`` the walk is taken from (stationary when
    the walk is square).
    """

    def __init__(
        self,
        states: Sequence,
        pi,
        matrix=None,
        factors: Sequence | None = None,
        name: str = "",
        targets: Sequence | None = None,
    ):
        if (matrix is None) == (factors is None):
            raise ValueError("pass exactly one of matrix or factors")
        self.states = list(states)
        self.targets = self.states if targets is None else list(targets)
        self.pi = np.asarray(pi, dtype=float)
        self.name = name
        self._matrix = None if matrix is None else csr_matrix(matrix)
        self.factors = None if factors is None else [csr_matrix(f) for f in factors]
        n = len(self.states)
        if self.pi.shape != (n,):
            raise DimensionError(f"stationary vector has shape {self.pi.shape}, expected ({n},)")
        shape = self._matrix.shape if self._matrix is not None else (self.factors[0].shape[0], self.factors[-1].shape[1])
        if shape != (n, len(self.targets)):
            raise DimensionError(f"operator shape {shape} does not match {n}x{len(self.targets)} states")

    @property
    def n(self) -> int:
        return len(self.states)

    @property
    def is_square(self) -> bool:
        return self.targets is self.states

    @property
    def matrix_free(self) -> bool:
        return self._matrix is None

    @property
    def matrix(self) -> csr_matrix:
        if self._matrix is None:
            product = self.factors[0]
            for f in self.factors[1:]:
                product = product @ f
            self._matrix = csr_matrix(product)
        return self._matrix

    def matvec(self, x: np.ndarray) -> np.ndarray:
        if self._matrix is not None:
            return self._matrix @ x
        for f in reversed(self.factors):
            x = f @ x
        return x

    def rmatvec(self, x: np.ndarray) -> np.ndarray:
        """xᵀW as a vector."""
        if self._matrix is not None:
            return self._matrix.T @ x
        for f in self.factors:
            x = f.T @ x
        return x

    def row(self, k: int) -> np.ndarray:
        e = np.zeros(self.n)
        e[k] = 1.0
        return self.rmatvec(e)

    def neighbors(self, state) -> list:
        """(target, probability) pairs of the row of ``state``."""
        k = self.states.index(state)
        row = self.row(k)
        return [(self.targets[j], float(row[j])) for j in np.nonzero(row)[0]]

    def row_sums(self) -> np.ndarray:
        return self.matvec(np.ones(self.n))

    def stochastic_gap(self) -> float:
        """max over rows of |row sum - 1|."""
        return float(np.max(np.abs(self.row_sums() - 1.0))) if self.n else 0.0

    def reversibility_gap(self) -> float:
        """max |π(u)W(u,v) - π(v)W(v,u)| (materialises the matrix)."""
        flow = diags(self.pi) @ self.matrix
        gap = abs(flow - flow.T)
        return float(gap.max()) if gap.nnz else 0.0

    def compose(self, other: "WalkOperator", pi=None, name: str = "") -> "WalkOperator":
        """self then other; ``pi`` defaults to self's (valid for W↑W↓ pairs)."""
        left = self.factors if self.factors is not None else [self._matrix]
        right = other.factors if other.factors is not None else [other._matrix]
        targets = None if other.targets == self.states else other.targets
        return WalkOperator(self.states, self.pi if pi is None else pi, factors=[*left, *right], name=name,
                            targets=targets)

    def to_triplets(self) -> dict:
        if self.n > TRIPLET_LIMIT:
            raise SizeCapError(f"{self.n} states exceed the triplet export limit", self.n, TRIPLET_LIMIT)
        coo = self.matrix.tocoo()
        order = np.lexsort((coo.col, coo.row))
        return {
            "name": self.name,
            "n": self.n,
            "pi": self.pi.tolist(),
            "triplets": [[int(coo.row[k]), int(coo.col[k]), float(coo.data[k])] for k in order],
        }

    def __repr__(self) -> str:
        mode = "matrix-free" if self.matrix_free else "sparse"
        return f"<WalkOperator {self.name or '?'} states={self.n} {mode}>"


def _exact_masses(X: GradedComplex, i: int) -> list:
    masses = X.weights_at(i)
    for face, m in zip(X.faces_at(i), masses):
        if m == 0:
            raise ZeroWeightError(f"rank-{i} face {face!r} has zero weight")
    return masses


def incidence_matrix(X: GradedComplex, i: int) -> csr_matrix:
    """0/1 matrix with rows X(i-1) and columns X(i)."""
    rows, cols = [], []
    for k, lows in enumerate(X.incidence(i)):
        rows.extend(lows)
        cols.extend([k] * len(lows))
    data = np.ones(len(rows))
    return coo_matrix((data, (rows, cols)), shape=(X.count(i - 1), X.count(i))).tocsr()


def _down_degrees(B: csr_matrix) -> np.ndarray:
    deg = np.asarray(B.sum(axis=0)).ravel()
    if np.any(deg == 0):
        raise PurityError("a face covers nothing one rank down")
    return deg


def up_walk(X: GradedComplex, i: int) -> WalkOperator:
    """W↑ from X(i) to X(i+1): y with probability m(y) / (m(x)·#{x' ≺ y})."""
    if not X.count(i) or not X.count(i + 1):
        raise DimensionError(f"ranks {i} and {i + 1} must be populated")
    low = _exact_masses(X, i)
    up = _exact_masses(X, i + 1)
    B = incidence_matrix(X, i + 1)
    deg = _down_degrees(B)
    pushed = [Fraction(0)] * len(low)
    for k, lows in enumerate(X.incidence(i + 1)):
        for j in lows:
            pushed[j] += up[k] / len(lows)
    if any(p != m for p, m in zip(pushed, low)):
        raise PurityError(f"weights on ranks {i}, {i + 1} are not standard")
    up_f = np.array([float(m) for m in up])
    low_f = np.array([float(m) for m in low])
    step = diags(1.0 / low_f) @ B @ diags(up_f / deg)
    return WalkOperator(X.faces_at(i), low_f, factors=[step], name=f"up[{i}]", targets=X.faces_at(i + 1))


def down_walk(X: GradedComplex, i: int) -> WalkOperator:
    """W↓ from X(i) to X(i-1): uniform over the faces covered."""
    if not X.count(i) or not X.count(i - 1):
        raise DimensionError(f"ranks {i - 1} and {i} must be populated")
    up = _exact_masses(X, i)
    B = incidence_matrix(X, i)
    deg = _down_degrees(B)
    return WalkOperator(X.faces_at(i), np.array([float(m) for m in up]), factors=[diags(1.0 / deg) @ B.T],
                        name=f"down[{i}]", targets=X.faces_at(i - 1))


def up_down(X: GradedComplex, i: int) -> WalkOperator:
    """W↑↓ on X(i): up to X(i+1), then down."""
    return up_walk(X, i).compose(down_walk(X, i + 1), name=f"updown[{i}]")


def down_up(X: GradedComplex, i: int) -> WalkOperator:
    """W↓↑ on X(i): down to X(i-1), then up."""
    return down_walk(X, i).compose(up_walk(X, i - 1), name=f"downup[{i}]")


def graph_walk(G: WeightedGraph) -> WalkOperator:
    """Simple random walk of a weighted graph (loops counted once)."""
    A = G.adjacency()
    deg = np.asarray(A.sum(axis=1)).ravel()
    if np.any(deg == 0):
        raise ZeroWeightError(f"{int(np.sum(deg == 0))} isolated vertices")
    return WalkOperator(G.vertices, deg / deg.sum(), matrix=diags(1.0 / deg) @ A, name="graph")


def tensor(W1: WalkOperator, W2: WalkOperator) -> WalkOperator:
    """Product chain on pairs (s1, s2): both coordinates move independently."""
    states = list(itertools.product(W1.states, W2.states))
    return WalkOperator(states, np.kron(W1.pi, W2.pi), matrix=kron(W1.matrix, W2.matrix, format="csr"),
                        name=f"{W1.name}⊗{W2.name}")


def identity_walk(states: Sequence) -> WalkOperator:
    n = len(states)
    return WalkOperator(states, np.full(n, 1.0 / n), matrix=identity(n, format="csr"), name="id")


# ---------- spectra


@dataclass
class SpectralResult:
    value: float
    residual: float = 0.0
    iterations: int = 0
    method: str = "dense"
    disconnected: bool = False
    n_states: int = 0
    wall_time: float = 0.0

    def csv_row(self) -> str:
        return f"{self.n_states},{self.value:.12g},{self.residual:.3g},{self.iterations},{self.wall_time:.3f},{self.method}"


def _components(W: WalkOperator) -> int:
    if not W.matrix_free or len(W.factors) == 1:
        return connected_components(W.matrix, directed=True, connection="weak")[0]
    if len(W.factors) == 2:
        F1, F2 = W.factors
        block = bmat([[None, F1], [F2, None]]).tocsr()
        _, labels = connected_components(block, directed=False)
        return len(np.unique(labels[: W.n]))
    return connected_components(W.matrix, directed=True, connection="weak")[0]


def _symmetrised(W: WalkOperator) -> tuple:
    root = np.sqrt(W.pi)
    unit = root / np.linalg.norm(root)

    def apply(x):
        x = np.asarray(x, dtype=float).ravel()
        y = root * W.matvec(x / root)
        return y - unit * (unit @ y)

    return apply, unit


def spectrum(W: WalkOperator) -> np.ndarray:
    """All eigenvalues, ascending (dense; small operators only)."""
    if W.n > DENSE_LIMIT:
        raise SizeCapError(f"{W.n} states exceed the dense limit", W.n, DENSE_LIMIT)
    root = np.sqrt(W.pi)
    S = (diags(root) @ W.matrix @ diags(1.0 / root)).toarray()
    return np.linalg.eigvalsh((S + S.T) / 2)


def nonzero_spectrum(W: WalkOperator, tol: float = 1e-9) -> np.ndarray:
    eig = spectrum(W)
    return eig[np.abs(eig) > tol]


def _start_vector(n: int, unit: np.ndarray) -> np.ndarray:
    x = np.where(np.arange(n) % 2 == 0, 1.0, -1.0) + np.linspace(0.0, 0.5, n)
    x -= unit * (unit @ x)
    return x / np.linalg.norm(x)


def power_iteration(
    W: WalkOperator,
    tol: float = RAYLEIGH_TOL,
    max_iter: int = MAX_ITERATIONS,
    seed: int = 0,
) -> SpectralResult:
    """λ by deflated power iteration on the symmetrised operator.

    Runs from a fixed alternating start and from one seeded random start and keeps
    the larger estimate. Converged when successive estimates differ by less than tol.
    """
    started = time.perf_counter()
    apply, unit = _symmetrised(W)
    rng = np.random.default_rng(seed)
    starts = [_start_vector(W.n, unit), rng.standard_normal(W.n)]
    best = None
    for x in starts:
        x = x - unit * (unit @ x)
        norm = np.linalg.norm(x)
        if norm == 0:
            continue
        x /= norm
        estimate, previous, converged = 0.0, -1.0, False
        for it in range(1, max_iter + 1):
            y = apply(x)
            estimate = float(np.linalg.norm(y))
            if estimate == 0:
                converged = True
                break
            x = y / estimate
            if abs(estimate - previous) < tol:
                converged = True
                break
            previous = estimate
        z = apply(apply(x))
        residual = float(np.linalg.norm(z - estimate * estimate * x))
        if not converged:
            raise ConvergenceError(f"power iteration stalled after {max_iter} steps", bracket=(previous, estimate))
        if best is None or estimate > best.value:
            best = SpectralResult(estimate, residual, it, "power", n_states=W.n)
    best.wall_time = time.perf_counter() - started
    return best


def _lanczos(W: WalkOperator, tol: float) -> SpectralResult:
    apply, unit = _symmetrised(W)
    op = LinearOperator((W.n, W.n), matvec=apply, dtype=float)
    v0 = _start_vector(W.n, unit)
    try:
        values, vectors = eigsh(op, k=1, which="LM", v0=v0, tol=tol * 1e-2, maxiter=MAX_ITERATIONS)
    except ArpackNoConvergence as e:
        raise ConvergenceError("Lanczos did not converge") from e
    theta = float(values[0])
    v = vectors[:, 0]
    residual = float(np.linalg.norm(apply(v) - theta * v))
    return SpectralResult(abs(theta), residual, 0, "lanczos", n_states=W.n)


def spectral_lambda(W: WalkOperator, tol: float = RAYLEIGH_TOL, seed: int = 0) -> SpectralResult:
    """Second largest absolute eigenvalue of a reversible walk."""
    if not W.is_square:
        raise DimensionError("λ needs a walk from a state space to itself")
    started = time.perf_counter()
    if W.n <= 1:
        return SpectralResult(0.0, n_states=W.n)
    if np.any(W.pi <= 0):
        raise ZeroWeightError("stationary distribution is not strictly positive")
    if _components(W) > 1:
        logger.warning("%r has a disconnected support; λ = 1", W)
        return SpectralResult(1.0, method="components", disconnected=True, n_states=W.n,
                              wall_time=time.perf_counter() - started)
    if W.n <= DENSE_LIMIT:
        eig = spectrum(W)
        value = float(max(abs(eig[0]), abs(eig[-2])))
        result = SpectralResult(min(value, 1.0), 0.0, 1, "dense", n_states=W.n)
    else:
        result = _lanczos(W, tol)
        if result.residual > RESIDUAL_TOL:
            logger.warning("Lanczos residual %.2e too large, falling back to power iteration", result.residual)
            result = power_iteration(W, tol=tol, seed=seed)
            if result.residual > RESIDUAL_TOL:
                raise ConvergenceError(f"residual {result.residual:.2e} above {RESIDUAL_TOL}",
                                       bracket=(result.value - result.residual, result.value + result.residual))
    result.wall_time = time.perf_counter() - started
    logger.debug("λ(%r) = %.12g via %s", W, result.value, result.method)
    return result


def graph_lambda(G: WeightedGraph, tol: float = RAYLEIGH_TOL) -> SpectralResult:
    """λ of the random walk of G; graphs with isolated vertices count as disconnected."""
    if G.n <= 1:
        return SpectralResult(0.0, n_states=G.n)
    if len(G.isolated()):
        return SpectralResult(1.0, method="components", disconnected=True, n_states=G.n)
    return spectral_lambda(graph_walk(G), tol)


def cross_validate(W: WalkOperator, seed: int = 0) -> tuple:
    """(dense result, power-iteration result) on the same operator."""
    return spectral_lambda(W), power_iteration(W, seed=seed)


# ---------- projections and coupling


@dataclass
class ProjectionReport:
    checked_edges: int = 0
    failures: list = field(default_factory=list)
    lambda_big: float | None = None
    lambda_small: float | None = None

    @property
    def passed(self) -> bool:
        if self.failures:
            return False
        if self.lambda_big is None or self.lambda_small is None:
            return True
        return self.lambda_small <= self.lambda_big + 1e-9


def projection_check(Pi: Callable, Gbig: WeightedGraph, Gsmall: WeightedGraph, spectra: bool = True) -> ProjectionReport:
    """Check that pushing Gbig's edge distribution through Pi gives Gsmall's exactly."""
    report = ProjectionReport()
    small_index = Gsmall.vertex_index()
    image = np.empty(Gbig.n, dtype=np.int64)
    for k, v in enumerate(Gbig.vertices):
        target = Pi(v)
        if target not in small_index:
            report.failures.append(("vertex maps outside the target", v))
            return report
        image[k] = small_index[target]
    missing = set(range(Gsmall.n)) - set(image.tolist())
    if missing:
        report.failures.append(("not surjective", Gsmall.vertices[min(missing)]))
        return report
    a = image[Gbig.heads]
    b = image[Gbig.tails]
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    pushed = {}
    for x, y, c in zip(lo.tolist(), hi.tolist(), Gbig.counts.tolist()):
        pushed[(x, y)] = pushed.get((x, y), 0) + c
    report.checked_edges = Gbig.n_edges
    target = {(int(x), int(y)): int(c) for x, y, c in zip(Gsmall.heads, Gsmall.tails, Gsmall.counts)}
    big_total = int(Gbig.counts.sum())
    small_total = int(Gsmall.counts.sum())
    for pair in sorted(set(pushed) | set(target)):
        if Fraction(pushed.get(pair, 0), big_total) != Fraction(target.get(pair, 0), small_total):
            u, v = pair
            report.failures.append(("edge mass mismatch", Gsmall.vertices[u], Gsmall.vertices[v]))
            return report
    if spectra:
        report.lambda_big = graph_lambda(Gbig).value
        report.lambda_small = graph_lambda(Gsmall).value
    return report


@dataclass
class CouplingReport:
    epsilon: float
    lambda_small: float
    lambda_big: float

    @property
    def holds(self) -> bool:
        return self.lambda_small <= self.lambda_big + self.epsilon + 1e-9


def tv_coupling_bound(W: WalkOperator, Wbig: WalkOperator, embed: Callable) -> CouplingReport:
    """ε = max over states of the ℓ1 distance between corresponding rows."""
    big_index = {s: k for k, s in enumerate(Wbig.states)}
    positions = np.array([big_index[embed(s)] for s in W.states], dtype=np.int64)
    if len(set(positions.tolist())) != len(positions):
        raise DimensionError("embedding is not injective")
    small = W.matrix
    big = Wbig.matrix
    eps = 0.0
    for k, pos in enumerate(positions):
        row_small = np.zeros(Wbig.n)
        start, stop = small.indptr[k], small.indptr[k + 1]
        row_small[positions[small.indices[start:stop]]] = small.data[start:stop]
        row_big = big.getrow(int(pos)).toarray().ravel()
        eps = max(eps, float(np.abs(row_small - row_big).sum()))
    return CouplingReport(eps, spectral_lambda(W).value, spectral_lambda(Wbig).value)


# ---------- vectors over F_q


def field_for(q: int):
    """GF(2^b) as a FieldSpec, or the prime q itself for modular arithmetic."""
    if q >= 2 and q & (q - 1) == 0:
        return get_field(q.bit_length() - 1)
    if q >= 2 and all(q % p for p in range(2, math.isqrt(q) + 1)):
        return q
    raise DimensionError(f"q = {q} is neither prime nor a power of two")


def _mul(F, a, b):
    if isinstance(F, FieldSpec):
        return F.mul_array(a, b)
    return (np.asarray(a, dtype=np.int64) * np.asarray(b, dtype=np.int64)) % F


def _add_reduce(F, x: np.ndarray, axis: int) -> np.ndarray:
    if isinstance(F, FieldSpec):
        return np.bitwise_xor.reduce(x, axis=axis)
    return x.sum(axis=axis) % F


def nonzero_vectors(q: int, m: int) -> np.ndarray:
    """F_q^m minus zero, as rows (base-q digits, coordinate 0 most significant)."""
    grid = np.array(list(itertools.product(range(q), repeat=m)), dtype=np.int64)
    return grid[1:]


def dot_table(F, U: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Matrix of uᵀv over the field, chunked over U."""
    out = np.empty((len(U), len(V)), dtype=np.int64)
    step = max(1, 2_000_000 // max(1, len(V) * U.shape[1]))
    for s in range(0, len(U), step):
        block = _mul(F, U[s:s + step, None, :], V[None, :, :])
        out[s:s + step] = _add_reduce(F, block, axis=2)
    return out


# ---------- perp graph


def perp_graph(q: int, m: int) -> WeightedGraph:
    """Nonzero vectors of F_q^m, adjacent when orthogonal; isotropic vectors carry a loop."""
    if m < 2:
        raise DimensionError("the perp graph needs m >= 2")
    F = field_for(q)
    V = nonzero_vectors(q, m)
    D = dot_table(F, V, V)
    heads, tails = np.nonzero(np.triu(D == 0))
    labels = [tuple(int(e) for e in v) for v in V]
    return WeightedGraph(labels, heads, tails, np.ones(len(heads), dtype=np.int64))


@dataclass
class PerpIdentityReport:
    q: int
    m: int
    exact: bool
    stated_form: bool
    lam: float
    lam_exact: float
    bound: float

    @property
    def within_bound(self) -> bool:
        return self.lam <= self.bound + 1e-9


def perp_lambda_exact(q: int, m: int) -> float:
    return q ** ((m - 2) / 2) * (q - 1) / (q ** (m - 1) - 1)


def perp_square_identity(q: int, m: int) -> PerpIdentityReport:
    """A² against (q^{m-1}-1)(I+P) + (q^{m-2}-1)(J-I-P), P = distinct parallel pairs."""
    G = perp_graph(q, m)
    A = G.adjacency().toarray().astype(np.int64)
    n = G.n
    F = field_for(q)
    V = nonzero_vectors(q, m)
    parallel = np.zeros((n, n), dtype=bool)
    index = {tuple(v): k for k, v in enumerate(V.tolist())}
    for k, v in enumerate(V):
        for c in range(2, q):
            w = tuple(int(e) for e in _mul(F, np.full(m, c), v))
            parallel[k, index[w]] = True
    I = np.eye(n, dtype=np.int64)
    J = np.ones((n, n), dtype=np.int64)
    P = parallel.astype(np.int64)
    a, b = q ** (m - 1) - 1, q ** (m - 2) - 1
    square = A @ A
    exact = bool(np.array_equal(square, a * (I + P) + b * (J - I - P)))
    stated = bool(np.array_equal(square, a * I + b * (J - I)))
    lam = graph_lambda(G).value
    return PerpIdentityReport(q, m, exact, stated, lam, perp_lambda_exact(q, m), 1 / math.sqrt(a))


# ---------- walks on the matrix poset


def matrix_poset_complex(spec: MatrixPosetSpec, cap: int = 1 << 16) -> GradedComplex:
    """M_q^m as a graded complex (level i = rank-(i+1) matrices), weights pushed from GL_m."""
    from .poset_core import standard_weights_from_top

    total = spec.q ** (spec.m * spec.m)
    if total > cap:
        raise SizeCapError(f"M_{spec.q}^{spec.m} has {total} matrices (cap {cap})", total, cap)
    faces = {-1: [spec.zero()]}
    for s in range(1, spec.m + 1):
        faces[s - 1] = enumerate_rank(spec, s).members
    return standard_weights_from_top(GradedComplex("matrix", faces))


def _keys(F: FieldSpec, mats: np.ndarray) -> np.ndarray:
    """Packed keys of an array of m×m matrices (last two axes)."""
    flat = mats.reshape(*mats.shape[:-2], -1).astype(np.int64)
    shifts = F.b * np.arange(flat.shape[-1], dtype=np.int64)
    return np.bitwise_or.reduce(flat << shifts, axis=-1)


def _matvec(F: FieldSpec, M: np.ndarray, x: np.ndarray) -> np.ndarray:
    """M (..., m, s) times x (p, s) -> (..., p, m)."""
    prod = F.mul_array(M[..., None, :, :], x[:, None, :])
    return np.bitwise_xor.reduce(prod, axis=-1)


def rank_one_identity_pairs(F: FieldSpec, s: int) -> tuple:
    """(a, b) with bᵀa = 1, one per rank-1 matrix a bᵀ ⪯ I_s (a normalised)."""
    vectors = nonzero_vectors(F.q, s)
    lead = np.argmax(vectors != 0, axis=1)
    a = vectors[vectors[np.arange(len(vectors)), lead] == 1]
    all_b = vectors
    D = dot_table(F, a, all_b)
    ia, ib = np.nonzero(D == 1)
    return a[ia], all_b[ib]


def _idempotent_factors(F: FieldSpec, m: int) -> tuple:
    """(V1, V2) stacks with V2ᵀV1 = I_2, one per rank-2 matrix ⪯ I_m."""
    bases = [np.array(B, dtype=np.int64) for B in echelon_bases(F, m, 2)]
    V1s, V2s = [], []
    for C in bases:
        for R in bases:
            g = _mul(F, R[:, None, :], C[None, :, :])
            g = np.bitwise_xor.reduce(g, axis=2)
            det = int(F.mul(int(g[0, 0]), int(g[1, 1])) ^ F.mul(int(g[0, 1]), int(g[1, 0])))
            if not det:
                continue
            inv_det = F.inv(det)
            ginv = np.array([[g[1, 1], g[0, 1]], [g[1, 0], g[0, 0]]], dtype=np.int64)
            ginv = F.mul_array(ginv, inv_det)
            V1 = np.bitwise_xor.reduce(F.mul_array(C.T[:, :, None], ginv[None, :, :]), axis=1)
            V1s.append(V1)
            V2s.append(R.T)
    return np.array(V1s), np.array(V2s)


def _rank2_factors(F: FieldSpec, m: int, cap: int) -> tuple:
    """(V1, V2) stacks, one per rank-2 m×m matrix."""
    total = count_rank(m, 2, F.q)
    if total > cap:
        raise SizeCapError(f"{total} rank-2 matrices (cap {cap}); use the restricted walk", total, cap)
    bases = [np.array(B, dtype=np.int64) for B in echelon_bases(F, m, 2)]
    cores = np.array(gl_elements(F, 2), dtype=np.int64)
    V1s, V2s = [], []
    for C in bases:
        V1 = np.bitwise_xor.reduce(F.mul_array(C.T[None, :, :, None], cores[:, None, :, :]), axis=2)
        for R in bases:
            V1s.append(V1)
            V2s.append(np.broadcast_to(R.T, V1.shape))
    return np.concatenate(V1s), np.concatenate(V2s)


def _rank1_below(F: FieldSpec, V1: np.ndarray, V2: np.ndarray, chunk: int = 4096) -> np.ndarray:
    """Keys of the rank-1 matrices V1 a (V2 b)ᵀ ⪯ V1 V2ᵀ, shape (N, pairs)."""
    a, b = rank_one_identity_pairs(F, V1.shape[-1])
    out = []
    for s in range(0, len(V1), chunk):
        u = _matvec(F, V1[s:s + chunk], a)
        w = _matvec(F, V2[s:s + chunk], b)
        L = F.mul_array(u[..., :, None], w[..., None, :])
        out.append(_keys(F, L))
    return np.concatenate(out)


@dataclass
class MatrixWalk:
    walk: WalkOperator
    lower_keys: np.ndarray
    upper_count: int
    covers_per_state: int
    bound: float


def matrix_walk_updown(spec: MatrixPosetSpec, restrict: str | None = None, cap: int = 10**7) -> MatrixWalk:
    """W↑↓ on the rank-1 level, over all matrices or only those ⪯ I_m.

    The walk is kept as the product of its two sparse incidence factors.
    """
    F = spec.field
    q, m = spec.q, spec.m
    if restrict not in (None, "none", "dominated_by_identity"):
        raise ValueError(f"unknown restriction {restrict!r}")
    restricted = restrict == "dominated_by_identity"
    if restricted:
        V1, V2 = _idempotent_factors(F, m)
        bound = 8 / q
    else:
        V1, V2 = _rank2_factors(F, m, cap)
        bound = 10 / q
    below = _rank1_below(F, V1, V2)
    lower = np.unique(below)
    expected = count_dominated_by_identity(m, 1, q) if restricted else count_rank(m, 1, q)
    if len(lower) != expected:
        raise DimensionError(f"found {len(lower)} rank-1 states, expected {expected}")
    n_up, per_up = below.shape
    rows = np.searchsorted(lower, below.ravel())
    cols = np.repeat(np.arange(n_up), per_up)
    B = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(len(lower), n_up)).tocsr()
    up_deg = np.asarray(B.sum(axis=1)).ravel()
    down_deg = np.asarray(B.sum(axis=0)).ravel()
    mass = B @ (1.0 / down_deg)
    walk = WalkOperator(
        lower.tolist(),
        mass / mass.sum(),
        factors=[diags(1.0 / mass) @ B @ diags(1.0 / down_deg), diags(1.0 / down_deg) @ B.T],
        name=f"updown(M_{q}^{m}{', ⪯ I' if restricted else ''})",
    )
    logger.info("%s: %d states, %d rank-2 covers", walk.name, len(lower), n_up)
    return MatrixWalk(walk, lower, n_up, int(up_deg[0]), bound)


def rank_downup(spec: MatrixPosetSpec, s: int) -> WalkOperator:
    """W↓↑ on rank-s matrices through rank s-1, uniform in both directions."""
    F = spec.field
    upper = enumerate_rank(spec, s).members
    lower = enumerate_rank(spec, s - 1).members
    index = {M.pack(): k for k, M in enumerate(lower)}
    rows, cols = [], []
    for k, M in enumerate(upper):
        for L in dominated_below(M, s - 1):
            rows.append(k)
            cols.append(index[L.pack()])
    B = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(len(upper), len(lower))).tocsr()
    down = np.asarray(B.sum(axis=1)).ravel()
    up = np.asarray(B.sum(axis=0)).ravel()
    n = len(upper)
    return WalkOperator([M.pack() for M in upper], np.full(n, 1.0 / n),
                        factors=[diags(1.0 / down) @ B, diags(1.0 / up) @ B.T], name=f"downup(M_{F.q}^{spec.m}({s}))")


# ---------- localized walks


def _identity_pairs(F: FieldSpec, m: int, normalised: bool) -> tuple:
    V = nonzero_vectors(F.q, m)
    left = V
    if normalised:
        lead = np.argmax(V != 0, axis=1)
        left = V[V[np.arange(len(V)), lead] == 1]
    D = dot_table(F, left, V)
    keep = D == 1 if normalised else D != 0
    ia, ib = np.nonzero(keep)
    return left[ia], V[ib]


def _orthogonality_graph(F: FieldSpec, A: np.ndarray, B: np.ndarray, labels: list) -> WeightedGraph:
    Z_ab = dot_table(F, B, A) == 0
    adj = Z_ab & Z_ab.T
    heads, tails = np.nonzero(np.triu(adj, k=1))
    return WeightedGraph(labels, heads, tails, np.ones(len(heads), dtype=np.int64))


def localized_graph(q: int, m: int) -> WeightedGraph:
    """Rank-1 L ⪯ I_m, joined when L1+L2 has rank 2 and is ⪯ I_m; labelled by packed matrix."""
    if m < 3:
        raise DimensionError("the localized graph needs m >= 3")
    F = field_for(q)
    if not isinstance(F, FieldSpec):
        raise DimensionError("the localized graph is built over GF(2^b)")
    a, b = _identity_pairs(F, m, normalised=True)
    L = F.mul_array(a[:, :, None], b[:, None, :])
    labels = _keys(F, L).tolist()
    return _orthogonality_graph(F, a, b, labels)


def localized_source(q: int, m: int) -> tuple:
    """G0 on pairs (v1, v2) with v1ᵀv2 ≠ 0 and its projection onto the localized graph."""
    F = field_for(q)
    if not isinstance(F, FieldSpec):
        raise DimensionError("the localized source graph is built over GF(2^b)")
    v1, v2 = _identity_pairs(F, m, normalised=False)
    labels = [(tuple(x), tuple(y)) for x, y in zip(v1.tolist(), v2.tolist())]
    G0 = _orthogonality_graph(F, v1, v2, labels)

    def project(pair):
        x, y = np.array(pair[0]), np.array(pair[1])
        c = int(np.bitwise_xor.reduce(F.mul_array(x, y)))
        L = F.mul_array(F.mul_array(x, F.inv(c))[:, None], y[None, :])
        return int(_keys(F, L))

    return G0, project


def export_triplets(W: WalkOperator) -> str:
    return json.dumps(W.to_triplets(), sort_keys=True)
