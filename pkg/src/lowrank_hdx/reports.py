"""Verification suites, reports and exports.

Every check returns one or more records; a record always carries a status
(pass / fail / skipped / deviation). Checks that hit a size cap are recorded as
skipped rather than dropped.
"""

from __future__ import annotations

import itertools
import json
import logging
import math
import threading
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Callable

import numpy as np
from jinja2 import Environment, PackageLoader

from . import cayley, codes, homology
from .config import RunConfig
from .errors import HdxError, SizeCapError
from .gf_linalg import GFMatrix, canonical_subspace, f2_kernel, f2_rank, get_field, to_hex
from .grassmann_lowrank import (
    GrassConstructSpec,
    GrassFace,
    brute_force_minimal_matrices,
    build_X,
    face_counts,
    minimal_matrices,
    rank1_characterization,
    span_dimension_of_vertices,
    tensor_projection_check,
)
from .matrix_poset import (
    MatrixPosetSpec,
    check_poset_axioms,
    count_rank,
    dominated_by_identity,
    dominates,
    enumerate_rank,
)
from .models import CheckResult, VerificationRun
from .poset_core import (
    GradedComplex,
    basisify,
    check_link_quotient,
    check_standard,
    complex_to_json,
    grassmannian_closure,
    link,
    local_expansion,
    one_skeleton,
    simplicial_closure,
)
from .walks_spectral import (
    graph_lambda,
    localized_graph,
    matrix_walk_updown,
    perp_square_identity,
    spectral_lambda,
)

logger = logging.getLogger(__name__)

_jinja_env = Environment(
    loader=PackageLoader("lowrank_hdx", "templates"),
    autoescape=False,
    keep_trailing_newline=True,
)

SUITES = ("poset-axioms", "perp", "walks", "construction", "cayley", "codes", "homology")
STATUSES = ("pass", "fail", "skipped", "deviation")
PERP_CASES = ((2, 2), (2, 3), (2, 4), (3, 3), (4, 3))
RANK_COUNT_LIMIT = 5_000_000
QUICK_ENUM_CAP = 100_000


def get_template(name):
    """Get a Jinja2 template by name."""
    return _jinja_env.get_template(name)


# ---------- records


@dataclass
class Record:
    check_id: str
    anchor: str
    section: int
    params: dict = field(default_factory=dict)
    measured: object = None
    bound: object = None
    status: str = "pass"
    wall_time: float = 0.0
    note: str = ""

    def to_json(self) -> dict:
        return {
            "check_id": self.check_id,
            "anchor": self.anchor,
            "params": self.params,
            "measured": _plain(self.measured),
            "bound": _plain(self.bound),
            "status": self.status,
            "wall_time": round(self.wall_time, 3),
            "note": self.note,
        }


def _plain(value):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, int) and value.bit_length() > 53:
        return str(value)
    return value


@dataclass
class VerificationReport:
    config: RunConfig
    records: list = field(default_factory=list)
    started_at: datetime = field(default_factory=datetime.utcnow)
    finished_at: datetime | None = None

    def count(self, status: str) -> int:
        return sum(1 for r in self.records if r.status == status)

    @property
    def failed(self) -> bool:
        return self.count("fail") > 0

    @property
    def exit_code(self) -> int:
        return 1 if self.failed else 0

    def sorted_records(self) -> list:
        return sorted(self.records, key=lambda r: (r.section, r.check_id))

    def to_json(self) -> dict:
        return {
            "config": self.config.to_json(),
            "config_hash": self.config.config_hash(),
            "summary": {s: self.count(s) for s in STATUSES},
            "records": [r.to_json() for r in self.sorted_records()],
        }

    def render_text(self) -> str:
        return get_template("report.txt").render(
            records=self.sorted_records(),
            summary={s: self.count(s) for s in STATUSES},
            config_hash=self.config.config_hash(),
            suite=self.config.suite,
        )


# ---------- shared inputs


class SharedInputs:
    """Large inputs built once per run and shared by the checks that need them."""

    def __init__(self, config: RunConfig):
        self.config = config
        self._lock = threading.Lock()
        self._cache = {}

    def _get(self, key: str, build: Callable):
        with self._lock:
            if key not in self._cache:
                self._cache[key] = build()
            return self._cache[key]

    @property
    def x114_spec(self) -> GrassConstructSpec:
        return GrassConstructSpec(1, 1, 4)

    def x114(self) -> GradedComplex:
        return self._get("x114", lambda: build_X(self.x114_spec, self.config.cap, threads=self.config.threads))

    def x114_lambda(self) -> float:
        return self._get("x114_lambda", lambda: graph_lambda(one_skeleton(self.x114())).value)

    def x114_cayley(self) -> cayley.CayleySpec:
        return self._get("x114_cayley", lambda: cayley.CayleySpec.from_grassmannian(self.x114()))


@dataclass
class Check:
    check_id: str
    suite: str
    anchor: str
    run: Callable
    quick: bool = False


def _record(check: Check, **fields) -> Record:
    return Record(check.check_id, check.anchor, SUITES.index(check.suite), **fields)


def _status(ok: bool) -> str:
    return "pass" if ok else "fail"


# ---------- poset axioms


def check_axioms(ctx: SharedInputs, rng, check: Check) -> list:
    spec = MatrixPosetSpec(get_field(1), 3)
    result = check_poset_axioms(spec, cap=512)
    ok = all(v for k, v in result.items() if k != "matrices") and result["matrices"] == 512
    return [_record(check, params={"q": 2, "m": 3}, measured=result, status=_status(ok))]


def check_rank_counts(ctx: SharedInputs, rng, check: Check) -> list:
    limit = QUICK_ENUM_CAP if ctx.config.quick else min(ctx.config.enum_cap, RANK_COUNT_LIMIT)
    records = []
    for m in (2, 3, 4):
        for q in (2, 4):
            spec = MatrixPosetSpec(get_field(q.bit_length() - 1), m)
            for s in range(1, m + 1):
                params = {"m": m, "q": q, "s": s}
                expected = count_rank(m, s, q)
                rec = Record(f"{check.check_id}.m{m}q{q}s{s}", check.anchor, SUITES.index(check.suite), params)
                rec.bound = expected
                try:
                    level = enumerate_rank(spec, s, cap=limit)
                except SizeCapError as exc:
                    rec.status, rec.note = "skipped", f"skipped (cap): {exc}"
                else:
                    rec.measured = len({M.pack() for M in level})
                    rec.status = _status(rec.measured == expected)
                records.append(rec)
    return records


def check_identity_domination(ctx: SharedInputs, rng, check: Check) -> list:
    records = []
    for q, m, sample in ((2, 3, None), (4, 3, 10_000)):
        field_ = get_field(q.bit_length() - 1)
        identity = GFMatrix.identity(field_, m)
        if sample is None:
            values = range(q ** (m * m))
        else:
            values = (int(v) for v in rng.integers(0, q ** (m * m), size=sample, dtype=np.int64))
        checked = disagreements = 0
        for v in values:
            M = GFMatrix.from_packed(field_, m, m, v)
            checked += 1
            if bool(dominated_by_identity(M)) != dominates(M, identity):
                disagreements += 1
        records.append(
            Record(
                f"{check.check_id}.q{q}m{m}",
                check.anchor,
                SUITES.index(check.suite),
                {"q": q, "m": m, "matrices": checked},
                measured=disagreements,
                bound=0,
                status=_status(disagreements == 0),
            )
        )
    return records


# ---------- perp graphs


def check_perp(ctx: SharedInputs, rng, check: Check) -> list:
    records = []
    section = SUITES.index(check.suite)
    for q, m in PERP_CASES:
        report = perp_square_identity(q, m)
        params = {"q": q, "m": m}
        note = "" if report.stated_form else "holds only with the parallel-pair correction"
        records.append(
            Record(f"perp.identity.q{q}m{m}", check.anchor, section, params,
                   measured=report.exact, bound=True, status=_status(report.exact), note=note)
        )
        closed_form = abs(report.lam - report.lam_exact) <= ctx.config.tol * 100
        if report.within_bound:
            status = "pass"
        elif closed_form:
            status = "deviation"
        else:
            status = "fail"
        records.append(
            Record(f"perp.lambda.q{q}m{m}", check.anchor, section, params,
                   measured=report.lam, bound=report.bound, status=status,
                   note=f"closed form {report.lam_exact:.12g}")
        )
    return records


# ---------- walks


def _walk_record(check: Check, params: dict, lam: float, bound: float, n_states: int, residual: float, tol: float):
    params = params | {"states": n_states}
    note = f"residual {residual:.3g}"
    return _record(check, params=params, measured=lam, bound=bound, status=_status(lam <= bound + tol), note=note)


def check_mat1ud(ctx: SharedInputs, rng, check: Check) -> list:
    walk = matrix_walk_updown(MatrixPosetSpec(get_field(4), 2))
    result = spectral_lambda(walk.walk, seed=ctx.config.seed)
    return [_walk_record(check, {"q": 16, "m": 2}, result.value, walk.bound, walk.walk.n, result.residual, 1e-7)]


def check_mat1uddomi(ctx: SharedInputs, rng, check: Check) -> list:
    walk = matrix_walk_updown(MatrixPosetSpec(get_field(4), 3), restrict="dominated_by_identity")
    result = spectral_lambda(walk.walk, seed=ctx.config.seed)
    return [_walk_record(check, {"q": 16, "m": 3}, result.value, walk.bound, walk.walk.n, result.residual, 1e-7)]


def check_localized(ctx: SharedInputs, rng, check: Check) -> list:
    G = localized_graph(8, 3)
    result = graph_lambda(G)
    return [_walk_record(check, {"q": 8, "m": 3}, result.value, 3 / 8, G.n, result.residual, 1e-7)]


# ---------- construction


def check_face_counts(ctx: SharedInputs, rng, check: Check) -> list:
    counts = face_counts(ctx.x114_spec)
    ok = counts[0] == 7350 and counts[1] == 1_058_400
    return [_record(check, params={"r": 1, "b": 1, "n": 4}, measured={str(k): v for k, v in counts.items()},
                    status=_status(ok))]


def check_x114_structure(ctx: SharedInputs, rng, check: Check) -> list:
    X = ctx.x114()
    spec = ctx.x114_spec
    params = {"r": 1, "b": 1, "n": 4}
    section = SUITES.index(check.suite)
    records = []
    counts = X.counts()
    records.append(Record("construction.x114.vertices", check.anchor, section, params,
                          measured=counts[0], bound=7350, status=_status(counts[0] == 7350)))
    dim = span_dimension_of_vertices(X)
    records.append(Record("construction.x114.span", check.anchor, section, params,
                          measured=dim, bound=spec.k, status=_status(dim == spec.k)))
    bad = sum(1 for face in X.faces_at(1) if not rank1_characterization(GrassFace(spec, face)))
    records.append(Record("construction.x114.rank1", check.anchor, section, params | {"faces": X.count(1)},
                          measured=bad, bound=0, status=_status(bad == 0)))
    picks = rng.choice(X.count(1), size=min(50, X.count(1)), replace=False)
    mismatched = 0
    for k in sorted(int(p) for p in picks):
        x = GrassFace(spec, X.faces_at(1)[k])
        fast = [M.pack() for M in minimal_matrices(x)]
        brute = [M.pack() for M in brute_force_minimal_matrices(x)]
        mismatched += fast != brute
    records.append(Record("construction.x114.minimal", check.anchor, section, params | {"sampled": len(picks)},
                          measured=mismatched, bound=0, status=_status(mismatched == 0)))
    connected = one_skeleton(X).is_connected()
    records.append(Record("construction.x114.connected", check.anchor, section, params,
                          measured=connected, bound=True, status="pass" if connected else "deviation"))
    return records


def check_projection(ctx: SharedInputs, rng, check: Check) -> list:
    X = ctx.x114()
    report = tensor_projection_check(GrassFace(ctx.x114_spec, ()), mode="full", X=X, cap=ctx.config.cap)
    note = f"λ(G2) = {report.lambda_factors.get('G2')}"
    return [_record(check, params={"r": 1, "b": 1, "n": 4, "edges": report.checked},
                    measured=report.lambda_link, bound=None, status=_status(report.passed), note=note)]


def random_rank2_complex(rng, k: int, tops: int) -> GradedComplex:
    """Closure of `tops` random 3-dimensional subspaces of F2^k."""
    spans = []
    while len(spans) < tops:
        vs = [int(v) for v in rng.integers(1, 1 << k, size=3)]
        if f2_rank(vs) == 3:
            spans.append(vs)
    return grassmannian_closure(spans, k)


def _rank2_toys(rng, count: int) -> list:
    toys = [grassmannian_closure([[1, 2, 4]], 3),
            grassmannian_closure([f2_kernel([u], 4) for u in range(1, 16)], 4)]
    for _ in range(count):
        toys.append(random_rank2_complex(rng, int(rng.integers(4, 6)), int(rng.integers(2, 6))))
    return toys


def check_basisification(ctx: SharedInputs, rng, check: Check) -> list:
    worst1 = 0.0
    for _ in range(20):
        k = int(rng.integers(3, 7))
        X = homology.random_rank1_complex(rng, k, int(rng.integers(4, 15)), int(rng.integers(1, 8)))
        worst1 = max(worst1, abs(local_expansion(X, -1).value - local_expansion(basisify(X), -1).value))
    worst2 = 0.0
    toys = _rank2_toys(rng, 6)
    for X in toys:
        B = basisify(X)
        for i in (-1, 0):
            worst2 = max(worst2, abs(local_expansion(X, i).value - local_expansion(B, i).value))
    tol = ctx.config.tol
    return [
        Record(f"{check.check_id}.rank1", check.anchor, SUITES.index(check.suite), params={"toys": 20},
               measured=worst1, bound=tol, status=_status(worst1 <= tol)),
        Record(f"{check.check_id}.rank2", check.anchor, SUITES.index(check.suite),
               params={"toys": len(toys), "ranks": [-1, 0]}, measured=worst2, bound=tol,
               status=_status(worst2 <= tol)),
    ]


def check_link_quotients(ctx: SharedInputs, rng, check: Check) -> list:
    faces = 0
    failures = []
    for X in _rank2_toys(rng, 4):
        for i in (-1, 0, 1):
            for x in X.faces_at(i):
                report = check_link_quotient(X, x)
                faces += 1
                if not report.passed:
                    failures.append(f"{[to_hex(v, X.ambient_dim) for v in x]}: {report.reason}")
    return [_record(check, params={"links": faces}, measured=len(failures), bound=0,
                    status=_status(not failures), note="; ".join(failures[:3]))]


# ---------- cayley


def check_cayley_counting(ctx: SharedInputs, rng, check: Check) -> list:
    records = []
    for r, b, n in ((1, 1, 4), (1, 1, 5)):
        report = cayley.cayley_counting_check(GrassConstructSpec(r, b, n))
        records.append(
            Record(f"{check.check_id}.r{r}b{b}n{n}", check.anchor, SUITES.index(check.suite),
                   {"r": r, "b": b, "n": n, "vertices": report.vertices, "projected": report.projected},
                   measured=report.faces_per_vertex, bound=report.bound, status=_status(report.passed))
        )
    return records


def check_cayley_symmetry(ctx: SharedInputs, rng, check: Check) -> list:
    spec = ctx.x114_cayley()
    report = cayley.check_symmetry(spec.S, spec.k)
    return [_record(check, params={"pairs": report.checked}, measured=report.passed, bound=True,
                    status=_status(report.passed), note=report.reason)]


def check_cayley_links(ctx: SharedInputs, rng, check: Check) -> list:
    spec = ctx.x114_cayley()
    vertices = [int(v) for v in rng.integers(0, 1 << spec.k, size=5)]
    ok = True
    for v in vertices:
        L = cayley.cayley_vertex_link(spec, v)
        ok = ok and L.counts() == spec.S.counts()
    return [_record(check, params={"vertices": vertices}, measured=ok, bound=True, status=_status(ok))]


def check_cayley_lambda_toys(ctx: SharedInputs, rng, check: Check) -> list:
    worst = 0.0
    for _ in range(10):
        k = int(rng.integers(2, 9))
        gens = [int(g) for g in rng.integers(1, 1 << k, size=int(rng.integers(k, 3 * k)))]
        worst = max(worst, abs(cayley.cayley_graph_lambda(k, gens) - cayley.dense_cayley_lambda(k, gens)))
    return [_record(check, params={"toys": 10}, measured=worst, bound=1e-9, status=_status(worst <= 1e-9))]


def check_cayley_lambda_x114(ctx: SharedInputs, rng, check: Check) -> list:
    X = ctx.x114()
    gens = [v for (v,) in X.faces_at(0)]
    sums = cayley.character_sums(16, gens)
    u = int(np.argmax(np.abs(sums[1:]))) + 1
    direct = abs(1 - 2 * sum((g & u).bit_count() & 1 for g in gens) / len(gens))
    lam = cayley.cayley_graph_lambda(16, gens)
    gap = max(abs(lam - direct), abs(lam - codes.bias(gens, 16)))
    return [_record(check, params={"k": 16, "generators": len(gens)}, measured=lam, bound=None,
                    status=_status(gap <= 1e-9), note=f"direct character at u={u:#x}: {direct:.12g}")]


def _toy_cayley(rng) -> cayley.CayleySpec:
    while True:
        X = homology.random_rank1_complex(rng, 3, 7, 2)
        if X.count(1):
            return cayley.CayleySpec.from_grassmannian(X)


def check_cayley_toys(ctx: SharedInputs, rng, check: Check) -> list:
    worst_standard = worst_local = 0.0
    display = lazy = True
    for _ in range(3):
        spec = _toy_cayley(rng)
        Y = cayley.build_cayley_complex(spec)
        worst_standard = max(worst_standard, check_standard(Y))
        display = display and cayley.check_weight_display(spec, Y)
        for i in range(0, spec.S.rank):
            a = local_expansion(Y, i, exhaustive_limit=10**6).value
            b = local_expansion(spec.S, i - 1, exhaustive_limit=10**6).value
            worst_local = max(worst_local, abs(a - b))
        for v in (0, 5):
            full = link(Y, (v,))
            lazy_link = cayley.cayley_vertex_link(spec, v)
            for i in range(0, spec.S.rank + 1):
                rest = sorted(tuple(sorted(set(f) - {v})) for f in full.faces_at(i))
                lazy = lazy and rest == lazy_link.faces_at(i)
    ok = worst_standard <= 1e-12 and worst_local <= 1e-9 and display and lazy
    note = f"standardness gap {worst_standard:.3g}, display {display}, lazy links {lazy}"
    return [_record(check, params={"toys": 3, "k": 3}, measured=worst_local, bound=1e-9, status=_status(ok), note=note)]


def check_cayley_trickle(ctx: SharedInputs, rng, check: Check) -> list:
    row = cayley.cayley_trickle_check(ctx.x114(), ctx.config.tol)
    return [_record(check, params={"lambda_link": row.lam_next}, measured=row.lam, bound=row.bound,
                    status=row.status, note=row.note)]


# ---------- codes


def check_codes_x114(ctx: SharedInputs, rng, check: Check) -> list:
    X = ctx.x114()
    pair = codes.build_code_pair(X)
    section = SUITES.index(check.suite)
    params = {"r": 1, "b": 1, "n": 4}
    records = [
        Record("codes.x114.orthogonal", check.anchor, section, params | {"checks": pair.n_checks},
               measured=pair.orthogonal() and pair.check_weights(), bound=True,
               status=_status(pair.orthogonal() and pair.check_weights()))
    ]
    image = pair.codewords_basis()
    target = pair.n - len(image)
    rank, _, _ = codes.h_rank(pair, target)
    records.append(Record("codes.x114.cover", check.anchor, section, params,
                          measured=pair.n - rank, bound=len(image), status=_status(rank == target),
                          note="ker H_X = im G_X certified by rank" if rank == target else ""))
    report = codes.expansion_to_distance_check(X, ctx.x114_lambda(), ctx.config.tol)
    records.append(Record("codes.x114.distance", check.anchor, section, params | {"lambda": report.lam},
                          measured=report.bias, bound=report.bound, status=report.status,
                          note=f"window {report.window}, weights [{report.min_fraction}, {report.max_fraction}] {report.note}"))
    return records


def check_codes_toys(ctx: SharedInputs, rng, check: Check) -> list:
    orth = covers = 0
    degenerate = 0
    for _ in range(100):
        k = int(rng.integers(3, 8))
        X = homology.random_rank1_complex(rng, k, int(rng.integers(3, 15)), int(rng.integers(0, 8)))
        pair = codes.build_code_pair(X)
        orth += pair.orthogonal() and pair.check_weights()
        try:
            lift = codes.cover_lift(X)
        except HdxError:
            degenerate += 1
            continue
        cover = codes.universal_cover(X)
        order = [lift[v] for v in pair.G]
        covers += codes.generator_code(cover, order) == tuple(codes.kernel_H(pair))
    ok = orth == 100 and covers + degenerate == 100
    return [_record(check, params={"toys": 100}, measured={"orthogonal": orth, "covers": covers,
                                                          "degenerate": degenerate},
                    bound=100, status=_status(ok))]


# ---------- homology


def _vectors_complex(k: int, vertices, faces=()) -> GradedComplex:
    out = {-1: [()], 0: sorted((v,) for v in vertices)}
    if faces:
        out[1] = sorted(canonical_subspace(f) for f in faces)
    return GradedComplex("grassmannian", out, None, ambient_dim=k)


def check_homology_examples(ctx: SharedInputs, rng, check: Check) -> list:
    triangle = homology.hommodswap_check(_vectors_complex(2, [1, 2, 3], [(1, 2)]))
    free = homology.hommodswap_check(_vectors_complex(2, [1, 2, 3]))
    sphere = homology.ChainComplexF2(simplicial_closure(itertools.combinations(range(4), 3)))
    circle = homology.ChainComplexF2(simplicial_closure([(0, 1), (1, 2), (0, 2)]))
    measured = {
        "triangle": [triangle.lhs, triangle.rhs],
        "triangle_free": [free.lhs, free.rhs],
        "sphere_h1_h2": [sphere.betti(1), sphere.betti(2)],
        "circle_h0_h1": [circle.betti(0), circle.betti(1)],
    }
    ok = (
        triangle.passed and (triangle.lhs, triangle.rhs) == (0, 0)
        and free.passed and (free.lhs, free.rhs) == (1, 1)
        and (sphere.betti(1), sphere.betti(2)) == (0, 1) and sphere.is_complex()
        and (circle.betti(0), circle.betti(1)) == (0, 1)
    )
    return [_record(check, measured=measured, status=_status(ok))]


def check_homology_random(ctx: SharedInputs, rng, check: Check) -> list:
    failures = 0
    bounds_ok = True
    for _ in range(100):
        k = int(rng.integers(2, 7))
        X = homology.random_rank1_complex(rng, k, int(rng.integers(3, 15)), int(rng.integers(0, 10)))
        report = homology.hommodswap_check(X)
        failures += not report.passed
        bounds_ok = bounds_ok and report.betti.get(1, 0) >= report.rhs
    return [_record(check, params={"toys": 100}, measured=failures, bound=0,
                    status=_status(failures == 0 and bounds_ok))]


def quotient_toy(n_free: int) -> GradedComplex:
    """``n_free`` coordinate vectors plus a triangle on two further coordinates, in F2^10."""
    a, b = 1 << n_free, 1 << (n_free + 1)
    vertices = [1 << j for j in range(n_free)] + [a, b, a ^ b]
    return _vectors_complex(10, vertices, [(a, b)])


def check_quotient(ctx: SharedInputs, rng, check: Check) -> list:
    section = SUITES.index(check.suite)
    full = homology.quotient_iterate(quotient_toy(7), 3)
    dims = [row.quotient_dim for row in full.rows]
    records = [
        Record("homology.quotient.trace", check.anchor, section, {"vertices": 10, "k": 10, "steps": 3},
               measured=dims, bound=[dims[0] + j for j in range(4)],
               status=_status(full.completed and full.passed),
               note=f"h1 {[row.h1 for row in full.rows]}")
    ]
    partial = homology.quotient_iterate(quotient_toy(3), 3)
    records.append(Record("homology.quotient.partial", check.anchor, section, {"vertices": 6, "k": 10, "steps": 3},
                          measured=len(partial.rows) - 1, bound=1,
                          status=_status(not partial.completed and partial.passed and len(partial.rows) == 2),
                          note=partial.stop_reason))
    return records


CHECKS = (
    Check("poset.axioms", "poset-axioms", "matrix poset is a graded pure poset", check_axioms, quick=True),
    Check("poset.rank-counts", "poset-axioms", "rank level sizes", check_rank_counts, quick=True),
    Check("poset.identity", "poset-axioms", "domination by the identity", check_identity_domination, quick=True),
    Check("perp", "perp", "perp graph square identity and spectrum", check_perp, quick=True),
    Check("walks.mat1ud", "walks", "rank-1 up-down walk on M_16^2", check_mat1ud),
    Check("walks.mat1uddomI", "walks", "rank-1 up-down walk below I_3", check_mat1uddomi),
    Check("walks.localized", "walks", "localized graph expansion", check_localized),
    Check("construction.counts", "construction", "face counts of X^{1,1,4}", check_face_counts, quick=True),
    Check("construction.x114", "construction", "structure of X^{1,1,4}", check_x114_structure),
    Check("construction.projection", "construction", "G2 projects onto the 1-skeleton", check_projection),
    Check("construction.basisification", "construction", "basisification keeps local expansion",
          check_basisification, quick=True),
    Check("construction.link-quotient", "construction", "links are quotient complexes", check_link_quotients,
          quick=True),
    Check("cayley.counting", "cayley", "Cayley complex size", check_cayley_counting, quick=True),
    Check("cayley.symmetry", "cayley", "Cayley symmetry of β(X)", check_cayley_symmetry),
    Check("cayley.links", "cayley", "vertex links are translates of S", check_cayley_links),
    Check("cayley.lambda.toys", "cayley", "character sweep against eigensolver", check_cayley_lambda_toys,
          quick=True),
    Check("cayley.lambda.x114", "cayley", "character sweep at k = 16", check_cayley_lambda_x114),
    Check("cayley.toys", "cayley", "standard weights and links of Cayley complexes", check_cayley_toys, quick=True),
    Check("cayley.trickle", "cayley", "trickle-down on the Cayley complex", check_cayley_trickle),
    Check("codes.x114", "codes", "code pair of X^{1,1,4}", check_codes_x114),
    Check("codes.toys", "codes", "H·G = 0 and universal covers", check_codes_toys, quick=True),
    Check("homology.examples", "homology", "small homology examples", check_homology_examples, quick=True),
    Check("homology.random", "homology", "H1 modulo swaps against the code quotient", check_homology_random),
    Check("homology.quotient", "homology", "quotienting raises the code quotient", check_quotient, quick=True),
)


def select_checks(suite: str, quick: bool = False) -> list:
    if suite != "all" and suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}")
    return [c for c in CHECKS if (suite == "all" or c.suite == suite) and (c.quick or not quick)]


def check_rng(seed: int, check_id: str) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(zlib.crc32(check_id.encode()),)))


def run_check(check: Check, ctx: SharedInputs) -> list:
    logger.info("check %s started", check.check_id)
    start = time.perf_counter()
    try:
        records = check.run(ctx, check_rng(ctx.config.seed, check.check_id), check)
    except SizeCapError as exc:
        logger.warning("check %s skipped: %s", check.check_id, exc)
        records = [_record(check, status="skipped", note=f"skipped (cap): {exc}",
                           params={"projected": str(exc.projected), "cap": exc.cap})]
    except HdxError as exc:
        logger.warning("check %s failed: %s", check.check_id, exc)
        records = [_record(check, status="fail", note=f"{type(exc).__name__}: {exc}")]
    except Exception as exc:
        logger.exception("check %s raised", check.check_id)
        records = [_record(check, status="fail", note=f"{type(exc).__name__}: {exc}")]
    elapsed = time.perf_counter() - start
    for rec in records:
        rec.wall_time = elapsed / len(records)
    logger.info("check %s finished in %.2fs", check.check_id, elapsed)
    return records


def run_verify(config: RunConfig) -> VerificationReport:
    """Run the selected suite; records come back in section order."""
    config.validate()
    checks = select_checks(config.suite, config.quick)
    ctx = SharedInputs(config)
    report = VerificationReport(config)
    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            for records in pool.map(lambda c: run_check(c, ctx), checks):
                report.records.extend(records)
    else:
        for check in checks:
            report.records.extend(run_check(check, ctx))
    report.finished_at = datetime.utcnow()
    return report


def write_report(report: VerificationReport, out_dir) -> tuple:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    json_path = out / "report.json"
    text_path = out / "report.txt"
    json_path.write_text(json.dumps(report.to_json(), sort_keys=True, indent=2) + "\n")
    text_path.write_text(report.render_text())
    return json_path, text_path


def store_report(session, report: VerificationReport) -> VerificationRun:
    """Persist a report in the run ledger."""
    run = VerificationRun(
        config_hash=report.config.config_hash(),
        suite=report.config.suite,
        seed=report.config.seed,
        started_at=report.started_at,
        finished_at=report.finished_at,
        passed=report.count("pass"),
        failed=report.count("fail"),
        skipped=report.count("skipped"),
    )
    for rec in report.sorted_records():
        data = rec.to_json()
        run.checks.append(
            CheckResult(
                check_id=rec.check_id,
                anchor=rec.anchor,
                params=json.dumps(data["params"], sort_keys=True),
                measured=json.dumps(data["measured"], sort_keys=True),
                bound=json.dumps(data["bound"], sort_keys=True),
                status=rec.status,
                wall_time=rec.wall_time,
            )
        )
    session.add(run)
    session.commit()
    return run


# ---------- exports

EXPORTS = ("complex-json", "rank-jsonl", "skeleton-dot", "skeleton-csv", "code-json", "parity-text", "generators-hex")


def graph_to_dot(G, name: str = "G", nbits: int | None = None) -> str:
    """Undirected DOT; tuple labels of F2 vectors are written in hex when ``nbits`` is given."""

    def label(v):
        if isinstance(v, tuple) and nbits:
            return "-".join(to_hex(x, nbits) for x in v)
        return str(v)

    labels = [label(v) for v in G.vertices]
    edges = [(int(a), int(b), G.scale * int(c)) for a, b, c in zip(G.heads, G.tails, G.counts)]
    return get_template("graph.dot").render(name=name, labels=labels, edges=edges)


def empty_complex() -> GradedComplex:
    return GradedComplex("grassmannian", {-1: [()]}, None, ambient_dim=0)


def run_export(config: RunConfig, what: str, out_path, X: GradedComplex | None = None) -> Path:
    """Write one export; output depends only on the config and seed."""
    if what not in EXPORTS:
        raise ValueError(f"unknown export {what!r}")
    config.validate()
    path = Path(out_path)
    if what == "rank-jsonl":
        spec = MatrixPosetSpec(get_field(config.q.bit_length() - 1), config.m)
        lines = []
        for s in range(0, config.m + 1):
            for M in enumerate_rank(spec, s, config.enum_cap).iter_jsonl():
                lines.append(json.dumps({"rank": s, "matrix": M}, sort_keys=True))
        text = "".join(line + "\n" for line in lines)
    else:
        if X is None:
            X = build_X(GrassConstructSpec(config.r, config.b, config.n), config.cap, threads=config.threads)
        if what == "complex-json":
            text = json.dumps(complex_to_json(X), sort_keys=True) + "\n"
        elif what == "skeleton-dot":
            text = graph_to_dot(one_skeleton(X), "skeleton", X.ambient_dim)
        elif what == "skeleton-csv":
            text = one_skeleton(X).to_csv()
        elif what == "generators-hex":
            text = "".join(to_hex(v, X.ambient_dim) + "\n" for (v,) in X.faces_at(0))
        else:
            pair = codes.build_code_pair(X)
            text = codes.code_to_json(pair) + "\n" if what == "code-json" else codes.parity_check_text(pair)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    logger.info("wrote %s (%d bytes)", path, len(text))
    return path
