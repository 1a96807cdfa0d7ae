"""Explicit high-dimensional expanders from low-rank matrix posets over F_q, and their F2 codes."""

import dataclasses
import json
import logging
from pathlib import Path

import click
import numpy as np
from click_default_group import DefaultGroup

from .config import Config, RunConfig
from .errors import HdxError
from .grassmann_lowrank import GrassConstructSpec, build_X
from .poset_core import complex_from_json, complex_to_json, local_expansion, trickle_check
from .reports import EXPORTS, SUITES

logger = logging.getLogger(__name__)

WALK_KINDS = ("mat1ud", "mat1uddomI", "localized", "perp", "downup")
CAYLEY_CHECKS = ("symmetry", "links", "counting")


def _setup_logging(verbosity):
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def _run_config(ctx, **overrides):
    """RunConfig from environment defaults plus command-line flags."""
    try:
        config = Config()
    except ValueError as e:
        raise click.UsageError(str(e))
    overrides.setdefault("verbosity", ctx.obj.get("verbosity", 0) if ctx.obj else 0)
    try:
        return RunConfig.from_config(config, command=ctx.command.name, **overrides).validate()
    except ValueError as e:
        raise click.UsageError(str(e))


def _load_complex(source, config):
    """Complex from a JSON file, or X^{r,b,n} built from the config."""
    if source:
        with open(source) as f:
            return complex_from_json(json.load(f))
    spec = GrassConstructSpec(config.r, config.b, config.n)
    return build_X(spec, config.cap, threads=config.threads)


def _emit(obj, out):
    text = json.dumps(obj, sort_keys=True, indent=2)
    if out:
        Path(out).write_text(text + "\n")
        click.echo(f"Output: {Path(out).resolve()}")
    else:
        click.echo(text)


def _construction_options(f):
    f = click.option("--n", "n", type=int, default=None, help="Matrix size n (default: 4).")(f)
    f = click.option("--b", "b", type=int, default=None, help="Field degree, q = 2^b (default: 1).")(f)
    f = click.option("--r", "r", type=int, default=None, help="Complex rank r (default: 1).")(f)
    return f


def _run_options(f):
    f = click.option("--threads", type=int, default=None, help="Worker threads (default: HDX_THREADS).")(f)
    f = click.option("--tol", type=float, default=None, help="Numerical tolerance (default: HDX_TOL).")(f)
    f = click.option("--seed", type=int, default=None, help="Seed for every sampled quantity (default: HDX_SEED).")(f)
    f = click.option("--cap", type=int, default=None, help="Maximum faces per rank (default: HDX_CAP).")(f)
    return f


@click.group(cls=DefaultGroup, default="verify", default_if_no_args=True)
@click.version_option(None, "-v", "--version", package_name="lowrank-hdx")
@click.option("-V", "--verbose", count=True, help="Log more (-V info, -VV debug).")
@click.pass_context
def cli(ctx, verbose):
    """Build and verify high-dimensional expanders from low-rank matrices."""
    ctx.ensure_object(dict)
    ctx.obj["verbosity"] = verbose
    _setup_logging(verbose)


@cli.command("build")
@_construction_options
@_run_options
@click.option("--max-rank", type=int, default=None, help="Highest rank to enumerate (default: r).")
@click.option("-o", "--out", type=click.Path(), help="Write the complex as JSON to this file.")
@click.pass_context
def build_cmd(ctx, r, b, n, cap, seed, tol, threads, max_rank, out):
    """Enumerate the Grassmannian complex X^{r,b,n}."""
    config = _run_config(ctx, r=r, b=b, n=n, cap=cap, seed=seed, tol=tol, threads=threads, out=out)
    try:
        spec = GrassConstructSpec(config.r, config.b, config.n)
        X = build_X(spec, config.cap, max_rank=max_rank, threads=config.threads)
    except HdxError as e:
        raise click.ClickException(str(e))
    for i, c in sorted(X.counts().items()):
        if i >= 0:
            click.echo(f"rank {i}: {c} faces")
    if out:
        Path(out).write_text(json.dumps(complex_to_json(X), sort_keys=True) + "\n")
        click.echo(f"Output: {Path(out).resolve()}")


@cli.command("walks")
@click.option("--kind", type=click.Choice(WALK_KINDS), default="mat1ud", help="Which walk to measure.")
@click.option("--q", "q", type=int, default=None, help="Field size (default: 16).")
@click.option("--m", "m", type=int, default=None, help="Matrix size (default: 2).")
@click.option("--s", "s", type=int, default=1, help="Rank level for the down-up walk.")
@click.option("--seed", type=int, default=None, help="Seed for the power-iteration start vector.")
@click.option("--triplets", type=click.Path(), help="Also write the operator as sparse triplet JSON.")
@click.pass_context
def walks_cmd(ctx, kind, q, m, s, seed, triplets):
    """Measure λ of a matrix-poset walk, perp graph or localized graph."""
    from . import walks_spectral as ws
    from .gf_linalg import get_field
    from .matrix_poset import MatrixPosetSpec

    config = _run_config(ctx, q=q, m=m, seed=seed)
    try:
        if kind == "perp":
            report = ws.perp_square_identity(config.q, config.m)
            _emit(
                {
                    "q": report.q,
                    "m": report.m,
                    "identity": report.exact,
                    "stated_form": report.stated_form,
                    "lambda": report.lam,
                    "lambda_closed_form": report.lam_exact,
                    "bound": report.bound,
                },
                None,
            )
            return
        if kind == "localized":
            G = ws.localized_graph(config.q, config.m)
            result = ws.graph_lambda(G)
            W = ws.graph_walk(G)
        else:
            if config.q & (config.q - 1):
                raise click.BadParameter("matrix walks need q a power of two", param_hint="--q")
            spec = MatrixPosetSpec(get_field(config.q.bit_length() - 1), config.m)
            if kind == "downup":
                W = ws.rank_downup(spec, s)
            else:
                restrict = "dominated_by_identity" if kind == "mat1uddomI" else None
                W = ws.matrix_walk_updown(spec, restrict=restrict).walk
            result = ws.spectral_lambda(W, tol=config.tol, seed=config.seed)
    except HdxError as e:
        raise click.ClickException(str(e))
    click.echo(ws.CSV_HEADER)
    click.echo(result.csv_row())
    if triplets:
        Path(triplets).write_text(ws.export_triplets(W) + "\n")
        click.echo(f"Triplets: {Path(triplets).resolve()}")


@cli.command("expansion")
@click.option("--from", "source", type=click.Path(exists=True), help="Complex JSON (default: build X^{r,b,n}).")
@_construction_options
@_run_options
@click.option("--rank", "rank", type=int, default=-1, help="Face rank i of the links to measure.")
@click.option("--sample", type=int, default=None, help="Sample this many faces (a lower bound).")
@click.option("--trickle", is_flag=True, help="Also run the trickle-down consistency check.")
@click.pass_context
def expansion_cmd(ctx, source, r, b, n, cap, seed, tol, threads, rank, sample, trickle):
    """Local spectral expansion λ^(i) of a complex."""
    from .cayley import cayley_trickle_check

    config = _run_config(ctx, r=r, b=b, n=n, cap=cap, seed=seed, tol=tol, threads=threads)
    try:
        X = _load_complex(source, config)
        result = local_expansion(X, rank, sample=sample, seed=config.seed, threads=config.threads)
        out = {
            "rank": result.rank,
            "lambda": result.value,
            "kind": result.label,
            "faces_checked": result.faces_checked,
            "disconnected_links": len(result.disconnected),
        }
        if trickle:
            rows = trickle_check(X, config.tol, config.threads)
            if X.kind == "grassmannian" and X.rank >= 1:
                rows.insert(0, cayley_trickle_check(X, config.tol))
            out["trickle"] = [dataclasses.asdict(row) for row in rows]
    except HdxError as e:
        raise click.ClickException(str(e))
    except ValueError as e:
        raise click.BadParameter(str(e), param_hint="--from")
    _emit(out, None)


@cli.command("cayley")
@click.option("--from", "source", type=click.Path(exists=True), help="Grassmannian complex JSON.")
@_construction_options
@_run_options
@click.option("--check", "checks", default="symmetry,links,counting", help="Comma-separated checks to run.")
@click.option("--lambda", "with_lambda", is_flag=True, help="λ of the Cayley 1-skeleton by character sweep.")
@click.option("--samples", type=int, default=5, help="Random vertices for the link check.")
@click.option("--generators", type=click.Path(), help="Write the generator set as hex vectors.")
@click.option("-o", "--out", type=click.Path(), help="Write the JSON report to this file.")
@click.pass_context
def cayley_cmd(ctx, source, r, b, n, cap, seed, tol, threads, checks, with_lambda, samples, generators, out):
    """Cayley complex Cay(F2^k, β(X)): symmetry, links, counting and λ."""
    from . import cayley
    from .gf_linalg import to_hex

    wanted = [c.strip() for c in checks.split(",") if c.strip()]
    unknown = [c for c in wanted if c not in CAYLEY_CHECKS]
    if unknown:
        raise click.BadParameter(f"unknown checks {unknown}", param_hint="--check")
    config = _run_config(ctx, r=r, b=b, n=n, cap=cap, seed=seed, tol=tol, threads=threads, samples=samples, out=out)
    report = {}
    try:
        X = _load_complex(source, config)
        spec = cayley.CayleySpec.from_grassmannian(X)
        if "symmetry" in wanted:
            sym = cayley.check_symmetry(spec.S, spec.k)
            report["symmetry"] = {"passed": sym.passed, "checked": sym.checked, "reason": sym.reason}
        if "links" in wanted:
            rng = np.random.default_rng(config.seed)
            vertices = [int(v) for v in rng.integers(0, 1 << spec.k, size=config.samples)]
            for v in vertices:
                cayley.cayley_vertex_link(spec, v)
            report["links"] = {"vertices": [to_hex(v, spec.k) for v in vertices], "passed": True}
        if "counting" in wanted:
            grass = GrassConstructSpec(**{key: X.params[key] for key in ("r", "b", "n")})
            counting = cayley.cayley_counting_check(grass, X)
            report["counting"] = {
                "vertices": str(counting.vertices),
                "faces_per_vertex": counting.faces_per_vertex,
                "bound": str(counting.bound),
                "passed": counting.passed,
            }
        if with_lambda:
            report["lambda"] = cayley.cayley_graph_lambda(spec.k, spec.generators)
    except KeyError:
        raise click.ClickException("the counting check needs a complex built with r, b and n parameters")
    except HdxError as e:
        raise click.ClickException(str(e))
    except ValueError as e:
        raise click.BadParameter(str(e), param_hint="--from")
    if generators:
        Path(generators).write_text("".join(to_hex(v, spec.k) + "\n" for v in spec.generators))
    _emit(report, out)


@cli.command("codes")
@click.option("--from", "source", type=click.Path(exists=True), help="Rank-1 Grassmannian complex JSON.")
@_construction_options
@_run_options
@click.option("--bias", "with_bias", is_flag=True, help="Report the bias of the vertex multiset.")
@click.option("--distance-window", is_flag=True, help="Check codeword weights against the expansion window.")
@click.option("--cover", is_flag=True, help="Also check the universal cover.")
@click.option("--parity", type=click.Path(), help="Write H_X as parity-check text.")
@click.option("-o", "--out", type=click.Path(), help="Write the JSON report to this file.")
@click.pass_context
def codes_cmd(ctx, source, r, b, n, cap, seed, tol, threads, with_bias, distance_window, cover, parity, out):
    """The code pair (G_X, H_X): orthogonality, cover, bias and distance."""
    from . import codes
    from .poset_core import one_skeleton
    from .walks_spectral import graph_lambda

    config = _run_config(ctx, r=r, b=b, n=n, cap=cap, seed=seed, tol=tol, threads=threads, out=out)
    try:
        X = _load_complex(source, config)
        pair = codes.build_code_pair(X)
        image = pair.codewords_basis()
        rank_h, _, _ = codes.h_rank(pair)
        report = {
            "length": pair.n,
            "checks": pair.n_checks,
            "orthogonal": pair.orthogonal(),
            "rank_G": len(image),
            "rank_H": rank_h,
            "quotient_dim": pair.n - len(image) - rank_h,
            "kernel_is_image": pair.n - rank_h == len(image),
        }
        if with_bias:
            report["bias"] = codes.bias(pair.G, pair.k)
        if distance_window:
            lam = graph_lambda(one_skeleton(X)).value
            d = codes.expansion_to_distance_check(X, lam, config.tol)
            report["distance"] = {
                "status": d.status,
                "lambda": d.lam,
                "bias": d.bias,
                "bound": d.bound,
                "window": list(d.window),
                "weight_fractions": [d.min_fraction, d.max_fraction],
                "note": d.note,
            }
        if cover:
            X1 = codes.universal_cover(X)
            lift = codes.cover_lift(X)
            same = codes.generator_code(X1, [lift[v] for v in pair.G]) == tuple(codes.kernel_H(pair))
            report["cover"] = {"ambient_dim": X1.ambient_dim, "image_is_kernel": same}
            if distance_window:
                lam1 = graph_lambda(one_skeleton(X1)).value
                report["cover"]["distance_status"] = codes.expansion_to_distance_check(X1, lam1, config.tol).status
    except HdxError as e:
        raise click.ClickException(str(e))
    except ValueError as e:
        raise click.BadParameter(str(e), param_hint="--from")
    if parity:
        Path(parity).write_text(codes.parity_check_text(pair))
    _emit(report, out)


@cli.command("homology")
@click.option("--from", "source", type=click.Path(exists=True), help="Rank-1 Grassmannian complex JSON.")
@click.option("--random", "random_k", type=int, default=None, help="Use a seeded random toy complex in F2^k.")
@click.option("--seed", type=int, default=None, help="Seed for the random toy.")
@click.option("--quotient", "steps", type=int, default=0, help="Number of quotient steps to trace.")
@click.option("-o", "--out", type=click.Path(), help="Write the JSON report to this file.")
@click.pass_context
def homology_cmd(ctx, source, random_k, seed, steps, out):
    """H_1 of the Cayley complex modulo swap cycles against ker G_Xᵀ / im H_Xᵀ."""
    from . import homology

    config = _run_config(ctx, seed=seed, out=out)
    if not source and random_k is None:
        raise click.UsageError("give --from FILE or --random K")
    try:
        if source:
            with open(source) as f:
                X = complex_from_json(json.load(f))
        else:
            rng = np.random.default_rng(config.seed)
            X = homology.random_rank1_complex(rng, random_k, 14, 8)
        report = homology.homology_report(X, steps)
    except HdxError as e:
        raise click.ClickException(str(e))
    except ValueError as e:
        raise click.BadParameter(str(e), param_hint="--from")
    _emit(report, out)


@cli.command("verify")
@click.option(
    "--suite",
    type=click.Choice(("all",) + SUITES),
    default="all",
    help="Which suite to run.",
)
@click.option("--quick", is_flag=True, help="Only the sub-minute checks.")
@_run_options
@click.option("-o", "--out", type=click.Path(), help="Report directory (default: HDX_REPORT_DIR).")
@click.option("--db", "database_url", help="Store the run in this database (default: HDX_DATABASE_URL).")
@click.pass_context
def verify_cmd(ctx, suite, quick, cap, seed, tol, threads, out, database_url):
    """Run a verification suite and write report.json and report.txt."""
    from .models import get_session, init_db
    from .reports import run_verify, store_report, write_report

    config = _run_config(ctx, suite=suite, quick=quick, cap=cap, seed=seed, tol=tol, threads=threads, out=out)
    env = Config()
    out = config.out or env.report_dir
    click.echo(f"Running suite {config.suite}{' (quick)' if config.quick else ''}...")
    report = run_verify(config)
    json_path, text_path = write_report(report, out)
    click.echo(report.render_text(), nl=False)
    click.echo(f"Report: {json_path.resolve()}")

    database_url = database_url or env.database_url
    if database_url:
        engine = init_db(database_url)
        session = get_session(engine)
        try:
            run = store_report(session, report)
            click.echo(f"Stored run {run.id}")
        finally:
            session.close()
    ctx.exit(report.exit_code)


@cli.command("export")
@click.option("--what", type=click.Choice(EXPORTS), required=True, help="What to export.")
@click.option("--from", "source", type=click.Path(exists=True), help="Complex JSON (default: build X^{r,b,n}).")
@_construction_options
@click.option("--q", "q", type=int, default=None, help="Field size for rank-jsonl.")
@click.option("--m", "m", type=int, default=None, help="Matrix size for rank-jsonl.")
@_run_options
@click.option("-o", "--out", type=click.Path(), required=True, help="Output file.")
@click.pass_context
def export_cmd(ctx, what, source, r, b, n, q, m, cap, seed, tol, threads, out):
    """Export a complex, rank level, 1-skeleton or code."""
    from .reports import run_export

    config = _run_config(ctx, r=r, b=b, n=n, q=q, m=m, cap=cap, seed=seed, tol=tol, threads=threads, out=out)
    try:
        X = None
        if source and what != "rank-jsonl":
            X = _load_complex(source, config)
        path = run_export(config, what, out, X)
    except HdxError as e:
        raise click.ClickException(str(e))
    except ValueError as e:
        raise click.BadParameter(str(e), param_hint="--from")
    click.echo(f"Output: {path.resolve()}")


def main():
    cli()
