"""Tests for verification suites, reports and exports."""

import json
import math

import numpy as np
import pytest

from lowrank_hdx.config import RunConfig
from lowrank_hdx.errors import DimensionError, HdxError, SizeCapError
from lowrank_hdx.poset_core import WeightedGraph
from lowrank_hdx.reports import (
    CHECKS,
    SUITES,
    Check,
    Record,
    VerificationReport,
    check_rng,
    empty_complex,
    graph_to_dot,
    random_rank2_complex,
    run_check,
    run_export,
    run_verify,
    select_checks,
    SharedInputs,
    write_report,
)


@pytest.fixture(scope="module")
def perp_report():
    return run_verify(RunConfig(suite="perp"))


def _without_timing(report):
    obj = report.to_json()
    for rec in obj["records"]:
        rec.pop("wall_time")
    return obj


class TestSelection:
    """Tests for picking checks by suite."""

    def test_unknown_suite(self):
        """Test an unknown suite raises ValueError."""
        with pytest.raises(ValueError):
            select_checks("nope")

    def test_by_suite(self):
        """Test a suite selects only its own checks."""
        assert [c.check_id for c in select_checks("perp")] == ["perp"]
        assert {c.suite for c in select_checks("all")} == set(SUITES)

    def test_quick(self):
        """Test quick mode drops the long checks."""
        quick = select_checks("walks", quick=True)
        assert quick == []
        assert len(select_checks("all", quick=True)) < len(CHECKS)

    def test_check_ids_unique(self):
        """Test no two checks share an id."""
        ids = [c.check_id for c in CHECKS]
        assert len(ids) == len(set(ids))

    def test_check_rng(self):
        """Test each check draws from its own reproducible stream."""
        a = check_rng(0, "codes.toys").integers(0, 1 << 30, size=4)
        b = check_rng(0, "codes.toys").integers(0, 1 << 30, size=4)
        c = check_rng(0, "homology.random").integers(0, 1 << 30, size=4)
        assert a.tolist() == b.tolist()
        assert a.tolist() != c.tolist()


class TestRecords:
    """Tests for record and report serialisation."""

    def test_plain_values(self):
        """Test numpy scalars, big integers and infinities become JSON-safe."""
        rec = Record("x", "anchor", 0, measured=np.float64(0.5), bound=1 << 64)
        obj = rec.to_json()
        assert obj["measured"] == 0.5 and isinstance(obj["measured"], float)
        assert obj["bound"] == str(1 << 64)
        assert Record("y", "anchor", 0, measured=math.inf).to_json()["measured"] == "inf"

    def test_sorted_by_section(self):
        """Test records are ordered by suite section, then id."""
        report = VerificationReport(RunConfig())
        report.records = [Record("b", "", 2), Record("a", "", 2), Record("z", "", 0)]
        assert [r.check_id for r in report.sorted_records()] == ["z", "a", "b"]

    def test_exit_code(self):
        """Test any failure gives exit code 1 and deviations do not."""
        report = VerificationReport(RunConfig())
        report.records = [Record("a", "", 0, status="deviation"), Record("b", "", 0, status="skipped")]
        assert report.exit_code == 0
        report.records.append(Record("c", "", 0, status="fail"))
        assert report.exit_code == 1


class TestRunCheck:
    """Tests for how run_check records errors."""

    def test_cap_is_skipped(self):
        """Test a SizeCapError becomes a skipped record with the projected size."""

        def too_big(ctx, rng, check):
            raise SizeCapError("too many", projected=10**12, cap=10)

        records = run_check(Check("t.cap", "codes", "anchor", too_big), SharedInputs(RunConfig()))
        assert len(records) == 1
        assert records[0].status == "skipped"
        assert records[0].params["cap"] == 10
        assert records[0].note.startswith("skipped (cap)")

    def test_error_is_failed(self):
        """Test any other library error becomes a failed record."""

        def broken(ctx, rng, check):
            raise DimensionError("bad shape")

        records = run_check(Check("t.err", "codes", "anchor", broken), SharedInputs(RunConfig()))
        assert records[0].status == "fail"
        assert "DimensionError" in records[0].note

    def test_unexpected_error_is_failed(self):
        """Test an exception outside the library error tree is recorded as a failure."""

        def broken(ctx, rng, check):
            raise ZeroDivisionError("division by zero")

        records = run_check(Check("t.bug", "codes", "anchor", broken), SharedInputs(RunConfig()))
        assert len(records) == 1
        assert records[0].status == "fail"
        assert records[0].note == "ZeroDivisionError: division by zero"


class TestConstructionChecks:
    """Tests for the small-complex construction checks."""

    def _run(self, check_id):
        (check,) = [c for c in CHECKS if c.check_id == check_id]
        return run_check(check, SharedInputs(RunConfig()))

    def test_basisification(self):
        """Test basisification keeps λ on rank-1 toys and on rank-2 vertex links."""
        records = {r.check_id: r for r in self._run("construction.basisification")}
        assert set(records) == {"construction.basisification.rank1", "construction.basisification.rank2"}
        assert all(r.status == "pass" for r in records.values())
        assert records["construction.basisification.rank2"].params["ranks"] == [-1, 0]

    def test_link_quotient(self):
        """Test every link of the rank-2 toys is its quotient complex."""
        (record,) = self._run("construction.link-quotient")
        assert record.status == "pass", record.note
        assert record.measured == 0
        assert record.params["links"] > 65

    def test_random_rank2_complex(self):
        """Test random rank-2 toys are pure with the requested number of tops."""
        X = random_rank2_complex(np.random.default_rng(3), 5, 4)
        assert X.kind == "grassmannian"
        assert X.rank == 2
        assert 1 <= X.count(2) <= 4
        assert all(len(top) == 3 for top in X.faces_at(2))


class TestPerpSuite:
    """Tests for a full run of the perp suite."""

    def test_records(self, perp_report):
        """Test every identity passes and the bound is exceeded only off F2."""
        by_id = {r.check_id: r for r in perp_report.records}
        assert len(by_id) == 10
        assert all(by_id[f"perp.identity.q{q}m{m}"].status == "pass" for q, m in ((2, 2), (2, 3), (2, 4), (3, 3), (4, 3)))
        assert by_id["perp.lambda.q2m3"].status == "pass"
        assert by_id["perp.lambda.q3m3"].status == "deviation"
        assert by_id["perp.lambda.q4m3"].status == "deviation"
        assert perp_report.exit_code == 0

    def test_parallel_pair_note(self, perp_report):
        """Test the identity records say when the parallel-pair correction is needed."""
        by_id = {r.check_id: r for r in perp_report.records}
        assert by_id["perp.identity.q2m3"].note == ""
        assert "parallel" in by_id["perp.identity.q3m3"].note

    def test_deterministic(self, perp_report):
        """Test two runs with the same config give the same report apart from timing."""
        again = run_verify(RunConfig(suite="perp"))
        assert _without_timing(again) == _without_timing(perp_report)
        assert again.to_json()["config_hash"] == RunConfig(suite="perp").config_hash()

    def test_write_report(self, perp_report, tmp_path):
        """Test report.json and report.txt are written."""
        json_path, text_path = write_report(perp_report, tmp_path / "out")
        obj = json.loads(json_path.read_text())
        assert obj["summary"] == {"pass": 8, "fail": 0, "skipped": 0, "deviation": 2}
        text = text_path.read_text()
        assert "DEVIATION" in text
        assert "8 passed, 0 failed, 0 skipped, 2 deviations" in text

    def test_threads(self):
        """Test a threaded run gives the same records."""
        threaded = run_verify(RunConfig(suite="perp", threads=2))
        single = run_verify(RunConfig(suite="perp"))
        assert _without_timing(threaded)["records"] == _without_timing(single)["records"]


class TestExports:
    """Tests for exports and DOT rendering."""

    def test_graph_to_dot(self):
        """Test vertices and weighted edges in DOT."""
        G = WeightedGraph.from_edges(["a", "b", "c"], [("a", "b", 2), ("b", "c", 1)])
        dot = graph_to_dot(G, "g")
        assert dot.startswith("graph g {")
        assert 'n0 [label="a"];' in dot
        assert 'n0 -- n1 [weight="2"];' in dot
        assert 'n1 -- n2 [weight="1"];' in dot

    def test_graph_to_dot_hex_labels(self):
        """Test F2 vector labels are written in hex."""
        G = WeightedGraph.from_edges([(1,), (2,)], [((1,), (2,), 1)])
        assert 'label="01"' in graph_to_dot(G, "g", nbits=2)

    def test_empty_complex(self, tmp_path):
        """Test the empty complex exports to JSON and an empty generator list."""
        config = RunConfig()
        path = run_export(config, "complex-json", tmp_path / "empty.json", empty_complex())
        obj = json.loads(path.read_text())
        assert obj["ranks"] == {"-1": [[]]}
        assert obj["weights"] == "uniform"
        path = run_export(config, "generators-hex", tmp_path / "gens.txt", empty_complex())
        assert path.read_text() == ""

    def test_empty_complex_has_no_code(self, tmp_path):
        """Test the code export refuses a complex without vertices."""
        with pytest.raises(HdxError):
            run_export(RunConfig(), "code-json", tmp_path / "code.json", empty_complex())

    def test_rank_jsonl(self, tmp_path):
        """Test every matrix of M_2^2 is written once with its rank."""
        path = run_export(RunConfig(q=2, m=2), "rank-jsonl", tmp_path / "ranks.jsonl")
        lines = [json.loads(line) for line in path.read_text().splitlines()]
        assert [sum(1 for obj in lines if obj["rank"] == s) for s in range(3)] == [1, 9, 6]

    def test_triangle_exports(self, triangle, tmp_path):
        """Test the code and parity exports of a triangle."""
        path = run_export(RunConfig(), "parity-text", tmp_path / "h.txt", triangle)
        assert path.read_text() == "0 1 2\n"
        path = run_export(RunConfig(), "skeleton-csv", tmp_path / "g.csv", triangle)
        assert path.read_text().splitlines()[0] == "source,target,mass"

    def test_unknown_export(self, tmp_path):
        """Test an unknown export raises ValueError."""
        with pytest.raises(ValueError):
            run_export(RunConfig(), "pdf", tmp_path / "x")
