"""Tests for the hdx command line."""

import json

import pytest
from click.testing import CliRunner

from lowrank_hdx import cli
from lowrank_hdx.poset_core import complex_to_json, simplicial_closure


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def triangle_file(tmp_path, triangle):
    path = tmp_path / "triangle.json"
    path.write_text(json.dumps(complex_to_json(triangle)))
    return path


@pytest.fixture
def fano_file(tmp_path, fano):
    path = tmp_path / "fano.json"
    path.write_text(json.dumps(complex_to_json(fano)))
    return path


class TestVerify:
    """Tests for the verify command."""

    def test_perp_suite(self, runner, tmp_path):
        """Test the perp suite passes and writes both report files."""
        out = tmp_path / "reports"
        result = runner.invoke(cli, ["verify", "--suite", "perp", "-o", str(out)])
        assert result.exit_code == 0, result.output
        assert (out / "report.json").exists()
        assert (out / "report.txt").exists()
        assert "Running suite perp" in result.output
        assert "Report:" in result.output
        summary = json.loads((out / "report.json").read_text())["summary"]
        assert summary["fail"] == 0

    def test_unknown_suite(self, runner, tmp_path):
        """Test an unknown suite is a usage error."""
        result = runner.invoke(cli, ["verify", "--suite", "nope", "-o", str(tmp_path)])
        assert result.exit_code == 2

    def test_store_in_database(self, runner, tmp_path):
        """Test --db stores the run in the ledger."""
        db = tmp_path / "runs.db"
        result = runner.invoke(
            cli, ["verify", "--suite", "perp", "-o", str(tmp_path / "r"), "--db", f"sqlite:///{db}"]
        )
        assert result.exit_code == 0, result.output
        assert "Stored run 1" in result.output
        assert db.exists()

    def test_invalid_environment(self, runner, tmp_path):
        """Test a malformed environment variable is a usage error."""
        result = runner.invoke(cli, ["verify", "--suite", "perp", "-o", str(tmp_path)], env={"HDX_SEED": "x"})
        assert result.exit_code == 2
        assert "HDX_SEED" in result.output

    def test_invalid_tolerance(self, runner, tmp_path):
        """Test a tolerance outside (0, 1e-3] is a usage error."""
        result = runner.invoke(cli, ["verify", "--suite", "perp", "--tol", "0.5", "-o", str(tmp_path)])
        assert result.exit_code == 2


class TestWalks:
    """Tests for the walks command."""

    def test_perp(self, runner):
        """Test the perp walk reports the identity and its closed form."""
        result = runner.invoke(cli, ["walks", "--kind", "perp", "--q", "2", "--m", "3"])
        assert result.exit_code == 0, result.output
        obj = json.loads(result.output)
        assert obj["identity"] is True
        assert obj["lambda"] == pytest.approx(obj["lambda_closed_form"])

    def test_matrix_walk_needs_power_of_two(self, runner):
        """Test a matrix walk over q = 3 is refused."""
        result = runner.invoke(cli, ["walks", "--kind", "mat1ud", "--q", "3", "--m", "2"])
        assert result.exit_code == 2
        assert "power of two" in result.output

    def test_downup_with_triplets(self, runner, tmp_path):
        """Test the down-up walk prints a CSV row and writes its triplets."""
        path = tmp_path / "walk.json"
        result = runner.invoke(
            cli, ["walks", "--kind", "downup", "--q", "2", "--m", "2", "--s", "1", "--triplets", str(path)]
        )
        assert result.exit_code == 0, result.output
        assert "Triplets:" in result.output
        assert json.loads(path.read_text())["n"] == 9


class TestComplexCommands:
    """Tests for commands that read a complex from JSON."""

    def test_codes(self, runner, triangle_file, tmp_path):
        """Test the code pair of a triangle and its parity-check export."""
        parity = tmp_path / "h.txt"
        result = runner.invoke(cli, ["codes", "--from", str(triangle_file), "--parity", str(parity)])
        assert result.exit_code == 0, result.output
        obj = json.loads(result.output)
        assert obj["orthogonal"] is True
        assert obj["quotient_dim"] == 0
        assert obj["kernel_is_image"] is True
        assert parity.read_text() == "0 1 2\n"

    def test_codes_with_cover(self, runner, fano_file):
        """Test the cover of the Fano complex keeps the code."""
        result = runner.invoke(cli, ["codes", "--from", str(fano_file), "--cover", "--bias"])
        assert result.exit_code == 0, result.output
        obj = json.loads(result.output)
        assert obj["cover"]["image_is_kernel"] is True
        assert obj["bias"] == pytest.approx(1 / 7)

    def test_cayley(self, runner, fano_file):
        """Test symmetry and λ of Cay(F2^3, β(Fano))."""
        result = runner.invoke(cli, ["cayley", "--from", str(fano_file), "--check", "symmetry", "--lambda"])
        assert result.exit_code == 0, result.output
        obj = json.loads(result.output)
        assert obj["symmetry"]["passed"] is True
        assert obj["lambda"] == pytest.approx(1 / 7)

    def test_cayley_unknown_check(self, runner, fano_file):
        """Test an unknown Cayley check is refused."""
        result = runner.invoke(cli, ["cayley", "--from", str(fano_file), "--check", "bogus"])
        assert result.exit_code == 2

    def test_expansion(self, runner, fano_file):
        """Test the Fano 1-skeleton is K7."""
        result = runner.invoke(cli, ["expansion", "--from", str(fano_file)])
        assert result.exit_code == 0, result.output
        obj = json.loads(result.output)
        assert obj["lambda"] == pytest.approx(1 / 6)
        assert obj["disconnected_links"] == 0

    def test_homology_needs_input(self, runner):
        """Test homology without --from or --random is a usage error."""
        result = runner.invoke(cli, ["homology"])
        assert result.exit_code == 2

    def test_homology_triangle(self, runner, triangle_file):
        """Test H1 modulo swaps of the triangle's Cayley complex."""
        result = runner.invoke(cli, ["homology", "--from", str(triangle_file)])
        assert result.exit_code == 0, result.output
        assert json.loads(result.output)["passed"] is True

    def test_export(self, runner, triangle_file, tmp_path):
        """Test exporting generators of a complex read from JSON."""
        out = tmp_path / "gens.txt"
        result = runner.invoke(cli, ["export", "--what", "generators-hex", "--from", str(triangle_file), "-o", str(out)])
        assert result.exit_code == 0, result.output
        assert out.read_text().split() == ["01", "02", "03"]

    @pytest.mark.parametrize("command", ["codes", "cayley", "homology"])
    def test_simplicial_input_is_refused(self, runner, tmp_path, command):
        """Test a simplicial complex passed where a Grassmannian one is needed is a usage error."""
        path = tmp_path / "simplex.json"
        path.write_text(json.dumps(complex_to_json(simplicial_closure([(0, 1, 2)]))))
        result = runner.invoke(cli, [command, "--from", str(path)])
        assert result.exit_code == 2, result.output
        assert "--from" in result.output
        assert "Traceback" not in result.output
