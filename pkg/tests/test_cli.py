"""End-to-end tests for the qqlab command line."""

import json

import numpy as np
import pytest
from typer.testing import CliRunner

from qqlab import __version__
from qqlab.adversary import VectorRealization, or_realization
from qqlab.boolfn import BooleanFunction
from qqlab.cli import app
from qqlab.formats import save_algorithm, save_realization
from qqlab.qsim import deutsch_parity

pytestmark = pytest.mark.integration


# === Fixtures ===
@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def invoke(runner, tmp_path):
    """Run a command with --out and return (exit code, parsed JSON report or None)."""

    def _invoke(*args: str):
        out = tmp_path / "report.json"
        if out.exists():
            out.unlink()
        result = runner.invoke(app, [*args, "--out", str(out)])
        report = json.loads(out.read_text()) if out.exists() else None
        return result.exit_code, report

    return _invoke


class TestFunctions:
    """fn commands."""

    def test_info(self, invoke):
        code, report = invoke("fn", "info", "--fn", "or", "--n", "3")
        assert code == 0
        assert report["results"]["table"] == "01111111"
        assert report["results"]["D"] == 3

    def test_table_file(self, invoke, tmp_path):
        path = tmp_path / "xor.tt"
        path.write_text("n=2\n0110\n")
        code, report = invoke("fn", "degree", "--table", str(path))
        assert code == 0
        assert report["results"]["degree"] == 2

    def test_bs(self, invoke):
        code, report = invoke("fn", "bs", "--fn", "parity", "--n", "4")
        assert code == 0
        assert report["results"]["s"] == 4

    def test_unknown_function(self, invoke):
        code, report = invoke("fn", "info", "--fn", "nonsense", "--n", "3")
        assert code == 2
        assert report is None

    def test_missing_function(self, invoke):
        code, _ = invoke("fn", "info")
        assert code == 2


class TestSimulation:
    """sim and hybrid commands."""

    def test_deutsch(self, invoke):
        code, report = invoke("sim", "deutsch")
        assert code == 0
        assert report["results"]["worst_success"] == pytest.approx(1.0)

    def test_saved_algorithm(self, invoke, tmp_path):
        path = tmp_path / "deutsch.json"
        save_algorithm(deutsch_parity(), path)
        code, report = invoke("sim", "run", "--alg", str(path), "--fn", "parity")
        assert code == 0
        assert report["ok"]

    def test_hybrid_or(self, invoke):
        code, report = invoke("hybrid", "or", "--n", "4")
        assert code == 0
        assert report["results"]["implied_lower_bound"] == pytest.approx(1 / 3)

    def test_bad_bits(self, invoke):
        code, _ = invoke("hybrid", "trace", "--x", "01", "--y", "0a")
        assert code == 2


class TestBounds:
    """poly, record and adv commands."""

    def test_adeg(self, invoke):
        code, report = invoke("poly", "adeg", "--fn", "parity", "--n", "3")
        assert code == 0
        assert report["results"]["adeg"] == 3

    def test_record_check(self, invoke):
        code, report = invoke("record", "check", "--n", "2", "--m", "2")
        assert code == 0
        assert report["results"]["max_deviation"] <= 1e-10

    def test_record_search_solver(self, invoke):
        code, report = invoke("record", "search", "--n", "2", "--m", "3", "--solver")
        assert code == 0
        assert report["parameters"]["algorithm"].startswith("search(")

    def test_adv_or(self, invoke):
        code, report = invoke("adv", "or", "--n", "9")
        assert code == 0
        assert report["results"]["value"] == pytest.approx(3.0)

    def test_realize_and_save(self, invoke, tmp_path):
        saved = tmp_path / "or4.json"
        code, report = invoke("adv", "realize", "--fn", "or", "--n", "4", "--save", str(saved))
        assert code == 0
        assert saved.exists()
        assert report["results"]["T0"] == pytest.approx(4.0)

    def test_infeasible_realization_fails(self, invoke, tmp_path):
        w = or_realization(2)
        broken = w.model_copy(update={"vectors": 0.5 * w.vectors})
        path = tmp_path / "broken.json"
        save_realization(broken, path)
        code, report = invoke("sdp", "feas", "--realization", str(path))
        assert code == 1
        assert not report["ok"]


class TestDual:
    """dual commands."""

    def test_run(self, invoke):
        code, report = invoke("dual", "run", "--fn", "or", "--n", "2")
        assert code == 0
        assert len(report["results"]["rows"]) == 4
        assert report["results"]["queries"] == 510

    def test_single_input(self, invoke):
        code, report = invoke("dual", "phasegap", "--fn", "or", "--n", "2", "--x", "0")
        assert code == 0
        assert len(report["results"]["rows"]) == 1

    @pytest.mark.parametrize("value", [0, 1])
    def test_constant_realization_is_a_usage_error(self, runner, tmp_path, value):
        path = tmp_path / "const.json"
        constant = BooleanFunction(n=2, table=[value] * 4)
        save_realization(VectorRealization(f=constant, d=1, vectors=np.zeros((4, 2, 1))), path)
        result = runner.invoke(app, ["dual", "run", "--realization", str(path)])
        assert result.exit_code == 2
        assert result.exception is None or isinstance(result.exception, SystemExit)

    def test_input_out_of_range(self, invoke):
        code, _ = invoke("dual", "run", "--fn", "or", "--n", "2", "--x", "7")
        assert code == 2


class TestOutput:
    """Formats and global options."""

    def test_version(self, runner):
        result = runner.invoke(app, ["--version"])
        assert result.exit_code == 0
        assert __version__ in result.stdout

    def test_csv(self, runner, tmp_path):
        out = tmp_path / "report.csv"
        result = runner.invoke(app, ["adv", "or", "--n", "4", "--format", "csv", "--out", str(out)])
        assert result.exit_code == 0
        assert out.read_text().splitlines()[0] == "assertion,status,measured,sense,bound,slack"

    def test_table(self, runner, tmp_path):
        out = tmp_path / "report.txt"
        result = runner.invoke(app, ["sim", "deutsch", "--format", "table", "--out", str(out)])
        assert result.exit_code == 0
        assert out.read_text().startswith("sim deutsch: ok")
