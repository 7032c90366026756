"""Tests for truth-table, distribution, realization and algorithm files and report rendering."""

import json

import numpy as np
import pytest

from qqlab.adversary import or_realization, realization_check
from qqlab.boolfn import make_named
from qqlab.errors import FormatError, NotUnitaryError
from qqlab.formats import (
    dump_truth_table,
    jsonable,
    load_algorithm,
    load_distribution,
    load_realization,
    load_truth_table,
    parse_truth_table,
    realization_from_dict,
    render_report,
    save_algorithm,
    save_realization,
)
from qqlab.models import Assertion, ExperimentReport
from qqlab.qsim import deutsch_parity, run


# === Fixtures ===
@pytest.fixture
def sample_report():
    """Small report with one passing and one failing row."""
    return ExperimentReport(
        command="fn info",
        parameters={"n": 2},
        assertions=[
            Assertion.at_most("first", 0.5, 1.0),
            Assertion.at_least("second", 0.1, 2 / 3),
        ],
        results={"value": np.float64(1 / 3), "rows": [{"x": 0, "p": 0.25}, {"x": 1, "p": 0.75}]},
        notes=["just a note"],
    )


class TestTruthTables:
    """Tests for the n=<int> text format."""

    def test_parse(self):
        f = parse_truth_table("n=2\n0111\n", name="or")
        assert f == make_named("OR", n=2)

    def test_dump_then_load(self, tmp_path):
        path = tmp_path / "maj.tt"
        path.write_text(dump_truth_table(make_named("MAJ", n=3)))
        f = load_truth_table(path)
        assert f == make_named("MAJ", n=3)
        assert f.name == "maj"

    def test_blank_lines_ignored(self, tmp_path):
        path = tmp_path / "and.tt"
        path.write_text("\n n=1 \n\n 01 \n")
        assert load_truth_table(path).table.tolist() == [0, 1]

    @pytest.mark.parametrize(
        "text,line",
        [
            ("m=2\n0111", 1),
            ("n=two\n0111", 1),
            ("n=2\n011", 2),
            ("n=2\n01a1", 2),
        ],
    )
    def test_rejects_malformed(self, text, line):
        with pytest.raises(FormatError) as exc_info:
            parse_truth_table(text, path="bad.tt")
        assert exc_info.value.details["line"] == line
        assert exc_info.value.details["path"] == "bad.tt"

    def test_missing_file(self, tmp_path):
        with pytest.raises(FormatError, match="cannot read"):
            load_truth_table(tmp_path / "missing.tt")


class TestDistributions:
    """Tests for weight files."""

    def test_load_and_renormalize(self, tmp_path):
        path = tmp_path / "d.txt"
        path.write_text("n=1\n0.25\n0.7500001\n")
        dist = load_distribution(path)
        assert dist.n == 1
        assert dist.weights.sum() == pytest.approx(1.0, abs=1e-15)

    def test_rejects_bad_weight(self, tmp_path):
        path = tmp_path / "d.txt"
        path.write_text("n=1\n0.5\nhalf\n")
        with pytest.raises(FormatError) as exc_info:
            load_distribution(path)
        assert exc_info.value.details["line"] == 3

    def test_rejects_count(self, tmp_path):
        path = tmp_path / "d.txt"
        path.write_text("n=2\n0.5\n0.5\n")
        with pytest.raises(FormatError, match="weights"):
            load_distribution(path)


class TestRealizationFiles:
    """Tests for realization JSON."""

    def test_save_and_load(self, tmp_path):
        path = tmp_path / "or3.json"
        save_realization(or_realization(3), path)
        w, report = load_realization(path)
        assert report.feasible
        assert report.T0 == pytest.approx(3.0)
        assert np.allclose(w.vectors, or_realization(3).vectors)

    def test_sparse_keys(self):
        data = {
            "n": 2,
            "d": 1,
            "function": {"name": "dictator", "table": "0101"},
            "vectors": {"0,1": [[1.0, 0.0]], "1,1": [[1.0, 0.0]], "2,1": [[1.0, 0.0]], "3,1": [[1.0, 0.0]]},
        }
        w = realization_from_dict(data)
        assert np.all(w.vectors[:, 1] == 0)
        assert realization_check(w).feasible

    def test_bad_key(self):
        data = {"n": 1, "d": 1, "function": {"table": "01"}, "vectors": {"2,1": [[1.0, 0.0]]}}
        with pytest.raises(FormatError, match="bad vector entry"):
            realization_from_dict(data)

    def test_missing_field(self):
        with pytest.raises(FormatError, match="malformed realization"):
            realization_from_dict({"n": 1})

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(FormatError):
            load_realization(path)


class TestAlgorithmFiles:
    """Tests for algorithm JSON."""

    def test_save_and_load(self, tmp_path):
        path = tmp_path / "deutsch.json"
        alg = deutsch_parity()
        save_algorithm(alg, path)
        loaded = load_algorithm(path)
        assert (loaded.n, loaded.m, loaded.d, loaded.oracle_kind) == (alg.n, alg.m, alg.d, alg.oracle_kind)
        for x in range(4):
            bits = [x & 1, x >> 1 & 1]
            assert np.allclose(run(loaded, bits).final, run(alg, bits).final)

    def test_non_unitary_rejected(self, tmp_path):
        path = tmp_path / "bad.json"
        data = {
            "n": 1,
            "unitaries": [{"real": [[2, 0], [0, 1]], "imag": [[0, 0], [0, 0]]}],
        }
        path.write_text(json.dumps(data))
        with pytest.raises(NotUnitaryError):
            load_algorithm(path)


class TestRendering:
    """Tests for JSON, CSV and table output."""

    def test_jsonable(self):
        out = jsonable({"z": 1 + 2j, "a": np.arange(3), "b": np.bool_(True), "f": np.float32(0.5)})
        assert out == {"z": [1.0, 2.0], "a": [0, 1, 2], "b": True, "f": 0.5}

    def test_jsonable_rounds(self):
        assert jsonable(1 / 3, digits=3) == 0.333
        assert jsonable(float("inf")) == "inf"

    def test_json(self, sample_report):
        data = json.loads(render_report(sample_report, "json"))
        assert data["ok"] is False
        assert data["command"] == "fn info"
        assert [a["name"] for a in data["assertions"]] == ["first", "second"]

    def test_csv(self, sample_report):
        lines = render_report(sample_report, "csv").splitlines()
        assert lines[0] == "assertion,status,measured,sense,bound,slack"
        assert lines[1].startswith("first,PASS")
        assert lines[2].startswith("second,FAIL")
        assert "x,p" in lines

    def test_table(self, sample_report):
        text = render_report(sample_report, "table")
        assert text.startswith("fn info: FAILED")
        assert "note: just a note" in text
        assert "value = 0.333" in text
