"""File formats and report rendering.

Truth tables and distributions are plain text; realizations and algorithms
are JSON. Loaders raise ``FormatError`` with the path and, where it applies,
the offending line.
"""

import csv
import io
import json
import logging
import math
from pathlib import Path
from typing import Any, Literal

import numpy as np
from pydantic import BaseModel

from .adversary import RealizationReport, VectorRealization, realization_check
from .boolfn import BooleanFunction
from .errors import FormatError, QQLabError
from .models import ExperimentReport
from .poly import InputDistribution
from .qsim import QueryAlgorithm
from .settings import settings

logger = logging.getLogger(__name__)

OutputFormat = Literal["json", "csv", "table"]


def _read_lines(path: str | Path) -> list[str]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise FormatError(f"cannot read {path}: {e.strerror}", path=str(path))
    return [line.strip() for line in text.splitlines() if line.strip()]


def _parse_header(line: str, path: str) -> int:
    key, _, value = line.partition("=")
    if key.strip() != "n" or not value.strip().isdigit():
        raise FormatError(f"expected 'n=<int>', got '{line}'", path=path, line=1)
    return int(value)


# === Truth tables ===


def parse_truth_table(text: str, name: str = None, path: str = None) -> BooleanFunction:
    """'n=<int>' then 2^n characters of 0/1, coordinate 1 least significant."""
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    if len(lines) != 2:
        raise FormatError(f"truth table needs 2 lines, got {len(lines)}", path=path)
    n = _parse_header(lines[0], path)
    bits = lines[1]
    if len(bits) != 2**n:
        raise FormatError(f"expected 2^{n} = {2**n} entries, got {len(bits)}", path=path, line=2)
    if set(bits) - {"0", "1"}:
        raise FormatError("truth table entries must be 0 or 1", path=path, line=2)
    return BooleanFunction(n=n, table=[int(c) for c in bits], name=name)


def load_truth_table(path: str | Path) -> BooleanFunction:
    path = Path(path)
    return parse_truth_table("\n".join(_read_lines(path)), name=path.stem, path=str(path))


def dump_truth_table(f: BooleanFunction) -> str:
    return f"n={f.n}\n" + "".join(str(int(b)) for b in f.table) + "\n"


# === Distributions ===


def load_distribution(path: str | Path) -> InputDistribution:
    """'n=<int>' then 2^n nonnegative weights, one per line; renormalized within 1e-6."""
    path = Path(path)
    lines = _read_lines(path)
    if not lines:
        raise FormatError("empty distribution file", path=str(path))
    n = _parse_header(lines[0], str(path))
    if len(lines) - 1 != 2**n:
        raise FormatError(f"expected 2^{n} weights, got {len(lines) - 1}", path=str(path))
    weights = []
    for lineno, line in enumerate(lines[1:], start=2):
        try:
            weights.append(float(line))
        except ValueError:
            raise FormatError(f"'{line}' is not a number", path=str(path), line=lineno)
    return InputDistribution.normalized(n, weights, name=path.stem)


# === Realizations ===


def realization_to_dict(w: VectorRealization) -> dict[str, Any]:
    vectors = {}
    for x in range(w.f.size):
        for i in range(1, w.n + 1):
            v = w.vectors[x, i - 1]
            if np.any(v):
                vectors[f"{x},{i}"] = [[float(z.real), float(z.imag)] for z in v]
    return {
        "n": w.n,
        "d": w.d,
        "function": {"name": w.f.name, "table": "".join(str(int(b)) for b in w.f.table)},
        "vectors": vectors,
        "notes": w.notes,
    }


def realization_from_dict(data: dict, path: str = None) -> VectorRealization:
    """Inverse of ``realization_to_dict``; missing "x,i" keys are zero vectors."""
    try:
        n, d = int(data["n"]), int(data["d"])
        entry = data["function"]
        f = parse_truth_table(f"n={n}\n{entry['table']}", name=entry.get("name"), path=path)
        vectors = np.zeros((2**n, n, d), dtype=np.complex128)
        for key, pairs in data.get("vectors", {}).items():
            x, i = (int(part) for part in key.split(","))
            if not (0 <= x < 2**n and 1 <= i <= n) or len(pairs) != d:
                raise FormatError(f"bad vector entry '{key}'", path=path)
            vectors[x, i - 1] = [complex(re, im) for re, im in pairs]
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(f"malformed realization: {e}", path=path)
    return VectorRealization(f=f, d=d, vectors=vectors, notes=list(data.get("notes", [])))


def load_realization(path: str | Path) -> tuple[VectorRealization, RealizationReport]:
    """Load a realization and run the feasibility check on it."""
    path = Path(path)
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise FormatError(f"cannot parse {path}: {e}", path=str(path))
    w = realization_from_dict(data, path=str(path))
    report = realization_check(w)
    if not report.feasible:
        logger.warning(f"{path}: realization infeasible on {report.violation_count} pairs")
    return w, report


def save_realization(w: VectorRealization, path: str | Path):
    Path(path).write_text(json.dumps(realization_to_dict(w), indent=2), encoding="utf-8")


# === Algorithms ===


def algorithm_to_dict(alg: QueryAlgorithm) -> dict[str, Any]:
    return {
        "n": alg.n,
        "m": alg.m,
        "d": alg.d,
        "oracle_kind": alg.oracle_kind,
        "name": alg.name,
        "unitaries": [{"real": u.real.tolist(), "imag": u.imag.tolist()} for u in alg.unitaries],
    }


def algorithm_from_dict(data: dict, path: str = None) -> QueryAlgorithm:
    """Rebuild an algorithm; unitarity is re-checked by the model."""
    try:
        unitaries = tuple(
            np.asarray(u["real"], dtype=float) + 1j * np.asarray(u["imag"], dtype=float)
            for u in data["unitaries"]
        )
        return QueryAlgorithm(
            n=int(data["n"]),
            m=int(data.get("m", 2)),
            d=int(data.get("d", 1)),
            oracle_kind=data.get("oracle_kind", "binary"),
            unitaries=unitaries,
            name=data.get("name"),
        )
    except QQLabError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(f"malformed algorithm: {e}", path=path)


def load_algorithm(path: str | Path) -> QueryAlgorithm:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise FormatError(f"cannot parse {path}: {e}", path=str(path))
    return algorithm_from_dict(data, path=str(path))


def save_algorithm(alg: QueryAlgorithm, path: str | Path):
    Path(path).write_text(json.dumps(algorithm_to_dict(alg)), encoding="utf-8")


# === Report rendering ===


def _round(value: float, digits: int) -> float:
    if not math.isfinite(value) or value == 0:
        return value
    return float(f"{value:.{digits}g}")


def jsonable(obj: Any, digits: int = None) -> Any:
    """Plain JSON types with floats rounded to ``digits`` significant digits."""
    digits = settings.output_digits if digits is None else digits
    if isinstance(obj, BaseModel):
        return jsonable(obj.model_dump(mode="python"), digits)
    if isinstance(obj, dict):
        return {str(k): jsonable(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        return [jsonable(v, digits) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist(), digits)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_round(float(obj.real), digits), _round(float(obj.imag), digits)]
    if isinstance(obj, (float, np.floating)):
        value = _round(float(obj), digits)
        return value if math.isfinite(value) else str(value)
    return obj


def _assertion_rows(report: ExperimentReport) -> list[list[Any]]:
    digits = settings.output_digits
    return [
        [a.name, "PASS" if a.passed else "FAIL", _round(a.measured, digits), a.sense,
         _round(a.bound, digits), _round(a.slack, digits)]
        for a in report.assertions
    ]


ASSERTION_HEADER = ["assertion", "status", "measured", "sense", "bound", "slack"]


def render_report(report: ExperimentReport, fmt: OutputFormat = "json") -> str:
    """JSON is canonical; CSV and table carry the assertion rows plus result rows."""
    if fmt == "json":
        return json.dumps(jsonable(report), indent=2, sort_keys=False)
    rows = _assertion_rows(report)
    if fmt == "csv":
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(ASSERTION_HEADER)
        writer.writerows(rows)
        result_rows = report.results.get("rows")
        if result_rows:
            keys = list(result_rows[0])
            writer.writerow([])
            writer.writerow(keys)
            writer.writerows([[jsonable(r.get(k)) for k in keys] for r in result_rows])
        return buffer.getvalue()

    table = [ASSERTION_HEADER] + [[str(c) for c in row] for row in rows]
    widths = [max(len(row[k]) for row in table) for k in range(len(ASSERTION_HEADER))]
    lines = [f"{report.command}: {'ok' if report.ok else 'FAILED'} ({report.elapsed_s:.3f}s)"]
    lines += ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)) for row in table]
    scalars = {k: v for k, v in report.results.items() if not isinstance(v, (list, dict))}
    lines += [f"{k} = {jsonable(v)}" for k, v in scalars.items()]
    lines += [f"note: {note}" for note in report.notes]
    return "\n".join(lines) + "\n"
