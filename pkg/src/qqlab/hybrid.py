"""The hybrid method as executable progress traces.

For two inputs x, y the distance ||psi_x^t - psi_y^t|| starts at 0, grows by at
most twice the query weight on the indices where x and y differ, and must reach
1/3 when the algorithm separates f(x) from f(y).
"""

import logging
import math
import time
from collections.abc import Sequence

import numpy as np
from pydantic import BaseModel, Field

from .boolfn import BooleanFunction, bits_to_index, block_sensitivity, make_named
from .errors import InvariantViolation, NotApplicableError, ValidationError
from .models import Assertion, ExperimentReport, all_passed
from .qsim import (
    QueryAlgorithm,
    apply_oracle,
    evolve,
    grover,
    query_weights,
    register_probabilities,
    run,
    success_probability,
)
from .settings import settings

logger = logging.getLogger(__name__)

# Delta_0 must vanish up to rounding
INITIAL_TOL = 1e-12


class HybridTrace(BaseModel):
    """Distances and cross terms of one input pair."""

    x: tuple[int, ...]
    y: tuple[int, ...]
    distances: list[float]
    cross_terms: list[float] = Field(description="c_t = min_z ||(sum_{x_i != y_i}|i><i| (x) I) psi_z^t||")
    assertions: list[Assertion] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all_passed(self.assertions)


class QueryWeightCertificate(BaseModel):
    """Query-weight sum on the differing indices of a pair."""

    value: float
    average_witness_probability: float
    assertions: list[Assertion]


def _differing(x: Sequence[int], y: Sequence[int]) -> np.ndarray:
    return np.flatnonzero(np.asarray(x) != np.asarray(y))


def _weight_on(states: np.ndarray, alg: QueryAlgorithm, indices: np.ndarray) -> np.ndarray:
    """sqrt of the index-register mass on ``indices``, per column."""
    probs = register_probabilities(states, alg.n, alg.m, alg.d, "index")
    return np.sqrt(probs[indices].sum(axis=0))


def hybrid_trace(
    alg: QueryAlgorithm,
    x: Sequence[int],
    y: Sequence[int],
    f: BooleanFunction = None,
    strict: bool = False,
) -> HybridTrace:
    """Progress trace for the pair (x, y).

    Args:
        alg: algorithm in canonical form
        x, y: distinct inputs
        f: when given and f(x) != f(y) with both runs succeeding with
            probability >= 2/3, the final condition is asserted as well
        strict: raise InvariantViolation when a proven inequality fails

    Raises:
        ValidationError: x == y
    """
    if tuple(x) == tuple(y):
        raise ValidationError("hybrid trace needs two distinct inputs", field="y")
    tol = settings.identity_tol
    histories = evolve(alg, np.array([x, y]))
    diff = _differing(x, y)
    distances = [float(np.linalg.norm(s[:, 0] - s[:, 1])) for s in histories]
    cross = [float(_weight_on(s, alg, diff).min()) for s in histories]

    assertions = [Assertion.at_most("initial distance", distances[0], 0.0, INITIAL_TOL)]
    for t in range(alg.T):
        assertions.append(
            Assertion.at_most(
                f"progress step {t}->{t + 1}", distances[t + 1], distances[t] + 2 * cross[t], tol
            )
        )

    if f is not None and f(list(x)) != f(list(y)):
        finals = np.abs(histories[-1].reshape(alg.n, alg.m, alg.d, 2)) ** 2
        value = finals.sum(axis=(0, 2))
        p_x = value[f(list(x)), 0]
        p_y = value[f(list(y)), 1]
        if min(p_x, p_y) >= 2 / 3 - tol:
            assertions.append(Assertion.at_least("final distance", distances[-1], 1 / 3, tol))

    trace = HybridTrace(
        x=tuple(x), y=tuple(y), distances=distances, cross_terms=cross, assertions=assertions
    )
    if strict and not trace.ok:
        failed = [a.name for a in assertions if not a.passed]
        raise InvariantViolation(f"hybrid inequalities failed: {failed}", x=x, y=y)
    return trace


def hybrid_of_hybrids_check(alg: QueryAlgorithm, x: Sequence[int], y: Sequence[int]) -> list[Assertion]:
    """||(O_x - O_y) psi_x^t|| <= 2 ||(sum_{x_i != y_i}|i><i| (x) I) psi_x^t|| for t < T.

    The left side is the error introduced by switching the oracle from x to y
    at query t+1.
    """
    trace = run(alg, x)
    diff = _differing(x, y)
    rows = []
    for t, state in enumerate(trace.states[:-1]):
        gap = apply_oracle(state, x, alg.oracle_kind, alg.n, alg.m, alg.d) - apply_oracle(
            state, y, alg.oracle_kind, alg.n, alg.m, alg.d
        )
        weight = _weight_on(state[:, None], alg, diff)[0]
        rows.append(
            Assertion.at_most(
                f"oracle switch {t}", float(np.linalg.norm(gap)), 2 * weight, settings.identity_tol
            )
        )
    return rows


def _require_computes(alg: QueryAlgorithm, f: BooleanFunction, what: str):
    report = success_probability(alg, f)
    if not report.computes:
        raise NotApplicableError(
            f"algorithm does not compute {what}: worst success {report.worst:.6g} < 2/3",
            worst=report.worst,
        )
    return report


def query_weight_average(alg: QueryAlgorithm, x: Sequence[int], y: Sequence[int]) -> float:
    """(1/T) sum_{t<T} sum_{x_i != y_i} qw_t(i) on psi_x; 0 for T = 0."""
    if alg.T == 0:
        return 0.0
    trace = run(alg, x)
    diff = _differing(x, y)
    return float(np.mean([_weight_on(s[:, None], alg, diff)[0] ** 2 for s in trace.states[:-1]]))


def query_weight_certificate(
    alg: QueryAlgorithm, f: BooleanFunction, x: Sequence[int], y: Sequence[int]
) -> QueryWeightCertificate:
    """sum_{t<T} sqrt(sum_{x_i != y_i} qw_t(i)) on psi_x, asserted >= 1/6.

    Raises:
        NotApplicableError: f(x) == f(y), or the algorithm does not compute f
    """
    if f(list(x)) == f(list(y)):
        raise NotApplicableError("certificate needs f(x) != f(y)", x=list(x), y=list(y))
    _require_computes(alg, f, f.name or "f")
    trace = run(alg, x)
    diff = _differing(x, y)
    weights = [float(_weight_on(s[:, None], alg, diff)[0]) for s in trace.states[:-1]]
    value = float(sum(weights))
    average = query_weight_average(alg, x, y)
    assertions = [Assertion.at_least("query weight sum", value, 1 / 6, settings.identity_tol)]
    if alg.T:
        assertions.append(
            Assertion.at_least(
                "average witness probability", average, 1 / (36 * alg.T**2), settings.identity_tol
            )
        )
    return QueryWeightCertificate(
        value=value, average_witness_probability=average, assertions=assertions
    )


def _aggregate_progress(
    alg: QueryAlgorithm, x: Sequence[int], neighbours: list[Sequence[int]]
) -> tuple[list[float], list[float]]:
    """Sum over neighbours of ||psi_x^t - psi_y^t|| and of the weight bound on psi_x."""
    histories = evolve(alg, np.array([x, *neighbours]))
    progress, weight_terms = [], []
    for states in histories:
        progress.append(float(np.linalg.norm(states[:, 1:] - states[:, :1], axis=0).sum()))
        terms = [
            float(_weight_on(states[:, :1], alg, _differing(x, y))[0]) for y in neighbours
        ]
        weight_terms.append(float(sum(terms)))
    return progress, weight_terms


def _progress_report(
    command: str,
    alg: QueryAlgorithm,
    f: BooleanFunction,
    x: Sequence[int],
    neighbours: list[Sequence[int]],
    s: int,
    parameters: dict,
) -> ExperimentReport:
    started = time.perf_counter()
    tol = settings.identity_tol
    report = ExperimentReport(
        command=command, parameters=parameters, tolerances=settings.tolerances()
    )
    success = success_probability(alg, f)
    progress, weight_terms = _aggregate_progress(alg, x, neighbours)

    report.assertions.append(Assertion.at_most("initial progress", progress[0], 0.0, INITIAL_TOL))
    for t in range(alg.T):
        increase = progress[t + 1] - progress[t]
        report.assertions.append(
            Assertion.at_most(f"step {t}->{t + 1} increase", increase, 2 * weight_terms[t], tol)
        )
        report.assertions.append(
            Assertion.at_most(f"step {t}->{t + 1} increase (sqrt bound)", increase, 2 * math.sqrt(s), tol)
        )
    report.assertions.append(Assertion.at_least("final progress", progress[-1], s / 3, tol))
    implied = math.sqrt(s) / 6
    report.assertions.append(Assertion.at_least("query count vs implied bound", alg.T, implied))

    if not success.computes:
        report.notes.append(
            f"algorithm does not compute {f.name or 'f'}: worst success {success.worst:.6g} < 2/3"
        )
    report.results = {
        "s": s,
        "witness": list(x),
        "T": alg.T,
        "worst_success": success.worst,
        "progress": progress,
        "implied_lower_bound": implied,
    }
    report.elapsed_s = time.perf_counter() - started
    logger.info(f"{command}: T={alg.T}, final progress {progress[-1]:.6g}, bound {implied:.6g}")
    return report


def or_hybrid_report(alg: QueryAlgorithm, n: int) -> ExperimentReport:
    """Aggregated hybrid progress over the pairs (0^n, e_i); implies T >= sqrt(n)/6."""
    if alg.n != n:
        raise ValidationError(f"algorithm has n={alg.n}, expected {n}", field="n")
    f = make_named("OR", n=n)
    zero = [0] * n
    neighbours = [[1 if j == i else 0 for j in range(n)] for i in range(n)]
    return _progress_report(
        "hybrid or", alg, f, zero, neighbours, n, {"n": n, "algorithm": alg.name}
    )


def grover_weight_growth(n: int) -> list[Assertion]:
    """Weight of the marked index when query t is made, within a factor 3 of t^2/n.

    Checked for every single-marked input e_i and 1 <= t <= sqrt(n)/2.
    """
    steps = math.floor(math.sqrt(n) / 2)
    if steps < 1:
        raise ValidationError(f"need n >= 4 for a query-weight trace, got n={n}", field="n")
    alg = grover(n, steps)
    tol = settings.identity_tol
    rows = []
    for i in range(1, n + 1):
        states = run(alg, [int(j == i) for j in range(1, n + 1)]).states
        for t in range(1, steps + 1):
            weight = float(query_weights(states[t - 1], n)[i - 1])
            target = t * t / n
            name = f"Grover query weight t={t} (e_{i})"
            rows.append(Assertion.at_least(name, weight, target / 3, tol))
            rows.append(Assertion.at_most(name, weight, 3 * target, tol))
    return rows


def bs_hybrid_report(alg: QueryAlgorithm, f: BooleanFunction) -> ExperimentReport:
    """Hybrid progress over a block-sensitivity witness; implies T >= sqrt(bs(f))/6."""
    if alg.n != f.n:
        raise ValidationError(f"algorithm has n={alg.n}, f has n={f.n}", field="f")
    bs = block_sensitivity(f)
    parameters = {"f": f.name, "n": f.n, "algorithm": alg.name}
    if bs.s == 0:
        return ExperimentReport(
            command="hybrid bs",
            parameters=parameters,
            results={"s": 0, "implied_lower_bound": 0.0, "T": alg.T},
            tolerances=settings.tolerances(),
            notes=["f is constant: block sensitivity 0, bound vacuous"],
        )
    x = list(bs.witness)
    neighbours = []
    for block in bs.blocks:
        y = list(x)
        for i in block:
            y[i - 1] ^= 1
        neighbours.append(y)
    report = _progress_report("hybrid bs", alg, f, x, neighbours, bs.s, parameters)
    report.results["blocks"] = bs.blocks
    report.results["witness_index"] = bits_to_index(x)
    return report
