"""Compressed-oracle simulation over the alphabet {0..m-1}.

The record space has one cell per index; a cell holds a symbol 0..m-1 or the
empty symbol, stored as m. Record index r = sum_j c_j (m+1)^(j-1) with cell 1
least significant, mirroring the input order of ``boolfn``. Joint states are
(dim, (m+1)^n) arrays: algorithm register first, record second.
"""

import itertools
import logging
import math
import time
from collections.abc import Callable, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .boolfn import make_named
from .errors import CapExceededError, InvariantViolation, ValidationError
from .linalg import unitary_deviation
from .models import Assertion, ExperimentReport, all_passed
from .qsim import QueryAlgorithm, as_phase_algorithm, average_success, evolve
from .settings import settings

logger = logging.getLogger(__name__)

EMPTY = None
# amplitudes of records larger than the query count must vanish to this level
RECORD_SIZE_TOL = 1e-12


# === Record space ===


def _check_cap(n: int, m: int, d: int = 1):
    amplitudes = n * m * d * (m + 1) ** n
    if amplitudes > settings.record_max_amplitudes:
        raise CapExceededError("n*m*d*(m+1)^n", amplitudes, settings.record_max_amplitudes)


def record_cells(n: int, m: int) -> np.ndarray:
    """Cell contents of every record index, shape ((m+1)^n, n); m stands for empty."""
    r = np.arange((m + 1) ** n)
    return (r[:, None] // (m + 1) ** np.arange(n)) % (m + 1)


def record_index(record: Sequence[int | None], m: int) -> int:
    """Index of a record given as symbols with None for empty cells (cell 1 first)."""
    index = 0
    for j, cell in enumerate(record):
        value = m if cell is EMPTY else int(cell)
        if cell is not EMPTY and not 0 <= value < m:
            raise ValidationError(f"record cell {j + 1} holds {cell}, outside 0..{m - 1}", "record")
        index += value * (m + 1) ** j
    return index


def input_embedding(n: int, m: int) -> np.ndarray:
    """Record index of each input x in {0..m-1}^n (inputs in base-m order)."""
    x = np.arange(m**n)
    cells = (x[:, None] // m ** np.arange(n)) % m
    return cells @ (m + 1) ** np.arange(n)


def record_sizes(n: int, m: int) -> np.ndarray:
    return (record_cells(n, m) != m).sum(axis=1)


def recording_cell(m: int) -> np.ndarray:
    """T_i = I - |u><u| - |e><e| + |u><e| + |e><u| on one cell, u uniform over symbols."""
    u = np.zeros(m + 1)
    u[:m] = 1 / math.sqrt(m)
    e = np.zeros(m + 1)
    e[m] = 1.0
    return (
        np.eye(m + 1) - np.outer(u, u) - np.outer(e, e) + np.outer(u, e) + np.outer(e, u)
    ).astype(np.complex128)


def recording_unitary(n: int, m: int) -> np.ndarray:
    """T = T_1 (x) ... (x) T_n on the full record space (dense)."""
    size = (m + 1) ** n
    if size > settings.qsim_max_dim:
        raise CapExceededError("(m+1)^n", size, settings.qsim_max_dim)
    cell = recording_cell(m)
    out = np.eye(1, dtype=np.complex128)
    for _ in range(n):
        out = np.kron(cell, out)
    return out


def _apply_cellwise(states: np.ndarray, op: np.ndarray, n: int, m: int) -> np.ndarray:
    """Apply ``op`` to every record cell of (dim, (m+1)^n) states."""
    dim = states.shape[0]
    tensor = states.reshape((dim,) + (m + 1,) * n)
    for axis in range(1, n + 1):
        tensor = np.moveaxis(np.tensordot(op, tensor, axes=([1], [axis])), 0, axis)
    return tensor.reshape(dim, -1)


def _record_phases(n: int, m: int, d: int) -> np.ndarray:
    """omega^{b c_i} on |i,b,w>|c>, and 1 where cell i is empty; shape (dim, (m+1)^n)."""
    k = np.arange(n * m * d)
    i, b = k // (m * d), (k // d) % m
    cells = record_cells(n, m)[:, i].T
    phases = np.exp(2j * np.pi * (b[:, None] * cells % m) / m)
    return np.where(cells == m, 1.0, phases)


def apply_recording_oracle(states: np.ndarray, n: int, m: int, d: int, phases=None) -> np.ndarray:
    """R = (I (x) T) O+- (I (x) T) applied without forming R."""
    cell = recording_cell(m)
    phases = _record_phases(n, m, d) if phases is None else phases
    return _apply_cellwise(phases * _apply_cellwise(states, cell, n, m), cell, n, m)


def recording_oracle(n: int, m: int, d: int = 1) -> np.ndarray:
    """Dense R on the algorithm register times the record space."""
    size = n * m * d * (m + 1) ** n
    if size > settings.qsim_max_dim:
        raise CapExceededError("n*m*d*(m+1)^n", size, settings.qsim_max_dim)
    t = np.kron(np.eye(n * m * d), recording_unitary(n, m))
    phases = np.diag(_record_phases(n, m, d).ravel())
    return t @ phases @ t


def recording_action(n: int, m: int, i: int, b: int, record: Sequence[int | None]) -> np.ndarray:
    """Closed form of R|i,b>|record> restricted to the record register.

    b = 0 leaves the record alone. Otherwise only cell i changes: an empty
    cell becomes the Fourier cell m^{-1/2} sum omega^{b x'}|x'>, and a filled
    cell x becomes omega^{bx}|x> + (omega^{bx}/sqrt m)|empty> +
    sum_x' (1 - omega^{bx} - omega^{bx'})/m |x'>.
    """
    if len(record) != n:
        raise ValidationError(f"record has {len(record)} cells, expected {n}", field="record")
    if not 1 <= i <= n or not 0 <= b < m:
        raise ValidationError(f"need 1 <= i <= {n} and 0 <= b < {m}", field="i")
    out = np.zeros((m + 1) ** n, dtype=np.complex128)
    start = record_index(record, m)
    if b == 0:
        out[start] = 1.0
        return out
    omega = np.exp(2j * np.pi * b * np.arange(m) / m)
    cell_image = np.zeros(m + 1, dtype=np.complex128)
    current = record[i - 1]
    if current is EMPTY:
        cell_image[:m] = omega / math.sqrt(m)
    else:
        phase = omega[current]
        cell_image[:m] = (1 - phase - omega) / m
        cell_image[current] += phase
        cell_image[m] = phase / math.sqrt(m)
    base = start - (m if current is EMPTY else current) * (m + 1) ** (i - 1)
    for value, amplitude in enumerate(cell_image):
        out[base + value * (m + 1) ** (i - 1)] = amplitude
    return out


def recording_action_deviation(n: int, m: int, d: int = 1) -> float:
    """max |R|i,b,w>|r> - closed form| over every basis state."""
    oracle = recording_oracle(n, m, d)
    size = (m + 1) ** n
    cells = record_cells(n, m)
    worst = 0.0
    for i, b, w in itertools.product(range(1, n + 1), range(m), range(d)):
        row = ((i - 1) * m + b) * d + w
        for r in range(size):
            record = [EMPTY if c == m else int(c) for c in cells[r]]
            column = oracle[:, row * size + r].reshape(n * m * d, size)
            expected = recording_action(n, m, i, b, record)
            worst = max(worst, float(np.max(np.abs(column[row] - expected))))
            column = column.copy()
            column[row] = 0
            worst = max(worst, float(np.max(np.abs(column))))
    return worst


# === Record predicates ===


class RecordPredicate(BaseModel):
    """Cell-wise predicate on records compiled to a boolean mask over record indices."""

    name: str
    description: str
    rule: Callable[[np.ndarray, int], np.ndarray] = Field(
        description="(cells, m) -> boolean mask; cells has shape (records, n), m marks empty"
    )

    def mask(self, n: int, m: int) -> np.ndarray:
        return np.asarray(self.rule(record_cells(n, m), m), dtype=bool)


def _some_cell_equals(symbol: int):
    def rule(cells: np.ndarray, m: int) -> np.ndarray:
        return (cells == symbol).any(axis=1)

    return rule


def _collision(cells: np.ndarray, m: int) -> np.ndarray:
    hit = np.zeros(cells.shape[0], dtype=bool)
    for j, k in itertools.combinations(range(cells.shape[1]), 2):
        hit |= (cells[:, j] == cells[:, k]) & (cells[:, j] != m)
    return hit


PREDICATES: dict[str, RecordPredicate] = {}


def register_predicate(name: str, rule, description: str = "") -> RecordPredicate:
    predicate = RecordPredicate(name=name, description=description, rule=rule)
    PREDICATES[name] = predicate
    return predicate


def get_predicate(name: str) -> RecordPredicate:
    if name not in PREDICATES:
        raise ValidationError(
            f"unknown record predicate '{name}' (known: {', '.join(sorted(PREDICATES))})", "predicate"
        )
    return PREDICATES[name]


register_predicate("search-one", _some_cell_equals(1), "some cell equals 1")
register_predicate("collision", _collision, "two distinct non-empty cells are equal")
register_predicate("preimage-of-0", _some_cell_equals(0), "some cell equals 0")


# === Joint and recorded runs ===


class JointRun(BaseModel):
    """psi^t = sum_x m^{-n/2} psi_x^t (x) |x> for t = 0..T, inputs in base-m order."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    n: int
    m: int
    d: int
    states: list[np.ndarray]
    assertions: list[Assertion] = Field(default_factory=list)


class RecordedRun(BaseModel):
    """psi_R^t: U_t interleaved with R from |0,0> (x) |empty...empty>."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    n: int
    m: int
    d: int
    states: list[np.ndarray]

    def progress(self, predicate: RecordPredicate) -> list[float]:
        """Delta_t = ||Pi psi_R^t||."""
        mask = predicate.mask(self.n, self.m)
        return [float(np.linalg.norm(s[:, mask])) for s in self.states]

    def max_oversized_amplitude(self, t: int) -> float:
        """Largest amplitude on records with more than t filled cells."""
        big = record_sizes(self.n, self.m) > t
        return float(np.max(np.abs(self.states[t][:, big]))) if big.any() else 0.0


class ProgressTrace(BaseModel):
    predicate: str
    deltas: list[float]
    assertions: list[Assertion]
    results: dict = Field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all_passed(self.assertions)


def _require_phase(alg: QueryAlgorithm) -> QueryAlgorithm:
    _check_cap(alg.n, alg.m, alg.d)
    if alg.oracle_kind != "phase":
        logger.debug(f"Converting {alg.name} to the phase oracle")
        return as_phase_algorithm(alg)
    return alg


def joint_run(alg: QueryAlgorithm, dist=None) -> JointRun:
    """Evolve the purified joint state under the joint phase oracle.

    Only the uniform distribution is supported. The result is cross-checked
    against per-input runs and against the ensemble density matrix.

    Raises:
        ValidationError: a non-uniform distribution was given
    """
    size = alg.m**alg.n
    if dist is not None:
        weights = np.asarray(dist, dtype=float).ravel()
        if weights.size != size or np.max(np.abs(weights - 1 / size)) > 1e-12:
            raise ValidationError("the recording method requires the uniform distribution", "dist")
    alg = _require_phase(alg)
    inputs = (np.arange(size)[:, None] // alg.m ** np.arange(alg.n)) % alg.m
    i = np.arange(alg.dim) // (alg.m * alg.d)
    b = (np.arange(alg.dim) // alg.d) % alg.m
    phases = np.exp(2j * np.pi * (b[:, None] * inputs[:, i].T % alg.m) / alg.m)

    state = np.repeat(alg.unitaries[0][:, :1], size, axis=1) / math.sqrt(size)
    states = [state]
    for u in alg.unitaries[1:]:
        state = u @ (phases * state)
        states.append(state)

    tol = settings.structure_tol
    per_input = evolve(alg, inputs)
    deviation = max(
        float(np.max(np.abs(j - p / math.sqrt(size)))) for j, p in zip(states, per_input, strict=True)
    )
    density = max(
        float(np.max(np.abs(j @ j.conj().T - (p @ p.conj().T) / size)))
        for j, p in zip(states, per_input, strict=True)
    )
    assertions = [
        Assertion.at_most("joint vs per-input", deviation, 0.0, tol),
        Assertion.at_most("reduced density vs ensemble", density, 0.0, tol),
    ]
    return JointRun(n=alg.n, m=alg.m, d=alg.d, states=states, assertions=assertions)


def recorded_run(alg: QueryAlgorithm) -> RecordedRun:
    alg = _require_phase(alg)
    n, m, d = alg.n, alg.m, alg.d
    size = (m + 1) ** n
    state = np.zeros((alg.dim, size), dtype=np.complex128)
    state[:, size - 1] = alg.unitaries[0][:, 0]
    phases = _record_phases(n, m, d)
    states = [state]
    for u in alg.unitaries[1:]:
        state = u @ apply_recording_oracle(state, n, m, d, phases)
        states.append(state)
    return RecordedRun(n=n, m=m, d=d, states=states)


def _embed_joint(state: np.ndarray, n: int, m: int) -> np.ndarray:
    out = np.zeros((state.shape[0], (m + 1) ** n), dtype=np.complex128)
    out[:, input_embedding(n, m)] = state
    return out


def indistinguishability_check(alg: QueryAlgorithm, strict: bool = False) -> ExperimentReport:
    """max_t ||(I (x) T) psi^t - psi_R^t||, computed from two independent pipelines."""
    started = time.perf_counter()
    joint = joint_run(alg)
    recorded = recorded_run(alg)
    cell = recording_cell(alg.m)
    deviations = [
        float(np.linalg.norm(_apply_cellwise(_embed_joint(j, alg.n, alg.m), cell, alg.n, alg.m) - r))
        for j, r in zip(joint.states, recorded.states, strict=True)
    ]
    report = ExperimentReport(
        command="record indistinguishability",
        parameters={"n": alg.n, "m": alg.m, "d": alg.d, "T": alg.T, "algorithm": alg.name},
        tolerances=settings.tolerances(),
    )
    report.assertions.extend(joint.assertions)
    report.assertions.append(
        Assertion.at_most("max deviation", max(deviations), 0.0, settings.structure_tol)
    )
    report.assertions.extend(_record_size_rows(recorded))
    report.results = {"deviations": deviations}
    report.elapsed_s = time.perf_counter() - started
    if strict and not report.ok:
        raise InvariantViolation(f"recording pipelines disagree: {report.failed()}")
    return report


def _record_size_rows(recorded: RecordedRun) -> list[Assertion]:
    return [
        Assertion.at_most(f"record size <= {t}", recorded.max_oversized_amplitude(t), 0.0, RECORD_SIZE_TOL)
        for t in range(len(recorded.states))
    ]


# === Progress analyses ===


def classical_search_bound(T: int, m: int) -> float:
    """Success of any T-query classical algorithm for SEARCH under the uniform distribution."""
    return min(1.0, (T + 1) / m)


def search_lower_bound(m: int) -> float:
    """Queries needed for average success 2/3: sqrt(m/15) - sqrt(1/5)."""
    return math.sqrt(m / 15) - math.sqrt(1 / 5)


def search_progress(alg: QueryAlgorithm) -> ProgressTrace:
    """Recording progress for SEARCH with the predicate 'some cell equals 1'."""
    tol = settings.identity_tol
    recorded = recorded_run(alg)
    deltas = recorded.progress(get_predicate("search-one"))
    step = math.sqrt(10 / alg.m)
    assertions = [Assertion.at_most("initial progress", deltas[0], 0.0, RECORD_SIZE_TOL)]
    for t in range(alg.T):
        assertions.append(
            Assertion.at_most(f"step {t}->{t + 1}", deltas[t + 1], deltas[t] + step, tol)
        )
    relation = make_named("SEARCH", n=alg.n, m=alg.m)
    success = average_success(alg, relation)
    final_bound = (deltas[-1] + math.sqrt(2 / alg.m)) ** 2
    assertions.append(Assertion.at_most("final condition", success, final_bound, tol))
    assertions.extend(_record_size_rows(recorded))
    logger.info(f"SEARCH progress: Delta_T={deltas[-1]:.6g}, success {success:.6g}")
    return ProgressTrace(
        predicate="search-one",
        deltas=deltas,
        assertions=assertions,
        results={
            "average_success": success,
            "final_bound": final_bound,
            "classical_bound": classical_search_bound(alg.T, alg.m),
            "implied_lower_bound": search_lower_bound(alg.m),
        },
    )


def collision_progress(alg: QueryAlgorithm) -> ProgressTrace:
    """Recording progress for COLLISION: Delta_{t+1} <= Delta_t + sqrt(10 t / m)."""
    tol = settings.identity_tol
    recorded = recorded_run(alg)
    deltas = recorded.progress(get_predicate("collision"))
    assertions = [Assertion.at_most("initial progress", deltas[0], 0.0, RECORD_SIZE_TOL)]
    for t in range(alg.T):
        bound = deltas[t] + math.sqrt(10 * t / alg.m)
        assertions.append(Assertion.at_most(f"step {t}->{t + 1}", deltas[t + 1], bound, tol))
    assertions.extend(_record_size_rows(recorded))
    return ProgressTrace(predicate="collision", deltas=deltas, assertions=assertions)


def predicate_progress(alg: QueryAlgorithm, name: str) -> ProgressTrace:
    """Delta_t for any registered predicate, with the record-size rows only."""
    recorded = recorded_run(alg)
    return ProgressTrace(
        predicate=name,
        deltas=recorded.progress(get_predicate(name)),
        assertions=_record_size_rows(recorded),
    )


def decomposition_norm_check(n: int, m: int, d: int = 1, seed=None) -> list[Assertion]:
    """Norm identities of the SEARCH progress step on a random state outside Pi.

    With psi_empty the part querying an empty cell and psi_y the part querying
    a cell holding y (both with b != 0): ||Pi R psi_empty|| = ||psi_empty||/sqrt(m)
    and ||Pi R psi_y|| <= (3/m) ||psi_y||.
    """
    _check_cap(n, m, d)
    rng = np.random.default_rng(seed)
    dim, size = n * m * d, (m + 1) ** n
    pi = get_predicate("search-one").mask(n, m)
    state = rng.normal(size=(dim, size)) + 1j * rng.normal(size=(dim, size))
    state[:, pi] = 0
    state /= np.linalg.norm(state)

    k = np.arange(dim)
    i, b = k // (m * d), (k // d) % m
    queried = record_cells(n, m)[:, i].T
    nonzero = (b != 0)[:, None]
    phases = _record_phases(n, m, d)
    tol = settings.identity_tol

    def projected(part):
        return float(np.linalg.norm(apply_recording_oracle(part, n, m, d, phases)[:, pi]))

    rows = []
    empty_part = np.where(nonzero & (queried == m), state, 0)
    rows.append(
        Assertion.close_to(
            "||Pi R psi_empty||", projected(empty_part), np.linalg.norm(empty_part) / math.sqrt(m), tol
        )
    )
    for y in range(m):
        if y == 1:
            continue
        part = np.where(nonzero & (queried == y), state, 0)
        rows.append(
            Assertion.at_most(
                f"||Pi R psi_{y}||", projected(part), 3 / m * float(np.linalg.norm(part)), tol
            )
        )
    zero_part = np.where(~nonzero, state, 0)
    rows.append(Assertion.at_most("||Pi R psi_b=0||", projected(zero_part), 0.0, tol))
    return rows


def involution_check(n: int, m: int) -> list[Assertion]:
    """T is unitary, Hermitian and squares to the identity."""
    t = recording_unitary(n, m)
    tol = settings.structure_tol
    return [
        Assertion.at_most("T unitary", unitary_deviation(t), 0.0, tol),
        Assertion.at_most("T Hermitian", float(np.max(np.abs(t - t.conj().T))), 0.0, tol),
        Assertion.at_most(
            "T^2 = I", float(np.max(np.abs(t @ t - np.eye(t.shape[0])))), 0.0, tol
        ),
    ]
