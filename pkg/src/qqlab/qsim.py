"""Exact state-vector simulation of query algorithms in canonical form.

The Hilbert space basis is |i,b,w> with i slowest and w fastest; internally
indices are 0-based, so basis position ((i-1)*m + b)*d + (w-1) holds |i,b,w>.
All output statistics are computed from amplitudes, never sampled.
"""

import logging
import math
from collections.abc import Sequence
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.stats import unitary_group

from .boolfn import BooleanFunction, Relation, input_bits
from .errors import CapExceededError, NotUnitaryError, ValidationError
from .linalg import fourier_matrix, householder_to, unitary_deviation
from .settings import settings

logger = logging.getLogger(__name__)

OracleKind = Literal["binary", "phase"]

# inputs evolved together per batch in success computations
BATCH_SIZE = 512


class QueryAlgorithm(BaseModel):
    """U_T O_x ... U_1 O_x U_0 applied to |1,0,1>."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    n: int = Field(ge=1, description="Number of indices")
    m: int = Field(default=2, ge=2, description="Value alphabet size")
    d: int = Field(default=1, ge=1, description="Workspace dimension")
    oracle_kind: OracleKind = "binary"
    unitaries: tuple[np.ndarray, ...]
    name: str | None = None

    @model_validator(mode="after")
    def check_unitaries(self):
        dim = self.n * self.m * self.d
        if dim > settings.qsim_max_dim:
            raise CapExceededError("n*m*d", dim, settings.qsim_max_dim)
        if not self.unitaries:
            raise ValidationError("an algorithm needs at least U_0", field="unitaries")
        for t, u in enumerate(self.unitaries):
            if u.shape != (dim, dim):
                raise ValidationError(
                    f"U_{t} has shape {u.shape}, expected ({dim}, {dim})", field="unitaries"
                )
            deviation = unitary_deviation(u)
            if deviation > settings.structure_tol:
                raise NotUnitaryError(deviation, settings.structure_tol, step=t)
        return self

    @property
    def T(self) -> int:
        return len(self.unitaries) - 1

    @property
    def dim(self) -> int:
        return self.n * self.m * self.d

    def basis_index(self, i: int, b: int, w: int = 1) -> int:
        """Position of |i,b,w> (i and w 1-based)."""
        return ((i - 1) * self.m + b) * self.d + (w - 1)

    def initial_state(self) -> np.ndarray:
        state = np.zeros(self.dim, dtype=np.complex128)
        state[0] = 1.0
        return state


class RunTrace(BaseModel):
    """Intermediate states psi_x^0..psi_x^T of one run."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    x: tuple[int, ...]
    states: list[np.ndarray]

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


class SuccessReport(BaseModel):
    """Worst-case and per-input success of an algorithm for f."""

    worst: float
    per_input: list[float]

    @property
    def computes(self) -> bool:
        return self.worst >= 2 / 3 - settings.identity_tol


# === Oracles ===


def validate_input(x: Sequence[int], n: int, m: int) -> np.ndarray:
    symbols = np.asarray(x, dtype=np.int64).ravel()
    if symbols.size != n:
        raise ValidationError(f"input has {symbols.size} symbols, expected n={n}", field="x")
    if np.any(symbols < 0) or np.any(symbols >= m):
        raise ValidationError(f"input symbols must lie in 0..{m - 1}", field="x")
    return symbols


def _basis_grid(n: int, m: int, d: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    k = np.arange(n * m * d)
    return k // (m * d), (k // d) % m, k % d


def _oracle_tables(inputs: np.ndarray, kind: OracleKind, n: int, m: int, d: int) -> np.ndarray:
    """Per-input gather indices (binary) or phases (phase), shape (dim, N)."""
    i, b, w = _basis_grid(n, m, d)
    xi = inputs[:, i].T
    if kind == "binary":
        return (i[:, None] * m + (b[:, None] - xi) % m) * d + w[:, None]
    return np.exp(2j * np.pi * (b[:, None] * xi % m) / m)


def _apply_oracle(states: np.ndarray, table: np.ndarray, kind: OracleKind) -> np.ndarray:
    if kind == "binary":
        return np.take_along_axis(states, table, axis=0)
    return states * table


def apply_oracle(state, x: Sequence[int], kind: OracleKind, n: int, m: int = 2, d: int = 1):
    """O_x (binary) or O_x^+- (phase) applied to one state."""
    symbols = validate_input(x, n, m)
    table = _oracle_tables(symbols[None, :], kind, n, m, d)
    return _apply_oracle(np.asarray(state, dtype=np.complex128)[:, None], table, kind)[:, 0]


def oracle_matrix(x: Sequence[int], kind: OracleKind, n: int, m: int = 2, d: int = 1):
    """Dense O_x: |i,b,w> -> |i, b + x_i mod m, w> or omega^{b x_i}|i,b,w>."""
    if n * m * d > settings.qsim_max_dim:
        raise CapExceededError("n*m*d", n * m * d, settings.qsim_max_dim)
    dim = n * m * d
    symbols = validate_input(x, n, m)
    table = _oracle_tables(symbols[None, :], kind, n, m, d)[:, 0]
    if kind == "phase":
        return np.diag(table)
    oracle = np.zeros((dim, dim), dtype=np.complex128)
    oracle[np.arange(dim), table] = 1.0
    return oracle


def value_register_op(op, n: int, d: int = 1) -> np.ndarray:
    """I_index (x) op (x) I_workspace."""
    return np.kron(np.kron(np.eye(n), op), np.eye(d))


def as_phase_algorithm(alg: QueryAlgorithm) -> QueryAlgorithm:
    """Equivalent phase-oracle algorithm: conjugate every query by I (x) F (x) I.

    Final states agree exactly; intermediate states differ by the Fourier
    transform on the value register, which leaves query weights unchanged.
    """
    if alg.oracle_kind == "phase" or alg.T == 0:
        return alg.model_copy(update={"oracle_kind": "phase"})
    f = value_register_op(fourier_matrix(alg.m), alg.n, alg.d)
    fh = f.conj().T
    ops = [f @ alg.unitaries[0]]
    ops += [f @ u @ fh for u in alg.unitaries[1:-1]]
    ops.append(alg.unitaries[-1] @ fh)
    return QueryAlgorithm(
        n=alg.n, m=alg.m, d=alg.d, oracle_kind="phase", unitaries=tuple(ops), name=alg.name
    )


def oracle_equivalence_deviation(x: Sequence[int], n: int, m: int = 2, d: int = 1) -> float:
    """max |(I(x)F) O_x (I(x)F^H) - O_x^+-| entrywise (F = H for m = 2)."""
    f = value_register_op(fourier_matrix(m), n, d)
    binary = oracle_matrix(x, "binary", n, m, d)
    phase = oracle_matrix(x, "phase", n, m, d)
    return float(np.max(np.abs(f @ binary @ f.conj().T - phase)))


# === Evolution ===


def _as_inputs(alg: QueryAlgorithm, inputs) -> np.ndarray:
    arr = np.asarray(inputs, dtype=np.int64)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.shape[1] != alg.n:
        raise ValidationError(
            f"inputs have {arr.shape[1]} symbols, algorithm expects n={alg.n}", field="x"
        )
    if np.any(arr < 0) or np.any(arr >= alg.m):
        raise ValidationError(f"input symbols must lie in 0..{alg.m - 1}", field="x")
    return arr


def evolve(alg: QueryAlgorithm, inputs, keep_all: bool = True) -> list[np.ndarray]:
    """States for a batch of inputs: list over t of (dim, N) arrays (or only the last)."""
    inputs = _as_inputs(alg, inputs)
    table = _oracle_tables(inputs, alg.oracle_kind, alg.n, alg.m, alg.d)
    start = alg.unitaries[0][:, 0]
    states = np.repeat(start[:, None], inputs.shape[0], axis=1)
    history = [states] if keep_all else []
    for u in alg.unitaries[1:]:
        states = u @ _apply_oracle(states, table, alg.oracle_kind)
        if keep_all:
            history.append(states)
    return history if keep_all else [states]


def run(alg: QueryAlgorithm, x: Sequence[int]) -> RunTrace:
    """psi_x^t = U_t O_x ... U_1 O_x U_0 |0,0> for t = 0..T."""
    symbols = validate_input(x, alg.n, alg.m)
    history = evolve(alg, symbols)
    return RunTrace(x=tuple(int(s) for s in symbols), states=[s[:, 0] for s in history])


def final_states(alg: QueryAlgorithm, inputs) -> np.ndarray:
    """psi_x^T for every row of ``inputs`` as a (dim, N) array, evolved in batches."""
    inputs = _as_inputs(alg, inputs)
    chunks = [
        evolve(alg, inputs[k : k + BATCH_SIZE], keep_all=False)[0]
        for k in range(0, inputs.shape[0], BATCH_SIZE)
    ]
    return np.hstack(chunks)


def register_probabilities(states: np.ndarray, n: int, m: int, d: int, register: str):
    """Marginal distribution of the index or value register, per column."""
    probs = np.abs(states.reshape(n, m, d, -1)) ** 2
    if register == "index":
        return probs.sum(axis=(1, 2))
    return probs.sum(axis=(0, 2))


def query_weights(state, n: int, m: int = 2, d: int = 1) -> np.ndarray:
    """||(|i><i| (x) I) psi||^2 for i = 1..n."""
    return register_probabilities(np.asarray(state)[:, None], n, m, d, "index")[:, 0]


def acceptance_probabilities(alg: QueryAlgorithm) -> np.ndarray:
    """Pr[value register reads 1] for every x in {0,1}^n, in index order."""
    if alg.m != 2:
        raise ValidationError("acceptance needs a Boolean value register (m=2)", field="m")
    finals = final_states(alg, input_bits(alg.n))
    return register_probabilities(finals, alg.n, alg.m, alg.d, "value")[1]


def success_probability(alg: QueryAlgorithm, f: BooleanFunction) -> SuccessReport:
    """Probability of reading f(x) from the value register, per input and worst case."""
    if alg.m != 2:
        raise ValidationError("success_probability needs m=2", field="m")
    if f.n != alg.n:
        raise ValidationError(f"f has n={f.n}, algorithm has n={alg.n}", field="f")
    accept = acceptance_probabilities(alg)
    per_input = np.where(f.table == 1, accept, 1 - accept)
    return SuccessReport(worst=float(per_input.min()), per_input=per_input.tolist())


def validate_distribution(dist, size: int) -> np.ndarray:
    weights = np.asarray(dist, dtype=float).ravel()
    if weights.size != size:
        raise ValidationError(f"distribution has {weights.size} weights, expected {size}", "dist")
    if np.any(weights < 0):
        raise ValidationError("distribution weights must be nonnegative", field="dist")
    if abs(weights.sum() - 1) > 1e-12:
        raise ValidationError(f"distribution sums to {weights.sum():.15g}, not 1", field="dist")
    return weights


def average_success(alg: QueryAlgorithm, rel: Relation, dist=None) -> float:
    """sum_x dist(x) Pr[measured index in rel_x], output read from the index register."""
    if (rel.n, rel.m) != (alg.n, alg.m):
        raise ValidationError("relation and algorithm disagree on (n, m)", field="rel")
    weights = (
        np.full(rel.size, 1 / rel.size) if dist is None else validate_distribution(dist, rel.size)
    )
    support = np.flatnonzero(weights > 0)
    inputs = np.array([rel.symbols(int(k)) for k in support], dtype=np.int64)
    probs = register_probabilities(final_states(alg, inputs), alg.n, alg.m, alg.d, "index")
    total = 0.0
    for column, k in enumerate(support):
        labels = [i for i in rel.labels(int(k)) if isinstance(i, (int, np.integer))]
        total += weights[k] * float(sum(probs[i - 1, column] for i in labels))
    return total


# === Reference algorithms ===


def _require_power_of_two(n: int):
    if n < 1 or n & (n - 1):
        raise ValidationError(f"n must be a power of 2, got n={n}", field="n")


def _diffusion(n: int) -> np.ndarray:
    u = np.full(n, 1 / math.sqrt(n))
    return 2 * np.outer(u, u) - np.eye(n)


def grover(n: int, T: int) -> QueryAlgorithm:
    """T Grover iterations with the phase oracle; read the answer from the index register."""
    _require_power_of_two(n)
    if T < 0:
        raise ValidationError("T must be nonnegative", field="T")
    uniform = np.full(n, 1 / math.sqrt(n))
    flip = np.array([[0, 1], [1, 0]])
    prep = np.kron(householder_to(uniform), flip)
    step = np.kron(_diffusion(n), np.eye(2))
    return QueryAlgorithm(
        n=n,
        m=2,
        d=1,
        oracle_kind="phase",
        unitaries=(prep,) + (step,) * T,
        name=f"grover(n={n}, T={T})",
    )


def grover_or_schedule(n: int) -> list[int]:
    """Grover iterations per stage: 0, then 1, 2, 4, ... while below sqrt(n)."""
    schedule = [0]
    r = 1
    while r * r < n:
        schedule.append(r)
        r *= 2
    return schedule


def grover_or(n: int) -> QueryAlgorithm:
    """Coherent OR/SEARCH algorithm with a verification query after every stage.

    A flag workspace w in {0..S} remembers the stage that found a marked index.
    Found branches keep the value register in |+>, which every later binary
    query leaves unchanged. At the end the value register holds OR(x) and, on
    success, the index register holds a solution.
    """
    _require_power_of_two(n)
    schedule = grover_or_schedule(n)
    stages = len(schedule)
    d = stages + 1
    h = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    x = np.array([[0, 1], [1, 0]])
    p0 = np.zeros((d, d))
    p0[0, 0] = 1
    rest = np.eye(d) - p0
    eye_iv = np.eye(2 * n)

    def sector0(a_iv: np.ndarray) -> np.ndarray:
        return np.kron(a_iv, p0) + np.kron(eye_iv, rest)

    uniform = np.full(n, 1 / math.sqrt(n))
    prep = sector0(np.kron(householder_to(uniform), h @ x))
    diffusion = sector0(np.kron(_diffusion(n), np.eye(2)))
    to_verify = sector0(np.kron(np.eye(n), x @ h))

    def post_verify(s: int) -> np.ndarray:
        minus, plus = h @ [0, 1], h @ [1, 0]
        vf = np.eye(2 * d)
        for (b, flag), (image_b, image_flag) in {
            (0, 0): (minus, 0),
            (1, 0): (plus, s),
            (0, s): (plus, 0),
            (1, s): (minus, s),
        }.items():
            column = np.zeros(2 * d)
            column[image_flag] = image_b[0]
            column[d + image_flag] = image_b[1]
            vf[:, b * d + flag] = column
        return np.kron(np.eye(n), vf)

    final = np.kron(np.eye(n), np.kron(x @ h, rest) + np.kron(np.eye(2), p0))

    ops: list[np.ndarray] = []
    current = prep
    for s, r in enumerate(schedule, start=1):
        for _ in range(r):
            ops.append(current)
            current = diffusion
        ops.append(to_verify @ current)
        current = post_verify(s) if s < stages else final
    ops.append(current)
    logger.debug(f"grover_or(n={n}): schedule {schedule}, T={len(ops) - 1}")
    return QueryAlgorithm(
        n=n, m=2, d=d, oracle_kind="binary", unitaries=tuple(ops), name=f"grover_or(n={n})"
    )


def search_iterations(m: int) -> int:
    """Grover iterations tuned to the expected fraction 1/m of cells equal to 1."""
    theta = math.asin(math.sqrt(1 / m))
    return max(0, round(math.pi / (4 * theta) - 0.5))


def search_algorithm(n: int, m: int = 2, iterations: int | None = None) -> QueryAlgorithm:
    """SEARCH solver over the alphabet {0..m-1}: find i with x_i = 1.

    With m = 2 and no iteration count this is grover_or(n), whose index
    register holds the found solution. Otherwise each iteration spends two
    binary queries: the first writes x_i into the value register, the cell
    value 1 picks up a phase -1 and the register is negated mod m, so the
    second query returns it to 0. Diffusion on the index register follows.
    """
    if m < 2:
        raise ValidationError(f"SEARCH needs m >= 2, got m={m}", field="m")
    if m == 2 and iterations is None:
        return grover_or(n).model_copy(update={"name": f"search(n={n})"})
    if n < 1:
        raise ValidationError("n must be positive", field="n")
    r = search_iterations(m) if iterations is None else iterations
    if r < 0:
        raise ValidationError("iterations must be nonnegative", field="iterations")
    mark = np.diag([-1.0 if b == 1 else 1.0 for b in range(m)])
    negate = np.zeros((m, m))
    negate[(-np.arange(m)) % m, np.arange(m)] = 1.0
    prep = np.kron(householder_to(np.full(n, 1 / math.sqrt(n))), np.eye(m))
    kickback = value_register_op(negate @ mark, n)
    diffusion = np.kron(_diffusion(n), np.eye(m))
    ops = [prep] + [kickback, diffusion] * r
    return QueryAlgorithm(
        n=n,
        m=m,
        d=1,
        oracle_kind="binary",
        unitaries=tuple(ops),
        name=f"search(n={n}, m={m}, r={r})",
    )


def deutsch_parity() -> QueryAlgorithm:
    """One phase query computing x_1 XOR x_2 exactly."""
    e = np.eye(4)
    v_plus = (e[1] + e[3]) / math.sqrt(2)
    v_minus = (e[1] - e[3]) / math.sqrt(2)
    u0 = np.column_stack([v_plus, v_minus, e[0], e[2]])
    u1 = (
        np.outer(e[0], v_plus)
        + np.outer(e[1], v_minus)
        + np.outer(e[2], e[0])
        + np.outer(e[3], e[2])
    )
    return QueryAlgorithm(
        n=2, m=2, d=1, oracle_kind="phase", unitaries=(u0, u1), name="deutsch_parity"
    )


def _permutation_unitary(dim: int, image) -> np.ndarray:
    targets = np.array([image(k) for k in range(dim)])
    if np.unique(targets).size != dim:
        raise ValidationError("basis map is not a permutation", field="unitaries")
    u = np.zeros((dim, dim))
    u[targets, np.arange(dim)] = 1.0
    return u


def classical_lookup(f: BooleanFunction) -> QueryAlgorithm:
    """Query x_1..x_n in order, store each bit in the workspace, then write f(x)."""
    n = f.n
    d = 2**n
    dim = n * 2 * d

    def split(k):
        return k // (2 * d), (k // d) % 2, k % d

    def store(i, b, w):
        w = w ^ (b << i)
        return b ^ ((w >> i) & 1), w

    def step(k):
        i, b, w = split(k)
        b, w = store(i, b, w)
        return (((i + 1) % n) * 2 + b) * d + w

    def finish(k):
        i, b, w = split(k)
        b, w = store(i, b, w)
        return (i * 2 + (b ^ int(f.table[w]))) * d + w

    ops = [np.eye(dim)] + [_permutation_unitary(dim, step)] * (n - 1)
    ops.append(_permutation_unitary(dim, finish))
    return QueryAlgorithm(
        n=n, m=2, d=d, oracle_kind="binary", unitaries=tuple(ops), name=f"lookup({f.name})"
    )


def constant_algorithm(n: int, output: int, T: int = 0, d: int = 1) -> QueryAlgorithm:
    """Writes ``output`` into the value register before any query; queries add a global phase at most."""
    dim = n * 2 * d
    first = np.eye(dim)
    if output:
        first = value_register_op(np.array([[0, 1], [1, 0]]), n, d)
    ops = (first,) + (np.eye(dim),) * T
    return QueryAlgorithm(
        n=n, m=2, d=d, oracle_kind="phase", unitaries=ops, name=f"constant({output})"
    )


def random_algorithm(
    n: int,
    T: int,
    m: int = 2,
    d: int = 1,
    kind: OracleKind = "binary",
    seed: int | np.random.Generator = None,
) -> QueryAlgorithm:
    """Haar-random U_0..U_T."""
    rng = np.random.default_rng(seed)
    dim = n * m * d
    if dim > settings.qsim_max_dim:
        raise CapExceededError("n*m*d", dim, settings.qsim_max_dim)
    unitaries = tuple(
        np.atleast_2d(unitary_group.rvs(dim, random_state=rng)) if dim > 1 else np.eye(1)
        for _ in range(T + 1)
    )
    return QueryAlgorithm(n=n, m=m, d=d, oracle_kind=kind, unitaries=unitaries, name="random")


def null_query_algorithm(n: int, T: int, d: int = 1, seed=None) -> QueryAlgorithm:
    """Phase-oracle algorithm whose value register stays |0>: every query is trivial."""
    rng = np.random.default_rng(seed)
    ops = []
    for _ in range(T + 1):
        u = unitary_group.rvs(n * d, random_state=rng) if n * d > 1 else np.eye(1)
        ops.append(_lift_index_workspace(u, n, d))
    return QueryAlgorithm(
        n=n, m=2, d=d, oracle_kind="phase", unitaries=tuple(ops), name="null_query"
    )


def _lift_index_workspace(u: np.ndarray, n: int, d: int) -> np.ndarray:
    """Act with u on (index, workspace) while fixing the value register."""
    u4 = np.asarray(u).reshape(n, d, n, d)
    lifted = np.einsum("iwjv,bc->ibwjcv", u4, np.eye(2))
    return lifted.reshape(n * 2 * d, n * 2 * d)
