"""Primal and dual adversary machinery.

Certificates store an adversary matrix on an explicit support of inputs
(table indices). Vector realizations store w^(x,i) for every input as an
array of shape (2^n, n, d). Inner products are conjugate-linear in the first
argument.
"""

import itertools
import logging
import math
import time
from collections import deque

import cvxpy as cp
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .boolfn import BooleanFunction, connectivity_edges, make_named, reachability
from .errors import CapExceededError, SolverError, ValidationError
from .linalg import gram_vectors_from_psd, hermitian_eig, spectral_norm
from .models import Assertion, ExperimentReport, all_passed
from .qsim import QueryAlgorithm, evolve, register_probabilities
from .settings import settings

logger = logging.getLogger(__name__)

# largest support for which a hardness graph is materialised as a certificate
MAX_CERTIFICATE_SUPPORT = 4096
# multiplier weights below this are dropped when reading a certificate off the SDP
SUPPORT_CUTOFF = 1e-7


# === Certificates ===


class AdversaryCertificate(BaseModel):
    """Symmetric, f-sparse real matrix Gamma indexed by ``support``."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    f: BooleanFunction
    support: tuple[int, ...]
    matrix: np.ndarray

    @model_validator(mode="after")
    def check_matrix(self):
        gamma = np.asarray(self.matrix, dtype=float)
        size = len(self.support)
        if gamma.shape != (size, size):
            raise ValidationError(f"matrix has shape {gamma.shape}, expected ({size}, {size})", "matrix")
        if len(set(self.support)) != size or any(not 0 <= x < self.f.size for x in self.support):
            raise ValidationError("support must list distinct inputs of f", field="support")
        tol = settings.structure_tol
        if np.max(np.abs(gamma - gamma.T), initial=0.0) > tol:
            raise ValidationError("adversary matrix must be symmetric", field="matrix")
        values = self.f.table[list(self.support)]
        same = values[:, None] == values[None, :]
        if np.max(np.abs(gamma[same]), initial=0.0) > tol:
            raise ValidationError("adversary matrix must vanish where f(x) = f(y)", field="matrix")
        self.matrix = gamma
        return self

    def bits(self) -> np.ndarray:
        """(|support|, n) bit matrix of the support inputs."""
        s = np.asarray(self.support, dtype=np.int64)
        return ((s[:, None] >> np.arange(self.f.n)) & 1).astype(np.uint8)


class AdversaryValue(BaseModel):
    norm: float
    max_punctured_norm: float
    value: float
    implied_lower_bound: float


class PrincipalEigenvector(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    eigenvalue: float
    amplitudes: np.ndarray
    multiplicity: int
    note: str | None = None

    @property
    def distribution(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def puncture(cert: AdversaryCertificate, i: int) -> np.ndarray:
    """(Gamma_i)_{x,y} = Gamma_{x,y} if x_i != y_i, else 0 (i is 1-based)."""
    if not 1 <= i <= cert.f.n:
        raise ValidationError(f"index i={i} outside 1..{cert.f.n}", field="i")
    column = cert.bits()[:, i - 1]
    return np.where(column[:, None] != column[None, :], cert.matrix, 0.0)


def adversary_ratio(cert: AdversaryCertificate) -> AdversaryValue:
    """||Gamma|| / max_i ||Gamma_i|| and the implied bound value / 36."""
    norm = spectral_norm(cert.matrix)
    if norm == 0:
        raise ValidationError("adversary matrix is zero", field="matrix")
    punctured = max(spectral_norm(puncture(cert, i)) for i in range(1, cert.f.n + 1))
    if punctured == 0:
        raise ValidationError("every punctured matrix vanishes: malformed certificate", "matrix")
    value = norm / punctured
    return AdversaryValue(
        norm=norm, max_punctured_norm=punctured, value=value, implied_lower_bound=value / 36
    )


def or_adversary(n: int) -> AdversaryCertificate:
    """0^n joined with weight 1 to each e_i."""
    if n < 1:
        raise ValidationError("n must be >= 1", field="n")
    support = (0,) + tuple(1 << i for i in range(n))
    gamma = np.zeros((n + 1, n + 1))
    gamma[0, 1:] = gamma[1:, 0] = 1.0
    return AdversaryCertificate(f=make_named("OR", n=n), support=support, matrix=gamma)


def principal_eigenvector(cert: AdversaryCertificate) -> PrincipalEigenvector:
    """Eigenvector for the eigenvalue of largest modulus.

    In a degenerate eigenspace the candidate maximising min_x |a_x| is used:
    the basis vectors and the projections of the all-ones and standard basis
    vectors are compared.
    """
    eigenvalues, vectors = hermitian_eig(cert.matrix)
    top = float(np.max(np.abs(eigenvalues)))
    tol = settings.identity_tol
    if np.any(np.abs(eigenvalues - top) <= tol):
        chosen = np.abs(eigenvalues - top) <= tol
        eigenvalue = top
    else:
        chosen = np.abs(eigenvalues + top) <= tol
        eigenvalue = -top
    basis = vectors[:, chosen].real
    note = None
    if basis.shape[1] == 1:
        a = basis[:, 0]
    else:
        candidates = [basis[:, k] for k in range(basis.shape[1])]
        size = basis.shape[0]
        for seed in [np.ones(size)] + list(np.eye(size)):
            projected = basis @ (basis.T @ seed)
            norm = np.linalg.norm(projected)
            if norm > tol:
                candidates.append(projected / norm)
        a = max(candidates, key=lambda v: float(np.min(np.abs(v))))
        note = f"principal eigenspace has dimension {basis.shape[1]}; chose max-min-amplitude vector"
        logger.warning(note)
    if a.sum() < 0:
        a = -a
    return PrincipalEigenvector(
        eigenvalue=eigenvalue, amplitudes=a, multiplicity=int(chosen.sum()), note=note
    )


def adversary_progress_check(alg: QueryAlgorithm, cert: AdversaryCertificate) -> ExperimentReport:
    """Delta_t = ||Gamma|| - |<psi^t|(I (x) Gamma)|psi^t>| for psi^t = sum_x a_x psi_x^t (x) |x>.

    Asserts Delta_0 = 0, the per-step bound 2 max_i ||Gamma_i|| and the final
    condition p <= 1/2 + sqrt(Delta_T / (2 ||Gamma||)) for the success p
    under the distribution a_x^2.
    """
    if alg.m != 2 or alg.n != cert.f.n:
        raise ValidationError("algorithm must be Boolean with the same n as the certificate", "alg")
    started = time.perf_counter()
    tol = settings.identity_tol
    ratio = adversary_ratio(cert)
    principal = principal_eigenvector(cert)
    a = principal.amplitudes
    histories = evolve(alg, cert.bits())

    deltas = []
    for states in histories:
        overlaps = states.conj().T @ states
        value = complex(a @ (cert.matrix * overlaps) @ a)
        deltas.append(ratio.norm - abs(value))

    accept = register_probabilities(histories[-1], alg.n, alg.m, alg.d, "value")[1]
    outputs = cert.f.table[list(cert.support)]
    per_input = np.where(outputs == 1, accept, 1 - accept)
    success = float(np.dot(principal.distribution, per_input))

    report = ExperimentReport(
        command="adv progress",
        parameters={"f": cert.f.name, "support": len(cert.support), "algorithm": alg.name},
        tolerances=settings.tolerances(),
    )
    report.assertions.append(Assertion.at_most("initial progress", abs(deltas[0]), 0.0, tol))
    step = 2 * ratio.max_punctured_norm
    for t in range(alg.T):
        report.assertions.append(
            Assertion.at_most(f"step {t}->{t + 1}", deltas[t + 1], deltas[t] + step, tol)
        )
    final_bound = 0.5 + math.sqrt(max(deltas[-1], 0.0) / (2 * ratio.norm))
    report.assertions.append(Assertion.at_most("final condition", success, final_bound, tol))
    report.results = {
        "deltas": deltas,
        "success": success,
        "final_bound": final_bound,
        "adversary_value": ratio.value,
        "eigenvalue": principal.eigenvalue,
    }
    if principal.note:
        report.notes.append(principal.note)
    report.elapsed_s = time.perf_counter() - started
    return report


# === Hardness graphs ===


class BipartiteHardnessGraph(BaseModel):
    """Edges (x, y) with x in V_0 and y in V_1, inputs as table indices."""

    n: int
    zeros: list[int]
    ones: list[int]
    edges: list[tuple[int, int]]
    name: str | None = None

    def degree_tables(self):
        """d(x), d(y) and the punctured degrees d(x,i), d(y,i) as dicts of arrays."""
        dx = {x: 0 for x in self.zeros}
        dy = {y: 0 for y in self.ones}
        dxi = {x: np.zeros(self.n, dtype=np.int64) for x in self.zeros}
        dyi = {y: np.zeros(self.n, dtype=np.int64) for y in self.ones}
        bits = np.arange(self.n)
        for x, y in self.edges:
            diff = ((x ^ y) >> bits) & 1
            dx[x] += 1
            dy[y] += 1
            dxi[x] += diff
            dyi[y] += diff
        return dx, dy, dxi, dyi


class AmbainisResult(BaseModel):
    value: float | None
    min_degree_product: int
    max_punctured_product: int
    assertions: list[Assertion] = Field(default_factory=list)
    notes: list[str] = Field(default_factory=list)


def hardness_graph_certificate(g: BipartiteHardnessGraph, f: BooleanFunction) -> AdversaryCertificate:
    """0/1 adjacency matrix of the graph as an adversary certificate."""
    support = tuple(g.zeros) + tuple(g.ones)
    if len(support) > MAX_CERTIFICATE_SUPPORT:
        raise CapExceededError("|V_0|+|V_1|", len(support), MAX_CERTIFICATE_SUPPORT)
    position = {x: k for k, x in enumerate(support)}
    gamma = np.zeros((len(support), len(support)))
    for x, y in g.edges:
        gamma[position[x], position[y]] = gamma[position[y], position[x]] = 1.0
    return AdversaryCertificate(f=f, support=support, matrix=gamma)


def ambainis_bound(g: BipartiteHardnessGraph, f: BooleanFunction = None) -> AmbainisResult:
    """sqrt(min d(x) d(y) / max d(x,i) d(y,i)), minimum over edges, maximum over edges with x_i != y_i.

    With ``f`` given and a small enough graph, the value is cross-checked
    against the adversary ratio of the 0/1 certificate.
    """
    dx, dy, dxi, dyi = g.degree_tables()
    isolated = [v for v, k in {**dx, **dy}.items() if k == 0]
    if isolated or not g.edges:
        return AmbainisResult(
            value=None,
            min_degree_product=0,
            max_punctured_product=0,
            notes=[f"isolated vertices {isolated[:5]}: bound vacuous"],
        )
    low = min(dx[x] * dy[y] for x, y in g.edges)
    high = 0
    for x, y in g.edges:
        diff = ((x ^ y) >> np.arange(g.n)) & 1
        products = dxi[x] * dyi[y] * diff
        high = max(high, int(products.max()))
    value = math.sqrt(low / high)
    result = AmbainisResult(value=value, min_degree_product=low, max_punctured_product=high)
    if f is not None and len(g.zeros) + len(g.ones) <= MAX_CERTIFICATE_SUPPORT:
        ratio = adversary_ratio(hardness_graph_certificate(g, f)).value
        result.assertions.append(
            Assertion.at_most("Ambainis <= certificate ratio", value, ratio, settings.identity_tol)
        )
    logger.info(f"Ambainis bound for {g.name or 'graph'}: {value:.6g}")
    return result


def or_hardness_graph(n: int) -> BipartiteHardnessGraph:
    ones = [1 << i for i in range(n)]
    return BipartiteHardnessGraph(
        n=n, zeros=[0], ones=ones, edges=[(0, y) for y in ones], name=f"OR_{n}"
    )


def _cycle_mask(cycle: tuple[int, ...], position: dict) -> int:
    mask = 0
    for a, b in zip(cycle, cycle[1:] + cycle[:1], strict=True):
        mask |= 1 << position[(min(a, b), max(a, b))]
    return mask


def connectivity_cycle_graph(v: int) -> BipartiteHardnessGraph:
    """Two disjoint (v/2)-cycles against Hamiltonian cycles.

    A two-cycle graph x is joined to every Hamiltonian cycle obtained by
    deleting one edge (a,b) from each cycle and reconnecting crosswise.
    """
    if v % 2 or not 6 <= v <= 10:
        raise ValidationError(f"cycle construction needs even v in 6..10, got v={v}", field="v")
    position = {e: k for k, e in enumerate(connectivity_edges(v))}
    half = v // 2
    zeros, ones, edges = [], set(), set()
    seen = set()
    for first in itertools.combinations(range(2, v + 1), half - 1):
        left = (1,) + first
        right = tuple(u for u in range(1, v + 1) if u not in left)
        for p in itertools.permutations(left[1:]):
            if p[0] > p[-1]:
                continue
            c1 = (1,) + p
            for q in itertools.permutations(right[1:]):
                if q[0] > q[-1]:
                    continue
                c2 = (right[0],) + q
                x = _cycle_mask(c1, position) | _cycle_mask(c2, position)
                if x in seen:
                    continue
                seen.add(x)
                zeros.append(x)
                for s in range(half):
                    a, b = c1[s], c1[(s + 1) % half]
                    for r in range(half):
                        c, d = c2[r], c2[(r + 1) % half]
                        removed = x & ~(1 << position[(min(a, b), max(a, b))])
                        removed &= ~(1 << position[(min(c, d), max(c, d))])
                        for u, w in (((a, c), (b, d)), ((a, d), (b, c))):
                            y = removed
                            y |= 1 << position[(min(u), max(u))]
                            y |= 1 << position[(min(w), max(w))]
                            ones.add(y)
                            edges.add((x, y))
    return BipartiteHardnessGraph(
        n=len(position),
        zeros=sorted(zeros),
        ones=sorted(ones),
        edges=sorted(edges),
        name=f"connectivity_cycles_v{v}",
    )


def ss06_check(a) -> Assertion:
    """||A|| <= max over A_xy = 1 of sqrt(r_x c_y) for a symmetric 0/1 matrix."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or not np.all((a == 0) | (a == 1)):
        raise ValidationError("expected a square 0/1 matrix", field="matrix")
    if np.any(a != a.T):
        raise ValidationError("expected a symmetric matrix", field="matrix")
    rows, cols = a.sum(axis=1), a.sum(axis=0)
    xs, ys = np.nonzero(a)
    bound = float(np.sqrt(rows[xs] * cols[ys]).max()) if xs.size else 0.0
    return Assertion.at_most("norm vs degree bound", spectral_norm(a), bound, settings.identity_tol)


# === Vector realizations ===


class VectorRealization(BaseModel):
    """Vectors w^(x,i), shape (2^n, n, d); absent entries are zero."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    f: BooleanFunction
    d: int = Field(ge=1)
    vectors: np.ndarray
    notes: list[str] = Field(default_factory=list)

    @model_validator(mode="after")
    def check_shape(self):
        self.vectors = np.asarray(self.vectors, dtype=np.complex128)
        expected = (self.f.size, self.f.n, self.d)
        if self.vectors.shape != expected:
            raise ValidationError(f"vectors have shape {self.vectors.shape}, expected {expected}", "vectors")
        return self

    @property
    def n(self) -> int:
        return self.f.n

    def input_values(self) -> np.ndarray:
        """sum_i ||w^(x,i)||^2 for every input."""
        return np.sum(np.abs(self.vectors) ** 2, axis=(1, 2))

    def gram(self, i: int) -> np.ndarray:
        """V^(i)_{x,y} = <w^(x,i), w^(y,i)> (i is 1-based)."""
        w = self.vectors[:, i - 1, :]
        return w.conj() @ w.T


class RealizationReport(BaseModel):
    feasible: bool
    T: float
    T0: float
    T1: float
    max_deviation: float
    violations: list[tuple[int, int, float]] = Field(
        default_factory=list, description="(x, y, deviation) for the worst infeasible pairs"
    )
    violation_count: int = 0


def _difference_masks(n: int) -> np.ndarray:
    """masks[i][x, y] is True iff x_i != y_i."""
    idx = np.arange(2**n)
    return np.array([((idx[:, None] ^ idx[None, :]) >> i) & 1 for i in range(n)], dtype=bool)


def _pair_sums(gram_matrices: list[np.ndarray], n: int) -> np.ndarray:
    masks = _difference_masks(n)
    return sum(np.where(masks[i], g, 0) for i, g in enumerate(gram_matrices))


def _split_values(values: np.ndarray, f: BooleanFunction) -> tuple[float, float, float]:
    zeros, ones = values[f.table == 0], values[f.table == 1]
    t0 = float(zeros.max()) if zeros.size else 0.0
    t1 = float(ones.max()) if ones.size else 0.0
    return float(values.max()), t0, t1


def _violations(sums: np.ndarray, f: BooleanFunction, tol: float, limit: int = 20):
    crossing = f.table[:, None] != f.table[None, :]
    deviation = np.where(crossing, np.abs(sums - 1), 0.0)
    deviation = np.maximum(deviation, deviation.T)
    xs, ys = np.nonzero(np.triu(deviation > tol))
    order = np.argsort(-deviation[xs, ys])
    worst = [(int(xs[k]), int(ys[k]), float(deviation[xs[k], ys[k]])) for k in order[:limit]]
    return float(deviation.max(initial=0.0)), worst, int(xs.size)


def realization_check(w: VectorRealization, tol: float | None = None) -> RealizationReport:
    """Feasibility sum_{x_i != y_i} <w^(x,i), w^(y,i)> = 1 on every pair with f(x) != f(y)."""
    tol = settings.identity_tol if tol is None else tol
    sums = _pair_sums([w.gram(i) for i in range(1, w.n + 1)], w.n)
    worst, violations, count = _violations(sums, w.f, tol)
    value, t0, t1 = _split_values(w.input_values(), w.f)
    return RealizationReport(
        feasible=count == 0,
        T=value,
        T0=t0,
        T1=t1,
        max_deviation=worst,
        violations=violations,
        violation_count=count,
    )


def rebalance(w: VectorRealization) -> VectorRealization:
    """Scale 0-inputs by (T1/T0)^(1/4) and 1-inputs by (T0/T1)^(1/4); value becomes sqrt(T0 T1)."""
    _, t0, t1 = _split_values(w.input_values(), w.f)
    if t0 == 0 or t1 == 0:
        note = "T0 or T1 is zero: realization returned unchanged"
        logger.warning(note)
        return w.model_copy(update={"notes": w.notes + [note]})
    scale = np.where(w.f.table == 0, (t1 / t0) ** 0.25, (t0 / t1) ** 0.25)
    return VectorRealization(f=w.f, d=w.d, vectors=w.vectors * scale[:, None, None], notes=w.notes)


def or_realization(n: int) -> VectorRealization:
    """d = 1; w^(x,i) = 1 iff x = 0^n, or i is the first index with x_i = 1."""
    f = make_named("OR", n=n)
    vectors = np.zeros((f.size, n, 1), dtype=np.complex128)
    vectors[0, :, 0] = 1.0
    for x in range(1, f.size):
        first = (x & -x).bit_length() - 1
        vectors[x, first, 0] = 1.0
    return VectorRealization(f=f, d=1, vectors=vectors)


def _bfs_parents(adjacency: list[list[int]], source: int) -> dict[int, int]:
    parents = {source: source}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for w in adjacency[u]:
            if w not in parents:
                parents[w] = u
                queue.append(w)
    return parents


def connectivity_realization(v: int) -> VectorRealization:
    """st-connectivity realization with s = 1 and every t in 2..v.

    Vectors live on |k>|t>, vertex k in 1..v and target t in 2..v. A connected
    graph puts |first endpoint>|t> on each edge of the BFS path from 1 to t. A
    disconnected graph with component C of vertex 1 puts (|in> - |out>)|t> /
    (v - |C|) on each boundary edge of C, for every t outside C.
    """
    if not 3 <= v <= settings.connectivity_max_v:
        raise ValidationError(f"need 3 <= v <= {settings.connectivity_max_v}, got v={v}", "v")
    f = make_named("CONNECTIVITY", v=v)
    edges = connectivity_edges(v)
    position = {e: k for k, e in enumerate(edges)}
    reach = reachability(v)
    dim = v * (v - 1)

    def slot(k: int, t: int) -> int:
        return (k - 1) * (v - 1) + (t - 2)

    vectors = np.zeros((f.size, len(edges), dim), dtype=np.complex128)
    for x in range(f.size):
        if f.table[x]:
            adjacency = [[] for _ in range(v + 1)]
            for k, (a, b) in enumerate(edges):
                if x >> k & 1:
                    adjacency[a].append(b)
                    adjacency[b].append(a)
            parents = _bfs_parents(adjacency, 1)
            for t in range(2, v + 1):
                node = t
                while node != 1:
                    parent = parents[node]
                    vectors[x, position[(min(node, parent), max(node, parent))], slot(parent, t)] += 1
                    node = parent
        else:
            inside = {k + 1 for k in np.flatnonzero(reach[x, 0])}
            outside = [t for t in range(2, v + 1) if t not in inside]
            weight = 1 / (v - len(inside))
            for k, (a, b) in enumerate(edges):
                if (a in inside) == (b in inside):
                    continue
                u_in, u_out = (a, b) if a in inside else (b, a)
                for t in outside:
                    vectors[x, k, slot(u_in, t)] += weight
                    vectors[x, k, slot(u_out, t)] -= weight
    logger.info(f"Connectivity realization v={v}: {f.size} inputs, dimension {dim}")
    return VectorRealization(f=f, d=dim, vectors=vectors)


def connectivity_value_rows(check: RealizationReport, v: int) -> list[Assertion]:
    """T0 <= 2(v-1); T1 is at most the path-graph distance sum v(v-1)/2, which is <= (v-1)(v-2) from v = 4."""
    tol = settings.identity_tol
    rows = [
        Assertion.at_most("T0 <= 2(v-1)", check.T0, 2 * (v - 1), tol),
        Assertion.at_most("T1 <= v(v-1)/2", check.T1, v * (v - 1) / 2, tol),
    ]
    if v >= 4:
        rows.append(Assertion.at_most("T1 <= (v-1)(v-2)", check.T1, (v - 1) * (v - 2), tol))
    return rows


def realization_from_gram(matrices: list[np.ndarray], f: BooleanFunction) -> VectorRealization:
    """Factor PSD matrices V^(i) into vectors with <w^(x,i), w^(y,i)> = V^(i)_{x,y}."""
    if len(matrices) != f.n:
        raise ValidationError(f"expected {f.n} matrices, got {len(matrices)}", field="matrices")
    factors = [gram_vectors_from_psd(v) for v in matrices]
    d = max(1, max(w.shape[1] for w in factors))
    vectors = np.zeros((f.size, f.n, d), dtype=np.complex128)
    for i, w in enumerate(factors):
        vectors[:, i, : w.shape[1]] = w
    return VectorRealization(f=f, d=d, vectors=vectors)


def _complement(f: BooleanFunction) -> np.ndarray:
    return np.arange(f.size) ^ (f.size - 1)


def negate_certificate(cert: AdversaryCertificate, complement_inputs: bool = False) -> AdversaryCertificate:
    """Certificate for NOT f, or for x -> NOT f(NOT x) with ``complement_inputs`` (OR <-> AND)."""
    g = cert.f.negate()
    support = cert.support
    if complement_inputs:
        flip = _complement(cert.f)
        g = BooleanFunction(n=cert.f.n, table=g.table[flip], name=_dual_name(cert.f))
        support = tuple(int(flip[x]) for x in support)
    return AdversaryCertificate(f=g, support=support, matrix=cert.matrix)


def negate_realization(w: VectorRealization, complement_inputs: bool = False) -> VectorRealization:
    """Realization for NOT f (T0 and T1 swap); optionally relabel x -> NOT x as well."""
    g = w.f.negate()
    vectors = w.vectors
    if complement_inputs:
        flip = _complement(w.f)
        g = BooleanFunction(n=w.f.n, table=g.table[flip], name=_dual_name(w.f))
        vectors = vectors[flip]
    return VectorRealization(f=g, d=w.d, vectors=vectors, notes=w.notes)


def _dual_name(f: BooleanFunction) -> str | None:
    if f.name and f.name.startswith("OR_"):
        return "AND_" + f.name[3:]
    if f.name and f.name.startswith("AND_"):
        return "OR_" + f.name[4:]
    return f"DUAL_{f.name}" if f.name else None


def weak_duality_check(cert: AdversaryCertificate, w: VectorRealization) -> Assertion:
    """adversary_ratio(Gamma) <= value(rebalance(W))."""
    if cert.f != w.f:
        raise ValidationError("certificate and realization are for different functions", "f")
    balanced = realization_check(rebalance(w))
    return Assertion.at_most(
        "certificate ratio <= balanced realization value", adversary_ratio(cert).value, balanced.T, 1e-6
    )


# === Dual SDP ===


class FeasibilityReport(BaseModel):
    feasible: bool
    objective: float
    min_eigenvalues: list[float]
    max_affine_violation: float
    violations: list[tuple[int, int, float]]
    assertions: list[Assertion]


def dual_feasibility(
    matrices: list[np.ndarray], f: BooleanFunction, affine_tol: float = None, psd_tol: float = None
) -> FeasibilityReport:
    """Check V^(i) PSD and sum_{x_i != y_i} V^(i)_{x,y} = 1 on pairs with f(x) != f(y)."""
    affine_tol = settings.gram_tol if affine_tol is None else affine_tol
    psd_tol = settings.psd_tol if psd_tol is None else psd_tol
    if len(matrices) != f.n or any(np.shape(v) != (f.size, f.size) for v in matrices):
        raise ValidationError(f"expected {f.n} matrices of size {f.size}", field="matrices")
    matrices = [np.asarray(v, dtype=np.complex128) for v in matrices]
    min_eigs = [float(hermitian_eig(v, tol=max(affine_tol, settings.structure_tol))[0][0]) for v in matrices]
    worst, violations, count = _violations(_pair_sums(matrices, f.n), f, affine_tol)
    objective = float(np.max(sum(np.real(np.diag(v)) for v in matrices)))
    assertions = [
        Assertion.at_least(f"V^({i + 1}) PSD", e, 0.0, psd_tol) for i, e in enumerate(min_eigs)
    ]
    assertions.append(Assertion.at_most("affine constraints", worst, 0.0, affine_tol))
    return FeasibilityReport(
        feasible=all_passed(assertions),
        objective=objective,
        min_eigenvalues=min_eigs,
        max_affine_violation=worst,
        violations=violations,
        assertions=assertions,
    )


class SDPResult(BaseModel):
    """Witness of the dual adversary SDP and certificate values around it."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    value: float
    status: str
    optimal: bool
    solver: str
    matrices: list[np.ndarray]
    dual_certificate_value: float | None = None
    primal_certificate_value: float | None = None
    feasibility: FeasibilityReport | None = None


def _pick_solver() -> str:
    solver = settings.sdp_solver
    if solver not in cp.installed_solvers():
        logger.warning(f"SDP solver {solver} is not installed; falling back to SCS")
        solver = "SCS"
    return solver


def solve_dual_sdp(f: BooleanFunction) -> SDPResult:
    """min t s.t. diag(sum_i V_i) <= t, sum_{x_i != y_i} V_i[x,y] = 1 on pairs with f(x) != f(y), V_i PSD.

    The dual multipliers of the diagonal and affine constraints give a primal
    adversary matrix, evaluated with ``adversary_ratio``; the witness
    matrices give the dual certificate value max_x sum_i V_i[x,x].

    Raises:
        CapExceededError: n above ``settings.sdp_max_n``
        SolverError: the solver produced no usable point
    """
    if f.n > settings.sdp_max_n:
        raise CapExceededError("n", f.n, settings.sdp_max_n)
    size = f.size
    masks = _difference_masks(f.n)
    pairs = [
        (x, y) for x in range(size) for y in range(x + 1, size) if f.table[x] != f.table[y]
    ]
    matrices = [cp.Variable((size, size), symmetric=True) for _ in range(f.n)]
    t = cp.Variable()
    diagonal = sum(cp.diag(v) for v in matrices) <= t
    affine = [
        sum(matrices[i][x, y] for i in range(f.n) if masks[i][x, y]) == 1 for x, y in pairs
    ]
    constraints = [diagonal, *affine] + [v >> 0 for v in matrices]
    problem = cp.Problem(cp.Minimize(t), constraints)
    solver = _pick_solver()
    started = time.perf_counter()
    try:
        problem.solve(solver=solver)
    except cp.error.SolverError as e:
        raise SolverError(f"{solver} failed on the dual SDP: {e}", status="solver_error")
    status = problem.status
    logger.info(
        f"Dual SDP for {f.name or 'f'}: status {status}, value {problem.value}, "
        f"{time.perf_counter() - started:.2f}s"
    )
    if status not in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE) or matrices[0].value is None:
        raise SolverError(f"dual SDP ended with status {status}", status=str(status))
    if status == cp.OPTIMAL_INACCURATE:
        logger.warning("Dual SDP solution is inaccurate; flagged as non-optimal")

    witness = [np.asarray(v.value, dtype=float) for v in matrices]
    feasibility = dual_feasibility(witness, f, affine_tol=1e-6, psd_tol=1e-6)
    result = SDPResult(
        value=float(problem.value),
        status=str(status),
        optimal=status == cp.OPTIMAL,
        solver=solver,
        matrices=witness,
        dual_certificate_value=feasibility.objective,
        feasibility=feasibility,
    )
    if pairs:
        result.primal_certificate_value = _certificate_from_multipliers(f, diagonal, affine, pairs)
    return result


def _certificate_from_multipliers(f, diagonal, affine, pairs) -> float | None:
    """Adversary ratio of Gamma'_{x,y} = lambda_{x,y} / sqrt(p_x p_y) on the support of p."""
    p = np.abs(np.asarray(diagonal.dual_value, dtype=float).ravel())
    if p.sum() <= 0:
        return None
    p = p / p.sum()
    support = np.flatnonzero(p > SUPPORT_CUTOFF)
    position = {int(x): k for k, x in enumerate(support)}
    gamma = np.zeros((support.size, support.size))
    for (x, y), constraint in zip(pairs, affine, strict=True):
        if x in position and y in position:
            weight = float(np.real(constraint.dual_value)) / math.sqrt(p[x] * p[y])
            gamma[position[x], position[y]] = gamma[position[y], position[x]] = weight
    if not np.any(gamma):
        return None
    cert = AdversaryCertificate(f=f, support=tuple(int(x) for x in support), matrix=gamma)
    return adversary_ratio(cert).value


def sdp_report(f: BooleanFunction) -> ExperimentReport:
    started = time.perf_counter()
    result = solve_dual_sdp(f)
    report = ExperimentReport(
        command="sdp",
        parameters={"f": f.name, "n": f.n, "solver": result.solver},
        tolerances=settings.tolerances(),
    )
    report.assertions.extend(result.feasibility.assertions)
    if result.primal_certificate_value is not None:
        report.assertions.append(
            Assertion.at_most(
                "primal <= dual certificate",
                result.primal_certificate_value,
                result.dual_certificate_value,
                1e-6,
            )
        )
    if not result.optimal:
        report.notes.append(f"solver status {result.status}: witness is not certified optimal")
    report.results = {
        "value": result.value,
        "status": result.status,
        "optimal": result.optimal,
        "dual_certificate_value": result.dual_certificate_value,
        "primal_certificate_value": result.primal_certificate_value,
    }
    report.elapsed_s = time.perf_counter() - started
    return report


def realization_report(w: VectorRealization, balance: bool = True) -> ExperimentReport:
    """Feasibility and values of a realization, optionally after rebalancing."""
    check = realization_check(w)
    report = ExperimentReport(
        command="adv realize",
        parameters={"f": w.f.name, "n": w.n, "d": w.d},
        tolerances=settings.tolerances(),
        notes=list(w.notes),
    )
    tol = settings.identity_tol
    report.assertions.append(Assertion.at_most("feasibility", check.max_deviation, 0.0, tol))
    report.results = {"T": check.T, "T0": check.T0, "T1": check.T1, "violations": check.violations}
    if balance and check.feasible:
        balanced = rebalance(w)
        after = realization_check(balanced)
        target = math.sqrt(check.T0 * check.T1)
        report.assertions.append(
            Assertion.at_most("feasibility after rebalance", after.max_deviation, 0.0, tol)
        )
        report.assertions.append(Assertion.at_most("balanced value", after.T, target, tol))
        report.results["balanced_T"] = after.T
        report.notes.extend(balanced.notes[len(w.notes):])
    return report