"""The polynomial method.

Acceptance polynomials of simulated algorithms, exact and approximate degrees,
symmetrisation, degree lower bounds for univariate polynomials, dual
polynomials and k-wise independent distributions.

Dual polynomials live on {-1,1}^n with bit b encoded as (-1)^b; everything else
uses 0/1 inputs in the table order of ``boolfn``.
"""

import itertools
import logging
import math
from collections.abc import Sequence

import numpy as np
from numpy.polynomial import Chebyshev, Polynomial
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy.optimize import linprog

from .boolfn import (
    BlockSensitivity,
    BooleanFunction,
    MultilinearPolynomial,
    block_sensitivity,
    exact_degree,
    input_bits,
    popcount,
)
from .errors import CapExceededError, InvariantViolation, SolverError, ValidationError
from .models import Assertion, all_passed
from .qsim import QueryAlgorithm, acceptance_probabilities
from .settings import settings

logger = logging.getLogger(__name__)

__all__ = [
    "ApproxDegreeResult",
    "DualPolynomial",
    "DualPolynomialReport",
    "EZRCBound",
    "InputDistribution",
    "UnivariatePolynomial",
    "acceptance_polynomial",
    "approx_degree",
    "bs_restriction",
    "chebyshev",
    "chebyshev_or_witness",
    "distinguishing_advantage",
    "dual_polynomial_check",
    "even_parity_distribution",
    "exact_degree",
    "ez_rc_degree_bound",
    "k_wise_independence",
    "lp_dual_polynomial",
    "or_witness_check",
    "project_high_degree",
    "sign_changes",
    "symmetric_approx_degree",
    "symmetrize",
]

# coefficients below this are dropped when computing a univariate degree
TRIM_TOL = 1e-10
# margin by which the optimum at adeg-1 must exceed eps
LP_GAP = 1e-7
DERIVATIVE_GRID = 20001


# === Domain types ===


class UnivariatePolynomial(BaseModel):
    """Real polynomial c_0 + c_1 z + ... + c_d z^d."""

    coeffs: tuple[float, ...] = (0.0,)

    @field_validator("coeffs", mode="before")
    @classmethod
    def coerce(cls, v):
        values = [float(c) for c in np.asarray(v, dtype=float).ravel()]
        return tuple(values) if values else (0.0,)

    @classmethod
    def from_numpy(cls, p: Polynomial) -> "UnivariatePolynomial":
        return cls(coeffs=p.convert(kind=Polynomial, domain=[-1, 1], window=[-1, 1]).coef)

    @property
    def poly(self) -> Polynomial:
        return Polynomial(self.coeffs)

    @property
    def degree(self) -> int:
        support = np.flatnonzero(np.abs(self.coeffs) > TRIM_TOL)
        return int(support[-1]) if support.size else 0

    def __call__(self, z):
        return self.poly(np.asarray(z, dtype=float))

    def derivative(self) -> "UnivariatePolynomial":
        return UnivariatePolynomial(coeffs=self.poly.deriv().coef)

    def __add__(self, other: "UnivariatePolynomial") -> "UnivariatePolynomial":
        return UnivariatePolynomial.from_numpy(self.poly + other.poly)

    def __mul__(self, scalar: float) -> "UnivariatePolynomial":
        return UnivariatePolynomial(coeffs=np.asarray(self.coeffs) * scalar)

    __rmul__ = __mul__


class InputDistribution(BaseModel):
    """Probability weights over {0,1}^n in table order."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    n: int = Field(ge=1)
    weights: np.ndarray
    name: str | None = None

    @field_validator("weights", mode="before")
    @classmethod
    def coerce_weights(cls, v):
        w = np.array(v, dtype=float).ravel()
        w.flags.writeable = False
        return w

    @model_validator(mode="after")
    def check_weights(self):
        w = self.weights
        if w.size != 2**self.n:
            raise ValidationError(f"expected 2^{self.n} weights, got {w.size}", field="weights")
        if np.any(w < 0):
            raise ValidationError("distribution weights must be nonnegative", field="weights")
        if abs(w.sum() - 1) > 1e-12:
            raise ValidationError(f"weights sum to {w.sum():.15g}, not 1", field="weights")
        return self

    @classmethod
    def uniform(cls, n: int) -> "InputDistribution":
        return cls(n=n, weights=np.full(2**n, 2.0**-n), name=f"uniform_{n}")

    @classmethod
    def normalized(cls, n: int, weights, name: str = None) -> "InputDistribution":
        """Accept weights summing to 1 within 1e-6 and rescale them exactly."""
        w = np.asarray(weights, dtype=float).ravel()
        if abs(w.sum() - 1) > 1e-6:
            raise ValidationError(f"weights sum to {w.sum():.9g}, not 1", field="weights")
        return cls(n=n, weights=w / w.sum(), name=name)

    def expectation(self, values) -> float:
        return float(np.dot(self.weights, np.asarray(values, dtype=float)))

    def marginal(self, coords: Sequence[int]) -> np.ndarray:
        """Distribution of (x_i)_{i in coords}, 1-based coords, first coordinate least significant."""
        idx = np.arange(2**self.n)
        compressed = np.zeros_like(idx)
        for k, i in enumerate(coords):
            compressed |= ((idx >> (i - 1)) & 1) << k
        return np.bincount(compressed, weights=self.weights, minlength=2 ** len(coords))

    def is_k_wise_independent(self, k: int, tol: float = 1e-12) -> bool:
        """Every marginal on k coordinates (hence on fewer) is uniform within ``tol``."""
        k = min(k, self.n)
        if k <= 0:
            return True
        for coords in itertools.combinations(range(1, self.n + 1), k):
            if np.max(np.abs(self.marginal(coords) - 2.0**-k)) > tol:
                return False
        return True


class DualPolynomial(BaseModel):
    """Values phi(x) on {-1,1}^n, stored in table order of the 0/1 preimage."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    n: int = Field(ge=0)
    values: np.ndarray

    @model_validator(mode="after")
    def check_length(self):
        self.values = np.asarray(self.values, dtype=float).ravel()
        if self.values.size != 2**self.n:
            raise ValidationError(f"expected 2^{self.n} values, got {self.values.size}", "values")
        return self

    @property
    def normalization(self) -> float:
        return float(np.abs(self.values).sum())

    def correlation(self, f: BooleanFunction) -> float:
        return float(np.dot(self.values, plus_minus(f)))


class DualPolynomialReport(BaseModel):
    correlation: float
    normalization: float
    max_low_degree_pairing: float
    degree: int
    assertions: list[Assertion]

    @property
    def ok(self) -> bool:
        return all_passed(self.assertions)

    @property
    def implied_adeg(self) -> int | None:
        """Lower bound on adeg(f) certified by a passing check."""
        return self.degree if self.ok else None


class ApproxDegreeResult(BaseModel):
    """Approximate degree with its witness and the LP optima of the scan."""

    adeg: int
    eps: float
    witness: MultilinearPolynomial
    optima: list[float] = Field(description="Optimal max error for d = 0..adeg")
    assertions: list[Assertion]


class SymmetricDegreeResult(BaseModel):
    adeg: int
    eps: float
    witness: UnivariatePolynomial
    optima: list[float]
    assertions: list[Assertion]


class EZRCBound(BaseModel):
    """Degree lower bound for a univariate polynomial bounded on integer points."""

    bound: float | None
    max_derivative: float
    degree: int
    assertions: list[Assertion]


# === Helpers ===


def plus_minus(f: BooleanFunction) -> np.ndarray:
    """f in the +-1 encoding: (-1)^f(x)."""
    return 1.0 - 2.0 * f.table.astype(float)


def walsh_hadamard(values) -> np.ndarray:
    """hat(S) = sum_x v(x) chi_S(x) with chi_S(x) = prod_{i in S} (-1)^{x_i}; S as a bitmask."""
    out = np.array(values, dtype=float).ravel().copy()
    n = int(math.log2(out.size))
    for i in range(n):
        view = out.reshape(-1, 2, 2**i)
        a, b = view[:, 0, :].copy(), view[:, 1, :].copy()
        view[:, 0, :] = a + b
        view[:, 1, :] = a - b
    return out


def project_high_degree(values, d: int) -> np.ndarray:
    """Remove every character chi_S with |S| < d from ``values``."""
    spectrum = walsh_hadamard(values)
    spectrum[popcount(np.arange(spectrum.size)) < d] = 0.0
    return walsh_hadamard(spectrum) / spectrum.size


def sign_changes(values) -> int:
    """Number of strict sign changes along a sequence, zeros skipped."""
    signs = np.sign(np.asarray(values, dtype=float))
    signs = signs[signs != 0]
    return int(np.count_nonzero(signs[1:] != signs[:-1]))


def _monomial_matrix(n: int, d: int) -> tuple[np.ndarray, np.ndarray]:
    """M[x, S] = prod_{i in S} x_i for every subset S with |S| <= d."""
    subsets = np.flatnonzero(popcount(np.arange(2**n)) <= d)
    idx = np.arange(2**n)
    return ((idx[:, None] & subsets[None, :]) == subsets[None, :]).astype(float), subsets


def _solve_chebyshev_lp(design: np.ndarray, targets: np.ndarray, what: str):
    """min eps s.t. |design @ a - targets| <= eps, with free a."""
    rows, cols = design.shape
    ones = np.ones((rows, 1))
    a_ub = np.block([[design, -ones], [-design, -ones]])
    b_ub = np.concatenate([targets, -targets])
    cost = np.zeros(cols + 1)
    cost[-1] = 1.0
    bounds = [(None, None)] * cols + [(0, None)]
    result = linprog(cost, A_ub=a_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if result.status != 0:
        residual = None if result.x is None else float(np.max(a_ub @ result.x - b_ub))
        raise SolverError(f"{what}: {result.message}", status=str(result.status), residual=residual)
    return result.x[:-1], float(result.fun)


# === Acceptance polynomials ===


def acceptance_polynomial(alg: QueryAlgorithm, strict: bool = False) -> MultilinearPolynomial:
    """p(x) = Pr[value register reads 1 on x], interpolated exactly from the simulation.

    The degree is at most 2T. A violation means the simulator is wrong: it is
    logged, and raised as InvariantViolation when ``strict``.
    """
    if alg.m != 2:
        raise ValidationError("acceptance polynomials need m=2", field="m")
    if alg.n > settings.acceptance_max_n:
        raise CapExceededError("n", alg.n, settings.acceptance_max_n)
    p = MultilinearPolynomial.from_values(alg.n, acceptance_probabilities(alg))
    row = acceptance_degree_check(p, alg.T)
    if not row.passed:
        logger.error(f"Acceptance polynomial of {alg.name} has degree {row.measured:g} > 2T")
        if strict:
            raise InvariantViolation("acceptance polynomial degree exceeds 2T", T=alg.T)
    return p


def acceptance_degree_check(p: MultilinearPolynomial, T: int) -> Assertion:
    return Assertion.at_most("acceptance degree <= 2T", p.degree(tol=settings.identity_tol), 2 * T)


def distinguishing_advantage(
    alg: QueryAlgorithm, d0: InputDistribution, d1: InputDistribution
) -> float:
    """|E_{D0} p - E_{D1} p| for the acceptance polynomial p of ``alg``."""
    if not d0.n == d1.n == alg.n:
        raise ValidationError("distributions and algorithm disagree on n", field="n")
    values = acceptance_polynomial(alg).values()
    return abs(d0.expectation(values) - d1.expectation(values))


# === Approximate degree ===


def approx_degree(f: BooleanFunction, eps: float = 1 / 3) -> ApproxDegreeResult:
    """Smallest d such that some degree-d polynomial is within eps of f everywhere.

    Scans d = 0, 1, ... solving the epsilon-minimisation LP at each degree.

    Raises:
        CapExceededError: n above ``settings.adeg_max_n``
        SolverError: the LP did not reach optimality
    """
    if f.n > settings.adeg_max_n:
        raise CapExceededError("n", f.n, settings.adeg_max_n)
    targets = f.table.astype(float)
    optima = []
    for d in range(f.n + 1):
        design, subsets = _monomial_matrix(f.n, d)
        solution, optimum = _solve_chebyshev_lp(design, targets, f"approx_degree(d={d})")
        optima.append(optimum)
        logger.debug(f"adeg LP for {f.name or 'f'}: d={d}, optimum {optimum:.10g}")
        if optimum <= eps + settings.identity_tol:
            break
    coeffs = np.zeros(2**f.n)
    coeffs[subsets] = solution
    witness = MultilinearPolynomial(n=f.n, coeffs=coeffs)
    error = float(np.max(np.abs(witness.values() - targets)))
    assertions = [Assertion.at_most("witness error", error, eps, settings.identity_tol)]
    if d > 0:
        assertions.append(Assertion.at_least(f"optimum at d={d - 1}", optima[-2], eps + LP_GAP))
    logger.info(f"adeg_{eps:.4g}({f.name or 'f'}) = {d}")
    return ApproxDegreeResult(
        adeg=d, eps=eps, witness=witness, optima=optima, assertions=assertions
    )


def symmetric_approx_degree(n: int, values, eps: float = 1 / 3) -> SymmetricDegreeResult:
    """Approximate degree of a symmetric function given by its values on weights 0..n.

    By symmetrisation this equals the least degree of a univariate polynomial
    within eps of the values at the integers 0..n. The LP works in the
    Chebyshev basis on [0, n] to stay well conditioned.
    """
    targets = np.asarray(values, dtype=float).ravel()
    if targets.size != n + 1:
        raise ValidationError(f"expected {n + 1} values, got {targets.size}", field="values")
    points = np.arange(n + 1)
    optima = []
    for d in range(n + 1):
        design = np.column_stack(
            [Chebyshev.basis(j, domain=[0, max(n, 1)])(points) for j in range(d + 1)]
        )
        solution, optimum = _solve_chebyshev_lp(design, targets, f"symmetric LP (d={d})")
        optima.append(optimum)
        if optimum <= eps + settings.identity_tol:
            break
    witness = UnivariatePolynomial.from_numpy(Chebyshev(solution, domain=[0, max(n, 1)]))
    error = float(np.max(np.abs(witness(points) - targets)))
    assertions = [Assertion.at_most("witness error", error, eps, settings.identity_tol)]
    if d > 0:
        assertions.append(Assertion.at_least(f"optimum at d={d - 1}", optima[-2], eps + LP_GAP))
    return SymmetricDegreeResult(
        adeg=d, eps=eps, witness=witness, optima=optima, assertions=assertions
    )


# === Symmetrisation and degree bounds ===


def _falling(z: Polynomial | float, j: int):
    out = 1.0
    for r in range(j):
        out = out * (z - r)
    return out


def symmetrize(p: MultilinearPolynomial) -> UnivariatePolynomial:
    """p_sym(k) = average of p over inputs of Hamming weight k.

    Each monomial of degree j averages to k(k-1)...(k-j+1) / (n(n-1)...(n-j+1)).
    """
    weights = popcount(np.arange(2**p.n))
    k = Polynomial([0.0, 1.0])
    total = Polynomial([0.0])
    for j in range(p.n + 1):
        mass = float(p.coeffs[weights == j].sum())
        if mass:
            total = total + mass * _falling(k, j) / _falling(p.n, j)
    return UnivariatePolynomial(coeffs=total.coef)


def _max_abs_derivative(p: UnivariatePolynomial, lo: float, hi: float) -> float:
    dp = p.poly.deriv()
    candidates = [np.linspace(lo, hi, DERIVATIVE_GRID)]
    if dp.degree() >= 2:
        roots = dp.deriv().roots()
        real = roots[np.abs(roots.imag) < 1e-9].real
        candidates.append(real[(real >= lo) & (real <= hi)])
    return float(np.max(np.abs(dp(np.concatenate(candidates)))))


def ez_rc_degree_bound(
    p: UnivariatePolynomial, n: int, a: float, b: float, c: float
) -> EZRCBound:
    """deg(p) >= sqrt(c n / (c + b - a)) when p(k) in [a, b] on 0..n and max |p'| >= c on [0, n].

    The hypotheses are verified first; if either fails the bound is not
    emitted and the failing rows say why.
    """
    tol = settings.identity_tol
    values = p(np.arange(n + 1))
    max_derivative = _max_abs_derivative(p, 0.0, float(n))
    assertions = [
        Assertion.at_least("min p(k)", float(values.min()), a, tol),
        Assertion.at_most("max p(k)", float(values.max()), b, tol),
        Assertion.at_least("max |p'|", max_derivative, c, tol),
    ]
    if not all_passed(assertions):
        logger.info("EZ-RC hypotheses not met; no bound emitted")
        return EZRCBound(
            bound=None, max_derivative=max_derivative, degree=p.degree, assertions=assertions
        )
    bound = math.sqrt(c * n / (c + b - a))
    assertions.append(Assertion.at_least("degree vs bound", p.degree, bound, tol))
    return EZRCBound(
        bound=bound, max_derivative=max_derivative, degree=p.degree, assertions=assertions
    )


def bs_restriction(f: BooleanFunction, bs: BlockSensitivity = None) -> BooleanFunction:
    """g(y) = f(x xor union of B_j over y_j = 1) on the block-sensitivity witness.

    The result is negated if needed so that g(0) = 0; then g(e_j) = 1 for
    every block.
    """
    bs = bs or block_sensitivity(f)
    if bs.s == 0:
        raise ValidationError("f is constant: no sensitive blocks", field="f")
    x = sum(bit << i for i, bit in enumerate(bs.witness))
    masks = np.array([sum(1 << (i - 1) for i in block) for block in bs.blocks], dtype=np.int64)
    ys = input_bits(bs.s).astype(np.int64)
    flips = np.bitwise_xor.reduce(ys * masks[None, :], axis=1)
    table = f.table[x ^ flips]
    if table[0]:
        table = 1 - table
    return BooleanFunction(n=bs.s, table=table, name=f"bs_restriction({f.name})")


# === Chebyshev witnesses ===


def chebyshev(k: int) -> UnivariatePolynomial:
    """T_k in the power basis."""
    return UnivariatePolynomial.from_numpy(Chebyshev.basis(k))


def chebyshev_or_witness(n: int) -> UnivariatePolynomial:
    """q with q(0) in [0, 1/3] and q(k) in [2/3, 1] for k = 1..n, of degree O(sqrt(n)).

    q(z) = c - a T_k((n - z)/(n - 1)) with M = T_k(1 + 1/(n-1)) >= 3,
    a = 2/(3(M+1)) and c = 1 - a, so q(0) = 1/3 and q([1, n]) lies in [1 - 2a, 1].
    """
    if n < 1:
        raise ValidationError("n must be >= 1", field="n")
    if n == 1:
        return UnivariatePolynomial(coeffs=[0.0, 1.0])
    k, big = 0, 1.0
    while big < 3:
        k += 1
        big = float(Chebyshev.basis(k)(1 + 1 / (n - 1)))
    a = 2 / (3 * (big + 1))
    shift = Polynomial([n / (n - 1), -1 / (n - 1)])
    q = (1 - a) - a * Chebyshev.basis(k).convert(kind=Polynomial)(shift)
    logger.debug(f"Chebyshev OR witness n={n}: degree {k}, M={big:.6g}")
    return UnivariatePolynomial(coeffs=q.coef)


def or_witness_check(q: UnivariatePolynomial, n: int) -> list[Assertion]:
    """Box constraints of an OR approximation at the integers 0..n plus the degree budget."""
    tol = settings.identity_tol
    values = q(np.arange(n + 1))
    rows = [
        Assertion.at_most("degree", q.degree, math.ceil(math.sqrt(6 * n))),
        Assertion.at_least("q(0) >= 0", float(values[0]), 0.0, tol),
        Assertion.at_most("q(0) <= 1/3", float(values[0]), 1 / 3, tol),
    ]
    if n >= 1:
        rows.append(Assertion.at_least("min q(1..n)", float(values[1:].min()), 2 / 3, tol))
        rows.append(Assertion.at_most("max q(1..n)", float(values[1:].max()), 1.0, tol))
    return rows


# === Dual polynomials ===


def dual_polynomial_check(phi: DualPolynomial, f: BooleanFunction, d: int) -> DualPolynomialReport:
    """Correlation > 1/3, unit l1 norm and pure high degree d; together they give adeg(f) >= d."""
    if phi.n != f.n:
        raise ValidationError(f"phi has n={phi.n}, f has n={f.n}", field="phi")
    tol = 1e-10
    correlation = phi.correlation(f)
    normalization = phi.normalization
    spectrum = walsh_hadamard(phi.values)
    low = popcount(np.arange(spectrum.size)) < d
    pairing = float(np.max(np.abs(spectrum[low]))) if low.any() else 0.0
    assertions = [
        Assertion.at_least("correlation", correlation, 1 / 3),
        Assertion.close_to("normalization", normalization, 1.0, tol),
        Assertion.at_most("pure high degree", pairing, 0.0, tol),
    ]
    return DualPolynomialReport(
        correlation=correlation,
        normalization=normalization,
        max_low_degree_pairing=pairing,
        degree=d,
        assertions=assertions,
    )


def lp_dual_polynomial(f: BooleanFunction, d: int) -> tuple[DualPolynomial, DualPolynomialReport]:
    """Best dual polynomial of pure high degree d for f, from the dual of the approximation LP.

    max sum_x phi(x) f(x) over sum_x |phi(x)| <= 1 and phi orthogonal to chi_S, |S| < d.
    """
    if f.n > settings.adeg_max_n:
        raise CapExceededError("n", f.n, settings.adeg_max_n)
    size = 2**f.n
    target = plus_minus(f)
    masks = np.arange(size)
    low = masks[popcount(masks) < d]
    chars = np.array([[(-1.0) ** bin(s & x).count("1") for x in range(size)] for s in low])
    # phi = u - v with u, v >= 0
    cost = np.concatenate([-target, target])
    a_ub = np.ones((1, 2 * size))
    a_eq = np.hstack([chars, -chars]) if low.size else None
    b_eq = np.zeros(low.size) if low.size else None
    result = linprog(
        cost, A_ub=a_ub, b_ub=[1.0], A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs"
    )
    if result.status != 0:
        raise SolverError(f"dual LP: {result.message}", status=str(result.status))
    phi = DualPolynomial(n=f.n, values=result.x[:size] - result.x[size:])
    report = dual_polynomial_check(phi, f, d)
    logger.info(f"Dual LP for {f.name or 'f'} at d={d}: correlation {report.correlation:.6g}")
    return phi, report


# === k-wise independence ===


def even_parity_distribution(n: int) -> InputDistribution:
    """Uniform over even-parity strings; (n-1)-wise independent."""
    even = (popcount(np.arange(2**n)) % 2 == 0).astype(float)
    return InputDistribution(n=n, weights=even / even.sum(), name=f"even_parity_{n}")


def k_wise_independence(dist: InputDistribution, tol: float = 1e-12) -> int:
    """Largest k such that ``dist`` is k-wise independent."""
    k = 0
    while k < dist.n and dist.is_k_wise_independent(k + 1, tol):
        k += 1
    return k


def degree_sandwich(f: BooleanFunction, eps: float = 1 / 3) -> list[Assertion]:
    """adeg(f) <= deg(f) <= min(n, 9 adeg(f)^2)."""
    adeg = approx_degree(f, eps).adeg
    deg = exact_degree(f)
    return [
        Assertion.at_most("adeg <= deg", adeg, deg),
        Assertion.at_most("deg <= min(n, 9 adeg^2)", deg, min(f.n, 9 * adeg**2)),
    ]
