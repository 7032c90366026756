"""Boolean functions, relations and their combinatorial measures.

Inputs are indexed by x = sum_i x_i 2^(i-1): coordinate 1 is the least
significant bit of the table index. The same order is used by every module and
every file format.
"""

import itertools
import logging
import math
from collections.abc import Sequence
from enum import Enum
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .errors import CapExceededError, ValidationError
from .settings import settings

logger = logging.getLogger(__name__)


class Family(str, Enum):
    """Named function families."""

    OR = "OR"
    AND = "AND"
    PARITY = "PARITY"
    MAJ = "MAJ"
    RUBINSTEIN = "RUBINSTEIN"
    AND_OR = "AND_OR"
    CONNECTIVITY = "CONNECTIVITY"
    SEARCH = "SEARCH"
    COLLISION = "COLLISION"


def input_bits(n: int) -> np.ndarray:
    """All of {0,1}^n as a (2^n, n) uint8 matrix; column i-1 holds coordinate i."""
    idx = np.arange(2**n, dtype=np.int64)
    return ((idx[:, None] >> np.arange(n)) & 1).astype(np.uint8)


def popcount(values) -> np.ndarray:
    v = np.asarray(values, dtype=np.int64)
    count = np.zeros_like(v)
    while np.any(v):
        count += v & 1
        v = v >> 1
    return count


def bits_to_index(bits: Sequence[int]) -> int:
    return sum(int(b) << i for i, b in enumerate(bits))


def index_to_bits(index: int, n: int) -> tuple[int, ...]:
    return tuple((index >> i) & 1 for i in range(n))


def _mask_to_coords(mask: int) -> list[int]:
    return [i + 1 for i in range(mask.bit_length()) if mask >> i & 1]


# === Domain types ===


class BooleanFunction(BaseModel):
    """A total function f: {0,1}^n -> {0,1} stored as its truth table."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    n: int = Field(ge=0, description="Number of input bits")
    table: np.ndarray = Field(description="2^n output bits in index order")
    name: str | None = None

    @field_validator("table", mode="before")
    @classmethod
    def coerce_table(cls, v):
        table = np.asarray(v).astype(np.uint8).ravel()
        if table.size and not np.all((table == 0) | (table == 1)):
            raise ValueError("truth table entries must be 0 or 1")
        table.flags.writeable = False
        return table

    @model_validator(mode="after")
    def check_length(self):
        if self.table.size != 2**self.n:
            raise ValueError(f"truth table has {self.table.size} entries, expected 2^{self.n}")
        return self

    def __eq__(self, other) -> bool:
        if not isinstance(other, BooleanFunction):
            return NotImplemented
        return self.n == other.n and bool(np.array_equal(self.table, other.table))

    def __hash__(self) -> int:
        return hash((self.n, self.table.tobytes()))

    @property
    def size(self) -> int:
        return 2**self.n

    def __call__(self, x: int | Sequence[int]) -> int:
        return self.evaluate(x)

    def evaluate(self, x: int | Sequence[int]) -> int:
        """f(x) for an index or a bit sequence (coordinate 1 first)."""
        index = x if isinstance(x, (int, np.integer)) else bits_to_index(x)
        if not 0 <= index < self.size:
            raise ValidationError(f"input index {index} out of range for n={self.n}", field="x")
        return int(self.table[index])

    def inputs(self) -> np.ndarray:
        return input_bits(self.n)

    def is_constant(self) -> bool:
        return bool(np.all(self.table == self.table[0]))

    def negate(self) -> "BooleanFunction":
        name = f"NOT_{self.name}" if self.name else None
        return BooleanFunction(n=self.n, table=1 - self.table, name=name)

    def preimage(self, value: int) -> np.ndarray:
        """Indices x with f(x) = value."""
        return np.flatnonzero(self.table == value)

    def describe(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "n": self.n,
            "ones": int(self.table.sum()),
            "zeros": int(self.size - self.table.sum()),
            "table": "".join(str(int(b)) for b in self.table),
        }


class Relation(BaseModel):
    """Input x in {0..m-1}^n with an associated set of correct outputs."""

    n: int = Field(ge=1)
    m: int = Field(ge=2)
    solutions: dict[int, frozenset] = Field(description="Input index (base m) -> solution labels")
    name: str | None = None

    @property
    def size(self) -> int:
        return self.m**self.n

    def index(self, symbols: Sequence[int]) -> int:
        return sum(int(s) * self.m**i for i, s in enumerate(symbols))

    def symbols(self, index: int) -> tuple[int, ...]:
        return tuple((index // self.m**i) % self.m for i in range(self.n))

    def labels(self, x: int | Sequence[int]) -> frozenset:
        index = x if isinstance(x, (int, np.integer)) else self.index(x)
        return self.solutions.get(int(index), frozenset())


class DecisionTree(BaseModel):
    """Rooted ordered binary tree; internal nodes query 1-based indices."""

    index: int | None = None
    output: int | None = None
    zero: "DecisionTree | None" = None
    one: "DecisionTree | None" = None

    @classmethod
    def leaf(cls, output: int) -> "DecisionTree":
        return cls(output=output)

    @property
    def is_leaf(self) -> bool:
        return self.index is None

    @property
    def depth(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + max(self.zero.depth, self.one.depth)

    def evaluate(self, bits: Sequence[int]) -> int:
        node = self
        while not node.is_leaf:
            node = node.one if bits[node.index - 1] else node.zero
        return node.output

    def render(self, indent: str = "") -> str:
        if self.is_leaf:
            return f"{indent}-> {self.output}"
        return "\n".join(
            [
                f"{indent}x{self.index}?",
                f"{indent}  0:",
                self.zero.render(indent + "    "),
                f"{indent}  1:",
                self.one.render(indent + "    "),
            ]
        )


class MultilinearPolynomial(BaseModel):
    """p(x) = sum_S a_S prod_{i in S} x_i, coefficients indexed by subset bitmask."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    n: int = Field(ge=0)
    coeffs: np.ndarray

    @model_validator(mode="after")
    def check_length(self):
        self.coeffs = np.asarray(self.coeffs).ravel()
        if self.coeffs.size != 2**self.n:
            raise ValueError(f"expected 2^{self.n} coefficients, got {self.coeffs.size}")
        return self

    @classmethod
    def from_values(cls, n: int, values) -> "MultilinearPolynomial":
        """Interpolate the values on {0,1}^n (index order) by Moebius inversion."""
        coeffs = np.array(values).ravel().copy()
        for i in range(n):
            view = coeffs.reshape(-1, 2, 2**i)
            view[:, 1, :] -= view[:, 0, :]
        return cls(n=n, coeffs=coeffs)

    @classmethod
    def from_coefficients(cls, n: int, coefficients: dict) -> "MultilinearPolynomial":
        """Build from a map of 1-based index sets to coefficients."""
        coeffs = np.zeros(2**n)
        for subset, value in coefficients.items():
            coeffs[sum(1 << (i - 1) for i in subset)] += value
        return cls(n=n, coeffs=coeffs)

    def degree(self, tol: float = 0.0) -> int:
        support = np.flatnonzero(np.abs(self.coeffs) > tol)
        return int(popcount(support).max()) if support.size else 0

    def coefficient(self, subset: Sequence[int]) -> float:
        return self.coeffs[sum(1 << (i - 1) for i in subset)].item()

    def coefficients(self, tol: float = 0.0) -> dict[frozenset, float]:
        return {
            frozenset(_mask_to_coords(int(s))): self.coeffs[s].item()
            for s in np.flatnonzero(np.abs(self.coeffs) > tol)
        }

    def values(self) -> np.ndarray:
        """p on every Boolean point, in index order (subset-sum transform)."""
        values = self.coeffs.copy()
        for i in range(self.n):
            view = values.reshape(-1, 2, 2**i)
            view[:, 1, :] += view[:, 0, :]
        return values

    def evaluate(self, point: Sequence[float]) -> float:
        """p at an arbitrary real point (coordinate 1 first)."""
        acc = self.coeffs.astype(np.result_type(self.coeffs, float))
        for xi in point:
            pairs = acc.reshape(-1, 2)
            acc = pairs[:, 0] + xi * pairs[:, 1]
        return acc.item()

    def __add__(self, other: "MultilinearPolynomial") -> "MultilinearPolynomial":
        return MultilinearPolynomial(n=self.n, coeffs=self.coeffs + other.coeffs)

    def __mul__(self, scalar: float) -> "MultilinearPolynomial":
        return MultilinearPolynomial(n=self.n, coeffs=self.coeffs * scalar)

    __rmul__ = __mul__


class BlockSensitivity(BaseModel):
    """Result of block_sensitivity."""

    s: int
    witness: tuple[int, ...]
    blocks: list[list[int]]
    classes: list[list[int]] = Field(
        default_factory=list, description="Coordinate classes interchangeable under f"
    )


# === Named families ===


def _require(condition: bool, message: str, field: str = "n"):
    if not condition:
        raise ValidationError(message, field=field)


def connectivity_edges(v: int) -> list[tuple[int, int]]:
    """Edge pairs {i,j}, i<j, 1-based, in lexicographic order."""
    return list(itertools.combinations(range(1, v + 1), 2))


def vertices_for_edges(n: int) -> int:
    v = (1 + math.isqrt(1 + 8 * n)) // 2
    _require(v * (v - 1) // 2 == n, f"CONNECTIVITY needs n = C(v,2), got n={n}")
    return v


def reachability(v: int) -> np.ndarray:
    """reach[x, a, b] is True iff vertices a+1 and b+1 are connected in graph x."""
    edges = connectivity_edges(v)
    bits = input_bits(len(edges))
    adj = np.zeros((bits.shape[0], v, v), dtype=np.int64)
    for k, (a, b) in enumerate(edges):
        adj[:, a - 1, b - 1] = bits[:, k]
        adj[:, b - 1, a - 1] = bits[:, k]
    reach = (adj + np.eye(v, dtype=np.int64)) > 0
    for _ in range(max(1, math.ceil(math.log2(v)))):
        reach = (reach.astype(np.int64) @ reach.astype(np.int64)) > 0
    return reach


def _rubinstein_inner(m: int) -> np.ndarray:
    """g(x)=1 iff x has exactly two ones, at consecutive positions (2j, 2j+1), 0-based."""
    table = np.zeros(2**m, dtype=np.uint8)
    for j in range(m // 2):
        table[(1 << (2 * j)) | (1 << (2 * j + 1))] = 1
    return table


def rubinstein_inner(m: int) -> "BooleanFunction":
    _require(m >= 2 and m % 2 == 0, f"RUBINSTEIN block size must be even, got m={m}", "m")
    return BooleanFunction(n=m, table=_rubinstein_inner(m), name=f"RUB_INNER_{m}")


def _square_side(n: int, family: str) -> int:
    m = math.isqrt(n)
    _require(m * m == n and m >= 1, f"{family} needs n = m^2, got n={n}")
    return m


def make_named(
    name: str | Family, n: int = None, m: int = None, v: int = None
) -> "BooleanFunction | Relation":
    """Build a named function or relation.

    Args:
        name: family name (case-insensitive)
        n: input length (or number of edge bits for CONNECTIVITY)
        m: alphabet size for SEARCH/COLLISION (default 2), block size for
            RUBINSTEIN/AND_OR when n is omitted
        v: vertex count for CONNECTIVITY

    Raises:
        ValidationError: unknown family or invalid size, naming the constraint
    """
    try:
        family = Family(str(getattr(name, "value", name)).upper().replace("-", "_"))
    except ValueError:
        known = ", ".join(f.value for f in Family)
        raise ValidationError(f"unknown function family '{name}' (known: {known})", "name")

    if family in (Family.RUBINSTEIN, Family.AND_OR) and n is None and m is not None:
        n = m * m
    if family is Family.CONNECTIVITY:
        if v is None:
            _require(n is not None, "CONNECTIVITY needs v or n")
            v = vertices_for_edges(n)
        _require(v >= 2, f"CONNECTIVITY needs v >= 2, got v={v}", "v")
        n = v * (v - 1) // 2
    _require(n is not None and n >= 1, f"{family.value} needs n >= 1")

    if family is Family.SEARCH or family is Family.COLLISION:
        m = 2 if m is None else m
        _require(m >= 2, f"{family.value} needs m >= 2, got m={m}", "m")
        return _make_relation(family, n, m)

    bits = input_bits(n)
    weight = bits.sum(axis=1)
    label = f"{family.value}_{n}"
    if family is Family.OR:
        table = weight > 0
    elif family is Family.AND:
        table = weight == n
    elif family is Family.PARITY:
        table = weight % 2
    elif family is Family.MAJ:
        _require(n % 2 == 1, f"MAJ needs odd n, got n={n}")
        table = weight > n // 2
    elif family is Family.RUBINSTEIN:
        side = _square_side(n, "RUBINSTEIN")
        _require(side % 2 == 0, f"RUBINSTEIN needs n = m^2 with m even, got m={side}")
        return compose(make_named(Family.OR, n=side), rubinstein_inner(side)).model_copy(
            update={"name": label}
        )
    elif family is Family.AND_OR:
        side = _square_side(n, "AND_OR")
        return compose(make_named(Family.AND, n=side), make_named(Family.OR, n=side)).model_copy(
            update={"name": label}
        )
    else:
        table = reachability(v)[:, 0, :].all(axis=1)
        label = f"CONNECTIVITY_v{v}"
    return BooleanFunction(n=n, table=np.asarray(table, dtype=np.uint8), name=label)


def _make_relation(family: Family, n: int, m: int) -> Relation:
    total = m**n
    if total > settings.record_max_amplitudes:
        raise CapExceededError("m^n", total, settings.record_max_amplitudes)
    solutions = {}
    for index, symbols in enumerate(itertools.product(range(m), repeat=n)):
        # itertools varies the last position fastest; coordinate 1 must be least significant
        x = symbols[::-1]
        if family is Family.SEARCH:
            labels = frozenset(i + 1 for i, s in enumerate(x) if s == 1)
        else:
            labels = frozenset(
                (i + 1, j + 1) for i, j in itertools.combinations(range(n), 2) if x[i] == x[j]
            )
        solutions[index] = labels
    return Relation(n=n, m=m, solutions=solutions, name=f"{family.value}_{n}_{m}")


# === Operations ===


def compose(f: BooleanFunction, g: BooleanFunction) -> BooleanFunction:
    """(f . g)(x) = f(g(x_1..x_m), ..., g(x_{(n-1)m+1}..x_{nm}))."""
    bits = f.n * g.n
    if bits > settings.compose_max_bits:
        raise CapExceededError("n*m", bits, settings.compose_max_bits)
    idx = np.arange(2**bits, dtype=np.int64)
    mask = 2**g.n - 1
    outer = np.zeros_like(idx)
    for k in range(f.n):
        outer |= g.table[(idx >> (k * g.n)) & mask].astype(np.int64) << k
    name = f"{f.name}.{g.name}" if f.name and g.name else None
    return BooleanFunction(n=bits, table=f.table[outer], name=name)


def multilinear_coeffs(f: BooleanFunction) -> MultilinearPolynomial:
    """Unique multilinear representation by Moebius inversion (exact integers)."""
    return MultilinearPolynomial.from_values(f.n, f.table.astype(np.int64))


def exact_degree(f: BooleanFunction) -> int:
    return multilinear_coeffs(f).degree()


def coordinate_classes(f: BooleanFunction) -> list[list[int]]:
    """Partition of 0-based coordinates into classes whose transpositions preserve f."""
    n = f.n
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    idx = np.arange(f.size, dtype=np.int64)
    for i, j in itertools.combinations(range(n), 2):
        if find(i) == find(j):
            continue
        differ = ((idx >> i) ^ (idx >> j)) & 1
        swapped = idx ^ (differ << i) ^ (differ << j)
        if np.array_equal(f.table[swapped], f.table):
            parent[find(j)] = find(i)

    classes: dict[int, list[int]] = {}
    for i in range(n):
        classes.setdefault(find(i), []).append(i)
    return sorted(classes.values())


def _orbit_representatives(classes: list[list[int]]) -> list[int]:
    """One input per orbit of the coordinate-class symmetric groups."""
    reps = []
    for counts in itertools.product(*(range(len(c) + 1) for c in classes)):
        x = 0
        for members, count in zip(classes, counts, strict=True):
            for i in members[:count]:
                x |= 1 << i
        reps.append(x)
    return reps


def minimal_sensitive_blocks(f: BooleanFunction, x: int) -> list[int]:
    """Bitmasks B with f(x^B) != f(x) and no proper sensitive subset."""
    n = f.n
    sensitive = f.table[np.arange(f.size, dtype=np.int64) ^ x] != f.table[x]
    # closure[B]: some subset of B (B included) is sensitive
    closure = sensitive.copy()
    for i in range(n):
        view = closure.reshape(-1, 2, 2**i)
        view[:, 1, :] |= view[:, 0, :]
    proper = np.zeros_like(sensitive)
    for i in range(n):
        proper.reshape(-1, 2, 2**i)[:, 1, :] |= closure.reshape(-1, 2, 2**i)[:, 0, :]
    return [int(b) for b in np.flatnonzero(sensitive & ~proper)]


def max_disjoint_blocks(blocks: list[int]) -> list[int]:
    """Largest family of pairwise disjoint bitmasks (exact, memoised branch and bound)."""
    memo: dict[tuple[int, ...], tuple[int, ...]] = {}

    def solve(cands: tuple[int, ...]) -> tuple[int, ...]:
        if not cands:
            return ()
        if cands in memo:
            return memo[cands]
        union = 0
        for b in cands:
            union |= b
        low = union & -union
        without = tuple(b for b in cands if not b & low)
        best = solve(without)
        for b in cands:
            if b & low:
                if len(best) >= 1 + len(without):
                    break
                choice = (b,) + solve(tuple(c for c in without if not c & b))
                if len(choice) > len(best):
                    best = choice
        memo[cands] = best
        return best

    return list(solve(tuple(sorted(set(blocks)))))


def bs_at(f: BooleanFunction, x: int) -> list[int]:
    """Maximum family of disjoint sensitive blocks at x, as bitmasks."""
    return max_disjoint_blocks(minimal_sensitive_blocks(f, x))


def block_sensitivity(f: BooleanFunction) -> BlockSensitivity:
    """Exact block sensitivity with a witness input and its blocks.

    Inputs are enumerated up to coordinate permutations that preserve f, and
    each input only searches packings of its minimal sensitive blocks.
    """
    if f.n > settings.bs_max_n:
        raise CapExceededError("n", f.n, settings.bs_max_n)
    classes = coordinate_classes(f)
    reps = _orbit_representatives(classes)
    logger.info(f"Block sensitivity of {f.name or 'f'}: {len(reps)} of {f.size} inputs to search")

    best_x, best_blocks = 0, []
    for x in reps:
        blocks = minimal_sensitive_blocks(f, x)
        if not blocks:
            continue
        union = 0
        for b in blocks:
            union |= b
        smallest = min(int(popcount([b])[0]) for b in blocks)
        upper = min(len(blocks), bin(union).count("1") // smallest)
        if upper <= len(best_blocks):
            continue
        packing = max_disjoint_blocks(blocks)
        if len(packing) > len(best_blocks):
            best_x, best_blocks = x, packing
            if len(best_blocks) == f.n:
                break

    return BlockSensitivity(
        s=len(best_blocks),
        witness=index_to_bits(best_x, f.n),
        blocks=sorted(_mask_to_coords(b) for b in best_blocks),
        classes=[[i + 1 for i in c] for c in classes],
    )


def deterministic_query_complexity(f: BooleanFunction) -> tuple[int, DecisionTree]:
    """Exact D(f) with an optimal decision tree (minimax over restrictions)."""
    if f.n > settings.dqc_max_n:
        raise CapExceededError("n", f.n, settings.dqc_max_n)
    idx = np.arange(f.size, dtype=np.int64)
    memo: dict[tuple[int, int], tuple[int, DecisionTree]] = {}

    def solve(mask: int, values: int) -> tuple[int, DecisionTree]:
        key = (mask, values)
        if key in memo:
            return memo[key]
        outputs = f.table[(idx & mask) == values]
        if np.all(outputs == outputs[0]):
            result = (0, DecisionTree.leaf(int(outputs[0])))
        else:
            result = None
            for i in range(f.n):
                bit = 1 << i
                if mask & bit:
                    continue
                d0, t0 = solve(mask | bit, values)
                d1, t1 = solve(mask | bit, values | bit)
                depth = 1 + max(d0, d1)
                if result is None or depth < result[0]:
                    result = (depth, DecisionTree(index=i + 1, zero=t0, one=t1))
        memo[key] = result
        return result

    return solve(0, 0)
