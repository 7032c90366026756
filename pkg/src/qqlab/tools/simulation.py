"""Simulation tools: algorithms, hybrid traces and recording traces.

Impact: High (every upper and lower bound is checked on these runs)
Complexity: Medium (exact state vectors, size caps)
"""

from mcp.server.fastmcp import Context
from pydantic import Field

from .. import experiments as ex
from ..errors import ValidationError
from ..formats import algorithm_from_dict
from .base import run_experiment


def register_simulation_tools(mcp):
    """Register simulation tools."""

    @mcp.tool()
    def simulate_algorithm(
        algorithm: dict = Field(description="Algorithm JSON: n, m, d, oracle_kind, unitaries"),
        fn: str = Field(default=None, description="Function family to score the algorithm on"),
        ctx: Context = None,
    ) -> dict:
        """Acceptance probabilities of an algorithm and its worst-case success on f."""

        def build():
            alg = algorithm_from_dict(algorithm)
            return ex.simulate(alg, ex.named_function(fn, alg.n) if fn else None)

        return run_experiment("simulate_algorithm", build, ctx)

    @mcp.tool()
    def grover_or(
        n: int = Field(ge=1, le=64, description="Number of bits, a power of two"),
        ctx: Context = None,
    ) -> dict:
        """Worst-case success of the coherent OR algorithm and its query count."""
        return run_experiment("grover_or", lambda: ex.grover_experiment(n), ctx)

    @mcp.tool()
    def hybrid_trace(
        x: str = Field(description="Input bits, x_1 first, e.g. '0000'"),
        y: str = Field(description="Second input, same length"),
        ctx: Context = None,
    ) -> dict:
        """Hybrid distances of the coherent OR algorithm on one pair of inputs."""

        def build():
            n = len(x.strip())
            alg = ex.qsim.grover_or(n)
            f = ex.named_function("or", n)
            return ex.hybrid_pair(alg, ex.parse_bits(x, n), ex.parse_bits(y, n), f)

        return run_experiment("hybrid_trace", build, ctx)

    @mcp.tool()
    def hybrid_or(
        n: int = Field(ge=1, le=16, description="Number of bits, a power of two"),
        ctx: Context = None,
    ) -> dict:
        """Aggregated hybrid progress over (0^n, e_i), implying T >= sqrt(n)/6."""
        return run_experiment("hybrid_or", lambda: ex.or_hybrid_experiment(n), ctx)

    @mcp.tool()
    def recording_check(
        n: int = Field(ge=1, le=4, description="Number of cells"),
        m: int = Field(ge=2, le=4, description="Alphabet size"),
        T: int = Field(default=2, ge=0, le=6, description="Queries"),
        count: int = Field(default=5, ge=1, le=100, description="Random algorithms"),
        seed: int = Field(default=0, description="Seed"),
        ctx: Context = None,
    ) -> dict:
        """Indistinguishability of the recording oracle on seeded random algorithms."""
        return run_experiment(
            "recording_check", lambda: ex.recording_experiment(n, m, T, 1, count, seed), ctx
        )

    @mcp.tool()
    def recording_progress(
        problem: str = Field(description="search or collision"),
        n: int = Field(ge=1, le=4, description="Number of cells"),
        m: int = Field(ge=2, le=8, description="Alphabet size"),
        T: int = Field(default=2, ge=0, le=6, description="Queries"),
        seed: int = Field(default=0, description="Seed"),
        ctx: Context = None,
    ) -> dict:
        """Recording progress trace for SEARCH or COLLISION on a random algorithm."""

        def build():
            if problem.lower() == "collision":
                return ex.collision_experiment(n, m, T, seed)
            if problem.lower() == "search":
                return ex.search_experiment(n, m, T, seed)
            raise ValidationError(f"unknown problem '{problem}'", field="problem")

        return run_experiment("recording_progress", build, ctx)
