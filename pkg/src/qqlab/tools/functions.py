"""Boolean function tools.

Impact: Medium (entry point for every other experiment)
Complexity: Low (exact table computations)
"""

from mcp.server.fastmcp import Context
from pydantic import Field

from .. import experiments as ex
from .base import run_experiment


def register_function_tools(mcp):
    """Register Boolean function tools."""

    @mcp.tool()
    def function_info(
        fn: str = Field(description="Family: or, and, parity, maj, rubinstein, and_or, connectivity"),
        n: int = Field(default=None, ge=1, description="Input length"),
        v: int = Field(default=None, ge=2, description="Vertex count for connectivity"),
        ctx: Context = None,
    ) -> dict:
        """Truth-table summary, exact degree and deterministic query complexity.

        Returns an ExperimentReport with the decision tree rendered as text
        when n is small enough.
        """
        return run_experiment("function_info", lambda: ex.function_info(ex.named_function(fn, n, v)), ctx)

    @mcp.tool()
    def block_sensitivity(
        fn: str = Field(description="Function family"),
        n: int = Field(default=None, ge=1, description="Input length"),
        v: int = Field(default=None, ge=2, description="Vertex count for connectivity"),
        ctx: Context = None,
    ) -> dict:
        """Exact bs(f) with the witness input and disjoint sensitive blocks.

        Examples: OR_8 gives 8, PARITY_6 gives 6, RUBINSTEIN_16 gives 8.
        """
        return run_experiment("block_sensitivity", lambda: ex.function_bs(ex.named_function(fn, n, v)), ctx)

    @mcp.tool()
    def function_degree(
        fn: str = Field(description="Function family"),
        n: int = Field(default=None, ge=1, description="Input length"),
        eps: float = Field(default=1 / 3, gt=0, lt=0.5, description="Approximation error"),
        ctx: Context = None,
    ) -> dict:
        """Exact degree, approximate degree and the sandwich adeg <= deg <= 9 adeg^2."""
        return run_experiment(
            "function_degree", lambda: ex.function_degree(ex.named_function(fn, n), eps), ctx
        )
