"""Dual-adversary algorithm tools.

Impact: Medium (closes the loop from certificates to algorithms)
Complexity: High (eigendecompositions per input)
"""

from mcp.server.fastmcp import Context
from pydantic import Field

from .. import experiments as ex
from ..adversary import rebalance
from ..formats import realization_from_dict
from .base import run_experiment


def _realization(fn: str, n: int, v: int, realization: dict):
    if realization:
        return rebalance(realization_from_dict(realization))
    return rebalance(ex.realization_for(ex.named_function(fn, n, v), v))


def register_dual_tools(mcp):
    """Register dual-adversary algorithm tools."""

    @mcp.tool()
    def dual_algorithm(
        fn: str = Field(default="or", description="or, and or connectivity"),
        n: int = Field(default=None, ge=1, description="Input length"),
        v: int = Field(default=None, ge=3, description="Vertex count for connectivity"),
        x: int = Field(default=None, ge=0, description="Single input (table index)"),
        realization: dict = Field(default=None, description="Realization JSON instead of a family"),
        ctx: Context = None,
    ) -> dict:
        """Run the phase-estimation algorithm; per-input success must be >= 2/3."""
        return run_experiment(
            "dual_algorithm", lambda: ex.dual_run_experiment(_realization(fn, n, v, realization), x), ctx
        )

    @mcp.tool()
    def phase_gap(
        fn: str = Field(default="or", description="or, and or connectivity"),
        n: int = Field(default=None, ge=1, description="Input length"),
        v: int = Field(default=None, ge=3, description="Vertex count for connectivity"),
        x: int = Field(default=None, ge=0, description="Single input (table index)"),
        variant: str = Field(default="plus", description="plus or minus: vectors spanning Delta"),
        ctx: Context = None,
    ) -> dict:
        """Spectral mass of s at phase 0 (1-inputs) and below 1/(3T) (0-inputs)."""
        return run_experiment(
            "phase_gap",
            lambda: ex.dual_phasegap_experiment(_realization(fn, n, v, None), x, variant),
            ctx,
        )

    @mcp.tool()
    def two_query_decomposition(
        fn: str = Field(default="or", description="or, and or connectivity"),
        n: int = Field(default=None, ge=1, description="Input length"),
        v: int = Field(default=None, ge=3, description="Vertex count for connectivity"),
        ctx: Context = None,
    ) -> dict:
        """Check R_x against two oracle calls around fixed unitaries for every input."""
        return run_experiment(
            "two_query_decomposition",
            lambda: ex.dual_decompose_experiment(_realization(fn, n, v, None)),
            ctx,
        )
