"""Lower-bound tools: polynomial method, adversary certificates and the dual SDP.

Impact: High (the certificates themselves)
Complexity: High (LP and SDP solvers)
"""

from mcp.server.fastmcp import Context
from pydantic import Field

from .. import experiments as ex
from .base import run_experiment


def register_bounds_tools(mcp):
    """Register lower-bound tools."""

    @mcp.tool()
    def approximate_degree(
        fn: str = Field(description="Function family"),
        n: int = Field(ge=1, le=10, description="Input length"),
        eps: float = Field(default=1 / 3, gt=0, lt=0.5, description="Approximation error"),
        ctx: Context = None,
    ) -> dict:
        """adeg_eps(f) by LP over multilinear polynomials."""
        return run_experiment(
            "approximate_degree", lambda: ex.adeg_experiment(ex.named_function(fn, n), eps), ctx
        )

    @mcp.tool()
    def symmetric_degree(
        fn: str = Field(description="Symmetric family: or, and, parity, maj"),
        n: int = Field(ge=1, le=256, description="Input length"),
        eps: float = Field(default=1 / 3, gt=0, lt=0.5, description="Approximation error"),
        ctx: Context = None,
    ) -> dict:
        """Approximate degree of a symmetric function via the univariate LP."""
        return run_experiment("symmetric_degree", lambda: ex.symmetric_experiment(fn, n, eps), ctx)

    @mcp.tool()
    def dual_polynomial(
        fn: str = Field(description="Function family"),
        n: int = Field(ge=1, le=10, description="Input length"),
        d: int = Field(ge=0, description="Claimed pure high degree"),
        ctx: Context = None,
    ) -> dict:
        """Best dual polynomial of pure high degree d, certifying adeg(f) >= d when it passes."""
        return run_experiment(
            "dual_polynomial", lambda: ex.dual_polynomial_experiment(ex.named_function(fn, n), d), ctx
        )

    @mcp.tool()
    def or_adversary(
        n: int = Field(ge=1, le=64, description="Input length"),
        ctx: Context = None,
    ) -> dict:
        """The OR adversary certificate: value sqrt(n), matched by the balanced realization."""
        return run_experiment("or_adversary", lambda: ex.or_adversary_experiment(n), ctx)

    @mcp.tool()
    def ambainis_bound(
        fn: str = Field(description="or or connectivity"),
        n: int = Field(default=None, ge=1, description="Input length for or"),
        v: int = Field(default=None, ge=6, le=10, description="Even vertex count for connectivity"),
        ctx: Context = None,
    ) -> dict:
        """Ambainis bound of the shipped hardness graph."""
        return run_experiment(
            "ambainis_bound", lambda: ex.ambainis_experiment(ex.named_function(fn, n, v), v), ctx
        )

    @mcp.tool()
    def realization_value(
        fn: str = Field(description="or, and or connectivity"),
        n: int = Field(default=None, ge=1, description="Input length"),
        v: int = Field(default=None, ge=3, description="Vertex count for connectivity"),
        balance: bool = Field(default=True, description="Also rebalance T0 and T1"),
        ctx: Context = None,
    ) -> dict:
        """Feasibility and value of a shipped vector realization."""

        def build():
            f = ex.named_function(fn, n, v)
            return ex.realize_experiment(ex.realization_for(f, v), balance=balance, v=v)

        return run_experiment("realization_value", build, ctx)

    @mcp.tool()
    def solve_sdp(
        fn: str = Field(description="Function family"),
        n: int = Field(ge=1, le=6, description="Input length"),
        ctx: Context = None,
    ) -> dict:
        """Solve the dual adversary SDP; reports value and certificate values around it."""
        return run_experiment("solve_sdp", lambda: ex.sdp_experiment(ex.named_function(fn, n)), ctx)
