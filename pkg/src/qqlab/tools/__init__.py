"""MCP tools for qqlab.

Tools are organized by category:
- functions: Boolean function facts (degrees, block sensitivity)
- simulation: algorithm simulation, hybrid traces, recording traces
- bounds: polynomial and adversary lower bounds, the dual SDP
- dual: the phase-estimation algorithm compiled from a realization
"""

from .bounds import register_bounds_tools
from .dual import register_dual_tools
from .functions import register_function_tools
from .simulation import register_simulation_tools

__all__ = [
    "register_function_tools",
    "register_simulation_tools",
    "register_bounds_tools",
    "register_dual_tools",
]


def register_all_tools(mcp):
    """Register all tools with the MCP server."""
    register_function_tools(mcp)
    register_simulation_tools(mcp)
    register_bounds_tools(mcp)
    register_dual_tools(mcp)
