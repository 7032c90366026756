"""qqlab MCP server: the experiments of the CLI as FastMCP tools."""

import logging
import sys

from mcp.server.fastmcp import FastMCP

from . import __version__
from .settings import settings
from .tools import register_all_tools

# Configure logging; stdout carries the MCP stream
logging.basicConfig(
    level=settings.log_level,
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    stream=sys.stderr,
)
logger = logging.getLogger(__name__)

# Initialize MCP server
mcp = FastMCP("qqlab")

# Register all tools
register_all_tools(mcp)


def run_server():
    """Start the MCP server."""
    print(f"Starting qqlab MCP server v{__version__}...", file=sys.stderr)
    print(f"  SDP solver: {settings.sdp_solver}", file=sys.stderr)
    print(f"  Simulator cap n*m*d: {settings.qsim_max_dim}", file=sys.stderr)
    print(f"  Record cap: {settings.record_max_amplitudes}", file=sys.stderr)
    mcp.run()


__all__ = ["mcp", "run_server"]


if __name__ == "__main__":
    run_server()
