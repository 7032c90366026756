"""Shared plumbing for tool bodies."""

import logging
from collections.abc import Callable

from mcp.server.fastmcp import Context

from ..errors import QQLabError, log_experiment, log_tool_call
from ..formats import jsonable
from ..models import ErrorResponse, ExperimentReport

logger = logging.getLogger(__name__)

SUGGESTIONS = {
    "CAP_EXCEEDED": "Lower n (or m, d) or raise the cap through the QQLAB_* environment variables",
    "SOLVER_ERROR": "Try another solver with QQLAB_SDP_SOLVER",
    "NOT_APPLICABLE": "Check that the algorithm computes a non-constant function first",
}


def run_experiment(
    tool_name: str, build: Callable[[], ExperimentReport], ctx: Context = None
) -> dict:
    """Report as a JSON-ready dict, or an ErrorResponse dict."""
    if ctx:
        ctx.info(f"Running {tool_name}...")
    try:
        report = build()
    except QQLabError as e:
        log_tool_call(tool_name, False, e.message)
        return ErrorResponse.from_error(e, SUGGESTIONS.get(e.code)).model_dump()
    except Exception as e:
        logger.exception(f"{tool_name} crashed")
        log_tool_call(tool_name, False, str(e))
        return ErrorResponse.internal(str(e)).model_dump()
    log_tool_call(tool_name, True)
    log_experiment(report.command, report.ok, report.elapsed_s, report.failed())
    if ctx:
        ctx.info(f"{report.command}: {'ok' if report.ok else 'failed ' + ', '.join(report.failed())}")
    return jsonable(report)
