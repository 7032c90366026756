"""Configuration settings for qqlab.

Settings are loaded from environment variables (prefix ``QQLAB_``) with sensible
defaults. Looks for .env files in the current directory and its parents.
"""

import logging
from pathlib import Path

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

logger = logging.getLogger(__name__)

KNOWN_SDP_SOLVERS = ("CLARABEL", "SCS", "MOSEK", "CVXOPT")


def _find_env_files() -> list[Path]:
    """Find .env files in current and parent directories."""
    env_files = []
    cwd = Path.cwd()

    for directory in (cwd, cwd.parent, cwd.parent.parent):
        if (directory / ".env").exists():
            env_files.append(directory / ".env")

    return env_files if env_files else [Path(".env")]


class Settings(BaseSettings):
    """Numerical tolerances and size caps.

    Environment Variables:
        QQLAB_STRUCTURE_TOL: Hermitian/unitary/projector checks (default: 1e-10)
        QQLAB_IDENTITY_TOL: algebraic identities and inequality slack (default: 1e-9)
        QQLAB_GRAM_TOL: Gram reconstruction and SDP affine constraints (default: 1e-8)
        QQLAB_PSD_TOL: smallest admissible eigenvalue magnitude for PSD input (default: 1e-9)
        QQLAB_QSIM_MAX_DIM: cap on n*m*d for query algorithms (default: 4096)
        QQLAB_RECORD_MAX_AMPLITUDES: cap on joint record states (default: 2000000)
        QQLAB_SDP_SOLVER: cvxpy conic solver name (default: CLARABEL)
        QQLAB_OUTPUT_DIGITS: significant digits in reports (default: 12)
        QQLAB_LOG_LEVEL: logging level (default: INFO)
    """

    structure_tol: float = Field(default=1e-10, gt=0, le=1e-3, description="Structure checks")
    identity_tol: float = Field(default=1e-9, gt=0, le=1e-3, description="Algebraic identities")
    gram_tol: float = Field(default=1e-8, gt=0, le=1e-3, description="Gram and affine constraints")
    psd_tol: float = Field(default=1e-9, gt=0, le=1e-3, description="PSD acceptance threshold")

    qsim_max_dim: int = Field(default=4096, ge=2, le=65536, description="Cap on n*m*d")
    record_max_amplitudes: int = Field(
        default=2_000_000, ge=16, le=50_000_000, description="Cap on n*m*d*(m+1)^n"
    )
    compose_max_bits: int = Field(default=20, ge=1, le=24, description="Composed table size cap")
    bs_max_n: int = Field(default=16, ge=1, le=20, description="Block sensitivity input cap")
    dqc_max_n: int = Field(default=4, ge=1, le=6, description="Decision tree search cap")
    adeg_max_n: int = Field(default=5, ge=1, le=10, description="Approximate degree LP cap")
    acceptance_max_n: int = Field(default=12, ge=1, le=16, description="Acceptance polynomial cap")
    sdp_max_n: int = Field(default=4, ge=1, le=6, description="Dual SDP input cap")
    connectivity_max_v: int = Field(default=5, ge=3, le=6, description="Connectivity vertex cap")

    sdp_solver: str = Field(default="CLARABEL", description="cvxpy solver for the dual SDP")
    output_digits: int = Field(default=12, ge=3, le=17, description="Significant digits")
    log_level: str = Field(default="INFO", description="Logging level")

    model_config = SettingsConfigDict(
        env_prefix="QQLAB_",
        extra="ignore",
        env_file=_find_env_files(),
        env_file_encoding="utf-8",
    )

    @field_validator("sdp_solver")
    @classmethod
    def validate_sdp_solver(cls, v):
        """Ensure the solver is one cvxpy ships an interface for."""
        v = v.upper()
        if v not in KNOWN_SDP_SOLVERS:
            raise ValueError(f"sdp_solver must be one of {', '.join(KNOWN_SDP_SOLVERS)}")
        return v

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v):
        """Ensure log_level is a standard logging level name."""
        v = v.upper()
        if v not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError("log_level must be a standard logging level")
        return v

    def tolerances(self) -> dict[str, float]:
        """Tolerances echoed in every report."""
        return {
            "structure_tol": self.structure_tol,
            "identity_tol": self.identity_tol,
            "gram_tol": self.gram_tol,
            "psd_tol": self.psd_tol,
        }


def load_settings() -> Settings:
    """Load and validate settings from environment."""
    try:
        return Settings()
    except Exception as e:
        logger.error(f"Failed to load settings: {e}")
        # Return defaults on error
        return Settings.model_construct()


# Global settings instance
settings = load_settings()


def reload_settings() -> Settings:
    """Reload settings from environment (useful for testing)."""
    global settings
    settings = load_settings()
    return settings
