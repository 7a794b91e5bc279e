"""
Runtime configuration.

Caps and budgets live in one Settings model. Environment variables override
defaults; every operation that takes a cap also accepts it as a keyword.
"""

import logging
import os
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field

logger = logging.getLogger(__name__)

ENV_CAP_VERTICES = "PROPTEST_CAP_VERTICES"
ENV_LOG_LEVEL = "PROPTEST_LOG_LEVEL"


class Settings(BaseModel):
    """Global caps. Positive integers everywhere."""

    model_config = ConfigDict(extra="allow", frozen=True)

    cap_vertices: int = Field(default=200_000, gt=0)  # largest structure/graph we materialize
    dense_cap: int = Field(default=4_000, gt=0)  # largest matrix order for spectra
    jacobi_max: int = Field(default=200, gt=0)  # above this, spectra use LAPACK
    jacobi_tol: float = Field(default=1e-12, gt=0.0)
    eval_budget: int = Field(default=5_000_000, gt=0)  # atom evaluations per generic FO run
    embed_budget: int = Field(default=2_000_000, gt=0)  # backtracking nodes per GSF search
    log_level: str = "WARNING"


class RunConfig(BaseModel):
    """Everything a CLI run depends on. Same RunConfig, same stdout."""

    model_config = ConfigDict(extra="allow")

    command: str
    input: Optional[str] = None
    output: Optional[str] = None
    D: int = Field(default=2, ge=1)
    depth: int = Field(default=1, ge=0)
    r: int = Field(default=1, ge=0)
    eps: float = Field(default=0.1, gt=0.0, le=1.0)
    seed: int = 0
    trials: int = Field(default=1, ge=1)
    threads: int = Field(default=1, ge=1)
    cap_vertices: Optional[int] = Field(default=None, gt=0)


def get_settings(**overrides) -> Settings:
    """Build Settings from the environment, then apply explicit overrides."""
    values: dict = {}

    raw_cap = os.environ.get(ENV_CAP_VERTICES)
    if raw_cap:
        try:
            values["cap_vertices"] = int(raw_cap)
        except ValueError:
            logger.warning(f"Ignoring non-integer {ENV_CAP_VERTICES}={raw_cap!r}")

    raw_level = os.environ.get(ENV_LOG_LEVEL)
    if raw_level:
        values["log_level"] = raw_level.upper()

    values.update({k: v for k, v in overrides.items() if v is not None})
    return Settings(**values)
