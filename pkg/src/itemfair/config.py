"""Evaluation parameters and their YAML configuration file."""

import logging
from pathlib import Path
from typing import Any, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, field_validator

logger = logging.getLogger(__name__)


class EvalParams(BaseModel):
    """Parameters shared by every evaluation.

    YAML keys mirror the CLI flag names, e.g.::

        k: 10
        gamma: 0.8
        beta: 0.0
        log_base: 2
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    k: Optional[int] = Field(default=None, gt=0, description="Expected cutoff; checked against runs")
    gamma: float = Field(default=0.8, gt=0.0, lt=1.0, description="RBP patience for II-D/AI-D")
    alpha: float = Field(default=2.0, ge=0.0, le=2.0, description="VoCD cosine distance threshold")
    beta: float = Field(default=0.0, ge=0.0, lt=1.0, description="VoCD disparity tolerance")
    log_base: Optional[float] = Field(default=None, gt=0.0, description="Entropy log base; None means n")
    relevance: bool = Field(default=True, description="Compute relevance measures when qrels are given")
    bh_alpha: float = Field(default=0.05, gt=0.0, lt=1.0, description="FDR level for significance")

    @field_validator("log_base")
    @classmethod
    def _check_base(cls, value: Optional[float]) -> Optional[float]:
        if value is not None and value == 1.0:
            raise ValueError("log base 1 is undefined")
        return value

    def with_overrides(self, **overrides: Any) -> "EvalParams":
        """Copy with the non-None overrides applied and revalidated."""
        updates = {key: value for key, value in overrides.items() if value is not None}
        if not updates:
            return self
        return EvalParams.model_validate({**self.model_dump(), **updates})


def load_params(path: Union[str, Path]) -> EvalParams:
    """Read EvalParams from a YAML file.

    Raises:
        FileNotFoundError: If the file does not exist
        pydantic.ValidationError: If a value is out of range or a key is unknown
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Config file not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        data = yaml.safe_load(f) or {}
    if not isinstance(data, dict):
        raise ValueError(f"{path}: expected a mapping at the top level")
    params = EvalParams.model_validate(data)
    logger.info(f"Loaded parameters from {path}")
    return params
