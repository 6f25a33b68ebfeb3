"""
Sampler and colouring-heuristic Pydantic schemas
"""

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field


class SamplerConfig(BaseModel):
    """Seeded sampler settings; the seed fully determines every draw"""

    model_config = ConfigDict(extra="forbid")

    seed: int = Field(0, ge=0, lt=2**64)
    method: Literal["exact_sequential", "glauber"] = "exact_sequential"
    burnin: int = Field(0, ge=0)
    thin: int = Field(0, ge=0)


class BadVertexConfig(BaseModel):
    """Thresholds for the local-search Bad predicate"""

    model_config = ConfigDict(extra="forbid")

    list_floor: Optional[int] = Field(None, ge=1)
    max_iterations: Optional[int] = Field(None, ge=0)
