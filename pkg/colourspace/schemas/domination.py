"""
Binary-family Pydantic schemas
"""

from typing import List

from pydantic import BaseModel, ConfigDict, Field, field_validator


class BinaryFamilySpec(BaseModel):
    """X_u = [l_sigma(u) <= threshold] for each listed vertex u"""

    model_config = ConfigDict(extra="forbid")

    vertices: List[int] = Field(..., min_length=1)
    threshold: int = Field(..., ge=0)

    @field_validator("vertices")
    @classmethod
    def vertices_distinct(cls, v: List[int]) -> List[int]:
        if len(set(v)) != len(v):
            raise ValueError("family vertices must be distinct")
        if any(u < 0 for u in v):
            raise ValueError("family vertices must be non-negative")
        return v
