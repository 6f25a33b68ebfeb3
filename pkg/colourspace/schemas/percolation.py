"""
Percolation instance Pydantic schemas
"""

from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .graph import GraphFamilySpec


class ColouringLeafSpec(BaseModel):
    """Leaves activated by short available lists in a uniform colouring"""

    model_config = ConfigDict(extra="forbid")

    graph: GraphFamilySpec
    k: int = Field(..., ge=1)
    list_threshold: int = Field(..., ge=0)
    # graph vertex for each tree leaf, in leaf order; default: the last arity**depth vertices
    leaf_vertices: Optional[List[int]] = None


class PercolationInstance(BaseModel):
    """s-upward percolation on the complete arity-ary tree of the given depth"""

    model_config = ConfigDict(extra="forbid")

    arity: int = Field(..., ge=2)
    depth: int = Field(..., ge=1)
    threshold: int = Field(..., ge=1)
    model: Literal["iid", "adversarial", "explicit", "colouring"] = "iid"
    p: Optional[float] = Field(None, ge=0, le=1)
    mask: Optional[List[int]] = None
    colouring: Optional[ColouringLeafSpec] = None

    @model_validator(mode="after")
    def model_parameters_present(self) -> "PercolationInstance":
        if self.model == "iid" and self.p is None:
            raise ValueError("iid leaves need p")
        if self.model == "explicit" and self.mask is None:
            raise ValueError("explicit leaves need mask")
        if self.model == "colouring" and self.colouring is None:
            raise ValueError("colouring leaves need a colouring spec")
        return self

    @property
    def leaves(self) -> int:
        return self.arity**self.depth
