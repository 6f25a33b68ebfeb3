"""
Graph family Pydantic schemas
"""

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

FamilyTag = Literal[
    "path",
    "cycle",
    "complete",
    "complete_bipartite",
    "star",
    "edgeless",
    "petersen",
    "rooted_arity_tree",
    "disjoint_copies",
    "random_regular",
    "random_tree",
    "erdos_renyi_triangle_erased",
    "from_file",
]

# family -> parameters that must be present
_REQUIRED = {
    "path": ("n",),
    "cycle": ("n",),
    "complete": ("n",),
    "complete_bipartite": ("n", "n2"),
    "star": ("n",),
    "edgeless": ("n",),
    "petersen": (),
    "rooted_arity_tree": ("arity", "depth"),
    "disjoint_copies": ("base", "copies"),
    "random_regular": ("n", "degree"),
    "random_tree": ("n",),
    "erdos_renyi_triangle_erased": ("n", "p"),
    "from_file": ("path",),
}


class GraphFamilySpec(BaseModel):
    """Which graph to build; random families are a function of ``seed``"""

    model_config = ConfigDict(extra="forbid")

    family: FamilyTag
    n: Optional[int] = Field(None, ge=0)
    n2: Optional[int] = Field(None, ge=0)
    arity: Optional[int] = Field(None, ge=1)
    depth: Optional[int] = Field(None, ge=0)
    copies: Optional[int] = Field(None, ge=0)
    degree: Optional[int] = Field(None, ge=0)
    p: Optional[float] = Field(None, ge=0, le=1)
    seed: int = Field(0, ge=0, lt=2**64)
    base: Optional["GraphFamilySpec"] = None
    path: Optional[str] = None

    @model_validator(mode="after")
    def check_family_parameters(self):
        missing = [name for name in _REQUIRED[self.family] if getattr(self, name) is None]
        if missing:
            raise ValueError(f"family '{self.family}' requires: {', '.join(missing)}")
        if self.family == "cycle" and self.n < 3:
            raise ValueError("cycle requires n >= 3")
        if self.family == "random_tree" and self.n < 1:
            raise ValueError("random_tree requires n >= 1")
        return self


class GraphPayload(BaseModel):
    """JSON form of a graph: vertex count and edge pairs"""

    n: int = Field(..., ge=0)
    edges: list[tuple[int, int]] = Field(default_factory=list)


GraphFamilySpec.model_rebuild()
