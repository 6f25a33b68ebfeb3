"""
Experiment config and report Pydantic schemas
"""

from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field

from .domination import BinaryFamilySpec
from .graph import GraphFamilySpec
from .percolation import PercolationInstance
from .sampling import SamplerConfig

CommandName = Literal[
    "count",
    "sample",
    "classify",
    "clusters",
    "bounds",
    "dominate",
    "percolate",
    "propagate",
    "solve",
    "freeenergy",
]

OutputFormat = Literal["json", "csv", "jsonl"]


class ExperimentConfig(BaseModel):
    """One reproducible run; CLI flags override fields read from a config file"""

    model_config = ConfigDict(extra="forbid")

    version: Literal[1] = 1
    command: CommandName
    graph: Optional[GraphFamilySpec] = None

    # colouring instance
    k: Optional[int] = Field(None, ge=0)
    t: Optional[int] = Field(None, ge=0)
    lists: Optional[List[List[int]]] = None
    vertex: Optional[int] = Field(None, ge=0)
    colour: Optional[int] = Field(None, ge=0)
    colouring: Optional[List[int]] = None
    g_depth: Optional[int] = Field(None, ge=1)

    # bounds
    formula: Optional[str] = None
    params: Dict[str, Union[float, List[float]]] = Field(default_factory=dict)

    # domination
    family: Optional[BinaryFamilySpec] = None
    colours: Optional[List[int]] = None
    probabilities: Optional[List[float]] = None
    partition: Optional[List[List[int]]] = None
    p: Optional[float] = Field(None, ge=0, le=1)
    delta: Optional[float] = Field(None, ge=0)
    deltas: Optional[List[float]] = None

    # percolation
    percolation: Optional[PercolationInstance] = None

    # sampling and heuristics
    sampler: SamplerConfig = Field(default_factory=SamplerConfig)
    trials: Optional[int] = Field(None, ge=0)
    method: Optional[str] = None
    list_floor: Optional[int] = Field(None, ge=1)
    max_iterations: Optional[int] = Field(None, ge=0)

    # output
    output: Optional[str] = None
    format: OutputFormat = "json"
    expect: Dict[str, Any] = Field(default_factory=dict)


class ExperimentReport(BaseModel):
    """Config echo, measured values, bound values and pass/fail verdicts"""

    config: Dict[str, Any]
    measured: Dict[str, Any] = Field(default_factory=dict)
    bounds: Dict[str, Any] = Field(default_factory=dict)
    verdicts: Dict[str, bool] = Field(default_factory=dict)
    duration_seconds: Optional[float] = None
    # per-row output for the csv and jsonl formats
    records: Optional[List[Any]] = Field(None, exclude=True)

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())

    def to_payload(self) -> Dict[str, Any]:
        payload = self.model_dump(exclude={"records"})
        if payload["duration_seconds"] is None:
            del payload["duration_seconds"]
        return payload
