"""
Pydantic Schemas Package
"""

from .bounds import BoundReport, HypothesisCheck
from .domination import BinaryFamilySpec
from .graph import GraphFamilySpec, GraphPayload
from .percolation import ColouringLeafSpec, PercolationInstance
from .sampling import BadVertexConfig, SamplerConfig

__all__ = [
    "BadVertexConfig",
    "BinaryFamilySpec",
    "BoundReport",
    "ColouringLeafSpec",
    "GraphFamilySpec",
    "GraphPayload",
    "HypothesisCheck",
    "PercolationInstance",
    "SamplerConfig",
]
