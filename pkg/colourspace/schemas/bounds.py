"""
Bound evaluation Pydantic schemas
"""

from typing import Dict, List, Optional

from pydantic import BaseModel, Field


class HypothesisCheck(BaseModel):
    name: str
    satisfied: bool
    detail: Optional[str] = None


class BoundReport(BaseModel):
    """One evaluated formula with its honesty flags"""

    formula: str
    params: Dict[str, float] = Field(default_factory=dict)
    value: float
    log_value: float
    hypotheses: List[HypothesisCheck] = Field(default_factory=list)
    warnings: List[str] = Field(default_factory=list)
    notes: List[str] = Field(default_factory=list)

    @property
    def hypotheses_ok(self) -> bool:
        return all(h.satisfied for h in self.hypotheses)
