from pydantic import BaseModel, ConfigDict, Field, model_validator
from typing import Tuple
import enum


class DdiSample(BaseModel):
    """One (drug1, drug2, type) tuple with its binary label."""
    model_config = ConfigDict(frozen=True)

    drug1_id: str = Field(..., min_length=1)
    drug2_id: str = Field(..., min_length=1)
    ddi_type: int = Field(..., ge=0, description="Index into the type vocabulary")
    label: int = Field(..., ge=0, le=1)

    @property
    def unordered_key(self) -> Tuple[str, str, int]:
        """Identity used for collision checks: the pair is unordered, the type is not."""
        a, b = sorted((self.drug1_id, self.drug2_id))
        return a, b, self.ddi_type

    def swapped(self) -> "DdiSample":
        return self.model_copy(update={"drug1_id": self.drug2_id, "drug2_id": self.drug1_id})


class SplitMode(str, enum.Enum):
    TRANSDUCTIVE = "transductive"
    INDUCTIVE = "inductive"


class SplitSpec(BaseModel):
    """How a dataset is partitioned."""
    model_config = ConfigDict(frozen=True)

    mode: SplitMode = SplitMode.TRANSDUCTIVE
    ratios: Tuple[float, ...] = Field(default=(0.6, 0.2, 0.2))
    seed: int = Field(default=0, ge=0)
    fold: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _ratios_sum_to_one(self):
        if abs(sum(self.ratios) - 1.0) > 1e-9:
            raise ValueError(f"split ratios must sum to 1, got {self.ratios}")
        if any(r < 0 for r in self.ratios):
            raise ValueError("split ratios must be non-negative")
        return self
