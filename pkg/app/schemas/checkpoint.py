from pydantic import BaseModel, Field
from typing import List, Optional, Tuple

from app.schemas.model import ModelConfig
from app.schemas.sample import SplitMode


class TensorEntry(BaseModel):
    """Where one parameter lives in the payload (offset/size in float64 elements)."""
    name: str
    shape: Tuple[int, int]
    offset: int = Field(..., ge=0)


class CheckpointHeader(BaseModel):
    format_version: int = 1
    model: ModelConfig
    type_labels: List[str] = Field(..., description="Type vocabulary in index order")
    mode: SplitMode = Field(SplitMode.TRANSDUCTIVE, description="Split setting the model was trained under")
    seed: int = 0
    fold: int = 0
    epoch: int = Field(0, description="Epochs completed when the checkpoint was written")
    valid_auc: Optional[float] = None
    tensors: List[TensorEntry] = Field(default_factory=list)
