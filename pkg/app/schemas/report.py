from pydantic import BaseModel, Field
from typing import Dict, List, Optional


class MetricsReport(BaseModel):
    """Binary classification metrics at threshold 0.5."""
    acc: float
    auc: Optional[float] = Field(None, description="Absent when only one class is present")
    f1: float
    precision: float
    recall: float
    count: int
    notes: List[str] = Field(default_factory=list)


class MetricSummary(BaseModel):
    """Mean and population standard deviation of one metric across folds."""
    mean: Optional[float] = None
    std: Optional[float] = None


class FoldSummary(BaseModel):
    """Per-fold reports and their mean±std."""
    folds: List[int]
    reports: List[MetricsReport]
    summary: Dict[str, MetricSummary]


class EvaluationReport(BaseModel):
    """What `eval` writes: one MetricsReport per requested split."""
    mode: str
    fold: int
    splits: Dict[str, MetricsReport]
    mean_neighbor_similarity: Optional[float] = Field(
        None, description="Inductive only: mean Tanimoto between new drugs and their nearest old drug"
    )


class EpochRecord(BaseModel):
    """One line of the training log."""
    epoch: int
    lr: float
    loss: float
    train_acc: float
    valid: Optional[MetricsReport] = None
    best: bool = False


class InteractionRow(BaseModel):
    """One row of the ranked substructure interaction table."""
    rank: int
    pattern_drug1: int
    pattern_drug2: int
    score: float = Field(..., ge=-1.0, le=1.0)


class AtomPattern(BaseModel):
    atom: int
    element: str
    pattern: int


class DrugExplanation(BaseModel):
    drug_id: str
    smiles: str
    atoms: List[AtomPattern]


class Explanation(BaseModel):
    """Output of `explain` for one (drug1, drug2, type) tuple."""
    ddi_type: str
    probability: float
    drug1: DrugExplanation
    drug2: DrugExplanation
    similarity: List[List[float]]
    top_interactions: List[InteractionRow]


class PredictionRow(BaseModel):
    drug1_id: str
    drug2_id: str
    ddi_type: str
    probability: float
    label: Optional[int] = None


class TrainSummary(BaseModel):
    """What `train` prints once it finishes."""
    checkpoint: str
    best_checkpoint: Optional[str] = None
    best_epoch: Optional[int] = None
    best_score: Optional[float] = None
    epochs: int
    final_loss: float


class SplitSummary(BaseModel):
    """What `split` prints: where the manifest went and how large each part is."""
    mode: str
    seed: int
    fold: int
    manifest: str
    counts: Dict[str, int]
    new_drugs: Optional[int] = None
    old_drugs: Optional[int] = None
