"""
Everything a command needs before touching the model: parsed drugs,
positives, the type vocabulary, seeded random streams and the splits.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from app.chem.graph import MolecularGraph
from app.chem.smiles import load_drug_graphs
from app.chem.vocab import FEATURE_DIM
from app.core.config import RunConfig
from app.data.loaders import TypeVocabulary, load_drugs, load_pairs
from app.data.negatives import sample_negatives
from app.data.splits import InductiveSplit, holdout_split, split_inductive, split_transductive
from app.schemas.sample import DdiSample, SplitMode, SplitSpec

logger = logging.getLogger(__name__)


@dataclass
class DrugDataset:
    drugs: Dict[str, str]
    graphs: Dict[str, MolecularGraph]
    positives: List[DdiSample]
    vocab: TypeVocabulary

    @property
    def feature_dim(self) -> int:
        return FEATURE_DIM


def load_dataset(config: RunConfig, vocab: Optional[TypeVocabulary] = None) -> DrugDataset:
    drugs = load_drugs(config.drugs_path)
    graphs = load_drug_graphs(drugs)
    positives, vocab = load_pairs(config.pairs_path, drugs, vocab)
    logger.info("parsed %d drug graphs from %s", len(graphs), config.drugs_path)
    return DrugDataset(drugs=drugs, graphs=graphs, positives=positives, vocab=vocab)


@dataclass(frozen=True)
class RunStreams:
    """Independent generators spawned from one root SeedSequence((seed, fold))."""
    negatives: np.random.Generator
    split: np.random.Generator
    init: np.random.Generator
    train: np.random.Generator

    @classmethod
    def from_seed(cls, seed: int, fold: int = 0) -> "RunStreams":
        children = np.random.SeedSequence((seed, fold)).spawn(4)
        return cls(*(np.random.default_rng(child) for child in children))


@dataclass
class PreparedSplits:
    mode: SplitMode
    parts: Dict[str, List[DdiSample]]
    inductive: Optional[InductiveSplit] = None
    negatives: List[DdiSample] = field(default_factory=list)

    @property
    def train(self) -> List[DdiSample]:
        return self.parts["train"]

    @property
    def valid(self) -> List[DdiSample]:
        return self.parts["valid"]

    def evaluation_splits(self) -> List[str]:
        return [name for name in self.parts if name != "train"]


def prepare_splits(
    dataset: DrugDataset,
    spec: SplitSpec,
    streams: Optional[RunStreams] = None,
) -> PreparedSplits:
    """Sample one negative per positive over the whole drug pool, then split.

    Without ``streams`` the generators come from ``spec.seed`` and ``spec.fold``.

    Inductive: pairs are bucketed by how many of their drugs are unseen, and
    a stratified 80/20 hold-out of the seen-drug bucket is used for
    validation.
    """
    if streams is None:
        streams = RunStreams.from_seed(spec.seed, spec.fold)
    mode = spec.mode
    negatives = sample_negatives(dataset.positives, dataset.drugs, streams.negatives)
    samples = dataset.positives + negatives
    if mode == SplitMode.TRANSDUCTIVE:
        train, valid, test = split_transductive(samples, streams.split, spec.ratios)
        return PreparedSplits(mode, {"train": train, "valid": valid, "test": test}, negatives=negatives)

    split = split_inductive(list(dataset.drugs), samples, streams.split)
    train, valid = holdout_split(split.train, streams.split)
    return PreparedSplits(
        mode,
        {"train": train, "valid": valid, "s1": split.s1, "s2": split.s2},
        inductive=split,
        negatives=negatives,
    )
