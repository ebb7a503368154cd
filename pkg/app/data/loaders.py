"""
CSV ingestion for drugs and typed drug pairs, the type vocabulary, and split
manifests.
"""
import json
import logging
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import pandas as pd

from app.core.errors import DataError, MalformedRow, UnknownDrugId
from app.schemas.sample import DdiSample

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

DRUG_COLUMNS = ("drug_id", "smiles")
PAIR_COLUMNS = ("drug1_id", "drug2_id", "ddi_type")


def _read_csv(path: PathLike, columns: Sequence[str]) -> pd.DataFrame:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"{path}: file not found")
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise MalformedRow(str(exc).strip(), path, 1) from exc
    frame.columns = [str(c).strip() for c in frame.columns]
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise MalformedRow(f"header must contain {','.join(columns)} (missing {','.join(missing)})", path, 1)
    return frame


def _line(index: int) -> int:
    # data rows start on line 2, after the header
    return int(index) + 2


def load_drugs(path: PathLike) -> Dict[str, str]:
    """Read ``drug_id,smiles`` into an id -> SMILES mapping in file order."""
    frame = _read_csv(path, DRUG_COLUMNS)
    drugs: Dict[str, str] = {}
    for index, row in frame.iterrows():
        drug_id, smiles = row["drug_id"].strip(), row["smiles"].strip()
        if not drug_id or not smiles:
            raise MalformedRow("empty drug_id or smiles", path, _line(index))
        if drug_id in drugs:
            raise MalformedRow(f"duplicate drug id {drug_id!r}", path, _line(index))
        drugs[drug_id] = smiles
    logger.info("loaded %d drugs from %s", len(drugs), path)
    return drugs


def _label_key(label: str) -> Tuple[int, float, str]:
    try:
        return 0, float(label), label
    except ValueError:
        return 1, 0.0, label


class TypeVocabulary:
    """Ordered DDI type labels; the index of a label is the model's type id."""

    def __init__(self, labels: Iterable[str]):
        self.labels: List[str] = list(labels)
        if len(set(self.labels)) != len(self.labels):
            raise DataError("duplicate labels in type vocabulary")
        self._index = {label: i for i, label in enumerate(self.labels)}

    @classmethod
    def from_labels(cls, labels: Iterable[str]) -> "TypeVocabulary":
        """Distinct labels, numeric ones in numeric order before any others."""
        return cls(sorted(set(labels), key=_label_key))

    def __len__(self) -> int:
        return len(self.labels)

    def __contains__(self, label: str) -> bool:
        return label in self._index

    def __eq__(self, other) -> bool:
        return isinstance(other, TypeVocabulary) and self.labels == other.labels

    def index(self, label: str) -> int:
        return self._index[label]

    def label(self, index: int) -> str:
        return self.labels[index]

    def save(self, path: PathLike) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps({"labels": self.labels}, indent=2) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: PathLike) -> "TypeVocabulary":
        try:
            return cls(json.loads(Path(path).read_text(encoding="utf-8"))["labels"])
        except (OSError, ValueError, KeyError) as exc:
            raise DataError(f"{path}: unreadable type vocabulary ({exc})") from exc


def load_pairs(
    path: PathLike,
    drug_ids: Mapping[str, object],
    vocab: Optional[TypeVocabulary] = None,
) -> Tuple[List[DdiSample], TypeVocabulary]:
    """Read positive ``drug1_id,drug2_id,ddi_type`` rows.

    Without ``vocab`` the type vocabulary is built from the file. Duplicate
    (unordered pair, type) rows are dropped with a warning.
    """
    frame = _read_csv(path, PAIR_COLUMNS)
    rows = []
    for index, row in frame.iterrows():
        d1, d2, label = row["drug1_id"].strip(), row["drug2_id"].strip(), row["ddi_type"].strip()
        if not d1 or not d2 or not label:
            raise MalformedRow("empty drug1_id, drug2_id or ddi_type", path, _line(index))
        for drug_id in (d1, d2):
            if drug_id not in drug_ids:
                raise UnknownDrugId(drug_id, path, _line(index))
        rows.append((index, d1, d2, label))

    if vocab is None:
        vocab = TypeVocabulary.from_labels(label for _, _, _, label in rows)

    samples: List[DdiSample] = []
    seen = set()
    duplicates = 0
    for index, d1, d2, label in rows:
        if label not in vocab:
            raise MalformedRow(f"DDI type {label!r} is not in the type vocabulary", path, _line(index))
        sample = DdiSample(drug1_id=d1, drug2_id=d2, ddi_type=vocab.index(label), label=1)
        if sample.unordered_key in seen:
            duplicates += 1
            continue
        seen.add(sample.unordered_key)
        samples.append(sample)
    if duplicates:
        logger.warning("%s: dropped %d duplicate pairs", path, duplicates)
    logger.info("loaded %d positive pairs with %d DDI types from %s", len(samples), len(vocab), path)
    return samples, vocab


def samples_frame(samples: Sequence[DdiSample], vocab: TypeVocabulary) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "drug1_id": [s.drug1_id for s in samples],
            "drug2_id": [s.drug2_id for s in samples],
            "ddi_type": [vocab.label(s.ddi_type) for s in samples],
            "label": [s.label for s in samples],
        },
        columns=["drug1_id", "drug2_id", "ddi_type", "label"],
    )


def write_manifest(
    splits: Mapping[str, Sequence[DdiSample]],
    vocab: TypeVocabulary,
    path: PathLike,
) -> Path:
    """CSV of every sample with a ``split`` column, in the order the splits are given."""
    frames = []
    for name, samples in splits.items():
        frame = samples_frame(samples, vocab)
        frame["split"] = name
        frames.append(frame)
    manifest = pd.concat(frames, ignore_index=True) if frames else pd.DataFrame(
        columns=["drug1_id", "drug2_id", "ddi_type", "label", "split"]
    )
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    manifest.to_csv(path, index=False, lineterminator="\n")
    logger.info("wrote manifest %s (%d rows)", path, len(manifest))
    return path


def read_manifest(path: PathLike, vocab: TypeVocabulary) -> Dict[str, List[DdiSample]]:
    frame = _read_csv(path, PAIR_COLUMNS + ("label", "split"))
    splits: Dict[str, List[DdiSample]] = {}
    for index, row in frame.iterrows():
        label = row["ddi_type"]
        if label not in vocab:
            raise MalformedRow(f"DDI type {label!r} is not in the type vocabulary", path, _line(index))
        try:
            sample = DdiSample(
                drug1_id=row["drug1_id"], drug2_id=row["drug2_id"],
                ddi_type=vocab.index(label), label=int(row["label"]),
            )
        except ValueError as exc:
            raise MalformedRow(f"bad sample row ({exc.__class__.__name__})", path, _line(index)) from exc
        splits.setdefault(row["split"], []).append(sample)
    return splits


def load_requests(path: PathLike) -> Tuple[List[Tuple[str, str, str]], List[Optional[int]]]:
    """Tuples to score from a pairs-style CSV; an optional ``label`` column is carried through."""
    frame = _read_csv(path, PAIR_COLUMNS)
    requests: List[Tuple[str, str, str]] = []
    labels: List[Optional[int]] = []
    for index, row in frame.iterrows():
        request = (row["drug1_id"].strip(), row["drug2_id"].strip(), row["ddi_type"].strip())
        if not all(request):
            raise MalformedRow("empty drug1_id, drug2_id or ddi_type", path, _line(index))
        requests.append(request)
        raw = row["label"].strip() if "label" in frame.columns else ""
        if raw not in ("", "0", "1"):
            raise MalformedRow(f"label must be 0 or 1, got {raw!r}", path, _line(index))
        labels.append(int(raw) if raw else None)
    return requests, labels
