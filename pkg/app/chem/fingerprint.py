"""
Extended-connectivity fingerprints (Morgan-style) and Tanimoto search.

Invariants are 64-bit blake2b digests of comma-joined integer/string fields,
so fingerprints are stable across processes and platforms. The hash differs
from other toolkits' ECFP implementations, which means absolute Tanimoto
values are not comparable with theirs; the nearest-neighbour protocol is.

Round 0 hashes (element, degree, H count, formal charge, ring flag, aromatic
flag). Round r hashes the atom's previous invariant with the sorted list of
(bond order code, neighbour invariant). An environment contributes a bit only
if its bond set grew in that round and no identical bond set was already
recorded, so isolated atoms contribute only their round-0 bit.
"""
import hashlib
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple, Union

from app.chem.graph import MolecularGraph
from app.core.errors import DataError, EmptyPool, WidthMismatch


_BOND_CODES = {1.0: 1, 2.0: 2, 3.0: 3, 4.0: 4, 1.5: 5}


def _stable_hash(*fields) -> int:
    payload = ",".join(str(f) for f in fields).encode("ascii")
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "little")


@dataclass(frozen=True)
class Fingerprint:
    bits: int
    width: int = 2048
    radius: int = 2

    def __post_init__(self):
        if self.width <= 0 or self.width & (self.width - 1):
            raise WidthMismatch(f"fingerprint width must be a power of two, got {self.width}")
        if self.bits < 0 or self.bits >> self.width:
            raise WidthMismatch(f"bitset does not fit in {self.width} bits")

    @property
    def count(self) -> int:
        return bin(self.bits).count("1")

    def on_bits(self) -> List[int]:
        return [i for i in range(self.width) if self.bits >> i & 1]

    def to_hex(self) -> str:
        return format(self.bits, f"0{self.width // 4}x")

    @classmethod
    def from_hex(cls, text: str, width: int = 2048, radius: int = 2) -> "Fingerprint":
        return cls(int(text, 16), width, radius)


def ecfp(graph: MolecularGraph, radius: int = 2, width: int = 2048) -> Fingerprint:
    n = graph.num_atoms
    incident: List[List[Tuple[int, int, int]]] = [[] for _ in range(n)]  # (neighbour, bond id, code)
    orders = graph.bond_orders or (1.0,) * len(graph.edges)
    for bond_id, ((i, j), order) in enumerate(zip(graph.edges, orders)):
        code = _BOND_CODES.get(order, 0)
        incident[i].append((j, bond_id, code))
        incident[j].append((i, bond_id, code))

    invariants = [
        _stable_hash("atom", m.element, m.degree, m.num_hs, m.formal_charge, int(m.in_ring), int(m.aromatic))
        for m in graph.atom_meta
    ]
    bits = 0
    for value in invariants:
        bits |= 1 << (value % width)

    environments: List[FrozenSet[int]] = [frozenset() for _ in range(n)]
    seen: set = set()
    for round_ in range(1, radius + 1):
        next_invariants: List[int] = []
        next_environments: List[FrozenSet[int]] = []
        for atom in range(n):
            neighbourhood = sorted((code, invariants[nbr]) for nbr, _, code in incident[atom])
            flat = [x for pair in neighbourhood for x in pair]
            next_invariants.append(_stable_hash("env", round_, invariants[atom], *flat))
            env = set(environments[atom])
            for nbr, bond_id, _ in incident[atom]:
                env.add(bond_id)
                env.update(environments[nbr])
            next_environments.append(frozenset(env))

        grown = sorted(
            (next_invariants[a], next_environments[a])
            for a in range(n)
            if next_environments[a] != environments[a]
        )
        for value, env in grown:
            if env in seen:
                continue
            seen.add(env)
            bits |= 1 << (value % width)

        invariants, environments = next_invariants, next_environments

    return Fingerprint(bits, width, radius)


def tanimoto(a: Fingerprint, b: Fingerprint) -> float:
    """|a ∧ b| / |a ∨ b|; two empty fingerprints count as identical (1.0)."""
    if a.width != b.width:
        raise WidthMismatch(f"cannot compare {a.width}-bit and {b.width}-bit fingerprints")
    union = bin(a.bits | b.bits).count("1")
    if union == 0:
        return 1.0
    return bin(a.bits & b.bits).count("1") / union


def nearest_neighbor(query: Fingerprint, pool: Mapping[str, Fingerprint]) -> Tuple[str, float]:
    """Most Tanimoto-similar pool member; ties go to the lexicographically smallest id."""
    if not pool:
        raise EmptyPool("nearest-neighbour search over an empty pool")
    best_id: Optional[str] = None
    best = -1.0
    for drug_id in sorted(pool):
        score = tanimoto(query, pool[drug_id])
        if score > best:
            best_id, best = drug_id, score
    return best_id, best


class FingerprintIndex:
    """Precomputed fingerprints for a drug pool; read-only after construction."""

    def __init__(self, fingerprints: Mapping[str, Fingerprint]):
        self.fingerprints: Dict[str, Fingerprint] = dict(fingerprints)

    @classmethod
    def build(cls, graphs: Mapping[str, MolecularGraph], radius: int = 2, width: int = 2048) -> "FingerprintIndex":
        return cls({drug_id: ecfp(graph, radius, width) for drug_id, graph in graphs.items()})

    def __contains__(self, drug_id: str) -> bool:
        return drug_id in self.fingerprints

    def __len__(self) -> int:
        return len(self.fingerprints)

    def subset(self, drug_ids: Iterable[str]) -> "FingerprintIndex":
        return FingerprintIndex({d: self.fingerprints[d] for d in drug_ids})

    def nearest(self, query: Fingerprint) -> Tuple[str, float]:
        return nearest_neighbor(query, self.fingerprints)


def mean_neighbor_similarity(queries: Mapping[str, Fingerprint], pool: FingerprintIndex) -> Optional[float]:
    """Average Tanimoto between each query drug and its nearest pool member."""
    if not queries:
        return None
    scores = [pool.nearest(fp)[1] for fp in queries.values()]
    return sum(scores) / len(scores)


def write_fingerprint_cache(path: Union[str, Path], fingerprints: Mapping[str, Fingerprint]) -> None:
    """One ``drug_id,hex`` line per drug, sorted by id."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        for drug_id in sorted(fingerprints):
            handle.write(f"{drug_id},{fingerprints[drug_id].to_hex()}\n")


def read_fingerprint_cache(path: Union[str, Path], width: int = 2048, radius: int = 2) -> Dict[str, Fingerprint]:
    path = Path(path)
    out: Dict[str, Fingerprint] = {}
    for number, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        drug_id, sep, hex_bits = line.rpartition(",")
        if not sep or not drug_id:
            raise DataError(f"{path}:{number}: expected 'drug_id,hex'")
        try:
            out[drug_id] = Fingerprint.from_hex(hex_bits.strip(), width, radius)
        except ValueError as exc:
            raise DataError(f"{path}:{number}: {exc}") from exc
    return out
