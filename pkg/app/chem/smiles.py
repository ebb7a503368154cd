"""
SMILES reader for the subset found in drug vocabularies.

Supported: organic-subset atoms, bracket atoms (isotope, chirality, H count,
charge, atom class), bonds ``- = # $ :`` plus ``/ \\`` (read as single),
branches, ring closures 1-9 and %nn, aromatic lowercase atoms and '.'
separated components. Hydrogens end up in each heavy atom's H count; explicit
``[H]`` atoms attached to a heavy atom are folded into it.
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Set, Tuple

from app.chem.featurize import featurize_atoms
from app.chem.graph import AtomMeta, MolecularGraph
from app.chem.vocab import AROMATIC_BRACKET, PERIODIC_TABLE, Chirality, Hybridization
from app.core.errors import (
    EmptyInput,
    SmilesError,
    UnbalancedParen,
    UnknownAtomSymbol,
    UnmatchedRingBond,
)

logger = logging.getLogger(__name__)

ORGANIC_VALENCES: Dict[str, Tuple[int, ...]] = {
    "B": (3,), "C": (4,), "N": (3, 5), "O": (2,), "P": (3, 5),
    "S": (2, 4, 6), "F": (1,), "Cl": (1,), "Br": (1,), "I": (1,),
}
AROMATIC_ORGANIC = {"b", "c", "n", "o", "p", "s"}
BOND_ORDERS = {"-": 1.0, "=": 2.0, "#": 3.0, "$": 4.0, ":": 1.5, "/": 1.0, "\\": 1.0}
AROMATIC = 1.5


@dataclass
class _Atom:
    element: str
    aromatic: bool
    position: int
    bracket: bool = False
    charge: int = 0
    hs: int = 0
    chirality: Chirality = Chirality.UNSPECIFIED
    isotope: Optional[int] = None


class _Parser:
    def __init__(self, smiles: str):
        self.s = smiles
        self.i = 0
        self.atoms: List[_Atom] = []
        self.bonds: Dict[Tuple[int, int], float] = {}
        self.closures: List[Tuple[int, int]] = []

    def fail(self, kind, message: str, position: Optional[int] = None):
        raise kind(message, self.s, self.i if position is None else position)

    # -- tokens -------------------------------------------------------------

    def _digits(self) -> Optional[int]:
        start = self.i
        while self.i < len(self.s) and self.s[self.i].isdigit():
            self.i += 1
        return int(self.s[start:self.i]) if self.i > start else None

    def _organic_atom(self) -> _Atom:
        start = self.i
        two = self.s[start:start + 2]
        if two in ("Cl", "Br"):
            self.i += 2
            return _Atom(two, False, start)
        ch = self.s[start]
        if ch in ORGANIC_VALENCES:
            self.i += 1
            return _Atom(ch, False, start)
        if ch in AROMATIC_ORGANIC:
            self.i += 1
            return _Atom(ch.upper(), True, start)
        self.fail(UnknownAtomSymbol, f"unknown atom symbol {ch!r}")

    def _bracket_atom(self) -> _Atom:
        start = self.i
        self.i += 1  # '['
        isotope = self._digits()

        symbol = None
        for width in (2, 1):
            candidate = self.s[self.i:self.i + width]
            if len(candidate) == width and (candidate in PERIODIC_TABLE or candidate in AROMATIC_BRACKET):
                symbol = candidate
                break
        if symbol is None:
            self.fail(UnknownAtomSymbol, f"unknown bracket atom symbol {self.s[self.i:self.i + 2]!r}")
        self.i += len(symbol)
        aromatic = symbol[0].islower()
        element = symbol.capitalize() if aromatic else symbol

        chirality = Chirality.UNSPECIFIED
        if self.s.startswith("@@", self.i):
            chirality = Chirality.CW
            self.i += 2
        elif self.s.startswith("@", self.i):
            self.i += 1
            chirality = Chirality.CCW
            if self.s[self.i:self.i + 2] in ("TH", "AL", "SP", "TB", "OH"):
                tag = self.s[self.i:self.i + 2]
                self.i += 2
                number = self._digits()
                if tag in ("TH", "AL") and number in (1, 2):
                    chirality = Chirality.CCW if number == 1 else Chirality.CW
                else:
                    chirality = Chirality.UNSPECIFIED

        hs = 0
        if self.s.startswith("H", self.i):
            self.i += 1
            count = self._digits()
            hs = 1 if count is None else count

        charge = 0
        while self.i < len(self.s) and self.s[self.i] in "+-":
            sign = 1 if self.s[self.i] == "+" else -1
            self.i += 1
            count = self._digits()
            charge += sign * (1 if count is None else count)

        if self.s.startswith(":", self.i):
            self.i += 1
            if self._digits() is None:
                self.fail(UnknownAtomSymbol, "atom class needs a number")

        if not self.s.startswith("]", self.i):
            self.fail(UnknownAtomSymbol, "unterminated bracket atom", start)
        self.i += 1
        return _Atom(element, aromatic, start, bracket=True, charge=charge, hs=hs,
                     chirality=chirality, isotope=isotope)

    # -- graph assembly -----------------------------------------------------

    def _bond_order(self, symbol: Optional[str], a: int, b: int) -> float:
        if symbol is not None:
            return BOND_ORDERS[symbol]
        if self.atoms[a].aromatic and self.atoms[b].aromatic:
            return AROMATIC
        return 1.0

    def _add_bond(self, a: int, b: int, order: float, position: int) -> None:
        key = (min(a, b), max(a, b))
        if a == b:
            self.fail(UnmatchedRingBond, "ring closure bonds an atom to itself", position)
        if key in self.bonds:
            self.fail(UnmatchedRingBond, f"duplicate bond between atoms {a} and {b}", position)
        self.bonds[key] = order

    def parse(self) -> None:
        s = self.s
        prev: Optional[int] = None
        branches: List[Tuple[int, int]] = []
        rings: Dict[int, Tuple[int, Optional[str], int]] = {}
        pending: Optional[str] = None

        while self.i < len(s):
            ch = s[self.i]
            if ch == "(":
                if prev is None:
                    self.fail(UnbalancedParen, "branch opened before any atom")
                branches.append((prev, self.i))
                self.i += 1
            elif ch == ")":
                if not branches:
                    self.fail(UnbalancedParen, "')' without a matching '('")
                if pending is not None:
                    self.fail(SmilesError, f"bond {pending!r} not followed by an atom")
                prev = branches.pop()[0]
                self.i += 1
            elif ch in BOND_ORDERS:
                if pending is not None:
                    self.fail(SmilesError, "two consecutive bond symbols")
                pending = ch
                self.i += 1
            elif ch == ".":
                if pending is not None:
                    self.fail(SmilesError, f"bond {pending!r} not followed by an atom")
                prev = None
                self.i += 1
            elif ch.isdigit() or ch == "%":
                position = self.i
                if prev is None:
                    self.fail(UnmatchedRingBond, "ring-closure label before any atom")
                if ch == "%":
                    label = s[self.i + 1:self.i + 3]
                    if len(label) != 2 or not label.isdigit():
                        self.fail(UnmatchedRingBond, "'%' must be followed by two digits")
                    number = int(label)
                    self.i += 3
                else:
                    number = int(ch)
                    self.i += 1
                if number in rings:
                    partner, opening_bond, _ = rings.pop(number)
                    symbol = pending if pending is not None else opening_bond
                    self._add_bond(prev, partner, self._bond_order(symbol, prev, partner), position)
                    self.closures.append((partner, prev))
                else:
                    rings[number] = (prev, pending, position)
                pending = None
            else:
                if not ch.isascii() or ch.isspace():
                    self.fail(UnknownAtomSymbol, f"unexpected character {ch!r}")
                atom = self._bracket_atom() if ch == "[" else self._organic_atom()
                index = len(self.atoms)
                self.atoms.append(atom)
                if prev is not None:
                    self._add_bond(prev, index, self._bond_order(pending, prev, index), atom.position)
                elif pending is not None:
                    self.fail(SmilesError, f"bond {pending!r} has no preceding atom", atom.position)
                pending = None
                prev = index

        if rings:
            number, (_, _, position) = min(rings.items(), key=lambda item: item[1][2])
            self.fail(UnmatchedRingBond, f"ring bond {number} opened but never closed", position)
        if branches:
            self.fail(UnbalancedParen, "'(' never closed", branches[-1][1])
        if pending is not None:
            self.fail(SmilesError, f"trailing bond {pending!r}")


def _implicit_hs(atom: _Atom, bond_sum: float) -> int:
    valences = ORGANIC_VALENCES.get(atom.element)
    if valences is None:
        return 0
    if atom.aromatic:
        # one electron goes to the aromatic system
        return max(0, valences[0] - int(round(bond_sum)) - 1)
    for valence in valences:
        if valence >= bond_sum:
            return int(valence - round(bond_sum))
    return 0


def _ring_atoms(n: int, tree_edges: List[Tuple[int, int]], closures: List[Tuple[int, int]]) -> Set[int]:
    """Atoms on a cycle: the tree path of every ring-closure bond."""
    tree: List[List[int]] = [[] for _ in range(n)]
    for a, b in tree_edges:
        tree[a].append(b)
        tree[b].append(a)
    in_ring: Set[int] = set()
    for start, goal in closures:
        parent = {start: start}
        queue = [start]
        for node in queue:
            if node == goal:
                break
            for nxt in tree[node]:
                if nxt not in parent:
                    parent[nxt] = node
                    queue.append(nxt)
        if goal not in parent:
            continue
        node = goal
        in_ring.add(goal)
        while node != start:
            node = parent[node]
            in_ring.add(node)
    return in_ring


def _hybridization(aromatic: bool, orders: List[float], num_hs: int) -> Hybridization:
    if aromatic:
        return Hybridization.SP2
    steric = len(orders) + num_hs
    if steric == 0:
        return Hybridization.UNSPECIFIED
    doubles = sum(1 for o in orders if o == 2.0)
    triples = sum(1 for o in orders if o >= 3.0)
    if triples or doubles >= 2:
        return Hybridization.SP
    if doubles == 1 or any(o == AROMATIC for o in orders):
        return Hybridization.SP2
    if steric >= 6:
        return Hybridization.SP3D2
    if steric == 5:
        return Hybridization.SP3D
    return Hybridization.SP3


def parse_smiles(smiles: str) -> MolecularGraph:
    """Parse a SMILES string into a featurized heavy-atom graph."""
    if smiles is None or not smiles.strip():
        raise EmptyInput("empty SMILES string", smiles or "")
    smiles = smiles.strip()
    parser = _Parser(smiles)
    parser.parse()
    atoms = parser.atoms
    n = len(atoms)

    # Fold explicit [H] atoms hanging off a heavy atom into that atom's H count.
    neighbours: List[List[int]] = [[] for _ in range(n)]
    for a, b in parser.bonds:
        neighbours[a].append(b)
        neighbours[b].append(a)
    folded: Set[int] = set()
    extra_hs = [0] * n
    for index, atom in enumerate(atoms):
        if (atom.element == "H" and atom.charge == 0 and atom.isotope is None
                and len(neighbours[index]) == 1 and atoms[neighbours[index][0]].element != "H"):
            folded.add(index)
            extra_hs[neighbours[index][0]] += 1

    keep = [index for index in range(n) if index not in folded]
    remap = {old: new for new, old in enumerate(keep)}
    edges: List[Tuple[int, int]] = []
    orders: List[float] = []
    per_atom: List[List[float]] = [[] for _ in keep]
    for (a, b), order in parser.bonds.items():
        if a in folded or b in folded:
            continue
        i, j = remap[a], remap[b]
        edges.append((min(i, j), max(i, j)))
        orders.append(order)
        per_atom[i].append(order)
        per_atom[j].append(order)

    closure_set = {(min(a, b), max(a, b)) for a, b in parser.closures}
    tree_edges = [(remap[a], remap[b]) for (a, b) in parser.bonds
                  if (a, b) not in closure_set and a not in folded and b not in folded]
    closures = [(remap[a], remap[b]) for a, b in parser.closures]
    ring = _ring_atoms(len(keep), tree_edges, closures)

    metas: List[AtomMeta] = []
    for new, old in enumerate(keep):
        atom = atoms[old]
        bond_sum = sum(1.0 if o == AROMATIC else o for o in per_atom[new])
        if atom.bracket:
            num_hs = atom.hs + extra_hs[old]
        else:
            num_hs = _implicit_hs(atom, bond_sum + extra_hs[old]) + extra_hs[old]
        metas.append(AtomMeta(
            element=atom.element,
            degree=len(per_atom[new]),
            formal_charge=atom.charge,
            num_hs=num_hs,
            hybridization=_hybridization(atom.aromatic, per_atom[new], num_hs),
            aromatic=atom.aromatic,
            in_ring=new in ring,
            chirality=atom.chirality,
        ))

    return MolecularGraph(
        node_features=featurize_atoms(metas),
        edges=tuple(edges),
        atom_meta=tuple(metas),
        bond_orders=tuple(orders),
        smiles=smiles,
    )


def load_drug_graphs(drugs: Mapping[str, str]) -> Dict[str, MolecularGraph]:
    """Parse every drug once; parse errors name the offending drug id."""
    graphs: Dict[str, MolecularGraph] = {}
    for drug_id, smiles in drugs.items():
        try:
            graphs[drug_id] = parse_smiles(smiles)
        except SmilesError as exc:
            raise type(exc)(f"drug {drug_id!r}: {exc.reason}", exc.smiles, exc.position) from exc
    logger.info("Parsed %d molecular graphs", len(graphs))
    return graphs
