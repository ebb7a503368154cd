"""
Fixed vocabularies for the eight one-hot atom attributes.

Each categorical vocabulary ends with a reserved "other" slot so the feature
width F never depends on the dataset. The two boolean attributes use two
slots (False, True).
"""
import enum
from typing import Dict, List, Sequence

ELEMENTS: List[str] = [
    "C", "N", "O", "S", "F", "Cl", "Br", "I", "P", "B",
    "Si", "Se", "Na", "K", "Li", "Mg", "Ca", "Fe", "Zn", "Cu",
    "Co", "Mn", "Al", "As", "Hg", "Pt", "Au", "Ag", "Sb", "Bi",
    "Gd", "Tc", "Ga", "In", "Sn", "Ti", "Cr", "Ni", "Sr", "Ba",
]

# Every symbol the bracket-atom grammar accepts (elements not in ELEMENTS
# featurize to the "other" slot).
PERIODIC_TABLE = frozenset(
    """H He Li Be B C N O F Ne Na Mg Al Si P S Cl Ar K Ca Sc Ti V Cr Mn Fe Co Ni
    Cu Zn Ga Ge As Se Br Kr Rb Sr Y Zr Nb Mo Tc Ru Rh Pd Ag Cd In Sn Sb Te I Xe
    Cs Ba La Ce Pr Nd Pm Sm Eu Gd Tb Dy Ho Er Tm Yb Lu Hf Ta W Re Os Ir Pt Au Hg
    Tl Pb Bi Po At Rn Fr Ra Ac Th Pa U Np Pu Am Cm Bk Cf Es Fm Md No Lr""".split()
)

# Lowercase aromatic symbols allowed inside brackets.
AROMATIC_BRACKET = frozenset({"b", "c", "n", "o", "p", "s", "se", "as", "te"})


class Hybridization(str, enum.Enum):
    S = "S"
    SP = "SP"
    SP2 = "SP2"
    SP3 = "SP3"
    SP3D = "SP3D"
    SP3D2 = "SP3D2"
    UNSPECIFIED = "UNSPECIFIED"


class Chirality(str, enum.Enum):
    UNSPECIFIED = "UNSPECIFIED"
    CW = "CW"     # @@
    CCW = "CCW"   # @


DEGREES: List[int] = [0, 1, 2, 3, 4, 5]
FORMAL_CHARGES: List[int] = [-2, -1, 0, 1, 2]
HYDROGEN_COUNTS: List[int] = [0, 1, 2, 3, 4]
HYBRIDIZATIONS: List[Hybridization] = list(Hybridization)
CHIRALITIES: List[Chirality] = list(Chirality)

# (name, vocabulary, has "other" slot)
ATTRIBUTE_BLOCKS = (
    ("element", ELEMENTS, True),
    ("degree", DEGREES, True),
    ("formal_charge", FORMAL_CHARGES, True),
    ("num_hs", HYDROGEN_COUNTS, True),
    ("hybridization", HYBRIDIZATIONS, True),
    ("aromatic", [False, True], False),
    ("in_ring", [False, True], False),
    ("chirality", CHIRALITIES, True),
)


def block_width(vocabulary: Sequence, has_other: bool) -> int:
    return len(vocabulary) + (1 if has_other else 0)


BLOCK_WIDTHS: Dict[str, int] = {name: block_width(vocab, other) for name, vocab, other in ATTRIBUTE_BLOCKS}
FEATURE_DIM: int = sum(BLOCK_WIDTHS.values())
