"""
Tests for the SMILES reader: atom counts, hydrogens, rings and error reporting.
"""
import pytest

from app.chem.smiles import load_drug_graphs, parse_smiles
from app.chem.vocab import Chirality, Hybridization
from app.core.errors import EmptyInput, UnbalancedParen, UnknownAtomSymbol, UnmatchedRingBond

HEAVY_ATOM_COUNTS = [
    ("C", 1),
    ("CCO", 3),
    ("c1ccccc1", 6),
    ("CC(=O)O", 4),
    ("Cn1cnc2c1c(=O)n(C)c(=O)n2C", 14),
    ("[NH4+]", 1),
    ("C[N+](C)(C)C", 5),
    ("[O-]C(=O)C", 4),
    ("OC[C@H](N)C(=O)O", 7),
    ("c1ccc2ccccc2c1", 10),
    ("[Na+].[Cl-]", 2),
    ("CC(=O)Oc1ccccc1C(=O)O", 13),
    ("C1CC1", 3),
    ("C%10CC%10", 3),
    ("[H]C([H])([H])[H]", 1),
    ("[2H]C", 2),
    ("c1ccncc1", 6),
    ("c1cc[nH]c1", 5),
    ("ClC(Cl)(Cl)Cl", 5),
    ("N#N", 2),
    ("O=C=O", 3),
    ("CC(C)(C)C", 5),
    ("C1CCC2CCCCC2C1", 10),
    ("CS(=O)(=O)C", 5),
    ("[Fe+2]", 1),
    ("C/C=C/C", 4),
    ("OP(=O)(O)O", 5),
    ("BrCCBr", 4),
    ("c1ccc(cc1)-c1ccccc1", 12),
    ("CC(C)Cc1ccc(cc1)C(C)C(=O)O", 15),
]


@pytest.mark.parametrize("smiles, expected", HEAVY_ATOM_COUNTS)
def test_heavy_atom_counts(smiles, expected):
    """Test that the parser keeps exactly the heavy atoms of each molecule."""
    # Act
    graph = parse_smiles(smiles)

    # Assert
    assert graph.num_atoms == expected
    assert graph.node_features.shape[0] == expected


def test_implicit_hydrogens_on_ethanol(ethanol):
    """Test implicit H counts follow the default valences."""
    # Assert
    assert [m.num_hs for m in ethanol.atom_meta] == [3, 2, 1]
    assert [m.degree for m in ethanol.atom_meta] == [1, 2, 1]


def test_aromatic_hydrogens():
    """Test aromatic carbon keeps one H, pyridine nitrogen none, pyrrole [nH] one."""
    # Act
    benzene = parse_smiles("c1ccccc1")
    pyridine = parse_smiles("c1ccncc1")
    pyrrole = parse_smiles("c1cc[nH]c1")

    # Assert
    assert all(m.num_hs == 1 and m.aromatic for m in benzene.atom_meta)
    assert pyridine.atom_meta[3].element == "N"
    assert pyridine.atom_meta[3].num_hs == 0
    assert pyrrole.atom_meta[3].num_hs == 1


def test_explicit_hydrogens_are_folded():
    """Test that [H] neighbours become part of the heavy atom's H count."""
    # Act
    graph = parse_smiles("[H]C([H])([H])[H]")

    # Assert
    assert graph.num_atoms == 1
    assert graph.atom_meta[0].num_hs == 4
    assert graph.edges == ()


def test_bracket_atom_charge_and_hydrogens():
    """Test bracket atoms carry their written charge and H count."""
    # Act
    ammonium = parse_smiles("[NH4+]")
    iron = parse_smiles("[Fe+2]")

    # Assert
    assert ammonium.atom_meta[0].formal_charge == 1
    assert ammonium.atom_meta[0].num_hs == 4
    assert iron.atom_meta[0].formal_charge == 2
    assert iron.atom_meta[0].num_hs == 0


def test_chirality_tags():
    """Test @ and @@ map to the two chirality classes."""
    # Act
    ccw = parse_smiles("N[C@H](C)O")
    cw = parse_smiles("N[C@@H](C)O")

    # Assert
    assert ccw.atom_meta[1].chirality == Chirality.CCW
    assert cw.atom_meta[1].chirality == Chirality.CW
    assert ccw.atom_meta[0].chirality == Chirality.UNSPECIFIED


def test_ring_membership():
    """Test only atoms on a cycle are flagged as ring atoms."""
    # Act
    graph = parse_smiles("CC1CC1")

    # Assert
    assert [m.in_ring for m in graph.atom_meta] == [False, True, True, True]


def test_fused_ring_membership():
    """Test every atom of naphthalene lies on a ring."""
    # Act
    graph = parse_smiles("c1ccc2ccccc2c1")

    # Assert
    assert all(m.in_ring for m in graph.atom_meta)
    assert len(graph.edges) == 11


def test_hybridization():
    """Test single, double, triple and aromatic environments."""
    # Act
    ethane = parse_smiles("CC")
    ethene = parse_smiles("C=C")
    ethyne = parse_smiles("C#C")
    benzene = parse_smiles("c1ccccc1")

    # Assert
    assert ethane.atom_meta[0].hybridization == Hybridization.SP3
    assert ethene.atom_meta[0].hybridization == Hybridization.SP2
    assert ethyne.atom_meta[0].hybridization == Hybridization.SP
    assert benzene.atom_meta[0].hybridization == Hybridization.SP2


def test_bond_orders():
    """Test bond orders run parallel to edges, 1.5 for aromatic bonds."""
    # Act
    acid = parse_smiles("CC(=O)O")
    benzene = parse_smiles("c1ccccc1")

    # Assert
    assert sorted(acid.bond_orders) == [1.0, 1.0, 2.0]
    assert benzene.bond_orders == (1.5,) * 6


def test_disconnected_components():
    """Test '.' separates components without a bond between them."""
    # Act
    graph = parse_smiles("[Na+].[Cl-]")

    # Assert
    assert graph.num_atoms == 2
    assert graph.edges == ()


def test_edges_are_undirected_and_ordered(ethanol):
    """Test edges are stored once as (low, high)."""
    # Assert
    assert set(ethanol.edges) == {(0, 1), (1, 2)}
    assert all(i < j for i, j in ethanol.edges)


@pytest.mark.parametrize(
    "smiles, error, position",
    [
        ("", EmptyInput, None),
        ("   ", EmptyInput, None),
        ("C1CC", UnmatchedRingBond, 1),
        ("C(C", UnbalancedParen, 1),
        ("CC)", UnbalancedParen, 2),
        ("CXC", UnknownAtomSymbol, 1),
        ("C[Xx]", UnknownAtomSymbol, 2),
    ],
)
def test_parse_errors(smiles, error, position):
    """Test malformed input raises the matching error with the offending position."""
    # Act
    with pytest.raises(error) as info:
        parse_smiles(smiles)

    # Assert
    assert info.value.position == position


def test_load_drug_graphs_names_the_drug():
    """Test a parse failure during bulk loading mentions the drug id."""
    # Act
    with pytest.raises(UnmatchedRingBond) as info:
        load_drug_graphs({"good": "CCO", "bad": "C1CC"})

    # Assert
    assert "bad" in str(info.value)
    assert info.value.smiles == "C1CC"


def test_load_drug_graphs_parses_all():
    """Test every drug gets a graph."""
    # Act
    graphs = load_drug_graphs({"a": "C", "b": "CCO"})

    # Assert
    assert {k: g.num_atoms for k, g in graphs.items()} == {"a": 1, "b": 3}
