import numpy as np
import pytest

from conftest import random_molecule, shuffle_atoms, isomorphic
from topomol.errors import DisconnectedError, ValenceError
from topomol.molgraph import (
    Atom,
    Bond,
    MolecularGraph,
    implicit_hydrogens,
    sybyl_type,
    SYBYL_VOCABULARY,
)
from topomol.smiles import parse_smiles


def test_bond_normalizes_endpoint_order():
    b = Bond(3, 1, 2)
    assert (b.i, b.j, b.order) == (1, 3, 2)


def test_bond_rejects_self_and_bad_order():
    with pytest.raises(ValueError):
        Bond(2, 2, 1)
    with pytest.raises(ValueError):
        Bond(0, 1, 4)


def test_atom_rejects_unknown_element_and_big_charge():
    with pytest.raises(ValueError):
        Atom(0, "Xx")
    with pytest.raises(ValenceError):
        Atom(0, "N", formal_charge=2)


def test_implicit_hydrogens_fill_valence():
    g = parse_smiles("C")
    assert implicit_hydrogens(g, 0) == 4
    g = parse_smiles("C=C")
    assert g.total_h(0) == g.total_h(1) == 2
    g = parse_smiles("[NH4+]")
    assert g.total_h(0) == 4
    g = parse_smiles("[O-]C")
    assert g.total_h(0) == 0


def test_overbonded_atom_raises():
    atoms = [Atom(i, "C") for i in range(6)]
    bonds = [Bond(0, i, 1) for i in range(1, 6)]
    with pytest.raises(ValenceError):
        MolecularGraph(atoms, bonds)


def test_disconnected_raises():
    with pytest.raises(DisconnectedError):
        MolecularGraph([Atom(0, "C"), Atom(1, "C")], [])


def test_duplicate_bond_raises():
    with pytest.raises(ValueError, match="duplicate"):
        MolecularGraph([Atom(0, "C"), Atom(1, "C")], [Bond(0, 1, 1), Bond(1, 0, 1)])


def test_bridges_and_ring_atoms():
    g = parse_smiles("CCc1ccccc1")  # ethylbenzene
    ring = g.ring_atoms
    assert len(ring) == 6
    # Every ring bond is a non-bridge, both chain bonds are bridges.
    bridges = g.bridge_bonds
    chain = [b for b in g.bonds if b.i not in ring or b.j not in ring]
    assert all((b.i, b.j) in bridges for b in chain)
    assert sum(1 for b in g.bonds if (b.i, b.j) in bridges) == 2


def test_ring_size_basis():
    assert parse_smiles("c1ccccc1").ring_sizes == (6,)
    assert sorted(parse_smiles("c1ccc2ccccc2c1").ring_sizes) == [6, 6]
    assert parse_smiles("C1CC1").ring_sizes == (3,)
    assert parse_smiles("CCCC").ring_sizes == ()
    # spiro: two rings sharing a single atom
    assert sorted(parse_smiles("C1CCC2(CC1)CCCC2").ring_sizes) == [5, 6]


def test_circuit_rank_matches_edge_count():
    rng = np.random.default_rng(5)
    for _ in range(30):
        g = random_molecule(rng, n_ring_closures=int(rng.integers(0, 3)))
        assert g.circuit_rank == len(g.bonds) - g.n_atoms + 1
        assert g.circuit_rank == len(g.ring_sizes)


def test_hop_distance():
    g = parse_smiles("CCCCC")
    assert g.hop_distance(0, 4) == 4
    assert g.hop_distance(2, 2) == 0
    g = parse_smiles("c1ccccc1")
    assert g.hop_distance(0, 3) == 3  # around the ring


def test_aromaticity_perception():
    assert len(parse_smiles("c1ccccc1").aromatic_atoms) == 6
    assert parse_smiles("C1CCCCC1").aromatic_atoms == frozenset()
    assert len(parse_smiles("c1ccncc1").aromatic_atoms) == 6  # pyridine
    assert len(parse_smiles("c1cc[nH]c1").aromatic_atoms) == 5  # pyrrole
    assert len(parse_smiles("c1ccoc1").aromatic_atoms) == 5  # furan
    assert len(parse_smiles("c1ccsc1").aromatic_atoms) == 5  # thiophene
    # cyclobutadiene written kekulized: alternating but 4 pi electrons
    assert parse_smiles("C1=CC=C1").aromatic_atoms == frozenset()
    # exocyclic carbonyls block the quinone ring
    assert parse_smiles("O=C1C=CC(=O)C=C1").aromatic_atoms == frozenset()


def test_aromaticity_survives_relabeling():
    rng = np.random.default_rng(11)
    g = parse_smiles("Cc1ccc2ncccc2c1")
    h = shuffle_atoms(g, rng)
    assert isomorphic(g, h)
    assert len(g.aromatic_atoms) == len(h.aromatic_atoms)
    assert sorted(g.ring_sizes) == sorted(h.ring_sizes)


def test_sybyl_types():
    g = parse_smiles("CC(N)=O")  # acetamide
    assert [sybyl_type(g, i).code for i in range(4)] == ["C.3", "C.2", "N.am", "O.2"]
    g = parse_smiles("CC(=O)[O-]")
    assert [sybyl_type(g, i).code for i in range(4)] == ["C.3", "C.2", "O.co2", "O.co2"]
    g = parse_smiles("C[N+](C)(C)C")
    assert sybyl_type(g, 1).code == "N.4"
    g = parse_smiles("C#N")
    assert [sybyl_type(g, i).code for i in range(2)] == ["C.1", "N.1"]
    g = parse_smiles("c1ccccc1")
    assert all(sybyl_type(g, i).code == "C.ar" for i in range(6))
    g = parse_smiles("CCO")
    assert sybyl_type(g, 2).code == "O.3"


def test_sybyl_codes_stay_in_vocabulary():
    rng = np.random.default_rng(23)
    vocab = set(SYBYL_VOCABULARY)
    for _ in range(25):
        g = random_molecule(rng, n_ring_closures=int(rng.integers(0, 2)))
        for i in range(g.n_atoms):
            assert sybyl_type(g, i).code in vocab


def test_atoms_reindexed_on_construction():
    g = MolecularGraph([Atom(7, "C"), Atom(3, "O")], [Bond(0, 1, 1)])
    assert [a.index for a in g.atoms] == [0, 1]
