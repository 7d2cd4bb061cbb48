"""Deterministic molecule-editing MDP.

States carry an immutable molecule, a step budget, and the episode's origin
molecule.  Actions are atom additions, bond additions (including order
upgrades), bond removals (including order downgrades), and an optional
no-op; enumeration only ever emits actions whose application yields a
valid, connected molecule.  State featurization concatenates the kernel
features, the persistence image, the fingerprint bits, and the normalized
remaining-step count into one fixed-length vector.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass, field, replace

import numpy as np

from .elements import ELEMENTS
from .errors import ConfigError, InvalidAction
from .fingerprint import morgan_fingerprint
from .metric import DEFAULT_BOND_LENGTH, geodesic_distances
from .molgraph import Atom, Bond, MolecularGraph
from .mwcg import MwcgConfig, mwcg_features
from .smiles import write_smiles
from .topology import (
    DEFAULT_MAX_FILTRATION,
    ImageConfig,
    persistence_image,
    rips_persistence,
)

__all__ = [
    "FeaturizerConfig",
    "EnvConfig",
    "EnvState",
    "AtomAddition",
    "BondAddition",
    "BondRemoval",
    "NoOp",
    "MolAction",
    "valid_actions",
    "apply_action",
    "featurize",
    "is_terminal",
    "initial_state",
    "FeatureCache",
]


@dataclass(frozen=True)
class FeaturizerConfig:
    mwcg: MwcgConfig = field(default_factory=MwcgConfig)
    image: ImageConfig = field(default_factory=ImageConfig)
    bond_length_scale: float = DEFAULT_BOND_LENGTH
    max_filtration: float = DEFAULT_MAX_FILTRATION
    fp_radius: int = 2
    fp_nbits: int = 1024

    def __post_init__(self):
        if self.bond_length_scale <= 0:
            raise ConfigError("bond_length_scale must be positive")
        if self.max_filtration <= self.bond_length_scale:
            raise ConfigError(
                "max_filtration must exceed bond_length_scale or every "
                "edge is excluded from the complex"
            )
        if self.fp_radius < 0 or self.fp_nbits < 1:
            raise ConfigError("bad fingerprint settings")

    @property
    def length(self) -> int:
        """Featurized state vector length for this configuration."""
        rows, cols = self.image.rows, self.image.cols
        return self.mwcg.n_features + rows * cols * 2 + self.fp_nbits + 1


@dataclass(frozen=True)
class EnvConfig:
    allowed_elements: tuple[str, ...] = ("C", "N", "O")
    max_steps: int = 20
    allow_no_op: bool = True
    allowed_ring_sizes: tuple[int, ...] = (3, 4, 5, 6, 7)
    featurizer: FeaturizerConfig = field(default_factory=FeaturizerConfig)

    def __post_init__(self):
        if self.max_steps < 1:
            raise ConfigError(f"max_steps must be >= 1, got {self.max_steps}")
        bad = set(self.allowed_elements) - {"C", "N", "O"}
        if bad:
            raise ConfigError(f"allowed_elements outside {{C,N,O}}: {sorted(bad)}")
        if not set(self.allowed_ring_sizes) <= set(range(3, 9)):
            raise ConfigError(
                f"allowed_ring_sizes outside 3..8: {self.allowed_ring_sizes}"
            )


@dataclass(frozen=True)
class EnvState:
    molecule: MolecularGraph
    steps_remaining: int
    origin: MolecularGraph

    def __post_init__(self):
        if self.steps_remaining < 0:
            raise ValueError("negative steps_remaining")


@dataclass(frozen=True, order=True)
class AtomAddition:
    element: str
    attach_atom: int
    bond_order: int


@dataclass(frozen=True, order=True)
class BondAddition:
    atom_i: int
    atom_j: int
    order_delta: int = 1


@dataclass(frozen=True, order=True)
class BondRemoval:
    atom_i: int
    atom_j: int
    order_delta: int = -1


@dataclass(frozen=True, order=True)
class NoOp:
    pass


MolAction = AtomAddition | BondAddition | BondRemoval | NoOp

# Deterministic ordering across variants: alphabetical by class name, then
# the dataclass order within a variant.
_VARIANT_ORDER = {AtomAddition: 0, BondAddition: 1, BondRemoval: 2, NoOp: 3}


def action_sort_key(a: MolAction):
    return (_VARIANT_ORDER[type(a)], a)


def initial_state(molecule: MolecularGraph, cfg: EnvConfig) -> EnvState:
    return EnvState(molecule, cfg.max_steps, molecule)


def is_terminal(s: EnvState) -> bool:
    return s.steps_remaining == 0


def valid_actions(s: EnvState, cfg: EnvConfig) -> list[MolAction]:
    """Every chemically valid single edit of the current molecule.

    Atom additions respect both endpoint valences; new bonds between
    non-adjacent atoms must close a ring of an allowed size; deleting an
    order-1 bond is offered only when the molecule stays connected.
    Terminal states offer nothing, so every listed action is applicable.
    """
    if is_terminal(s):
        return []
    g = s.molecule
    out: set[MolAction] = set()
    for element in cfg.allowed_elements:
        new_cap = ELEMENTS[element].default_valence
        for i in range(g.n_atoms):
            max_order = min(g.free_valence(i), new_cap, 3)
            for order in range(1, max_order + 1):
                out.add(AtomAddition(element, i, order))
    for i in range(g.n_atoms):
        for j in range(i + 1, g.n_atoms):
            order = g.bond_order(i, j)
            if order == 0:
                if g.free_valence(i) >= 1 and g.free_valence(j) >= 1:
                    ring = g.hop_distance(i, j) + 1
                    if ring in cfg.allowed_ring_sizes:
                        out.add(BondAddition(i, j))
            elif order < 3 and g.free_valence(i) >= 1 and g.free_valence(j) >= 1:
                out.add(BondAddition(i, j))
    for b in g.bonds:
        if b.order >= 2:
            out.add(BondRemoval(b.i, b.j))
        elif g.n_atoms > 1 and (b.i, b.j) not in g.bridge_bonds:
            out.add(BondRemoval(b.i, b.j))
    if cfg.allow_no_op:
        out.add(NoOp())
    return sorted(out, key=action_sort_key)


def apply_action(s: EnvState, a: MolAction) -> EnvState:
    """Successor state; the input state is never modified."""
    if s.steps_remaining <= 0:
        raise InvalidAction("episode already terminal")
    g = s.molecule
    if isinstance(a, NoOp):
        return replace(s, steps_remaining=s.steps_remaining - 1)
    atoms = list(g.atoms)
    bonds = {(b.i, b.j): b.order for b in g.bonds}
    try:
        if isinstance(a, AtomAddition):
            atoms.append(Atom(len(atoms), a.element))
            bonds[(a.attach_atom, len(atoms) - 1)] = a.bond_order
        elif isinstance(a, BondAddition):
            key = (a.atom_i, a.atom_j)
            bonds[key] = bonds.get(key, 0) + 1
        elif isinstance(a, BondRemoval):
            key = (a.atom_i, a.atom_j)
            if key not in bonds:
                raise InvalidAction(f"no bond at {key}")
            bonds[key] -= 1
            if bonds[key] == 0:
                del bonds[key]
        else:
            raise InvalidAction(f"unknown action {a!r}")
        mol = MolecularGraph(
            atoms, [Bond(i, j, o) for (i, j), o in bonds.items()]
        )
    except InvalidAction:
        raise
    except Exception as exc:
        raise InvalidAction(f"action {a!r} produced an invalid molecule: {exc}") from exc
    return EnvState(mol, s.steps_remaining - 1, s.origin)


class FeatureCache:
    """Bounded LRU cache of whole state feature vectors.

    Keyed by (canonical SMILES, steps_remaining): the molecule block is
    permutation invariant so the canonical string is a sound key, and the
    remaining-steps entry is part of the vector.  Vectors come back by
    reference, marked read-only, so rollouts and the replay buffer share a
    single copy per state instead of holding duplicates; max_entries bounds
    resident memory by evicting the least recently used vector.
    """

    def __init__(self, max_entries: int = 60_000):
        if max_entries < 1:
            raise ConfigError(f"cache needs max_entries >= 1, got {max_entries}")
        self.store: OrderedDict[tuple[str, int], np.ndarray] = OrderedDict()
        self.max_entries = max_entries
        self.hits = 0
        self.misses = 0

    def state_features(self, s: EnvState, cfg: EnvConfig) -> np.ndarray:
        key = (write_smiles(s.molecule), s.steps_remaining)
        found = self.store.get(key)
        if found is not None:
            self.hits += 1
            self.store.move_to_end(key)
            return found
        self.misses += 1
        vec = _assemble_state_vector(s, cfg)
        vec.flags.writeable = False
        while len(self.store) >= self.max_entries:
            self.store.popitem(last=False)
        self.store[key] = vec
        return vec


def _molecule_features(g: MolecularGraph, cfg: FeaturizerConfig) -> np.ndarray:
    dm = geodesic_distances(g, cfg.bond_length_scale)
    mw = mwcg_features(g, dm, cfg.mwcg)
    diagram = rips_persistence(dm, max_dim=1, max_filtration=cfg.max_filtration)
    img = persistence_image(diagram, cfg.image, cfg.max_filtration)
    fp = morgan_fingerprint(g, cfg.fp_radius, cfg.fp_nbits)
    fp_bits = np.zeros(cfg.fp_nbits, dtype=np.float64)
    for b in fp.on_bits():
        fp_bits[b] = 1.0
    return np.concatenate([mw.values, img.values, fp_bits])


def _assemble_state_vector(s: EnvState, cfg: EnvConfig) -> np.ndarray:
    frac = s.steps_remaining / cfg.max_steps
    return np.concatenate([_molecule_features(s.molecule, cfg.featurizer), [frac]])


def featurize(
    s: EnvState,
    cfg: EnvConfig,
    cache: FeatureCache | None = None,
) -> np.ndarray:
    """State vector: molecule features plus normalized remaining steps.

    With a cache the vector is returned by reference and is read-only;
    without one each call builds a fresh writable array.
    """
    if cache is not None:
        return cache.state_features(s, cfg)
    return _assemble_state_vector(s, cfg)
