"""topomol: topology-aware molecular featurization and optimization.

A self-contained library and CLI that parses SMILES into validated
molecular graphs, computes multiscale kernel features, Rips persistence
images and circular fingerprints over a geodesic atom metric, and trains a
dueling Q-network to edit molecules under chemically valid actions with
similarity- and ring-structure-aware rewards.
"""

from .chemprops import (
    PropertyReport,
    logp_estimate,
    mol_weight,
    penalized_logp,
    property_report,
    sa_proxy,
)
from .environment import (
    AtomAddition,
    BondAddition,
    BondRemoval,
    EnvConfig,
    EnvState,
    FeaturizerConfig,
    NoOp,
    apply_action,
    featurize,
    initial_state,
    is_terminal,
    valid_actions,
)
from .errors import TopomolError
from .fingerprint import Fingerprint, morgan_fingerprint, tanimoto
from .metric import DistanceMatrix, geodesic_distances
from .molgraph import Atom, Bond, MolecularGraph, sybyl_type
from .mwcg import MwcgConfig, kernel, mwcg_features
from .rewards import (
    RewardConfig,
    betti_agreement,
    reward_constrained,
    reward_target,
    step_reward,
)
from .smiles import parse_smiles, write_smiles
from .topology import (
    ImageConfig,
    PersistenceDiagram,
    betti_at,
    persistence_image,
    rips_persistence,
)

__version__ = "0.1.0"

__all__ = [
    "Atom",
    "AtomAddition",
    "Bond",
    "BondAddition",
    "BondRemoval",
    "DistanceMatrix",
    "EnvConfig",
    "EnvState",
    "FeaturizerConfig",
    "Fingerprint",
    "ImageConfig",
    "MolecularGraph",
    "MwcgConfig",
    "NoOp",
    "PersistenceDiagram",
    "PropertyReport",
    "RewardConfig",
    "TopomolError",
    "apply_action",
    "betti_agreement",
    "betti_at",
    "featurize",
    "geodesic_distances",
    "initial_state",
    "is_terminal",
    "kernel",
    "logp_estimate",
    "mol_weight",
    "morgan_fingerprint",
    "mwcg_features",
    "parse_smiles",
    "penalized_logp",
    "persistence_image",
    "property_report",
    "reward_constrained",
    "reward_target",
    "rips_persistence",
    "sa_proxy",
    "step_reward",
    "sybyl_type",
    "tanimoto",
    "valid_actions",
    "write_smiles",
]
