"""Reward functions for molecule optimization episodes.

Two modes: a constrained reward that pays penalized logP minus linear
penalties for drifting below similarity and ring-structure agreement
thresholds, and a target reward that mixes closeness-to-target (ring count
or molecular weight) with similarity to the origin.  Step rewards are
discounted by remaining steps so the final molecule counts at full weight.

The ring-count agreement score uses the bond graph's circuit rank, which
equals the first Betti number of the geodesic Rips filtration evaluated
just above the bond scale; computing it directly keeps reward evaluation
free of any persistence computation.
"""

from __future__ import annotations

from dataclasses import dataclass

from .chemprops import mol_weight, penalized_logp
from .environment import EnvState
from .errors import ConfigError, DomainError
from .fingerprint import morgan_fingerprint, tanimoto
from .molgraph import MolecularGraph

__all__ = [
    "RewardConfig",
    "betti_agreement",
    "reward_constrained",
    "reward_target",
    "molecule_reward",
    "step_reward",
]

MODES = ("constrained", "target")


@dataclass(frozen=True)
class RewardConfig:
    lam: float = 0.0
    delta: float = 0.4
    epsilon: float = 0.5
    w: float = 0.5
    target_betti: int | None = None
    target_weight: float | None = None
    gamma: float = 0.9
    fp_radius: int = 2
    fp_nbits: int = 1024

    def __post_init__(self):
        if self.lam < 0:
            raise ConfigError(f"lambda must be >= 0, got {self.lam}")
        if not 0 <= self.delta <= 1:
            raise ConfigError(f"delta outside [0, 1]: {self.delta}")
        if not 0 <= self.epsilon <= 1:
            raise ConfigError(f"epsilon outside [0, 1]: {self.epsilon}")
        if not 0 <= self.w <= 1:
            raise ConfigError(f"w outside [0, 1]: {self.w}")
        if not 0 < self.gamma <= 1:
            raise ConfigError(f"gamma outside (0, 1]: {self.gamma}")
        if self.target_betti is not None and self.target_betti < 0:
            raise ConfigError("target_betti must be non-negative")
        if self.target_weight is not None and self.target_weight <= 0:
            raise ConfigError("target_weight must be positive")


def _closeness(observed: float, target: float) -> float:
    """1 at the target, falling linearly to 0 at a full relative deviation."""
    return 1.0 - min(1.0, abs(observed - target) / max(1.0, target))


def betti_agreement(m: MolecularGraph, m0: MolecularGraph) -> float:
    """Agreement in independent-ring count between m and the origin, in
    [0, 1]; 1 when equal, 0 once the deviation reaches the origin's count."""
    return _closeness(m.circuit_rank, m0.circuit_rank)


def similarity(m: MolecularGraph, m0: MolecularGraph, cfg: RewardConfig) -> float:
    return tanimoto(
        morgan_fingerprint(m, cfg.fp_radius, cfg.fp_nbits),
        morgan_fingerprint(m0, cfg.fp_radius, cfg.fp_nbits),
    )


def reward_constrained(
    m: MolecularGraph, m0: MolecularGraph, cfg: RewardConfig
) -> float:
    """Penalized logP minus linear shortfall penalties.

    Drops below the similarity threshold delta or the ring-agreement
    threshold epsilon are charged lam times the shortfall; within both
    thresholds the reward is exactly penalized logP.
    """
    s = similarity(m, m0, cfg)
    b = betti_agreement(m, m0)
    penalty = 0.0
    if s < cfg.delta:
        penalty += cfg.delta - s
    if b < cfg.epsilon:
        penalty += cfg.epsilon - b
    return penalized_logp(m) - cfg.lam * penalty


def reward_target(
    m: MolecularGraph, m0: MolecularGraph, cfg: RewardConfig
) -> float:
    """Convex mix of closeness-to-target and similarity to the origin."""
    if (cfg.target_betti is None) == (cfg.target_weight is None):
        raise ConfigError(
            "target reward needs exactly one of target_betti/target_weight"
        )
    if cfg.target_betti is not None:
        closeness = _closeness(m.circuit_rank, cfg.target_betti)
    else:
        closeness = _closeness(mol_weight(m), cfg.target_weight)
    return (1.0 - cfg.w) * closeness + cfg.w * similarity(m, m0, cfg)


def molecule_reward(
    m: MolecularGraph, m0: MolecularGraph, cfg: RewardConfig, mode: str
) -> float:
    if mode == "constrained":
        return reward_constrained(m, m0, cfg)
    if mode == "target":
        return reward_target(m, m0, cfg)
    raise DomainError(f"unknown reward mode {mode!r}; expected one of {MODES}")


def step_reward(
    s_next: EnvState, m0: MolecularGraph, cfg: RewardConfig, mode: str
) -> float:
    """Successor reward discounted by remaining steps: gamma^k with k the
    steps still left after the transition, so the horizon step pays in full."""
    raw = molecule_reward(s_next.molecule, m0, cfg, mode)
    return raw * cfg.gamma**s_next.steps_remaining
