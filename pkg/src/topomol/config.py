"""Run configuration: one strict JSON document for every knob.

Unknown keys anywhere in the document are errors so typos fail fast; every
value lands in the corresponding module's config dataclass, which performs
its own range validation.  Serialization round-trips exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .agent import TrainConfig
from .environment import EnvConfig, FeaturizerConfig
from .errors import ConfigError
from .mwcg import MwcgConfig
from .rewards import MODES, RewardConfig
from .topology import ImageConfig

__all__ = ["RunConfig", "load_config", "dump_config"]


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    reward_mode: str = "constrained"
    env: EnvConfig = field(default_factory=EnvConfig)
    rewards: RewardConfig = field(default_factory=RewardConfig)
    training: TrainConfig = field(default_factory=TrainConfig)

    def __post_init__(self):
        if self.reward_mode not in MODES:
            raise ConfigError(
                f"reward_mode {self.reward_mode!r} not in {MODES}"
            )


def _take(section: dict, allowed: set[str], where: str) -> dict:
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {sorted(unknown)}")
    return section


def _build_mwcg(doc: dict) -> MwcgConfig:
    d = _take(
        doc, {"scales", "kappa", "cutoff", "color_mode", "type_vocabulary"}, "mwcg"
    )
    kwargs = dict(d)
    if "scales" in kwargs:
        kwargs["scales"] = tuple(kwargs["scales"])
    if "type_vocabulary" in kwargs:
        kwargs["type_vocabulary"] = tuple(kwargs["type_vocabulary"])
    return MwcgConfig(**kwargs)


def _build_image(doc: dict) -> ImageConfig:
    d = _take(
        doc, {"rows", "cols", "birth_range", "pers_range", "sigma"}, "topology.image"
    )
    kwargs = dict(d)
    for key in ("birth_range", "pers_range"):
        if key in kwargs:
            kwargs[key] = tuple(kwargs[key])
    return ImageConfig(**kwargs)


def _build_featurizer(doc: dict) -> FeaturizerConfig:
    d = _take(
        doc,
        {"mwcg", "topology", "fingerprint"},
        "featurizer",
    )
    kwargs: dict = {}
    if "mwcg" in d:
        kwargs["mwcg"] = _build_mwcg(d["mwcg"])
    if "topology" in d:
        topo = _take(
            d["topology"],
            {"bond_length_scale", "max_filtration", "image"},
            "featurizer.topology",
        )
        if "bond_length_scale" in topo:
            kwargs["bond_length_scale"] = topo["bond_length_scale"]
        if "max_filtration" in topo:
            kwargs["max_filtration"] = topo["max_filtration"]
        if "image" in topo:
            kwargs["image"] = _build_image(topo["image"])
    if "fingerprint" in d:
        fp = _take(d["fingerprint"], {"radius", "nbits"}, "featurizer.fingerprint")
        if "radius" in fp:
            kwargs["fp_radius"] = fp["radius"]
        if "nbits" in fp:
            kwargs["fp_nbits"] = fp["nbits"]
    return FeaturizerConfig(**kwargs)


def _build_env(doc: dict) -> EnvConfig:
    d = _take(
        doc,
        {
            "allowed_elements",
            "max_steps",
            "allow_no_op",
            "allowed_ring_sizes",
            "featurizer",
        },
        "env",
    )
    kwargs: dict = {}
    if "allowed_elements" in d:
        kwargs["allowed_elements"] = tuple(d["allowed_elements"])
    if "max_steps" in d:
        kwargs["max_steps"] = d["max_steps"]
    if "allow_no_op" in d:
        kwargs["allow_no_op"] = d["allow_no_op"]
    if "allowed_ring_sizes" in d:
        kwargs["allowed_ring_sizes"] = tuple(d["allowed_ring_sizes"])
    if "featurizer" in d:
        kwargs["featurizer"] = _build_featurizer(d["featurizer"])
    return EnvConfig(**kwargs)


def _build_rewards(doc: dict) -> RewardConfig:
    d = _take(
        doc,
        {
            "lam",
            "delta",
            "epsilon",
            "w",
            "target_betti",
            "target_weight",
            "gamma",
            "fp_radius",
            "fp_nbits",
        },
        "rewards",
    )
    return RewardConfig(**d)


def _build_training(doc: dict) -> TrainConfig:
    d = _take(
        doc,
        {
            "learning_rate",
            "batch_size",
            "episodes",
            "epsilon_start",
            "epsilon_end",
            "epsilon_decay_episodes",
            "gamma",
            "target_sync_period",
            "replay_capacity",
            "train_every",
            "updates_per_step",
            "hidden_sizes",
            "rng_seed",
        },
        "training",
    )
    kwargs = dict(d)
    if "hidden_sizes" in kwargs:
        kwargs["hidden_sizes"] = tuple(kwargs["hidden_sizes"])
    return TrainConfig(**kwargs)


def config_from_dict(doc: dict) -> RunConfig:
    d = _take(
        doc,
        {"seed", "reward_mode", "env", "rewards", "training"},
        "top level",
    )
    kwargs: dict = {}
    if "seed" in d:
        if not isinstance(d["seed"], int):
            raise ConfigError(f"seed must be an integer, got {d['seed']!r}")
        kwargs["seed"] = d["seed"]
    if "reward_mode" in d:
        kwargs["reward_mode"] = d["reward_mode"]
    if "env" in d:
        kwargs["env"] = _build_env(d["env"])
    if "rewards" in d:
        kwargs["rewards"] = _build_rewards(d["rewards"])
    if "training" in d:
        kwargs["training"] = _build_training(d["training"])
    try:
        return RunConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def config_to_dict(cfg: RunConfig) -> dict:
    env, fz = cfg.env, cfg.env.featurizer
    return {
        "seed": cfg.seed,
        "reward_mode": cfg.reward_mode,
        "env": {
            "allowed_elements": list(env.allowed_elements),
            "max_steps": env.max_steps,
            "allow_no_op": env.allow_no_op,
            "allowed_ring_sizes": list(env.allowed_ring_sizes),
            "featurizer": {
                "mwcg": {
                    "scales": list(fz.mwcg.scales),
                    "kappa": fz.mwcg.kappa,
                    "cutoff": fz.mwcg.cutoff,
                    "color_mode": fz.mwcg.color_mode,
                    "type_vocabulary": list(fz.mwcg.type_vocabulary),
                },
                "topology": {
                    "bond_length_scale": fz.bond_length_scale,
                    "max_filtration": fz.max_filtration,
                    "image": {
                        "rows": fz.image.rows,
                        "cols": fz.image.cols,
                        "birth_range": list(fz.image.birth_range),
                        "pers_range": list(fz.image.pers_range),
                        "sigma": fz.image.sigma,
                    },
                },
                "fingerprint": {"radius": fz.fp_radius, "nbits": fz.fp_nbits},
            },
        },
        "rewards": {
            "lam": cfg.rewards.lam,
            "delta": cfg.rewards.delta,
            "epsilon": cfg.rewards.epsilon,
            "w": cfg.rewards.w,
            "target_betti": cfg.rewards.target_betti,
            "target_weight": cfg.rewards.target_weight,
            "gamma": cfg.rewards.gamma,
            "fp_radius": cfg.rewards.fp_radius,
            "fp_nbits": cfg.rewards.fp_nbits,
        },
        "training": {
            "learning_rate": cfg.training.learning_rate,
            "batch_size": cfg.training.batch_size,
            "episodes": cfg.training.episodes,
            "epsilon_start": cfg.training.epsilon_start,
            "epsilon_end": cfg.training.epsilon_end,
            "epsilon_decay_episodes": cfg.training.epsilon_decay_episodes,
            "gamma": cfg.training.gamma,
            "target_sync_period": cfg.training.target_sync_period,
            "replay_capacity": cfg.training.replay_capacity,
            "train_every": cfg.training.train_every,
            "updates_per_step": cfg.training.updates_per_step,
            "hidden_sizes": list(cfg.training.hidden_sizes),
            "rng_seed": cfg.training.rng_seed,
        },
    }


def load_config(path: str | Path) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"config {path} must be a JSON object")
    return config_from_dict(doc)


def dump_config(cfg: RunConfig, path: str | Path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(config_to_dict(cfg), fh, indent=2, sort_keys=True)
        fh.write("\n")
