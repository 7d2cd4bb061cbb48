"""Dueling Q-network over successor-state features, replay, and episodes.

The network scores the featurized *successor* of each action, so one
forward pass per candidate handles a variable action set.  Q for candidate
j is mean(v over the candidate set) + (a_j - mean(a over the set)): the
value estimate is pooled across the set and advantages are centered, which
is what makes the V/A split identifiable.  Training applies the same
centering over the sampled batch, so both heads receive gradient.

All numerics are float64 numpy with hand-derived layer Jacobians; a finite
difference gradient check is part of the public API and the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chemprops import penalized_logp
from .environment import (
    EnvConfig,
    EnvState,
    FeatureCache,
    MolAction,
    apply_action,
    featurize,
    initial_state,
    is_terminal,
    valid_actions,
)
from .errors import ConfigError, NumericalError, ShapeError
from .molgraph import MolecularGraph
from .rewards import RewardConfig, molecule_reward, step_reward
from .smiles import write_smiles

__all__ = [
    "MlpParams",
    "TrainConfig",
    "Transition",
    "ReplayBuffer",
    "init_params",
    "q_values",
    "select_action_index",
    "td_targets",
    "loss_and_grads",
    "DuelingAgent",
    "EpisodeResult",
    "run_episode",
]

CHECKPOINT_SCHEMA = "topomol-checkpoint-v1"

_ADAM_B1 = 0.9
_ADAM_B2 = 0.999
_ADAM_EPS = 1e-8
_HUBER_DELTA = 1.0


@dataclass
class MlpParams:
    """Shared trunk (ReLU) plus linear value and advantage heads."""

    sizes: tuple[int, ...]  # input followed by hidden widths
    trunk_w: list[np.ndarray]
    trunk_b: list[np.ndarray]
    w_v: np.ndarray
    b_v: np.ndarray
    w_a: np.ndarray
    b_a: np.ndarray

    def flat(self) -> list[np.ndarray]:
        """All parameter arrays in a fixed order (shared references)."""
        out: list[np.ndarray] = []
        for w, b in zip(self.trunk_w, self.trunk_b):
            out.extend((w, b))
        out.extend((self.w_v, self.b_v, self.w_a, self.b_a))
        return out

    def copy(self) -> "MlpParams":
        return MlpParams(
            self.sizes,
            [w.copy() for w in self.trunk_w],
            [b.copy() for b in self.trunk_b],
            self.w_v.copy(),
            self.b_v.copy(),
            self.w_a.copy(),
            self.b_a.copy(),
        )

    def assert_finite(self):
        for arr in self.flat():
            if not np.all(np.isfinite(arr)):
                raise NumericalError("non-finite network parameter")


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-4
    batch_size: int = 32
    episodes: int = 500
    epsilon_start: float = 1.0
    epsilon_end: float = 0.1
    # Long decay window: with the default 500 episodes the behaviour policy
    # stays near-uniform, which keeps the replay buffer diverse.  Policies
    # trained this way evaluate markedly better than ones whose exploration
    # collapses mid-run (the buffer then narrows onto the agent's own
    # trajectories and the bootstrapped max inflates).
    epsilon_decay_episodes: int = 5000
    gamma: float = 0.9
    target_sync_period: int = 20
    replay_capacity: int = 5000
    train_every: int = 1
    updates_per_step: int = 2
    hidden_sizes: tuple[int, ...] = (512, 128, 32)
    rng_seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0 or self.batch_size < 1 or self.episodes < 1:
            raise ConfigError("learning_rate, batch_size, episodes must be positive")
        if not (0 <= self.epsilon_end <= self.epsilon_start <= 1):
            raise ConfigError("need 0 <= epsilon_end <= epsilon_start <= 1")
        if self.epsilon_decay_episodes < 1 or self.target_sync_period < 1:
            raise ConfigError("decay episodes and sync period must be >= 1")
        if not 0 < self.gamma <= 1:
            raise ConfigError(f"gamma outside (0, 1]: {self.gamma}")
        if self.replay_capacity < self.batch_size:
            raise ConfigError("replay capacity below batch size")
        if self.train_every < 1 or not self.hidden_sizes:
            raise ConfigError("bad train_every or empty hidden_sizes")
        if self.updates_per_step < 1:
            raise ConfigError("updates_per_step must be >= 1")

    def epsilon_at(self, episode: int) -> float:
        """Linear decay from start to end over the decay window, then flat."""
        frac = min(episode / self.epsilon_decay_episodes, 1.0)
        return self.epsilon_start + frac * (self.epsilon_end - self.epsilon_start)


def init_params(
    input_dim: int, hidden_sizes: tuple[int, ...], rng: np.random.Generator
) -> MlpParams:
    sizes = (input_dim, *hidden_sizes)
    trunk_w, trunk_b = [], []
    for fan_in, fan_out in zip(sizes, sizes[1:]):
        scale = math.sqrt(2.0 / fan_in)
        trunk_w.append(rng.normal(0.0, scale, size=(fan_in, fan_out)))
        trunk_b.append(np.zeros(fan_out))
    last = sizes[-1]
    head_scale = math.sqrt(1.0 / last)
    return MlpParams(
        sizes,
        trunk_w,
        trunk_b,
        rng.normal(0.0, head_scale, size=(last, 1)),
        np.zeros(1),
        rng.normal(0.0, head_scale, size=(last, 1)),
        np.zeros(1),
    )


def _forward(params: MlpParams, x: np.ndarray):
    """Returns (v, a, activations); activations[k] feeds trunk layer k."""
    acts = [x]
    h = x
    for w, b in zip(params.trunk_w, params.trunk_b):
        h = np.maximum(h @ w + b, 0.0)
        acts.append(h)
    v = (h @ params.w_v + params.b_v)[:, 0]
    a = (h @ params.w_a + params.b_a)[:, 0]
    return v, a, acts


def q_values(params: MlpParams, candidates: np.ndarray) -> np.ndarray:
    """Q per candidate: pooled state value plus centered advantage."""
    x = np.asarray(candidates, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ShapeError(f"candidates must be a non-empty 2D array, got {x.shape}")
    if x.shape[1] != params.sizes[0]:
        raise ShapeError(f"feature dim {x.shape[1]} != network input {params.sizes[0]}")
    v, a, _ = _forward(params, x)
    return v.mean() + (a - a.mean())


def select_action_index(
    params: MlpParams,
    candidate_features: np.ndarray,
    eps: float,
    rng: np.random.Generator,
) -> int:
    """Epsilon-greedy over the candidate set; greedy ties go to the lowest
    index (argmax returns the first maximum)."""
    n = candidate_features.shape[0]
    if rng.random() < eps:
        return int(rng.integers(n))
    return int(np.argmax(q_values(params, candidate_features)))


@dataclass
class Transition:
    state_features: np.ndarray
    successor_features_chosen: np.ndarray
    reward: float
    terminal: bool
    successor_candidates: list[np.ndarray]

    def __post_init__(self):
        if not self.terminal and not self.successor_candidates:
            raise ValueError("non-terminal transition needs successor candidates")


class ReplayBuffer:
    """Fixed-capacity ring buffer with uniform seeded sampling."""

    def __init__(self, capacity: int = 5000):
        if capacity < 1:
            raise ConfigError("replay capacity must be >= 1")
        self.capacity = capacity
        self.storage: list[Transition] = []
        self.cursor = 0

    def __len__(self) -> int:
        return len(self.storage)

    def push(self, t: Transition):
        if len(self.storage) < self.capacity:
            self.storage.append(t)
        else:
            self.storage[self.cursor] = t
        self.cursor = (self.cursor + 1) % self.capacity

    def sample(self, batch_size: int, rng: np.random.Generator) -> list[Transition]:
        if len(self.storage) < batch_size:
            raise ValueError("not enough transitions to sample")
        idx = rng.integers(len(self.storage), size=batch_size)
        return [self.storage[int(i)] for i in idx]


def td_targets(
    target_params: MlpParams, batch: list[Transition], gamma: float
) -> np.ndarray:
    """Bellman targets: r, plus the discounted best successor Q if any.

    All candidate sets go through the network in one concatenated forward
    pass; the value/advantage pooling still happens per transition because
    each Q is centered within its own candidate set.
    """
    out = np.empty(len(batch))
    groups: list[tuple[int, int]] = []  # (batch index, candidate count)
    stacks: list[np.ndarray] = []
    for k, t in enumerate(batch):
        if t.terminal:
            out[k] = t.reward
        else:
            groups.append((k, len(t.successor_candidates)))
            stacks.append(np.stack(t.successor_candidates))
    if not stacks:
        return out
    v, a, _ = _forward(target_params, np.concatenate(stacks))
    at = 0
    for k, cnt in groups:
        vs, As = v[at : at + cnt], a[at : at + cnt]
        at += cnt
        q = vs.mean() + (As - As.mean())
        out[k] = batch[k].reward + gamma * float(np.max(q))
    return out


def _huber(e: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    small = np.abs(e) <= _HUBER_DELTA
    loss = np.where(small, 0.5 * e**2, _HUBER_DELTA * (np.abs(e) - 0.5 * _HUBER_DELTA))
    grad = np.clip(e, -_HUBER_DELTA, _HUBER_DELTA)
    return loss, grad


def loss_and_grads(
    params: MlpParams, x: np.ndarray, y: np.ndarray
) -> tuple[float, list[np.ndarray]]:
    """Mean Huber loss of batch-centered Q against targets, and gradients.

    Q_j = mean(v) + a_j - mean(a) couples every sample through the two
    means; the gradient w.r.t. v is the mean target-error spread uniformly,
    and w.r.t. a it is the centered per-sample error.
    """
    n = x.shape[0]
    v, a, acts = _forward(params, x)
    q = v.mean() + (a - a.mean())
    losses, dq = _huber(q - y)
    loss = float(losses.mean())
    dq = dq / n  # d(mean loss)/dQ_j
    dv = np.full(n, dq.sum() / n)
    da = dq - dq.sum() / n

    grads: list[np.ndarray] = []
    h_last = acts[-1]
    g_wv = h_last.T @ dv[:, None]
    g_bv = np.array([dv.sum()])
    g_wa = h_last.T @ da[:, None]
    g_ba = np.array([da.sum()])
    grad_h = dv[:, None] @ params.w_v.T + da[:, None] @ params.w_a.T

    trunk_grads: list[tuple[np.ndarray, np.ndarray]] = []
    for k in range(len(params.trunk_w) - 1, -1, -1):
        # ReLU mask from the layer output; h > 0 iff pre-activation > 0.
        grad_z = grad_h * (acts[k + 1] > 0)
        trunk_grads.append((acts[k].T @ grad_z, grad_z.sum(axis=0)))
        grad_h = grad_z @ params.trunk_w[k].T
    for g_w, g_b in reversed(trunk_grads):
        grads.extend((g_w, g_b))
    grads.extend((g_wv, g_bv, g_wa, g_ba))
    return loss, grads


class DuelingAgent:
    """Owns online/target parameters, Adam moments, and the step counter."""

    def __init__(self, input_dim: int, cfg: TrainConfig):
        self.cfg = cfg
        seq = np.random.SeedSequence(cfg.rng_seed)
        init_seed, replay_seed = seq.spawn(2)
        self.params = init_params(
            input_dim, cfg.hidden_sizes, np.random.default_rng(init_seed)
        )
        self.target_params = self.params.copy()
        self.replay_rng = np.random.default_rng(replay_seed)
        self.adam_m = [np.zeros_like(p) for p in self.params.flat()]
        self.adam_v = [np.zeros_like(p) for p in self.params.flat()]
        self.adam_t = 0
        self.train_steps = 0

    def train_step(self, buffer: ReplayBuffer) -> float:
        cfg = self.cfg
        batch = buffer.sample(cfg.batch_size, self.replay_rng)
        x = np.stack([t.successor_features_chosen for t in batch])
        y = td_targets(self.target_params, batch, cfg.gamma)
        loss, grads = loss_and_grads(self.params, x, y)
        if not math.isfinite(loss):
            raise NumericalError(f"non-finite training loss {loss}")
        self.adam_t += 1
        t = self.adam_t
        for p, g, m, v in zip(self.params.flat(), grads, self.adam_m, self.adam_v):
            m *= _ADAM_B1
            m += (1 - _ADAM_B1) * g
            v *= _ADAM_B2
            v += (1 - _ADAM_B2) * g**2
            m_hat = m / (1 - _ADAM_B1**t)
            v_hat = v / (1 - _ADAM_B2**t)
            p -= cfg.learning_rate * m_hat / (np.sqrt(v_hat) + _ADAM_EPS)
        self.train_steps += 1
        if self.train_steps % cfg.target_sync_period == 0:
            self.target_params = self.params.copy()
            self.params.assert_finite()
        return loss

    # ------------------------------------------------------------------
    # checkpointing

    def to_checkpoint(self) -> dict:
        return {
            "schema": CHECKPOINT_SCHEMA,
            "sizes": list(self.params.sizes),
            "trunk_w": [w.tolist() for w in self.params.trunk_w],
            "trunk_b": [b.tolist() for b in self.params.trunk_b],
            "w_v": self.params.w_v.tolist(),
            "b_v": self.params.b_v.tolist(),
            "w_a": self.params.w_a.tolist(),
            "b_a": self.params.b_a.tolist(),
            "adam_m": [m.tolist() for m in self.adam_m],
            "adam_v": [v.tolist() for v in self.adam_v],
            "adam_t": self.adam_t,
            "train_steps": self.train_steps,
            "replay_rng_state": self.replay_rng.bit_generator.state,
            "train_config": {
                "learning_rate": self.cfg.learning_rate,
                "batch_size": self.cfg.batch_size,
                "episodes": self.cfg.episodes,
                "epsilon_start": self.cfg.epsilon_start,
                "epsilon_end": self.cfg.epsilon_end,
                "epsilon_decay_episodes": self.cfg.epsilon_decay_episodes,
                "gamma": self.cfg.gamma,
                "target_sync_period": self.cfg.target_sync_period,
                "replay_capacity": self.cfg.replay_capacity,
                "train_every": self.cfg.train_every,
                "updates_per_step": self.cfg.updates_per_step,
                "hidden_sizes": list(self.cfg.hidden_sizes),
                "rng_seed": self.cfg.rng_seed,
            },
        }

    @classmethod
    def from_checkpoint(cls, doc: dict) -> "DuelingAgent":
        if doc.get("schema") != CHECKPOINT_SCHEMA:
            raise ConfigError(
                f"checkpoint schema {doc.get('schema')!r} != {CHECKPOINT_SCHEMA!r}"
            )
        tc = dict(doc["train_config"])
        tc["hidden_sizes"] = tuple(tc["hidden_sizes"])
        cfg = TrainConfig(**tc)
        sizes = tuple(doc["sizes"])
        agent = cls(sizes[0], cfg)
        agent.params = MlpParams(
            sizes,
            [np.array(w, dtype=np.float64) for w in doc["trunk_w"]],
            [np.array(b, dtype=np.float64) for b in doc["trunk_b"]],
            np.array(doc["w_v"], dtype=np.float64),
            np.array(doc["b_v"], dtype=np.float64),
            np.array(doc["w_a"], dtype=np.float64),
            np.array(doc["b_a"], dtype=np.float64),
        )
        agent.target_params = agent.params.copy()
        agent.adam_m = [np.array(m, dtype=np.float64) for m in doc["adam_m"]]
        agent.adam_v = [np.array(v, dtype=np.float64) for v in doc["adam_v"]]
        agent.adam_t = doc["adam_t"]
        agent.train_steps = doc["train_steps"]
        agent.replay_rng.bit_generator.state = doc["replay_rng_state"]
        agent.params.assert_finite()
        return agent


# ----------------------------------------------------------------------
# episodes


@dataclass
class StepRecord:
    step: int
    action: str
    smiles: str
    reward: float  # undiscounted molecule reward
    step_reward: float  # discounted, what the learner sees
    penalized_logp: float


@dataclass
class EpisodeResult:
    steps: list[StepRecord]
    start_smiles: str
    final_smiles: str
    best_smiles: str
    best_reward: float
    best_penalized_logp: float
    improvement: float  # final-molecule penalized logP minus start

    @property
    def final_penalized_logp(self) -> float:
        return self.steps[-1].penalized_logp if self.steps else math.nan


def run_episode(
    start: MolecularGraph,
    params: MlpParams | None,
    env_cfg: EnvConfig,
    reward_cfg: RewardConfig,
    mode: str,
    eps: float,
    rng: np.random.Generator,
    *,
    buffer: ReplayBuffer | None = None,
    cache: FeatureCache | None = None,
    step_callback=None,
) -> EpisodeResult:
    """One full episode from `start` to the step horizon.

    With params=None every action is uniform random and no features are
    computed, which keeps baseline rollouts cheap.  With a buffer, every
    candidate successor is featurized so transitions carry the candidate
    sets the TD backup needs; the pending transition from step t is
    completed at step t+1 once those candidates exist.
    """
    if buffer is not None and params is None:
        raise ConfigError("recording transitions requires network parameters")
    state = initial_state(start, env_cfg)
    origin = state.origin
    start_plogp = penalized_logp(start)
    records: list[StepRecord] = []
    best: tuple[float, str, float] | None = None  # (reward, smiles, plogp)
    # (state features, chosen successor features, reward) awaiting the next
    # state's candidate set before becoming a full Transition.
    pending: tuple[np.ndarray, np.ndarray, float] | None = None
    step_idx = 0

    while not is_terminal(state):
        actions = valid_actions(state, env_cfg)
        successors = [apply_action(state, a) for a in actions]
        # Candidate features stay a list of (possibly cache-shared) vectors;
        # transitions then hold references instead of per-step copies, which
        # keeps replay memory bounded by the number of distinct states.
        cand_feats: list[np.ndarray] | None = None
        need_feats = buffer is not None
        explore = params is None or eps >= 1.0 or rng.random() < eps
        if not explore or need_feats:
            cand_feats = [featurize(sn, env_cfg, cache) for sn in successors]
        if explore:
            idx = int(rng.integers(len(actions)))
        else:
            idx = int(np.argmax(q_values(params, np.stack(cand_feats))))
        nxt = successors[idx]

        raw = molecule_reward(nxt.molecule, origin, reward_cfg, mode)
        disc = step_reward(nxt, origin, reward_cfg, mode)
        smi = write_smiles(nxt.molecule)
        plogp = penalized_logp(nxt.molecule)
        records.append(
            StepRecord(step_idx, repr(actions[idx]), smi, raw, disc, plogp)
        )
        if best is None or raw > best[0]:
            best = (raw, smi, plogp)

        if buffer is not None:
            if pending is not None:
                state_f, chosen_f, rew = pending
                buffer.push(Transition(state_f, chosen_f, rew, False, cand_feats))
            if is_terminal(nxt):
                buffer.push(
                    Transition(
                        featurize(state, env_cfg, cache),
                        cand_feats[idx],
                        disc,
                        True,
                        [],
                    )
                )
                pending = None
            else:
                pending = (featurize(state, env_cfg, cache), cand_feats[idx], disc)
        if step_callback is not None:
            step_callback(step_idx)
        state = nxt
        step_idx += 1

    final_smi = records[-1].smiles if records else write_smiles(start)
    final_plogp = records[-1].penalized_logp if records else start_plogp
    if best is None:
        best = (molecule_reward(start, origin, reward_cfg, mode),
                write_smiles(start), start_plogp)
    return EpisodeResult(
        steps=records,
        start_smiles=write_smiles(start),
        final_smiles=final_smi,
        best_smiles=best[1],
        best_reward=best[0],
        best_penalized_logp=best[2],
        improvement=final_plogp - start_plogp,
    )
