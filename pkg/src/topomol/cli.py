"""Command-line interface.

Verbs: featurize, train, optimize, eval, baseline.  Every command is a
deterministic function of its inputs, config and seed, writes delimited
outputs plus report figures under --out, and never mutates its inputs.
Exit codes: 0 success, 1 usage or config error, 2 data error, 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import config as config_mod
from .agent import DuelingAgent, ReplayBuffer, run_episode
from .chemprops import penalized_logp, property_report
from .environment import FeatureCache, featurize, initial_state
from .errors import ConfigError, NumericalError, TopomolError
from .fingerprint import morgan_fingerprint
from .metric import geodesic_distances
from .molgraph import MolecularGraph
from .mwcg import feature_names, mwcg_features
from .plotting import (
    plot_eval_summary,
    plot_persistence_image,
    plot_training_curve,
)
from .smiles import parse_smiles, write_smiles
from .topology import persistence_image, rips_persistence

log = logging.getLogger("topomol")

__all__ = ["main"]


class DataError(TopomolError):
    """Problem with user-supplied input data (missing/empty/unusable)."""


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on usage errors; the documented contract
    # reserves 2 for data errors, so route usage problems to exit code 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _fmt(x: float) -> str:
    """Float text that round-trips exactly and is stable across reruns."""
    return f"{float(x):.17g}"


def _load_run_config(args) -> config_mod.RunConfig:
    if args.config:
        cfg = config_mod.load_config(args.config)
    else:
        cfg = config_mod.RunConfig()
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    return cfg


def _read_molecules(path: str) -> list[tuple[str, MolecularGraph]]:
    """Parse a SMILES-per-line file, skipping and logging bad lines."""
    p = Path(path)
    if not p.is_file():
        raise DataError(f"input file not found: {path}")
    out: list[tuple[str, MolecularGraph]] = []
    skipped = 0
    for lineno, raw in enumerate(p.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            out.append((line, parse_smiles(line)))
        except TopomolError as exc:
            skipped += 1
            log.warning("line %d skipped (%s): %s", lineno, type(exc).__name__, exc)
    if skipped:
        log.info("parsed %d molecule(s), skipped %d bad line(s)", len(out), skipped)
    if not out:
        raise DataError(f"no valid molecules in {path}")
    return out


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _episode_rng(seed: int, stream: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream, index)))


# ----------------------------------------------------------------------
# featurize


def cmd_featurize(args) -> int:
    cfg = _load_run_config(args)
    out = _outdir(args)
    fz = cfg.env.featurizer
    molecules = _read_molecules(args.input)

    rows, cols = fz.image.rows, fz.image.cols
    header = (
        ["smiles"]
        + feature_names(fz.mwcg)
        + [f"pi:H{d}:{r}:{c}" for d in (0, 1) for r in range(rows) for c in range(cols)]
        + ["fingerprint_hex", "logp", "sa", "penalized_logp", "mol_weight"]
    )
    feature_path = out / "features.csv"
    diagram_path = out / "diagrams.csv"
    first_image = None
    with open(feature_path, "w", newline="", encoding="utf-8") as ffh, open(
        diagram_path, "w", newline="", encoding="utf-8"
    ) as dfh:
        fw = csv.writer(ffh)
        dw = csv.writer(dfh)
        fw.writerow(header)
        dw.writerow(["molecule_index", "smiles", "dim", "birth", "death"])
        for idx, (_, g) in enumerate(molecules):
            smi = write_smiles(g)
            dm = geodesic_distances(g, fz.bond_length_scale)
            mw = mwcg_features(g, dm, fz.mwcg)
            diagram = rips_persistence(dm, 1, fz.max_filtration)
            img = persistence_image(diagram, fz.image, fz.max_filtration)
            fp = morgan_fingerprint(g, fz.fp_radius, fz.fp_nbits)
            props = property_report(g)
            fw.writerow(
                [smi]
                + [_fmt(v) for v in mw.values]
                + [_fmt(v) for v in img.values]
                + [
                    fp.to_hex(),
                    _fmt(props.logp),
                    _fmt(props.sa),
                    _fmt(props.penalized_logp),
                    _fmt(props.mol_weight),
                ]
            )
            for p in diagram.pairs:
                death = "inf" if p.death == float("inf") else _fmt(p.death)
                dw.writerow([idx, smi, p.dim, _fmt(p.birth), death])
            if first_image is None:
                first_image = (img, smi)
    if first_image is not None:
        plot_persistence_image(first_image[0], first_image[1], out / "persistence_image.png")
    log.info("wrote %s and %s (%d molecules)", feature_path, diagram_path, len(molecules))
    return 0


# ----------------------------------------------------------------------
# train


def _train_agent(
    cfg: config_mod.RunConfig, start: MolecularGraph
) -> tuple[DuelingAgent, list[dict]]:
    env_cfg, reward_cfg, train_cfg = cfg.env, cfg.rewards, cfg.training
    agent = DuelingAgent(env_cfg.featurizer.length, train_cfg)
    buffer = ReplayBuffer(train_cfg.replay_capacity)
    cache = FeatureCache()
    records: list[dict] = []
    for episode in range(train_cfg.episodes):
        eps = train_cfg.epsilon_at(episode)
        rng = _episode_rng(cfg.seed, 1, episode)
        losses: list[float] = []

        def train_hook(step_idx: int, _agent=agent, _buffer=buffer, _losses=losses):
            if (
                len(_buffer) >= _agent.cfg.batch_size
                and step_idx % _agent.cfg.train_every == 0
            ):
                for _ in range(_agent.cfg.updates_per_step):
                    _losses.append(_agent.train_step(_buffer))

        result = run_episode(
            start,
            agent.params,
            env_cfg,
            reward_cfg,
            cfg.reward_mode,
            eps,
            rng,
            buffer=buffer,
            cache=cache,
            step_callback=train_hook,
        )
        rec = {
            "episode": episode,
            "epsilon": eps,
            "final_reward": result.steps[-1].reward if result.steps else None,
            "best_reward": result.best_reward,
            "best_penalized_logp": result.best_penalized_logp,
            "final_smiles": result.final_smiles,
            "loss_mean": float(np.mean(losses)) if losses else None,
            "buffer_size": len(buffer),
        }
        records.append(rec)
        if episode % 25 == 0 or episode == train_cfg.episodes - 1:
            log.info(
                "episode %d eps=%.3f best_plogp=%.3f cache=%d/%d",
                episode,
                eps,
                result.best_penalized_logp,
                cache.hits,
                cache.hits + cache.misses,
            )
    return agent, records


def cmd_train(args) -> int:
    cfg = _load_run_config(args)
    out = _outdir(args)
    molecules = _read_molecules(args.input)
    # Episodes start from the dataset molecule with the lowest penalized
    # logP, mirroring the worst-case-start training protocol.
    start = min((g for _, g in molecules), key=penalized_logp)
    log.info(
        "training start molecule %s (penalized logP %.3f), %d episodes",
        write_smiles(start),
        penalized_logp(start),
        cfg.training.episodes,
    )
    agent, records = _train_agent(cfg, start)
    with open(out / "checkpoint.json", "w", encoding="utf-8") as fh:
        json.dump(agent.to_checkpoint(), fh, sort_keys=True)
        fh.write("\n")
    with open(out / "train_log.jsonl", "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    plot_training_curve(records, out / "training_curve.png")
    log.info("wrote checkpoint.json, train_log.jsonl, training_curve.png")
    return 0


# ----------------------------------------------------------------------
# optimize


def _load_agent(path: str) -> DuelingAgent:
    p = Path(path)
    if not p.is_file():
        raise DataError(f"checkpoint not found: {path}")
    with open(p, "r", encoding="utf-8") as fh:
        return DuelingAgent.from_checkpoint(json.load(fh))


def _start_molecule(text: str) -> MolecularGraph:
    """Accept either a path to a one-SMILES file or a literal SMILES."""
    p = Path(text)
    if p.is_file():
        return _read_molecules(text)[0][1]
    return parse_smiles(text)


def cmd_optimize(args) -> int:
    cfg = _load_run_config(args)
    out = _outdir(args)
    agent = _load_agent(args.checkpoint)
    try:
        start = _start_molecule(args.input)
    except TopomolError as exc:
        raise DataError(f"bad start molecule {args.input!r}: {exc}") from exc
    env_cfg = cfg.env
    if agent.params.sizes[0] != env_cfg.featurizer.length:
        raise ConfigError(
            f"checkpoint expects feature dim {agent.params.sizes[0]}, "
            f"config produces {env_cfg.featurizer.length}"
        )
    cache = FeatureCache()
    rng = _episode_rng(cfg.seed, 2, 0)
    result = run_episode(
        start,
        agent.params,
        env_cfg,
        cfg.rewards,
        cfg.reward_mode,
        0.0,
        rng,
        cache=cache,
    )
    with open(out / "trajectory.jsonl", "w", encoding="utf-8") as fh:
        for rec in result.steps:
            g = parse_smiles(rec.smiles)
            state = initial_state(g, env_cfg)
            state = replace(state, steps_remaining=env_cfg.max_steps - rec.step - 1)
            vec = featurize(state, env_cfg, cache)
            fh.write(
                json.dumps(
                    {
                        "step": rec.step,
                        "action": rec.action,
                        "smiles": rec.smiles,
                        "reward": rec.reward,
                        "state_vector_hash": hashlib.sha256(
                            vec.tobytes()
                        ).hexdigest()[:16],
                    },
                    sort_keys=True,
                )
                + "\n"
            )
    # Top unique molecules by reward across the trajectory.
    seen: dict[str, tuple[float, float]] = {}
    for rec in result.steps:
        if rec.smiles not in seen or rec.reward > seen[rec.smiles][0]:
            seen[rec.smiles] = (rec.reward, rec.penalized_logp)
    top = sorted(seen.items(), key=lambda kv: -kv[1][0])[:5]
    with open(out / "best_molecules.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["smiles", "reward", "logp", "sa", "penalized_logp", "mol_weight"])
        for smi, (reward, _) in top:
            props = property_report(parse_smiles(smi))
            w.writerow(
                [
                    smi,
                    _fmt(reward),
                    _fmt(props.logp),
                    _fmt(props.sa),
                    _fmt(props.penalized_logp),
                    _fmt(props.mol_weight),
                ]
            )
    log.info(
        "optimization finished: best %s (reward %.3f)",
        result.best_smiles,
        result.best_reward,
    )
    return 0


# ----------------------------------------------------------------------
# eval / baseline


def _run_policy(
    name: str,
    params,
    eps: float,
    molecules: list[tuple[str, MolecularGraph]],
    cfg: config_mod.RunConfig,
    stream: int,
    cache: FeatureCache,
) -> dict:
    """One episode per molecule; collects Table-style statistics."""
    improvements: list[float] = []
    best_by_smiles: dict[str, float] = {}
    steps_total = 0
    steps_valid = 0
    for idx, (_, g) in enumerate(molecules):
        rng = _episode_rng(cfg.seed, stream, idx)
        result = run_episode(
            g, params, cfg.env, cfg.rewards, cfg.reward_mode, eps, rng, cache=cache
        )
        improvements.append(result.improvement)
        for rec in result.steps:
            steps_total += 1
            try:
                reparsed = parse_smiles(rec.smiles)
                if write_smiles(reparsed) == rec.smiles:
                    steps_valid += 1
            except TopomolError:
                pass
            prev = best_by_smiles.get(rec.smiles)
            if prev is None or rec.penalized_logp > prev:
                best_by_smiles[rec.smiles] = rec.penalized_logp
    top3 = sorted(best_by_smiles.values(), reverse=True)[:3]
    while len(top3) < 3:
        top3.append(float("nan"))
    return {
        "policy": name,
        "top1": top3[0],
        "top2": top3[1],
        "top3": top3[2],
        "mean_improvement": float(np.mean(improvements)) if improvements else 0.0,
        "validity_pct": 100.0 * steps_valid / steps_total if steps_total else 100.0,
        "improvements": improvements,
    }


def _write_eval_outputs(results: list[dict], out: Path, stem: str):
    csv_path = out / f"{stem}.csv"
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(
            ["policy", "top1", "top2", "top3", "mean_improvement", "validity_pct"]
        )
        for r in results:
            w.writerow(
                [
                    r["policy"],
                    _fmt(r["top1"]),
                    _fmt(r["top2"]),
                    _fmt(r["top3"]),
                    _fmt(r["mean_improvement"]),
                    _fmt(r["validity_pct"]),
                ]
            )
    txt_path = out / f"{stem}.txt"
    with open(txt_path, "w", encoding="utf-8") as fh:
        fh.write(
            f"{'policy':<20} {'top-1':>9} {'top-2':>9} {'top-3':>9} "
            f"{'mean impr':>10} {'valid %':>8}\n"
        )
        for r in results:
            fh.write(
                f"{r['policy']:<20} {r['top1']:>9.3f} {r['top2']:>9.3f} "
                f"{r['top3']:>9.3f} {r['mean_improvement']:>10.3f} "
                f"{r['validity_pct']:>8.1f}\n"
            )
    plot_eval_summary(
        {r["policy"]: r["improvements"] for r in results},
        out / f"{stem}_summary.png",
    )


def cmd_eval(args) -> int:
    cfg = _load_run_config(args)
    out = _outdir(args)
    molecules = _read_molecules(args.input)
    agent = _load_agent(args.checkpoint)
    if agent.params.sizes[0] != cfg.env.featurizer.length:
        raise ConfigError(
            f"checkpoint expects feature dim {agent.params.sizes[0]}, "
            f"config produces {cfg.env.featurizer.length}"
        )
    cache = FeatureCache()
    results = [
        _run_policy("random-walk", None, 1.0, molecules, cfg, 10, cache),
        _run_policy("eps-greedy-0.1", agent.params, 0.1, molecules, cfg, 11, cache),
        _run_policy("greedy", agent.params, 0.0, molecules, cfg, 12, cache),
    ]
    _write_eval_outputs(results, out, "eval_table")
    for r in results:
        log.info(
            "%s: top-3 %.3f/%.3f/%.3f mean improvement %.3f validity %.1f%%",
            r["policy"], r["top1"], r["top2"], r["top3"],
            r["mean_improvement"], r["validity_pct"],
        )
    return 0


def cmd_baseline(args) -> int:
    cfg = _load_run_config(args)
    out = _outdir(args)
    molecules = _read_molecules(args.input)
    cache = FeatureCache()
    results = [_run_policy("random-walk", None, 1.0, molecules, cfg, 10, cache)]
    _write_eval_outputs(results, out, "baseline")
    r = results[0]
    log.info(
        "random-walk: top-3 %.3f/%.3f/%.3f mean improvement %.3f validity %.1f%%",
        r["top1"], r["top2"], r["top3"], r["mean_improvement"], r["validity_pct"],
    )
    return 0


# ----------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="topomol", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, helptext, *, needs_input=True, needs_checkpoint=False):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", default=None, help="run config JSON path")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        p.add_argument("--out", default="out", help="output directory")
        if needs_input:
            p.add_argument("--input", required=True, help="input path (or SMILES for optimize)")
        if needs_checkpoint:
            p.add_argument("--checkpoint", required=True, help="checkpoint JSON path")
        p.set_defaults(func=func)
        return p

    add("featurize", cmd_featurize, "featurize a SMILES file into CSV outputs")
    add("train", cmd_train, "train an agent on a SMILES dataset")
    add("optimize", cmd_optimize, "greedy episode from a start molecule",
        needs_checkpoint=True)
    add("eval", cmd_eval, "Table-style policy comparison on a dataset",
        needs_checkpoint=True)
    add("baseline", cmd_baseline, "random-walk baseline statistics")
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        level=logging.INFO, format="%(levelname)s %(name)s: %(message)s"
    )
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return 1
    except DataError as exc:
        log.error("data error: %s", exc)
        return 2
    except NumericalError as exc:
        log.error("numerical failure: %s", exc)
        return 3
    except TopomolError as exc:
        log.error("data error: %s", exc)
        return 2
    except OSError as exc:
        log.error("I/O error: %s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
