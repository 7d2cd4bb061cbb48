import csv
import json

import pytest

from topomol.cli import main
from topomol.config import RunConfig, config_to_dict, dump_config
from topomol.smiles import parse_smiles, write_smiles


@pytest.fixture(scope="module")
def tiny_inputs(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    smi = root / "mols.smi"
    smi.write_text("CCO\nc1ccccc1\nCC(=O)O\nCCN\nCCCC\n")
    cfg = config_to_dict(RunConfig())
    cfg["training"].update(
        episodes=3, epsilon_decay_episodes=2, hidden_sizes=[32, 16], batch_size=16
    )
    cfg["env"]["max_steps"] = 6
    cfg_path = root / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    return root, smi, cfg_path


@pytest.fixture(scope="module")
def tiny_checkpoint(tiny_inputs):
    root, smi, cfg_path = tiny_inputs
    out = root / "train"
    rc = main(["train", "--input", str(smi), "--config", str(cfg_path), "--out", str(out)])
    assert rc == 0
    return out / "checkpoint.json"


def test_featurize_outputs(tiny_inputs, tmp_path):
    root, smi, cfg_path = tiny_inputs
    out = tmp_path / "feat"
    assert main(["featurize", "--input", str(smi), "--out", str(out)]) == 0
    with open(out / "features.csv") as fh:
        rows = list(csv.reader(fh))
    assert len(rows) == 1 + 5  # header + molecules
    header = rows[0]
    assert header[0] == "smiles"
    assert "fingerprint_hex" in header
    assert header[-4:] == ["logp", "sa", "penalized_logp", "mol_weight"]
    # first molecule written canonically
    assert rows[1][0] == write_smiles(parse_smiles("CCO"))
    assert (out / "diagrams.csv").exists()
    assert (out / "persistence_image.png").stat().st_size > 0


def test_featurize_skips_bad_lines(tmp_path):
    bad = tmp_path / "in.smi"
    bad.write_text("CCO\nnot_a_smiles((\nCCC\n")
    out = tmp_path / "feat"
    assert main(["featurize", "--input", str(bad), "--out", str(out)]) == 0
    with open(out / "features.csv") as fh:
        assert len(list(csv.reader(fh))) == 1 + 2


def test_featurize_rerun_byte_identical(tiny_inputs, tmp_path):
    root, smi, _ = tiny_inputs
    out1, out2 = tmp_path / "a", tmp_path / "b"
    main(["featurize", "--input", str(smi), "--out", str(out1)])
    main(["featurize", "--input", str(smi), "--out", str(out2)])
    assert (out1 / "features.csv").read_bytes() == (out2 / "features.csv").read_bytes()
    assert (out1 / "diagrams.csv").read_bytes() == (out2 / "diagrams.csv").read_bytes()


def test_train_artifacts(tiny_checkpoint):
    ck = json.loads(tiny_checkpoint.read_text())
    assert ck["schema"].startswith("topomol-checkpoint")
    log_path = tiny_checkpoint.parent / "train_log.jsonl"
    records = [json.loads(ln) for ln in log_path.read_text().splitlines()]
    assert len(records) == 3
    eps = [r["epsilon"] for r in records]
    assert eps == sorted(eps, reverse=True)
    for r in records:
        assert {"episode", "epsilon", "final_reward", "best_penalized_logp"} <= set(r)
    assert (tiny_checkpoint.parent / "training_curve.png").stat().st_size > 0


def test_optimize_trajectory(tiny_inputs, tiny_checkpoint, tmp_path):
    root, smi, cfg_path = tiny_inputs
    out = tmp_path / "opt"
    rc = main(
        ["optimize", "--input", "CCO", "--checkpoint", str(tiny_checkpoint),
         "--config", str(cfg_path), "--out", str(out)]
    )
    assert rc == 0
    records = [
        json.loads(ln)
        for ln in (out / "trajectory.jsonl").read_text().splitlines()
    ]
    assert len(records) == 6  # max_steps from the config
    for k, rec in enumerate(records):
        assert set(rec) == {"step", "action", "smiles", "reward", "state_vector_hash"}
        assert rec["step"] == k
        parse_smiles(rec["smiles"])  # must reparse
    with open(out / "best_molecules.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["smiles", "reward", "logp", "sa", "penalized_logp", "mol_weight"]
    assert 2 <= len(rows) <= 6
    smiles_col = [r[0] for r in rows[1:]]
    assert len(smiles_col) == len(set(smiles_col))  # unique molecules


def test_eval_outputs_and_determinism(tiny_inputs, tiny_checkpoint, tmp_path):
    root, smi, cfg_path = tiny_inputs
    out1, out2 = tmp_path / "e1", tmp_path / "e2"
    for out in (out1, out2):
        rc = main(
            ["eval", "--input", str(smi), "--checkpoint", str(tiny_checkpoint),
             "--config", str(cfg_path), "--out", str(out), "--seed", "3"]
        )
        assert rc == 0
    assert (out1 / "eval_table.csv").read_bytes() == (out2 / "eval_table.csv").read_bytes()
    with open(out1 / "eval_table.csv") as fh:
        rows = list(csv.reader(fh))
    assert [r[0] for r in rows] == ["policy", "random-walk", "eps-greedy-0.1", "greedy"]
    for r in rows[1:]:
        assert float(r[5]) == 100.0  # validity percentage


def test_baseline_runs(tiny_inputs, tmp_path):
    root, smi, cfg_path = tiny_inputs
    out = tmp_path / "base"
    rc = main(["baseline", "--input", str(smi), "--config", str(cfg_path), "--out", str(out)])
    assert rc == 0
    with open(out / "baseline.csv") as fh:
        rows = list(csv.reader(fh))
    assert len(rows) == 2 and rows[1][0] == "random-walk"


# --- exit codes -------------------------------------------------------------


def test_exit_code_config_error(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{\"unknown_key\": 1}")
    smi = tmp_path / "m.smi"
    smi.write_text("CCO\n")
    rc = main(["featurize", "--input", str(smi), "--config", str(bad), "--out", str(tmp_path / "o")])
    assert rc == 1


def test_exit_code_missing_config_file(tmp_path):
    smi = tmp_path / "m.smi"
    smi.write_text("CCO\n")
    rc = main(["featurize", "--input", str(smi), "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path / "o")])
    assert rc == 1


def test_exit_code_usage_error():
    assert main(["featurize"]) == 1  # --input is required
    assert main(["no-such-verb"]) == 1


def test_exit_code_data_error(tmp_path):
    rc = main(["featurize", "--input", str(tmp_path / "missing.smi"), "--out", str(tmp_path / "o")])
    assert rc == 2
    empty = tmp_path / "empty.smi"
    empty.write_text("bad_smiles((\n")
    rc = main(["featurize", "--input", str(empty), "--out", str(tmp_path / "o2")])
    assert rc == 2


def test_exit_code_checkpoint_schema(tmp_path):
    ck = tmp_path / "ck.json"
    ck.write_text("{\"schema\": \"other\"}")
    smi = tmp_path / "m.smi"
    smi.write_text("CCO\n")
    rc = main(["eval", "--input", str(smi), "--checkpoint", str(ck), "--out", str(tmp_path / "o")])
    assert rc == 1


def test_seed_flag_overrides_config(tiny_inputs, tmp_path):
    root, smi, cfg_path = tiny_inputs
    out1, out2, out3 = tmp_path / "s1", tmp_path / "s2", tmp_path / "s3"
    main(["baseline", "--input", str(smi), "--out", str(out1), "--seed", "1"])
    main(["baseline", "--input", str(smi), "--out", str(out2), "--seed", "2"])
    main(["baseline", "--input", str(smi), "--out", str(out3), "--seed", "1"])
    b1 = (out1 / "baseline.csv").read_bytes()
    assert b1 != (out2 / "baseline.csv").read_bytes()
    assert b1 == (out3 / "baseline.csv").read_bytes()
