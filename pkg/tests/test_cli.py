import json

import pytest

from srlhop.cli import main

TINY = ["--dim", "8", "--d-model", "4", "--gcn-hidden", "4", "--gcn-out", "3", "--rnn-hidden", "3",
        "--head-hidden", "3", "--sel-hidden", "3", "--epochs", "1", "--selector-epochs", "1"]


@pytest.fixture
def corpus(tmp_path, capsys):
    assert main(["synth", "--out", str(tmp_path), "--n-instances", "12", "--dev-size", "4", "--seed", "1",
                 "--audit"]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary == {"instances": 12, "coverage": 1.0, "train": 8, "dev": 4}
    return tmp_path


def test_train_evaluate_pipeline(corpus, capsys):
    d = corpus
    assert main(["train-joint", "--train", f"{d}/train.jsonl", "--train-srl", f"{d}/train.srl.jsonl",
                 "--dev", f"{d}/dev.jsonl", "--dev-srl", f"{d}/dev.srl.jsonl", "--out", f"{d}/m.npz",
                 "--metrics", f"{d}/metrics.jsonl", *TINY]) == 0
    history = [json.loads(x) for x in (d / "metrics.jsonl").read_text().splitlines()]
    assert len(history) == 1 and "dev_loss" in history[0]
    assert main(["evaluate", "--model", f"{d}/m.npz", "--instances", f"{d}/dev.jsonl",
                 "--srl", f"{d}/dev.srl.jsonl"]) == 0
    report = json.loads(capsys.readouterr().out)
    for key in ("ans_em", "ans_f1", "sf_em", "sf_f1", "joint_em", "joint_f1", "graph_coverage"):
        assert 0.0 <= report[key] <= 1.0
    assert report["instances"] == 4

    assert main(["predict", "--model", f"{d}/m.npz", "--instances", f"{d}/dev.jsonl",
                 "--srl", f"{d}/dev.srl.jsonl", "--out", f"{d}/pred.jsonl"]) == 0
    assert main(["evaluate", "--predictions", f"{d}/pred.jsonl", "--instances", f"{d}/dev.jsonl",
                 "--srl", f"{d}/dev.srl.jsonl"]) == 0
    assert json.loads(capsys.readouterr().out) == report


def test_selector_then_joint(corpus, capsys):
    d = corpus
    assert main(["train-selector", "--train", f"{d}/train.jsonl", "--out", f"{d}/sel.npz", *TINY]) == 0
    # dims are picked up from the selector checkpoint
    assert main(["train-joint", "--train", f"{d}/train.jsonl", "--train-srl", f"{d}/train.srl.jsonl",
                 "--selector", f"{d}/sel.npz", "--out", f"{d}/m.npz", "--epochs", "1"]) == 0
    assert main(["train-joint", "--train", f"{d}/train.jsonl", "--train-srl", f"{d}/train.srl.jsonl",
                 "--selector", f"{d}/sel.npz", "--out", f"{d}/m2.npz", "--dim", "6"]) == 2
    assert json.loads(capsys.readouterr().err)["error"] == "ConfigError"


def test_export_graph_dot(corpus, capsys):
    d = corpus
    assert main(["build-graph", "--instances", f"{d}/dev.jsonl", "--srl", f"{d}/dev.srl.jsonl"]) == 0
    graphs = [json.loads(x) for x in capsys.readouterr().out.splitlines()]
    assert len(graphs) == 4 and all(g["covered"] for g in graphs)
    first = graphs[0]
    assert main(["export-graph", "--instances", f"{d}/dev.jsonl", "--srl", f"{d}/dev.srl.jsonl",
                 "--id", first["id"]]) == 0
    dot = capsys.readouterr().out
    n = len(first["graph"]["nodes"])
    assert dot.startswith("graph") and sum(1 for ln in dot.splitlines() if " [" in ln and "--" not in ln) == n


def test_unknown_command_and_bad_flags(capsys):
    assert main(["frobnicate"]) == 2
    assert main(["synth", "--out", "x", "--bridge-fraction", "2"]) == 2
    err = capsys.readouterr().err.strip().splitlines()[-1]
    assert json.loads(err)["error"] == "ConfigError"


def test_config_file_then_flag(corpus, tmp_path, capsys):
    d = corpus
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"dim": 8, "d_model": 4, "gcn_hidden": 4, "gcn_out": 3, "rnn_hidden": 3,
                               "head_hidden": 3, "sel_hidden": 3, "epochs": 1, "selector_epochs": 0,
                               "seed": 5}))
    assert main(["train-joint", "--train", f"{d}/train.jsonl", "--train-srl", f"{d}/train.srl.jsonl",
                 "--config", str(cfg), "--d-model", "5", "--out", f"{d}/m.npz"]) == 0
    from srlhop.fileio import load_checkpoint
    P, manifest = load_checkpoint(d / "m.npz")
    assert P.dims.d_model == 5 and P.dims.dim == 8
    assert manifest["extra"]["seed"] == 5 and manifest["extra"]["hyper"]["selector_epochs"] == 0
    cfg.write_text(json.dumps({"no_such_field": 1}))
    assert main(["train-joint", "--train", f"{d}/train.jsonl", "--train-srl", f"{d}/train.srl.jsonl",
                 "--config", str(cfg), "--out", f"{d}/m3.npz"]) == 2


def test_missing_file_is_runtime_error(tmp_path, capsys):
    assert main(["ingest", "--instances", str(tmp_path / "nope.jsonl")]) == 1
    rec = json.loads(capsys.readouterr().err)
    assert rec["stage"] == "ingest"


def test_ingest_hotpot(tmp_path, capsys):
    raw = [{"_id": "h1", "question": "Which team ?", "answer": "yes",
            "context": [["A", ["x ."]], ["B", ["y ."]]], "supporting_facts": [["A", 0], ["B", 0]]}]
    (tmp_path / "h.json").write_text(json.dumps(raw))
    assert main(["ingest", "--hotpot", str(tmp_path / "h.json"), "--out-instances",
                 str(tmp_path / "i.jsonl")]) == 0
    assert json.loads(capsys.readouterr().out) == {"instances": 1, "srl_frames": 0}
    assert json.loads((tmp_path / "i.jsonl").read_text())["id"] == "h1"
