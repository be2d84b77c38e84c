import json

import numpy as np

from dget.cli import main
from dget.data import N_CLASSES


def test_usage_errors_exit_2(capsys):
    assert main([]) == 2
    assert main(["train"]) == 2
    assert main(["no-such-command"]) == 2
    capsys.readouterr()


def test_missing_files_exit_3(tmp_path, capsys):
    assert main(["predict", "--checkpoint", str(tmp_path / "no.pt"),
                 "--dataset", str(tmp_path / "no.jsonl"),
                 "--out", str(tmp_path / "o.jsonl")]) == 3
    assert main(["train", "--dataset", str(tmp_path / "no.jsonl"),
                 "--out-dir", str(tmp_path / "run")]) == 3
    capsys.readouterr()


def test_schema_mismatch_exit_3(tmp_path, capsys):
    bad = tmp_path / "bad.jsonl"
    bad.write_text(json.dumps({"schema": "something-else", "version": 1}) + "\n")
    assert main(["train", "--dataset", str(bad),
                 "--out-dir", str(tmp_path / "run")]) == 3
    capsys.readouterr()


def test_train_then_predict(tmp_path, toy_dataset_path, capsys):
    cfg = tmp_path / "quick.cfg"
    cfg.write_text(
        "gat_layers = 1\ngat_heads = 2\ninductive_layers = 1\n"
        "embed_dim = 16\ntransformer_layers = 1\ntransformer_heads = 2\n"
        "dropout = 0.0\nepochs = 2\nfolds = 2\n"
    )
    run = tmp_path / "run"
    assert main(["train", "--dataset", toy_dataset_path,
                 "--out-dir", str(run), "--config", str(cfg), "--seed", "1"]) == 0
    out = capsys.readouterr().out
    assert "checkpoint:" in out and "metrics:" in out

    preds = tmp_path / "preds.jsonl"
    assert main(["predict", "--checkpoint", str(run / "checkpoint.pt"),
                 "--dataset", toy_dataset_path, "--out", str(preds)]) == 0
    capsys.readouterr()
    lines = preds.read_text().strip().split("\n")
    header = json.loads(lines[0])
    assert header["schema"] == "hyrosched-predictions"
    # one record per input snapshot: 5 scenarios x 5 steps
    assert len(lines) - 1 == 25
    for line in lines[1:]:
        probs = np.array(json.loads(line)["probs"])
        assert probs.shape[1] == N_CLASSES
        assert np.allclose(probs.sum(axis=1), 1.0, atol=1e-6)
