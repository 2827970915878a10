import math

import numpy as np
import pytest

from dmf.cli import main
from dmf.pgm import read_pgm, write_mask, write_pgm

QUICK = ["--steps", "40", "--count", "20"]


def read_bytes(directory):
    return {p.name: p.read_bytes() for p in sorted(directory.iterdir())}


def test_gen_data_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["gen-data", "--count", "10", "--seed", "7", "--out", str(a)]) == 0
    assert main(["gen-data", "--count", "10", "--seed", "7", "--out", str(b)]) == 0
    files = read_bytes(a)
    assert len(files) == 20 and "scene_9.pgm" in files and "mask_0.pgm" in files
    assert files == read_bytes(b)


def test_train_writes_outputs_and_is_idempotent(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["train", *QUICK, "--out", str(a)]) == 0
    assert main(["train", *QUICK, "--out", str(b)]) == 0
    assert set(read_bytes(a)) == {"config.txt", "report.csv", "trace.csv"}
    assert read_bytes(a) == read_bytes(b)
    out = capsys.readouterr().out
    assert out.startswith("name,dice,iou,f1,precision,recall,cb_dice\ntest,")


def test_train_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("steps=30\ncount=20\nstrategy=mad\ngamma0=0\n")
    assert main(["train", "--config", str(cfg), "--strategy", "bayesian", "--out", str(tmp_path)]) == 0
    written = (tmp_path / "config.txt").read_text()
    assert "strategy=bayesian" in written and "steps=30" in written and "gamma0=0.0" in written
    trace = (tmp_path / "trace.csv").read_text().splitlines()
    assert len(trace) == 31


def test_replay_round_trip(tmp_path):
    assert main(["train", *QUICK, "--strategy", "mad", "--out", str(tmp_path)]) == 0
    trace = tmp_path / "trace.csv"
    tau = math.log(20.0) / (40 / 2)
    assert main(["replay", str(trace), "--strategy", "mad", "--gamma0", "1.0",
                 "--tau", repr(tau), "--out", str(tmp_path / "r")]) == 0
    assert (tmp_path / "r" / "replay.csv").read_text() == trace.read_text()


def test_replay_rejects_non_simplex_priors(tmp_path, capsys):
    trace = tmp_path / "t.csv"
    trace.write_text("step,loss_a,loss_b\n0,1,2\n")
    code = main(["replay", str(trace), "--strategy", "bayesian", "--priors", "0.7,0.7"])
    assert code == 1
    err = capsys.readouterr().err
    assert err.startswith("dmf: error:") and err.count("\n") == 1


def test_replay_malformed_is_data_error(tmp_path, capsys):
    trace = tmp_path / "t.csv"
    trace.write_text("step,loss_a\n0,1\n1,x\n")
    assert main(["replay", str(trace), "--out", str(tmp_path)]) == 2
    assert "line 3" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["train", "--bogus"],
    ["frobnicate"],
    [],
    ["train", "--strategy", "softadapt"],
    ["gen-data", "--count", "0"],
    ["filter", "only-one-arg"],
])
def test_usage_errors(argv, capsys):
    assert main(argv) == 1
    assert capsys.readouterr().err.startswith("dmf: error:")


def test_missing_file_is_runtime_error(tmp_path, capsys):
    assert main(["filter", str(tmp_path / "none.pgm"), str(tmp_path / "out.pgm")]) == 2
    assert capsys.readouterr().err.startswith("dmf: error:")


def test_filter(tmp_path):
    src, dst = tmp_path / "in.pgm", tmp_path / "out.pgm"
    img = np.full((6, 6), 0.5)
    write_pgm(src, img)
    assert main(["filter", str(src), str(dst), "--sigma-s", "1", "--sigma-r", "0.1"]) == 0
    np.testing.assert_array_equal(read_pgm(dst), read_pgm(src))
    first = dst.read_bytes()
    assert main(["filter", str(src), str(dst), "--sigma-s", "1", "--sigma-r", "0.1"]) == 0
    assert dst.read_bytes() == first


def test_eval(tmp_path, capsys):
    mask = np.array([[1, 1, 1, 0, 1, 0]])
    pred = np.array([[1, 1, 1, 1, 0, 0]])
    write_mask(tmp_path / "m.pgm", mask)
    write_mask(tmp_path / "p.pgm", pred)
    write_mask(tmp_path / "q.pgm", mask)
    assert main(["eval", "--pred", str(tmp_path / "p.pgm"), str(tmp_path / "q.pgm"),
                 "--mask", str(tmp_path / "m.pgm"), str(tmp_path / "m.pgm")]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "name,dice,iou,f1,precision,recall,cb_dice"
    assert lines[2].startswith("q.pgm,1,1,1,1,1,1")
    assert lines[3].startswith("mean,")
    dice_p = float(lines[1].split(",")[1])
    # class 1: 0.75, class 0: 2*1/(2+1+1) = 0.5
    assert dice_p == pytest.approx((0.75 + 0.5) / 2, abs=1e-9)


def test_eval_mismatched_lists(tmp_path):
    write_mask(tmp_path / "m.pgm", np.zeros((2, 2), int))
    assert main(["eval", "--pred", str(tmp_path / "m.pgm"), "--mask",
                 str(tmp_path / "m.pgm"), str(tmp_path / "m.pgm")]) == 1


def test_compare_small(tmp_path, capsys):
    assert main(["compare", *QUICK, "--seeds", "2", "--configs", "variance+cbdice,fixed",
                 "--out", str(tmp_path)]) == 0
    table = (tmp_path / "summary.txt").read_text()
    header = table.splitlines()[0]
    for col in ("Dice", "IoU", "F1-score", "Precision", "Recall", "CB-Dice"):
        assert col in header
    assert "Using Fixed Weights" in table
    summary = (tmp_path / "summary.csv").read_text().splitlines()
    assert summary[1].startswith("cbdice,variance,2,")
    assert summary[2].startswith("none,fixed,2,")


def test_compare_bad_label(tmp_path):
    assert main(["compare", *QUICK, "--seeds", "1", "--configs", "nonsense", "--out", str(tmp_path)]) == 1
