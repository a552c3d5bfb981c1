import json

import pytest

from commingle.cli import build_parser, main

from .conftest import AMPS, GAMMA0, GAMMA1, GD, LABELS0

SIGNAL = {"breaks": ["0", "1.51", "3.02", "4.53", "6.04"], "amps": list(AMPS)}


@pytest.fixture
def files(tmp_path):
    sig = tmp_path / "signal.json"
    sig.write_text(json.dumps(SIGNAL))
    o0, o1 = tmp_path / "g0.json", tmp_path / "g1.json"
    assert main(["simulate", str(sig), "--sigma", "0.125", "--t0", "-1.8", "--n", "11", "--out", str(o0)]) == 0
    assert main(["simulate", str(sig), "--sigma", repr(1 / 7), "--t0", "-1.3", "--n", "11", "--out", str(o1)]) == 0
    return sig, o0, o1


def test_parser_defaults():
    args = build_parser().parse_args(["check"])
    assert (args.seed, args.trials, args.min_gap_lo, args.min_gap_hi, args.format) == (1, 100, 1.5, 2.0, "text")


def test_simulate_writes_fixtures(files):
    _, o0, o1 = files
    assert json.loads(o0.read_text())["samples"] == list(GAMMA0)
    assert json.loads(o1.read_text())["samples"] == list(GAMMA1)


def test_simulate_zero_signal(tmp_path, capsys):
    sig = tmp_path / "z.json"
    sig.write_text(json.dumps({"breaks": ["0", "1.6"], "amps": [0]}))
    assert main(["simulate", str(sig), "--sigma", "0.1", "--t0", "-1.5", "--n", "5"]) == 0
    assert json.loads(capsys.readouterr().out)["samples"] == [0] * 5


def test_recover_result_file(files, tmp_path):
    _, o0, o1 = files
    out = tmp_path / "r.json"
    assert main(["recover", str(o0), str(o1), "--out", str(out)]) == 0
    res = json.loads(out.read_text())
    assert tuple(res["labels0"]) == LABELS0
    assert tuple(res["gd"]) == GD and tuple(res["amplitudes"]) == AMPS
    assert res["rules"] and res["exact"]
    breaks = [float(b) for b in SIGNAL["breaks"]]
    for entry in res["bounds"]:
        for loc in entry["locations"]:
            lo, hi = loc["interval"]
            assert lo < breaks[loc["j"]] < hi
        for dist in entry["distances"]:
            lo, hi = dist["interval"]
            assert lo < breaks[dist["j"] + 1] - breaks[dist["j"]] < hi


def test_recover_identical_inputs_exit_2(files, capsys):
    _, o0, _ = files
    assert main(["recover", str(o0), str(o0)]) == 2
    assert "identical" in capsys.readouterr().err


def test_recover_inconsistent_inputs_exit_3(files, tmp_path, capsys):
    _, o0, _ = files
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"t0": "-1.3", "T": "1.0", "samples": [0, 5, 256, 256]}))
    assert main(["recover", str(o0), str(bad)]) == 3
    assert "sum to zero" in capsys.readouterr().err
    bad.write_text(json.dumps({"t0": "-1.3", "T": "1.0", "samples": [0, 5, 256, 0, 0]}))
    assert main(["recover", str(o0), str(bad)]) == 3
    assert "no jointly consistent parse" in capsys.readouterr().err


def test_diff_with_labels(files, capsys):
    sig, o0, o1 = files
    assert main(["diff", str(o0), str(o1), "--label", "--format", "json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert tuple(data["labels"]) == LABELS0
    assert main(["diff", str(o0), "--label", "--signal", str(sig)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[2].split() == ["2", "242", "P1"]
    assert main(["diff", str(o0), "--label"]) == 4


def test_analyze(files, capsys):
    sig, o0, _ = files
    assert main(["analyze", str(sig), str(o0), "--format", "json"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["ok"] and tuple(rep["labels"]) == LABELS0
    assert {c["name"] for c in rep["checks"]} >= {"corollary2", "prop3", "prop5", "prop6", "theorem7"}
    assert main(["analyze", str(sig), str(o0)]) == 0
    assert "PASS     corollary2" in capsys.readouterr().out
    assert main(["analyze", str(sig), str(o0), "--sigma", "0.4"]) == 4


def test_check_is_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["check", "--seed", "3", "--trials", "15", "--format", "json", "--out", str(a)]) in (0, 1)
    main(["check", "--seed", "3", "--trials", "15", "--format", "json", "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()
    assert json.loads(a.read_text())["trials"] == 15


def test_check_zero_trials(capsys):
    assert main(["check", "--trials", "0", "--format", "json"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["trials"] == 0 and rep["ok"]


def test_check_rejects_prop1_violating_spec(capsys):
    assert main(["check", "--trials", "3", "--sigma-lo", "1.0", "--sigma-hi", "1.5"]) == 4
    out = capsys.readouterr().out
    assert "resampled (prop1_bound): 3" in out and "rejected trials: 3" in out
