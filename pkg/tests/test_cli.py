import json
import subprocess
import sys

import pytest

from sphere_entropy.cli import parse_chart, parse_q, parse_range, run

L1_2 = '{"family":"lp","p":1,"dim":2}'


def test_parse_helpers():
    assert parse_range("6..9") == [6, 7, 8, 9]
    assert parse_range("3,5") == [3, 5]
    assert parse_q("inf") == float("inf") and parse_q("2") == 2.0
    assert parse_chart("1,-1:0", 2).signs.tolist() == [1, -1]


def test_oracle_prints_three(capsys):
    assert run(["oracle", "--d", "1", "--eps", "0.3333", "--metric", "linf"]) == 0
    assert capsys.readouterr().out.strip() == "3"


def test_oracle_packing_json(capsys):
    assert run(["oracle", "--d", "2", "--eps", "0.5", "--packing"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["covering"] == 4 and out["packing"] <= 4


def test_verify_empty_file_exits_2(tmp_path):
    empty = tmp_path / "empty.json"
    empty.write_text("")
    assert run(["verify", "--cover", str(empty)]) == 2


def test_cover_then_verify(tmp_path):
    path = tmp_path / "cover.json"
    assert run(["cover", "--norm", L1_2, "--eps", "0.25", "--out", str(path)]) == 0
    data = json.loads(path.read_text())
    assert data["radius"] == 0.5 and data["provenance"] == "sphere_lift"
    assert run(["verify", "--cover", str(path), "--samples", "5000"]) == 0


def test_verify_fails_on_shrunk_radius(tmp_path):
    path = tmp_path / "cover.json"
    run(["cover", "--norm", L1_2, "--eps", "0.25", "--out", str(path)])
    data = json.loads(path.read_text())
    data["radius"] = 0.05
    path.write_text(json.dumps(data))
    assert run(["verify", "--cover", str(path), "--samples", "5000"]) == 2


def test_rates_deterministic(tmp_path):
    outs = []
    for name in ("a", "b"):
        csv = tmp_path / f"{name}.csv"
        argv = ["rates", "--norm", L1_2, "--k", "4..9", "--seed", "1", "--samples", "2000",
                "--out", str(csv)]
        assert run(argv) == 0
        outs.append((csv.read_bytes(), csv.with_suffix(".json").read_bytes()))
    assert outs[0] == outs[1]
    header = outs[0][0].decode().splitlines()[0]
    assert header == "d,p,q,k,lower,upper,envelope,slope_fit"
    assert b"\r" not in outs[0][0]


def test_rates_threads_match_serial(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    base = ["rates", "--norm", L1_2, "--k", "4..7", "--seed", "2", "--samples", "1000"]
    assert run(base + ["--out", str(a)]) == 0
    assert run(base + ["--threads", "2", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"d": 1, "eps": 1.0, "metric": "linf"}))
    assert run(["oracle", "--config", str(cfg)]) == 0
    assert capsys.readouterr().out.strip() == "1"
    assert run(["oracle", "--config", str(cfg), "--eps", "0.3333"]) == 0
    assert capsys.readouterr().out.strip() == "3"


def test_config_unknown_key_rejected(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"d": 1, "eps": 0.5, "colour": "red"}))
    assert run(["oracle", "--config", str(cfg)]) == 1


@pytest.mark.parametrize("argv", [
    ["rates", "--norm", '{"family":"lp","p":1}'],
    ["rates", "--norm", L1_2, "--k", "0..3"],
    ["oracle", "--d", "1"],
    ["oracle", "--d", "5", "--eps", "0.5"],
    ["cover", "--norm", L1_2, "--eps", "2"],
    ["nonsense"],
])
def test_invalid_input_exits_1(argv):
    assert run(argv) == 1


def test_lambda_table(capsys):
    assert run(["lambda", "--norm", '{"family":"lp","p":2,"dim":4}']) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "k,lambda,formula"
    assert lines[4].split(",")[:2] == ["4", "2.0"]


def test_props_small(capsys):
    assert run(["props", "--d", "2", "--suite", "lipschitz", "--pairs", "50"]) == 0
    assert len(capsys.readouterr().out.splitlines()) == 1 + 6


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "sphere_entropy", "oracle", "--d", "1", "--eps",
                          "0.3333"], capture_output=True, text=True, check=False)
    assert res.returncode == 0 and res.stdout.strip() == "3"
