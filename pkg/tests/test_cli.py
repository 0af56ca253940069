import csv
import json
import math
import subprocess
import sys

import pytest

from idempotent.cli import EXIT_INPUT, EXIT_OK, EXIT_VERIFY, main


def run(tmp_path, args, payload=None, name="in.json"):
    out = tmp_path / "out.json"
    argv = list(args) + ["--out", str(out), "--no-timestamp"]
    if payload is not None:
        src = tmp_path / name
        src.write_text(json.dumps(payload))
        argv += ["--in", str(src)]
    code = main(argv)
    text = out.read_text() if out.exists() else None
    return code, text


def result_of(text):
    return json.loads(text)["result"]


def test_norm_examples(tmp_path):
    code, text = run(tmp_path, ["norm", "--group", "12"], {"set": [0, 3, 6, 9]})
    assert code == EXIT_OK
    assert result_of(text)["wiener_norm"] == pytest.approx(1.0, abs=1e-12)
    code, text = run(tmp_path, ["norm"], {"group": "4", "values": [0, 0, 0, 0]})
    assert result_of(text)["wiener_norm"] == 0
    code, text = run(tmp_path, ["norm", "--group", "4"], {"set": [0, 1]})
    res = result_of(text)
    assert res["wiener_norm"] == pytest.approx(0.5 + math.sqrt(2) / 2, abs=1e-12)
    assert res["is_integer_valued"] is True and res["sup_norm"] == 1


@pytest.mark.parametrize(
    "payload",
    [{"set": "oops"}, {"set": [99]}, {"set": [[1, 2]]}, {"nothing": 1}],
)
def test_malformed_input_exits_2(tmp_path, payload):
    code, _ = run(tmp_path, ["norm", "--group", "12"], payload)
    assert code == EXIT_INPUT


def test_unreadable_input_and_bad_flags(tmp_path):
    assert main(["norm", "--in", str(tmp_path / "missing.json"), "--group", "4"]) == EXIT_INPUT
    (tmp_path / "bad.json").write_text("{not json")
    assert main(["norm", "--in", str(tmp_path / "bad.json"), "--group", "4"]) == EXIT_INPUT
    assert main(["norm", "--strategy", "nope"]) == EXIT_INPUT
    assert main(["bogus"]) == EXIT_INPUT


def test_config_file_overrides_and_unknown_keys(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"seed": 7, "c_mel": 5.0}))
    code, text = run(tmp_path, ["norm", "--group", "12", "--config", str(cfg)], {"set": [0]})
    assert code == EXIT_OK
    config = json.loads(text)["config"]
    assert config["seed"] == 7 and config["c_mel"] == 5.0 and config["c_cs"] == 64
    cfg.write_text(json.dumps({"not_a_key": 1}))
    code, _ = run(tmp_path, ["norm", "--group", "12", "--config", str(cfg)], {"set": [0]})
    assert code == EXIT_INPUT


def test_flag_beats_config_file(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"seed": 7}))
    _, text = run(tmp_path, ["norm", "--group", "12", "--config", str(cfg), "--seed", "3"], {"set": [0]})
    assert json.loads(text)["config"]["seed"] == 3


def test_decompose_examples(tmp_path):
    code, text = run(tmp_path, ["decompose", "--group", "12", "--strategy", "oracle"], {"set": [0, 4, 8]})
    assert code == EXIT_OK and result_of(text)["l1"] == 1
    code, text = run(tmp_path, ["decompose", "--group", "17", "--strategy", "oracle"], {"set": [0, 1, 2, 3, 4]})
    assert code == EXIT_OK and result_of(text)["l1"] == 5
    values = [1, 0, 0, 1, 2, 1, 1, 0]
    code, text = run(tmp_path, ["decompose", "--group", "2,4", "--strategy", "paper", "--seed", "1"], {"values": values})
    res = result_of(text)
    assert code == EXIT_OK and res["verified"] and res["residual_sup"] == 0


def test_decompose_rejects_fractional_input(tmp_path):
    code, _ = run(tmp_path, ["decompose", "--group", "4"], {"values": [0.5, 0, 0, 0]})
    assert code == EXIT_INPUT


def test_verify_round_trip_and_corruption(tmp_path):
    _, text = run(tmp_path, ["decompose", "--group", "6", "--strategy", "oracle"], {"set": [0, 1]})
    decomposition = result_of(text)
    fn = {"group": "6", "set": [0, 1]}
    code, text = run(tmp_path, ["verify"], {"function": fn, "decomposition": decomposition})
    assert code == EXIT_OK and result_of(text)["ok"]
    decomposition["terms"][0]["coefficient"] += 1
    code, text = run(tmp_path, ["verify"], {"function": fn, "decomposition": decomposition})
    res = result_of(text)
    assert code == EXIT_VERIFY and not res["ok"] and res["first_mismatch"] is not None
    code, _ = run(tmp_path, ["verify"], {"function": fn})
    assert code == EXIT_INPUT


def test_experiment_ap_csv(tmp_path):
    out = tmp_path / "ap.csv"
    code = main(["experiment-ap", "--primes", "17", "--lengths", "1,2,4,8", "--out", str(out)])
    assert code == EXIT_OK
    rows = list(csv.DictReader(out.read_text().splitlines()))
    assert [int(r["weight"]) for r in rows] == [1, 2, 4, 8]
    norms = [float(r["wiener_norm"]) for r in rows]
    assert norms[0] == pytest.approx(1.0)
    assert all(a < b for a, b in zip(norms, norms[1:]))
    assert all(n < int(r["L"]) or int(r["L"]) == 1 for n, r in zip(norms, rows))
    sidecar = json.loads((tmp_path / "ap.csv.config.json").read_text())
    assert sidecar["config"]["primes"] == [17]


def test_experiment_ap_complement_and_input_errors(tmp_path):
    out = tmp_path / "ap.csv"
    assert main(["experiment-ap", "--primes", "13", "--lengths", "12", "--out", str(out)]) == EXIT_OK
    assert list(csv.DictReader(out.read_text().splitlines()))[0]["weight"] == "2"
    assert main(["experiment-ap", "--primes", "12", "--out", str(out)]) == EXIT_INPUT
    assert main(["experiment-ap", "--primes", "13", "--lengths", "13", "--out", str(out)]) == EXIT_INPUT


def test_pipeline_freiman(tmp_path):
    log = tmp_path / "log.jsonl"
    code, text = run(tmp_path, ["pipeline", "--group", "12", "--log", str(log)], {"set": [0, 3, 6, 9]})
    res = result_of(text)
    assert code == EXIT_OK and res["verified"]
    assert res["certificate"]["density_lower"] > 0
    assert all(json.loads(line) for line in log.read_text().splitlines())
    code, text = run(tmp_path, ["pipeline", "--group", "127", "--log", str(log)], {"set": list(range(7))})
    assert code == EXIT_OK and result_of(text)["verified"]
    code, _ = run(tmp_path, ["pipeline", "--group", "12"], {"set": "x"})
    assert code == EXIT_INPUT
    code, _ = run(tmp_path, ["pipeline", "--group", "12"], {"set": []})
    assert code == EXIT_INPUT


def test_bohr_measure_connectivity_dft(tmp_path):
    bohr = {"characters": [1], "widths": ["1/4"]}
    code, text = run(tmp_path, ["bohr", "--group", "24"], bohr)
    levels = result_of(text)["levels"]
    assert code == EXIT_OK and [lv["size"] for lv in levels] == [11, 5, 3]
    code, text = run(tmp_path, ["measure", "--group", "24"], bohr)
    assert code == EXIT_OK and result_of(text)["certificate_valid"]
    code, text = run(tmp_path, ["connectivity", "--group", "12", "--m", "2", "--l", "2"], {"set": [0, 4, 8]})
    assert code == EXIT_OK and result_of(text)["connected"] is True
    code, text = run(tmp_path, ["dft", "--group", "4"], {"set": [0, 2]})
    assert code == EXIT_OK
    code, _ = run(tmp_path, ["bohr", "--group", "24"], {"characters": [1], "widths": ["0"]})
    assert code == EXIT_INPUT


def test_outputs_are_deterministic(tmp_path):
    payload = {"values": [1, 0, 0, 1, 2, 1, 1, 0]}
    args = ["decompose", "--group", "2,4", "--strategy", "paper", "--seed", "5"]
    _, first = run(tmp_path, args, payload)
    _, second = run(tmp_path, args, payload)
    assert first == second
    assert json.loads(first)["config"]["strategy"] == "paper"


def test_module_entry_point(tmp_path):
    src = tmp_path / "in.json"
    src.write_text(json.dumps({"group": "12", "set": [0, 6]}))
    proc = subprocess.run(
        [sys.executable, "-m", "idempotent", "norm", "--in", str(src), "--no-timestamp"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["wiener_norm"] == pytest.approx(1.0)
