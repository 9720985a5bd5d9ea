import json
import subprocess
import sys

import numpy as np
import pytest

from fastdiff.cli import RunConfig, csv_text, dump_json, main
from fastdiff.params import Params


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_constants_json(capsys):
    code, out, _ = run(["constants"], capsys)
    d = json.loads(out)
    assert code == 0
    assert d["A1"] == 3.0 and d["A2"] == -6.0 and d["C0"] == 3.0
    assert d["envelope_admissible"] is True


def test_missing_key_exits_2(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"n": 3, "m": 0.0, "rho1": 1.0, "lam": 1.0}))
    code, _, err = run(["constants", "--config", str(cfg)], capsys)
    assert code == 2 and "beta" in err


def test_unknown_block_and_bad_json(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"params": Params(3, 0, 1, 1, 1).to_dict(), "bogus": {}}))
    assert run(["constants", "--config", str(cfg)], capsys)[0] == 2
    cfg.write_text("{not json")
    assert run(["constants", "--config", str(cfg)], capsys)[0] == 2


def test_global_flags_after_subcommand(tmp_path, capsys):
    out = tmp_path / "o"
    assert run(["constants", "--out", str(out)], capsys)[0] == 0
    assert (out / "constants.json").exists()


def test_config_round_trip():
    cfg = RunConfig(Params(3, 0.1, 1.0, 1.0, 2.0, 1.5), {"profile": {"rho_max": 5.0}},
                    "somewhere", 7, 1e-11)
    again = RunConfig.parse(cfg.emit())
    assert again == cfg
    assert again.emit() == cfg.emit()


def test_dump_json_is_deterministic_and_nan_safe():
    text = dump_json({"b": np.float64("nan"), "a": np.arange(2)})
    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text) == {"a": [0, 1], "b": None}


def test_csv_text_format():
    text = csv_text(("x", "y"), (np.array([1.0, 1 / 3]), np.array([2.0, 1e-20])))
    assert text == "x,y\n1,2\n0.3333333333,1e-20\n"


def test_profile_outputs_are_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert run(["profile", "--rho-max", "3", "--points", "50", "--out", str(d)], capsys)[0] == 0
    for name in ("profile.csv", "profile.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    header = (a / "profile.csv").read_text().splitlines()[0]
    assert header == "rho,wbar,wbar_rho,r,v,v_prime"
    assert len((a / "profile.csv").read_text().splitlines()) == 51


def test_parabolic_csv(tmp_path, capsys):
    code, out, _ = run(["parabolic", "--init", "barenblatt", "--m", "0.2", "--r-in", "0.1",
                        "--r-out", "5", "--nr", "21", "--t-end", "0.2", "--nt", "4",
                        "--out", str(tmp_path)], capsys)
    assert code == 0
    lines = (tmp_path / "parabolic.csv").read_text().splitlines()
    assert lines[0] == "t,r,u" and len(lines) == 1 + 5 * 21
    coarse = json.loads(out)["max_relative_error"]
    code, out, _ = run(["parabolic", "--init", "barenblatt", "--m", "0.2", "--r-in", "0.1",
                        "--r-out", "5", "--nr", "41", "--t-end", "0.2", "--nt", "16"], capsys)
    assert code == 0 and json.loads(out)["max_relative_error"] < coarse / 3


def test_parabolic_init_file(tmp_path, capsys):
    f = tmp_path / "u0.csv"
    f.write_text("\n".join("1.0" for _ in range(21)) + "\n")
    code, _, _ = run(["parabolic", "--init", "file", "--init-file", str(f), "--nr", "21",
                      "--nt", "3", "--t-end", "0.1"], capsys)
    assert code == 0
    f.write_text("1.0\n2.0\n")
    assert run(["parabolic", "--init", "file", "--init-file", str(f), "--nr", "21"], capsys)[0] == 2


def test_verify_exact_passes(capsys):
    code, out, _ = run(["verify", "exact"], capsys)
    assert code == 0
    assert out.count("[PASS]") == 2


def test_verify_only_selects(capsys):
    code, out, _ = run(["verify", "--only", "5"], capsys)
    assert code == 0
    assert "criterion 5" in out and "criterion 1:" not in out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "fastdiff", "constants"], capture_output=True,
                          text=True, check=False)
    assert proc.returncode == 0 and json.loads(proc.stdout)["A1"] == 3.0
