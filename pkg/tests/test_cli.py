import json

import pytest

from oqs.cli import ConfigError, main, parse_config

BASE = """\
[system]
preset = spin_boson
observable = sigma_x
initial_state = plus

[bath]
modes = 1.0:0.2
beta = 2.0

[perturbed_bath]
modes = 0.95:0.22
beta = 2.0

[dyson]
t = 1.0
max_order = 4
samples_per_order = 5000
"""


@pytest.fixture
def cfg_path(tmp_path):
    p = tmp_path / "run.ini"
    p.write_text(BASE)
    return p


@pytest.mark.parametrize("extra, msg", [
    ("[dyson]\nmax_order = 5\n", "line 2: max_order must be even"),
    ("[dyson]\nt = 1\nsampels = 3\n", "line 3: unknown key 'dyson.sampels'"),
    ("[bath]\nmodes = 1:0.2\nbeta = -2\n", "line 3: bath.beta: must be > 0"),
    ("[bath]\nmodes = 1;0.2\nbeta = 2\n", "bath.modes"),
    ("[nonsense]\nx = 1\n", "unknown section"),
    ("[system]\npreset = explicit\nh_s = [[1, 0], [0, -1]]\n", "system.w_s"),
])
def test_config_errors(extra, msg):
    with pytest.raises(ConfigError, match=msg):
        parse_config(text=extra, command="observable")


def test_explicit_operators_parse():
    cfg = parse_config(text="""[system]
preset = explicit
h_s = [[1, 0.5j], [-0.5j, -1]]
w_s = [[1, 0], [0, -1]]
o_s = [[0, 1], [1, 0]]
rho_s = [[0.5, 0.5], [0.5, 0.5]]
[bath]
modes = 1:0.1
beta = 1
""", command="observable")
    assert cfg.system.h_s[0, 1] == 0.5j


def test_override_and_exit_codes(cfg_path, tmp_path, capsys):
    assert main(["observable", "--config", str(cfg_path), "--set", "dyson.max_order=3"]) == 1
    assert "max_order must be even" in capsys.readouterr().err
    assert main(["observable", "--config", str(tmp_path / "missing.ini")]) == 1


def test_observable_outputs(cfg_path, tmp_path):
    out = tmp_path / "res" / "obs"
    assert main(["observable", "--config", str(cfg_path), "--out", str(out), "--seed", "4",
                 "--workers", "1"]) == 0
    summary = json.loads((tmp_path / "res" / "obs_summary.json").read_text())
    assert summary["seed"] == 4 and summary["inputs"]["dyson"]["samples_per_order"] == 5000
    assert set(summary["versions"]) == {"oqs", "numpy", "scipy", "python"}
    assert "timestamp" in summary and summary["passed"]
    rows = (tmp_path / "res" / "obs_orders.csv").read_text().splitlines()
    assert rows[0] == "m,re,im,stderr" and len(rows) == 4


def test_orders_csv_independent_of_workers(cfg_path, tmp_path):
    for w in (1, 4):
        assert main(["observable", "--config", str(cfg_path), "--out", str(tmp_path / f"w{w}"),
                     "--workers", str(w), "--set", "dyson.samples_per_order=12000"]) == 0
    assert (tmp_path / "w1_orders.csv").read_bytes() == (tmp_path / "w4_orders.csv").read_bytes()


@pytest.mark.parametrize("command, extra", [
    ("bound", ["--set", "check.times=0.5,1"]),
    ("oracle", []),
    ("convergence", []),
    ("check-comb", ["--set", "check.m=2,4"]),
    ("check-wick", ["--set", "check.m=1,2", "--set", "check.samples=5"]),
])
def test_commands_succeed(cfg_path, tmp_path, command, extra):
    out = tmp_path / command
    assert main([command, "--config", str(cfg_path), "--out", str(out)] + extra) == 0
    summary = json.loads((tmp_path / f"{command}_summary.json").read_text())
    assert summary["command"] == command and summary["passed"]


def test_numerical_failure_exit_code(cfg_path, tmp_path):
    # a too-strict tolerance on the Wick check must report failure with exit code 2
    args = ["check-wick", "--config", str(cfg_path), "--out", str(tmp_path / "w"),
            "--set", "check.m=4", "--set", "check.samples=3", "--set", "check.tolerance=1e-300"]
    assert main(args) == 2
    assert not json.loads((tmp_path / "w_summary.json").read_text())["passed"]


def test_check_comb_constant(tmp_path):
    p = tmp_path / "c.ini"
    p.write_text("[dyson]\nt = 0.5\n[check]\nm = 4\nconstant_b = 1.0\ninterval = 0, 1\n")
    assert main(["check-comb", "--config", str(p), "--out", str(tmp_path / "c")]) == 0
    res = json.loads((tmp_path / "c_summary.json").read_text())["results"]["comb"][0]
    assert abs(res["lhs"]["re"] - 0.125) < 1e-12
