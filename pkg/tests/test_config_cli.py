"""Config parsing/serialization and the command-line surface."""

import json
from pathlib import Path

import numpy as np
import pytest

from pxflow.cli import main
from pxflow.config import ConfigError, RunConfig, parse_config, serialize_config


def test_empty_input_gives_defaults():
    cfg = parse_config("")
    assert cfg.n_cells == 256
    assert cfg.subdomains == ((0.4, 0.6),)
    assert cfg.p_constant == 3.0
    assert cfg.eta == 0.5
    assert cfg.kappa == 1.0
    assert cfg.tau == pytest.approx(1.0 / 512)


def test_parse_basic_sections():
    text = """
    [domain]
    n_cells = 128
    subdomains = 0.2:0.3,0.6:0.7
    [exponent]
    kind = affine
    p0 = 3.0
    p1 = 0.5
    [model]
    eta = 0.25           # comment after value
    lambda = limit
    [reaction]
    kappa = 0.0
    forcing = sine:0.5
    """
    cfg = parse_config(text)
    assert cfg.n_cells == 128
    assert cfg.subdomains == ((0.2, 0.3), (0.6, 0.7))
    assert cfg.exponent_kind == "affine" and cfg.p1 == 0.5
    assert cfg.eta == 0.25 and cfg.lam == "limit"
    assert cfg.kappa == 0.0 and cfg.forcing == "sine:0.5"


def test_parse_lambda_ladder():
    cfg = parse_config("[model]\nlambda = ladder:1,0.3,0.1\n")
    assert cfg.lam == (1.0, 0.3, 0.1)
    assert cfg.lambda_ladder() == (1.0, 0.3, 0.1)


def test_parse_rejects_low_exponent():
    with pytest.raises(ConfigError, match="exceed 2"):
        parse_config("[exponent]\np_constant = 2.0\n")


def test_parse_errors_carry_line_numbers():
    with pytest.raises(ConfigError, match="line 2"):
        parse_config("[domain]\nnot a key value\n")
    with pytest.raises(ConfigError, match="unknown section"):
        parse_config("[nope]\n")
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config("[domain]\ncells = 3\n")
    with pytest.raises(ConfigError, match="outside any"):
        parse_config("n_cells = 10\n")


def test_serialize_roundtrip():
    cfg = parse_config("""
    [domain]
    n_cells = 96
    subdomains = 0.25:0.5
    [exponent]
    kind = table
    p_table = 3,3.5,4
    [model]
    lambda = ladder:1,0.5
    [solver]
    tau = 0.001953125
    [experiment]
    seed = 42
    """)
    assert parse_config(serialize_config(cfg)) == cfg
    # defaults round-trip too
    assert parse_config(serialize_config(RunConfig())) == RunConfig()


def test_validate_rejects_bad_scalars():
    with pytest.raises(ConfigError):
        RunConfig(eta=0.0).validate()
    with pytest.raises(ConfigError):
        RunConfig(tau=-1.0).validate()
    with pytest.raises(ConfigError):
        RunConfig(kappa=-2.0).validate()


def test_forcing_builders():
    cfg = parse_config("[reaction]\nforcing = constant:0.7\n")
    dom = cfg.build_domain()
    g = cfg.forcing_values(dom)
    assert g[0] == 0.0 and g[-1] == 0.0
    assert np.all(g[1:-1] == 0.7)
    assert RunConfig().forcing_values(dom) is None
    with pytest.raises(ConfigError):
        parse_config("[reaction]\nforcing = wavelet:1\n").forcing_values(dom)


def test_cli_unknown_command_exits_2(capsys):
    assert main(["frobnicate"]) == 2
    assert main(["--config"]) == 2


def test_cli_bad_config_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("[exponent]\np_constant = 1.5\n")
    assert main(["simulate", "--config", str(bad), "--out",
                 str(tmp_path / "out")]) == 2


def test_cli_simulate_artifacts_and_determinism(tmp_path):
    cfg = tmp_path / "small.cfg"
    cfg.write_text("""
[domain]
n_cells = 64
[solver]
tau = 0.0078125
[experiment]
transient = 0.25
t_sample = 0.25
""")
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["simulate", "--config", str(cfg), "--seed", "9",
                 "--out", str(out1)]) == 0
    assert main(["simulate", "--config", str(cfg), "--seed", "9",
                 "--out", str(out2)]) == 0
    for name in ("trajectory.csv", "timeseries.csv"):
        a, b = (out1 / name).read_bytes(), (out2 / name).read_bytes()
        assert a == b
        assert b"\r" not in a  # LF line endings
    assert (out1 / "plots" / "energy.svg").exists()
    header = (out1 / "trajectory.csv").read_text().splitlines()[0]
    assert header.split(",")[0] == "t"
    assert len(header.split(",")) == 66  # t plus 65 nodes


def test_cli_limit_trajectory_header(tmp_path):
    cfg = tmp_path / "limit.cfg"
    cfg.write_text("""
[domain]
n_cells = 64
[model]
lambda = limit
[solver]
tau = 0.0078125
[experiment]
transient = 0.25
t_sample = 0.25
""")
    out = tmp_path / "out"
    assert main(["simulate", "--config", str(cfg), "--seed", "3",
                 "--out", str(out)]) == 0
    header = (out / "trajectory.csv").read_text().splitlines()[0].split(",")
    assert header[0] == "t"
    assert header[-1] == "s_1"
    assert any(h.startswith("omega1_") for h in header)


def test_cli_constants_json(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("[domain]\nn_cells = 64\n")
    out = tmp_path / "out"
    assert main(["constants", "--config", str(cfg), "--seed", "0",
                 "--out", str(out)]) == 0
    blob = json.loads((out / "constants.json").read_text())
    assert blob["gamma_small"] > 0.0
    assert {"r0", "rho1", "c3"} <= set(blob)


def test_csv_seventeen_digit_roundtrip(tmp_path):
    from pxflow.reporting import write_csv

    vals = [np.pi, 1.0 / 3.0, 1e-17, 123456.789012345678]
    write_csv(tmp_path / "x.csv", ["a", "b", "c", "d"], [vals])
    line = (tmp_path / "x.csv").read_text().splitlines()[1]
    back = [float(tok) for tok in line.split(",")]
    assert back == vals  # 17 significant digits are lossless for doubles
