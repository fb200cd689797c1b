import subprocess
import sys

import numpy as np
import pytest

from cpbath.cli import main
from cpbath.config import (
    ScenarioConfig,
    bundled_scenarios,
    load_bundled,
    load_config,
    parse_config,
    serialize_config,
)
from cpbath.errors import ConfigParse, EmptySweep
from cpbath.scenario import emit_plot_script, initial_state, read_csv, run_scenario, sweep

MINIMAL = """
[scenario]
name = tiny
kind = two_qubit
[hamiltonian]
source = coefficients
coefficients = 0, 1, 1, 1, 1
[initial]
amplitudes = 0.6324555320336759,0; 0.6324555320336759,0; 0,0; 0.4472135954999579,0
[bath]
type = markovian
gamma = 0.1
[time]
t_final = 2
sample_dt = 0.1
"""


def short(cfg, tmp_path, **kw):
    return cfg.replace(output_dir=str(tmp_path), **kw)


def test_bundled_scenarios_present():
    assert {"two_qubit_c4c5_0", "two_qubit_c4c5_1", "fmo_isolated", "fmo_damped"} <= set(bundled_scenarios())
    cfg = load_bundled("two_qubit_c4c5_0")
    assert cfg.sweep == (0.0, 0.01, 0.1, 1.0)
    assert cfg.coefficients[3:] == (0.0, 0.0)
    np.testing.assert_allclose(np.abs(cfg.amplitudes) ** 2, [0.4, 0.4, 0, 0.2], atol=1e-15)
    with pytest.raises(ConfigParse):
        load_bundled("nope")


def test_missing_t_final_names_field():
    text = MINIMAL.replace("t_final = 2\n", "")
    with pytest.raises(ConfigParse, match="time.t_final"):
        parse_config(text)


@pytest.mark.parametrize(
    "old, new",
    [
        ("source = coefficients", "source = magic"),
        ("amplitudes = 0.6324555320336759,0;", "amplitudes = x,0;"),
        ("gamma = 0.1", "gamma = -1"),
        ("sample_dt = 0.1", "sample_dt = 0"),
        ("[time]", "[time\n"),
    ],
)
def test_bad_configs(old, new):
    with pytest.raises(ConfigParse):
        parse_config(MINIMAL.replace(old, new))


def test_gamma_broadcast_and_length_check():
    cfg = parse_config(MINIMAL)
    np.testing.assert_array_equal(cfg.gammas(), [0.1, 0.1, 0.1])
    with pytest.raises(ConfigParse):
        parse_config(MINIMAL.replace("gamma = 0.1", "gamma = 0.1, 0.2")).gammas()


def test_round_trip():
    for name in bundled_scenarios():
        cfg = load_bundled(name)
        again = parse_config(serialize_config(cfg))
        assert again == cfg
        assert serialize_config(again) == serialize_config(cfg)
    cfg = parse_config(MINIMAL).replace(pivot=2, prefix="p", oracle=True)
    assert parse_config(serialize_config(cfg)) == cfg


def test_fmo_isolated_initial_echo(tmp_path):
    cfg = short(load_bundled("fmo_isolated"), tmp_path, t_final=0.05)
    (res,) = run_scenario(cfg)
    header, data = read_csv(res.paths[0])
    assert header == ["t"] + [f"pop_{i}" for i in range(7)] + ["energy"]
    np.testing.assert_array_equal(data[0, 1:8], [1, 0, 0, 0, 0, 0, 0])
    assert initial_state(cfg).pivot == 0


def test_two_qubit_sweep_and_oracle(tmp_path):
    cfg = short(load_bundled("two_qubit_c4c5_0"), tmp_path, t_final=5.0)
    results = run_scenario(cfg)
    assert [r.gamma for r in results] == [0.0, 0.01, 0.1, 1.0]
    names = sorted(p.name for r in results for p in r.paths)
    assert names == [
        "two_qubit_c4c5_0_gamma_0.01.csv",
        "two_qubit_c4c5_0_gamma_0.1.csv",
        "two_qubit_c4c5_0_gamma_0.csv",
        "two_qubit_c4c5_0_gamma_0_oracle.csv",
        "two_qubit_c4c5_0_gamma_1.csv",
    ]
    header, iso = read_csv(tmp_path / "two_qubit_c4c5_0_gamma_0.csv")
    assert header[-2:] == ["z", "concurrence"]
    _, orc = read_csv(tmp_path / "two_qubit_c4c5_0_gamma_0_oracle.csv")
    assert np.max(np.abs(iso[:, 1:5] - orc[:, 1:5])) < 1e-8
    for r in results:
        _, d = read_csv(r.paths[0])
        assert np.max(np.abs(d[:, 1:5].sum(axis=1) - 1)) < 1e-9


def test_deterministic_output(tmp_path):
    cfg = parse_config(MINIMAL)
    a = run_scenario(cfg.replace(output_dir=str(tmp_path / "a")))[0].paths[0]
    b = run_scenario(cfg.replace(output_dir=str(tmp_path / "b")))[0].paths[0]
    assert a.read_bytes() == b.read_bytes()


def test_sweep_single_value_equals_run(tmp_path):
    cfg = parse_config(MINIMAL).replace(output_dir=str(tmp_path))
    (single,) = run_scenario(cfg)
    (swept,) = sweep(cfg, [0.1])
    assert single.paths[0].read_bytes() == swept.paths[0].read_bytes()
    assert swept.paths[0].name == "tiny_gamma_0.1.csv"
    with pytest.raises(EmptySweep):
        sweep(cfg, [])


def test_explicit_bath_run(tmp_path):
    cfg = parse_config(MINIMAL).replace(output_dir=str(tmp_path), bath="explicit", oscillators=20, t_final=0.2)
    (res,) = run_scenario(cfg)
    assert res.full is not None
    header, d = read_csv(res.paths[1])
    assert header == ["t", "system", "bath", "interaction", "total"]


def test_plot_scripts(tmp_path):
    cfg = short(load_bundled("two_qubit_c4c5_1"), tmp_path, t_final=1.0, plot_script=True)
    run_scenario(cfg)
    text = (tmp_path / "two_qubit_c4c5_1.gp").read_text()
    assert "concurrence" in text and ": z'" in text and "population" in text
    cfg = short(load_bundled("fmo_isolated"), tmp_path, t_final=0.01)
    res = run_scenario(cfg)
    gp = emit_plot_script([res[0].paths[0]], tmp_path / "fmo.gp")
    text = gp.read_text()
    assert "pop_6" in text and "concurrence" not in text
    with pytest.raises(EmptySweep):
        emit_plot_script([], tmp_path / "x.gp")


def test_cli_exit_codes(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text(MINIMAL)
    assert main(["--config", str(cfg), "--out", str(tmp_path / "o"), "--t-final", "0.5"]) == 0
    assert (tmp_path / "o" / "tiny.csv").exists()
    assert main(["--config", str(cfg), "--out", str(tmp_path / "o"), "--gamma", "0,1", "--t-final", "0.5"]) == 0
    assert (tmp_path / "o" / "tiny_gamma_1.csv").exists()
    bad = tmp_path / "bad.cfg"
    bad.write_text(MINIMAL.replace("t_final = 2\n", ""))
    assert main(["--config", str(bad)]) == 2
    assert "t_final" in capsys.readouterr().err
    assert main(["--config", str(tmp_path / "missing.cfg")]) == 2
    assert main([]) == 2
    # an integrator starved of steps is a solver error
    starving = MINIMAL + "[integrator]\nmax_steps = 2\n"
    cfg.write_text(starving)
    assert main(["--config", str(cfg), "--out", str(tmp_path / "o")]) == 3


def test_cli_module_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "cpbath.cli", "--list"], capture_output=True, text=True)
    assert out.returncode == 0 and "fmo_isolated" in out.stdout


def test_load_config_relative_matrix_path(tmp_path):
    (tmp_path / "h.txt").write_text("1 0\n0 -1\n")
    (tmp_path / "c.cfg").write_text(
        "[scenario]\nname = m\n[hamiltonian]\nsource = file\npath = h.txt\n"
        "[initial]\namplitudes = 1,0; 1,0\n[time]\nt_final = 1\nsample_dt = 0.5\n"
    )
    cfg = load_config(tmp_path / "c.cfg")
    assert cfg.matrix_path == str(tmp_path / "h.txt")
    (res,) = run_scenario(cfg.replace(output_dir=str(tmp_path)))
    np.testing.assert_allclose(res.trajectory.populations, 0.5, atol=1e-12)


def test_readme_config_example_parses():
    from pathlib import Path

    readme = Path(__file__).resolve().parents[1] / "README.md"
    block = readme.read_text(encoding="utf-8").split("```ini\n")[1].split("```")[0]
    cfg = parse_config(block)
    assert cfg.bath == "markovian"
    assert cfg.sweep == (0.0, 0.01, 0.1, 1.0)
    assert cfg.dim == 4
