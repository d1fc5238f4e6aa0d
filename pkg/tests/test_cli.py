import json
import math

import numpy as np
import pytest

from msstirap.cli import PreconditionError, RunConfig, parse_area, run


@pytest.fixture(autouse=True)
def in_tmp(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)


@pytest.mark.parametrize(
    "text, value",
    [("10pi", 10 * math.pi), ("pi", math.pi), ("2.5*pi", 2.5 * math.pi), ("31.4", 31.4), ("1e1pi", 10 * math.pi)],
)
def test_parse_area(text, value):
    assert parse_area(text) == pytest.approx(value)


@pytest.mark.parametrize("text", ["ten", "pi10", "", "3pie"])
def test_parse_area_rejects(text):
    with pytest.raises(PreconditionError):
        parse_area(text)


def test_simulate_type2(capsys, tmp_path):
    assert run(["simulate", "--scheme", "m21", "--area", "10pi", "--tau", "1", "--shortcut", "type2"]) == 0
    assert "final efficiency: 1.000000" in capsys.readouterr().out
    assert (tmp_path / "trajectory.csv").exists()


def test_simulate_none_with_summary(capsys, tmp_path):
    code = run(["simulate", "--scheme", "m21", "--area", "10pi", "--tau", "1", "--shortcut", "none", "--summary", "s.json"])
    assert code == 0
    line = [x for x in capsys.readouterr().out.splitlines() if x.startswith("final efficiency")][0]
    assert 0.77 <= float(line.split(":")[1]) <= 0.83
    assert json.loads((tmp_path / "s.json").read_text())["efficiency"] == pytest.approx(float(line.split(":")[1]), abs=1e-6)


@pytest.mark.parametrize(
    "args, fragment",
    [
        (["simulate", "--scheme", "lambda"], "unknown scheme"),
        (["simulate", "--shortcut", "type9"], "unknown shortcut"),
        (["simulate", "--area=-2pi"], "area must be positive"),
        (["simulate", "--steps", "1"], "steps"),
        (["simulate", "--t-start", "3", "--t-end", "1"], "t_start"),
        (["simulate", "--beta=-1"], "beta"),
        (["simulate", "--scheme", "sp22", "--shortcut", "type1"], "unavailable"),
        (["simulate", "--output", "missing/dir/x.csv"], "does not exist"),
        (["scan", "--param", "delay"], "scan parameter"),
        (["scan", "--grid", "1:0:5"], "grid"),
        (["reproduce", "--fig", "2"], "unknown figure"),
        (["scan", "--workers", "0"], "workers"),
    ],
)
def test_preconditions(args, fragment, capsys, tmp_path):
    assert run(args) != 0
    assert fragment in capsys.readouterr().err
    assert not any(tmp_path.iterdir())


def test_output_is_directory(capsys, tmp_path):
    (tmp_path / "d").mkdir()
    assert run(["simulate", "--output", "d"]) == 2
    assert "is a directory" in capsys.readouterr().err


def test_dump_config_round_trip(tmp_path):
    args = ["pulses", "--scheme", "m22", "--area", "7.5pi", "--shortcut", "type3", "--xi", "0.3", "--tau", "1.2"]
    assert run(args + ["--dump-config", "run.ini"]) == 0
    assert [p.name for p in tmp_path.iterdir()] == ["run.ini"]
    loaded = RunConfig.load(tmp_path / "run.ini")
    assert loaded.command == "pulses" and loaded.area == "7.5pi" and loaded.xi == 0.3
    assert run(args + ["--output", "a.csv"]) == 0
    assert run(["pulses", "--config", "run.ini", "--output", "b.csv"]) == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    again = tmp_path / "again.ini"
    assert run(["pulses", "--config", "run.ini", "--dump-config", str(again)]) == 0
    assert again.read_text() == (tmp_path / "run.ini").read_text()


def test_config_bad_key(tmp_path, capsys):
    (tmp_path / "c.ini").write_text("[run]\nomega = 3\n")
    assert run(["simulate", "--config", "c.ini"]) == 2
    assert "unknown config key" in capsys.readouterr().err


def test_scan_and_pulses(tmp_path):
    assert run(["scan", "--param", "xi", "--grid", "0.5:1.5:3", "--output", "x.csv", "--summary", "x.json"]) == 0
    summary = json.loads((tmp_path / "x.json").read_text())
    assert summary["argmax"] == 1.0
    assert (tmp_path / "x.csv").read_text().splitlines()[0] == "xi [1],efficiency"
    assert run(["pulses", "--scheme", "three", "--shortcut", "type1"]) == 0
    header = (tmp_path / "pulses.csv").read_text().splitlines()[0]
    assert header.endswith("Omega_Q [1/T]")


def test_area_scan_grid_in_pi(tmp_path):
    assert run(["scan", "--param", "area", "--scheme", "three", "--shortcut", "type1", "--grid", "pi:2pi:2"]) == 0
    rows = np.loadtxt(tmp_path / "scan.csv", delimiter=",", skiprows=1)
    assert rows[:, 0] == pytest.approx([math.pi, 2 * math.pi])
    assert np.all(rows[:, 1] > 1 - 1e-8)


def test_reproduce(tmp_path, capsys):
    assert run(["reproduce", "--fig", "4", "--output", "out"]) == 0
    assert sorted(p.name for p in (tmp_path / "out").iterdir()) == [
        "fig4_m21.csv",
        "fig4_pulses_m21.csv",
        "fig4_pulses_m22.csv",
    ]


def test_phase_on_three_state_rotates_q():
    cfg = RunConfig(scheme="three", shortcut="type1", phase=0.0)
    assert cfg.shortcut_scheme().phase_link == (0, 2)
