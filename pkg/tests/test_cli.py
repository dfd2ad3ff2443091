import csv
import json
import subprocess
import sys

import pytest

from skewflow.cli import CSV_COLUMNS, emit_plotdata, main
from skewflow.config import ConfigError, ExperimentConfig, load_config, parse_config
from skewflow.family import preset, reference_family

REF_SPEC = {"schedule": [3, 3, 4, 4], "schedule_extension": "arithmetic", "t": {"kind": "one_plus_pow2"}}


def write_config(tmp_path, data, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def run(tmp_path, *argv, config=None):
    out = tmp_path / "out"
    args = list(argv) + ["--out", str(out)]
    if config is not None:
        args += ["--config", write_config(tmp_path, config)]
    return main(args), out


# -- config --


def test_defaults_round_trip():
    cfg = ExperimentConfig()
    assert parse_config(cfg.echo()) == cfg
    assert cfg.build_family() == preset("proximal-c5")


def test_family_spec_round_trip():
    cfg = parse_config({"family": REF_SPEC, "params": {"k_max": 3, "pairs": [[0.1, 0.2]]}, "seed": 9})
    again = parse_config(json.loads(json.dumps(cfg.echo())))
    assert again == cfg
    assert cfg.build_family() == reference_family()


@pytest.mark.parametrize("data", [
    {"bogus": 1},
    {"params": {"k_max": 3, "kmax": 2}},
    {"preset": "proximal-c5", "family": REF_SPEC},
    {"preset": "nope"},
    {"schema_version": 2},
    {"family": {**REF_SPEC, "t": {"kind": "fast"}}},
])
def test_config_rejects(data):
    with pytest.raises(ConfigError):
        parse_config(data)


def test_load_config_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(bad)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")


# -- subcommands --


def test_validate_reference(tmp_path):
    status, out = run(tmp_path, "validate", config={"family": REF_SPEC})
    assert status == 0
    report = json.loads((out / "validate.json").read_text())
    assert report["schema_version"] == 1 and report["passed"]
    assert report["report"]["c1_decreasing"]


def test_validate_c3_violation_exits_2(tmp_path):
    status, out = run(tmp_path, "validate", config={"family": {**REF_SPEC, "branch_rule": "printed"}})
    assert status == 2
    report = json.loads((out / "validate.json").read_text())
    assert report["report"]["failures"][0][0] == "C3"


def test_config_errors_exit_1(tmp_path, capsys):
    assert run(tmp_path, "validate", config={"bogus": True})[0] == 1
    assert run(tmp_path, "validate", config={"family": {"schedule": [1, 3]}})[0] == 1
    assert main(["validate", "--config", str(tmp_path / "none.json")]) == 1
    assert "configuration error" in capsys.readouterr().err


def test_rigidity_csv(tmp_path):
    status, out = run(tmp_path, "rigidity", "--kmax", "6", config={"params": {"fiber_points": 256}})
    assert status == 0
    rows = read_csv(out / "rigidity.csv")
    assert tuple(rows[0]) == CSV_COLUMNS["rigidity"]
    assert len(rows) == 7
    assert [int(r[0]) for r in rows[1:]] == list(range(1, 7))
    vals = [float(r[2]) for r in rows[1:]]
    assert vals[-1] < vals[0] and vals[-1] < 0.05
    assert int(rows[6][1]) == preset("proximal-c5").schedule.m(6)


def test_proximal_csv_and_times(tmp_path):
    status, out = run(tmp_path, "proximal", config={"params": {"k_max": 3, "pairs": [[0.3, 0.7]]}})
    assert status == 0
    rows = read_csv(out / "proximal.csv")
    assert tuple(rows[0]) == CSV_COLUMNS["proximal"]
    assert rows[3][2] == str((1 << 4) * (1 << 19))
    report = json.loads((out / "proximal.json").read_text())
    assert all(isinstance(e["time"], str) for e in report["report"]["traces"][0]["entries"])


def test_density_csv(tmp_path):
    status, out = run(tmp_path, "density", "--preset", "reference", config={"params": {"z0": 0.3}})
    assert status == 0
    rows = read_csv(out / "density.csv")
    assert tuple(rows[0]) == CSV_COLUMNS["density"]
    assert rows[-1] == ["2", "24", "24", "1.0"]


def test_density_level_one_only_exits_2(tmp_path):
    status, _ = run(tmp_path, "density", "--kmax", "1", config={"preset": "reference", "params": {"z0": 0.3}})
    assert status == 2


def test_density_over_budget_is_a_config_error(tmp_path):
    assert run(tmp_path, "density", "--kmax", "6")[0] == 1


def test_aps_and_liyorke(tmp_path):
    cfg = {"preset": "almost-proximal-c6-n3", "params": {"horizon": 300, "anchor": 0.2}}
    status, out = run(tmp_path, "aps", config=cfg)
    assert status == 0
    assert json.loads((out / "aps.json").read_text())["report"]["max_deviation"] <= 1e-12
    status, out = run(tmp_path, "liyorke", config={"params": {"pairs": [[0.3, 0.7]]}})
    assert status == 0


def test_trajectory(tmp_path):
    status, out = run(tmp_path, "trajectory", config={"params": {"steps": 20, "base": "01(10)", "z0": 0.25}})
    assert status == 0
    rows = read_csv(out / "trajectory.csv")
    assert rows[0] == ["time", "base", "fiber"] and len(rows) == 22
    assert rows[1] == ["0", "01(10)", "0.25"]


def test_outputs_are_deterministic(tmp_path):
    cfg = {"params": {"k_max": 4, "n_pairs": 3}, "seed": 11}
    outs = []
    for sub in ("a", "b"):
        d = tmp_path / sub
        d.mkdir()
        status, out = run(d, "proximal", config={**cfg, "output": {"dir": "ignored"}})
        assert status == 0
        outs.append((out / "proximal.json").read_text().replace(str(d), ""))
    assert outs[0] == outs[1]


def test_seed_override_changes_pairs(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    main(["proximal", "--seed", "1", "--out", str(a)])
    main(["proximal", "--seed", "2", "--out", str(b)])
    ja = json.loads((a / "proximal.json").read_text())
    jb = json.loads((b / "proximal.json").read_text())
    assert ja["config"]["seed"] == 1
    assert ja["report"]["traces"][0]["z1"] != jb["report"]["traces"][0]["z1"]


def test_echo_reparses(tmp_path):
    _, out = run(tmp_path, "validate", config={"family": REF_SPEC, "seed": 4})
    echo = json.loads((out / "validate.json").read_text())["config"]
    assert parse_config(echo).build_family() == reference_family()


def test_emit_plotdata_reports_path(tmp_path):
    with pytest.raises(OSError, match="missing"):
        emit_plotdata("rigidity", [(1, 8, 0.5)], tmp_path / "missing")


def test_console_script_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "skewflow.cli", "validate", "--preset", "reference",
                          "--out", str(tmp_path)], capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    assert "pass" in res.stdout
