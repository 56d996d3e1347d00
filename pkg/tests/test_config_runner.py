import csv
import json
import math

import pytest

from ntnopt.cli import EXIT_CONFIG, EXIT_IO, EXIT_OK, main
from ntnopt.config import ConfigError, ScenarioConfig, config_from_dict, load_config
from ntnopt.runner import (
    STEP_COLUMNS,
    TRIAL_COLUMNS,
    emit_outputs,
    run_evaluate,
    run_optimize,
)


def tiny(**global_overrides):
    g = {"n_users": 10, "steps": 1, "realizations": 1, "seed": 0}
    g.update(global_overrides)
    return {"global": g, "layers": {"L": {"planes": 3, "sats_per_plane": 4}}}


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_empty_config_gives_defaults():
    cfg = config_from_dict({})
    assert cfg == ScenarioConfig()
    g, r = cfg.global_, cfg.radio
    assert (g.n_users, g.steps, g.realizations, g.omega) == (500, 24, 50, 0.5)
    assert (r.frequency_ghz, r.bandwidth_hz, r.tx_power_dbm, r.sat_gain_dbi, r.user_gain_dbi,
            r.noise_figure_db) == (2.2, 20e6, 40.0, 30.0, 0.0, 2.0)
    assert (cfg.capacity.beams_per_sat, cfg.capacity.users_per_beam) == (15, 20)
    L, M, G = cfg.layers.L, cfg.layers.M, cfg.layers.G
    assert (L.altitude_km, L.inclination_deg) == (600.0, 53.0)
    assert (M.altitude_km, M.inclination_deg) == (20200.0, 56.0)
    assert (G.altitude_km, G.inclination_deg, G.planes, G.sats_per_plane) == (35786.0, 0.0, 1, 3)
    assert cfg.default_configuration() == (9, 15, 7, 3)


@pytest.mark.parametrize("data,path", [
    ({"capacity": {"users_per_beam": 0}}, "capacity.users_per_beam"),
    ({"capacity": {"Xx": 3}}, "capacity.Xx"),
    ({"Xx": 1}, "Xx"),
    ({"global": {"n_users": "many"}}, "global.n_users"),
    ({"layers": {"L": {"planes": 0}}}, "layers.L.planes"),
    ({"search": {"P_L": [5, 2]}}, "search.P_L"),
    ({"optimizer": {"strategy": "annealing"}}, "optimizer.strategy"),
])
def test_config_errors_name_the_field(data, path):
    with pytest.raises(ConfigError) as info:
        config_from_dict(data)
    assert info.value.path == path
    assert path in str(info.value)


def test_load_config_roundtrip(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps(tiny()))
    cfg = load_config(p)
    assert cfg.global_.n_users == 10 and cfg.layers.L.planes == 3
    assert config_from_dict(cfg.to_dict()) == cfg
    p.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(p)


def test_smoke_run_emits_schema(tmp_path):
    cfg = config_from_dict(tiny())
    out = run_evaluate(cfg, (3, 4, 2, 2))
    emit_outputs(out, tmp_path)
    rows = read_csv(tmp_path / "step_metrics.csv")
    assert tuple(rows[0]) == STEP_COLUMNS
    # one aggregate row per step, preceded by one row per layer
    assert [r[2] for r in rows[1:]] == ["L", "M", "G", "ALL"]
    assert sum(1 for r in rows[1:] if r[2] == "ALL") == 1
    for r in rows[1:]:
        for cell in r:
            assert cell.lower() not in ("nan", "inf", "-inf")
    assert rows[1][-1] == ""  # per-layer rows carry no fairness value
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["config"] == json.loads(json.dumps(cfg.to_dict()))
    assert summary["config"]["radio"]["bandwidth_hz"] == 20e6  # defaults echoed
    assert summary["configuration"] == {"P_L": 3, "S_L": 4, "P_M": 2, "S_M": 2}
    assert summary["constraint_violations"] == 0
    text = (tmp_path / "summary.json").read_text()
    assert "NaN" not in text and "Infinity" not in text


def test_rerun_byte_identical(tmp_path):
    cfg = config_from_dict(tiny(n_users=30, steps=2, realizations=2))
    for d in ("a", "b"):
        emit_outputs(run_evaluate(cfg), tmp_path / d)
    for name in ("step_metrics.csv", "summary.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_workers_do_not_change_results(tmp_path):
    cfg = config_from_dict(tiny(n_users=20, realizations=2))
    emit_outputs(run_evaluate(cfg), tmp_path / "serial")
    cfg.global_.workers = 2
    emit_outputs(run_evaluate(cfg), tmp_path / "parallel")
    assert ((tmp_path / "serial" / "step_metrics.csv").read_bytes()
            == (tmp_path / "parallel" / "step_metrics.csv").read_bytes())


def _opt_cfg(strategy, budget, search):
    data = tiny(n_users=20)
    data["search"] = search
    data["optimizer"] = {"strategy": strategy, "budget": budget, "realizations_per_trial": 1,
                         "final_evaluation": False}
    return config_from_dict(data)


def test_grid_optimize_exhaustive(tmp_path):
    search = {"P_L": [2, 3], "S_L": [2, 3], "P_M": [2, 3], "S_M": [2, 3]}
    out = run_optimize(_opt_cfg("grid", 40, search))
    assert len(out.trial_rows) == 16
    best = max(out.trial_rows, key=lambda r: r["f"])
    assert out.summary["best_trial_objective"] == best["f"]
    assert out.summary["best_configuration"] == {k: best[k] for k in ("P_L", "S_L", "P_M", "S_M")}
    emit_outputs(out, tmp_path)
    rows = read_csv(tmp_path / "trials.csv")
    assert tuple(rows[0]) == TRIAL_COLUMNS and len(rows) == 17
    assert not (tmp_path / "step_metrics.csv").exists()


def test_random_optimize_distinct():
    out = run_optimize(_opt_cfg("random", 5, {}))
    configs = {tuple(r[k] for k in ("P_L", "S_L", "P_M", "S_M")) for r in out.trial_rows}
    assert len(out.trial_rows) == 5 and len(configs) == 5


def test_gp_ei_incumbent_not_worse_than_initial_design():
    out = run_optimize(_opt_cfg("gp-ei", 13, {}))
    fs = [r["f"] for r in out.trial_rows]
    assert len(fs) == 13
    assert out.summary["best_trial_objective"] >= max(fs[:10])
    assert all(math.isfinite(f) for f in fs)


def test_cli_exit_codes(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps(tiny()))
    assert main(["--config", str(cfg), "--out-dir", str(tmp_path / "out")]) == EXIT_OK
    assert (tmp_path / "out" / "summary.json").exists()
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"capacity": {"users_per_beam": 0}}))
    assert main(["--config", str(bad)]) == EXIT_CONFIG
    assert "capacity.users_per_beam" in capsys.readouterr().err
    assert main(["--config", str(tmp_path / "missing.json")]) == EXIT_IO
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["--config", str(cfg), "--out-dir", str(blocker / "sub")]) == EXIT_IO


def test_cli_seed_override_changes_summary(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps(tiny(n_users=30)))
    main(["--config", str(cfg), "--out-dir", str(tmp_path / "s0")])
    main(["--config", str(cfg), "--seed", "5", "--out-dir", str(tmp_path / "s5")])
    s0 = json.loads((tmp_path / "s0" / "summary.json").read_text())
    s5 = json.loads((tmp_path / "s5" / "summary.json").read_text())
    assert s0["seed"] == 0 and s5["seed"] == 5
    assert s0["realization_seeds"] != s5["realization_seeds"]
