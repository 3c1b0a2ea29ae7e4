import csv
import json

import pytest

from prevopt import __version__
from prevopt.cli.main import main

SMALL = """[model]
kind = constant
rate = 1

[claims]
kind = exponential
rate = 10

[prevention]
impact1 = exp
impact1_alpha = 1
impact2 = linear
cost1 = quadratic
cost2 = quadratic
{prevention_extra}
zeta1 = 1
zeta2 = 1
eta = 0.5
r = 0
T = {T}
x0 = 0

[run]
seed = 7
n_paths = {n_paths}
grid_M = 64
grid_n1 = 41
grid_n2 = 41
n_intervals = 5
ks_events = 2000
dump_paths = 5
lattice_n1 = 2
lattice_n2 = 2
{insurance}"""

INSURANCE = """
[insurance]
kappa = 0.2
theta_points = 11
kappas = 0, 0.5
"""


def write_cfg(tmp_path, n_paths=4000, T=1, insurance=INSURANCE, prevention_extra="", name="c.ini"):
    p = tmp_path / name
    p.write_text(SMALL.format(n_paths=n_paths, T=T, insurance=insurance, prevention_extra=prevention_extra))
    return p


def run(cmd, cfg, out, *extra):
    return main([cmd, "--config", str(cfg), "--out", str(out), *extra])


def rows(path):
    lines = [l for l in path.read_text().splitlines() if not l.startswith("#")]
    return list(csv.DictReader(lines))


def test_solve_writes_table_and_summary(tmp_path, capsys):
    cfg = write_cfg(tmp_path)
    assert run("solve", cfg, tmp_path / "o") == 0
    summ = json.loads((tmp_path / "o" / "solve_summary.json").read_text())
    hdr = summ["header"]
    assert hdr["version"] == __version__ and hdr["seed"] == 7 and len(hdr["config_sha256"]) == 64
    table = rows(tmp_path / "o" / "value_function.csv")
    assert len(table) == 65 and float(table[-1]["phi"]) == 1.0
    head = (tmp_path / "o" / "value_function.csv").read_text().splitlines()[:5]
    assert any("config_sha256" in l for l in head) and any(l == "# seed = 7" for l in head)
    assert "phi0" in capsys.readouterr().out


def test_verify_passes_and_prints_lines(tmp_path, capsys):
    # enough paths for the null strategy's drift to be significant
    cfg = write_cfg(tmp_path, n_paths=20_000)
    assert run("verify", cfg, tmp_path / "o") == 0
    out = capsys.readouterr().out.splitlines()
    assert all(l.startswith("PASS ") for l in out) and len(out) == 9
    rep = json.loads((tmp_path / "o" / "verify_report.json").read_text())
    assert rep["passed"] and rep["failed"] == []


def test_verify_detects_injected_suboptimal_strategy(tmp_path, capsys):
    cfg = write_cfg(tmp_path)
    assert run("verify", cfg, tmp_path / "o", "--inject-suboptimal") == 1
    assert "FAIL martingale" in capsys.readouterr().out


def test_verify_refuses_small_samples(tmp_path, capsys):
    cfg = write_cfg(tmp_path, n_paths=50)
    assert run("verify", cfg, tmp_path / "o") == 2
    assert "n_paths" in capsys.readouterr().err


def test_insurance_requires_section(tmp_path, capsys):
    cfg = write_cfg(tmp_path, insurance="")
    assert run("insurance", cfg, tmp_path / "o") == 2
    assert "[insurance]" in capsys.readouterr().err


def test_insurance_outputs(tmp_path):
    cfg = write_cfg(tmp_path)
    assert run("insurance", cfg, tmp_path / "o") == 0
    curve = rows(tmp_path / "o" / "theta_curve.csv")
    assert len(curve) == 11 and sum(int(r["is_optimal"]) for r in curve) <= 1
    stat = rows(tmp_path / "o" / "comparative_statics.csv")
    assert len(stat) == 2
    summ = json.loads((tmp_path / "o" / "insurance_summary.json").read_text())
    assert 0.0 <= summ["theta_star"] <= 1.0


def test_prohibitive_cost_means_no_effort(tmp_path):
    extra = "cost1_scale = 1e9\ncost2_scale = 1e9"
    cfg = write_cfg(tmp_path, prevention_extra=extra)
    assert run("solve", cfg, tmp_path / "o") == 0
    for r in rows(tmp_path / "o" / "value_function.csv"):
        assert float(r["u1_star"]) == 0.0 and float(r["u2_star"]) == 0.0


def test_tiny_horizon(tmp_path):
    cfg = write_cfg(tmp_path, T="1e-8")
    assert run("solve", cfg, tmp_path / "o") == 0
    phi0 = float(rows(tmp_path / "o" / "value_function.csv")[0]["phi"])
    assert abs(phi0 - 1.0) <= 1e-6


@pytest.mark.parametrize("cmd", ["solve", "verify", "insurance", "conditions", "simulate"])
def test_reruns_are_byte_identical(tmp_path, cmd):
    cfg = write_cfg(tmp_path, n_paths=500)
    assert run(cmd, cfg, tmp_path / "a") in (0, 1)
    assert run(cmd, cfg, tmp_path / "b", "--threads", "3") in (0, 1)
    files = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert files
    for name in files:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes(), name


def test_seed_override_changes_simulation(tmp_path):
    cfg = write_cfg(tmp_path, n_paths=500)
    run("simulate", cfg, tmp_path / "a")
    run("simulate", cfg, tmp_path / "b", "--seed", "8")
    assert (tmp_path / "a" / "paths.csv").read_bytes() != (tmp_path / "b" / "paths.csv").read_bytes()
    assert "# seed = 8" in (tmp_path / "b" / "paths.csv").read_text()


def test_simulate_outputs(tmp_path):
    cfg = write_cfg(tmp_path, n_paths=500)
    assert run("simulate", cfg, tmp_path / "o") == 0
    events = rows(tmp_path / "o" / "paths.csv")
    assert events and {int(r["path"]) for r in events} <= set(range(5))
    mc = rows(tmp_path / "o" / "mc_results.csv")
    assert len(mc) == 2


def _conditions(tmp_path, text):
    cfg = tmp_path / "k.ini"
    cfg.write_text(text)
    assert run("conditions", cfg, tmp_path / "o") == 0
    data = json.loads((tmp_path / "o" / "conditions.json").read_text())
    return {c["name"]: c for c in data["admissibility"]["conditions"]}, data


def test_conditions_point_mass_all_pass(tmp_path):
    text = SMALL.format(n_paths=100, T=1, insurance="", prevention_extra="").replace(
        "kind = exponential\nrate = 10", "kind = point_mass\nz0 = 0.2")
    conds, data = _conditions(tmp_path, text)
    assert all(c["status"] == "analytic_pass" for c in conds.values())
    assert data["admissibility"]["gate"]["value_star"] < 0.5


def test_conditions_heavy_exponential_flags_loss(tmp_path):
    text = SMALL.format(n_paths=100, T=1, insurance="", prevention_extra="").replace(
        "rate = 10", "rate = 1").replace("eta = 0.5", "eta = 1")
    conds, data = _conditions(tmp_path, text)
    assert conds["ass2_loss"]["status"] == "analytic_fail"
    assert data["any_analytic_fail"] is True


def test_bad_flags(tmp_path, capsys):
    cfg = write_cfg(tmp_path)
    assert run("solve", cfg, tmp_path / "o", "--threads", "0") == 2
    assert run("solve", cfg, tmp_path / "o", "--seed", "-3") == 2
    with pytest.raises(SystemExit) as info:
        main(["solve"])
    assert info.value.code == 2
    assert run("solve", tmp_path / "missing.ini", tmp_path / "o") == 2


def test_markov_solve_writes_field(tmp_path):
    text = SMALL.format(n_paths=200, T=1, insurance="", prevention_extra="").replace(
        "kind = constant\nrate = 1", "kind = markov\nlevels = 1, 3\ngenerator = -1, 1; 1, -1")
    cfg = tmp_path / "m.ini"
    cfg.write_text(text.replace("[run]\n", "[run]\nfield_times = 5\n"))
    assert run("solve", cfg, tmp_path / "o") == 0
    assert (tmp_path / "o" / "strategy_field.csv").exists()
