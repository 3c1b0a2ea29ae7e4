"""Subcommand implementations.

Each command is a pure function of the parsed config and its flags: it writes
files under ``out`` and returns ``(exit_code, summary_dict)``.  Thread count
never enters any output.
"""

from __future__ import annotations

import io
import json
import math
from pathlib import Path

import numpy as np

from prevopt import __version__
from prevopt.errors import ConfigError, ContractError
from prevopt.insurance import InsuranceContract, comparative_statics, optimal_retention
from prevopt.prevention.convexity import check_convexity_conditions
from prevopt.prevention.strategies import NULL_STRATEGY, ConstantStrategy, TableStrategy
from prevopt.risk_models.conditions import admissibility_report
from prevopt.risk_models.intensity import ConstantIntensity
from prevopt.simulate.engine import CONTROLLED, simulate_paths
from prevopt.simulate.estimators import (
    CSV_COLUMNS as MC_COLUMNS,
    DIRECT,
    MIN_PATHS,
    WEIGHTED,
    compensator_check,
    estimate_expected_utility,
)
from prevopt.simulate.residuals import time_change_test
from prevopt.solver.markov import strategy_field, strategy_label
from prevopt.solver.value_function import value_function_constant
from prevopt.solver.verification import bellman_residual_check

Z = 3.0


# -- output helpers ---------------------------------------------------------------------


def header(cfg, seed, command):
    return {"artifact": "prevopt", "version": __version__, "command": command,
            "config_sha256": cfg.sha256, "seed": int(seed)}


def header_lines(cfg, seed, command):
    return [f"{k} = {v}" for k, v in header(cfg, seed, command).items()]


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    return obj


def write_json(path: Path, cfg, seed, command, payload):
    doc = {"header": header(cfg, seed, command), **payload}
    path.write_text(json.dumps(_clean(doc), indent=2, allow_nan=False) + "\n", encoding="utf-8")


def write_text(path: Path, text: str):
    path.write_text(text, encoding="utf-8")


def _csv(header_rows, columns, rows):
    buf = io.StringIO()
    for h in header_rows:
        buf.write(f"# {h}\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(_cell(v) for v in row) + "\n")
    return buf.getvalue()


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


def _require_constant(cfg, command):
    if not isinstance(cfg.model, ConstantIntensity):
        raise ConfigError(f"'{command}' requires [model] kind = constant", None, cfg.path)


def _table(cfg):
    run = cfg.run
    return value_function_constant(cfg.spec, cfg.model.rate, cfg.dist, run.grid_M, run.method,
                                   (run.grid_n1, run.grid_n2))


# -- solve ------------------------------------------------------------------------------


def cmd_solve(cfg, out: Path, seed: int, threads: int = 1):
    spec, run = cfg.spec, cfg.run
    hdr = header_lines(cfg, seed, "solve")
    if isinstance(cfg.model, ConstantIntensity):
        table = _table(cfg)
        v = table.value
        # the identity is algebraic in the artifact, so it must hold exactly
        assert v == math.exp(-spec.eta * spec.x0 * math.exp(spec.r * spec.T)) * table.phi0
        write_text(out / "value_function.csv", table.to_csv(hdr))
        summary = {
            "model": "constant", "v": v, "phi0": table.phi0,
            "u_star_0": [float(table.u1[0]), float(table.u2[0])],
            "psi_star_0": float(table.psi_star[0]),
            "scale_factor": math.exp(-spec.eta * spec.x0 * math.exp(spec.r * spec.T)),
            "grid_M": run.grid_M, "method": table.method,
        }
        write_json(out / "solve_summary.json", cfg, seed, "solve", summary)
        return 0, summary

    fld = strategy_field(cfg.model, spec, cfg.dist, run.field_times, method=run.method,
                         grid=(run.grid_n1, run.grid_n2))
    rows = [(float(t), float(y), float(fld.u1[i, j]), float(fld.u2[i, j]))
            for i, t in enumerate(fld.times) for j, y in enumerate(fld.ys)]
    write_text(out / "strategy_field.csv",
               _csv(hdr + [f"label = {fld.label}"], ("t", "intensity", "u1_star", "u2_star"), rows))
    mc = estimate_expected_utility(cfg.model, cfg.dist, fld, spec, max(run.n_paths, MIN_PATHS),
                                   DIRECT, seed, threads)
    summary = {"model": type(cfg.model).__name__, "label": strategy_label(cfg.model),
               "v_mc": mc.estimate, "v_mc_stderr": mc.stderr, "n_paths": mc.n_paths,
               "u_star_0": [float(fld.u1[0, 0]), float(fld.u2[0, 0])]}
    write_json(out / "solve_summary.json", cfg, seed, "solve", summary)
    return 0, summary


# -- verify -----------------------------------------------------------------------------


def _ramp_strategy(spec, n=8):
    """A piecewise-constant strategy that actually varies in time."""
    times = np.linspace(0.0, spec.T, n + 1)[:-1]
    frac = (np.arange(n) % 4) / 3.0
    return TableStrategy(times, spec.zeta1 * frac, spec.zeta2 * (1.0 - frac))


def _opposite_corner(spec, u1, u2):
    return ConstantStrategy(0.0 if u1 > 0.5 * spec.zeta1 else spec.zeta1,
                            0.0 if u2 > 0.5 * spec.zeta2 else spec.zeta2)


def cmd_verify(cfg, out: Path, seed: int, threads: int = 1, inject_suboptimal: bool = False):
    spec, run, model, dist = cfg.spec, cfg.run, cfg.model, cfg.dist
    n = run.n_paths
    if n < MIN_PATHS:
        raise ConfigError(f"[run] n_paths = {n} is below the minimum of {MIN_PATHS} for verify",
                          None, cfg.path)
    checks = {}

    # measure change: same constant effort, two estimators, independent seeds
    u_test = ConstantStrategy(run.test_u1, run.test_u2)
    a = estimate_expected_utility(model, dist, u_test, spec, n, DIRECT, seed, threads)
    b = estimate_expected_utility(model, dist, u_test, spec, n, WEIGHTED, seed + 1, threads)
    se = math.hypot(a.stderr, b.stderr)
    checks["girsanov"] = {"direct": a.to_dict(), "weighted": b.to_dict(),
                          "diff": a.estimate - b.estimate, "combined_stderr": se,
                          "passed": abs(a.estimate - b.estimate) <= Z * se}

    if isinstance(model, ConstantIntensity):
        table = _table(cfg)
        v = table.value
        scale = math.exp(-spec.eta * spec.x0 * math.exp(spec.r * spec.T))
        checks["scaling_identity"] = {"v": v, "phi0": table.phi0, "passed": v == scale * table.phi0}
        opt = table.strategy()
        u1s, u2s = float(table.u1[0]), float(table.u2[0])
        labelled = _opposite_corner(spec, u1s, u2s) if inject_suboptimal else opt

        mc = estimate_expected_utility(model, dist, opt, spec, n, DIRECT, seed + 2, threads)
        checks["closed_form_vs_mc"] = {"v": v, "mc": mc.to_dict(), "z": (mc.estimate - v) / mc.stderr
                                       if mc.stderr > 0 else 0.0,
                                       "passed": abs(mc.estimate - v) <= Z * mc.stderr}

        rows, exceed = [], False
        all_ok = True
        u1_grid = np.linspace(0.0, spec.zeta1, run.lattice_n1)
        u2_grid = np.linspace(0.0, spec.zeta2, run.lattice_n2)
        for i, x in enumerate(u1_grid):
            for j, y in enumerate(u2_grid):
                k = 3 + i * run.lattice_n2 + j
                r = estimate_expected_utility(model, dist, ConstantStrategy(float(x), float(y)), spec,
                                              n, DIRECT, seed + k, threads)
                ok = r.estimate >= v - Z * r.stderr
                strict = r.estimate > v + Z * r.stderr
                all_ok &= ok
                exceed |= strict
                rows.append({"u1": float(x), "u2": float(y), "estimate": r.estimate,
                             "stderr": r.stderr, "dominates": ok, "strictly_above": strict})
        checks["bellman_dominance"] = {"v": v, "strategies": rows, "passed": all_ok and exceed}

        base = seed + 100
        rep = bellman_residual_check(model, dist, spec, table, labelled, n, base, run.n_intervals,
                                     True, threads)
        checks["martingale"] = {"strategy": "injected" if inject_suboptimal else "optimal",
                                "report": rep.to_dict(), "positive_drift": rep.strict_drift,
                                "passed": rep.martingale_ok}
        checks["terminal_identity"] = {"terminal_mean": rep.terminal_mean,
                                       "direct_mean": rep.direct_mean, "passed": rep.terminal_ok}
        sub = bellman_residual_check(model, dist, spec, table, NULL_STRATEGY, n, base + 2,
                                     run.n_intervals, False, threads)
        interior = 0 < u1s < spec.zeta1 or 0 < u2s < spec.zeta2
        checks["submartingale"] = {
            "strategy": [0.0, 0.0], "report": sub.to_dict(), "optimum_interior": interior,
            "passed": sub.submartingale_ok and (sub.strict_drift or not interior),
        }
        ramp = _ramp_strategy(spec)
    else:
        fld = strategy_field(model, spec, dist, run.field_times, method=run.method,
                             grid=(run.grid_n1, run.grid_n2))
        ramp = fld
        checks["closed_form_vs_mc"] = {"skipped": "needs a constant intensity", "passed": True}

    comp = compensator_check(model, dist, ramp, spec, n, seed + 200, threads)
    checks["compensator"] = {**comp.to_dict(), "strategy": ramp.describe()}
    ks = time_change_test(model, dist, run.ks_events, seed + 300, threads=threads)
    checks["time_change"] = ks.to_dict()

    failed = [k for k, c in checks.items() if not c["passed"]]
    summary = {"n_paths": n, "inject_suboptimal": inject_suboptimal, "checks": checks,
               "failed": failed, "passed": not failed}
    write_json(out / "verify_report.json", cfg, seed, "verify", summary)
    return (1 if failed else 0), summary


# -- insurance --------------------------------------------------------------------------


def _contract(cfg, kappa=None):
    ins = cfg.insurance
    lam = ins.lam_ref if ins.lam_ref is not None else cfg.model.rate
    kappa = ins.kappa if kappa is None else kappa
    if ins.premium == "zero":
        return InsuranceContract(kappa, 0.0, lam, premium_fn=lambda th: 0.0, xi_fn=lambda th: 0.0)
    return InsuranceContract(kappa, ins.rho_r, lam)


def cmd_insurance(cfg, out: Path, seed: int, threads: int = 1):
    if cfg.insurance is None:
        raise ConfigError("'insurance' needs an [insurance] section (keys: kappa, rho_r, lam_ref, "
                          "premium, theta_points, kappas)", None, cfg.path)
    _require_constant(cfg, "insurance")
    ins, run = cfg.insurance, cfg.run
    thetas = np.linspace(0.0, 1.0, ins.theta_points)
    try:
        contract = _contract(cfg)
        res = optimal_retention(contract, cfg.spec, cfg.model.rate, cfg.dist, thetas, run.grid_M,
                                n_effort=run.grid_n1)
    except ContractError as exc:
        raise ConfigError(f"[insurance] {exc}", None, cfg.path)
    hdr = header_lines(cfg, seed, "insurance")
    write_text(out / "theta_curve.csv", res.curve_csv(hdr))
    d = np.abs(np.diff(res.objective))
    step = float(thetas[1] - thetas[0])
    summary = {"theta_star": res.theta_star, "v1": res.value, "mean_effort": res.mean_effort,
               "kappa": ins.kappa, "rho_r": ins.rho_r, "premium_rule": ins.premium,
               "continuity_constant": float(np.max(d) / step) if d.size else 0.0}
    if ins.kappas:
        table = comparative_statics(ins.kappas, contract, cfg.spec, cfg.model.rate, cfg.dist,
                                    thetas, run.grid_M, run.grid_n1)
        write_text(out / "comparative_statics.csv",
                   _csv(hdr, ("kappa", "theta_star", "mean_effort"), table))
        summary["comparative_statics"] = [list(r) for r in table]
    write_json(out / "insurance_summary.json", cfg, seed, "insurance", summary)
    return 0, summary


# -- conditions -------------------------------------------------------------------------


def cmd_conditions(cfg, out: Path, seed: int, threads: int = 1):
    model = cfg.model
    rep = admissibility_report(model, cfg.dist, cfg.spec, cfg.run.n_paths, seed, threads=threads)
    bound = float(model.bound) if model.bounded else math.inf
    conv = check_convexity_conditions(cfg.spec, bound)
    summary = {"admissibility": rep.to_dict(), "convexity": conv.to_dict(),
               "any_analytic_fail": rep.any_fail}
    write_json(out / "conditions.json", cfg, seed, "conditions", summary)
    return 0, summary


# -- simulate ---------------------------------------------------------------------------


EVENT_COLUMNS = ("path", "time", "mark", "lam_minus", "lam_plus", "u1", "u2")


def _sim_strategy(cfg):
    run = cfg.run
    if run.strategy == "null":
        return NULL_STRATEGY
    if run.strategy == "constant":
        return ConstantStrategy(run.strategy_u1, run.strategy_u2)
    if isinstance(cfg.model, ConstantIntensity):
        return _table(cfg).strategy()
    return strategy_field(cfg.model, cfg.spec, cfg.dist, run.field_times, method=run.method,
                          grid=(run.grid_n1, run.grid_n2))


def cmd_simulate(cfg, out: Path, seed: int, threads: int = 1):
    spec, run = cfg.spec, cfg.run
    strategy = _sim_strategy(cfg)
    n_dump = min(run.dump_paths, run.n_paths)
    hdr = header_lines(cfg, seed, "simulate") + [f"strategy = {json.dumps(_clean(strategy.describe()))}"]
    dump = simulate_paths(cfg.model, cfg.dist, spec.T, n_dump, seed, strategy, spec, CONTROLLED,
                          threads=threads, record=True)
    ev = dump.events
    rows = [tuple(ev[c][k] for c in EVENT_COLUMNS) for k in range(ev["path"].size)]
    write_text(out / "paths.csv", _csv(hdr, EVENT_COLUMNS, rows))
    results = []
    if run.n_paths >= MIN_PATHS:
        for mode in (DIRECT, WEIGHTED):
            results.append(estimate_expected_utility(cfg.model, cfg.dist, strategy, spec,
                                                     run.n_paths, mode, seed, threads))
    write_text(out / "mc_results.csv", _csv(hdr, MC_COLUMNS, [r.csv_row() for r in results]))
    summary = {"n_dumped_paths": n_dump, "n_events": int(ev["path"].size),
               "estimates": [r.to_dict() for r in results]}
    return 0, summary


COMMANDS = {
    "solve": cmd_solve,
    "verify": cmd_verify,
    "insurance": cmd_insurance,
    "conditions": cmd_conditions,
    "simulate": cmd_simulate,
}
