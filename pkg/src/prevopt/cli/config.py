"""Experiment configuration: sectioned ``key = value`` text.

Syntax is handled by :mod:`configparser`; this module adds a line index so
that every semantic error points at the offending line, and turns the
sections into model objects.

Example::

    [model]
    kind = constant
    rate = 1.0

    [claims]
    kind = exponential
    rate = 10

    [prevention]
    impact1 = exp
    impact1_alpha = 1.0
    impact2 = linear
    cost1 = quadratic
    cost2 = quadratic
    zeta1 = 1
    zeta2 = 1
    eta = 0.5
    r = 0
    T = 1
    x0 = 0

    [run]
    seed = 7
    n_paths = 100000
"""

from __future__ import annotations

import configparser
import hashlib
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from prevopt.errors import ConfigError, PrevoptError
from prevopt.prevention.curves import COSTS, IMPACTS, make_cost, make_impact
from prevopt.prevention.spec import PreventionSpec, validate_spec
from prevopt.risk_models.claims import Exponential, PointMass, Uniform
from prevopt.risk_models.intensity import (
    CappedExcitation,
    ConstantIntensity,
    Contagion,
    LinearExcitation,
    ShotNoiseCox,
    make_markov,
)

SECTIONS = ("model", "claims", "prevention", "run", "insurance")
REQUIRED = ("model", "claims", "prevention")

_SECTION_RE = re.compile(r"^\s*\[([^\]]+)\]")
_KEY_RE = re.compile(r"^\s*([^=:#;\s][^=:]*?)\s*[=:]")


@dataclass(frozen=True)
class RunSettings:
    seed: int = 0
    n_paths: int = 100_000
    grid_M: int = 512
    grid_n1: int = 201
    grid_n2: int = 201
    method: str = "grid"
    n_intervals: int = 20
    field_times: int = 65
    ks_events: int = 10_000
    dump_paths: int = 100
    test_u1: float = 0.5
    test_u2: float = 0.3
    strategy: str = "optimal"
    strategy_u1: float = 0.0
    strategy_u2: float = 0.0
    lattice_n1: int = 4
    lattice_n2: int = 3


@dataclass(frozen=True)
class InsuranceSettings:
    kappa: float = 0.0
    rho_r: float = 0.0
    lam_ref: Optional[float] = None
    premium: str = "expected_value"
    theta_points: int = 101
    kappas: tuple = ()


@dataclass(frozen=True)
class ExperimentConfig:
    model: object
    dist: object
    spec: PreventionSpec
    run: RunSettings
    insurance: Optional[InsuranceSettings]
    sha256: str
    path: str = ""
    raw: dict = field(default_factory=dict, repr=False, compare=False)


class _Section:
    """Typed access to one section, with line numbers for errors."""

    def __init__(self, name, items, lines, path):
        self.name = name
        self.items = dict(items)
        self.lines = lines
        self.path = path
        self.used = set()

    def line(self, key=None):
        return self.lines.get((self.name, key)) or self.lines.get((self.name, None))

    def fail(self, key, msg):
        where = f"[{self.name}] {key}" if key else f"[{self.name}]"
        raise ConfigError(f"{where}: {msg}", self.line(key), self.path)

    def has(self, key):
        return key in self.items

    def raw(self, key, default=None, required=False):
        if key not in self.items:
            if required:
                self.fail(None, f"missing required key {key!r}")
            return default
        self.used.add(key)
        return self.items[key].strip()

    def number(self, key, default=None, required=False):
        v = self.raw(key, None, required)
        if v is None:
            return default
        try:
            x = float(v)
        except ValueError:
            self.fail(key, f"expected a number, got {v!r}")
        if not math.isfinite(x):
            self.fail(key, f"value must be finite, got {v!r}")
        return x

    def integer(self, key, default=None, required=False):
        v = self.raw(key, None, required)
        if v is None:
            return default
        try:
            x = float(v)
        except ValueError:
            self.fail(key, f"expected an integer, got {v!r}")
        if not (math.isfinite(x) and x == int(x)):
            self.fail(key, f"expected an integer, got {v!r}")
        return int(x)

    def numbers(self, key, default=None, required=False, sep=","):
        v = self.raw(key, None, required)
        if v is None:
            return default
        try:
            return tuple(float(p) for p in v.split(sep) if p.strip())
        except ValueError:
            self.fail(key, f"expected a {sep!r}-separated list of numbers, got {v!r}")

    def choice(self, key, options, default=None, required=False):
        v = self.raw(key, None, required)
        if v is None:
            return default
        if v not in options:
            self.fail(key, f"unknown value {v!r}; choose from {sorted(options)}")
        return v

    def prefixed(self, prefix):
        out = {}
        for k in self.items:
            if k.startswith(prefix):
                out[k[len(prefix):]] = self.number(k)
        return out

    def check_unused(self):
        extra = sorted(set(self.items) - self.used)
        if extra:
            self.fail(extra[0], f"unknown key {extra[0]!r}")


def _line_index(text):
    lines, section = {}, None
    for no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped[0] in "#;":
            continue
        m = _SECTION_RE.match(line)
        if m:
            section = m.group(1).strip()
            lines.setdefault((section, None), no)
            continue
        m = _KEY_RE.match(line)
        if m and section is not None and not line[0].isspace():
            lines.setdefault((section, m.group(1).strip().lower()), no)
    return lines


def parse_text(text: str, path: str = "<string>") -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None, strict=True,
                                       comment_prefixes=("#", ";"), inline_comment_prefixes=("#",))
    try:
        parser.read_string(text, source=path)
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"duplicate key {exc.option!r} in [{exc.section}]", exc.lineno, path)
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"duplicate section [{exc.section}]", exc.lineno, path)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("content before the first [section] header", exc.lineno, path)
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] if exc.errors else None
        raise ConfigError("malformed line (expected 'key = value')", lineno, path)

    lines = _line_index(text)
    for name in parser.sections():
        if name not in SECTIONS:
            raise ConfigError(f"unknown section [{name}]; expected one of {list(SECTIONS)}",
                              lines.get((name, None)), path)
    for name in REQUIRED:
        if not parser.has_section(name):
            raise ConfigError(f"missing required section [{name}]", None, path)

    sec = {n: _Section(n, parser.items(n), lines, path) for n in parser.sections()}
    dist = _claims(sec["claims"])
    model = _model(sec["model"])
    spec = _prevention(sec["prevention"])
    run = _run(sec.get("run") or _Section("run", {}, lines, path), spec)
    ins = _insurance(sec["insurance"]) if "insurance" in sec else None
    for s in sec.values():
        s.check_unused()
    digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
    raw = {n: dict(parser.items(n)) for n in parser.sections()}
    return ExperimentConfig(model, dist, spec, run, ins, digest, path, raw)


def load_config(path) -> ExperimentConfig:
    p = Path(path)
    try:
        data = p.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", None, str(p))
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError:
        raise ConfigError("config is not valid UTF-8", None, str(p))
    return parse_text(text, str(p))


# -- sections ---------------------------------------------------------------------------


def _law(s: _Section, prefix=""):
    kind = s.choice(prefix + "kind", ("point_mass", "exponential", "uniform"), required=True)
    try:
        if kind == "point_mass":
            return PointMass(s.number(prefix + "z0", required=True))
        if kind == "exponential":
            return Exponential(s.number(prefix + "rate", required=True))
        return Uniform(s.number(prefix + "low", required=True), s.number(prefix + "high", required=True))
    except PrevoptError as exc:
        s.fail(prefix + "kind", str(exc))


def _claims(s: _Section):
    return _law(s)


def _model(s: _Section):
    kind = s.choice("kind", ("constant", "markov", "shot_noise", "contagion"), required=True)
    try:
        if kind == "constant":
            return ConstantIntensity(s.number("rate", required=True))
        if kind == "markov":
            levels = s.numbers("levels", required=True)
            rows = s.raw("generator", required=True).split(";")
            try:
                q = [[float(x) for x in row.split(",")] for row in rows if row.strip()]
            except ValueError:
                s.fail("generator", "rows are ';'-separated lists of ','-separated numbers")
            return make_markov(q, levels, s.integer("initial_state", 0))
        common = dict(beta=s.number("beta", required=True), alpha=s.number("alpha", required=True),
                      lambda0=s.number("lambda0", required=True), rho=s.number("rho", 0.0))
        shock = _law(s, "shock_") if s.has("shock_kind") else PointMass(1.0)
        if kind == "shot_noise":
            return ShotNoiseCox(shock=shock, **common)
        excite = s.choice("excite", ("linear", "capped"), "linear")
        scale = s.number("excite_scale", 1.0)
        ell = (LinearExcitation(scale) if excite == "linear"
               else CappedExcitation(scale, s.number("excite_cap", required=True)))
        return Contagion(shock=shock, excite=ell, **common)
    except ConfigError:
        raise
    except (PrevoptError, ValueError) as exc:
        s.fail("kind", str(exc))


def _curve(s: _Section, key, families, maker, default):
    kind = s.choice(key, tuple(families), default)
    params = s.prefixed(key + "_")
    try:
        return maker(kind, **params)
    except TypeError:
        s.fail(key, f"bad parameters {sorted(params)} for family {kind!r}")
    except PrevoptError as exc:
        s.fail(key, str(exc))


def _prevention(s: _Section) -> PreventionSpec:
    impact1 = _curve(s, "impact1", IMPACTS, make_impact, "exp")
    impact2 = _curve(s, "impact2", IMPACTS, make_impact, "linear")
    cost1 = _curve(s, "cost1", COSTS, make_cost, "quadratic")
    cost2 = _curve(s, "cost2", COSTS, make_cost, "quadratic")
    try:
        spec = PreventionSpec(
            impact1=impact1, impact2=impact2, cost1=cost1, cost2=cost2,
            zeta1=s.number("zeta1", 1.0), zeta2=s.number("zeta2", 1.0),
            eta=s.number("eta", required=True), r=s.number("r", 0.0),
            T=s.number("t", required=True), x0=s.number("x0", 0.0),
        )
    except ConfigError:
        raise
    except (PrevoptError, ValueError) as exc:
        s.fail(None, str(exc))
    problems = validate_spec(spec)
    if problems:
        s.fail(None, "invalid prevention spec: " + "; ".join(problems))
    return spec


def _run(s: _Section, spec: PreventionSpec) -> RunSettings:
    d = RunSettings()
    run = RunSettings(
        seed=s.integer("seed", d.seed),
        n_paths=s.integer("n_paths", d.n_paths),
        grid_M=s.integer("grid_m", d.grid_M),
        grid_n1=s.integer("grid_n1", d.grid_n1),
        grid_n2=s.integer("grid_n2", d.grid_n2),
        method=s.choice("method", ("grid", "foc_newton"), d.method),
        n_intervals=s.integer("n_intervals", d.n_intervals),
        field_times=s.integer("field_times", d.field_times),
        ks_events=s.integer("ks_events", d.ks_events),
        dump_paths=s.integer("dump_paths", d.dump_paths),
        test_u1=s.number("test_u1", d.test_u1),
        test_u2=s.number("test_u2", d.test_u2),
        strategy=s.choice("strategy", ("optimal", "null", "constant"), d.strategy),
        strategy_u1=s.number("strategy_u1", d.strategy_u1),
        strategy_u2=s.number("strategy_u2", d.strategy_u2),
        lattice_n1=s.integer("lattice_n1", d.lattice_n1),
        lattice_n2=s.integer("lattice_n2", d.lattice_n2),
    )
    if run.seed < 0:
        s.fail("seed", "seed must be nonnegative")
    if run.n_paths < 1:
        s.fail("n_paths", "n_paths must be positive")
    if run.grid_M < 2 or run.grid_M % 2:
        s.fail("grid_m", "grid_M must be a positive even number")
    if run.grid_n1 < 2 or run.grid_n2 < 2:
        s.fail("grid_n1", "effort lattices need at least 2 points per axis")
    if run.lattice_n1 < 1 or run.lattice_n2 < 1:
        s.fail("lattice_n1", "dominance lattice needs at least one point per axis")
    if run.n_intervals < 1:
        s.fail("n_intervals", "n_intervals must be positive")
    for key, val, top in (("test_u1", run.test_u1, spec.zeta1), ("test_u2", run.test_u2, spec.zeta2),
                          ("strategy_u1", run.strategy_u1, spec.zeta1),
                          ("strategy_u2", run.strategy_u2, spec.zeta2)):
        if not 0.0 <= val <= top:
            s.fail(key, f"effort {val!r} outside [0, {top!r}]")
    return run


def _insurance(s: _Section) -> InsuranceSettings:
    d = InsuranceSettings()
    out = InsuranceSettings(
        kappa=s.number("kappa", d.kappa),
        rho_r=s.number("rho_r", d.rho_r),
        lam_ref=s.number("lam_ref", None),
        premium=s.choice("premium", ("expected_value", "zero"), d.premium),
        theta_points=s.integer("theta_points", d.theta_points),
        kappas=s.numbers("kappas", ()),
    )
    if out.kappa < 0 or any(k < 0 for k in out.kappas):
        s.fail("kappa", "loading must be nonnegative")
    if not 0 <= out.rho_r <= 1:
        s.fail("rho_r", "reimbursement ratio must lie in [0, 1]")
    if out.lam_ref is not None and out.lam_ref < 0:
        s.fail("lam_ref", "reference intensity must be nonnegative")
    if out.theta_points < 2:
        s.fail("theta_points", "theta grid needs at least 2 points")
    return out
