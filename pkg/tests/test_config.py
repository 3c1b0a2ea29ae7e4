import pytest

from prevopt.cli import load_config, parse_text
from prevopt.errors import ConfigError
from prevopt.risk_models import Contagion, ConstantIntensity, Exponential, MarkovModulated, PointMass, Uniform
from conftest import DEMO_CONFIG

BASE = """[model]
kind = constant
rate = 2

[claims]
kind = point_mass
z0 = 0.1

[prevention]
impact1 = exp
impact1_alpha = 1
impact2 = linear
cost1 = quadratic
cost2 = quadratic
zeta1 = 1
zeta2 = 1
eta = 1
r = 0
T = 1
x0 = 0
"""


def test_demo_config_loads():
    cfg = load_config(DEMO_CONFIG)
    assert isinstance(cfg.model, ConstantIntensity) and cfg.model.rate == 1.0
    assert isinstance(cfg.dist, Exponential)
    assert cfg.run.seed == 20240611 and cfg.run.grid_M == 512
    assert cfg.insurance.kappa == 0.2 and len(cfg.insurance.kappas) == 11
    assert len(cfg.sha256) == 64


def test_defaults_when_optional_sections_absent():
    cfg = parse_text(BASE)
    assert cfg.insurance is None
    assert cfg.run.n_paths == 100_000 and cfg.run.method == "grid"
    assert isinstance(cfg.dist, PointMass)


def test_hash_depends_on_text():
    assert parse_text(BASE).sha256 != parse_text(BASE + "\n# note\n").sha256


def test_other_models_and_laws():
    text = BASE.replace("kind = constant\nrate = 2", "kind = markov\nlevels = 1, 4\ngenerator = -1, 1; 2, -2")
    assert isinstance(parse_text(text).model, MarkovModulated)
    text = BASE.replace("kind = constant\nrate = 2",
                        "kind = contagion\nbeta = 1\nalpha = 2\nlambda0 = 1\nrho = 0\n"
                        "shock_kind = point_mass\nshock_z0 = 1\nexcite = linear\nexcite_scale = 0.5")
    assert isinstance(parse_text(text).model, Contagion)
    text = BASE.replace("kind = point_mass\nz0 = 0.1", "kind = uniform\nlow = 0.1\nhigh = 0.3")
    assert isinstance(parse_text(text).dist, Uniform)


def _err(text):
    with pytest.raises(ConfigError) as info:
        parse_text(text, "x.ini")
    return info.value


def test_bad_number_points_at_line():
    e = _err(BASE.replace("eta = 1", "eta = abc"))
    assert e.line == BASE.splitlines().index("eta = 1") + 1
    assert "x.ini:" in str(e) and "eta" in str(e)


def test_unknown_key_is_rejected():
    e = _err(BASE.replace("x0 = 0", "x0 = 0\nspeed = 3"))
    assert "speed" in str(e) and e.line == len(BASE.splitlines()) + 1


def test_unknown_and_missing_sections():
    assert "unknown section" in str(_err(BASE + "[extra]\na = 1\n"))
    head, _, _ = BASE.partition("[prevention]")
    assert "missing required section [prevention]" in str(_err(head))


def test_syntax_errors():
    assert "duplicate key" in str(_err(BASE.replace("rate = 2", "rate = 2\nrate = 3")))
    assert "before the first" in str(_err("a = 1\n" + BASE))


@pytest.mark.parametrize("old,new", [
    ("rate = 2", "rate = -2"),
    ("impact1 = exp", "impact1 = cubic"),
    ("eta = 1", "eta = 0"),
    ("kind = constant", "kind = hawkes"),
])
def test_invalid_values(old, new):
    _err(BASE.replace(old, new, 1))


@pytest.mark.parametrize("run", ["seed = -1", "grid_M = 7", "test_u1 = 3", "n_paths = 0"])
def test_invalid_run_settings(run):
    e = _err(BASE + "[run]\n" + run + "\n")
    assert e.line == len(BASE.splitlines()) + 2


@pytest.mark.parametrize("ins", ["kappa = -1", "rho_r = 2", "premium = free", "theta_points = 1"])
def test_invalid_insurance_settings(ins):
    _err(BASE + "[insurance]\n" + ins + "\n")


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "nope.ini")
