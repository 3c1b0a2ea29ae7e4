import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from prevopt.prevention import (  # noqa: E402
    ExpImpact,
    InverseImpact,
    LinearImpact,
    PreventionSpec,
    QuadraticCost,
    ShiftedQuadraticCost,
)
from prevopt.risk_models import ConstantIntensity, Exponential  # noqa: E402

ROOT = Path(__file__).resolve().parents[1]
DEMO_CONFIG = ROOT / "configs" / "demo.ini"


def make_spec(alpha=1.0, eta=0.5, r=0.0, T=1.0, x0=0.0, zeta1=1.0, cost_scale=1.0, **kw):
    base = dict(impact1=ExpImpact(alpha), impact2=LinearImpact(),
                cost1=QuadraticCost(cost_scale), cost2=QuadraticCost(cost_scale),
                zeta1=zeta1, zeta2=1.0, eta=eta, r=r, T=T, x0=x0)
    base.update(kw)
    return PreventionSpec(**base)


def example_one(alpha=0.5, r=0.0):
    return make_spec(alpha=alpha, eta=1.0, r=r, zeta1=2.0)


def example_two():
    return make_spec(eta=1.0, zeta1=2.0, impact1=InverseImpact(), cost1=ShiftedQuadraticCost())


@pytest.fixture
def base_spec():
    """The reference setting: gamma1 = e^{-u}, gamma2 = 1 - u, c = u^2, eta = 0.5."""
    return make_spec()


@pytest.fixture
def base_model():
    return ConstantIntensity(1.0)


@pytest.fixture
def base_dist():
    return Exponential(10.0)
