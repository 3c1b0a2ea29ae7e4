"""Claim-size distributions with closed-form moment-generating functions."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from prevopt.errors import DivergentMGF, NonfiniteIntegral, PreconditionError
from prevopt.rng import RandomStream

# Gauss-Legendre rule used for integrals against F that have no closed form
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(256)
# smooth polynomial-times-exponential moments of the uniform law
_GL64 = np.polynomial.legendre.leggauss(64)
# exponential law is integrated on [0, _EXP_TRUNCATION / rate]; tail mass e^-50
_EXP_TRUNCATION = 50.0


def _gauss_legendre(fn, lo, hi, density):
    x = 0.5 * (hi - lo) * _GL_NODES + 0.5 * (hi + lo)
    w = 0.5 * (hi - lo) * _GL_WEIGHTS
    return float(np.sum(w * density(x) * np.asarray(fn(x), dtype=float)))


class ClaimDistribution:
    """Law F of a single claim size Z > 0."""

    kind = "abstract"

    #: supremum of arguments with finite mgf
    mgf_limit = math.inf

    def sample(self, gen: np.random.Generator, size=None):
        raise NotImplementedError

    def mgf_array(self, a):
        """E[exp(a Z)] elementwise; +inf where it diverges."""
        raise NotImplementedError

    def mgf_moment(self, a, k: int):
        """E[Z^k exp(a Z)] elementwise for k in {1, 2}; +inf where it diverges."""
        raise NotImplementedError

    def expect(self, fn: Callable[[np.ndarray], np.ndarray]) -> float:
        raise NotImplementedError

    @property
    def mean(self) -> float:
        return float(self.mgf_moment(0.0, 1))

    @property
    def second_moment(self) -> float:
        return float(self.mgf_moment(0.0, 2))

    def mgf(self, a: float) -> float:
        if a >= self.mgf_limit:
            raise DivergentMGF(a, self.mgf_limit)
        return float(self.mgf_array(float(a)))

    def params(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class PointMass(ClaimDistribution):
    z0: float
    kind = "point_mass"

    def __post_init__(self):
        if not self.z0 > 0:
            raise PreconditionError("point mass location must be positive")

    def sample(self, gen, size=None):
        if size is None:
            return float(self.z0)
        return np.full(size, float(self.z0))

    def mgf_array(self, a):
        return np.exp(np.asarray(a, dtype=float) * self.z0)

    def mgf_moment(self, a, k):
        return self.z0**k * np.exp(np.asarray(a, dtype=float) * self.z0)

    def expect(self, fn):
        val = float(np.asarray(fn(np.array([self.z0])), dtype=float)[0])
        if not math.isfinite(val):
            raise NonfiniteIntegral(f"integrand non-finite at z={self.z0}")
        return val

    def params(self):
        return {"z0": self.z0}


@dataclass(frozen=True)
class Exponential(ClaimDistribution):
    rate: float
    kind = "exponential"

    def __post_init__(self):
        if not self.rate > 0:
            raise PreconditionError("exponential rate must be positive")

    @property
    def mgf_limit(self):
        return self.rate

    def sample(self, gen, size=None):
        return gen.exponential(1.0 / self.rate, size)

    def mgf_array(self, a):
        a = np.asarray(a, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = self.rate / (self.rate - a)
        return np.where(a < self.rate, out, np.inf)

    def mgf_moment(self, a, k):
        a = np.asarray(a, dtype=float)
        gap = self.rate - a
        with np.errstate(divide="ignore", invalid="ignore"):
            if k == 1:
                out = self.rate / gap**2
            elif k == 2:
                out = 2.0 * self.rate / gap**3
            else:
                raise ValueError("k must be 1 or 2")
        return np.where(a < self.rate, out, np.inf)

    def expect(self, fn):
        hi = _EXP_TRUNCATION / self.rate
        val = _gauss_legendre(fn, 0.0, hi, lambda z: self.rate * np.exp(-self.rate * z))
        if not math.isfinite(val):
            raise NonfiniteIntegral("integral against exponential law is not finite")
        return val

    def params(self):
        return {"rate": self.rate}


@dataclass(frozen=True)
class Uniform(ClaimDistribution):
    low: float
    high: float
    kind = "uniform"

    def __post_init__(self):
        if not (0 <= self.low < self.high):
            raise PreconditionError("uniform law needs 0 <= low < high")

    def sample(self, gen, size=None):
        out = gen.uniform(self.low, self.high, size)
        # never return exactly zero to keep claims strictly positive
        if self.low == 0:
            out = np.where(out == 0, np.nextafter(0.0, 1.0), out)
            if size is None:
                out = float(out)
        return out

    def mgf_array(self, a):
        a = np.asarray(a, dtype=float)
        width = self.high - self.low
        x = a * width
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(x == 0, 1.0, np.expm1(x) / x)
        return np.exp(a * self.low) * ratio

    def mgf_moment(self, a, k):
        a = np.asarray(a, dtype=float)
        z = 0.5 * (self.high - self.low) * _GL64[0] + 0.5 * (self.high + self.low)
        w = 0.5 * _GL64[1]
        vals = (w * z**k) @ np.exp(np.multiply.outer(z, np.atleast_1d(a)))
        return vals.reshape(a.shape) if a.shape else float(vals[0])

    def expect(self, fn):
        width = self.high - self.low
        val = _gauss_legendre(fn, self.low, self.high, lambda z: np.full_like(z, 1.0 / width))
        if not math.isfinite(val):
            raise NonfiniteIntegral("integral against uniform law is not finite")
        return val

    def params(self):
        return {"low": self.low, "high": self.high}


@dataclass(frozen=True)
class ScaledClaim(ClaimDistribution):
    """Law of ``factor * Z`` for Z ~ base; factor 0 gives the null loss."""

    base: ClaimDistribution
    factor: float
    kind = "scaled"

    def __post_init__(self):
        if self.factor < 0:
            raise PreconditionError("scale factor must be nonnegative")

    @property
    def mgf_limit(self):
        if self.factor == 0:
            return math.inf
        return self.base.mgf_limit / self.factor

    def sample(self, gen, size=None):
        return self.factor * self.base.sample(gen, size)

    def mgf_array(self, a):
        return self.base.mgf_array(self.factor * np.asarray(a, dtype=float))

    def mgf_moment(self, a, k):
        return self.factor**k * self.base.mgf_moment(self.factor * np.asarray(a, dtype=float), k)

    def expect(self, fn):
        return self.base.expect(lambda z: fn(self.factor * z))

    def params(self):
        return {"base": self.base.params(), "factor": self.factor}


def sample_claim(dist: ClaimDistribution, rng: RandomStream) -> float:
    return float(dist.sample(rng.claims))


def claim_mgf(dist: ClaimDistribution, a: float) -> float:
    """E[exp(a Z)]; raises DivergentMGF outside the domain."""
    return dist.mgf(a)
