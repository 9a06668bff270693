"""Synthetic distributions with known quantile functions.

Used to manufacture test data whose per-interval component values are
known in closed form, so estimator output can be checked against ground
truth instead of against itself. Sampling is inverse-transform only:
``generate`` pushes uniform draws through the same ``true_quantile``
code path the closed-form components describe, so any disagreement
localizes to the integration step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import ndtr, ndtri

from .core import Sample
from .errors import InvalidInterval, InvalidLevel

__all__ = [
    "KnownDistribution",
    "uniform",
    "exponential",
    "lognormal",
    "normal",
    "two_point",
    "true_quantile",
    "true_component",
    "generate",
]

_KINDS = ("uniform", "exponential", "lognormal", "normal", "two_point")


@dataclass(frozen=True)
class KnownDistribution:
    """A distribution whose quantile function is available in closed form."""

    kind: str
    params: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(float(v) for v in self.params))
        if self.kind not in _KINDS:
            raise ValueError(f"unknown distribution kind {self.kind!r}")
        p = self.params
        if self.kind == "uniform":
            if len(p) != 2 or not p[1] > p[0]:
                raise ValueError("uniform needs bounds low < high")
        elif self.kind == "exponential":
            if len(p) != 1 or not p[0] > 0:
                raise ValueError("exponential needs rate > 0")
        elif self.kind in ("lognormal", "normal"):
            if len(p) != 2 or not p[1] > 0:
                raise ValueError(f"{self.kind} needs sigma > 0")
        elif self.kind == "two_point":
            if len(p) != 3 or not p[0] < p[1] or not 0 < p[2] < 1:
                raise ValueError(
                    "two_point needs low < high and a low-probability in (0, 1)"
                )


def uniform(low: float, high: float) -> KnownDistribution:
    return KnownDistribution("uniform", (low, high))


def exponential(rate: float) -> KnownDistribution:
    return KnownDistribution("exponential", (rate,))


def lognormal(mu: float, sigma: float) -> KnownDistribution:
    return KnownDistribution("lognormal", (mu, sigma))


def normal(mu: float, sigma: float) -> KnownDistribution:
    return KnownDistribution("normal", (mu, sigma))


def two_point(low: float, high: float, low_prob: float) -> KnownDistribution:
    """Mass low_prob at ``low`` and the rest at ``high``."""
    return KnownDistribution("two_point", (low, high, low_prob))


def _quantile_array(dist: KnownDistribution, u: np.ndarray) -> np.ndarray:
    p = dist.params
    if dist.kind == "uniform":
        return p[0] + (p[1] - p[0]) * u
    if dist.kind == "exponential":
        return -np.log1p(-u) / p[0]
    if dist.kind == "normal":
        return p[0] + p[1] * ndtri(u)
    if dist.kind == "lognormal":
        return np.exp(p[0] + p[1] * ndtri(u))
    # two_point: left-continuous step, low for u <= low_prob
    return np.where(u <= p[2], p[0], p[1])


def true_quantile(dist: KnownDistribution, u: float) -> float:
    """Closed-form Q(u) for a level in the open interval (0, 1)."""
    u = float(u)
    if not 0.0 < u < 1.0:
        raise InvalidLevel(f"quantile level must be in (0, 1), got {u}")
    return float(_quantile_array(dist, np.asarray(u)))


def _check_interval(a: float, b: float):
    if not (0.0 <= a < b <= 1.0):
        raise InvalidInterval(f"need 0 <= a < b <= 1, got [{a}, {b}]")


def true_component(dist: KnownDistribution, a: float, b: float) -> float:
    """Population component: the average of Q over [a, b].

    Closed forms are used for every shipped distribution; adaptive
    quadrature (absolute tolerance 1e-10) is the fallback for kinds
    without one.
    """
    a, b = float(a), float(b)
    _check_interval(a, b)
    p = dist.params
    width = b - a
    if dist.kind == "uniform":
        return p[0] + (p[1] - p[0]) * (a + b) / 2.0
    if dist.kind == "exponential":
        # antiderivative of -log(1 - u) is (1-u)log(1-u) + u, limit 1 at u=1
        def g(t):
            return 1.0 if t == 1.0 else (1.0 - t) * math.log1p(-t) + t

        return (g(b) - g(a)) / (p[0] * width)
    if dist.kind == "normal":
        # integral of ndtri over [a, b] is pdf(ndtri(a)) - pdf(ndtri(b))
        def pdf_at(t):
            if t in (0.0, 1.0):
                return 0.0
            z = ndtri(t)
            return math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)

        return p[0] + p[1] * (pdf_at(a) - pdf_at(b)) / width
    if dist.kind == "lognormal":
        mu, sigma = p

        def cdf_shift(t):
            if t == 0.0:
                return 0.0
            if t == 1.0:
                return 1.0
            return float(ndtr(ndtri(t) - sigma))

        scale = math.exp(mu + 0.5 * sigma * sigma)
        return scale * (cdf_shift(b) - cdf_shift(a)) / width
    if dist.kind == "two_point":
        low, high, q = p
        low_len = min(b, q) - min(a, q)
        return (low * low_len + high * (width - low_len)) / width
    return component_by_quadrature(dist, a, b)


def component_by_quadrature(dist: KnownDistribution, a: float, b: float) -> float:
    """Average of Q over [a, b] by adaptive quadrature (abs tol 1e-10).

    The open-interval quantile domain needs endpoint care: integrable
    singularities at 0 and 1 (normal, lognormal, exponential tails) are
    handled by nudging the limits in by one ulp, which changes the
    integral by far less than the tolerance for any integrable Q.
    """
    a, b = float(a), float(b)
    _check_interval(a, b)
    lo = np.nextafter(0.0, 1.0) if a == 0.0 else a
    hi = np.nextafter(1.0, 0.0) if b == 1.0 else b
    breaks = None
    if dist.kind == "two_point" and lo < dist.params[2] < hi:
        breaks = [dist.params[2]]
    value, _ = quad(
        lambda u: _quantile_array(dist, np.asarray(u)),
        lo,
        hi,
        epsabs=1e-10,
        limit=500,
        points=breaks,
    )
    return value / (b - a)


def generate(dist: KnownDistribution, n: int, seed: int) -> Sample:
    """n inverse-transform draws, reproducible from the seed.

    Draw k is true_quantile(dist, u_k) for the k-th uniform variate of
    numpy's default generator seeded with ``seed``; exact zeros (possible
    since the generator produces [0, 1)) are redrawn.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    rng = np.random.default_rng(seed)
    u = rng.random(n)
    while True:
        zero = u == 0.0
        if not zero.any():
            break
        u[zero] = rng.random(int(zero.sum()))
    return Sample(_quantile_array(dist, u))
