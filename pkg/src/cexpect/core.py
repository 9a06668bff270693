"""Core domain types and the algebra shared by every estimator.

A decomposition splits a mean into per-interval components: the grid
fixes cut points 0 = l_0 < ... < l_J = 1 over population proportions,
and component j is the average outcome over the slice of the population
between proportions l_{j-1} and l_j (ranked by outcome). The weighted
sum of components with the interval widths recovers the overall mean.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    AllZeroComponents,
    DimensionMismatch,
    GridMismatch,
    NotCoveringUnit,
    NotStrictlyIncreasing,
    TooFewPoints,
)

__all__ = [
    "ProportionGrid",
    "Sample",
    "Decomposition",
    "ContributionVector",
    "CovariateProfile",
    "validate_grid",
    "aggregate_mean",
    "contributions",
    "contrast",
]


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class ProportionGrid:
    """Ordered proportions 0 = points[0] < ... < points[-1] = 1.

    Construct through :func:`validate_grid`; the constructor itself
    re-checks the invariants so a grid object is always well formed.
    """

    points: np.ndarray

    def __post_init__(self):
        pts = _readonly(self.points)
        if pts.ndim != 1 or pts.size < 2:
            raise TooFewPoints("a grid needs at least the two endpoints 0 and 1")
        if not np.all(np.isfinite(pts)):
            raise ValueError("grid points must be finite")
        if pts[0] != 0.0 or pts[-1] != 1.0:
            raise NotCoveringUnit(
                f"grid must start at 0 and end at 1, got [{pts[0]}, {pts[-1]}]"
            )
        if not np.all(np.diff(pts) > 0):
            raise NotStrictlyIncreasing("grid points must be strictly increasing")
        object.__setattr__(self, "points", pts)

    @property
    def weights(self) -> np.ndarray:
        """Interval widths w_j = points[j] - points[j-1]; they sum to 1."""
        return np.diff(self.points)

    @property
    def intervals(self) -> int:
        return self.points.size - 1

    def __eq__(self, other):
        if not isinstance(other, ProportionGrid):
            return NotImplemented
        return np.array_equal(self.points, other.points)

    def __hash__(self):
        return hash(self.points.tobytes())


def validate_grid(raw_points) -> ProportionGrid:
    """Validate raw cut points and return a grid with cached weights.

    Raises NotCoveringUnit, NotStrictlyIncreasing or TooFewPoints when
    the points do not partition [0, 1].
    """
    return ProportionGrid(np.asarray(raw_points, dtype=float))


@dataclass(frozen=True)
class Sample:
    """Observed outcomes, optionally with a design matrix.

    ``covariates`` (when present) is the full n x p design including any
    intercept column; full column rank is checked at fit time, not here.
    ``covariate_names`` is display metadata and never affects numerics.
    """

    values: np.ndarray
    covariates: np.ndarray | None = None
    covariate_names: tuple[str, ...] | None = None

    def __post_init__(self):
        v = _readonly(self.values)
        if v.ndim != 1 or v.size < 1:
            raise DimensionMismatch("sample values must be a nonempty 1-D array")
        if not np.all(np.isfinite(v)):
            raise ValueError("sample values must be finite")
        object.__setattr__(self, "values", v)
        if self.covariates is not None:
            X = _readonly(self.covariates)
            if X.ndim != 2 or X.shape[0] != v.size:
                raise DimensionMismatch(
                    f"covariate matrix must be {v.size} x p, got shape {X.shape}"
                )
            # rank and p <= n are fit-time checks, not container invariants
            if not np.all(np.isfinite(X)):
                raise ValueError("covariates must be finite")
            object.__setattr__(self, "covariates", X)
            if self.covariate_names is not None:
                names = tuple(str(s) for s in self.covariate_names)
                if len(names) != X.shape[1]:
                    raise DimensionMismatch(
                        f"{len(names)} covariate names for {X.shape[1]} columns"
                    )
                object.__setattr__(self, "covariate_names", names)

    @property
    def n(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class Decomposition:
    """Per-interval component values on a grid, in outcome units."""

    grid: ProportionGrid
    components: np.ndarray
    label: str = ""

    def __post_init__(self):
        c = _readonly(self.components)
        if c.ndim != 1 or c.size != self.grid.intervals:
            raise DimensionMismatch(
                f"expected {self.grid.intervals} components, got {c.size}"
            )
        if not np.all(np.isfinite(c)):
            raise ValueError("components must be finite")
        object.__setattr__(self, "components", c)


@dataclass(frozen=True)
class ContributionVector:
    """Percent share of the total mean magnitude per interval."""

    grid: ProportionGrid
    shares: np.ndarray

    def __post_init__(self):
        s = _readonly(self.shares)
        if s.ndim != 1 or s.size != self.grid.intervals:
            raise DimensionMismatch(
                f"expected {self.grid.intervals} shares, got {s.size}"
            )
        if np.any(s < 0):
            raise ValueError("shares must be nonnegative")
        if abs(float(s.sum()) - 100.0) > 1e-9:
            raise ValueError(f"shares must sum to 100, got {s.sum()!r}")
        object.__setattr__(self, "shares", s)


@dataclass(frozen=True)
class CovariateProfile:
    """A covariate vector x (including the intercept slot) to evaluate at."""

    values: np.ndarray
    label: str = "Reference"

    def __post_init__(self):
        v = _readonly(self.values)
        if v.ndim != 1 or v.size < 1:
            raise DimensionMismatch("profile must be a nonempty 1-D vector")
        if not np.all(np.isfinite(v)):
            raise ValueError("profile entries must be finite")
        object.__setattr__(self, "values", v)

    @property
    def p(self) -> int:
        return self.values.size


def aggregate_mean(d: Decomposition) -> float:
    """Weight-combine components back into the overall mean: sum_j w_j c_j."""
    return float(d.grid.weights @ d.components)


def contributions(d: Decomposition) -> ContributionVector:
    """Percent contribution of each interval to the total mean magnitude.

    shares_j = 100 * w_j |c_j| / sum_k w_k |c_k|. Absolute values keep
    shares nonnegative when some components are negative (mixed-sign
    outcomes such as weight change), at the price that the normalizer is
    the mean of |outcome| rather than the mean itself.
    """
    weighted = d.grid.weights * np.abs(d.components)
    total = float(weighted.sum())
    if total == 0.0:
        raise AllZeroComponents("all components are zero; shares are undefined")
    return ContributionVector(d.grid, 100.0 * weighted / total)


def contrast(a: Decomposition, b: Decomposition) -> Decomposition:
    """Component-wise difference a - b of two decompositions on one grid."""
    if a.grid != b.grid:
        raise GridMismatch("decompositions live on different grids")
    return Decomposition(
        a.grid, a.components - b.components, label=f"{a.label} to {b.label}"
    )
