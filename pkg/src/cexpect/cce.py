"""Compound-expectation estimators.

Two routes to the same object:

* ``empirical_cce`` integrates the empirical quantile function exactly,
  interval by interval. The left-continuous step convention (value k
  covers the proportion block ((k-1)/n, k/n]) makes the weighted sum of
  components reproduce the sample mean to float precision.
* ``component_coefficients`` integrates a fitted quantile-regression
  coefficient process over each grid interval with the composite
  midpoint rule on a fine level mesh, giving per-covariate component
  coefficients; ``cce_for_profile`` contracts them with a covariate
  profile.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import CovariateProfile, Decomposition, ProportionGrid, Sample
from .errors import DimensionMismatch, InvalidInterval, MeshGridIncompatible
from .quantreg import CoefficientProcess

__all__ = [
    "ComponentCoefficients",
    "empirical_quantile_integral",
    "empirical_cce",
    "midpoint_mesh",
    "component_coefficients",
    "cce_for_profile",
    "profile_components",
]


@dataclass(frozen=True)
class ComponentCoefficients:
    """Per-interval covariate effects: gamma[j, k] is the average effect
    of covariate k over grid interval j. A profile's decomposition is
    the matrix-vector product gamma @ x."""

    grid: ProportionGrid
    gamma: np.ndarray
    covariate_names: tuple[str, ...]

    def __post_init__(self):
        G = np.array(self.gamma, dtype=float)
        G.setflags(write=False)
        if G.ndim != 2 or G.shape[0] != self.grid.intervals:
            raise DimensionMismatch(
                f"gamma must have {self.grid.intervals} rows, got shape {G.shape}"
            )
        if not np.all(np.isfinite(G)):
            raise ValueError("gamma entries must be finite")
        names = tuple(str(s) for s in self.covariate_names)
        if len(names) != G.shape[1]:
            raise DimensionMismatch(
                f"{len(names)} covariate names for {G.shape[1]} gamma columns"
            )
        object.__setattr__(self, "gamma", G)
        object.__setattr__(self, "covariate_names", names)

    @property
    def p(self) -> int:
        return self.gamma.shape[1]


def empirical_quantile_integral(sample: Sample, a: float, b: float) -> float:
    """Average of the empirical quantile function over [a, b], exactly.

    Sorted value k covers the proportion block ((k-1)/n, k/n]; each
    block contributes its value weighted by the exact overlap length
    with [a, b]. Covariates, if present, are ignored here.
    """
    a, b = float(a), float(b)
    if not (0.0 <= a < b <= 1.0):
        raise InvalidInterval(f"need 0 <= a < b <= 1, got [{a}, {b}]")
    ys = np.sort(sample.values)
    edges = np.arange(ys.size + 1, dtype=float) / ys.size
    overlap = np.clip(np.minimum(b, edges[1:]) - np.maximum(a, edges[:-1]), 0.0, None)
    return float(ys @ overlap) / (b - a)


def empirical_cce(sample: Sample, grid: ProportionGrid, label: str = "Reference") -> Decomposition:
    """Exact empirical decomposition of the sample mean over the grid."""
    ys = np.sort(sample.values)
    edges = np.arange(ys.size + 1, dtype=float) / ys.size
    comps = np.empty(grid.intervals)
    for j in range(grid.intervals):
        a, b = grid.points[j], grid.points[j + 1]
        overlap = np.clip(
            np.minimum(b, edges[1:]) - np.maximum(a, edges[:-1]), 0.0, None
        )
        comps[j] = float(ys @ overlap) / (b - a)
    return Decomposition(grid, comps, label=label)


def midpoint_mesh(size: int) -> np.ndarray:
    """The size midpoint levels (k - 0.5)/size, k = 1..size."""
    if size < 1:
        raise ValueError("mesh size must be at least 1")
    return (np.arange(1, size + 1) - 0.5) / float(size)


def _interval_index(grid: ProportionGrid, levels: np.ndarray) -> np.ndarray:
    # level u belongs to interval j when points[j] < u <= points[j+1]
    idx = np.searchsorted(grid.points, levels, side="left") - 1
    counts = np.bincount(idx, minlength=grid.intervals)
    if np.any(counts == 0):
        empty = int(np.argmin(counts))
        raise MeshGridIncompatible(
            f"grid interval {empty} contains no mesh level; enlarge the mesh "
            "or coarsen the grid"
        )
    return idx


def _interval_means(grid: ProportionGrid, levels: np.ndarray, rows: np.ndarray):
    idx = _interval_index(grid, levels)
    counts = np.bincount(idx, minlength=grid.intervals).astype(float)
    flat = rows if rows.ndim == 2 else rows[:, None]
    acc = np.zeros((grid.intervals, flat.shape[1]))
    np.add.at(acc, idx, flat)
    means = acc / counts[:, None]
    return means if rows.ndim == 2 else means[:, 0]


def component_coefficients(
    process: CoefficientProcess,
    grid: ProportionGrid,
    covariate_names: tuple[str, ...] | None = None,
) -> ComponentCoefficients:
    """Average the coefficient process over each grid interval.

    Composite midpoint rule: gamma row j is the plain average of the
    coefficient rows at mesh levels inside (points[j], points[j+1]].
    The mesh should put an integer number of levels in every interval
    (a midpoint mesh whose size is a multiple of the grid denominators);
    an interval with no levels at all is an error.
    """
    gamma = _interval_means(grid, process.levels, process.betas)
    if covariate_names is None:
        covariate_names = tuple(f"b{k}" for k in range(process.p))
    return ComponentCoefficients(grid, gamma, tuple(covariate_names))


def cce_for_profile(coeffs: ComponentCoefficients, x) -> Decomposition:
    """Decomposition for one covariate profile: components gamma @ x."""
    if isinstance(x, CovariateProfile):
        xv, label = x.values, x.label
    else:
        xv, label = np.asarray(x, dtype=float), "Reference"
    if xv.shape != (coeffs.p,):
        raise DimensionMismatch(
            f"profile length {xv.size} != {coeffs.p} coefficient columns"
        )
    return Decomposition(coeffs.grid, coeffs.gamma @ xv, label=label)


def profile_components(
    process: CoefficientProcess,
    grid: ProportionGrid,
    x,
    monotonize: bool = False,
) -> Decomposition:
    """Decomposition of the predicted quantile path for one profile.

    Without rearrangement this equals cce_for_profile applied to
    component_coefficients (averaging commutes with the dot product).
    With ``monotonize`` the predicted values are sorted over the mesh
    before integrating, which repairs quantile crossing for this profile
    while leaving the weighted overall mean unchanged.
    """
    if isinstance(x, CovariateProfile):
        xv, label = x.values, x.label
    else:
        xv, label = np.asarray(x, dtype=float), "Reference"
    if xv.shape != (process.p,):
        raise DimensionMismatch(
            f"profile length {xv.size} != {process.p} coefficients"
        )
    path = process.betas @ xv
    if monotonize:
        path = np.sort(path)
    comps = _interval_means(grid, process.levels, path)
    return Decomposition(grid, comps, label=label)
