"""Bootstrap standard errors and confidence intervals.

Resampling is by whole rows (outcome together with its covariates) with
replacement, so the regression case is a pairs bootstrap with no
assumption on error structure.

Reproducibility contract: replicate r, attempt t draws its resampling
indices from ``numpy.random.default_rng(SeedSequence(entropy=seed,
spawn_key=(r, t)))`` (PCG64 streams split by SeedSequence). Attempt 0 is
the normal draw; attempts 1..9 are redraws after a degenerate replicate
(rank-deficient resample or an all-zero component column). Every
replicate stream is therefore fixed by (seed, r, t) alone: results are
bitwise identical for any number of workers and any execution order.

Standard errors are sample standard deviations (ddof=1) over replicate
estimates; confidence intervals are percentile intervals by default,
with a normal approximation (point +/- z * se) behind ``ci_method``.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

from .cce import (
    ComponentCoefficients,
    component_coefficients,
    empirical_cce,
    midpoint_mesh,
    profile_components,
)
from .core import (
    CovariateProfile,
    Decomposition,
    ProportionGrid,
    Sample,
)
from .errors import (
    AllZeroComponents,
    DidNotConverge,
    DimensionMismatch,
    RankDeficient,
    TooManyDegenerateReplicates,
)
from .quantreg import fit_process

__all__ = [
    "BootstrapSpec",
    "EmpiricalTarget",
    "RegressionTarget",
    "InferenceReport",
    "bootstrap",
    "contribution_inference",
]


@dataclass(frozen=True)
class BootstrapSpec:
    """How many replicates, from which seed, at what confidence level."""

    replications: int
    seed: int
    confidence_level: float = 0.95

    def __post_init__(self):
        if int(self.replications) < 2:
            raise ValueError("need at least 2 bootstrap replications")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        if not 0.0 < float(self.confidence_level) < 1.0:
            raise ValueError("confidence level must be inside (0, 1)")
        object.__setattr__(self, "replications", int(self.replications))
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "confidence_level", float(self.confidence_level))


def _share_matrix(weights: np.ndarray, matrix: np.ndarray) -> np.ndarray:
    """Column-wise percent shares of weighted absolute components."""
    weighted = weights[:, None] * np.abs(matrix)
    totals = weighted.sum(axis=0)
    if np.any(totals == 0.0):
        raise AllZeroComponents("a column has all-zero components; shares undefined")
    return 100.0 * weighted / totals


@dataclass(frozen=True)
class EmpiricalTarget:
    """Estimator selector: exact empirical decomposition of the outcomes."""

    label: str = "Reference"

    def column_labels(self, sample: Sample) -> tuple[str, ...]:
        return (self.label,)

    def estimate_matrix(self, sample: Sample, grid: ProportionGrid) -> np.ndarray:
        return empirical_cce(sample, grid, label=self.label).components[:, None]

    def wrap_point(self, grid: ProportionGrid, matrix: np.ndarray, labels):
        return Decomposition(grid, matrix[:, 0], label=labels[0])


@dataclass(frozen=True)
class RegressionTarget:
    """Estimator selector: quantile-regression decomposition columns.

    Column 0 is the profile decomposition ("Reference"); when
    ``include_coefficients`` is set, one further column per non-intercept
    covariate carries its component coefficients. ``monotonize`` sorts
    the profile's predicted quantile path over the mesh before
    integrating; coefficient columns are never rearranged.
    """

    mesh_size: int = 1000
    profile: tuple[float, ...] | None = None
    labels: tuple[str, ...] | None = None
    include_coefficients: bool = True
    monotonize: bool = False

    def _profile_vector(self, p: int) -> np.ndarray:
        if self.profile is None:
            x = np.zeros(p)
            x[0] = 1.0
            return x
        x = np.asarray(self.profile, dtype=float)
        if x.size != p:
            raise DimensionMismatch(f"profile length {x.size} != {p} design columns")
        return x

    def column_labels(self, sample: Sample) -> tuple[str, ...]:
        if self.labels is not None:
            return self.labels
        p = sample.covariates.shape[1]
        names = sample.covariate_names or tuple(f"x{k}" for k in range(p))
        out = ["Reference"]
        if self.include_coefficients:
            out.extend(names[1:])
        return tuple(out)

    def estimate_matrix(self, sample: Sample, grid: ProportionGrid) -> np.ndarray:
        if sample.covariates is None:
            raise DimensionMismatch("regression target needs a design matrix")
        X = sample.covariates
        process = fit_process(X, sample.values, midpoint_mesh(self.mesh_size))
        x = self._profile_vector(X.shape[1])
        ref = profile_components(
            process, grid, CovariateProfile(x), monotonize=self.monotonize
        )
        cols = [ref.components]
        if self.include_coefficients and X.shape[1] > 1:
            gamma = component_coefficients(process, grid).gamma
            cols.extend(gamma[:, k] for k in range(1, X.shape[1]))
        return np.column_stack(cols)

    def wrap_point(self, grid: ProportionGrid, matrix: np.ndarray, labels):
        return ComponentCoefficients(grid, matrix, tuple(labels))


@dataclass(frozen=True)
class InferenceReport:
    """Point estimates with bootstrap uncertainty, column per group.

    All arrays carry one column per display group (a single column for
    the empirical estimator). ``point`` is the wrapped full-sample
    estimate; ``point_matrix`` the same values as a plain array.
    Replicate-level arrays are retained so derived statistics can be
    recomputed without re-running the bootstrap.
    """

    point: Decomposition | ComponentCoefficients
    grid: ProportionGrid
    column_labels: tuple[str, ...]
    point_matrix: np.ndarray
    se: np.ndarray
    ci_lower: np.ndarray
    ci_upper: np.ndarray
    contribution_point: np.ndarray
    contribution_se: np.ndarray
    mean_point: np.ndarray
    mean_se: np.ndarray
    mean_ci_lower: np.ndarray
    mean_ci_upper: np.ndarray
    spec: BootstrapSpec
    ci_method: str
    replicate_components: np.ndarray = field(repr=False, default=None)
    replicate_shares: np.ndarray = field(repr=False, default=None)
    replicate_means: np.ndarray = field(repr=False, default=None)

    def to_json(self) -> str:
        """Canonical full-precision JSON (replicate arrays excluded)."""

        def arr(a):
            return np.asarray(a).tolist()

        payload = {
            "grid_points": arr(self.grid.points),
            "column_labels": list(self.column_labels),
            "point": arr(self.point_matrix),
            "se": arr(self.se),
            "ci_lower": arr(self.ci_lower),
            "ci_upper": arr(self.ci_upper),
            "contribution_point": arr(self.contribution_point),
            "contribution_se": arr(self.contribution_se),
            "mean_point": arr(self.mean_point),
            "mean_se": arr(self.mean_se),
            "mean_ci_lower": arr(self.mean_ci_lower),
            "mean_ci_upper": arr(self.mean_ci_upper),
            "bootstrap": {
                "replications": self.spec.replications,
                "seed": self.spec.seed,
                "confidence_level": self.spec.confidence_level,
                "ci_method": self.ci_method,
            },
        }
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))


_DEGENERATE = (RankDeficient, AllZeroComponents, DidNotConverge)
_MAX_REDRAWS = 10


def _replicate(sample, grid, estimator, weights, seed, r):
    n = sample.n
    for attempt in range(_MAX_REDRAWS):
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=seed, spawn_key=(r, attempt))
        )
        idx = rng.integers(0, n, size=n)
        resample = Sample(
            sample.values[idx],
            None if sample.covariates is None else sample.covariates[idx],
            sample.covariate_names,
        )
        try:
            matrix = estimator.estimate_matrix(resample, grid)
            return matrix, _share_matrix(weights, matrix)
        except _DEGENERATE:
            continue
    raise TooManyDegenerateReplicates(
        f"replicate {r} failed {_MAX_REDRAWS} times; sample too degenerate"
    )


def bootstrap(
    sample: Sample,
    grid: ProportionGrid,
    estimator,
    spec: BootstrapSpec,
    workers: int = 1,
    ci_method: str = "percentile",
) -> InferenceReport:
    """Nonparametric bootstrap of the full estimation pipeline.

    Draws ``spec.replications`` row resamples, re-estimates each, and
    summarizes: se (ddof=1), confidence intervals at
    ``spec.confidence_level`` (percentile by default, ``ci_method=
    "normal"`` for point +/- z*se), plus contribution-share and
    weighted-mean uncertainty. Deterministic for fixed (data, grid,
    spec): worker count only changes scheduling, never results.
    """
    if ci_method not in ("percentile", "normal"):
        raise ValueError(f"unknown ci_method {ci_method!r}")
    labels = estimator.column_labels(sample)
    weights = grid.weights
    point = estimator.estimate_matrix(sample, grid)
    share_point = _share_matrix(weights, point)
    B = spec.replications
    reps = np.empty((B,) + point.shape)
    shares = np.empty_like(reps)

    def run(r):
        reps[r], shares[r] = _replicate(sample, grid, estimator, weights, spec.seed, r)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            # materialize to surface worker exceptions
            list(pool.map(run, range(B)))
    else:
        for r in range(B):
            run(r)

    means = np.einsum("j,bjc->bc", weights, reps)
    se = reps.std(axis=0, ddof=1)
    mean_se = means.std(axis=0, ddof=1)
    contribution_se = shares.std(axis=0, ddof=1)
    level = spec.confidence_level
    if ci_method == "percentile":
        lo_q, hi_q = 50.0 * (1.0 - level), 50.0 * (1.0 + level)
        ci_lower, ci_upper = np.percentile(reps, [lo_q, hi_q], axis=0)
        mean_lo, mean_hi = np.percentile(means, [lo_q, hi_q], axis=0)
    else:
        z = float(ndtri(0.5 * (1.0 + level)))
        ci_lower, ci_upper = point - z * se, point + z * se
        mean_point_vec = weights @ point
        mean_lo = mean_point_vec - z * mean_se
        mean_hi = mean_point_vec + z * mean_se
    return InferenceReport(
        point=estimator.wrap_point(grid, point, labels),
        grid=grid,
        column_labels=tuple(labels),
        point_matrix=point,
        se=se,
        ci_lower=ci_lower,
        ci_upper=ci_upper,
        contribution_point=share_point,
        contribution_se=contribution_se,
        mean_point=weights @ point,
        mean_se=mean_se,
        mean_ci_lower=mean_lo,
        mean_ci_upper=mean_hi,
        spec=spec,
        ci_method=ci_method,
        replicate_components=reps,
        replicate_shares=shares,
        replicate_means=means,
    )


def contribution_inference(
    sample: Sample,
    grid: ProportionGrid,
    estimator,
    spec: BootstrapSpec,
    workers: int = 1,
) -> np.ndarray:
    """Bootstrap se of the contribution shares (percent), per interval.

    Shares are recomputed inside every replicate from that replicate's
    decomposition; an all-zero replicate counts as degenerate and is
    redrawn like any other failure. Runs the same engine as
    :func:`bootstrap` and returns its ``contribution_se`` block.
    """
    return bootstrap(sample, grid, estimator, spec, workers=workers).contribution_se
