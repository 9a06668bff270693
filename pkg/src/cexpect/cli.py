"""Command-line front end: ingest a delimited table, estimate, write artifacts.

One invocation produces, in the output directory:

* ``components.txt`` / ``contributions.txt`` - display tables (3
  significant figures, bootstrap se in parentheses, starred floor for
  tiny ses)
* ``components.delim`` / ``contributions.delim`` - the same results at
  full precision, tab separated
* ``plotdata.delim`` - long-format point and confidence-interval data,
  one row per display group and grid interval
* ``results.json`` - structured full-precision results
* ``run_manifest`` - JSON record of inputs, resolved settings, package
  versions, row rejections, and stage timings

``--format`` selects the artifact families (text, delim, structured, or
all); the manifest is always written. Estimation artifacts are
deterministic for a fixed config and seed; the manifest is not (it
carries wall-clock timings).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .core import ProportionGrid, Sample, validate_grid
from .errors import (
    CexpectError,
    DimensionMismatch,
    EmptyAfterFiltering,
    ParseError,
)
from .inference import (
    BootstrapSpec,
    EmpiricalTarget,
    RegressionTarget,
    _share_matrix,
    bootstrap,
)
from .tables import (
    components_delim,
    contributions_delim,
    interval_labels,
    plotdata_delim,
    render_components_text,
    render_contributions_text,
)

__all__ = ["RunConfig", "ingest", "parse_grid", "run_fit", "run_empirical", "main"]

_SNIFF_DELIMITERS = (",", ";", "\t")


@dataclass(frozen=True)
class RunConfig:
    """Resolved settings for one estimation run."""

    data: str
    response: str
    covariates: tuple[str, ...] = ()
    profile: tuple[float, ...] | None = None
    grid: ProportionGrid = field(default_factory=lambda: validate_grid(np.arange(11) / 10))
    mesh: int = 1000
    bootstrap: int = 200
    seed: int = 0
    level: float = 0.95
    out: str = "."
    format: str = "all"
    empirical: bool = False
    monotonize: bool = False
    normal_ci: bool = False
    delimiter: str | None = None
    workers: int = 1

    def __post_init__(self):
        if self.format not in ("text", "delim", "structured", "all"):
            raise ValueError(f"unknown format {self.format!r}")
        if self.mesh < 1:
            raise ValueError("mesh size must be positive")
        if self.bootstrap == 1 or self.bootstrap < 0:
            raise ValueError("bootstrap replications must be 0 (disabled) or >= 2")
        if not 0.0 < self.level < 1.0:
            raise ValueError("confidence level must be inside (0, 1)")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")


def parse_grid(spec: str) -> ProportionGrid:
    """Grid from a shorthand name or an explicit comma list of proportions."""
    text = spec.strip().lower()
    if text == "deciles":
        return validate_grid(np.arange(11) / 10)
    if text == "quartiles":
        return validate_grid([0.0, 0.25, 0.5, 0.75, 1.0])
    try:
        points = [float(tok) for tok in spec.split(",")]
    except ValueError as e:
        raise ValueError(f"cannot parse grid spec {spec!r}: {e}") from None
    return validate_grid(points)


def _sniff_delimiter(header_line: str, override: str | None) -> str:
    if override:
        return override
    counts = {d: header_line.count(d) for d in _SNIFF_DELIMITERS}
    best = max(counts, key=counts.get)
    # a single-column file has no delimiter at all; comma is harmless then
    return best if counts[best] > 0 else ","


def ingest(
    path,
    response: str,
    covariates=(),
    delimiter: str | None = None,
    report: list | None = None,
) -> Sample:
    """Read a delimited text table into a Sample.

    Rows with a missing or non-numeric value in any used column are
    excluded; each exclusion is appended to ``report`` (when given) as a
    dict with the 1-based data row number, column name, and reason.
    The design matrix gets an intercept column prepended when covariates
    are requested.
    """
    covariates = tuple(covariates)
    with open(path, encoding="utf-8", newline="") as fh:
        text = fh.read()
    first_line = text.split("\n", 1)[0]
    delim = _sniff_delimiter(first_line, delimiter)
    rows = list(csv.reader(io.StringIO(text), delimiter=delim))
    rows = [r for r in rows if any(cell.strip() for cell in r)]
    if not rows:
        raise ParseError("input file has no header row", row=0)
    header = [h.strip() for h in rows[0]]
    for name in (response, *covariates):
        if name not in header:
            raise ParseError(
                f"column {name!r} not found in header {header}", row=0, column=name
            )
    used = [(response, header.index(response))]
    used += [(name, header.index(name)) for name in covariates]

    kept_values: list[float] = []
    kept_covs: list[list[float]] = []
    for i, raw in enumerate(rows[1:], start=1):
        parsed: list[float] = []
        bad = None
        for name, col in used:
            cell = raw[col].strip() if col < len(raw) else ""
            if not cell:
                bad = (name, "missing value")
                break
            try:
                v = float(cell)
            except ValueError:
                bad = (name, f"non-numeric value {cell!r}")
                break
            if not np.isfinite(v):
                bad = (name, f"non-finite value {cell!r}")
                break
            parsed.append(v)
        if bad is not None:
            if report is not None:
                report.append({"row": i, "column": bad[0], "reason": bad[1]})
            continue
        kept_values.append(parsed[0])
        kept_covs.append(parsed[1:])
    if not kept_values:
        raise EmptyAfterFiltering("every data row was rejected")
    values = np.asarray(kept_values)
    if not covariates:
        return Sample(values)
    X = np.column_stack([np.ones(values.size), np.asarray(kept_covs)])
    return Sample(values, X, ("intercept", *covariates))


def _display_labels(sample: Sample) -> tuple[str, ...]:
    """Reference plus one label per non-intercept covariate.

    Indicator covariates (values in {0, 1}, both present) are labeled as
    a contrast against their baseline level.
    """
    labels = ["Reference"]
    if sample.covariates is not None:
        names = sample.covariate_names
        for k in range(1, sample.covariates.shape[1]):
            col = sample.covariates[:, k]
            unique = np.unique(col)
            name = names[k]
            if unique.size == 2 and set(unique) <= {0.0, 1.0}:
                labels.append(f"{name} to baseline")
            else:
                labels.append(name)
    return tuple(labels)


def _resolve_profile(config: RunConfig, p: int) -> tuple[float, ...]:
    if config.profile is None:
        return tuple([1.0] + [0.0] * (p - 1))
    prof = tuple(float(v) for v in config.profile)
    if len(prof) == p - 1:
        return (1.0, *prof)
    if len(prof) == p:
        return prof
    raise DimensionMismatch(
        f"profile needs {p - 1} covariate values (or {p} including the "
        f"intercept), got {len(prof)}"
    )


def _versions() -> dict:
    import scipy

    return {
        "cexpect": __version__,
        "python": sys.version.split()[0],
        "numpy": np.__version__,
        "scipy": scipy.__version__,
    }


def _config_dict(config: RunConfig) -> dict:
    return {
        "data": config.data,
        "response": config.response,
        "covariates": list(config.covariates),
        "profile": None if config.profile is None else list(config.profile),
        "grid": [float(v) for v in config.grid.points],
        "mesh": config.mesh,
        "bootstrap": config.bootstrap,
        "seed": config.seed,
        "level": config.level,
        "out": config.out,
        "format": config.format,
        "empirical": config.empirical,
        "monotonize": config.monotonize,
        "normal_ci": config.normal_ci,
        "delimiter": config.delimiter,
        "workers": config.workers,
    }


def _run(config: RunConfig, command: str) -> list[Path]:
    timings: dict[str, float] = {}
    rejects: list[dict] = []
    t0 = time.perf_counter()

    sample = ingest(
        config.data,
        config.response,
        config.covariates,
        config.delimiter,
        rejects,
    )
    for r in rejects:
        print(
            f"warning: row {r['row']} excluded ({r['reason']} in column "
            f"{r['column']!r})",
            file=sys.stderr,
        )
    timings["ingest_s"] = time.perf_counter() - t0

    grid = config.grid
    if command == "empirical":
        target = EmpiricalTarget()
    else:
        if sample.covariates is None:
            # intercept-only regression: design is a lone constant column
            sample = Sample(sample.values, np.ones((sample.n, 1)), ("intercept",))
        p = sample.covariates.shape[1]
        target = RegressionTarget(
            mesh_size=config.mesh,
            profile=_resolve_profile(config, p),
            labels=_display_labels(sample),
            monotonize=config.monotonize,
        )
    labels = target.column_labels(sample)

    t1 = time.perf_counter()
    report = None
    if config.bootstrap >= 2:
        spec = BootstrapSpec(config.bootstrap, config.seed, config.level)
        report = bootstrap(
            sample,
            grid,
            target,
            spec,
            workers=config.workers,
            ci_method="normal" if config.normal_ci else "percentile",
        )
        matrix = report.point_matrix
        shares = report.contribution_point
    else:
        spec = None
        matrix = target.estimate_matrix(sample, grid)
        shares = _share_matrix(grid.weights, matrix)
    mean_vec = grid.weights @ matrix
    timings["estimate_s"] = time.perf_counter() - t1

    t2 = time.perf_counter()
    outdir = Path(config.out)
    outdir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    def emit(name: str, content: str):
        path = outdir / name
        path.write_text(content, encoding="utf-8")
        written.append(path)

    ci_method = "normal" if config.normal_ci else "percentile"
    if config.format in ("text", "all"):
        emit(
            "components.txt",
            render_components_text(
                grid,
                labels,
                matrix,
                mean_vec,
                se=None if report is None else report.se,
                mean_se=None if report is None else report.mean_se,
                spec=spec,
                ci_method=ci_method,
            ),
        )
        emit(
            "contributions.txt",
            render_contributions_text(
                grid,
                labels,
                shares,
                share_se=None if report is None else report.contribution_se,
                spec=spec,
                ci_method=ci_method,
            ),
        )
    if config.format in ("delim", "all"):
        if report is None:
            emit("components.delim", components_delim(grid, labels, matrix, mean_vec))
            emit("contributions.delim", contributions_delim(grid, labels, shares))
            emit("plotdata.delim", plotdata_delim(grid, labels, matrix))
        else:
            emit(
                "components.delim",
                components_delim(
                    grid,
                    labels,
                    matrix,
                    mean_vec,
                    se=report.se,
                    ci_lower=report.ci_lower,
                    ci_upper=report.ci_upper,
                    mean_se=report.mean_se,
                    mean_ci_lower=report.mean_ci_lower,
                    mean_ci_upper=report.mean_ci_upper,
                ),
            )
            emit(
                "contributions.delim",
                contributions_delim(
                    grid, labels, shares, share_se=report.contribution_se
                ),
            )
            emit(
                "plotdata.delim",
                plotdata_delim(grid, labels, matrix, report.ci_lower, report.ci_upper),
            )
    if config.format in ("structured", "all"):
        payload = {
            "command": command,
            "config": _config_dict(config),
            "interval_labels": interval_labels(grid),
            "column_labels": list(labels),
            "components": matrix.tolist(),
            "mean": mean_vec.tolist(),
            "contribution_shares": shares.tolist(),
            "version": __version__,
        }
        if report is not None:
            payload["bootstrap"] = json.loads(report.to_json())
        emit("results.json", json.dumps(payload, indent=2, sort_keys=True) + "\n")
    timings["write_s"] = time.perf_counter() - t2
    timings["total_s"] = time.perf_counter() - t0

    manifest = {
        "command": command,
        "config": _config_dict(config),
        "rows_used": sample.n,
        "rows_rejected": rejects,
        "column_labels": list(labels),
        "outputs": [p.name for p in written],
        "versions": _versions(),
        "timings_s": timings,
    }
    mpath = outdir / "run_manifest"
    mpath.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    written.append(mpath)
    return written


def run_fit(config: RunConfig) -> list[Path]:
    """Quantile-regression decomposition run; writes artifacts, returns paths."""
    return _run(config, "fit")


def run_empirical(config: RunConfig) -> list[Path]:
    """Exact empirical decomposition run (no covariates allowed)."""
    if config.covariates:
        raise ValueError("empirical mode takes no covariates")
    return _run(config, "empirical")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="cexpect",
        description=(
            "Decompose an outcome mean into per-population-fraction "
            "components, optionally conditional on covariates, with "
            "bootstrap inference."
        ),
    )
    ap.add_argument("--data", help="input table (delimited text with header)")
    ap.add_argument("--response", help="outcome column name")
    ap.add_argument(
        "--covariates",
        help="comma-separated covariate column names (omit for intercept only)",
    )
    ap.add_argument(
        "--profile",
        help=(
            "comma-separated reference covariate values; either one per "
            "covariate or one per design column including the intercept"
        ),
    )
    ap.add_argument(
        "--grid",
        help='grid spec: "deciles", "quartiles", or explicit "0,0.1,...,1"',
    )
    ap.add_argument("--mesh", type=int, help="quantile mesh size (default 1000)")
    ap.add_argument(
        "--bootstrap",
        type=int,
        help="bootstrap replications; 0 disables inference (default 200)",
    )
    ap.add_argument("--seed", type=int, help="bootstrap seed (default 0)")
    ap.add_argument("--level", type=float, help="confidence level (default 0.95)")
    ap.add_argument("--out", help="output directory (default .)")
    ap.add_argument(
        "--format",
        choices=["text", "delim", "structured", "all"],
        help="artifact families to write (default all)",
    )
    ap.add_argument(
        "--empirical",
        action="store_true",
        default=None,
        help="exact empirical decomposition instead of a regression fit",
    )
    ap.add_argument(
        "--monotonize",
        action="store_true",
        default=None,
        help="sort the reference profile's predicted quantile path before integrating",
    )
    ap.add_argument(
        "--normal-ci",
        action="store_true",
        default=None,
        help="normal-approximation intervals instead of percentile intervals",
    )
    ap.add_argument(
        "--delimiter",
        help="input field delimiter (default: auto-detect among comma/semicolon/tab)",
    )
    ap.add_argument("--workers", type=int, help="parallel bootstrap workers (default 1)")
    ap.add_argument(
        "--config",
        help="JSON file of settings; keys mirror flag names, flags win",
    )
    ap.add_argument("--version", action="version", version=f"cexpect {__version__}")
    return ap


def _merge_config(args: argparse.Namespace) -> RunConfig:
    file_cfg = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            file_cfg = json.load(fh)
        if not isinstance(file_cfg, dict):
            raise ValueError("config file must hold a JSON object")
        unknown = set(file_cfg) - {
            "data", "response", "covariates", "profile", "grid", "mesh",
            "bootstrap", "seed", "level", "out", "format", "empirical",
            "monotonize", "normal_ci", "delimiter", "workers",
        }
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")

    def pick(flag, key=None, default=None):
        v = getattr(args, flag)
        if v is not None:
            return v
        return file_cfg.get(key or flag, default)

    def as_tuple(v, cast):
        if v is None:
            return None
        if isinstance(v, str):
            v = [tok for tok in v.split(",") if tok.strip()]
        return tuple(cast(tok) for tok in v)

    data = pick("data")
    response = pick("response")
    if not data or not response:
        raise ValueError("--data and --response are required")
    grid_spec = pick("grid", default="deciles")
    grid = parse_grid(grid_spec) if isinstance(grid_spec, str) else validate_grid(grid_spec)
    return RunConfig(
        data=str(data),
        response=str(response),
        covariates=as_tuple(pick("covariates"), str) or (),
        profile=as_tuple(pick("profile"), float),
        grid=grid,
        mesh=int(pick("mesh", default=1000)),
        bootstrap=int(pick("bootstrap", default=200)),
        seed=int(pick("seed", default=0)),
        level=float(pick("level", default=0.95)),
        out=str(pick("out", default=".")),
        format=str(pick("format", default="all")),
        empirical=bool(pick("empirical", default=False)),
        monotonize=bool(pick("monotonize", default=False)),
        normal_ci=bool(pick("normal_ci", default=False)),
        delimiter=pick("delimiter"),
        workers=int(pick("workers", default=1)),
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _merge_config(args)
        paths = run_empirical(config) if config.empirical else run_fit(config)
    except (CexpectError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    for p in paths:
        print(p)
    return 0


if __name__ == "__main__":
    sys.exit(main())
