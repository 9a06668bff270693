"""Rendering of estimation results as display tables and machine files.

Display tables round to 3 significant figures (2-decimal standard
errors) purely for presentation; the delimiter-separated files carry
full precision (shortest round-trip decimal), so re-ingesting them and
re-rendering reproduces the display exactly. Tiny-but-nonzero standard
errors are floored at the last displayed digit and starred, with a
footnote, instead of printing a misleading 0.00.
"""

from __future__ import annotations

import numpy as np

from .core import ProportionGrid

__all__ = [
    "format_estimate",
    "format_se",
    "interval_labels",
    "render_components_text",
    "render_contributions_text",
    "components_delim",
    "contributions_delim",
    "plotdata_delim",
]

_STAR_NOTE = "* bootstrap se smaller than the displayed 0.01"
_DELIM = "\t"


def format_estimate(x: float) -> str:
    """3 significant figures, positional notation."""
    return np.format_float_positional(
        float(x), precision=3, fractional=False, trim="-"
    )


def format_se(se: float) -> str:
    """Two decimals; a positive se under 0.005 displays as the floor 0.01*."""
    se = float(se)
    if se < 0:
        raise ValueError("standard errors cannot be negative")
    if 0.0 < se < 0.005:
        return "0.01*"
    return f"{se:.2f}"


def _full(x: float) -> str:
    return repr(float(x))


def interval_labels(grid: ProportionGrid) -> list[str]:
    """Percent-range labels like 0-10, 10-20 for each grid interval."""
    pct = [f"{round(100.0 * p, 10):g}" for p in grid.points]
    return [f"{pct[j]}-{pct[j + 1]}" for j in range(grid.intervals)]


def _cell(est: float, se: float | None) -> str:
    if se is None:
        return format_estimate(est)
    return f"{format_estimate(est)}({format_se(se)})"


def _render_table(rows: list[list[str]]) -> str:
    widths = [max(len(r[c]) for r in rows) for c in range(len(rows[0]))]
    out = []
    for r in rows:
        cells = [r[0].ljust(widths[0])]
        cells += [r[c].rjust(widths[c]) for c in range(1, len(r))]
        out.append("  ".join(cells).rstrip())
    return "\n".join(out)


def _any_starred(*arrays) -> bool:
    for a in arrays:
        if a is None:
            continue
        a = np.asarray(a, dtype=float)
        if np.any((a > 0.0) & (a < 0.005)):
            return True
    return False


def _meta_line(spec, ci_method: str | None, kind: str) -> str:
    if spec is None:
        return f"cells: {kind} (bootstrap disabled)"
    pct = f"{round(100 * spec.confidence_level, 10):g}"
    return (
        f"cells: {kind}(bootstrap se); B={spec.replications} "
        f"seed={spec.seed} {pct}% {ci_method} intervals"
    )


def render_components_text(
    grid: ProportionGrid,
    labels: tuple[str, ...],
    matrix: np.ndarray,
    mean_vec: np.ndarray,
    se: np.ndarray | None = None,
    mean_se: np.ndarray | None = None,
    spec=None,
    ci_method: str | None = None,
) -> str:
    rows = [["Interval (%)", *labels]]
    for j, lab in enumerate(interval_labels(grid)):
        rows.append(
            [lab]
            + [
                _cell(matrix[j, c], None if se is None else se[j, c])
                for c in range(len(labels))
            ]
        )
    rows.append(
        ["Average"]
        + [
            _cell(mean_vec[c], None if mean_se is None else mean_se[c])
            for c in range(len(labels))
        ]
    )
    body = _render_table(rows)
    head = [
        "Components by population fraction (outcome units)",
        _meta_line(spec, ci_method, "estimate"),
        "",
    ]
    tail = ["", _STAR_NOTE] if _any_starred(se, mean_se) else []
    return "\n".join(head) + body + "\n".join(tail) + "\n"


def render_contributions_text(
    grid: ProportionGrid,
    labels: tuple[str, ...],
    shares: np.ndarray,
    share_se: np.ndarray | None = None,
    spec=None,
    ci_method: str | None = None,
) -> str:
    rows = [["Interval (%)", *labels]]
    for j, lab in enumerate(interval_labels(grid)):
        rows.append(
            [lab]
            + [
                _cell(shares[j, c], None if share_se is None else share_se[j, c])
                for c in range(len(labels))
            ]
        )
    body = _render_table(rows)
    head = [
        "Contribution shares by population fraction (% of total mean magnitude)",
        _meta_line(spec, ci_method, "share"),
        "",
    ]
    tail = ["", _STAR_NOTE] if _any_starred(share_se) else []
    return "\n".join(head) + body + "\n".join(tail) + "\n"


def components_delim(
    grid: ProportionGrid,
    labels: tuple[str, ...],
    matrix: np.ndarray,
    mean_vec: np.ndarray,
    se: np.ndarray | None = None,
    ci_lower: np.ndarray | None = None,
    ci_upper: np.ndarray | None = None,
    mean_se: np.ndarray | None = None,
    mean_ci_lower: np.ndarray | None = None,
    mean_ci_upper: np.ndarray | None = None,
) -> str:
    """Full-precision components table; one final row holds the mean."""
    with_boot = se is not None
    header = ["interval", "lower", "upper"]
    for lab in labels:
        header.append(lab)
        if with_boot:
            header += [f"{lab}_se", f"{lab}_ci_lower", f"{lab}_ci_upper"]
    lines = [_DELIM.join(header)]
    labs = interval_labels(grid)
    for j in range(grid.intervals):
        row = [labs[j], _full(grid.points[j]), _full(grid.points[j + 1])]
        for c in range(len(labels)):
            row.append(_full(matrix[j, c]))
            if with_boot:
                row += [
                    _full(se[j, c]),
                    _full(ci_lower[j, c]),
                    _full(ci_upper[j, c]),
                ]
        lines.append(_DELIM.join(row))
    avg = ["average", _full(0.0), _full(1.0)]
    for c in range(len(labels)):
        avg.append(_full(mean_vec[c]))
        if with_boot:
            avg += [
                _full(mean_se[c]),
                _full(mean_ci_lower[c]),
                _full(mean_ci_upper[c]),
            ]
    lines.append(_DELIM.join(avg))
    return "\n".join(lines) + "\n"


def contributions_delim(
    grid: ProportionGrid,
    labels: tuple[str, ...],
    shares: np.ndarray,
    share_se: np.ndarray | None = None,
) -> str:
    with_boot = share_se is not None
    header = ["interval", "lower", "upper"]
    for lab in labels:
        header.append(f"{lab}_share")
        if with_boot:
            header.append(f"{lab}_share_se")
    lines = [_DELIM.join(header)]
    labs = interval_labels(grid)
    for j in range(grid.intervals):
        row = [labs[j], _full(grid.points[j]), _full(grid.points[j + 1])]
        for c in range(len(labels)):
            row.append(_full(shares[j, c]))
            if with_boot:
                row.append(_full(share_se[j, c]))
        lines.append(_DELIM.join(row))
    return "\n".join(lines) + "\n"


def plotdata_delim(
    grid: ProportionGrid,
    labels: tuple[str, ...],
    matrix: np.ndarray,
    ci_lower: np.ndarray | None = None,
    ci_upper: np.ndarray | None = None,
) -> str:
    """Long-format point and interval data: one row per group and interval."""
    header = ["group", "interval", "lower", "upper", "estimate", "ci_lower", "ci_upper"]
    lines = [_DELIM.join(header)]
    labs = interval_labels(grid)
    for c, lab in enumerate(labels):
        for j in range(grid.intervals):
            row = [
                lab,
                labs[j],
                _full(grid.points[j]),
                _full(grid.points[j + 1]),
                _full(matrix[j, c]),
                "" if ci_lower is None else _full(ci_lower[j, c]),
                "" if ci_upper is None else _full(ci_upper[j, c]),
            ]
            lines.append(_DELIM.join(row))
    return "\n".join(lines) + "\n"
