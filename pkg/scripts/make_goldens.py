"""Regenerate the bundled synthetic dataset and the CLI golden outputs.

Writes tests/data/synthetic.csv plus the checked-in golden copies of
components.delim and contributions.delim for one empirical run and one
regression run. Goldens are produced through the real CLI entry point so
they cover the full pipeline. Rerunning this script must be a no-op when
nothing changed; the tests byte-compare fresh CLI output against these
files.

The response values are floored in a tight 0.004-wide band at the low
end so the bottom component's bootstrap se is positive but below the
0.005 display threshold, which keeps the starred-floor rendering path
exercised by the goldens.
"""

import csv
import shutil
import sys
import tempfile
from pathlib import Path

import numpy as np

from cexpect.cli import main

REPO = Path(__file__).resolve().parent.parent
DATA = REPO / "tests" / "data"

EMPIRICAL_ARGS = [
    "--response", "y",
    "--empirical",
    "--grid", "deciles",
    "--bootstrap", "40",
    "--seed", "11",
    "--format", "all",
]
FIT_ARGS = [
    "--response", "y",
    "--covariates", "group",
    "--grid", "deciles",
    "--mesh", "60",
    "--bootstrap", "20",
    "--seed", "3",
    "--format", "all",
]
GOLDEN_FILES = ("components.delim", "contributions.delim")


def write_dataset(path: Path) -> None:
    rng = np.random.default_rng(77)
    n = 240
    group = rng.integers(0, 2, n).astype(float)
    body = np.exp(rng.normal(0.0, 0.8, n))
    y = body + 1.2 * group
    floor = float(np.quantile(y, 0.3))
    tight = floor + rng.uniform(0.0, 0.004, n)
    y = np.where(y < floor, tight, y)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "y", "group"])
        for i in range(n):
            w.writerow([i + 1, repr(float(y[i])), int(group[i])])


def regenerate() -> None:
    DATA.mkdir(parents=True, exist_ok=True)
    csv_path = DATA / "synthetic.csv"
    write_dataset(csv_path)
    for name, args in (("golden_empirical", EMPIRICAL_ARGS), ("golden_fit", FIT_ARGS)):
        golden_dir = DATA / name
        golden_dir.mkdir(exist_ok=True)
        with tempfile.TemporaryDirectory() as tmp:
            code = main(["--data", str(csv_path), "--out", tmp, *args])
            if code != 0:
                sys.exit(f"golden run {name} failed with exit code {code}")
            for fname in GOLDEN_FILES:
                shutil.copy(Path(tmp) / fname, golden_dir / fname)
        print(f"wrote {golden_dir}/{{{','.join(GOLDEN_FILES)}}}")


if __name__ == "__main__":
    regenerate()
