"""End-to-end acceptance checks, one test per numbered criterion.

Each test prints a pass/fail line through the terminal-summary hook in
conftest.py and enforces its own runtime budget.
"""

import importlib.util
import math
import pickle
from pathlib import Path

import numpy as np
import pytest

from cexpect import (
    BootstrapSpec,
    Decomposition,
    EmpiricalTarget,
    Sample,
    aggregate_mean,
    bootstrap,
    contributions,
    empirical_cce,
    exponential,
    fit_process,
    fit_quantile_regression,
    generate,
    lognormal,
    midpoint_mesh,
    pinball_loss,
    uniform,
    validate_grid,
)
from cexpect.cce import component_coefficients
from cexpect.cli import main
from conftest import runtime_budget
from fixture_values import (
    DECILES,
    MIXED_SIGN_COMPONENTS,
    MIXED_SIGN_SHARES_DISPLAYED,
    SKEWED_COMPONENTS,
    SKEWED_SHARES_DISPLAYED,
)
from oracles import brute_force_intercept

DECILE_GRID = validate_grid(DECILES)
DATA_DIR = Path(__file__).parent / "data"


def _load_goldens_script():
    path = Path(__file__).parent.parent / "scripts" / "make_goldens.py"
    spec = importlib.util.spec_from_file_location("make_goldens", path)
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


@pytest.mark.criterion(1, "decomposition identity on 1000 randomized cases")
def test_criterion_1():
    rng = np.random.default_rng(424242)
    with runtime_budget(10.0):
        for case in range(1000):
            n = int(rng.integers(1, 200))
            style = case % 4
            if style == 0:
                y = rng.normal(0, 100, n)  # negatives
            elif style == 1:
                y = rng.integers(-3, 4, n).astype(float)  # heavy ties
            elif style == 2:
                y = rng.exponential(5.0, n)  # skew
            else:
                y = np.full(n, float(rng.normal()))  # constant
            k = int(rng.integers(0, 12))
            interior = np.sort(rng.uniform(0.005, 0.995, k))
            if interior.size:
                keep = np.concatenate([[True], np.diff(interior) > 1e-9])
                interior = interior[keep]
            grid = validate_grid(np.concatenate([[0.0], interior, [1.0]]))
            d = empirical_cce(Sample(y), grid)
            mean = float(y.mean())
            assert abs(aggregate_mean(d) - mean) <= 1e-9 * (1 + abs(mean)), (
                f"case {case}: identity violated"
            )


@pytest.mark.criterion(2, "published decomposition fixtures reproduced")
def test_criterion_2():
    with runtime_budget(1.0):
        skew = Decomposition(DECILE_GRID, np.array(SKEWED_COMPONENTS))
        mixed = Decomposition(DECILE_GRID, np.array(MIXED_SIGN_COMPONENTS))
        # (a) skewed fixture aggregates to 0.974, displayed as 0.97
        assert abs(aggregate_mean(skew) - 0.974) < 1e-12
        assert abs(aggregate_mean(skew) - 0.97) <= 0.005
        # (b) mixed-sign fixture aggregates to 13.305, displayed as 13.3
        assert abs(aggregate_mean(mixed) - 13.305) < 1e-12
        assert abs(aggregate_mean(mixed) - 13.3) <= 0.05
        # (c) mixed-sign shares match the displayed column to 0.15 points
        got = contributions(mixed).shares
        want = np.array(MIXED_SIGN_SHARES_DISPLAYED)
        assert np.max(np.abs(got - want)) <= 0.15
        # (d) skewed shares match their displayed column to 2.5 points
        # (the published column came from unrounded inputs)
        got = contributions(skew).shares
        want = np.array(SKEWED_SHARES_DISPLAYED)
        assert np.max(np.abs(got - want)) <= 2.5


@pytest.mark.criterion(3, "quantile regression optimality and fit property")
def test_criterion_3():
    rng = np.random.default_rng(7000)
    with runtime_budget(30.0):
        for case in range(200):
            n = int(rng.integers(1, 13))
            if case % 3 == 0:
                y = rng.integers(-2, 3, n).astype(float)
            else:
                y = rng.normal(0, 10, n)
            tau = float(rng.uniform(0.02, 0.98))
            fit = fit_quantile_regression(np.ones((n, 1)), y, tau)
            best = brute_force_intercept(y, tau)
            assert fit.achieved_loss <= best + 1e-6, f"case {case} suboptimal"

        for case in range(50):
            n = int(rng.integers(4, 31))
            p = int(rng.integers(1, 4))
            p = min(p, n)
            cols = [np.ones(n)]
            for k in range(1, p):
                col = (
                    rng.integers(0, 2, n).astype(float)
                    if case % 2
                    else rng.normal(size=n)
                )
                cols.append(col)
            X = np.column_stack(cols)
            if np.linalg.matrix_rank(X) < p:
                continue
            y = X @ rng.normal(size=p) + rng.standard_t(4, size=n)
            if case % 3 == 0:
                y = np.round(y)  # ties
            tau = float(rng.uniform(0.05, 0.95))
            beta = fit_quantile_regression(X, y, tau).beta
            r = y - X @ beta
            ztol = 1e-8 * (1.0 + float(np.max(np.abs(y))))
            assert np.sum(r < -ztol) <= n * tau + 1e-9, f"case {case}"
            assert np.sum(r <= ztol) >= n * tau - 1e-9, f"case {case}"


@pytest.mark.criterion(4, "regression engine matches exact empirical engine")
def test_criterion_4():
    with runtime_budget(60.0):
        M = 2000
        sample = generate(lognormal(0.0, 1.0), 500, seed=77)
        proc = fit_process(np.ones((sample.n, 1)), sample.values, midpoint_mesh(M))
        gamma = component_coefficients(proc, DECILE_GRID).gamma[:, 0]
        ref = empirical_cce(sample, DECILE_GRID).components
        tol = 10.0 * (sample.values.max() - sample.values.min()) / M
        assert np.max(np.abs(gamma - ref)) <= tol


@pytest.mark.criterion(5, "components converge to closed-form values")
def test_criterion_5():
    with runtime_budget(60.0):
        n = 10**5
        exp_top = empirical_cce(generate(exponential(1.0), n, seed=31), DECILE_GRID).components[-1]
        truth = 1.0 + math.log(10.0)
        assert abs(exp_top - truth) <= 0.03 * truth

        uni = empirical_cce(generate(uniform(0.0, 1.0), n, seed=32), DECILE_GRID).components
        mids = np.arange(10) / 10 + 0.05
        assert np.max(np.abs(uni - mids)) <= 0.01


@pytest.mark.criterion(6, "skewed outcomes concentrate the top-decile share")
def test_criterion_6():
    with runtime_budget(60.0):
        sample = generate(lognormal(0.0, 1.5), 30000, seed=63)
        shares = contributions(empirical_cce(sample, DECILE_GRID)).shares
        assert shares[-1] > 50.0


@pytest.mark.criterion(7, "bootstrap is worker-independent and scales as 1/sqrt(n)")
def test_criterion_7():
    with runtime_budget(300.0):
        sample = generate(exponential(1.0), 2000, seed=99)
        spec = BootstrapSpec(300, seed=13)
        reports = [
            bootstrap(sample, DECILE_GRID, EmpiricalTarget(), spec, workers=w)
            for w in (1, 4, 8)
        ]
        base = reports[0]
        for other in reports[1:]:
            assert other.to_json() == base.to_json()
            for name in ("replicate_components", "replicate_shares", "se",
                         "ci_lower", "ci_upper", "contribution_se"):
                a = pickle.dumps(getattr(base, name))
                b = pickle.dumps(getattr(other, name))
                assert a == b, f"{name} differs across worker counts"

        ses = {}
        for n in (1000, 4000, 16000):
            s = generate(uniform(0.0, 1.0), n, seed=101)
            rep = bootstrap(s, DECILE_GRID, EmpiricalTarget(), BootstrapSpec(300, seed=55))
            ses[n] = rep.se[:, 0]
        scaled = np.array([ses[n] * np.sqrt(n) for n in (1000, 4000, 16000)])
        factor = scaled.max(axis=0) / scaled.min(axis=0)
        assert np.all(factor <= 1.5), factor


@pytest.mark.criterion(8, "planted two-group shift recovered end to end")
def test_criterion_8(tmp_path):
    with runtime_budget(300.0):
        rng = np.random.default_rng(88)
        n = 20000
        group = rng.integers(0, 2, n).astype(float)
        y = 1.0 + 2.0 * group + rng.normal(0.0, 1.0, n)
        csv_path = tmp_path / "planted.csv"
        lines = ["y,group"] + [
            f"{float(y[i])!r},{int(group[i])}" for i in range(n)
        ]
        csv_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        out = tmp_path / "out"
        code = main([
            "--data", str(csv_path), "--response", "y", "--covariates", "group",
            "--grid", "deciles", "--mesh", "500", "--bootstrap", "0",
            "--format", "delim", "--out", str(out),
        ])
        assert code == 0
        lines = (out / "components.delim").read_text().splitlines()
        header = lines[0].split("\t")
        col = header.index("group to baseline")
        contrast = [float(line.split("\t")[col]) for line in lines[1:]]
        intervals, average = np.array(contrast[:-1]), contrast[-1]
        assert np.max(np.abs(intervals - 2.0)) <= 0.15, intervals
        assert abs(average - 2.0) <= 0.05


@pytest.mark.criterion(9, "CLI output byte-identical to checked-in goldens")
def test_criterion_9(tmp_path):
    goldens = _load_goldens_script()
    with runtime_budget(60.0):
        csv_path = DATA_DIR / "synthetic.csv"
        for name, args in (
            ("golden_empirical", goldens.EMPIRICAL_ARGS),
            ("golden_fit", goldens.FIT_ARGS),
        ):
            out = tmp_path / name
            code = main(["--data", str(csv_path), "--out", str(out), *args])
            assert code == 0
            for fname in goldens.GOLDEN_FILES:
                fresh = (out / fname).read_bytes()
                golden = (DATA_DIR / name / fname).read_bytes()
                assert fresh == golden, f"{name}/{fname} drifted from golden"
            text = (out / "components.txt").read_text()
            assert "(0.01*)" in text
            assert "* bootstrap se smaller than the displayed 0.01" in text
            assert "0-10" in text and "90-100" in text
        assert "group to baseline" in (tmp_path / "golden_fit" / "components.txt").read_text()


def test_pinball_loss_spot_check():
    # anchors the acceptance module to the loss the optimality criterion
    # relies on: hand-evaluated cells
    assert pinball_loss([2, -1], 0.9) == pytest.approx(1.9, abs=1e-12)
