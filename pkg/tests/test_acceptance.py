"""End-to-end acceptance checks.

Covers the contractual behavior of the package: fixed-point property of the
separable approximations, streaming/dense equivalence, rank-one optimality
of the SPCA approximation, the multiplier-weight covariance law, Monte-Carlo
calibration (null level and power) of the bootstrap test, robustness on a
large spatial grid, determinism, and scale invariance of decisions.
"""

import json

import numpy as np
import pytest

from sepcov.bootstrap import BootstrapConfig, gen_weights, run_test
from sepcov.cli import main
from sepcov.covariance import DenseCovariance, FunctionalSample, LazyCovariance
from sepcov.estimator import make_psi
from sepcov.grids import MarginalKernel
from sepcov.separable import ApproxKind, apply_approximation
from sepcov.simulate import SimConfig, SimKernelParams, run_experiment
from sepcov.statistic import sup_deviation

from conftest import make_grid, random_psd_marginal, random_sample


def _random_separable_dense(rng, grid):
    a1 = random_psd_marginal(rng, grid.spatial)
    a2 = random_psd_marginal(rng, grid.temporal)
    return DenseCovariance(grid, np.kron(a1.values, a2.values))


# ------------------------------------------------------------- fixed point


def test_separable_fixed_point_all_approximations():
    """Separable kernels are fixed points of every approximation map."""
    rng = np.random.default_rng(505)
    for case in range(50):
        s = int(rng.integers(2, 7))
        t = int(rng.integers(2, 7))
        grid = make_grid(s, t)
        dense = _random_separable_dense(rng, grid)
        norm = np.abs(dense.matrix).max()
        kinds = [
            ApproxKind("trace"),
            ApproxKind("product", make_psi("const", grid.temporal)),
            ApproxKind("spca"),
        ]
        for kind in kinds:
            approx = apply_approximation(dense, kind)
            dev = np.abs(approx.full() - dense.matrix).max()
            assert dev <= 1e-8 * norm, (case, kind.kind, dev / norm)


# ------------------------------------------------- streaming/dense oracle


def test_streaming_equals_dense_contractions():
    """Streamed marginal summaries match dense-quadrature contractions."""
    rng = np.random.default_rng(606)
    for case in range(20):
        n = int(rng.integers(3, 21))
        s = int(rng.integers(2, 9))
        t = int(rng.integers(2, 9))
        sample = random_sample(rng, n, s, t)
        lazy = LazyCovariance(sample)
        dense = lazy.materialize()
        np.testing.assert_allclose(
            lazy.partial_trace_1().values,
            dense.partial_trace_1().values,
            atol=1e-10,
        )
        np.testing.assert_allclose(
            lazy.partial_trace_2().values,
            dense.partial_trace_2().values,
            atol=1e-10,
        )
        assert lazy.trace() == pytest.approx(dense.trace(), abs=1e-10)
        psi = MarginalKernel(
            sample.grid.temporal, np.ones((t, t)) + 0.1 * np.eye(t)
        )
        la1, la2 = lazy.partial_product_marginals(psi)
        da1, da2 = dense.partial_product_marginals(psi)
        np.testing.assert_allclose(la1.values, da1.values, atol=1e-10)
        np.testing.assert_allclose(la2.values, da2.values, atol=1e-10)


# --------------------------------------------------------- SPCA optimality


def test_spca_beats_random_separable_competitors():
    """The rank-one approximation is L2-optimal among separable competitors."""
    rng = np.random.default_rng(707)
    grid = make_grid(4, 4)
    w = grid.flat_weights()
    for case in range(10):
        dense = DenseCovariance(
            grid,
            sum(
                _random_separable_dense(rng, grid).matrix for _ in range(3)
            ),
        )
        approx = apply_approximation(dense, ApproxKind("spca"))
        diff = dense.matrix - approx.full()
        best = float(np.einsum("ij,i,j,ij->", diff, w, w, diff))
        for _ in range(100):
            comp = _random_separable_dense(rng, grid)
            scale = rng.uniform(0.2, 2.0)
            cdiff = dense.matrix - scale * comp.matrix
            cval = float(np.einsum("ij,i,j,ij->", cdiff, w, w, cdiff))
            assert best <= cval + 1e-9


# -------------------------------------------------- multiplier weight law


def test_multiplier_weight_covariance_law():
    """Cov(w_i, w_{i+h}) matches the triangular law at every lag h <= l+1."""
    rng = np.random.default_rng(808)
    n, reps = 200, 100_000
    for l in (1, 2, 3, 5):
        w = np.empty((reps, n))
        for k in range(reps):
            w[k] = gen_weights(n, l, rng)
        var = float(np.mean(w * w))
        assert abs(var - 1.0) <= 0.02, (l, var)
        for h in range(1, l + 2):
            emp = float(np.mean(w[:, : n - h] * w[:, h:]))
            want = max(0.0, 1.0 - h / l)
            assert abs(emp - want) <= 0.02, (l, h, emp, want)


# ------------------------------------------------- Monte-Carlo calibration


def _table_config(c, seed, **kw):
    base = dict(
        params=SimKernelParams(c=c),
        n_spatial=4,
        n_temporal=50,
        n_obs=100,
        runs=500,
        bootstrap=BootstrapConfig(replicates=400, block_length=2),
        seed=seed,
        paper_grid=True,
    )
    base.update(kw)
    return SimConfig(**base)


@pytest.mark.slow
def test_null_rejection_rate_reference_cell():
    result = run_experiment(_table_config(0.0, seed=7))
    assert 0.033 <= result.rejection_rate <= 0.083, result.rejection_rate


@pytest.mark.slow
def test_power_reference_cell():
    result = run_experiment(_table_config(1.0, seed=7))
    assert result.rejection_rate >= 0.85, result.rejection_rate


@pytest.mark.slow
def test_power_holds_on_large_spatial_grid():
    config = _table_config(
        1.0,
        seed=303,
        n_spatial=20,
        n_temporal=20,
        runs=100,
        bootstrap=BootstrapConfig(replicates=200, block_length=2),
        paper_grid=False,
    )
    result = run_experiment(config)
    assert result.rejection_rate >= 0.6, result.rejection_rate


# ------------------------------------------------------------ determinism


def test_test_cli_reports_identical_across_reruns(tmp_path):
    rng = np.random.default_rng(17)
    sample = FunctionalSample(make_grid(3, 6), rng.standard_normal((30, 3, 6)))
    from sepcov.sample_io import write_sample

    path = tmp_path / "sample.csv"
    write_sample(sample, str(path))
    reports = []
    for rep in range(2):
        out = tmp_path / f"report{rep}.json"
        main(
            ["test", "--in", str(path), "--replicates", "80", "--seed", "9",
             "--out", str(out)]
        )
        payload = json.loads(out.read_text())
        payload.pop("wall_time")
        reports.append(payload)
    assert reports[0] == reports[1]


def test_experiment_decisions_identical_across_reruns():
    config = SimConfig(
        params=SimKernelParams(c=0.0),
        n_spatial=3,
        n_temporal=6,
        n_obs=20,
        runs=6,
        bootstrap=BootstrapConfig(replicates=40, block_length=2),
        seed=31,
    )
    a = run_experiment(config)
    b = run_experiment(config)
    np.testing.assert_array_equal(a.decisions, b.decisions)
    np.testing.assert_array_equal(a.p_values, b.p_values)


# ------------------------------------------------------- scale invariance


def test_decision_scale_invariant():
    rng = np.random.default_rng(23)
    x = rng.standard_normal((40, 3, 8))
    grid = make_grid(3, 8)
    config = BootstrapConfig(replicates=100, seed=4)
    base = run_test(FunctionalSample(grid, x), config)
    scaled = run_test(FunctionalSample(grid, 10.0 * x), config)
    assert scaled.reject == base.reject
    assert scaled.p_value == base.p_value
    # the covariance is quadratic in the data, so the statistic scales by 100
    assert scaled.statistic.sup_dev == pytest.approx(
        100.0 * base.statistic.sup_dev, rel=1e-12
    )
