import math

import numpy as np
import pytest
import scipy.stats

from pickands.exceptions import (
    ConfigError,
    ContractError,
    DomainError,
    FactorizationError,
)
from pickands.gaussian import (
    GaussianSampler,
    VarianceFunction,
    check_variance_conditions,
    covariance_from_variogram,
    drift_adjust_gaussian,
    sample_gaussian_path,
    sample_variance_mixed,
)
from pickands.grid import GridSpec, SamplePath


@pytest.mark.parametrize(
    "alpha, scale, s, t, expected",
    [(1.0, 1.0, 1.0, 2.0, 1.0), (2.0, 1.0, 1.0, 2.0, 2.0), (1.5, 2.0, 1.0, 1.0, 2.0)],
)
def test_covariance_from_variogram(alpha, scale, s, t, expected):
    sigma2 = VarianceFunction.power(alpha, scale)

    assert covariance_from_variogram(sigma2, s, t) == pytest.approx(expected)


def test_tabulated_variance_outside_table():
    sigma2 = VarianceFunction.tabulated([(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)])

    assert sigma2(1.5) == pytest.approx(1.5)
    with pytest.raises(DomainError) as e:
        covariance_from_variogram(sigma2, 1.0, 3.0)

    assert e.value.value == 3.0


def test_tabulated_variance_from_file(tmp_path):
    path = tmp_path / "variance.txt"
    path.write_text("# t s2\n1.0 0.5\n2.0 1.5\n", encoding="utf-8")

    sigma2 = VarianceFunction.from_file(str(path))

    assert sigma2.table_t == (0.0, 1.0, 2.0)
    assert sigma2(0.0) == 0.0
    assert sigma2(-2.0) == pytest.approx(1.5)


@pytest.mark.parametrize(
    "make",
    [
        lambda: VarianceFunction.power(2.5),
        lambda: VarianceFunction.power(0.0),
        lambda: VarianceFunction.power(1.0, -1.0),
        lambda: VarianceFunction.tabulated([(0.0, 1.0), (1.0, 2.0)]),
        lambda: VarianceFunction.tabulated([(1.0, 1.0), (0.5, 2.0)]),
    ],
)
def test_invalid_variance_functions(make):
    with pytest.raises(ContractError):
        make()


def test_sampler_methods():
    grid = GridSpec(0.5, -2.0, 2.0)

    power = GaussianSampler(VarianceFunction.power(1.0, 2.0), grid)
    table = GaussianSampler(VarianceFunction.tabulated([(0, 0), (8, 16)]), grid)
    single = GaussianSampler(VarianceFunction.power(1.0, 2.0), GridSpec(1.0, 0, 0))

    assert power.method == "circulant"
    assert table.method == "dense"
    assert single.method == "trivial"


@pytest.mark.parametrize("window", [(-2.0, 2.0), (0.0, 3.0), (-3.0, 0.0)])
def test_value_at_zero_is_exactly_zero(window):
    grid = GridSpec(0.25, *window)
    path = sample_gaussian_path(
        VarianceFunction.power(1.3, 2.0), grid, np.random.default_rng(0)
    )

    assert path.values[grid.zero_index] == 0.0


def test_marginal_variance():
    grid = GridSpec(0.25, -2.0, 2.0)
    sampler = GaussianSampler(VarianceFunction.power(1.0, 2.0), grid)
    b1 = sampler.sample(np.random.default_rng(1), 20000)[:, grid.index_of(1.0)]

    stderr = np.std(b1 ** 2) / math.sqrt(b1.size)
    assert abs(np.mean(b1 ** 2) - 2.0) < 4 * stderr


def test_rank_one_line_is_perfectly_correlated():
    grid = GridSpec(0.5, -1.0, 2.0)
    sampler = GaussianSampler(VarianceFunction.power(2.0, 2.0), grid)
    b = sampler.sample(np.random.default_rng(2), 5000)

    corr = np.corrcoef(b[:, grid.index_of(1.0)], b[:, grid.index_of(2.0)])[0, 1]
    assert corr == pytest.approx(1.0, abs=1e-9)
    np.testing.assert_allclose(
        b[:, grid.index_of(2.0)], 2 * b[:, grid.index_of(1.0)], atol=1e-6
    )


@pytest.mark.parametrize(
    "alpha, s, t", [(1.5, 0.5, 1.5), (1.0, -1.0, 1.0), (0.6, -1.5, 0.5)]
)
def test_covariance_consistency(alpha, s, t):
    sigma2 = VarianceFunction.power(alpha, 1.0)
    grid = GridSpec(0.5, -2.0, 2.0)
    b = GaussianSampler(sigma2, grid).sample(np.random.default_rng(3), 20000)
    x, y = b[:, grid.index_of(s)], b[:, grid.index_of(t)]

    products = (x - x.mean()) * (y - y.mean())
    stderr = np.std(products) / math.sqrt(x.size)
    assert abs(products.mean() - covariance_from_variogram(sigma2, s, t)) < 4 * stderr


def test_circulant_and_dense_agree_in_distribution():
    grid = GridSpec(0.5, 0.0, 4.0)
    power = VarianceFunction.power(1.0, 2.0)
    # 2|t| is linear, so the table reproduces it exactly
    table = VarianceFunction.tabulated([(0.0, 0.0), (4.0, 8.0)])

    circulant = GaussianSampler(power, grid).sample(np.random.default_rng(4), 10000)
    dense = GaussianSampler(table, grid).sample(np.random.default_rng(5), 10000)

    res = scipy.stats.ks_2samp(circulant[:, -1], dense[:, -1])
    assert res.pvalue > 0.001


def test_drift_adjust_gaussian():
    grid = GridSpec(1.0, -1.0, 1.0)
    sigma2 = VarianceFunction.power(1.0, 2.0)

    w = drift_adjust_gaussian(SamplePath(grid, np.zeros(3)), sigma2)

    assert w.at(1.0) == -1.0
    assert w.at(-1.0) == -1.0
    assert w.at(0.0) == 0.0


def test_drift_adjust_grid_mismatch():
    grid = GridSpec(1.0, -1.0, 1.0)
    with pytest.raises(ContractError):
        drift_adjust_gaussian(
            SamplePath(grid, np.zeros(3)),
            VarianceFunction.power(1.0),
            GridSpec(0.5, -1.0, 1.0),
        )


def test_normalization_of_drifted_process():
    grid = GridSpec(0.5, -1.0, 1.0)
    sigma2 = VarianceFunction.power(1.0, 2.0)
    b = GaussianSampler(sigma2, grid).sample(np.random.default_rng(6), 20000)
    exp_w = np.exp(b - sigma2(grid.points) / 2)

    stderr = exp_w.std(axis=0, ddof=1) / math.sqrt(exp_w.shape[0])
    assert np.all(np.abs(exp_w.mean(axis=0) - 1) <= 4 * np.maximum(stderr, 1e-300))


def test_sample_variance_mixed():
    grid = GridSpec(1.0, -1.0, 1.0)
    sigma2 = VarianceFunction.power(1.0, 2.0)
    zeros = SamplePath(grid, np.zeros(3))

    assert sample_variance_mixed(zeros, sigma2, 0.5).at(1.0) == pytest.approx(-0.25)

    b = sample_gaussian_path(sigma2, grid, np.random.default_rng(7))
    np.testing.assert_array_equal(
        sample_variance_mixed(b, sigma2, 1.0).values,
        drift_adjust_gaussian(b, sigma2).values,
    )

    with pytest.raises(ContractError):
        sample_variance_mixed(zeros, sigma2, 0.0)


def test_variance_conditions_brownian():
    report = check_variance_conditions(
        VarianceFunction.power(1.0, 2.0), lambda t: 2 * t, 1.0, (10.0, 1e4)
    )

    assert report.all_ok
    assert report.heuristic
    assert "finite-range proxy" in report.lines()[0]


def test_variance_conditions_small_c():
    report = check_variance_conditions(
        VarianceFunction.power(1.0, 2.0), lambda t: 2 * t, 0.5, (10.0, 1e4)
    )

    assert not report.c_ok
    assert not report.all_ok


def test_variance_conditions_logarithmic_growth():
    t = np.geomspace(1.0, 1e4, 200)
    sigma2 = VarianceFunction.tabulated(list(zip(t, np.log(t))))

    report = check_variance_conditions(sigma2, sigma2, 1.0, (10.0, 1e4))

    assert not report.sigma2_ok


@pytest.mark.parametrize("c", [0.0, 1.5])
def test_variance_conditions_reject_c(c):
    with pytest.raises(ContractError):
        check_variance_conditions(
            VarianceFunction.power(1.0), lambda t: t, c, (10.0, 100.0)
        )


def test_invalid_variogram_is_a_config_error():
    # Cov{B(1), B(2)} = 5 exceeds sqrt(Var B(1) Var B(2)) = sqrt(10)
    sigma2 = VarianceFunction.tabulated([(0, 0), (1, 1), (2, 10)])

    with pytest.raises(ConfigError) as e:
        GaussianSampler(sigma2, GridSpec(1.0, 0.0, 2.0))

    assert isinstance(e.value, FactorizationError)
    assert e.value.field == "process.variance"
    assert e.value.size == 2
    assert "Cholesky" in str(e.value)
