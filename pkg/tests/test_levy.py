import math

import numpy as np
import pytest
import scipy.stats

from pickands.exceptions import ContractError, DomainError
from pickands.grid import GridSpec
from pickands.levy import (
    CONTINUOUS_ROUTE,
    GRID_ROUTE,
    LevySampler,
    LevySpec,
    check_moment_conditions,
    drift_compensate,
    extremal_index_candidates,
    laplace_exponent,
    negative_side_exponent,
    sample_levy_two_sided,
    tilt_negative_side,
)


SPECS = [
    LevySpec.brownian_drift(0.0, math.sqrt(2)),
    LevySpec.brownian_drift(3.0, 0.5),
    LevySpec.compound_poisson_exp(1.0, 2.0, 1),
    LevySpec.compound_poisson_exp(2.0, 3.0, -1),
    LevySpec.brownian_plus_negative_cp(0.5, 1.0, 1.0, 4.0),
]


@pytest.mark.parametrize(
    "spec, theta, expected",
    [
        (LevySpec.brownian_drift(0.0, math.sqrt(2)), 1.0, 1.0),
        (LevySpec.brownian_drift(1.0, 1.0), 2.0, 4.0),
        (LevySpec.compound_poisson_exp(1.0, 2.0, 1), 1.0, 1.0),
        (LevySpec.compound_poisson_exp(1.0, 2.0, -1), 2.0, -0.5),
        (LevySpec.brownian_plus_negative_cp(0.0, 1.0, 1.0, 1.0), 1.0, 0.0),
    ],
)
def test_laplace_exponent(spec, theta, expected):
    assert laplace_exponent(spec, theta) == pytest.approx(expected)


@pytest.mark.parametrize("spec", SPECS)
def test_laplace_exponent_vanishes_at_zero(spec):
    assert laplace_exponent(spec, 0.0) == 0.0


@pytest.mark.parametrize(
    "spec, theta",
    [
        (LevySpec.compound_poisson_exp(1.0, 2.0, 1), 2.0),
        (LevySpec.compound_poisson_exp(1.0, 2.0, 1), 5.0),
        (LevySpec.compound_poisson_exp(1.0, 2.0, -1), -2.5),
    ],
)
def test_laplace_exponent_outside_domain(spec, theta):
    with pytest.raises(DomainError) as e:
        laplace_exponent(spec, theta)

    assert "2" in e.value.bound


# e^{theta X} has a finite variance only when 2 theta lies in the domain
MGF_CASES = [
    (spec, theta)
    for spec in SPECS
    for theta in (-0.5, 0.5, 1.0)
    if spec.domain[0] < 2 * theta < spec.domain[1]
]


@pytest.mark.parametrize("spec, theta", MGF_CASES)
def test_moment_generating_function(spec, theta):
    x = spec.increments(np.random.default_rng(0), 1.0, (100_000,))
    e = np.exp(theta * x)

    stderr = e.std(ddof=1) / math.sqrt(e.size)
    assert abs(e.mean() - math.exp(laplace_exponent(spec, theta))) < 4 * stderr


@pytest.mark.parametrize("spec", SPECS)
def test_increments_are_stationary(spec):
    grid = GridSpec(0.5, 0.0, 4.0)
    w = LevySampler(spec, grid).sample(np.random.default_rng(3), 10_000)
    early = w[:, grid.index_of(0.5)] - w[:, grid.index_of(0.0)]
    late = w[:, grid.index_of(3.5)] - w[:, grid.index_of(3.0)]

    assert scipy.stats.ks_2samp(early, late).pvalue >= 0.001


@pytest.mark.parametrize(
    "make",
    [
        lambda: LevySpec(variant="stable"),
        lambda: LevySpec.brownian_drift(0.0, -1.0),
        lambda: LevySpec.compound_poisson_exp(1.0, 0.5, 1),
        lambda: LevySpec.compound_poisson_exp(0.0, 2.0, 1),
        lambda: LevySpec.compound_poisson_exp(1.0, 2.0, 0),
        lambda: LevySpec(sigma=1.0, lam=1.0, rho=2.0, variant="compound_poisson_exp"),
        lambda: LevySpec(
            sigma=1.0,
            lam=1.0,
            rho=2.0,
            jump_sign=1,
            variant="brownian_plus_negative_cp",
        ),
    ],
)
def test_invalid_specs(make):
    with pytest.raises(ContractError):
        make()


@pytest.mark.parametrize("spec", SPECS)
def test_drift_compensation_is_a_martingale_exponent(spec):
    assert drift_compensate(spec)(1.0) == pytest.approx(0.0, abs=1e-12)


def test_drift_compensation_forgets_the_drift():
    a = drift_compensate(LevySpec.brownian_drift(0.0, math.sqrt(2)))
    b = drift_compensate(LevySpec.brownian_drift(3.0, math.sqrt(2)))

    assert a.mu == pytest.approx(-1.0)
    assert b.mu == pytest.approx(a.mu)
    assert b.sigma == a.sigma


def test_brownian_tilt():
    tilted = tilt_negative_side(LevySpec.brownian_drift(0.0, math.sqrt(2)))

    assert tilted.mu == pytest.approx(-1.0)
    assert tilted.sigma == pytest.approx(math.sqrt(2))
    assert not tilted.has_jumps


@pytest.mark.parametrize("spec", SPECS)
@pytest.mark.parametrize("theta", [-0.5, 0.0, 0.5, 1.0, 1.5])
def test_tilt_matches_negative_side_exponent(spec, theta):
    tilted = tilt_negative_side(spec)

    assert tilted(theta) == pytest.approx(negative_side_exponent(spec, theta))


@pytest.mark.parametrize("spec", SPECS)
def test_negative_side_exponent_roots(spec):
    assert negative_side_exponent(spec, 0.0) == pytest.approx(0.0, abs=1e-12)
    assert negative_side_exponent(spec, 1.0) == pytest.approx(0.0, abs=1e-12)


def test_positive_jumps_tilt_to_negative_jumps():
    tilted = tilt_negative_side(LevySpec.compound_poisson_exp(1.0, 2.0, 1))

    assert tilted.jump_sign == -1
    assert tilted.rho == pytest.approx(1.0)
    assert tilted.lam == pytest.approx(2.0)


@pytest.mark.parametrize(
    "spec, route, ok",
    [
        (LevySpec.brownian_drift(0.0, 1.0), CONTINUOUS_ROUTE, True),
        (LevySpec.compound_poisson_exp(1.0, 2.5, 1), GRID_ROUTE, True),
        (LevySpec.compound_poisson_exp(1.0, 2.5, 1), CONTINUOUS_ROUTE, False),
        (LevySpec.compound_poisson_exp(1.0, 1.5, 1), GRID_ROUTE, False),
        (LevySpec.compound_poisson_exp(1.0, 1.5, -1), GRID_ROUTE, True),
        (LevySpec.compound_poisson_exp(1.0, 1.5, -1), CONTINUOUS_ROUTE, False),
    ],
)
def test_moment_conditions(spec, route, ok):
    result, bound = check_moment_conditions(spec, route)

    assert result is ok
    assert "Phi finite on" in bound


def test_moment_conditions_unknown_route():
    with pytest.raises(ContractError):
        check_moment_conditions(LevySpec.brownian_drift(), "sideways")


def test_extremal_index_candidates():
    candidates = extremal_index_candidates(LevySpec.brownian_drift(0.0, math.sqrt(2)))

    assert candidates["phi_prime"] == pytest.approx(2.0)
    assert candidates["compensated_phi_prime"] == pytest.approx(1.0)


def test_extremal_index_candidates_need_negative_jumps():
    with pytest.raises(ContractError):
        extremal_index_candidates(LevySpec.compound_poisson_exp(1.0, 2.0, 1))


@pytest.mark.parametrize("spec", SPECS)
def test_two_sided_path_is_zero_at_origin(spec):
    path = sample_levy_two_sided(
        spec, GridSpec(0.5, -2.0, 2.0), np.random.default_rng(1)
    )

    assert path.at(0.0) == 0.0


@pytest.mark.parametrize("t", [-1.0, 1.0])
def test_two_sided_exponential_martingale(t):
    grid = GridSpec(0.5, -1.0, 1.0)
    sampler = LevySampler(LevySpec.brownian_drift(0.0, math.sqrt(2)), grid)
    e = np.exp(sampler.sample(np.random.default_rng(2), 20000)[:, grid.index_of(t)])

    stderr = e.std(ddof=1) / math.sqrt(e.size)
    assert abs(e.mean() - 1) < 4 * stderr


def test_jump_process_exponential_martingale():
    grid = GridSpec(0.5, -1.0, 1.0)
    sampler = LevySampler(LevySpec.compound_poisson_exp(2.0, 3.0, -1), grid)
    e = np.exp(sampler.sample(np.random.default_rng(3), 20000))

    stderr = e.std(axis=0, ddof=1) / math.sqrt(e.shape[0])
    assert np.all(np.abs(e.mean(axis=0) - 1) <= 4 * stderr + 1e-12)
