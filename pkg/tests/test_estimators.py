import math

from functools import partial

import numpy as np
import pytest

from pickands.estimators import (
    BROWNIAN_ORDERS,
    DIEKER_YAKIR,
    ArgmaxIndicator,
    EstimateResult,
    PathFunctional,
    RatioSupSum,
    _prefix_sup_block,
    check_admissible,
    estimate_dieker_yakir,
    estimate_grid_attainment,
    estimate_limit_definition,
    extrapolate_dieker_yakir,
    fekete_diagnostic,
    functional,
    normalization_check,
    path_functionals,
    resolve_levy_convention,
    resolvent_identity_check,
    richardson_extrapolate,
    tilt_shift_check,
    z_score,
)
from pickands.exceptions import ContractError
from pickands.gaussian import VarianceFunction
from pickands.grid import GridSpec, SamplePath
from pickands.levy import LevySpec, extremal_index_candidates
from pickands.process import GaussianProcess, LevyProcess
from pickands.streams import Stream, map_blocks


BROWNIAN = GaussianProcess(VarianceFunction.power(1.0, 2.0))
LINE = GaussianProcess(VarianceFunction.power(2.0, 2.0))
LEVY_BM = LevyProcess(LevySpec.brownian_drift(0.0, math.sqrt(2)))


def _result(value, stderr=0.0, n=1000):
    return EstimateResult(
        value=value,
        stderr=stderr,
        n=n,
        method=DIEKER_YAKIR,
        window=(-1.0, 1.0),
        seed=0,
    )


def test_path_functionals_on_three_points():
    w = SamplePath(GridSpec(1.0, -1.0, 1.0), [-1.0, 0.0, -1.0])

    f = path_functionals(w, 1.0, 1.0)

    assert f.m_delta == 1.0
    assert f.s_eta == pytest.approx(1 + 2 * math.exp(-1))
    assert f.s_eta == pytest.approx(1.7358, abs=1e-4)
    assert f.argmax_at_zero
    assert f.ratio == pytest.approx(1 / 1.7357588823428847)


def test_path_functionals_single_point():
    f = path_functionals(SamplePath(GridSpec(1.0, 0.0, 0.0), [0.0]), 1.0, 1.0)

    assert (f.m_delta, f.s_eta) == (1.0, 1.0)


def test_path_functionals_trapezoid():
    w = SamplePath(GridSpec(1.0, -1.0, 1.0), [-1.0, 0.0, -1.0])

    f = path_functionals(w, 0.0, 0.0)

    assert f.s_eta == pytest.approx(1 + math.exp(-1))


def test_argmax_off_zero():
    w = SamplePath(GridSpec(1.0, -1.0, 1.0), [-1.0, 0.0, 0.5])

    f = path_functionals(w, 1.0, 1.0)

    assert not f.argmax_at_zero
    assert f.m_delta == pytest.approx(math.exp(0.5))


def test_coarser_grid_never_raises_the_maximum():
    grid = GridSpec(0.5, -4.0, 4.0)
    rng = np.random.default_rng(0)
    for _ in range(20):
        w = BROWNIAN.sample_path(grid, rng)
        fine = path_functionals(w, 0.5, 0.5)
        coarse = path_functionals(w, 1.0, 1.0)
        assert coarse.m_delta <= fine.m_delta
        assert fine.m_delta >= 1


@pytest.mark.parametrize("target_delta, eta", [(0.3, 1.0), (1.0, 0.7), (-1.0, 1.0)])
def test_path_functionals_spacing(target_delta, eta):
    w = SamplePath(GridSpec(1.0, -1.0, 1.0), [-1.0, 0.0, -1.0])

    with pytest.raises(ContractError):
        path_functionals(w, target_delta, eta)


def test_limit_definition_below_one_step():
    result = estimate_limit_definition(BROWNIAN, 1.0, 0.5, n=100, seed=1)

    assert result.value == 2.0
    assert result.stderr == 0.0
    assert result.window == (0.0, 0.5)


def test_limit_definition_two_points(anchors):
    expected = {a["delta"]: a["value"] for a in anchors["two_point"]}[1.0]

    result = estimate_limit_definition(BROWNIAN, 1.0, 1.0, n=4000, seed=3)

    assert abs(result.value - expected) < 4 * result.stderr
    assert "finite-T" in result.truncation_note


def test_limit_definition_refuses_few_replicates():
    with pytest.raises(ContractError):
        estimate_limit_definition(BROWNIAN, 1.0, 1.0, n=99, seed=1)


@pytest.mark.parametrize(
    "delta, eta, k", [(0.0, 0.0, 0), (0.0, 0.3, 0), (1.0, 1.0, 1), (0.5, 1.5, 3)]
)
def test_check_admissible(delta, eta, k):
    assert check_admissible(delta, eta) == k


@pytest.mark.parametrize("delta, eta", [(1.0, 1.5), (1.0, 0.0), (-1.0, 1.0)])
def test_inadmissible(delta, eta):
    with pytest.raises(ContractError) as e:
        estimate_dieker_yakir(BROWNIAN, delta, eta, window=(-5.0, 5.0), n=100)

    assert "eta" in str(e.value)


def test_dieker_yakir_respects_pathwise_bound():
    result = estimate_dieker_yakir(
        BROWNIAN, 1.0, 1.0, window=(-40.0, 40.0), n=2000, seed=7
    )

    assert result.details["bound_violations"] == 0
    assert 0 < result.value <= 1.0
    assert result.window == (-40.0, 40.0)
    assert "half-window change" in result.truncation_note


def test_dieker_yakir_lower_bound_note():
    result = estimate_dieker_yakir(
        BROWNIAN, 0.5, 1.0, window=(-20.0, 20.0), n=200, seed=7
    )

    assert "lower bound" in result.truncation_note


def test_dieker_yakir_default_window():
    result = estimate_dieker_yakir(BROWNIAN, 2.0, 2.0, n=100, seed=1)

    assert result.window == pytest.approx((-72.0, 72.0))


def test_rank_one_line(anchors):
    result = estimate_dieker_yakir(
        LINE, 0.0, 0.0, window=(-8.0, 8.0), n=200, seed=11, step=0.02
    )

    assert result.value == pytest.approx(anchors["inverse_sqrt_pi"], abs=0.02)
    assert "delta=0 proxy" in result.truncation_note


def test_levy_brownian_matches_gaussian():
    kwargs = dict(window=(-20.0, 20.0), n=2000)
    gaussian = estimate_dieker_yakir(BROWNIAN, 0.5, 0.5, seed=4, **kwargs)
    levy = estimate_dieker_yakir(LEVY_BM, 0.5, 0.5, seed=5, **kwargs)

    assert abs(gaussian.z_against(levy)) < 4


def test_grid_attainment_equals_dieker_yakir():
    kwargs = dict(window=(-40.0, 40.0), n=4000)
    attainment = estimate_grid_attainment(BROWNIAN, 1.0, seed=21, **kwargs)
    dy = estimate_dieker_yakir(BROWNIAN, 1.0, 1.0, seed=22, **kwargs)

    assert attainment.value <= 1.0
    assert attainment.details["successes"] == round(attainment.value * 4000)
    assert abs(attainment.z_against(dy)) < 4


def test_grid_attainment_needs_positive_delta():
    with pytest.raises(ContractError):
        estimate_grid_attainment(BROWNIAN, 0.0, window=(-1.0, 1.0), n=100)


def test_fekete_nested_paths():
    results = fekete_diagnostic(BROWNIAN, 0.5, [2.0, 4.0, 8.0], n=1000, seed=13)

    assert [r.window for r in results] == [(0.0, 2.0), (0.0, 4.0), (0.0, 8.0)]
    assert math.isnan(results[0].details["paired_z"])
    for short, long_ in zip(results, results[1:]):
        assert long_.value <= short.value + 4 * short.stderr
        assert long_.details["paired_z"] <= 3.0


def test_fekete_paired_z_matches_paired_differences():
    results = fekete_diagnostic(BROWNIAN, 0.5, [1.0, 2.0], n=2000, seed=8)
    grid = GridSpec(0.5, 0.0, 2.0, target_delta=0.5)
    rows = map_blocks(
        partial(
            _prefix_sup_block,
            sampler=BROWNIAN.sampler(grid),
            mask=grid.subgrid_mask(0.5),
            ends=(2, 4),
        ),
        2000,
        8,
        Stream.LIMIT,
    )
    diff = rows[:, 1] / 2.0 - rows[:, 0]
    expected = diff.mean() / (diff.std(ddof=1) / math.sqrt(2000))

    assert results[1].details["paired_z"] == pytest.approx(expected)
    # sup over [0, 2] is at least sup over [0, 1] on every path
    assert np.all(rows[:, 1] >= rows[:, 0])


def test_fekete_single_horizon_equals_limit_definition():
    [single] = fekete_diagnostic(BROWNIAN, 0.5, [4.0], n=300, seed=2)
    limit = estimate_limit_definition(BROWNIAN, 0.5, 4.0, n=300, seed=2)

    assert single.value == limit.value
    assert single.stderr == limit.stderr


@pytest.mark.parametrize("T_list", [[], [2.0, 5.0], [4.0, 2.0]])
def test_fekete_needs_doublings(T_list):
    with pytest.raises(ContractError):
        fekete_diagnostic(BROWNIAN, 0.5, T_list, n=100, seed=1)


def test_tilt_shift_at_origin():
    lhs, rhs = tilt_shift_check(BROWNIAN, 0.0, RatioSupSum(2.0), n=2000, seed=3)

    assert lhs.method == "ratio_sup_sum"
    assert abs(lhs.z_against(rhs)) < 4


@pytest.mark.parametrize(
    "process, t_shift", [(BROWNIAN, 1.0), (LEVY_BM, -1.0)]
)
def test_tilt_shift(process, t_shift):
    lhs, rhs = tilt_shift_check(
        process, t_shift, RatioSupSum(5.0), n=4000, seed=5, step=0.05
    )

    assert lhs.window == (-6.0, 6.0)
    assert abs(lhs.z_against(rhs)) < 4


def test_tilt_shift_with_argmax_indicator():
    gamma = functional("indicator_argmax_in_set", half_width=4.0, a=(-1.0, 1.0))
    assert isinstance(gamma, ArgmaxIndicator)

    lhs, rhs = tilt_shift_check(BROWNIAN, 0.5, gamma, n=4000, seed=6, step=0.05)

    assert 0 < rhs.value < 1
    assert abs(lhs.z_against(rhs)) < 4


def test_tilt_shift_needs_invariant_functional():
    with pytest.raises(ContractError):
        tilt_shift_check(BROWNIAN, 1.0, PathFunctional(2.0), n=100, seed=1)


def test_unknown_functional():
    with pytest.raises(ContractError):
        functional("sup_only")


def test_resolvent_two_points():
    lhs, rhs = resolvent_identity_check(BROWNIAN, 1.0, 1.0, n=4000, seed=8)

    assert abs(lhs.z_against(rhs)) < 4


def test_resolvent_single_point():
    lhs, rhs = resolvent_identity_check(BROWNIAN, 2.0, 1.0, n=100, seed=8)

    assert lhs.value == rhs.value == 1.0


def test_resolvent_needs_grid():
    with pytest.raises(ContractError):
        resolvent_identity_check(BROWNIAN, 0.0, 1.0, n=100, seed=8)


def test_normalization_check():
    grid = GridSpec(0.5, -1.0, 1.0)
    mean, z = normalization_check(BROWNIAN, grid, n=5000, seed=9)

    assert mean[grid.zero_index] == 1.0
    assert z[grid.zero_index] == 0.0
    assert np.max(np.abs(z)) < 5


def test_richardson_linear():
    results = [(d, _result(1 + d)) for d in (0.4, 0.2, 0.1)]

    h = richardson_extrapolate(results)

    assert h.value == pytest.approx(1.0, abs=1e-6)
    assert h.details["exponent"] == pytest.approx(1.0, abs=1e-3)
    assert h.delta == 0.0
    assert h.n == 3000


def test_richardson_square_root():
    results = [(d, _result(0.5642 + 0.3 * d ** 0.5)) for d in (0.4, 0.2, 0.1)]

    h = richardson_extrapolate(results)

    assert h.value == pytest.approx(0.5642, abs=1e-3)
    assert h.details["slope"] == pytest.approx(0.3, abs=1e-2)


def test_richardson_propagates_stderr():
    results = [(d, _result(1 + d, stderr=0.01)) for d in (0.4, 0.2, 0.1)]

    h = richardson_extrapolate(results)

    assert h.stderr > 0.01


def test_richardson_fixed_orders():
    results = [
        (d, _result(1 - 0.8 * d ** 0.5 + 0.3 * d, stderr=0.001))
        for d in (0.2, 0.1, 0.05)
    ]

    h = richardson_extrapolate(results, orders=BROWNIAN_ORDERS)

    assert h.value == pytest.approx(1.0, abs=1e-9)
    assert h.details["orders"] == (0.5, 1.0)
    assert h.details["slope"] == pytest.approx(-0.8)
    assert h.truncation_note.endswith("p=0.500, 1.000")
    # exact interpolation amplifies the input noise
    assert h.stderr > 0.005


@pytest.mark.parametrize("orders", [(), (0.5, 1.0, 1.5), (0.0, 1.0)])
def test_richardson_rejects_orders(orders):
    results = [(d, _result(1.0)) for d in (0.2, 0.1, 0.05)]

    with pytest.raises(ContractError):
        richardson_extrapolate(results, orders=orders)


def test_extrapolate_dieker_yakir_uses_per_delta_estimates():
    kwargs = dict(window=(-4.0, 4.0), n=200, seed=5)
    per_delta, limit = extrapolate_dieker_yakir(
        LEVY_BM, (0.4, 0.2, 0.1), orders=BROWNIAN_ORDERS, **kwargs
    )

    assert [r.delta for r in per_delta] == [0.4, 0.2, 0.1]
    assert per_delta[1] == estimate_dieker_yakir(LEVY_BM, 0.2, 0.2, **kwargs)
    assert limit == richardson_extrapolate(
        list(zip((0.4, 0.2, 0.1), per_delta)), orders=BROWNIAN_ORDERS
    )
    assert limit.delta == 0.0


@pytest.mark.parametrize(
    "deltas", [(0.4, 0.2), (0.4, 0.2, 0.15), (0.4, 0.2, 0.2), (0.0, 0.1, 0.2)]
)
def test_richardson_needs_geometric_deltas(deltas):
    with pytest.raises(ContractError):
        richardson_extrapolate([(d, _result(1.0)) for d in deltas])


@pytest.mark.parametrize("workers", [3, 4, 8])
def test_results_do_not_depend_on_workers(workers):
    kwargs = dict(window=(-10.0, 10.0), n=2100, seed=17)
    serial = estimate_dieker_yakir(BROWNIAN, 0.5, 0.5, workers=1, **kwargs)
    parallel = estimate_dieker_yakir(BROWNIAN, 0.5, 0.5, workers=workers, **kwargs)

    assert serial.value == parallel.value
    assert serial == parallel


def test_estimate_result_interval_and_z():
    result = _result(1.0, stderr=0.1)

    assert result.ci95 == pytest.approx((0.804, 1.196))
    assert result.z_against(_result(0.8, stderr=0.1)) == pytest.approx(
        0.2 / math.sqrt(0.02)
    )
    assert z_score(0.0, 0.0) == 0.0
    assert z_score(-1.0, 0.0) == -math.inf


def test_levy_convention_resolved():
    report = resolve_levy_convention(
        _result(1.01, stderr=0.01), {"phi_prime": 2.0, "compensated_phi_prime": 1.0}
    )

    assert report.supported == "compensated_phi_prime"
    assert report.z_scores["compensated_phi_prime"] == pytest.approx(1.0)
    assert report.separation == pytest.approx(100.0)
    assert report.lines()[-1] == "  supported convention: compensated_phi_prime"


def test_levy_convention_undecided():
    report = resolve_levy_convention(
        _result(1.5, stderr=0.4), {"phi_prime": 2.0, "compensated_phi_prime": 1.0}
    )

    assert report.supported is None
    assert "undecided" in report.lines()[-1]


def test_levy_convention_needs_candidates():
    with pytest.raises(ContractError):
        resolve_levy_convention(_result(1.0), {})


@pytest.mark.slow
@pytest.mark.parametrize("delta", [1.0, 0.5])
def test_brownian_grid_representations_agree(delta):
    kwargs = dict(window=(-40.0, 40.0), n=100_000, workers=4)
    attainment = estimate_grid_attainment(BROWNIAN, delta, seed=1, **kwargs)
    dy = estimate_dieker_yakir(BROWNIAN, delta, delta, seed=2, **kwargs)

    assert abs(attainment.z_against(dy)) < 3


@pytest.mark.slow
def test_rank_one_line_extrapolation(anchors):
    results = [
        (d, estimate_dieker_yakir(LINE, d, d, window=(-8.0, 8.0), n=100_000, seed=3))
        for d in (0.2, 0.1, 0.05)
    ]

    h = richardson_extrapolate(results)

    assert h.value == pytest.approx(anchors["inverse_sqrt_pi"], abs=0.02)


@pytest.mark.slow
def test_brownian_extrapolation():
    per_delta, h = extrapolate_dieker_yakir(
        BROWNIAN, (0.2, 0.1, 0.05), window=(-40.0, 40.0), n=100_000, seed=6, workers=4
    )

    assert [r.value for r in per_delta] == sorted(r.value for r in per_delta)
    assert h.value == pytest.approx(1.0, abs=0.05)
    assert 0.5 <= h.details["exponent"] <= 2.0

    two_term = richardson_extrapolate(
        list(zip((0.2, 0.1, 0.05), per_delta)), orders=BROWNIAN_ORDERS
    )
    assert two_term.value == pytest.approx(1.0, abs=0.05)


@pytest.mark.slow
def test_levy_convention_from_extrapolation():
    _, estimate = extrapolate_dieker_yakir(
        LEVY_BM,
        window=(-40.0, 40.0),
        n=100_000,
        seed=7,
        workers=4,
        orders=BROWNIAN_ORDERS,
    )

    report = resolve_levy_convention(estimate, extremal_index_candidates(LEVY_BM.spec))

    assert report.supported == "compensated_phi_prime", "\n".join(report.lines())
    assert report.separation >= 5
