"""
The property battery run by ``pickands validate``.

Every check is reported, never raised: a check whose computation fails is
recorded as failed with the error message.
"""
import logging
import math

from dataclasses import dataclass
from typing import Callable, Iterable, List, Tuple

import numpy as np

from .config import ExperimentConfig
from .estimators import (
    BROWNIAN_ORDERS,
    EXTRAPOLATION_DELTAS,
    MIN_REPLICATES,
    RatioSupSum,
    estimate_dieker_yakir,
    estimate_grid_attainment,
    extrapolate_dieker_yakir,
    fekete_diagnostic,
    normalization_check,
    resolve_levy_convention,
    resolvent_identity_check,
    tilt_shift_check,
)
from .exceptions import PickandsError
from .gaussian import POWER, check_variance_conditions
from .grid import GridSpec
from .levy import extremal_index_candidates
from .maxstable import (
    DEFAULT_BETA,
    DEFAULT_K_PILOT,
    gumbel_margin_check,
    sample_brown_resnick_batch,
    stationarity_check,
    validate_fidis,
)
from .process import GaussianProcess, LevyProcess


LOGGER = logging.getLogger(__name__)

PASS = "pass"
FAIL = "fail"
UNDERPOWERED = "underpowered"
ADVISORY = "advisory"

# below this many replicates statistical checks make no pass/fail claim
UNDERPOWERED_N = 1000
Z_LIMIT = 3.0
NORMALIZATION_Z_LIMIT = 4.0
FIDIS_PASS_FRACTION = 0.95
TILT_HALF_WIDTH = 20.0
TILT_STEP = 0.05


@dataclass(frozen=True)
class CheckResult:
    config: str
    check: str
    status: str
    z: float = math.nan
    detail: str = ""


@dataclass(frozen=True)
class SuiteReport:
    checks: Tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(c.status != FAIL for c in self.checks)

    def lines(self) -> List[str]:
        if not self.checks:
            return ["no configurations to validate"]

        width = max(len(c.check) for c in self.checks)
        out = []
        for c in self.checks:
            z = "" if math.isnan(c.z) else f"z={c.z:+.2f}"
            out.append(
                f"{c.config:<16} {c.check:<{width}} {c.status:<12} {z:<9} {c.detail}"
            )

        return out


def _status(z: float, limit: float = Z_LIMIT) -> str:
    return PASS if abs(z) <= limit else FAIL


def _grid_delta(config: ExperimentConfig, default: float) -> float:
    return config.delta or default


def check_normalization(config: ExperimentConfig) -> List[CheckResult]:
    grid = GridSpec(0.5, -2.0, 2.0)
    _, z = normalization_check(
        config.process, grid, config.n, config.seed, config.workers
    )
    worst = float(np.max(np.abs(z)))

    return [
        CheckResult(
            config.name,
            "normalization",
            _status(worst, NORMALIZATION_Z_LIMIT),
            worst,
            f"max |z| of mean e^W(t) - 1 over {grid.size} points",
        )
    ]


def check_tilt_shift(config: ExperimentConfig) -> List[CheckResult]:
    shifts = config.extra("t_shift", [-1.0, 1.0])
    shifts = shifts if isinstance(shifts, list) else [shifts]
    out = []
    for t in shifts:
        lhs, rhs = tilt_shift_check(
            config.process,
            float(t),
            RatioSupSum(TILT_HALF_WIDTH),
            config.n,
            config.seed,
            config.workers,
            step=TILT_STEP,
        )
        z = lhs.z_against(rhs)
        out.append(
            CheckResult(
                config.name,
                f"tilt_shift(t={float(t):g})",
                _status(z),
                z,
                f"lhs {lhs.value:.4f} rhs {rhs.value:.4f}",
            )
        )

    return out


def check_resolvent(config: ExperimentConfig) -> List[CheckResult]:
    delta = _grid_delta(config, 1.0)
    T = float(config.extra("T", 8 * delta))
    lhs, rhs = resolvent_identity_check(
        config.process, delta, T, config.n, config.seed, config.workers
    )
    z = lhs.z_against(rhs)

    return [
        CheckResult(
            config.name,
            f"resolvent(T={T:g})",
            _status(z),
            z,
            f"lhs {lhs.value:.4f} rhs {rhs.value:.4f}",
        )
    ]


def check_fekete(config: ExperimentConfig) -> List[CheckResult]:
    delta = _grid_delta(config, 0.05)
    T_list = [float(T) for T in config.extra("T_list", [5.0, 10.0, 20.0])]
    results = fekete_diagnostic(
        config.process, delta, T_list, config.n, config.seed, config.workers
    )
    out = []
    for short, long_ in zip(results, results[1:]):
        # one-sided: value(2T) may only exceed value(T) by noise
        z = long_.details["paired_z"]
        out.append(
            CheckResult(
                config.name,
                f"fekete(T={short.window[1]:g}->{long_.window[1]:g})",
                PASS if z <= Z_LIMIT else FAIL,
                z,
                f"{short.value:.4f} -> {long_.value:.4f}",
            )
        )

    return out


def check_representations(config: ExperimentConfig) -> List[CheckResult]:
    delta = _grid_delta(config, 1.0)
    kwargs = dict(window=config.window, n=config.n, seed=config.seed)
    attainment = estimate_grid_attainment(
        config.process, delta, workers=config.workers, **kwargs
    )
    dy = estimate_dieker_yakir(
        config.process, delta, delta, workers=config.workers, **kwargs
    )
    z = attainment.z_against(dy)
    violations = dy.details["bound_violations"]

    return [
        CheckResult(
            config.name,
            f"representations(delta={delta:g})",
            _status(z),
            z,
            f"attainment {attainment.value:.4f} dy {dy.value:.4f}",
        ),
        CheckResult(
            config.name,
            "pathwise_bound",
            PASS if violations == 0 else FAIL,
            detail=f"{violations} replicates above 1/delta",
        ),
    ]


def check_fidis(config: ExperimentConfig) -> List[CheckResult]:
    delta = _grid_delta(config, 1.0)
    points = [float(t) for t in config.extra("points", [0.0, delta])]
    report = validate_fidis(
        config.process,
        points,
        delta,
        [float(x) for x in config.extra("x_levels", [-1.0, 0.0, 1.0, 2.0])],
        n_xi=config.n,
        n_cap=config.n,
        seed=config.seed,
        workers=config.workers,
        beta=float(config.extra("beta", DEFAULT_BETA)),
        k_pilot=int(config.extra("k_pilot", DEFAULT_K_PILOT)),
    )
    used = report.used
    worst = max((abs(p.z) for p in used), default=math.nan)
    status = PASS if used and report.pass_fraction >= FIDIS_PASS_FRACTION else FAIL

    return [
        CheckResult(
            config.name,
            "finite_dim_law",
            status,
            worst,
            f"{report.pass_fraction:.0%} of {len(used)} levels within 3 z; "
            f"clean {report.clean_fraction:.2%}",
        )
    ]


def check_gumbel_margins(config: ExperimentConfig) -> List[CheckResult]:
    delta = _grid_delta(config, 1.0)
    sample = sample_brown_resnick_batch(
        config.process,
        GridSpec(delta, 0.0, delta),
        config.n,
        config.seed,
        config.workers,
        beta=float(config.extra("beta", DEFAULT_BETA)),
        k_pilot=int(config.extra("k_pilot", DEFAULT_K_PILOT)),
    )
    tests = gumbel_margin_check(sample)
    pmin = min(t.pvalue for t in tests)

    return [
        CheckResult(
            config.name,
            "gumbel_margins",
            PASS if all(t.ok for t in tests) else FAIL,
            detail=f"min KS p-value {pmin:.4f}; clean {sample.clean_fraction:.2%}",
        )
    ]


def check_stationarity(config: ExperimentConfig) -> List[CheckResult]:
    delta = _grid_delta(config, 1.0)
    sample = sample_brown_resnick_batch(
        config.process,
        GridSpec(delta, 0.0, 3 * delta),
        config.n,
        config.seed,
        config.workers,
        beta=float(config.extra("beta", DEFAULT_BETA)),
        k_pilot=int(config.extra("k_pilot", DEFAULT_K_PILOT)),
    )
    out = []
    for lag in (0.0, delta):
        res = stationarity_check(sample, 0.0, 2 * delta, lag=lag)
        out.append(
            CheckResult(
                config.name,
                f"stationarity(lag={lag:g})",
                PASS if res.ok else FAIL,
                detail=f"KS p-value {res.pvalue:.4f} between t=0 and t={2 * delta:g}",
            )
        )

    return out


def check_levy_convention(config: ExperimentConfig) -> List[CheckResult]:
    process = config.process
    if not isinstance(process, LevyProcess) or not process.spec.spectrally_negative:
        return []

    deltas = [float(d) for d in config.extra("delta_list", EXTRAPOLATION_DELTAS)]
    _, estimate = extrapolate_dieker_yakir(
        process,
        deltas,
        window=config.window,
        n=config.n,
        seed=config.seed,
        workers=config.workers,
        orders=BROWNIAN_ORDERS,
    )
    report = resolve_levy_convention(estimate, extremal_index_candidates(process.spec))
    best = min(report.z_scores.values(), key=abs)

    return [
        CheckResult(
            config.name,
            "levy_convention",
            PASS if report.supported else FAIL,
            best,
            f"supported: {report.supported or 'undecided'}",
        )
    ]


def check_variance(config: ExperimentConfig) -> List[CheckResult]:
    process = config.process
    if not isinstance(process, GaussianProcess) or process.sigma2.kind != POWER:
        return []

    sigma2 = process.sigma2
    report = check_variance_conditions(sigma2, sigma2, 1.0, (10.0, 1e4))

    return [
        CheckResult(
            config.name,
            "variance_conditions",
            ADVISORY,
            detail="all heuristic flags hold" if report.all_ok else "flags failed",
        )
    ]


Check = Callable[[ExperimentConfig], List[CheckResult]]

STATISTICAL: Tuple[Tuple[str, Check], ...] = (
    ("normalization", check_normalization),
    ("tilt_shift", check_tilt_shift),
    ("resolvent", check_resolvent),
    ("fekete", check_fekete),
    ("representations", check_representations),
    ("finite_dim_law", check_fidis),
    ("gumbel_margins", check_gumbel_margins),
    ("stationarity", check_stationarity),
    ("levy_convention", check_levy_convention),
)


def validate_suite(configs: Iterable[ExperimentConfig]) -> SuiteReport:
    """
    Runs the property battery on each configuration.
    """
    checks = []
    for config in configs:
        try:
            checks.extend(check_variance(config))
        except PickandsError as e:
            checks.append(
                CheckResult(config.name, "variance_conditions", FAIL, detail=str(e))
            )

        underpowered = config.n < max(UNDERPOWERED_N, MIN_REPLICATES)
        levy = isinstance(config.process, LevyProcess)
        for name, check in STATISTICAL:
            if name == "levy_convention" and not levy:
                continue
            if underpowered:
                checks.append(
                    CheckResult(
                        config.name, name, UNDERPOWERED, detail=f"n = {config.n}"
                    )
                )
                continue
            LOGGER.info("%s: running %s", config.name, name)
            try:
                checks.extend(check(config))
            except PickandsError as e:
                LOGGER.error("%s: %s failed: %s", config.name, name, e)
                checks.append(CheckResult(config.name, name, FAIL, detail=str(e)))

    return SuiteReport(tuple(checks))
