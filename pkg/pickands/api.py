import logging
import math
import warnings

from dataclasses import dataclass, field
from functools import partial
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .config import FEKETE, ExperimentConfig
from .estimators import (
    CAPACITY,
    DIEKER_YAKIR,
    GRID_ATTAINMENT,
    LIMIT,
    EstimateResult,
    estimate_dieker_yakir,
    estimate_grid_attainment,
    estimate_limit_definition,
    fekete_diagnostic,
    richardson_extrapolate,
)
from .exceptions import (
    ConfigError,
    ContractError,
    MomentConditionError,
    PickandsError,
)
from .maxstable import (
    DEFAULT_BETA,
    DEFAULT_K_PILOT,
    capacity_functional,
    sample_brown_resnick_batch,
)
from .records import write_records
from .streams import Stream, map_blocks
from .suite import SuiteReport
from .suite import validate_suite as _validate_suite


LOGGER = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_MOMENT = 3
EXIT_NUMERIC = 4

W_PATHS = "w"
XI_PATHS = "xi"


@dataclass(frozen=True)
class RunOutcome:
    status: int
    results: List[EstimateResult] = field(default_factory=list)
    message: str = ""


def exit_code(error: PickandsError) -> int:
    """
    Maps an error to the stable CLI exit status.
    """
    if isinstance(error, MomentConditionError):
        return EXIT_MOMENT
    if isinstance(error, (ConfigError, ContractError)):
        return EXIT_CONFIG

    return EXIT_NUMERIC


def estimate(config: ExperimentConfig) -> List[EstimateResult]:
    """
    Runs the estimator selected by ``config.method``.
    """
    config.validate()
    process = config.process
    common = dict(n=config.n, seed=config.seed, workers=config.workers)
    method = config.method

    if method == LIMIT:
        T = float(config.require_extra("T"))
        return [
            estimate_limit_definition(
                process, config.delta, T, step=config.step, **common
            )
        ]
    if method == DIEKER_YAKIR:
        return [
            estimate_dieker_yakir(
                process,
                config.delta,
                config.eta,
                window=config.window,
                step=config.step,
                **common,
            )
        ]
    if method == GRID_ATTAINMENT:
        return [
            estimate_grid_attainment(
                process, config.delta, window=config.window, **common
            )
        ]
    if method == CAPACITY:
        points = [float(t) for t in config.require_extra("points")]
        return [
            capacity_functional(process, points, config.delta or config.step, **common)
        ]
    if method == FEKETE:
        T_list = [float(T) for T in config.require_extra("T_list")]
        return fekete_diagnostic(
            process, config.delta, T_list, step=config.step, **common
        )

    raise ConfigError("method", f"unsupported method {method!r}")  # pragma: no cover


def _write(config: ExperimentConfig, results: List[EstimateResult], mirror: bool):
    write_records(config.output, results, config.format, mirror=mirror)
    for r in results:
        lo, hi = r.ci95
        LOGGER.info(
            "%s %s delta=%g: %.6f +- %.6f [%.6f, %.6f] (%s)",
            r.method,
            r.process,
            r.delta,
            r.value,
            r.stderr,
            lo,
            hi,
            r.truncation_note,
        )


def run(config: ExperimentConfig, mirror: bool = False) -> RunOutcome:
    """
    Estimates, writes one record per estimate and maps failures to exit codes.
    """
    try:
        results = estimate(config)
        _write(config, results, mirror)
    except PickandsError as e:
        LOGGER.error("%s", e)
        return RunOutcome(exit_code(e), message=str(e))

    return RunOutcome(EXIT_OK, results)


def sweep(
    config: ExperimentConfig,
    delta_list: Optional[Sequence[float]] = None,
    mirror: bool = False,
) -> List[EstimateResult]:
    """
    Dieker-Yakir (eta = delta) and grid-attainment estimates per delta, plus a
    delta -> 0 extrapolation of the Dieker-Yakir values.
    """
    config.validate()
    if delta_list is None:
        delta_list = config.require_extra("delta_list")
    delta_list = [float(d) for d in delta_list]
    if not delta_list or any(d <= 0 for d in delta_list):
        raise ConfigError("extras.delta_list", "needs positive deltas")

    process = config.process
    common = dict(
        window=config.window, n=config.n, seed=config.seed, workers=config.workers
    )
    records, dy = [], []
    for delta in delta_list:
        est = estimate_dieker_yakir(process, delta, delta, **common)
        att = estimate_grid_attainment(process, delta, **common)
        z = att.z_against(est)
        LOGGER.info(
            "delta=%g: dy %.5f attainment %.5f z=%+.2f", delta, est.value, att.value, z
        )
        records.extend([est, att])
        dy.append((delta, est))

    if len(set(delta_list)) >= 3:
        records.append(richardson_extrapolate(dy))
    else:
        warnings.warn(
            f"sweep over {len(set(delta_list))} deltas: at least 3 are needed "
            "for extrapolation, only per-delta records are written"
        )

    _write(config, records, mirror)

    return records


def _path_block(rng: np.random.Generator, size: int, sampler) -> np.ndarray:
    return sampler.sample(rng, size)


def simulate(
    config: ExperimentConfig, kind: str = W_PATHS, paths: int = 10
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Raw W or Brown-Resnick paths on the config grid, as (times, values).
    """
    config.validate()
    grid = config.grid()
    if kind == W_PATHS:
        values = map_blocks(
            partial(_path_block, sampler=config.process.sampler(grid)),
            paths,
            config.seed,
            Stream.SIMULATE,
            config.workers,
        )
    elif kind == XI_PATHS:
        values = sample_brown_resnick_batch(
            config.process,
            grid,
            paths,
            config.seed,
            config.workers,
            beta=float(config.extra("beta", DEFAULT_BETA)),
            k_pilot=int(config.extra("k_pilot", DEFAULT_K_PILOT)),
        ).values
    else:
        raise ContractError(f"unknown path kind {kind!r}")

    return grid.points, values


def validate_suite(configs: Iterable[ExperimentConfig]) -> SuiteReport:
    configs = [c.validate() for c in configs]

    return _validate_suite(configs)


def anchor_configs(n: int = 100_000, seed: int = 2022) -> List[ExperimentConfig]:
    """
    The closed-form anchors: Brownian (H = 1), the rank-one line
    (H = 1/sqrt(pi)) and Brownian motion with drift as a Lévy process (H = 1).
    """
    base = dict(method=DIEKER_YAKIR, n=n, seed=seed, workers=1)

    return [
        ExperimentConfig.from_dict(
            dict(
                name="alpha1",
                process={"kind": "gaussian", "variance": {"alpha": 1.0, "scale": 2.0}},
                grid={"delta": 0.0, "eta": 0.0, "step": 0.02, "window": [-40.0, 40.0]},
                extras={"delta_list": [0.2, 0.1, 0.05]},
                **base,
            )
        ),
        ExperimentConfig.from_dict(
            dict(
                name="alpha2",
                process={"kind": "gaussian", "variance": {"alpha": 2.0, "scale": 2.0}},
                grid={"delta": 0.0, "eta": 0.0, "step": 0.02, "window": [-8.0, 8.0]},
                extras={"delta_list": [0.4, 0.2, 0.1]},
                **base,
            )
        ),
        ExperimentConfig.from_dict(
            dict(
                name="levy_bm",
                process={
                    "kind": "levy",
                    "variant": "brownian_drift",
                    "mu": 0.0,
                    "sigma": math.sqrt(2),
                },
                grid={"delta": 0.0, "eta": 0.0, "step": 0.02, "window": [-40.0, 40.0]},
                **base,
            )
        ),
    ]
