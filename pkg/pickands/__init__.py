from .api import (
    RunOutcome,
    anchor_configs,
    estimate,
    run,
    simulate,
    sweep,
    validate_suite,
)
from .config import ExperimentConfig, load_config
from .estimators import (
    EstimateResult,
    ReplicateFunctionals,
    estimate_dieker_yakir,
    estimate_grid_attainment,
    estimate_limit_definition,
    extrapolate_dieker_yakir,
    fekete_diagnostic,
    path_functionals,
    resolve_levy_convention,
    resolvent_identity_check,
    richardson_extrapolate,
    tilt_shift_check,
)
from .gaussian import (
    VarianceFunction,
    covariance_from_variogram,
    drift_adjust_gaussian,
    sample_gaussian_path,
    sample_variance_mixed,
)
from .grid import GridSpec, SamplePath
from .levy import (
    LevySpec,
    drift_compensate,
    laplace_exponent,
    sample_levy_two_sided,
    tilt_negative_side,
)
from .maxstable import (
    MaxStablePath,
    ShapeFunction,
    capacity_functional,
    extremal_index_block_check,
    m3_constant_deterministic,
    sample_brown_resnick,
    validate_fidis,
)
from .process import GaussianProcess, LevyProcess, VarianceMixedProcess


__version__ = "0.1.0"
