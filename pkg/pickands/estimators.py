"""
Monte Carlo estimators of generalized Pickands constants and the structural
diagnostics tying their representations together.
"""
import logging
import math

from dataclasses import dataclass, field
from functools import partial
from typing import Any, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import scipy.integrate
import scipy.optimize

from .exceptions import ContractError
from .grid import MULTIPLE_RTOL, GridSpec, SamplePath, as_multiple
from .process import PathSampler, ProcessSpec
from .streams import Stream, map_blocks


LOGGER = logging.getLogger(__name__)

LIMIT = "limit"
DIEKER_YAKIR = "dieker_yakir"
GRID_ATTAINMENT = "grid_attainment"
CAPACITY = "capacity"
METHODS = (LIMIT, DIEKER_YAKIR, GRID_ATTAINMENT, CAPACITY)

MIN_REPLICATES = 100
DEFAULT_STEP = 0.02
# delta -> 0 steps and expansion orders of the Brownian discretization error
EXTRAPOLATION_DELTAS = (0.2, 0.1, 0.05)
BROWNIAN_ORDERS = (0.5, 1.0)
Z_95 = 1.96


@dataclass(frozen=True)
class ReplicateFunctionals:
    m_delta: float
    s_eta: float
    argmax_at_zero: bool

    @property
    def ratio(self) -> float:
        return self.m_delta / self.s_eta


@dataclass(frozen=True)
class EstimateResult:
    """
    A Monte Carlo estimate with its standard error and provenance.
    """

    value: float
    stderr: float
    n: int
    method: str
    window: Tuple[float, float]
    seed: int
    truncation_note: str = ""
    process: str = ""
    delta: float = 0.0
    eta: float = 0.0
    details: Mapping[str, Any] = field(default_factory=dict, compare=False)

    @property
    def ci95(self) -> Tuple[float, float]:
        return self.value - Z_95 * self.stderr, self.value + Z_95 * self.stderr

    @classmethod
    def from_samples(cls, samples: np.ndarray, **kwargs) -> "EstimateResult":
        samples = np.asarray(samples, dtype=float)
        n = samples.size
        stderr = float(np.std(samples, ddof=1) / math.sqrt(n)) if n > 1 else math.inf

        return cls(value=float(np.mean(samples)), stderr=stderr, n=n, **kwargs)

    def z_against(self, other: "EstimateResult") -> float:
        """
        z-score of the difference of two independent estimates.
        """
        return z_score(self.value - other.value, self.stderr, other.stderr)


def z_score(difference: float, *stderrs: float) -> float:
    scale = math.sqrt(sum(s * s for s in stderrs))
    if scale == 0:
        return 0.0 if difference == 0 else math.copysign(math.inf, difference)

    return difference / scale


def _check_replicates(n: int) -> None:
    if n < MIN_REPLICATES:
        raise ContractError(
            f"at least {MIN_REPLICATES} replicates are needed for a standard error, "
            f"got {n}"
        )


def _grid_functionals(
    values: np.ndarray,
    grid: GridSpec,
    target_delta: float,
    eta: float,
    window: Optional[Tuple[float, float]] = None,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    Row-wise M, S, the unscaled sum behind S (eta > 0) and the argmax flag.
    """
    inside = grid.restrict(*window) if window else np.ones(grid.size, dtype=bool)
    target = grid.subgrid_mask(target_delta) & inside
    exp_w = np.exp(values)

    m = exp_w[:, target].max(axis=1)
    if eta > 0:
        total = exp_w[:, grid.subgrid_mask(eta) & inside].sum(axis=1)
        s = eta * total
    else:
        total = scipy.integrate.trapezoid(exp_w[:, inside], dx=grid.delta, axis=1)
        s = total
    at_zero = np.all(values[:, target] <= 0, axis=1)

    return m, s, total, at_zero


def path_functionals(
    w: SamplePath, target_delta: float, eta: float
) -> ReplicateFunctionals:
    """
    M over the target_delta subgrid and S with spacing eta (trapezoid on the
    full grid when eta = 0) for a single path.
    """
    for spacing, what in ((target_delta, "target_delta"), (eta, "eta")):
        if spacing < 0:
            raise ContractError(f"{what} must be non-negative")
        if spacing > 0:
            as_multiple(spacing, w.grid.delta, what)

    m, s, _, at_zero = _grid_functionals(w.values[None, :], w.grid, target_delta, eta)

    return ReplicateFunctionals(float(m[0]), float(s[0]), bool(at_zero[0]))


def _resolve_window(
    process: ProcessSpec, window: Optional[Tuple[float, float]]
) -> Tuple[float, float]:
    if window is None:
        half = process.default_half_width()
        return -half, half

    lo, hi = window
    if not lo <= 0 <= hi:
        raise ContractError(f"window {window} must contain 0")

    return float(lo), float(hi)


def _sup_block(
    rng: np.random.Generator, size: int, sampler: PathSampler, mask: np.ndarray
) -> np.ndarray:
    values = sampler.sample(rng, size)

    return np.exp(values[:, mask].max(axis=1))


def estimate_limit_definition(
    process: ProcessSpec,
    delta: float,
    T: float,
    n: int,
    seed: int,
    workers: int = 1,
    step: Optional[float] = None,
) -> EstimateResult:
    """
    The finite-T proxy (1/T) E sup over delta*Z in [0, T] of e^W. By the
    subadditivity of T -> H_W([0, T]) it overestimates the constant.
    """
    _check_replicates(n)
    if not T > 0:
        raise ContractError(f"T must be positive, got {T!r}")

    step = delta if delta > 0 else (step or DEFAULT_STEP)
    grid = GridSpec(step, 0.0, T, target_delta=delta)
    sampler = process.sampler(grid)
    sups = map_blocks(
        partial(_sup_block, sampler=sampler, mask=grid.subgrid_mask(delta)),
        n,
        seed,
        Stream.LIMIT,
        workers,
    )

    return EstimateResult.from_samples(
        sups / T,
        method=LIMIT,
        window=(0.0, T),
        seed=seed,
        truncation_note=f"finite-T proxy, T={T:g}, step={step:g}",
        process=process.name,
        delta=delta,
    )


def _dieker_yakir_block(
    rng: np.random.Generator,
    size: int,
    sampler: PathSampler,
    target_delta: float,
    eta: float,
    inner: Tuple[float, float],
    check_bound: bool,
) -> np.ndarray:
    values = sampler.sample(rng, size)
    grid = sampler.grid
    m, s, total, _ = _grid_functionals(values, grid, target_delta, eta)
    m_in, s_in, _, _ = _grid_functionals(values, grid, target_delta, eta, inner)
    # M <= sum over the same grid, i.e. M / S <= 1 / delta, when eta = delta
    violations = m > total if check_bound else np.zeros(size, dtype=bool)

    return np.column_stack([m / s, m_in / s_in, violations])


def check_admissible(delta: float, eta: float) -> int:
    """
    Returns k with eta = k delta for delta > 0 (0 when delta = 0).
    """
    if delta < 0 or eta < 0:
        raise ContractError("delta and eta must be non-negative")
    if delta == 0:
        return 0

    k = as_multiple(eta, delta, "eta") if eta > 0 else 0
    if k < 1:
        raise ContractError(
            f"(delta, eta) = ({delta}, {eta}) is not admissible: "
            "delta > 0 requires eta = k * delta for some k >= 1"
        )

    return k


def estimate_dieker_yakir(
    process: ProcessSpec,
    delta: float,
    eta: float,
    window: Optional[Tuple[float, float]] = None,
    n: int = 10000,
    seed: int = 0,
    workers: int = 1,
    step: Optional[float] = None,
) -> EstimateResult:
    """
    E[M^delta / S^eta] on a truncated window, with the estimate on the inner
    half-window reported as a truncation diagnostic.
    """
    _check_replicates(n)
    k = check_admissible(delta, eta)
    lo, hi = _resolve_window(process, window)
    step = delta if delta > 0 else (step or DEFAULT_STEP)
    grid = GridSpec(step, lo, hi, eta=eta, target_delta=delta)

    rows = map_blocks(
        partial(
            _dieker_yakir_block,
            sampler=process.sampler(grid),
            target_delta=delta,
            eta=eta,
            inner=(lo / 2, hi / 2),
            check_bound=k == 1,
        ),
        n,
        seed,
        Stream.DIEKER_YAKIR,
        workers,
    )
    ratios, inner, violations = rows[:, 0], rows[:, 1], int(rows[:, 2].sum())
    value = float(np.mean(ratios))
    change = (float(np.mean(inner)) - value) / value

    notes = [f"window [{lo:g}, {hi:g}]", f"half-window change {change:+.2%}"]
    if delta == 0:
        notes.append(f"delta=0 proxy step={step:g}")
    if k > 1:
        notes.append("lower bound (eta = k*delta, k >= 2)")
    if violations:
        LOGGER.error("%d replicates exceed the pathwise bound 1/delta", violations)
    if abs(change) > 0.01:
        LOGGER.warning("window [%g, %g] may be too narrow: %s", lo, hi, notes[1])

    return EstimateResult.from_samples(
        ratios,
        method=DIEKER_YAKIR,
        window=(lo, hi),
        seed=seed,
        truncation_note="; ".join(notes),
        process=process.name,
        delta=delta,
        eta=eta,
        details={"half_window_change": change, "bound_violations": violations},
    )


def _attainment_block(
    rng: np.random.Generator, size: int, sampler: PathSampler
) -> np.ndarray:
    values = sampler.sample(rng, size)

    return np.all(values <= 0, axis=1).astype(float)


def estimate_grid_attainment(
    process: ProcessSpec,
    delta: float,
    window: Optional[Tuple[float, float]] = None,
    n: int = 10000,
    seed: int = 0,
    workers: int = 1,
) -> EstimateResult:
    """
    (1/delta) P(sup over delta*Z of W is attained at 0).
    """
    _check_replicates(n)
    if not delta > 0:
        raise ContractError("grid attainment needs delta > 0")

    lo, hi = _resolve_window(process, window)
    grid = GridSpec(delta, lo, hi, eta=delta, target_delta=delta)
    hits = map_blocks(
        partial(_attainment_block, sampler=process.sampler(grid)),
        n,
        seed,
        Stream.GRID_ATTAINMENT,
        workers,
    )
    p = float(np.mean(hits))

    return EstimateResult(
        value=p / delta,
        stderr=math.sqrt(p * (1 - p) / n) / delta,
        n=n,
        method=GRID_ATTAINMENT,
        window=(lo, hi),
        seed=seed,
        truncation_note=f"window [{lo:g}, {hi:g}]; binomial stderr",
        process=process.name,
        delta=delta,
        eta=delta,
        details={"successes": int(hits.sum())},
    )


def _prefix_sup_block(
    rng: np.random.Generator,
    size: int,
    sampler: PathSampler,
    mask: np.ndarray,
    ends: Tuple[int, ...],
) -> np.ndarray:
    exp_w = np.exp(sampler.sample(rng, size))
    exp_w[:, ~mask] = 0.0
    running = np.maximum.accumulate(exp_w, axis=1)

    return np.column_stack([running[:, end] for end in ends])


def fekete_diagnostic(
    process: ProcessSpec,
    delta: float,
    T_list: Sequence[float],
    n: int,
    seed: int,
    workers: int = 1,
    step: Optional[float] = None,
) -> List[EstimateResult]:
    """
    Limit-definition estimates along a doubling sequence of horizons, all read
    off the same nested paths (common random numbers).
    """
    _check_replicates(n)
    T_list = [float(T) for T in T_list]
    if not T_list:
        raise ContractError("T_list must not be empty")
    for short, long_ in zip(T_list, T_list[1:]):
        if not math.isclose(long_, 2 * short, rel_tol=MULTIPLE_RTOL):
            raise ContractError(f"T_list must be doublings, got {T_list}")

    step = delta if delta > 0 else (step or DEFAULT_STEP)
    grid = GridSpec(step, 0.0, T_list[-1], target_delta=delta)
    ends = tuple(int(math.floor(T / step + MULTIPLE_RTOL)) for T in T_list)
    rows = map_blocks(
        partial(
            _prefix_sup_block,
            sampler=process.sampler(grid),
            mask=grid.subgrid_mask(delta),
            ends=ends,
        ),
        n,
        seed,
        Stream.LIMIT,
        workers,
    )

    out = []
    scaled = rows / np.array(T_list)[None, :]
    for i, T in enumerate(T_list):
        paired_z = math.nan
        if i:
            # paired over common paths
            diff = scaled[:, i] - scaled[:, i - 1]
            stderr = float(diff.std(ddof=1)) / math.sqrt(n)
            paired_z = z_score(float(diff.mean()), stderr)
        out.append(
            EstimateResult.from_samples(
                scaled[:, i],
                method=LIMIT,
                window=(0.0, T),
                seed=seed,
                truncation_note=f"finite-T proxy, T={T:g}, step={step:g}; nested paths",
                process=process.name,
                delta=delta,
                details={"paired_z": paired_z},
            )
        )

    return out


class PathFunctional:
    """
    A functional of W restricted to a window E = [-half_width, half_width].

    ``evaluate`` computes the functional of the shifted path s -> W(s - offset)
    on E, i.e. of W on E - offset.
    """

    constant_invariant = False
    tag = ""

    def __init__(self, half_width: float) -> None:
        self._half_width = float(half_width)

    @property
    def half_width(self) -> float:
        return self._half_width

    def _window(self, grid: GridSpec, offset: float) -> np.ndarray:
        return grid.restrict(-self._half_width - offset, self._half_width - offset)

    def evaluate(self, values: np.ndarray, grid: GridSpec, offset: float) -> np.ndarray:
        raise NotImplementedError()  # pragma: no cover


class RatioSupSum(PathFunctional):
    """
    sup_E e^W / (delta sum_E e^W).
    """

    constant_invariant = True
    tag = "ratio_sup_sum"

    def evaluate(self, values: np.ndarray, grid: GridSpec, offset: float) -> np.ndarray:
        part = values[:, self._window(grid, offset)]
        # shifting by the row maximum leaves the ratio unchanged
        exp_w = np.exp(part - part.max(axis=1, keepdims=True))

        return 1.0 / (grid.delta * exp_w.sum(axis=1))


class ArgmaxIndicator(PathFunctional):
    """
    1{the argmax of W over E lies in A = [a_lo, a_hi]}, in the coordinates of
    the shifted path.
    """

    constant_invariant = True
    tag = "indicator_argmax_in_set"

    def __init__(self, half_width: float, a_lo: float, a_hi: float) -> None:
        super().__init__(half_width)
        self._a = (float(a_lo), float(a_hi))

    def evaluate(self, values: np.ndarray, grid: GridSpec, offset: float) -> np.ndarray:
        mask = self._window(grid, offset)
        where = grid.points[mask][np.argmax(values[:, mask], axis=1)] + offset
        lo, hi = self._a

        return ((where >= lo) & (where <= hi)).astype(float)


def functional(tag: str, half_width: float = 20.0, **kwargs) -> PathFunctional:
    if tag == RatioSupSum.tag:
        return RatioSupSum(half_width)
    if tag == ArgmaxIndicator.tag:
        return ArgmaxIndicator(half_width, *kwargs.get("a", (-1.0, 1.0)))

    raise ContractError(f"unknown functional {tag!r}")


def _tilt_block(
    rng: np.random.Generator,
    size: int,
    sampler: PathSampler,
    gamma: PathFunctional,
    t_shift: float,
    weighted: bool,
) -> np.ndarray:
    values = sampler.sample(rng, size)
    grid = sampler.grid
    if weighted:
        weight = np.exp(values[:, grid.index_of(t_shift)])
        return weight * gamma.evaluate(values, grid, 0.0)

    return gamma.evaluate(values, grid, t_shift)


def tilt_shift_check(
    process: ProcessSpec,
    t_shift: float,
    gamma: PathFunctional,
    n: int,
    seed: int,
    workers: int = 1,
    step: Optional[float] = None,
) -> Tuple[EstimateResult, EstimateResult]:
    """
    Both sides of E[e^{W(t)} Gamma(W)] = E[Gamma(W(. - t))] for a functional
    invariant under adding constants. The sides use independent streams.
    """
    if not getattr(gamma, "constant_invariant", False):
        raise ContractError(
            f"functional {type(gamma).__name__} is not invariant under constant shifts"
        )
    _check_replicates(n)

    step = step or DEFAULT_STEP
    as_multiple(t_shift, step, "t_shift")
    reach = gamma.half_width + abs(t_shift)
    grid = GridSpec(step, -reach, reach)
    sampler = process.sampler(grid)

    sides = []
    for weighted, stream in ((True, Stream.TILT_LHS), (False, Stream.TILT_RHS)):
        samples = map_blocks(
            partial(
                _tilt_block,
                sampler=sampler,
                gamma=gamma,
                t_shift=t_shift,
                weighted=weighted,
            ),
            n,
            seed,
            stream,
            workers,
        )
        sides.append(
            EstimateResult.from_samples(
                samples,
                method=gamma.tag,
                window=(-reach, reach),
                seed=seed,
                truncation_note=f"{'lhs' if weighted else 'rhs'} t_shift={t_shift:g}",
                process=process.name,
                delta=step,
            )
        )

    return sides[0], sides[1]


def _resolvent_block(
    rng: np.random.Generator, size: int, sampler: PathSampler, m: int, T: float
) -> np.ndarray:
    exp_w = np.exp(sampler.sample(rng, size))
    windows = np.lib.stride_tricks.sliding_window_view(exp_w, m + 1, axis=1)

    return (windows.max(axis=2) / windows.sum(axis=2)).sum(axis=1) / T


def resolvent_identity_check(
    process: ProcessSpec,
    delta: float,
    T: float,
    n: int,
    seed: int,
    workers: int = 1,
) -> Tuple[EstimateResult, EstimateResult]:
    """
    lhs: (1/T) E sup over delta*Z in [0, T] of e^W.
    rhs: (1/T) sum over shifts u of E[sup / sum over delta*Z in [-uT, (1-u)T]].
    """
    if not delta > 0:
        raise ContractError("the resolvent identity is checked on delta > 0 grids")

    lhs = estimate_limit_definition(process, delta, T, n, seed, workers)
    m = int(math.floor(T / delta + MULTIPLE_RTOL))
    grid = GridSpec(delta, -m * delta, m * delta)
    samples = map_blocks(
        partial(_resolvent_block, sampler=process.sampler(grid), m=m, T=T),
        n,
        seed,
        Stream.RESOLVENT,
        workers,
    )
    rhs = EstimateResult.from_samples(
        samples,
        method=LIMIT,
        window=(-m * delta, m * delta),
        seed=seed,
        truncation_note=f"shift average over {m + 1} windows, T={T:g}",
        process=process.name,
        delta=delta,
        eta=delta,
    )

    return lhs, rhs


def _normalization_block(
    rng: np.random.Generator, size: int, sampler: PathSampler
) -> np.ndarray:
    return np.exp(sampler.sample(rng, size))


def normalization_check(
    process: ProcessSpec, grid: GridSpec, n: int, seed: int, workers: int = 1
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Empirical mean of e^{W(t)} at every grid point and its z-score against 1.
    """
    _check_replicates(n)
    exp_w = map_blocks(
        partial(_normalization_block, sampler=process.sampler(grid)),
        n,
        seed,
        Stream.NORMALIZATION,
        workers,
    )
    mean = exp_w.mean(axis=0)
    stderr = exp_w.std(axis=0, ddof=1) / math.sqrt(n)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(stderr > 0, (mean - 1) / stderr, 0.0)

    return mean, z


def _fit_power_law(
    deltas: np.ndarray,
    values: np.ndarray,
    weights: np.ndarray,
    orders: Sequence[float],
) -> Tuple[np.ndarray, np.ndarray, float]:
    design = np.column_stack([np.ones_like(deltas)] + [deltas ** p for p in orders])
    sw = np.sqrt(weights)
    # coefficient map: coef = pinv(sqrt(W) X) sqrt(W) v
    solver = np.linalg.pinv(design * sw[:, None]) * sw[None, :]
    coef = solver @ values
    rss = float(np.sum(weights * (values - design @ coef) ** 2))

    return coef, solver, rss


def richardson_extrapolate(
    results: Sequence[Tuple[float, EstimateResult]],
    p_bounds: Tuple[float, float] = (0.5, 2.0),
    orders: Optional[Sequence[float]] = None,
) -> EstimateResult:
    """
    Fits value(delta) = H + a delta^p by weighted least squares with p free in
    p_bounds and returns H with its propagated standard error.

    With ``orders`` the exponents are fixed instead and one term is fitted per
    order: value(delta) = H + sum_j a_j delta^orders[j].
    """
    pairs = sorted(((float(d), r) for d, r in results), key=lambda x: -x[0])
    deltas = np.array([d for d, _ in pairs])
    if len(set(deltas)) < 3 or len(set(deltas)) != len(deltas):
        raise ContractError("extrapolation needs at least 3 distinct deltas")
    if np.any(deltas <= 0):
        raise ContractError("extrapolation deltas must be positive")
    ratios = deltas[:-1] / deltas[1:]
    if not np.allclose(ratios, ratios[0], rtol=1e-6):
        raise ContractError(f"deltas {list(deltas)} are not a geometric progression")
    if orders is not None:
        orders = tuple(float(p) for p in orders)
        if not orders or len(orders) >= len(deltas) or min(orders) <= 0:
            raise ContractError(
                f"{len(deltas)} deltas cannot fit positive orders {list(orders)}"
            )

    values = np.array([r.value for _, r in pairs])
    stderrs = np.array([r.stderr for _, r in pairs])
    if np.all(stderrs > 0) and np.all(np.isfinite(stderrs)):
        weights = 1 / stderrs ** 2
        weights /= weights.max()
    else:
        weights = np.ones_like(values)

    if orders is None:
        orders = (_fit_exponent(deltas, values, weights, p_bounds),)
    coef, solver, _ = _fit_power_law(deltas, values, weights, orders)
    stderr = float(np.sqrt(np.sum((solver[0] * stderrs) ** 2)))
    first = pairs[0][1]
    fitted = ", ".join(f"{p:.3f}" for p in orders)
    LOGGER.info("richardson fit: H=%.6g a=%s p=%s", coef[0], coef[1:], fitted)

    return EstimateResult(
        value=float(coef[0]),
        stderr=stderr,
        n=sum(r.n for _, r in pairs),
        method=first.method,
        window=first.window,
        seed=first.seed,
        truncation_note=(
            f"richardson delta->0 over {', '.join(f'{d:g}' for d in deltas)}; "
            f"{'fitted ' if len(orders) == 1 else ''}p={fitted}"
        ),
        process=first.process,
        delta=0.0,
        eta=0.0,
        details={
            "exponent": orders[0],
            "orders": orders,
            "slope": float(coef[1]),
        },
    )


def _fit_exponent(
    deltas: np.ndarray,
    values: np.ndarray,
    weights: np.ndarray,
    p_bounds: Tuple[float, float],
) -> float:
    def rss(p):
        return _fit_power_law(deltas, values, weights, (p,))[2]

    lo, hi = p_bounds
    scan = np.linspace(lo, hi, 301)
    best = scan[int(np.argmin([rss(p) for p in scan]))]
    step = scan[1] - scan[0]
    refined = scipy.optimize.minimize_scalar(
        rss,
        bounds=(max(lo, best - step), min(hi, best + step)),
        method="bounded",
        options={"xatol": 1e-12},
    )

    return float(refined.x) if refined.fun <= rss(best) else float(best)


def extrapolate_dieker_yakir(
    process: ProcessSpec,
    deltas: Sequence[float] = EXTRAPOLATION_DELTAS,
    window: Optional[Tuple[float, float]] = None,
    n: int = 10000,
    seed: int = 0,
    workers: int = 1,
    orders: Optional[Sequence[float]] = None,
) -> Tuple[List[EstimateResult], EstimateResult]:
    """
    Dieker-Yakir estimates at eta = delta for each delta and their delta -> 0
    extrapolation. Returns (per-delta estimates, extrapolated estimate).
    """
    per_delta = [
        estimate_dieker_yakir(process, d, d, window, n, seed, workers)
        for d in deltas
    ]
    limit = richardson_extrapolate(list(zip(deltas, per_delta)), orders=orders)

    return per_delta, limit


@dataclass(frozen=True)
class ConventionReport:
    estimate: EstimateResult
    candidates: Mapping[str, float]
    z_scores: Mapping[str, float]
    separation: float
    supported: Optional[str]

    def lines(self) -> List[str]:
        out = [
            f"estimate {self.estimate.value:.5f} +- {self.estimate.stderr:.5f}",
        ]
        for name, value in self.candidates.items():
            out.append(f"  {name} = {value:.5f}  z = {self.z_scores[name]:+.2f}")
        out.append(f"  candidates separated by {self.separation:.1f} stderr")
        out.append(f"  supported convention: {self.supported or 'undecided'}")

        return out


def resolve_levy_convention(
    estimate: EstimateResult,
    candidates: Mapping[str, float],
    z_accept: float = 3.0,
    min_separation: float = 5.0,
) -> ConventionReport:
    """
    Compares an estimate of the extremal index with the candidate closed-form
    values. A candidate is supported when it is the only one within z_accept
    and the candidates are at least min_separation stderr apart.
    """
    if not candidates:
        raise ContractError("no candidate values to compare against")

    z = {
        name: z_score(estimate.value - c, estimate.stderr)
        for name, c in candidates.items()
    }
    values = sorted(candidates.values())
    gaps = [b - a for a, b in zip(values, values[1:])]
    separation = math.inf
    if gaps and estimate.stderr > 0:
        separation = min(gaps) / estimate.stderr

    accepted = [name for name, score in z.items() if abs(score) <= z_accept]
    supported = None
    if len(accepted) == 1 and separation >= min_separation:
        supported = accepted[0]
    LOGGER.info("Lévy convention: z=%s supported=%s", z, supported)

    return ConventionReport(estimate, dict(candidates), z, separation, supported)
