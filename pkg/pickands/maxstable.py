"""
Brown-Resnick max-stable processes and M3 constants.

xi(t) = max_i (P_i + W_i(t)) with P_i = -ln(Gamma_i), Gamma_i the arrival
times of a unit-rate Poisson process and W_i i.i.d. copies of W.
"""
import logging
import math
import warnings

from dataclasses import dataclass, field
from functools import partial
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.integrate
import scipy.stats

from .estimators import (
    CAPACITY,
    MIN_REPLICATES,
    EstimateResult,
    estimate_dieker_yakir,
    estimate_limit_definition,
    z_score,
)
from .exceptions import ContractError
from .grid import GridSpec
from .process import PathSampler, ProcessSpec
from .streams import Stream, map_blocks


LOGGER = logging.getLogger(__name__)

DEFAULT_BETA = 1e-4
DEFAULT_K_PILOT = 10_000
HARD_CAP = 100_000
# probability range in which -ln P is estimable
P_RANGE = (0.01, 0.99)
KS_LEVEL = 0.001

QUADRATIC = "quadratic"
ABS = "abs"
TABULATED = "tabulated"


@dataclass(frozen=True)
class MaxStablePath:
    grid: GridSpec
    values: np.ndarray = field(repr=False)
    n_points_used: int
    truncation_bound: float
    stopped_cleanly: bool

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.size,):
            raise ContractError("path length does not match the grid")
        if not np.all(np.isfinite(values)):
            raise ContractError("max-stable path values must be finite")
        if self.n_points_used < 1:
            raise ContractError("at least one Poisson point is used")

        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class MaxStableSample:
    """
    A batch of Brown-Resnick paths on one grid.
    """

    grid: GridSpec
    values: np.ndarray = field(repr=False)
    n_points_used: np.ndarray = field(repr=False)
    stopped_cleanly: np.ndarray = field(repr=False)
    truncation_bound: float

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def clean_fraction(self) -> float:
        return float(np.mean(self.stopped_cleanly)) if len(self) else 0.0

    def clean(self) -> "MaxStableSample":
        keep = self.stopped_cleanly

        return MaxStableSample(
            self.grid,
            self.values[keep],
            self.n_points_used[keep],
            self.stopped_cleanly[keep],
            self.truncation_bound,
        )

    def path(self, i: int) -> MaxStablePath:
        return MaxStablePath(
            self.grid,
            self.values[i],
            int(self.n_points_used[i]),
            self.truncation_bound,
            bool(self.stopped_cleanly[i]),
        )

    def sup_over(self, points: Sequence[float]) -> np.ndarray:
        index = [self.grid.index_of(t) for t in points]

        return self.values[:, index].max(axis=1)


class ShapeFunction:
    """
    Deterministic M3 shape function F with sup F = F(0) = 0.
    """

    def __init__(
        self,
        kind: str,
        a: float = 1.0,
        table: Optional[Sequence[Tuple[float, float]]] = None,
    ) -> None:
        self._kind = kind
        self._a = float(a)
        self._t = self._f = None
        if kind == ABS and not self._a > 0:
            raise ContractError(f"abs shape needs a > 0, got {a!r}")
        if kind == TABULATED:
            pairs = sorted((float(t), float(f)) for t, f in table or ())
            self._t = np.array([p[0] for p in pairs])
            self._f = np.array([p[1] for p in pairs])
            if 0.0 not in self._t or len(set(self._t)) != len(self._t):
                raise ContractError("tabulated shape needs distinct points including 0")
            if self._f[self._t == 0][0] != 0 or np.any(self._f > 0):
                raise ContractError("tabulated shape needs sup F = F(0) = 0")
        elif kind not in (QUADRATIC, ABS):
            raise ContractError(f"unknown shape kind {kind!r}")

    @classmethod
    def quadratic(cls) -> "ShapeFunction":
        return cls(QUADRATIC)

    @classmethod
    def abs(cls, a: float = 1.0) -> "ShapeFunction":
        return cls(ABS, a=a)

    @classmethod
    def tabulated(cls, pairs: Sequence[Tuple[float, float]]) -> "ShapeFunction":
        return cls(TABULATED, table=pairs)

    @property
    def kind(self) -> str:
        return self._kind

    @property
    def support(self) -> Tuple[float, float]:
        if self._kind == TABULATED:
            return float(self._t[0]), float(self._t[-1])

        return -math.inf, math.inf

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self._kind == QUADRATIC:
            return -(t ** 2)
        if self._kind == ABS:
            return -self._a * np.abs(t)

        lo, hi = self.support
        if np.any((t < lo) | (t > hi)):
            raise ContractError(f"shape evaluated outside its table [{lo}, {hi}]")

        return np.interp(t, self._t, self._f)


def _m3_integral(f: ShapeFunction, quad_tol: float) -> float:
    def integrand(t):
        return float(np.exp(f(t)))

    if f.kind == TABULATED:
        lo, hi = f.support
        total, _ = scipy.integrate.quad(
            integrand, lo, hi, epsrel=quad_tol, points=[0.0], limit=200
        )
        if max(integrand(lo), integrand(hi)) * (hi - lo) > quad_tol * total:
            raise ContractError("tabulated shape is not integrable within its table")
        return total

    half = 1.0
    total, _ = scipy.integrate.quad(integrand, -half, half, epsrel=quad_tol)
    for _ in range(64):
        tail = sum(
            scipy.integrate.quad(integrand, a, b, epsrel=quad_tol)[0]
            for a, b in ((-2 * half, -half), (half, 2 * half))
        )
        total += tail
        half *= 2
        if tail <= quad_tol * total:
            return total

    raise ContractError("shape integral did not converge")  # pragma: no cover


def _m3_lattice_sum(f: ShapeFunction, delta: float, quad_tol: float) -> float:
    total = 1.0
    lo, hi = f.support
    k = 1
    while True:
        if k * delta > hi or -k * delta < lo:
            raise ContractError("tabulated shape is not summable within its table")
        term = float(np.exp(f(k * delta)) + np.exp(f(-k * delta)))
        total += term
        if term < quad_tol * total:
            return total
        k += 1


def m3_constant_deterministic(
    f: ShapeFunction, delta: float = 0.0, quad_tol: float = 1e-10
) -> float:
    """
    C = 1 / integral of e^F over R (delta = 0), or
    C = 1 / (delta * sum over delta*Z of e^F) (delta > 0).
    """
    if delta < 0:
        raise ContractError("delta must be non-negative")
    if not 0 < quad_tol < 1:
        raise ContractError("quad_tol must lie in (0, 1)")

    if delta == 0:
        return 1.0 / _m3_integral(f, quad_tol)

    return 1.0 / (delta * _m3_lattice_sum(f, delta, quad_tol))


def _sup_w_block(
    rng: np.random.Generator, size: int, sampler: PathSampler
) -> np.ndarray:
    return sampler.sample(rng, size).max(axis=1)


def pilot_quantile(
    process: ProcessSpec,
    grid: GridSpec,
    beta: float = DEFAULT_BETA,
    k_pilot: int = DEFAULT_K_PILOT,
    seed: int = 0,
    workers: int = 1,
) -> float:
    """
    Empirical (1 - beta) quantile of sup_grid W from a dedicated pilot stream.
    """
    if not 0 < beta < 1:
        raise ContractError(f"beta must lie in (0, 1), got {beta!r}")

    sups = map_blocks(
        partial(_sup_w_block, sampler=process.sampler(grid)),
        k_pilot,
        seed,
        Stream.PILOT,
        workers,
    )
    q = float(np.quantile(sups, 1 - beta))
    LOGGER.debug("pilot quantile q=%.4f (beta=%g, k=%d)", q, beta, k_pilot)

    return q


def _brown_resnick_block(
    rng: np.random.Generator,
    size: int,
    sampler: PathSampler,
    q: float,
    cap: int,
) -> np.ndarray:
    points = sampler.grid.size
    gamma = np.zeros(size)
    xi = np.full((size, points), -np.inf)
    used = np.zeros(size, dtype=int)
    clean = np.ones(size, dtype=bool)
    active = np.ones(size, dtype=bool)

    while active.any():
        idx = np.nonzero(active)[0]
        gamma[idx] += rng.standard_exponential(idx.size)
        p = -np.log(gamma[idx])
        # no later point can raise the running maximum (up to probability beta)
        stop = (used[idx] > 0) & (p + q <= xi[idx].min(axis=1))
        active[idx[stop]] = False

        go, p = idx[~stop], p[~stop]
        if go.size == 0:
            break
        xi[go] = np.maximum(xi[go], p[:, None] + sampler.sample(rng, go.size))
        used[go] += 1

        capped = go[used[go] >= cap]
        active[capped] = False
        clean[capped] = False

    return np.column_stack([xi, used, clean])


def sample_brown_resnick_batch(
    process: ProcessSpec,
    grid: GridSpec,
    n: int,
    seed: int,
    workers: int = 1,
    beta: float = DEFAULT_BETA,
    k_pilot: int = DEFAULT_K_PILOT,
    q: Optional[float] = None,
    cap: int = HARD_CAP,
) -> MaxStableSample:
    """
    n independent Brown-Resnick paths. The pilot quantile is computed once
    (unless given) and shared by all paths.
    """
    if q is None:
        q = pilot_quantile(process, grid, beta, k_pilot, seed, workers)

    rows = map_blocks(
        partial(
            _brown_resnick_block, sampler=process.sampler(grid), q=q, cap=cap
        ),
        n,
        seed,
        Stream.BROWN_RESNICK,
        workers,
    )
    sample = MaxStableSample(
        grid,
        rows[:, : grid.size],
        rows[:, grid.size].astype(int),
        rows[:, grid.size + 1].astype(bool),
        q,
    )
    if sample.clean_fraction < 1:
        warnings.warn(
            f"{int(len(sample) * (1 - sample.clean_fraction))} of {len(sample)} "
            f"Brown-Resnick paths hit the cap of {cap} Poisson points"
        )

    return sample


def sample_brown_resnick(
    process: ProcessSpec,
    grid: GridSpec,
    beta: float = DEFAULT_BETA,
    k_pilot: int = DEFAULT_K_PILOT,
    rng: Optional[np.random.Generator] = None,
    q: Optional[float] = None,
) -> MaxStablePath:
    """
    One Brown-Resnick path drawn from rng.

    Without ``q`` every call runs a fresh pilot of k_pilot paths to find the
    stopping level. For repeated draws compute it once with
    ``pilot_quantile`` and pass it as ``q``, or use
    ``sample_brown_resnick_batch``.
    """
    rng = rng if rng is not None else np.random.default_rng()
    if q is None:
        q = pilot_quantile(process, grid, beta, k_pilot, int(rng.integers(2 ** 32)))

    row = _brown_resnick_block(rng, 1, process.sampler(grid), q, HARD_CAP)[0]
    path = MaxStablePath(grid, row[: grid.size], int(row[-2]), q, bool(row[-1]))
    if not path.stopped_cleanly:
        warnings.warn(f"Brown-Resnick path hit the cap of {HARD_CAP} Poisson points")

    return path


def _point_grid(points: Sequence[float], delta: float) -> GridSpec:
    if len(points) == 0:
        raise ContractError("the point set E must not be empty")

    return GridSpec(delta, min(min(points), 0.0), max(max(points), 0.0))


def _capacity_block(
    rng: np.random.Generator, size: int, sampler: PathSampler, index: List[int]
) -> np.ndarray:
    return np.exp(sampler.sample(rng, size)[:, index].max(axis=1))


def capacity_functional(
    process: ProcessSpec,
    points: Sequence[float],
    delta: float,
    n: int,
    seed: int,
    workers: int = 1,
) -> EstimateResult:
    """
    H_W(E) = E sup over E of e^W for a finite set E of points on delta*Z.
    """
    grid = _point_grid(points, delta)
    index = sorted({grid.index_of(t) for t in points})
    samples = map_blocks(
        partial(_capacity_block, sampler=process.sampler(grid), index=index),
        n,
        seed,
        Stream.CAPACITY,
        workers,
    )

    return EstimateResult.from_samples(
        samples,
        method=CAPACITY,
        window=grid.window,
        seed=seed,
        truncation_note=f"E = {{{', '.join(f'{t:g}' for t in sorted(set(points)))}}}",
        process=process.name,
        delta=delta,
    )


def _neg_log_probability(hits: np.ndarray) -> Tuple[float, float, float]:
    """
    p, -ln p and the delta-method stderr of -ln p.
    """
    n = hits.size
    p = float(np.mean(hits))
    if p == 0:
        return p, math.inf, math.inf

    return p, -math.log(p), math.sqrt((1 - p) / (n * p))


@dataclass(frozen=True)
class LevelResult:
    x: float
    probability: float
    observed: float
    observed_stderr: float
    expected: float
    expected_stderr: float
    z: float
    excluded: str = ""

    @property
    def ok(self) -> bool:
        return not self.excluded and abs(self.z) <= 3


@dataclass(frozen=True)
class FidisReport:
    points: Tuple[float, ...]
    capacity: EstimateResult
    levels: Tuple[LevelResult, ...]
    clean_fraction: float

    @property
    def used(self) -> List[LevelResult]:
        return [p for p in self.levels if not p.excluded]

    @property
    def pass_fraction(self) -> float:
        used = self.used
        return sum(p.ok for p in used) / len(used) if used else 0.0

    def lines(self) -> List[str]:
        out = [
            f"E = {self.points}: H_W(E) = {self.capacity.value:.5f} "
            f"+- {self.capacity.stderr:.5f}; clean paths {self.clean_fraction:.2%}"
        ]
        for p in self.levels:
            if p.excluded:
                out.append(f"  x = {p.x:+g}: excluded ({p.excluded})")
            else:
                out.append(
                    f"  x = {p.x:+g}: -ln P = {p.observed:.5f}, "
                    f"H e^-x = {p.expected:.5f}, z = {p.z:+.2f}"
                )

        return out


def _compare_level(
    x: float,
    hits: np.ndarray,
    expected: float,
    expected_stderr: float,
    scale: float = 1.0,
) -> LevelResult:
    p, observed, stderr = _neg_log_probability(hits)
    lo, hi = P_RANGE
    if not lo <= p <= hi:
        return LevelResult(
            x,
            p,
            math.nan,
            math.nan,
            expected,
            expected_stderr,
            math.nan,
            excluded=f"P = {p:.4f} outside [{lo}, {hi}]",
        )

    observed, stderr = observed * scale, stderr * scale
    z = z_score(observed - expected, stderr, expected_stderr)

    return LevelResult(x, p, observed, stderr, expected, expected_stderr, z)


def validate_fidis(
    process: ProcessSpec,
    points: Sequence[float],
    delta: float,
    x_levels: Sequence[float],
    n_xi: int,
    n_cap: int,
    seed: int,
    workers: int = 1,
    beta: float = DEFAULT_BETA,
    k_pilot: int = DEFAULT_K_PILOT,
) -> FidisReport:
    """
    Compares -ln P(sup over E of xi <= x) from simulated Brown-Resnick paths
    with H_W(E) e^-x from the capacity functional.
    """
    capacity = capacity_functional(process, points, delta, n_cap, seed, workers)
    grid = _point_grid(points, delta)
    sample = sample_brown_resnick_batch(
        process, grid, n_xi, seed, workers, beta, k_pilot
    ).clean()
    sup = sample.sup_over(points)

    levels = []
    for x in x_levels:
        scale = math.exp(-x)
        levels.append(
            _compare_level(
                x, sup <= x, capacity.value * scale, capacity.stderr * scale
            )
        )

    report = FidisReport(
        tuple(points), capacity, tuple(levels), len(sample) / n_xi
    )
    for line in report.lines():
        LOGGER.info(line)

    return report


@dataclass(frozen=True)
class BlockCheckReport:
    T: float
    delta: float
    reference: EstimateResult
    finite_horizon: EstimateResult
    levels: Tuple[LevelResult, ...]
    finite_horizon_z: Tuple[float, ...]
    clean_fraction: float
    caveat: str

    def lines(self) -> List[str]:
        out = [
            f"extremal index on [0, {self.T:g}], delta = {self.delta:g}: "
            f"reference {self.reference.value:.4f} +- {self.reference.stderr:.4f}, "
            f"finite-T {self.finite_horizon.value:.4f}; "
            f"clean paths {self.clean_fraction:.2%}",
            f"  {self.caveat}",
        ]
        for p, z_fin in zip(self.levels, self.finite_horizon_z):
            if p.excluded:
                out.append(f"  x = {p.x:+g}: excluded ({p.excluded})")
            else:
                out.append(
                    f"  x = {p.x:+g}: H = {p.observed:.4f} +- {p.observed_stderr:.4f}"
                    f", z(reference) = {p.z:+.2f}, z(finite-T) = {z_fin:+.2f}"
                )

        return out


def extremal_index_block_check(
    process: ProcessSpec,
    delta: float,
    T: float,
    x_levels: Sequence[float],
    n: int,
    seed: int,
    workers: int = 1,
    beta: float = DEFAULT_BETA,
    k_pilot: int = DEFAULT_K_PILOT,
    reference: Optional[EstimateResult] = None,
) -> BlockCheckReport:
    """
    Inverts the Gumbel limit P(sup over [0, T] of xi <= x + ln T) into
    H(x) = -ln(P) e^x and compares it with a Dieker-Yakir estimate and with
    the finite-T value (1/T) H_W([0, T]), for which the relation is exact.
    """
    if not delta > 0:
        raise ContractError("the block check runs on delta > 0 grids")
    if n < MIN_REPLICATES:
        raise ContractError(f"at least {MIN_REPLICATES} paths are needed")

    if reference is None:
        reference = estimate_dieker_yakir(
            process, delta, delta, n=n, seed=seed, workers=workers
        )
    finite = estimate_limit_definition(process, delta, T, n, seed, workers)

    grid = GridSpec(delta, 0.0, T)
    sample = sample_brown_resnick_batch(
        process, grid, n, seed, workers, beta, k_pilot
    ).clean()
    sup = sample.values.max(axis=1)

    levels, z_finite = [], []
    for x in x_levels:
        level = _compare_level(
            x,
            sup <= x + math.log(T),
            reference.value,
            reference.stderr,
            scale=math.exp(x),
        )
        levels.append(level)
        z_finite.append(
            z_score(level.observed - finite.value, level.observed_stderr, finite.stderr)
            if not level.excluded
            else math.nan
        )

    return BlockCheckReport(
        T,
        delta,
        reference,
        finite,
        tuple(levels),
        tuple(z_finite),
        len(sample) / n,
        caveat=(
            f"finite-T estimate at T = {T:g}; the Gumbel limit holds as T -> oo, "
            "so deviations from the reference include finite-T bias"
        ),
    )


@dataclass(frozen=True)
class KSResult:
    t: float
    statistic: float
    pvalue: float

    @property
    def ok(self) -> bool:
        return self.pvalue >= KS_LEVEL


def gumbel_margin_check(
    sample: MaxStableSample, points: Optional[Sequence[float]] = None
) -> List[KSResult]:
    """
    KS test of the cleanly stopped margins against exp(-e^-x).
    """
    clean = sample.clean()
    if len(clean) == 0:
        raise ContractError("no cleanly stopped paths to test")

    points = sample.grid.points if points is None else points
    out = []
    for t in points:
        values = clean.values[:, clean.grid.index_of(t)]
        res = scipy.stats.kstest(values, scipy.stats.gumbel_r.cdf)
        out.append(KSResult(float(t), float(res.statistic), float(res.pvalue)))

    return out


def stationarity_check(
    sample: MaxStableSample, t_a: float, t_b: float, lag: float = 0.0
) -> KSResult:
    """
    Two-sample KS test between the laws of max(xi(t), xi(t + lag)) at t = t_a
    and t = t_b. With lag = 0 this compares the margins.
    """
    clean = sample.clean()
    if len(clean) == 0:
        raise ContractError("no cleanly stopped paths to test")
    if lag < 0:
        raise ContractError(f"lag must be non-negative, got {lag}")

    def pair_max(t):
        first = clean.values[:, clean.grid.index_of(t)]
        return np.maximum(first, clean.values[:, clean.grid.index_of(t + lag)])

    a, b = pair_max(t_a), pair_max(t_b)
    res = scipy.stats.ks_2samp(a, b)

    return KSResult(float(t_b - t_a), float(res.statistic), float(res.pvalue))
