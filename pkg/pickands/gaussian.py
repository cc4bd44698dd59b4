"""
Centered Gaussian processes with stationary increments on uniform grids.

The process B is described by its variance function sigma^2 (the variogram,
since B(0) = 0). Paths are produced either by circulant embedding of the
stationary increment sequence or by a dense Cholesky factorization of the
covariance matrix.
"""
import logging
import math

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.fft
import scipy.linalg

from .exceptions import ContractError, DomainError, FactorizationError
from .grid import GridSpec, SamplePath


LOGGER = logging.getLogger(__name__)

POWER = "power"
TABULATED = "tabulated"

# Circulant eigenvalues in [-CLIP_RTOL * max, 0) are clipped to zero
CLIP_RTOL = 1e-10
JITTER_RTOL = 1e-12
JITTER_DOUBLINGS = 3


@dataclass(frozen=True)
class VarianceFunction:
    """
    sigma^2(t) = scale * |t|^alpha (power kind) or a piecewise linear
    interpolation of (t_i, sigma^2(t_i)) pairs (tabulated kind).
    """

    kind: str
    alpha: float = 0.0
    scale: float = 0.0
    table_t: Tuple[float, ...] = field(default=(), repr=False)
    table_s2: Tuple[float, ...] = field(default=(), repr=False)

    def __post_init__(self) -> None:
        if self.kind == POWER:
            if not 0 < self.alpha <= 2:
                raise ContractError(f"alpha must lie in (0, 2], got {self.alpha!r}")
            if self.scale < 0:
                raise ContractError(f"scale must be >= 0, got {self.scale!r}")
        elif self.kind == TABULATED:
            t = np.asarray(self.table_t, dtype=float)
            s2 = np.asarray(self.table_s2, dtype=float)
            if t.size == 0 or t.shape != s2.shape:
                raise ContractError("tabulated variance needs matching t and s2")
            if t[0] < 0 or np.any(np.diff(t) <= 0):
                raise ContractError("tabulated t must be >= 0 and strictly increasing")
            if np.any(s2 < 0):
                raise ContractError("tabulated variance must be non-negative")
            if t[0] == 0 and s2[0] != 0:
                raise ContractError("tabulated variance must vanish at t = 0")
            if t[0] > 0:
                t = np.concatenate([[0.0], t])
                s2 = np.concatenate([[0.0], s2])
            object.__setattr__(self, "table_t", tuple(t))
            object.__setattr__(self, "table_s2", tuple(s2))
        else:
            raise ContractError(f"unknown variance kind {self.kind!r}")

    @classmethod
    def power(cls, alpha: float, scale: float = 1.0) -> "VarianceFunction":
        return cls(POWER, alpha=float(alpha), scale=float(scale))

    @classmethod
    def tabulated(
        cls, pairs: Sequence[Tuple[float, float]]
    ) -> "VarianceFunction":
        pairs = np.asarray(pairs, dtype=float).reshape(-1, 2)

        return cls(TABULATED, table_t=tuple(pairs[:, 0]), table_s2=tuple(pairs[:, 1]))

    @classmethod
    def from_file(cls, path: str) -> "VarianceFunction":
        """
        Loads a two-column (t, sigma^2(t)) whitespace separated text file.
        Lines starting with '#' are comments.
        """
        data = np.loadtxt(path, comments="#", ndmin=2)
        if data.shape[1] != 2:
            raise ContractError(f"{path}: expected two columns, got {data.shape[1]}")

        return cls.tabulated(data)

    @property
    def t_max(self) -> float:
        if self.kind == POWER:
            return math.inf

        return self.table_t[-1]

    def __call__(self, t: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        a = np.abs(np.asarray(t, dtype=float))
        if self.kind == POWER:
            out = self.scale * a ** self.alpha
        else:
            if np.any(a > self.t_max):
                raise DomainError(
                    float(np.max(a)), f"|t| <= {self.t_max}", what="time lag"
                )
            out = np.interp(a, self.table_t, self.table_s2)

        return float(out) if np.ndim(out) == 0 else out

    def as_dict(self) -> dict:
        if self.kind == POWER:
            return {"kind": POWER, "alpha": self.alpha, "scale": self.scale}

        return {"kind": TABULATED, "t": list(self.table_t), "s2": list(self.table_s2)}


def covariance_from_variogram(
    sigma2: VarianceFunction, s: float, t: float
) -> Union[float, np.ndarray]:
    """
    Cov(B(s), B(t)) = (sigma^2(s) + sigma^2(t) - sigma^2(t - s)) / 2.
    """
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)

    return (sigma2(s) + sigma2(t) - sigma2(t - s)) / 2


class GaussianSampler:
    """
    Immutable sampler of B on a fixed grid.

    The factorization (circulant eigenvalues or Cholesky factor) is computed
    once in the constructor; ``sample`` only draws normals, so one instance can
    be shared across workers.
    """

    def __init__(self, sigma2: VarianceFunction, grid: GridSpec) -> None:
        self._sigma2 = sigma2
        self._grid = grid
        self._diagnostics: List[str] = []
        self._sqrt_eigs: Optional[np.ndarray] = None
        self._factor: Optional[np.ndarray] = None

        if grid.size > 1 and sigma2.kind == POWER:
            self._sqrt_eigs = self._embed()

        if grid.size > 1 and self._sqrt_eigs is None:
            self._factor = self._factorize()

    @property
    def grid(self) -> GridSpec:
        return self._grid

    @property
    def sigma2(self) -> VarianceFunction:
        return self._sigma2

    @property
    def method(self) -> str:
        if self._sqrt_eigs is not None:
            return "circulant"
        if self._factor is not None:
            return "dense"

        return "trivial"

    @property
    def diagnostics(self) -> List[str]:
        return list(self._diagnostics)

    def _note(self, message: str, level: int = logging.INFO) -> None:
        self._diagnostics.append(message)
        LOGGER.log(level, message)

    def _increment_autocovariance(self, m: int) -> np.ndarray:
        delta = self._grid.delta
        h = np.arange(m + 1, dtype=float)
        s2 = self._sigma2

        return (s2((h + 1) * delta) + s2((h - 1) * delta) - 2 * s2(h * delta)) / 2

    def _embed(self) -> Optional[np.ndarray]:
        """
        Circulant embedding of the increment sequence, padded to a power of two.
        Returns sqrt(lambda / 2M) or None when the embedding is not PSD.
        """
        m = self._grid.size - 1
        half = 1 << max(0, (m - 1).bit_length())
        gamma = self._increment_autocovariance(half)
        row = np.concatenate([gamma, gamma[-2:0:-1]])
        eigs = scipy.fft.fft(row).real
        top = eigs.max()
        lowest = eigs.min()

        if lowest < -CLIP_RTOL * top:
            self._note(
                f"circulant embedding of size {row.size} not PSD "
                f"(min eigenvalue {lowest:.3e}); falling back to dense",
                logging.WARNING,
            )
            return None

        if lowest < 0:
            self._note(f"clipped circulant eigenvalues down to {lowest:.3e}")
            eigs = np.clip(eigs, 0, None)

        return np.sqrt(eigs / row.size)

    def _factorize(self) -> np.ndarray:
        pts = np.delete(self._grid.points, self._grid.zero_index)
        cov = covariance_from_variogram(self._sigma2, pts[:, None], pts[None, :])
        try:
            return scipy.linalg.cholesky(cov, lower=True)
        except np.linalg.LinAlgError:
            pass

        jitter = JITTER_RTOL * np.trace(cov) / cov.shape[0]
        for _ in range(JITTER_DOUBLINGS + 1):
            try:
                factor = scipy.linalg.cholesky(
                    cov + jitter * np.eye(cov.shape[0]), lower=True
                )
            except np.linalg.LinAlgError:
                jitter *= 2
                continue

            self._note(f"dense factorization needed diagonal jitter {jitter:.3e}")
            return factor

        raise FactorizationError(cov.shape[0], jitter / 2)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """
        Draws ``size`` independent paths of B as a (size, points) array.
        """
        grid = self._grid
        out = np.zeros((size, grid.size))
        if grid.size == 1 or size == 0:
            return out

        if self._sqrt_eigs is not None:
            m = grid.size - 1
            rows = (size + 1) // 2
            width = self._sqrt_eigs.size
            z = rng.standard_normal((rows, width)) + 1j * rng.standard_normal(
                (rows, width)
            )
            y = scipy.fft.fft(self._sqrt_eigs * z, axis=1)[:, :m]
            increments = np.concatenate([y.real, y.imag])[:size]
            out[:, 1:] = np.cumsum(increments, axis=1)
            out -= out[:, [grid.zero_index]]
        else:
            z = rng.standard_normal((size, grid.size - 1))
            nonzero = np.delete(np.arange(grid.size), grid.zero_index)
            out[:, nonzero] = z @ self._factor.T

        return out


def sample_gaussian_path(
    sigma2: VarianceFunction, grid: GridSpec, rng: np.random.Generator
) -> SamplePath:
    """
    One realization of B (before drift) on the grid.
    """
    values = GaussianSampler(sigma2, grid).sample(rng, 1)[0]

    return SamplePath(grid, values)


def drift_adjust_gaussian(
    b: SamplePath, sigma2: VarianceFunction, grid: Optional[GridSpec] = None
) -> SamplePath:
    """
    W(t) = B(t) - sigma^2(t) / 2.
    """
    if grid is not None and grid != b.grid:
        raise ContractError("path and variance were prepared for different grids")

    return SamplePath(b.grid, b.values - sigma2(b.grid.points) / 2)


def sample_variance_mixed(
    b: SamplePath, sigma2: VarianceFunction, s: float
) -> SamplePath:
    """
    W(t) = s B(t) - s^2 sigma^2(t) / 2 for a mixing value s > 0.
    """
    if not s > 0:
        raise ContractError(f"mixing value must be positive, got {s!r}")

    return SamplePath(b.grid, s * b.values - s * s * sigma2(b.grid.points) / 2)


@dataclass(frozen=True)
class ConditionReport:
    """
    Finite-range proxies of the variance conditions for the Dieker-Yakir
    representation. The flags are heuristic: liminf conditions cannot be
    decided on a finite range.
    """

    t_range: Tuple[float, float]
    c: float
    sandwich_ok: bool
    min_ell_over_log: float
    ell_threshold: float
    ell_ok: bool
    c_polynomial: float
    c_ok: bool
    min_sigma2_over_log: float
    sigma2_ok: bool
    heuristic: bool = True

    @property
    def all_ok(self) -> bool:
        return self.sandwich_ok and self.ell_ok and self.c_ok and self.sigma2_ok

    def lines(self) -> List[str]:
        def flag(ok):
            return "pass" if ok else "fail"

        lo, hi = self.t_range

        return [
            f"heuristic check on t in [{lo:g}, {hi:g}] (finite-range proxy)",
            f"c*ell <= sigma2 <= ell: {flag(self.sandwich_ok)}",
            f"min ell/ln t = {self.min_ell_over_log:.4g} "
            f"> {self.ell_threshold:.4g}: {flag(self.ell_ok)}",
            f"c^2 + 8c - 8 = {self.c_polynomial:.4g} > 0: {flag(self.c_ok)}",
            f"min sigma2/ln t = {self.min_sigma2_over_log:.4g} > 8: "
            f"{flag(self.sigma2_ok)}",
        ]


def check_variance_conditions(
    sigma2: VarianceFunction,
    ell: Callable[[np.ndarray], np.ndarray],
    c: float,
    t_range: Tuple[float, float],
    points: int = 256,
) -> ConditionReport:
    if not 0 < c <= 1:
        raise ContractError(f"c must lie in (0, 1], got {c!r}")

    lo, hi = t_range
    if not 1 < lo < hi < math.inf:
        raise ContractError(f"t_range must satisfy 1 < lo < hi < inf, got {t_range}")

    t = np.geomspace(lo, hi, points)
    s2 = sigma2(t)
    el = ell(t)
    log_t = np.log(t)
    poly = c * c + 8 * c - 8
    threshold = 8 / poly if poly > 0 else math.inf
    # relative slack for the sandwich so that sigma2 == ell passes
    slack = 1e-12 * np.maximum(np.abs(el), 1.0)

    report = ConditionReport(
        t_range=(lo, hi),
        c=c,
        sandwich_ok=bool(np.all((c * el <= s2 + slack) & (s2 <= el + slack))),
        min_ell_over_log=float(np.min(el / log_t)),
        ell_threshold=threshold,
        ell_ok=bool(poly > 0 and np.min(el / log_t) > threshold),
        c_polynomial=poly,
        c_ok=poly > 0,
        min_sigma2_over_log=float(np.min(s2 / log_t)),
        sigma2_ok=bool(np.min(s2 / log_t) > 8),
    )
    LOGGER.debug("variance conditions: %s", "; ".join(report.lines()))

    return report
