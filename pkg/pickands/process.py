"""
Tagged descriptions of the driving process W.

Every ProcessSpec hands out a picklable path sampler bound to one grid; the
sampler draws a (size, points) array of W values with W(0) = 0.
"""
import math

from dataclasses import dataclass
from typing import Any, Dict, Mapping, Tuple

import numpy as np

from .exceptions import ContractError
from .gaussian import GaussianSampler, VarianceFunction
from .grid import GridSpec, SamplePath
from .levy import LevySampler, LevySpec


GAUSSIAN = "gaussian"
LEVY = "levy"
VARIANCE_MIXED = "variance_mixed"

# Default windows make the drift exceed this many standard deviations
WINDOW_SIGMAS = 6.0


class PathSampler:
    """
    Draws paths of W on a fixed grid.
    """

    grid: GridSpec

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        raise NotImplementedError()  # pragma: no cover


class GaussianPathSampler(PathSampler):
    def __init__(self, sigma2: VarianceFunction, grid: GridSpec) -> None:
        self._base = GaussianSampler(sigma2, grid)
        self._half_variance = sigma2(grid.points) / 2
        self.grid = grid

    @property
    def base(self) -> GaussianSampler:
        return self._base

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return self._base.sample(rng, size) - self._half_variance


class MixedPathSampler(PathSampler):
    def __init__(
        self,
        sigma2: VarianceFunction,
        grid: GridSpec,
        values: Tuple[float, ...],
        probs: Tuple[float, ...],
    ) -> None:
        self._base = GaussianSampler(sigma2, grid)
        self._variance = sigma2(grid.points)
        self._values = np.asarray(values, dtype=float)
        self._probs = np.asarray(probs, dtype=float)
        self.grid = grid

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        s = rng.choice(self._values, size=size, p=self._probs)[:, None]
        b = self._base.sample(rng, size)

        return s * b - s * s * self._variance / 2


class ProcessSpec:
    """
    Base class of the supported process families.
    """

    kind: str = ""

    @property
    def name(self) -> str:
        raise NotImplementedError()  # pragma: no cover

    def sampler(self, grid: GridSpec) -> PathSampler:
        raise NotImplementedError()  # pragma: no cover

    def default_half_width(self) -> float:
        raise NotImplementedError()  # pragma: no cover

    def as_dict(self) -> Dict[str, Any]:
        raise NotImplementedError()  # pragma: no cover

    def sample_path(self, grid: GridSpec, rng: np.random.Generator) -> SamplePath:
        return SamplePath(grid, self.sampler(grid).sample(rng, 1)[0])


def _gaussian_half_width(sigma2: VarianceFunction, s: float = 1.0) -> float:
    # s^2 sigma^2(L) / 2 >= k s sigma(L)  <=>  sigma^2(L) >= (2k / s)^2
    need = (2 * WINDOW_SIGMAS / s) ** 2
    if sigma2.kind == "power":
        if sigma2.scale == 0:
            raise ContractError("zero variance function has no finite window")
        return (need / sigma2.scale) ** (1 / sigma2.alpha)

    t = np.asarray(sigma2.table_t)
    above = np.nonzero(np.asarray(sigma2.table_s2) >= need)[0]
    if above.size == 0:
        return float(t[-1] / 2)

    return float(t[above[0]])


@dataclass(frozen=True)
class GaussianProcess(ProcessSpec):
    """
    W(t) = B(t) - sigma^2(t) / 2.
    """

    sigma2: VarianceFunction
    kind: str = GAUSSIAN

    @property
    def name(self) -> str:
        if self.sigma2.kind == "power":
            return f"gaussian(alpha={self.sigma2.alpha:g},scale={self.sigma2.scale:g})"

        return "gaussian(tabulated)"

    def sampler(self, grid: GridSpec) -> PathSampler:
        return GaussianPathSampler(self.sigma2, grid)

    def default_half_width(self) -> float:
        return _gaussian_half_width(self.sigma2)

    def as_dict(self) -> Dict[str, Any]:
        return {"kind": GAUSSIAN, "variance": self.sigma2.as_dict()}


@dataclass(frozen=True)
class LevyProcess(ProcessSpec):
    """
    Two-sided Lévy-driven W.
    """

    spec: LevySpec
    kind: str = LEVY

    @property
    def name(self) -> str:
        params = ",".join(
            f"{k}={v:g}" for k, v in self.spec.as_dict().items() if k != "variant"
        )

        return f"levy:{self.spec.variant}({params})"

    def sampler(self, grid: GridSpec) -> PathSampler:
        return LevySampler(self.spec, grid)

    def default_half_width(self) -> float:
        # W+(L) has mean L * (Phi'(0) - Phi(1)) and variance L * Phi''(0)
        rate = self.spec.derivative(0.0) - self.spec(1.0)
        if rate >= 0:
            raise ContractError("compensated Lévy process has non-negative drift")

        return WINDOW_SIGMAS ** 2 * self.spec.second_derivative(0.0) / rate ** 2

    def as_dict(self) -> Dict[str, Any]:
        return dict(kind=LEVY, **self.spec.as_dict())


@dataclass(frozen=True)
class VarianceMixedProcess(ProcessSpec):
    """
    W(t) = S B(t) - S^2 sigma^2(t) / 2 with S drawn per path from a finite law.
    """

    sigma2: VarianceFunction
    values: Tuple[float, ...]
    probs: Tuple[float, ...]
    kind: str = VARIANCE_MIXED

    def __post_init__(self) -> None:
        values = tuple(float(v) for v in self.values)
        probs = tuple(float(p) for p in self.probs)
        if not values or len(values) != len(probs):
            raise ContractError("mixing law needs matching values and probs")
        if any(v <= 0 for v in values):
            raise ContractError("mixing values must be positive")
        if any(p < 0 for p in probs) or not math.isclose(sum(probs), 1.0):
            raise ContractError("mixing probabilities must be >= 0 and sum to 1")

        object.__setattr__(self, "values", values)
        object.__setattr__(self, "probs", probs)

    @property
    def name(self) -> str:
        law = ",".join(f"{v:g}:{p:g}" for v, p in zip(self.values, self.probs))

        return f"variance_mixed({GaussianProcess(self.sigma2).name};{law})"

    def sampler(self, grid: GridSpec) -> PathSampler:
        return MixedPathSampler(self.sigma2, grid, self.values, self.probs)

    def default_half_width(self) -> float:
        return _gaussian_half_width(self.sigma2, min(self.values))

    def as_dict(self) -> Dict[str, Any]:
        return {
            "kind": VARIANCE_MIXED,
            "variance": self.sigma2.as_dict(),
            "values": list(self.values),
            "probs": list(self.probs),
        }


def variance_from_dict(data: Mapping[str, Any]) -> VarianceFunction:
    kind = data.get("kind", "power")
    if kind == "power":
        return VarianceFunction.power(data["alpha"], data.get("scale", 1.0))
    if kind == "tabulated":
        return VarianceFunction.tabulated(list(zip(data["t"], data["s2"])))

    raise ContractError(f"unknown variance kind {kind!r}")


def process_from_dict(data: Mapping[str, Any]) -> ProcessSpec:
    """
    Builds a ProcessSpec from plain mapping data, as stored in configs.
    """
    kind = data.get("kind")
    if kind == GAUSSIAN:
        return GaussianProcess(variance_from_dict(data["variance"]))
    if kind == VARIANCE_MIXED:
        return VarianceMixedProcess(
            variance_from_dict(data["variance"]),
            tuple(data["values"]),
            tuple(data["probs"]),
        )
    if kind == LEVY:
        params = {k: v for k, v in data.items() if k != "kind"}
        return LevyProcess(LevySpec(**params))

    raise ContractError(f"unknown process kind {kind!r}")
