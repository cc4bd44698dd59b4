import math

from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from .exceptions import ContractError


# Relative tolerance used when deciding whether a spacing is a grid multiple
MULTIPLE_RTOL = 1e-9


def as_multiple(value: float, delta: float, what: str = "spacing") -> int:
    """
    Returns k such that value == k * delta, or raises a ContractError.
    """
    if delta <= 0:
        raise ContractError(f"grid step must be positive, got {delta!r}")

    ratio = value / delta
    k = int(round(ratio))
    if abs(ratio - k) > MULTIPLE_RTOL * max(1.0, abs(ratio)):
        raise ContractError(
            f"{what} {value!r} is not an integer multiple of the grid step {delta!r}"
        )

    return k


@dataclass(frozen=True)
class GridSpec:
    """
    The lattice delta*Z intersected with [window_lo, window_hi].

    ``eta`` is the spacing used for S (0 selects the trapezoid integral) and
    ``target_delta`` the grid of the constant being approximated (0 means the
    continuous-parameter constant, approximated by the fine step ``delta``).
    """

    delta: float
    window_lo: float
    window_hi: float
    eta: float = 0.0
    target_delta: float = 0.0

    def __post_init__(self) -> None:
        if not self.delta > 0:
            raise ContractError(f"grid step must be positive, got {self.delta!r}")

        if not self.window_lo <= 0 <= self.window_hi:
            raise ContractError(
                f"window [{self.window_lo}, {self.window_hi}] must contain 0"
            )

        if self.eta < 0 or self.target_delta < 0:
            raise ContractError("eta and target_delta must be non-negative")

        if self.eta > 0:
            as_multiple(self.eta, self.delta, "eta")

        if self.target_delta > 0:
            as_multiple(self.target_delta, self.delta, "target_delta")

    @classmethod
    def symmetric(cls, delta: float, half_width: float, **kwargs) -> "GridSpec":
        return cls(delta, -half_width, half_width, **kwargs)

    @property
    def k_range(self) -> Tuple[int, int]:
        lo = math.ceil(self.window_lo / self.delta - MULTIPLE_RTOL)
        hi = math.floor(self.window_hi / self.delta + MULTIPLE_RTOL)

        return min(lo, 0), max(hi, 0)

    @property
    def points(self) -> np.ndarray:
        lo, hi = self.k_range

        return np.arange(lo, hi + 1) * self.delta

    @property
    def size(self) -> int:
        lo, hi = self.k_range

        return hi - lo + 1

    @property
    def zero_index(self) -> int:
        return -self.k_range[0]

    @property
    def window(self) -> Tuple[float, float]:
        return self.window_lo, self.window_hi

    def index_of(self, t: float) -> int:
        """
        Index of the grid point t, which must lie on the grid.
        """
        k = as_multiple(t, self.delta, "point")
        lo, hi = self.k_range
        if not lo <= k <= hi:
            raise ContractError(f"point {t!r} outside window {self.window}")

        return k - lo

    def subgrid_mask(self, spacing: float) -> np.ndarray:
        """
        Boolean mask of the points on spacing*Z (aligned with 0).
        """
        if spacing == 0:
            return np.ones(self.size, dtype=bool)

        step = as_multiple(spacing, self.delta)
        lo, hi = self.k_range

        return np.arange(lo, hi + 1) % step == 0

    def restrict(self, window_lo: float, window_hi: float) -> np.ndarray:
        """
        Boolean mask of the points inside [window_lo, window_hi].
        """
        tol = MULTIPLE_RTOL * self.delta
        pts = self.points

        return (pts >= window_lo - tol) & (pts <= window_hi + tol)


@dataclass(frozen=True)
class SamplePath:
    """
    One realization of W on a grid.
    """

    grid: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.size,):
            raise ContractError(
                f"path has {values.size} values, grid has {self.grid.size} points"
            )

        if values[self.grid.zero_index] != 0:
            raise ContractError("path value at t = 0 must be exactly 0")

        object.__setattr__(self, "values", values)

    @property
    def times(self) -> np.ndarray:
        return self.grid.points

    def at(self, t: float) -> float:
        return float(self.values[self.grid.index_of(t)])
