"""
Two-sided Lévy-driven processes.

For t >= 0, W(t) = B+(t) - Phi(1) t is the drift-compensated Lévy process;
for t < 0, W(t) = W-(-t) where W- is an independent process with Laplace
exponent Phi(1 - theta) - (1 - theta) Phi(1).

Supported laws are Brownian motion with drift plus an optional compound
Poisson component with exponentially distributed jumps of one sign, so that
Phi(theta) = mu theta + sigma^2 theta^2 / 2 + lam (rho / (rho - s theta) - 1).
"""
import logging
import math

from dataclasses import dataclass
from typing import Dict, Tuple, Union

import numpy as np

from .exceptions import ContractError, DomainError, UnsupportedSpecError
from .grid import GridSpec, SamplePath


LOGGER = logging.getLogger(__name__)

BROWNIAN_DRIFT = "brownian_drift"
COMPOUND_POISSON_EXP = "compound_poisson_exp"
BROWNIAN_PLUS_NEGATIVE_CP = "brownian_plus_negative_cp"
VARIANTS = (BROWNIAN_DRIFT, COMPOUND_POISSON_EXP, BROWNIAN_PLUS_NEGATIVE_CP)

CONTINUOUS_ROUTE = "continuous"
GRID_ROUTE = "grid"
MOMENT_EPSILON = 0.1


@dataclass(frozen=True)
class LevyExponent:
    """
    Parameters of Phi(theta) = mu theta + sigma^2 theta^2 / 2
    + lam (rho / (rho - jump_sign theta) - 1).
    """

    mu: float = 0.0
    sigma: float = 0.0
    lam: float = 0.0
    rho: float = math.inf
    jump_sign: int = 1

    @property
    def has_jumps(self) -> bool:
        return self.lam > 0

    @property
    def domain(self) -> Tuple[float, float]:
        """
        Open interval on which the exponent is finite.
        """
        if not self.has_jumps:
            return -math.inf, math.inf
        if self.jump_sign > 0:
            return -math.inf, self.rho

        return -self.rho, math.inf

    @property
    def spectrally_negative(self) -> bool:
        return not self.has_jumps or self.jump_sign < 0

    def _check(self, theta: np.ndarray) -> None:
        lo, hi = self.domain
        if np.any(theta >= hi):
            raise DomainError(float(np.max(theta)), f"theta < {hi}", what="theta")
        if np.any(theta <= lo):
            raise DomainError(float(np.min(theta)), f"theta > {lo}", what="theta")

    def __call__(self, theta: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        theta = np.asarray(theta, dtype=float)
        self._check(theta)
        out = self.mu * theta + self.sigma ** 2 * theta ** 2 / 2
        if self.has_jumps:
            out = out + self.lam * (self.rho / (self.rho - self.jump_sign * theta) - 1)

        return float(out) if np.ndim(out) == 0 else out

    def derivative(self, theta: float) -> float:
        self._check(np.asarray(theta))
        out = self.mu + self.sigma ** 2 * theta
        if self.has_jumps:
            s = self.jump_sign
            out += self.lam * s * self.rho / (self.rho - s * theta) ** 2

        return float(out)

    def second_derivative(self, theta: float) -> float:
        self._check(np.asarray(theta))
        out = self.sigma ** 2
        if self.has_jumps:
            out += 2 * self.lam * self.rho / (self.rho - self.jump_sign * theta) ** 3

        return float(out)

    def increments(
        self, rng: np.random.Generator, dt: float, shape: Tuple[int, ...]
    ) -> np.ndarray:
        """
        Exact increments over steps of length dt.
        """
        out = np.full(shape, self.mu * dt)
        if self.sigma > 0:
            out += self.sigma * math.sqrt(dt) * rng.standard_normal(shape)
        if self.has_jumps:
            counts = rng.poisson(self.lam * dt, shape)
            out += self.jump_sign * rng.gamma(counts, 1 / self.rho)

        return out


@dataclass(frozen=True)
class LevySpec(LevyExponent):
    """
    Law of B+ together with its variant tag.
    """

    variant: str = BROWNIAN_DRIFT

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise ContractError(f"unknown Lévy variant {self.variant!r}")
        if self.sigma < 0:
            raise ContractError(f"sigma must be >= 0, got {self.sigma!r}")
        if self.variant == BROWNIAN_DRIFT and self.lam != 0:
            raise ContractError("brownian_drift has no jump component")
        if self.variant != BROWNIAN_DRIFT:
            if not self.lam > 0 or not 0 < self.rho < math.inf:
                raise ContractError("jump rate lam and jump parameter rho must be > 0")
            if self.jump_sign not in (-1, 1):
                raise ContractError(f"jump_sign must be +1 or -1, got {self.jump_sign}")
        if self.variant == BROWNIAN_PLUS_NEGATIVE_CP and self.jump_sign != -1:
            raise ContractError("brownian_plus_negative_cp has negative jumps only")
        if self.variant == COMPOUND_POISSON_EXP and self.sigma != 0:
            raise ContractError("compound_poisson_exp has no Brownian component")

        if self.domain[1] <= 1:
            raise ContractError(
                f"Phi(1) must be finite: positive exponential jumps need rho > 1, "
                f"got rho = {self.rho!r}"
            )

    @classmethod
    def brownian_drift(cls, mu: float = 0.0, sigma: float = 1.0) -> "LevySpec":
        return cls(mu=float(mu), sigma=float(sigma), variant=BROWNIAN_DRIFT)

    @classmethod
    def compound_poisson_exp(
        cls, lam: float, rho: float, jump_sign: int = 1
    ) -> "LevySpec":
        return cls(
            lam=float(lam),
            rho=float(rho),
            jump_sign=int(jump_sign),
            variant=COMPOUND_POISSON_EXP,
        )

    @classmethod
    def brownian_plus_negative_cp(
        cls, mu: float, sigma: float, lam: float, rho: float
    ) -> "LevySpec":
        return cls(
            mu=float(mu),
            sigma=float(sigma),
            lam=float(lam),
            rho=float(rho),
            jump_sign=-1,
            variant=BROWNIAN_PLUS_NEGATIVE_CP,
        )

    def as_dict(self) -> Dict[str, Union[str, float, int]]:
        out = {"variant": self.variant}
        if self.variant != COMPOUND_POISSON_EXP:
            out.update(mu=self.mu, sigma=self.sigma)
        if self.variant != BROWNIAN_DRIFT:
            out.update(lam=self.lam, rho=self.rho)
        if self.variant == COMPOUND_POISSON_EXP:
            out.update(jump_sign=self.jump_sign)

        return out


@dataclass(frozen=True)
class TiltedSpec(LevyExponent):
    """
    Law of W- on the negative half-line, already normalized so that its
    exponent vanishes at theta = 1.
    """


def laplace_exponent(spec: LevyExponent, theta: float) -> float:
    """
    Phi(theta) = ln E exp(theta B+(1)).
    """
    return spec(theta)


def drift_compensate(spec: LevySpec) -> LevyExponent:
    """
    W+(t) = B+(t) - Phi(1) t, whose exponent is Phi(theta) - theta Phi(1).
    """
    return LevyExponent(
        mu=spec.mu - spec(1.0),
        sigma=spec.sigma,
        lam=spec.lam,
        rho=spec.rho,
        jump_sign=spec.jump_sign,
    )


def tilt_negative_side(spec: LevySpec) -> TiltedSpec:
    """
    Closed-form Esscher transform giving the law of W-.

    The Gaussian part maps to variance sigma^2 with drift -sigma^2 / 2. An
    exponential jump part (lam, rho, s) maps to jumps of sign -s with rate
    lam rho / (rho - s) and parameter rho - s, plus the drift
    lam s / (rho - s) that keeps the exponent at 0 for theta = 1.
    """
    mu = -spec.sigma ** 2 / 2
    if not spec.has_jumps:
        return TiltedSpec(mu=mu, sigma=spec.sigma)

    s = spec.jump_sign
    rho = spec.rho - s
    if not rho > 0:
        raise UnsupportedSpecError(spec.variant)

    return TiltedSpec(
        mu=mu + spec.lam * s / rho,
        sigma=spec.sigma,
        lam=spec.lam * spec.rho / rho,
        rho=rho,
        jump_sign=-s,
    )


def negative_side_exponent(spec: LevySpec, theta: float) -> float:
    """
    Phi(1 - theta) - (1 - theta) Phi(1), evaluated from the untilted law.
    """
    return spec(1 - theta) - (1 - theta) * spec(1.0)


def check_moment_conditions(spec: LevySpec, route: str) -> Tuple[bool, str]:
    """
    Checks that Phi is finite on (-2-eps, 3+eps) for the continuous route
    (delta = eta = 0) or on (-1-eps, 2+eps) for grid routes.
    Returns (ok, bound).
    """
    if route == CONTINUOUS_ROUTE:
        need = (-2 - MOMENT_EPSILON, 3 + MOMENT_EPSILON)
    elif route == GRID_ROUTE:
        need = (-1 - MOMENT_EPSILON, 2 + MOMENT_EPSILON)
    else:
        raise ContractError(f"unknown estimator route {route!r}")

    lo, hi = spec.domain
    bound = f"Phi finite on [{need[0]:g}, {need[1]:g}], finite only on ({lo:g}, {hi:g})"
    ok = lo < need[0] and need[1] < hi
    if not ok:
        LOGGER.info("moment condition failed for %s: %s", spec.variant, bound)

    return ok, bound


def extremal_index_candidates(spec: LevySpec) -> Dict[str, float]:
    """
    The two readings of the spectrally negative closed form: Phi'(1) and the
    derivative of the compensated exponent, Phi'(1) - Phi(1).
    """
    if not spec.spectrally_negative:
        raise ContractError(
            f"{spec.variant} with positive jumps is not spectrally negative"
        )

    return {
        "phi_prime": spec.derivative(1.0),
        "compensated_phi_prime": spec.derivative(1.0) - spec(1.0),
    }


class LevySampler:
    """
    Immutable sampler of two-sided W on a fixed grid.
    """

    def __init__(self, spec: LevySpec, grid: GridSpec) -> None:
        self._spec = spec
        self._grid = grid
        self._plus = drift_compensate(spec)
        self._minus = None
        if grid.k_range[0] < 0:
            self._minus = tilt_negative_side(spec)

    @property
    def grid(self) -> GridSpec:
        return self._grid

    @property
    def spec(self) -> LevySpec:
        return self._spec

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        grid = self._grid
        lo, hi = grid.k_range
        z = grid.zero_index
        out = np.zeros((size, grid.size))
        if hi > 0:
            inc = self._plus.increments(rng, grid.delta, (size, hi))
            out[:, z + 1 :] = np.cumsum(inc, axis=1)
        if lo < 0:
            inc = self._minus.increments(rng, grid.delta, (size, -lo))
            out[:, :z] = np.cumsum(inc, axis=1)[:, ::-1]

        return out


def sample_levy_two_sided(
    spec: LevySpec, grid: GridSpec, rng: np.random.Generator
) -> SamplePath:
    return SamplePath(grid, LevySampler(spec, grid).sample(rng, 1)[0])

