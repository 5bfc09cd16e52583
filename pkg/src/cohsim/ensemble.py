"""Gaussian ensemble of AOM detunings and its closed-form averages."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

DEFAULT_SPAN_SIGMAS = 4.0
DEFAULT_N_POINTS = 161


@dataclass(frozen=True)
class GaussianSpec:
    """Weight ``exp(-((a*df - b) / (c*sqrt(2)))**2)``.

    Peak at ``df = b/a``, standard deviation ``c/a``.
    """

    a: float = 1.0
    b: float = 0.0
    c: float = 5.0

    def __post_init__(self):
        for name in ("a", "b", "c"):
            if not math.isfinite(getattr(self, name)):
                raise ParameterError(f"{name} must be finite")
        if self.c <= 0:
            raise ParameterError("c must be > 0")
        if self.a == 0:
            raise ParameterError("a must be nonzero")

    @property
    def sigma(self) -> float:
        return self.c / abs(self.a)

    @property
    def center(self) -> float:
        return self.b / self.a


@dataclass(frozen=True, eq=False)
class DetuningGrid:
    points: np.ndarray
    weights: np.ndarray
    spec: GaussianSpec
    span_sigmas: float

    @property
    def n_points(self) -> int:
        return len(self.points)

    @property
    def sigma(self) -> float:
        return self.spec.sigma

    def mean(self) -> float:
        return float(np.sum(self.weights * self.points))

    def variance(self) -> float:
        m = self.mean()
        return float(np.sum(self.weights * (self.points - m) ** 2))


def gaussian_weight(spec: GaussianSpec, delta_f):
    """Unnormalized Gaussian weight; accepts scalars or arrays."""
    x = (spec.a * np.asarray(delta_f, dtype=float) - spec.b) / (spec.c * math.sqrt(2.0))
    w = np.exp(-(x**2))
    return float(w) if w.ndim == 0 else w


def make_grid(
    spec: GaussianSpec = GaussianSpec(),
    span_sigmas: float = DEFAULT_SPAN_SIGMAS,
    n_points: int = DEFAULT_N_POINTS,
) -> DetuningGrid:
    """Uniform odd-sized grid over ``center +- span_sigmas*sigma`` with normalized weights."""
    if int(n_points) != n_points or n_points < 3:
        raise ParameterError("n_points must be an integer >= 3")
    if n_points % 2 == 0:
        raise ParameterError("n_points must be odd")
    if not (math.isfinite(span_sigmas) and span_sigmas > 0):
        raise ParameterError("span_sigmas must be > 0")
    n = int(n_points)
    half = span_sigmas * spec.sigma
    # symmetric construction so that points[k] + points[-1-k] == 2*center exactly
    offsets = np.linspace(-half, half, n)
    offsets = 0.5 * (offsets - offsets[::-1])
    points = spec.center + offsets
    w = gaussian_weight(spec, points)
    w = 0.5 * (w + w[::-1])
    weights = w / w.sum()
    return DetuningGrid(points=points, weights=weights, spec=spec, span_sigmas=float(span_sigmas))


def envelope(tau, sigma: float, k: float = 4.0):
    """Gaussian-ensemble average of ``cos(k * df * tau)``: ``exp(-k^2 sigma^2 tau^2 / 2)``.

    ``k=2`` is the singles fringe, ``k=4`` the product of the two port fringes.
    """
    if not sigma > 0:
        raise ParameterError("sigma must be > 0")
    t = np.asarray(tau, dtype=float)
    out = np.exp(-0.5 * (k * sigma * t) ** 2)
    return float(out) if out.ndim == 0 else out


def grid_average(grid: DetuningGrid, values: np.ndarray) -> np.ndarray:
    """Weighted sum over the detuning axis (last axis of ``values``)."""
    return np.asarray(values) @ grid.weights
