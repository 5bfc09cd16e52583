"""Observables built on the projected MZI fields.

All intensities are in units of ``I0 = |E0|^2`` unless ``I0`` is passed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from . import optics
from .ensemble import DetuningGrid, envelope
from .errors import DomainError, ParameterError
from .optics import ModeLabel, OpticsParams

SINGLES_LEVEL = 0.25  # phi-averaged single-port intensity behind a polarizer, in I0


def _finite(*values):
    for v in values:
        if not np.all(np.isfinite(v)):
            raise DomainError(f"non-finite input: {v!r}")


def intensity_port1(xi, delta_f, tau, phi, I0: float = 1.0):
    """Port-1 intensity behind polarizer ``xi``: ``I0/4 (1 - sin2xi cos(2 df tau + phi))``.

    Broadcasts over array arguments.
    """
    _finite(xi, delta_f, tau, phi)
    return I0 / 4 * (1 - np.sin(2 * xi) * np.cos(2 * delta_f * tau + phi))


def intensity_port2(theta, delta_f, tau, phi, I0: float = 1.0):
    """Port-2 intensity behind polarizer ``theta``; opposite fringe sign to port 1."""
    _finite(theta, delta_f, tau, phi)
    return I0 / 4 * (1 + np.sin(2 * theta) * np.cos(2 * delta_f * tau + phi))


def eraser_means(xi, theta, phi, I0: float = 1.0):
    """Ensemble means of both port intensities at zero delay.

    At ``tau = 0`` the fringe phase no longer depends on the detuning, so the
    result is the same for any ensemble.
    """
    return intensity_port1(xi, 0.0, 0.0, phi, I0), intensity_port2(theta, 0.0, 0.0, phi, I0)


def visibility(values) -> float:
    v = np.asarray(values, dtype=float)
    hi, lo = v.max(), v.min()
    if hi + lo == 0:
        raise DomainError("visibility undefined for an all-zero scan")
    return float((hi - lo) / (hi + lo))


def classical_coincidence(
    grid: DetuningGrid,
    xi: float,
    theta: float,
    phi: float,
    tau,
    normalization: str = "singles_normalized",
):
    """Ensemble-weighted direct intensity product ``sum_j w_j I1_j I2_j``.

    ``singles_normalized`` divides by ``(I0/4)^2`` so that the large-delay
    plateau of the diagonal-polarizer dip reads 0.5; ``raw`` returns the sum in
    units of ``I0^2``.  ``tau`` may be a scalar or a 1-d array.
    """
    if not isinstance(grid, DetuningGrid):
        raise ParameterError("grid must be a DetuningGrid")
    if normalization not in ("singles_normalized", "raw"):
        raise ParameterError(f"unknown normalization {normalization!r}")
    t = np.asarray(tau, dtype=float)
    df = grid.points
    prod = intensity_port1(xi, df, t[..., None], phi) * intensity_port2(theta, df, t[..., None], phi)
    # row-wise reduction: each delay is summed identically whatever the batch shape
    out = np.sum(prod * grid.weights, axis=-1)
    if normalization == "singles_normalized":
        out = out / SINGLES_LEVEL**2
    return float(out) if out.ndim == 0 else out


def spectral_products(grid: DetuningGrid, xi, theta, phi, tau) -> np.ndarray:
    """Unweighted per-detuning products ``I1_j I2_j`` on a (tau, df) mesh, in ``I0^2``."""
    t = np.atleast_1d(np.asarray(tau, dtype=float))
    return intensity_port1(xi, grid.points, t[:, None], phi) * intensity_port2(
        theta, grid.points, t[:, None], phi
    )


# ---------------------------------------------------------------------------
# Selective (heterodyne) product
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HeterodyneTerms:
    """Joint amplitudes of the two projected fields, split by the selection rule.

    Kept: the opposite-detuning pairs (H- with H+, V+ with V-), each carrying a
    single beat phase.  Dropped: V- with H- (no beat) and V+ with H+ (double beat).
    """

    kept: dict
    dropped: dict

    @property
    def kept_amplitude(self) -> complex:
        return sum(self.kept.values())


def heterodyne_terms(p: OpticsParams, E0: complex = 1.0) -> HeterodyneTerms:
    port_a, port_b = optics.mzi_output_fields(p, E0)
    c1 = optics.polarizer_project(p.xi, port_a)
    c2 = optics.polarizer_project(p.theta, port_b)
    # port A: '-' is H-, '+' is V+;  port B: '-' is V-, '+' is H+
    kept = {
        (ModeLabel.H_MINUS, ModeLabel.H_PLUS): c1[-1] * c2[+1],
        (ModeLabel.V_PLUS, ModeLabel.V_MINUS): c1[+1] * c2[-1],
    }
    dropped = {
        (ModeLabel.H_MINUS, ModeLabel.V_MINUS): c1[-1] * c2[-1],
        (ModeLabel.V_PLUS, ModeLabel.H_PLUS): c1[+1] * c2[+1],
    }
    return HeterodyneTerms(kept=kept, dropped=dropped)


def heterodyne_pair(xi, theta, delta_f, tau, phi, E0: complex = 1.0) -> tuple[float, HeterodyneTerms]:
    """Selected joint intensity of one pair, ``|kept amplitude|^2``, in units of ``|E0|^4``.

    Equals ``I0^2/16 cos^2(xi + theta)`` whatever the detuning, delay or phase;
    the delay envelope is applied separately by ``quantum_g2``.
    """
    terms = heterodyne_terms(OpticsParams(xi=xi, theta=theta, phi=phi, tau=tau, delta_f=delta_f), E0)
    return float(abs(terms.kept_amplitude) ** 2), terms


def heterodyne_rate(xi, theta):
    """Closed form ``cos^2(xi + theta) / 16`` in units of ``I0^2``; vectorized."""
    return np.cos(np.asarray(xi) + np.asarray(theta)) ** 2 / 16


def quantum_g2(tau, xi, theta, sigma: float):
    """Normalized heterodyne correlation with a Gaussian delay envelope.

    ``0.5 * (1 + exp(-8 sigma^2 tau^2) cos(2(xi + theta)))``: ``cos^2(xi+theta)``
    at zero delay, relaxing to 0.5 for long delays.
    """
    _finite(tau, xi, theta)
    return 0.5 * (1 + envelope(tau, sigma, k=4.0) * np.cos(2 * (np.asarray(xi) + np.asarray(theta))))


def correlation_E(xi, theta):
    """Polarization correlation from the four coincidence rates of orthogonal settings."""
    perp = math.pi / 2
    r_pp = heterodyne_rate(xi, theta)
    r_qq = heterodyne_rate(np.add(xi, perp), np.add(theta, perp))
    r_qp = heterodyne_rate(np.add(xi, perp), theta)
    r_pq = heterodyne_rate(xi, np.add(theta, perp))
    return (r_pp + r_qq - r_qp - r_pq) / (r_pp + r_qq + r_qp + r_pq)


def chsh_S(a, a_prime, b, b_prime):
    """``E(a,b) - E(a,b') + E(a',b) + E(a',b')``; angles in radians."""
    _finite(a, a_prime, b, b_prime)
    return (
        correlation_E(a, b)
        - correlation_E(a, b_prime)
        + correlation_E(a_prime, b)
        + correlation_E(a_prime, b_prime)
    )


def chsh_grid_extremes(step_deg: float = 1.0) -> tuple[float, float]:
    """Exhaustive (max, min) of S over all angle quadruples on a ``step_deg`` grid.

    E depends on angles modulo 180 deg, so one half-turn per angle covers every
    quadruple.  S splits into a b-part and a b'-part, so for each (a, a') the
    extremes over b and b' are taken independently.
    """
    n = int(round(180.0 / step_deg))
    ang = np.deg2rad(np.arange(n) * step_deg)
    E = correlation_E(ang[:, None], ang[None, :])  # E[a, b]
    smax, smin = -np.inf, np.inf
    for row in E:  # row = E(a, .)
        plus = row + E  # E(a,b) + E(a',b), axes (a', b)
        minus = E - row  # E(a',b') - E(a,b'), axes (a', b')
        smax = max(smax, (plus.max(axis=1) + minus.max(axis=1)).max())
        smin = min(smin, (plus.min(axis=1) + minus.min(axis=1)).min())
    return float(smax), float(smin)


# ---------------------------------------------------------------------------
# Curves
# ---------------------------------------------------------------------------

@dataclass
class CorrelationCurve:
    mode: str
    tau: np.ndarray
    values: np.ndarray
    params: dict
    normalization: str = "singles_normalized"
    stderr: Optional[np.ndarray] = None
    ensemble: Optional[DetuningGrid] = None
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.mode not in ("classical_product", "heterodyne"):
            raise ParameterError(f"unknown curve mode {self.mode!r}")
        self.tau = np.asarray(self.tau, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.tau.shape != self.values.shape:
            raise ParameterError("tau and values differ in length")
        if self.stderr is not None:
            self.stderr = np.asarray(self.stderr, dtype=float)
            if self.stderr.shape != self.values.shape:
                raise ParameterError("stderr and values differ in length")


def classical_curve(grid: DetuningGrid, xi, theta, phi, tau, normalization="singles_normalized"):
    values = classical_coincidence(grid, xi, theta, phi, np.asarray(tau, dtype=float), normalization)
    return CorrelationCurve(
        mode="classical_product",
        tau=tau,
        values=np.atleast_1d(values),
        params={"xi": xi, "theta": theta, "phi": phi},
        normalization=normalization,
        ensemble=grid,
    )


def heterodyne_curve(tau, xi, theta, sigma):
    return CorrelationCurve(
        mode="heterodyne",
        tau=tau,
        values=np.atleast_1d(quantum_g2(np.asarray(tau, dtype=float), xi, theta, sigma)),
        params={"xi": xi, "theta": theta, "sigma": sigma},
    )
