"""Deterministic sweeps over detuning and delay.

The spectral ensemble is a flat grid of detunings in [-bandwidth, +bandwidth].
Every grid point contributes both branches, so single-detector means are
uniform while the coincidence correlation keeps the phase structure.

Sums over the spectral grid use ``math.fsum``; the result for each tau is the
correctly rounded sum, independent of term order or how the tau sweep is split.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .optics import Branch, branch_intensities, pair_products

# Values reproducing the published figure.
PAPER_BANDWIDTH = 1e8
PAPER_SPECTRAL_STEP = 2e6
PAPER_TAU_MIN = -3e-8
PAPER_TAU_MAX = 3e-8
PAPER_TAU_STEP = 2e-10
DECOHERENCE_TIME = 1e-8  # recorded in run metadata only, no envelope applied

_INTEGRAL_RTOL = 1e-9

SpectralWeight = Callable[[np.ndarray], np.ndarray]


class GridError(ValueError):
    """Raised for malformed spectral or delay grids."""


class OutOfBandError(ValueError):
    """Raised when a detuning lies outside the spectral bandwidth."""


def _integral_ratio(x: float, step: float, what: str) -> int:
    ratio = x / step
    k = round(ratio)
    if abs(ratio - k) > _INTEGRAL_RTOL * max(1.0, abs(ratio)):
        raise GridError(f"{what}={x!r} is not an integer multiple of step={step!r}")
    return int(k)


@dataclass(frozen=True)
class SpectralGrid:
    bandwidth: float
    step: float
    points: np.ndarray

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class TauGrid:
    tau_min: float
    tau_max: float
    step: float
    points: np.ndarray

    def __len__(self) -> int:
        return len(self.points)


@dataclass
class CorrelationCurve:
    tau: np.ndarray
    g2: np.ndarray
    ic_mean: np.ndarray
    id_mean: np.ndarray
    eta: float


@dataclass
class DetuningTrace:
    delta_f: float
    eta: float
    tau: np.ndarray
    product: np.ndarray


def build_spectral_grid(bandwidth: float, step: float) -> SpectralGrid:
    """Symmetric grid ``k * step`` for ``k = -K..K`` with ``K * step == bandwidth``."""
    if not (math.isfinite(bandwidth) and math.isfinite(step)):
        raise GridError("bandwidth and step must be finite")
    if bandwidth <= 0 or step <= 0:
        raise GridError(f"bandwidth and step must be positive, got {bandwidth!r}, {step!r}")
    k = _integral_ratio(bandwidth, step, "bandwidth")
    # integer multiples keep the grid exactly symmetric about zero
    points = np.arange(-k, k + 1, dtype=float) * step
    return SpectralGrid(bandwidth, step, points)


def build_tau_grid(tau_min: float, tau_max: float, step: float) -> TauGrid:
    """Delay grid of integer multiples of ``step``; contains 0 whenever the range does."""
    if not all(math.isfinite(v) for v in (tau_min, tau_max, step)):
        raise GridError("tau grid parameters must be finite")
    if step <= 0:
        raise GridError(f"tau step must be positive, got {step!r}")
    if tau_max < tau_min:
        raise GridError(f"tau_max={tau_max!r} is below tau_min={tau_min!r}")
    k_lo = _integral_ratio(tau_min, step, "tau_min")
    k_hi = _integral_ratio(tau_max, step, "tau_max")
    points = np.arange(k_lo, k_hi + 1, dtype=float) * step
    return TauGrid(tau_min, tau_max, step, points)


def paper_spectral_grid() -> SpectralGrid:
    return build_spectral_grid(PAPER_BANDWIDTH, PAPER_SPECTRAL_STEP)


def paper_tau_grid() -> TauGrid:
    return build_tau_grid(PAPER_TAU_MIN, PAPER_TAU_MAX, PAPER_TAU_STEP)


def gaussian_weight(sigma: float) -> SpectralWeight:
    """Gaussian spectral weight exp(-df**2 / (2 sigma**2)); flat weighting is the default."""
    if sigma <= 0:
        raise GridError("sigma must be positive")
    return lambda df: np.exp(-0.5 * np.square(df / sigma))


def _weights(grid: SpectralGrid, weight: Optional[SpectralWeight]) -> Optional[np.ndarray]:
    if weight is None:
        return None
    w = np.asarray(weight(grid.points), dtype=float)
    if w.shape != grid.points.shape or np.any(w < 0) or not np.all(np.isfinite(w)):
        raise GridError("spectral weight must be finite, non-negative and match the grid")
    if math.fsum(w) == 0:
        raise GridError("spectral weights sum to zero")
    return w


def _mean(values: np.ndarray, w: Optional[np.ndarray]) -> float:
    if w is None:
        return math.fsum(values) / len(values)
    return math.fsum(values * w) / math.fsum(w)


def mean_intensities(
    grid: SpectralGrid, eta: float, tau: float, weight: Optional[SpectralWeight] = None
) -> tuple[float, float]:
    """Mean detector intensities over the grid and both branches, in units of I0."""
    if len(grid) == 0:
        raise GridError("empty spectral grid")
    w = _weights(grid, weight)
    c1, d1 = branch_intensities(1.0, eta, grid.points, tau, Branch.FIRST)
    c2, d2 = branch_intensities(1.0, eta, grid.points, tau, Branch.SECOND)
    return _mean(0.5 * (c1 + c2), w), _mean(0.5 * (d1 + d2), w)


def correlation_curve(
    sgrid: SpectralGrid,
    tgrid: TauGrid,
    eta: float,
    weight: Optional[SpectralWeight] = None,
) -> CorrelationCurve:
    """Normalized coincidence correlation g2(tau) = <cos^2(eta + 2 df tau)> over the grid."""
    if len(sgrid) == 0 or len(tgrid) == 0:
        raise GridError("empty grid")
    w = _weights(sgrid, weight)
    taus = tgrid.points
    products = pair_products(1.0, eta, sgrid.points[np.newaxis, :], taus[:, np.newaxis])
    g2 = np.array([_mean(row, w) for row in products])
    means = [mean_intensities(sgrid, eta, t, weight) for t in taus]
    ic = np.array([m[0] for m in means])
    id_ = np.array([m[1] for m in means])
    return CorrelationCurve(taus.copy(), g2, ic, id_, eta)


def closed_form_g2(eta: float, bandwidth: float, tau) -> np.ndarray | float:
    """Continuum limit of the flat-spectrum correlation.

    g2 = 1/2 + cos(2 eta)/2 * sinc(4 bandwidth tau), with sinc(x) = sin(x)/x.
    """
    if not bandwidth > 0:
        raise GridError(f"bandwidth must be positive, got {bandwidth!r}")
    x = 4.0 * bandwidth * np.asarray(tau, dtype=float)
    # np.sinc is normalized: sinc(y) = sin(pi y) / (pi y)
    out = 0.5 + 0.5 * math.cos(2.0 * eta) * np.sinc(x / math.pi)
    return float(out) if np.ndim(out) == 0 else out


def detuning_trace(
    delta_f: float, eta: float, tgrid: TauGrid, bandwidth: float = PAPER_BANDWIDTH
) -> DetuningTrace:
    """Intensity-product trace of a single detuned pair across the delay grid."""
    if abs(delta_f) > bandwidth:
        raise OutOfBandError(f"|delta_f|={abs(delta_f):g} Hz exceeds bandwidth {bandwidth:g} Hz")
    product = pair_products(1.0, eta, delta_f, tgrid.points)
    return DetuningTrace(delta_f, eta, tgrid.points.copy(), np.asarray(product, dtype=float))
