"""Per-pair fields and intensities for a detuned coherent photon pair on a 50/50 beam splitter.

Each pair carries opposite detunings +/- delta_f and a fixed relative phase eta.
After a delay tau the pair has accumulated a phase detuning ``delta_f * tau``.
The two spectral halves are handled as two branches: ``Branch.FIRST`` is the
positive-detuning half and ``Branch.SECOND`` the half where the input photons
are swapped.

Intensities are expressed with I0 = e0**2, the intensity of a single input.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np

SQRT2 = math.sqrt(2.0)


class InvalidConfigError(ValueError):
    """Raised for non-finite pair parameters or a non-positive amplitude."""


class Branch(enum.Enum):
    FIRST = "first"
    SECOND = "second"

    @property
    def sign(self) -> int:
        return 1 if self is Branch.FIRST else -1


@dataclass(frozen=True)
class PairConfig:
    """Physical parameters of one photon pair.

    e0 is the field amplitude of each input, eta the relative phase (rad),
    delta_f the detuning (Hz) and tau the delay (s).
    """

    e0: float
    eta: float
    delta_f: float
    tau: float

    def __post_init__(self):
        for name in ("e0", "eta", "delta_f", "tau"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise InvalidConfigError(f"{name} must be finite, got {value!r}")
        if self.e0 <= 0:
            raise InvalidConfigError(f"e0 must be positive, got {self.e0!r}")

    @property
    def phase_detuning(self) -> float:
        return self.delta_f * self.tau

    @property
    def i0(self) -> float:
        return self.e0 * self.e0

    def check_band(self, bandwidth: float) -> None:
        if abs(self.delta_f) > bandwidth:
            raise InvalidConfigError(
                f"|delta_f|={abs(self.delta_f):g} Hz exceeds bandwidth {bandwidth:g} Hz"
            )


@dataclass(frozen=True)
class FieldPair:
    """Two complex mode amplitudes, either (E_a, E_b) or (E_c, E_d)."""

    a: complex
    b: complex

    def __post_init__(self):
        for z in (self.a, self.b):
            if not cmath.isfinite(z):
                raise InvalidConfigError(f"field amplitude must be finite, got {z!r}")

    @property
    def intensities(self) -> tuple[float, float]:
        return abs(self.a) ** 2, abs(self.b) ** 2


@dataclass(frozen=True)
class OutputIntensities:
    i_c: float
    i_d: float

    @property
    def total(self) -> float:
        return self.i_c + self.i_d


def make_input_fields(cfg: PairConfig, branch: Branch) -> FieldPair:
    """Input fields of the pair for the given branch.

    FIRST:  E_a = e0 exp(-i eta) exp(-i D),  E_b = e0 exp(+i D)
    SECOND: E_a = e0 exp(+i eta) exp(+i D),  E_b = e0 exp(-i D)

    with D = delta_f * tau.
    """
    s = branch.sign
    d = cfg.phase_detuning
    a = cfg.e0 * cmath.exp(-1j * s * (cfg.eta + d))
    b = cfg.e0 * cmath.exp(1j * s * d)
    return FieldPair(a, b)


def bs_transform(inputs: FieldPair) -> FieldPair:
    """Apply the lossless 50/50 beam splitter (1/sqrt2) [[1, i], [i, 1]]."""
    a, b = inputs.a, inputs.b
    return FieldPair((a + 1j * b) / SQRT2, (1j * a + b) / SQRT2)


def branch_intensities(e0, eta, delta_f, tau, branch: Branch):
    """Closed-form output intensities, broadcasting over array arguments.

    Returns ``(i_c, i_d)`` with i_c = I0 (1 - s sin(eta + 2 delta_f tau)) and
    i_d = I0 (1 + s sin(...)), where s is +1 for FIRST and -1 for SECOND.
    """
    i0 = np.square(e0)
    sin_term = branch.sign * np.sin(eta + 2.0 * np.multiply(delta_f, tau))
    return i0 * (1.0 - sin_term), i0 * (1.0 + sin_term)


def output_intensities(cfg: PairConfig, branch: Branch) -> OutputIntensities:
    i_c, i_d = branch_intensities(cfg.e0, cfg.eta, cfg.delta_f, cfg.tau, branch)
    return OutputIntensities(float(i_c), float(i_d))


def pair_products(e0, eta, delta_f, tau):
    """Branch-averaged intensity product (I_c I_d + I'_c I'_d) / 2, vectorized.

    Each branch product is (1 - sin)(1 + sin) I0**2, i.e. I0**2 cos**2 of the
    total phase, but evaluated through the detector intensities so that a
    vanishing intensity gives an exact zero.
    """
    c1, d1 = branch_intensities(e0, eta, delta_f, tau, Branch.FIRST)
    c2, d2 = branch_intensities(e0, eta, delta_f, tau, Branch.SECOND)
    return 0.5 * (c1 * d1 + c2 * d2)


def coincidence_product(cfg: PairConfig) -> float:
    """Per-pair contribution to the coincidence correlation, in units of e0**4."""
    return float(pair_products(cfg.e0, cfg.eta, cfg.delta_f, cfg.tau))
