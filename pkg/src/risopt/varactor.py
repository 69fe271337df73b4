"""Varactor diode model: reactance/capacitance conversion, bias polynomial,
realizable-range clipping, series loss and the device tolerance band."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class VaractorModel:
    """Quartic bias polynomial v(x) plus capacitance/voltage limits and loss.

    The polynomial maps a desired (negative, capacitive) reactance in ohms to
    the reverse bias voltage in volts; coefficients carry units V/ohm^k.
    """

    a: float
    b: float
    c: float
    d: float
    e: float
    c_min: float
    c_max: float
    v_min: float
    v_max: float
    series_resistance: float

    def __post_init__(self):
        if not (0 < self.c_min < self.c_max):
            raise DomainError("capacitance limits must satisfy 0 < c_min < c_max")
        if not (self.v_min < self.v_max):
            raise DomainError("voltage limits must satisfy v_min < v_max")
        if self.series_resistance < 0:
            raise DomainError("series resistance must be non-negative")

    def reactance_range(self, f: float) -> tuple[float, float]:
        """Realizable reactance interval (most negative, least negative) at f."""
        return (
            reactance_of_capacitance(self.c_min, f),
            reactance_of_capacitance(self.c_max, f),
        )


#: Skyworks SMV2201-040LF: 0.23-2.1 pF over 0-20 V, ~5.4 ohm series loss.
SMV2201_040LF = VaractorModel(
    a=-3.55,
    b=-1.77e-1,
    c=-8.28e-4,
    d=8.5e-8,
    e=1.47e-8,
    c_min=0.23e-12,
    c_max=2.1e-12,
    v_min=0.0,
    v_max=20.0,
    series_resistance=5.4,
)


@dataclass(frozen=True)
class BiasPoint:
    """One element's operating point: capacitance, reactance at f, bias voltage."""

    capacitance: float
    reactance: float
    voltage: float
    clipped: bool
    clamped: bool = False


def reactance_of_capacitance(capacitance: float, f: float) -> float:
    """x = -1/(2*pi*f*C); always negative for a capacitor."""
    if capacitance <= 0:
        raise DomainError("capacitance must be positive")
    if f <= 0:
        raise DomainError("frequency must be positive")
    return -1.0 / (TWO_PI * f * capacitance)


def capacitance_of_reactance(x: float, f: float) -> float:
    """Exact inverse of reactance_of_capacitance; requires capacitive x < 0."""
    if x >= 0:
        raise DomainError(f"reactance {x} ohm is not capacitive")
    if f <= 0:
        raise DomainError("frequency must be positive")
    return -1.0 / (TWO_PI * f * x)


def bias_voltage(model: VaractorModel, x: float) -> tuple[float, bool]:
    """Bias voltage for reactance x, clamped into the supply range.

    Returns (voltage, clamped). The raw polynomial value is clamped into
    [v_min, v_max], mirroring the hard supply ceiling of the bias hardware.
    """
    raw = model.a + x * (model.b + x * (model.c + x * (model.d + x * model.e)))
    if raw < model.v_min:
        return model.v_min, True
    if raw > model.v_max:
        return model.v_max, True
    return raw, False


def clip_reactance(model: VaractorModel, x: float, f: float) -> tuple[float, bool]:
    """Clip x to the nearest realizable reactance (in ohms) at frequency f.

    Inductive requests (x > 0) land on the c_max endpoint, which is the
    nearest realizable value in ohms.
    """
    x_lo, x_hi = model.reactance_range(f)
    if x < x_lo:
        return x_lo, True
    if x > x_hi:
        return x_hi, True
    return x, False


def realized_load(model: VaractorModel, capacitance: float, f: float) -> complex:
    """Series loss plus the capacitive reactance actually presented at f."""
    if not (model.c_min <= capacitance <= model.c_max):
        raise DomainError(
            f"capacitance {capacitance:.3e} F outside [{model.c_min:.3e}, {model.c_max:.3e}]"
        )
    return complex(model.series_resistance, reactance_of_capacitance(capacitance, f))


def bias_point(model: VaractorModel, x: float, f: float) -> BiasPoint:
    """Full realizable operating point for a requested reactance."""
    x_clipped, clipped = clip_reactance(model, x, f)
    cap = capacitance_of_reactance(x_clipped, f)
    volts, clamped = bias_voltage(model, x_clipped)
    return BiasPoint(
        capacitance=cap, reactance=x_clipped, voltage=volts, clipped=clipped, clamped=clamped
    )


def tolerance_fraction(model: VaractorModel, capacitance: float) -> float:
    """Device tolerance band at a nominal capacitance.

    Interpolates linearly in log-capacitance between +/-50% at c_min and
    +/-10% at c_max (the two datasheet anchors); constant outside that range.
    """
    if capacitance <= 0:
        raise DomainError("capacitance must be positive")
    lo, hi = math.log(model.c_min), math.log(model.c_max)
    t = (math.log(capacitance) - lo) / (hi - lo)
    t = min(max(t, 0.0), 1.0)
    return 0.5 + t * (0.1 - 0.5)
