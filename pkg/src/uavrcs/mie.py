"""PEC sphere RCS, compact-range link budget and sphere calibration.

The exact backscatter RCS of a perfectly conducting sphere is the Mie
series written with Riccati-Hankel functions of the second kind,
``H_n(x) = x * h_n^(2)(x)``::

    sigma = lambda^2 / (4 pi) * | sum_{n>=1} (-1)^n (2n+1) / (H_n'(ka) H_n(ka)) |^2
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Tuple

import numpy as np

from .errors import DomainError, ValidationError

SPEED_OF_LIGHT = 299_792_458.0

# Above this electrical size the recurrence is too long to be worth running.
MAX_KA = 1.0e4

# "2 pi a << lambda" made concrete: Rayleigh branch when 2 pi a < 0.3 lambda.
RAYLEIGH_FRACTION = 0.3


class ScatterRegion(Enum):
    RAYLEIGH = "Rayleigh"
    MIE = "Mie"
    OPTICAL = "Optical"


@dataclass(frozen=True)
class Sphere:
    radius: float  # m

    def __post_init__(self) -> None:
        if not self.radius > 0:
            raise DomainError(f"sphere radius must be positive, got {self.radius}")


@dataclass(frozen=True)
class ChamberGeometry:
    """Offset-fed compact range parameters.

    Attributes:
        focal_length: reflector focal length f_L (m)
        outside_distance: reflector outside distance K (m)
        tx_gain: linear transmit horn gain
        rx_gain: linear receive horn gain
        tx_power: transmit power (W)
    """

    focal_length: float
    outside_distance: float
    tx_gain: float = 1.0
    rx_gain: float = 1.0
    tx_power: float = 1.0

    def __post_init__(self) -> None:
        if not (self.focal_length > 0 and self.tx_gain > 0 and self.rx_gain > 0 and self.tx_power > 0):
            raise ValidationError("chamber focal length, gains and power must be positive")
        if self.outside_distance < 0:
            raise ValidationError("chamber outside distance must be non-negative")


def wavelength(frequency_hz: float) -> float:
    if not frequency_hz > 0:
        raise DomainError("frequency must be positive")
    return SPEED_OF_LIGHT / frequency_hz


def spherical_hankel2_all(nmax: int, x: float) -> np.ndarray:
    """``h_n^(2)(x)`` for ``n = 0..nmax`` by upward recurrence.

    Upward recurrence is stable here because ``y_n`` dominates ``h_n^(2)``
    and grows with ``n``.
    """
    if not x > 0:
        raise DomainError(f"spherical Hankel function needs x > 0, got {x}")
    if nmax < 0:
        raise DomainError("order must be non-negative")
    s, c = math.sin(x), math.cos(x)
    h = np.empty(max(nmax, 1) + 1, dtype=complex)
    # j0 = sin/x, y0 = -cos/x ; j1 = sin/x^2 - cos/x, y1 = -cos/x^2 - sin/x
    h[0] = complex(s / x, c / x)
    h[1] = complex(s / x**2 - c / x, c / x**2 + s / x)
    with np.errstate(over="raise", invalid="raise"):
        try:
            for n in range(1, nmax):
                h[n + 1] = (2 * n + 1) / x * h[n] - h[n - 1]
        except FloatingPointError:
            raise DomainError(
                f"Hankel recurrence overflowed at x={x}, nmax={nmax}"
            ) from None
    if not np.all(np.isfinite(h[: nmax + 1])):
        raise DomainError(f"Hankel recurrence overflowed at x={x}, nmax={nmax}")
    return h[: nmax + 1]


def spherical_hankel2(n: int, x: float, derivative: bool = False) -> complex:
    """Spherical Hankel function of the second kind ``j_n(x) - i y_n(x)``.

    With ``derivative=True`` returns ``d/dx h_n^(2)(x)`` from
    ``h_n' = h_{n-1} - (n+1)/x h_n`` (``h_0' = -h_1``).
    """
    if n < 0:
        raise DomainError("order must be non-negative")
    h = spherical_hankel2_all(n + 1, x)
    if not derivative:
        return complex(h[n])
    if n == 0:
        return complex(-h[1])
    return complex(h[n - 1] - (n + 1) / x * h[n])


def mie_terms(ka: float) -> int:
    """Series truncation ``ceil(ka + 4 ka^(1/3) + 2)``."""
    return int(math.ceil(ka + 4.0 * ka ** (1.0 / 3.0) + 2.0))


def _series_sum(ka: float, n_terms: int) -> complex:
    h = spherical_hankel2_all(n_terms, ka)
    n = np.arange(1, n_terms + 1)
    riccati = ka * h[1:]
    riccati_prime = ka * h[:-1] - n * h[1:]
    signs = np.where(n % 2 == 0, 1.0, -1.0)
    return complex(np.sum(signs * (2 * n + 1) / (riccati_prime * riccati)))


def sphere_rcs_exact(sphere: Sphere, wavelength_m: float, extra_terms: int = 0) -> float:
    """Exact monostatic RCS (m^2) of a PEC sphere from the Mie series."""
    if not wavelength_m > 0:
        raise DomainError("wavelength must be positive")
    ka = 2.0 * math.pi * sphere.radius / wavelength_m
    if ka > MAX_KA:
        raise DomainError(
            f"ka={ka:.3g} exceeds {MAX_KA:g}; use sphere_rcs_approx (optical region)"
        )
    total = _series_sum(ka, mie_terms(ka) + extra_terms)
    return wavelength_m**2 / (4.0 * math.pi) * abs(total) ** 2


def rayleigh_rcs(sphere: Sphere, wavelength_m: float) -> float:
    ka = 2.0 * math.pi * sphere.radius / wavelength_m
    return 9.0 * wavelength_m**2 / (4.0 * math.pi) * ka**6


def optical_rcs(sphere: Sphere) -> float:
    return math.pi * sphere.radius**2


def scatter_region(sphere: Sphere, wavelength_m: float) -> ScatterRegion:
    if 2.0 * math.pi * sphere.radius < RAYLEIGH_FRACTION * wavelength_m:
        return ScatterRegion.RAYLEIGH
    if sphere.radius > 2.0 * wavelength_m:
        return ScatterRegion.OPTICAL
    return ScatterRegion.MIE


def sphere_rcs_approx(sphere: Sphere, wavelength_m: float) -> Tuple[float, ScatterRegion]:
    """Region-based sphere RCS: Rayleigh law, optical area, or the exact series."""
    if not wavelength_m > 0:
        raise DomainError("wavelength must be positive")
    region = scatter_region(sphere, wavelength_m)
    if region is ScatterRegion.RAYLEIGH:
        return rayleigh_rcs(sphere, wavelength_m), region
    if region is ScatterRegion.OPTICAL:
        return optical_rcs(sphere), region
    return sphere_rcs_exact(sphere, wavelength_m), region


def calibrate(d_rcs, s_rcs, sigma_th: float) -> np.ndarray:
    """Scale measured target response by the sphere's measured/theoretical ratio.

    ``sigma_uav = d_rcs / s_rcs * sigma_th`` elementwise.
    """
    d = np.asarray(d_rcs, dtype=float)
    s = np.asarray(s_rcs, dtype=float)
    if d.shape != s.shape:
        raise ValidationError(f"length mismatch: {d.shape} vs {s.shape}")
    if np.any(~(s > 0)):
        raise DomainError("calibration reference must be strictly positive")
    if not sigma_th > 0:
        raise DomainError("theoretical sphere RCS must be positive")
    return d / s * sigma_th


def principal_distance(g: ChamberGeometry) -> float:
    """Focus-to-reflector distance along the principal ray, ``f_L + K^2 / (16 f_L)``."""
    return g.focal_length + g.outside_distance**2 / (16.0 * g.focal_length)


def link_power_ratio(sigma: float, wavelength_m: float, g: ChamberGeometry) -> Tuple[float, float]:
    """Received/transmitted power for a target of RCS ``sigma`` and its S21 in dB."""
    if not (sigma > 0 and wavelength_m > 0):
        raise DomainError("RCS and wavelength must be positive")
    r0 = principal_distance(g)
    ratio = sigma * wavelength_m**2 * g.tx_gain * g.rx_gain / ((4.0 * math.pi) ** 3 * r0**4)
    return ratio, 10.0 * math.log10(ratio)


def fraunhofer_distance(d_target: float, wavelength_m: float) -> float:
    """Minimum far-field range ``2 D^2 / lambda``."""
    if not (d_target > 0 and wavelength_m > 0):
        raise DomainError("target size and wavelength must be positive")
    return 2.0 * d_target**2 / wavelength_m
