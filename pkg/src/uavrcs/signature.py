"""Sweep and signature containers, dBsm conversions and azimuth sectors.

All containers are frozen dataclasses holding read-only numpy arrays, so
instances can be shared freely between threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Tuple

import numpy as np

from .errors import DomainError, ValidationError

# Two azimuths closer than this (after wrapping) are the same look angle.
ANGLE_TOL_DEG = 1e-9


class Polarization(Enum):
    """Co-polarized transmit/receive configuration."""

    VV = "VV"
    HH = "HH"

    @classmethod
    def parse(cls, value: "str | Polarization") -> "Polarization":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().upper())
        except ValueError:
            raise ValidationError(f"unknown polarization {value!r}; expected VV or HH") from None


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


def _check_uniform(values: np.ndarray, what: str, rtol: float) -> None:
    steps = np.diff(values)
    if np.any(steps <= 0):
        raise ValidationError(f"{what} must be strictly increasing")
    if steps.size and np.max(np.abs(steps - steps[0])) > rtol * abs(steps[0]):
        raise ValidationError(f"{what} step is not uniform")


@dataclass(frozen=True)
class FrequencySweep:
    """Complex S21 over a frequency x azimuth grid for one polarization."""

    frequencies: np.ndarray  # Hz, ascending, uniform step
    azimuths: np.ndarray  # degrees, strictly increasing
    polarization: Polarization
    s21: np.ndarray  # complex, shape (n_freq, n_azimuth)

    def __post_init__(self) -> None:
        object.__setattr__(self, "frequencies", _frozen(self.frequencies))
        object.__setattr__(self, "azimuths", _frozen(self.azimuths))
        object.__setattr__(self, "polarization", Polarization.parse(self.polarization))
        s21 = _frozen(self.s21, complex)
        if s21.ndim == 1:
            s21 = _frozen(s21.reshape(-1, 1), complex)
        object.__setattr__(self, "s21", s21)

        if self.frequencies.ndim != 1 or self.frequencies.size < 2:
            raise ValidationError("a sweep needs at least two frequency points")
        _check_uniform(self.frequencies, "frequency axis", 1e-9)
        if self.azimuths.ndim != 1 or self.azimuths.size < 1:
            raise ValidationError("a sweep needs at least one azimuth")
        if np.any(np.diff(self.azimuths) <= 0):
            raise ValidationError("azimuth axis must be strictly increasing")
        if self.s21.shape != (self.frequencies.size, self.azimuths.size):
            raise ValidationError(
                f"s21 shape {self.s21.shape} does not match axes "
                f"({self.frequencies.size}, {self.azimuths.size})"
            )

    @property
    def freq_step(self) -> float:
        return float(self.frequencies[1] - self.frequencies[0])

    @property
    def center_frequency(self) -> float:
        return float(0.5 * (self.frequencies[0] + self.frequencies[-1]))


@dataclass(frozen=True)
class RcsSignature:
    """Calibrated linear RCS (m^2) versus azimuth at one frequency and polarization."""

    azimuths: np.ndarray
    rcs_linear: np.ndarray
    frequency: float = 0.0
    polarization: Polarization = Polarization.VV
    label: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "azimuths", _frozen(self.azimuths))
        object.__setattr__(self, "rcs_linear", _frozen(self.rcs_linear))
        object.__setattr__(self, "polarization", Polarization.parse(self.polarization))
        if self.azimuths.ndim != 1 or self.azimuths.shape != self.rcs_linear.shape:
            raise ValidationError("azimuths and rcs_linear must be 1-D with equal length")
        if not np.all(self.rcs_linear > 0):
            raise ValidationError("every RCS value must be strictly positive")

    def __len__(self) -> int:
        return int(self.rcs_linear.size)

    @property
    def rcs_dbsm(self) -> np.ndarray:
        return to_dbsm(self.rcs_linear)

    def with_values(self, rcs_linear) -> "RcsSignature":
        return RcsSignature(self.azimuths, rcs_linear, self.frequency, self.polarization, self.label)


@dataclass(frozen=True)
class SectorSpec:
    """Azimuth sector ``[center - width/2, center + width/2]`` (closed, wrapped)."""

    center: float
    width: float = field(default=360.0)

    def __post_init__(self) -> None:
        if not (0 < self.width <= 360):
            raise ValidationError(f"sector width must lie in (0, 360], got {self.width}")
        object.__setattr__(self, "center", float(self.center) % 360.0)

    @classmethod
    def parse(cls, text: str) -> "SectorSpec":
        """Parse ``"center:width"`` (degrees)."""
        try:
            c, w = text.split(":")
            return cls(float(c), float(w))
        except ValueError as exc:
            raise ValidationError(f"bad sector {text!r}; expected CENTER:WIDTH") from exc

    def contains(self, azimuths) -> np.ndarray:
        if self.width >= 360:
            return np.ones(np.shape(azimuths), dtype=bool)
        # signed offset from the center, wrapped into [-180, 180)
        offset = (np.asarray(azimuths, float) - self.center + 180.0) % 360.0 - 180.0
        return np.abs(offset) <= 0.5 * self.width + ANGLE_TOL_DEG


def to_dbsm(x):
    """Linear RCS (m^2) to dBsm."""
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError("dBsm conversion needs strictly positive RCS")
    out = 10.0 * np.log10(arr)
    return float(out) if out.ndim == 0 else out


def from_dbsm(x):
    """dBsm to linear RCS (m^2)."""
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("dBsm value must be finite")
    out = 10.0 ** (arr / 10.0)
    return float(out) if out.ndim == 0 else out


def db_stats(sig: RcsSignature) -> Tuple[float, float]:
    """Mean and population standard deviation of the per-azimuth dBsm values."""
    if len(sig) == 0:
        raise ValidationError("db_stats of an empty signature")
    db = to_dbsm(sig.rcs_linear)
    db = np.atleast_1d(db)
    return float(np.mean(db)), float(np.std(db))


def sector_slice(sig: RcsSignature, sector: SectorSpec) -> RcsSignature:
    """Keep the samples whose azimuth falls inside ``sector``.

    Input order is preserved. A look angle that appears twice after
    wrapping (e.g. 0 and 360 degrees) is kept once, at its first occurrence.
    A full 360-degree sector returns the signature unchanged.
    """
    if sector.width >= 360:
        return sig
    inside = sector.contains(sig.azimuths)
    wrapped = np.round(sig.azimuths % 360.0, 9) % 360.0
    seen = set()
    keep = np.zeros(len(sig), dtype=bool)
    for i in np.flatnonzero(inside):
        if wrapped[i] not in seen:
            seen.add(wrapped[i])
            keep[i] = True
    if not keep.any():
        raise ValidationError(
            f"sector center={sector.center} width={sector.width} selects no azimuths"
        )
    return RcsSignature(
        sig.azimuths[keep], sig.rcs_linear[keep], sig.frequency, sig.polarization, sig.label
    )


def full_azimuth_grid(step_deg: float = 2.0) -> np.ndarray:
    """Azimuths ``0, step, ..., 360`` inclusive (181 points at 2 degrees)."""
    n = int(round(360.0 / step_deg)) + 1
    return np.linspace(0.0, 360.0, n)
