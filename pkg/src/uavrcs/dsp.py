"""Chamber post-processing chain and a synthetic chamber generator.

Processing per azimuth column:

1. vector background subtraction in the frequency domain
2. Hann window over the full band
3. zero-padded inverse DFT to the time domain
4. Tukey time gate around the target zone
5. forward DFT back to frequency, |.|^2 at the bin nearest band center
6. ratio against an identically processed sphere, times the exact sphere RCS

Every function is pure and works on whole ``(n_freq, n_azimuth)`` blocks,
so azimuth columns are independent and order-preserving.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import EmptyTargetZoneError, ValidationError
from .mie import (
    SPEED_OF_LIGHT,
    ChamberGeometry,
    Sphere,
    calibrate,
    link_power_ratio,
    sphere_rcs_exact,
    wavelength,
)
from .signature import FrequencySweep, Polarization, RcsSignature

DEFAULT_TAPER = 0.5
DEFAULT_PAD = 4


@dataclass(frozen=True)
class FreqTrace:
    frequencies: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        f = np.asarray(self.frequencies, dtype=float)
        v = np.asarray(self.values, dtype=complex)
        if f.ndim != 1 or f.shape[0] != v.shape[0]:
            raise ValidationError("frequency axis and values differ in length")
        if f.size >= 2:
            step = np.diff(f)
            if np.any(step <= 0) or np.max(np.abs(step - step[0])) > 1e-9 * step[0]:
                raise ValidationError("frequency grid must be uniform and ascending")
        object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "values", v)

    @property
    def step(self) -> float:
        return float(self.frequencies[1] - self.frequencies[0])


@dataclass(frozen=True)
class TimeTrace:
    times: np.ndarray
    values: np.ndarray
    # bookkeeping needed to return to the original frequency grid
    f0: float = 0.0
    n_freq: int = 0

    @property
    def step(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def span(self) -> float:
        return float(self.times.size * self.step)


@dataclass(frozen=True)
class GateSpec:
    t_start: float
    t_stop: float
    taper_fraction: float = DEFAULT_TAPER

    def __post_init__(self) -> None:
        if not self.t_start < self.t_stop:
            raise ValidationError("gate needs t_start < t_stop")
        if not 0.0 <= self.taper_fraction <= 1.0:
            raise ValidationError("taper fraction must lie in [0, 1]")

    @property
    def width(self) -> float:
        return self.t_stop - self.t_start

    @property
    def center(self) -> float:
        return 0.5 * (self.t_start + self.t_stop)

    @classmethod
    def centered(cls, center: float, width: float, taper_fraction: float = DEFAULT_TAPER) -> "GateSpec":
        return cls(center - 0.5 * width, center + 0.5 * width, taper_fraction)


@dataclass(frozen=True)
class ClutterSpec:
    """Echoes left after background subtraction, plus the empty-chamber response."""

    echoes: Tuple[Tuple[float, complex], ...] = ()
    background: Optional[np.ndarray] = None  # complex, one value per frequency

    def __post_init__(self) -> None:
        echoes = tuple((float(d), complex(a)) for d, a in self.echoes)
        if any(d < 0 for d, _ in echoes):
            raise ValidationError("echo delays must be non-negative")
        object.__setattr__(self, "echoes", echoes)


@dataclass(frozen=True)
class Calibration:
    """Raw sphere measurement used as the calibration reference."""

    sphere_s21: np.ndarray  # complex, one value per frequency
    sphere: Sphere
    background_s21: Optional[np.ndarray] = None  # defaults to the sweep background


def background_subtract(target: FreqTrace, background: FreqTrace) -> FreqTrace:
    if target.frequencies.shape != background.frequencies.shape or not np.allclose(
        target.frequencies, background.frequencies, rtol=1e-12, atol=0.0
    ):
        raise ValidationError("target and background frequency axes differ")
    return FreqTrace(target.frequencies, target.values - background.values)


def hann_weights(n: int) -> np.ndarray:
    if n < 2:
        raise ValidationError("Hann window needs at least two points")
    w = 0.5 * (1.0 - np.cos(2.0 * np.pi * np.arange(n) / (n - 1)))
    w[0] = w[-1] = 0.0
    return w


def hann_window(t: FreqTrace) -> FreqTrace:
    w = hann_weights(t.values.shape[0])
    shape = (-1,) + (1,) * (t.values.ndim - 1)
    return FreqTrace(t.frequencies, t.values * w.reshape(shape))


def to_time(t: FreqTrace, zero_pad_factor: int = DEFAULT_PAD) -> TimeTrace:
    """Orthonormal inverse DFT after zero-padding to ``zero_pad_factor * n`` points.

    The time axis starts at 0 with step ``1 / (padded_n * df)`` and spans
    ``1 / df``. Echo delays map to time directly for spectra written as
    ``A exp(-i 2 pi f delay)``.
    """
    if int(zero_pad_factor) != zero_pad_factor or zero_pad_factor < 1:
        raise ValidationError("zero_pad_factor must be an integer >= 1")
    n = t.values.shape[0]
    padded = int(zero_pad_factor) * n
    values = np.fft.ifft(t.values, n=padded, axis=0, norm="ortho")
    times = np.arange(padded) / (padded * t.step)
    return TimeTrace(times, values, f0=float(t.frequencies[0]), n_freq=n)


def to_freq(t: TimeTrace) -> FreqTrace:
    """Orthonormal forward DFT back onto the original frequency grid."""
    padded = t.values.shape[0]
    spectrum = np.fft.fft(t.values, axis=0, norm="ortho")
    n = t.n_freq or padded
    df = 1.0 / (padded * t.step)
    freqs = t.f0 + df * np.arange(n)
    return FreqTrace(freqs, spectrum[:n])


def tukey_weights(times: np.ndarray, gate: GateSpec) -> np.ndarray:
    """Continuous Tukey window over ``[t_start, t_stop]``, zero outside."""
    u = (np.asarray(times, dtype=float) - gate.t_start) / gate.width
    w = np.zeros_like(u)
    inside = (u >= 0.0) & (u <= 1.0)
    w[inside] = 1.0
    alpha = gate.taper_fraction
    if alpha > 0:
        rise = inside & (u < alpha / 2)
        fall = inside & (u > 1.0 - alpha / 2)
        w[rise] = 0.5 * (1.0 - np.cos(2.0 * np.pi * u[rise] / alpha))
        w[fall] = 0.5 * (1.0 - np.cos(2.0 * np.pi * (1.0 - u[fall]) / alpha))
    return w


def tukey_gate(t: TimeTrace, gate: GateSpec) -> TimeTrace:
    if gate.t_start < 0 or gate.t_stop > t.span + 1e-15:
        raise ValidationError(
            f"gate [{gate.t_start:g}, {gate.t_stop:g}] s lies outside the trace span [0, {t.span:g}] s"
        )
    w = tukey_weights(t.times, gate)
    shape = (-1,) + (1,) * (t.values.ndim - 1)
    return TimeTrace(t.times, t.values * w.reshape(shape), t.f0, t.n_freq)


def suggest_gate(t: TimeTrace, width: float, taper_fraction: float = DEFAULT_TAPER) -> GateSpec:
    """Gate of ``width`` seconds centred on the strongest time-domain return."""
    power = np.abs(t.values) ** 2
    if power.ndim > 1:
        power = power.sum(axis=tuple(range(1, power.ndim)))
    peak = float(t.times[int(np.argmax(power))])
    start = min(max(peak - 0.5 * width, 0.0), t.span - width)
    return GateSpec(start, start + width, taper_fraction)


def _gated_center_power(
    freqs: np.ndarray, values: np.ndarray, gate: GateSpec, pad: int, center_hz: float
) -> np.ndarray:
    trace = FreqTrace(freqs, values)
    gated = tukey_gate(to_time(hann_window(trace), pad), gate)
    back = to_freq(gated)
    idx = int(np.argmin(np.abs(back.frequencies - center_hz)))
    return np.abs(back.values[idx]) ** 2


def process_sweep(
    sweep: FrequencySweep,
    background: FrequencySweep,
    gate: GateSpec,
    cal: Calibration,
    *,
    zero_pad_factor: int = DEFAULT_PAD,
    center_frequency: Optional[float] = None,
    label: str = "",
) -> RcsSignature:
    """Turn a raw target sweep into a calibrated RCS signature."""
    if background.frequencies.shape != sweep.frequencies.shape or not np.allclose(
        background.frequencies, sweep.frequencies, rtol=1e-12, atol=0.0
    ):
        raise ValidationError("sweep and background frequency axes differ")
    bg = background.s21
    if bg.shape[1] not in (1, sweep.s21.shape[1]):
        raise ValidationError("background must have one azimuth column or match the sweep")
    f = sweep.frequencies
    fc = sweep.center_frequency if center_frequency is None else float(center_frequency)

    target = sweep.s21 - bg
    d_rcs = _gated_center_power(f, target, gate, zero_pad_factor, fc)

    sphere_s21 = np.asarray(cal.sphere_s21, dtype=complex).reshape(-1)
    cal_bg = bg[:, 0] if cal.background_s21 is None else np.asarray(cal.background_s21, complex).reshape(-1)
    if sphere_s21.shape[0] != f.size or cal_bg.shape[0] != f.size:
        raise ValidationError("calibration traces do not match the sweep frequency axis")
    s_rcs = float(_gated_center_power(f, sphere_s21 - cal_bg, gate, zero_pad_factor, fc))
    if not s_rcs > 0:
        raise EmptyTargetZoneError("empty target zone: calibration sphere response is zero")

    empty = ~(d_rcs > 0)
    if np.any(empty):
        bad = sweep.azimuths[empty]
        raise EmptyTargetZoneError(
            f"empty target zone at {bad.size} azimuth(s), first at {bad[0]:g} deg"
        )
    sigma_th = sphere_rcs_exact(cal.sphere, wavelength(fc))
    rcs = calibrate(d_rcs, np.full_like(d_rcs, s_rcs), sigma_th)
    return RcsSignature(sweep.azimuths, rcs, fc, sweep.polarization, label)


def default_frequencies(center_hz: float = 15e9, span_hz: float = 1e9, n: int = 201) -> np.ndarray:
    return np.linspace(center_hz - 0.5 * span_hz, center_hz + 0.5 * span_hz, n)


def _echo(freqs: np.ndarray, delay: float) -> np.ndarray:
    return np.exp(-2j * np.pi * freqs * delay)


def _noise_sigma(noise_floor_db: float, geometry: ChamberGeometry, freqs: np.ndarray) -> float:
    # floor expressed relative to the echo power of a 1 m^2 target at band center
    ref, _ = link_power_ratio(1.0, wavelength(float(np.mean(freqs))), geometry)
    return float(np.sqrt(ref * 10.0 ** (noise_floor_db / 10.0)))


def synthesize_sweep(
    target_sigma: RcsSignature,
    clutter: ClutterSpec,
    geometry: ChamberGeometry,
    noise_floor: float,
    *,
    frequencies: Optional[Sequence[float]] = None,
    target_delay: float = 40e-9,
    include_target: bool = True,
    seed: int = 0,
) -> FrequencySweep:
    """Simulate raw chamber S21 for a target on the turntable.

    S21 at each frequency/azimuth is the coherent sum of the target echo
    (amplitude ``sqrt(link_power_ratio(sigma))``), the clutter echoes, the
    background trace and complex Gaussian noise. ``noise_floor`` is in dB
    relative to the echo power of a 1 m^2 target at band center.
    ``include_target=False`` gives the matching empty-chamber sweep.
    """
    freqs = default_frequencies() if frequencies is None else np.asarray(frequencies, dtype=float)
    az = target_sigma.azimuths
    s21 = np.zeros((freqs.size, az.size), dtype=complex)

    if include_target:
        lam = SPEED_OF_LIGHT / freqs
        k_link = np.array([link_power_ratio(1.0, l, geometry)[0] for l in lam])
        amp = np.sqrt(np.outer(k_link, target_sigma.rcs_linear))
        s21 += amp * _echo(freqs, target_delay)[:, None]
        for delay, a in clutter.echoes:
            s21 += (a * _echo(freqs, delay))[:, None]
    if clutter.background is not None:
        bg = np.asarray(clutter.background, dtype=complex).reshape(-1)
        if bg.size != freqs.size:
            raise ValidationError("background trace length differs from frequency grid")
        s21 += bg[:, None]

    if np.isfinite(noise_floor):
        rng = np.random.Generator(np.random.PCG64(seed))
        sd = _noise_sigma(noise_floor, geometry, freqs) / np.sqrt(2.0)
        s21 += sd * (rng.standard_normal(s21.shape) + 1j * rng.standard_normal(s21.shape))

    return FrequencySweep(freqs, az, target_sigma.polarization, s21)


def synthesize_sphere(
    sphere: Sphere,
    clutter: ClutterSpec,
    geometry: ChamberGeometry,
    noise_floor: float,
    *,
    frequencies: Optional[Sequence[float]] = None,
    target_delay: float = 40e-9,
    seed: int = 0,
) -> np.ndarray:
    """Raw S21 of a calibration sphere (single column), RCS taken at band center."""
    freqs = default_frequencies() if frequencies is None else np.asarray(frequencies, dtype=float)
    sigma = sphere_rcs_exact(sphere, wavelength(float(np.mean(freqs))))
    sig = RcsSignature([0.0], [sigma], float(np.mean(freqs)), Polarization.VV, "sphere")
    sweep = synthesize_sweep(
        sig, clutter, geometry, noise_floor, frequencies=freqs, target_delay=target_delay, seed=seed
    )
    return sweep.s21[:, 0].copy()
