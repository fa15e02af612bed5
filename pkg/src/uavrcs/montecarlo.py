"""Noise injection at a target SNR and Monte Carlo evaluation of the classifier.

Every (SNR, true class) block draws from its own generator seeded by
``SeedSequence(seed, spawn_key=(snr_index, class_index))``, so results do not
depend on how blocks are scheduled across workers.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .distributions import FittedModel, sample
from .errors import ValidationError
from .recognition import ModelDatabase, build_database, log_likelihood_matrix
from .signature import RcsSignature, SectorSpec, full_azimuth_grid

NOISE_FLOOR_RCS = 1e-300
DEFAULT_SAMPLES_PER_TRIAL = 181

Generator = Union[FittedModel, RcsSignature]


@dataclass(frozen=True)
class NoiseSpec:
    """Target SNR in dB (``+inf`` means noiseless) and the seed of the noise draw."""

    snr_db: float
    seed: int = 0

    def __post_init__(self) -> None:
        if math.isnan(self.snr_db) or self.snr_db == -math.inf:
            raise ValidationError(f"SNR must be a number or +inf, got {self.snr_db}")


def noise_power(samples_linear, snr_db: float) -> float:
    """Noise variance ``mean(sigma) * 10^(-snr/10)``.

    The average echo power of amplitudes ``sqrt(sigma)`` equals the mean
    RCS, so no transform to the time domain is needed.
    """
    x = np.asarray(samples_linear, dtype=float)
    if x.size == 0:
        raise ValidationError("noise power of an empty signature")
    if np.any(~(x > 0)):
        raise ValidationError("noise power needs strictly positive RCS samples")
    return float(np.mean(x) * 10.0 ** (-snr_db / 10.0))


def _add_noise(x: np.ndarray, snr_db: float, rng: np.random.Generator) -> np.ndarray:
    """Noisy copy of each row of ``x``, noise power set per row."""
    if snr_db == math.inf:
        return x.copy()
    var = np.mean(x, axis=-1, keepdims=True) * 10.0 ** (-snr_db / 10.0)
    z = rng.standard_normal((2,) + x.shape)
    amp = np.sqrt(x) + np.sqrt(var / 2.0) * (z[0] + 1j * z[1])
    return np.maximum(np.abs(amp) ** 2, NOISE_FLOOR_RCS)


def inject_noise(sig: RcsSignature, spec: NoiseSpec) -> RcsSignature:
    """Add complex Gaussian noise to ``sqrt(sigma)`` and return ``|.|^2``."""
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    return sig.with_values(_add_noise(sig.rcs_linear, spec.snr_db, rng))


@dataclass(frozen=True)
class SnrSweepResult:
    """Decision counts per SNR.

    ``counts[s, i, j]`` is the number of trials at ``snr_grid[s]`` whose true
    class was ``true_classes[i]`` and whose decision was ``pred_classes[j]``.
    """

    snr_grid: Tuple[float, ...]
    true_classes: Tuple[str, ...]
    pred_classes: Tuple[str, ...]
    counts: np.ndarray
    trials: int
    seed: int
    sector: Optional[SectorSpec] = None

    def __post_init__(self) -> None:
        c = np.array(self.counts, dtype=np.int64, copy=True)
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)

    def _index(self, snr_db: float) -> int:
        for i, s in enumerate(self.snr_grid):
            if s == snr_db:
                return i
        raise ValidationError(f"SNR {snr_db} dB is not in the sweep grid {list(self.snr_grid)}")

    def confusion(self, snr_db: float) -> np.ndarray:
        return confusion_matrix(self, snr_db)

    @property
    def accuracy(self) -> np.ndarray:
        """Mean over true classes (that the database knows) of the correct rate."""
        cols = {name: j for j, name in enumerate(self.pred_classes)}
        rows = [(i, cols[n]) for i, n in enumerate(self.true_classes) if n in cols]
        if not rows:
            raise ValidationError("no true class is present in the database")
        rates = self.counts / self.counts.sum(axis=2, keepdims=True)
        return np.array([np.mean([rates[s, i, j] for i, j in rows]) for s in range(len(self.snr_grid))])


def confusion_matrix(result: SnrSweepResult, snr_db: float) -> np.ndarray:
    """Row-stochastic matrix: rows are true classes, columns are decisions."""
    c = result.counts[result._index(snr_db)].astype(float)
    return c / c.sum(axis=1, keepdims=True)


def _block_rng(seed: int, s: int, c: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(s, c))))


def _clean_batch(gen: Generator, trials: int, n: int, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """Clean signatures (trials x n) and their azimuths."""
    if isinstance(gen, RcsSignature):
        return np.broadcast_to(gen.rcs_linear, (trials, len(gen))).copy(), gen.azimuths
    x = sample(gen.family, gen.params, trials * n, rng).reshape(trials, n)
    return x, full_azimuth_grid(360.0 / (n - 1)) if n > 1 else np.zeros(1)


def _sector_mask(azimuths: np.ndarray, sector: Optional[SectorSpec]) -> np.ndarray:
    if sector is None or sector.width >= 360:
        return np.ones(azimuths.size, dtype=bool)
    inside = sector.contains(azimuths)
    # same first-occurrence dedup of wrapped angles as sector_slice
    wrapped = np.round(azimuths % 360.0, 9) % 360.0
    seen = set()
    keep = np.zeros(azimuths.size, dtype=bool)
    for i in np.flatnonzero(inside):
        if wrapped[i] not in seen:
            seen.add(wrapped[i])
            keep[i] = True
    if not keep.any():
        raise ValidationError(f"sector {sector.center}:{sector.width} selects no azimuths")
    return keep


def _run_block(db, gen, snr_db, trials, n, sector, rng) -> np.ndarray:
    clean, az = _clean_batch(gen, trials, n, rng)
    noisy = _add_noise(clean, snr_db, rng)
    noisy = noisy[:, _sector_mask(az, sector)]
    ll = log_likelihood_matrix(db, noisy)
    # argmax returns the first maximum; db columns are sorted by name
    decisions = np.argmax(ll, axis=1)
    return np.bincount(decisions, minlength=len(db.classes))


def run_snr_sweep(
    db: ModelDatabase,
    generators: Mapping[str, Generator],
    snr_grid: Sequence[float],
    trials: int,
    samples_per_trial: int = DEFAULT_SAMPLES_PER_TRIAL,
    sector: Optional[SectorSpec] = None,
    seed: int = 0,
    workers: int = 1,
) -> SnrSweepResult:
    """Classify noisy test signatures from every generator at every SNR.

    Args:
        db: class models used by the MAP rule
        generators: true class -> model to sample from, or a signature to replay
        snr_grid: SNR values in dB (``inf`` allowed for noiseless runs)
        trials: test signatures per (SNR, class)
        samples_per_trial: azimuth samples per drawn signature (0..360 inclusive)
        sector: keep only this azimuth sector before classifying
        seed: root seed
        workers: thread count; the result does not depend on it

    Returns:
        Counts of decisions per SNR and true class.
    """
    grid = tuple(float(s) for s in snr_grid)
    if not grid or any(math.isnan(s) or s == -math.inf for s in grid):
        raise ValidationError("SNR grid must be a non-empty list of numbers")
    if len(set(grid)) != len(grid):
        raise ValidationError("SNR grid has duplicate values")
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    if samples_per_trial < 1:
        raise ValidationError("samples per trial must be >= 1")
    if not generators:
        raise ValidationError("no generators given")
    names = tuple(sorted(generators))
    jobs = [(s, c) for s in range(len(grid)) for c in range(len(names))]

    def job(sc):
        s, c = sc
        rng = _block_rng(seed, s, c)
        return _run_block(db, generators[names[c]], grid[s], trials, samples_per_trial, sector, rng)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(job, jobs))
    else:
        blocks = [job(j) for j in jobs]
    counts = np.zeros((len(grid), len(names), len(db.classes)), dtype=np.int64)
    for (s, c), b in zip(jobs, blocks):
        counts[s, c] = b
    return SnrSweepResult(grid, names, db.names, counts, trials, seed, sector)


@dataclass(frozen=True)
class HeldOutReport:
    held_out_class: str
    assignment_histogram: Dict[str, float]
    snr_db: float

    @property
    def modal_class(self) -> str:
        best = max(self.assignment_histogram.values())
        return min(k for k, v in self.assignment_histogram.items() if v == best)


def held_out_experiment(
    training: Union[ModelDatabase, Mapping[str, object]],
    held_out_class: str,
    snr_grid: Sequence[float],
    trials: int,
    seed: int = 0,
    samples_per_trial: int = DEFAULT_SAMPLES_PER_TRIAL,
    criterion="AIC",
    workers: int = 1,
) -> List[HeldOutReport]:
    """Classify a class the database was not trained on.

    Args:
        training: a complete database, or class name -> training samples
        held_out_class: class left out of the database; its own model
            generates the test signatures

    Returns:
        One assignment histogram per SNR.
    """
    if isinstance(training, ModelDatabase):
        full = training
    else:
        full, _ = build_database(training, criterion)
    if held_out_class not in full.classes:
        raise ValidationError(
            f"held-out class {held_out_class!r} is not among {list(full.classes)}"
        )
    db = full.without(held_out_class)
    res = run_snr_sweep(
        db, {held_out_class: full.classes[held_out_class]}, snr_grid, trials,
        samples_per_trial, None, seed, workers,
    )
    reports = []
    for s, snr in enumerate(res.snr_grid):
        row = res.counts[s, 0] / trials
        reports.append(HeldOutReport(held_out_class, dict(zip(res.pred_classes, map(float, row))), snr))
    return reports


# ---------------------------------------------------------------------------
# reports


def _fmt(x: float) -> str:
    return repr(float(x))


def sweep_counts_csv(result: SnrSweepResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["snr_db", "class_true", "class_pred", "count"])
    for s, snr in enumerate(result.snr_grid):
        for i, t in enumerate(result.true_classes):
            for j, p in enumerate(result.pred_classes):
                w.writerow([_fmt(snr), t, p, int(result.counts[s, i, j])])
    return buf.getvalue()


def accuracy_csv(result: SnrSweepResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["snr_db", "accuracy"])
    for snr, acc in zip(result.snr_grid, result.accuracy):
        w.writerow([_fmt(snr), _fmt(acc)])
    return buf.getvalue()


def held_out_csv(reports: Sequence[HeldOutReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["snr_db", "held_out_class", "assigned_class", "fraction"])
    for r in reports:
        for name, frac in r.assignment_histogram.items():
            w.writerow([_fmt(r.snr_db), r.held_out_class, name, _fmt(frac)])
    return buf.getvalue()


def accuracy_svg(result: SnrSweepResult, width: int = 480, height: int = 320) -> str:
    """Accuracy-vs-SNR line plot; each point is also written as an XML comment."""
    snr = np.array([s for s in result.snr_grid if math.isfinite(s)])
    acc = np.array([a for s, a in zip(result.snr_grid, result.accuracy) if math.isfinite(s)])
    pad = 40
    lo, hi = (snr.min(), snr.max()) if snr.size else (0.0, 1.0)
    span = hi - lo if hi > lo else 1.0

    def px(s, a):
        return pad + (s - lo) / span * (width - 2 * pad), height - pad - a * (height - 2 * pad)

    pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in (px(s, a) for s, a in zip(snr, acc)))
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f"<!-- trials={result.trials} seed={result.seed} -->",
    ]
    lines += [f"<!-- data snr_db={_fmt(s)} accuracy={_fmt(a)} -->" for s, a in zip(result.snr_grid, result.accuracy)]
    lines += [
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
        f'<text x="{width / 2:.0f}" y="{height - 8}" text-anchor="middle" font-size="12">SNR (dB)</text>',
        f'<text x="12" y="{height / 2:.0f}" font-size="12" transform="rotate(-90 12 {height / 2:.0f})">accuracy</text>',
        f'<polyline points="{pts}" fill="none" stroke="steelblue" stroke-width="2"/>',
    ]
    lines += [f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3" fill="steelblue"/>' for x, y in (px(s, a) for s, a in zip(snr, acc))]
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
