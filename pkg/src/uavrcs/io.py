"""CSV readers and writers for signatures and sweeps.

Readers report problems as ``path:line: message`` inside a ``ValidationError``.
Floats are written with ``repr`` so a write/read cycle is lossless.
"""

from __future__ import annotations

import csv
import hashlib
import io
import os
from typing import Dict, List, Tuple

import numpy as np

from .errors import ValidationError
from .montecarlo import SnrSweepResult
from .signature import FrequencySweep, Polarization, RcsSignature

SIGNATURE_HEADER = ("azimuth_deg", "rcs_m2")
SWEEP_HEADER = ("freq_hz", "azimuth_deg", "polarization", "s21_real", "s21_imag")


def _rows(path: str, header: Tuple[str, ...]) -> List[Tuple[int, List[str]]]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                first = next(reader)
            except StopIteration:
                raise ValidationError(f"{path}:1: file is empty") from None
            if tuple(c.strip() for c in first) != header:
                raise ValidationError(f"{path}:1: expected header {','.join(header)}, got {','.join(first)}")
            out = []
            for row in reader:
                if not row or all(not c.strip() for c in row):
                    continue
                if len(row) != len(header):
                    raise ValidationError(
                        f"{path}:{reader.line_num}: expected {len(header)} fields, got {len(row)}"
                    )
                out.append((reader.line_num, row))
            return out
    except OSError as exc:
        raise ValidationError(f"{path}: cannot read ({exc.strerror})") from exc


def _float(path: str, line: int, text: str, what: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise ValidationError(f"{path}:{line}: {what} {text!r} is not a number") from None
    if not np.isfinite(v):
        raise ValidationError(f"{path}:{line}: {what} must be finite")
    return v


def read_signature(path: str, label: str = "", frequency: float = 0.0, polarization="VV") -> RcsSignature:
    rows = _rows(path, SIGNATURE_HEADER)
    if not rows:
        raise ValidationError(f"{path}: no data rows")
    az, rcs = [], []
    for line, (a, r) in rows:
        az.append(_float(path, line, a, "azimuth_deg"))
        v = _float(path, line, r, "rcs_m2")
        if not v > 0:
            raise ValidationError(f"{path}:{line}: rcs_m2 must be positive, got {r}")
        rcs.append(v)
    if label == "":
        label = os.path.splitext(os.path.basename(path))[0]
    return RcsSignature(az, rcs, frequency, polarization, label)


def signature_csv(sig: RcsSignature) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SIGNATURE_HEADER)
    for a, r in zip(sig.azimuths, sig.rcs_linear):
        w.writerow([repr(float(a)), repr(float(r))])
    return buf.getvalue()


def read_sweep(path: str) -> FrequencySweep:
    """Read a sweep; rows must cover the full (frequency, azimuth) grid, sorted."""
    rows = _rows(path, SWEEP_HEADER)
    if not rows:
        raise ValidationError(f"{path}: no data rows")
    freqs: List[float] = []
    azs: List[float] = []
    pol = None
    values: Dict[Tuple[float, float], complex] = {}
    prev = None
    for line, (f, a, p, re, im) in rows:
        fv = _float(path, line, f, "freq_hz")
        av = _float(path, line, a, "azimuth_deg")
        try:
            pv = Polarization.parse(p)
        except ValidationError as exc:
            raise ValidationError(f"{path}:{line}: {exc}") from None
        if pol is None:
            pol = pv
        elif pv is not pol:
            raise ValidationError(f"{path}:{line}: mixed polarizations ({pol.value} and {pv.value})")
        key = (fv, av)
        if prev is not None and key <= prev:
            raise ValidationError(f"{path}:{line}: rows must be sorted by (freq_hz, azimuth_deg) without repeats")
        prev = key
        values[key] = complex(_float(path, line, re, "s21_real"), _float(path, line, im, "s21_imag"))
        if not freqs or freqs[-1] != fv:
            freqs.append(fv)
        if av not in azs:
            azs.append(av)
    azs.sort()
    grid = np.empty((len(freqs), len(azs)), dtype=complex)
    for i, f in enumerate(freqs):
        for j, a in enumerate(azs):
            try:
                grid[i, j] = values[(f, a)]
            except KeyError:
                raise ValidationError(f"{path}: missing row for freq_hz={f!r} azimuth_deg={a!r}") from None
    try:
        return FrequencySweep(freqs, azs, pol, grid)
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from None


def sweep_csv(sweep: FrequencySweep) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    pol = sweep.polarization.value
    for i, f in enumerate(sweep.frequencies):
        for j, a in enumerate(sweep.azimuths):
            v = sweep.s21[i, j]
            w.writerow([repr(float(f)), repr(float(a)), pol, repr(float(v.real)), repr(float(v.imag))])
    return buf.getvalue()


def read_sweep_counts(path: str) -> SnrSweepResult:
    """Rebuild a sweep result from its ``snr_db,class_true,class_pred,count`` CSV."""
    rows = _rows(path, ("snr_db", "class_true", "class_pred", "count"))
    snrs: List[float] = []
    trues: List[str] = []
    preds: List[str] = []
    cells = {}
    for line, (s, t, p, c) in rows:
        sv = _float(path, line, s, "snr_db") if s.strip() not in ("inf", "+inf") else float("inf")
        try:
            cv = int(c)
        except ValueError:
            raise ValidationError(f"{path}:{line}: count {c!r} is not an integer") from None
        for lst, v in ((snrs, sv), (trues, t), (preds, p)):
            if v not in lst:
                lst.append(v)
        cells[(sv, t, p)] = cv
    counts = np.zeros((len(snrs), len(trues), len(preds)), dtype=np.int64)
    for (s, t, p), c in cells.items():
        counts[snrs.index(s), trues.index(t), preds.index(p)] = c
    trials = int(counts[0, 0].sum()) if counts.size else 0
    return SnrSweepResult(tuple(snrs), tuple(trues), tuple(preds), counts, trials, -1)


def write_text(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def file_digest(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()
