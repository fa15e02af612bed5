"""``uavrcs`` command-line interface.

Exit codes: 0 success, 2 validation or usage error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from .config import load_config, make_manifest
from .distributions import Family, fit_mle
from .dsp import Calibration, ClutterSpec, GateSpec, default_frequencies, process_sweep, synthesize_sphere, synthesize_sweep
from .errors import DomainError, EmptyTargetZoneError, FitError, ValidationError
from .io import file_digest, read_signature, read_sweep, signature_csv, sweep_csv, write_text
from .mie import ChamberGeometry, Sphere, sphere_rcs_approx, sphere_rcs_exact, scatter_region, wavelength
from .montecarlo import accuracy_csv, accuracy_svg, held_out_csv, held_out_experiment, run_snr_sweep, sweep_counts_csv
from .recognition import ModelDatabase, build_database, classify_map, classify_sector, rank_models, ranking_csv
from .signature import FrequencySweep, Polarization, RcsSignature, SectorSpec, full_azimuth_grid, to_dbsm
from .uav_stats import lognormal_class_models

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3

# fallbacks applied after the config file, so a config can override them
DEFAULTS: Dict[str, Dict[str, object]] = {
    "synth": {
        "mean_db": -14.0, "std_db": 2.0, "center_freq": 15e9, "span": 1e9, "points": 201,
        "azimuth_step": 2.0, "sphere_radius": 0.1524, "noise_floor": -80.0, "target_delay": 40e-9,
        "clutter_delay": 80e-9, "clutter_amplitude": 1e-4, "focal_length": 2.5,
        "outside_distance": 6.0, "gain_db": 20.0, "polarization": "VV", "seed": 0,
    },
    "process": {"taper": 0.5, "pad": 4, "sphere_radius": 0.1524, "label": ""},
    "fit": {},
    "rank": {},
    "build-db": {"criterion": "AIC", "frequency": 0.0, "polarization": "VV"},
    "classify": {},
    "simulate": {
        "snr": "0:14:2", "trials": 500, "samples": 181, "seed": 0, "workers": 1, "criterion": "AIC",
    },
}


class UsageError(Exception):
    pass


def _parse_snr(value) -> List[float]:
    """``"0:14:2"`` (inclusive range), ``"0,5,10"`` or a JSON list."""
    if isinstance(value, list):
        return [float(v) for v in value]
    text = str(value).strip()
    try:
        if ":" in text:
            lo, hi, step = (float(p) for p in text.split(":"))
            if step <= 0:
                raise ValueError
            n = int(math.floor((hi - lo) / step + 1e-9)) + 1
            return [lo + i * step for i in range(n)]
        return [float(p) for p in text.split(",")]
    except ValueError:
        raise ValidationError(f"bad SNR grid {value!r}; use LO:HI:STEP or a comma list") from None


def _named_inputs(items: Sequence[str]) -> Dict[str, str]:
    """``NAME=PATH`` pairs, or bare paths named by their file stem."""
    out: Dict[str, str] = {}
    for item in items:
        name, sep, path = item.partition("=")
        if not sep:
            path, name = item, os.path.splitext(os.path.basename(item))[0]
        if name in out:
            raise ValidationError(f"duplicate class name {name!r}")
        out[name] = path
    return out


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        write_text(out, text)
    else:
        sys.stdout.write(text)


def _manifest(args, config: dict, inputs: Sequence[str], outputs: Sequence[str], seed=None) -> None:
    """Write ``<first output>.manifest.json`` when output goes to files."""
    outputs = [o for o in outputs if o]
    if not outputs:
        return
    digests = {p: file_digest(p) for p in inputs if p and os.path.isfile(p)}
    m = make_manifest(args.command, __version__, config, digests, outputs, seed).finish()
    write_text(outputs[0] + ".manifest.json", m.to_json())


# ---------------------------------------------------------------------------
# subcommands


def cmd_mie(args, cfg) -> int:
    sphere = Sphere(args.radius)
    lam = wavelength(args.freq)
    if args.approx:
        sigma, region = sphere_rcs_approx(sphere, lam)
    else:
        sigma, region = sphere_rcs_exact(sphere, lam), scatter_region(sphere, lam)
    sys.stdout.write(f"{sigma!r},{to_dbsm(sigma)!r},{region.value}\n")
    return EXIT_OK


def cmd_synth(args, cfg) -> int:
    freqs = default_frequencies(cfg["center_freq"], cfg["span"], cfg["points"])
    az = full_azimuth_grid(cfg["azimuth_step"])
    rng = np.random.Generator(np.random.PCG64(cfg["seed"]))
    rcs = 10.0 ** ((cfg["mean_db"] + cfg["std_db"] * rng.standard_normal(az.size)) / 10.0)
    pol = Polarization.parse(cfg["polarization"])
    truth = RcsSignature(az, rcs, float(np.mean(freqs)), pol, "truth")
    g = 10.0 ** (cfg["gain_db"] / 10.0)
    geom = ChamberGeometry(cfg["focal_length"], cfg["outside_distance"], g, g)
    bg = 1e-3 * np.exp(-2j * np.pi * freqs * 5e-9)
    clutter = ClutterSpec(((cfg["clutter_delay"], cfg["clutter_amplitude"]),), bg)
    seeds = np.random.SeedSequence(cfg["seed"]).generate_state(3)
    kw = dict(frequencies=freqs, target_delay=cfg["target_delay"])
    sweep = synthesize_sweep(truth, clutter, geom, cfg["noise_floor"], seed=int(seeds[0]), **kw)
    empty = synthesize_sweep(truth, clutter, geom, cfg["noise_floor"], include_target=False, seed=int(seeds[1]), **kw)
    sphere_s21 = synthesize_sphere(Sphere(cfg["sphere_radius"]), clutter, geom, cfg["noise_floor"], seed=int(seeds[2]), **kw)
    sphere_sweep = FrequencySweep(freqs, [0.0], pol, sphere_s21)
    out = args.out_dir
    files = {
        "sweep.csv": sweep_csv(sweep),
        "background.csv": sweep_csv(empty),
        "sphere.csv": sweep_csv(sphere_sweep),
        "truth.csv": signature_csv(truth),
    }
    paths = []
    for name, text in files.items():
        p = os.path.join(out, name)
        write_text(p, text)
        paths.append(p)
    _manifest(args, cfg, [], paths, cfg["seed"])
    return EXIT_OK


def cmd_process(args, cfg) -> int:
    for key in ("gate_start", "gate_stop"):
        if cfg.get(key) is None:
            raise UsageError(f"--{key.replace('_', '-')} is required (flag or config)")
    sweep = read_sweep(args.sweep)
    background = read_sweep(args.background)
    sphere_sweep = read_sweep(args.sphere)
    if sphere_sweep.s21.shape[0] != sweep.frequencies.size:
        raise ValidationError(f"{args.sphere}: frequency axis differs from {args.sweep}")
    gate = GateSpec(float(cfg["gate_start"]), float(cfg["gate_stop"]), float(cfg["taper"]))
    cal = Calibration(sphere_sweep.s21[:, 0], Sphere(float(cfg["sphere_radius"])))
    sig = process_sweep(
        sweep, background, gate, cal, zero_pad_factor=int(cfg["pad"]),
        center_frequency=cfg.get("center_freq"), label=str(cfg["label"]),
    )
    _emit(signature_csv(sig), args.out)
    _manifest(args, cfg, [args.sweep, args.background, args.sphere], [args.out])
    return EXIT_OK


def cmd_fit(args, cfg) -> int:
    if not cfg.get("family"):
        raise UsageError("--family is required (flag or config)")
    sig = read_signature(args.input)
    model = fit_mle(Family.parse(cfg["family"]), sig.rcs_linear)
    _emit(json.dumps(model.to_dict(), indent=2, sort_keys=True) + "\n", args.out)
    _manifest(args, cfg, [args.input], [args.out])
    return EXIT_OK


def _read_classes(items: Sequence[str]) -> Dict[str, RcsSignature]:
    return {name: read_signature(path, label=name) for name, path in _named_inputs(items).items()}


def cmd_rank(args, cfg) -> int:
    sigs = _read_classes(args.input)
    fams = cfg.get("families")
    rankings = {name: rank_models(s.rcs_linear, fams) for name, s in sigs.items()}
    for name, r in rankings.items():
        for fam, reason in r.skipped.items():
            sys.stderr.write(f"warning: {name}: {fam.value} skipped: {reason}\n")
    _emit(ranking_csv(rankings), args.out)
    _manifest(args, cfg, list(_named_inputs(args.input).values()), [args.out])
    return EXIT_OK


def cmd_build_db(args, cfg) -> int:
    sigs = _read_classes(args.input)
    db, rankings = build_database(
        {k: s.rcs_linear for k, s in sigs.items()}, cfg["criterion"], float(cfg["frequency"]),
        cfg["polarization"], cfg.get("families"),
    )
    _emit(db.to_json(), args.out)
    if args.ranking_out:
        write_text(args.ranking_out, ranking_csv(rankings))
    _manifest(args, cfg, list(_named_inputs(args.input).values()), [args.out, args.ranking_out])
    return EXIT_OK


def _load_db(path: str) -> ModelDatabase:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ValidationError(f"{path}: cannot read ({exc.strerror})") from exc
    try:
        return ModelDatabase.from_json(text)
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from None


def cmd_classify(args, cfg) -> int:
    db = _load_db(args.db)
    sector = SectorSpec.parse(cfg["sector"]) if cfg.get("sector") else None
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["input", "decision"] + list(db.names))
    paths = _named_inputs(args.input)
    for name, path in paths.items():
        sig = read_signature(path, label=name)
        res = classify_map(db, sig.rcs_linear) if sector is None else classify_sector(db, sig, sector)
        w.writerow([name, res.decision] + [repr(res.log_likelihoods[c]) for c in db.names])
    _emit(buf.getvalue(), args.out)
    _manifest(args, cfg, [args.db] + list(paths.values()), [args.out])
    return EXIT_OK


def _parse_table(text: str):
    pol, _, ghz = text.partition(":")
    try:
        return lognormal_class_models(pol, int(float(ghz)))
    except (KeyError, ValueError, ValidationError):
        raise ValidationError(f"unknown statistics table {text!r}; use e.g. HH:15 or VV:25") from None


def cmd_simulate(args, cfg) -> int:
    if bool(args.db) == bool(cfg.get("table")):
        raise UsageError("give exactly one of --db or --table")
    if args.db:
        db = _load_db(args.db)
    else:
        models = _parse_table(str(cfg["table"]))
        pol = str(cfg["table"]).partition(":")[0]
        db = ModelDatabase(models, cfg["criterion"], float(str(cfg["table"]).partition(":")[2]) * 1e9, pol)
    grid = _parse_snr(cfg["snr"])
    trials, samples, seed, workers = int(cfg["trials"]), int(cfg["samples"]), int(cfg["seed"]), int(cfg["workers"])
    out = args.out_dir
    written = []
    if cfg.get("hold_out"):
        reports = held_out_experiment(db, str(cfg["hold_out"]), grid, trials, seed, samples, workers=workers)
        text = held_out_csv(reports)
        if out:
            p = os.path.join(out, "held_out.csv")
            write_text(p, text)
            written.append(p)
        else:
            sys.stdout.write(text)
    else:
        sector = SectorSpec.parse(cfg["sector"]) if cfg.get("sector") else None
        res = run_snr_sweep(db, db.classes, grid, trials, samples, sector, seed, workers)
        if out:
            for name, text in (
                ("accuracy.csv", accuracy_csv(res)),
                ("counts.csv", sweep_counts_csv(res)),
                ("accuracy.svg", accuracy_svg(res)),
            ):
                p = os.path.join(out, name)
                write_text(p, text)
                written.append(p)
        else:
            sys.stdout.write(accuracy_csv(res))
    _manifest(args, cfg, [args.db] if args.db else [], written, seed)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="uavrcs", description="UAV RCS calibration, modeling and recognition")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("mie", help="PEC sphere RCS")
    s.add_argument("--radius", type=float, required=True, help="sphere radius (m)")
    s.add_argument("--freq", type=float, required=True, help="frequency (Hz)")
    mode = s.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true", help="Mie series (default)")
    mode.add_argument("--approx", action="store_true", help="region approximation")

    s = sub.add_parser("synth", help="write a synthetic chamber fixture")
    s.add_argument("--out-dir", required=True)
    for key in ("mean_db", "std_db", "center_freq", "span", "azimuth_step", "sphere_radius", "noise_floor",
                "target_delay", "clutter_delay", "clutter_amplitude", "focal_length", "outside_distance", "gain_db"):
        s.add_argument("--" + key.replace("_", "-"), dest=key, type=float)
    s.add_argument("--points", type=int)
    s.add_argument("--polarization")
    s.add_argument("--seed", type=int)

    s = sub.add_parser("process", help="raw sweep CSV -> calibrated signature CSV")
    s.add_argument("--sweep", required=True)
    s.add_argument("--background", required=True)
    s.add_argument("--sphere", required=True, help="sweep CSV of the calibration sphere (one azimuth)")
    s.add_argument("--gate-start", dest="gate_start", type=float)
    s.add_argument("--gate-stop", dest="gate_stop", type=float)
    s.add_argument("--taper", type=float)
    s.add_argument("--pad", type=int)
    s.add_argument("--sphere-radius", dest="sphere_radius", type=float)
    s.add_argument("--center-freq", dest="center_freq", type=float)
    s.add_argument("--label")
    s.add_argument("--out")

    s = sub.add_parser("fit", help="fit one family to a signature")
    s.add_argument("--input", required=True)
    s.add_argument("--family")
    s.add_argument("--out")

    s = sub.add_parser("rank", help="AIC/BIC ranking of all families per class")
    s.add_argument("--input", nargs="+", required=True, metavar="[NAME=]PATH")
    s.add_argument("--families", nargs="+")
    s.add_argument("--out")

    s = sub.add_parser("build-db", help="per-class best models -> database JSON")
    s.add_argument("--input", nargs="+", required=True, metavar="[NAME=]PATH")
    s.add_argument("--criterion", type=str.upper, choices=["AIC", "BIC"])
    s.add_argument("--families", nargs="+")
    s.add_argument("--frequency", type=float)
    s.add_argument("--polarization")
    s.add_argument("--out")
    s.add_argument("--ranking-out", dest="ranking_out")

    s = sub.add_parser("classify", help="MAP decision for test signatures")
    s.add_argument("--db", required=True)
    s.add_argument("--input", nargs="+", required=True, metavar="[NAME=]PATH")
    s.add_argument("--sector", help="CENTER:WIDTH in degrees")
    s.add_argument("--out")

    s = sub.add_parser("simulate", help="Monte Carlo accuracy vs SNR")
    s.add_argument("--db")
    s.add_argument("--table", help="built-in lognormal classes, e.g. HH:15")
    s.add_argument("--criterion", type=str.upper, choices=["AIC", "BIC"])
    s.add_argument("--snr", help="LO:HI:STEP or comma list (dB)")
    s.add_argument("--trials", type=int)
    s.add_argument("--samples", type=int)
    s.add_argument("--sector", help="CENTER:WIDTH in degrees")
    s.add_argument("--hold-out", dest="hold_out")
    s.add_argument("--seed", type=int)
    s.add_argument("--workers", type=int)
    s.add_argument("--out-dir", dest="out_dir")

    for name, sp in sub.choices.items():
        if name != "mie":
            sp.add_argument("--config", help="JSON file of option defaults")
    return p


COMMANDS = {
    "mie": cmd_mie, "synth": cmd_synth, "process": cmd_process, "fit": cmd_fit, "rank": cmd_rank,
    "build-db": cmd_build_db, "classify": cmd_classify, "simulate": cmd_simulate,
}

# options that live in the merged config rather than as plain attributes
_CONFIG_KEYS = {cmd: set(DEFAULTS.get(cmd, {})) for cmd in COMMANDS}
_CONFIG_KEYS["process"] |= {"gate_start", "gate_stop", "center_freq"}
_CONFIG_KEYS["fit"] |= {"family"}
_CONFIG_KEYS["rank"] |= {"families"}
_CONFIG_KEYS["build-db"] |= {"families"}
_CONFIG_KEYS["classify"] |= {"sector"}
_CONFIG_KEYS["simulate"] |= {"sector", "hold_out", "table"}


def _merged_config(args) -> dict:
    """Flags override the config file, which overrides built-in defaults."""
    cmd = args.command
    cfg = dict(DEFAULTS.get(cmd, {}))
    if getattr(args, "config", None):
        cfg.update(load_config(args.config, cmd))
    for key in _CONFIG_KEYS.get(cmd, ()):
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    return cfg


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        cfg = _merged_config(args) if args.command != "mie" else {}
        return COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"uavrcs {args.command}: error: {exc}\n")
        return EXIT_USAGE
    except (ValidationError, DomainError) as exc:
        sys.stderr.write(f"uavrcs {args.command}: error: {exc}\n")
        return EXIT_USAGE
    except (FitError, EmptyTargetZoneError, FloatingPointError) as exc:
        sys.stderr.write(f"uavrcs {args.command}: numerical failure: {exc}\n")
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
