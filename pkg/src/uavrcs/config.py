"""Run configuration files and reproducibility manifests.

A configuration file is a JSON object of option defaults for one
subcommand, e.g. ``{"gate_start": 3.5e-8, "gate_stop": 4.5e-8, "taper": 0.5}``
for ``process``. Keys use the long option names with ``_`` for ``-``.
Unknown keys and wrongly typed values are rejected before anything runs.
"""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
from dataclasses import asdict, dataclass, field
from typing import Dict, Mapping, Optional, Sequence, Tuple

from .errors import ValidationError

MANIFEST_SCHEMA = "uavrcs.manifest/1"

_NUM = (int, float)

# allowed keys and accepted JSON types per subcommand
CONFIG_SCHEMA: Dict[str, Dict[str, tuple]] = {
    "mie": {"radius": _NUM, "freq": _NUM, "mode": (str,)},
    "synth": {
        "mean_db": _NUM, "std_db": _NUM, "center_freq": _NUM, "span": _NUM, "points": (int,),
        "azimuth_step": _NUM, "sphere_radius": _NUM, "noise_floor": _NUM, "target_delay": _NUM,
        "clutter_delay": _NUM, "clutter_amplitude": _NUM, "focal_length": _NUM,
        "outside_distance": _NUM, "gain_db": _NUM, "polarization": (str,), "seed": (int,),
    },
    "process": {
        "gate_start": _NUM, "gate_stop": _NUM, "taper": _NUM, "pad": (int,),
        "sphere_radius": _NUM, "center_freq": _NUM, "label": (str,),
    },
    "fit": {"family": (str,)},
    "rank": {"families": (list,)},
    "build-db": {"criterion": (str,), "families": (list,), "frequency": _NUM, "polarization": (str,)},
    "classify": {"sector": (str,)},
    "simulate": {
        "snr": (str, list), "trials": (int,), "samples": (int,), "sector": (str,),
        "hold_out": (str,), "seed": (int,), "workers": (int,), "table": (str,),
        "criterion": (str,),
    },
}


def validate_config(command: str, data: Mapping) -> Dict[str, object]:
    if command not in CONFIG_SCHEMA:
        raise ValidationError(f"no configuration schema for command {command!r}")
    if not isinstance(data, Mapping):
        raise ValidationError("configuration must be a JSON object")
    schema = CONFIG_SCHEMA[command]
    out = {}
    for key, value in data.items():
        if key not in schema:
            raise ValidationError(
                f"unknown configuration key {key!r} for {command}; allowed: {', '.join(sorted(schema))}"
            )
        types = schema[key]
        # bool is an int subclass in Python; never accept it for numbers
        if isinstance(value, bool) or not isinstance(value, types):
            raise ValidationError(f"configuration key {key!r} has the wrong type ({type(value).__name__})")
        out[key] = value
    return out


def load_config(path: str, command: str) -> Dict[str, object]:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ValidationError(f"{path}: cannot read ({exc.strerror})") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})") from exc
    try:
        return validate_config(command, data)
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from None


def config_digest(config: Mapping) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


@dataclass
class RunManifest:
    command: str
    version: str
    config_sha256: str
    inputs: Dict[str, str]
    outputs: Tuple[str, ...]
    seed: Optional[int]
    started_utc: str = field(default_factory=_now)
    finished_utc: str = ""

    def finish(self) -> "RunManifest":
        self.finished_utc = _now()
        return self

    def to_json(self) -> str:
        d = asdict(self)
        d["outputs"] = list(self.outputs)
        d["schema"] = MANIFEST_SCHEMA
        return json.dumps(d, indent=2, sort_keys=True) + "\n"


def make_manifest(
    command: str,
    version: str,
    config: Mapping,
    input_digests: Mapping[str, str],
    outputs: Sequence[str],
    seed: Optional[int],
) -> RunManifest:
    return RunManifest(command, version, config_digest(config), dict(input_digests), tuple(outputs), seed)
