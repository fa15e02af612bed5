"""Published per-UAV RCS statistics (mean and std of the dBsm samples).

Keyed by ``(polarization, frequency_ghz)``. Each entry maps the UAV name to
``(mean_dbsm, std_dbsm)`` over the full 0..360 degree azimuth sweep.
"""

from __future__ import annotations

from typing import Dict, Tuple

from .distributions import Family, FittedModel, lognormal_from_db_stats
from .signature import Polarization

UAV_NAMES = (
    "DJI Matrice 600",
    "DJI Matrice 100",
    "Trimble zx5",
    "DJI Mavic Pro",
    "DJI Inspire 1",
    "DJI Phantom 4 Pro",
)

MEASURED_STATS: Dict[Tuple[str, int], Dict[str, Tuple[float, float]]] = {
    ("VV", 15): dict(zip(UAV_NAMES, [
        (-11.67, 1.81), (-14.69, 1.69), (-14.39, 2.57),
        (-17.06, 1.51), (-14.24, 1.56), (-15.02, 1.21),
    ])),
    ("VV", 25): dict(zip(UAV_NAMES, [
        (-7.32, 2.09), (-11.03, 2.27), (-9.64, 2.80),
        (-16.20, 2.30), (-11.09, 2.62), (-12.40, 1.93),
    ])),
    ("HH", 15): dict(zip(UAV_NAMES, [
        (-12.71, 2.33), (-14.73, 2.25), (-14.06, 2.61),
        (-17.29, 1.89), (-14.43, 2.08), (-14.87, 1.78),
    ])),
    ("HH", 25): dict(zip(UAV_NAMES, [
        (-7.07, 2.25), (-9.72, 1.83), (-9.69, 2.83),
        (-17.22, 2.68), (-12.05, 3.42), (-12.24, 1.69),
    ])),
}


def lognormal_class_models(polarization="HH", frequency_ghz: int = 15) -> Dict[str, FittedModel]:
    """One lognormal model per UAV, parameterized from the dBsm mean/std."""
    pol = Polarization.parse(polarization).value
    try:
        table = MEASURED_STATS[(pol, int(frequency_ghz))]
    except KeyError:
        raise KeyError(f"no statistics for {pol} at {frequency_ghz} GHz") from None
    return {
        name: FittedModel.from_params(Family.LOGNORMAL, lognormal_from_db_stats(m, s))
        for name, (m, s) in table.items()
    }
