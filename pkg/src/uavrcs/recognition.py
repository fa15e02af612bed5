"""Information-criterion model ranking, class databases and the MAP classifier."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .distributions import ALL_FAMILIES, Family, FittedModel, fit_mle, logpdf
from .errors import FitError, ValidationError
from .signature import Polarization, RcsSignature, SectorSpec, sector_slice

# Per-sample log-density floor, so out-of-support samples stay comparable.
LOGPDF_FLOOR = -700.0
DB_SCHEMA = "uavrcs.model-database/1"
RANKING_HEADER = ("class", "family", "aic", "bic", "rank_aic", "rank_bic", "loglik", "k")


class Criterion(Enum):
    AIC = "AIC"
    BIC = "BIC"

    @classmethod
    def parse(cls, value: "str | Criterion") -> "Criterion":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().upper())
        except ValueError:
            raise ValidationError(f"unknown criterion {value!r}; expected AIC or BIC") from None


def aic(loglik: float, k: int) -> float:
    return -2.0 * loglik + 2.0 * k


def bic(loglik: float, k: int, n: int) -> float:
    if n < 1:
        raise ValidationError("BIC needs n >= 1")
    return -2.0 * loglik + k * math.log(n)


@dataclass(frozen=True)
class CriterionScore:
    family: Family
    aic: float
    bic: float
    rank_aic: int
    rank_bic: int
    model: FittedModel

    @property
    def loglik(self) -> float:
        return self.model.loglik

    @property
    def k(self) -> int:
        return self.model.k


@dataclass(frozen=True)
class Ranking:
    """Scores for the families that fitted, plus the reason each other one did not."""

    scores: Tuple[CriterionScore, ...]
    skipped: Dict[Family, str] = field(default_factory=dict)

    def __iter__(self):
        return iter(self.scores)

    def __len__(self) -> int:
        return len(self.scores)

    def best(self, criterion: Criterion = Criterion.AIC) -> CriterionScore:
        key = "rank_aic" if Criterion.parse(criterion) is Criterion.AIC else "rank_bic"
        return next(s for s in self.scores if getattr(s, key) == 1)

    def by_family(self, family) -> CriterionScore:
        fam = Family.parse(family)
        for s in self.scores:
            if s.family is fam:
                return s
        raise KeyError(fam.value)


def _ranks(values: Sequence[float], order: Sequence[int]) -> List[int]:
    # ties resolved by family declaration order so ranks are a permutation
    idx = sorted(range(len(values)), key=lambda i: (values[i], order[i]))
    ranks = [0] * len(values)
    for r, i in enumerate(idx, start=1):
        ranks[i] = r
    return ranks


def rank_models(samples, families: Optional[Iterable] = None) -> Ranking:
    """Fit each family and rank by AIC and BIC (rank 1 is the smallest score).

    Families whose fit raises are left out of the ranking and listed in
    ``Ranking.skipped`` with the error message.

    Raises:
        FitError: no family could be fitted.
    """
    fams = ALL_FAMILIES if families is None else tuple(Family.parse(f) for f in families)
    # de-duplicate, keep declaration order for deterministic output
    fams = tuple(f for f in ALL_FAMILIES if f in set(fams))
    x = np.asarray(samples, dtype=float)
    models: List[FittedModel] = []
    skipped: Dict[Family, str] = {}
    for fam in fams:
        try:
            models.append(fit_mle(fam, x))
        except (FitError, ValueError) as exc:
            skipped[fam] = str(exc)
    if not models:
        detail = "; ".join(f"{f.value}: {m}" for f, m in skipped.items())
        raise FitError(f"no family could be fitted ({detail})")
    a = [aic(m.loglik, m.k) for m in models]
    b = [bic(m.loglik, m.k, m.n) for m in models]
    order = [ALL_FAMILIES.index(m.family) for m in models]
    ra, rb = _ranks(a, order), _ranks(b, order)
    scores = tuple(
        CriterionScore(m.family, a[i], b[i], ra[i], rb[i], m) for i, m in enumerate(models)
    )
    return Ranking(scores, skipped)


def ranking_rows(class_name: str, ranking: Ranking) -> List[list]:
    return [
        [class_name, s.family.value, repr(s.aic), repr(s.bic), s.rank_aic, s.rank_bic,
         repr(s.loglik), s.k]
        for s in sorted(ranking.scores, key=lambda s: s.rank_aic)
    ]


def ranking_csv(rankings: Mapping[str, Ranking]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RANKING_HEADER)
    for name in sorted(rankings):
        w.writerows(ranking_rows(name, rankings[name]))
    return buf.getvalue()


@dataclass(frozen=True)
class ModelDatabase:
    classes: Dict[str, FittedModel]
    criterion: Criterion = Criterion.AIC
    frequency: float = 0.0
    polarization: Polarization = Polarization.VV

    def __post_init__(self) -> None:
        if not self.classes:
            raise ValidationError("a model database needs at least one class")
        object.__setattr__(self, "classes", dict(sorted(self.classes.items())))
        object.__setattr__(self, "criterion", Criterion.parse(self.criterion))
        object.__setattr__(self, "polarization", Polarization.parse(self.polarization))

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(self.classes)

    def without(self, name: str) -> "ModelDatabase":
        if name not in self.classes:
            raise ValidationError(f"class {name!r} is not in the database")
        rest = {k: v for k, v in self.classes.items() if k != name}
        return ModelDatabase(rest, self.criterion, self.frequency, self.polarization)

    def to_dict(self) -> dict:
        return {
            "schema": DB_SCHEMA,
            "criterion": self.criterion.value,
            "frequency_hz": self.frequency,
            "polarization": self.polarization.value,
            "classes": {k: v.to_dict() for k, v in self.classes.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "ModelDatabase":
        if d.get("schema") != DB_SCHEMA:
            raise ValidationError(f"unsupported database schema {d.get('schema')!r}; expected {DB_SCHEMA}")
        try:
            classes = {k: FittedModel.from_dict(v) for k, v in d["classes"].items()}
            return cls(classes, d["criterion"], float(d["frequency_hz"]), d["polarization"])
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed model database: {exc}") from exc

    @classmethod
    def from_json(cls, text: str) -> "ModelDatabase":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ValidationError(f"database is not valid JSON: {exc}") from exc


def build_database(
    training: Mapping[str, object],
    criterion="AIC",
    frequency: float = 0.0,
    polarization="VV",
    families: Optional[Iterable] = None,
) -> Tuple[ModelDatabase, Dict[str, Ranking]]:
    """Keep the criterion-best model of every class.

    Args:
        training: class name -> linear RCS samples (or an ``RcsSignature``)
        criterion: ``"AIC"`` or ``"BIC"``
        families: candidate families; all eleven by default

    Returns:
        The database and the per-class rankings it was chosen from.
    """
    crit = Criterion.parse(criterion)
    rankings: Dict[str, Ranking] = {}
    chosen: Dict[str, FittedModel] = {}
    for name in sorted(training):
        data = training[name]
        x = data.rcs_linear if isinstance(data, RcsSignature) else np.asarray(data, dtype=float)
        if x.size < 8:
            raise ValidationError(f"class {name!r} has {x.size} samples; at least 8 are needed")
        rankings[name] = rank_models(x, families)
        chosen[name] = rankings[name].best(crit).model
    return ModelDatabase(chosen, crit, frequency, polarization), rankings


@dataclass(frozen=True)
class ClassificationResult:
    decision: str
    log_likelihoods: Dict[str, float]


def log_likelihood(model: FittedModel, test) -> float:
    """Sum of per-sample log densities, each floored at ``LOGPDF_FLOOR``."""
    x = np.asarray(test, dtype=float).reshape(-1)
    if x.size == 0:
        raise ValidationError("test vector is empty")
    lp = np.atleast_1d(logpdf(model.family, model.params, x))
    lp = np.where(np.isnan(lp), LOGPDF_FLOOR, lp)
    return float(np.sum(np.maximum(lp, LOGPDF_FLOOR)))


def log_likelihood_matrix(db: ModelDatabase, tests) -> np.ndarray:
    """Floored log-likelihoods of many test vectors at once.

    Args:
        tests: array of shape (n_tests, n_samples)

    Returns:
        Array of shape (n_tests, n_classes), columns in ``db.names`` order.
    """
    x = np.atleast_2d(np.asarray(tests, dtype=float))
    if x.shape[1] == 0:
        raise ValidationError("test vectors are empty")
    out = np.empty((x.shape[0], len(db.classes)))
    for j, m in enumerate(db.classes.values()):
        lp = np.asarray(logpdf(m.family, m.params, x), dtype=float)
        lp = np.where(np.isnan(lp), LOGPDF_FLOOR, lp)
        out[:, j] = np.sum(np.maximum(lp, LOGPDF_FLOOR), axis=1)
    return out


def classify_map(db: ModelDatabase, test) -> ClassificationResult:
    """Equal-prior MAP decision: the class with the largest log-likelihood.

    Exact ties go to the lexicographically smallest class name.
    """
    scores = {name: log_likelihood(m, test) for name, m in db.classes.items()}
    best = max(scores.values())
    decision = min(name for name, v in scores.items() if v == best)
    return ClassificationResult(decision, scores)


def classify_sector(db: ModelDatabase, sig: RcsSignature, sector: SectorSpec) -> ClassificationResult:
    return classify_map(db, sector_slice(sig, sector).rcs_linear)
