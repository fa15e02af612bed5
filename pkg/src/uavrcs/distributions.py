"""Candidate RCS distributions: densities, samplers and maximum-likelihood fits.

Parameter tuples (order is part of the file format, see ``PARAM_NAMES``):

==================  ===========================  ==========================
family              params                       notes
==================  ===========================  ==========================
Lognormal           (mu, sigma)                  of ln x
GEV                 (shape, scale, loc)          shape > 0 is heavy tailed
Gamma               (shape, scale)
Beta                (alpha, beta, scale)         support (0, scale); scale
                                                 is fixed from the data and
                                                 not counted in k
GeneralizedPareto   (shape, scale)               location fixed at 0
Weibull             (shape, scale)
Nakagami            (m, omega)                   m >= 0.5, omega = E[x^2]
Rayleigh            (scale,)
Rician              (nu, sigma)
Exponential         (rate,)
Normal              (mu, sigma)
==================  ===========================  ==========================

All fits run on linear-scale RCS (m^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np
from scipy import optimize, special

from .errors import ConvergenceError, DomainError, FitError

MIN_FIT_SAMPLES = 8
BETA_HEADROOM = 1.000001
LN10_OVER_10 = math.log(10.0) / 10.0


class Family(Enum):
    LOGNORMAL = "Lognormal"
    GEV = "GEV"
    GAMMA = "Gamma"
    BETA = "Beta"
    GENERALIZED_PARETO = "GeneralizedPareto"
    WEIBULL = "Weibull"
    NAKAGAMI = "Nakagami"
    RAYLEIGH = "Rayleigh"
    RICIAN = "Rician"
    EXPONENTIAL = "Exponential"
    NORMAL = "Normal"

    @classmethod
    def parse(cls, value: "str | Family") -> "Family":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "").replace("-", "")
        for fam in cls:
            if fam.value.lower() == key or fam.name.lower().replace("_", "") == key:
                return fam
        raise DomainError(f"unknown distribution family {value!r}")


ALL_FAMILIES: Tuple[Family, ...] = tuple(Family)

PARAM_NAMES: Dict[Family, Tuple[str, ...]] = {
    Family.LOGNORMAL: ("mu", "sigma"),
    Family.GEV: ("shape", "scale", "loc"),
    Family.GAMMA: ("shape", "scale"),
    Family.BETA: ("alpha", "beta", "scale"),
    Family.GENERALIZED_PARETO: ("shape", "scale"),
    Family.WEIBULL: ("shape", "scale"),
    Family.NAKAGAMI: ("m", "omega"),
    Family.RAYLEIGH: ("scale",),
    Family.RICIAN: ("nu", "sigma"),
    Family.EXPONENTIAL: ("rate",),
    Family.NORMAL: ("mu", "sigma"),
}

# number of free parameters used by AIC/BIC
PARAM_COUNT: Dict[Family, int] = {f: 2 for f in Family}
PARAM_COUNT.update({Family.EXPONENTIAL: 1, Family.RAYLEIGH: 1, Family.GEV: 3})

REAL_LINE_FAMILIES = frozenset({Family.NORMAL, Family.GEV})


@dataclass(frozen=True)
class GammaParams:
    shape: float
    scale: float

    def __post_init__(self) -> None:
        if not (self.shape > 0 and self.scale > 0):
            raise DomainError("gamma shape and scale must be positive")


def _finite_or_none(v: float):
    return float(v) if math.isfinite(v) else None


@dataclass(frozen=True)
class FittedModel:
    family: Family
    params: Tuple[float, ...]
    k: int
    loglik: float
    n: int
    support_lo: float
    support_hi: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        validate_params(self.family, self.params)

    @property
    def named_params(self) -> Dict[str, float]:
        return dict(zip(PARAM_NAMES[self.family], self.params))

    def logpdf(self, x) -> np.ndarray:
        return logpdf(self.family, self.params, x)

    def to_dict(self) -> dict:
        out = {
            "family": self.family.value,
            "params": self.named_params,
            "k": self.k,
            "loglik": self.loglik,
            "n": self.n,
            # JSON has no infinity; an unbounded side is written as null
            "support": [_finite_or_none(self.support_lo), _finite_or_none(self.support_hi)],
        }
        if self.family is Family.BETA:
            out["beta_scale"] = self.params[2]
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "FittedModel":
        fam = Family.parse(d["family"])
        names = PARAM_NAMES[fam]
        p = d["params"]
        params = tuple(float(p[name]) for name in names) if isinstance(p, dict) else tuple(p)
        lo, hi = d.get("support") or support(fam, params)
        lo = -math.inf if lo is None else float(lo)
        hi = math.inf if hi is None else float(hi)
        return cls(fam, params, int(d["k"]), float(d["loglik"]), int(d["n"]), lo, hi)

    @classmethod
    def from_params(cls, family: Family, params: Sequence[float], samples=None) -> "FittedModel":
        """Wrap known parameters (e.g. published statistics) as a model."""
        family = Family.parse(family)
        params = tuple(float(p) for p in params)
        if samples is None:
            ll, n = 0.0, 0
        else:
            x = np.asarray(samples, dtype=float)
            ll, n = float(np.sum(logpdf(family, params, x))), int(x.size)
        lo, hi = support(family, params)
        return cls(family, params, PARAM_COUNT[family], ll, n, lo, hi)


# ---------------------------------------------------------------------------
# digamma and the closed-form gamma estimator

# B_2, B_4, ..., B_12
_BERNOULLI = (1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730)
_DIGAMMA_SHIFT = 10.0


def digamma(x: float) -> float:
    """Digamma function for real ``x > 0``.

    Shifts ``x`` upward with ``psi(x) = psi(x + 1) - 1/x`` and then sums the
    asymptotic series ``ln x - 1/(2x) - sum B_2g / (2g x^2g)`` through B_12.
    """
    if not x > 0:
        raise DomainError(f"digamma needs x > 0, got {x}")
    acc = 0.0
    while x < _DIGAMMA_SHIFT:
        acc -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    series = 0.0
    power = inv2
    for g, b in enumerate(_BERNOULLI, start=1):
        series += b / (2 * g) * power
        power *= inv2
    return acc + math.log(x) - 0.5 / x - series


def gamma_log_ratio(samples) -> float:
    """``ln(mean x) - mean(ln x)``; zero only for constant data."""
    x = np.asarray(samples, dtype=float)
    return float(math.log(np.mean(x)) - np.mean(np.log(x)))


def fit_gamma_closed_form(samples) -> GammaParams:
    """Closed-form gamma estimate from a truncated digamma expansion.

    With ``psi(g) ~ ln g - 1/(2g) - 1/(12 g^2)`` the likelihood equations
    reduce to ``12 s g^2 - 6 g - 1 = 0``; the positive root is
    ``g = (1 + sqrt(1 + 4 s / 3)) / (4 s)`` and ``scale = mean / g``.
    """
    x = np.asarray(samples, dtype=float)
    if x.size < 2:
        raise DomainError("gamma estimator needs at least two samples")
    if np.any(~(x > 0)):
        raise DomainError("gamma estimator needs strictly positive samples")
    s = gamma_log_ratio(x)
    if not s > 0:
        raise DomainError("degenerate data: all samples equal (log ratio s = 0)")
    shape = (1.0 + math.sqrt(1.0 + 4.0 * s / 3.0)) / (4.0 * s)
    return GammaParams(shape, float(np.mean(x)) / shape)


def lognormal_from_db_stats(mean_db: float, std_db: float) -> Tuple[float, float]:
    """Lognormal ``(mu, sigma)`` whose dB-scale image has the given mean/std."""
    if not std_db > 0:
        raise DomainError("dB standard deviation must be positive")
    return mean_db * LN10_OVER_10, std_db * LN10_OVER_10


# ---------------------------------------------------------------------------
# densities


def validate_params(family: Family, params: Sequence[float]) -> None:
    names = PARAM_NAMES[family]
    if len(params) != len(names):
        raise DomainError(f"{family.value} expects {len(names)} params {names}, got {len(params)}")
    p = dict(zip(names, params))
    if not all(math.isfinite(v) for v in params):
        raise DomainError(f"{family.value} params must be finite: {p}")
    positive = {
        Family.LOGNORMAL: ("sigma",),
        Family.GEV: ("scale",),
        Family.GAMMA: ("shape", "scale"),
        Family.BETA: ("alpha", "beta", "scale"),
        Family.GENERALIZED_PARETO: ("scale",),
        Family.WEIBULL: ("shape", "scale"),
        Family.NAKAGAMI: ("omega",),
        Family.RAYLEIGH: ("scale",),
        Family.RICIAN: ("sigma",),
        Family.EXPONENTIAL: ("rate",),
        Family.NORMAL: ("sigma",),
    }[family]
    for name in positive:
        if not p[name] > 0:
            raise DomainError(f"{family.value} parameter {name} must be positive, got {p[name]}")
    if family is Family.NAKAGAMI and p["m"] < 0.5:
        raise DomainError(f"Nakagami m must be >= 0.5, got {p['m']}")
    if family is Family.RICIAN and p["nu"] < 0:
        raise DomainError(f"Rician nu must be non-negative, got {p['nu']}")


def support(family: Family, params: Sequence[float]) -> Tuple[float, float]:
    if family is Family.NORMAL:
        return -math.inf, math.inf
    if family is Family.GEV:
        xi, sc, loc = params
        if xi > 0:
            return loc - sc / xi, math.inf
        if xi < 0:
            return -math.inf, loc - sc / xi
        return -math.inf, math.inf
    if family is Family.BETA:
        return 0.0, params[2]
    if family is Family.GENERALIZED_PARETO:
        xi, sc = params
        return 0.0, (-sc / xi if xi < 0 else math.inf)
    return 0.0, math.inf


def _xlogy_pos(x: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(x > 0, np.log(np.where(x > 0, x, 1.0)), -np.inf)


def _lp_lognormal(x, mu, s):
    lx = _xlogy_pos(x)
    with np.errstate(invalid="ignore"):
        out = -lx - math.log(s) - 0.5 * math.log(2 * math.pi) - (lx - mu) ** 2 / (2 * s * s)
    return np.where(x > 0, out, -np.inf)


def _lp_gev(x, xi, sc, loc):
    z = (x - loc) / sc
    if abs(xi) < 1e-12:
        return -math.log(sc) - z - np.exp(-z)
    t = 1.0 + xi * z
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        lt = np.log(np.where(t > 0, t, 1.0))
        out = -math.log(sc) - (1.0 + 1.0 / xi) * lt - np.exp(-lt / xi)
    return np.where(t > 0, out, -np.inf)


def _lp_gamma(x, a, sc):
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (a - 1.0) * _xlogy_pos(x) - x / sc - a * math.log(sc) - special.gammaln(a)
    if a == 1.0:
        out = np.where(x == 0, -math.log(sc), out)
    return np.where(x >= 0, np.nan_to_num(out, nan=-np.inf), -np.inf)


def _lp_beta(x, a, b, sc):
    y = x / sc
    inside = (y > 0) & (y < 1)
    ys = np.where(inside, y, 0.5)
    out = (a - 1.0) * np.log(ys) + (b - 1.0) * np.log1p(-ys) - special.betaln(a, b) - math.log(sc)
    return np.where(inside, out, -np.inf)


def _lp_gpd(x, xi, sc):
    z = x / sc
    if abs(xi) < 1e-12:
        return np.where(x >= 0, -math.log(sc) - z, -np.inf)
    t = 1.0 + xi * z
    ok = (x >= 0) & (t > 0)
    out = -math.log(sc) - (1.0 + 1.0 / xi) * np.log(np.where(ok, t, 1.0))
    return np.where(ok, out, -np.inf)


def _lp_weibull(x, k, sc):
    z = np.where(x > 0, x / sc, 1.0)
    out = math.log(k / sc) + (k - 1.0) * np.log(z) - z**k
    return np.where(x > 0, out, -np.inf)


def _lp_nakagami(x, m, om):
    xs = np.where(x > 0, x, 1.0)
    out = (
        math.log(2.0) + m * math.log(m) - special.gammaln(m) - m * math.log(om)
        + (2 * m - 1) * np.log(xs) - m * xs * xs / om
    )
    return np.where(x > 0, out, -np.inf)


def _lp_rayleigh(x, s):
    xs = np.where(x > 0, x, 1.0)
    out = np.log(xs) - 2 * math.log(s) - xs * xs / (2 * s * s)
    return np.where(x > 0, out, -np.inf)


def _lp_rician(x, nu, s):
    xs = np.where(x > 0, x, 1.0)
    s2 = s * s
    z = xs * nu / s2
    # ln I0(z) = ln(i0e(z)) + z
    out = np.log(xs) - math.log(s2) - (xs * xs + nu * nu) / (2 * s2) + np.log(special.i0e(z)) + z
    return np.where(x > 0, out, -np.inf)


def _lp_exponential(x, rate):
    return np.where(x >= 0, math.log(rate) - rate * x, -np.inf)


def _lp_normal(x, mu, s):
    return -math.log(s) - 0.5 * math.log(2 * math.pi) - (x - mu) ** 2 / (2 * s * s)


_LOGPDF: Dict[Family, Callable[..., np.ndarray]] = {
    Family.LOGNORMAL: _lp_lognormal,
    Family.GEV: _lp_gev,
    Family.GAMMA: _lp_gamma,
    Family.BETA: _lp_beta,
    Family.GENERALIZED_PARETO: _lp_gpd,
    Family.WEIBULL: _lp_weibull,
    Family.NAKAGAMI: _lp_nakagami,
    Family.RAYLEIGH: _lp_rayleigh,
    Family.RICIAN: _lp_rician,
    Family.EXPONENTIAL: _lp_exponential,
    Family.NORMAL: _lp_normal,
}


def logpdf(family, params: Sequence[float], x):
    """Natural-log density; ``-inf`` outside the support."""
    family = Family.parse(family)
    params = tuple(float(p) for p in params)
    validate_params(family, params)
    arr = np.asarray(x, dtype=float)
    out = _LOGPDF[family](arr, *params)
    out = np.asarray(out, dtype=float)
    return float(out) if out.ndim == 0 else out


def loglik(family, params, samples) -> float:
    return float(np.sum(logpdf(family, params, samples)))


# ---------------------------------------------------------------------------
# sampling


def make_rng(seed) -> np.random.Generator:
    """The toolkit's only random source: numpy's PCG64 bit generator.

    ``seed`` may be an int, a ``numpy.random.SeedSequence`` or an existing
    Generator (returned unchanged).
    """
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


def sample(family, params: Sequence[float], n: int, seed=0) -> np.ndarray:
    """``n`` i.i.d. draws.

    Inverse CDF for Exponential, Rayleigh, Weibull, GEV and
    GeneralizedPareto; Gaussian transforms for Normal, Lognormal and
    Rician; numpy's gamma/beta generators for Gamma, Beta and Nakagami.
    """
    family = Family.parse(family)
    params = tuple(float(p) for p in params)
    validate_params(family, params)
    if n < 1:
        raise DomainError("sample count must be >= 1")
    rng = make_rng(seed)

    if family in (Family.EXPONENTIAL, Family.RAYLEIGH, Family.WEIBULL, Family.GENERALIZED_PARETO):
        e = -np.log1p(-rng.random(n))  # standard exponential, inverse CDF
        if family is Family.EXPONENTIAL:
            return e / params[0]
        if family is Family.RAYLEIGH:
            return params[0] * np.sqrt(2.0 * e)
        if family is Family.WEIBULL:
            k, sc = params
            return sc * e ** (1.0 / k)
        xi, sc = params
        if abs(xi) < 1e-12:
            return sc * e
        return sc * np.expm1(xi * e) / xi
    if family is Family.GEV:
        xi, sc, loc = params
        g = -np.log(1.0 - rng.random(n))  # -ln U, U in (0, 1]
        with np.errstate(divide="ignore"):
            lg = np.log(g)
        if abs(xi) < 1e-12:
            return loc - sc * lg
        return loc + sc * np.expm1(-xi * lg) / xi
    if family is Family.NORMAL:
        return params[0] + params[1] * rng.standard_normal(n)
    if family is Family.LOGNORMAL:
        return np.exp(params[0] + params[1] * rng.standard_normal(n))
    if family is Family.RICIAN:
        nu, s = params
        z = rng.standard_normal((2, n))
        return np.hypot(nu + s * z[0], s * z[1])
    if family is Family.GAMMA:
        return params[1] * rng.standard_gamma(params[0], n)
    if family is Family.BETA:
        a, b, sc = params
        return sc * rng.beta(a, b, n)
    if family is Family.NAKAGAMI:
        m, om = params
        return np.sqrt(rng.standard_gamma(m, n) * (om / m))
    raise AssertionError(family)


# ---------------------------------------------------------------------------
# fitting


def _check_samples(family: Family, samples) -> np.ndarray:
    x = np.asarray(samples, dtype=float).reshape(-1)
    if x.size < MIN_FIT_SAMPLES:
        raise FitError(f"{family.value}: need at least {MIN_FIT_SAMPLES} samples, got {x.size}")
    bad = np.flatnonzero(~np.isfinite(x))
    if bad.size:
        raise FitError(f"{family.value}: non-finite sample at index {bad[0]} ({x[bad[0]]})")
    if family not in REAL_LINE_FAMILIES:
        bad = np.flatnonzero(~(x > 0))
        if bad.size:
            raise FitError(
                f"{family.value}: sample {bad[0]} = {x[bad[0]]!r} lies outside the positive support"
            )
    if np.ptp(x) == 0:
        raise FitError(f"{family.value}: all samples are equal")
    return x


def beta_scale(x: np.ndarray) -> float:
    return float(BETA_HEADROOM * np.max(x))


def _pwm_gev(x: np.ndarray) -> Tuple[float, float, float]:
    # probability-weighted moments (Hosking, Wallis & Wood)
    xs = np.sort(x)
    n = xs.size
    i = np.arange(n)
    b0 = xs.mean()
    b1 = np.sum(i / (n - 1) * xs) / n
    b2 = np.sum(i * (i - 1) / ((n - 1) * (n - 2)) * xs) / n
    c = (2 * b1 - b0) / (3 * b2 - b0) - math.log(2) / math.log(3)
    kh = 7.8590 * c + 2.9554 * c * c  # Hosking's k = -shape
    if abs(kh) < 1e-6:
        kh = 1e-6
    scale = (2 * b1 - b0) * kh / (math.gamma(1 + kh) * (1 - 2.0 ** (-kh)))
    if not scale > 0:
        scale = float(np.std(x)) * math.sqrt(6) / math.pi
    loc = b0 + scale * (math.gamma(1 + kh) - 1) / kh
    return -kh, scale, loc


def moment_init(family, samples) -> Tuple[float, ...]:
    """Method-of-moments (or PWM for GEV) starting parameters."""
    family = Family.parse(family)
    x = np.asarray(samples, dtype=float)
    m = float(np.mean(x))
    v = float(np.var(x))
    if family is Family.NORMAL:
        return m, math.sqrt(v)
    if family is Family.LOGNORMAL:
        s2 = math.log1p(v / (m * m))
        return math.log(m) - 0.5 * s2, math.sqrt(s2)
    if family is Family.EXPONENTIAL:
        return (1.0 / m,)
    if family is Family.RAYLEIGH:
        return (m / math.sqrt(math.pi / 2),)
    if family is Family.GAMMA:
        return m * m / v, v / m
    if family is Family.WEIBULL:
        k = max((math.sqrt(v) / m) ** -1.086, 0.05)
        return k, m / math.gamma(1 + 1 / k)
    if family is Family.NAKAGAMI:
        x2 = x * x
        om = float(np.mean(x2))
        return max(om * om / float(np.var(x2)), 0.5), om
    if family is Family.RICIAN:
        e2 = float(np.mean(x * x))
        e4 = float(np.mean(x**4))
        nu4 = 2 * e2 * e2 - e4
        nu = nu4 ** 0.25 if nu4 > 0 else 0.0
        s2 = max((e2 - nu * nu) / 2, 1e-12 * e2)
        return nu, math.sqrt(s2)
    if family is Family.BETA:
        sc = beta_scale(x)
        y = x / sc
        my, vy = float(np.mean(y)), float(np.var(y))
        common = my * (1 - my) / vy - 1
        if common <= 0:
            common = 1.0
        return my * common, (1 - my) * common, sc
    if family is Family.GENERALIZED_PARETO:
        r = m * m / v
        return 0.5 * (1 - r), 0.5 * m * (r + 1)
    if family is Family.GEV:
        return _pwm_gev(x)
    raise AssertionError(family)


def _safe_ll(family: Family, params, x) -> float:
    try:
        validate_params(family, params)
    except DomainError:
        return -math.inf
    val = float(np.sum(_LOGPDF[family](x, *params)))
    return val if math.isfinite(val) else -math.inf


def _fit_weibull(x: np.ndarray) -> Tuple[float, float]:
    lx = np.log(x)
    lmax = lx.max()
    mlx = lx.mean()

    def score(k):
        w = np.exp(k * (lx - lmax))
        return np.sum(w * lx) / np.sum(w) - 1.0 / k - mlx

    lo, hi = 1e-3, 1.0
    while score(hi) < 0:
        hi *= 2.0
        if hi > 1e4:
            raise ConvergenceError("Weibull: shape root not bracketed")
    k = optimize.brentq(score, lo, hi, xtol=1e-14, rtol=1e-14, maxiter=500)
    scale = math.exp(lmax + math.log(np.mean(np.exp(k * (lx - lmax)))) / k)
    return k, scale


def _fit_nakagami(x: np.ndarray) -> Tuple[float, float]:
    x2 = x * x
    om = float(np.mean(x2))
    delta = math.log(om) - float(np.mean(np.log(x2)))

    def score(m):
        return math.log(m) - special.digamma(m) - delta

    hi = 1.0
    while score(hi) > 0:
        hi *= 2.0
        if hi > 1e12:
            raise ConvergenceError("Nakagami: shape root not bracketed")
    lo = hi / 2.0
    while score(lo) < 0 and lo > 1e-12:
        lo /= 2.0
    m = optimize.brentq(score, lo, hi, xtol=1e-14, rtol=1e-14, maxiter=500)
    return max(m, 0.5), om


def _fit_gamma(x: np.ndarray) -> Tuple[float, float]:
    s = gamma_log_ratio(x)
    a = fit_gamma_closed_form(x).shape
    # generalized Newton on ln a - psi(a) = s, iterating on 1/a
    for _ in range(100):
        f = math.log(a) - digamma(a) - s
        fp = 1.0 / a - float(special.polygamma(1, a))
        a_new = 1.0 / (1.0 / a + f / (a * a * fp))
        if not a_new > 0:
            a_new = a / 2.0
        if abs(a_new - a) <= 1e-13 * a:
            a = a_new
            break
        a = a_new
    return a, float(np.mean(x)) / a


def _nelder_mead(nll: Callable[[np.ndarray], float], starts: List[np.ndarray], budget: int) -> np.ndarray:
    best, best_val = None, math.inf
    for z0 in starts:
        if not math.isfinite(nll(z0)):
            continue
        res = optimize.minimize(
            nll, z0, method="Nelder-Mead",
            options={"maxiter": budget, "maxfev": 2 * budget, "xatol": 1e-10, "fatol": 1e-12},
        )
        if res.fun < best_val:
            best, best_val = res.x, float(res.fun)
    if best is None:
        return None
    # one restart from the incumbent tightens a collapsed simplex
    res = optimize.minimize(
        nll, best, method="Nelder-Mead",
        options={"maxiter": budget, "maxfev": 2 * budget, "xatol": 1e-12, "fatol": 1e-13},
    )
    return res.x if res.fun <= best_val else best


# evaluation budget per Nelder-Mead start
NM_BUDGET = 2000


def _fit_gev(x: np.ndarray, init) -> Tuple[float, float, float]:
    xi0, sc0, loc0 = init
    sd = float(np.std(x))

    def nll(z):
        xi, lsc, loc = z
        return -_safe_ll(Family.GEV, (xi, math.exp(lsc), loc), x) if lsc < 700 else math.inf

    starts = []
    for xi in (xi0, 0.0, 0.2, -0.2):
        for sc in (sc0, 0.78 * sd):
            if sc > 0:
                starts.append(np.array([xi, math.log(sc), loc0]))
    z = _nelder_mead(nll, starts, NM_BUDGET)
    if z is None:
        raise ConvergenceError("GEV: no start gave a finite likelihood")
    return float(z[0]), math.exp(z[1]), float(z[2])


def _fit_gpd(x: np.ndarray, init) -> Tuple[float, float]:
    xi0, sc0 = init
    m = float(np.mean(x))

    def nll(z):
        return -_safe_ll(Family.GENERALIZED_PARETO, (z[0], math.exp(z[1])), x)

    starts = [np.array([xi, math.log(sc)]) for xi, sc in
              ((xi0, sc0), (0.0, m), (0.3, 0.7 * m), (-0.2, 1.2 * m)) if sc > 0]
    z = _nelder_mead(nll, starts, NM_BUDGET)
    if z is None:
        raise ConvergenceError("GeneralizedPareto: no start gave a finite likelihood")
    return float(z[0]), math.exp(z[1])


def _fit_beta(x: np.ndarray, init) -> Tuple[float, float, float]:
    a0, b0, sc = init
    y = x / sc
    # the beta likelihood only depends on these two sufficient statistics
    l1, l2 = float(np.mean(np.log(y))), float(np.mean(np.log1p(-y)))

    def nll(z):
        a, b = math.exp(z[0]), math.exp(z[1])
        val = -((a - 1.0) * l1 + (b - 1.0) * l2 - special.betaln(a, b))
        return val if math.isfinite(val) else math.inf

    starts = [np.log([a0 * f, b0 * g]) for f, g in ((1, 1), (0.5, 0.5), (2, 2), (1, 0.3))]
    z = _nelder_mead(nll, starts, NM_BUDGET)
    if z is None:
        raise ConvergenceError("Beta: no start gave a finite likelihood")
    return math.exp(z[0]), math.exp(z[1]), sc


def _fit_rician(x: np.ndarray, init) -> Tuple[float, float]:
    rms = math.sqrt(float(np.mean(x * x)))

    def profile(nu):
        # for fixed nu, maximize over ln(sigma)
        res = optimize.minimize_scalar(
            lambda ls: -_safe_ll(Family.RICIAN, (nu, math.exp(ls)), x),
            bounds=(math.log(rms) - 12.0, math.log(rms) + 1.0),
            method="bounded",
            options={"xatol": 1e-10},
        )
        return float(res.fun), math.exp(float(res.x))

    outer = optimize.minimize_scalar(
        lambda nu: profile(nu)[0], bounds=(0.0, rms), method="bounded", options={"xatol": 1e-10 * rms}
    )
    cands = [(float(outer.x), profile(float(outer.x))[1]), (0.0, profile(0.0)[1]), tuple(init)]

    def nll(z):
        return -_safe_ll(Family.RICIAN, (abs(z[0]), math.exp(z[1])), x)

    starts = [np.array([nu, math.log(s)]) for nu, s in cands if s > 0]
    z = _nelder_mead(nll, starts, NM_BUDGET)
    if z is None:
        raise ConvergenceError("Rician: no start gave a finite likelihood")
    return abs(float(z[0])), math.exp(float(z[1]))


def _mle_params(family: Family, x: np.ndarray, init) -> Tuple[float, ...]:
    if family is Family.NORMAL:
        return float(np.mean(x)), float(np.std(x))
    if family is Family.LOGNORMAL:
        lx = np.log(x)
        return float(np.mean(lx)), float(np.std(lx))
    if family is Family.EXPONENTIAL:
        return (1.0 / float(np.mean(x)),)
    if family is Family.RAYLEIGH:
        return (math.sqrt(float(np.mean(x * x)) / 2.0),)
    if family is Family.WEIBULL:
        return _fit_weibull(x)
    if family is Family.NAKAGAMI:
        return _fit_nakagami(x)
    if family is Family.GAMMA:
        return _fit_gamma(x)
    if family is Family.GEV:
        return _fit_gev(x, init)
    if family is Family.GENERALIZED_PARETO:
        return _fit_gpd(x, init)
    if family is Family.BETA:
        return _fit_beta(x, init)
    if family is Family.RICIAN:
        return _fit_rician(x, init)
    raise AssertionError(family)


def fit_mle(family, samples) -> FittedModel:
    """Maximum-likelihood fit of one family.

    Closed form for Normal, Lognormal, Exponential and Rayleigh; 1-D root
    finding for Weibull and Nakagami; closed-form start plus Newton for
    Gamma; multistart Nelder-Mead from moment estimates for Beta, GEV,
    GeneralizedPareto and Rician. The returned log-likelihood is never
    below that of the moment estimate.

    Raises:
        FitError: a sample lies outside the family's support, or too few samples.
        ConvergenceError: no optimizer start reached a finite likelihood.
    """
    family = Family.parse(family)
    x = _check_samples(family, samples)
    try:
        init = moment_init(family, x)
    except (ValueError, ZeroDivisionError, OverflowError) as exc:
        raise FitError(f"{family.value}: moment initialization failed ({exc})") from exc
    params = _mle_params(family, x, init)
    ll = _safe_ll(family, params, x)
    ll_init = _safe_ll(family, init, x)
    if ll_init > ll:
        params, ll = tuple(init), ll_init
    if not math.isfinite(ll):
        raise ConvergenceError(f"{family.value}: maximized log-likelihood is not finite")
    lo, hi = support(family, params)
    return FittedModel(family, tuple(params), PARAM_COUNT[family], ll, int(x.size), lo, hi)
