"""Closed-form limit densities for the modular surface.

``hall_psi`` is Hall's gap density (normalised so that it is the density of
``e^{-R} xi_1`` for a Haar-random start); ``rho(s) = e^{-s} hall_psi(e^{-s})``
is the extreme value density of ``sup height - log T``.  Survival functions
are closed form: the ``r >= 4`` branch of Hall's density integrates to an
expression in the dilogarithm.

All evaluators accept scalars or arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.special import spence

from .errors import DomainError

C_HALL = 3.0 / math.pi**2
ETA_BAR = math.pi**2 / 3  # mean return time to the length-one section
PRIMITIVE_DENSITY = 6.0 / math.pi**2
VOL_MODULAR = math.pi / 3
ZETA3 = 1.2020569031595942854
RHO_MEAN = 1.0 - 12.0 / math.pi**2 * ZETA3
LOG2 = math.log(2.0)

# Taylor coefficients of int_0^q psi_3(1/p) p^{-2} dp, used for r >= 64
_TAIL_SERIES = (2.0, 1.0, 10 / 9, 7 / 4, 84 / 25, 22 / 3, 858 / 49, 715 / 16,
                9724 / 81, 8398 / 25, 117572 / 121, 52003 / 18, 1485800 / 169,
                1337220 / 49)
_SERIES_FROM = 64.0
_QUAD_KW = dict(epsabs=1e-10, epsrel=1e-12, limit=400)


def _scalar_out(x, out):
    return float(out) if np.ndim(x) == 0 else out


def _sqrt_quarter_minus_inv(r):
    # sqrt(1/4 - 1/r) written to stay accurate just above r = 4
    return np.sqrt((r - 4.0) / (4.0 * r))


def _psi_mid(r):
    return -1.0 + 2.0 / r + 2.0 * np.log(r) / r


def _psi_high(r):
    w = _sqrt_quarter_minus_inv(r)
    return -1.0 + 2.0 / r + 2.0 * w - 4.0 / r * np.log(0.5 + w)


def hall_psi(r):
    """Hall's density; ``3/pi^2`` on ``[0, 1)``, decaying like ``(6/pi^2) r^-2``."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or np.any(np.isnan(r)):
        raise DomainError("hall_psi is defined for r >= 0")
    with np.errstate(divide="ignore", invalid="ignore"):
        mid = _psi_mid(np.clip(r, 1.0, 4.0))
        high = _psi_high(np.clip(r, 4.0, _SERIES_FROM))
        far = _psi_series(1.0 / np.maximum(r, _SERIES_FROM))
    out = np.where(r < 1.0, 1.0, np.where(r <= 4.0, mid, np.where(r < _SERIES_FROM, high, far)))
    out = np.where(np.isinf(r), 0.0, out)
    return _scalar_out(r, C_HALL * out)


def hall_psi_rt(r, t):
    """Joint density in return time ``r`` and impact height ``t`` (averaged over ``s``).

    Branches are taken in ``r e^{-t/2}``.
    """
    r = np.asarray(r, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(r < 0) or np.any(t < 0):
        raise DomainError("hall_psi_rt needs r >= 0 and t >= 0")
    x = r * np.exp(-t / 2)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        upper = 1.0 / (-np.expm1(-t / 2))
        mid = 1.0 - np.exp(t / 2) + np.exp(t) / r
    out = np.where(x <= 1.0, 1.0, np.where(x <= upper, mid, 0.0))
    return _scalar_out(r + t, C_HALL * out)


def _F_mid(r):
    lr = np.log(r)
    return -r + 2.0 * lr + lr * lr


def _G_high(r):
    w = _sqrt_quarter_minus_inv(r)
    a, b = 0.5 + w, 0.5 - w
    return (-r + 2.0 * np.log(r) + np.sqrt(r * (r - 4.0))
            - 4.0 * np.log(np.sqrt(r) + np.sqrt(r - 4.0))
            + 2.0 * np.log(a) ** 2 - 4.0 * spence(1.0 - b))


_G_INF = -2.0 - 4.0 * LOG2


def _rho_series(q):
    # r psi_3(r) at q = 1/r, from differentiating the tail series: sum n a_n q^n
    acc = np.zeros_like(q)
    for n in range(len(_TAIL_SERIES), 0, -1):
        acc = (acc + n * _TAIL_SERIES[n - 1]) * q
    return acc


def _psi_series(q):
    return _rho_series(q) * q


def _tail_series(r):
    q = 1.0 / r
    acc = np.zeros_like(q)
    for coef in reversed(_TAIL_SERIES):
        acc = (acc + coef) * q
    return acc


def _high_sf(r):
    """Unnormalised integral of the ``r >= 4`` branch from ``r`` to infinity."""
    with np.errstate(divide="ignore", invalid="ignore"):
        closed = _G_INF - _G_high(np.clip(r, 4.0, _SERIES_FROM))
        series = _tail_series(np.maximum(r, _SERIES_FROM))
    return np.where(r < _SERIES_FROM, closed, series)


_HIGH_AT_4 = float(_G_INF - _G_high(4.0))
_MID_TOTAL = float(_F_mid(4.0) - _F_mid(1.0))


def hall_sf(x):
    """``int_x^inf hall_psi(r) dr``: the limiting ``P(e^{-R} xi_1 > x)``."""
    x = np.asarray(x, dtype=float)
    xc = np.maximum(x, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        low = (1.0 - np.minimum(xc, 1.0)) + _MID_TOTAL + _HIGH_AT_4
        mid = _F_mid(4.0) - _F_mid(np.clip(xc, 1.0, 4.0)) + _HIGH_AT_4
        high = _high_sf(np.maximum(xc, 4.0))
    out = np.where(xc < 1.0, low, np.where(xc <= 4.0, mid, high))
    out = np.where(np.isinf(x) & (x > 0), 0.0, out)
    return _scalar_out(x, C_HALL * out)


def hall_cdf(x):
    return 1.0 - np.asarray(hall_sf(x)) if np.ndim(x) else 1.0 - hall_sf(x)


def rho(s):
    """Extreme value density of ``sup height - log T``."""
    s = np.asarray(s, dtype=float)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        em = np.exp(-s)
        w = np.sqrt(np.maximum(0.25 - np.exp(np.minimum(s, 0.0)), 0.0))
        low = -em + 2.0 + 2.0 * em * w - 4.0 * np.log(0.5 + w)
        mid = -em + 2.0 - 2.0 * s
    out = np.where(s >= 0.0, em, np.where(s >= -2.0 * LOG2, mid, low))
    # left tail: the closed form cancels, use the expansion in e^{s}
    q = np.exp(np.minimum(s, -math.log(_SERIES_FROM)))
    out = np.where(s < -math.log(_SERIES_FROM), _rho_series(q), out)
    out = np.where(np.isneginf(s), 0.0, out)
    return _scalar_out(s, C_HALL * out)


def rho_via_psi(s):
    """Same density computed as ``e^{-s} hall_psi(e^{-s})``."""
    s = np.asarray(s, dtype=float)
    r = np.exp(-s)
    return _scalar_out(s, r * np.asarray(hall_psi(r)))


def rho_cdf_upper(H):
    """``int_H^inf rho(s) ds``, the limiting ``P(sup height - log T > H)``."""
    H = np.asarray(H, dtype=float)
    with np.errstate(over="ignore"):
        out = 1.0 - np.asarray(hall_sf(np.exp(-H)))
    return _scalar_out(H, out)


def rho_cdf(H):
    H = np.asarray(H, dtype=float)
    with np.errstate(over="ignore"):
        return _scalar_out(H, np.asarray(hall_sf(np.exp(-H))))


def omega_y(s, ell_y: float):
    if ell_y < 0:
        raise DomainError("ell_y must be non-negative")
    return rho(np.asarray(s, dtype=float) - ell_y)


def rho_kmk(r):
    """The same law in the alpha-function normalisation, ``2 rho(2 r)``."""
    return 2.0 * rho(2.0 * np.asarray(r, dtype=float))


def eta_log(s):
    """Density of logs of smallest denominators, ``2 rho(-2 s)``."""
    return 2.0 * rho(-2.0 * np.asarray(s, dtype=float))


def eta_bar_multi(sigma, vol: float) -> float:
    """Mean return time ``pi vol / sum_k e^{-sigma_k}`` for a multi-cusp section."""
    sigma = np.atleast_1d(np.asarray(sigma, dtype=float))
    if sigma.size == 0:
        raise DomainError("need at least one cusp")
    if not vol > 0:
        raise DomainError("volume must be positive")
    return float(math.pi * vol / np.exp(-sigma).sum())


def psi_sigma_flat(vol: float) -> float:
    """Value of the multi-cusp gap density near zero, independent of the offsets."""
    if not vol > 0:
        raise DomainError("volume must be positive")
    return 1.0 / (math.pi * vol)


def tail_ratio(r):
    """``hall_psi(r) r^2 / (6/pi^2)``, which tends to 1."""
    r = np.asarray(r, dtype=float)
    return _scalar_out(r, np.asarray(hall_psi(r)) * r * r / PRIMITIVE_DENSITY)


# -- quadrature -------------------------------------------------------------

PSI_BREAKS = (1.0, 4.0)
RHO_BREAKS = (-2.0 * LOG2, 0.0)


def quad_pieces(f, breaks, lo=-np.inf, hi=np.inf) -> float:
    """Adaptive Gauss-Kronrod quadrature split at the known kinks of ``f``."""
    edges = [lo] + [b for b in breaks if lo < b < hi] + [hi]
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(f, a, b, **_QUAD_KW)
        total += val
    return total


def psi_total() -> float:
    return quad_pieces(hall_psi, PSI_BREAKS, 0.0)


def rho_total() -> float:
    return quad_pieces(rho, RHO_BREAKS)


def rho_moment(k: int = 1) -> float:
    return quad_pieces(lambda s: s**k * rho(s), RHO_BREAKS)


def psi_rt_marginal(r: float) -> float:
    """``int_0^inf hall_psi_rt(r, t) e^{-t} dt`` by quadrature split at the branch edges."""
    breaks = []
    if r > 1:
        breaks.append(2.0 * math.log(r))  # r e^{-t/2} = 1
    if r > 4:
        # r e^{-t/2} = 1/(1 - e^{-t/2}) has two roots for r > 4
        for sign in (-1.0, 1.0):
            y = (r + sign * math.sqrt(r * r - 4 * r)) / (2 * r)  # y = e^{-t/2}
            breaks.append(-2.0 * math.log(y))
    return quad_pieces(lambda t: hall_psi_rt(r, t) * math.exp(-t), sorted(breaks), 0.0)


def sandwich_constants(f, grid) -> tuple[float, float]:
    """Grid minimum and maximum of ``f``; used for the exponential and quadratic envelopes."""
    vals = np.asarray(f(np.asarray(grid, dtype=float)))
    return float(vals.min()), float(vals.max())


@dataclass(frozen=True)
class AnalyticDensity:
    """Stateless evaluator bundling a density with its survival function.

    ``kind`` is one of ``psi``, ``rho``, ``omega`` (shift ``ell_y``) or
    ``psi_sigma_flat`` (offsets ``sigma`` and surface volume ``vol``; only the
    flat region near zero is available there).
    """

    kind: str
    ell_y: float = 0.0
    sigma: tuple = field(default=(0.0,))
    vol: float = VOL_MODULAR

    def __post_init__(self):
        if self.kind not in ("psi", "rho", "omega", "psi_sigma_flat"):
            raise DomainError(f"unknown density kind {self.kind!r}")
        if self.ell_y < 0:
            raise DomainError("ell_y must be non-negative")

    def pdf(self, x):
        if self.kind == "psi":
            return hall_psi(x)
        if self.kind == "rho":
            return rho(x)
        if self.kind == "omega":
            return omega_y(x, self.ell_y)
        x = np.asarray(x, dtype=float)
        return _scalar_out(x, np.full(x.shape, psi_sigma_flat(self.vol)))

    def sf(self, x):
        if self.kind == "psi":
            return hall_sf(x)
        if self.kind == "rho":
            return rho_cdf_upper(x)
        if self.kind == "omega":
            return rho_cdf_upper(np.asarray(x, dtype=float) - self.ell_y)
        raise DomainError("survival function unavailable beyond the flat region")

    def cdf(self, x):
        return 1.0 - np.asarray(self.sf(x)) if np.ndim(x) else 1.0 - self.sf(x)

    @property
    def breaks(self):
        if self.kind == "psi":
            return PSI_BREAKS
        return tuple(b + self.ell_y for b in RHO_BREAKS)

    def total(self) -> float:
        lo = 0.0 if self.kind == "psi" else -np.inf
        return quad_pieces(self.pdf, self.breaks, lo)

    def mean(self) -> float:
        if self.kind == "psi":
            return math.inf  # r psi(r) ~ 1/r
        lo = -np.inf
        return quad_pieces(lambda x: x * self.pdf(x), self.breaks, lo)
