"""Smooth cutoff machinery shared by the metric and isotopy modules.

Everything is built from the standard C-infinity bump ``exp(-1/(u(1-u)))``
on (0, 1), represented once as a high-degree Chebyshev series.  Values,
derivatives and antiderivatives are all evaluated from the same series, so
closed-form derivative formulas elsewhere in the package agree with finite
differences of the evaluated functions to near machine precision.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.polynomial import chebyshev as _cheb

_BUMP_DEGREE = 180


def _bump01(u):
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    m = (u > 0.0) & (u < 1.0)
    um = u[m]
    out[m] = np.exp(-1.0 / (um * (1.0 - um)))
    return out


@lru_cache(maxsize=1)
def _bump_series():
    """Chebyshev coefficients of the bump on [0,1] (t in [-1,1], u=(t+1)/2)."""
    c = _cheb.chebinterpolate(lambda t: _bump01((t + 1.0) / 2.0), _BUMP_DEGREE)
    cint = _cheb.chebint(c, lbnd=-1.0)
    total = float(_cheb.chebval(1.0, cint))
    cder = _cheb.chebder(c)
    return c, cint, cder, total


def smoothstep(x):
    """C-infinity monotone step: 0 for x <= 0, 1 for x >= 1, flat at both ends."""
    c, cint, _, total = _bump_series()
    x = np.asarray(x, dtype=float)
    t = np.clip(2.0 * x - 1.0, -1.0, 1.0)
    return _cheb.chebval(t, cint) / total


def smoothstep_d1(x):
    """Derivative of :func:`smoothstep`."""
    c, _, _, total = _bump_series()
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    m = (x > 0.0) & (x < 1.0)
    out[m] = _cheb.chebval(2.0 * x[m] - 1.0, c) * (2.0 / total)
    return out


def smoothstep_d2(x):
    c, _, cder, total = _bump_series()
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    m = (x > 0.0) & (x < 1.0)
    out[m] = _cheb.chebval(2.0 * x[m] - 1.0, cder) * (4.0 / total)
    return out


def smoothstep_int(x):
    """Antiderivative of :func:`smoothstep` with value 0 at x = 0."""
    _, cint, _, total = _bump_series()
    x = np.asarray(x, dtype=float)
    # integrate the series once more; handle the affine tails analytically
    key = "_int2"
    cached = getattr(smoothstep_int, key, None)
    if cached is None:
        c2 = _cheb.chebint(cint, lbnd=-1.0)
        val1 = float(_cheb.chebval(1.0, c2))
        cached = (c2, val1)
        setattr(smoothstep_int, key, cached)
    c2, val1 = cached
    t = np.clip(2.0 * x - 1.0, -1.0, 1.0)
    core = _cheb.chebval(t, c2) / (2.0 * total)  # du = dt/2
    out = np.where(x <= 0.0, 0.0, core)
    hi = x >= 1.0
    out = np.where(hi, val1 / (2.0 * total) + (x - 1.0), out)
    return out


@dataclass(frozen=True)
class CutoffProfile:
    """Pair of cutoff functions for the toroidal-metric construction.

    ``rho`` is the unit bump: 1 on [0,1], 0 beyond 2, C-infinity.  ``rho_c``
    is the wide cutoff used on the transverse radius: 1 on [0,1], descending
    to 0 at ``1/c`` with first and second derivatives of order ``c``.  The
    measured derivative bounds are stored in ``c_measured`` since a literal
    bound of ``c`` is unattainable once the support is pinned at ``1/c``
    (mean value theorem forces a slope of at least ``c/(1-c)``).
    """

    c: float
    c_measured: tuple = field(init=False, repr=False, default=None)

    def __post_init__(self):
        if not (0.0 < self.c < 1.0):
            raise ValueError("cutoff slope parameter must lie in (0, 1)")
        w = self.support_end - 1.0
        xs = np.linspace(0.0, 1.0, 4001)
        d1 = np.abs(smoothstep_d1(xs)).max() / w
        d2 = np.abs(smoothstep_d2(xs)).max() / w**2
        object.__setattr__(self, "c_measured", (float(d1), float(d2)))

    @property
    def support_end(self) -> float:
        """End of support of rho_c; the metric reverts to the base beyond it."""
        return 1.0 / self.c

    # -- unit bump ---------------------------------------------------------
    @staticmethod
    def rho(r):
        r = np.abs(np.asarray(r, dtype=float))
        return 1.0 - smoothstep(r - 1.0)

    @staticmethod
    def rho_d1(r):
        x = np.asarray(r, dtype=float)
        s = np.sign(x)
        return -smoothstep_d1(np.abs(x) - 1.0) * np.where(s == 0, 1.0, s)

    @staticmethod
    def rho_int(x):
        """Integral of rho from -2 to x (rho treated as even)."""
        x = np.asarray(x, dtype=float)
        # primitive of the even bump: piecewise from smoothstep antiderivative
        def upper(y):
            # integral of rho from 0 to y  (y >= 0)
            y = np.asarray(y, dtype=float)
            yc = np.clip(y, 0.0, None)
            ramp = np.minimum(yc, 1.0)
            tail = (np.clip(yc, 1.0, 2.0) - 1.0) - smoothstep_int(
                np.clip(yc - 1.0, 0.0, 1.0)
            )
            return ramp + tail

        half = upper(2.0)
        return np.where(x >= 0.0, half + upper(x), half - upper(-x))

    @property
    def rho_total(self) -> float:
        """Integral of rho over the line."""
        return float(self.rho_int(2.0))

    # -- wide cutoff rho_c -------------------------------------------------
    def rho_c(self, r):
        r = np.abs(np.asarray(r, dtype=float))
        w = self.support_end - 1.0
        return 1.0 - smoothstep((r - 1.0) / w)

    def rho_c_d1(self, r):
        r = np.asarray(r, dtype=float)
        w = self.support_end - 1.0
        return -smoothstep_d1((np.abs(r) - 1.0) / w) / w * np.sign(r)

    def rho_c_d2(self, r):
        r = np.asarray(r, dtype=float)
        w = self.support_end - 1.0
        return -smoothstep_d2((np.abs(r) - 1.0) / w) / w**2


def odd_step(x):
    """Smooth odd function: -1 for x <= -1, +1 for x >= 1, odd by construction."""
    return 2.0 * smoothstep((np.asarray(x, dtype=float) + 1.0) / 2.0) - 1.0


def odd_step_d1(x):
    return smoothstep_d1((np.asarray(x, dtype=float) + 1.0) / 2.0)
