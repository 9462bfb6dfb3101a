"""Complex polynomials in several variables and the meromorphic pencil s = p/q.

Polynomials are stored as exponent/coefficient term lists, which is also the
JSON wire format.  The pencil owns the symbols ``s``, ``f = Re(s)`` and
``g = Im(s)`` used throughout; evaluation is chart-aware for projective
pencils (equal homogeneous degrees).
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np


class IndeterminatePoint(Exception):
    """Raised when both numerator and denominator vanish (base locus)."""


class PolePoint(Exception):
    """Raised when a finite field value is required at a pole."""


POLE = object()  # tagged pole value returned by eval_s


@dataclass(frozen=True)
class Polynomial:
    """Sparse complex polynomial: tuple of (coefficient, exponent-tuple)."""

    nvars: int
    terms: tuple  # ((complex, (int, ...)), ...)

    @staticmethod
    def from_terms(nvars, terms):
        canon = []
        for coeff, expo in terms:
            expo = tuple(int(e) for e in expo)
            if len(expo) != nvars:
                raise ValueError("exponent tuple length mismatch")
            if any(e < 0 for e in expo):
                raise ValueError("negative exponents not supported")
            if coeff != 0:
                canon.append((complex(coeff), expo))
        if not canon:
            raise ValueError("polynomial is identically zero")
        return Polynomial(nvars, tuple(canon))

    @staticmethod
    def monomial(nvars, coeff, expo):
        return Polynomial.from_terms(nvars, [(coeff, expo)])

    def __call__(self, z):
        z = np.asarray(z)
        val = 0.0 + 0.0j
        for coeff, expo in self.terms:
            t = coeff
            for zi, e in zip(z, expo):
                if e:
                    t = t * zi**e
            val += t
        return val

    def grad(self, z):
        """Holomorphic partial derivatives at z."""
        z = np.asarray(z)
        out = np.zeros(self.nvars, dtype=complex)
        for coeff, expo in self.terms:
            for j, ej in enumerate(expo):
                if ej == 0:
                    continue
                t = coeff * ej
                for k, ek in enumerate(expo):
                    e = ek - 1 if k == j else ek
                    if e:
                        t = t * z[k] ** e
                out[j] += t
        return out

    @property
    def degree(self):
        return max(sum(e) for _, e in self.terms)

    def is_homogeneous(self):
        degs = {sum(e) for _, e in self.terms}
        return len(degs) == 1

    def drop_var(self, var, value=1.0):
        """Substitute z[var] = value and remove the variable."""
        terms = []
        for coeff, expo in self.terms:
            c = coeff * (value ** expo[var]) if expo[var] else coeff
            terms.append((c, expo[:var] + expo[var + 1 :]))
        # merge duplicates
        acc = {}
        for c, e in terms:
            acc[e] = acc.get(e, 0.0) + c
        keep = [(c, e) for e, c in acc.items() if c != 0]
        if not keep:
            keep = [(0.0j, (0,) * (self.nvars - 1))]
        return Polynomial(self.nvars - 1, tuple(keep))

    def to_json(self):
        return {
            "nvars": self.nvars,
            "terms": [
                {"coeff": [c.real, c.imag], "expo": list(e)} for c, e in self.terms
            ],
        }

    @staticmethod
    def from_json(obj):
        return Polynomial.from_terms(
            obj["nvars"],
            [(complex(t["coeff"][0], t["coeff"][1]), tuple(t["expo"])) for t in obj["terms"]],
        )


@dataclass(frozen=True)
class MeromorphicPencil:
    """s = p/q with polynomial numerator and denominator."""

    p: Polynomial
    q: Polynomial

    def __post_init__(self):
        if self.p.nvars != self.q.nvars:
            raise ValueError("p and q must share the variable count")

    @property
    def nvars(self):
        return self.p.nvars

    def is_projective(self):
        return (
            self.p.is_homogeneous()
            and self.q.is_homogeneous()
            and self.p.degree == self.q.degree
        )

    @lru_cache(maxsize=None)
    def chart_polys(self, chart):
        """(p, q) with z[chart] = 1 substituted; chart None means ambient affine."""
        if chart is None:
            return self.p, self.q
        return self.p.drop_var(chart), self.q.drop_var(chart)

    def eval_s(self, coords, chart=None):
        """Value of s at affine coordinates; POLE tag at q = 0 != p.

        Raises IndeterminatePoint on the base locus p = q = 0.
        """
        p, q = self.chart_polys(chart)
        pv = p(coords)
        qv = q(coords)
        if qv == 0:
            if pv == 0:
                raise IndeterminatePoint("p = q = 0 at the queried point")
            return POLE
        return pv / qv

    def s_and_grad(self, coords, chart=None):
        """(s, ds) on the chart; ds by the quotient rule.

        Raises PolePoint at q = 0 (callers fall back to the smooth
        representative there) and IndeterminatePoint on the base locus.
        """
        p, q = self.chart_polys(chart)
        pv = p(coords)
        qv = q(coords)
        if qv == 0:
            if pv == 0:
                raise IndeterminatePoint("p = q = 0 at the queried point")
            raise PolePoint("q = 0: s has a pole here")
        dp = p.grad(coords)
        dq = q.grad(coords)
        s = pv / qv
        ds = (dp - s * dq) / qv
        return s, ds

    def pq_and_grads(self, coords, chart=None):
        p, q = self.chart_polys(chart)
        return p(coords), q(coords), p.grad(coords), q.grad(coords)

    def to_json(self):
        return {"p": self.p.to_json(), "q": self.q.to_json()}

    @staticmethod
    def from_json(obj):
        return MeromorphicPencil(
            Polynomial.from_json(obj["p"]), Polynomial.from_json(obj["q"])
        )

    def dump(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=1, sort_keys=True)

    @staticmethod
    def load(path):
        with open(path) as fh:
            return MeromorphicPencil.from_json(json.load(fh))


def monomial_pencil(m, n, l=0):
    """s = (z_1...z_m)/(z_{m+1}...z_{m+n}) on C^(m+n+l)."""
    if m < 1 or n < 0 or l < 0:
        raise ValueError("need m >= 1, n >= 0, l >= 0")
    nv = m + n + l
    pe = tuple(1 if i < m else 0 for i in range(nv))
    qe = tuple(1 if m <= i < m + n else 0 for i in range(nv))
    return MeromorphicPencil(
        Polynomial.monomial(nv, 1.0, pe), Polynomial.monomial(nv, 1.0, qe)
    )


def baby_pencil():
    """s = z2 z3 / z1 on C^3 (variables ordered z1, z2, z3)."""
    return MeromorphicPencil(
        Polynomial.monomial(3, 1.0, (0, 1, 1)), Polynomial.monomial(3, 1.0, (1, 0, 0))
    )


def quintic_pencil():
    """s = 5 z1..z5 / (z1^5 + ... + z5^5) on CP^4; X_infty = {s = 0}."""
    terms = [(1.0, tuple(5 if j == i else 0 for j in range(5))) for i in range(5)]
    return MeromorphicPencil(
        Polynomial.monomial(5, 5.0, (1, 1, 1, 1, 1)),
        Polynomial.from_terms(5, terms),
    )
