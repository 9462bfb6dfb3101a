"""Points, charts, Hermitian metrics and the metric-dependent direction fields.

Conventions (pinned once and for all, and exercised by the tests):

* A tangent vector is stored through its holomorphic components ``v``; the
  underlying real vector field is ``v^j d/dz_j + conj`` and the derivative of
  a scalar ``phi`` along it is ``v^j dphi/dz_j + conj(v^j) dphi/dzbar_j``.
* For a Hermitian metric matrix ``M[j,k] = g_{j kbar}``, the Riemannian
  pairing of two vectors is ``Re(v^T M conj(w))`` and the gradient of
  ``f = Re(s)`` has components ``conj(Minv @ ds)``.  With this choice the
  flat-metric gradient of Re(z2 z3 / z1) at (1,1,1) is (-1, 1, 1) and
  ``ds(V) = 1`` holds identically for ``V = grad f / |grad f|^2``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .poly import POLE, IndeterminatePoint, PolePoint  # noqa: F401 (re-export)
from . import metrics as _metrics


class CriticalPoint(Exception):
    """|grad f|^2 under the double-precision trust floor."""


CRITICAL_FLOOR = 1e-20


@dataclass(frozen=True)
class AffinePoint:
    """A point in a chart: ``chart`` is the index of the coordinate set to 1,
    or None for a plain affine ambient space."""

    coords: np.ndarray
    chart: int | None = None

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=complex)
        if not np.all(np.isfinite(c.view(float))):
            raise ValueError("coordinates must be finite")
        object.__setattr__(self, "coords", c)

    @property
    def nvars(self):
        """Number of homogeneous variables (coords plus the chart slot)."""
        return len(self.coords) + (0 if self.chart is None else 1)

    def homogeneous(self):
        """Full coordinate vector with the chart slot filled by 1."""
        if self.chart is None:
            return self.coords.copy()
        z = np.empty(self.nvars, dtype=complex)
        z[: self.chart] = self.coords[: self.chart]
        z[self.chart] = 1.0
        z[self.chart + 1 :] = self.coords[self.chart :]
        return z

    def to_chart(self, chart):
        """Reexpress in another chart (projective points only)."""
        if self.chart is None:
            raise ValueError("affine ambient points have no chart transitions")
        if chart == self.chart:
            return self
        z = self.homogeneous()
        if z[chart] == 0:
            raise ZeroDivisionError("target chart coordinate vanishes")
        z = z / z[chart]
        coords = np.delete(z, chart)
        return AffinePoint(coords, chart)

    def best_chart(self):
        """Chart maximizing |z_chart|; keeps coordinates bounded by 1."""
        if self.chart is None:
            return self
        z = self.homogeneous()
        return self.to_chart(int(np.argmax(np.abs(z))))

    def to_json(self):
        return {
            "chart": self.chart,
            "coords": [[c.real, c.imag] for c in self.coords],
        }

    @staticmethod
    def from_json(obj):
        return AffinePoint(
            np.array([complex(a, b) for a, b in obj["coords"]]), obj["chart"]
        )


def chart_jacobian(pt: AffinePoint, chart):
    """Holomorphic Jacobian d(new coords)/d(old coords) of the chart change."""
    old = pt.chart
    if old is None:
        raise ValueError("affine ambient points have no chart transitions")
    z = pt.homogeneous()
    zb = z[chart]
    n = pt.nvars
    old_idx = [i for i in range(n) if i != old]
    new_idx = [i for i in range(n) if i != chart]
    J = np.zeros((n - 1, n - 1), dtype=complex)
    for r, i in enumerate(new_idx):  # y_i = z_i / z_chart
        for c, j in enumerate(old_idx):
            J[r, c] = (1.0 if i == j else 0.0) / zb - (
                z[i] / zb**2 if j == chart else 0.0
            )
    return J


@dataclass(frozen=True)
class TangentVector:
    base: AffinePoint
    components: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "components", np.asarray(self.components, dtype=complex)
        )

    def to_chart(self, chart):
        J = chart_jacobian(self.base, chart)
        return TangentVector(self.base.to_chart(chart), J @ self.components)


@dataclass(frozen=True)
class MetricField:
    """Evaluator of the Hermitian metric matrix g_{j kbar} at a point.

    kinds: "flat", "fubini_study", "toroidal" (flat base perturbed by the
    toroidal potential of the metrics module).
    """

    kind: str = "flat"
    params: object = None
    cutoff: object = None

    def matrix(self, coords):
        coords = np.asarray(coords, dtype=complex)
        n = len(coords)
        if self.kind == "flat":
            return np.eye(n, dtype=complex)
        if self.kind == "fubini_study":
            a = 1.0 + float(np.vdot(coords, coords).real)
            return (a * np.eye(n) - np.outer(np.conj(coords), coords)) / a**2
        if self.kind == "toroidal":
            return _metrics.omega_perturbed(coords, self.params, self.cutoff)
        raise ValueError(f"unknown metric kind {self.kind!r}")

    def check_hermitian_positive(self, coords, tol=1e-14):
        M = self.matrix(coords)
        herm = np.abs(M - M.conj().T).max()
        mineig = np.linalg.eigvalsh((M + M.conj().T) / 2).min()
        return herm <= tol, float(mineig)


def directional_derivative(vec: TangentVector, dphi_dz, dphi_dzbar=None):
    """Derivative of a scalar along the real field of ``vec``."""
    v = vec.components
    out = np.sum(v * dphi_dz)
    if dphi_dzbar is not None:
        out = out + np.sum(np.conj(v) * dphi_dzbar)
    return out


def eval_s(pencil, pt: AffinePoint):
    """Value of s = p/q at the point (POLE tag at q = 0 != p)."""
    return pencil.eval_s(pt.coords, pt.chart)


def gradient_field(pencil, pt: AffinePoint, metric: MetricField) -> TangentVector:
    """Riemannian gradient of f = Re(s), as holomorphic components."""
    s, ds = pencil.s_and_grad(pt.coords, pt.chart)
    M = metric.matrix(pt.coords)
    v = np.conj(np.linalg.solve(M, ds))
    if not np.all(np.isfinite(v.view(float))):
        raise PolePoint("gradient overflow; use the smooth representative")
    return TangentVector(pt, v)


def grad_norm_sq(pencil, pt: AffinePoint, metric: MetricField) -> float:
    """|grad f|^2 = <ds, Minv ds>; the quantity normalizing V."""
    s, ds = pencil.s_and_grad(pt.coords, pt.chart)
    M = metric.matrix(pt.coords)
    return float(np.real(ds @ np.conj(np.linalg.solve(M, ds))))


def normalized_field(pencil, pt: AffinePoint, metric: MetricField) -> TangentVector:
    """V = grad f / |grad f|^2, the field with ds(V) = 1."""
    g = gradient_field(pencil, pt, metric)
    s, ds = pencil.s_and_grad(pt.coords, pt.chart)
    q = float(np.real(ds @ g.components))
    if q < CRITICAL_FLOOR:
        raise CriticalPoint(f"|grad f|^2 = {q:.3e} below floor")
    return TangentVector(pt, g.components / q)


def smooth_representative(pencil, pt: AffinePoint, metric: MetricField) -> TangentVector:
    """Pole-free positive multiple of V:
    W = |q|^2 grad Re(p qbar) - Re(p qbar) grad |q|^2.

    Polynomial in z and zbar; vanishes on the base locus and equals
    |grad f|^2 |q|^4 V wherever both are defined.
    """
    pv, qv, dp, dq = pencil.pq_and_grads(pt.coords, pt.chart)
    M = metric.matrix(pt.coords)
    # gradient components of the real scalars, before metric inversion:
    # Re(p qbar): conj(d(p qbar + pbar q)/dz) = q conj(dp) + p conj(dq)
    g1 = qv * np.conj(dp) + pv * np.conj(dq)
    # |q|^2: 2 q conj(dq)
    g2 = 2.0 * qv * np.conj(dq)
    w = abs(qv) ** 2 * g1 - np.real(pv * np.conj(qv)) * g2
    w = np.conj(np.linalg.solve(M, np.conj(w)))
    return TangentVector(pt, w)
