"""Adaptive integration of V = grad f / |grad f|^2 with conservation control.

The flow is parametrized by t = Re(s): ds(V) = 1 holds identically, Im(s)
is conserved, and every accepted Runge-Kutta step is followed by a Newton
projection restoring (Re s = scheduled value, Im s = initial value) along
the gradient direction.  This kills secular drift of the two quantities the
flow is exactly characterized by.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import AffinePoint, CriticalPoint, MetricField
from .poly import MeromorphicPencil, PolePoint
from . import kernels


class CriticalPointHit(Exception):
    pass


class StepUnderflow(Exception):
    pass


class MaxStepsExceeded(Exception):
    pass


class StandoffViolation(Exception):
    """Trajectory entered the standoff radius of X_inv; aborted with data."""

    def __init__(self, msg, trajectory=None):
        super().__init__(msg)
        self.trajectory = trajectory


@dataclass(frozen=True)
class FlowOptions:
    rtol: float = 1e-9
    atol: float = 1e-12
    dt_init: float = 1e-3
    max_steps: int = 100_000
    projection_tol: float = 1e-11
    standoff_radius: float = 1e-6
    fixed_step: float | None = None
    newton_max: int = 10
    store_every: int = 1

    def __post_init__(self):
        if self.rtol <= 0 or self.atol <= 0 or self.projection_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_steps <= 0:
            raise ValueError("max_steps must be positive")


@dataclass
class Trajectory:
    """Time-stamped samples (t = Re s, point) plus drift diagnostics."""

    samples: list = field(default_factory=list)  # [(t, AffinePoint)]
    im_s0: float = 0.0
    max_im_drift: float = 0.0
    max_level_residual: float = 0.0
    max_ds_error: float = 0.0
    min_dist_xinv: float = np.inf
    min_rho: float = np.inf
    n_steps: int = 0
    seed_key: object = None

    @property
    def start(self):
        return self.samples[0][1]

    @property
    def end(self):
        return self.samples[-1][1]

    def times(self):
        return np.array([t for t, _ in self.samples])

    def to_json(self):
        return {
            "samples": [
                {"t": t, "point": pt.to_json()} for t, pt in self.samples
            ],
            "diagnostics": {
                "im_s0": self.im_s0,
                "max_im_drift": self.max_im_drift,
                "max_level_residual": self.max_level_residual,
                "max_ds_error": self.max_ds_error,
                "min_dist_xinv": None
                if not np.isfinite(self.min_dist_xinv)
                else self.min_dist_xinv,
                "min_rho": None if not np.isfinite(self.min_rho) else self.min_rho,
                "n_steps": self.n_steps,
            },
        }


def _monomial_signs(pencil: MeromorphicPencil):
    """Exponent-sign vector for single-monomial p and q, else None."""
    if len(pencil.p.terms) != 1 or len(pencil.q.terms) != 1:
        return None
    pe = pencil.p.terms[0][1]
    qe = pencil.q.terms[0][1]
    if any(e not in (0, 1) for e in pe) or any(e not in (0, 1) for e in qe):
        return None
    if any(a and b for a, b in zip(pe, qe)):
        return None
    return np.array([1 if a else (-1 if b else 0) for a, b in zip(pe, qe)], dtype=float)


def dist_to_xinv(pencil, z):
    """Distance to X_inv = {p = 0} cap {q = 0}; exact for monomial pencils."""
    sig = _monomial_signs(pencil)
    if sig is None:
        return np.inf
    num = np.abs(z[sig > 0]) ** 2
    den = np.abs(z[sig < 0]) ** 2
    if len(num) == 0 or len(den) == 0:
        return np.inf
    return float(np.sqrt(num.min() + den.min()))


def _rho_weighted(pencil, z):
    """rho = sum lambda_i |z_i|^2 with equal group weights (plus passive |z|^2)."""
    sig = _monomial_signs(pencil)
    if sig is None:
        return np.inf
    m = int(np.sum(sig > 0))
    n = int(np.sum(sig < 0))
    if m == 0 or n == 0:
        return np.inf
    lam = np.where(sig > 0, 1.0 / m, np.where(sig < 0, 1.0 / n, 1.0))
    return float(np.sum(lam * np.abs(z) ** 2))


class _Field:
    """RHS evaluator; dispatches to the fast kernel when available."""

    def __init__(self, pencil, metric, chart):
        self.pencil = pencil
        self.metric = metric
        self.chart = chart
        sig = _monomial_signs(pencil)
        self.signs = sig
        self.fast = (
            sig is not None and metric.kind in ("flat",) and chart is None
        )

    def s_ds(self, z):
        if self.signs is not None and self.chart is None:
            return kernels.monomial_s_ds(z, self.signs)
        return self.pencil.s_and_grad(z, self.chart)

    def V(self, z):
        """Normalized field V = grad f / |grad f|^2 as complex components."""
        if self.fast:
            return kernels.monomial_V_flat(z, self.signs)
        s, ds = self.s_ds(z)
        M = self.metric.matrix(z)
        g = np.conj(np.linalg.solve(M, ds))
        q = float(np.real(ds @ g))
        if q < 1e-20:
            raise CriticalPoint(f"|grad f|^2 = {q:.3e}")
        return g / q

    def grad(self, z):
        s, ds = self.s_ds(z)
        M = self.metric.matrix(z)
        return np.conj(np.linalg.solve(M, ds))


# Dormand-Prince 5(4) tableau
_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)


def _dp_step(f, z, h):
    k = [f(z)]
    for i in range(1, 7):
        zi = z + h * sum(a * kk for a, kk in zip(_DP_A[i], k))
        k.append(f(zi))
    z5 = z + h * sum(b * kk for b, kk in zip(_DP_B5, k))
    z4 = z + h * sum(b * kk for b, kk in zip(_DP_B4, k))
    return z5, z4


def _project(fld, z, s_target, tol, itmax):
    """Newton correction along the gradient direction restoring s = s_target."""
    for _ in range(itmax):
        s, ds = fld.s_ds(z)
        err = s_target - s
        if abs(err) <= tol:
            return z, abs(err)
        g = np.conj(ds) if fld.fast else fld.grad(z)
        denom = ds @ g
        if abs(denom) < 1e-30:
            raise CriticalPointHit("projection hit a critical point")
        z = z + (err / denom) * g
    s, _ = fld.s_ds(z)
    return z, abs(s_target - s)


def integrate(
    pencil,
    metric: MetricField,
    start: AffinePoint,
    t_target: float,
    opts: FlowOptions = FlowOptions(),
    seed_key=None,
) -> Trajectory:
    """Flow the start point to Re s = t_target along V, projecting each step.

    The final point satisfies |s - (t_target + i Im s_0)| <= projection_tol.
    Raises CriticalPointHit / StepUnderflow / MaxStepsExceeded /
    StandoffViolation.
    """
    chart = start.chart
    fld = _Field(pencil, metric, chart)
    if fld.fast and opts.fixed_step is None:
        return _integrate_kernel(pencil, fld, metric, start, t_target, opts, seed_key)
    return _integrate_py(pencil, fld, metric, start, t_target, opts, seed_key)


def _integrate_kernel(pencil, fld, metric, start, t_target, opts, seed_key):
    z0 = np.asarray(start.coords, dtype=complex)
    s0, _ = fld.s_ds(z0)
    out = kernels.integrate_monomial_flat(
        z0,
        fld.signs,
        float(s0.real),
        float(t_target),
        float(s0.imag),
        opts.rtol,
        opts.atol,
        opts.dt_init,
        opts.max_steps,
        opts.projection_tol,
        opts.newton_max,
        opts.standoff_radius,
    )
    status = out["status"]
    traj = Trajectory(im_s0=float(s0.imag), seed_key=seed_key)
    for t, zrow in zip(out["times"], out["points"]):
        traj.samples.append((float(t), AffinePoint(zrow.copy(), None)))
    traj.max_im_drift = out["max_im_drift"]
    traj.max_level_residual = out["max_level_residual"]
    traj.max_ds_error = out["max_ds_error"]
    traj.min_dist_xinv = out["min_dist_xinv"]
    traj.min_rho = out["min_rho"]
    traj.n_steps = out["n_steps"]
    if status == 1:
        raise MaxStepsExceeded(f"gave up after {traj.n_steps} steps")
    if status == 2:
        raise StepUnderflow("step size underflow")
    if status == 3:
        raise CriticalPointHit("|grad f|^2 under floor")
    if status == 4:
        raise StandoffViolation("entered standoff radius of X_inv", traj)
    return traj


def _integrate_py(pencil, fld, metric, start, t_target, opts, seed_key):
    z = np.asarray(start.coords, dtype=complex)
    s, ds = fld.s_ds(z)
    t = float(s.real)
    im0 = float(s.imag)
    traj = Trajectory(im_s0=im0, seed_key=seed_key)
    traj.samples.append((t, AffinePoint(z.copy(), start.chart)))
    traj.min_dist_xinv = dist_to_xinv(pencil, z)
    traj.min_rho = _rho_weighted(pencil, z)
    if t_target == t:
        return traj

    direction = 1.0 if t_target > t else -1.0
    h = direction * (opts.fixed_step or opts.dt_init)
    rhs = fld.V
    steps = 0
    while direction * (t_target - t) > 0:
        if steps >= opts.max_steps:
            raise MaxStepsExceeded(f"gave up after {steps} steps at t = {t:.6g}")
        if abs(h) < 1e-15 * max(1.0, abs(t_target)):
            raise StepUnderflow(f"step underflow at t = {t:.6g}")
        if direction * (t + h - t_target) > 0:
            h = t_target - t
        try:
            z5, z4 = _dp_step(rhs, z, h)
        except (CriticalPoint, PolePoint) as exc:
            raise CriticalPointHit(str(exc)) from exc
        if opts.fixed_step is None:
            scale = opts.atol + opts.rtol * np.maximum(np.abs(z), np.abs(z5))
            err = float(np.max(np.abs(z5 - z4) / scale))
            if err > 1.0:
                h *= max(0.2, 0.9 * err**-0.2)
                steps += 1
                continue
            h_next = h * min(5.0, max(0.2, 0.9 * err**-0.2 if err > 0 else 5.0))
        else:
            h_next = h
        t_sched = t + h
        z5, resid = _project(
            fld, z5, complex(t_sched, im0), opts.projection_tol, opts.newton_max
        )
        s_now, ds_now = fld.s_ds(z5)
        v_now = rhs(z5)
        traj.max_ds_error = max(traj.max_ds_error, abs(ds_now @ v_now - 1.0))
        traj.max_im_drift = max(traj.max_im_drift, abs(s_now.imag - im0))
        traj.max_level_residual = max(traj.max_level_residual, resid)
        traj.min_dist_xinv = min(traj.min_dist_xinv, dist_to_xinv(pencil, z5))
        traj.min_rho = min(traj.min_rho, _rho_weighted(pencil, z5))
        z = z5
        t = t_sched
        steps += 1
        traj.n_steps = steps
        if steps % opts.store_every == 0 or direction * (t_target - t) <= 0:
            traj.samples.append((t, AffinePoint(z.copy(), start.chart)))
        if traj.min_dist_xinv < opts.standoff_radius:
            raise StandoffViolation(
                f"within {opts.standoff_radius:g} of X_inv at t = {t:.6g}", traj
            )
        h = h_next
    if traj.samples[-1][0] != t:
        traj.samples.append((t, AffinePoint(z.copy(), start.chart)))
    return traj


def flow_level_set(pencil, metric, seeds, c, opts=FlowOptions()):
    """Flow seeds on {Re s = 0, Im s = 0} to X_c; returns list of Trajectory.

    Seeds may be AffinePoints or (key, AffinePoint) pairs; same-key seeds
    are expected to land on the same fiber image.  Seeds on X_inv are
    rejected.
    """
    out = []
    for item in seeds:
        key, pt = item if isinstance(item, tuple) else (None, item)
        if dist_to_xinv(pencil, pt.homogeneous() if pt.chart is not None else pt.coords) == 0.0:
            raise ValueError("seed lies on the base locus X_inv")
        out.append(integrate(pencil, metric, pt, c, opts, seed_key=key))
    return out


def standoff_diagnostic(trajectory: Trajectory, pencil) -> dict:
    """Report min of the weighted rho along a Case-1 trajectory.

    Collapse is flagged when rho dips below machine-meaningful positive
    bounds; stability under refinement is the caller's cross-check.
    """
    rhos = []
    for _, pt in trajectory.samples:
        z = pt.homogeneous() if pt.chart is not None else pt.coords
        rhos.append(_rho_weighted(pencil, z))
    rhos = np.array(rhos)
    finite = rhos[np.isfinite(rhos)]
    if len(finite) == 0:
        return {"min_rho": None, "collapse": None, "log_rho_span": None}
    min_rho = float(finite.min())
    initial = float(finite[0])
    collapse = bool(min_rho < 0.5 * initial) if initial > 0 else True
    return {
        "min_rho": min_rho,
        "initial_rho": initial,
        "collapse": collapse,
        "log_rho_span": float(np.log(finite.max()) - np.log(max(min_rho, 1e-300))),
    }
