"""Pure-Python reference implementations of the hot kernels.

Mirrors the API of the compiled extension ``syzflow._core``; selected at
import time by :mod:`syzflow.kernels` when the extension is unavailable or
disabled.  Keep the two in lock step: tests assert their outputs agree.
"""
from __future__ import annotations

import numpy as np

from .poly import IndeterminatePoint, PolePoint


class _CriticalFlat(Exception):
    pass


def monomial_s_ds(z, signs):
    """s = prod z_j^{sign_j} and its holomorphic gradient.

    Handles zeros in the numerator group explicitly; raises PolePoint on a
    denominator zero and IndeterminatePoint on the base locus.
    """
    z = np.asarray(z, dtype=complex)
    num_zero = [j for j, s in enumerate(signs) if s > 0 and z[j] == 0]
    den_zero = [j for j, s in enumerate(signs) if s < 0 and z[j] == 0]
    if den_zero:
        if num_zero:
            raise IndeterminatePoint("p = q = 0")
        raise PolePoint("q = 0")
    ds = np.zeros(len(z), dtype=complex)
    if len(num_zero) >= 2:
        return 0.0j, ds
    if len(num_zero) == 1:
        k = num_zero[0]
        prod = 1.0 + 0.0j
        for j, sj in enumerate(signs):
            if j == k or sj == 0:
                continue
            prod = prod * z[j] if sj > 0 else prod / z[j]
        ds[k] = prod
        return 0.0j, ds
    s = 1.0 + 0.0j
    for j, sj in enumerate(signs):
        if sj > 0:
            s = s * z[j]
        elif sj < 0:
            s = s / z[j]
    for j, sj in enumerate(signs):
        if sj != 0:
            ds[j] = sj * s / z[j]
    return s, ds


def monomial_V_flat(z, signs):
    """V = grad f / |grad f|^2 for the monomial pencil under the flat metric."""
    s, ds = monomial_s_ds(z, signs)
    q = float(np.real(ds @ np.conj(ds)))
    if q < 1e-20:
        from .geometry import CriticalPoint

        raise CriticalPoint(f"|grad f|^2 = {q:.3e}")
    return np.conj(ds) / q


_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)


def integrate_monomial_flat(
    z0,
    signs,
    t0,
    t_target,
    im0,
    rtol,
    atol,
    dt_init,
    max_steps,
    proj_tol,
    newton_max,
    standoff,
):
    """Adaptive DP54 with per-step projection, monomial pencil, flat metric.

    Returns a dict with sample times/points, drift diagnostics and a status
    code: 0 ok, 1 max steps, 2 step underflow, 3 critical point, 4 standoff.
    """
    z = np.asarray(z0, dtype=complex).copy()
    signs = np.asarray(signs, dtype=float)
    n = len(z)
    num_idx = np.where(signs > 0)[0]
    den_idx = np.where(signs < 0)[0]
    m_num, m_den = len(num_idx), len(den_idx)

    def dist_xinv(w):
        if m_num == 0 or m_den == 0:
            return np.inf
        return float(
            np.sqrt(
                np.min(np.abs(w[num_idx]) ** 2) + np.min(np.abs(w[den_idx]) ** 2)
            )
        )

    def rho_weighted(w):
        if m_num == 0 or m_den == 0:
            return np.inf
        lam = np.where(signs > 0, 1.0 / m_num, np.where(signs < 0, 1.0 / m_den, 1.0))
        return float(np.sum(lam * np.abs(w) ** 2))

    def V(w):
        s, ds = monomial_s_ds(w, signs)
        q = float(np.real(ds @ np.conj(ds)))
        if q < 1e-20:
            raise _CriticalFlat()
        return np.conj(ds) / q

    times = [t0]
    points = [z.copy()]
    max_im = 0.0
    max_res = 0.0
    max_ds = 0.0
    min_dx = dist_xinv(z)
    min_rho = rho_weighted(z)
    status = 0
    steps = 0
    t = t0
    direction = 1.0 if t_target > t0 else -1.0
    h = direction * dt_init

    if t_target != t0:
        while direction * (t_target - t) > 0:
            if steps >= max_steps:
                status = 1
                break
            if abs(h) < 1e-15 * max(1.0, abs(t_target)):
                status = 2
                break
            if direction * (t + h - t_target) > 0:
                h = t_target - t
            try:
                k = [V(z)]
                for i in range(1, 7):
                    zi = z + h * sum(a * kk for a, kk in zip(_A[i], k))
                    k.append(V(zi))
            except _CriticalFlat:
                status = 3
                break
            z5 = z + h * sum(b * kk for b, kk in zip(_B5, k))
            z4 = z + h * sum(b * kk for b, kk in zip(_B4, k))
            scale = atol + rtol * np.maximum(np.abs(z), np.abs(z5))
            err = float(np.max(np.abs(z5 - z4) / scale))
            if err > 1.0:
                h *= max(0.2, 0.9 * err**-0.2)
                steps += 1
                continue
            h_next = h * min(5.0, max(0.2, 0.9 * err**-0.2 if err > 0 else 5.0))
            t_sched = t + h
            target = complex(t_sched, im0)
            resid = np.inf
            for _ in range(newton_max):
                s, ds = monomial_s_ds(z5, signs)
                errc = target - s
                resid = abs(errc)
                if resid <= proj_tol:
                    break
                denom = float(np.real(ds @ np.conj(ds)))
                if denom < 1e-30:
                    status = 3
                    break
                z5 = z5 + (errc / denom) * np.conj(ds)
            if status:
                break
            s, ds = monomial_s_ds(z5, signs)
            q = float(np.real(ds @ np.conj(ds)))
            max_ds = max(max_ds, abs((ds @ (np.conj(ds) / q)) - 1.0))
            max_im = max(max_im, abs(s.imag - im0))
            max_res = max(max_res, resid)
            min_dx = min(min_dx, dist_xinv(z5))
            min_rho = min(min_rho, rho_weighted(z5))
            z = z5
            t = t_sched
            steps += 1
            times.append(t)
            points.append(z.copy())
            if min_dx < standoff:
                status = 4
                break
            h = h_next

    return {
        "status": status,
        "times": np.array(times),
        "points": np.array(points).reshape(len(times), n),
        "max_im_drift": max_im,
        "max_level_residual": max_res,
        "max_ds_error": max_ds,
        "min_dist_xinv": min_dx,
        "min_rho": min_rho,
        "n_steps": steps,
    }
