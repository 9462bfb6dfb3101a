"""Toroidal Kaehler metric perturbation: the f_lambda potential family, the
compactly supported potential R, its closed-form complex Hessian, and a
positivity/region certification sweep.

The perturbed form is  omega = omega_1 + ddbar R  with

    R(z) = sum_i rho_c(|zhat^i|/a_i) * (f_{lambda_i}(|z^i|^2) - |z^i|^2),

where zhat^i is z with the i-th coordinate removed.  Inside the ball of
radius R1 the form equals diag(lambda); outside radius R2 it equals the
flat base.  All derivatives of f_lambda and the cutoffs are closed-form
(Chebyshev series), never numerical.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.polynomial import chebyshev as _cheb

from .cutoffs import CutoffProfile


class NotPositive(Exception):
    """Perturbed form lost positive definiteness at the queried point."""


_TRANSITION_DEGREE = 240


@lru_cache(maxsize=64)
def _flambda_cache(lam: float, a: float):
    """Per-(lambda, a) closed-form data for f_lambda.

    Returns (c1, c2, r_lo, r_hi, cheb coeffs of the transition
    antiderivative T in tau, xi_lo, xi_hi) with T(r) = int_{r_lo}^r f'.
    """
    prof = CutoffProfile(0.5)  # the unit bump rho is profile-independent
    I_rho = prof.rho_total
    if lam == 1.0:
        return (0.0, 0.0, 0.0, 0.0, None, 0.0, 0.0, I_rho)
    c2 = np.sign(lam - 1.0) * 2.0 / I_rho
    d = abs(lam - 1.0)
    r_lo = a**2 * np.exp(-2.0 * d)
    r_hi = a**2 * np.exp(2.0 * d)
    xi_lo, xi_hi = np.log(r_lo), np.log(r_hi)

    def fprime(r):
        u = (np.log(r) - 2.0 * np.log(a)) / (lam - 1.0)
        P = prof.rho_int(u)
        if lam > 1.0:
            return lam - (lam - 1.0) * P / I_rho
        return lam + (1.0 - lam) * (1.0 - P / I_rho)

    half = (xi_hi - xi_lo) / 2.0
    mid = (xi_hi + xi_lo) / 2.0

    def integrand(tau):
        xi = mid + half * tau
        r = np.exp(xi)
        return fprime(r) * r * half

    coeffs = _cheb.chebinterpolate(integrand, _TRANSITION_DEGREE)
    Tcoeffs = _cheb.chebint(coeffs, lbnd=-1.0)
    T_hi = float(_cheb.chebval(1.0, Tcoeffs))
    c1 = r_hi - lam * r_lo - T_hi
    return (c1, c2, r_lo, r_hi, tuple(Tcoeffs), xi_lo, xi_hi, I_rho)


def f_lambda(r, lam, a, with_second=False):
    """f_lambda(r) and derivative(s).

    f' = lambda for r <= a^2 e^{-2|lam-1|}, monotone across the transition
    band, and f(r) = r exactly for r >= a^2 e^{2|lam-1|}.  Returns
    (f, f') or (f, f', f'').
    """
    lam = float(lam)
    a = float(a)
    if lam <= 0 or a <= 0:
        raise ValueError("need lambda > 0 and a > 0")
    r = float(r)
    if r < 0:
        raise ValueError("need r >= 0")
    c1, c2, r_lo, r_hi, Tc, xi_lo, xi_hi, I_rho = _flambda_cache(lam, a)
    if lam == 1.0:
        out = (r, 1.0, 0.0)
        return out if with_second else out[:2]
    prof = CutoffProfile(0.5)
    if r <= r_lo:
        out = (c1 + lam * r, lam, 0.0)
        return out if with_second else out[:2]
    if r >= r_hi:
        out = (r, 1.0, 0.0)
        return out if with_second else out[:2]
    u = (np.log(r) - 2.0 * np.log(a)) / (lam - 1.0)
    P = prof.rho_int(u)
    if lam > 1.0:
        fp = lam - (lam - 1.0) * P / I_rho
    else:
        fp = lam + (1.0 - lam) * (1.0 - P / I_rho)
    tau = (2.0 * np.log(r) - (xi_hi + xi_lo)) / (xi_hi - xi_lo)
    T = float(_cheb.chebval(tau, np.asarray(Tc)))
    f = c1 + lam * r_lo + T
    if not with_second:
        return f, float(fp)
    fpp = -c2 * float(prof.rho(u)) / (2.0 * r)
    return f, float(fp), float(fpp)


@dataclass(frozen=True)
class ToroidalParams:
    """Per-axis parameters of the perturbation."""

    lambdas: tuple
    a: tuple
    eps: tuple

    def __post_init__(self):
        lam = tuple(float(x) for x in np.atleast_1d(self.lambdas))
        n = len(lam)
        a = np.atleast_1d(self.a)
        e = np.atleast_1d(self.eps)
        if len(a) == 1:
            a = np.repeat(a, n)
        if len(e) == 1:
            e = np.repeat(e, n)
        if len(a) != n or len(e) != n:
            raise ValueError("parameter lengths disagree")
        if any(x <= 0 for x in lam) or any(a <= 0) or any(e <= 0) or any(e >= 1):
            raise ValueError("need lambda, a > 0 and 0 < eps < 1")
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "a", tuple(float(x) for x in a))
        object.__setattr__(self, "eps", tuple(float(x) for x in e))

    @property
    def n(self):
        return len(self.lambdas)

    @property
    def R1(self) -> float:
        return min(
            ai * np.exp(-abs(li - 1.0)) for li, ai in zip(self.lambdas, self.a)
        )

    @property
    def R2(self) -> float:
        return max(
            max(ai * np.exp(abs(li - 1.0)), ai / ei)
            for li, ai, ei in zip(self.lambdas, self.a, self.eps)
        )

    def constants(self):
        """(c1_i, c2_i) per axis."""
        out = []
        for li, ai in zip(self.lambdas, self.a):
            c1, c2 = _flambda_cache(li, ai)[:2]
            out.append((c1, c2))
        return out


def _axis_profiles(params: ToroidalParams):
    return [CutoffProfile(e) for e in params.eps]


def potential_R(z, params: ToroidalParams, cutoff=None) -> float:
    """The compactly supported Kaehler potential perturbation R(z)."""
    z = np.asarray(z, dtype=complex)
    profiles = _axis_profiles(params)
    total = 0.0
    for i in range(params.n):
        u = abs(z[i]) ** 2
        v = np.sqrt(max(float(np.vdot(z, z).real) - u, 0.0))
        A = float(profiles[i].rho_c(v / params.a[i]))
        if A == 0.0:
            continue
        f, _ = f_lambda(u, params.lambdas[i], params.a[i])
        total += A * (f - u)
    return float(total)


def omega_perturbed(z, params: ToroidalParams, cutoff=None, base=None):
    """Matrix of omega = base + ddbar R at z (closed-form Hessian).

    base defaults to the flat identity.  Raises NotPositive if the result
    is not positive definite at z.
    """
    z = np.asarray(z, dtype=complex)
    n = len(z)
    if n != params.n:
        raise ValueError("dimension mismatch")
    H = np.eye(n, dtype=complex) if base is None else np.array(base, dtype=complex)
    profiles = _axis_profiles(params)
    r2 = float(np.vdot(z, z).real)
    for i in range(n):
        ai = params.a[i]
        u = abs(z[i]) ** 2
        v = np.sqrt(max(r2 - u, 0.0))
        A = float(profiles[i].rho_c(v / ai))
        Ap = float(profiles[i].rho_c_d1(v / ai)) / ai
        App = float(profiles[i].rho_c_d2(v / ai)) / ai**2
        if A == 0.0 and Ap == 0.0 and App == 0.0:
            continue
        f, fp, fpp = f_lambda(u, params.lambdas[i], ai, with_second=True)
        g = f - u
        gp = fp - 1.0
        gpp = fpp
        H[i, i] += A * (gp + u * gpp)
        if (Ap != 0.0 or App != 0.0) and v > 0.0:
            idx = [j for j in range(n) if j != i]
            zi = z[idx]
            dv = np.conj(zi) / (2.0 * v)  # d v / d z_j for j != i
            # mixed (i, k) and (j, i) entries
            H[i, idx] += Ap * np.conj(dv) * gp * np.conj(z[i])
            H[idx, i] += Ap * dv * gp * z[i]
            # (j, k) block, j,k != i
            block = g * (
                App * np.outer(dv, np.conj(dv))
                + Ap * (np.eye(n - 1) / (2.0 * v) - np.outer(zi.conj(), zi) / (4.0 * v**3))
            )
            H[np.ix_(idx, idx)] += block
    mineig = float(np.linalg.eigvalsh((H + H.conj().T) / 2.0).min())
    if mineig <= 0.0:
        raise NotPositive(f"min eigenvalue {mineig:.3e} <= 0 at |z| = {np.sqrt(r2):.4g}")
    return H


def certify_toroidal(params: ToroidalParams, grid=10_000, seed=0, cutoff=None):
    """Sweep report: positivity margin, region-identity residuals, constants.

    PASS iff the form is positive definite at every sampled point and both
    region identities hold to 1e-12.
    """
    rng = np.random.default_rng(seed)
    n = params.n
    R1, R2 = params.R1, params.R2

    def sample_shell(rmin, rmax, count):
        w = rng.normal(size=(count, 2 * n))
        w /= np.linalg.norm(w, axis=1)[:, None]
        radii = rng.uniform(rmin, rmax, size=count)
        pts = (w * radii[:, None]).view(complex)
        return pts

    inner = sample_shell(0.0, R1, max(grid // 10, 32))
    outer = sample_shell(R2, 2.0 * R2, max(grid // 10, 32))
    trans = sample_shell(R1, R2, grid)

    lam_mat = np.diag(params.lambdas).astype(complex)
    inner_res = 0.0
    outer_res = 0.0
    min_eig = np.inf
    positive = True
    try:
        for z in inner:
            H = omega_perturbed(z, params)
            inner_res = max(inner_res, float(np.abs(H - lam_mat).max()))
        for z in outer:
            H = omega_perturbed(z, params)
            outer_res = max(outer_res, float(np.abs(H - np.eye(n)).max()))
        for z in trans:
            H = omega_perturbed(z, params)
            ev = float(np.linalg.eigvalsh((H + H.conj().T) / 2.0).min())
            min_eig = min(min_eig, ev)
    except NotPositive as exc:
        positive = False
        min_eig = float(str(exc).split()[2]) if min_eig is np.inf else min_eig

    floor = min(min(params.lambdas), 0.5)
    eps_max = max(params.eps)
    measured_C = max(0.0, floor - min_eig) / eps_max if np.isfinite(min_eig) else np.inf
    consts = params.constants()
    prof_bounds = [CutoffProfile(e).c_measured for e in params.eps]
    report = {
        "n": n,
        "lambdas": list(params.lambdas),
        "a": list(params.a),
        "eps": list(params.eps),
        "R1": R1,
        "R2": R2,
        "min_eigenvalue": None if min_eig is np.inf else min_eig,
        "inner_residual": inner_res,
        "outer_residual": outer_res,
        "eig_floor_min_lambda_half": floor,
        "measured_C_eps": measured_C,
        "c1": [c[0] for c in consts],
        "c2": [c[1] for c in consts],
        "cutoff_derivative_bounds": prof_bounds,
        "samples": {"inner": len(inner), "outer": len(outer), "transition": len(trans)},
        "positive": positive,
        "pass": bool(positive and inner_res <= 1e-12 and outer_res <= 1e-12),
    }
    return report


def hessian_fd(z, params: ToroidalParams, step=1e-4):
    """Central finite-difference ddbar R (oracle for the closed form).

    Uses  d2R/dz_j dzbar_k = (Rxx + Ryy + i Rxy - i Ryx)/4  on the real
    coordinate pairs of z_j, z_k.
    """
    z = np.asarray(z, dtype=complex)
    n = len(z)

    def R(w):
        return potential_R(w, params)

    def second(da, db):
        if np.array_equal(da, db):
            return (R(z + da) - 2.0 * R(z) + R(z - da)) / step**2
        return (
            R(z + da + db) - R(z + da - db) - R(z - da + db) + R(z - da - db)
        ) / (4.0 * step**2)

    def unit(j, imag):
        d = np.zeros(n, dtype=complex)
        d[j] = (1.0j if imag else 1.0) * step
        return d

    H = np.zeros((n, n), dtype=complex)
    for j in range(n):
        for k in range(n):
            rxx = second(unit(j, False), unit(k, False))
            ryy = second(unit(j, True), unit(k, True))
            rxy = second(unit(j, False), unit(k, True))
            ryx = second(unit(j, True), unit(k, False))
            H[j, k] = (rxx + ryy + 1.0j * rxy - 1.0j * ryx) / 4.0
    return H
