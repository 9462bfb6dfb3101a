"""Non-degeneracy and hyperbolicity checks for homogeneous gradient fields.

The field V0 = r^{d-1} v0(theta) d/dtheta + r^d p0(theta) d/dr is sampled on
the unit sphere in ambient coordinates (no spherical charts): the radial part
is the real pairing with the position vector and v0 is the tangential rest.
The critical tori Z+/Z- are extracted by thresholding |v0/p0| on a random
grid and refining hits by projected gradient flow of f-hat; all derivative
forms are central differences with one Richardson step.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DegenerateForm(Exception):
    pass


class DegenerateHessian(Exception):
    pass


def _real_dot(a, b):
    return float(np.real(np.vdot(b, a)))


@dataclass(frozen=True)
class HomogeneousField:
    """Product-model field: f = Re(z_1 ... z_n) on C^(n+l), degree-n function.

    The flat gradient is degree d = n - 1 homogeneous; evaluation at 2z is
    2^d times the evaluation at z.
    """

    n: int
    l: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need n >= 2 active factors")

    @property
    def degree(self):
        return self.n - 1

    @property
    def ambient(self):
        return self.n + self.l

    def s(self, z):
        return np.prod(np.asarray(z)[: self.n])

    def f_hat(self, z):
        return float(np.real(self.s(z)))

    def V0(self, z):
        """Flat gradient of Re(s): components conj(ds)."""
        z = np.asarray(z, dtype=complex)
        ds = np.zeros(self.ambient, dtype=complex)
        zeros = [j for j in range(self.n) if z[j] == 0]
        if len(zeros) == 0:
            s = np.prod(z[: self.n])
            ds[: self.n] = s / z[: self.n]
        elif len(zeros) == 1:
            k = zeros[0]
            ds[k] = np.prod([z[j] for j in range(self.n) if j != k])
        return np.conj(ds)

    def radial_tangential(self, theta):
        """(p0, v0) at a unit vector theta."""
        theta = np.asarray(theta, dtype=complex)
        V = self.V0(theta)
        p0 = _real_dot(V, theta)
        v0 = V - p0 * theta
        return p0, v0

    def ratio(self, theta):
        """|v0| / |p0| (inf when the radial part vanishes)."""
        p0, v0 = self.radial_tangential(theta)
        nv = float(np.linalg.norm(v0))
        if p0 == 0.0:
            return np.inf
        return nv / abs(p0)


def sphere_sample(field, count, seed=0):
    rng = np.random.default_rng(seed)
    w = rng.normal(size=(count, 2 * field.ambient))
    w /= np.linalg.norm(w, axis=1)[:, None]
    return w.view(complex)


def _refine_to_z(field, theta, sign, tol=1e-6, itmax=400):
    """Projected gradient flow of f-hat toward the critical torus."""
    theta = np.asarray(theta, dtype=complex).copy()
    eta = 0.5
    for _ in range(itmax):
        p0, v0 = field.radial_tangential(theta)
        nv = np.linalg.norm(v0)
        if p0 != 0 and nv / abs(p0) < tol:
            return theta, True
        step = sign * eta * v0
        cand = theta + step
        cand = cand / np.linalg.norm(cand)
        fc = field.f_hat(cand)
        ft = field.f_hat(theta)
        if sign * (fc - ft) < 0:
            eta *= 0.5
            if eta < 1e-12:
                return theta, False
            continue
        theta = cand
    return theta, False


def z_sets(field: HomogeneousField, grid=20_000, threshold=1e-4, refine_tol=1e-6, seed=0):
    """Sampled Z+, Z-, Z0 point sets from a random sphere grid.

    Coarse hits (|v0/p0| below a grid-scaled threshold) are refined by
    projected gradient flow to |v0/p0| < refine_tol, then classified by the
    sign of p0.
    """
    pts = sphere_sample(field, grid, seed)
    zp, zm, z0 = [], [], []
    coarse = max(threshold, 0.35)  # random grids need a wide capture band
    for theta in pts:
        p0, v0 = field.radial_tangential(theta)
        if p0 == 0.0:
            continue
        if np.linalg.norm(v0) / abs(p0) >= coarse:
            continue
        sign = 1.0 if p0 > 0 else -1.0
        ref, ok = _refine_to_z(field, theta, sign, tol=refine_tol)
        if not ok:
            continue
        p0r, _ = field.radial_tangential(ref)
        if p0r > refine_tol:
            zp.append(ref)
        elif p0r < -refine_tol:
            zm.append(ref)
        else:
            z0.append(ref)
    return (
        np.array(zp).reshape(-1, field.ambient),
        np.array(zm).reshape(-1, field.ambient),
        np.array(z0).reshape(-1, field.ambient),
    )


def analytic_torus_points(field: HomogeneousField, sign, count=2000, seed=0):
    """Points of the analytic torus {|z_i|^2 = 1/n, s = +-1/n^{n/2}}."""
    rng = np.random.default_rng(seed)
    n = field.n
    phases = rng.uniform(0, 2 * np.pi, size=(count, n - 1))
    target = 0.0 if sign > 0 else np.pi
    last = target - phases.sum(axis=1)
    ph = np.column_stack([phases, last])
    z = np.exp(1j * ph) / np.sqrt(n)
    if field.l:
        z = np.column_stack([z, np.zeros((count, field.l), dtype=complex)])
    return z


def distance_to_torus(field: HomogeneousField, z, sign):
    """Exact Euclidean distance to the analytic torus.

    Reduces to maximizing sum a_k cos(delta_k) under sum delta_k = const,
    solved by bisection on the Lagrange multiplier.
    """
    z = np.asarray(z, dtype=complex)
    n = field.n
    a = np.abs(z[:n]) / np.sqrt(n)
    args = np.angle(z[:n])
    target = 0.0 if sign > 0 else np.pi
    deficit = (target - args.sum()) % (2 * np.pi)
    if deficit > np.pi:
        deficit -= 2 * np.pi
    if np.any(a < 1e-14):
        best = 2 * np.sum(a)  # degenerate: free phase on the zero coordinate
    else:
        sgn = np.sign(deficit) if deficit != 0 else 1.0

        # delta_k = asin(mu / a_k); find mu with sum delta_k = deficit
        def sum_delta(mu):
            x = np.clip(mu / a, -0.999999, 0.999999)
            return float(np.sum(np.arcsin(x)))

        mu_lo, mu_hi = 0.0, float(a.min()) * 0.999999
        for _ in range(200):
            mid = (mu_lo + mu_hi) / 2
            if sum_delta(mid) < abs(deficit):
                mu_lo = mid
            else:
                mu_hi = mid
        mu = (mu_lo + mu_hi) / 2
        delta = sgn * np.arcsin(np.clip(mu / a, -1, 1))
        best = 2 * np.sum(a * np.cos(delta))
    d2 = float(np.vdot(z, z).real) + 1.0 - best
    return float(np.sqrt(max(d2, 0.0)))


def directed_hausdorff_to_torus(field, samples, sign):
    if len(samples) == 0:
        return np.inf
    return max(distance_to_torus(field, s, sign) for s in samples)


def torus_coverage_gap(field, samples, sign, probe=400, seed=1):
    """Max over analytic-torus probes of the distance to the sampled cloud."""
    if len(samples) == 0:
        return np.inf
    torus = analytic_torus_points(field, sign, probe, seed)
    gaps = []
    for t in torus:
        d = np.linalg.norm(samples - t, axis=1).min()
        gaps.append(d)
    return float(max(gaps))


def _tangent_frame_pca(samples, theta, k=24):
    """Tangent directions of the sampled Z at theta by local PCA."""
    d = np.linalg.norm(samples - theta, axis=1)
    idx = np.argsort(d)[1 : k + 1]
    diffs = samples[idx] - theta
    # project to the sphere tangent space at theta
    diffs = diffs - np.real(diffs @ np.conj(theta))[:, None] * theta
    reals = np.column_stack([diffs.real, diffs.imag])
    _, svals, vt = np.linalg.svd(reals, full_matrices=False)
    return svals, vt


def normal_frame(field, samples, theta):
    """Orthonormal basis of the normal space of Z inside the sphere at theta.

    Built from local PCA of the sampled cloud: the leading dim(Z) principal
    directions are tangent to Z; the normal frame spans the orthogonal
    complement within the sphere tangent space.
    """
    amb = field.ambient
    z_dim = field.n - 1
    svals, vt = _tangent_frame_pca(samples, theta)
    tangent = [vt[i, :amb] + 1j * vt[i, amb:] for i in range(z_dim)]
    basis = [np.asarray(theta, dtype=complex)] + tangent
    frame = []
    rng = np.random.default_rng(0)
    candidates = [np.eye(amb, dtype=complex)[j] for j in range(amb)]
    candidates += [1j * np.eye(amb, dtype=complex)[j] for j in range(amb)]
    need = 2 * amb - 1 - z_dim
    for cand in candidates:
        v = cand.astype(complex)
        for b in basis + frame:
            v = v - np.real(np.vdot(b, v)) * b
        nv = np.linalg.norm(v)
        if nv > 1e-8:
            frame.append(v / nv)
        if len(frame) == need:
            break
    return frame


def normal_bilinear_form(field, theta, frame, step=1e-4):
    """Matrix <n1, n2> = n1 (v0/p0, n2) by central differences + Richardson.

    Hyperbolic verdict: all eigenvalue real parts strictly negative.
    """
    theta = np.asarray(theta, dtype=complex)

    def g(th, n2):
        p0, v0 = field.radial_tangential(th / np.linalg.norm(th))
        return _real_dot(v0 / p0, n2)

    k = len(frame)
    B = np.zeros((k, k))
    for i, n1 in enumerate(frame):
        for j, n2 in enumerate(frame):
            def deriv(h):
                return (g(theta + h * n1, n2) - g(theta - h * n1, n2)) / (2 * h)

            d1 = deriv(step)
            d2 = deriv(step / 2)
            B[i, j] = (4 * d2 - d1) / 3
    eig = np.linalg.eigvals(B)
    det = float(np.abs(np.linalg.det(B)))
    if det < 1e-10:
        raise DegenerateForm(f"|det| = {det:.3e}")
    return B, np.sort(eig.real)


def sphere_hessian(field, theta, frame, step=1e-4):
    """Hessian of f-hat restricted to the sphere, in the given frame."""
    theta = np.asarray(theta, dtype=complex)

    def f(th):
        th = th / np.linalg.norm(th)
        return field.f_hat(th)

    k = len(frame)
    H = np.zeros((k, k))
    for i in range(k):
        for j in range(i, k):
            if i == j:
                val = (f(theta + step * frame[i]) - 2 * f(theta) + f(theta - step * frame[i])) / step**2
            else:
                val = (
                    f(theta + step * (frame[i] + frame[j]))
                    - f(theta + step * (frame[i] - frame[j]))
                    - f(theta - step * (frame[i] - frame[j]))
                    + f(theta - step * (frame[i] + frame[j]))
                ) / (4 * step**2)
            H[i, j] = H[j, i] = val
    return H


def sphere_hessian_test(field, theta, frame, margin=0.05):
    """Verdict on the transverse Hessian sign at a Z sample.

    Returns (verdict, eigenvalues): "max" when negative definite (Z+),
    "min" when positive definite (Z-).  Raises DegenerateHessian otherwise.
    """
    H = sphere_hessian(field, theta, frame)
    eig = np.sort(np.linalg.eigvalsh(H))
    if eig[-1] < -margin:
        return "max", eig
    if eig[0] > margin:
        return "min", eig
    raise DegenerateHessian(f"transverse eigenvalues {eig}")


def geometric_hyperbolicity_margin(field, z_plus, z_minus, tube_radius, probes=200, seed=0):
    """min over tube samples of the sign-adjusted pairing with v0.

    For Z-: (e_-, v0) > 0; for Z+: -(e_+, v0) > 0.  PASS iff the min over
    both tubes is strictly positive.
    """
    rng = np.random.default_rng(seed)
    margins = []
    for samples, sign in ((z_plus, -1.0), (z_minus, +1.0)):
        if len(samples) == 0:
            continue
        idx = rng.integers(0, len(samples), size=probes)
        for i in idx:
            theta = samples[i]
            frame = normal_frame(field, samples, theta)
            coeff = rng.normal(size=len(frame))
            e = sum(c * f for c, f in zip(coeff, frame))
            e = e / np.linalg.norm(e) * tube_radius
            th = theta + e
            th = th / np.linalg.norm(th)
            p0, v0 = field.radial_tangential(th)
            margins.append(sign * _real_dot(v0, e))
    return float(min(margins)) if margins else np.inf


def hyperbolicity_report(n, grid=20_000, tube_radius=0.05, seed=0):
    """Full suite for local model II with n factors."""
    field = HomogeneousField(n)
    zp, zm, z0 = z_sets(field, grid, seed=seed)
    rep = {
        "n": n,
        "samples_plus": len(zp),
        "samples_minus": len(zm),
        "samples_z0": len(z0),
        "hausdorff_plus": directed_hausdorff_to_torus(field, zp, +1),
        "hausdorff_minus": directed_hausdorff_to_torus(field, zm, -1),
    }
    eig_real = []
    verdicts = []
    rng = np.random.default_rng(seed + 1)
    for i in rng.integers(0, len(zp), size=min(8, len(zp))):
        frame = normal_frame(field, zp, zp[i])
        B, er = normal_bilinear_form(field, zp[i], frame)
        eig_real.extend(er.tolist())
        v, _ = sphere_hessian_test(field, zp[i], frame)
        verdicts.append(v)
    rep["bilinear_eig_real_max"] = max(eig_real) if eig_real else None
    rep["hessian_verdicts_plus"] = verdicts
    rep["geometric_margin"] = geometric_hyperbolicity_margin(
        field, zp, zm, tube_radius, seed=seed
    )
    margins = []
    for radius in (tube_radius, tube_radius / 2, tube_radius / 4, tube_radius / 8):
        margins.append(
            geometric_hyperbolicity_margin(field, zp, zm, radius, seed=seed)
        )
    radii = [tube_radius / 2**k for k in range(4)]
    slope = float(np.polyfit(np.log(radii), np.log(margins), 1)[0])
    rep["margin_radius_slope"] = slope
    rep["margins_by_radius"] = dict(zip(map(float, radii), margins))
    rep["pass"] = bool(
        rep["hausdorff_plus"] < 1e-3
        and rep["hausdorff_minus"] < 1e-3
        and (rep["bilinear_eig_real_max"] or 0) < 0
        and rep["geometric_margin"] > 0
        and abs(slope - 2.0) < 0.2
    )
    return rep
