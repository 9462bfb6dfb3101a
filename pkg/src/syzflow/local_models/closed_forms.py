"""Closed-form invariants and fibration coordinates of the monomial models.

The model is s = (z_1...z_m)/(z_{m+1}...z_{m+n}) on C^{m+n+l}.  Conserved
along the flow of V are |z_i|^2 - |z_j|^2 within a group and
|z_i|^2 + |z_j|^2 across groups; on {Im s = 0} all coordinate phases are
frozen, which is what makes the invariant extensions below work.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..poly import monomial_pencil


class OffVariety(Exception):
    pass


class ZeroCoordinate(Exception):
    pass


SEAM_TOL = 1e-13


@dataclass(frozen=True)
class ModelSpec:
    """m numerator factors, n denominator factors, l passive coordinates."""

    m: int
    n: int = 0
    l: int = 0

    def __post_init__(self):
        if self.m < 1 or self.n < 0 or self.l < 0:
            raise ValueError("need m >= 1, n >= 0, l >= 0")

    @property
    def dim(self):
        return self.m + self.n + self.l

    def pencil(self):
        return monomial_pencil(self.m, self.n, self.l)

    def groups(self):
        num = list(range(self.m))
        den = list(range(self.m, self.m + self.n))
        return num, den


def invariants_of_model(spec: ModelSpec, z):
    """All pairwise rho_ij: differences within a group, sums across groups.

    Returns a list of (label, value); labels are "d:i,j" and "s:i,j" with
    1-based indices.
    """
    z = np.asarray(z, dtype=complex)
    if len(z) != spec.dim:
        raise ValueError("dimension mismatch")
    num, den = spec.groups()
    sq = np.abs(z) ** 2
    out = []
    for grp in (num, den):
        for a in range(len(grp)):
            for b in range(a + 1, len(grp)):
                i, j = grp[a], grp[b]
                out.append((f"d:{i + 1},{j + 1}", float(sq[i] - sq[j])))
    for i in num:
        for j in den:
            out.append((f"s:{i + 1},{j + 1}", float(sq[i] + sq[j])))
    return out


def phi_pair(z, c):
    """(phi_1, phi_2) on X_c cap {Im s = 0} for the baby model s = z2 z3 / z1.

    phi_1 = |z2|^2 - |z3|^2 and phi_2 = Re(z1) sqrt(1 + |z_min/z1|^2) with
    z_min the smaller-modulus of z2, z3; the two branches agree on the seam
    |z2| = |z3| and both are averaged there.
    """
    z = np.asarray(z, dtype=complex)
    if len(z) != 3:
        raise ValueError("the baby model lives on C^3")
    if abs(z[1] * z[2] - c * z[0]) > 1e-10 * max(1.0, abs(c), float(np.abs(z).max()) ** 2):
        raise OffVariety("z2 z3 != c z1")
    r2, r3 = abs(z[1]), abs(z[2])
    phi1 = r2**2 - r3**2
    if abs(r2 - r3) < SEAM_TOL:
        b2 = z[0].real * np.sqrt(1.0 + (r2 / abs(z[0])) ** 2)
        b3 = z[0].real * np.sqrt(1.0 + (r3 / abs(z[0])) ** 2)
        phi2 = 0.5 * (b2 + b3)
    else:
        rmin = min(r2, r3)
        phi2 = z[0].real * np.sqrt(1.0 + (rmin / abs(z[0])) ** 2)
    return float(phi1), float(phi2)


def extended_coordinates(variant, z, minimizing_index=None):
    """Invariant extensions Z_i of the hyperplane coordinates.

    variant "I": s = (z_1...z_n)/z_0 on C^{n+1} with z ordered (z_0, ..., z_n);
    Z_0 carries the +|z_m|^2 extension, the first-group Z_i the -|z_m|^2 one.
    variant "II": s = z_1...z_n on C^n; only the minus extensions.
    ``minimizing_index`` is the index of the smallest first-group modulus
    (computed when omitted).  Continuity across minimizer switches comes from
    averaging exact ties.
    """
    z = np.asarray(z, dtype=complex)
    if variant not in ("I", "II"):
        raise ValueError("variant must be 'I' or 'II'")
    if variant == "I":
        group = list(range(1, len(z)))
        plus = [0]
    else:
        group = list(range(len(z)))
        plus = []
    mods = np.abs(z[group])
    if minimizing_index is None:
        m = group[int(np.argmin(mods))]
    else:
        m = minimizing_index
        if abs(z[m]) > mods.min() + SEAM_TOL:
            raise ValueError("minimizing_index does not minimize the group modulus")
    rm = abs(z[m])
    out = np.zeros(len(z), dtype=complex)
    for i in plus:
        if z[i] == 0:
            if rm == 0:
                out[i] = 0.0
                continue
            raise ZeroCoordinate(f"z_{i} = 0: phase factor undefined")
        out[i] = z[i] / abs(z[i]) * np.sqrt(abs(z[i]) ** 2 + rm**2)
    for i in group:
        if i == m:
            out[i] = 0.0
            continue
        if z[i] == 0:
            out[i] = 0.0
            continue
        out[i] = z[i] / abs(z[i]) * np.sqrt(max(abs(z[i]) ** 2 - rm**2, 0.0))
    return out


def section_coordinates(z, c):
    """Fibration image in real-locus section coordinates (rho_1, rho_2).

    The section is the real positive locus of X_c in the chart (z_1, z_2)
    (z_3 = c z_1 / z_2); the pair (rho_1, rho_2) is the unique section point
    with the same (phi_1, phi_2) as z.  This is the map whose directional
    derivatives are merely Lipschitz across the seam |z_2| = |z_3| away from
    the real locus.  Requires cos(theta_1) > 0.
    """
    z = np.asarray(z, dtype=complex)
    phi1, phi2 = phi_pair(z, c)
    if phi2 <= 0:
        raise ValueError("section coordinates need Re(z1) > 0")

    def solve_caseA(p1, p2):
        # section with rho_2 <= rho_3, i.e. phi_1 <= 0:
        # rho_2^2 - c^2 rho_1^2 / rho_2^2 = p1, rho_1^2 + rho_2^2 = p2^2
        t = 0.5 * ((p1 - c**2) + np.sqrt((c**2 - p1) ** 2 + 4.0 * c**2 * p2**2))
        rho2 = np.sqrt(t)
        rho1 = np.sqrt(max(p2**2 - t, 0.0))
        return rho1, rho2

    if phi1 <= 0:
        return solve_caseA(phi1, phi2)
    # swap z_2 and z_3: phi_1 flips sign, phi_2 unchanged; then rho_2 comes
    # from rho_3 = c rho_1 / rho_2 of the swapped solution
    r1s, r2s = solve_caseA(-phi1, phi2)
    return r1s, c * r1s / r2s


def lipschitz_probe(c, seam_theta1, seam_radius=None, offsets=None, refinements=4):
    """One-sided derivative gap of the fibration across the seam |z2| = |z3|.

    Probes the section-coordinate map along the seam-transversal direction
    (r_2, r_3) = (r + u, r - u) at fixed phases, theta_1 = seam_theta1.
    Reports, per refinement level, the value gap of phi_2 (continuity) and
    the one-sided slope gap of the section map (non-smoothness).  The slope
    gap stays bounded away from zero when sin(theta_1) != 0 and vanishes on
    the real locus theta_1 = 0.
    """
    if c == 0:
        raise ValueError("need c != 0")
    r = seam_radius if seam_radius is not None else np.sqrt(abs(c))
    if offsets is None:
        offsets = [1e-2 / 4**k for k in range(refinements)]
    th1 = float(seam_theta1)

    def point(u):
        # z2 = (r+u) e^{i th2}, z3 = (r-u) e^{i th3}, th2 + th3 = th1
        th2 = th1 / 2.0
        th3 = th1 / 2.0
        z2 = (r + u) * np.exp(1j * th2)
        z3 = (r - u) * np.exp(1j * th3)
        z1 = z2 * z3 / c
        return np.array([z1, z2, z3])

    rows = []
    phi0 = phi_pair(point(0.0), c)[1]
    for h in offsets:
        sp = np.array(section_coordinates(point(+h), c))
        sm = np.array(section_coordinates(point(-h), c))
        s0 = np.array(section_coordinates(point(0.0), c))
        phip = phi_pair(point(+h), c)[1]
        phim = phi_pair(point(-h), c)[1]
        slope_p = (sp - s0) / h
        slope_m = (s0 - sm) / h
        rows.append(
            {
                "offset": h,
                "phi2_value_gap": max(abs(phip - phi0), abs(phim - phi0)),
                "slope_gap": float(np.linalg.norm(slope_p - slope_m)),
            }
        )
    gaps = [row["slope_gap"] for row in rows]
    value_gaps = [row["phi2_value_gap"] for row in rows]
    return {
        "theta1": th1,
        "radius": r,
        "rows": rows,
        "slope_gap_stable": bool(min(gaps) > 1e-2) if abs(np.sin(th1)) > 1e-12 else None,
        "slope_gap_final": gaps[-1],
        "value_gap_linear": bool(
            value_gaps[-1] <= value_gaps[0] * (offsets[-1] / offsets[0]) * 10.0
        ),
    }


def second_difference_probe(c, phases=(0.1, 0.2), offsets=None):
    """Bounded one-sided second differences of phi_2 at z2 = z3 = 0 on X_c.

    Approaching the collapsed seam point along z2 = u e^{ia}, z3 = u e^{ib}
    (u > 0), the one-sided quotients [phi2(3u) - 2 phi2(2u) + phi2(u)] / u^2
    stay bounded as u -> 0, in contrast with the first-derivative jump at
    generic seam points.
    """
    if c == 0:
        raise ValueError("need c != 0")
    if offsets is None:
        offsets = [1e-2 / 2**k for k in range(6)]
    a, b = phases

    def phi2(u):
        z2 = u * np.exp(1j * a)
        z3 = u * np.exp(1j * b)
        z = np.array([z2 * z3 / c, z2, z3])
        return phi_pair(z, c)[1]

    out = [abs(phi2(3 * h) - 2 * phi2(2 * h) + phi2(h)) / h**2 for h in offsets]
    return {
        "offsets": offsets,
        "second_differences": out,
        "bounded": bool(max(out) < 10.0),
    }
