"""Moment-map fibration bookkeeping for the quintic setting: the fattened
locus and the graph locus in the CP^2 chart, stratum classification,
fiber singular-point counts, fiber models and the type-II graph census.

Conventions: the chart coordinates are the moduli (r1, r2) of the affine
pair on one of the ten coordinate CP^2's; global bookkeeping permutes the
five homogeneous coordinates.  Counts reduce to triangle closure of the
moduli (r1^5, r2^5, 1) and the 5 x 5 fifth-root lattice.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np


class NumericalDegeneracy(Exception):
    pass


class UnclassifiedStratum(Exception):
    pass


BAND = 1e-9  # tolerance band for boundary strata


@dataclass(frozen=True)
class SimplexPoint:
    """l1-normalized modulus vector; the moment-map image."""

    weights: tuple

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if np.any(w < -1e-14):
            raise ValueError("weights must be nonnegative")
        s = w.sum()
        if abs(s - 1.0) > 1e-14:
            raise ValueError("weights must sum to 1")
        object.__setattr__(self, "weights", tuple(float(x) for x in w))

    def __iter__(self):
        return iter(self.weights)


def moment_map(pt) -> SimplexPoint:
    """[z] -> normalized (|z_1|, ..., |z_k|)."""
    if hasattr(pt, "homogeneous"):
        z = pt.homogeneous() if pt.chart is not None else pt.coords
    else:
        z = np.asarray(pt, dtype=complex)
    m = np.abs(z)
    s = m.sum()
    if s == 0:
        raise ValueError("zero vector has no moment image")
    return SimplexPoint(tuple(m / s))


@dataclass(frozen=True)
class FiberModel:
    """Singular fiber combinatorics.  Euler numbers use compactly supported
    characteristics of the strata: chi(pt) = 1, chi(R^1) = -1,
    chi(S^1 x R^2) = 0, chi((S^1)^2 x R^1) = 0."""

    type: str  # "T3" | "I5" | "II5x5" | "III5" | "T3-50" | "T3-25" | "T3-corner"
    points: int = 0
    lines: int = 0
    cylinders: int = 0
    torus_lines: int = 0  # (S^1)^2 x R^1 pieces
    circles: int = 0

    @property
    def euler(self) -> int:
        return self.points - self.lines

    @staticmethod
    def of_type(name):
        table = {
            "T3": FiberModel("T3"),
            "I5": FiberModel("I5", points=0, lines=0, circles=5, torus_lines=5),
            "II5x5": FiberModel("II5x5", points=50, lines=75, cylinders=25),
            "III5": FiberModel("III5", points=5, torus_lines=5),
            "T3-50": FiberModel("T3-50", points=50),
            "T3-25": FiberModel("T3-25", points=25),
        }
        if name not in table:
            raise UnclassifiedStratum(name)
        return table[name]


def gamma_tilde_membership(r1, r2, band=BAND):
    """Membership and stratum in the fattened locus of the CP^2 chart.

    The region is the triangle-closure set {R1 + R2 >= 1, R1 <= R2 + 1,
    R2 <= R1 + 1} of the fifth-power moduli R_i = r_i^5.  Interior ->
    "interior" (two-triangle stratum), one active equality -> "edge",
    two -> "corner"; outside -> (False, "outside").
    """
    if r1 < 0 or r2 < 0:
        raise ValueError("moduli must be nonnegative")
    R1, R2 = r1**5, r2**5
    g1 = R1 + R2 - 1.0
    g2 = R2 + 1.0 - R1
    g3 = R1 + 1.0 - R2
    vals = (g1, g2, g3)
    if any(v < -band for v in vals):
        return False, "outside"
    active = sum(1 for v in vals if abs(v) <= band)
    if active == 0:
        return True, "interior"
    if active == 1:
        return True, "edge"
    return True, "corner"


def gamma_membership(r1, r2, band=BAND):
    """Membership and stratum in the graph locus.

    Gamma = {0 <= r2 <= r1 = 1} cup {0 <= r1 <= r2 = 1} cup {r1 = r2 >= 1};
    the trivalent vertex (1,1) is the type-II stratum, leg interiors are
    type-I, leg endpoints on the chart boundary are the crossing points.
    """
    if r1 < 0 or r2 < 0:
        raise ValueError("moduli must be nonnegative")
    on_leg1 = abs(r1 - 1.0) <= band and r2 <= 1.0 + band
    on_leg2 = abs(r2 - 1.0) <= band and r1 <= 1.0 + band
    on_diag = abs(r1 - r2) <= band and r1 >= 1.0 - band
    if not (on_leg1 or on_leg2 or on_diag):
        return False, "outside"
    if abs(r1 - 1.0) <= band and abs(r2 - 1.0) <= band:
        return True, "vertex"
    if (on_leg1 and r2 <= band) or (on_leg2 and r1 <= band):
        return True, "crossing"
    return True, "leg"


def gamma_distance(r1, r2):
    """Euclidean distance to the graph locus in the (r1, r2) chart."""
    cands = [
        np.hypot(r1 - 1.0, max(0.0, r2 - 1.0)),  # leg r1 = 1, r2 <= 1
        np.hypot(r2 - 1.0, max(0.0, r1 - 1.0)),  # leg r2 = 1, r1 <= 1
    ]
    t = max((r1 + r2) / 2.0, 1.0)  # diagonal leg r1 = r2 >= 1
    cands.append(np.hypot(r1 - t, r2 - t))
    return float(min(cands))


def sigma_closure_angles(r1, r2):
    """Triangle-closure data for R1 e^{i phi1} + R2 e^{i phi2} + 1 = 0.

    Returns the list of (phi1, phi2) solutions in [0, 2 pi): two for an
    interior point, one (collinear) on an edge, none outside.
    """
    R1, R2 = r1**5, r2**5
    if R1 == 0 or R2 == 0:
        return []
    c1 = (R2**2 - 1.0 - R1**2) / (2.0 * R1)
    c2 = (R1**2 - 1.0 - R2**2) / (2.0 * R2)
    if abs(c1) > 1.0 + 1e-12 or abs(c2) > 1.0 + 1e-12:
        return []
    c1 = np.clip(c1, -1.0, 1.0)
    c2 = np.clip(c2, -1.0, 1.0)
    p1 = float(np.arccos(c1))
    p2 = float(np.arccos(c2))
    # orientation pairing from R1 sin(phi1) + R2 sin(phi2) = 0 (equal triangle
    # areas force R1 sin p1 = R2 sin p2, so opposite signs close the triangle)
    pair_a = (p1, _wrap(2 * np.pi - p2))
    if min(np.sin(p1), np.sin(p2)) <= 1e-9:
        return [pair_a]  # collinear closure: both orientations coincide
    pair_b = (_wrap(2 * np.pi - p1), p2)
    return [pair_a, pair_b]


def sigma_fiber_count(r1, r2, band=BAND):
    """Number of fiber-torus intersections with the plane quintic.

    Each phase solution of the fifth-power triangle lifts to the 5 x 5
    fifth-root lattice: 50 on the interior stratum, 25 on an edge, 0
    outside.  Near-corner bases are numerically degenerate.
    """
    member, stratum = gamma_tilde_membership(r1, r2, band)
    if stratum == "corner":
        raise NumericalDegeneracy("base too close to a corner stratum")
    if not member:
        return 0
    sols = sigma_closure_angles(r1, r2)
    if stratum == "edge":
        # collinear closure: the two orientations coincide
        return 25 * max(len(sols), 1) if len(sols) <= 1 else 25
    return 25 * len(sols)


def sigma_fiber_points(r1, r2):
    """The actual (theta1, theta2) singular points on the fiber torus."""
    out = []
    for p1, p2 in sigma_closure_angles(r1, r2):
        for k1 in range(5):
            for k2 in range(5):
                out.append(
                    (
                        (p1 + 2 * np.pi * k1) / 5.0 % (2 * np.pi),
                        (p2 + 2 * np.pi * k2) / 5.0 % (2 * np.pi),
                    )
                )
    return out


def fiber_type(r1, r2, family, band=BAND) -> FiberModel:
    """Fiber model over a base point, for the fattened or graph family."""
    if family == "tilde":
        member, stratum = gamma_tilde_membership(r1, r2, band)
        if not member:
            return FiberModel.of_type("T3")
        if stratum == "interior":
            return FiberModel.of_type("T3-50")
        if stratum == "edge":
            return FiberModel.of_type("T3-25")
        return FiberModel("T3-corner", points=5, torus_lines=5)
    if family == "graph":
        member, stratum = gamma_membership(r1, r2, band)
        if not member:
            return FiberModel.of_type("T3")
        if stratum == "vertex":
            return FiberModel.of_type("II5x5")
        if stratum == "leg":
            return FiberModel.of_type("I5")
        return FiberModel.of_type("III5")
    raise ValueError("family must be 'tilde' or 'graph'")


# -- type II graph census ---------------------------------------------------

def _wrap(x):
    return x % (2 * np.pi)


def type_II_arcs():
    """The 75 arcs of the singular graph on the vertex fiber torus.

    Three families: (A) t1 + t2 = 2 pi k / 5 with cos(5 t1) <= -1/2,
    (B) 2 t1 - t2 = 2 pi k / 5 with cos(5 t1) <= -1/2,
    (C) 2 t2 - t1 = 2 pi k / 5 with cos(5 t2) <= -1/2.
    Each arc is returned as (family, k, j, t_start, t_end) where the running
    parameter is t1 (A, B) or t2 (C) and j indexes the five clip intervals
    cos(5 t) <= -1/2, i.e. 5 t in [2 pi/3, 4 pi/3] mod 2 pi.
    """
    arcs = []
    for j in range(5):
        lo = (2 * np.pi / 3 + 2 * np.pi * j) / 5.0
        hi = (4 * np.pi / 3 + 2 * np.pi * j) / 5.0
        for k in range(5):
            arcs.append(("A", k, j, lo, hi))
            arcs.append(("B", k, j, lo, hi))
            arcs.append(("C", k, j, lo, hi))
    return arcs


def arc_point(arc, t):
    fam, k, j, lo, hi = arc
    shift = 2 * np.pi * k / 5.0
    if fam == "A":
        return (_wrap(t), _wrap(shift - t))
    if fam == "B":
        return (_wrap(t), _wrap(2 * t - shift))
    return (_wrap(2 * t - shift), _wrap(t))


def type_II_graph(grid=1200):
    """Census of the type-II graph: vertices, edges, faces, Euler number.

    Vertices are the shared arc endpoints (each trivalent), edges the 75
    clipped arcs; faces are counted by flood fill of the complement on a
    torus raster.  The fiber Euler number counts points minus lines (the
    cylinder pieces above the faces are Euler-trivial).
    """
    arcs = type_II_arcs()
    ends = []
    for arc in arcs:
        fam, k, j, lo, hi = arc
        ends.append(arc_point(arc, lo))
        ends.append(arc_point(arc, hi))
    # cluster endpoints on the torus
    verts = []
    for e in ends:
        hit = None
        for i, v in enumerate(verts):
            d = np.hypot(
                min(abs(e[0] - v[0]), 2 * np.pi - abs(e[0] - v[0])),
                min(abs(e[1] - v[1]), 2 * np.pi - abs(e[1] - v[1])),
            )
            if d < 1e-9:
                hit = i
                break
        if hit is None:
            verts.append(e)
    n_vertices = len(verts)
    n_edges = len(arcs)

    # occupancy raster of the arc union (thickened one pixel to seal the
    # diagonals), complement components by scipy label + periodic merging
    from scipy import ndimage

    occ = np.zeros((grid, grid), dtype=bool)
    ts = np.linspace(0.0, 1.0, 4 * grid)
    for arc in arcs:
        fam, k, j, lo, hi = arc
        pts = np.array([arc_point(arc, t) for t in lo + (hi - lo) * ts])
        ia = (pts[:, 0] / (2 * np.pi) * grid).astype(int) % grid
        ib = (pts[:, 1] / (2 * np.pi) * grid).astype(int) % grid
        for da in (0, 1):
            for db in (0, 1):
                occ[(ia + da) % grid, (ib + db) % grid] = True
    labels, n_raw = ndimage.label(~occ)
    parent = list(range(n_raw + 1))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        if a and b:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb

    for i in range(grid):
        union(labels[i, 0], labels[i, -1])
        union(labels[0, i], labels[-1, i])
    n_faces = len({find(x) for x in range(1, n_raw + 1)})

    return {
        "vertices": n_vertices,
        "edges": n_edges,
        "faces": n_faces,
        "graph_euler": n_vertices - n_edges,
        "cw_euler": n_vertices - n_edges + n_faces,
        "fiber_euler": FiberModel.of_type("II5x5").euler,
    }


def single_family_census():
    """One arc family alone: 25 disjoint compact arcs."""
    arcs = [a for a in type_II_arcs() if a[0] == "A"]
    return {"arcs": len(arcs), "components": len(arcs)}


# -- global 10-triangle bookkeeping -----------------------------------------

def triangles():
    """The ten coordinate CP^2 index triples {i,j,k} in {1..5}."""
    return list(combinations(range(1, 6), 3))


def chart_moduli(pt, triangle):
    """(r1, r2) of the CP^2 chart for the given triple, from a 5-vector.

    The triple (i, j, k) uses z_i as the chart divisor: r1 = |z_j/z_i|,
    r2 = |z_k/z_i|.  The other two homogeneous coordinates must vanish.
    """
    z = np.asarray(pt, dtype=complex)
    i, j, k = triangle
    others = [t for t in range(1, 6) if t not in triangle]
    if any(abs(z[t - 1]) > 1e-12 for t in others):
        raise ValueError("point not on the coordinate CP^2 of the triple")
    if z[i - 1] == 0:
        raise ZeroDivisionError("chart divisor vanishes")
    return abs(z[j - 1] / z[i - 1]), abs(z[k - 1] / z[i - 1])
