"""Absolutely convex hulls of finite point sets and inscribed-ball radii.

The central object is absco(W) = conv(W | -W), an origin-symmetric polytope.
Its facet description gives the largest t with the norm ball S(t) inside:
min over facets of offset / dual-norm of the facet normal. A membership LP
(gauge evaluation along a direction) and a dual-direction grid provide two
independent routes for cross-checking.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from . import _simplex
from .core import NormTag, vector_norm

MAX_HULL_DIM = 6
RANK_TOL = 1e-10
FACET_TOL = 1e-9


class DegenerateHullError(ValueError):
    """Point set does not span the ambient space; absco has empty interior."""


@dataclass(frozen=True, eq=False)
class SymmetricPolytope:
    """Origin-symmetric polytope {y : |<n_f, y>| <= h_f for all facets f}.

    `normals`/`offsets` store one representative per +- facet pair; vertices
    are closed under negation.
    """

    dim: int
    generators: np.ndarray
    vertices: np.ndarray
    normals: np.ndarray
    offsets: np.ndarray

    def facet_count(self) -> int:
        return self.normals.shape[0]

    def contains(self, y: np.ndarray, slack: float = FACET_TOL) -> bool:
        y = np.asarray(y, dtype=float).ravel()
        scale = max(1.0, float(np.max(self.offsets)))
        return bool(np.all(np.abs(self.normals @ y) <= self.offsets + slack * scale))


def _point_rank(P: np.ndarray) -> int:
    if not np.any(P):
        return 0
    s = np.linalg.svd(P, compute_uv=False)
    return int(np.sum(s > RANK_TOL * s[0]))


def _dedup_rows(P: np.ndarray, decimals: int = 12) -> np.ndarray:
    # Hand-rolled lexsort dedup; np.unique(axis=0) costs too much in the
    # hot loop of descent and certification.
    if P.shape[0] <= 1:
        return P
    q = np.round(P, decimals)
    order = np.lexsort(q.T[::-1])
    qs = q[order]
    fresh = np.empty(len(order), dtype=bool)
    fresh[0] = True
    fresh[1:] = np.any(qs[1:] != qs[:-1], axis=1)
    keep = np.sort(order[fresh])
    return P[keep]


def absco_hull(points) -> SymmetricPolytope:
    """Facet enumeration of absco(points) = conv(points | -points).

    Raises DegenerateHullError when the points do not span R^n. Dimension
    capped at MAX_HULL_DIM; beyond desk scale is out of scope.
    """
    P = np.atleast_2d(np.asarray(points, dtype=float))
    n = P.shape[1]
    if n > MAX_HULL_DIM:
        raise ValueError(f"hull dimension {n} exceeds cap {MAX_HULL_DIM}")

    if n == 1:
        h = float(np.max(np.abs(P)))
        if h <= 0.0:
            raise DegenerateHullError("points span only 0 of 1 dimensions")
        return SymmetricPolytope(
            dim=1,
            generators=P.copy(),
            vertices=np.array([[h], [-h]]),
            normals=np.array([[1.0]]),
            offsets=np.array([h]),
        )

    S = np.vstack([P, -P])
    try:
        hull = ConvexHull(S)
    except QhullError:
        # Flat input raises here; check the rank before joggling so that a
        # genuinely degenerate set is reported instead of perturbed into a
        # sliver with spurious interior.
        rank = _point_rank(P)
        if rank < n:
            raise DegenerateHullError(
                f"points span only {rank} of {n} dimensions"
            ) from None
        hull = ConvexHull(S, qhull_options="QJ")

    # Qhull equations are [normal | offset] with normal.x + offset <= 0.
    normals = hull.equations[:, :-1].copy()
    offsets = -hull.equations[:, -1]
    # Canonical sign per +- pair: first nonzero normal component positive.
    # The paired facets of a symmetric polytope are (n, h) and (-n, h), so
    # flipping the normal leaves the (positive) offset untouched.
    lead_idx = np.argmax(np.abs(normals) > 1e-14, axis=1)
    lead = normals[np.arange(normals.shape[0]), lead_idx]
    normals[lead < 0.0] *= -1.0
    scale = np.linalg.norm(normals, axis=1)
    canon = np.column_stack([normals / scale[:, None], offsets / scale])
    canon = _dedup_rows(canon, decimals=9)
    normals = canon[:, :-1]
    offsets = canon[:, -1]
    if np.any(offsets <= 0):
        raise DegenerateHullError("origin is not interior; hull numerically flat")

    V = S[hull.vertices]
    V = _dedup_rows(np.vstack([V, -V]))
    return SymmetricPolytope(
        dim=n, generators=P.copy(), vertices=V, normals=normals, offsets=offsets
    )


def support(points, u: np.ndarray) -> float:
    """Support function of absco(points): max over points of |<u, p>|."""
    P = np.atleast_2d(np.asarray(points, dtype=float))
    u = np.asarray(u, dtype=float).ravel()
    return float(np.max(np.abs(P @ u)))


def inscribed_radius(poly: SymmetricPolytope, norm: NormTag) -> float:
    """Largest t with the norm ball S(t) contained in the polytope.

    S(t) sits inside {|<n,y>| <= h} exactly when t * dual_norm(n) <= h,
    so the radius is the minimum of h_f / dual_norm(n_f) over facets.
    """
    dual = norm.dual
    if dual is NormTag.L1:
        duals = np.sum(np.abs(poly.normals), axis=1)
    elif dual is NormTag.L2:
        duals = np.linalg.norm(poly.normals, axis=1)
    else:
        duals = np.max(np.abs(poly.normals), axis=1)
    return float(np.min(poly.offsets / duals))


def membership_scale(points, d: np.ndarray) -> tuple:
    """Largest t with t*d in absco(points), plus the combination weights.

    Solves  max t  s.t.  t*d = sum_i theta_i p_i,  sum |theta_i| <= 1
    by splitting theta into positive and negative parts. Returns (t, theta);
    t = 0 when d is not in the span of the points.
    """
    P = np.atleast_2d(np.asarray(points, dtype=float))
    d = np.asarray(d, dtype=float).ravel()
    if not np.any(d):
        raise ValueError("direction d must be nonzero")
    q, n = P.shape
    # Variables: u (q), v (q), slack s, scale t; rows: n balance + budget.
    A = np.zeros((n + 1, 2 * q + 2))
    A[:n, :q] = P.T
    A[:n, q : 2 * q] = -P.T
    A[:n, 2 * q + 1] = -d
    A[n, : 2 * q] = 1.0
    A[n, 2 * q] = 1.0
    b = np.zeros(n + 1)
    b[n] = 1.0
    c = np.zeros(2 * q + 2)
    c[2 * q + 1] = 1.0
    value, x = _simplex.solve_lp_max(c, A, b)
    theta = x[:q] - x[q : 2 * q]
    return float(value), theta


class OracleRadius(NamedTuple):
    """Dual-grid estimate (upper bound) plus the exact LP value for L1."""

    grid_value: float
    exact_value: float | None
    directions: int


def dual_grid_directions(n: int, density: int) -> np.ndarray:
    """Nested direction grids on a half sphere (doubling density refines).

    Uniform grids in hyperspherical angles; n <= 4 kept cheap, matching the
    desk-scale use of the oracle.
    """
    if density < 1:
        raise ValueError("density must be positive")
    if n == 1:
        return np.array([[1.0]])
    if n == 2:
        theta = np.arange(density) * np.pi / density
        return np.column_stack([np.cos(theta), np.sin(theta)])
    if n == 3:
        phi = np.arange(density + 1) * np.pi / density
        psi = np.arange(density) * np.pi / density
        pp, ss = np.meshgrid(phi, psi, indexing="ij")
        dirs = np.column_stack(
            [
                np.cos(pp).ravel(),
                (np.sin(pp) * np.cos(ss)).ravel(),
                (np.sin(pp) * np.sin(ss)).ravel(),
            ]
        )
        return _dedup_rows(np.round(dirs, 14))
    if n == 4:
        phi1 = np.arange(density + 1) * np.pi / density
        phi2 = np.arange(density + 1) * np.pi / density
        psi = np.arange(density) * np.pi / density
        out = []
        for a in phi1:
            for bb in phi2:
                for cc in psi:
                    out.append(
                        [
                            np.cos(a),
                            np.sin(a) * np.cos(bb),
                            np.sin(a) * np.sin(bb) * np.cos(cc),
                            np.sin(a) * np.sin(bb) * np.sin(cc),
                        ]
                    )
        return _dedup_rows(np.round(np.asarray(out), 14))
    raise ValueError("dual grid oracle supports n <= 4")


def inscribed_radius_oracle(points, norm: NormTag, grid_density: int = 64) -> OracleRadius:
    """Independent estimates of the inscribed radius.

    grid_value: min over a dual-direction grid of support(u)/dual_norm(u),
    an upper bound on the true radius that decreases monotonically as the
    (nested) grid doubles. exact_value: for the L1 norm only, the exact
    radius min_j membership_scale(points, e_j), since the L1 ball is the
    absolutely convex hull of the basis vectors.
    """
    P = np.atleast_2d(np.asarray(points, dtype=float))
    n = P.shape[1]
    dirs = dual_grid_directions(n, grid_density)
    dual = norm.dual
    sup = np.max(np.abs(P @ dirs.T), axis=0)
    duals = np.array([vector_norm(u, dual) for u in dirs])
    grid_value = float(np.min(sup / duals))
    exact = None
    if norm is NormTag.L1:
        exact = min(membership_scale(P, np.eye(n)[j])[0] for j in range(n))
        exact = float(exact)
    return OracleRadius(grid_value=grid_value, exact_value=exact, directions=len(dirs))


def sphere_cover(n: int, norm: NormTag, mesh: float) -> tuple:
    """Deterministic cover of the unit sphere of the given norm.

    Returns (points, delta) where every unit-norm x (up to sign; callers
    evaluate sign-symmetric functions) lies within norm-distance delta <=
    mesh of some row. Conservative constructions:

      L1   - barycentric grids on the cross-polytope faces, delta = n/m;
      L2   - cube-surface grids normalized to the sphere, delta = sqrt(n)*h;
      Linf - cube-surface grids used directly, delta = h/2.
    """
    if mesh <= 0:
        raise ValueError("mesh must be positive")
    if n == 1:
        return np.array([[1.0]]), 0.0

    if norm is NormTag.L1:
        m = max(1, int(np.ceil(n / mesh)))
        delta = n / m
        simplex_pts = _compositions(m, n) / m
        faces = []
        for signs in _half_sign_patterns(n):
            faces.append(simplex_pts * signs)
        return np.vstack(faces), float(delta)

    if norm is NormTag.L2:
        h = mesh / np.sqrt(n)
        delta = float(np.sqrt(n) * h)
        pts = _cube_surface(n, h)
        pts = pts / np.linalg.norm(pts, axis=1, keepdims=True)
        return pts, delta

    h = 2.0 * mesh
    delta = float(h / 2.0)
    return _cube_surface(n, h), delta


def _compositions(m: int, parts: int) -> np.ndarray:
    """All nonnegative integer vectors of given length summing to m."""
    if parts == 1:
        return np.array([[m]])
    rows = []
    for first in range(m + 1):
        rest = _compositions(m - first, parts - 1)
        rows.append(np.column_stack([np.full(len(rest), first), rest]))
    return np.vstack(rows)


def _half_sign_patterns(n: int):
    """Sign vectors with leading +1 (one per antipodal pair of orthants)."""
    out = []
    for bits in range(2 ** (n - 1)):
        signs = [1.0]
        for j in range(n - 1):
            signs.append(1.0 if (bits >> j) & 1 == 0 else -1.0)
        out.append(np.array(signs))
    return out


def _cube_surface(n: int, h: float) -> np.ndarray:
    """Grid on the +1 face of each axis of the cube [-1,1]^n (half surface)."""
    steps = max(1, int(np.ceil(2.0 / h)))
    axis = np.linspace(-1.0, 1.0, steps + 1)
    faces = []
    for a in range(n):
        grids = np.meshgrid(*([axis] * (n - 1)), indexing="ij") if n > 1 else []
        face = np.empty(((steps + 1) ** (n - 1), n))
        face[:, a] = 1.0
        other = [j for j in range(n) if j != a]
        for col, g in zip(other, grids):
            face[:, col] = g.ravel()
        faces.append(face)
    return np.vstack(faces)
