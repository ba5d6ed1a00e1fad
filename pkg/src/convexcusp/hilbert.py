"""Hilbert metric, Finsler norms, and Busemann volume on convex domains.

The distance between interior points is the log of the cross ratio of
the chord through them; the Finsler norm is its infinitesimal version;
the Busemann density at a point is alpha_3 / (Lebesgue volume of the
unit norm ball), where alpha_3 = pi/6 is the Lebesgue volume of the
Euclidean ball of diameter 1.  Volumes of regions are integrals of the
density, by seeded Monte Carlo or a Gauss-Legendre product grid.

A slow covering-style oracle estimates the same measure from metric
balls only (no Finsler norm, no density integration) and is used to
cross-check the main pipeline on small boxes.

Monte Carlo sampling uses a counter-based Philox stream keyed by the
seed, with all sample coordinates derived up front, so results are
deterministic for a fixed seed no matter how evaluation is chunked.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .domains import CHORD_TOL, ConvexDomain, ParabolicDomain

#: Lebesgue volume of the Euclidean ball of diameter 1 (normalising
#: constant of the 3-dimensional Hausdorff measure used throughout)
ALPHA3 = math.pi / 6


class QuadratureError(ArithmeticError):
    """Raised when quadrature refinement fails to agree with itself."""


class RegionError(ValueError):
    """Raised for invalid or out-of-domain integration regions."""


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and node counts for the numeric geometry.

    ``sphere_nodes`` is realised as a Gauss-Legendre x uniform product
    grid on the sphere with twice as many azimuthal as polar nodes, so
    2312 becomes a 34 x 68 grid.  ``seed`` keys the Philox stream used
    by Monte Carlo integration and is recorded in every report.
    """

    sphere_nodes: int = 2312
    mc_samples: int = 200_000
    seed: int = 0
    bisection_tol: float = 1e-12
    cutoff: float | None = None
    rel_target: float = 1e-3
    grid_shape: tuple = (8, 6, 6)

    def __post_init__(self):
        if self.sphere_nodes <= 0 or self.mc_samples <= 0:
            raise ValueError("node and sample counts must be positive")
        if self.bisection_tol <= 0:
            raise ValueError("bisection tolerance must be positive")


DEFAULT_QUADRATURE = QuadratureSpec()


# ---------------------------------------------------------------------------
# cross ratio and distance


def _positions(points, origin, direction):
    return [None if p is None else float(np.dot(np.atleast_1d(p) - origin, direction)) for p in points]


def cross_ratio(a, x, y, b, collinear_tol=1e-9) -> float:
    """Projective cross ratio of four ordered collinear points.

    ``a`` and ``b`` may be None (ideal); the corresponding ratio factor
    is then 1, the one-sided limit convention.  Non-collinear input
    (residual above ``collinear_tol`` relative to the configuration
    size) is rejected.
    """
    pts = [None if p is None else np.atleast_1d(np.asarray(p, dtype=float)) for p in (a, x, y, b)]
    finite = [p for p in pts if p is not None]
    dims = {len(p) for p in finite}
    if len(dims) != 1:
        raise ValueError("cross ratio points must share a dimension")
    ref = pts[3] - pts[0] if pts[0] is not None and pts[3] is not None else pts[2] - pts[1]
    scale = max(np.linalg.norm(p - q) for p in finite for q in finite)
    if np.linalg.norm(ref) == 0:
        ref = pts[2] - pts[1]
    if np.linalg.norm(ref) == 0:
        # x == y and no independent direction: degenerate but collinear
        return 1.0
    u = ref / np.linalg.norm(ref)
    if scale > 0:
        resid = max(
            np.linalg.norm((p - finite[0]) - np.dot(p - finite[0], u) * u) for p in finite
        )
        if resid > collinear_tol * scale:
            raise ValueError(f"points are not collinear (residual {resid:.3e})")
    ta, tx, ty, tb = _positions(pts, finite[0], u)
    num = (abs(ty - ta) if ta is not None else 1.0) * (abs(tx - tb) if tb is not None else 1.0)
    den = (abs(tx - ta) if ta is not None else 1.0) * (abs(ty - tb) if tb is not None else 1.0)
    if den == 0:
        raise ValueError("degenerate cross ratio (coincident with an endpoint)")
    return num / den


def hilbert_distance(dom: ConvexDomain, x, y, tol=CHORD_TOL) -> float:
    """Hilbert distance: log cross ratio along the chord through x, y."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.array_equal(x, y):
        return 0.0
    p_minus, p_plus = dom.chord_endpoints(x, y - x, tol=tol)
    return math.log(cross_ratio(p_minus, x, y, p_plus, collinear_tol=np.inf))


def hilbert_distance_pairs(dom: ConvexDomain, X, Y, tol=CHORD_TOL):
    """Distances between paired interior points, via chord parameters."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    X, Y = np.broadcast_arrays(X, Y)
    V = Y - X
    deg = ~np.any(V, axis=1)
    V = np.where(deg[:, None], np.array([1.0, 0, 0]), V)
    tm, tp = dom.chord_taus(X.copy(), V, tol=tol)
    # point positions 0 and 1 in chord units; ideal factors collapse to 1
    with np.errstate(invalid="ignore"):
        left = np.where(np.isinf(tm), 1.0, (1.0 - tm) / (-tm))
        right = np.where(np.isinf(tp), 1.0, tp / (tp - 1.0))
    out = np.log(left * right)
    out[deg] = 0.0
    return out


def hilbert_distance_many(dom: ConvexDomain, x, Y, tol=CHORD_TOL):
    """Distances from one interior point to many others."""
    return hilbert_distance_pairs(dom, np.asarray(x, dtype=float)[None, :], Y, tol=tol)


def finsler_norm(dom: ConvexDomain, x, v, tol=CHORD_TOL) -> float:
    """Tangent norm |v| (1/|x-p_minus| + 1/|x-p_plus|); ideal ends add 0."""
    v = np.asarray(v, dtype=float)
    if not np.any(v):
        return 0.0
    return float(finsler_norm_batch(dom, x, v[None, :], tol=tol)[0])


def finsler_norm_batch(dom: ConvexDomain, x, dirs, tol=CHORD_TOL):
    tm, tp = dom.chord_taus(x, dirs, tol=tol)
    with np.errstate(divide="ignore"):
        u = np.where(np.isinf(tm), 0.0, -1.0 / tm)
        w = np.where(np.isinf(tp), 0.0, 1.0 / tp)
    return u + w


# ---------------------------------------------------------------------------
# unit balls and Busemann density


@lru_cache(maxsize=32)
def sphere_quadrature(n_nodes: int):
    """Antipodally symmetric product quadrature on the unit sphere.

    Gauss-Legendre in the polar cosine, midpoint-uniform in azimuth,
    with n_phi = 2 n_theta; returns (directions (n,3), weights) with the
    weights summing to 4 pi.
    """
    n_theta = max(2, int(round(math.sqrt(n_nodes / 2.0))))
    n_phi = 2 * n_theta
    xs, wx = np.polynomial.legendre.leggauss(n_theta)
    phi = (np.arange(n_phi) + 0.5) * (2 * math.pi / n_phi)
    sin_theta = np.sqrt(1.0 - xs ** 2)
    U = np.empty((n_theta * n_phi, 3))
    W = np.empty(n_theta * n_phi)
    k = 0
    for ct, st, w in zip(xs, sin_theta, wx):
        U[k : k + n_phi, 0] = ct
        U[k : k + n_phi, 1] = st * np.cos(phi)
        U[k : k + n_phi, 2] = st * np.sin(phi)
        W[k : k + n_phi] = w * (2 * math.pi / n_phi)
        k += n_phi
    return U, W


def _ball_volume_at_nodes(dom, x, q, n_nodes):
    U, W = sphere_quadrature(n_nodes)
    axes = np.eye(3)
    axis_norms = finsler_norm_batch(dom, x, axes, tol=q.bisection_tol)
    radii = 1.0 / axis_norms
    dirs = U * radii[None, :]
    norms = finsler_norm_batch(dom, x, dirs, tol=q.bisection_tol)
    r = 1.0 / norms
    return float(np.prod(radii) * np.sum(W * r ** 3) / 3.0)


def unit_ball_lebesgue(dom: ConvexDomain, x, q: QuadratureSpec = DEFAULT_QUADRATURE, check=True) -> float:
    """Lebesgue volume of the unit Finsler ball in the tangent space.

    Computed as (1/3) * integral of r(u)^3 over the sphere after
    rescaling directions by the three axis radii, which keeps the
    integrand order-one even in very anisotropic tangent spaces.  With
    ``check`` a coarse pass must agree with the fine one to within ten
    times ``q.rel_target`` or QuadratureError is raised.
    """
    x = np.asarray(x, dtype=float)
    if not dom.contains(x):
        raise ValueError("unit ball requested at a non-interior point")
    fine = _ball_volume_at_nodes(dom, x, q, q.sphere_nodes)
    if check:
        coarse = _ball_volume_at_nodes(dom, x, q, max(8, q.sphere_nodes // 4))
        if abs(fine - coarse) > 10.0 * q.rel_target * abs(fine):
            raise QuadratureError(
                f"sphere quadrature not converged (fine {fine:.6g}, coarse {coarse:.6g})"
            )
    return fine


def busemann_density(dom: ConvexDomain, x, q: QuadratureSpec = DEFAULT_QUADRATURE, check=True) -> float:
    """Density of the Busemann volume against Lebesgue measure.

    Quadrature convergence failures propagate; integrators that sample
    densely pass ``check=False`` and rely on their own refinement checks.
    """
    return ALPHA3 / unit_ball_lebesgue(dom, x, q, check=check)


def metric_ball_density(dom: ConvexDomain, x, rho=0.02, n_nodes=128, tol=CHORD_TOL) -> float:
    """Density estimated from Hilbert metric balls alone.

    Solves d(x, x + r u) = rho in closed form from the chord parameters
    and divides out rho; independent of the Finsler-norm route, so it
    serves as an oracle for ``busemann_density``.  Antipodal node pairs
    cancel the O(rho) bias.
    """
    U, W = sphere_quadrature(n_nodes)
    x = np.asarray(x, dtype=float)
    tm, tp = dom.chord_taus(x, U, tol=tol)
    with np.errstate(divide="ignore"):
        u = np.where(np.isinf(tm), 0.0, -1.0 / tm)
        w = np.where(np.isinf(tp), 0.0, 1.0 / tp)
    K = math.exp(rho)
    r = (K - 1.0) / (u + K * w) / rho
    vol = float(np.sum(W * r ** 3) / 3.0)
    return ALPHA3 / vol


# ---------------------------------------------------------------------------
# regions and volume integration


@dataclass(frozen=True)
class Region:
    """Box-with-floor region inside a convex domain.

    The region is the set of points with base coordinates in the given
    rectangle, vertical coordinate in ``x1_range`` and, when
    ``floor_level`` is set, above the horosphere at that level.
    """

    domain: ConvexDomain
    x2_range: tuple
    x3_range: tuple
    x1_range: tuple
    floor_level: float | None = None

    def is_empty(self) -> bool:
        return (
            self.x2_range[1] <= self.x2_range[0]
            or self.x3_range[1] <= self.x3_range[0]
            or self.x1_range[1] <= self.x1_range[0]
        )

    def box_volume(self) -> float:
        return (
            (self.x1_range[1] - self.x1_range[0])
            * (self.x2_range[1] - self.x2_range[0])
            * (self.x3_range[1] - self.x3_range[0])
        )

    def mask(self, pts):
        pts = np.asarray(pts, dtype=float)
        ok = np.ones(len(pts), dtype=bool)
        if self.floor_level is not None:
            dom = self.domain
            if not isinstance(dom, ParabolicDomain):
                raise RegionError("floor levels require a parabolic domain")
            base_ok = dom.base_contains_batch(pts[:, 1], pts[:, 2])
            ok &= base_ok
            if base_ok.any():
                h = dom.boundary_value_batch(pts[base_ok, 1], pts[base_ok, 2])
                sub = pts[base_ok, 0] > h + self.floor_level
                tmp = np.zeros(len(pts), dtype=bool)
                tmp[np.flatnonzero(base_ok)] = sub
                ok &= tmp
        return ok


@dataclass(frozen=True)
class VolumeEstimate:
    estimate: float
    stderr: float
    samples: int
    seed: int
    method: str

    def __float__(self):
        return self.estimate


def busemann_volume(region: Region, q: QuadratureSpec = DEFAULT_QUADRATURE, method="mc") -> VolumeEstimate:
    """Busemann volume of a region, with a standard-error estimate.

    ``method="mc"``: seeded Monte Carlo over the bounding box (stderr is
    the usual sample estimate).  ``method="grid"``: Gauss-Legendre
    product grid adapted to the floor, stderr reported as the difference
    from a half-resolution pass.  A region that escapes its domain
    raises RegionError.
    """
    if region.x1_range[1] is None:
        if q.cutoff is None:
            raise RegionError("open-ended region needs a vertical cutoff in the quadrature spec")
        region = replace(region, x1_range=(region.x1_range[0], q.cutoff))
    if region.is_empty():
        return VolumeEstimate(0.0, 0.0, 0, q.seed, method)
    if method == "mc":
        return _volume_mc(region, q)
    if method == "grid":
        fine = _volume_grid(region, q, q.grid_shape)
        coarse_shape = tuple(max(2, s // 2) for s in q.grid_shape)
        coarse = _volume_grid(region, q, coarse_shape)
        return VolumeEstimate(fine, abs(fine - coarse), int(np.prod(q.grid_shape)), q.seed, "grid")
    raise ValueError(f"unknown integration method {method!r}")


def _volume_mc(region: Region, q: QuadratureSpec) -> VolumeEstimate:
    rng = np.random.Generator(np.random.Philox(q.seed))
    n = q.mc_samples
    lo = np.array([region.x1_range[0], region.x2_range[0], region.x3_range[0]])
    hi = np.array([region.x1_range[1], region.x2_range[1], region.x3_range[1]])
    pts = lo + rng.random((n, 3)) * (hi - lo)
    mask = region.mask(pts)
    if region.floor_level is None:
        inside = region.domain.contains_batch(pts)
        if not inside.all():
            raise RegionError("region extends outside its domain")
    vals = np.zeros(n)
    idx = np.flatnonzero(mask)
    for i in idx:
        vals[i] = busemann_density(region.domain, pts[i], q, check=False)
    box = region.box_volume()
    est = box * float(np.mean(vals))
    err = box * float(np.std(vals) / math.sqrt(n))
    return VolumeEstimate(est, err, n, q.seed, "mc")


def _volume_grid(region: Region, q: QuadratureSpec, shape) -> float:
    n1, n2, n3 = shape
    x2n, w2 = np.polynomial.legendre.leggauss(n2)
    x3n, w3 = np.polynomial.legendre.leggauss(n3)
    x1n, w1 = np.polynomial.legendre.leggauss(n1)

    def to_interval(nodes, weights, a, b):
        return 0.5 * (b - a) * nodes + 0.5 * (a + b), 0.5 * (b - a) * weights

    g2, w2 = to_interval(x2n, w2, *region.x2_range)
    g3, w3 = to_interval(x3n, w3, *region.x3_range)
    dom = region.domain
    total = 0.0
    for b2, wb2 in zip(g2, w2):
        for b3, wb3 in zip(g3, w3):
            lo = region.x1_range[0]
            if region.floor_level is not None:
                h = float(dom.boundary_value_batch(np.array([b2]), np.array([b3]))[0])
                lo = max(lo, h + region.floor_level)
            hi = region.x1_range[1]
            if hi <= lo:
                continue
            # log-stretched vertical coordinate: the density varies
            # fastest just above the floor and decays polynomially above
            gu, wu = to_interval(x1n, w1, 0.0, math.log1p(hi - lo))
            for u, wuu in zip(gu, wu):
                x1 = lo + math.expm1(u)
                pt = np.array([x1, b2, b3])
                if region.floor_level is None and not dom.contains(pt):
                    raise RegionError("region extends outside its domain")
                total += wb2 * wb3 * wuu * math.exp(u) * busemann_density(dom, pt, q, check=False)
    return total


# ---------------------------------------------------------------------------
# covering oracle


@dataclass(frozen=True)
class HausdorffEstimate:
    value: float
    raw_cover_sum: float
    cells: int
    max_cell_diameter: float


def hausdorff_oracle(dom: ConvexDomain, region: Region, eps: float, details=False):
    """Covering-style volume oracle for a small box.

    The box is split into a cubical grid that is refined until every
    cell has Hilbert diameter below ``eps``; each cell then contributes
    its Lebesgue volume weighted by the metric-ball density at its
    centre.  The plain covering sum alpha_3 * sum(diam^3) is reported
    alongside for reference (it carries the cube-versus-ball shape
    constant and is a gross overestimate by design).

    Refuses boxes of Hilbert diameter >= 1 (this estimator is meant as a
    local oracle, not an integrator).
    """
    lo = np.array([region.x1_range[0], region.x2_range[0], region.x3_range[0]])
    hi = np.array([region.x1_range[1], region.x2_range[1], region.x3_range[1]])
    if np.all(hi <= lo):
        z = HausdorffEstimate(0.0, 0.0, 0, 0.0)
        return z if details else 0.0
    corners = np.array([[a, b, c] for a in region.x1_range for b in region.x2_range for c in region.x3_range])
    if not dom.contains_batch(corners).all():
        raise RegionError("oracle box must lie inside the domain")
    diam = float(np.max(hilbert_distance_many(dom, corners[0], corners[1:])))
    if diam >= 1.0:
        raise RegionError("oracle box too large (Hilbert diameter >= 1)")

    n = 2
    while True:
        edges = [np.linspace(lo[i], hi[i], n + 1) for i in range(3)]
        starts = np.stack(np.meshgrid(*[e[:-1] for e in edges], indexing="ij"), axis=-1).reshape(-1, 3)
        step = (hi - lo) / n
        # cell diameter: the largest Hilbert length among the 4 main diagonals
        dmax = np.zeros(len(starts))
        for sign in ((1, 1, 1), (1, 1, -1), (1, -1, 1), (1, -1, -1)):
            d = np.array(sign, dtype=float) * step
            lo_corner = starts + np.where(d < 0, -d, 0.0)
            hi_corner = lo_corner + d
            dmax = np.maximum(dmax, hilbert_distance_pairs(dom, lo_corner, hi_corner))
        if float(dmax.max()) < eps or n >= 32:
            break
        n *= 2
    if float(dmax.max()) >= eps:
        raise RegionError("cover refinement exhausted before reaching eps")
    centers = starts + 0.5 * step
    cell_vol = float(np.prod(step))
    dens = np.array([metric_ball_density(dom, c) for c in centers])
    value = float(np.sum(dens) * cell_vol)
    raw = float(ALPHA3 * np.sum(dmax ** 3))
    out = HausdorffEstimate(value, raw, len(centers), float(dmax.max()))
    return out if details else value


# ---------------------------------------------------------------------------
# reports


def write_volume_csv(path, rows):
    """CSV report with columns (cutoff, estimate, stderr, samples, seed)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["cutoff", "estimate", "stderr", "samples", "seed"])
        for cutoff, est in rows:
            w.writerow([f"{cutoff:.12g}", f"{est.estimate:.12g}", f"{est.stderr:.12g}", est.samples, est.seed])
    return path


def density_grid_rows(dom, x1_values, x2_values, x3, q: QuadratureSpec = DEFAULT_QUADRATURE):
    rows = []
    for x1 in x1_values:
        for x2 in x2_values:
            rows.append((float(x1), float(x2), float(x3), busemann_density(dom, [x1, x2, x3], q)))
    return rows


def write_density_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x1", "x2", "x3", "density"])
        for r in rows:
            w.writerow([f"{v:.12g}" for v in r])
    return path
