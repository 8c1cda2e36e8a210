"""Voronoi meshes of circular domains with Lloyd relaxation.

Boundary treatment follows the PolyMesher recipe: generators lying within a
band of a boundary circle are mirrored across it, so the Voronoi edge between
a generator and its image is a straight-segment approximation of the curved
boundary. Sixteen far-away guard points keep every generator region bounded
and each cell is finally clipped against a slightly enlarged regular polygon
around the outer circle; for well-populated meshes that clip never acts.
"""

from __future__ import annotations

import logging
import math

import numpy as np
from scipy.spatial import QhullError, Voronoi

from ..errors import DegenerateGeometryError, SeedingError
from .core import assemble_mesh, polygon_area
from .domain import DomainSpec, reflect_across_boundaries, signed_distance

log = logging.getLogger(__name__)

REFLECTION = -1
GUARD = -2
HULL = -3

BAND_FACTOR = 1.5
HULL_SIDES = 64
HULL_MARGIN = 0.005
N_GUARDS = 16
GUARD_RADIUS = 4.0


def default_lloyd_tol(domain, n_cells):
    return 1e-3 * domain.diameter / math.sqrt(n_cells)


def seed_points(domain, n_cells, rng, max_rounds=100):
    """Uniform random points inside ``domain`` by rejection from its bounding box."""
    x0, y0, x1, y1 = domain.bounding_box
    accepted = []
    count = 0
    for _ in range(max_rounds):
        batch = rng.uniform((x0, y0), (x1, y1), size=(2 * n_cells + 16, 2))
        batch = batch[signed_distance(domain, batch) < 0]
        accepted.append(batch)
        count += len(batch)
        if count >= n_cells:
            return np.concatenate(accepted)[:n_cells]
    raise SeedingError(
        f"placed only {count} of {n_cells} points inside {domain} after {max_rounds} rounds"
    )


class _Hull:
    """Regular polygon enclosing the outer boundary circle, as half-planes ``n.x <= c``."""

    def __init__(self, domain):
        ang = 2 * np.pi * (np.arange(HULL_SIDES) + 0.5) / HULL_SIDES
        self.normals = np.column_stack([np.cos(ang), np.sin(ang)])
        self.offset = domain.r_outer * (1.0 + HULL_MARGIN)

    def outside(self, pts):
        return (pts @ self.normals.T > self.offset * (1 + 1e-12)).any(axis=1)


def _clip_halfplane(verts, labels, normal, offset, label):
    """Sutherland-Hodgman clip of a labelled ring against ``normal . x <= offset``.

    ``labels[k]`` tags the edge leaving ``verts[k]``; edges created along the
    clip line receive ``label``.
    """
    out_v, out_l = [], []
    m = len(verts)
    dist = verts @ normal - offset
    for k in range(m):
        q = (k + 1) % m
        dp, dq = dist[k], dist[q]
        if dp <= 0:
            out_v.append(verts[k])
            if dq <= 0:
                out_l.append(labels[k])
            else:
                out_l.append(labels[k])
                t = dp / (dp - dq)
                out_v.append(verts[k] + t * (verts[q] - verts[k]))
                out_l.append(label)
        elif dq <= 0:
            t = dp / (dp - dq)
            out_v.append(verts[k] + t * (verts[q] - verts[k]))
            out_l.append(labels[k])
    if not out_v:
        return np.empty((0, 2)), []
    return np.array(out_v), out_l


class Tessellation:
    """Voronoi diagram of the generators, their mirror images and the guards."""

    def __init__(self, domain, generators, band, hull=None):
        self.domain = domain
        self.generators = np.asarray(generators, dtype=float)
        self.n = n = len(self.generators)
        self.hull = hull or _Hull(domain)
        images = reflect_across_boundaries(domain, self.generators, band)
        ang = 2 * np.pi * np.arange(N_GUARDS) / N_GUARDS
        guards = GUARD_RADIUS * domain.r_outer * np.column_stack([np.cos(ang), np.sin(ang)])
        self.sites = np.vstack([self.generators, images, guards])
        self.n_images = len(images)
        try:
            vor = Voronoi(self.sites)
        except QhullError as exc:
            raise DegenerateGeometryError(f"Voronoi construction failed: {exc}") from exc
        self.vertices = vor.vertices
        rp = vor.ridge_points
        rv = np.asarray(vor.ridge_vertices, dtype=np.int64)
        keep = (rp < n).any(axis=1)
        self.ridge_points = rp[keep]
        self.ridge_vertices = rv[keep]
        if (self.ridge_vertices < 0).any():
            raise DegenerateGeometryError("unbounded Voronoi region for a generator")

        # ridge ids per generator, CSR style
        owners = self.ridge_points.ravel()
        ridge_ids = np.repeat(np.arange(len(self.ridge_points)), 2)
        mine = owners < n
        order = np.argsort(owners[mine], kind="stable")
        self._cell_ridges = ridge_ids[mine][order]
        self._ptr = np.searchsorted(owners[mine][order], np.arange(n + 1))

        vertex_out = self.hull.outside(self.vertices)
        flagged = np.zeros(n, dtype=bool)
        rp_, rv_ = self.ridge_points, self.ridge_vertices
        bad = vertex_out[rv_].any(axis=1) | (rp_ >= n + self.n_images).any(axis=1)
        for side in (0, 1):
            c = rp_[bad, side]
            flagged[c[c < n]] = True
        self.needs_clip = flagged

    def _label(self, site):
        if site < self.n:
            return int(site)
        return REFLECTION if site < self.n + self.n_images else GUARD

    def cell_polygon(self, i):
        """Counter-clockwise vertex ring of cell ``i`` and the label of each edge.

        Labels are the neighbouring generator index, or a negative tag for
        boundary edges.
        """
        g = self.generators[i]
        rids = self._cell_ridges[self._ptr[i]:self._ptr[i + 1]]
        a = self.vertices[self.ridge_vertices[rids, 0]]
        b = self.vertices[self.ridge_vertices[rids, 1]]
        rp = self.ridge_points[rids]
        other = np.where(rp[:, 0] == i, rp[:, 1], rp[:, 0])
        cross = (a[:, 0] - g[0]) * (b[:, 1] - g[1]) - (a[:, 1] - g[1]) * (b[:, 0] - g[0])
        flip = cross < 0
        a, b = np.where(flip[:, None], b, a), np.where(flip[:, None], a, b)
        mid = 0.5 * (a + b) - g
        order = np.argsort(np.arctan2(mid[:, 1], mid[:, 0]), kind="stable")
        verts = a[order]
        labels = [self._label(s) for s in other[order]]
        if self.needs_clip[i]:
            for normal in self.hull.normals:
                if (verts @ normal > self.hull.offset).any():
                    verts, labels = _clip_halfplane(verts, labels, normal, self.hull.offset, HULL)
        if GUARD in labels:
            raise DegenerateGeometryError(f"cell {i} is not enclosed by the domain boundary")
        return verts, labels

    def moments(self):
        """Area, centroid and second moment about the generator of every cell."""
        n = self.n
        g_all = self.generators
        area = np.zeros(n)
        first = np.zeros((n, 2))
        second = np.zeros(n)
        V = self.vertices
        for side in (0, 1):
            c = self.ridge_points[:, side]
            mine = c < n
            c = c[mine]
            g = g_all[c]
            u = V[self.ridge_vertices[mine, 0]] - g
            v = V[self.ridge_vertices[mine, 1]] - g
            tri = 0.5 * np.abs(u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0])
            area += np.bincount(c, tri, n)
            cen = tri[:, None] * (u + v) / 3.0
            first[:, 0] += np.bincount(c, cen[:, 0], n)
            first[:, 1] += np.bincount(c, cen[:, 1], n)
            sm = tri * ((u * u).sum(1) + (v * v).sum(1) + (u * v).sum(1)) / 6.0
            second += np.bincount(c, sm, n)
        for i in np.flatnonzero(self.needs_clip):
            verts, _ = self.cell_polygon(i)
            u = verts - g_all[i]
            w = np.roll(u, -1, axis=0)
            tri = 0.5 * (u[:, 0] * w[:, 1] - u[:, 1] * w[:, 0])
            area[i] = tri.sum()
            first[i] = (tri[:, None] * (u + w) / 3.0).sum(0)
            second[i] = (tri * ((u * u).sum(1) + (w * w).sum(1) + (u * w).sum(1)) / 6.0).sum()
        with np.errstate(invalid="ignore", divide="ignore"):
            centroid = g_all + first / area[:, None]
        return area, centroid, second


def _build_mesh(tess, min_edge):
    n = tess.n
    polygons = []
    face_index = {}
    face_cells, face_vertices = [], []
    for i in range(n):
        verts, labels = tess.cell_polygon(i)
        # drop numerically collapsed edges
        keep = []
        for k in range(len(verts)):
            nxt = verts[(k + 1) % len(verts)]
            if np.hypot(*(nxt - verts[k])) > min_edge:
                keep.append(k)
        verts = verts[keep]
        labels = [labels[k] for k in keep]
        polygons.append(verts)
        for k, lab in enumerate(labels):
            a, b = verts[k], verts[(k + 1) % len(verts)]
            if lab >= 0:
                key = (min(i, lab), max(i, lab))
                if key in face_index:
                    continue
                face_index[key] = len(face_cells)
                face_cells.append([i, lab])
            else:
                face_cells.append([i, -1])
            face_vertices.append([a, b])
    return polygons, face_cells, face_vertices


def generate_mesh(domain, n_cells, seed=0, lloyd_max_iters=200, lloyd_tol=None):
    """Lloyd-relaxed Voronoi mesh of ``domain`` with exactly ``n_cells`` cells.

    Parameters
    ----------
    domain : DomainSpec
    n_cells : int
    seed : int
        Seed of the generator placement; equal inputs give identical meshes.
    lloyd_max_iters : int
        Lloyd iteration budget (0 keeps the random seeds).
    lloyd_tol : float, optional
        Stop once every generator is within this distance of its cell
        centroid. Defaults to ``1e-3 * diameter / sqrt(n_cells)``.

    Returns
    -------
    Mesh
        Cell points are the final generators. ``mesh.lloyd_history`` holds
        the per-iteration maximum generator-to-centroid distance and the
        centroidal Voronoi energy.
    """
    if n_cells < 1:
        raise ValueError("n_cells must be >= 1")
    if lloyd_max_iters < 0:
        raise ValueError("lloyd_max_iters must be >= 0")
    if lloyd_tol is None:
        lloyd_tol = default_lloyd_tol(domain, n_cells)
    rng = np.random.default_rng(seed)
    points = seed_points(domain, n_cells, rng)
    band = BAND_FACTOR * math.sqrt(domain.area / n_cells)
    hull = _Hull(domain)

    displacement, energy = [], []
    for it in range(lloyd_max_iters + 1):
        tess = Tessellation(domain, points, band, hull)
        area, centroid, second = tess.moments()
        _check_areas(area, domain, n_cells)
        displacement.append(float(np.max(np.hypot(*(centroid - points).T))))
        energy.append(float(second.sum()))
        if displacement[-1] <= lloyd_tol or it == lloyd_max_iters:
            break
        points = centroid
    log.debug("lloyd stopped after %d iterations, max displacement %.3e", it, displacement[-1])

    scale = domain.r_outer
    polygons, face_cells, face_vertices = _build_mesh(tess, 1e-12 * scale)
    areas = np.array([polygon_area(p) for p in polygons])
    _check_areas(areas, domain, n_cells)
    mesh = assemble_mesh(domain, points, polygons, face_cells, face_vertices)
    mesh.lloyd_history.update(
        max_displacement=displacement, energy=energy, iterations=len(displacement) - 1
    )
    return mesh


def _check_areas(area, domain, n_cells):
    threshold = 1e-12 * domain.area / n_cells
    bad = ~(area > threshold)
    if bad.any():
        k = int(np.flatnonzero(bad)[0])
        raise DegenerateGeometryError(
            f"cell {k} collapsed (area {area[k]:.3e}); try a different seed"
        )
