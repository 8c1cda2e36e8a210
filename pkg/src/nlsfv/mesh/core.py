"""Polygonal admissible meshes and their two-point-flux transmissibilities."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from ..errors import DegenerateGeometryError
from .domain import DomainSpec

INTERIOR = "interior"
BOUNDARY = "boundary"


@dataclass(frozen=True)
class Cell:
    id: int
    point: tuple
    area: float
    face_ids: tuple
    diameter: float


@dataclass(frozen=True)
class Face:
    id: int
    kind: str
    cell_k: int
    cell_l: int | None
    measure: float
    transmissibility: float
    midpoint: tuple


@dataclass(frozen=True, eq=False)
class Mesh:
    """Cell/face arrays of a polygonal mesh.

    Cells are stored column-wise: ``points[K]`` is the cell point ``x_K``,
    ``areas[K]`` its measure and ``cell_faces[K]`` the ids of its faces.
    Faces keep ``face_cells[s] = (K, L)`` with ``L = -1`` on the boundary,
    their end points in ``face_vertices[s]`` and the transmissibility in
    ``face_tau[s]`` (NaN until computed).
    """

    domain: DomainSpec | None
    points: np.ndarray
    areas: np.ndarray
    diameters: np.ndarray
    cell_faces: tuple
    cell_vertices: tuple
    face_cells: np.ndarray
    face_vertices: np.ndarray
    face_measure: np.ndarray
    face_midpoint: np.ndarray
    face_tau: np.ndarray
    lloyd_history: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def n_cells(self):
        return len(self.areas)

    @property
    def n_faces(self):
        return len(self.face_measure)

    @property
    def h(self):
        return float(self.diameters.max())

    @property
    def interior(self):
        return self.face_cells[:, 1] >= 0

    @property
    def total_area(self):
        return float(np.sum(self.areas))

    def cell(self, k):
        return Cell(
            id=int(k),
            point=tuple(self.points[k]),
            area=float(self.areas[k]),
            face_ids=tuple(int(s) for s in self.cell_faces[k]),
            diameter=float(self.diameters[k]),
        )

    def face(self, s):
        k, l = (int(c) for c in self.face_cells[s])
        return Face(
            id=int(s),
            kind=INTERIOR if l >= 0 else BOUNDARY,
            cell_k=k,
            cell_l=l if l >= 0 else None,
            measure=float(self.face_measure[s]),
            transmissibility=float(self.face_tau[s]),
            midpoint=tuple(self.face_midpoint[s]),
        )

    @property
    def cells(self):
        return [self.cell(k) for k in range(self.n_cells)]

    @property
    def faces(self):
        return [self.face(s) for s in range(self.n_faces)]

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


def polygon_area(vertices):
    v = np.asarray(vertices, dtype=float)
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def polygon_centroid(vertices):
    v = np.asarray(vertices, dtype=float)
    x, y = v[:, 0], v[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    a = 0.5 * cross.sum()
    return np.array([((x + xn) * cross).sum(), ((y + yn) * cross).sum()]) / (6.0 * a)


def polygon_diameter(vertices):
    v = np.asarray(vertices, dtype=float)
    d = v[:, None, :] - v[None, :, :]
    return float(np.sqrt((d**2).sum(-1)).max())


def point_segment_distance(p, a, b):
    """Euclidean distance from points ``p`` to segments ``[a, b]`` (broadcasting)."""
    p, a, b = (np.asarray(v, dtype=float) for v in (p, a, b))
    ab = b - a
    denom = (ab**2).sum(-1)
    t = np.where(denom > 0, ((p - a) * ab).sum(-1) / np.where(denom > 0, denom, 1.0), 0.0)
    t = np.clip(t, 0.0, 1.0)
    d = p - (a + t[..., None] * ab)
    out = np.hypot(d[..., 0], d[..., 1])
    return out if out.ndim else float(out)


def assemble_mesh(domain, points, polygons, face_cells, face_vertices, compute_tau=True):
    """Build a :class:`Mesh` from cell polygons and an explicit face list.

    ``polygons[K]`` is the counter-clockwise vertex ring of cell ``K``.
    """
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    n = len(points)
    face_cells = np.asarray(face_cells, dtype=np.int64).reshape(-1, 2)
    face_vertices = np.asarray(face_vertices, dtype=float).reshape(-1, 2, 2)
    polys = tuple(np.asarray(poly, dtype=float) for poly in polygons)
    areas = np.array([polygon_area(poly) for poly in polys])
    diameters = np.array([polygon_diameter(poly) for poly in polys])
    seg = face_vertices[:, 1] - face_vertices[:, 0]
    measure = np.hypot(seg[:, 0], seg[:, 1])
    midpoint = face_vertices.mean(axis=1)

    lists = [[] for _ in range(n)]
    for s, (k, l) in enumerate(face_cells):
        lists[k].append(s)
        if l >= 0:
            lists[l].append(s)
    cell_faces = tuple(np.array(fs, dtype=np.int64) for fs in lists)

    mesh = Mesh(
        domain=domain,
        points=points,
        areas=areas,
        diameters=diameters,
        cell_faces=cell_faces,
        cell_vertices=polys,
        face_cells=face_cells,
        face_vertices=face_vertices,
        face_measure=measure,
        face_midpoint=midpoint,
        face_tau=np.full(len(measure), np.nan),
    )
    return compute_transmissibilities(mesh) if compute_tau else mesh


def mesh_from_polygons(points, polygons, domain=None, decimals=12):
    """Mesh from explicit convex polygons; shared edges become interior faces.

    Edges are matched by their vertex coordinates rounded to ``decimals``.
    Intended for small hand-built fixtures.
    """
    polys = []
    for poly in polygons:
        poly = np.asarray(poly, dtype=float)
        if polygon_area(poly) < 0:
            poly = poly[::-1]
        polys.append(poly)

    def key(v):
        return tuple(np.round(v, decimals))

    owner = {}
    face_cells, face_vertices = [], []
    for k, poly in enumerate(polys):
        for a, b in zip(poly, np.roll(poly, -1, axis=0)):
            ek = frozenset((key(a), key(b)))
            if ek in owner:
                s = owner.pop(ek)
                face_cells[s][1] = k
            else:
                owner[ek] = len(face_cells)
                face_cells.append([k, -1])
                face_vertices.append([a, b])
    return assemble_mesh(domain, points, polys, face_cells, face_vertices)


def compute_transmissibilities(mesh):
    """Return a copy of ``mesh`` with ``face_tau`` filled in.

    Interior faces get ``m(s) / |x_K - x_L|``, boundary faces
    ``m(s) / d(x_K, s)`` with ``d`` the point-to-segment distance.
    """
    fc = mesh.face_cells
    inner = fc[:, 1] >= 0
    xk = mesh.points[fc[:, 0]]
    dist = np.empty(len(fc))
    xl = mesh.points[fc[inner, 1]]
    dist[inner] = np.hypot(*(xl - xk[inner]).T)
    fv = mesh.face_vertices[~inner]
    dist[~inner] = point_segment_distance(xk[~inner], fv[:, 0], fv[:, 1])
    bad = ~(dist > 0)
    if bad.any():
        s = int(np.flatnonzero(bad)[0])
        what = "coincident cell points" if inner[s] else "cell point on its boundary face"
        raise DegenerateGeometryError(f"face {s}: {what} (zero distance)")
    return mesh.replace(face_tau=mesh.face_measure / dist)


def boundary_enclosed_area(mesh):
    """Area enclosed by the boundary faces alone (shoelace over oriented edges).

    Interior faces cancel in the sum of cell areas, so this equals the area of
    the polygonal domain the cells should tile.
    """
    bnd = ~mesh.interior
    fv = mesh.face_vertices[bnd]
    xk = mesh.points[mesh.face_cells[bnd, 0]]
    a, b = fv[:, 0], fv[:, 1]
    # orient every edge with its cell on the left
    side = (a[:, 0] - xk[:, 0]) * (b[:, 1] - xk[:, 1]) - (a[:, 1] - xk[:, 1]) * (b[:, 0] - xk[:, 0])
    sgn = np.where(side >= 0, 1.0, -1.0)
    return float(0.5 * np.sum(sgn * (a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0])))


@dataclass(frozen=True)
class AdmissibilityReport:
    orthogonality_max: float
    area_defect: float
    passed: bool

    @property
    def pass_(self):
        return self.passed


def orthogonality_defects(mesh):
    """Per interior face: ``|t . (x_L - x_K)| / |x_L - x_K|`` with ``t`` the unit tangent."""
    inner = mesh.interior
    fv = mesh.face_vertices[inner]
    t = fv[:, 1] - fv[:, 0]
    t = t / np.hypot(t[:, 0], t[:, 1])[:, None]
    e = mesh.points[mesh.face_cells[inner, 1]] - mesh.points[mesh.face_cells[inner, 0]]
    return np.abs((t * e).sum(1)) / np.hypot(e[:, 0], e[:, 1])


def validate_admissibility(mesh, tol=1e-9):
    orth = orthogonality_defects(mesh)
    orth_max = float(orth.max()) if len(orth) else 0.0
    if mesh.domain is not None:
        area = mesh.domain.area
        defect = abs(mesh.total_area - area) / area
    else:
        defect = 0.0
    return AdmissibilityReport(orth_max, float(defect), bool(orth_max <= tol))
