import json
import math

import numpy as np
import pytest

from nlsfv.errors import DegenerateGeometryError, MeshFileError, SchemaVersionError
from nlsfv.mesh import (
    DomainSpec,
    Tessellation,
    boundary_enclosed_area,
    compute_transmissibilities,
    generate_mesh,
    load_mesh,
    mesh_from_dict,
    mesh_from_polygons,
    mesh_to_dict,
    point_segment_distance,
    polygon_area,
    save_mesh,
    validate_admissibility,
)
from nlsfv.mesh.generate import BAND_FACTOR, _clip_halfplane

from .conftest import square


def brute_force_voronoi_area(sites, i, box):
    """Clip a large square by every bisector half-plane of site ``i``."""
    verts = np.array([[-box, -box], [box, -box], [box, box], [-box, box]], float)
    labels = [0] * 4
    g = sites[i]
    for j, s in enumerate(sites):
        if j == i:
            continue
        normal = s - g
        offset = normal @ (0.5 * (s + g))
        verts, labels = _clip_halfplane(verts, labels, normal, offset, 0)
    return polygon_area(verts)


# geometry kernels

def test_polygon_area_orientation():
    sq = square(0, 0, 2)
    assert polygon_area(sq) == 4
    assert polygon_area(sq[::-1]) == -4


def test_point_segment_distance():
    assert point_segment_distance((0, 1), (-1, 0), (1, 0)) == 1
    assert point_segment_distance((3, 0), (-1, 0), (1, 0)) == 2
    d = point_segment_distance(np.array([[0, 2], [0, -1]]), np.array([[-1, 0]] * 2), np.array([[1, 0]] * 2))
    np.testing.assert_allclose(d, [2, 1])


def test_clip_halfplane_keeps_labels():
    verts, labels = _clip_halfplane(square(0, 0, 2), [1, 2, 3, 4], np.array([1.0, 0]), 1.0, -9)
    assert polygon_area(verts) == pytest.approx(2.0)
    assert -9 in labels and 1 in labels and 3 in labels and 4 in labels


# transmissibilities and admissibility on fixtures

def test_transmissibility_formulas():
    m = mesh_from_polygons(np.array([[0.5, 0.5], [1.5, 0.5]]), [square(0, 0), square(1, 0)])
    inner = m.interior
    assert m.face_tau[inner] == pytest.approx([1.0])
    # unit-length boundary faces at distance 0.5
    np.testing.assert_allclose(m.face_tau[~inner], 2.0)


def test_transmissibility_scaled_face():
    # faces of measure 2 with cell points 0.4 apart give tau = 5
    left = np.array([[-1, -1], [0, -1], [0, 1], [-1, 1]], float)
    right = left + [1, 0]
    m = mesh_from_polygons(np.array([[-0.2, 0.0], [0.2, 0.0]]), [left, right])
    assert m.face_tau[m.interior] == pytest.approx([5.0])


def test_two_cells_orthogonal(two_cells):
    rep = validate_admissibility(two_cells)
    assert rep.orthogonality_max == 0 and rep.passed


def test_tangential_perturbation_defect():
    delta = 1e-3
    m = mesh_from_polygons(np.array([[0.5, 0.5], [1.5, 0.5 + delta]]), [square(0, 0), square(1, 0)])
    rep = validate_admissibility(m)
    expected = delta / math.hypot(1.0, delta)
    assert rep.orthogonality_max == pytest.approx(expected, rel=1e-12)
    assert not rep.passed


def test_face_incidence(five_cells):
    counts = np.zeros(five_cells.n_faces, int)
    for faces in five_cells.cell_faces:
        counts[faces] += 1
    np.testing.assert_array_equal(counts, np.where(five_cells.interior, 2, 1))


def test_coincident_points_raise():
    with pytest.raises(DegenerateGeometryError):
        mesh_from_polygons(np.array([[1.0, 0.5], [1.0, 0.5]]), [square(0, 0), square(1, 0)])


def test_cell_and_face_views(two_cells):
    c = two_cells.cell(0)
    assert c.area == 1 and len(c.face_ids) == 4 and c.diameter == pytest.approx(math.sqrt(2))
    kinds = {f.kind for f in two_cells.faces}
    assert kinds == {"interior", "boundary"}
    assert two_cells.h == pytest.approx(math.sqrt(2))


# generation

def test_single_cell_disk_converges_to_center():
    m = generate_mesh(DomainSpec.disk(1), 1, seed=3)
    assert m.n_cells == 1
    assert np.hypot(*m.points[0]) < 1e-3


def test_generated_mesh_matches_brute_force_voronoi(disk_mesh_small):
    m = disk_mesh_small
    dom = m.domain
    band = BAND_FACTOR * math.sqrt(dom.area / m.n_cells)
    tess = Tessellation(dom, m.points, band)
    sites = tess.sites[: tess.n + tess.n_images]
    rng = np.random.default_rng(1)
    for i in rng.choice(m.n_cells, 40, replace=False):
        ref = brute_force_voronoi_area(sites, i, 4 * dom.r_outer)
        assert m.areas[i] == pytest.approx(ref, rel=1e-9)


def test_generated_mesh_invariants(disk_mesh_small):
    m = disk_mesh_small
    assert validate_admissibility(m, 1e-9).passed
    assert (m.areas > 0).all() and (m.face_tau > 0).all()
    assert all(len(f) >= 3 for f in m.cell_faces)
    counts = np.zeros(m.n_faces, int)
    for faces in m.cell_faces:
        counts[faces] += 1
    np.testing.assert_array_equal(counts, np.where(m.interior, 2, 1))
    assert m.total_area == pytest.approx(boundary_enclosed_area(m), rel=1e-12)
    # cell points strictly inside their polygons
    for k in range(m.n_cells):
        v = m.cell_vertices[k]
        w = np.roll(v, -1, axis=0)
        cross = (v[:, 0] - m.points[k, 0]) * (w[:, 1] - m.points[k, 1]) - \
            (v[:, 1] - m.points[k, 1]) * (w[:, 0] - m.points[k, 0])
        assert (cross > 0).all()


def test_lloyd_energy_decreases(disk_mesh_small):
    hist = disk_mesh_small.lloyd_history
    energy = np.array(hist["energy"])
    assert (np.diff(energy) <= 1e-12 * energy[0]).all()
    disp = np.array(hist["max_displacement"])
    assert disp[-1] < 0.1 * disp[0]


def test_annulus_area_defect_small():
    m = generate_mesh(DomainSpec.annulus(5, 20), 500, seed=2)
    rep = validate_admissibility(m)
    assert rep.passed and rep.area_defect <= 0.02


def test_h_scaling():
    dom = DomainSpec.disk(10)
    hs = [generate_mesh(dom, n, seed=0, lloyd_max_iters=60).h for n in (250, 500, 1000, 2000)]
    assert all(a > b for a, b in zip(hs, hs[1:]))
    scaled = np.array(hs) * np.sqrt([250, 500, 1000, 2000])
    # h * sqrt(n) stays near 27-29 for this domain
    assert scaled.max() / scaled.min() < 1.5


def test_determinism():
    a = generate_mesh(DomainSpec.disk(5), 80, seed=4)
    b = generate_mesh(DomainSpec.disk(5), 80, seed=4)
    assert json.dumps(mesh_to_dict(a)) == json.dumps(mesh_to_dict(b))


def test_invalid_requests():
    with pytest.raises(ValueError):
        generate_mesh(DomainSpec.disk(1), 0)
    with pytest.raises(ValueError):
        generate_mesh(DomainSpec.disk(1), 5, lloyd_max_iters=-1)


# persistence

def _assert_same(a, b):
    assert a.domain == b.domain
    for name in ("points", "areas", "diameters", "face_cells", "face_vertices",
                 "face_measure", "face_midpoint", "face_tau"):
        np.testing.assert_array_equal(getattr(a, name), getattr(b, name))
    for x, y in zip(a.cell_faces, b.cell_faces):
        np.testing.assert_array_equal(x, y)


def test_round_trip(tmp_path, two_cells, disk_mesh_small):
    for m in (two_cells, disk_mesh_small):
        path = tmp_path / "m.json"
        save_mesh(m, path)
        _assert_same(m, load_mesh(path))


def test_empty_file(tmp_path):
    path = tmp_path / "e.json"
    path.write_text("")
    with pytest.raises(MeshFileError):
        load_mesh(path)


def test_malformed_json_reports_position(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"schema_version": 1,\n "cells": [}')
    with pytest.raises(MeshFileError, match="line 2"):
        load_mesh(path)


def test_missing_tau_recomputed(two_cells):
    doc = mesh_to_dict(two_cells)
    for f in doc["faces"]:
        del f["tau"]
    m = mesh_from_dict(doc)
    np.testing.assert_allclose(m.face_tau, two_cells.face_tau, rtol=1e-15)
    np.testing.assert_allclose(compute_transmissibilities(m).face_tau, two_cells.face_tau)


def test_schema_errors(two_cells):
    doc = mesh_to_dict(two_cells)
    doc["schema_version"] = 2
    with pytest.raises(SchemaVersionError):
        mesh_from_dict(doc)
    doc = mesh_to_dict(two_cells)
    doc["cells"][1]["area"] = "big"
    with pytest.raises(MeshFileError, match=r"cells\[1\]\.area"):
        mesh_from_dict(doc)
    doc = mesh_to_dict(two_cells)
    doc["faces"][0]["kind"] = "weird"
    with pytest.raises(MeshFileError, match="kind"):
        mesh_from_dict(doc)
