"""JSON persistence for meshes (schema version 1).

Besides the required keys, cells carry ``diameter`` and ``vertices`` and
faces carry ``vertices`` so boundary distances can be recomputed.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from ..errors import MeshFileError, SchemaVersionError
from .core import Mesh, compute_transmissibilities, polygon_diameter
from .domain import DomainSpec

SCHEMA_VERSION = 1


def mesh_to_dict(mesh):
    cells = []
    for k in range(mesh.n_cells):
        cells.append(
            {
                "id": k,
                "point": [float(v) for v in mesh.points[k]],
                "area": float(mesh.areas[k]),
                "face_ids": [int(s) for s in mesh.cell_faces[k]],
                "diameter": float(mesh.diameters[k]),
                "vertices": [[float(x), float(y)] for x, y in mesh.cell_vertices[k]],
            }
        )
    faces = []
    for s in range(mesh.n_faces):
        k, l = (int(c) for c in mesh.face_cells[s])
        rec = {"id": s, "kind": "interior" if l >= 0 else "boundary", "cell_k": k}
        if l >= 0:
            rec["cell_l"] = l
        rec["measure"] = float(mesh.face_measure[s])
        tau = float(mesh.face_tau[s])
        if not math.isnan(tau):
            rec["tau"] = tau
        rec["midpoint"] = [float(v) for v in mesh.face_midpoint[s]]
        rec["vertices"] = [[float(x), float(y)] for x, y in mesh.face_vertices[s]]
        faces.append(rec)
    return {
        "schema_version": SCHEMA_VERSION,
        "domain": mesh.domain.to_dict() if mesh.domain is not None else None,
        "h": mesh.h,
        "cells": cells,
        "faces": faces,
    }


def save_mesh(mesh, path):
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        json.dump(mesh_to_dict(mesh), fh)
        fh.write("\n")


def _get(rec, key, where, kind=None):
    if key not in rec:
        raise MeshFileError(f"{where}: missing field {key!r}")
    val = rec[key]
    if kind == "number" and (isinstance(val, bool) or not isinstance(val, (int, float))):
        raise MeshFileError(f"{where}.{key}: expected a number, got {val!r}")
    if kind == "int" and (isinstance(val, bool) or not isinstance(val, int)):
        raise MeshFileError(f"{where}.{key}: expected an integer, got {val!r}")
    if kind == "pair":
        if not (isinstance(val, list) and len(val) == 2
                and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in val)):
            raise MeshFileError(f"{where}.{key}: expected [x, y], got {val!r}")
    return val


def mesh_from_dict(doc):
    if not isinstance(doc, dict):
        raise MeshFileError("top level: expected a JSON object")
    version = _get(doc, "schema_version", "top level", "int")
    if version != SCHEMA_VERSION:
        raise SchemaVersionError(
            f"schema_version {version} is not supported (expected {SCHEMA_VERSION})"
        )
    dom = _get(doc, "domain", "top level")
    try:
        domain = DomainSpec.from_dict(dom) if dom is not None else None
    except (KeyError, TypeError, ValueError) as exc:
        raise MeshFileError(f"domain: invalid specification {dom!r}: {exc}") from exc
    _get(doc, "h", "top level", "number")
    cells = _get(doc, "cells", "top level")
    faces = _get(doc, "faces", "top level")
    if not isinstance(cells, list) or not cells:
        raise MeshFileError("cells: expected a non-empty array")
    if not isinstance(faces, list):
        raise MeshFileError("faces: expected an array")

    n, m = len(cells), len(faces)
    points = np.empty((n, 2))
    areas = np.empty(n)
    diameters = np.full(n, np.nan)
    cell_faces, cell_vertices = [], []
    for k, rec in enumerate(cells):
        where = f"cells[{k}]"
        if _get(rec, "id", where, "int") != k:
            raise MeshFileError(f"{where}.id: expected {k}, got {rec['id']}")
        points[k] = _get(rec, "point", where, "pair")
        areas[k] = _get(rec, "area", where, "number")
        ids = _get(rec, "face_ids", where)
        if not isinstance(ids, list) or any(not isinstance(s, int) or not 0 <= s < m for s in ids):
            raise MeshFileError(f"{where}.face_ids: expected face indices in [0, {m})")
        cell_faces.append(np.array(ids, dtype=np.int64))
        verts = np.asarray(rec.get("vertices", []), dtype=float).reshape(-1, 2)
        cell_vertices.append(verts)
        if "diameter" in rec:
            diameters[k] = _get(rec, "diameter", where, "number")
        elif len(verts):
            diameters[k] = polygon_diameter(verts)

    face_cells = np.empty((m, 2), dtype=np.int64)
    face_vertices = np.full((m, 2, 2), np.nan)
    measure = np.empty(m)
    midpoint = np.empty((m, 2))
    tau = np.full(m, np.nan)
    for s, rec in enumerate(faces):
        where = f"faces[{s}]"
        if _get(rec, "id", where, "int") != s:
            raise MeshFileError(f"{where}.id: expected {s}, got {rec['id']}")
        kind = _get(rec, "kind", where)
        k = _get(rec, "cell_k", where, "int")
        if kind == "interior":
            l = _get(rec, "cell_l", where, "int")
        elif kind == "boundary":
            l = -1
        else:
            raise MeshFileError(f"{where}.kind: expected 'interior' or 'boundary', got {kind!r}")
        if not 0 <= k < n or not -1 <= l < n:
            raise MeshFileError(f"{where}: cell index out of range")
        face_cells[s] = (k, l)
        measure[s] = _get(rec, "measure", where, "number")
        midpoint[s] = _get(rec, "midpoint", where, "pair")
        if "tau" in rec:
            tau[s] = _get(rec, "tau", where, "number")
        if "vertices" in rec:
            face_vertices[s] = np.asarray(rec["vertices"], dtype=float).reshape(2, 2)

    mesh = Mesh(
        domain=domain,
        points=points,
        areas=areas,
        diameters=diameters,
        cell_faces=tuple(cell_faces),
        cell_vertices=tuple(cell_vertices),
        face_cells=face_cells,
        face_vertices=face_vertices,
        face_measure=measure,
        face_midpoint=midpoint,
        face_tau=tau,
    )
    if np.isnan(tau).any():
        if np.isnan(face_vertices[face_cells[:, 1] < 0]).any():
            raise MeshFileError("faces: 'tau' omitted and boundary face vertices unavailable")
        filled = compute_transmissibilities(mesh).face_tau
        mesh = mesh.replace(face_tau=np.where(np.isnan(tau), filled, tau))
    return mesh


def load_mesh(path):
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if not text.strip():
        raise MeshFileError(f"{path}: empty file")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MeshFileError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    try:
        return mesh_from_dict(doc)
    except MeshFileError as exc:
        raise type(exc)(f"{path}: {exc}") from None
