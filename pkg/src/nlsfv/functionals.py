"""Discrete norms and the mass/energy functionals of a cell field.

Fields are complex numpy arrays with one entry per cell. All sums are
``numpy`` reductions (pairwise summation), so results do not depend on
anything but the input order.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields

import numpy as np

from .errors import MeshMismatchError


def _check(field, mesh):
    y = np.asarray(field)
    if y.shape != (mesh.n_cells,):
        raise MeshMismatchError(
            f"field of shape {y.shape} does not live on a mesh with {mesh.n_cells} cells"
        )
    return y


def discrete_l2_norm(field, mesh):
    y = _check(field, mesh)
    return float(np.sqrt(np.sum(np.abs(y) ** 2 * mesh.areas)))


def d_sigma(field, mesh, face=None):
    """Face differences: ``y_L - y_K`` on interior faces, ``-y_K`` on the boundary.

    Returns the array over all faces, or a single value when ``face`` is given.
    """
    y = _check(field, mesh)
    fc = mesh.face_cells if face is None else mesh.face_cells[[face]]
    k, l = fc[:, 0], fc[:, 1]
    yl = np.where(l >= 0, y[np.maximum(l, 0)], 0.0)
    out = yl - y[k]
    return out if face is None else complex(out[0])


def discrete_h1_norm(field, mesh):
    d = d_sigma(field, mesh)
    return float(np.sqrt(np.sum(mesh.face_tau * np.abs(d) ** 2)))


def discrete_l2p_norm(field, mesh, p):
    if not p > 0:
        raise ValueError("p must be positive")
    y = _check(field, mesh)
    return float(np.sum(np.abs(y) ** (2 * p) * mesh.areas) ** (1.0 / (2 * p)))


def mass_E0(field, mesh):
    y = _check(field, mesh)
    return 0.5 * float(np.sum(np.abs(y) ** 2 * mesh.areas))


def energy_E1(field, mesh, p):
    """Half the discrete H1 seminorm squared plus ``sum |y_K|^{2p} m(K) / (2p)``."""
    if not p > 0:
        raise ValueError("p must be positive")
    y = _check(field, mesh)
    d = d_sigma(y, mesh)
    kinetic = 0.5 * np.sum(mesh.face_tau * np.abs(d) ** 2)
    potential = np.sum(np.abs(y) ** (2 * p) * mesh.areas) / (2 * p)
    return float(kinetic + potential)


@dataclass(frozen=True)
class FunctionalSample:
    step: int
    t: float
    E0: float
    E1: float
    l2: float
    h1: float
    l2p: float
    linf: float
    picard_iters: int = 0
    krylov_iters: int = 0

    def as_dict(self):
        return asdict(self)


SAMPLE_COLUMNS = tuple(f.name for f in fields(FunctionalSample))


def sample_functionals(field, mesh, p, t=0.0, step=0, picard_iters=0, krylov_iters=0):
    y = _check(field, mesh)
    mod2 = np.abs(y) ** 2
    l2sq = float(np.sum(mod2 * mesh.areas))
    d = d_sigma(y, mesh)
    h1sq = float(np.sum(mesh.face_tau * np.abs(d) ** 2))
    l2p_pow = float(np.sum(mod2**p * mesh.areas))
    return FunctionalSample(
        step=int(step),
        t=float(t),
        E0=0.5 * l2sq,
        E1=0.5 * h1sq + l2p_pow / (2 * p),
        l2=float(np.sqrt(l2sq)),
        h1=float(np.sqrt(h1sq)),
        l2p=l2p_pow ** (1.0 / (2 * p)),
        linf=float(np.sqrt(mod2.max())) if len(y) else 0.0,
        picard_iters=int(picard_iters),
        krylov_iters=int(krylov_iters),
    )


class FunctionalSeries:
    """Ordered list of :class:`FunctionalSample` with column access."""

    def __init__(self, samples=()):
        self.samples = list(samples)

    def append(self, sample):
        self.samples.append(sample)

    def __len__(self):
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    def __getitem__(self, i):
        return self.samples[i]

    def column(self, name):
        return np.array([getattr(s, name) for s in self.samples])

    @property
    def t(self):
        return self.column("t")

    @property
    def E0(self):
        return self.column("E0")

    @property
    def E1(self):
        return self.column("E1")
