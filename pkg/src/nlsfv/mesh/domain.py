"""Circular 2-D domains described by signed distance functions."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class DomainSpec:
    """A disk ``|x| < r_outer`` or an annulus ``r_inner < |x| < r_outer``.

    ``r_inner`` is ``None`` for a disk.
    """

    kind: str
    r_outer: float
    r_inner: float | None = None

    def __post_init__(self):
        if self.kind == "disk":
            if self.r_inner is not None:
                raise ValueError("a disk has no inner radius")
            if not self.r_outer > 0:
                raise ValueError(f"disk radius must be positive, got {self.r_outer}")
        elif self.kind == "annulus":
            if self.r_inner is None or not 0 < self.r_inner < self.r_outer:
                raise ValueError(
                    f"annulus needs 0 < r_inner < r_outer, got {self.r_inner}, {self.r_outer}"
                )
        else:
            raise ValueError(f"unknown domain kind {self.kind!r}")

    @classmethod
    def disk(cls, radius):
        return cls("disk", float(radius))

    @classmethod
    def annulus(cls, r_inner, r_outer):
        return cls("annulus", float(r_outer), float(r_inner))

    @classmethod
    def parse(cls, text):
        """Parse ``disk:R`` or ``annulus:RI,RO``."""
        kind, _, args = text.partition(":")
        try:
            vals = [float(v) for v in args.split(",")] if args else []
        except ValueError as exc:
            raise ValueError(f"bad domain {text!r}") from exc
        if kind == "disk" and len(vals) == 1:
            return cls.disk(vals[0])
        if kind == "annulus" and len(vals) == 2:
            return cls.annulus(*vals)
        raise ValueError(f"bad domain {text!r}; expected disk:R or annulus:RI,RO")

    @property
    def bounding_box(self):
        r = self.r_outer
        return (-r, -r, r, r)

    @property
    def area(self):
        inner = 0.0 if self.r_inner is None else self.r_inner**2
        return math.pi * (self.r_outer**2 - inner)

    @property
    def diameter(self):
        return 2.0 * self.r_outer

    def boundary_radii(self):
        """Radii of the boundary circles, outer first."""
        if self.r_inner is None:
            return (self.r_outer,)
        return (self.r_outer, self.r_inner)

    def to_dict(self):
        if self.kind == "disk":
            return {"kind": "disk", "radius": self.r_outer}
        return {"kind": "annulus", "r_inner": self.r_inner, "r_outer": self.r_outer}

    @classmethod
    def from_dict(cls, d):
        if d["kind"] == "disk":
            return cls.disk(d["radius"])
        if d["kind"] == "annulus":
            return cls.annulus(d["r_inner"], d["r_outer"])
        raise ValueError(f"unknown domain kind {d['kind']!r}")

    def __str__(self):
        if self.kind == "disk":
            return f"disk:{self.r_outer:g}"
        return f"annulus:{self.r_inner:g},{self.r_outer:g}"


def signed_distance(domain, point):
    """Signed distance to the boundary: negative inside, positive outside.

    ``point`` may be a single ``(x, y)`` pair or an array of shape ``(..., 2)``.
    """
    p = np.asarray(point, dtype=float)
    r = np.hypot(p[..., 0], p[..., 1])
    d = r - domain.r_outer
    if domain.r_inner is not None:
        d = np.maximum(domain.r_inner - r, d)
    return d if d.ndim else float(d)


def reflect_across_boundaries(domain, points, band):
    """Mirror points lying within ``band`` of a boundary circle across it.

    Points at the exact center have no defined normal and are skipped. Only
    mirror images landing outside the domain are returned.
    """
    p = np.asarray(points, dtype=float)
    r = np.hypot(p[:, 0], p[:, 1])
    images = []
    for radius in domain.boundary_radii():
        near = (np.abs(r - radius) < band) & (r > 0)
        scale = (2.0 * radius - r[near]) / r[near]
        images.append(p[near] * scale[:, None])
    out = np.concatenate(images) if images else np.empty((0, 2))
    return out[signed_distance(domain, out) > 0] if len(out) else out
