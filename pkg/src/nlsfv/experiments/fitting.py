"""Log-linear fits of decaying mass series."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import InsufficientDataError, NonpositiveMassError


@dataclass(frozen=True)
class DecayFit:
    """``E0(t) ~ C exp(-gamma (t - t_a)) E0(t_a)`` over ``window = (t_a, t_b)``."""

    gamma: float
    C: float
    r_squared: float
    window: tuple
    n_samples: int = 0

    def to_dict(self):
        return {"gamma": self.gamma, "C": self.C, "r2": self.r_squared,
                "window": list(self.window)}


def fit_decay_rate(t, E0, window=None):
    """Least-squares line through ``(t, ln E0)`` restricted to ``window``.

    Parameters
    ----------
    t, E0 : array_like
        Sample times and masses.
    window : (float, float), optional
        Closed interval of times to use; all samples by default.

    Returns
    -------
    DecayFit
        ``gamma`` is minus the slope. A series without variance reports
        ``gamma = 0`` and ``r_squared = 0``.

    Raises
    ------
    InsufficientDataError
        Fewer than three samples fall inside the window.
    NonpositiveMassError
        Some ``E0 <= 0`` inside the window.
    """
    t = np.asarray(t, dtype=float)
    E0 = np.asarray(E0, dtype=float)
    if t.shape != E0.shape:
        raise ValueError("t and E0 must have the same length")
    if window is None:
        window = (float(t.min()), float(t.max())) if len(t) else (0.0, 0.0)
    ta, tb = window
    span = max(abs(ta), abs(tb), 1.0)
    sel = (t >= ta - 1e-12 * span) & (t <= tb + 1e-12 * span)
    ts, es = t[sel], E0[sel]
    if len(ts) < 3:
        raise InsufficientDataError(f"need >= 3 samples in window [{ta}, {tb}], got {len(ts)}")
    if not (es > 0).all():
        raise NonpositiveMassError(f"E0 <= 0 inside window [{ta}, {tb}]")
    y = np.log(es)
    tc = ts - ts.mean()
    yc = y - y.mean()
    stt = float(tc @ tc)
    if stt == 0:
        raise InsufficientDataError("all samples share the same time")
    slope = float(tc @ yc) / stt
    intercept = float(y.mean()) - slope * float(ts.mean())
    syy = float(yc @ yc)
    resid = y - (intercept + slope * ts)
    if syy <= (64 * np.finfo(float).eps) ** 2 * len(y) * max(1.0, float(np.abs(y).max())) ** 2:
        slope, r2 = 0.0, 0.0
        intercept = float(y.mean())
    else:
        r2 = min(1.0, max(0.0, 1.0 - float(resid @ resid) / syy))
    gamma = -slope
    C = float(math.exp(intercept + slope * ts[0]) / es[0])
    return DecayFit(gamma=gamma, C=C, r_squared=r2, window=(float(ta), float(tb)), n_samples=len(ts))
