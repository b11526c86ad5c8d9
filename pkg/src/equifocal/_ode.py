"""Fixed-step RK4 for the projected transport equation V' = P'(t) V."""
from __future__ import annotations

import numpy as np

from .errors import AccuracyError

DRIFT_TOL = 1e-4


def projector_transport(proj, v0, t1: float, steps: int = 200, t0: float = 0.0,
                        drift_tol: float = DRIFT_TOL, fd: float = 1e-5, record: bool = False):
    """Transport ``v0`` through the moving subspace whose projector is ``proj(t)``.

    Solves V' = P'(t) V, which keeps V inside the subspace and realizes the
    connection "project the ordinary derivative".  ``P'`` is taken by a central
    difference of width ``fd``.  Raises :class:`AccuracyError` when the norm of
    V drifts by more than ``drift_tol`` (relative).
    """
    v = np.array(v0, dtype=float)
    n0 = float(np.linalg.norm(v))
    if steps <= 0 or t1 == t0:
        return (v, [v.copy()]) if record else v
    h = (t1 - t0) / steps

    def rhs(t, x):
        dp = (proj(t + fd) - proj(t - fd)) / (2 * fd)
        return dp @ x

    frames = [v.copy()] if record else None
    t = t0
    for _ in range(steps):
        k1 = rhs(t, v)
        k2 = rhs(t + h / 2, v + h / 2 * k1)
        k3 = rhs(t + h / 2, v + h / 2 * k2)
        k4 = rhs(t + h, v + h * k3)
        v = v + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += h
        if record:
            frames.append(v.copy())
    drift = abs(float(np.linalg.norm(v)) - n0) / max(n0, 1e-300)
    if n0 > 0 and drift > drift_tol:
        raise AccuracyError(f"transport norm drift {drift:.3g} exceeds {drift_tol:g}",
                            suggested_step=abs(h) / 4)
    return (v, frames) if record else v
