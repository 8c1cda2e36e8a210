"""Restarted GMRES for complex (non-Hermitian) sparse systems."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from ..errors import KrylovConvergenceError


@dataclass(frozen=True)
class GMRESResult:
    solution: np.ndarray
    iters: int
    residual: float


def _as_matvec(A):
    if callable(A):
        return A
    return A.dot


def _givens(a, b):
    """Complex rotation ``(c, s)`` with real ``c`` mapping ``(a, b)`` to ``(r, 0)``."""
    if b == 0:
        return 1.0, 0.0
    if a == 0:
        return 0.0, np.conj(b) / abs(b)
    t = np.hypot(abs(a), abs(b))
    return abs(a) / t, (a / abs(a)) * np.conj(b) / t


def gmres(A, b, x0=None, tol=1e-10, restart=50, maxiter=None, precond=None):
    """Solve ``A x = b`` to relative residual ``||b - A x|| <= tol * ||b||``.

    Parameters
    ----------
    A : sparse matrix, ndarray or callable
        Operator; callables are applied as ``A(v)``.
    b : ndarray
    x0 : ndarray, optional
        Initial guess (zero by default).
    tol : float
        Relative residual tolerance.
    restart : int
        Krylov subspace dimension between restarts.
    maxiter : int, optional
        Cap on the total number of Arnoldi steps (default ``10 * n``).
    precond : ndarray, optional
        Inverse diagonal applied as a right preconditioner (Jacobi).

    Returns
    -------
    GMRESResult
        ``iters`` counts Arnoldi steps, ``residual`` is the true relative residual.

    Raises
    ------
    KrylovConvergenceError
        If ``maxiter`` steps do not reach ``tol``.
    """
    matvec = _as_matvec(A)
    b = np.asarray(b, dtype=complex)
    n = b.shape[0]
    if maxiter is None:
        maxiter = 10 * max(n, 1)
    restart = max(1, min(restart, n))
    x = np.zeros(n, dtype=complex) if x0 is None else np.array(x0, dtype=complex)
    bnorm = np.linalg.norm(b)
    if bnorm == 0:
        return GMRESResult(np.zeros(n, dtype=complex), 0, 0.0)

    r = b - matvec(x)
    beta = np.linalg.norm(r)
    total = 0
    while True:
        if beta <= tol * bnorm:
            return GMRESResult(x, total, float(beta / bnorm))
        if total >= maxiter:
            raise KrylovConvergenceError(
                f"GMRES did not converge in {total} iterations "
                f"(relative residual {beta / bnorm:.3e} > {tol:.1e})",
                residual=float(beta / bnorm),
                iterations=total,
            )
        V = np.empty((restart + 1, n), dtype=complex)
        H = np.zeros((restart + 1, restart), dtype=complex)
        cs = np.zeros(restart)
        sn = np.zeros(restart, dtype=complex)
        g = np.zeros(restart + 1, dtype=complex)
        V[0] = r / beta
        g[0] = beta
        k = 0
        for j in range(restart):
            z = V[j] if precond is None else precond * V[j]
            w = matvec(z)
            # classical Gram-Schmidt, applied twice
            Vj = V[: j + 1]
            h = Vj.conj() @ w
            w = w - h @ Vj
            h2 = Vj.conj() @ w
            w = w - h2 @ Vj
            h = h + h2
            hn = np.linalg.norm(w)
            H[: j + 1, j] = h
            H[j + 1, j] = hn
            for i in range(j):
                t = cs[i] * H[i, j] + sn[i] * H[i + 1, j]
                H[i + 1, j] = -np.conj(sn[i]) * H[i, j] + cs[i] * H[i + 1, j]
                H[i, j] = t
            cs[j], sn[j] = _givens(H[j, j], H[j + 1, j])
            H[j, j] = cs[j] * H[j, j] + sn[j] * H[j + 1, j]
            H[j + 1, j] = 0.0
            g[j + 1] = -np.conj(sn[j]) * g[j]
            g[j] = cs[j] * g[j]
            total += 1
            k = j + 1
            if hn == 0 or abs(g[j + 1]) <= tol * bnorm or total >= maxiter:
                break
            V[j + 1] = w / hn
        y = solve_triangular(H[:k, :k], g[:k])
        dx = y @ V[:k]
        x = x + (dx if precond is None else precond * dx)
        r = b - matvec(x)
        beta = np.linalg.norm(r)
