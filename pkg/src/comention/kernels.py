"""Numeric hot kernels with a JIT path and a pure-numpy fallback.

Two inner loops dominate the numeric work: the cyclic Jacobi rotation sweeps
behind the symmetric eigensolver, and the all-pairs force accumulation of the
force-directed layout. Each ships in two interchangeable implementations:

* ``*_numba`` - explicit loops compiled with ``numba.njit`` (no fastmath, so
  results are plain IEEE double arithmetic),
* ``*_numpy`` - vectorized numpy, used when numba is unavailable or disabled.

The active pair is chosen at import time from the ``COMENTION_NUMBA``
environment variable: ``auto`` (default) uses numba when importable, ``0`` /
``off`` forces the numpy path, ``1`` / ``on`` requires numba. Both variants
are importable regardless of the flag, e.g. for the benchmark in
``benchmarks/kernel_bench.py``.

Within one backend all kernels are deterministic: identical inputs produce
bit-identical outputs. Across backends results agree to rounding error only,
since summation order differs.
"""

from __future__ import annotations

import math
import os

import numpy as np

# Distances below this are clamped before dividing; coincident points then
# exert no force rather than a huge one.
MIN_DIST = 1e-9


def _select_backend() -> str:
    flag = os.environ.get("COMENTION_NUMBA", "auto").strip().lower()
    if flag in ("0", "off", "false", "no", "numpy"):
        return "numpy"
    if flag in ("1", "on", "true", "yes", "require", "numba"):
        import numba  # noqa: F401  (raises if unavailable)

        return "numba"
    try:
        import numba  # noqa: F401
    except ImportError:
        return "numpy"
    return "numba"


BACKEND = _select_backend()


# ---------------------------------------------------------------------------
# Cyclic Jacobi sweeps for dense symmetric matrices
# ---------------------------------------------------------------------------

def _jacobi_rotation(app: float, aqq: float, apq: float) -> tuple[float, float, float]:
    # Stable tangent of the rotation angle annihilating the (p,q) entry.
    tau = (aqq - app) / (2.0 * apq)
    if tau >= 0.0:
        t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
    else:
        t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
    c = 1.0 / math.sqrt(1.0 + t * t)
    return t, c, t * c


def _offdiag_norm_numpy(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.sqrt(np.sum(off * off)))


def jacobi_sweeps_numpy(
    a: np.ndarray, max_sweeps: int, tol: float
) -> tuple[np.ndarray, np.ndarray, int, float]:
    """Diagonalize a symmetric matrix in place by cyclic Jacobi rotations.

    Returns (eigenvalues, eigenvector columns, sweeps used, final off-diagonal
    Frobenius norm). Stops once the off-diagonal norm drops to ``tol``.
    """
    n = a.shape[0]
    v = np.eye(n, dtype=np.float64)
    off = _offdiag_norm_numpy(a)
    sweeps = 0
    while off > tol and sweeps < max_sweeps:
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                _, c, s = _jacobi_rotation(a[p, p], a[q, q], apq)
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = 0.0
                a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
        sweeps += 1
        off = _offdiag_norm_numpy(a)
    return np.diag(a).copy(), v, sweeps, off


def _jacobi_sweeps_plain(a, max_sweeps, tol):
    # Loop form of jacobi_sweeps_numpy; compiled by numba below.
    n = a.shape[0]
    v = np.eye(n, dtype=np.float64)
    off = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                off += a[i, j] * a[i, j]
    off = math.sqrt(off)
    sweeps = 0
    while off > tol and sweeps < max_sweeps:
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[k, q] = s * akp + c * akq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * aqk
                    a[q, k] = s * apk + c * aqk
                a[p, q] = 0.0
                a[q, p] = 0.0
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - s * vkq
                    v[k, q] = s * vkp + c * vkq
        sweeps += 1
        off = 0.0
        for i in range(n):
            for j in range(n):
                if i != j:
                    off += a[i, j] * a[i, j]
        off = math.sqrt(off)
    w = np.empty(n, dtype=np.float64)
    for i in range(n):
        w[i] = a[i, i]
    return w, v, sweeps, off


# ---------------------------------------------------------------------------
# Force-directed layout iterations
# ---------------------------------------------------------------------------

def fr_run_numpy(
    pos: np.ndarray,
    edges: np.ndarray,
    iterations: int,
    t0: float,
    gravity: float,
    k: float,
) -> np.ndarray:
    """Run the full force-directed schedule on ``pos`` in place.

    Per iteration: repulsion k^2/d between all pairs, attraction d^2/k along
    edges, a gravity pull toward the centroid, then a move capped by a
    temperature cooling linearly from ``t0`` to 0.
    """
    n = pos.shape[0]
    ei = edges[:, 0] if edges.size else np.empty(0, dtype=np.int64)
    ej = edges[:, 1] if edges.size else np.empty(0, dtype=np.int64)
    for it in range(iterations):
        t = t0 * (1.0 - it / iterations)
        delta = pos[:, None, :] - pos[None, :, :]
        dist = np.sqrt(np.sum(delta * delta, axis=-1))
        np.maximum(dist, MIN_DIST, out=dist)
        coef = (k * k) / (dist * dist)
        np.fill_diagonal(coef, 0.0)
        disp = np.sum(delta * coef[:, :, None], axis=1)
        if ei.size:
            de = pos[ei] - pos[ej]
            dd = np.sqrt(np.sum(de * de, axis=-1))
            np.maximum(dd, MIN_DIST, out=dd)
            att = de * (dd / k)[:, None]
            np.subtract.at(disp, ei, att)
            np.add.at(disp, ej, att)
        disp += gravity * (pos.mean(axis=0) - pos)
        length = np.sqrt(np.sum(disp * disp, axis=-1))
        safe = np.where(length > 0.0, length, 1.0)
        step = np.minimum(length, t) / safe
        pos += disp * step[:, None]
    return pos


def _fr_run_plain(pos, edges, iterations, t0, gravity, k):
    # Loop form of fr_run_numpy; compiled by numba below.
    n = pos.shape[0]
    m = edges.shape[0]
    disp = np.empty((n, 2), dtype=np.float64)
    for it in range(iterations):
        t = t0 * (1.0 - it / iterations)
        for i in range(n):
            disp[i, 0] = 0.0
            disp[i, 1] = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                dx = pos[i, 0] - pos[j, 0]
                dy = pos[i, 1] - pos[j, 1]
                d = math.sqrt(dx * dx + dy * dy)
                if d < MIN_DIST:
                    d = MIN_DIST
                f = (k * k) / (d * d)
                disp[i, 0] += dx * f
                disp[i, 1] += dy * f
                disp[j, 0] -= dx * f
                disp[j, 1] -= dy * f
        for e in range(m):
            i = edges[e, 0]
            j = edges[e, 1]
            dx = pos[i, 0] - pos[j, 0]
            dy = pos[i, 1] - pos[j, 1]
            d = math.sqrt(dx * dx + dy * dy)
            if d < MIN_DIST:
                d = MIN_DIST
            f = d / k
            disp[i, 0] -= dx * f
            disp[i, 1] -= dy * f
            disp[j, 0] += dx * f
            disp[j, 1] += dy * f
        cx = 0.0
        cy = 0.0
        for i in range(n):
            cx += pos[i, 0]
            cy += pos[i, 1]
        cx /= n
        cy /= n
        for i in range(n):
            disp[i, 0] += gravity * (cx - pos[i, 0])
            disp[i, 1] += gravity * (cy - pos[i, 1])
        for i in range(n):
            dn = math.sqrt(disp[i, 0] * disp[i, 0] + disp[i, 1] * disp[i, 1])
            if dn > 0.0:
                step = dn if dn < t else t
                pos[i, 0] += disp[i, 0] / dn * step
                pos[i, 1] += disp[i, 1] / dn * step
    return pos


try:
    from numba import njit

    jacobi_sweeps_numba = njit(cache=True)(_jacobi_sweeps_plain)
    fr_run_numba = njit(cache=True)(_fr_run_plain)
except ImportError:
    jacobi_sweeps_numba = None
    fr_run_numba = None

if BACKEND == "numba":
    jacobi_sweeps = jacobi_sweeps_numba
    fr_run = fr_run_numba
else:
    jacobi_sweeps = jacobi_sweeps_numpy
    fr_run = fr_run_numpy
