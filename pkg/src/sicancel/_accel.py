"""Hot numeric kernels: numba-jitted with a pure-numpy fallback.

The backend is chosen once at import time from the ``SICANCEL_BACKEND``
environment variable ("numba" or "numpy").  Default is numba when it is
importable; the numpy path computes the same quantities (the simulation
loop is replicated verbatim, the frequency sweep differs only in the
linear-solve route) and exists so the package can run without a working
JIT and so benchmarks/bench_kernels.py can compare the two.
"""

from __future__ import annotations

import os

import numpy as np
import scipy.linalg

_choice = os.environ.get("SICANCEL_BACKEND", "").strip().lower()
if _choice not in ("", "numba", "numpy"):
    raise ValueError(
        f"SICANCEL_BACKEND must be 'numba' or 'numpy', got {_choice!r}"
    )

BACKEND = "numpy"
if _choice in ("", "numba"):
    try:
        from numba import njit

        BACKEND = "numba"
    except ImportError:
        if _choice == "numba":
            raise
        BACKEND = "numpy"


def _sim_loop_np(A, B, C, D, u, x0):
    T = u.shape[0]
    y = np.empty((T, C.shape[0]))
    x = x0.copy()
    for t in range(T):
        y[t] = C @ x + D @ u[t]
        x = A @ x + B @ u[t]
    return y


def _resolvent_gains_np(H, Bh, Ch, D, zs):
    n = H.shape[0]
    eye = np.eye(n, dtype=np.complex128)
    out = np.empty(zs.shape[0])
    for i, z in enumerate(zs):
        G = D + Ch @ np.linalg.solve(z * eye - H, Bh)
        out[i] = np.linalg.svd(G, compute_uv=False)[0]
    return out


if BACKEND == "numba":

    @njit(cache=True)
    def _sim_loop_nb(A, B, C, D, u, x0):  # pragma: no cover - jitted
        T = u.shape[0]
        y = np.empty((T, C.shape[0]))
        x = x0.copy()
        for t in range(T):
            y[t] = C @ x + D @ u[t]
            x = A @ x + B @ u[t]
        return y

    @njit(cache=True)
    def _resolvent_gains_nb(H, Bh, Ch, D, zs):  # pragma: no cover - jitted
        n = H.shape[0]
        p = Bh.shape[1]
        m = zs.shape[0]
        out = np.empty(m)
        for idx in range(m):
            z = zs[idx]
            M = np.empty((n, n), dtype=np.complex128)
            for i in range(n):
                for j in range(n):
                    M[i, j] = -H[i, j]
                M[i, i] += z
            X = Bh.copy()
            # Gaussian elimination on the single Hessenberg subdiagonal,
            # pivoting between adjacent rows keeps it O(n^2) per frequency.
            for k in range(n - 1):
                if abs(M[k + 1, k]) > abs(M[k, k]):
                    for j in range(k, n):
                        tmp = M[k, j]
                        M[k, j] = M[k + 1, j]
                        M[k + 1, j] = tmp
                    for j in range(p):
                        tmp = X[k, j]
                        X[k, j] = X[k + 1, j]
                        X[k + 1, j] = tmp
                f = M[k + 1, k] / M[k, k]
                if f != 0:
                    for j in range(k, n):
                        M[k + 1, j] -= f * M[k, j]
                    for j in range(p):
                        X[k + 1, j] -= f * X[k, j]
            for col in range(p):
                for i in range(n - 1, -1, -1):
                    s = X[i, col]
                    for j in range(i + 1, n):
                        s -= M[i, j] * X[j, col]
                    X[i, col] = s / M[i, i]
            G = D + Ch @ X
            out[idx] = np.linalg.svd(G)[1][0]
        return out


def dss_response(A, B, C, D, u, x0=None):
    """Time response of x+ = Ax + Bu, y = Cx + Du over the rows of ``u``."""
    A = np.ascontiguousarray(A, dtype=np.float64)
    B = np.ascontiguousarray(B, dtype=np.float64)
    C = np.ascontiguousarray(C, dtype=np.float64)
    D = np.ascontiguousarray(D, dtype=np.float64)
    u = np.ascontiguousarray(u, dtype=np.float64)
    n = A.shape[0]
    if x0 is None:
        x0 = np.zeros(n)
    x0 = np.ascontiguousarray(x0, dtype=np.float64)
    if n == 0:
        return u @ D.T
    if BACKEND == "numba":
        return _sim_loop_nb(A, B, C, D, u, x0)
    return _sim_loop_np(A, B, C, D, u, x0)


def resolvent_peak_gains(A, B, C, D, zs):
    """Largest singular value of D + C (zI - A)^-1 B at each point of ``zs``.

    A is reduced to Hessenberg form once so each frequency costs O(n^2)
    on the numba path.
    """
    zs = np.ascontiguousarray(zs, dtype=np.complex128)
    A = np.asarray(A, dtype=np.float64)
    n = A.shape[0]
    Dc = np.ascontiguousarray(D, dtype=np.complex128)
    if n == 0:
        g = np.linalg.svd(Dc, compute_uv=False)[0]
        return np.full(zs.shape[0], g)
    H, Q = scipy.linalg.hessenberg(A, calc_q=True)
    Bh = np.ascontiguousarray(Q.T @ B, dtype=np.complex128)
    Ch = np.ascontiguousarray(C @ Q, dtype=np.complex128)
    H = np.ascontiguousarray(H, dtype=np.float64)
    if BACKEND == "numba":
        return _resolvent_gains_nb(H, Bh, Ch, Dc, zs)
    return _resolvent_gains_np(H, Bh, Ch, Dc, zs)
