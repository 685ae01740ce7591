"""Compiled ETDRK4 step for tridiagonal hopping on a Hermitian density matrix.

Arrays are zero-padded by one row/column on each side so the hopping
stencil needs no boundary branches.  Only the upper triangle is computed;
the first sub-diagonal is mirrored after each stage because the stencil
reads it, and the full lower triangle is mirrored once at the end.
"""
from __future__ import annotations

import numpy as np
from numba import njit

TINY = 1e-150


@njit(cache=True, inline="always")
def _rhs(x, ca, cb, cc, cd, w, delta, i, j):
    # -i [K, x] + delta * W * x at interior point (i, j)
    acc = ca[i] * x[i + 1, j] + cb[i] * x[i - 1, j] - cc[j] * x[i, j - 1] - cd[j] * x[i, j + 1]
    return complex(acc.imag, -acc.real) + delta * w[i, j] * x[i, j]


@njit(cache=True)
def _mirror_subdiagonal(x, n):
    for i in range(1, n):
        x[i + 1, i] = np.conj(x[i, i + 1])


@njit(cache=True)
def etdrk4_tridiagonal(u, ca, cb, cc, cd, inv, e, e2, q, f1, f2, f3, w, d0, d1, d2,
                       out, nu, a, na, b, nb, c):
    """One ETDRK4 step; coefficient tables are gathered through ``inv``."""
    n = u.shape[0] - 2
    for i in range(1, n + 1):
        for j in range(i, n + 1):
            k = inv[i, j]
            v = _rhs(u, ca, cb, cc, cd, w, d0, i, j)
            nu[i, j] = v
            a[i, j] = e2[k] * u[i, j] + q[k] * v
    _mirror_subdiagonal(a, n)
    for i in range(1, n + 1):
        for j in range(i, n + 1):
            k = inv[i, j]
            v = _rhs(a, ca, cb, cc, cd, w, d1, i, j)
            na[i, j] = v
            b[i, j] = e2[k] * u[i, j] + q[k] * v
    _mirror_subdiagonal(b, n)
    for i in range(1, n + 1):
        for j in range(i, n + 1):
            k = inv[i, j]
            v = _rhs(b, ca, cb, cc, cd, w, d1, i, j)
            nb[i, j] = v
            c[i, j] = e2[k] * a[i, j] + q[k] * (2.0 * v - nu[i, j])
    _mirror_subdiagonal(c, n)
    for i in range(1, n + 1):
        for j in range(i, n + 1):
            k = inv[i, j]
            v = _rhs(c, ca, cb, cc, cd, w, d2, i, j)
            out[i, j] = e[k] * u[i, j] + f1[k] * nu[i, j] + 2.0 * f2[k] * (na[i, j] + nb[i, j]) + f3[k] * v
    for i in range(1, n + 1):
        d = out[i, i].real
        out[i, i] = d if abs(d) >= TINY else 0.0
        for j in range(i + 1, n + 1):
            v = out[i, j]
            # flush negligible entries so products never reach subnormal range
            if abs(v.real) < TINY and abs(v.imag) < TINY:
                v = 0j
                out[i, j] = v
            out[j, i] = np.conj(v)
