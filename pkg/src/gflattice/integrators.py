"""Shared fixed-step integration kernels.

``rk4_step`` is the classical scheme used by every engine by default.
``etd_coefficients`` supplies the Cox-Matthews ETDRK4 weights for a
problem whose stiff linear part acts elementwise (dephasing and site
detunings on a density matrix); the phi-functions are evaluated with a
Taylor series near zero to avoid cancellation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

_SERIES_RADIUS = 0.5
_SERIES_TERMS = 16


def rk4_step(f: Callable[[float, np.ndarray], np.ndarray], t: float, y: np.ndarray, h: float) -> np.ndarray:
    k1 = f(t, y)
    k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = f(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def phi_functions(z: np.ndarray):
    """Return exp(z), phi1(z), phi2(z), phi3(z) elementwise."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < _SERIES_RADIUS
    zz = np.where(small, 1.0, z)
    ez = np.exp(z)
    p1 = (ez - 1.0) / zz
    p2 = (ez - 1.0 - zz) / zz**2
    p3 = (ez - 1.0 - zz - 0.5 * zz**2) / zz**3
    if small.any():
        zs = z[small]
        for j, p in ((1, p1), (2, p2), (3, p3)):
            acc = np.full(zs.shape, 1.0 / math.factorial(j + _SERIES_TERMS - 1), dtype=complex)
            for k in range(_SERIES_TERMS - 2, -1, -1):
                acc = acc * zs + 1.0 / math.factorial(j + k)
            p[small] = acc
    return ez, p1, p2, p3


@dataclass
class ETDCoefficients:
    e: np.ndarray
    e_half: np.ndarray
    q: np.ndarray
    f1: np.ndarray
    f2: np.ndarray
    f3: np.ndarray


def etd_coefficients(lin: np.ndarray, h: float) -> ETDCoefficients:
    """ETDRK4 weights for the elementwise linear operator ``lin`` and step ``h``."""
    z = h * np.asarray(lin, dtype=complex)
    e, p1, p2, p3 = phi_functions(z)
    e_half, q1, _, _ = phi_functions(0.5 * z)
    return ETDCoefficients(
        e=e,
        e_half=e_half,
        q=0.5 * h * q1,
        f1=h * (p1 - 3.0 * p2 + 4.0 * p3),
        f2=h * (p2 - 2.0 * p3),
        f3=h * (4.0 * p3 - p2),
    )


def etdrk4_step(c: ETDCoefficients, nonlin: Callable[[float, np.ndarray], np.ndarray],
                t: float, u: np.ndarray, h: float) -> np.ndarray:
    nu = nonlin(t, u)
    a = c.e_half * u + c.q * nu
    na = nonlin(t + 0.5 * h, a)
    b = c.e_half * u + c.q * na
    nb = nonlin(t + 0.5 * h, b)
    cc = c.e_half * a + c.q * (2.0 * nb - nu)
    nc = nonlin(t + h, cc)
    return c.e * u + c.f1 * nu + 2.0 * c.f2 * (na + nb) + c.f3 * nc
