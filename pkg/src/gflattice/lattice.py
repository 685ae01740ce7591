"""Lattice specifications and Hamiltonian construction.

Sites are zero-indexed and double as Fock labels |0>, |1>, ...  The same
stored parameter plays both roles of each pair in the oscillator/waveguide
correspondence: ``coupling_c1`` is the drive strength g, ``ramp_alpha`` is
the oscillator frequency omega, and propagation distance z is time t.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .errors import ValidationError


class LatticeMode(str, Enum):
    GLAUBER_FOCK = "glauber-fock"
    CUSTOM = "custom"


@dataclass(frozen=True)
class LatticeSpec:
    """Geometry and Hamiltonian parameters of an N-site network.

    In Glauber-Fock mode the hopping between sites m and m+1 is
    ``coupling_c1 * sqrt(m + 1)``; in custom mode it is read from
    ``custom_hopping`` (a symmetric real N x N matrix, diagonal ignored).
    The site frequencies are always the linear ramp ``n * ramp_alpha``.
    """

    num_sites: int
    coupling_c1: float = 1.0
    ramp_alpha: float = 0.5
    mode: LatticeMode = LatticeMode.GLAUBER_FOCK
    custom_hopping: Optional[np.ndarray] = field(default=None, compare=False)

    def __post_init__(self):
        if int(self.num_sites) != self.num_sites or self.num_sites < 1:
            raise ValidationError(f"num_sites must be a positive integer, got {self.num_sites!r}")
        if self.coupling_c1 < 0:
            raise ValidationError("coupling_c1 must be >= 0")
        if self.ramp_alpha < 0:
            raise ValidationError("ramp_alpha must be >= 0 (negative ramps are not supported)")
        object.__setattr__(self, "mode", LatticeMode(self.mode))
        if self.mode is LatticeMode.CUSTOM:
            if self.custom_hopping is None:
                raise ValidationError("custom mode requires custom_hopping")
            kappa = np.asarray(self.custom_hopping, dtype=float)
            if kappa.shape != (self.num_sites, self.num_sites):
                raise ValidationError(
                    f"custom_hopping must be {self.num_sites}x{self.num_sites}, got {kappa.shape}"
                )
            if not np.allclose(kappa, kappa.T, rtol=0.0, atol=1e-12):
                raise ValidationError("custom_hopping must be symmetric")
            object.__setattr__(self, "custom_hopping", kappa)

    # aliases for the oscillator reading of the same numbers
    @property
    def drive_g(self) -> float:
        return self.coupling_c1

    @property
    def base_frequency(self) -> float:
        return self.ramp_alpha

    def with_sites(self, num_sites: int) -> "LatticeSpec":
        if self.mode is LatticeMode.CUSTOM:
            raise ValidationError("cannot resize a custom-hopping lattice")
        return LatticeSpec(num_sites, self.coupling_c1, self.ramp_alpha, self.mode)


@dataclass(frozen=True)
class GeometrySpec:
    """Fabrication parameters: first spacing ``d1`` and decay length ``s`` (um)."""

    d1: float
    s: float

    def __post_init__(self):
        if self.d1 <= 0 or self.s <= 0:
            raise ValidationError("GeometrySpec requires d1 > 0 and s > 0")


def hopping_matrix(spec: LatticeSpec) -> np.ndarray:
    n = spec.num_sites
    if spec.mode is LatticeMode.CUSTOM:
        kappa = np.array(spec.custom_hopping, dtype=float)
        np.fill_diagonal(kappa, 0.0)
        return kappa
    kappa = np.zeros((n, n))
    off = spec.coupling_c1 * np.sqrt(np.arange(1, n))
    kappa[np.arange(n - 1), np.arange(1, n)] = off
    kappa[np.arange(1, n), np.arange(n - 1)] = off
    return kappa


def build_hamiltonian(spec: LatticeSpec) -> np.ndarray:
    """Return the complex Hermitian (real symmetric) single-particle Hamiltonian."""
    if spec.num_sites < 2:
        raise ValidationError("build_hamiltonian needs at least 2 sites")
    h = hopping_matrix(spec).astype(complex)
    h[np.diag_indices(spec.num_sites)] = spec.ramp_alpha * np.arange(spec.num_sites)
    return h


def number_operator(num_sites: int) -> np.ndarray:
    return np.diag(np.arange(num_sites, dtype=float)).astype(complex)


def spacing_profile(geom: GeometrySpec, m: int) -> float:
    """Spacing d_m = d1 - (s/2) ln m between waveguides m-1 and m."""
    if m < 1:
        raise ValidationError("spacing_profile is defined for m >= 1 (waveguide 0 has no left neighbour)")
    return geom.d1 - 0.5 * geom.s * math.log(m)


def coupling_from_spacing(geom: GeometrySpec, c1: float, d: float) -> float:
    """Evanescent coupling C1 * exp(-(d - d1)/s) at separation d."""
    if geom.s <= 0:
        raise ValidationError("s must be positive")
    if math.isinf(d) and d > 0:
        return 0.0
    return c1 * math.exp(-(d - geom.d1) / geom.s)


def revival_distance(c1: float, alpha: float, k: int = 1) -> float:
    """Scaled revival distance Z_rev = 2 pi k C1 / alpha.

    The physical distance is ``Z_rev / c1 = 2 pi k / alpha``.
    """
    if alpha <= 0:
        raise ValidationError("no Bloch revival for alpha <= 0: light delocalizes")
    if k < 1:
        raise ValidationError("revival index k must be >= 1")
    return 2.0 * math.pi * k * c1 / alpha


def revival_time(omega: float, k: int = 1) -> float:
    """Unscaled revival time t_rev = 2 pi k / omega."""
    if omega <= 0:
        raise ValidationError("no revival for omega <= 0")
    if k < 1:
        raise ValidationError("revival index k must be >= 1")
    return 2.0 * math.pi * k / omega
