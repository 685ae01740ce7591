"""Classical noise processes driving the site frequencies.

Every realization owns its own random streams, derived from
``(master_seed, realization, site)`` through :class:`numpy.random.SeedSequence`,
so a realization's noise does not depend on which worker simulates it or in
what order.  Correlated noise uses the single stream of site 0 for all sites.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ValidationError
from .master import CorrelationMode


class NoiseKind(str, Enum):
    WHITE = "white"
    OU = "ou"


@dataclass(frozen=True)
class NoiseModel:
    """White noise: <phi_n(t) phi_m(t')> = gamma c_nm delta(t - t').

    OU noise: 2 <W_n(t) W_m(t')> = gamma lam c_nm exp(-lam |t - t'|),
    with ``c_nm = 1`` (correlated) or ``delta_nm`` (uncorrelated).
    """

    kind: NoiseKind = NoiseKind.WHITE
    gamma: float = 0.0
    lam: float = 1.0
    correlation: CorrelationMode = CorrelationMode.UNCORRELATED

    def __post_init__(self):
        object.__setattr__(self, "kind", NoiseKind(self.kind))
        object.__setattr__(self, "correlation", CorrelationMode(self.correlation))
        if self.gamma < 0:
            raise ValidationError("noise gamma must be >= 0")
        if self.kind is NoiseKind.OU and not self.lam > 0:
            raise ValidationError("OU noise needs lam > 0")

    @property
    def stationary_variance(self) -> float:
        if self.kind is not NoiseKind.OU:
            raise ValidationError("only OU noise has a finite stationary variance")
        return 0.5 * self.gamma * self.lam


class NoiseStream:
    """Standard-normal draws for one realization, one row per time step."""

    def __init__(self, master_seed: int, realization: int, num_sites: int, correlation: CorrelationMode):
        if master_seed < 0 or realization < 0:
            raise ValidationError("seeds and realization indices must be non-negative")
        self.num_sites = num_sites
        self.correlated = CorrelationMode(correlation) is CorrelationMode.CORRELATED
        sites = 1 if self.correlated else num_sites
        self._gens = [
            np.random.default_rng(np.random.SeedSequence(int(master_seed), spawn_key=(int(realization), s)))
            for s in range(sites)
        ]

    def normals(self, rows: int) -> np.ndarray:
        """A (rows, num_sites) block; drawing in blocks gives the same sequence as one draw."""
        if self.correlated:
            col = self._gens[0].standard_normal(rows)
            return np.repeat(col[:, None], self.num_sites, axis=1)
        return np.stack([g.standard_normal(rows) for g in self._gens], axis=1)


def white_scale(model: NoiseModel, dt: float) -> float:
    return math.sqrt(model.gamma / dt)


def ou_coefficients(model: NoiseModel, dt: float):
    """(decay, kick) of the exact OU update W <- decay W + kick xi."""
    decay = math.exp(-model.lam * dt)
    kick = math.sqrt(model.stationary_variance * -math.expm1(-2.0 * model.lam * dt))
    return decay, kick


def sample_white_step(dt: float, model: NoiseModel, stream: NoiseStream) -> np.ndarray:
    """Piecewise-constant white noise over one step: variance gamma/dt per site."""
    if not dt > 0:
        raise ValidationError("dt must be > 0")
    return white_scale(model, dt) * stream.normals(1)[0]


def sample_ou_initial(model: NoiseModel, stream: NoiseStream) -> np.ndarray:
    """Draw from the stationary law N(0, gamma lam / 2)."""
    return math.sqrt(model.stationary_variance) * stream.normals(1)[0]


def sample_ou_step(prev: np.ndarray, dt: float, model: NoiseModel, stream: NoiseStream) -> np.ndarray:
    if not dt > 0:
        raise ValidationError("dt must be > 0")
    decay, kick = ou_coefficients(model, dt)
    return decay * np.asarray(prev, dtype=float) + kick * stream.normals(1)[0]
