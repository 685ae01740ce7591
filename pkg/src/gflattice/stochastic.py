"""Stochastic Schrodinger trajectories and their ensemble average.

Each realization integrates d(psi_n)/dt = -i n (omega + phi_n(t)) psi_n - i sum_j K_nj psi_j
with the noise held constant over each step ``dt`` (the Wong-Zakai limit of
this scheme is the Stratonovich equation, which is what the averaged master
equations describe).  Within a step the frozen Hamiltonian is advanced with
RK4 substeps small enough to keep the norm error below 1e-8 per unit time.

Realizations are simulated in fixed-size chunks, vectorized over the chunk;
chunk sums are reduced in chunk order, so results do not depend on the
number of worker threads.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from .errors import IntegrationError, ValidationError
from .master import DensityMatrix
from .noise import NoiseKind, NoiseModel, NoiseStream, ou_coefficients, white_scale
from .unitary import PropagationGrid, PureState, default_step

CHUNK = 100
DRAW_BLOCK = 512
NORM_TOL_PER_UNIT = 1e-8
SUBSTEP_PHASE = 0.04


@dataclass
class TrajectoryEnsemble:
    """Ensemble estimate of sigma_nm = <psi_n psi_m*> at each output time."""

    num_realizations: int
    master_seed: int
    times: np.ndarray
    snapshots: np.ndarray   # (n_out, N, N) complex
    std_errors: np.ndarray  # (n_out, N, N) real

    @property
    def mean_sigma(self) -> DensityMatrix:
        return DensityMatrix(self.snapshots[-1], float(self.times[-1]))

    @property
    def std_error(self) -> np.ndarray:
        return self.std_errors[-1]

    @property
    def populations(self) -> np.ndarray:
        return np.real(np.diagonal(self.snapshots, axis1=1, axis2=2))

    @property
    def population_errors(self) -> np.ndarray:
        return np.diagonal(self.std_errors, axis1=1, axis2=2)

    def density_matrices(self) -> List[DensityMatrix]:
        return [DensityMatrix(s, float(t)) for s, t in zip(self.snapshots, self.times)]


def _simulate(h, psi0, model: NoiseModel, grid: PropagationGrid, streams: Sequence[NoiseStream],
              labels: Sequence[int]):
    """Advance one batch of realizations; returns output times, states and sums."""
    h = np.asarray(h, dtype=complex)
    n = h.shape[0]
    batch = len(streams)
    n_steps, dt = grid.resolve(default_step(h))
    wanted = set(grid.output_steps(n_steps))

    off_t = (h - np.diag(np.diag(h))).T.copy()
    hop_bound = float(np.max(np.sum(np.abs(off_t), axis=0)))
    base = np.real(np.diag(h))
    sites = np.arange(n, dtype=float)

    psi = np.tile(np.asarray(psi0, dtype=complex), (batch, 1))
    phase = np.zeros(batch)
    times, states = [0.0], [psi.copy()]

    ou = model.kind is NoiseKind.OU
    if ou:
        decay, kick = ou_coefficients(model, dt)
    else:
        scale = white_scale(model, dt)
    block = None
    row = DRAW_BLOCK
    omega = None

    def draw():
        return np.stack([s.normals(DRAW_BLOCK) for s in streams])  # (batch, block, n)

    if ou:
        block, row = draw(), 0
        omega = math.sqrt(model.stationary_variance) * block[:, 0, :]
        row = 1

    for step in range(1, n_steps + 1):
        if row == DRAW_BLOCK:
            block, row = draw(), 0
        xi = block[:, row, :]
        row += 1
        if ou:
            noise = omega
        else:
            noise = scale * xi
        diag = base[None, :] + sites[None, :] * noise
        shift = 0.5 * (diag.max(axis=1) + diag.min(axis=1))
        d = diag - shift[:, None]
        bound = float(np.max(np.abs(d))) + hop_bound
        sub = max(1, int(math.ceil(dt * bound / SUBSTEP_PHASE)))
        hs = dt / sub
        d = -1j * d

        def f(y):
            return -1j * (y @ off_t) + d * y

        for _ in range(sub):
            k1 = f(psi)
            k2 = f(psi + 0.5 * hs * k1)
            k3 = f(psi + 0.5 * hs * k2)
            k4 = f(psi + hs * k3)
            psi = psi + (hs / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        phase += shift * dt
        if ou:
            omega = decay * omega + kick * xi

        if step in wanted:
            t = step * dt
            drift = np.abs(np.einsum("bi,bi->b", psi.conj(), psi).real - 1.0)
            bad = int(np.argmax(drift))
            if drift[bad] > NORM_TOL_PER_UNIT * max(1.0, t):
                raise IntegrationError(
                    f"realization {labels[bad]}: norm drift {drift[bad]:.2e} at t={t:.4g}; reduce dt (now {dt:.3g})"
                )
            times.append(t)
            states.append(psi * np.exp(-1j * phase)[:, None])
    return np.array(times), states


def propagate_trajectory(h, psi0: PureState, model: NoiseModel, grid: PropagationGrid,
                         stream: NoiseStream) -> List[PureState]:
    """One noise realization; returns states at the grid's output points."""
    amps = np.asarray(psi0.amplitudes, dtype=complex)
    if abs(np.vdot(amps, amps).real - 1.0) > 1e-12:
        raise ValidationError("initial state must be normalized")
    times, states = _simulate(h, amps, model, grid, [stream], [0])
    return [PureState(s[0].copy(), psi0.z + t) for s, t in zip(states, times)]


def _chunk_sums(args):
    h, amps, model, grid, seed, first, count = args
    n = amps.size
    streams = [NoiseStream(seed, first + i, n, model.correlation) for i in range(count)]
    times, states = _simulate(h, amps, model, grid, streams, list(range(first, first + count)))
    s1 = np.array([np.einsum("bi,bj->ij", s, s.conj()) for s in states])
    s2 = np.array([np.einsum("bi,bj->ij", np.abs(s) ** 2, np.abs(s) ** 2) for s in states])
    return times, s1, s2


def run_ensemble(h, psi0: PureState, model: NoiseModel, grid: PropagationGrid, realizations: int,
                 master_seed: int, threads: int = 1) -> TrajectoryEnsemble:
    """Average ``realizations`` trajectories; ``threads=0`` uses every CPU."""
    if realizations < 1:
        raise ValidationError("realizations must be >= 1")
    if threads < 0:
        raise ValidationError("threads must be >= 0")
    amps = np.asarray(psi0.amplitudes, dtype=complex)
    if abs(np.vdot(amps, amps).real - 1.0) > 1e-12:
        raise ValidationError("initial state must be normalized")
    jobs = [(h, amps, model, grid, master_seed, first, min(CHUNK, realizations - first))
            for first in range(0, realizations, CHUNK)]
    workers = threads or os.cpu_count() or 1
    if workers == 1 or len(jobs) == 1:
        parts = [_chunk_sums(j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_chunk_sums, jobs))

    times = parts[0][0]
    s1 = np.zeros_like(parts[0][1])
    s2 = np.zeros_like(parts[0][2])
    for _, a, b in parts:
        s1 += a
        s2 += b
    m = float(realizations)
    mean = s1 / m
    if realizations > 1:
        var = np.clip(s2 / m - np.abs(mean) ** 2, 0.0, None)
        se = np.sqrt(var / (m - 1.0))
    else:
        se = np.full(mean.shape, np.nan)
    mean = 0.5 * (mean + np.conj(np.swapaxes(mean, 1, 2)))
    return TrajectoryEnsemble(realizations, int(master_seed), times + psi0.z, mean, se)
