"""Which master-equation coefficient reproduces the OU trajectory average?

Runs OU-noise trajectories and compares their <n(t_rev)> with master runs
using the OUN schedule at factor 1 and factor 2.  At large bandwidth
(short memory) the factor-2 run should agree within the ensemble error.
"""
import argparse
from dataclasses import dataclass

import numpy as np

from gflattice.lattice import LatticeSpec, build_hamiltonian, revival_time
from gflattice.master import CorrelationMode, DensityMatrix, DephasingSchedule, integrate_master
from gflattice.noise import NoiseKind, NoiseModel
from gflattice.observables import mean_site_index
from gflattice.stochastic import run_ensemble
from gflattice.unitary import PropagationGrid, PureState


@dataclass
class ConventionConfig:
    sites: int = 10
    gamma: float = 1.0
    lam: float = 100.0
    dt: float = 0.002
    realizations: int = 400
    seed: int = 3


def main(cfg: ConventionConfig):
    spec = LatticeSpec(cfg.sites, 1.0, 0.5)
    h = build_hamiltonian(spec)
    t = revival_time(spec.ramp_alpha)
    for mode in CorrelationMode:
        model = NoiseModel(NoiseKind.OU, cfg.gamma, cfg.lam, mode)
        ens = run_ensemble(h, PureState.localized(cfg.sites, 0), model, PropagationGrid(t, cfg.dt),
                           cfg.realizations, cfg.seed)
        n_traj = float(ens.populations[-1] @ np.arange(cfg.sites))
        se = float(np.sqrt(np.sum((ens.population_errors[-1] * np.arange(cfg.sites)) ** 2)))
        row = [f"{mode.value:>12}: trajectories {n_traj:.4f} (+- {se:.4f})"]
        for factor in (1.0, 2.0):
            sched = DephasingSchedule.oun(cfg.gamma, cfg.lam).scaled(factor)
            rho = integrate_master(h, DensityMatrix.localized(cfg.sites, 0), sched, mode, PropagationGrid(t))[-1]
            row.append(f"master x{factor:g} {mean_site_index(rho):.4f}")
        print(", ".join(row))


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lam", type=float, default=100.0)
    ap.add_argument("--realizations", type=int, default=400)
    args = ap.parse_args()
    main(ConventionConfig(lam=args.lam, realizations=args.realizations))
