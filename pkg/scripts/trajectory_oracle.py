"""White-noise trajectory ensemble against the master equation, via the CLI files.

Runs configs/appendix_trajectories.ini and configs/appendix_master.ini and
compares the final density matrices elementwise against 3 standard errors.
"""
import os
import subprocess
import sys
from dataclasses import dataclass

import numpy as np

from gflattice.io import read_matrix

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


@dataclass
class OracleConfig:
    out_dir: str = "oracle"
    threads: int = 0
    sigma_factor: float = 3.0


def main(cfg: OracleConfig):
    for name in ("appendix_trajectories", "appendix_master"):
        subprocess.run([sys.executable, "-m", "gflattice.cli", "run", "--config",
                        os.path.join(ROOT, "configs", f"{name}.ini"), "--out", cfg.out_dir,
                        "--threads", str(cfg.threads)], check=True)
    sigma = read_matrix(os.path.join(cfg.out_dir, "appendix_trajectories_m0_sigma.txt"))
    se = np.real(read_matrix(os.path.join(cfg.out_dir, "appendix_trajectories_m0_se.txt")))
    rho = read_matrix(os.path.join(cfg.out_dir, "appendix_master_m0_rho.txt"))
    diff = np.abs(sigma - rho).max()
    bound = cfg.sigma_factor * se.max()
    print(f"max |sigma - rho| = {diff:.4f}, bound {bound:.4f}: {'pass' if diff <= bound else 'fail'}")


if __name__ == "__main__":
    main(OracleConfig())
