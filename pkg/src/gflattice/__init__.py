"""Single-excitation transport in Glauber-Fock lattices under dephasing noise."""
__version__ = "0.1.0"

from .errors import IntegrationError, ValidationError
from .lattice import GeometrySpec, LatticeMode, LatticeSpec, build_hamiltonian, revival_distance, revival_time
from .master import CorrelationMode, DensityMatrix, DephasingSchedule, ScheduleKind, integrate_master
from .noise import NoiseKind, NoiseModel
from .observables import (Engine, TransportCurve, closed_form_markovian, closed_form_unitary, mean_n_at_revival,
                          mean_site_index, moment_ode_mean_n, scan_dephasing)
from .stochastic import TrajectoryEnsemble, run_ensemble
from .unitary import PropagationGrid, PureState, propagate_unitary
