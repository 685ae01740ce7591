"""Randomized invariants of the engines (at least 200 cases each)."""
import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from gflattice.lattice import LatticeSpec, build_hamiltonian
from gflattice.master import CorrelationMode, DensityMatrix, DephasingSchedule, integrate_master, master_rhs
from gflattice.unitary import PropagationGrid, PureState, propagate_unitary

CASES = settings(max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])

specs = st.builds(LatticeSpec, num_sites=st.integers(2, 8), coupling_c1=st.floats(0.0, 2.0),
                  ramp_alpha=st.floats(0.0, 2.0))
schedules = st.one_of(
    st.builds(DephasingSchedule.constant, st.floats(0.0, 1.0)),
    st.builds(DephasingSchedule.oun, st.floats(0.0, 2.0), st.floats(0.05, 10.0)),
    st.builds(DephasingSchedule.pln, st.floats(0.0, 2.0), st.floats(0.05, 10.0)),
)
modes = st.sampled_from(list(CorrelationMode))


def random_state(n, seed):
    rng = np.random.default_rng(seed)
    psi = rng.normal(size=n) + 1j * rng.normal(size=n)
    return psi / np.linalg.norm(psi)


@CASES
@given(specs, st.integers(0, 2**32 - 1), st.floats(0.1, 2.0))
def test_unitary_norm_and_hermitian_hamiltonian(spec, seed, z):
    h = build_hamiltonian(spec)
    assert np.array_equal(h, h.conj().T)
    out = propagate_unitary(h, PureState(random_state(spec.num_sites, seed), 0.0), PropagationGrid(z))
    assert abs(out[-1].norm - 1.0) <= 1e-9 * max(1.0, z)


@CASES
@given(specs, schedules, modes, st.integers(0, 2**32 - 1))
def test_master_preserves_trace_and_hermiticity(spec, sched, mode, seed):
    n = spec.num_sites
    rho0 = DensityMatrix.from_pure(random_state(n, seed))
    out = integrate_master(build_hamiltonian(spec), rho0, sched, mode, PropagationGrid(0.5))[-1]
    assert abs(out.trace - 1.0) < 1e-10
    assert out.hermiticity_error() < 1e-12
    assert out.purity <= 1.0 + 1e-10


@CASES
@given(st.integers(2, 8), schedules, modes, st.integers(0, 2**32 - 1), st.floats(0.0, 5.0))
def test_dephasing_never_moves_populations(n, sched, mode, seed, t):
    # without hopping the diagonal has zero derivative for every rate and mode
    rho = DensityMatrix.from_pure(random_state(n, seed)).elements
    h = np.diag(np.arange(n, dtype=float)).astype(complex)
    d = master_rhs(rho, h, sched, mode, t)
    assert np.max(np.abs(np.diag(d))) < 1e-14
    assert np.max(np.abs(d - d.conj().T)) < 1e-14


@CASES
@given(specs, modes, st.integers(0, 2**32 - 1))
def test_purity_is_one_without_noise(spec, mode, seed):
    rho0 = DensityMatrix.from_pure(random_state(spec.num_sites, seed))
    out = integrate_master(build_hamiltonian(spec), rho0, DephasingSchedule.constant(0.0), mode,
                           PropagationGrid(0.5))[-1]
    assert abs(out.purity - 1.0) < 1e-9
