import math

import numpy as np
import pytest

from gflattice.errors import ValidationError
from gflattice.lattice import LatticeSpec
from gflattice.master import CorrelationMode, DephasingSchedule, ScheduleKind
from gflattice.observables import (Engine, TransportCurve, closed_form_markovian, closed_form_unitary,
                                   master_mean_n, mean_n_at_revival, mean_site_index, moment_ode_mean_n,
                                   scan_dephasing)


def test_markovian_closed_form_anchor():
    # m = 0, g = omega = gamma = 1, t = 2 pi
    assert closed_form_markovian(0, 1.0, 1.0, 1.0, 2 * math.pi) == pytest.approx(2 * math.pi, rel=1e-14)


def test_markovian_reduces_to_unitary():
    t = np.linspace(0, 20, 41)
    assert np.allclose(closed_form_markovian(1, 0.7, 0.5, 0.0, t), closed_form_unitary(1, 0.7, 0.5, t))
    assert closed_form_unitary(0, 1.0, 0.0, 3.0) == pytest.approx(9.0)
    # slowly ramped lattice follows (g t)^2
    assert closed_form_unitary(0, 1.0, 1e-3, 3.0) == pytest.approx(9.0, rel=0.01)


def test_revival_formula():
    assert mean_n_at_revival(2, 1.0, 1.0, 0.0) == 2.0
    assert mean_n_at_revival(2, 1.0, 1.0, 1.0) == pytest.approx(2 + 2 * math.pi, rel=1e-12)
    with pytest.raises(ValidationError):
        mean_n_at_revival(0, 1.0, 1.0, -1.0)
    with pytest.raises(ValidationError):
        mean_n_at_revival(0, 1.0, 1.0, 1.0, k=0)


@pytest.mark.parametrize("k", [1, 2, 3])
@pytest.mark.parametrize("g,omega", [(1.0, 1.0), (0.5, 2.0), (3.0, 0.7)])
def test_revival_formula_equals_time_formula(k, g, omega):
    x = np.logspace(-3, 3, 40)
    t = 2 * math.pi * k / omega
    a = mean_n_at_revival(1, g, omega, x, k)
    b = np.array([closed_form_markovian(1, g, omega, xi * omega, t) for xi in x])
    assert np.allclose(a, b, rtol=1e-12, atol=0)


def test_asymptotes():
    # large gamma_tilde: 4 pi k (g/omega)^2 / gamma_tilde
    x = 1e4
    assert (mean_n_at_revival(0, 1.0, 1.0, x) * x) == pytest.approx(4 * math.pi, rel=1e-3)
    # small gamma_tilde: both bracket terms contribute, slope 8 pi k (g/omega)^2
    x = 1e-6
    assert (mean_n_at_revival(0, 1.0, 1.0, x, k=2) / x) == pytest.approx(16 * math.pi, rel=1e-3)


def test_bell_shape_and_peak():
    x = np.logspace(-2, 2, 201)
    for k in (1, 2, 3):
        y = mean_n_at_revival(2, 1.0, 1.0, x, k)
        i = int(np.argmax(y))
        assert np.all(np.diff(y[: i + 1]) > 0) and np.all(np.diff(y[i:]) < 0)
        assert 0.5 < x[i] < 2.0
    peaks = [mean_n_at_revival(2, 1.0, 1.0, x, k).max() for k in (1, 2, 3)]
    assert peaks[0] < peaks[1] < peaks[2]


def test_scan_invariant_under_joint_rescaling():
    grid = np.logspace(-2, 2, 9)
    a = scan_dephasing(LatticeSpec(10, 1.0, 1.0), ScheduleKind.CONSTANT, grid)
    b = scan_dephasing(LatticeSpec(10, 3.0, 3.0), ScheduleKind.CONSTANT, 3.0 * grid)
    assert np.allclose(a.mean_n_values, b.mean_n_values, rtol=1e-12)
    assert a.argmax * 3.0 == pytest.approx(b.argmax)


def test_moment_ode_matches_closed_forms():
    t = np.linspace(0, 4 * math.pi, 9)
    for method in ("radau", "rk4"):
        free = moment_ode_mean_n(1.0, 0.5, DephasingSchedule.constant(0.0), t, m=2, method=method)
        assert np.allclose([s.mean_n for s in free], closed_form_unitary(2, 1.0, 0.5, t), atol=1e-8, rtol=0)
        damped = moment_ode_mean_n(1.0, 0.5, DephasingSchedule.constant(0.3), t, method=method)
        assert np.allclose([s.mean_n for s in damped], closed_form_markovian(0, 1.0, 0.5, 0.3, t), atol=1e-8,
                           rtol=0)


def test_moment_ode_methods_agree_for_memory_noise():
    t = [1.0, 4 * math.pi]
    for sched in (DephasingSchedule.oun(3.0, 0.1), DephasingSchedule.pln(3.0, 10.0)):
        a = moment_ode_mean_n(1.0, 0.5, sched, t)
        b = moment_ode_mean_n(1.0, 0.5, sched, t, method="rk4")
        assert a[-1].mean_n == pytest.approx(b[-1].mean_n, rel=1e-8)


def test_moment_ode_rejects_bad_grid():
    with pytest.raises(ValidationError):
        moment_ode_mean_n(1.0, 1.0, DephasingSchedule(), [1.0, 0.5])
    with pytest.raises(ValidationError):
        moment_ode_mean_n(1.0, 1.0, DephasingSchedule(), [1.0], method="euler")


def test_master_grows_lattice_until_leakage_small():
    val, n = master_mean_n(LatticeSpec(8, 1.0, 1.0), DephasingSchedule.constant(1.0), CorrelationMode.CORRELATED,
                           2 * math.pi, 0, leakage=1e-6)
    assert n > 8
    assert val == pytest.approx(2 * math.pi, rel=1e-4)


def test_curve_csv_and_validation():
    curve = TransportCurve([0.1, 1.0], [1.5, 2.0], Engine.CLOSED_FORM, 1, 2)
    text = curve.to_csv()
    assert text.splitlines()[0] == "gamma,mean_n,engine,k,m"
    assert text.splitlines()[1] == "0.10000000000000001,1.5,closed-form,1,2"
    with pytest.raises(ValidationError):
        TransportCurve([1.0, 0.1], [0, 0], Engine.MASTER, 1, 0)
    spec = LatticeSpec(10, 1.0, 0.5)
    with pytest.raises(ValidationError):
        scan_dephasing(spec, ScheduleKind.OUN, [1.0], engine=Engine.CLOSED_FORM)
    with pytest.raises(ValidationError):
        scan_dephasing(spec, ScheduleKind.PLN, [1.0], engine=Engine.TRAJECTORIES)
    with pytest.raises(ValidationError):
        scan_dephasing(spec, ScheduleKind.CONSTANT, [])


def test_mean_site_index_inputs():
    p = np.array([0.5, 0.0, 0.5])
    assert mean_site_index(p) == 1.0
    assert mean_site_index(np.diag(p)) == 1.0
