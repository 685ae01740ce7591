import math

import numpy as np
import pytest

from gflattice.errors import ValidationError
from gflattice.lattice import (GeometrySpec, LatticeMode, LatticeSpec, build_hamiltonian, coupling_from_spacing,
                               hopping_matrix, number_operator, revival_distance, revival_time, spacing_profile)


def test_glauber_fock_hamiltonian():
    h = build_hamiltonian(LatticeSpec(5, coupling_c1=0.7, ramp_alpha=0.3))
    assert np.allclose(np.diag(h), 0.3 * np.arange(5))
    assert np.allclose(np.diagonal(h, 1), 0.7 * np.sqrt(np.arange(1, 5)))
    assert np.array_equal(h, h.conj().T)
    assert not np.any(np.triu(h, 2))


def test_coupling_ladder_matches_largest_reported_value():
    # C_m = C1 sqrt(m); C1 = 0.88 /cm gives C_40 close to 5.57 /cm
    kappa = hopping_matrix(LatticeSpec(41, coupling_c1=0.88))
    assert kappa[39, 40] == pytest.approx(0.88 * math.sqrt(40))
    assert kappa[39, 40] == pytest.approx(5.57, abs=0.01)


def test_revival_distance():
    assert revival_distance(1.0, 0.5) == pytest.approx(4 * math.pi)
    # physical length Z_rev / C1 for C1 = 0.88 /cm, alpha = 0.44 /cm
    assert revival_distance(0.88, 0.44) / 0.88 == pytest.approx(14.28, abs=0.01)
    assert revival_time(0.5, 2) == pytest.approx(8 * math.pi)
    with pytest.raises(ValidationError):
        revival_distance(1.0, 0.0)
    with pytest.raises(ValidationError):
        revival_time(1.0, 0)


def test_too_small_and_zero_coupling():
    with pytest.raises(ValidationError):
        build_hamiltonian(LatticeSpec(1))
    h = build_hamiltonian(LatticeSpec(4, coupling_c1=0.0, ramp_alpha=1.0))
    assert np.allclose(h, np.diag(np.arange(4)))


def test_custom_hopping():
    kappa = np.array([[0, 1, 2], [1, 0, 3], [2, 3, 0]], dtype=float)
    spec = LatticeSpec(3, ramp_alpha=0.1, mode=LatticeMode.CUSTOM, custom_hopping=kappa)
    h = build_hamiltonian(spec)
    assert np.allclose(h - np.diag(np.diag(h)), kappa)
    with pytest.raises(ValidationError):
        LatticeSpec(3, mode="custom", custom_hopping=np.triu(kappa))
    with pytest.raises(ValidationError):
        LatticeSpec(3, mode="custom", custom_hopping=np.zeros((2, 2)))


@pytest.mark.parametrize("kwargs", [dict(num_sites=0), dict(num_sites=3, coupling_c1=-1),
                                    dict(num_sites=3, ramp_alpha=-0.1), dict(num_sites=2.5)])
def test_invalid_specs(kwargs):
    with pytest.raises(ValidationError):
        LatticeSpec(**kwargs)


def test_three_site_ladder():
    h = build_hamiltonian(LatticeSpec(3, 1.0, 0.0))
    assert np.allclose(np.diagonal(h, 1), [1, math.sqrt(2)])
    assert np.allclose(np.diag(h), 0)


def test_number_operator():
    assert np.allclose(np.diag(number_operator(4)), [0, 1, 2, 3])


def test_spacing_round_trip_gives_sqrt_ladder():
    geom = GeometrySpec(d1=20.0, s=4.0)
    for m in range(1, 30):
        c = coupling_from_spacing(geom, 0.88, spacing_profile(geom, m))
        assert c == pytest.approx(0.88 * math.sqrt(m), rel=1e-12)
    assert spacing_profile(GeometrySpec(10.0, 2.0), math.e**2) == pytest.approx(8.0)
    assert coupling_from_spacing(geom, 1.0, math.inf) == 0.0
    with pytest.raises(ValidationError):
        spacing_profile(geom, 0)
