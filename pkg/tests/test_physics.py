import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stocheuler.mesh import DiscreteField, Mesh
from stocheuler.physics import (GasModel, StateViolationError, approximate_entropy,
                                ballistic_free_energy, cons_to_prim, entropy_quantities,
                                max_wave_speed, physical_flux, prim_to_cons, relative_entropy)

GAS = GasModel()


def random_states(rng, n, dim=1):
    rho = rng.uniform(0.1, 5.0, n)
    vel = rng.uniform(-3.0, 3.0, (n, dim))
    p = rng.uniform(0.1, 10.0, n)
    return prim_to_cons(rho, vel, p, GAS)


def test_cv_consistent():
    for g in (1.4, 5 / 3, 1.1):
        gas = GasModel(gamma=g)
        assert gas.c_v * (gas.gamma - 1.0) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(ValueError):
        GasModel(gamma=1.0)


def test_cons_to_prim_at_rest():
    prim = cons_to_prim([1.0, 0.0, 2.5], GAS)
    values = [float(prim.rho), float(prim.vel[0]), float(prim.press), float(prim.theta)]
    np.testing.assert_allclose(values, [1.0, 0.0, 1.0, 1.0], rtol=1e-15)


def test_sod_states():
    assert float(cons_to_prim([0.125, 0.0, 0.25], GAS).press) == pytest.approx(0.1, rel=1e-14)
    U = prim_to_cons([1.0, 0.125], [0.0, 0.0], [1.0, 0.1], GAS)
    np.testing.assert_allclose(U[:, -1], [2.5, 0.25], rtol=1e-15)
    np.testing.assert_allclose(prim_to_cons(1.0, 0.0, 1.0, GAS), [1.0, 0.0, 2.5], rtol=1e-15)


def test_zero_internal_energy_is_violation():
    with pytest.raises(StateViolationError) as info:
        cons_to_prim([2.0, 1.0, 0.25], GAS)
    assert info.value.rho == 2.0
    assert info.value.pressure == 0.0


def test_negative_density_is_violation():
    with pytest.raises(StateViolationError):
        cons_to_prim([[1.0, 0.0, 2.5], [-1.0, 0.0, 2.5]], GAS)


@pytest.mark.parametrize("dim", [1, 2])
def test_round_trip_random(dim):
    rng = np.random.default_rng(1)
    U = random_states(rng, 10_000, dim)
    prim = cons_to_prim(U, GAS)
    np.testing.assert_allclose(prim.theta * prim.rho, prim.press, rtol=1e-13)
    V = prim_to_cons(prim.rho, prim.vel, prim.press, GAS)
    np.testing.assert_allclose(V, U, rtol=1e-14, atol=1e-14 * np.abs(U).max())
    back = cons_to_prim(V, GAS)
    np.testing.assert_allclose(back.press, prim.press, rtol=1e-13)


def test_physical_flux_density_wave_state():
    # (rho, u, p) = (1, 0.1, 10): mass 0.1, momentum rho u^2 + p, energy (E + p) u
    U = prim_to_cons(1.0, 0.1, 10.0, GAS)
    F = physical_flux(U, 0, GAS)
    E = 10.0 / 0.4 + 0.5 * 0.01
    np.testing.assert_allclose(F, [0.1, 0.01 + 10.0, (E + 10.0) * 0.1], rtol=1e-15)


def test_physical_flux_at_rest_and_homogeneity():
    rng = np.random.default_rng(2)
    U = prim_to_cons(rng.uniform(0.5, 2, 50), np.zeros((50, 2)), rng.uniform(0.5, 2, 50), GAS)
    for d in (0, 1):
        F = physical_flux(U, d, GAS)
        assert np.all(F[:, 0] == 0.0) and np.all(F[:, -1] == 0.0)
        np.testing.assert_allclose(F[:, 1 + d], cons_to_prim(U, GAS).press, rtol=1e-15)
    U = random_states(rng, 100, 2)
    for alpha in (0.5, 3.0):
        np.testing.assert_allclose(physical_flux(alpha * U, 1, GAS), alpha * physical_flux(U, 1, GAS),
                                   rtol=1e-13, atol=1e-13)


def test_max_wave_speed_sod():
    UL = prim_to_cons(1.0, 0.0, 1.0, GAS)
    UR = prim_to_cons(0.125, 0.0, 0.1, GAS)
    lam = float(max_wave_speed(UL, UR, GAS))
    assert lam == pytest.approx(math.sqrt(1.4), rel=1e-15)
    assert lam == pytest.approx(1.18322, abs=1e-5)


def test_max_wave_speed_symmetric_and_bounding():
    rng = np.random.default_rng(3)
    UL, UR = random_states(rng, 1000, 2), random_states(rng, 1000, 2)
    for d in (0, 1):
        lam = max_wave_speed(UL, UR, GAS, d)
        np.testing.assert_array_equal(lam, max_wave_speed(UR, UL, GAS, d))
        for U in (UL, UR):
            prim = cons_to_prim(U, GAS)
            assert np.all(lam >= np.abs(prim.vel[:, d]) + np.sqrt(1.4 * prim.press / prim.rho))
    same = max_wave_speed(UL, UL, GAS)
    prim = cons_to_prim(UL, GAS)
    np.testing.assert_allclose(same, np.abs(prim.vel[:, 0]) + np.sqrt(1.4 * prim.press / prim.rho), rtol=1e-15)


def test_entropy_quantities_unit_state():
    q = entropy_quantities(prim_to_cons(1.0, 0.0, 1.0, GAS), GAS, Theta=1.0)
    assert float(q.specific_s) == 0.0 and float(q.total_S) == 0.0
    assert float(q.ballistic_H) == pytest.approx(2.5, rel=1e-15)
    with pytest.raises(ValueError):
        entropy_quantities(prim_to_cons(1.0, 0.0, 1.0, GAS), GAS, Theta=0.0)


@settings(max_examples=200, deadline=None)
@given(rho=st.floats(1e-3, 1e3), u=st.floats(-50, 50), v=st.floats(-50, 50), p=st.floats(1e-3, 1e3))
def test_approximate_entropy_identity(rho, u, v, p):
    U = prim_to_cons(rho, np.array([u, v]), p, GAS)
    S = float(approximate_entropy(U, GAS))
    prim = cons_to_prim(U, GAS)
    expected = float(GAS.c_v * prim.rho * math.log(prim.theta) - prim.rho * math.log(prim.rho))
    assert S == pytest.approx(expected, rel=1e-12, abs=1e-12 * (abs(rho) * (1 + abs(math.log(rho)))))
    q = entropy_quantities(U, GAS, Theta=1.0)
    assert float(q.total_S) == pytest.approx(float(prim.rho * q.specific_s), rel=1e-13, abs=1e-300)


def midpoint_relative_entropy(length, n, rho, u, theta, r, Theta, v, gamma=1.4):
    """Independent midpoint-rule evaluation for constant-in-space inputs on an interval."""
    cv = 1.0 / (gamma - 1.0)
    s = lambda rh, th: cv * math.log(th) - math.log(rh)  # noqa: E731
    H = cv * r * Theta - Theta * r * s(r, Theta)
    dH = cv * Theta - Theta * s(r, Theta) + Theta
    integrand = 0.5 * rho * (u - v) ** 2 - Theta * rho * s(rho, theta) - rho * dH + (dH * r - H)
    h = length / n
    return sum(integrand * h for _ in range(n))


def test_relative_entropy_constant_field_against_oracle():
    mesh = Mesh.interval(0.0, 1.0, 8)
    field = DiscreteField.zeros(mesh, 2)
    field.data[...] = prim_to_cons(1.0, 0.0, 1.0, GAS)
    value = relative_entropy(field, r=1.0, Theta=1.0, v=0.0)
    oracle = midpoint_relative_entropy(1.0, 80, 1.0, 0.0, 1.0, 1.0, 1.0, 0.0)
    assert value == pytest.approx(oracle, abs=1e-8)
    assert value == pytest.approx(-2.5, abs=1e-12)


def test_relative_entropy_kinetic_term_vanishes_for_matching_velocity():
    mesh = Mesh.interval(-1.0, 1.0, 16)
    field = DiscreteField.zeros(mesh, 3)
    x = field.coordinates()[0]
    u = 0.3 * np.cos(np.pi * x)
    field.data[...] = prim_to_cons(1.0 + 0.2 * np.sin(np.pi * x), u, 2.0, GAS)
    with_u = relative_entropy(field, r=1.0, Theta=1.0, v=lambda x: 0.3 * np.cos(np.pi * x))
    moved = relative_entropy(field, r=1.0, Theta=1.0, v=lambda x: 0.3 * np.cos(np.pi * x) + 0.1)
    wq = field.quadrature_weights()
    kinetic = float(np.sum(wq * 0.5 * field.data[..., 0] * 0.01))
    assert moved - with_u == pytest.approx(kinetic, rel=1e-12)


def test_relative_entropy_scales_with_domain_length():
    base = DiscreteField.zeros(Mesh.interval(0.0, 1.0, 4), 1)
    base.data[...] = prim_to_cons(1.3, 0.2, 0.7, GAS)
    longer = DiscreteField.zeros(Mesh.interval(0.0, 3.0, 4), 1)
    longer.data[...] = base.data
    ref = dict(r=0.9, Theta=1.1, v=0.05)
    assert relative_entropy(longer, **ref) == pytest.approx(3.0 * relative_entropy(base, **ref), rel=1e-13)


def test_relative_entropy_rejects_nonpositive_reference():
    field = DiscreteField.zeros(Mesh.interval(0.0, 1.0, 2), 0)
    field.data[...] = prim_to_cons(1.0, 0.0, 1.0, GAS)
    with pytest.raises(ValueError):
        relative_entropy(field, r=0.0, Theta=1.0, v=0.0)


def test_ballistic_free_energy_formula():
    rho, theta, Theta = 1.7, 0.8, 1.2
    s = GAS.c_v * math.log(theta) - math.log(rho)
    assert float(ballistic_free_energy(rho, theta, Theta, GAS)) == pytest.approx(
        GAS.c_v * rho * theta - Theta * rho * s, rel=1e-15)
