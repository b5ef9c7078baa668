import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stocheuler.fluxes import central_flux, llf_flux, log_mean, ranocha_ec_flux
from stocheuler.operators import InvalidInputError
from stocheuler.physics import GasModel, StateViolationError, physical_flux, prim_to_cons

GAS = GasModel()


def random_states(rng, n, dim):
    return prim_to_cons(rng.uniform(0.2, 4.0, n), rng.uniform(-2.0, 2.0, (n, dim)),
                        rng.uniform(0.2, 8.0, n), GAS)


def entropy_variables(U, gamma=1.4):
    """Entropy variables of eta = -rho s / (gamma - 1), s = log(p rho^-gamma)."""
    rho = U[..., 0]
    vel = U[..., 1:-1] / rho[..., None]
    p = (gamma - 1.0) * (U[..., -1] - 0.5 * rho * np.sum(vel ** 2, axis=-1))
    s = np.log(p) - gamma * np.log(rho)
    beta = rho / p
    w0 = (gamma - s) / (gamma - 1.0) - 0.5 * beta * np.sum(vel ** 2, axis=-1)
    return np.concatenate([w0[..., None], beta[..., None] * vel, -beta[..., None]], axis=-1)


def flux_potential(U, d):
    """psi_d = w . f_d - q_d = rho u_d for the Euler entropy pair above."""
    return U[..., 1 + d]


def tadmor_residual(UL, UR, F, d):
    jump_w = entropy_variables(UR) - entropy_variables(UL)
    return np.sum(jump_w * F, axis=-1) - (flux_potential(UR, d) - flux_potential(UL, d))


# log mean ---------------------------------------------------------------------

def test_log_mean_closed_forms():
    assert log_mean(1.0, 1.0) == 1.0
    assert log_mean(1.0, math.e) == pytest.approx(math.e - 1.0, rel=1e-15)
    assert log_mean(1.0, math.e) == pytest.approx(1.718281828, abs=1e-9)


@pytest.mark.parametrize("rho", [1e-6, 0.3, 1.0, 7.5, 1e5])
def test_log_mean_near_equal_against_mpmath(rho):
    mpmath.mp.dps = 50
    eps = 1e-13
    a, b = rho, rho * (1 + eps)
    exact = (mpmath.mpf(b) - mpmath.mpf(a)) / (mpmath.log(mpmath.mpf(b)) - mpmath.log(mpmath.mpf(a)))
    assert log_mean(a, b) == pytest.approx(float(exact), rel=1e-14)
    assert log_mean(a, b) == pytest.approx(rho * (1 + eps / 2), rel=1e-12)


@pytest.mark.parametrize("ratio", [1 + 1e-15, 1 + 1e-9, 1.01, 1.0199, 1.0201, 1.5, 10.0, 1e6])
def test_log_mean_against_mpmath_across_branches(ratio):
    mpmath.mp.dps = 60
    a = 0.37
    b = a * ratio
    ma, mb = mpmath.mpf(a), mpmath.mpf(b)
    exact = ma if ma == mb else (mb - ma) / (mpmath.log(mb) - mpmath.log(ma))
    assert log_mean(a, b) == pytest.approx(float(exact), rel=2e-15)


def test_log_mean_symmetry_and_betweenness_million_pairs():
    rng = np.random.default_rng(11)
    n = 1_000_000
    a = 10.0 ** rng.uniform(-3, 3, n)
    expo = rng.uniform(-15, math.log10(6), n)
    b = a * (1.0 + 10.0 ** expo)
    ab = log_mean(a, b)
    np.testing.assert_array_equal(ab, log_mean(b, a))
    assert np.all(ab >= np.minimum(a, b)) and np.all(ab <= np.maximum(a, b))


@pytest.mark.parametrize("a,b", [(0.0, 1.0), (1.0, -2.0), (float("nan"), 1.0)])
def test_log_mean_rejects_nonpositive(a, b):
    with pytest.raises(InvalidInputError):
        log_mean(a, b)


# consistency / symmetry -------------------------------------------------------------

@pytest.mark.parametrize("dim", [1, 2])
def test_consistency_all_fluxes(dim):
    rng = np.random.default_rng(5)
    U = random_states(rng, 10_000, dim)
    for d in range(dim):
        f = physical_flux(U, d, GAS)
        scale = np.abs(f).max(axis=-1, keepdims=True)
        for F in (ranocha_ec_flux(U, U, d, GAS), llf_flux(U, U, d, GAS),
                  llf_flux(U, U, d, GAS, dissipation="flux"), central_flux(U, U, d, GAS)):
            assert np.all(np.abs(F - f) <= 1e-13 * scale)


@pytest.mark.parametrize("dim", [1, 2])
def test_ec_flux_symmetric(dim):
    rng = np.random.default_rng(6)
    UL, UR = random_states(rng, 10_000, dim), random_states(rng, 10_000, dim)
    for d in range(dim):
        A = ranocha_ec_flux(UL, UR, d, GAS)
        B = ranocha_ec_flux(UR, UL, d, GAS)
        assert np.all(np.abs(A - B) <= 1e-13 * np.abs(A).max(axis=-1, keepdims=True))


@pytest.mark.parametrize("dim", [1, 2])
def test_llf_conservation(dim):
    rng = np.random.default_rng(7)
    UL, UR = random_states(rng, 10_000, dim), random_states(rng, 10_000, dim)
    for d in range(dim):
        n = np.zeros(dim)
        n[d] = 1.0
        F = llf_flux(UL, UR, n, GAS)
        G = llf_flux(UR, UL, -n, GAS)
        assert np.all(np.abs(F + G) <= 1e-13 * np.abs(F).max(axis=-1, keepdims=True))


def test_llf_sod_interface_mass_flux():
    UL = prim_to_cons(1.0, 0.0, 1.0, GAS)
    UR = prim_to_cons(0.125, 0.0, 0.1, GAS)
    F = llf_flux(UL, UR, 0, GAS)
    assert F[0] == pytest.approx(math.sqrt(1.4) / 2 * 0.875, rel=1e-15)
    assert F[0] == pytest.approx(1.18322 / 2 * 0.875, abs=1e-5)


def test_llf_flux_dissipation_variant_differs():
    UL = prim_to_cons(1.0, 0.3, 1.0, GAS)
    UR = prim_to_cons(0.5, -0.1, 0.4, GAS)
    lam = max(abs(0.3) + math.sqrt(1.4), abs(-0.1) + math.sqrt(1.4 * 0.4 / 0.5))
    fL, fR = physical_flux(UL, 0, GAS), physical_flux(UR, 0, GAS)
    np.testing.assert_allclose(llf_flux(UL, UR, 0, GAS), 0.5 * (fL + fR) - 0.5 * lam * (UR - UL), rtol=1e-14)
    np.testing.assert_allclose(llf_flux(UL, UR, 0, GAS, "flux"), 0.5 * (fL + fR) - 0.5 * lam * (fR - fL),
                               rtol=1e-14)


def test_fluxes_reject_invalid_states():
    bad = np.array([1.0, 2.0, 1.0])
    good = prim_to_cons(1.0, 0.0, 1.0, GAS)
    with pytest.raises(StateViolationError):
        llf_flux(good, bad, 0, GAS)
    with pytest.raises(StateViolationError):
        ranocha_ec_flux(bad, good, 0, GAS)


def test_normal_validation():
    U = prim_to_cons(1.0, np.array([0.1, 0.2]), 1.0, GAS)
    with pytest.raises(ValueError):
        llf_flux(U, U, [0.6, 0.8], GAS)
    with pytest.raises(ValueError):
        ranocha_ec_flux(U, U, 2, GAS)


# entropy conservation ---------------------------------------------------------

@pytest.mark.parametrize("dim", [1, 2])
def test_ec_flux_satisfies_tadmor_condition(dim):
    rng = np.random.default_rng(8)
    UL, UR = random_states(rng, 10_000, dim), random_states(rng, 10_000, dim)
    for d in range(dim):
        r = tadmor_residual(UL, UR, ranocha_ec_flux(UL, UR, d, GAS), d)
        assert np.max(np.abs(r)) <= 1e-10


def test_literal_energy_flux_fails_oracle():
    # the literal energy component is neither consistent nor entropy conservative
    rng = np.random.default_rng(9)
    UL, UR = random_states(rng, 1000, 2), random_states(rng, 1000, 2)
    r = tadmor_residual(UL, UR, ranocha_ec_flux(UL, UR, 0, GAS, energy_form="literal"), 0)
    assert np.max(np.abs(r)) > 1e-2
    F = ranocha_ec_flux(UL, UL, 0, GAS, energy_form="literal")
    assert np.max(np.abs(F[:, -1] - physical_flux(UL, 0, GAS)[:, -1])) > 1e-2


def test_llf_dissipates_entropy():
    rng = np.random.default_rng(10)
    UL, UR = random_states(rng, 5000, 1), random_states(rng, 5000, 1)
    # [[w]] . F - [[psi]] <= 0 for an entropy stable flux (mathematical entropy)
    r = tadmor_residual(UL, UR, llf_flux(UL, UR, 0, GAS), 0)
    assert np.all(r <= 1e-10)


@settings(max_examples=300, deadline=None)
@given(rl=st.floats(0.05, 20), rr=st.floats(0.05, 20), ul=st.floats(-5, 5), ur=st.floats(-5, 5),
       pl=st.floats(0.05, 20), pr=st.floats(0.05, 20))
def test_tadmor_condition_property(rl, rr, ul, ur, pl, pr):
    UL = prim_to_cons(rl, ul, pl, GAS)
    UR = prim_to_cons(rr, ur, pr, GAS)
    r = tadmor_residual(UL, UR, ranocha_ec_flux(UL, UR, 0, GAS), 0)
    scale = 1.0 + np.abs(physical_flux(UL, 0, GAS)).max() + np.abs(physical_flux(UR, 0, GAS)).max()
    assert abs(float(r)) <= 1e-11 * scale
