"""Ideal-gas relations for the compressible Euler system.

States are numpy arrays whose last axis holds the conserved components
``(rho, m_1[, m_2], E)``; every function here broadcasts over the leading
axes.  The gas obeys ``p = (gamma - 1) rho e`` and ``p = rho theta``, so
``e = c_v theta`` with ``c_v = 1 / (gamma - 1)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


class StateViolationError(ValueError):
    """A state left the admissible set (non-positive density or pressure).

    Attributes
    ----------
    index : tuple
        Index (over the leading axes) of the first offending state.
    rho, pressure : float
        The offending values.
    """

    def __init__(self, message, index=(), rho=np.nan, pressure=np.nan):
        super().__init__(message)
        self.index = index
        self.rho = rho
        self.pressure = pressure


@dataclass(frozen=True)
class GasModel:
    """Polytropic ideal gas with validity floors for density and pressure."""

    gamma: float = 1.4
    rho_floor: float = 1e-12
    p_floor: float = 1e-12

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise ValueError(f"gamma must exceed 1, got {self.gamma}")

    @property
    def c_v(self) -> float:
        return 1.0 / (self.gamma - 1.0)


class PrimitiveState(NamedTuple):
    rho: np.ndarray
    vel: np.ndarray  # (..., d)
    press: np.ndarray
    theta: np.ndarray


class EntropyQuantities(NamedTuple):
    specific_s: np.ndarray
    total_S: np.ndarray
    ballistic_H: np.ndarray


def n_dims(U) -> int:
    return np.shape(U)[-1] - 2


def pressure(U, gas: GasModel) -> np.ndarray:
    U = np.asarray(U, dtype=float)
    rho = U[..., 0]
    mom = U[..., 1:-1]
    kinetic = 0.5 * np.sum(mom * mom, axis=-1) / rho
    return (gas.gamma - 1.0) * (U[..., -1] - kinetic)


def check_states(U, gas: GasModel) -> None:
    """Raise :class:`StateViolationError` if any state is inadmissible."""
    U = np.asarray(U, dtype=float)
    rho = U[..., 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        p = pressure(U, gas)
    bad = ~((rho > gas.rho_floor) & (p > gas.p_floor))
    if np.any(bad):
        idx = tuple(int(i) for i in np.argwhere(bad)[0])
        raise StateViolationError(
            f"inadmissible state at {idx}: rho={rho[idx]!r}, p={p[idx]!r}",
            index=idx, rho=float(rho[idx]), pressure=float(p[idx]),
        )


def cons_to_prim(U, gas: GasModel) -> PrimitiveState:
    """Conserved ``(rho, m, E)`` to primitive ``(rho, u, p, theta)``."""
    U = np.asarray(U, dtype=float)
    check_states(U, gas)
    rho = U[..., 0]
    vel = U[..., 1:-1] / rho[..., None]
    p = pressure(U, gas)
    return PrimitiveState(rho, vel, p, p / rho)


def prim_to_cons(rho, vel, press, gas: GasModel) -> np.ndarray:
    """Primitive ``(rho, u, p)`` to conserved ``(rho, m, E)``.

    ``vel`` carries the velocity components on its last axis; a bare
    scalar or an array shaped like ``rho`` is taken as 1D velocity.
    """
    rho = np.asarray(rho, dtype=float)
    press = np.asarray(press, dtype=float)
    vel = np.asarray(vel, dtype=float)
    if vel.ndim == 0 or vel.ndim == max(rho.ndim, press.ndim):
        vel = vel[..., None]
    shape = np.broadcast_shapes(rho.shape, press.shape, vel.shape[:-1])
    rho = np.broadcast_to(rho, shape)
    press = np.broadcast_to(press, shape)
    vel = np.broadcast_to(vel, shape + vel.shape[-1:])
    if np.any(~(rho > gas.rho_floor)) or np.any(~(press > gas.p_floor)):
        bad = ~((rho > gas.rho_floor) & (press > gas.p_floor))
        idx = tuple(int(i) for i in np.argwhere(bad)[0]) if bad.ndim else ()
        raise StateViolationError(
            f"inadmissible primitive state at {idx}", index=idx,
            rho=float(rho[idx]), pressure=float(press[idx]),
        )
    d = vel.shape[-1]
    U = np.empty(shape + (d + 2,))
    U[..., 0] = rho
    U[..., 1:-1] = rho[..., None] * vel
    U[..., -1] = press / (gas.gamma - 1.0) + 0.5 * rho * np.sum(vel * vel, axis=-1)
    return U


def physical_flux(U, direction: int, gas: GasModel) -> np.ndarray:
    """Euler flux ``f_d(U)`` along coordinate axis ``direction``."""
    U = np.asarray(U, dtype=float)
    check_states(U, gas)
    d = n_dims(U)
    if not 0 <= direction < d:
        raise ValueError(f"direction {direction} invalid for {d}D states")
    rho = U[..., 0]
    mom = U[..., 1:-1]
    p = pressure(U, gas)
    un = mom[..., direction] / rho
    F = np.empty_like(U)
    F[..., 0] = mom[..., direction]
    F[..., 1:-1] = mom * un[..., None]
    F[..., 1 + direction] += p
    F[..., -1] = (U[..., -1] + p) * un
    return F


def sound_speed(U, gas: GasModel) -> np.ndarray:
    U = np.asarray(U, dtype=float)
    return np.sqrt(gas.gamma * pressure(U, gas) / U[..., 0])


def max_wave_speed(U_left, U_right, gas: GasModel, direction: int = 0) -> np.ndarray:
    """``max(|u_n| + c)`` over the two states, ``u_n`` along ``direction``."""
    U_left = np.asarray(U_left, dtype=float)
    U_right = np.asarray(U_right, dtype=float)
    check_states(U_left, gas)
    check_states(U_right, gas)
    speeds = []
    for U in (U_left, U_right):
        un = U[..., 1 + direction] / U[..., 0]
        speeds.append(np.abs(un) + sound_speed(U, gas))
    return np.maximum(*speeds)


def temperature(U, gas: GasModel) -> np.ndarray:
    """Approximate temperature ``(gamma-1)/rho (E - |m|^2 / (2 rho))``."""
    U = np.asarray(U, dtype=float)
    rho = U[..., 0]
    return (gas.gamma - 1.0) / rho * (U[..., -1] - 0.5 * np.sum(U[..., 1:-1] ** 2, axis=-1) / rho)


def specific_entropy(rho, theta, gas: GasModel) -> np.ndarray:
    """``s = log(theta^c_v) - log(rho)``."""
    return gas.c_v * np.log(theta) - np.log(rho)


def approximate_entropy(U, gas: GasModel) -> np.ndarray:
    """Total entropy ``S^h`` written directly in conserved variables.

    ``S^h = c_v rho log((gamma-1)(E - |m|^2/(2 rho))) - (c_v + 1) rho log rho``
    """
    U = np.asarray(U, dtype=float)
    check_states(U, gas)
    rho = U[..., 0]
    internal = U[..., -1] - 0.5 * np.sum(U[..., 1:-1] ** 2, axis=-1) / rho
    return gas.c_v * rho * np.log((gas.gamma - 1.0) * internal) - (gas.c_v + 1.0) * rho * np.log(rho)


def ballistic_free_energy(rho, theta, Theta, gas: GasModel) -> np.ndarray:
    """``H_Theta(rho, theta) = rho e - Theta rho s``."""
    return gas.c_v * rho * theta - Theta * rho * specific_entropy(rho, theta, gas)


def ballistic_free_energy_drho(rho, theta, Theta, gas: GasModel) -> np.ndarray:
    """Partial derivative of ``H_Theta`` in ``rho`` at fixed ``theta``."""
    return gas.c_v * theta - Theta * specific_entropy(rho, theta, gas) + Theta


def entropy_quantities(U, gas: GasModel, Theta: float) -> EntropyQuantities:
    if not np.all(np.asarray(Theta) > 0):
        raise ValueError("Theta must be positive")
    prim = cons_to_prim(U, gas)
    s = specific_entropy(prim.rho, prim.theta, gas)
    return EntropyQuantities(
        specific_s=s,
        total_S=prim.rho * s,
        ballistic_H=ballistic_free_energy(prim.rho, prim.theta, Theta, gas),
    )


def _at_nodes(value, coords, shape):
    if callable(value):
        value = value(*coords)
    return np.broadcast_to(np.asarray(value, dtype=float), shape)


def relative_entropy(field, r, Theta, v, gas: GasModel | None = None) -> float:
    """Relative entropy of a discrete field against a smooth comparison triple.

    Evaluates, with the field's Gauss-Lobatto quadrature,

    .. math::

        \\tfrac12\\int\\rho|u - v|^2 - \\int\\Theta\\rho s(\\rho, \\vartheta)
        - \\int\\rho\\,\\partial_\\rho H_\\Theta(r, \\Theta)
        + \\int(\\partial_\\rho H_\\Theta(r, \\Theta)\\,r - H_\\Theta(r, \\Theta))

    Parameters
    ----------
    field : DiscreteField
    r, Theta, v : callable or array_like
        Comparison density, temperature and velocity.  Callables receive the
        nodal coordinate arrays (``x`` or ``x, y``); arrays must broadcast
        to the nodal shape (``v`` with a trailing velocity axis).
    """
    gas = gas if gas is not None else field.gas
    coords = field.coordinates()
    nodal_shape = field.nodal_shape
    d = field.mesh.dim
    r = _at_nodes(r, coords, nodal_shape)
    Theta = _at_nodes(Theta, coords, nodal_shape)
    if callable(v):
        v = v(*coords)
    v = np.asarray(v, dtype=float)
    if d == 1 and v.shape[-1:] != (1,):
        v = v[..., None]
    v = np.broadcast_to(v, nodal_shape + (d,))
    if np.any(~(r > 0)) or np.any(~(Theta > 0)):
        raise ValueError("comparison density and temperature must be positive")

    prim = cons_to_prim(field.data, gas)
    wq = field.quadrature_weights()
    dH = ballistic_free_energy_drho(r, Theta, Theta, gas)
    H = ballistic_free_energy(r, Theta, Theta, gas)
    kinetic = 0.5 * prim.rho * np.sum((prim.vel - v) ** 2, axis=-1)
    entropy = Theta * prim.rho * specific_entropy(prim.rho, prim.theta, gas)
    integrand = kinetic - entropy - prim.rho * dH + (dH * r - H)
    return float(np.sum(wq * integrand))

