"""Flux-differencing DGSEM right-hand side.

Per element, with ``J = 2/h`` the reference-to-physical scaling, the drift
at node ``i`` of a tensor line is

    -2 J sum_l D[i, l] f_vol(U_i, U_l)
    + J / w_i * (B-weighted face terms  f(U_face) - f_num)

applied along x-lines and y-lines with the same 1D operators.  Degree 0
has ``D = 0`` and the face terms reduce to the finite volume update
``(f_num_left - f_num_right) / h``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from . import fluxes
from .fluxes import _phys_flux, _pressure, _state, _two_point
from .mesh import DiscreteField
from .physics import StateViolationError


@dataclass(frozen=True)
class SchemeOptions:
    """Flux choices of the semidiscretization.

    ``surface_flux="ec"`` with the EC volume flux gives the semidiscretely
    entropy-conservative scheme (test mode).
    """

    volume_flux: str = "ec"
    surface_flux: str = "llf"
    llf_dissipation: str = "state"
    ec_energy_form: str = "standard"

    def __post_init__(self):
        for value, table, key in (
            (self.volume_flux, fluxes.VOLUME_FLUXES, "volume_flux"),
            (self.surface_flux, fluxes.SURFACE_FLUXES, "surface_flux"),
            (self.llf_dissipation, fluxes.LLF_DISSIPATION, "llf_dissipation"),
            (self.ec_energy_form, fluxes.EC_ENERGY_FORMS, "ec_energy_form"),
        ):
            if value not in table:
                raise ValueError(f"{key}={value!r} not in {sorted(table)}")

    def codes(self) -> tuple:
        return (
            fluxes.VOLUME_FLUXES[self.volume_flux],
            fluxes.SURFACE_FLUXES[self.surface_flux],
            fluxes.LLF_DISSIPATION[self.llf_dissipation],
            fluxes.EC_ENERGY_FORMS[self.ec_energy_form],
        )


_NSTATE = 9


@njit(cache=True)
def _states(U, gamma, rho_floor, p_floor, W):
    """Fill ``W`` with the state tuples of every node.

    Returns -1, or the flat index of the first node with density or
    pressure at or below its floor (nonfinite values included).
    """
    ny, nx, npy, npx, nc = U.shape
    flat = 0
    for iy in range(ny):
        for ix in range(nx):
            for jy in range(npy):
                for jx in range(npx):
                    r = U[iy, ix, jy, jx, 0]
                    m1 = U[iy, ix, jy, jx, 1]
                    m2 = U[iy, ix, jy, jx, 2] if nc == 4 else 0.0
                    E = U[iy, ix, jy, jx, nc - 1]
                    if not (r > rho_floor):
                        return flat
                    if not (_pressure(r, m1, m2, E, gamma) > p_floor):
                        return flat
                    s = _state(r, m1, m2, E, gamma)
                    for c in range(_NSTATE):
                        W[iy, ix, jy, jx, c] = s[c]
                    flat += 1
    return -1


@njit(cache=True)
def _get(W, iy, ix, jy, jx):
    return (W[iy, ix, jy, jx, 0], W[iy, ix, jy, jx, 1], W[iy, ix, jy, jx, 2],
            W[iy, ix, jy, jx, 3], W[iy, ix, jy, jx, 4], W[iy, ix, jy, jx, 5],
            W[iy, ix, jy, jx, 6], W[iy, ix, jy, jx, 7], W[iy, ix, jy, jx, 8])


@njit(cache=True)
def _accumulate(out, iy, ix, jy, jx, a, f):
    nc = out.shape[4]
    out[iy, ix, jy, jx, 0] += a * f[0]
    out[iy, ix, jy, jx, 1] += a * f[1]
    if nc == 4:
        out[iy, ix, jy, jx, 2] += a * f[2]
    out[iy, ix, jy, jx, nc - 1] += a * f[3]


@njit(cache=True)
def _face_terms(out, a, b, F, d, minus, plus, c_minus, c_plus):
    # minus/plus: (iy, ix, jy, jx) of the traces, or None-like (-1,) on a boundary
    if minus[0] >= 0:
        f = _phys_flux(a, d)
        _accumulate(out, minus[0], minus[1], minus[2], minus[3], c_minus,
                    (f[0] - F[0], f[1] - F[1], f[2] - F[2], f[3] - F[3]))
    if plus[0] >= 0:
        f = _phys_flux(b, d)
        _accumulate(out, plus[0], plus[1], plus[2], plus[3], -c_plus,
                    (f[0] - F[0], f[1] - F[1], f[2] - F[2], f[3] - F[3]))


@njit(cache=True)
def _rhs_kernel(U, D, w, hx, hy, per_x, per_y, vol, surf, diss, form,
                gamma, rho_floor, p_floor, out):
    """Drift of ``U`` (shape ``(ny, nx, npy, npx, nc)``) written to ``out``.

    Returns -1, or the flat node index of the first inadmissible state.
    """
    ny, nx, npy, npx, nc = U.shape
    two_d = nc == 4
    W = np.empty((ny, nx, npy, npx, _NSTATE))
    bad = _states(U, gamma, rho_floor, p_floor, W)
    if bad >= 0:
        return bad

    out[...] = 0.0
    Jx = 2.0 / hx
    Jy = 2.0 / hy

    # volume terms along x-lines, using the symmetry of the two-point flux;
    # the diagonal term D[i, i] f(U_i, U_i) is D[i, i] f(U_i)
    if npx > 1:
        for iy in range(ny):
            for ix in range(nx):
                for jy in range(npy):
                    for i in range(npx):
                        a = _get(W, iy, ix, jy, i)
                        for l in range(i + 1, npx):
                            b = _get(W, iy, ix, jy, l)
                            f = _two_point(vol, a, b, 0, gamma, diss, form)
                            _accumulate(out, iy, ix, jy, i, -2.0 * Jx * D[i, l], f)
                            _accumulate(out, iy, ix, jy, l, -2.0 * Jx * D[l, i], f)
                        if D[i, i] != 0.0:
                            _accumulate(out, iy, ix, jy, i, -2.0 * Jx * D[i, i], _phys_flux(a, 0))
    if two_d and npy > 1:
        for iy in range(ny):
            for ix in range(nx):
                for jx in range(npx):
                    for i in range(npy):
                        a = _get(W, iy, ix, i, jx)
                        for l in range(i + 1, npy):
                            b = _get(W, iy, ix, l, jx)
                            f = _two_point(vol, a, b, 1, gamma, diss, form)
                            _accumulate(out, iy, ix, i, jx, -2.0 * Jy * D[i, l], f)
                            _accumulate(out, iy, ix, l, jx, -2.0 * Jy * D[l, i], f)
                        if D[i, i] != 0.0:
                            _accumulate(out, iy, ix, i, jx, -2.0 * Jy * D[i, i], _phys_flux(a, 1))

    # x faces: face k separates element k-1 (minus side) from element k;
    # outflow boundaries copy the interior trace into the ghost state
    cR = Jx / w[npx - 1]
    cL = Jx / w[0]
    for iy in range(ny):
        for j in range(npy):
            for k in range(nx + 1):
                minus = (iy, k - 1, j, npx - 1) if k > 0 else (-1, 0, 0, 0)
                plus = (iy, k, j, 0) if k < nx else (-1, 0, 0, 0)
                if k == 0:
                    a = _get(W, iy, nx - 1, j, npx - 1) if per_x else _get(W, iy, 0, j, 0)
                else:
                    a = _get(W, iy, k - 1, j, npx - 1)
                if k == nx:
                    b = _get(W, iy, 0, j, 0) if per_x else a
                else:
                    b = _get(W, iy, k, j, 0)
                F = _two_point(surf, a, b, 0, gamma, diss, form)
                _face_terms(out, a, b, F, 0, minus, plus, cR, cL)

    if not two_d:
        return -1

    cT = Jy / w[npy - 1]
    cB = Jy / w[0]
    for ix in range(nx):
        for j in range(npx):
            for k in range(ny + 1):
                minus = (k - 1, ix, npy - 1, j) if k > 0 else (-1, 0, 0, 0)
                plus = (k, ix, 0, j) if k < ny else (-1, 0, 0, 0)
                if k == 0:
                    a = _get(W, ny - 1, ix, npy - 1, j) if per_y else _get(W, 0, ix, 0, j)
                else:
                    a = _get(W, k - 1, ix, npy - 1, j)
                if k == ny:
                    b = _get(W, 0, ix, 0, j) if per_y else a
                else:
                    b = _get(W, k, ix, 0, j)
                F = _two_point(surf, a, b, 1, gamma, diss, form)
                _face_terms(out, a, b, F, 1, minus, plus, cT, cB)
    return -1


def as_kernel_array(data: np.ndarray) -> np.ndarray:
    """5-D view ``(ny, nx, npy, npx, nc)`` of 1D or 2D field data."""
    if data.ndim == 3:
        n, np1, nc = data.shape
        return data.reshape(1, n, 1, np1, nc)
    return data


def kernel_arguments(field: DiscreteField, options: SchemeOptions) -> tuple:
    """Positional arguments of :func:`_rhs_kernel` after ``U``, before ``out``."""
    mesh = field.mesh
    hx = mesh.h[0]
    hy = mesh.h[1] if mesh.dim == 2 else 1.0
    per_x = mesh.bc[0] == "periodic"
    per_y = mesh.bc[1] == "periodic" if mesh.dim == 2 else True
    vol, surf, diss, form = options.codes()
    gas = field.gas
    return (np.ascontiguousarray(field.ops.D), np.ascontiguousarray(field.ops.weights),
            hx, hy, per_x, per_y, vol, surf, diss, form,
            gas.gamma, gas.rho_floor, gas.p_floor)


def violation_error(field: DiscreteField, flat_node: int) -> StateViolationError:
    npe = field.nodes_per_element
    element, node = divmod(int(flat_node), npe)
    u = field.flat()[element, node]
    rho = float(u[0])
    with np.errstate(divide="ignore", invalid="ignore"):
        p = float((field.gas.gamma - 1.0) * (u[-1] - 0.5 * np.sum(u[1:-1] ** 2) / u[0]))
    return StateViolationError(
        f"inadmissible state at element {element}, node {node}: rho={rho!r}, p={p!r}",
        index=(element, node), rho=rho, pressure=p,
    )


def dg_rhs(field: DiscreteField, options: SchemeOptions | None = None, **kwargs) -> DiscreteField:
    """Deterministic drift of the semidiscrete system.

    Parameters
    ----------
    field : DiscreteField
    options : SchemeOptions, optional
        Flux choices; keyword arguments build one when omitted.

    Raises
    ------
    StateViolationError
        With ``index=(element, node)`` of the first inadmissible node.
    """
    options = options or SchemeOptions(**kwargs)
    out = np.empty_like(field.data)
    status = _rhs_kernel(as_kernel_array(field.data), *kernel_arguments(field, options),
                         as_kernel_array(out))
    if status >= 0:
        raise violation_error(field, status)
    return field.with_data(out)
