"""Two-point numerical fluxes for the Euler equations.

* :func:`llf_flux` -- local Lax-Friedrichs (Rusanov) surface flux
* :func:`ranocha_ec_flux` -- entropy-conservative, kinetic-energy
  preserving volume flux built on logarithmic means
* :func:`central_flux` -- arithmetic mean of the physical fluxes

The compiled kernels (leading underscore) take scalar states and are
shared with the semidiscretization loops; the public functions broadcast
them over arrays of states with components on the last axis.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .operators import InvalidInputError
from .physics import GasModel, check_states

# flux kind codes understood by the compiled kernels
EC = 0
CENTRAL = 1
LLF = 2

# LLF dissipation variants
DISSIPATE_STATE = 0
DISSIPATE_FLUX = 1

# energy-flux variants of the EC flux
EC_STANDARD = 0
EC_LITERAL = 1

VOLUME_FLUXES = {"ec": EC, "central": CENTRAL}
SURFACE_FLUXES = {"llf": LLF, "ec": EC, "central": CENTRAL}
LLF_DISSIPATION = {"state": DISSIPATE_STATE, "flux": DISSIPATE_FLUX}
EC_ENERGY_FORMS = {"standard": EC_STANDARD, "literal": EC_LITERAL}

_LOG_MEAN_SERIES_CUTOFF = 1e-4


@njit(cache=True)
def _log_mean(a, b):
    # arguments ordered so that log_mean(a, b) == log_mean(b, a) bitwise
    if a > b:
        a, b = b, a
    f2 = (a * (a - 2.0 * b) + b * b) / (a * (a + 2.0 * b) + b * b)
    if f2 < _LOG_MEAN_SERIES_CUTOFF:
        return (a + b) / (2.0 + f2 * (2.0 / 3.0 + f2 * (2.0 / 5.0 + f2 * (2.0 / 7.0))))
    return (b - a) / math.log(b / a)


# The compiled kernels pass each state as a tuple
#   (rho, m1, m2, E, u, v, p, c, rho/p)
# built once by _state; 1D states enter with m2 = v = 0, which leaves every
# 1D formula unchanged.

@njit(cache=True)
def _pressure(r, m1, m2, E, gamma):
    return (gamma - 1.0) * (E - 0.5 * (m1 * m1 + m2 * m2) / r)


@njit(cache=True)
def _state(r, m1, m2, E, gamma):
    p = _pressure(r, m1, m2, E, gamma)
    return (r, m1, m2, E, m1 / r, m2 / r, p, math.sqrt(gamma * p / r), r / p)


@njit(cache=True)
def _phys_flux(s, d):
    p = s[6]
    if d == 0:
        vn = s[4]
        return s[1], s[1] * vn + p, s[2] * vn, (s[3] + p) * vn
    vn = s[5]
    return s[2], s[1] * vn, s[2] * vn + p, (s[3] + p) * vn


@njit(cache=True)
def _ec_flux(a, b, d, gamma, form):
    uL, vL, pL = a[4], a[5], a[6]
    uR, vR, pR = b[4], b[5], b[6]
    rho_log = _log_mean(a[0], b[0])
    beta_log = _log_mean(a[8], b[8])
    p_avg = 0.5 * (pL + pR)
    u_avg = 0.5 * (uL + uR)
    v_avg = 0.5 * (vL + vR)
    if d == 0:
        vn_avg = u_avg
        vn_jump = uR - uL
    else:
        vn_avg = v_avg
        vn_jump = vR - vL

    f_rho = rho_log * vn_avg
    f_m1 = u_avg * f_rho
    f_m2 = v_avg * f_rho
    if d == 0:
        f_m1 += p_avg
    else:
        f_m2 += p_avg
    if form == EC_STANDARD:
        kin = (u_avg * u_avg - 0.5 * (0.5 * (uL * uL + uR * uR))
               + v_avg * v_avg - 0.5 * (0.5 * (vL * vL + vR * vR)))
        internal = rho_log / ((gamma - 1.0) * beta_log)
    else:
        # alternative energy component kept for auditing
        s_avg = u_avg + v_avg
        kin = u_avg * u_avg + v_avg * v_avg - 0.5 * s_avg * s_avg
        internal = -(rho_log / beta_log) / (gamma - 1.0)
    f_E = (rho_log * kin + internal + p_avg) * vn_avg - 0.25 * (pR - pL) * vn_jump
    return f_rho, f_m1, f_m2, f_E


@njit(cache=True)
def _wave_speed(s, d):
    vn = s[4] if d == 0 else s[5]
    return abs(vn) + s[7]


@njit(cache=True)
def _llf_flux(a, b, d, sign, diss):
    fL = _phys_flux(a, d)
    fR = _phys_flux(b, d)
    h = 0.5 * max(_wave_speed(a, d), _wave_speed(b, d))
    if diss == DISSIPATE_STATE:
        j0, j1, j2, j3 = b[0] - a[0], b[1] - a[1], b[2] - a[2], b[3] - a[3]
    else:
        j0, j1, j2, j3 = fR[0] - fL[0], fR[1] - fL[1], fR[2] - fL[2], fR[3] - fL[3]
    return (0.5 * (fL[0] + fR[0]) * sign - h * j0,
            0.5 * (fL[1] + fR[1]) * sign - h * j1,
            0.5 * (fL[2] + fR[2]) * sign - h * j2,
            0.5 * (fL[3] + fR[3]) * sign - h * j3)


@njit(cache=True)
def _central_flux(a, b, d):
    fL = _phys_flux(a, d)
    fR = _phys_flux(b, d)
    return (0.5 * (fL[0] + fR[0]), 0.5 * (fL[1] + fR[1]),
            0.5 * (fL[2] + fR[2]), 0.5 * (fL[3] + fR[3]))


@njit(cache=True)
def _two_point(kind, a, b, d, gamma, diss, form):
    if kind == EC:
        return _ec_flux(a, b, d, gamma, form)
    if kind == CENTRAL:
        return _central_flux(a, b, d)
    return _llf_flux(a, b, d, 1.0, diss)


@njit(cache=True)
def _batch(kind, UL, UR, d, sign, gamma, diss, form, out):
    nc = UL.shape[1]
    for i in range(UL.shape[0]):
        m2L = UL[i, 2] if nc == 4 else 0.0
        m2R = UR[i, 2] if nc == 4 else 0.0
        a = _state(UL[i, 0], UL[i, 1], m2L, UL[i, nc - 1], gamma)
        b = _state(UR[i, 0], UR[i, 1], m2R, UR[i, nc - 1], gamma)
        if kind == LLF:
            f = _llf_flux(a, b, d, sign, diss)
        else:
            f = _two_point(kind, a, b, d, gamma, diss, form)
        out[i, 0] = f[0]
        out[i, 1] = f[1]
        if nc == 4:
            out[i, 2] = f[2]
        out[i, nc - 1] = f[3]


@njit(cache=True)
def _log_mean_batch(a, b, out):
    for i in range(a.shape[0]):
        out[i] = _log_mean(a[i], b[i])


def log_mean(a, b):
    """Logarithmic mean ``(a - b) / (log a - log b)`` with a stable limit.

    Near ``a == b`` a truncated series in ``f^2``, ``f = (a-b)/(a+b)``,
    replaces the quotient.
    """
    a, b = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    if np.any(~(a > 0)) or np.any(~(b > 0)):
        raise InvalidInputError("log_mean requires positive arguments")
    shape = a.shape
    out = np.empty(a.size)
    _log_mean_batch(np.ascontiguousarray(a).ravel(), np.ascontiguousarray(b).ravel(), out)
    return out.reshape(shape) if shape else float(out[0])


def _apply(kind, U_left, U_right, d, gas, sign=1.0, diss=DISSIPATE_STATE, form=EC_STANDARD):
    UL, UR = np.broadcast_arrays(np.asarray(U_left, dtype=float), np.asarray(U_right, dtype=float))
    check_states(UL, gas)
    check_states(UR, gas)
    nc = UL.shape[-1]
    if not 0 <= d < nc - 2:
        raise ValueError(f"direction {d} invalid for {nc - 2}D states")
    shape = UL.shape
    UL2 = np.ascontiguousarray(UL).reshape(-1, nc)
    UR2 = np.ascontiguousarray(UR).reshape(-1, nc)
    out = np.empty_like(UL2)
    _batch(kind, UL2, UR2, d, float(sign), gas.gamma, diss, form, out)
    return out.reshape(shape)


def _parse_normal(normal, ndim):
    """Accept an axis index or a signed unit axis vector; return (axis, sign)."""
    if np.isscalar(normal):
        return int(normal), 1.0
    n = np.asarray(normal, dtype=float)
    axes = np.flatnonzero(n)
    if n.shape != (ndim,) or axes.size != 1 or abs(n[axes[0]]) != 1.0:
        raise ValueError(f"normal must be a unit axis vector, got {normal!r}")
    return int(axes[0]), float(n[axes[0]])


def llf_flux(U_left, U_right, normal, gas: GasModel, dissipation: str = "state"):
    """Local Lax-Friedrichs flux ``1/2 (f(U-) + f(U+)).n - lambda/2 [[.]]``.

    Parameters
    ----------
    U_left, U_right : array_like
        States on the minus and plus side of the interface.
    normal : int or array_like
        Axis index (positive orientation) or a signed unit axis vector.
    dissipation : {"state", "flux"}
        Jump in conserved states (Rusanov) or in physical fluxes.
    """
    ndim = np.shape(U_left)[-1] - 2
    d, sign = _parse_normal(normal, ndim)
    return _apply(LLF, U_left, U_right, d, gas, sign=sign, diss=LLF_DISSIPATION[dissipation])


def ranocha_ec_flux(U_left, U_right, direction: int, gas: GasModel, energy_form: str = "standard"):
    """Entropy-conservative two-point flux along ``direction``.

    ``energy_form="literal"`` selects an alternative energy component
    (sign-flipped internal term, cross kinetic term); it is neither
    consistent nor entropy conservative and exists for auditing only.
    """
    return _apply(EC, U_left, U_right, int(direction), gas, form=EC_ENERGY_FORMS[energy_form])


def central_flux(U_left, U_right, direction: int, gas: GasModel):
    return _apply(CENTRAL, U_left, U_right, int(direction), gas)
