"""Spatially homogeneous stochastic forcing and Euler-Maruyama time stepping.

The noise acts on the momentum with one scalar Wiener process per
momentum component, shared by every node:

    dU = (R(U) + h(U)) dt + g(U) dW,
    h(U) = (0, 0, 1/2 mu^2 rho n_w),   g(U) dW = (0, mu rho dW, mu m . dW)

where ``R`` is the DG drift.  Increments come from a counter-based
generator (Philox) keyed on ``(base_seed, sample_index)``, so sample
``k`` sees the same path at every spatial resolution.
"""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from numba import njit

from .mesh import DiscreteField
from .semidisc import (SchemeOptions, _rhs_kernel, as_kernel_array, kernel_arguments,
                       violation_error)

REASON_NONE = 0
REASON_NONFINITE = 1
REASON_DENSITY = 2
REASON_ENERGY = 3
REASON_STATE = 4
REASONS = {
    REASON_NONFINITE: "nonfinite",
    REASON_DENSITY: "density_floor",
    REASON_ENERGY: "energy_cap",
    REASON_STATE: "state_violation",
}

_UINT64_MAX = 2 ** 64 - 1


@dataclass(frozen=True)
class NoiseSpec:
    """Forcing factor ``mu``, number of Wiener components and the base seed."""

    mu: float = 0.0
    n_wiener: int = 1
    base_seed: int = 0

    def __post_init__(self):
        if not self.mu >= 0.0:
            raise ValueError(f"mu must be non-negative, got {self.mu}")
        if int(self.n_wiener) < 1:
            raise ValueError(f"n_wiener must be positive, got {self.n_wiener}")
        if not 0 <= int(self.base_seed) <= _UINT64_MAX:
            raise ValueError("base_seed must fit in 64 unsigned bits")


@dataclass(frozen=True)
class StoppingRecord:
    """Why and where a sample left the monitored region.

    ``location`` is ``(element, node)`` in the flat element-major layout.
    """

    triggered: bool
    time: float
    reason: str
    location: tuple
    step: int = -1


@dataclass(frozen=True)
class MonitorFloors:
    """Runtime monitors: density floor ``1/K`` and energy cap ``K``."""

    rho_min: float = 1e-8
    energy_max: float = 1e8


@dataclass(frozen=True)
class SampleConfig:
    """Everything :func:`evolve_sample` needs besides data, time and noise."""

    scheme: SchemeOptions = field(default_factory=SchemeOptions)
    floors: MonitorFloors = field(default_factory=MonitorFloors)
    sample_index: int = 0
    snapshot_stride: int = 0
    on_snapshot: Callable | None = None
    ledger_path: str | None = None


def wiener_increments(noise: NoiseSpec, sample_index: int, n_steps: int, dt: float) -> np.ndarray:
    """Increments ``dW`` of shape ``(n_steps, n_wiener)``, each ``N(0, dt)``.

    Normal variate ``(step, comp)`` is built by Box-Muller (cosine branch)
    from raw Philox outputs ``2 k`` and ``2 k + 1``, ``k = step n_w + comp``,
    of the generator keyed on ``(base_seed, sample_index)``.
    """
    if int(sample_index) < 0:
        raise ValueError("sample_index must be non-negative")
    n_w = int(noise.n_wiener)
    key = np.array([int(noise.base_seed), int(sample_index)], dtype=np.uint64)
    raw = np.random.Philox(key=key).random_raw(2 * n_steps * n_w).reshape(n_steps, n_w, 2)
    u1 = ((raw[..., 0] >> np.uint64(11)) + np.uint64(1)).astype(float) * 2.0 ** -53
    u2 = (raw[..., 1] >> np.uint64(11)).astype(float) * 2.0 ** -53
    z = np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)
    return z * np.sqrt(dt)


def path_hash(dW: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(dW, dtype=float).tobytes()).hexdigest()


@njit(cache=True)
def _em_update(U, R, dt, mu, dW, n_w):
    """In place ``U += dt (R + h(U)) + g(U) dW`` at every node."""
    ny, nx, npy, npx, nc = U.shape
    d = nc - 2
    half_mu2 = 0.5 * mu * mu * n_w
    for iy in range(ny):
        for ix in range(nx):
            for jy in range(npy):
                for jx in range(npx):
                    r = U[iy, ix, jy, jx, 0]
                    work = 0.0
                    for k in range(d):
                        m = U[iy, ix, jy, jx, 1 + k]
                        work += m * dW[k]
                        U[iy, ix, jy, jx, 1 + k] = m + (dt * R[iy, ix, jy, jx, 1 + k] + mu * r * dW[k])
                    E = U[iy, ix, jy, jx, nc - 1]
                    U[iy, ix, jy, jx, nc - 1] = E + (dt * (R[iy, ix, jy, jx, nc - 1] + half_mu2 * r)
                                                     + mu * work)
                    U[iy, ix, jy, jx, 0] = r + dt * R[iy, ix, jy, jx, 0]


@njit(cache=True)
def _scan_monitors(U, rho_min, energy_max):
    """First node (scan order) that is nonfinite, below the floor or above the cap."""
    ny, nx, npy, npx, nc = U.shape
    flat = 0
    for iy in range(ny):
        for ix in range(nx):
            for jy in range(npy):
                for jx in range(npx):
                    for c in range(nc):
                        if not np.isfinite(U[iy, ix, jy, jx, c]):
                            return REASON_NONFINITE, flat
                    if U[iy, ix, jy, jx, 0] < rho_min:
                        return REASON_DENSITY, flat
                    if U[iy, ix, jy, jx, nc - 1] > energy_max:
                        return REASON_ENERGY, flat
                    flat += 1
    return REASON_NONE, -1


@njit(cache=True)
def _totals(U, wq, row):
    # row = (t, mass, momentum..., energy, ...); t is written by the caller
    ny, nx, npy, npx, nc = U.shape
    for c in range(nc):
        row[1 + c] = 0.0
    for iy in range(ny):
        for ix in range(nx):
            for jy in range(npy):
                for jx in range(npx):
                    wgt = wq[iy, ix, jy, jx]
                    for c in range(nc):
                        row[1 + c] += wgt * U[iy, ix, jy, jx, c]


@njit(cache=True)
def _evolve(U, D, w, hx, hy, per_x, per_y, vol, surf, diss, form, gamma, rho_floor, p_floor,
            dt, mu, dW, n_w, step0, n_steps, rho_min, energy_max, wq, ledger):
    """Advance ``U`` in place by up to ``n_steps`` steps starting at ``step0``.

    Returns ``(steps_done, reason, flat_node)``.
    """
    nc = U.shape[4]
    R = np.empty_like(U)
    for n in range(n_steps):
        step = step0 + n
        bad = _rhs_kernel(U, D, w, hx, hy, per_x, per_y, vol, surf, diss, form,
                          gamma, rho_floor, p_floor, R)
        if bad >= 0:
            return n, REASON_STATE, bad
        _em_update(U, R, dt, mu, dW[step], n_w)
        row = ledger[step + 1]
        row[0] = (step + 1) * dt
        _totals(U, wq, row)
        for k in range(n_w):
            row[1 + nc + k] = dW[step, k]
        reason, where = _scan_monitors(U, rho_min, energy_max)
        if reason != REASON_NONE:
            return n + 1, reason, where
    return n_steps, REASON_NONE, -1


def _kernel_dW(dW, n_w):
    return np.ascontiguousarray(np.asarray(dW, dtype=float).reshape(-1, n_w))


def _check_noise(field: DiscreteField, noise: NoiseSpec):
    if noise.n_wiener != field.mesh.dim:
        raise ValueError(
            f"homogeneous momentum noise needs n_wiener == dim ({field.mesh.dim}), got {noise.n_wiener}"
        )


def drift_forcing_h(field: DiscreteField, noise: NoiseSpec) -> DiscreteField:
    """Ito correction ``h(U)``: ``1/2 mu^2 rho n_w`` in the energy component."""
    out = np.zeros_like(field.data)
    out[..., -1] = 0.5 * noise.mu * noise.mu * noise.n_wiener * field.data[..., 0]
    return field.with_data(out)


def diffusion_g(field: DiscreteField, noise: NoiseSpec, dW) -> DiscreteField:
    """``g(U) dW``: ``mu rho dW_k`` in momentum ``k`` and ``mu m . dW`` in energy."""
    dW = np.asarray(dW, dtype=float).reshape(-1)
    _check_noise(field, noise)
    if dW.size != noise.n_wiener:
        raise ValueError(f"expected {noise.n_wiener} increments, got {dW.size}")
    U = field.data
    out = np.zeros_like(U)
    out[..., 1:-1] = noise.mu * U[..., :1] * dW
    out[..., -1] = noise.mu * (U[..., 1:-1] @ dW)
    return field.with_data(out)


def _record(field: DiscreteField, reason: int, flat_node: int, time: float, step: int) -> StoppingRecord:
    element, node = divmod(int(flat_node), field.nodes_per_element)
    return StoppingRecord(True, float(time), REASONS[reason], (element, node), int(step))


def check_assumption(field: DiscreteField, floors: MonitorFloors | None = None,
                     time: float = 0.0) -> StoppingRecord | None:
    """Scan all nodes for a nonfinite value, ``rho < rho_min`` or ``E > energy_max``.

    The first offending node in storage order is reported; ``None`` means
    every node passed.
    """
    floors = floors or MonitorFloors()
    reason, where = _scan_monitors(as_kernel_array(field.data), floors.rho_min, floors.energy_max)
    if reason == REASON_NONE:
        return None
    return _record(field, reason, where, time, -1)


def euler_maruyama_step(field: DiscreteField, dt: float, dW, noise: NoiseSpec,
                        options: SchemeOptions | None = None,
                        floors: MonitorFloors | None = None):
    """One step ``U' = U + dt (R(U) + h(U)) + g(U) dW``.

    Returns ``(field', record)`` where ``record`` is ``None`` unless a
    monitor tripped on ``U'``.  An inadmissible input state raises
    :class:`~stocheuler.physics.StateViolationError`.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    _check_noise(field, noise)
    options = options or SchemeOptions()
    floors = floors or MonitorFloors()
    U = field.data.copy()
    U5 = as_kernel_array(U)
    R = np.empty_like(U5)
    bad = _rhs_kernel(U5, *kernel_arguments(field, options), R)
    if bad >= 0:
        raise violation_error(field, bad)
    _em_update(U5, R, float(dt), float(noise.mu), _kernel_dW(dW, noise.n_wiener)[0], noise.n_wiener)
    new = field.with_data(U)
    return new, check_assumption(new, floors, time=dt)


class BalanceLedger(NamedTuple):
    """Per-step quadrature totals; row ``n`` is the state after step ``n``.

    ``dW[n]`` is the increment used by step ``n`` (zero on row 0).
    """

    dt: float
    time: np.ndarray
    mass: np.ndarray
    momentum: np.ndarray
    energy: np.ndarray
    dW: np.ndarray
    path_hash: str

    @property
    def n_steps(self) -> int:
        return len(self.time) - 1

    def to_csv(self, path) -> None:
        d = self.momentum.shape[1]
        n_w = self.dW.shape[1]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["step", "t", "mass"] + [f"momentum_{k + 1}" for k in range(d)]
                            + ["energy"] + [f"dW_{k + 1}" for k in range(n_w)])
            for n in range(len(self.time)):
                row = [n, self.time[n], self.mass[n], *self.momentum[n], self.energy[n], *self.dW[n]]
                writer.writerow([repr(float(v)) if not isinstance(v, int) else v for v in row])


def n_steps_for(t_final: float, dt: float) -> int:
    """Number of steps ``N`` with ``N dt = t_final``; non-integral ratios are rejected."""
    if not (dt > 0 and t_final > 0):
        raise ValueError("t_final and dt must be positive")
    n = int(round(t_final / dt))
    if n < 1 or abs(n * dt - t_final) > 1e-9 * t_final:
        raise ValueError(f"t_final={t_final} is not an integer multiple of dt={dt}")
    return n


def evolve_sample(initial: DiscreteField, t_final: float, dt: float, noise: NoiseSpec,
                  config: SampleConfig | None = None, dW: np.ndarray | None = None):
    """Run one Monte Carlo sample with Euler-Maruyama to ``t_final``.

    Parameters
    ----------
    initial : DiscreteField
        Initial data; not modified.
    t_final, dt : float
        ``t_final`` must be an integer multiple of ``dt``.
    noise : NoiseSpec
    config : SampleConfig, optional
        Flux options, monitor floors, sample index, snapshot hook and an
        optional ledger CSV path.
    dW : ndarray, optional
        Explicit increments of shape ``(N, n_wiener)``; by default they are
        generated from ``(noise.base_seed, config.sample_index)``.

    Returns
    -------
    field : DiscreteField
        Final state, or the state at the stopping step.
    record : StoppingRecord or None
    ledger : BalanceLedger
    """
    config = config or SampleConfig()
    _check_noise(initial, noise)
    n_steps = n_steps_for(t_final, dt)
    n_w = noise.n_wiener
    if dW is None:
        dW = wiener_increments(noise, config.sample_index, n_steps, dt)
    dW = _kernel_dW(dW, n_w)
    if dW.shape[0] != n_steps:
        raise ValueError(f"need {n_steps} increments, got {dW.shape[0]}")

    U = initial.data.copy()
    U5 = as_kernel_array(U)
    nc = initial.n_components
    wq = initial.quadrature_weights().reshape(U5.shape[:4])
    ledger = np.full((n_steps + 1, 1 + nc + n_w), np.nan)
    ledger[0, 0] = 0.0
    ledger[0, 1 + nc:] = 0.0
    _totals(U5, wq, ledger[0])

    args = kernel_arguments(initial, config.scheme)
    floors = config.floors
    stride = config.snapshot_stride if config.snapshot_stride > 0 else n_steps
    record = None
    step = 0
    if config.on_snapshot is not None:
        config.on_snapshot(initial.with_data(U.copy()), 0.0)
    while step < n_steps and record is None:
        chunk = min(stride, n_steps - step)
        done, reason, where = _evolve(U5, *args, float(dt), float(noise.mu), dW, n_w, step, chunk,
                                      floors.rho_min, floors.energy_max, wq, ledger)
        step += done
        if reason != REASON_NONE:
            record = _record(initial, reason, where, step * dt, step)
        elif config.on_snapshot is not None:
            config.on_snapshot(initial.with_data(U.copy()), step * dt)

    rows = ledger[: step + 1]
    result = BalanceLedger(
        dt=float(dt),
        time=rows[:, 0].copy(),
        mass=rows[:, 1].copy(),
        momentum=rows[:, 2:nc].copy(),
        energy=rows[:, nc].copy(),
        dW=rows[:, 1 + nc:].copy(),
        path_hash=path_hash(dW),
    )
    if config.ledger_path:
        result.to_csv(config.ledger_path)
    return initial.with_data(U), record, result
