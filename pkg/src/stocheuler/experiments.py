"""Test problems, error functionals and the Monte Carlo convergence driver.

Every sample of a convergence study runs the reference resolution and each
coarse resolution on the same Wiener path, so the measured differences
are purely spatial.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .mesh import DiscreteField, Mesh, MeshMismatchError, discrete_l2_norm, interpolate_to_reference
from .operators import assemble_operator_set
from .physics import GasModel, cons_to_prim, prim_to_cons
from .semidisc import SchemeOptions
from .stochastic import (MonitorFloors, NoiseSpec, SampleConfig, evolve_sample, n_steps_for,
                         wiener_increments)

PROBLEM_NAMES = (
    "density_wave_1d",
    "rarefaction",
    "contact",
    "shock",
    "sod",
    "density_wave_2d",
    "kelvin_helmholtz",
)

# (rho, u, p) left and right of x = 0.5
RIEMANN_STATES = {
    "rarefaction": ((0.5197, -0.7259, 0.4), (1.0, 0.0, 1.0)),
    "contact": ((0.5, 0.5, 5.0), (1.0, 0.5, 5.0)),
    "shock": ((1.0, 0.7276, 1.0), (0.5313, 0.0, 0.4)),
    "sod": ((1.0, 0.0, 1.0), (0.125, 0.0, 0.1)),
}

# contact variant with a velocity jump 0.5 -> 5 (not a pure contact);
# select with params={"right": CONTACT_LITERAL_RIGHT}
CONTACT_LITERAL_RIGHT = (1.0, 5.0, 5.0)


@dataclass(frozen=True)
class ProblemSpec:
    """A named test case with its domain, time horizon and noise.

    ``params`` holds the problem-specific constants (wave numbers, jump
    location, Kelvin-Helmholtz perturbation data, ...).
    """

    name: str
    dim: int
    extent: tuple
    bc: str
    t_final: float
    dt: float
    mu: float
    gamma: float = 1.4
    base_seed: int = 0
    degree: int = 0
    elements: int = 64
    resolutions: tuple = (64, 128, 256, 512)
    reference: int = 4096
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in PROBLEM_NAMES:
            raise ValueError(f"unknown problem {self.name!r}; choose from {', '.join(PROBLEM_NAMES)}")
        n_steps_for(self.t_final, self.dt)

    @property
    def gas(self) -> GasModel:
        return GasModel(gamma=self.gamma)

    @property
    def noise(self) -> NoiseSpec:
        return NoiseSpec(mu=self.mu, n_wiener=self.dim, base_seed=self.base_seed)

    @property
    def n_steps(self) -> int:
        return n_steps_for(self.t_final, self.dt)

    def mesh(self, n: int | None = None) -> Mesh:
        n = self.elements if n is None else n
        if self.dim == 1:
            return Mesh.interval(*self.extent, n, bc=self.bc)
        return Mesh.square(*self.extent, n, bc=self.bc)

    def with_overrides(self, **changes) -> "ProblemSpec":
        changes = {k: v for k, v in changes.items() if v is not None}
        params = {**self.params, **changes.pop("params", {})}
        return replace(self, params=params, **changes)


def problem(name: str, **overrides) -> ProblemSpec:
    """Default :class:`ProblemSpec` of a named test case, with overrides."""
    one_d = dict(dim=1, resolutions=(64, 128, 256, 512), reference=4096)
    if name == "density_wave_1d":
        spec = ProblemSpec(name, extent=(-1.0, 1.0), bc="periodic", t_final=0.5, dt=1e-5, mu=1.0,
                           params=dict(amplitude=0.5, wavenumber=2.0 * math.pi,
                                       velocity=0.1, pressure=10.0), **one_d)
    elif name in RIEMANN_STATES:
        left, right = RIEMANN_STATES[name]
        spec = ProblemSpec(name, extent=(0.0, 1.0), bc="outflow",
                           t_final=0.15 if name == "sod" else 0.2, dt=1e-5, mu=1.0,
                           params=dict(x0=0.5, left=left, right=right), **one_d)
    elif name == "density_wave_2d":
        spec = ProblemSpec(name, dim=2, extent=(-1.0, 1.0), bc="periodic", t_final=0.1, dt=1e-4,
                           mu=0.1, elements=16, resolutions=(16, 32, 64, 128), reference=256,
                           params=dict(amplitude=0.5, wavenumber=2.0 * math.pi,
                                       velocity=(0.1, 0.1), pressure=10.0))
    elif name == "kelvin_helmholtz":
        spec = ProblemSpec(name, dim=2, extent=(0.0, 1.0), bc="periodic", t_final=1.5, dt=1e-4,
                           mu=0.1, degree=2, elements=64, resolutions=(64,), reference=64,
                           params=dict(modes=10, epsilon=0.01, J1=0.25, J2=0.75,
                                       perturbation_seed=0))
    else:
        raise ValueError(f"unknown problem {name!r}; choose from {', '.join(PROBLEM_NAMES)}")
    return spec.with_overrides(**overrides)


def kh_coefficients(seed: int, modes: int = 10):
    """Fixed perturbation coefficients ``a`` (rows sum to 1) and ``b`` in ``[-pi, pi]``."""
    rng = np.random.default_rng(seed)
    a = rng.uniform(0.0, 1.0, size=(2, modes))
    a /= a.sum(axis=1, keepdims=True)
    b = rng.uniform(-np.pi, np.pi, size=(2, modes))
    return a, b


def kh_interface(x, a, b, epsilon: float = 0.01, J=(0.25, 0.75)):
    """Perturbed interfaces ``I_j(x) = J_j + epsilon sum_m a_j^m cos(b_j^m + 2 pi m x)``.

    Raises
    ------
    ValueError
        If a row of ``a`` leaves ``[0, 1]`` or does not sum to one.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 2 or a.shape[0] != 2:
        raise ValueError("a and b must both have shape (2, M)")
    if np.any(a < 0.0) or np.any(a > 1.0) or not np.allclose(a.sum(axis=1), 1.0, rtol=0, atol=1e-12):
        raise ValueError("coefficients a_j^m must lie in [0, 1] and sum to 1 for each j")
    if np.any(np.abs(b) > np.pi):
        raise ValueError("phases b_j^m must lie in [-pi, pi]")
    x = np.asarray(x, dtype=float)
    m = np.arange(1, a.shape[1] + 1)
    out = []
    for j in range(2):
        Y = np.sum(a[j] * np.cos(b[j] + 2.0 * np.pi * m * x[..., None]), axis=-1)
        out.append(J[j] + epsilon * Y)
    return tuple(out)


def _riemann(spec, x):
    left, right = spec.params["left"], spec.params["right"]
    is_right = x >= spec.params["x0"]
    rho, u, p = (np.where(is_right, r, l) for l, r in zip(left, right))
    return rho, u, p


def primitive_datum(spec: ProblemSpec, coords) -> tuple:
    """Initial ``(rho, vel, p)`` at the given coordinate arrays.

    ``vel`` carries the velocity components on its last axis.
    """
    P = spec.params
    if spec.name == "density_wave_1d":
        (x,) = coords
        rho = 1.0 + P["amplitude"] * np.sin(P["wavenumber"] * x)
        return rho, np.full(x.shape + (1,), P["velocity"]), np.full(x.shape, P["pressure"])
    if spec.name in RIEMANN_STATES:
        rho, u, p = _riemann(spec, coords[0])
        return rho, u[..., None], p
    if spec.name == "density_wave_2d":
        x, y = coords
        rho = 1.0 + P["amplitude"] * np.sin(P["wavenumber"] * (x + y))
        vel = np.broadcast_to(np.asarray(P["velocity"], dtype=float), x.shape + (2,))
        return rho, vel, np.full(x.shape, P["pressure"])
    if spec.name == "kelvin_helmholtz":
        x, y = coords
        a, b = kh_coefficients(P["perturbation_seed"], P["modes"])
        I1, I2 = kh_interface(x, a, b, P["epsilon"], (P["J1"], P["J2"]))
        inner = (I1 <= y) & (y <= I2)
        rho = np.where(inner, 2.0, 1.0)
        vel = np.stack([np.where(inner, -0.5, 0.5), np.zeros_like(x)], axis=-1)
        return rho, vel, np.full(x.shape, 2.5)
    raise ValueError(f"unknown problem {spec.name!r}")


def initial_condition(spec: ProblemSpec, mesh: Mesh | None = None, degree: int | None = None) -> DiscreteField:
    """Nodal interpolation of the problem's initial datum in conserved variables.

    Discontinuous data are evaluated pointwise; a node exactly on a jump
    takes the right (or upper) state.
    """
    mesh = mesh or spec.mesh()
    degree = spec.degree if degree is None else degree
    if mesh.dim != spec.dim:
        raise MeshMismatchError(f"{spec.name} is {spec.dim}D, mesh is {mesh.dim}D")
    ops = assemble_operator_set(degree)
    gas = spec.gas
    field_ = DiscreteField.zeros(mesh, degree, gas)
    rho, vel, p = primitive_datum(spec, field_.coordinates())
    return DiscreteField(mesh, ops, prim_to_cons(rho, vel, p, gas), gas)


def error_pair(coarse: DiscreteField, reference: DiscreteField, normalize: bool = True) -> tuple:
    """Sample errors ``(e1, e2)`` of a coarse run against the reference run.

    The coarse solution is interpolated to the reference nodes, then

    * ``e1 = ||rho_h - rho_ref||``
    * ``e2 = ||rho_h - rho_ref||^2 + ||u_h - u_ref||^2 + ||theta_h - theta_ref||^2``

    in the discrete L2 norm of the reference grid.  With ``normalize`` the
    squared norms are divided by the domain measure.
    """
    fine = interpolate_to_reference(coarse, reference.mesh, reference.degree)
    a = cons_to_prim(fine.data, coarse.gas)
    b = cons_to_prim(reference.data, reference.gas)
    mesh, ops = reference.mesh, reference.ops

    def norm(v):
        return discrete_l2_norm(v, mesh, ops, normalize=normalize)

    e1 = norm(a.rho - b.rho)
    e2 = norm(a.rho - b.rho) ** 2 + norm(a.vel - b.vel) ** 2 + norm(a.theta - b.theta) ** 2
    return e1, e2


def eoc(errors) -> np.ndarray:
    """``log2(E_i / E_{i+1})`` for successive halvings; NaN where undefined."""
    errors = np.asarray(errors, dtype=float)
    if errors.size < 2:
        raise ValueError("need at least two resolutions")
    out = np.full(errors.size - 1, np.nan)
    for i in range(errors.size - 1):
        a, b = errors[i], errors[i + 1]
        if a > 0 and b > 0 and np.isfinite(a) and np.isfinite(b):
            out[i] = math.log2(a / b)
    return out


@dataclass(frozen=True)
class ResolutionRecord:
    elements: int
    degree: int
    samples_used: int
    samples_stopped: int
    E1_mean: float
    E1_stderr: float
    E2_mean: float
    E2_stderr: float


@dataclass(frozen=True)
class SampleRow:
    """One (sample, resolution) entry of a study; errors are NaN when stopped."""

    sample: int
    elements: int
    e1: float
    e2: float
    stopped: bool
    reason: str
    path_hash: str


@dataclass
class ErrorReport:
    """Per-resolution error statistics, EOC table and the raw per-sample rows."""

    problem: str
    degree: int
    reference: int
    n_samples: int
    records: list = field(default_factory=list)
    samples: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    @property
    def eoc_rows(self) -> list:
        """``(coarse, fine, eoc_E1, eoc_E2)`` for successive resolutions."""
        if len(self.records) < 2:
            return []
        e1 = eoc([r.E1_mean for r in self.records])
        e2 = eoc([r.E2_mean for r in self.records])
        return [(self.records[i].elements, self.records[i + 1].elements, float(e1[i]), float(e2[i]))
                for i in range(len(self.records) - 1)]

    def _average(self, col):
        vals = [row[col] for row in self.eoc_rows if np.isfinite(row[col])]
        return float(np.mean(vals)) if vals else float("nan")

    @property
    def average_eoc_E1(self) -> float:
        return self._average(2)

    @property
    def average_eoc_E2(self) -> float:
        return self._average(3)

    @property
    def samples_stopped(self) -> int:
        """Samples excluded from at least one resolution."""
        return len({row.sample for row in self.samples if row.stopped})

    @property
    def is_empty(self) -> bool:
        return not self.records or all(r.samples_used == 0 for r in self.records)


def _mean_stderr(values):
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return float("nan"), float("nan")
    if values.size == 1:
        return float(values[0]), float("nan")
    return float(np.mean(values)), float(np.std(values, ddof=1) / math.sqrt(values.size))


def convergence_study(spec: ProblemSpec, resolutions=None, degree: int | None = None,
                      n_samples: int = 1, reference: int | None = None,
                      scheme: SchemeOptions | None = None, floors: MonitorFloors | None = None,
                      normalize: bool = True,
                      progress: Callable | None = None) -> ErrorReport:
    """Monte Carlo estimate of ``E1``/``E2`` and their EOCs.

    For each sample index the reference resolution and every coarse
    resolution are evolved with identical Wiener increments and time step.
    Samples whose reference run stopped are dropped everywhere; a stopped
    coarse run drops the sample at that resolution only.  Means are
    accumulated in ascending sample order.

    Parameters
    ----------
    spec : ProblemSpec
    resolutions : sequence of int, optional
        Ascending element counts per axis, each dividing ``reference``.
    degree : int, optional
        Polynomial degree (``spec.degree`` by default).
    n_samples : int
    reference : int, optional
        Element count of the reference run (``spec.reference`` by default).
    normalize : bool
        Divide the squared norms by the domain measure.
    progress : callable, optional
        Called as ``progress(sample_index)`` after each sample.
    """
    resolutions = tuple(int(n) for n in (resolutions or spec.resolutions))
    degree = spec.degree if degree is None else int(degree)
    reference = spec.reference if reference is None else int(reference)
    if list(resolutions) != sorted(set(resolutions)):
        raise ValueError("resolutions must be strictly ascending")
    for n in resolutions:
        if n > reference or reference % n:
            raise MeshMismatchError(f"resolution {n} does not divide the reference {reference}")
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    scheme = scheme or SchemeOptions()
    floors = floors or MonitorFloors()
    noise = spec.noise

    initial = {n: initial_condition(spec, spec.mesh(n), degree) for n in set(resolutions) | {reference}}
    errors = {n: [] for n in resolutions}
    stopped = {n: 0 for n in resolutions}
    rows = []
    for s in range(n_samples):
        dW = wiener_increments(noise, s, spec.n_steps, spec.dt)
        config = SampleConfig(scheme=scheme, floors=floors, sample_index=s)
        ref, ref_record, ref_ledger = evolve_sample(initial[reference], spec.t_final, spec.dt,
                                                    noise, config, dW=dW)
        for n in resolutions:
            if n == reference:
                run, record, ledger = ref, ref_record, ref_ledger
            else:
                run, record, ledger = evolve_sample(initial[n], spec.t_final, spec.dt, noise, config, dW=dW)
            if record is not None or ref_record is not None:
                stopped[n] += 1
                reason = record.reason if record is not None else "reference_" + ref_record.reason
                rows.append(SampleRow(s, n, float("nan"), float("nan"), True, reason, ledger.path_hash))
                continue
            e1, e2 = error_pair(run, ref, normalize=normalize)
            errors[n].append((e1, e2))
            rows.append(SampleRow(s, n, e1, e2, False, "", ledger.path_hash))
        if progress is not None:
            progress(s)

    records = []
    for n in resolutions:
        values = np.array(errors[n], dtype=float).reshape(-1, 2)
        m1, s1 = _mean_stderr(values[:, 0])
        m2, s2 = _mean_stderr(values[:, 1])
        records.append(ResolutionRecord(n, degree, len(errors[n]), stopped[n], m1, s1, m2, s2))
    return ErrorReport(spec.name, degree, reference, n_samples, records, rows,
                       metadata=dict(normalize=normalize, base_seed=spec.base_seed))
