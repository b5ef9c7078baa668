"""Uniform meshes, nodal DG fields and quadrature-based field functionals."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .operators import OperatorSet, assemble_operator_set
from .physics import GasModel, approximate_entropy

BOUNDARY_CONDITIONS = ("periodic", "outflow")


class MeshMismatchError(ValueError):
    """Fields or meshes that should match (or nest) do not."""


@dataclass(frozen=True)
class Mesh:
    """Uniform interval (``dim=1``) or ``n x n`` quadrilateral grid (``dim=2``).

    ``extent`` holds one ``(lo, hi)`` pair per axis and ``bc`` one boundary
    tag per axis.
    """

    dim: int
    extent: tuple
    n: int
    bc: tuple

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        extent = tuple((float(lo), float(hi)) for lo, hi in self.extent)
        bc = (self.bc,) * self.dim if isinstance(self.bc, str) else tuple(self.bc)
        if len(extent) != self.dim or len(bc) != self.dim:
            raise ValueError("extent and bc need one entry per axis")
        if int(self.n) < 1:
            raise ValueError(f"need at least one element per axis, got {self.n}")
        for lo, hi in extent:
            if not hi > lo:
                raise ValueError(f"empty axis extent ({lo}, {hi})")
        for tag in bc:
            if tag not in BOUNDARY_CONDITIONS:
                raise ValueError(f"unknown boundary condition {tag!r}")
        object.__setattr__(self, "extent", extent)
        object.__setattr__(self, "bc", bc)
        object.__setattr__(self, "n", int(self.n))

    @classmethod
    def interval(cls, lo, hi, n, bc="periodic"):
        return cls(1, ((lo, hi),), n, (bc,))

    @classmethod
    def square(cls, lo, hi, n, bc="periodic"):
        return cls(2, ((lo, hi), (lo, hi)), n, bc)

    @property
    def h(self) -> tuple:
        return tuple((hi - lo) / self.n for lo, hi in self.extent)

    @property
    def n_elements(self) -> int:
        return self.n ** self.dim

    @property
    def measure(self) -> float:
        return float(np.prod([hi - lo for lo, hi in self.extent]))

    def refined(self, n):
        return replace(self, n=n)


def nodal_shape(mesh: Mesh, degree: int) -> tuple:
    np1 = degree + 1
    if mesh.dim == 1:
        return (mesh.n, np1)
    return (mesh.n, mesh.n, np1, np1)


def node_coordinates(mesh: Mesh, ops: OperatorSet) -> tuple:
    """Physical node coordinates, one array per axis in nodal layout.

    1D arrays are indexed ``[element, node]``; 2D arrays
    ``[elem_y, elem_x, node_y, node_x]``.
    """
    axes = []
    for (lo, _), h in zip(mesh.extent, mesh.h):
        e = np.arange(mesh.n)[:, None]
        axes.append(lo + h * e + 0.5 * h * (ops.nodes[None, :] + 1.0))
    if mesh.dim == 1:
        return (axes[0],)
    x = np.broadcast_to(axes[0][None, :, None, :], nodal_shape(mesh, ops.degree))
    y = np.broadcast_to(axes[1][:, None, :, None], nodal_shape(mesh, ops.degree))
    return (np.ascontiguousarray(x), np.ascontiguousarray(y))


def quadrature_weights(mesh: Mesh, ops: OperatorSet) -> np.ndarray:
    """Gauss-Lobatto weights times the element Jacobian, in nodal layout."""
    w = ops.weights
    if mesh.dim == 1:
        return np.broadcast_to(w * (mesh.h[0] / 2.0), nodal_shape(mesh, ops.degree)).copy()
    hx, hy = mesh.h
    w2 = np.outer(w, w) * (hx / 2.0) * (hy / 2.0)
    return np.broadcast_to(w2, nodal_shape(mesh, ops.degree)).copy()


@dataclass
class DiscreteField:
    """Conserved variables at every Gauss-Lobatto node of every element.

    ``data`` is C-contiguous with shape ``(n, p+1, 3)`` in 1D and
    ``(n, n, p+1, p+1, 4)`` in 2D (element y, element x, node y, node x,
    component).  Flattened, this is element-major, node-minor with the
    components innermost.
    """

    mesh: Mesh
    ops: OperatorSet
    data: np.ndarray
    gas: GasModel = field(default_factory=GasModel)

    def __post_init__(self):
        self.data = np.ascontiguousarray(self.data, dtype=float)
        expected = nodal_shape(self.mesh, self.ops.degree) + (self.mesh.dim + 2,)
        if self.data.shape != expected:
            raise MeshMismatchError(f"field data has shape {self.data.shape}, expected {expected}")

    @classmethod
    def zeros(cls, mesh, degree, gas=None):
        ops = assemble_operator_set(degree)
        shape = nodal_shape(mesh, degree) + (mesh.dim + 2,)
        return cls(mesh, ops, np.zeros(shape), gas or GasModel())

    @property
    def degree(self) -> int:
        return self.ops.degree

    @property
    def n_components(self) -> int:
        return self.mesh.dim + 2

    @property
    def nodal_shape(self) -> tuple:
        return self.data.shape[:-1]

    @property
    def nodes_per_element(self) -> int:
        return (self.degree + 1) ** self.mesh.dim

    def flat(self) -> np.ndarray:
        """View of shape ``(n_elements, nodes_per_element, n_components)``."""
        return self.data.reshape(self.mesh.n_elements, self.nodes_per_element, self.n_components)

    def coordinates(self) -> tuple:
        return node_coordinates(self.mesh, self.ops)

    def quadrature_weights(self) -> np.ndarray:
        return quadrature_weights(self.mesh, self.ops)

    def with_data(self, data) -> "DiscreteField":
        return DiscreteField(self.mesh, self.ops, data, self.gas)

    def copy(self) -> "DiscreteField":
        return self.with_data(self.data.copy())


def discrete_l2_norm(values, mesh: Mesh | None = None, ops: OperatorSet | None = None,
                     normalize: bool = False) -> float:
    """Gauss-Lobatto approximation of the L2 norm of nodal values.

    ``sqrt(sum_elements sum_nodes w_node (h/2)^dim values^2)``.  Trailing
    component axes beyond the nodal shape are summed.  ``normalize``
    divides the squared norm by the domain measure (root mean square).

    ``values`` may also be a :class:`DiscreteField`, in which case all its
    conserved components enter.
    """
    if isinstance(values, DiscreteField):
        mesh, ops, values = values.mesh, values.ops, values.data
    values = np.asarray(values, dtype=float)
    wq = quadrature_weights(mesh, ops)
    if values.shape[: wq.ndim] != wq.shape:
        raise MeshMismatchError(f"values of shape {values.shape} do not match mesh nodes {wq.shape}")
    sq = values ** 2
    while sq.ndim > wq.ndim:
        sq = sq.sum(axis=-1)
    total = float(np.sum(wq * sq))
    if normalize:
        total /= mesh.measure
    return float(np.sqrt(total))


def _child_interpolation(coarse_ops, fine_ops, ratio):
    """``V[k, j, l]``: coarse basis ``l`` at fine node ``j`` of child ``k``."""
    V = np.empty((ratio, fine_ops.n_nodes, coarse_ops.n_nodes))
    for k in range(ratio):
        xi = -1.0 + (2.0 * k + fine_ops.nodes + 1.0) / ratio
        V[k] = coarse_ops.interpolation_matrix(xi)
    return V


def interpolate_nodal(values, coarse_mesh: Mesh, coarse_ops: OperatorSet,
                      fine_mesh: Mesh, fine_ops: OperatorSet) -> np.ndarray:
    """Evaluate the coarse piecewise polynomial at the nodes of a nested mesh."""
    if coarse_mesh.dim != fine_mesh.dim or coarse_mesh.extent != fine_mesh.extent:
        raise MeshMismatchError("meshes cover different domains")
    if fine_mesh.n % coarse_mesh.n:
        raise MeshMismatchError(
            f"{fine_mesh.n} elements per axis is not a refinement of {coarse_mesh.n}"
        )
    ratio = fine_mesh.n // coarse_mesh.n
    V = _child_interpolation(coarse_ops, fine_ops, ratio)
    values = np.asarray(values, dtype=float)
    if coarse_mesh.dim == 1:
        out = np.einsum("el...,kjl->ekj...", values, V)
        return out.reshape((fine_mesh.n, fine_ops.n_nodes) + values.shape[2:])
    out = np.einsum("YXlm...,apl,bqm->YaXbpq...", values, V, V)
    return out.reshape((fine_mesh.n, fine_mesh.n, fine_ops.n_nodes, fine_ops.n_nodes) + values.shape[4:])


def interpolate_to_reference(coarse: DiscreteField, fine_mesh: Mesh, fine_degree: int) -> DiscreteField:
    fine_ops = assemble_operator_set(fine_degree)
    data = interpolate_nodal(coarse.data, coarse.mesh, coarse.ops, fine_mesh, fine_ops)
    return DiscreteField(fine_mesh, fine_ops, data, coarse.gas)


def total_quantities(field: DiscreteField, elements=None):
    """Quadrature totals of mass, momentum, energy and entropy ``S^h``.

    Parameters
    ----------
    elements : array_like of int, optional
        Flat element indices to restrict the sums to.

    Returns
    -------
    mass : float
    momentum : ndarray of shape (dim,)
    energy : float
    entropy : float
    """
    wq = field.quadrature_weights().reshape(field.mesh.n_elements, -1)
    U = field.flat()
    S = approximate_entropy(U, field.gas)
    if elements is not None:
        idx = np.asarray(elements, dtype=int)
        wq, U, S = wq[idx], U[idx], S[idx]
    sums = np.einsum("en,enc->c", wq, U)
    return float(sums[0]), sums[1:-1].copy(), float(sums[-1]), float(np.sum(wq * S))
