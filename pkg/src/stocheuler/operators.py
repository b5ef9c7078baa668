"""One-dimensional Gauss-Lobatto summation-by-parts operators.

The nodal DG spectral element method works on the reference interval
``[-1, 1]`` with the Gauss-Lobatto nodes as both interpolation and
quadrature points.  Everything the semidiscretization needs is collected
in an :class:`OperatorSet`:

* ``D`` -- differentiation matrix, ``D[j, l] = L_l'(xi_j)``
* ``M`` -- diagonal mass matrix holding the quadrature weights
* ``Q = M D`` -- stiffness matrix
* ``B = diag(-1, 0, ..., 0, 1)`` -- boundary (interface) matrix

and they satisfy ``Q + Q^T = B``.  Two-dimensional operators are never
materialized; the semidiscretization applies the 1D operators along
tensor lines.

Degree 0 is the finite volume limit: one node at the cell center with
weight 2, ``D = 0`` and ``B = 0`` (the left and right boundary entries
land on the same node and cancel).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

MAX_DEGREE = 20
_NEWTON_TOL = 1e-15
_NEWTON_MAXITER = 100


class InvalidInputError(ValueError):
    """Raised for malformed arguments (duplicate nodes, bad degree, ...)."""


def gauss_lobatto(degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Lobatto nodes and weights on ``[-1, 1]``.

    Parameters
    ----------
    degree : int
        Polynomial degree ``p``; ``p + 1`` nodes are returned.  Degree 0
        returns the midpoint rule (node 0, weight 2).

    Returns
    -------
    nodes, weights : ndarray
        Strictly increasing nodes and positive weights.

    Notes
    -----
    The interior nodes are the roots of ``P_p'``.  They are found with
    Newton's method on ``(1 - x^2) P_p'(x)`` written through the Legendre
    three-term recurrence, starting from Chebyshev-Gauss-Lobatto points.
    """
    degree = int(degree)
    if degree < 0:
        raise InvalidInputError(f"degree must be >= 0, got {degree}")
    if degree > MAX_DEGREE:
        raise InvalidInputError(
            f"degree {degree} exceeds the validated maximum {MAX_DEGREE}"
        )
    if degree == 0:
        return np.zeros(1), np.full(1, 2.0)

    n = degree
    x = -np.cos(np.pi * np.arange(n + 1) / n)
    P = np.zeros((n + 1, n + 1))
    for _ in range(_NEWTON_MAXITER):
        x_old = x.copy()
        P[:, 0] = 1.0
        P[:, 1] = x
        for k in range(2, n + 1):
            P[:, k] = ((2 * k - 1) * x * P[:, k - 1] - (k - 1) * P[:, k - 2]) / k
        x = x_old - (x * P[:, n] - P[:, n - 1]) / ((n + 1) * P[:, n])
        if np.max(np.abs(x - x_old)) <= _NEWTON_TOL:
            break
    # final recurrence at the converged nodes for the weights
    P[:, 0] = 1.0
    P[:, 1] = x
    for k in range(2, n + 1):
        P[:, k] = ((2 * k - 1) * x * P[:, k - 1] - (k - 1) * P[:, k - 2]) / k
    weights = 2.0 / (n * (n + 1) * P[:, n] ** 2)

    # exact endpoints and mirror symmetry
    x[0], x[-1] = -1.0, 1.0
    x = 0.5 * (x - x[::-1])
    weights = 0.5 * (weights + weights[::-1])
    return x, weights


def barycentric_weights(nodes: np.ndarray) -> np.ndarray:
    nodes = np.asarray(nodes, dtype=float)
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    if np.any(diff == 0.0):
        raise InvalidInputError("interpolation nodes must be distinct")
    return 1.0 / np.prod(diff, axis=1)


def lagrange_diff_matrix(nodes) -> np.ndarray:
    """Differentiation matrix ``D[j, l] = L_l'(x_j)`` of the nodal basis.

    Off-diagonal entries use the barycentric formula; each diagonal entry
    is minus the sum of its row, so constants are differentiated to zero
    up to one rounding per row.
    """
    nodes = np.asarray(nodes, dtype=float)
    if nodes.ndim != 1 or nodes.size == 0:
        raise InvalidInputError("nodes must be a non-empty 1D array")
    n = nodes.size
    if n == 1:
        return np.zeros((1, 1))
    lam = barycentric_weights(nodes)
    D = np.zeros((n, n))
    for j in range(n):
        for l in range(n):
            if j != l:
                D[j, l] = (lam[l] / lam[j]) / (nodes[j] - nodes[l])
        D[j, j] = -np.sum(D[j, :])
    return D


_EPS = np.finfo(float).eps


def lagrange_interpolation_matrix(nodes, points) -> np.ndarray:
    """Matrix ``V`` with ``V[k, l] = L_l(points[k])``.

    Interpolating nodal values ``u`` to ``points`` is ``V @ u``.  A single
    node gives the constant basis function.
    """
    nodes = np.asarray(nodes, dtype=float)
    points = np.atleast_1d(np.asarray(points, dtype=float))
    if nodes.size == 1:
        return np.ones((points.size, 1))
    lam = barycentric_weights(nodes)
    V = np.zeros((points.size, nodes.size))
    for k, x in enumerate(points):
        d = x - nodes
        # snap points within rounding of a node; tiny d would overflow lam / d
        hit = np.flatnonzero(np.abs(d) <= _EPS * (1.0 + np.abs(nodes)))
        if hit.size:
            V[k, hit[0]] = 1.0
            continue
        t = lam / d
        V[k] = t / t.sum()
    return V


@dataclass(frozen=True)
class OperatorSet:
    """Gauss-Lobatto SBP operators for one polynomial degree.

    All arrays are read-only so one instance can be shared freely.
    """

    degree: int
    nodes: np.ndarray
    weights: np.ndarray
    D: np.ndarray
    M: np.ndarray = field(repr=False)
    Q: np.ndarray = field(repr=False)
    B: np.ndarray = field(repr=False)

    @property
    def n_nodes(self) -> int:
        return self.degree + 1

    def interpolation_matrix(self, points) -> np.ndarray:
        return lagrange_interpolation_matrix(self.nodes, points)

    def to_csv(self) -> str:
        """Dump nodes, weights and ``D`` as CSV text (debugging aid)."""
        lines = ["# degree=%d" % self.degree, "node,weight," + ",".join(
            f"D{l}" for l in range(self.n_nodes))]
        for j in range(self.n_nodes):
            row = [repr(float(self.nodes[j])), repr(float(self.weights[j]))]
            row += [repr(float(v)) for v in self.D[j]]
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


@lru_cache(maxsize=None)
def assemble_operator_set(degree: int) -> OperatorSet:
    """Build (and cache) the :class:`OperatorSet` of a given degree."""
    nodes, weights = gauss_lobatto(degree)
    D = lagrange_diff_matrix(nodes)
    M = np.diag(weights)
    Q = M @ D
    B = np.zeros((degree + 1, degree + 1))
    B[0, 0] -= 1.0
    B[-1, -1] += 1.0
    return OperatorSet(
        degree=int(degree),
        nodes=_frozen(nodes),
        weights=_frozen(weights),
        D=_frozen(D),
        M=_frozen(M),
        Q=_frozen(Q),
        B=_frozen(B),
    )
