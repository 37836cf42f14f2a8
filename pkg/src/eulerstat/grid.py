"""Uniform periodic grids, piecewise-constant fields, and discrete operators.

The computational domain is the unit torus [0,1)^2 split into n1 x n2
rectangular cells of size dx x dy, dx = 1/n1, dy = 1/n2.  A field is the
vector of its cell values, stored row-major in an (n1, n2) array indexed
[i1, i2]; the midpoint of cell (i1, i2) is ((i1+1/2)dx, (i2+1/2)dy).  All
index arithmetic wraps periodically.

Discrete operators (centered differences, stride-2 Laplacian):

    div(w)_i  = (u_{i+e1} - u_{i-e1})/(2dx) + (v_{i+e2} - v_{i-e2})/(2dy)
    grad(p)_i = [(p_{i+e1} - p_{i-e1})/(2dx), (p_{i+e2} - p_{i-e2})/(2dy)]
    lap(p)_i  = (p_{i+2e1} - 2p_i + p_{i-2e1})/(4dx^2)
              + (p_{i+2e2} - 2p_i + p_{i-2e2})/(4dy^2)

so that div o grad == lap holds cell-by-cell, and the summation-by-parts
identity sum_i w_i . grad(p)_i = -sum_i p_i div(w)_i holds exactly on the
periodic grid.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import GridMismatchError


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic Cartesian grid on the unit torus.

    Both cell counts must be even (>= 4): the stride-2 Laplacian decouples
    the grid into four sub-lattices, and its null space is only the four
    modes handled by the Poisson solver when the counts are even.
    """

    n1: int
    n2: int

    def __post_init__(self):
        for n in (self.n1, self.n2):
            if n < 4 or n % 2 != 0:
                raise ValueError(f"cell counts must be even and >= 4, got {self.n1}x{self.n2}")

    @property
    def dx(self) -> float:
        return 1.0 / self.n1

    @property
    def dy(self) -> float:
        return 1.0 / self.n2

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n1, self.n2)

    @property
    def num_cells(self) -> int:
        return self.n1 * self.n2

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        """Midpoint coordinates as (n1, n2) arrays (X, Y)."""
        x = (np.arange(self.n1) + 0.5) * self.dx
        y = (np.arange(self.n2) + 0.5) * self.dy
        return np.meshgrid(x, y, indexing="ij")


def _as_grid_array(values: np.ndarray, grid: GridSpec, what: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.shape != grid.shape:
        raise ValueError(f"{what} has shape {arr.shape}, expected {grid.shape}")
    if not np.isfinite(arr).all():
        raise ValueError(f"{what} contains non-finite values")
    if arr.flags.writeable:
        arr = arr.copy()
        arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ScalarField:
    """Piecewise-constant scalar field: one value per cell, read-only storage."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _as_grid_array(self.values, self.grid, "scalar field"))


@dataclass(frozen=True)
class VectorField:
    """Piecewise-constant velocity field with components u (x) and v (y)."""

    grid: GridSpec
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "u", _as_grid_array(self.u, self.grid, "u component"))
        object.__setattr__(self, "v", _as_grid_array(self.v, self.grid, "v component"))

    def allclose(self, other: "VectorField", atol: float = 0.0, rtol: float = 0.0) -> bool:
        return (
            self.grid == other.grid
            and np.allclose(self.u, other.u, atol=atol, rtol=rtol)
            and np.allclose(self.v, other.v, atol=atol, rtol=rtol)
        )


def _require_same_grid(a, b):
    if a.grid != b.grid:
        raise GridMismatchError(f"grids differ: {a.grid} vs {b.grid}")


def divergence(w: VectorField) -> ScalarField:
    """Centered-difference divergence with periodic wraparound."""
    g = w.grid
    out = (np.roll(w.u, -1, axis=0) - np.roll(w.u, 1, axis=0)) / (2.0 * g.dx)
    out += (np.roll(w.v, -1, axis=1) - np.roll(w.v, 1, axis=1)) / (2.0 * g.dy)
    return ScalarField(g, out)


def gradient(psi: ScalarField) -> VectorField:
    """Centered-difference gradient with periodic wraparound."""
    g = psi.grid
    p = psi.values
    gx = (np.roll(p, -1, axis=0) - np.roll(p, 1, axis=0)) / (2.0 * g.dx)
    gy = (np.roll(p, -1, axis=1) - np.roll(p, 1, axis=1)) / (2.0 * g.dy)
    return VectorField(g, gx, gy)


def laplacian(psi: ScalarField) -> ScalarField:
    """Stride-2 five-point Laplacian, the composition of divergence and gradient."""
    g = psi.grid
    p = psi.values
    out = (np.roll(p, -2, axis=0) - 2.0 * p + np.roll(p, 2, axis=0)) / (4.0 * g.dx * g.dx)
    out += (np.roll(p, -2, axis=1) - 2.0 * p + np.roll(p, 2, axis=1)) / (4.0 * g.dy * g.dy)
    return ScalarField(g, out)


def _gauss_nodes(order: int) -> tuple[np.ndarray, np.ndarray]:
    if order < 1:
        raise ValueError("quadrature order must be >= 1")
    nodes, weights = np.polynomial.legendre.leggauss(order)
    return nodes, weights / 2.0  # weights for the average over [-1, 1]


def cell_average(f: Callable, grid: GridSpec, order: int = 3) -> ScalarField:
    """Per-cell mean of a pointwise function via tensor Gauss-Legendre quadrature.

    ``f(X, Y)`` must accept coordinate arrays and evaluate elementwise.  The
    default 3x3 rule is exact for polynomials of degree < 6 within a cell.
    """
    nodes, weights = _gauss_nodes(order)
    X, Y = grid.cell_centers()
    acc = np.zeros(grid.shape)
    for a in range(order):
        xa = X + nodes[a] * (grid.dx / 2.0)
        for b in range(order):
            yb = Y + nodes[b] * (grid.dy / 2.0)
            acc += (weights[a] * weights[b]) * np.asarray(f(xa, yb), dtype=np.float64)
    return ScalarField(grid, acc)


def cell_average_vector(f: Callable, grid: GridSpec, order: int = 3) -> VectorField:
    """Componentwise cell averages of a pointwise 2-vector function.

    ``f(X, Y)`` must return a pair of arrays (U, V).
    """
    nodes, weights = _gauss_nodes(order)
    X, Y = grid.cell_centers()
    acc_u = np.zeros(grid.shape)
    acc_v = np.zeros(grid.shape)
    for a in range(order):
        xa = X + nodes[a] * (grid.dx / 2.0)
        for b in range(order):
            yb = Y + nodes[b] * (grid.dy / 2.0)
            fu, fv = f(xa, yb)
            wab = weights[a] * weights[b]
            acc_u += wab * np.asarray(fu, dtype=np.float64)
            acc_v += wab * np.asarray(fv, dtype=np.float64)
    return VectorField(grid, acc_u, acc_v)


def _restrict_array(values: np.ndarray, factor: int) -> np.ndarray:
    n1, n2 = values.shape
    if factor < 1 or n1 % factor or n2 % factor:
        raise ValueError(f"grid {n1}x{n2} not divisible by restriction factor {factor}")
    return values.reshape(n1 // factor, factor, n2 // factor, factor).mean(axis=(1, 3))


def restrict(fine: VectorField, factor: int) -> VectorField:
    """Coarsen by block-averaging factor x factor patches of cells."""
    coarse = GridSpec(fine.grid.n1 // factor, fine.grid.n2 // factor)
    return VectorField(coarse, _restrict_array(fine.u, factor), _restrict_array(fine.v, factor))


def restrict_scalar(fine: ScalarField, factor: int) -> ScalarField:
    coarse = GridSpec(fine.grid.n1 // factor, fine.grid.n2 // factor)
    return ScalarField(coarse, _restrict_array(fine.values, factor))


def l2_norm(w: VectorField | ScalarField) -> float:
    """Discrete L2 norm, cell values weighted by the cell area."""
    if isinstance(w, ScalarField):
        sq = np.sum(w.values * w.values)
    else:
        sq = np.sum(w.u * w.u) + np.sum(w.v * w.v)
    return float(np.sqrt(sq * w.grid.cell_area))


def l2_inner(a: VectorField, b: VectorField) -> float:
    """Discrete L2 inner product of two velocity fields on the same grid."""
    _require_same_grid(a, b)
    return float((np.sum(a.u * b.u) + np.sum(a.v * b.v)) * a.grid.cell_area)
