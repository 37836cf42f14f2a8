"""Discrete Leray projection via FFT diagonalization of the stride-2 Laplacian.

The projection of a velocity field w onto discretely divergence-free fields is

    P(w) = w - grad(psi),      lap(psi) = div(w),

with the centered operators from :mod:`eulerstat.grid`.  On the periodic grid
all three operators are translation invariant, so the Poisson problem
diagonalizes in Fourier space with the real symbol

    sigma(k1, k2) = -sin(2 pi k1 / n1)^2 / dx^2 - sin(2 pi k2 / n2)^2 / dy^2.

The symbol vanishes exactly at the four modes k1 in {0, n1/2}, k2 in
{0, n2/2} (the constant and the three two-cell checkerboards); the centered
divergence annihilates the same modes, so the solve returns the minimal-norm
solution with zero amplitude there and the projection is unaffected.
"""

from __future__ import annotations

import numpy as np

from .errors import GridMismatchError
from .grid import GridSpec, ScalarField, VectorField, cell_average_vector


class LerayProjector:
    """Poisson solver and divergence-free projection for one grid.

    Instances precompute the spectral multiplier and are immutable, so a
    single projector can be shared across threads and time steps.
    """

    def __init__(self, grid: GridSpec):
        self.grid = grid
        n1, n2 = grid.shape
        s1 = np.sin(2.0 * np.pi * np.arange(n1) / n1) / grid.dx
        s2 = np.sin(2.0 * np.pi * np.arange(n2 // 2 + 1) / n2) / grid.dy
        # sin(pi) rounds to ~1e-16, not 0; pin the Nyquist entries so the
        # null set is exact.
        s1[0] = 0.0
        s1[n1 // 2] = 0.0
        s2[0] = 0.0
        s2[-1] = 0.0
        symbol = -(s1[:, None] ** 2) - s2[None, :] ** 2
        self.symbol = symbol  # rfft2 layout: (n1, n2//2 + 1), real, <= 0
        self.symbol.setflags(write=False)
        with np.errstate(divide="ignore"):
            inv = np.where(symbol != 0.0, 1.0 / np.where(symbol != 0.0, symbol, 1.0), 0.0)
        self._inverse = inv
        self._inverse.setflags(write=False)

    @property
    def null_modes(self) -> tuple[tuple[int, int], ...]:
        """Wavenumber pairs annihilated by the stride-2 Laplacian."""
        n1, n2 = self.grid.shape
        return ((0, 0), (n1 // 2, 0), (0, n2 // 2), (n1 // 2, n2 // 2))

    def _check(self, field):
        if field.grid != self.grid:
            raise GridMismatchError(f"field grid {field.grid} differs from solver grid {self.grid}")

    def solve_poisson(self, rhs: ScalarField) -> ScalarField:
        """Minimal-norm solution of lap(psi) = rhs with null modes removed.

        The returned psi has zero amplitude on the four null modes; when the
        right side is a discrete divergence those modes are absent anyway and
        lap(psi) reproduces rhs exactly (to rounding).
        """
        self._check(rhs)
        rhs_hat = np.fft.rfft2(rhs.values)
        psi = np.fft.irfft2(rhs_hat * self._inverse, s=self.grid.shape)
        return ScalarField(self.grid, psi)

    def solve_poisson_raw(self, rhs: np.ndarray) -> np.ndarray:
        """Array-in/array-out variant of :meth:`solve_poisson` for hot loops."""
        return np.fft.irfft2(np.fft.rfft2(rhs) * self._inverse, s=self.grid.shape)

    def project_arrays(self, u: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Array-in/array-out projection used by the time stepper."""
        g = self.grid
        div = (np.roll(u, -1, axis=0) - np.roll(u, 1, axis=0)) / (2.0 * g.dx)
        div += (np.roll(v, -1, axis=1) - np.roll(v, 1, axis=1)) / (2.0 * g.dy)
        psi = self.solve_poisson_raw(div)
        gx = (np.roll(psi, -1, axis=0) - np.roll(psi, 1, axis=0)) / (2.0 * g.dx)
        gy = (np.roll(psi, -1, axis=1) - np.roll(psi, 1, axis=1)) / (2.0 * g.dy)
        return u - gx, v - gy

    def project(self, w: VectorField) -> VectorField:
        """Project onto discretely divergence-free fields: w - grad(psi)."""
        self._check(w)
        pu, pv = self.project_arrays(w.u, w.v)
        return VectorField(self.grid, pu, pv)


def project_function(f, grid: GridSpec, order: int = 3, projector: LerayProjector | None = None) -> VectorField:
    """Cell-average a pointwise vector function, then project.

    This is the standard route from analytic initial data to a discretely
    divergence-free starting field.
    """
    if projector is None:
        projector = LerayProjector(grid)
    return projector.project(cell_average_vector(f, grid, order=order))
