"""Stochastic initial data: perturbed double shear layers and fractional noise.

Two families are provided, both routed through the divergence-free
projection before use:

* Double shear layers.  The base profile is horizontal, u = f(y), v = 0,
  with f either a tanh ramp of width rho (rising through y = 0.25, falling
  through y = 0.75) or its discontinuous rho -> 0 limit (+1 inside
  (0.25, 0.75), -1 outside).  Randomness enters through a vertical
  displacement of the evaluation point,

      y -> y + gamma * sum_{k=0}^{modes/2} Y_{2k} sin(2 pi (k+1) (x + Y_{2k+1})),

  with Y_j i.i.d. uniform on [-1, 1].  Fields are cell-averaged by Gauss
  quadrature and then projected.

* Fractional Brownian bridges with Hurst index H in (0, 1), generated per
  velocity component by midpoint displacement (diamond-square) with periodic
  identification of the edges: at refinement level l the new points receive
  independent centered Gaussian displacements of standard deviation
  amplitude * 2^(-l H).  Nodal samples are used directly as cell values and
  then projected.

All draws come from counter-based seeded generators, so a (seed, sample
index) pair reproduces the same field on any platform, independent of
thread count.  Draw order is fixed coarse-to-fine, which makes samples at
different resolutions discretizations of the same underlying realization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .grid import GridSpec, VectorField, cell_average_vector
from .leray import LerayProjector


@dataclass(frozen=True)
class SeededRng:
    """Deterministic random source addressed by (seed, stream).

    ``generator(*path)`` derives independent child generators from a stable
    key; distinct paths never share draws.
    """

    seed: int
    stream: int = 0

    def generator(self, *path: int) -> np.random.Generator:
        key = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream, *path))
        return np.random.default_rng(key)


def uniform_symmetric(rng: np.random.Generator, size) -> np.ndarray:
    """I.i.d. uniform draws on [-1, 1]."""
    return 2.0 * rng.random(size) - 1.0


def standard_gaussians(rng: np.random.Generator, size) -> np.ndarray:
    """Standard normals via the inverse CDF of 53-bit uniforms.

    The open-interval uniform (k + 0.5) / 2^53 keeps ndtri finite and the
    construction bit-reproducible across platforms.
    """
    k = rng.integers(0, 1 << 53, size=size, dtype=np.int64)
    return ndtri((k + 0.5) * (2.0**-53))


@dataclass(frozen=True)
class ShearLayerSpec:
    """Double shear layer datum: smoothing width, perturbation size, modes.

    ``rho = 0`` selects the discontinuous profile.  ``modes`` must be even;
    the displacement sum uses modes/2 + 1 sine terms and consumes
    2*(modes/2 + 1) uniform draws.
    """

    rho: float = 0.1
    gamma: float = 0.025
    modes: int = 10

    def __post_init__(self):
        if self.rho < 0:
            raise ValueError("rho must be nonnegative")
        if self.gamma < 0:
            raise ValueError("gamma must be nonnegative")
        if self.modes <= 0 or self.modes % 2 != 0:
            raise ValueError("modes must be a positive even integer")


@dataclass(frozen=True)
class FbmSpec:
    """Fractional Brownian bridge datum: Hurst index and amplitude scale."""

    hurst: float
    amplitude: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.hurst < 1.0):
            raise ValueError("hurst must lie in (0, 1)")
        if self.amplitude < 0:
            raise ValueError("amplitude must be nonnegative")


def shear_layer_profile(rho: float):
    """Pointwise base profile (u, v) = (f(y), 0) for smoothing width rho.

    For rho = 0 the band boundary points y in {0.25, 0.75} take the outside
    value -1 (a fixed, measure-zero convention).
    """
    if rho < 0:
        raise ValueError("rho must be nonnegative")

    if rho == 0.0:

        def f(x, y):
            y = np.asarray(y)
            u = np.where((y > 0.25) & (y < 0.75), 1.0, -1.0)
            return u, np.zeros_like(u)

    else:

        def f(x, y):
            y = np.asarray(y)
            u = np.where(
                y <= 0.5,
                np.tanh((y - 0.25) / rho),
                np.tanh((0.75 - y) / rho),
            )
            return u, np.zeros_like(u)

    return f


def perturb_points(draw: np.ndarray, gamma: float, x, y):
    """Apply the random vertical displacement to points (x, y).

    ``draw`` holds the 2*(modes/2 + 1) uniform variables; x is unchanged and
    the displaced y is wrapped into [0, 1).
    """
    draw = np.asarray(draw, dtype=np.float64)
    if draw.ndim != 1 or draw.size < 2 or draw.size % 2 != 0:
        raise ValueError("draw must be a flat array of 2*(modes/2 + 1) values")
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    shift = np.zeros_like(y)
    for k in range(draw.size // 2):
        shift = shift + draw[2 * k] * np.sin(2.0 * np.pi * (k + 1) * (x + draw[2 * k + 1]))
    return x, np.mod(y + gamma * shift, 1.0)


def perturbation_draw(spec: ShearLayerSpec, rng: np.random.Generator) -> np.ndarray:
    """Draw the uniform variables of the displacement map for one sample."""
    return uniform_symmetric(rng, 2 * (spec.modes // 2 + 1))


def make_shear_layer(
    spec: ShearLayerSpec,
    rng: SeededRng,
    grid: GridSpec,
    order: int = 3,
    projector: LerayProjector | None = None,
) -> VectorField:
    """Sample one perturbed shear layer on the grid, projected divergence-free."""
    draw = perturbation_draw(spec, rng.generator())
    base = shear_layer_profile(spec.rho)

    def sample_fn(x, y):
        return base(*perturb_points(draw, spec.gamma, x, y))

    averaged = cell_average_vector(sample_fn, grid, order=order)
    if projector is None:
        projector = LerayProjector(grid)
    return projector.project(averaged)


def _midpoint_displacement(rng: np.random.Generator, levels: int, hurst: float, amplitude: float) -> np.ndarray:
    """Periodic diamond-square field of size 2^levels x 2^levels.

    Existing points are never revisited; each refinement level adds centers
    (diamond step) and edge midpoints (square step) as the average of their
    four periodic neighbours plus a Gaussian displacement with standard
    deviation amplitude * 2^(-level * hurst).
    """
    field = np.zeros((1, 1))
    for level in range(1, levels + 1):
        sigma = amplitude * 2.0 ** (-level * hurst)
        old = field
        s = old.shape[0]
        new = np.zeros((2 * s, 2 * s))
        new[0::2, 0::2] = old
        # diamond: centers from the four diagonal neighbours
        centers = 0.25 * (old + np.roll(old, -1, axis=0) + np.roll(old, -1, axis=1) + np.roll(np.roll(old, -1, axis=0), -1, axis=1))
        new[1::2, 1::2] = centers + sigma * standard_gaussians(rng, (s, s))
        # square: edge midpoints from two lattice points and two centers
        c = new[1::2, 1::2]
        mid_x = 0.25 * (old + np.roll(old, -1, axis=0) + c + np.roll(c, 1, axis=1))
        new[1::2, 0::2] = mid_x + sigma * standard_gaussians(rng, (s, s))
        mid_y = 0.25 * (old + np.roll(old, -1, axis=1) + c + np.roll(c, 1, axis=0))
        new[0::2, 1::2] = mid_y + sigma * standard_gaussians(rng, (s, s))
        field = new
    return field


def make_fbm(
    spec: FbmSpec,
    rng: SeededRng,
    grid: GridSpec,
    projector: LerayProjector | None = None,
) -> VectorField:
    """Sample one fractional-noise velocity field, projected divergence-free.

    Each component is an independent midpoint-displacement bridge; nodal
    values are taken as cell values directly.  Requires a square
    power-of-two grid.
    """
    n = grid.n1
    if grid.n2 != n or n & (n - 1) != 0:
        raise ValueError("fractional noise requires a square power-of-two grid")
    levels = int(n).bit_length() - 1
    u = _midpoint_displacement(rng.generator(0), levels, spec.hurst, spec.amplitude)
    v = _midpoint_displacement(rng.generator(1), levels, spec.hurst, spec.amplitude)
    if projector is None:
        projector = LerayProjector(grid)
    return projector.project(VectorField(grid, u, v))


def sample_initial(data_spec, seed: int, sample_index: int, grid: GridSpec, projector: LerayProjector | None = None) -> VectorField:
    """Draw the initial field for one ensemble member.

    The generator is keyed only by (seed, sample_index), never by the grid,
    so refining the mesh discretizes the same realization.
    """
    rng = SeededRng(seed, sample_index)
    if isinstance(data_spec, ShearLayerSpec):
        return make_shear_layer(data_spec, rng, grid, projector=projector)
    if isinstance(data_spec, FbmSpec):
        return make_fbm(data_spec, rng, grid, projector=projector)
    raise TypeError(f"unsupported initial-data spec: {type(data_spec).__name__}")
