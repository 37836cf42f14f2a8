"""Statistical diagnostics over ensembles of velocity fields.

Implemented observables:

* cellwise sample mean and population variance;
* the discretized structure function over discrete balls of radius l cells,

      S_l = ( (1/M) sum_m (dxdy / l^2) * sum_offsets w(k,n) |w_m(cell+off) - w_m(cell)|^p )^(1/p)

  with composite-trapezoid weights on the offset square [-l, l]^2 (interior
  offsets weight 1, edges 1/2, corners 1/4) and periodic index wrapping;
* least-squares log-log slope fits of structure-function curves;
* Wasserstein-1 distances between k-point marginals of two ensembles,
  estimated by averaging, over seeded random tuples of cell centers, the
  exact optimal-assignment distance between the two M-point clouds of
  velocity values in R^(2k);
* Cauchy rates between resolutions, |restrict(fine) - coarse| in L2.

All reductions run in a fixed, documented order (offsets row-major, samples
by index, tuples by draw order), so every statistic is bitwise reproducible
and independent of any internal parallelism.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from . import _kernels
from .errors import GridMismatchError
from .grid import VectorField, l2_norm, restrict


@dataclass(frozen=True)
class Moments:
    """Cellwise ensemble mean and population variance (per component)."""

    mean: VectorField
    variance: VectorField
    num_samples: int


def moments(fields: Sequence[VectorField]) -> Moments:
    """Sample mean and population variance of an ensemble at one time."""
    if len(fields) == 0:
        raise ValueError("moments of an empty ensemble are undefined")
    grid = fields[0].grid
    for f in fields[1:]:
        if f.grid != grid:
            raise GridMismatchError("ensemble members live on different grids")
    m = len(fields)
    mean_u = np.zeros(grid.shape)
    mean_v = np.zeros(grid.shape)
    for f in fields:
        mean_u += f.u
        mean_v += f.v
    mean_u /= m
    mean_v /= m
    var_u = np.zeros(grid.shape)
    var_v = np.zeros(grid.shape)
    for f in fields:
        var_u += (f.u - mean_u) ** 2
        var_v += (f.v - mean_v) ** 2
    var_u /= m
    var_v /= m
    return Moments(VectorField(grid, mean_u, mean_v), VectorField(grid, var_u, var_v), m)


@dataclass(frozen=True)
class StructureFunctionCurve:
    """Structure function values over ball radii r = l * dx, l = 1..l_max."""

    p: float
    time: float
    lags: np.ndarray    # integer l in cells
    radii: np.ndarray   # r = l * dx
    values: np.ndarray

    def __post_init__(self):
        for name in ("lags", "radii", "values"):
            arr = np.asarray(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


def offset_weight(k: int, n: int, l: int) -> float:
    """Composite-trapezoid weight of offset (k, n) in the ball of radius l."""
    ak, an = abs(k), abs(n)
    if ak > l or an > l:
        return 0.0
    if ak == l and an == l:
        return 0.25
    if ak == l or an == l:
        return 0.5
    return 1.0


def structure_function(
    fields: Sequence[VectorField],
    p: float = 2.0,
    l_max: int = 16,
    time: float = 0.0,
) -> StructureFunctionCurve:
    """Ensemble structure function at one time, for radii 1..l_max cells.

    Per sample and radius the weighted offset sums accumulate row-major over
    cells and offsets; the ensemble average runs in sample order.
    """
    if len(fields) == 0:
        raise ValueError("structure function of an empty ensemble is undefined")
    if p < 1:
        raise ValueError("p must be >= 1")
    grid = fields[0].grid
    if not (1 <= l_max < min(grid.n1, grid.n2) // 2):
        raise ValueError(f"l_max must lie in [1, {min(grid.n1, grid.n2) // 2 - 1}] on this grid")
    for f in fields[1:]:
        if f.grid != grid:
            raise GridMismatchError("ensemble members live on different grids")

    area = grid.dx * grid.dy
    totals = [0.0] * l_max
    for f in fields:
        sums = _kernels.offset_power_sums(f.u, f.v, l_max, 0.5 * p)
        for l in range(1, l_max + 1):
            acc = 0.0
            for k in range(-l, l + 1):
                for n in range(-l, l + 1):
                    w = offset_weight(k, n, l)
                    acc += w * sums[k + l_max, n + l_max]
            totals[l - 1] += (area / (l * l)) * acc
    m = len(fields)
    lags = np.arange(1, l_max + 1)
    values = np.array([(t / m) ** (1.0 / p) for t in totals])
    return StructureFunctionCurve(p=p, time=time, lags=lags, radii=lags * grid.dx, values=values)


def default_fit_range(l_max: int) -> tuple[int, int]:
    """Central fit window: drop l = 1 and the largest quarter of radii."""
    return 2, l_max - l_max // 4


def fit_slope(curve: StructureFunctionCurve, lag_range: tuple[int, int] | None = None) -> float:
    """Least-squares slope of log(value) against log(r) over the lag window."""
    lo, hi = lag_range if lag_range is not None else default_fit_range(int(curve.lags[-1]))
    mask = (curve.lags >= lo) & (curve.lags <= hi)
    if int(mask.sum()) < 3:
        raise ValueError("slope fit needs at least 3 points in the lag range")
    vals = curve.values[mask]
    if np.any(vals <= 0):
        raise ValueError("slope fit requires positive structure-function values")
    x = np.log(curve.radii[mask])
    y = np.log(vals)
    slope = float(np.polyfit(x, y, 1)[0])
    return slope


@dataclass(frozen=True)
class WassersteinEstimate:
    """Tuple-averaged W1 between k-point marginals of two ensembles."""

    k: int
    time: float
    num_tuples: int
    tuple_seed: int
    value: float


def point_cloud_w1(a: np.ndarray, b: np.ndarray) -> float:
    """Exact W1 between two equal-size uniform point clouds in R^d.

    Solves the optimal assignment with Euclidean ground cost; cost of the
    optimal matching divided by the cloud size.
    """
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(b, dtype=np.float64))
    if a.shape != b.shape:
        raise ValueError("point clouds must have identical shapes")
    cost = cdist(a, b)
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].sum()) / a.shape[0]


def draw_cell_tuples(grid_shape: tuple[int, int], k: int, num_tuples: int, tuple_seed: int) -> np.ndarray:
    """Seeded uniform draw of tuple cell indices, shape (num_tuples, k, 2)."""
    rng = np.random.default_rng(np.random.SeedSequence(entropy=tuple_seed))
    flat = rng.integers(0, grid_shape[0] * grid_shape[1], size=(num_tuples, k))
    i1, i2 = np.unravel_index(flat, grid_shape)
    return np.stack([i1, i2], axis=-1)


def _tuple_cloud(fields: Sequence[VectorField], cells: np.ndarray) -> np.ndarray:
    """Stack each sample's velocity vectors at the tuple cells into R^(2k)."""
    cloud = np.empty((len(fields), 2 * cells.shape[0]))
    for m, f in enumerate(fields):
        parts = []
        for i1, i2 in cells:
            parts.append(f.u[i1, i2])
            parts.append(f.v[i1, i2])
        cloud[m] = parts
    return cloud


def wasserstein_marginal(
    fields_a: Sequence[VectorField],
    fields_b: Sequence[VectorField],
    k: int,
    num_tuples: int = 100,
    tuple_seed: int = 0,
    time: float = 0.0,
) -> WassersteinEstimate:
    """Monte Carlo estimate of the W1 distance between k-point marginals.

    Both ensembles must live on the same grid (restrict the finer one first)
    and have equal sample counts; subsample the larger ensemble with
    :func:`subsample` otherwise.
    """
    if k not in (1, 2, 3):
        raise ValueError("marginal order k must be 1, 2 or 3")
    if num_tuples < 1:
        raise ValueError("num_tuples must be >= 1")
    if len(fields_a) == 0 or len(fields_b) == 0:
        raise ValueError("empty ensemble")
    if len(fields_a) != len(fields_b):
        raise ValueError(
            f"sample counts differ ({len(fields_a)} vs {len(fields_b)}); "
            "subsample the larger ensemble to the smaller count first"
        )
    grid = fields_a[0].grid
    for f in list(fields_a) + list(fields_b):
        if f.grid != grid:
            raise GridMismatchError("all fields must share one grid; restrict the finer ensemble first")
    cells = draw_cell_tuples(grid.shape, k, num_tuples, tuple_seed)
    total = 0.0
    for q in range(num_tuples):
        cloud_a = _tuple_cloud(fields_a, cells[q])
        cloud_b = _tuple_cloud(fields_b, cells[q])
        total += point_cloud_w1(cloud_a, cloud_b)
    return WassersteinEstimate(k=k, time=time, num_tuples=num_tuples, tuple_seed=tuple_seed, value=total / num_tuples)


def subsample(fields: Sequence[VectorField], count: int, seed: int) -> list[VectorField]:
    """Seeded subsample without replacement, order-preserving."""
    if count > len(fields):
        raise ValueError("cannot subsample to more samples than available")
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed))
    idx = np.sort(rng.choice(len(fields), size=count, replace=False))
    return [fields[i] for i in idx]


def cauchy_rate_field(fine: VectorField, coarse: VectorField) -> float:
    """L2 distance between a field and its half-resolution companion.

    The fine field (grid 2N) is block-averaged to the coarse grid (N) and
    the discrete L2 norm of the difference is returned.
    """
    if fine.grid.n1 != 2 * coarse.grid.n1 or fine.grid.n2 != 2 * coarse.grid.n2:
        raise GridMismatchError(
            f"fine grid {fine.grid.shape} must be exactly twice the coarse grid {coarse.grid.shape}"
        )
    down = restrict(fine, 2)
    return l2_norm(VectorField(coarse.grid, down.u - coarse.u, down.v - coarse.v))


def cauchy_rate_moments(fine: Moments, coarse: Moments) -> tuple[float, float]:
    """Cauchy rates of the mean and variance fields between two resolutions."""
    return (
        cauchy_rate_field(fine.mean, coarse.mean),
        cauchy_rate_field(fine.variance, coarse.variance),
    )
