"""Compiled per-cell kernels for the stencil-heavy inner loops.

Every kernel walks cells in row-major order with explicit periodic index
wrapping and accumulates sequentially, so results are bitwise reproducible
and match a straightforward Python loop over the same expressions (the test
suite relies on this).  Compilation is cached on disk after the first call.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def convection_kernel(au, av, wu, wv, dx, dy, out_u, out_v):
    """Flux-difference convection of (wu, wv) by the frozen velocity (au, av).

    Interface flux along axis m: ((a_m^L + a_m^R)/4) * (w^L + w^R).
    """
    n1, n2 = au.shape
    for i in range(n1):
        ip = i + 1 if i + 1 < n1 else 0
        im = i - 1 if i >= 1 else n1 - 1
        for j in range(n2):
            jp = j + 1 if j + 1 < n2 else 0
            jm = j - 1 if j >= 1 else n2 - 1
            a_p = (au[i, j] + au[ip, j]) / 4.0
            a_m = (au[im, j] + au[i, j]) / 4.0
            b_p = (av[i, j] + av[i, jp]) / 4.0
            b_m = (av[i, jm] + av[i, j]) / 4.0
            fxu = a_p * (wu[i, j] + wu[ip, j]) - a_m * (wu[im, j] + wu[i, j])
            fxv = a_p * (wv[i, j] + wv[ip, j]) - a_m * (wv[im, j] + wv[i, j])
            fyu = b_p * (wu[i, j] + wu[i, jp]) - b_m * (wu[i, jm] + wu[i, j])
            fyv = b_p * (wv[i, j] + wv[i, jp]) - b_m * (wv[i, jm] + wv[i, j])
            out_u[i, j] = fxu / dx + fyu / dy
            out_v[i, j] = fxv / dx + fyv / dy


@njit(cache=True)
def diffusion_kernel(wu, wv, dx, dy, eps, out_u, out_v):
    """Second-order nonlinear diffusion built from jump norms.

    Per axis the flux at interface i+1/2 is |jump|_2 * jump with
    jump = w_{i+e} - w_i; the cell value is the scaled flux difference.
    """
    n1, n2 = wu.shape
    for i in range(n1):
        ip = i + 1 if i + 1 < n1 else 0
        im = i - 1 if i >= 1 else n1 - 1
        for j in range(n2):
            jp = j + 1 if j + 1 < n2 else 0
            jm = j - 1 if j >= 1 else n2 - 1
            jxu_p = wu[ip, j] - wu[i, j]
            jxv_p = wv[ip, j] - wv[i, j]
            jxu_m = wu[i, j] - wu[im, j]
            jxv_m = wv[i, j] - wv[im, j]
            np_x = np.sqrt(jxu_p * jxu_p + jxv_p * jxv_p)
            nm_x = np.sqrt(jxu_m * jxu_m + jxv_m * jxv_m)
            jyu_p = wu[i, jp] - wu[i, j]
            jyv_p = wv[i, jp] - wv[i, j]
            jyu_m = wu[i, j] - wu[i, jm]
            jyv_m = wv[i, j] - wv[i, jm]
            np_y = np.sqrt(jyu_p * jyu_p + jyv_p * jyv_p)
            nm_y = np.sqrt(jyu_m * jyu_m + jyv_m * jyv_m)
            out_u[i, j] = eps * ((np_x * jxu_p - nm_x * jxu_m) / dx + (np_y * jyu_p - nm_y * jyu_m) / dy)
            out_v[i, j] = eps * ((np_x * jxv_p - nm_x * jxv_m) / dx + (np_y * jyv_p - nm_y * jyv_m) / dy)


@njit(cache=True)
def picard_update_kernel(un_u, un_v, cu, cv, du_, dv_, dt, out_u, out_v):
    """One fixed-point update: u_n + dt * (D - C), plus the squared change.

    Returns sum((new - old)^2) against the previous iterate stored in
    (out_u, out_v), accumulated in row-major order.
    """
    n1, n2 = un_u.shape
    change = 0.0
    for i in range(n1):
        for j in range(n2):
            nu = un_u[i, j] + dt * (du_[i, j] - cu[i, j])
            nv = un_v[i, j] + dt * (dv_[i, j] - cv[i, j])
            eu = nu - out_u[i, j]
            ev = nv - out_v[i, j]
            change += eu * eu + ev * ev
            out_u[i, j] = nu
            out_v[i, j] = nv
    return change


@njit(cache=True)
def offset_power_sums(u, v, l_max, half_p):
    """Sum over cells of |w(cell+offset) - w(cell)|^(2*half_p), per offset.

    Output entry [k + l_max, n + l_max] holds the row-major sequential sum of
    (du^2 + dv^2)**half_p over all cells for the offset (k, n).
    """
    n1, n2 = u.shape
    size = 2 * l_max + 1
    out = np.zeros((size, size))
    for ko in range(size):
        k = ko - l_max
        for no in range(size):
            n = no - l_max
            acc = 0.0
            if half_p == 1.0:
                for i in range(n1):
                    ii = (i + k) % n1
                    for j in range(n2):
                        jj = (j + n) % n2
                        du = u[ii, jj] - u[i, j]
                        dv = v[ii, jj] - v[i, j]
                        acc += du * du + dv * dv
            else:
                for i in range(n1):
                    ii = (i + k) % n1
                    for j in range(n2):
                        jj = (j + n) % n2
                        du = u[ii, jj] - u[i, j]
                        dv = v[ii, jj] - v[i, j]
                        acc += (du * du + dv * dv) ** half_p
            out[ko, no] = acc
    return out
