"""Exact 1D total-variation denoising (Condat's direct algorithm).

Solves ``min_y 0.5 * ||x - y||^2 + w * sum_k |y[k+1] - y[k]|`` without
inner tolerances. Worst case O(K^2), linear in practice.
"""
import numba
import numpy as np


@numba.njit(cache=True)
def _tv1d(x, w, out):
    n = x.shape[0]
    if n == 0:
        return
    if w <= 0.0 or n == 1:
        for i in range(n):
            out[i] = x[i]
        return
    k = 0
    k0 = 0
    kplus = 0
    kminus = 0
    umin = w
    umax = -w
    vmin = x[0] - w
    vmax = x[0] + w
    twow = 2.0 * w
    while True:
        while k == n - 1:
            if umin < 0.0:
                # segment value too high: negative jump
                while True:
                    out[k0] = vmin
                    k0 += 1
                    if k0 > kminus:
                        break
                k = k0
                kminus = k0
                vmin = x[k0]
                umin = w
                umax = vmin + umin - vmax
            elif umax > 0.0:
                while True:
                    out[k0] = vmax
                    k0 += 1
                    if k0 > kplus:
                        break
                k = k0
                kplus = k0
                vmax = x[k0]
                umax = -w
                umin = vmax + umax - vmin
            else:
                vmin += umin / (k - k0 + 1)
                while True:
                    out[k0] = vmin
                    k0 += 1
                    if k0 > k:
                        break
                return
        umin += x[k + 1] - vmin
        if umin < -w:
            while True:
                out[k0] = vmin
                k0 += 1
                if k0 > kminus:
                    break
            k = k0
            kminus = k0
            kplus = k0
            vmin = x[k0]
            vmax = vmin + twow
            umin = w
            umax = -w
            continue
        umax += x[k + 1] - vmax
        if umax > w:
            while True:
                out[k0] = vmax
                k0 += 1
                if k0 > kplus:
                    break
            k = k0
            kminus = k0
            kplus = k0
            vmax = x[k0]
            vmin = vmax - twow
            umin = w
            umax = -w
        else:
            k += 1
            if umin >= w:
                kminus = k
                vmin += (umin - w) / (kminus - k0 + 1)
                umin = w
            if umax <= -w:
                kplus = k
                vmax += (umax + w) / (kplus - k0 + 1)
                umax = -w


@numba.njit(cache=True)
def _tv1d_rows(rows, w, out):
    for r in range(rows.shape[0]):
        _tv1d(rows[r], w, out[r])


def tv1d(x: np.ndarray, w: float) -> np.ndarray:
    x = np.ascontiguousarray(x, dtype=np.float64)
    out = np.empty_like(x)
    _tv1d(x, float(w), out)
    return out


def tv1d_rows(rows: np.ndarray, w: float) -> np.ndarray:
    """Apply :func:`tv1d` to every row of a 2D array."""
    rows = np.ascontiguousarray(rows, dtype=np.float64)
    out = np.empty_like(rows)
    _tv1d_rows(rows, float(w), out)
    return out
