"""Slow reference computations that share no code path with the FFT pipeline."""

from __future__ import annotations

from collections import defaultdict

import numpy as np

from .spectral import Grid


def brute_force_dft(samples: np.ndarray) -> np.ndarray:
    """Normalised forward DFT of an (n, n, n) array by explicit summation."""
    n = samples.shape[0]
    idx = np.arange(n)
    w = np.exp(-2j * np.pi * np.outer(idx, idx) / n)
    out = np.einsum("ai,bj,ck,ijk->abc", w, w, w, samples)
    return out / n**3


def sparse_modes(coeffs: np.ndarray, grid: Grid, tol: float = 0.0) -> dict:
    """{(i, j, k): value} over nonzero entries of a scalar coefficient array, signed indices."""
    out = {}
    idx = grid.index_1d
    for a, b, c in zip(*np.nonzero(np.abs(coeffs) > tol)):
        out[(int(idx[a]), int(idx[b]), int(idx[c]))] = coeffs[a, b, c]
    return out


def direct_convolution(a: dict, b: dict) -> dict:
    """Coefficients of the product of two fields given as sparse mode dicts."""
    out = defaultdict(complex)
    for p, ap in a.items():
        for q, bq in b.items():
            out[(p[0] + q[0], p[1] + q[1], p[2] + q[2])] += ap * bq
    return dict(out)


def to_dense(modes: dict, grid: Grid) -> np.ndarray:
    """Place sparse modes on the grid; modes outside (-n/2, n/2) raise."""
    out = np.zeros(grid.shape, dtype=complex)
    h = grid.n // 2
    for (i, j, k), val in modes.items():
        if max(abs(i), abs(j), abs(k)) >= h:
            raise ValueError(f"mode {(i, j, k)} does not fit on an n={grid.n} grid")
        out[i % grid.n, j % grid.n, k % grid.n] += val
    return out


def direct_nonlinear_term(u_coeffs: np.ndarray, grid: Grid) -> np.ndarray:
    """-P div(u (x) u) by explicit triad sums, kept on two-thirds-rule modes."""
    def in_band(m):
        return all(3 * abs(x) < grid.n for x in m)

    comps = [{m: v for m, v in sparse_modes(u_coeffs[i], grid).items() if in_band(m)}
             for i in range(3)]
    prods = {(i, j): direct_convolution(comps[i], comps[j]) for i in range(3) for j in range(3)}
    dk = grid.spacing
    out = {}
    modes = set()
    for p in prods.values():
        modes.update(p)
    for m in modes:
        if not in_band(m):
            continue
        kv = np.array(m, dtype=float) * dk
        div = np.array([sum(1j * kv[j] * prods[i, j].get(m, 0) for j in range(3))
                        for i in range(3)])
        k2 = kv @ kv
        if k2 > 0:
            div = div - kv * (kv @ div) / k2
        out[m] = -div
    dense = np.zeros((3,) + grid.shape, dtype=complex)
    for (i, j, k), vec in out.items():
        dense[:, i % grid.n, j % grid.n, k % grid.n] = vec
    return dense


def direct_advection(u_coeffs: np.ndarray, v_coeffs: np.ndarray, grid: Grid) -> dict:
    """(u . grad) v as sparse modes: sum_j u_j * (i k_j v_i), by explicit sums."""
    dk = grid.spacing
    out = [defaultdict(complex) for _ in range(3)]
    u = [sparse_modes(u_coeffs[j], grid) for j in range(3)]
    for i in range(3):
        v = sparse_modes(v_coeffs[i], grid)
        for j in range(3):
            dv = {q: 1j * q[j] * dk * val for q, val in v.items()}
            for m, val in direct_convolution(u[j], dv).items():
                out[i][m] += val
    return [dict(o) for o in out]
