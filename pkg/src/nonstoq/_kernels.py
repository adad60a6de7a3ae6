"""Numba inner loops for the Metropolis sweeps.

Uniform random numbers are pregenerated by the caller, one per proposal,
so the accept/reject stream is independent of branch outcomes and the
chain is reproducible bit for bit from the seed alone.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def sweep_quantum(spins, indptr, indices, weights, h, j_ir, beta_tau, B, mags, order, uniforms):
    """One sweep of N*tau single-spin-flip proposals on an (N, tau) path.

    spins: int8 (N, tau), modified in place.  mags: int64 per-slice sums
    of spins, kept consistent on accept.  order: flat proposal order,
    entries index (t, i) as t*N + i.  Returns the number of accepts.
    """
    n, tau = spins.shape
    acc = 0
    for k in range(order.size):
        idx = order[k]
        t = idx // n
        i = idx - t * n
        s = spins[i, t]
        tm = tau - 1 if t == 0 else t - 1
        tp = 0 if t == tau - 1 else t + 1
        local = 0.0
        for p in range(indptr[i], indptr[i + 1]):
            local += weights[p] * spins[indices[p], t]
        dh0 = 2.0 * s * (local + h[i])
        if j_ir != 0.0:
            dh0 += 4.0 * j_ir * (s * mags[t] - 1.0) / n
        delta = beta_tau * dh0 + 2.0 * B * s * (spins[i, tm] + spins[i, tp])
        if delta <= 0.0 or uniforms[k] < np.exp(-delta):
            spins[i, t] = -s
            mags[t] -= 2 * s
            acc += 1
    return acc


@njit(cache=True)
def sweep_classical(spins, indptr, indices, weights, h, j_ir, beta, order, uniforms):
    """One sweep of N proposals on a single classical configuration.

    Used for the degenerate-field branch where all Trotter slices move in
    lockstep.  spins: int8 (N,), modified in place.  Returns accepts.
    """
    n = spins.size
    M = 0
    for i in range(n):
        M += spins[i]
    acc = 0
    for k in range(order.size):
        i = order[k]
        s = spins[i]
        local = 0.0
        for p in range(indptr[i], indptr[i + 1]):
            local += weights[p] * spins[indices[p]]
        dh0 = 2.0 * s * (local + h[i])
        if j_ir != 0.0:
            dh0 += 4.0 * j_ir * (s * M - 1.0) / n
        delta = beta * dh0
        if delta <= 0.0 or uniforms[k] < np.exp(-delta):
            spins[i] = -s
            M -= 2 * s
            acc += 1
    return acc
