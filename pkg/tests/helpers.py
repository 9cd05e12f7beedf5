"""Shared constructors for hand-built spectral fields."""

import numpy as np


def single_mode(grid, K, vec):
    """Real field whose only coefficients sit at +K (value vec) and -K (conjugate)."""
    c = np.zeros((3, *grid.spectral_shape), dtype=complex)
    N = grid.N
    kx, ky, kz = K
    if kz < 0 or (kz == 0 and (kx, ky) < (0, 0)):
        kx, ky, kz = -kx, -ky, -kz
        vec = np.conj(vec)
    c[:, kx % N, ky % N, kz] = vec
    if kz == 0:
        c[:, (-kx) % N, (-ky) % N, 0] = np.conj(vec)
    return c
