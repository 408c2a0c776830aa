"""Independent reference computations used by the tests.

Nothing here goes through the package's correlation-matrix machinery:
correlations are contracted directly from the 2x2 operator matrices and
the reshaped state tensors.
"""

import numpy as np

SZ = np.array([[1.0, 0.0], [0.0, -1.0]])
SX = np.array([[0.0, 1.0], [1.0, 0.0]])


def plane_operators(thetas):
    return np.cos(thetas)[:, None, None] * SZ + np.sin(thetas)[:, None, None] * SX


def pure_table(amplitudes, ops):
    """table[x, y] = <v| O_x (x) O_y |v> with v reshaped to a 2x2 tensor."""
    v = np.asarray(amplitudes, dtype=complex).reshape(2, 2)
    return np.einsum("ij,xik,yjl,kl->xy", v.conj(), ops, ops, v).real


def mixed_table(matrix, ops):
    rho = np.asarray(matrix, dtype=complex).reshape(2, 2, 2, 2)
    return np.einsum("ijkl,xki,ylj->xy", rho, ops, ops).real


def brute_force_max(decomp, points=41):
    """Max of <B> over a points^4 grid of plane angles in [0, 2 pi)."""
    thetas = 2 * np.pi * np.arange(points) / points
    ops = plane_operators(thetas)
    full = mixed_table(decomp.source.matrix, ops)
    best = -np.inf
    sums = sum(
        p * np.abs(t[:, :, None] + t[:, None, :])  # [d, b, c]
        for p, t in ((p, pure_table(s.amplitudes, ops)) for p, s in decomp.terms)
    )
    for a in range(points):
        lhs = np.abs(full[a, :, None] - full[a, None, :])  # [b, c]
        best = max(best, float((lhs[None, :, :] + sums).max()))
    return best
