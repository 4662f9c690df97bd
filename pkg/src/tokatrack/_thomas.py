"""Thomas algorithm for tridiagonal systems (internal).

Array layout for an m-by-m system: ``lower[i]`` couples row i to i-1
(``lower[0]`` is ignored), ``diag[i]`` is the main diagonal, ``upper[i]``
couples row i to i+1 (``upper[m-1]`` is ignored).
"""

import numpy as np

from .errors import NumericalError


def thomas(lower, diag, upper, rhs):
    """Solve the tridiagonal system in O(m) without pivoting.

    Intended for diagonally dominant or SPD systems, where elimination
    without pivoting is backward stable. Raises NumericalError on a
    vanishing pivot (singular or near-singular system).
    """
    m = len(diag)
    scale = np.max(np.abs(diag)) + np.max(np.abs(lower)) + np.max(np.abs(upper))
    if scale == 0.0:
        raise NumericalError("tridiagonal solve: zero matrix")
    tiny = 1e-300 + 1e-14 * scale

    c = np.empty(m)
    d = np.empty(m)
    piv = diag[0]
    if abs(piv) <= tiny:
        raise NumericalError("tridiagonal solve: zero pivot at row 0")
    c[0] = upper[0] / piv
    d[0] = rhs[0] / piv
    for i in range(1, m):
        piv = diag[i] - lower[i] * c[i - 1]
        if abs(piv) <= tiny:
            raise NumericalError(f"tridiagonal solve: zero pivot at row {i}")
        c[i] = upper[i] / piv if i < m - 1 else 0.0
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / piv

    x = np.empty(m)
    x[m - 1] = d[m - 1]
    for i in range(m - 2, -1, -1):
        x[i] = d[i] - c[i] * x[i + 1]
    return x
