"""Reference elimination kernel written against numpy only.

Used whenever the compiled extension is unavailable or disabled through
``PLCSIM_PURE_PYTHON=1``.
"""

from __future__ import annotations

import numpy as np


def rref_inplace(m: np.ndarray, p: int, ncols: int = -1) -> list[int]:
    """Reduce ``m`` (int64, entries in [0, p)) to reduced row echelon form mod p.

    Pivots are only searched in the first ``ncols`` columns (all columns when
    negative); the remaining columns are carried along as right-hand sides.
    Returns the pivot column of each nonzero row, in row order.
    """
    rows, cols = m.shape
    limit = cols if ncols < 0 else ncols
    pivots: list[int] = []
    r = 0
    for c in range(limit):
        if r == rows:
            break
        nz = np.flatnonzero(m[r:, c])
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            m[[r, piv]] = m[[piv, r]]
        inv = pow(int(m[r, c]), p - 2, p)
        if inv != 1:
            m[r] = (m[r] * inv) % p
        col = m[:, c].copy()
        col[r] = 0
        hit = np.flatnonzero(col)
        if hit.size:
            m[hit] = (m[hit] - np.outer(col[hit], m[r])) % p
        pivots.append(c)
        r += 1
    return pivots
