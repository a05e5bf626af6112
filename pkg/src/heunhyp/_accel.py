"""Richardson extrapolation with a prescribed set of exponents.

Given samples ``S(h_j)`` of a quantity with asymptotic expansion

    S(h) = S0 + sum_i b_i * h**e_i,

the limit ``S0`` is found by solving the square linear system built from the
first ``len(h) - 1`` exponents.  The error estimate is the distance to the
extrapolation that drops the coarsest sample (and the highest exponent).
"""

from __future__ import annotations

from typing import Sequence

import numpy as np


def _solve(hs: np.ndarray, values: np.ndarray, exponents: Sequence[float]):
    m = len(exponents)
    # scale by the coarsest h so the columns stay O(1)
    x = hs / hs[0]
    A = np.ones((m + 1, m + 1), dtype=float)
    for i, e in enumerate(exponents):
        A[:, i + 1] = x ** e
    return np.linalg.solve(A, values)[0]


def richardson(hs, values, exponents) -> tuple[complex | float, float]:
    """Extrapolate ``values`` sampled at ``hs`` to ``h -> 0``.

    Parameters
    ----------
    hs : sequence of float
        Decreasing positive sample abscissae.
    values : sequence of float or complex
        Samples, same length as ``hs``.
    exponents : sequence of float
        Increasing exponents of the error expansion.  Only the first
        ``len(hs) - 1`` are used.

    Returns
    -------
    (limit, error_estimate)
    """
    hs = np.asarray(hs, dtype=float)
    values = np.asarray(values)
    n = len(hs)
    if n < 2:
        raise ValueError("need at least two samples")
    exps = list(exponents)[: n - 1]
    if len(exps) < n - 1:
        raise ValueError("not enough exponents for the number of samples")
    best = _solve(hs, values, exps)
    if n == 2:
        err = abs(values[1] - best)
    else:
        coarse = _solve(hs[1:], values[1:], exps[: n - 2])
        err = abs(best - coarse)
    if not np.iscomplexobj(values):
        best = float(np.real(best))
    return best, float(err)


def merge_exponents(*families: Sequence[float], gap: float = 0.05) -> list[float]:
    """Sorted union of exponent families, dropping near-duplicates."""
    out: list[float] = []
    for e in sorted(e for fam in families for e in fam):
        if not out or e - out[-1] > gap:
            out.append(e)
    return out
