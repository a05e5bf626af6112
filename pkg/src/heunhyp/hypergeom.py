"""Scalar special-function kernels.

Gamma and Pochhammer helpers, the Gauss function 2F1 on ``0 <= z <= 1`` and
generalized hypergeometric series at unit argument.  Everything is real
double precision.  Error estimates bound the truncation error of a series;
floating-point round-off is not included.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import gammaln

from ._accel import richardson
from .errors import DomainError, NoConvergence, PoleError

POLE_TOL = 1e-9
TERM_CAP_UNIT = 10**6
TERM_CAP_2F1 = 10**4
RICHARDSON_LEVELS = 6


@dataclass(frozen=True)
class SeriesValue:
    """A series sum with its truncation-error estimate."""

    value: float
    abs_error_estimate: float
    terms_used: int
    converged: bool

    def __float__(self):
        return float(self.value)


@dataclass(frozen=True)
class HyperParams2F1:
    upper_a: float
    upper_b: float
    lower_c: float
    argument_z: float


def nonpositive_int(x: float, tol: float = POLE_TOL) -> int | None:
    """Return ``m`` if ``x`` is within ``tol`` of ``-m`` (``m >= 0``), else None."""
    if isinstance(x, complex):
        if abs(x.imag) > tol:
            return None
        x = x.real
    r = round(x)
    if r <= 0 and abs(x - r) <= tol:
        return int(-r)
    return None


def ln_gamma(x: float) -> tuple[float, int]:
    """Return ``(log|Gamma(x)|, sign(Gamma(x)))``.

    Negative arguments go through the reflection formula.
    """
    if nonpositive_int(x) is not None:
        raise PoleError(f"Gamma has a pole at x = {x!r}")
    if x > 0:
        return math.lgamma(x), 1
    # Gamma(x) Gamma(1 - x) = pi / sin(pi x)
    s = math.sin(math.pi * x)
    val = math.log(math.pi / abs(s)) - math.lgamma(1.0 - x)
    return val, (1 if s > 0 else -1)


def gamma_ratio(num: Sequence[float], den: Sequence[float]) -> float:
    """Product of Gamma(num) divided by product of Gamma(den), in log space.

    A pole in the denominator makes the ratio exactly zero; a pole in the
    numerator raises PoleError.
    """
    for x in num:
        if nonpositive_int(x) is not None:
            raise PoleError(f"Gamma({x!r}) in the numerator is infinite")
    if any(nonpositive_int(x) is not None for x in den):
        return 0.0
    logv, sign = 0.0, 1
    for x in num:
        lv, s = ln_gamma(x)
        logv += lv
        sign *= s
    for x in den:
        lv, s = ln_gamma(x)
        logv -= lv
        sign *= s
    return sign * math.exp(logv)


def pochhammer(x, k: int):
    """Rising factorial ``x (x+1) ... (x+k-1)`` by iterated product."""
    if k < 0:
        raise DomainError("k must be non-negative")
    out = 1.0
    for j in range(k):
        out *= x + j
    return out


# --------------------------------------------------------------------------
# Gauss 2F1


def _check_2f1(a, b, c, z):
    if not 0.0 <= z <= 1.0:
        raise DomainError(f"z = {z!r} outside [0, 1]")
    mc = nonpositive_int(c)
    if mc is not None:
        mt = [m for m in (nonpositive_int(a), nonpositive_int(b)) if m is not None]
        if not mt or min(mt) > mc:
            raise PoleError(f"lower parameter c = {c!r} is a non-positive integer")


def _terminating_sum(upper, lower, z, m):
    total, t = 1.0, 1.0
    for k in range(m):
        num = 1.0
        for u in upper:
            num *= u + k
        den = float(k + 1)
        for l in lower:
            den *= l + k
        t *= num / den * z
        total += t
    return total


def _scaled_cumprod(t0, r):
    """``[t0, t0*r0, t0*r0*r1, ...]`` (length ``len(r) + 1``) without overflow."""
    if t0 == 0.0:
        return np.zeros(len(r) + 1)
    with np.errstate(divide="ignore", over="ignore"):
        logs = np.concatenate(([0.0], np.cumsum(np.log(np.abs(r)))))
        signs = np.concatenate(([1.0], np.cumprod(np.sign(r))))
        return math.copysign(1.0, t0) * signs * np.exp(math.log(abs(t0)) + logs)


def _series_2f1(a, b, c, z, tol, cap):
    mt = [m for m in (nonpositive_int(a), nonpositive_int(b)) if m is not None]
    if mt:
        m = min(mt)
        # snap the terminating parameter to the exact integer
        ua = -m if nonpositive_int(a) == m else a
        ub = -m if nonpositive_int(b) == m else b
        return SeriesValue(_terminating_sum((ua, ub), (c,), z, m), 0.0, m + 1, True)
    kmin = max(0.0, -a, -b, -c)
    total = 0.0
    t = 1.0
    k = 0
    chunk = 32
    while k < cap:
        ks = np.arange(k, k + chunk, dtype=float)
        r = (a + ks) * (b + ks) / ((c + ks) * (ks + 1.0)) * z
        terms = _scaled_cumprod(t, r)
        total += math.fsum(terms[:-1])
        t = terms[-1]
        k += chunk
        chunk = min(chunk * 2, 4096)
        if k > kmin:
            rn = abs((a + k) * (b + k) / ((c + k) * (k + 1.0)) * z)
            rb = max(rn, z)
            if rb < 1.0:
                est = abs(t) / (1.0 - rb)
                if est <= tol or not math.isfinite(est):
                    if not math.isfinite(total):
                        raise NoConvergence("2F1 series overflowed")
                    return SeriesValue(total, est, k, est <= tol)
    raise NoConvergence(f"2F1({a}, {b}; {c}; {z}) needs more than {cap} terms")


def hyp2f1(a: float, b: float, c: float, z: float, tol: float = 1e-15) -> SeriesValue:
    """Gauss hypergeometric function for ``0 <= z <= 1``.

    ``z = 1`` is answered by Gauss' summation theorem and requires
    ``c - a - b > 0`` unless the series terminates.
    """
    _check_2f1(a, b, c, z)
    if z == 0.0:
        return SeriesValue(1.0, 0.0, 1, True)
    if z == 1.0:
        if nonpositive_int(a) is None and nonpositive_int(b) is None:
            if c - a - b <= 0:
                raise DomainError("2F1 at z = 1 needs c - a - b > 0")
            v = gamma_ratio((c, c - a - b), (c - a, c - b))
            return SeriesValue(v, 0.0, 1, True)
    cap = TERM_CAP_2F1 if z <= 0.9 else TERM_CAP_UNIT
    return _series_2f1(a, b, c, z, tol, cap)


def gauss_2f1(p: HyperParams2F1, tol: float = 1e-15) -> SeriesValue:
    return hyp2f1(p.upper_a, p.upper_b, p.lower_c, p.argument_z, tol)


def gauss_2f1_derivative(p: HyperParams2F1, tol: float = 1e-15) -> SeriesValue:
    """d/dz 2F1(a, b; c; z) = (a b / c) 2F1(a+1, b+1; c+1; z)."""
    a, b, c, z = p.upper_a, p.upper_b, p.lower_c, p.argument_z
    _check_2f1(a, b, c, z)
    if a == 0.0 or b == 0.0:
        return SeriesValue(0.0, 0.0, 1, True)
    pref = a * b / c
    inner = hyp2f1(a + 1.0, b + 1.0, c + 1.0, z, tol / max(abs(pref), 1e-300))
    return SeriesValue(pref * inner.value, abs(pref) * inner.abs_error_estimate,
                       inner.terms_used, inner.converged)


def _negative_c_safe(a, b, cs, z, tol) -> np.ndarray:
    # With c < 0 the term ratio passes through a pole at k = -c and the terms
    # then grow until k ~ -c / (1 - z).  Skipping that region is allowed only
    # if every term there is negligible.  Past the pole the ratio falls
    # monotonically, so the largest term sits where it crosses 1; probe there,
    # at both ends of the window and on a coarse grid.
    m = -np.asarray(cs, dtype=float)
    if z == 0.0:
        return np.ones(m.shape, dtype=bool)
    lo = np.maximum(np.floor(m), 1.0)
    hi = np.ceil(m / (1.0 - z)) + 3.0
    left, right = np.maximum(np.floor(m) + 1.0, 1.0), hi.copy()
    with np.errstate(all="ignore"):
        while np.any(right - left > 1):
            mid = np.floor((left + right) / 2)
            up = np.abs((a + mid) * (b + mid) * z / ((mid - m) * (mid + 1.0))) >= 1.0
            active = right - left > 1
            left = np.where(active & up, mid, left)
            right = np.where(active & ~up, mid, right)
        grid = lo[:, None] + (hi - lo)[:, None] * np.linspace(0.0, 1.0, 17)[None, :]
        ks = np.concatenate([np.floor(grid), np.stack(
            [lo, lo + 1, left - 1, left, left + 1, right, right + 1, hi], axis=1)], axis=1)
        ks = np.clip(ks, lo[:, None], hi[:, None])
        cc = -m[:, None]
        lt = (ks * math.log(z) + gammaln(a + ks) - gammaln(a) + gammaln(b + ks)
              - gammaln(b) - gammaln(ks + 1.0) - gammaln(cc + ks) + gammaln(cc))
        ok = np.all(np.isfinite(lt), axis=1) & (np.max(lt, axis=1) < math.log(tol) - 7.0)
    return ok & (hi - m <= 200_000)


def hyp2f1_lower_sweep(a: float, b: float, cs, z: float, rtol: float = 1e-16,
                       cap: int = TERM_CAP_UNIT) -> np.ndarray:
    """Vectorized 2F1(a, b; c; z) over an array of lower parameters ``cs``.

    Each entry is summed until its tail estimate drops below
    ``rtol * max(1, |partial sum|)``.  Poles must be screened by the caller.
    """
    cs = np.asarray(cs, dtype=float)
    out = np.ones_like(cs)
    if z == 0.0 or cs.size == 0:
        return out
    if not 0.0 <= z < 1.0:
        raise DomainError("lower-parameter sweep needs 0 <= z < 1")
    base = max(0.0, -a, -b)
    need = np.full(cs.shape, base)
    neg = cs < 0
    if neg.any():
        unsafe = np.zeros(cs.shape, dtype=bool)
        unsafe[neg] = ~_negative_c_safe(a, b, cs[neg], z, rtol)
        need[unsafe] = np.maximum(base, -cs[unsafe])
    idx = np.arange(cs.size)
    total = np.ones_like(cs)
    t = np.ones_like(cs)
    c_act = cs.copy()
    need_act = need.copy()
    for k in range(cap):
        r = (a + k) * (b + k) * z / ((c_act + k) * (k + 1.0))
        t = t * r
        total = total + t
        rn = np.abs((a + k + 1) * (b + k + 1) * z / ((c_act + k + 1) * (k + 2.0)))
        rb = np.maximum(rn, z)
        with np.errstate(divide="ignore", invalid="ignore"):
            est = np.where(rb < 1.0, np.abs(t) * rb / (1.0 - rb), np.inf)
        done = (k + 1 > need_act) & (est <= rtol * np.maximum(1.0, np.abs(total)))
        if done.any():
            out[idx[done]] = total[done]
            keep = ~done
            idx, total, t, c_act, need_act = (idx[keep], total[keep], t[keep],
                                              c_act[keep], need_act[keep])
            if idx.size == 0:
                return out
    raise NoConvergence("2F1 lower-parameter sweep hit the term cap")


# --------------------------------------------------------------------------
# Generalized hypergeometric series at unit argument


def _cancel_pairs(upper, lower, tol=1e-12):
    upper = list(upper)
    lower = list(lower)
    for u in list(upper):
        for j, l in enumerate(lower):
            if abs(u - l) <= tol:
                upper.remove(u)
                del lower[j]
                break
    return upper, lower


def hyper_pfq_unit(upper: Sequence[float], lower: Sequence[float],
                   tol: float = 1e-12) -> SeriesValue:
    """Sum ``(p+1)F(p)(upper; lower; 1)`` with tail extrapolation.

    Terms of a non-terminating series with parametric excess ``s`` decay like
    ``k**(-1-s)``, so partial sums carry an error expansion in powers
    ``N**-(s+j)``; Richardson extrapolation over doubling ``N`` removes it.
    """
    upper, lower = _cancel_pairs(upper, lower)
    if len(upper) != len(lower) + 1:
        raise DomainError("unit-argument series needs p+1 upper and p lower parameters")
    mt = [m for m in map(nonpositive_int, upper) if m is not None]
    m_term = min(mt) if mt else None
    for l in lower:
        ml = nonpositive_int(l)
        if ml is not None and (m_term is None or ml < m_term):
            raise PoleError(f"lower parameter {l!r} is a non-positive integer")
    if m_term is not None:
        snapped = [-m_term if nonpositive_int(u) == m_term else u for u in upper]
        return SeriesValue(_terminating_sum(snapped, lower, 1.0, m_term), 0.0,
                           m_term + 1, True)
    s = sum(lower) - sum(upper)
    if s <= 0:
        raise DomainError(f"parametric excess {s:.6g} <= 0: series diverges at 1")
    up = np.asarray(upper, dtype=float)
    lo = np.asarray(lower, dtype=float)
    scale = max([1.0] + [abs(x) for x in upper + lower])
    n0 = max(64, int(8 * math.ceil(scale)))
    n0 = max(n0, int(math.ceil(16.0 / s)))
    exps = [s + j for j in range(RICHARDSON_LEVELS)]
    while True:
        ns = [n0 * 2**j for j in range(RICHARDSON_LEVELS + 1)]
        kmax = ns[-1]
        if kmax > TERM_CAP_UNIT:
            break
        ks = np.arange(kmax, dtype=float)
        ratio = np.prod(up[:, None] + ks, axis=0) / (
            np.prod(lo[:, None] + ks, axis=0) * (ks + 1.0))
        terms = np.concatenate(([1.0], np.cumprod(ratio)))
        if not np.all(np.isfinite(terms)):
            raise NoConvergence("unit-argument series overflowed")
        partial = [math.fsum(terms[: n + 1]) for n in ns]
        hs = [1.0 / n for n in ns]
        value, est = richardson(hs, partial, exps)
        if est <= tol:
            return SeriesValue(value, est, kmax + 1, True)
        n0 *= 4
    raise NoConvergence("unit-argument series did not reach tolerance within the term cap")


def hyper_3f2_unit(upper: Sequence[float], lower: Sequence[float],
                   tol: float = 1e-12) -> SeriesValue:
    """Clausen's 3F2(u1, u2, u3; l1, l2; 1)."""
    if len(upper) != 3 or len(lower) != 2:
        raise DomainError("3F2 needs three upper and two lower parameters")
    return hyper_pfq_unit(upper, lower, tol)


def hyper_4f3_unit(upper: Sequence[float], lower: Sequence[float],
                   tol: float = 1e-12) -> SeriesValue:
    """4F3(...; 1); a matched upper/lower pair is cancelled first."""
    if len(upper) != 4 or len(lower) != 3:
        raise DomainError("4F3 needs four upper and three lower parameters")
    return hyper_pfq_unit(upper, lower, tol)
