"""Expansions of Heun solutions in Gauss hypergeometric functions.

Two families are supported:

* ascending:  u = sum_n a_n 2F1(alpha, beta; gamma + epsilon + n; z)
* descending: u = sum_n a_n 2F1(alpha, beta; gamma0 - n; z),
  gamma0 in {gamma, alpha, beta}

The coefficients obey ``R_n a_n + Q_{n-1} a_{n-1} + P_{n-2} a_{n-2} = 0``
with ``a_0 = 1``.  On the slice ``a = 1/2``, ``gamma + delta = 2``,
``q = a alpha beta + a (1 - delta) epsilon`` the middle coefficient vanishes
and the coefficients are explicit Pochhammer ratios.

Summation
---------
Forward recursion yields coefficients with two asymptotic branches,
``n**-2`` and ``t**n n**-(gamma+delta)`` where ``t = -a/(1-a)`` (ascending)
or ``(a-1)/a`` (descending).  Descending basis functions additionally grow
like ``(z/(1-z))**n``.  The partial sums therefore converge like ``1/N``
and are extrapolated in ``1/N`` (plus ``N**-(gamma+delta+j)`` when
``|t| = 1``) over doubling ``N``.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._accel import merge_exponents, richardson
from .core import HeunParams
from .errors import DomainError, PoleError
from .hypergeom import (POLE_TOL, SeriesValue, hyp2f1_lower_sweep,
                        nonpositive_int, pochhammer)

log = logging.getLogger(__name__)

TWO_TERM_TOL = 1e-12
ZERO_TOL = 1e-14
LEVELS = 6


class Direction(str, enum.Enum):
    ASCENDING = "ascending"
    DESCENDING = "descending"


class Regime(str, enum.Enum):
    THREE_TERM = "three-term"
    TWO_TERM = "two-term"


@dataclass(frozen=True)
class ExpansionSpec:
    direction: Direction
    gamma0: float
    regime: Regime = Regime.THREE_TERM


@dataclass(frozen=True)
class Expansion:
    """Coefficients ``a_0..a_M`` of an expansion.

    ``terminated`` is True when every coefficient past ``truncation_index``
    is exactly zero; otherwise ``truncation_index == M`` and the series is
    merely cut for computation.
    """

    spec: ExpansionSpec
    coefficients: np.ndarray
    truncation_index: int
    terminated: bool = False

    def lower_parameter(self, n):
        if self.spec.direction is Direction.ASCENDING:
            return self.spec.gamma0 + n
        return self.spec.gamma0 - n


class RecurrenceCoeffs(NamedTuple):
    R: complex | float
    Q: complex | float
    P: complex | float


def _snap(x, scale):
    # a sum of O(scale) pieces that cancels to round-off is an exact zero
    return 0.0 if abs(x) <= ZERO_TOL * scale else x


def ascending_spec(p: HeunParams) -> ExpansionSpec:
    regime = Regime.TWO_TERM if is_two_term(p) else Regime.THREE_TERM
    return ExpansionSpec(Direction.ASCENDING, p.gamma + p.epsilon, regime)


def descending_spec(p: HeunParams, gamma0) -> ExpansionSpec:
    """``gamma0`` may be a number or one of the names 'gamma', 'alpha', 'beta'."""
    if isinstance(gamma0, str):
        gamma0 = {"gamma": p.gamma, "alpha": p.alpha, "beta": p.beta}[gamma0]
    if not any(abs(gamma0 - v) <= 1e-12 for v in (p.gamma, p.alpha, p.beta)):
        raise DomainError("descending expansion needs gamma0 in {gamma, alpha, beta}")
    regime = Regime.TWO_TERM if is_two_term(p) else Regime.THREE_TERM
    return ExpansionSpec(Direction.DESCENDING, float(gamma0), regime)


def recurrence_ascending(p: HeunParams, n: int) -> RecurrenceCoeffs:
    a, e, d = p.a, p.epsilon, p.delta
    g = p.gamma + e
    if abs(n + g) < POLE_TOL:
        raise PoleError(f"n + gamma + epsilon = 0 at n = {n}")
    R = (1.0 - a) * n * (g + n - 1.0)
    mid = a * (1.0 + n - d) * (n + e)
    const = a * p.alpha * p.beta - p.q
    Q = _snap(-R + mid + const, abs(R) + abs(mid) + abs(a * p.alpha * p.beta) + abs(p.q))
    f1 = _snap(n + e, abs(n) + abs(e))
    f2 = _snap(n + g - p.alpha, abs(n) + abs(g) + abs(p.alpha))
    f3 = _snap(n + g - p.beta, abs(n) + abs(g) + abs(p.beta))
    P = -a / (n + g) * f1 * f2 * f3
    return RecurrenceCoeffs(R, Q, P)


def recurrence_descending(p: HeunParams, gamma0: float, n: int) -> RecurrenceCoeffs:
    a = p.a
    if abs(gamma0 - n) < POLE_TOL:
        raise PoleError(f"gamma0 - n = 0 at n = {n}")
    r1 = _snap(p.gamma - gamma0 + n, abs(p.gamma) + abs(gamma0) + n)
    r2 = _snap(p.alpha - gamma0 + n, abs(p.alpha) + abs(gamma0) + n)
    r3 = _snap(p.beta - gamma0 + n, abs(p.beta) + abs(gamma0) + n)
    R = a / (gamma0 - n) * r1 * r2 * r3
    p1 = _snap(p.epsilon + p.gamma - gamma0 + n,
               abs(p.epsilon) + abs(p.gamma) + abs(gamma0) + n)
    p2 = _snap(gamma0 - n - 1.0, abs(gamma0) + n + 1.0)
    P = (a - 1.0) * p1 * p2
    mid = a * r1 * (p.alpha + p.beta - gamma0 + n)
    const = a * p.alpha * p.beta - p.q
    Q = _snap(-P + mid + const, abs(P) + abs(mid) + abs(a * p.alpha * p.beta) + abs(p.q))
    return RecurrenceCoeffs(R, Q, P)


def recurrence(p: HeunParams, spec: ExpansionSpec, n: int) -> RecurrenceCoeffs:
    if spec.direction is Direction.ASCENDING:
        return recurrence_ascending(p, n)
    return recurrence_descending(p, spec.gamma0, n)


def _snap_array(x, scale):
    return np.where(np.abs(x) <= ZERO_TOL * scale, 0.0, x)


def recurrence_table(p: HeunParams, spec: ExpansionSpec, M: int):
    """``R_n, Q_n, P_n`` for ``n = 0..M`` as arrays, matching :func:`recurrence`.

    Rows at a pole hold NaN; the scalar routines raise there.
    """
    n = np.arange(M + 1, dtype=float)
    a, q = p.a, p.q
    ab = a * p.alpha * p.beta
    with np.errstate(divide="ignore", invalid="ignore"):
        if spec.direction is Direction.ASCENDING:
            e, d = p.epsilon, p.delta
            g = p.gamma + e
            R = (1.0 - a) * n * (g + n - 1.0)
            mid = a * (1.0 + n - d) * (n + e)
            Q = _snap_array(-R + mid + (ab - q), np.abs(R) + np.abs(mid) + abs(ab) + abs(q))
            f1 = _snap_array(n + e, n + abs(e))
            f2 = _snap_array(n + g - p.alpha, n + abs(g) + abs(p.alpha))
            f3 = _snap_array(n + g - p.beta, n + abs(g) + abs(p.beta))
            P = -a / (n + g) * f1 * f2 * f3
            pole = np.abs(n + g) < POLE_TOL
        else:
            g0 = spec.gamma0
            r1 = _snap_array(p.gamma - g0 + n, abs(p.gamma) + abs(g0) + n)
            r2 = _snap_array(p.alpha - g0 + n, abs(p.alpha) + abs(g0) + n)
            r3 = _snap_array(p.beta - g0 + n, abs(p.beta) + abs(g0) + n)
            R = a / (g0 - n) * r1 * r2 * r3
            p1 = _snap_array(p.epsilon + p.gamma - g0 + n,
                             abs(p.epsilon) + abs(p.gamma) + abs(g0) + n)
            p2 = _snap_array(g0 - n - 1.0, abs(g0) + n + 1.0)
            P = (a - 1.0) * p1 * p2
            mid = a * r1 * (p.alpha + p.beta - g0 + n)
            Q = _snap_array(-P + mid + (ab - q), np.abs(P) + np.abs(mid) + abs(ab) + abs(q))
            pole = np.abs(g0 - n) < POLE_TOL
    for arr in (R, Q, P):
        arr[pole] = np.nan
    return R, Q, P


def generate_coefficients(p: HeunParams, spec: ExpansionSpec, M: int) -> Expansion:
    """Run the three-term recurrence forward from ``a_0 = 1`` up to index ``M``."""
    if p.alpha * p.beta == 0:
        raise DomainError("expansion is meaningless if alpha*beta = 0 "
                          "(basis functions are constants)")
    if spec.direction is Direction.ASCENDING and nonpositive_int(spec.gamma0) is not None:
        raise PoleError("gamma + epsilon is zero or a negative integer")
    dtype = complex if isinstance(p.q, complex) else float
    c = np.zeros(M + 1, dtype=dtype)
    c[0] = 1.0
    Rs, Qs, Ps = (x.tolist() for x in recurrence_table(p, spec, M))
    if Rs[0] != Rs[0]:
        recurrence(p, spec, 0)  # raises the pole error
    cv = [1.0] + [0.0] * M
    peak = 1.0
    for n in range(1, M + 1):
        R = Rs[n]
        if R != R:
            recurrence(p, spec, n)
        num = Qs[n - 1] * cv[n - 1]
        if n >= 2:
            num += Ps[n - 2] * cv[n - 2]
        if R == 0 or abs(R) < POLE_TOL:
            if num == 0:
                x = 0.0
            else:
                raise PoleError(f"R_{n} = 0 with non-zero right-hand side: "
                                "expansion not applicable")
        else:
            x = -num / R
        if abs(x) <= ZERO_TOL * peak:
            x = 0.0
        cv[n] = x
        peak = max(peak, abs(x))
        if n >= 2 and x == 0 and cv[n - 1] == 0:
            c[: n + 1] = cv[: n + 1]
            last = int(np.flatnonzero(c[: n + 1])[-1])
            return Expansion(spec, c, last, True)
    c[:] = cv
    return Expansion(spec, c, M, False)


def is_two_term(p: HeunParams, tol: float = TWO_TERM_TOL) -> bool:
    return not two_term_failures(p, tol)


def two_term_failures(p: HeunParams, tol: float = TWO_TERM_TOL) -> list[str]:
    """Names of the violated two-term conditions (empty when all hold)."""
    out = []
    if abs(p.a - 0.5) > tol:
        out.append("a != 1/2")
    if abs(p.gamma + p.delta - 2.0) > tol:
        out.append("gamma + delta != 2")
    q2 = p.a * p.alpha * p.beta + p.a * (1.0 - p.delta) * p.epsilon
    if abs(p.q - q2) > tol:
        out.append("q != a*alpha*beta + a*(1-delta)*epsilon")
    return out


def _pochhammer_ratio_series(num, den, kmax, with_factorial):
    # c_k = prod (num)_k / prod (den)_k [/ k!] by accumulated factor ratios
    c = [1.0]
    for k in range(kmax):
        top = 1.0
        for x in num:
            top *= x + k
        if top == 0:
            break
        bot = float(k + 1) if with_factorial else 1.0
        for x in den:
            bot *= x + k
        if abs(bot) < POLE_TOL:
            raise PoleError("denominator Pochhammer vanishes")
        c.append(c[-1] * top / bot)
    return c


def _spread_even(ck, kmax):
    out = np.zeros(2 * kmax + 1)
    out[: 2 * len(ck) - 1: 2] = ck
    return out


def two_term_coefficients(p: HeunParams, kmax: int) -> Expansion:
    """Closed-form ascending coefficients on the two-term slice.

    Entry ``2k`` is
    ``(eps/2)_k ((g-alpha)/2)_k ((g-beta)/2)_k / (k! (g/2)_k ((1+g)/2)_k)``
    with ``g = gamma + epsilon``; odd entries are zero.
    """
    fails = two_term_failures(p)
    if fails:
        raise DomainError("not in the two-term regime: " + ", ".join(fails))
    g = p.gamma + p.epsilon
    if nonpositive_int(g) is not None:
        raise PoleError("gamma + epsilon is zero or a negative integer")
    num = (p.epsilon / 2, (g - p.alpha) / 2, (g - p.beta) / 2)
    den = (g / 2, (1 + g) / 2)
    ck = _pochhammer_ratio_series(num, den, kmax, True)
    spec = ExpansionSpec(Direction.ASCENDING, g, Regime.TWO_TERM)
    terminated = len(ck) <= kmax
    coeffs = _spread_even(ck, kmax)
    return Expansion(spec, coeffs, 2 * (len(ck) - 1) if terminated else 2 * kmax, terminated)


def two_term_descending_coefficients(p: HeunParams, gamma0, kmax: int) -> Expansion:
    """Closed-form descending coefficients on the two-term slice (no ``k!``)."""
    fails = two_term_failures(p)
    if fails:
        raise DomainError("not in the two-term regime: " + ", ".join(fails))
    spec = descending_spec(p, gamma0)
    g0 = spec.gamma0
    num = ((1 - g0) / 2, (2 - g0) / 2, (p.gamma + p.epsilon - g0) / 2)
    den = (1 + (p.gamma - g0) / 2, 1 + (p.alpha - g0) / 2, 1 + (p.beta - g0) / 2)
    ck = _pochhammer_ratio_series(num, den, kmax, False)
    terminated = len(ck) <= kmax
    coeffs = _spread_even(ck, kmax)
    return Expansion(spec, coeffs, 2 * (len(ck) - 1) if terminated else 2 * kmax, terminated)


# --------------------------------------------------------------------------
# Summation


def _geometric_rates(p: HeunParams, direction: Direction, z: float):
    a = p.a
    if direction is Direction.ASCENDING:
        t = abs(a / (1.0 - a))
        basis = 0.0
    else:
        t = abs((a - 1.0) / a)
        basis = z / (1.0 - z) if z > 0 else 0.0
    return t, basis


def _model(p: HeunParams, direction: Direction, z: float):
    """Return (start_N, exponents) for the tail model, or None if divergent."""
    t, basis = _geometric_rates(p, direction, z)
    exps = [float(j) for j in range(1, LEVELS + 1)]
    rates = [basis]
    if abs(t - 1.0) <= 1e-12:
        pw = p.gamma + p.delta
        if pw <= 0:
            return None
        exps = merge_exponents(exps, [pw + j for j in range(LEVELS)])
    elif t > 1.0:
        return None
    else:
        rates.append(t)
    worst = max(rates)
    if worst >= 1.0:
        return None
    n0 = 16
    if worst > 0:
        n0 = max(n0, math.ceil(math.log(1e-17) / math.log(worst)))
    n0 += n0 % 2
    return n0, exps


def terms_needed(p: HeunParams, direction: Direction, z: float,
                 max_terms: int = 1 << 17) -> int | None:
    """Number of coefficients ``sum_expansion`` needs at ``z`` (None if divergent)."""
    m = _model(p, direction, z)
    if m is None:
        return None
    # a unit geometric rate leaves an algebraic tail that needs longer runs
    slow = abs(_geometric_rates(p, direction, z)[0] - 1.0) <= 1e-12
    n0 = max(m[0], 256 if slow else 64)
    need = n0 * 2**LEVELS
    return need if need <= max_terms else None


def _basis_values(p: HeunParams, e: Expansion, idx: np.ndarray, z: float, deriv: int):
    cs = e.lower_parameter(idx.astype(float))
    r = np.round(cs)
    for c in cs[(r <= 0) & (np.abs(cs - r) <= POLE_TOL)]:
        mc = nonpositive_int(c)
        if mc is not None:
            mt = [m for m in (nonpositive_int(p.alpha), nonpositive_int(p.beta)) if m is not None]
            if not mt or min(mt) > mc:
                raise PoleError(f"basis 2F1 has lower parameter {c:.12g}")
    al, be = p.alpha, p.beta
    pref = np.full(cs.shape, pochhammer(al, deriv) * pochhammer(be, deriv))
    for j in range(deriv):
        pref = pref / (cs + j)
    vals = hyp2f1_lower_sweep(al + deriv, be + deriv, cs + deriv, z)
    return pref * vals


def _round_off(terms: np.ndarray) -> float:
    # the extrapolation error can come out as an exact 0; never claim less than this
    return 8.0 * np.finfo(float).eps * float(np.sum(np.abs(terms)))


def _fsum(x: np.ndarray):
    if np.iscomplexobj(x):
        return complex(math.fsum(x.real), math.fsum(x.imag))
    return math.fsum(x)


def sum_expansion(p: HeunParams, e: Expansion, z: float, tol: float = 1e-10,
                  deriv: int = 0) -> SeriesValue:
    """Sum ``sum_n a_n F_n(z)`` (or its ``deriv``-th derivative, ``deriv <= 2``).

    Terminated expansions are summed exactly.  Otherwise the partial sums at
    ``N0, 2 N0, ..., 64 N0 <= M`` are extrapolated; ``converged`` is True when
    the extrapolation error estimate is at most ``tol``.
    """
    if not 0.0 <= z < 1.0:
        raise DomainError(f"z = {z!r} out of range [0, 1)")
    if deriv not in (0, 1, 2):
        raise DomainError("deriv must be 0, 1 or 2")
    last = e.truncation_index
    coeffs = e.coefficients[: last + 1]
    idx = np.flatnonzero(coeffs)
    vals = _basis_values(p, e, idx, z, deriv)
    terms = np.zeros(last + 1, dtype=np.result_type(coeffs, float))
    terms[idx] = coeffs[idx] * vals
    if log.isEnabledFor(logging.DEBUG):
        for n in idx:
            log.debug("n=%d a_n=%r term=%r", n, coeffs[n], terms[n])
    if e.terminated:
        return SeriesValue(_fsum(terms), 0.0, last + 1, True)
    model = _model(p, e.spec.direction, z)
    n0 = last // 2**LEVELS
    n0 -= n0 % 2
    if model is None or n0 < max(model[0], 2):
        val = _fsum(terms)
        return SeriesValue(val, math.inf, last + 1, False)
    ns = [n0 * 2**j for j in range(LEVELS + 1)]
    partial = [_fsum(terms[: n + 1]) for n in ns]
    val, est = richardson([1.0 / n for n in ns], partial, model[1])
    est = float(max(est, _round_off(terms[: ns[-1] + 1])))
    return SeriesValue(val, est, ns[-1] + 1, est <= tol)


def _defect_weights(p: HeunParams, spec: ExpansionSpec, n: np.ndarray) -> np.ndarray:
    # s_n = R_n + Q_n + P_n in closed form; the O(n**2) parts cancel exactly
    ab = p.alpha * p.beta
    if spec.direction is Direction.ASCENDING:
        g = p.gamma + p.epsilon
        c0 = g * (1.0 - p.delta) - (g - p.alpha) * (g - p.beta)
        return p.a * ab - p.q + p.a * c0 * (n + p.epsilon) / (n + g)
    return p.a * ab * p.gamma / (spec.gamma0 - n) - p.q


def expansion_defect(p: HeunParams, e: Expansion, tol: float = 1e-10) -> SeriesValue:
    """Constant ``K`` with ``z (z-1) (z-a) L[S] = K`` for the summed expansion ``S``.

    A truncated sum leaves the boundary term
    ``b_N = -R_{N+1} a_{N+1} F_N + P_N a_N F_{N+1}`` in the multiplied
    equation.  When the coefficients decay like ``n**-2`` this does not
    vanish but tends to a constant, so the sum solves an inhomogeneous
    equation.  ``K = 0`` exactly for a terminated expansion.

    With ``F_n -> 1`` the recurrence gives ``b_n - b_{n-1} = s_n a_n`` where
    ``s_n = R_n + Q_n + P_n`` stays bounded, and ``b_{-1} = 0`` since
    ``R_0 = 0``.  So ``K = sum_n s_n a_n``, summed and extrapolated like the
    expansion itself.  ``converged`` is True when the extrapolation error
    estimate is at most ``tol``.
    """
    if e.terminated:
        return SeriesValue(0.0, 0.0, e.truncation_index + 1, True)
    last = e.truncation_index
    model = _model(p, e.spec.direction, 0.0)
    n0 = last // 2**LEVELS
    n0 -= n0 % 2
    if model is None or n0 < 2:
        return SeriesValue(math.nan, math.inf, last + 1, False)
    n = np.arange(last + 1, dtype=float)
    terms = _defect_weights(p, e.spec, n) * e.coefficients[: last + 1]
    ns = [n0 * 2**j for j in range(LEVELS + 1)]
    partial = [_fsum(terms[: m + 1]) for m in ns]
    val, est = richardson([1.0 / m for m in ns], partial, model[1])
    est = float(max(est, _round_off(terms[: ns[-1] + 1])))
    return SeriesValue(val, est, ns[-1] + 1, est <= tol)


def build_expansion(p: HeunParams, choice: str = "ascending", z: float = 0.0,
                    max_terms: int = 1 << 17) -> Expansion | None:
    """Coefficients sized for summation at ``z``; None when divergent there.

    ``choice`` is 'ascending' or 'descending:<gamma|alpha|beta>'.  On the
    two-term slice the closed-form coefficients are used.
    """
    if choice == "ascending":
        spec = ascending_spec(p)
    elif choice.startswith("descending"):
        spec = descending_spec(p, choice.split(":", 1)[1])
    else:
        raise DomainError(f"unknown expansion {choice!r}")
    need = terms_needed(p, spec.direction, z, max_terms)
    if need is None:
        # still useful when the series terminates
        probe = generate_coefficients(p, spec, 8)
        return probe if probe.terminated else None
    if spec.regime is Regime.TWO_TERM:
        k = need // 2
        if spec.direction is Direction.ASCENDING:
            return two_term_coefficients(p, k)
        return two_term_descending_coefficients(p, spec.gamma0, k)
    return generate_coefficients(p, spec, need)


def evaluate(p: HeunParams, z: float, choice: str = "ascending",
             tol: float = 1e-10, deriv: int = 0) -> SeriesValue:
    """Value of the expansion solution at ``z`` (unnormalized: ``u(0) = sum a_n``)."""
    e = build_expansion(p, choice, z)
    if e is None:
        return SeriesValue(math.nan, math.inf, 0, False)
    return sum_expansion(p, e, z, tol, deriv)
