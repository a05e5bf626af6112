"""Terminating expansions: accessory-parameter roots and finite-sum solutions.

The ascending expansion stops at ``n = N`` when ``P_N = 0`` and
``a_{N+1} = 0``.  The first condition holds when one of ``epsilon``,
``epsilon + gamma - alpha`` or ``epsilon + gamma - beta`` equals ``-N``;
the second is a polynomial equation of degree ``N + 1`` in ``q``, the
determinant of the leading tridiagonal block of the recurrence.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

from .core import HeunParams
from .errors import DomainError, PoleError, RootFailure, TerminationFailure
from .expansions import (Direction, Expansion, ExpansionSpec, ascending_spec,
                         descending_spec, recurrence, sum_expansion)
from .hypergeom import POLE_TOL, nonpositive_int

INTEGER_TOL = 1e-9
MAX_SWEEPS = 500


class CaseKind(str, enum.Enum):
    EPS = "eps"
    ALPHA = "alpha"
    BETA = "beta"


@dataclass(frozen=True)
class TerminationCase:
    kind: CaseKind
    N: int


@dataclass(frozen=True)
class QRootSet:
    case: TerminationCase
    roots: tuple
    residuals: tuple
    poly: np.ndarray  # coefficients of D_N(q), lowest degree first

    @property
    def coefficient_scale(self) -> float:
        return float(np.max(np.abs(self.poly)))


@dataclass(frozen=True)
class FiniteSolution:
    params: HeunParams
    expansion: Expansion
    case: TerminationCase


def case_quantity(p: HeunParams, kind: CaseKind) -> float:
    """The parameter combination that must equal ``-N`` for ``kind``."""
    if kind is CaseKind.EPS:
        return p.epsilon
    if kind is CaseKind.ALPHA:
        return p.epsilon + p.gamma - p.alpha
    return p.epsilon + p.gamma - p.beta


def detect_termination_cases(p: HeunParams, tol: float = INTEGER_TOL) -> list[TerminationCase]:
    out = []
    for kind in CaseKind:
        m = nonpositive_int(case_quantity(p, kind), tol)
        if m is not None:
            out.append(TerminationCase(kind, m))
    return out


def check_case(p: HeunParams, case: TerminationCase, tol: float = INTEGER_TOL):
    if abs(case_quantity(p, case.kind) + case.N) > tol:
        raise DomainError(f"parameters do not satisfy the {case.kind.value} "
                          f"termination condition with N = {case.N}")


def _spec_for(p: HeunParams, direction: Direction) -> ExpansionSpec:
    if direction is Direction.ASCENDING:
        return ascending_spec(p)
    return descending_spec(p, "gamma")


def _blocks(p: HeunParams, N: int, direction: Direction):
    # recurrence coefficients at q = 0 for n = 0..N
    p0 = p.with_q(0.0)
    spec = _spec_for(p0, direction)
    return [recurrence(p0, spec, n) for n in range(N + 1)]


def determinant_poly(p: HeunParams, case: TerminationCase,
                     direction: Direction = Direction.ASCENDING) -> np.ndarray:
    """Coefficients (lowest degree first) of ``D_N(q)``.

    ``D_{-1} = 1``, ``D_0 = Q_0(q)``,
    ``D_n = Q_n(q) D_{n-1} - P_{n-1} R_n D_{n-2}`` with ``Q_n(q) = Q_n(0) - q``.
    """
    check_case(p, case)
    rc = _blocks(p, case.N, direction)
    d_prev = np.array([1.0])
    d = np.array([rc[0].Q, -1.0])
    for n in range(1, case.N + 1):
        lin = np.array([rc[n].Q, -1.0])
        d, d_prev = npoly.polysub(npoly.polymul(lin, d), rc[n - 1].P * rc[n].R * d_prev), d
    return np.asarray(d, dtype=float)


def q_determinant(p: HeunParams, case: TerminationCase, q,
                  direction: Direction = Direction.ASCENDING):
    """``D_N(q)`` evaluated directly from the recurrence (no polynomial arrays)."""
    check_case(p, case)
    rc = _blocks(p, case.N, direction)
    d_prev, d = 1.0, rc[0].Q - q
    for n in range(1, case.N + 1):
        d, d_prev = (rc[n].Q - q) * d - rc[n - 1].P * rc[n].R * d_prev, d
    return d


def _at_round_off(c, x) -> bool:
    # |p(x)| is within a few ulps of the evaluation error bound
    bound = npoly.polyval(abs(x), np.abs(c))
    return abs(npoly.polyval(x, c)) <= 16 * np.finfo(float).eps * bound


def durand_kerner(coeffs, max_sweeps: int = MAX_SWEEPS, tol: float = 1e-15) -> np.ndarray:
    """All roots of a polynomial by simultaneous Weierstrass iteration.

    Parameters
    ----------
    coeffs : array_like
        Coefficients, lowest degree first; the last must be non-zero.

    Raises
    ------
    RootFailure
        If the corrections have not settled after ``max_sweeps`` sweeps.
    """
    c = np.asarray(coeffs, dtype=complex)
    if c[-1] == 0:
        raise DomainError("leading coefficient is zero")
    c = c / c[-1]
    deg = len(c) - 1
    if deg == 0:
        return np.zeros(0, dtype=complex)
    if deg == 1:
        return np.array([-c[0]])
    # Cauchy bound for the starting circle
    radius = 1.0 + float(np.max(np.abs(c[:-1])))
    z = radius * (0.4 + 0.9j) ** np.arange(deg)
    for _ in range(max_sweeps):
        biggest = 0.0
        for i in range(deg):
            others = z[i] - np.delete(z, i)
            denom = np.prod(others)
            if denom == 0:
                z[i] += 1e-3 * radius * (1 + 1j)
                biggest = math.inf
                continue
            step = npoly.polyval(z[i], c) / denom
            z[i] -= step
            biggest = max(biggest, abs(step))
        if biggest <= tol * max(1.0, float(np.max(np.abs(z)))):
            return z
        if biggest < math.inf and all(_at_round_off(c, x) for x in z):
            return z
    raise RootFailure(f"Durand-Kerner did not converge in {max_sweeps} sweeps")


def _newton_deflation(coeffs) -> np.ndarray:
    # fallback: Newton from the origin, deflate, repeat
    c = np.asarray(coeffs, dtype=complex)
    roots = []
    while len(c) > 1:
        x = 0.3 + 0.7j
        dc = npoly.polyder(c)
        for _ in range(MAX_SWEEPS):
            fx, dfx = npoly.polyval(x, c), npoly.polyval(x, dc)
            if dfx == 0:
                x += 0.1
                continue
            step = fx / dfx
            x -= step
            if abs(step) <= 1e-15 * max(1.0, abs(x)) or _at_round_off(c, x):
                break
        else:
            raise RootFailure("Newton deflation did not converge")
        roots.append(x)
        c, _ = npoly.polydiv(c, np.array([-x, 1.0]))
    return np.array(roots)


def _polish(coeffs, roots):
    c = np.asarray(coeffs, dtype=complex)
    dc = npoly.polyder(c)
    out = []
    for r in roots:
        d = npoly.polyval(r, dc)
        out.append(r - npoly.polyval(r, c) / d if d != 0 else r)
    return np.array(out)


def _determinant_and_slope(rc, q):
    # D_N(q) and dD_N/dq straight from the tridiagonal recurrence
    d_prev, d = 1.0, rc[0].Q - q
    s_prev, s = 0.0, -1.0
    for n in range(1, len(rc)):
        k = rc[n - 1].P * rc[n].R
        d, d_prev, s, s_prev = ((rc[n].Q - q) * d - k * d_prev, d,
                                -d + (rc[n].Q - q) * s - k * s_prev, s)
    return d, s


def _refine(rc, roots, steps: int = 4):
    # Newton on the recurrence avoids the cancellation in the expanded
    # coefficients; a step is kept only while |D| keeps falling
    out = []
    for r in roots:
        d, s = _determinant_and_slope(rc, r)
        for _ in range(steps):
            if s == 0 or d == 0:
                break
            trial = r - d / s
            dt, st = _determinant_and_slope(rc, trial)
            if not abs(dt) < abs(d):
                break
            r, d, s = trial, dt, st
        out.append(r)
    return np.array(out)


def _pair_conjugates(roots, scale):
    # real polynomial: snap near-real roots, make complex roots exact pairs
    roots = list(roots)
    real = [r.real for r in roots if abs(r.imag) <= 1e-10 * scale]
    cplx = sorted((r for r in roots if abs(r.imag) > 1e-10 * scale and r.imag > 0),
                  key=lambda r: (r.real, r.imag))
    out = [complex(r, 0.0) for r in sorted(real)]
    for r in cplx:
        out += [complex(r), complex(r).conjugate()]
    if len(out) != len(roots):
        # unpaired complex roots: keep them as found
        return sorted(roots, key=lambda r: (r.real, r.imag))
    return out


def q_roots(p: HeunParams, case: TerminationCase,
            direction: Direction = Direction.ASCENDING) -> QRootSet:
    """All ``N + 1`` values of ``q`` for which the expansion terminates at ``N``."""
    poly = determinant_poly(p, case, direction)
    try:
        roots = durand_kerner(poly)
    except RootFailure:
        roots = _newton_deflation(poly)
    roots = _polish(poly, roots)
    roots = _refine(_blocks(p, case.N, direction), roots)
    scale = max(1.0, float(np.max(np.abs(roots)))) if len(roots) else 1.0
    roots = _pair_conjugates(roots, scale)
    res = tuple(float(abs(npoly.polyval(r, poly))) for r in roots)
    return QRootSet(case, tuple(roots), res, poly)


def _as_q(r: complex, tol: float = 1e-12):
    return r.real if abs(r.imag) <= tol * max(1.0, abs(r)) else complex(r)


def build_finite_solution(p: HeunParams, case: TerminationCase, root_index: int,
                          direction: Direction = Direction.ASCENDING,
                          roots: QRootSet | None = None) -> FiniteSolution:
    """Set ``q`` to the chosen root and return the terminated expansion.

    Raises
    ------
    TerminationFailure
        If ``a_{N+1}`` exceeds both ``1e-8`` times the largest retained
        coefficient and the round-off level implied by ``d a_{N+1} / dq``.
    """
    rs = roots if roots is not None else q_roots(p, case, direction)
    pq = p.with_q(_as_q(rs.roots[root_index]))
    spec = _spec_for(pq, direction)
    N = case.N
    dtype = complex if isinstance(pq.q, complex) else float
    c = np.zeros(N + 3, dtype=dtype)
    dc = np.zeros(N + 3, dtype=dtype)  # d a_n / d q
    c[0] = 1.0
    rc = [recurrence(pq, spec, n) for n in range(N + 2)]
    for n in range(1, N + 2):
        num = rc[n - 1].Q * c[n - 1] + (rc[n - 2].P * c[n - 2] if n >= 2 else 0.0)
        dnum = rc[n - 1].Q * dc[n - 1] - c[n - 1] + (rc[n - 2].P * dc[n - 2] if n >= 2 else 0.0)
        if abs(rc[n].R) < POLE_TOL:
            if abs(num) > 1e-8 * np.max(np.abs(c[:n])):
                raise PoleError(f"R_{n} = 0 before the termination index")
            c[n] = dc[n] = 0.0
        else:
            c[n] = -num / rc[n].R
            dc[n] = -dnum / rc[n].R
    peak = float(np.max(np.abs(c[: N + 1])))
    # a q within round-off of the true root leaves |da/dq| * eps * |q|-sized debris
    q_scale = max(abs(pq.q), max(abs(r.Q) for r in rc[: N + 1]))
    floor = 64 * np.finfo(float).eps * q_scale * abs(dc[N + 1])
    if abs(c[N + 1]) > max(1e-8 * peak, floor):
        raise TerminationFailure(f"a_{N + 1} = {c[N + 1]!r} does not vanish")
    # a_{N+2} = -(Q_{N+1} a_{N+1} + P_N a_N) / R_{N+2} with P_N = 0
    c[N + 1] = c[N + 2] = 0.0
    return FiniteSolution(pq, Expansion(spec, c, N, True), case)


def quasi_polynomial_form(sol: FiniteSolution) -> tuple[float, np.ndarray]:
    """Write an alpha/beta-case solution as ``(1-z)**(1-delta) * Poly(z)``.

    Each basis function ``2F1(alpha, beta; alpha + k; z)`` with
    ``k = n - N <= 0`` equals ``(1-z)**(k-beta) 2F1(k, alpha-beta+k; alpha+k; z)``,
    the last factor being a polynomial of degree ``-k``.

    Returns
    -------
    (exponent, poly)
        ``poly`` lists the coefficients of ``Poly``, lowest degree first.
    """
    p, case = sol.params, sol.case
    if case.kind is CaseKind.EPS:
        raise DomainError("epsilon-case finite sums are not quasi-polynomials in general")
    if sol.expansion.spec.direction is not Direction.ASCENDING:
        raise DomainError("quasi-polynomial form is built from the ascending expansion")
    al, be = (p.alpha, p.beta) if case.kind is CaseKind.ALPHA else (p.beta, p.alpha)
    N = case.N
    coeffs = sol.expansion.coefficients
    total = np.zeros(N + 1, dtype=coeffs.dtype)
    one_minus_z = np.array([1.0, -1.0])
    for n in range(N + 1):
        if coeffs[n] == 0:
            continue
        k = n - N
        # terminating 2F1(k, al-be+k; al+k; z) as a polynomial
        term = np.zeros(-k + 1)
        t = 1.0
        for j in range(-k + 1):
            term[j] = t
            den = (al + k + j) * (j + 1)
            if abs(al + k + j) < POLE_TOL and j < -k:
                raise PoleError("lower parameter vanishes inside the polynomial")
            t *= (k + j) * (al - be + k + j) / den if j < -k else 0.0
        piece = npoly.polymul(term, npoly.polypow(one_minus_z, n))
        total[: len(piece)] += coeffs[n] * piece
    return 1.0 - p.delta, total


def eval_quasi_polynomial(exponent: float, poly, z):
    return (1.0 - z) ** exponent * npoly.polyval(z, poly)


def _roots_match(r1, r2, tol) -> bool:
    left = list(r2)
    for r in r1:
        if not left:
            return False
        j = int(np.argmin([abs(r - s) for s in left]))
        if abs(r - left[j]) > tol * max(1.0, abs(r)):
            return False
        left.pop(j)
    return not left


def mirror_equivalence_check(p: HeunParams, case: TerminationCase,
                             tol: float = 1e-9, z_star: float = 0.2,
                             zs=(0.1, 0.3, 0.5)) -> bool:
    """Ascending and descending (``gamma0 = gamma``) finite sums coincide.

    Compares the root multisets of the two determinants and, root by root,
    the two finite solutions normalized to 1 at ``z_star``.
    """
    if case.kind is not CaseKind.EPS:
        raise DomainError("mirror check is defined for the epsilon case")
    asc = q_roots(p, case, Direction.ASCENDING)
    desc = q_roots(p, case, Direction.DESCENDING)
    if not _roots_match(asc.roots, desc.roots, tol):
        return False
    for i, r in enumerate(asc.roots):
        j = int(np.argmin([abs(r - s) for s in desc.roots]))
        s1 = build_finite_solution(p, case, i, Direction.ASCENDING, asc)
        s2 = build_finite_solution(p, case, j, Direction.DESCENDING, desc)
        # share q so the two evaluate the same equation
        s2 = FiniteSolution(s1.params, s2.expansion, case)
        n1 = sum_expansion(s1.params, s1.expansion, z_star).value
        n2 = sum_expansion(s2.params, s2.expansion, z_star).value
        if n1 == 0 or n2 == 0:
            return False
        for z in zs:
            u1 = sum_expansion(s1.params, s1.expansion, z).value / n1
            u2 = sum_expansion(s2.params, s2.expansion, z).value / n2
            if abs(u1 - u2) > tol * max(1.0, abs(u1)):
                return False
    return True


def eps_case_n1_coefficient(p: HeunParams) -> float:
    """Coefficient of ``2F1(alpha, beta; gamma; z)`` in the two-term epsilon = -1 solution."""
    return (p.q - p.a * p.alpha * p.beta + p.a * (1.0 - p.delta)) / ((1.0 - p.a) * (p.gamma - 1.0))


def eps_case_n1_quadratic(p: HeunParams, q):
    a, al, be, g, d = p.a, p.alpha, p.beta, p.gamma, p.delta
    return ((q - a * al * be + a * (1 - d)) * (q - a * al * be + (a - 1) * (1 - g))
            - a * (1 - a) * (1 + al - g) * (1 + be - g))


def alpha_case_n1_quadratic(p: HeunParams, q):
    a, al, g, d = p.a, p.alpha, p.gamma, p.delta
    return (q * q + (al - 1 - a * (d - 2 + g * (2 * d - 3))) * q
            - a * g * (d - 2) * (al - a * (1 + g) * (d - 1)))


def alpha_case_n1_solution(p: HeunParams, z):
    """Closed quasi-polynomial for the alpha case with ``N = 1``."""
    a, al, be, e, d = p.a, p.alpha, p.beta, p.epsilon, p.delta
    inner = (1 - (al + 1 - d) / (al - 1) * z
             + (p.q - a * (al * be + e - d * e)) / ((1 - a) * (al - 1)) * (1 - z))
    return (1 - z) ** (1 - d) * inner
