"""General Heun equation: parameters, residual, and two reference oracles.

The equation is

    u'' + (gamma/z + delta/(z-1) + epsilon/(z-a)) u'
        + (alpha*beta*z - q) / (z (z-1) (z-a)) u = 0

with ``delta`` fixed by the Fuchsian relation
``1 + alpha + beta = gamma + delta + epsilon``.  The oracles are the
exponent-0 Frobenius series at the origin and adaptive Runge-Kutta
integration; neither uses hypergeometric functions.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from ._accel import merge_exponents, richardson
from .errors import DomainError, PoleError, StepFailure
from .hypergeom import nonpositive_int

SINGULAR_MARGIN = 1e-8


@dataclass(frozen=True)
class HeunParams:
    """The free Heun parameters; ``delta`` is derived, never stored.

    ``q`` may be complex when it comes from a complex root of the
    termination polynomial.
    """

    a: float
    q: complex | float
    alpha: float
    beta: float
    gamma: float
    epsilon: float

    def __post_init__(self):
        if self.a == 0 or self.a == 1:
            raise DomainError("singular point a must differ from 0 and 1")

    @property
    def delta(self) -> float:
        return 1.0 + self.alpha + self.beta - self.gamma - self.epsilon

    def with_q(self, q) -> "HeunParams":
        return replace(self, q=q)

    def as_dict(self) -> dict:
        q = self.q
        if isinstance(q, complex):
            q = q.real if q.imag == 0 else [q.real, q.imag]
        return {"a": self.a, "q": q, "alpha": self.alpha, "beta": self.beta,
                "gamma": self.gamma, "delta": self.delta, "epsilon": self.epsilon}


def make_params(a, q, alpha, beta, gamma, epsilon) -> HeunParams:
    return HeunParams(a, q, alpha, beta, gamma, epsilon)


def _check_regular(p: HeunParams, z):
    for s in (0.0, 1.0, p.a):
        if abs(z - s) < SINGULAR_MARGIN:
            raise DomainError(f"z = {z!r} is a singular point of the equation")


def heun_residual(p: HeunParams, u, u1, u2, z):
    """Left-hand side of the Heun equation for sampled ``(u, u', u'')``."""
    _check_regular(p, z)
    a = p.a
    return (u2 + (p.gamma / z + p.delta / (z - 1.0) + p.epsilon / (z - a)) * u1
            + (p.alpha * p.beta * z - p.q) / (z * (z - 1.0) * (z - a)) * u)


# --------------------------------------------------------------------------
# Frobenius series at z = 0


@dataclass(frozen=True)
class LocalSeries:
    coefficients: np.ndarray
    radius_hint: float


class LocalValue(NamedTuple):
    value: complex | float
    derivative: complex | float
    second_derivative: complex | float
    tail: float


def frobenius_series(p: HeunParams, order: int = 60) -> LocalSeries:
    """Exponent-0 local solution at the origin, normalized to ``c0 = 1``.

    Multiplying the equation by ``z (z-1) (z-a)`` and collecting ``z**k``:

        a (k+1)(k+gamma) c[k+1] = [k((k-1+gamma)(1+a) + a delta + eps) + q] c[k]
                                  - (k-1+alpha)(k-1+beta) c[k-1]
    """
    if order < 2:
        raise DomainError("order must be at least 2")
    if nonpositive_int(p.gamma) is not None:
        raise PoleError("gamma is a non-positive integer: no exponent-0 solution")
    a, g, d, e = p.a, p.gamma, p.delta, p.epsilon
    dtype = complex if isinstance(p.q, complex) else float
    c = np.zeros(order + 1, dtype=dtype)
    c[0] = 1.0
    prev = 0.0
    for k in range(order):
        mid = (k * ((k - 1 + g) * (1 + a) + a * d + e) + p.q) * c[k]
        low = (k - 1 + p.alpha) * (k - 1 + p.beta) * prev
        c[k + 1] = (mid - low) / (a * (k + 1) * (k + g))
        prev = c[k]
    return LocalSeries(c, min(1.0, abs(a)))


def eval_local(series: LocalSeries, z: float, cutoff: float = 1e-16) -> LocalValue:
    """Sum the local series and its first two derivatives at ``z``.

    Summation stops once two consecutive terms ``|c_k z**k|`` fall below
    ``cutoff``; ``tail`` is the magnitude of the last term included.
    """
    if abs(z) >= series.radius_hint:
        raise DomainError(f"|z| = {abs(z)} outside the radius {series.radius_hint}")
    c = series.coefficients
    u = du = d2u = 0.0
    pw = [1.0, 0.0, 0.0]  # z**k, z**(k-1), z**(k-2)
    small = 0
    tail = abs(c[0])
    for k in range(len(c)):
        term = c[k] * pw[0]
        u += term
        du += k * c[k] * pw[1]
        d2u += k * (k - 1) * c[k] * pw[2]
        tail = abs(term)
        small = small + 1 if tail < cutoff else 0
        if small >= 2:
            break
        pw = [pw[0] * z, pw[0], pw[1]]
    return LocalValue(u, du, d2u, tail)


# --------------------------------------------------------------------------
# ODE integration


def _rhs(p: HeunParams, forcing=0.0):
    # forcing K solves z (z-1) (z-a) L[u] = K instead of L[u] = 0
    a, g, d, e = p.a, p.gamma, p.delta, p.epsilon
    ab, q = p.alpha * p.beta, p.q

    def f(z, y):
        u, v = y
        w = z * (z - 1.0) * (z - a)
        dv = -(g / z + d / (z - 1.0) + e / (z - a)) * v - ((ab * z - q) * u - forcing) / w
        return np.array([v, dv])

    return f


def integrate_ode(p: HeunParams, z0: float, u0: float, u0p: float, z1: float,
                  tol: float = 1e-12, forcing=0.0) -> tuple[float, float]:
    """Integrate the Heun equation along the real segment ``[z0, z1]``.

    Uses an adaptive embedded 8(5,3) Runge-Kutta pair with ``rtol = atol =
    tol``.  The segment must stay ``1e-8`` away from 0, 1 and ``a``.
    A non-zero ``forcing`` integrates ``z (z-1) (z-a) L[u] = forcing``.
    """
    lo, hi = min(z0, z1), max(z0, z1)
    for s in (0.0, 1.0, p.a):
        if lo - SINGULAR_MARGIN <= s <= hi + SINGULAR_MARGIN:
            raise DomainError(f"segment [{lo}, {hi}] touches the singular point {s}")
    if z0 == z1:
        return u0, u0p
    f = _rhs(p, forcing)
    y0 = np.array([u0, u0p], dtype=complex if isinstance(p.q, complex) else float)
    sol = solve_ivp(f, (z0, z1), y0, method="DOP853", rtol=tol, atol=tol,
                    first_step=1e-3 * abs(z1 - z0))
    if sol.status != 0:
        raise StepFailure(sol.message)
    return sol.y[0, -1], sol.y[1, -1]


def integrate_path(p: HeunParams, nodes: Sequence[complex], u0, u0p,
                   tol: float = 1e-12, forcing=0.0) -> tuple[complex, complex]:
    """Integrate along a polyline of (possibly complex) nodes.

    Used to step around a singular point when the solution being followed is
    analytic there.  Returns complex ``(u, u')`` at the last node.
    """
    f = _rhs(p, forcing)
    y = np.array([u0, u0p], dtype=complex)
    for A, B in zip(nodes[:-1], nodes[1:]):
        A, B = complex(A), complex(B)
        dz = B - A

        def g(t, yy, A=A, dz=dz):
            return dz * f(A + t * dz, yy)

        sol = solve_ivp(g, (0.0, 1.0), y, method="DOP853", rtol=tol, atol=tol,
                        first_step=1e-3)
        if sol.status != 0:
            raise StepFailure(sol.message)
        y = sol.y[:, -1]
    return y[0], y[1]


def local_start(p: HeunParams, z0: float, order: int = 60) -> tuple[float, float]:
    """Value and slope of the normalized exponent-0 solution at small ``z0``."""
    lv = eval_local(frobenius_series(p, order), z0)
    return lv.value, lv.derivative


def _path_to(p: HeunParams, z0: float, z1: float) -> list[complex]:
    # straight segment unless a lies in between; then a box detour through
    # the upper half plane of half-width min(0.25, distances)
    a = p.a
    if not (min(z0, z1) < a < max(z0, z1)):
        return [z0, z1]
    w = min(0.25, abs(a - z0) / 2, abs(z1 - a) / 2, abs(1 - a) / 2 if a < 1 else 0.25)
    return [z0, a - w, a - w + 1j * w, a + w + 1j * w, a + w, z1]


def value_near_one(p: HeunParams, z0: float, u0, u0p,
                   hs: Sequence[float] = (1.6e-3, 8e-4, 4e-4, 2e-4, 1e-4),
                   tol: float = 1e-12, forcing=0.0) -> tuple[float, float]:
    """Extrapolate ``u(1)`` from integrations to ``1 - h``.

    Near ``z = 1`` a solution behaves as ``A (1 + O(h)) + B h**(1-delta) (1 + O(h))``,
    so the samples are extrapolated with exponents ``1-delta, 1, 2-delta, 2, ...``.
    Needs ``delta < 1`` for a finite limit.  Returns ``(value, error_estimate)``.
    """
    d = p.delta
    if not d < 1.0:
        raise DomainError("u(1) is finite only for delta < 1")
    if not 0.0 < z0 < 1.0 - max(hs):
        raise DomainError("z0 must lie in (0, 1 - max(h))")
    hs = sorted(hs, reverse=True)
    samples = []
    z, u, du = complex(z0), complex(u0), complex(u0p)
    first = True
    for h in hs:
        target = 1.0 - h
        nodes = _path_to(p, z.real, target) if first else [z, target]
        u, du = integrate_path(p, nodes, u, du, tol, forcing)
        z = complex(target)
        first = False
        samples.append(u)
    e = 1.0 - d
    exps = merge_exponents([e + j for j in range(len(hs))], [j + 1.0 for j in range(len(hs))])
    val, err = richardson(hs, samples, exps)
    if abs(val.imag) <= 1e3 * tol * max(1.0, abs(val)):
        val = val.real
    return val, err
