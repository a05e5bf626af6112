"""Randomized self-check suites behind ``heunhyp verify``.

Each suite draws its instances from ``numpy.random.default_rng(seed)`` and
reports the number of passing and failing instances together with the
worst observed residual.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import eval_local, frobenius_series, integrate_ode, local_start, make_params
from .errors import HeunError
from .expansions import (build_expansion, expansion_defect, generate_coefficients,
                         ascending_spec, sum_expansion, two_term_coefficients)
from .hypergeom import (HyperParams2F1, gamma_ratio, gauss_2f1_derivative,
                        hyp2f1, hyper_pfq_unit)
from .termination import CaseKind, TerminationCase, mirror_equivalence_check


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: int
    failed: int
    worst: float
    threshold: float

    @property
    def ok(self) -> bool:
        return self.failed == 0


def _rel(x, ref):
    return abs(x - ref) / max(1.0, abs(ref))


def contiguous_residuals(rng, n):
    """Worst of the two derivative/contiguous identities per random instance."""
    out = []
    for _ in range(n):
        a, b = rng.uniform(-2.0, 3.0, 2)
        c = rng.uniform(1.5, 6.0)
        z = rng.uniform(0.0, 0.8)
        f = lambda cc: hyp2f1(a, b, cc, z).value
        df = gauss_2f1_derivative(HyperParams2F1(a, b, c, z)).value
        s = a + b
        r1 = z * df - (c - 1) * (f(c - 1) - f(c))
        r2 = (z - 1) * df + (s - c) * f(c) - (s - c - a * b / c) * f(c + 1)
        scale = max(1.0, abs(f(c)), abs(df))
        out.append(max(abs(r1), abs(r2)) / scale)
    return out


def euler_residuals(rng, n):
    out = []
    for _ in range(n):
        al, be = rng.uniform(0.2, 3.0, 2)
        k = int(rng.integers(1, 6))
        z = rng.uniform(0.0, 0.9)
        lhs = hyp2f1(al, be, al + k, z).value
        rhs = (1 - z) ** (k - be) * hyp2f1(k, al - be + k, al + k, z).value
        out.append(_rel(lhs, rhs))
    return out


def gauss_errors(rng, n):
    """Gamma closed form against the extrapolated unit-argument series."""
    out = []
    for _ in range(n):
        a, b = rng.uniform(-1.5, 2.5, 2)
        c = a + b + rng.uniform(0.5, 3.0)
        if min(c, c - a, c - b) <= 0.05:
            c += 1.0
        closed = gamma_ratio((c, c - a - b), (c - a, c - b))
        series = hyper_pfq_unit((a, b), (c,)).value
        out.append(abs(series - closed) / max(abs(closed), 1e-300))
    return out


def _random_params(rng, a):
    al, be, ga, ep = rng.uniform(0.3, 2.5, 4)
    return make_params(a, float(rng.uniform(-2.0, 2.0)), al, be, ga, ep)


def solution_combination(p, z, choices, tol=1e-12):
    """Value at ``z`` of ``K2 S1 - K1 S2`` normalized to 1 at the origin.

    Two expansions with constant defects ``K1``, ``K2`` combine into an
    exact Heun solution analytic at 0.
    """
    e1, e2 = (build_expansion(p, c, z) for c in choices)
    if e1 is None or e2 is None:
        raise HeunError("expansion does not converge at z")
    k1 = expansion_defect(p, e1).value
    k2 = expansion_defect(p, e2).value

    def w(x):
        return k2 * sum_expansion(p, e1, x, tol).value - k1 * sum_expansion(p, e2, x, tol).value

    return w(z) / w(0.0)


def oracle_errors(rng, n):
    """Frobenius vs ODE vs the defect-free combination of two expansions."""
    out = []
    for _ in range(n):
        a = float(rng.choice((2.0, 3.0, 0.75, 1.5)))
        p = _random_params(rng, a)
        z = 0.1 * min(1.0, abs(a))
        frob = eval_local(frobenius_series(p, 120), z).value
        z0 = 1e-3
        u0, du0 = local_start(p, z0)
        ode, _ = integrate_ode(p, z0, u0, du0, z)
        comb = solution_combination(p, z, ("descending:gamma", "descending:alpha"))
        out.append(max(_rel(frob, ode), _rel(comb, frob), _rel(comb, ode)))
    return out


def two_term_errors(rng, n, kmax=20):
    out = []
    for _ in range(n):
        al = rng.uniform(0.3, 2.0)
        ga = rng.uniform(0.3, 1.9)
        ep = rng.uniform(0.2, 2.0)
        p = two_term_params(al, ga, ep)
        closed = two_term_coefficients(p, kmax).coefficients
        gen = generate_coefficients(p, ascending_spec(p), 2 * kmax).coefficients
        odd_bad = np.any(gen[1::2] != 0)
        rel = np.max(np.abs(gen[::2] - closed[::2]) / np.abs(closed[::2]))
        out.append(math.inf if odd_bad else float(rel))
    return out


def two_term_params(alpha, gamma, epsilon):
    """Two-term slice point: ``a = 1/2``, ``delta = 2 - gamma`` and the matching ``q``."""
    beta = 1.0 + epsilon - alpha
    delta = 2.0 - gamma
    q = 0.5 * alpha * beta + 0.5 * (1.0 - delta) * epsilon
    return make_params(0.5, q, alpha, beta, gamma, epsilon)


def mirror_failures(rng, n):
    out = []
    for _ in range(n):
        N = int(rng.integers(1, 3))
        al, be, ga = rng.uniform(0.5, 1.5, 3)
        p = make_params(float(rng.choice([2.0, -1.0, 3.0])), 0.0, al, be, ga, -float(N))
        ok = mirror_equivalence_check(p, TerminationCase(CaseKind.EPS, N))
        out.append(0.0 if ok else math.inf)
    return out


SUITES: dict[str, tuple[Callable, int, float]] = {
    "contiguous": (contiguous_residuals, 200, 1e-10),
    "euler": (euler_residuals, 100, 1e-12),
    "gauss": (gauss_errors, 50, 1e-8),
    "oracle": (oracle_errors, 40, 1e-8),
    "two-term": (two_term_errors, 20, 1e-12),
    "mirror": (mirror_failures, 10, 1e-9),
}


def run_suite(name: str, seed: int = 0, tol: float | None = None,
              count: int | None = None) -> SuiteResult:
    """Run one suite; ``tol`` replaces the suite's own threshold when given."""
    fn, n, thr = SUITES[name]
    thr = thr if tol is None else tol
    rng = np.random.default_rng([seed, list(SUITES).index(name)])
    errs = []
    for _ in range(count or n):
        try:
            errs.extend(fn(rng, 1))
        except HeunError:
            errs.append(math.inf)
    bad = sum(1 for e in errs if not e <= thr)
    return SuiteResult(name, len(errs) - bad, bad, max(errs), thr)


def run_all(seed: int = 0, tol: float | None = None) -> list[SuiteResult]:
    return [run_suite(name, seed, tol) for name in SUITES]
