"""Closed-form boundary data of the two-term expansions, and the ``a``-orbit.

On the slice ``a = 1/2``, ``gamma + delta = 2``,
``q = a alpha beta + a (1 - delta) epsilon`` the expansion coefficients are
Pochhammer ratios, so ``u(0)``, ``u'(0)`` and ``u(1)`` of the summed
expansions reduce to generalized hypergeometric series at unit argument.

Note that these are values of the summed expansion.  A non-terminating
expansion solves the Heun equation only up to a constant defect (see
:func:`heunhyp.expansions.expansion_defect`).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .core import HeunParams
from .errors import ConsistencyError, DomainError, PoleError
from .expansions import descending_spec, two_term_failures
from .hypergeom import gamma_ratio, hyp2f1, hyper_3f2_unit, hyper_4f3_unit, nonpositive_int

AGREEMENT_TOL = 1e-8


class Method(str, enum.Enum):
    ASCENDING = "ascending-closed-form"
    DESCENDING = "descending-closed-form"
    REDUCED = "descending-reduced"
    EXACT_ZERO = "exact-zero"
    UNAVAILABLE = "unavailable"


@dataclass(frozen=True)
class BoundaryValues:
    """``u(0)``, ``u'(0)`` and ``u(1)``; ``u_at_1`` is None when unavailable."""

    u_at_0: float
    du_at_0: float
    u_at_1: float | None
    method_tags: dict = field(default_factory=dict)


def _require_two_term(p: HeunParams):
    fails = two_term_failures(p)
    if fails:
        raise DomainError("not in the two-term regime: " + ", ".join(fails))


def value_at_origin(p: HeunParams, tol: float = 1e-12) -> float:
    """``u(0)`` of the ascending two-term expansion (a Clausen series, excess 1)."""
    _require_two_term(p)
    g = p.gamma + p.epsilon
    if nonpositive_int(g) is not None:
        raise PoleError("gamma + epsilon is zero or a negative integer")
    upper = ((g - p.alpha) / 2, (g - p.beta) / 2, p.epsilon / 2)
    return hyper_3f2_unit(upper, (g / 2, (1 + g) / 2), tol).value


def derivative_at_origin(p: HeunParams, tol: float = 1e-12) -> float:
    """``u'(0)`` of the ascending two-term expansion (excess 2)."""
    _require_two_term(p)
    g = p.gamma + p.epsilon
    if nonpositive_int(g) is not None:
        raise PoleError("gamma + epsilon is zero or a negative integer")
    ab = p.alpha * p.beta
    if ab == 0:
        return 0.0
    upper = ((g - p.alpha) / 2, (g - p.beta) / 2, p.epsilon / 2)
    return ab / g * hyper_3f2_unit(upper, ((1 + g) / 2, (2 + g) / 2), tol).value


def value_at_one(p: HeunParams, tol: float = 1e-12) -> float | None:
    """``u(1)`` of the ascending two-term expansion, or None on a gamma pole.

    The gamma prefactor equals ``2F1(alpha, beta; gamma + epsilon; 1)`` by
    Gauss summation when ``gamma > 1``; that identity is checked.
    """
    _require_two_term(p)
    g = p.gamma + p.epsilon
    try:
        pref = gamma_ratio((g, p.gamma - 1), (g - p.alpha, p.gamma - 1 + p.alpha))
    except PoleError:
        return None
    if p.gamma > 1:
        gauss = hyp2f1(p.alpha, p.beta, g, 1.0).value
        if abs(gauss - pref) > AGREEMENT_TOL * max(1.0, abs(pref)):
            raise ConsistencyError(f"gamma prefactor {pref!r} != Gauss sum {gauss!r}")
    if pref == 0:
        return 0.0
    upper = ((p.gamma - 1) / 2, p.gamma / 2, p.epsilon / 2)
    lower = ((p.gamma + p.alpha) / 2, (p.gamma + p.beta) / 2)
    return pref * hyper_3f2_unit(upper, lower, tol).value


def ascending_boundary_values(p: HeunParams, tol: float = 1e-12) -> BoundaryValues:
    u1 = value_at_one(p, tol)
    tags = {"u_at_0": Method.ASCENDING, "du_at_0": Method.ASCENDING,
            "u_at_1": Method.ASCENDING if u1 is not None else Method.UNAVAILABLE}
    return BoundaryValues(value_at_origin(p, tol), derivative_at_origin(p, tol), u1, tags)


def _reduced_value_at_one(p: HeunParams, tol: float) -> float:
    # gamma0 = gamma with gamma - alpha - beta > 1
    g, al, be = p.gamma, p.alpha, p.beta
    gauss = hyp2f1(al, be, g, 1.0).value
    upper = ((1 + al - g) / 2, (1 + be - g) / 2, p.epsilon / 2)
    lower = ((1 + al + be - g) / 2, (2 + al + be - g) / 2)
    return gauss * hyper_3f2_unit(upper, lower, tol).value


def descending_boundary_values(p: HeunParams, gamma0, tol: float = 1e-12) -> BoundaryValues:
    """Boundary data of the descending two-term expansion with ``gamma0``.

    ``gamma0`` is a number equal to one of gamma, alpha, beta, or one of
    those names.  ``u(1)`` is exactly zero for ``gamma0`` in
    ``{alpha, beta}``.  For ``gamma0 = gamma`` with ``gamma - alpha - beta > 1``
    the reduced form is evaluated as well and must agree.
    """
    _require_two_term(p)
    g0 = descending_spec(p, gamma0).gamma0
    g, al, be, e = p.gamma, p.alpha, p.beta, p.epsilon
    lower = (1 + (g - g0) / 2, 1 + (al - g0) / 2, 1 + (be - g0) / 2)
    u0 = hyper_4f3_unit((1.0, (1 - g0) / 2, (2 - g0) / 2, (g + e - g0) / 2), lower, tol).value
    if abs(g0) < 1e-14:
        raise PoleError("gamma0 = 0: derivative prefactor alpha*beta/gamma0 is infinite")
    du0 = al * be / g0 * hyper_4f3_unit(
        (1.0, (1 - g0) / 2, -g0 / 2, (g + e - g0) / 2), lower, tol).value
    tags = {"u_at_0": Method.DESCENDING, "du_at_0": Method.DESCENDING}
    at_alpha_or_beta = abs(g0 - al) <= 1e-12 or abs(g0 - be) <= 1e-12
    if at_alpha_or_beta and abs(g0 - g) > 1e-12:
        tags["u_at_1"] = Method.EXACT_ZERO
        return BoundaryValues(u0, du0, 0.0, tags)
    try:
        pref = gamma_ratio((g0, g0 - al - be), (g0 - al, g0 - be))
    except PoleError:
        tags["u_at_1"] = Method.UNAVAILABLE
        return BoundaryValues(u0, du0, None, tags)
    if pref == 0:
        u1 = 0.0
        tags["u_at_1"] = Method.EXACT_ZERO
    else:
        F = hyper_4f3_unit(
            (1.0, (1 + al - g0) / 2, (1 + be - g0) / 2, (g + e - g0) / 2),
            ((1 + al + be - g0) / 2, (2 + al + be - g0) / 2, 1 + (g - g0) / 2), tol).value
        u1 = pref * F
        tags["u_at_1"] = Method.DESCENDING
    if abs(g0 - g) <= 1e-12 and g - al - be > 1:
        reduced = _reduced_value_at_one(p, tol)
        if abs(reduced - u1) > AGREEMENT_TOL * max(1.0, abs(u1)):
            raise ConsistencyError(f"reduced u(1) {reduced!r} != {u1!r}")
        tags["u_at_1_reduced"] = Method.REDUCED
    return BoundaryValues(u0, du0, u1, tags)


def a_orbit(a1: float) -> tuple[float, ...]:
    """The six positions of the fourth singular point under Moebius relocations.

    Returns the distinct values, sorted.
    """
    if a1 == 0 or a1 == 1:
        raise DomainError("a1 must differ from 0 and 1")
    vals = (a1, 1 / a1, 1 - a1, 1 / (1 - a1), a1 / (a1 - 1), (a1 - 1) / a1)
    out: list[float] = []
    for v in sorted(vals):
        if not out or not math.isclose(v, out[-1], rel_tol=1e-12, abs_tol=1e-15):
            out.append(v)
    return tuple(out)
