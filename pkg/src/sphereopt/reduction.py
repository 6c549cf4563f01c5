"""Reductions to the even homogeneous case.

On the unit sphere, any polynomial whose monomial degrees all share one
parity equals a single homogeneous polynomial: pad each term with powers
of x_1^2 + ... + x_n^2, which is identically one there.  Terms of mixed
parity cannot be combined this way (the sphere has antipodal symmetry
only degree-parity-wise), so such input is rejected.

Odd-degree problems reduce to even ones in one extra variable: for T
homogeneous of odd degree 2a - 1 on S^{n-1}, the lift

    T'(x_0, x) = x_0 T(x)    on S^n

has even degree 2a, and maximizing the radial profile x_0 (1 - x_0^2)^a
shows

    max T' = gamma(a) max |T| = gamma(a) max T,
    gamma(a) = (2a - 1)^(a - 1/2) / (2a)^a,

where max |T| = max T because odd polynomials take opposite values at
antipodes.  Bounds computed for the lifted problem therefore pull back
exactly by dividing by gamma(a).
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

from .multiindex import MultiIndex
from .polymat import HomoPoly, homo_poly, multiply_r2


def gamma_factor(a):
    """max of x_0 r^(2a-1) on the circle x_0^2 + r^2 = 1; in (0, 1/2]."""
    if a < 1:
        raise ValueError("need a positive half-degree")
    return math.exp((a - 0.5) * math.log(2 * a - 1.0)
                    - a * math.log(2.0 * a))


def homogenize_terms(n, terms):
    """Single homogeneous polynomial equal on the sphere to the given terms.

    ``terms`` maps exponent tuples of length n to coefficients, possibly of
    several degrees.  All degrees must share one parity; lower-degree terms
    are padded with powers of the squared radius.  A constant becomes a
    degree-2 polynomial (the smallest positive even degree).
    """
    if n < 2:
        raise ValueError("sphere optimization needs at least two variables")
    cleaned = {}
    for key, a in terms.items():
        mi = key if isinstance(key, MultiIndex) else MultiIndex(tuple(key))
        if len(mi) != n:
            raise ValueError(f"{mi} has {len(mi)} slots, expected {n}")
        a = float(a)
        if a == 0.0:
            continue
        cleaned[mi] = cleaned.get(mi, 0.0) + a
    cleaned = {mi: a for mi, a in cleaned.items() if a != 0.0}
    if not cleaned:
        raise ValueError("polynomial is identically zero")
    degrees = {mi.degree for mi in cleaned}
    if len({d % 2 for d in degrees}) > 1:
        raise ValueError(
            "terms of mixed degree parity cannot be made homogeneous "
            "on the sphere")
    target = max(degrees)
    if target == 0:
        target = 2
    out = HomoPoly(n, target, {})
    for mi, a in cleaned.items():
        pad = (target - mi.degree) // 2
        out = out + multiply_r2(homo_poly(n, mi.degree, {mi: a}), pad)
    return out


def lift_odd(T):
    """x_0 * T as an even-degree polynomial in one extra leading variable."""
    if T.degree % 2 != 1:
        raise ValueError("lift applies to odd-degree polynomials")
    terms = {(1,) + mi.exponents: a for mi, a in T.coeffs.items()}
    return homo_poly(T.n + 1, T.degree + 1, terms)


@dataclass(frozen=True)
class ReductionRecord:
    """How an input was massaged into an even homogeneous problem.

    ``solve_target`` is what the relaxation runs on; bounds for it divided
    by ``gamma`` are bounds for ``original`` (gamma is one when no lift
    happened).
    """

    original: HomoPoly
    solve_target: HomoPoly
    lifted: bool
    gamma: float


def canonicalize(n, terms):
    """Normalize raw terms into an even homogeneous problem plus bookkeeping."""
    original = homogenize_terms(n, terms)
    if original.degree % 2 == 0:
        return ReductionRecord(original=original, solve_target=original,
                               lifted=False, gamma=1.0)
    a = (original.degree + 1) // 2
    return ReductionRecord(original=original, solve_target=lift_odd(original),
                           lifted=True, gamma=gamma_factor(a))


def pullback_bounds(record, report):
    """Bounds for the solved problem, rescaled to the original one."""
    g = record.gamma
    return dataclasses.replace(
        report,
        n=record.original.n,
        degree=record.original.degree,
        nu_upper=report.nu_upper / g,
        nu_lower=report.nu_lower / g,
        duality_gap=report.duality_gap / g)
