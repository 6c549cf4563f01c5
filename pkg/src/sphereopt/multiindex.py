"""Multi-index combinatorics and the symmetric-subspace number-state basis.

A multi-index i = (i_1, ..., i_n) labels the monomial
x^i = x_1^{i_1} * ... * x_n^{i_n} and, when |i| = l, the normalized
symmetrization |i> of the product vector e_1^{(x)i_1} (x) ... (x) e_n^{(x)i_n}
in (R^n)^{(x)l}.  The vectors |i> form an orthonormal basis of the symmetric
subspace Sym((R^n)^{(x)l}), whose dimension is C(l + n - 1, l).

Production code works exclusively in number-state coordinates and never
touches the n^l-dimensional product space.  The dense constructions at the
bottom of this module (explicit symmetrizer, explicit number-state vectors)
are brute-force oracles for tests and are guarded to small sizes.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache, total_ordering

import numpy as np

# Storage guard for the dense product-space constructions: n^l entries per
# vector, (n^l)^2 per matrix.
DENSE_PRODUCT_CAP = 10_000


@total_ordering
class MultiIndex:
    """Immutable exponent vector with a cached total degree.

    The ordering is graded: lower total degree compares smaller.  Within one
    degree the order is x1-major (descending exponent tuples), matching the
    monomial listing x1^d, x1^{d-1} x2, ..., xn^d that
    ``enumerate_multiindices`` produces.
    """

    __slots__ = ("exponents", "degree")

    def __init__(self, exponents):
        exps = tuple(int(e) for e in exponents)
        if any(e < 0 for e in exps):
            raise ValueError(f"negative exponent in multi-index {exps}")
        self.exponents = exps
        self.degree = sum(exps)

    def __len__(self):
        return len(self.exponents)

    def __iter__(self):
        return iter(self.exponents)

    def __getitem__(self, t):
        return self.exponents[t]

    def __hash__(self):
        return hash(self.exponents)

    def __eq__(self, other):
        if isinstance(other, MultiIndex):
            return self.exponents == other.exponents
        if isinstance(other, tuple):
            return self.exponents == other
        return NotImplemented

    def __lt__(self, other):
        if not isinstance(other, MultiIndex):
            return NotImplemented
        if self.degree != other.degree:
            return self.degree < other.degree
        return self.exponents > other.exponents

    def __add__(self, other):
        if len(self) != len(other):
            raise ValueError("multi-index length mismatch")
        return MultiIndex(a + b for a, b in zip(self.exponents, other))

    def __repr__(self):
        return f"MultiIndex{self.exponents}"

    def shifted(self, t, delta):
        """Return a copy with exponent t changed by delta."""
        exps = list(self.exponents)
        exps[t] += delta
        return MultiIndex(exps)

    def factorial(self):
        """i! = prod_t (i_t)!, exact integer."""
        out = 1
        for e in self.exponents:
            out *= math.factorial(e)
        return out


def enumerate_multiindices(n, degree):
    """All multi-indices with n slots summing to ``degree``, x1-major order.

    For n = 2, degree = 2 the order is (2,0), (1,1), (0,2).  The listing is
    deterministic and agrees with sorting under the MultiIndex order.
    """
    if n < 1:
        raise ValueError("need at least one variable")
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    out = []

    def rec(prefix, remaining, slots):
        if slots == 1:
            out.append(MultiIndex(prefix + (remaining,)))
            return
        for e in range(remaining, -1, -1):
            rec(prefix + (e,), remaining - e, slots - 1)

    rec((), degree, n)
    return out


def sym_dimension(n, level):
    """dim Sym((R^n)^{(x)level}) = C(level + n - 1, level).

    Exact integer arithmetic; Python integers do not overflow.
    """
    if n < 1 or level < 0:
        raise ValueError("need n >= 1 and level >= 0")
    return math.comb(level + n - 1, level)


@dataclass(frozen=True, eq=False)
class BasisCatalog:
    """Fixed enumeration of all degree-``degree`` multi-indices on n slots.

    ``indices[position[i]] is i`` for every catalog member, and ``expmat``
    stacks the exponent tuples as an integer array of shape (size, n).
    """

    n: int
    degree: int
    indices: tuple
    position: dict
    expmat: np.ndarray

    def __len__(self):
        return len(self.indices)

    def index(self, mi):
        if not isinstance(mi, MultiIndex):
            mi = MultiIndex(mi)
        try:
            return self.position[mi]
        except KeyError:
            raise ValueError(f"{mi} is not in the degree-{self.degree} catalog")


@lru_cache(maxsize=None)
def basis_catalog(n, degree):
    indices = tuple(enumerate_multiindices(n, degree))
    position = {mi: p for p, mi in enumerate(indices)}
    expmat = np.array([mi.exponents for mi in indices], dtype=np.int64)
    expmat.setflags(write=False)
    return BasisCatalog(n=n, degree=degree, indices=indices,
                        position=position, expmat=expmat)


def _log_binom(a, b):
    return math.lgamma(a + 1) - math.lgamma(b + 1) - math.lgamma(a - b + 1)


def number_state_overlap(i, j, k):
    """<i (x) j | k> for number states with |i| = |j| = l and |k| = 2l.

    Zero unless i + j = k componentwise; otherwise
    sqrt(prod_t C(k_t, i_t) / C(2l, l)), evaluated in log space so that the
    binomials never overflow.  For fixed k the overlaps over all (i, j)
    splits form a unit vector.
    """
    if not isinstance(i, MultiIndex):
        i = MultiIndex(i)
    if not isinstance(j, MultiIndex):
        j = MultiIndex(j)
    if not isinstance(k, MultiIndex):
        k = MultiIndex(k)
    if len(i) != len(j) or len(i) != len(k):
        raise ValueError("multi-index length mismatch")
    level = i.degree
    if j.degree != level:
        raise ValueError("|i| and |j| must agree")
    if k.degree != 2 * level:
        raise ValueError("|k| must equal |i| + |j|")
    if i + j != k:
        return 0.0
    log = -_log_binom(2 * level, level)
    for it, kt in zip(i, k):
        log += _log_binom(kt, it)
    return math.exp(0.5 * log)


def _check_dense_size(n, level):
    size = n ** level
    if size > DENSE_PRODUCT_CAP:
        raise ValueError(
            f"dense product space has {size} dimensions, exceeding the "
            f"guard of {DENSE_PRODUCT_CAP}; dense constructions are "
            "test oracles for small instances only")
    return size


def dense_number_state(mi):
    """Explicit |mi> as a vector in the n^l product space (test oracle).

    Basis order of (R^n)^{(x)l} is lexicographic in the factor labels, most
    significant factor first.
    """
    if not isinstance(mi, MultiIndex):
        mi = MultiIndex(mi)
    n = len(mi)
    level = mi.degree
    size = _check_dense_size(n, level)
    coeff = math.exp(0.5 * (math.log(mi.factorial()) - math.lgamma(level + 1))) \
        if level > 0 else 1.0
    vec = np.zeros(size)
    target = mi.exponents
    for pos, word in enumerate(itertools.product(range(n), repeat=level)):
        counts = [0] * n
        for w in word:
            counts[w] += 1
        if tuple(counts) == target:
            vec[pos] = coeff
    return vec


def dense_symmetrizer(n, level):
    """Explicit symmetrizer (1/l!) sum_pi P_pi on (R^n)^{(x)l} (test oracle).

    Cost grows like l! * n^l, so callers should stay well inside the size
    guard.
    """
    size = _check_dense_size(n, level)
    if level == 0:
        return np.ones((1, 1))
    words = np.array(list(itertools.product(range(n), repeat=level)),
                     dtype=np.int64)
    powers = n ** np.arange(level - 1, -1, -1, dtype=np.int64)
    out = np.zeros((size, size))
    cols = np.arange(size)
    for perm in itertools.permutations(range(level)):
        dest = words[:, perm] @ powers
        out[dest, cols] += 1.0
    out /= math.factorial(level)
    return out
