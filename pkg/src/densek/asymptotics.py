"""Closed-form layer: log-binomials, the V/L/U envelope scales, binary
entropy and its inverse, the first-moment curve and its increments, the
experimental Gaussian curve variant, leading-order predictions, and the
combinatorial identity checkers.

Everything involving factorials is evaluated in log space (C(n,K)
overflows a double for modest n).  Formulas that leave their regime at
small n (a log argument going nonpositive, or the inverse-entropy
argument leaving [0, log 2]) return None - a tagged out-of-regime
sentinel, never a silent NaN.

Branch convention for the inverse entropy: h is symmetric around 1/2,
and the curve needs the branch with h_inv(log 2) = 1/2 increasing
toward 1 as its argument decreases; we solve h(t) = y on [1/2, 1] by
bisection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import comb, lgamma, log, sqrt

from .errors import DomainError

LN2 = math.log(2.0)

_EXACT_LOGBINOM_N = 64
_BISECT_TOL = 1e-13


def log_binomial(n: int, k: int) -> float:
    """Natural log of C(n, k); exact big-integer path for n <= 64,
    log-gamma otherwise."""
    if k < 0 or k > n or n < 0:
        raise DomainError(f"log_binomial needs 0 <= k <= n, got n={n}, k={k}")
    if n <= _EXACT_LOGBINOM_N:
        return math.log(comb(n, k))
    return lgamma(n + 1) - lgamma(k + 1) - lgamma(n - k + 1)


def _check_nk(n: int, k: int):
    if not 2 <= k <= n:
        raise DomainError(f"need 2 <= K <= n, got K={k}, n={n}")


def v_nk(n: int, k: int) -> float:
    """sqrt(2 C(K,2) log C(n,K)), the common envelope scale."""
    _check_nk(n, k)
    return sqrt(2.0 * comb(k, 2) * log_binomial(n, k))


def l_nk(n: int, k: int) -> float | None:
    """sqrt(2 C(K,2) log(C(n,K)/K)); None when the log goes negative."""
    _check_nk(n, k)
    t = log_binomial(n, k) - log(k)
    if t < 0.0:
        return None
    return sqrt(2.0 * comb(k, 2) * t)


def u_nk(n: int, k: int) -> float | None:
    """sqrt(2 C(K,2) log(C(n,K)/sqrt(K log(n/K)))); None out of regime."""
    _check_nk(n, k)
    s = k * log(n / k) if n > k else 0.0
    if s <= 0.0:
        return None
    t = log_binomial(n, k) - 0.5 * log(s)
    if t < 0.0:
        return None
    return sqrt(2.0 * comb(k, 2) * t)


def binary_entropy(x: float) -> float:
    """h(x) = -x log x - (1-x) log(1-x), natural log, h(0)=h(1)=0."""
    if x < 0.0 or x > 1.0:
        raise DomainError(f"binary_entropy needs x in [0,1], got {x}")
    if x == 0.0 or x == 1.0:
        return 0.0
    return -x * log(x) - (1.0 - x) * log(1.0 - x)


def inverse_entropy(y: float) -> float:
    """The t in [1/2, 1] with h(t) = y, by bisection to 1e-13."""
    if y < 0.0 or y > LN2 + 1e-15:
        raise DomainError(f"inverse_entropy needs y in [0, log 2], got {y}")
    y = min(y, LN2)
    lo, hi = 0.5, 1.0
    while hi - lo > _BISECT_TOL:
        mid = 0.5 * (lo + hi)
        if binary_entropy(mid) > y:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def inverse_entropy_expansion(eps: float) -> float:
    """Series form of h_inv(log 2 - eps) about 1/2:
    1/2 + sqrt(eps/2) - eps^{3/2}/(6 sqrt 2); validity documented for
    eps <= 0.1."""
    if eps < 0.0:
        raise DomainError(f"eps must be >= 0, got {eps}")
    return 0.5 + sqrt(eps / 2.0) - eps ** 1.5 / (6.0 * sqrt(2.0))


def first_moment_curve(n: int, k: int, z: int) -> float | None:
    """The high-probability upper envelope for the overlap-z maximum:

        Gamma(K) = C(K,2)
        Gamma(z) = C(z,2) + h_inv(log 2 - log(C(K,z) C(n-K,K-z)) / D) * D,
                   D = C(K,2) - C(z,2), z < K.

    Defined here for any 0 <= z <= K (the overlap grid proper starts at
    floor(K^2/n); the curve itself is evaluated at z=0 in the planted
    analysis).  None when the h_inv argument leaves [0, log 2].
    """
    _check_nk(n, k)
    if z < 0 or z > k:
        raise DomainError(f"need 0 <= z <= K, got z={z}")
    if z == k:
        return float(comb(k, 2))
    d = comb(k, 2) - comb(z, 2)
    count_log = log_binomial(k, z) + log_binomial(n - k, k - z)
    arg = LN2 - count_log / d
    if arg < 0.0 or arg > LN2:
        return None
    return comb(z, 2) + inverse_entropy(arg) * d


def curve_increment(n: int, k: int, z: int) -> float | None:
    """Gamma(z+1) - Gamma(z), exact from the curve."""
    a = first_moment_curve(n, k, z)
    b = first_moment_curve(n, k, z + 1)
    if a is None or b is None:
        return None
    return b - a


def gaussian_first_moment_curve(n: int, k: int, z: int) -> float | None:
    """EXPERIMENTAL Gaussian-planting variant: Gamma(z) + delta * D with
    delta = (log(C(K,z) C(n-K,K-z)) / D)^{5/4}.  The underlying
    derivation is explicitly marked as under revision by its authors;
    shipped for exploration only."""
    _check_nk(n, k)
    if z < 0 or z >= k:
        raise DomainError(f"gaussian curve variant needs 0 <= z < K, got z={z}")
    base = first_moment_curve(n, k, z)
    if base is None:
        return None
    d = comb(k, 2) - comb(z, 2)
    ratio = (log_binomial(k, z) + log_binomial(n - k, k - z)) / d
    return base + ratio ** 1.25 * d


def leading_asymptotic(n: int, k: int) -> float:
    """Two-term prediction K^2/4 + K^{3/2} sqrt(log(n/K)) / 2 for the
    mean-1/2 disorder optimum."""
    if not 2 <= k < n:
        raise DomainError(f"need 2 <= K < n, got K={k}, n={n}")
    return k * k / 4.0 + k ** 1.5 * sqrt(log(n / k)) / 2.0


@dataclass(frozen=True)
class AsymptoticEstimates:
    """V/L/U plus the leading-order prediction for one (n, K)."""

    n: int
    k: int
    v: float
    l: float | None
    u: float | None
    leading: float


def asymptotic_estimates(n: int, k: int) -> AsymptoticEstimates:
    return AsymptoticEstimates(n=n, k=k, v=v_nk(n, k), l=l_nk(n, k),
                               u=u_nk(n, k),
                               leading=leading_asymptotic(n, k))


@dataclass(frozen=True)
class MomentCurvePoint:
    """One overlap grid point of the first-moment curve: the curve
    value, the experimental Gaussian variant (None at z = K), and the
    forward increment (None at z = K); gamma is None out of regime."""

    z: int
    gamma: float | None
    gaussian_gamma: float | None
    increment: float | None


def moment_curve_points(n: int, k: int) -> list[MomentCurvePoint]:
    """The curve tabulated over the overlap grid floor(K^2/n)..K."""
    points = []
    for z in range(k * k // n, k + 1):
        points.append(MomentCurvePoint(
            z=z,
            gamma=first_moment_curve(n, k, z),
            gaussian_gamma=(gaussian_first_moment_curve(n, k, z)
                            if z < k else None),
            increment=curve_increment(n, k, z) if z < k else None,
        ))
    return points


@dataclass(frozen=True)
class IdentityCheck:
    kind: str
    holds: bool
    residual: float


def verify_identity(kind: str, **params) -> IdentityCheck:
    """Numeric checkers for the combinatorial identities.

    Vandermonde(n, K): sum_l C(K,l) C(n-K,K-l) = C(n,K), exact integers.
    BinomRatio(n, K, l): C(n,l) C(n-l,K-l) C(n-K,K-l) / C(n,K)^2
                         = C(K,l) C(n-K,K-l) / C(n,K); exact integer
                         check, residual reported in log space.
    WBound(n, K, l): the Stirling-style product is at most
                     exp(W_{n,K,l}), W = l (-log eta + 1 + K/n) with
                     eta = l n / K^2; residual is the log-space slack.
    """
    if kind == "Vandermonde":
        n, k = int(params["n"]), int(params["k"])
        if not 0 <= k <= n:
            raise DomainError("Vandermonde needs 0 <= K <= n")
        lhs = sum(comb(k, l) * comb(n - k, k - l) for l in range(k + 1))
        rhs = comb(n, k)
        return IdentityCheck("Vandermonde", lhs == rhs, float(abs(lhs - rhs)))

    if kind == "BinomRatio":
        n, k, l = int(params["n"]), int(params["k"]), int(params["l"])
        if not 0 <= l <= k <= n:
            raise DomainError("BinomRatio needs 0 <= l <= K <= n")
        a = comb(n, l) * comb(n - l, k - l) * comb(n - k, k - l)
        b = comb(k, l) * comb(n - k, k - l)
        holds = a == b * comb(n, k)
        if a == 0 or b == 0:
            residual = 0.0 if a == 0 and b == 0 else math.inf
        else:
            residual = abs(math.log(a) - math.log(b * comb(n, k)))
        return IdentityCheck("BinomRatio", holds, residual)

    if kind == "WBound":
        n, k, l = int(params["n"]), int(params["k"]), int(params["l"])
        if not 1 <= l <= k or not 2 <= k < n:
            raise DomainError("WBound needs 1 <= l <= K and 2 <= K < n")
        eta = l * n / (k * k)
        if eta > n / k:
            raise DomainError("WBound hypothesis eta <= n/K violated")
        w = l * (-log(eta) + 1.0 + k / n)
        log_lhs = (l * (log(k) + 1.0 - log(l))
                   + k * (log(k) - log(n))
                   + (n - k) * (log(n - k) - log(n)))
        if l < k:
            log_lhs += (k - l) * (log(n - k) + 1.0 - log(k - l))
        slack = w - log_lhs
        return IdentityCheck("WBound", slack >= 0.0, slack)

    raise DomainError(f"unknown identity kind {kind!r}")
