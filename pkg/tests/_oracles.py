"""Independent oracles for the test suite.

Everything here deliberately avoids the package's solver/formula code
paths: densities by naive double loops, maxima by lexicographic
itertools enumeration with the shared tie rule, curve values by
multiprecision bisection, tails by exact big-integer summation.
"""

import itertools
import math
from math import comb

import mpmath as mp


def naive_density(matrix, vertices):
    s = sorted(vertices)
    total = 0.0
    for a in range(len(s)):
        for b in range(a + 1, len(s)):
            total += matrix.weight(s[a], s[b])
    return total


def enumerate_best(matrix, k, tol=1e-9, overlap=None):
    """Lexicographic scan with the update-on->tol rule; optionally
    restricted to K-sets with exactly `overlap` planted vertices."""
    best = -math.inf
    best_set = None
    pc = set(range(matrix.planted.k)) if matrix.planted else set()
    for S in itertools.combinations(range(matrix.n), k):
        if overlap is not None and len(pc.intersection(S)) != overlap:
            continue
        v = naive_density(matrix, S)
        if v > best + tol:
            best, best_set = v, S
    return best, best_set


def exact_rademacher_tail(n, t):
    """P(sum of n signs >= t) by big-integer binomial summation."""
    m = math.ceil((n + t) / 2.0)
    if m > n:
        return 0.0
    m = max(m, 0)
    return sum(comb(n, j) for j in range(m, n + 1)) / 2 ** n


def mp_inverse_entropy(y, dps=40):
    with mp.workdps(dps):
        y = mp.mpf(y)
        lo, hi = mp.mpf("0.5"), mp.mpf(1)
        for _ in range(140):
            mid = (lo + hi) / 2
            h = -mid * mp.log(mid) - (1 - mid) * mp.log(1 - mid)
            if h > y:
                lo = mid
            else:
                hi = mid
        return (lo + hi) / 2


def mp_first_moment_curve(n, k, z, dps=40):
    with mp.workdps(dps):
        if z == k:
            return mp.binomial(k, 2)
        d = mp.binomial(k, 2) - mp.binomial(z, 2)
        arg = mp.log(2) - mp.log(mp.binomial(k, z) * mp.binomial(n - k, k - z)) / d
        if arg < 0 or arg > mp.log(2):
            return None
        return mp.binomial(z, 2) + mp_inverse_entropy(arg, dps) * d


def enumerated_rademacher_moments(gamma, n=6, k=3):
    """Exact P(U>=1), E[U], E[U^2] for the Rademacher disorder by full
    2^{n(n-1)/2} sign enumeration."""
    import numpy as np

    pairs = list(itertools.combinations(range(n), 2))
    subsets = list(itertools.combinations(range(n), k))
    inc = np.zeros((len(pairs), len(subsets)))
    for ei, (i, j) in enumerate(pairs):
        for si, s in enumerate(subsets):
            inc[ei, si] = i in s and j in s
    signs = np.array(list(itertools.product((-1.0, 1.0), repeat=len(pairs))))
    z = signs @ inc
    u = (z >= gamma * comb(k, 2)).sum(axis=1)
    return (u >= 1).mean(), u.mean(), (u.astype(float) ** 2).mean()


def mp_smooth_max(W, n, k, beta, delta_edge=None, delta=0, dps=40):
    """f_beta from the dense matrix in multiprecision, optionally with
    one edge weight perturbed by delta (for finite differences)."""
    with mp.workdps(dps):
        total = mp.mpf(0)
        for S in itertools.combinations(range(n), k):
            z = mp.mpf(0)
            for a in range(k):
                for b in range(a + 1, k):
                    z += W[S[a], S[b]]
                    if delta_edge is not None and (S[a], S[b]) == delta_edge:
                        z += delta
            total += mp.e ** (beta * z)
        return mp.log(total) / beta
