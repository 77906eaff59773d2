"""Hot inner loops for the exact solver.

Compiled with numba when available (it is a declared dependency); the
pure-Python bodies are semantically identical and used as a fallback so
the package still works if JIT compilation is unavailable.  All float
comparisons follow the solver-wide tie rule: a candidate replaces the
incumbent only when it is better by more than `tol`, so the first
maximizer in lexicographic visiting order wins ties.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dep, belt and braces
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def deco(f):
            return f

        return deco


@njit(cache=True)
def scan_best(values, best, tol):
    """Sequential record scan over one chunk of subset densities.

    Returns (new_best, index_of_last_update) with index -1 when no value
    beat the incumbent by more than tol.
    """
    idx = -1
    for i in range(values.shape[0]):
        v = values[i]
        if v > best + tol:
            best = v
            idx = i
    return best, idx


@njit(cache=True)
def bnb_search(W, prize, topcum, K, tol, int_floor, budget, warm_val):
    """Depth-first branch and bound for the prize-augmented densest K-set.

    Maximizes sum of W over inside pairs plus sum of prize over members.
    Vertices are explored in ascending order with the include-branch
    first, so complete K-sets are reached in lexicographic order and the
    first optimum found under the >tol update rule is the
    lexicographically smallest one.

    Admissible bound at a partial set P with r slots left: density(P)
    plus the sum of the r largest optimistic gains g(c) = prize[c] +
    w(c,P) + 0.5 * (sum of c's top r-1 positive weights).  When
    int_floor is set (integer-valued instances) the bound is floored,
    which tightens pruning without losing admissibility.

    Returns (best_value, best_set, nodes, exhausted); best_set entries
    are -1 when no set beat warm_val within the node budget.
    """
    n = W.shape[0]
    chosen = np.empty(K, np.int64)
    best_set = np.full(K, -1, np.int64)
    start = np.empty(K + 1, np.int64)
    cursor = np.empty(K + 1, np.int64)
    dens = np.empty(K + 1, np.float64)
    wtoP = np.zeros(n, np.float64)
    topr = np.empty(K + 1, np.float64)

    best = warm_val
    nodes = 0
    exhausted = False

    depth = 0
    start[0] = 0
    dens[0] = 0.0
    cursor[0] = -2  # fresh node, needs feasibility/bound check

    while depth >= 0:
        if cursor[depth] == -2:
            nodes += 1
            if nodes > budget:
                exhausted = True
                break
            r = K - depth
            if r == 0:
                v = dens[depth]
                if v > best + tol:
                    best = v
                    for i in range(K):
                        best_set[i] = chosen[i]
                depth -= 1
                if depth >= 0:
                    c0 = chosen[depth]
                    for u in range(n):
                        wtoP[u] -= W[c0, u]
                continue
            s = start[depth]
            if n - s < r:
                depth -= 1
                if depth >= 0:
                    c0 = chosen[depth]
                    for u in range(n):
                        wtoP[u] -= W[c0, u]
                continue
            # admissible bound: keep the r largest gains in topr (sorted asc)
            cnt = 0
            for c in range(s, n):
                gv = prize[c] + wtoP[c] + 0.5 * topcum[c, r - 1]
                if cnt < r:
                    j = cnt
                    while j > 0 and topr[j - 1] > gv:
                        topr[j] = topr[j - 1]
                        j -= 1
                    topr[j] = gv
                    cnt += 1
                elif gv > topr[0]:
                    j = 1
                    while j < r and topr[j] < gv:
                        topr[j - 1] = topr[j]
                        j += 1
                    topr[j - 1] = gv
            bound = dens[depth]
            for j in range(cnt):
                bound += topr[j]
            if int_floor:
                bound = np.floor(bound + 1e-9)
            if bound <= best + tol:
                depth -= 1
                if depth >= 0:
                    c0 = chosen[depth]
                    for u in range(n):
                        wtoP[u] -= W[c0, u]
                continue
            cursor[depth] = s

        c = cursor[depth]
        r = K - depth
        if c > n - r:
            depth -= 1
            if depth >= 0:
                c0 = chosen[depth]
                for u in range(n):
                    wtoP[u] -= W[c0, u]
            continue
        cursor[depth] = c + 1
        chosen[depth] = c
        d2 = dens[depth] + prize[c] + wtoP[c]
        for u in range(n):
            wtoP[u] += W[c, u]
        start[depth + 1] = c + 1
        dens[depth + 1] = d2
        cursor[depth + 1] = -2
        depth += 1

    return best, best_set, nodes, exhausted


@njit(cache=True)
def local_search_swap(W, prize, members, in_mask, max_iters):
    """1-swap hill climbing: swap one member for one outsider while any
    swap strictly improves.  Mutates members/in_mask in place; returns
    the final objective value."""
    n = W.shape[0]
    K = members.shape[0]
    wto = np.zeros(n, np.float64)
    for t in range(K):
        m = members[t]
        for u in range(n):
            wto[u] += W[m, u]
    val = 0.0
    for t in range(K):
        m = members[t]
        val += prize[m] + 0.5 * wto[m]
    for _ in range(max_iters):
        best_gain = 1e-12
        bi = -1
        bo = -1
        for t in range(K):
            vin = members[t]
            loss = prize[vin] + wto[vin]
            for vout in range(n):
                if in_mask[vout]:
                    continue
                gain = prize[vout] + wto[vout] - W[vout, vin] - loss
                if gain > best_gain:
                    best_gain = gain
                    bi = t
                    bo = vout
        if bi < 0:
            break
        vin = members[bi]
        members[bi] = bo
        in_mask[vin] = False
        in_mask[bo] = True
        for u in range(n):
            wto[u] += W[bo, u] - W[vin, u]
        val += best_gain
    return val
