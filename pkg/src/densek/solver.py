"""Exact and heuristic densest K-subset solvers.

The optimum over all K-sets, its overlap-restricted version on planted
instances (exactly z vertices shared with the clique), full overlap
profiles, and threshold exceedance counts.

Tie rule (solver-wide): values are compared with absolute tolerance
1e-9; among sets whose values tie within that tolerance the
lexicographically smallest vertex set wins.  Both the plain enumerator
and the branch-and-bound visit complete K-sets in lexicographic order
and update the incumbent only on a >1e-9 improvement, which realizes
that rule and makes the two paths agree set-for-set.

The branch-and-bound prunes with an admissible optimistic bound
(partial density plus the largest remaining per-vertex gains, positive
parts only for signed weights); see _kernels.bnb_search.  The
overlap-restricted solver enumerates z-subsets of the clique crossed
with branch-and-bound over the complement rather than filtering all
K-sets, with the incumbent shared across clique choices.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import comb, inf

import numpy as np

from . import _kernels
from .disorder import DisorderMatrix, subset_density
from .errors import (
    DomainError,
    InfeasibleOverlapError,
    InvalidDimensionError,
    MissingPlantError,
    ResourceLimitError,
)

TIE_TOL = 1e-9
ENUM_AUTO_LIMIT = 200_000     # below this, plain enumeration beats B&B setup
ENUM_HARD_LIMIT = 10 ** 8     # enumeration refused above this
_COMBO_CACHE_LIMIT = 1_000_000  # subset arrays above this stream uncached
_WARM_SLACK = 1e-6            # warm-start value offset, keeps optima findable
UNLIMITED_BUDGET = 2 ** 62


@dataclass(frozen=True)
class SubsetSolution:
    """A K-vertex set with its density and optimality certificate."""

    vertices: tuple[int, ...]
    value: float
    exact: bool
    nodes_explored: int = 0
    budget_exhausted: bool = False


@dataclass(frozen=True)
class OverlapProfile:
    """Per-overlap maxima z -> psi(z) with the first-moment curve overlay."""

    k: int
    z_values: tuple[int, ...]
    psi_values: tuple[float, ...]
    gamma_values: tuple[float | None, ...]
    exact_flags: tuple[bool, ...]
    solutions: tuple[SubsetSolution, ...]

    @property
    def max_psi(self) -> float:
        return max(self.psi_values)


@lru_cache(maxsize=6)
def _combo_array(n: int, k: int) -> np.ndarray:
    total = comb(n, k)
    flat = np.fromiter(
        itertools.chain.from_iterable(itertools.combinations(range(n), k)),
        dtype=np.int64, count=total * k)
    arr = flat.reshape(total, k)
    arr.setflags(write=False)
    return arr


def _combo_chunks(n: int, k: int, chunk: int = 1 << 16):
    """Yield lexicographic K-subset arrays in chunks."""
    total = comb(n, k)
    if total <= _COMBO_CACHE_LIMIT:
        yield _combo_array(n, k)
        return
    it = itertools.combinations(range(n), k)
    while True:
        block = list(itertools.islice(it, chunk))
        if not block:
            return
        yield np.asarray(block, dtype=np.int64)


def _subset_values(W: np.ndarray, combos: np.ndarray) -> np.ndarray:
    vals = np.zeros(len(combos), dtype=np.float64)
    k = combos.shape[1]
    for a in range(k):
        ca = combos[:, a]
        for b in range(a + 1, k):
            vals += W[ca, combos[:, b]]
    return vals


def _enumerate_best(W, n, k, tol=TIE_TOL):
    best = -inf
    best_set = None
    for combos in _combo_chunks(n, k):
        vals = _subset_values(W, combos)
        nb, idx = _kernels.scan_best(vals, best, tol)
        if idx >= 0:
            best = nb
            best_set = tuple(int(v) for v in combos[idx])
    return best, best_set


def _top_positive_cumsums(W: np.ndarray, k: int) -> np.ndarray:
    """topcum[v, j] = sum of v's j largest positive weights, j in 0..k-1."""
    pos = np.clip(W, 0.0, None)
    srt = np.sort(pos, axis=1)[:, ::-1][:, :max(k - 1, 1)]
    cums = np.cumsum(srt, axis=1)
    out = np.zeros((W.shape[0], k), dtype=np.float64)
    out[:, 1:] = cums[:, :k - 1]
    return out


def _bnb(W, prize, k, budget, integral, warm_val):
    topcum = _top_positive_cumsums(W, k)
    return _kernels.bnb_search(
        np.ascontiguousarray(W), np.ascontiguousarray(prize), topcum,
        k, TIE_TOL, integral, budget, warm_val)


def _greedy_grow(W, prize, start, k, rng=None):
    """Grow a K-set greedily from one start vertex; returns member array."""
    n = W.shape[0]
    members = [start]
    wto = W[start].copy()
    in_set = np.zeros(n, dtype=bool)
    in_set[start] = True
    while len(members) < k:
        score = prize + wto
        score[in_set] = -inf
        v = int(np.argmax(score))
        members.append(v)
        in_set[v] = True
        wto += W[v]
    return np.asarray(sorted(members), dtype=np.int64), in_set


def _heuristic_value(W, prize, k, restarts, seed, max_iters=200):
    """Best of `restarts` greedy + 1-swap runs; returns (value, set)."""
    n = W.shape[0]
    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    best_val = -inf
    best_set = None
    for _ in range(restarts):
        start = int(rng.integers(n))
        members, in_mask = _greedy_grow(W, prize, start, k)
        val = _kernels.local_search_swap(W, prize, members, in_mask, max_iters)
        if val > best_val + TIE_TOL:
            best_val = val
            best_set = tuple(sorted(int(v) for v in members))
    return best_val, best_set


def psi_lower_heuristic(matrix: DisorderMatrix, k: int, restarts: int,
                        seed: int) -> SubsetSolution:
    """Greedy seeding plus 1-swap local search; a lower bound on the
    optimum, never certified exact."""
    n = matrix.n
    if not 2 <= k <= n:
        raise InvalidDimensionError(f"need 2 <= K <= n, got K={k}, n={n}")
    if restarts < 1:
        raise DomainError("restarts must be >= 1")
    W = matrix.dense()
    prize = np.zeros(n, dtype=np.float64)
    _, vset = _heuristic_value(W, prize, k, restarts, seed)
    return SubsetSolution(vertices=vset,
                          value=float(subset_density(matrix, vset)),
                          exact=False)


def psi_exact(matrix: DisorderMatrix, k: int, budget: int | None = None,
              method: str = "auto") -> SubsetSolution:
    """Exact maximum density over all K-sets.

    method: "auto" picks plain enumeration for small C(n,K) and
    branch-and-bound otherwise; "enumerate" and "branch-and-bound" force
    a path.  With a node budget, exhaustion returns the best found with
    exact=False and budget_exhausted=True.
    """
    n = matrix.n
    if not 2 <= k <= n:
        raise InvalidDimensionError(f"need 2 <= K <= n, got K={k}, n={n}")
    total = comb(n, k)
    if method == "auto":
        method = "enumerate" if total <= ENUM_AUTO_LIMIT else "branch-and-bound"
    W = matrix.dense()
    if method == "enumerate":
        if total > ENUM_HARD_LIMIT:
            raise ResourceLimitError(
                f"C({n},{k}) = {total} exceeds the enumeration limit")
        value, vset = _enumerate_best(W, n, k)
        return SubsetSolution(vertices=vset,
                              value=float(subset_density(matrix, vset)),
                              exact=True, nodes_explored=total)
    if method != "branch-and-bound":
        raise DomainError(f"unknown method {method!r}")
    limit = UNLIMITED_BUDGET if budget is None else int(budget)
    prize = np.zeros(n, dtype=np.float64)
    warm_val, warm_set = _heuristic_value(
        W, prize, k, restarts=min(8, n), seed=matrix.seed ^ 0xD1CE)
    bval, bset, nodes, exhausted = _bnb(
        W, prize, k, limit, matrix.is_integer_valued, warm_val - _WARM_SLACK)
    if bset[0] < 0:
        # budget hit before any set could beat the warm start
        return SubsetSolution(vertices=warm_set,
                              value=float(subset_density(matrix, warm_set)),
                              exact=False, nodes_explored=int(nodes),
                              budget_exhausted=True)
    vset = tuple(int(v) for v in bset)
    return SubsetSolution(vertices=vset,
                          value=float(subset_density(matrix, vset)),
                          exact=not exhausted, nodes_explored=int(nodes),
                          budget_exhausted=bool(exhausted))


def overlap_range(matrix: DisorderMatrix, k: int) -> range:
    """Feasible overlap grid: the curve domain floor(K^2/n)..K clipped to
    counting feasibility."""
    if matrix.planted is None:
        raise MissingPlantError("matrix has no planted clique")
    n, kpc = matrix.n, matrix.planted.k
    lo = max(k * k // n, k - (n - kpc), 0)
    hi = min(k, kpc)
    return range(lo, hi + 1)


def _check_overlap_feasible(matrix, k, z):
    if matrix.planted is None:
        raise MissingPlantError("matrix has no planted clique")
    n, kpc = matrix.n, matrix.planted.k
    if not 2 <= k <= n:
        raise InvalidDimensionError(f"need 2 <= K <= n, got K={k}, n={n}")
    if z < 0 or z > min(k, kpc) or (k - z) > (n - kpc):
        raise InfeasibleOverlapError(
            f"no K={k} set with overlap {z} exists (clique size {kpc}, n={n})")
    if z < k * k // n:
        raise InfeasibleOverlapError(
            f"overlap {z} below the grid floor {k * k // n}")


def psi_overlap(matrix: DisorderMatrix, k: int, z: int,
                budget: int | None = None) -> SubsetSolution:
    """Maximum density among K-sets sharing exactly z vertices with the
    planted clique.

    Solved as z-subsets of the clique crossed with a prize-augmented
    branch-and-bound over the complement, sharing one incumbent across
    clique choices; the node budget is a total across all of them.
    """
    _check_overlap_feasible(matrix, k, z)
    n, kpc = matrix.n, matrix.planted.k
    W = matrix.dense()
    limit = UNLIMITED_BUDGET if budget is None else int(budget)
    integral = matrix.is_integer_valued

    comp = np.arange(kpc, n, dtype=np.int64)
    r = k - z

    if r == 0:
        # the set lives entirely inside the clique
        best, best_set = -inf, None
        for A in itertools.combinations(range(kpc), z):
            val = subset_density(matrix, A)
            if val > best + TIE_TOL:
                best, best_set = val, A
        return SubsetSolution(vertices=tuple(best_set), value=float(best),
                              exact=True, nodes_explored=comb(kpc, z))

    subW = np.ascontiguousarray(W[np.ix_(comp, comp)])
    topcum = _top_positive_cumsums(subW, r)

    # cheap warm start: clique part by strongest ties to the complement
    clique_rank = np.argsort(-W[:kpc, kpc:].sum(axis=1), kind="stable")
    warm_candidates = [tuple(sorted(int(v) for v in clique_rank[:z])),
                       tuple(range(z))]
    global_best = -inf
    global_set = None
    for A in dict.fromkeys(warm_candidates):
        baseA = subset_density(matrix, A) if len(A) >= 2 else 0.0
        prize = W[np.ix_(comp, np.asarray(A, dtype=np.int64))].sum(axis=1) \
            if A else np.zeros(len(comp))
        hv, hset = _heuristic_value(subW, prize, r, restarts=4,
                                    seed=matrix.seed ^ (0xB0B0 + z))
        if baseA + hv > global_best:
            global_best = baseA + hv
            global_set = tuple(sorted(A + tuple(int(comp[i]) for i in hset)))
    warm_set = global_set
    global_best -= _WARM_SLACK

    nodes_total = 0
    exhausted = False
    found = None
    for A in itertools.combinations(range(kpc), z):
        baseA = 0.0
        if len(A) >= 2:
            baseA = subset_density(matrix, A)
        if A:
            idxA = np.asarray(A, dtype=np.int64)
            prize = np.ascontiguousarray(
                W[np.ix_(comp, idxA)].sum(axis=1))
        else:
            prize = np.zeros(len(comp), dtype=np.float64)
        bval, bset, nodes, exh = _kernels.bnb_search(
            subW, prize, topcum, r, TIE_TOL, integral,
            limit - nodes_total, global_best - baseA)
        nodes_total += int(nodes)
        if bset[0] >= 0:
            global_best = baseA + bval
            found = tuple(sorted(A + tuple(int(comp[i]) for i in bset)))
        if exh:
            exhausted = True
            break

    if found is None:
        vset = warm_set
    else:
        vset = found
    return SubsetSolution(vertices=vset,
                          value=float(subset_density(matrix, vset)),
                          exact=not exhausted, nodes_explored=nodes_total,
                          budget_exhausted=exhausted)


def psi_profile(matrix: DisorderMatrix, k: int,
                budget: int | None = None) -> OverlapProfile:
    """psi_overlap at every feasible z, with the first-moment curve
    overlay (None where the curve is undefined)."""
    from .asymptotics import first_moment_curve

    zs = list(overlap_range(matrix, k))
    if not zs:
        raise InfeasibleOverlapError(
            f"no feasible overlaps for K={k} with clique size "
            f"{matrix.planted.k} on n={matrix.n}")
    sols = [psi_overlap(matrix, k, z, budget=budget) for z in zs]
    gammas = [first_moment_curve(matrix.n, k, z) for z in zs]
    return OverlapProfile(
        k=k,
        z_values=tuple(zs),
        psi_values=tuple(s.value for s in sols),
        gamma_values=tuple(gammas),
        exact_flags=tuple(s.exact for s in sols),
        solutions=tuple(sols),
    )


def count_exceeding(matrix: DisorderMatrix, k: int, threshold: float) -> int:
    """Exact number of K-sets with density >= threshold (closed
    comparison, matching the tail events it instruments)."""
    n = matrix.n
    if not 2 <= k <= n:
        raise InvalidDimensionError(f"need 2 <= K <= n, got K={k}, n={n}")
    total = comb(n, k)
    if total > ENUM_HARD_LIMIT:
        raise ResourceLimitError(
            f"C({n},{k}) = {total} exceeds the enumeration limit")
    W = matrix.dense()
    count = 0
    for combos in _combo_chunks(n, k):
        vals = _subset_values(W, combos)
        count += int((vals >= threshold).sum())
    return count
