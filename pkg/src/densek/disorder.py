"""Weighted random-graph instances: the disorder.

An instance on n vertices is the upper-triangular weight collection
w(i,j), i < j, drawn i.i.d. from a chosen edge distribution, optionally
with a clique planted on vertices 0..K-1 (Bernoulli planting forces the
inside weights to 1; general planting shifts them by mu).  The two
planting semantics are deliberately distinct code paths; neither is a
special case of the other.

Reproducibility contract: weights are a pure function of
(n, distribution, seed, planting).  Uniform variates come from the
counter-based Philox generator keyed by the seed, so per-edge draws are
order-independent; Gaussians are produced by the inverse CDF (scipy's
ndtri) applied to those uniforms, which is deterministic across
platforms.  Matrices are immutable after construction and safe to share
across threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .errors import (
    DomainError,
    InvalidDimensionError,
    InvalidVertexError,
    SchemaError,
)

MATRIX_FORMAT = "densek-matrix"
MATRIX_FORMAT_VERSION = 1

# Distribution kinds
BERNOULLI_HALF = "bernoulli-half"
RADEMACHER = "rademacher"
GAUSSIAN_HALF_QUARTER = "gaussian-half-quarter"
GAUSSIAN_STD = "gaussian-std"
BOUNDED_CUSTOM = "bounded-custom"

_KINDS = (BERNOULLI_HALF, RADEMACHER, GAUSSIAN_HALF_QUARTER, GAUSSIAN_STD,
          BOUNDED_CUSTOM)

_MOMENT_TOL = 1e-12


@dataclass(frozen=True)
class DistributionSpec:
    """Edge-weight distribution with its declared first two moments.

    declared_mean / declared_variance must equal the analytic moments of
    the kind to within 1e-12; use the factory functions below rather than
    constructing directly.
    """

    kind: str
    declared_mean: float
    declared_variance: float
    support: tuple[float, ...] = ()
    probabilities: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise DomainError(f"unknown distribution kind {self.kind!r}")
        if self.kind == BOUNDED_CUSTOM:
            if len(self.support) != len(self.probabilities) or not self.support:
                raise DomainError("bounded-custom needs matching nonempty "
                                  "support and probabilities")
            p = np.asarray(self.probabilities, dtype=float)
            if (p < 0).any():
                raise DomainError("probabilities must be nonnegative")
            if abs(p.sum() - 1.0) > _MOMENT_TOL:
                raise DomainError("probabilities must sum to 1 within 1e-12")
        mean, var = self._analytic_moments()
        if abs(mean - self.declared_mean) > _MOMENT_TOL:
            raise DomainError("declared_mean does not match analytic mean")
        if abs(var - self.declared_variance) > _MOMENT_TOL:
            raise DomainError("declared_variance does not match analytic variance")

    def _analytic_moments(self):
        if self.kind == BERNOULLI_HALF:
            return 0.5, 0.25
        if self.kind == RADEMACHER:
            return 0.0, 1.0
        if self.kind == GAUSSIAN_HALF_QUARTER:
            return 0.5, 0.25
        if self.kind == GAUSSIAN_STD:
            return 0.0, 1.0
        x = np.asarray(self.support, dtype=float)
        p = np.asarray(self.probabilities, dtype=float)
        mean = float(x @ p)
        var = float((x - mean) ** 2 @ p)
        return mean, var

    @property
    def is_integer_valued(self) -> bool:
        """True when every possible weight is an integer (enables exact
        integral pruning in the solver)."""
        if self.kind in (BERNOULLI_HALF, RADEMACHER):
            return True
        if self.kind == BOUNDED_CUSTOM:
            return all(float(v).is_integer() for v in self.support)
        return False

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "mean": self.declared_mean,
             "variance": self.declared_variance}
        if self.kind == BOUNDED_CUSTOM:
            d["support"] = list(self.support)
            d["probabilities"] = list(self.probabilities)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DistributionSpec":
        return cls(kind=d["kind"], declared_mean=d["mean"],
                   declared_variance=d["variance"],
                   support=tuple(d.get("support", ())),
                   probabilities=tuple(d.get("probabilities", ())))


def bernoulli_half() -> DistributionSpec:
    return DistributionSpec(BERNOULLI_HALF, 0.5, 0.25)


def rademacher() -> DistributionSpec:
    return DistributionSpec(RADEMACHER, 0.0, 1.0)


def gaussian_half_quarter() -> DistributionSpec:
    return DistributionSpec(GAUSSIAN_HALF_QUARTER, 0.5, 0.25)


def gaussian_std() -> DistributionSpec:
    return DistributionSpec(GAUSSIAN_STD, 0.0, 1.0)


def bounded_custom(support, probabilities) -> DistributionSpec:
    x = np.asarray(support, dtype=float)
    p = np.asarray(probabilities, dtype=float)
    mean = float(x @ p)
    var = float((x - mean) ** 2 @ p)
    return DistributionSpec(BOUNDED_CUSTOM, mean, var,
                            tuple(float(v) for v in x),
                            tuple(float(v) for v in p))


def distribution_from_name(name: str) -> DistributionSpec:
    """Resolve a CLI/config distribution name to a spec."""
    table = {
        BERNOULLI_HALF: bernoulli_half,
        RADEMACHER: rademacher,
        GAUSSIAN_HALF_QUARTER: gaussian_half_quarter,
        GAUSSIAN_STD: gaussian_std,
    }
    if name not in table:
        raise DomainError(f"unknown distribution name {name!r}")
    return table[name]()


@dataclass(frozen=True)
class PlantedInfo:
    """Planted clique bookkeeping: always occupies vertices 0..K-1."""

    k: int
    mu: float

    @property
    def clique_vertices(self) -> frozenset[int]:
        return frozenset(range(self.k))


def pair_count(n: int) -> int:
    return n * (n - 1) // 2


def pair_index(n: int, i: int, j: int) -> int:
    """Row-major index of the unordered pair (i, j), i < j, in a flat
    length n(n-1)/2 array."""
    if i == j:
        raise InvalidVertexError("no self-loops")
    if i > j:
        i, j = j, i
    if i < 0 or j >= n:
        raise InvalidVertexError(f"vertex pair ({i},{j}) out of range for n={n}")
    return i * (2 * n - i - 1) // 2 + (j - i - 1)


def _uniforms(seed: int, count: int) -> np.ndarray:
    """count i.i.d. uniforms strictly inside (0,1), Philox keyed by seed."""
    gen = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    ints = gen.integers(0, 1 << 53, size=count, dtype=np.uint64)
    return (ints.astype(np.float64) + 0.5) / float(1 << 53)


def _transform(u: np.ndarray, spec: DistributionSpec) -> np.ndarray:
    if spec.kind == BERNOULLI_HALF:
        return np.where(u >= 0.5, 1.0, 0.0)
    if spec.kind == RADEMACHER:
        return np.where(u >= 0.5, 1.0, -1.0)
    if spec.kind == GAUSSIAN_STD:
        return ndtri(u)
    if spec.kind == GAUSSIAN_HALF_QUARTER:
        return 0.5 + 0.5 * ndtri(u)
    # bounded custom: inverse CDF over the sorted support
    order = np.argsort(spec.support)
    xs = np.asarray(spec.support, dtype=float)[order]
    ps = np.asarray(spec.probabilities, dtype=float)[order]
    cum = np.cumsum(ps)
    cum[-1] = 1.0
    return xs[np.searchsorted(cum, u, side="right").clip(0, len(xs) - 1)]


class DisorderMatrix:
    """Immutable weighted instance; weights in pair-index order."""

    __slots__ = ("n", "weights", "spec", "planted", "seed", "_dense")

    def __init__(self, n: int, weights: np.ndarray, spec: DistributionSpec,
                 seed: int, planted: PlantedInfo | None = None):
        if n < 2:
            raise InvalidDimensionError(f"need n >= 2, got {n}")
        w = np.asarray(weights, dtype=np.float64)
        if w.shape != (pair_count(n),):
            raise InvalidDimensionError(
                f"expected {pair_count(n)} weights for n={n}, got {w.shape}")
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "spec", spec)
        object.__setattr__(self, "planted", planted)
        object.__setattr__(self, "seed", int(seed))
        object.__setattr__(self, "_dense", None)

    def __setattr__(self, *a):
        raise AttributeError("DisorderMatrix is immutable")

    def weight(self, i: int, j: int) -> float:
        return float(self.weights[pair_index(self.n, i, j)])

    def dense(self) -> np.ndarray:
        """Symmetric n x n weight matrix (zero diagonal), cached."""
        if self._dense is None:
            n = self.n
            m = np.zeros((n, n), dtype=np.float64)
            iu = np.triu_indices(n, k=1)
            m[iu] = self.weights
            m += m.T
            m.setflags(write=False)
            object.__setattr__(self, "_dense", m)
        return self._dense

    @property
    def is_integer_valued(self) -> bool:
        if self.spec.is_integer_valued:
            if self.planted is None or float(self.planted.mu).is_integer():
                return True
        return False


def sample_disorder(n: int, spec: DistributionSpec, seed: int) -> DisorderMatrix:
    """Draw the n(n-1)/2 i.i.d. edge weights; deterministic given seed."""
    if n < 2:
        raise InvalidDimensionError(f"need n >= 2, got {n}")
    u = _uniforms(seed, pair_count(n))
    return DisorderMatrix(n, _transform(u, spec), spec, seed)


def plant_clique(matrix: DisorderMatrix, k: int, mu: float = 0.0) -> DisorderMatrix:
    """Plant a clique on vertices 0..k-1.

    Bernoulli disorder: every inside pair becomes an edge (weight 1).
    Any other disorder: inside weights are shifted by mu.
    """
    n = matrix.n
    if not 2 <= k <= n:
        raise InvalidDimensionError(f"need 2 <= K <= n, got K={k}, n={n}")
    w = matrix.weights.copy()
    inside = [pair_index(n, i, j) for i in range(k) for j in range(i + 1, k)]
    if matrix.spec.kind == BERNOULLI_HALF:
        w[inside] = 1.0
        info = PlantedInfo(k=k, mu=0.0)
    else:
        w[inside] += mu
        info = PlantedInfo(k=k, mu=float(mu))
    return DisorderMatrix(n, w, matrix.spec, matrix.seed, planted=info)


def subset_density(matrix: DisorderMatrix, vertices) -> float:
    """Sum of weights over all pairs inside the vertex set."""
    s = sorted(set(int(v) for v in vertices))
    if len(s) < 2:
        raise DomainError("need at least 2 vertices")
    n = matrix.n
    if s[0] < 0 or s[-1] >= n:
        raise InvalidVertexError(f"vertex out of range for n={n}")
    idx = np.asarray(s, dtype=np.int64)
    sub = matrix.dense()[np.ix_(idx, idx)]
    return float(np.triu(sub, k=1).sum())


def save_matrix(matrix: DisorderMatrix, path) -> None:
    """Versioned JSON serialization; floats round-trip exactly via repr."""
    doc = {
        "format": MATRIX_FORMAT,
        "version": MATRIX_FORMAT_VERSION,
        "n": matrix.n,
        "seed": matrix.seed,
        "spec": matrix.spec.to_dict(),
        "planted": (None if matrix.planted is None
                    else {"k": matrix.planted.k, "mu": matrix.planted.mu}),
        "weights": matrix.weights.tolist(),
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f)
        f.write("\n")


def load_matrix(path) -> DisorderMatrix:
    with open(path, "r", encoding="utf-8") as f:
        doc = json.load(f)
    if doc.get("format") != MATRIX_FORMAT:
        raise SchemaError(f"not a {MATRIX_FORMAT} file")
    if doc.get("version") != MATRIX_FORMAT_VERSION:
        raise SchemaError(f"unsupported matrix format version {doc.get('version')}")
    planted = doc.get("planted")
    info = None
    if planted is not None:
        info = PlantedInfo(k=int(planted["k"]), mu=float(planted["mu"]))
    return DisorderMatrix(int(doc["n"]), np.asarray(doc["weights"]),
                          DistributionSpec.from_dict(doc["spec"]),
                          int(doc["seed"]), planted=info)
