"""Tail bounds, concentration inequalities, and moment-method
estimators as numeric functions.

Every bound here dominates an exact quantity that is computable by
enumeration at tiny scale; the test suite exercises exactly those
dominations.  The first/second-moment estimators evaluate the counting
variable U_gamma = #{K-sets with density >= gamma C(K,2)}: its mean,
the exact-overlap decomposition of its second moment, and the resulting
Paley-Zygmund lower bound on P(U_gamma >= 1).

All heavy expressions are assembled in log space.  The moment machinery
is defined on the centered disorders (Rademacher, standard normal); the
mean-1/2 variants map onto them exactly through Z = (1 + Zbar)/2, i.e.
gamma_centered = 2 gamma - 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import comb, exp, log, pi, sqrt

import numpy as np
from scipy.special import log_ndtr, logsumexp, ndtr

from .asymptotics import log_binomial
from .disorder import (
    BERNOULLI_HALF,
    BOUNDED_CUSTOM,
    GAUSSIAN_HALF_QUARTER,
    GAUSSIAN_STD,
    RADEMACHER,
    DistributionSpec,
)
from .errors import DomainError, HypothesisViolatedError

# Rademacher-to-Gaussian tail domination constant, 1 + C with C ~ 14.10,
# rounded up so the bound stays valid.
RADEMACHER_DOMINATION_THETA = 15.11

# Talagrand gate: the median-vs-mean shift costs 4K sqrt(pi), so the
# "universal constant" threshold is documented as 32 sqrt(pi) K.
TALAGRAND_THRESHOLD_FACTOR = 32.0 * sqrt(pi)

_EXACT_RADEMACHER_LIMIT = 10_000
_NEG_INF = float("-inf")


def std_normal_tail(x: float) -> float:
    """P(N(0,1) >= x), erfc-based."""
    return float(ndtr(-x))


def log_std_normal_tail(x: float) -> float:
    return float(log_ndtr(-x))


def gaussian_tail(x: float) -> tuple[float, float]:
    """Mills-ratio envelope for P(N(0,1) >= x), x > 0:
    upper = phi(x)/x, lower = phi(x) x/(1+x^2)."""
    if x <= 0.0:
        raise DomainError(f"gaussian_tail needs x > 0, got {x}")
    phi = exp(-0.5 * x * x) / sqrt(2.0 * pi)
    return phi / x, phi * x / (1.0 + x * x)


def rademacher_gaussian_domination(n: int, x: float) -> float:
    """theta * P(N(0,1) >= x), dominating P(S_n >= x sqrt(n)) for every
    n; n enters only through the event being dominated."""
    if n < 1:
        raise DomainError("need n >= 1")
    if x < 1.0:
        raise DomainError(f"the domination needs x >= 1, got {x}")
    return RADEMACHER_DOMINATION_THETA * std_normal_tail(x)


def joint_rademacher_bound(n0: int, n_hat: int, beta: float) -> float:
    """Upper bound on P(X_1, X_2 >= beta) for X_i = X_0 + Xhat_i with a
    shared Rademacher sum of n0 terms and independent sums of n_hat
    terms: 3 (N0 + Nhat) exp(-gamma^2 / (1 + rho))."""
    if n0 < 1 or n_hat < 1:
        raise DomainError("need n0, n_hat >= 1")
    if beta < 0.0:
        raise DomainError("need beta >= 0")
    total = n0 + n_hat
    gamma = beta / sqrt(total)
    rho = n0 / total
    return 3.0 * total * exp(-gamma * gamma / (1.0 + rho))


def kl_divergence(x: float, p: float) -> float:
    """D(x||p) = x log(x/p) + (1-x) log((1-x)/(1-p)), with the 0 log 0
    convention; infinite when p is degenerate and x disagrees."""
    if not 0.0 <= x <= 1.0 or not 0.0 <= p <= 1.0:
        raise DomainError("kl_divergence needs x, p in [0,1]")
    if p in (0.0, 1.0):
        return 0.0 if x == p else math.inf
    out = 0.0
    if x > 0.0:
        out += x * log(x / p)
    if x < 1.0:
        out += (1.0 - x) * log((1.0 - x) / (1.0 - p))
    return out


def binomial_lower_tail(n: int, gamma: float) -> tuple[float, float]:
    """Two lower bounds on P(S_n >= gamma sqrt(n)) for a sum of n
    Rademacher signs.

    expansion: exp(-gamma^2/2 - gamma^4/(12 n)) / sqrt(2n).
    kl_exact:  exp(-n D(lambda || 1/2)) / sqrt(8 n lambda (1-lambda)),
               with lambda = m/n for m = ceil((n + gamma sqrt(n))/2),
               the exact head count of the event.  (The asymptotic form
               lambda = 1/2 + gamma/(2 sqrt n) ignores integer rounding
               and can exceed the true tail at desk scale.)
    """
    if n < 1:
        raise DomainError("need n >= 1")
    if not 0.0 < gamma < sqrt(n):
        raise DomainError(f"need 0 < gamma < sqrt(n), got {gamma}")
    expansion = exp(-gamma * gamma / 2.0 - gamma ** 4 / (12.0 * n)) / sqrt(2.0 * n)
    m = math.ceil((n + gamma * sqrt(n)) / 2.0)
    lam = m / n
    if lam >= 1.0:
        kl_exact = 2.0 ** float(-n)  # event reduces to the single all-plus point
    else:
        kl_exact = exp(-n * kl_divergence(lam, 0.5)) / sqrt(
            8.0 * n * lam * (1.0 - lam))
    return expansion, kl_exact


def savage_bound(sigma, c) -> float:
    """Multivariate Gaussian upper-orthant bound: for X ~ N(0, Sigma)
    and Delta = Sigma^{-1} c > 0 componentwise,

        P(X >= c) <= (prod Delta_i)^{-1} |Sigma^{-1}|^{1/2} (2 pi)^{-d/2}
                     exp(-c^T Sigma^{-1} c / 2).
    """
    sig = np.asarray(sigma, dtype=np.float64)
    cv = np.asarray(c, dtype=np.float64).ravel()
    d = cv.shape[0]
    if sig.shape != (d, d):
        raise DomainError("sigma must be d x d matching c")
    if not np.allclose(sig, sig.T, rtol=0.0, atol=1e-12):
        raise HypothesisViolatedError("sigma must be symmetric")
    try:
        chol = np.linalg.cholesky(sig)
    except np.linalg.LinAlgError as e:
        raise HypothesisViolatedError("sigma must be positive definite") from e
    delta = np.linalg.solve(sig, cv)
    if (delta <= 0.0).any():
        raise HypothesisViolatedError(
            "Savage hypothesis Delta = Sigma^{-1} c > 0 violated")
    log_det_sigma = 2.0 * np.log(np.diag(chol)).sum()
    quad = float(cv @ delta)
    log_bound = (-np.log(delta).sum() - 0.5 * log_det_sigma
                 - 0.5 * d * log(2.0 * pi) - 0.5 * quad)
    return float(exp(log_bound))


def bivariate_correlated_bound(k: int, l: int, gamma: float) -> float:
    """Savage bound specialized to two centered Gaussians with variance
    C(K,2) and covariance C(l,2), both exceeding gamma C(K,2)."""
    if not 2 <= l <= k - 1:
        raise DomainError(f"need 2 <= l <= K-1, got l={l}, K={k}")
    if gamma <= 0.0:
        raise DomainError("need gamma > 0")
    ck = comb(k, 2)
    cl = comb(l, 2)
    pref = (ck + cl) ** 2 / (ck ** 2 * sqrt(ck ** 2 - cl ** 2))
    return pref / (2.0 * pi * gamma * gamma) * exp(
        -gamma * gamma * ck * ck / (ck + cl))


@dataclass(frozen=True)
class ConcentrationBounds:
    """Talagrand (bounded disorder) and Borell-TIS (Gaussian) tails,
    clamped to 1 on report; talagrand_hypothesis_met records whether t
    clears the documented 32 sqrt(pi) K gate."""

    talagrand: float
    borell_tis: float
    talagrand_hypothesis_met: bool


def concentration_bounds(k: int, t: float, sigma_sq: float) -> ConcentrationBounds:
    if t <= 0.0 or sigma_sq <= 0.0:
        raise DomainError("need t > 0 and sigma_sq > 0")
    tal = min(1.0, 4.0 * exp(-t * t / (4.0 * k * k)))
    bor = min(1.0, exp(-t * t / (2.0 * sigma_sq)))
    return ConcentrationBounds(
        talagrand=tal, borell_tis=bor,
        talagrand_hypothesis_met=t >= TALAGRAND_THRESHOLD_FACTOR * k)


def _log_rademacher_tail(n_terms: int, t: float) -> float:
    """log P(S >= t) for a sum of n_terms Rademacher signs, exact by
    binomial summation in log space."""
    m = math.ceil((n_terms + t) / 2.0)
    if m > n_terms:
        return _NEG_INF
    m = max(m, 0)
    logs = [log_binomial(n_terms, j) for j in range(m, n_terms + 1)]
    return float(logsumexp(logs) - n_terms * math.log(2.0))


def _centered_tail_log(spec_kind: str, n_terms: int, t: float,
                       allow_bound: bool) -> tuple[float, bool]:
    """log P(sum of n_terms centered unit-variance draws >= t).

    Returns (log_tail, is_exact).  Rademacher uses exact binomial
    summation up to 10^4 terms and the theta-domination bound beyond;
    the Gaussian path is exact for every size.
    """
    if spec_kind == GAUSSIAN_STD:
        return log_std_normal_tail(t / sqrt(n_terms)), True
    if spec_kind == RADEMACHER:
        if n_terms <= _EXACT_RADEMACHER_LIMIT:
            return _log_rademacher_tail(n_terms, t), True
        if not allow_bound:
            raise DomainError("exact Rademacher tail limited to 1e4 terms")
        x = t / sqrt(n_terms)
        if x < 1.0:
            return 0.0, False  # trivial bound; domination needs x >= 1
        return (log(RADEMACHER_DOMINATION_THETA)
                + log_std_normal_tail(x), False)
    raise DomainError(f"no centered tail for kind {spec_kind!r}")


def _to_centered(dist: DistributionSpec, gamma: float) -> tuple[str, float]:
    """Map a threshold multiplier on C(K,2) for `dist` to the equivalent
    multiplier for its centered unit-variance version."""
    if dist.kind in (RADEMACHER, GAUSSIAN_STD):
        return dist.kind, gamma
    if dist.kind == BERNOULLI_HALF:
        return RADEMACHER, 2.0 * gamma - 1.0
    if dist.kind == GAUSSIAN_HALF_QUARTER:
        return GAUSSIAN_STD, 2.0 * gamma - 1.0
    raise DomainError(f"unsupported disorder for moment formulas: {dist.kind}")


@dataclass(frozen=True)
class FirstMomentResult:
    """E[U_gamma] in log and linear form; is_exact is False when the
    tail had to fall back to a domination or Hoeffding bound."""

    log_value: float
    value: float
    is_exact: bool


def first_moment_upper(n: int, k: int, gamma: float,
                       dist: DistributionSpec) -> FirstMomentResult:
    """E[U_gamma] = C(n,K) P(Z_S >= gamma C(K,2)), which upper bounds
    P(U_gamma >= 1)."""
    if not 2 <= k <= n:
        raise DomainError(f"need 2 <= K <= n, got K={k}, n={n}")
    ck = comb(k, 2)
    if dist.kind == BOUNDED_CUSTOM:
        # Hoeffding fallback for a bounded support; flagged inexact.
        a, b = min(dist.support), max(dist.support)
        s = gamma * ck - dist.declared_mean * ck
        if s <= 0:
            logp = 0.0
        else:
            logp = -2.0 * s * s / (ck * (b - a) ** 2)
        exact = False
    else:
        kind, gc = _to_centered(dist, gamma)
        logp, exact = _centered_tail_log(kind, ck, gc * ck, allow_bound=True)
    logv = log_binomial(n, k) + logp
    value = exp(logv) if logv < 700.0 else math.inf
    return FirstMomentResult(log_value=logv, value=value, is_exact=exact)


def s_term(n: int, k: int, m: int, l: int, gamma: float) -> float:
    """log of S_{n,K,m,l} = C(K,l) C(n-K,K-l) / C(n,K) * K^m
    * exp(gamma^2 C(K,2) C(l,2) / (C(K,2)+C(l,2)))."""
    if not 2 <= l <= k - 1:
        raise DomainError(f"need 2 <= l <= K-1, got l={l}")
    ck = comb(k, 2)
    cl = comb(l, 2)
    return (log_binomial(k, l) + log_binomial(n - k, k - l)
            - log_binomial(n, k) + m * log(k)
            + gamma * gamma * ck * cl / (ck + cl))


def auto_gamma(n: int, k: int, epsilon: float,
               dist: DistributionSpec) -> float:
    """First-moment threshold choice: the gamma making

        C(n,K) (K log(n/K))^{-1/2} exp(-gamma_c^2 C(K,2) / 2) = epsilon

    for the centered representation, mapped back to the raw scale of
    `dist`.  epsilon is the caller's vanishing sequence, one scalar per
    run."""
    if epsilon <= 0.0:
        raise DomainError("epsilon must be positive")
    if not 2 <= k < n:
        raise DomainError("auto gamma needs 2 <= K < n")
    s = k * log(n / k)
    t = log_binomial(n, k) - 0.5 * log(s) - log(epsilon)
    gc = sqrt(2.0 * max(t, 0.0) / comb(k, 2))
    if dist.kind in (RADEMACHER, GAUSSIAN_STD):
        return gc
    if dist.kind in (BERNOULLI_HALF, GAUSSIAN_HALF_QUARTER):
        return (1.0 + gc) / 2.0
    raise DomainError(f"unsupported disorder for auto gamma: {dist.kind}")


@dataclass(frozen=True)
class MomentReport:
    """First moment, exact-overlap second-moment pieces, and the
    Paley-Zygmund lower bound E[U]^2 / (A + B_upper) on P(U >= 1)."""

    n: int
    k: int
    gamma: float
    dist_kind: str
    first_moment: float
    a_term: float
    b_bar_upper: float
    pz_ratio_lower: float
    log_first_moment: float
    log_a_term: float


def second_moment_report(n: int, k: int, gamma: float,
                         dist: DistributionSpec) -> MomentReport:
    """Assemble E[U], A, the termwise upper bound on Bbar, and the
    Paley-Zygmund ratio, all in log space.

    E[U^2] = A + B over exact overlap sizes: overlaps 0, 1 (independent
    pairs) and K (identical) form A; 2 <= l <= K-1 form B, bounded
    termwise by the joint Rademacher bound or the bivariate Savage
    corollary.  Bbar = B / (C(n,K) P)^2.
    """
    if not 2 <= k <= n:
        raise DomainError(f"need 2 <= K <= n, got K={k}, n={n}")
    kind, gc = _to_centered(dist, gamma)
    ck = comb(k, 2)
    thr = gc * ck
    logp, _ = _centered_tail_log(kind, ck, thr, allow_bound=False)
    log_cnk = log_binomial(n, k)
    log_eu = log_cnk + logp

    if logp == _NEG_INF:
        return MomentReport(n=n, k=k, gamma=gamma, dist_kind=dist.kind,
                            first_moment=0.0, a_term=0.0, b_bar_upper=0.0,
                            pz_ratio_lower=0.0, log_first_moment=_NEG_INF,
                            log_a_term=_NEG_INF)

    # A: overlaps {0, 1, K}
    terms = [log_cnk + logp]  # identical pair, l = K
    if n >= 2 * k:
        terms.append(log_cnk + log_binomial(n - k, k) + 2.0 * logp)
    if n >= 2 * k - 1:
        terms.append(log(n) + log_binomial(n - 1, k - 1)
                     + log_binomial(n - k, k - 1) + 2.0 * logp)
    log_a = float(logsumexp(terms))

    # Bbar upper: sum over shared-overlap sizes of the combinatorial
    # weight times the termwise joint-tail bound, divided by p^2.  The
    # termwise bounds need a positive centered threshold; below that the
    # trivial bound 1 is the only safe choice.
    log_terms = []
    for l in range(2, k):
        if k - l > n - k:
            continue
        cl = comb(l, 2)
        if gc <= 0.0:
            log_joint = 0.0
        elif kind == RADEMACHER:
            log_joint = (log(3.0 * ck)
                         - gc * gc * ck * ck / (ck + cl))
        else:
            log_joint = (log((ck + cl) ** 2 / (ck ** 2 * sqrt(ck ** 2 - cl ** 2))
                             / (2.0 * pi * gc * gc))
                         - gc * gc * ck * ck / (ck + cl))
        log_terms.append(log_binomial(k, l) + log_binomial(n - k, k - l)
                         - log_cnk + log_joint - 2.0 * logp)
    log_bbar = float(logsumexp(log_terms)) if log_terms else _NEG_INF
    log_b = log_bbar + 2.0 * log_cnk + 2.0 * logp

    log_denom = float(logsumexp([log_a, log_b]))
    log_pz = 2.0 * log_eu - log_denom
    pz = exp(min(log_pz, 0.0))

    def _lin(lv):
        return exp(lv) if lv < 700.0 else math.inf

    return MomentReport(n=n, k=k, gamma=gamma, dist_kind=dist.kind,
                        first_moment=_lin(log_eu), a_term=_lin(log_a),
                        b_bar_upper=_lin(log_bbar) if log_terms else 0.0,
                        pz_ratio_lower=pz, log_first_moment=log_eu,
                        log_a_term=log_a)


def concentration_check(n: int, k: int, dist: DistributionSpec,
                        t_values, trials: int, seed: int) -> list[dict]:
    """Observed tail frequencies of |psi - mean psi| >= t next to the
    Talagrand and Borell-TIS bound values.

    The optimum's concentration constants are existential, so nothing is
    asserted here; each entry reports the empirical frequency for one t
    alongside the two bounds (sigma^2 taken as the single-set variance
    C(K,2) Var(Z))."""
    from .disorder import sample_disorder
    from .seeds import trial_seed
    from .solver import psi_exact

    if trials < 2:
        raise DomainError("need at least two trials")
    psis = np.empty(trials)
    for t in range(trials):
        psis[t] = psi_exact(sample_disorder(n, dist, trial_seed(seed, t)),
                            k).value
    center = psis.mean()
    out = []
    for t in t_values:
        cb = concentration_bounds(k, float(t),
                                  sigma_sq=comb(k, 2) * dist.declared_variance)
        out.append({
            "t": float(t),
            "frequency": float((np.abs(psis - center) >= t).mean()),
            "talagrand": cb.talagrand,
            "talagrand_hypothesis_met": cb.talagrand_hypothesis_met,
            "borell_tis": cb.borell_tis,
        })
    return out


def run_domination_suite(mc_samples: int = 200_000, seed: int = 20240817):
    """Quick bound-vs-exact sweep for the CLI pass/fail table.

    Exact counterparts by binomial summation or sign-pattern
    enumeration where feasible, Monte Carlo (fixed seed, 3 sigma slack)
    for the Gaussian orthant bounds.  Returns a list of
    (name, passed, detail) triples; the full grids live in the package
    test suite.
    """
    import itertools

    import numpy as np

    checks = []

    # Rademacher tail dominated by theta * Gaussian tail
    worst = math.inf
    for n in (4, 10, 20, 30):
        for x in (1.0, 1.5, 2.0):
            exact = exp(_log_rademacher_tail(n, x * sqrt(n)))
            slack = rademacher_gaussian_domination(n, x) - exact
            worst = min(worst, slack)
    checks.append(("rademacher-domination", worst >= 0.0,
                   f"min slack {worst:.3e}"))

    # joint Rademacher bound vs exhaustive sign enumeration
    n0, nh = 2, 3
    worst = math.inf
    for beta in (0.0, 1.0, 2.0, 3.0):
        exact = 0.0
        total = 0
        for signs in itertools.product((-1, 1), repeat=n0 + 2 * nh):
            x0 = sum(signs[:n0])
            x1 = x0 + sum(signs[n0:n0 + nh])
            x2 = x0 + sum(signs[n0 + nh:])
            total += 1
            exact += (x1 >= beta and x2 >= beta)
        exact /= total
        worst = min(worst, joint_rademacher_bound(n0, nh, beta) - exact)
    checks.append(("joint-rademacher", worst >= 0.0,
                   f"min slack {worst:.3e}"))

    # binomial lower tails stay below the exact tail
    worst = math.inf
    for n in (20, 50, 100):
        for gamma in (0.5, 1.0, 2.0):
            exact = exp(_log_rademacher_tail(n, gamma * sqrt(n)))
            expansion, kl = binomial_lower_tail(n, gamma)
            worst = min(worst, exact - expansion, exact - kl)
    checks.append(("binomial-lower-tail", worst >= 0.0,
                   f"min slack {worst:.3e}"))

    # Savage bound: dimension-1 Mills reduction and d=2 Monte Carlo
    x = 1.5
    mills = gaussian_tail(x)[0]
    sv = savage_bound([[1.0]], [x])
    checks.append(("savage-dim1-mills", abs(sv - mills) <= 1e-12 * mills,
                   f"|diff| {abs(sv - mills):.3e}"))

    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    z = rng.standard_normal((mc_samples, 2))
    p_hat = float(((z[:, 0] >= 2.0) & (z[:, 1] >= 2.0)).mean())
    se = sqrt(max(p_hat * (1 - p_hat), 1e-12) / mc_samples)
    sv2 = savage_bound([[1.0, 0.0], [0.0, 1.0]], [2.0, 2.0])
    checks.append(("savage-dim2-mc", sv2 >= p_hat - 3.0 * se,
                   f"bound {sv2:.3e} vs mc {p_hat:.3e}"))

    # bivariate corollary: equality with Savage, correlated Monte Carlo
    k, l, gamma = 4, 2, 0.5
    ck, cl = comb(k, 2), comb(l, 2)
    direct = bivariate_correlated_bound(k, l, gamma)
    via_savage = savage_bound([[ck, cl], [cl, ck]], [gamma * ck, gamma * ck])
    checks.append(("bivariate-equals-savage",
                   abs(direct - via_savage) <= 1e-12 * direct,
                   f"|diff| {abs(direct - via_savage):.3e}"))
    cov = np.array([[ck, cl], [cl, ck]], dtype=float)
    chol = np.linalg.cholesky(cov)
    z = rng.standard_normal((mc_samples, 2)) @ chol.T
    p_hat = float(((z[:, 0] >= gamma * ck) & (z[:, 1] >= gamma * ck)).mean())
    se = sqrt(max(p_hat * (1 - p_hat), 1e-12) / mc_samples)
    checks.append(("bivariate-mc", direct >= p_hat - 3.0 * se,
                   f"bound {direct:.3e} vs mc {p_hat:.3e}"))

    return checks
