"""Overlap-gap-property experiments on planted-clique instances.

The overlap profile z -> psi(z) is compared against the first-moment
curve Gamma(z), the curve's dip below its low-overlap anchor is located
numerically, witness parameters (zeta1, zeta2, r1, r2) are tested
against profiles, and the decomposition lower bound for psi(m) is
checked instance by instance.

Desk-scale honesty: the underlying theorems are asymptotic.  The
experiments record gap signs, margins and domination frequencies, and
budget-limited solves produce first-class indeterminate verdicts, never
a coerced pass or fail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import comb, log, sqrt

import numpy as np

from .asymptotics import first_moment_curve
from .disorder import (
    BERNOULLI_HALF,
    DisorderMatrix,
    DistributionSpec,
    plant_clique,
    sample_disorder,
)
from .errors import DomainError, HypothesisViolatedError, MissingPlantError
from .seeds import trial_seed
from .solver import OverlapProfile, psi_exact, psi_overlap, psi_profile

DEFAULT_C0 = 2.0  # anchor multiplier; the analysis only needs C0 >= 1
_DOM_TOL = 1e-9


@dataclass(frozen=True)
class OgpParameters:
    """Thresholds of the overlap-gap definition: overlap band
    [zeta1, zeta2] and density levels r1 < r2."""

    zeta1: float
    zeta2: float
    r1: float
    r2: float

    def __post_init__(self):
        if not self.zeta1 < self.zeta2:
            raise DomainError("need zeta1 < zeta2")
        if not self.r1 < self.r2:
            raise DomainError("need r1 < r2")


@dataclass(frozen=True)
class OgpDiagnosis:
    """Witness verdicts for one profile.

    part1: dense sets exist both at overlap <= zeta1 and >= zeta2.
    part2: every overlap inside [zeta1, zeta2] stays below r1.
    indeterminate: some band overlap was not solved exactly (or is
    missing from the profile), so part2 cannot be certified.
    """

    part1: bool
    part2: bool
    indeterminate: bool
    low_witnesses: tuple[int, ...]
    high_witnesses: tuple[int, ...]
    band_violations: tuple[int, ...]


def ogp_witness(profile: OverlapProfile, params: OgpParameters) -> OgpDiagnosis:
    zs = profile.z_values
    psis = profile.psi_values
    flags = profile.exact_flags

    low = tuple(z for z, p in zip(zs, psis)
                if z <= params.zeta1 and p >= params.r2)
    high = tuple(z for z, p in zip(zs, psis)
                 if z >= params.zeta2 and p >= params.r2)

    band = [(z, p, f) for z, p, f in zip(zs, psis, flags)
            if params.zeta1 <= z <= params.zeta2]
    expected_band = [z for z in range(math.ceil(params.zeta1),
                                      math.floor(params.zeta2) + 1)
                     if zs and zs[0] <= z <= zs[-1]]
    indeterminate = (len(band) < len(expected_band)
                     or any(not f for _, _, f in band))
    violations = tuple(z for z, p, _ in band if p > params.r1)

    return OgpDiagnosis(part1=bool(low) and bool(high),
                        part2=not violations,
                        indeterminate=indeterminate,
                        low_witnesses=low, high_witnesses=high,
                        band_violations=violations)


@dataclass(frozen=True)
class DipResult:
    """Location of the first-moment curve's dip below its anchor.

    margin = Gamma(z0) - max Gamma over [interval_lo, interval_hi]; the
    interval is the half-depth run around the scanned minimum (largest
    contiguous set of z whose curve value stays below the midpoint
    between anchor and minimum).  found=False is the no-dip outcome,
    not an error.
    """

    found: bool
    z0: int
    anchor_value: float
    interval_lo: int
    interval_hi: int
    margin: float
    margin_scaled: float
    z_min: int
    min_value: float
    cap_inequality_holds: bool


def dip_locator(n: int, k: int, epsilon: float,
                c0: float = DEFAULT_C0) -> DipResult:
    """Scan the exact curve for the dip below Gamma(z0), z0 anchored at
    floor(c0 K^2 / n).

    The scan window always contains [sqrt(K log K)/10, 10 sqrt(K log K)]
    clipped to the valid overlap range.  epsilon enters through the
    reported cap inequality Gamma(z0) <= Gamma(floor((1-eps) K)).
    """
    if not 0.0 < epsilon < 1.0:
        raise DomainError("need 0 < epsilon < 1")
    domain_lo = k * k // n
    z0 = max(int(c0 * k * k / n), domain_lo)
    if z0 >= k:
        raise DomainError(
            f"anchor z0={z0} is not below K={k}: the dip statement's "
            f"low-overlap regime does not apply")
    anchor = first_moment_curve(n, k, z0)
    if anchor is None:
        raise DomainError(f"curve undefined at the anchor z0={z0}")

    s = sqrt(k * log(k))
    lo = max(domain_lo, int(math.floor(s / 10.0)))
    hi = min(k, int(math.ceil(10.0 * s)))
    zs = list(range(lo, hi + 1))
    vals = {z: first_moment_curve(n, k, z) for z in zs}
    defined = [(z, v) for z, v in vals.items() if v is not None]
    if not defined:
        raise DomainError("curve undefined on the whole scan window")

    cap_z = max(min(int((1.0 - epsilon) * k), k), domain_lo)
    cap_val = first_moment_curve(n, k, cap_z)
    cap_holds = cap_val is not None and anchor <= cap_val + _DOM_TOL

    z_star, v_star = min(defined, key=lambda t: t[1])
    if v_star >= anchor:
        return DipResult(found=False, z0=z0, anchor_value=anchor,
                         interval_lo=z_star, interval_hi=z_star,
                         margin=0.0, margin_scaled=0.0,
                         z_min=z_star, min_value=v_star,
                         cap_inequality_holds=cap_holds)

    threshold = anchor - 0.5 * (anchor - v_star)
    ilo = z_star
    while ilo - 1 >= lo and vals.get(ilo - 1) is not None \
            and vals[ilo - 1] <= threshold:
        ilo -= 1
    ihi = z_star
    while ihi + 1 <= hi and vals.get(ihi + 1) is not None \
            and vals[ihi + 1] <= threshold:
        ihi += 1
    interval_max = max(vals[z] for z in range(ilo, ihi + 1))
    margin = anchor - interval_max
    return DipResult(found=True, z0=z0, anchor_value=anchor,
                     interval_lo=ilo, interval_hi=ihi, margin=margin,
                     margin_scaled=margin / (k * log(k)),
                     z_min=z_star, min_value=v_star,
                     cap_inequality_holds=cap_holds)


@dataclass(frozen=True)
class DominationResult:
    """Empirical frequency of psi(z) <= Gamma(z) over (instance, z)
    pairs; inexact or curve-undefined pairs are excluded and counted."""

    frequency: float
    evaluated: int
    dominated: int
    excluded: int
    per_z: dict


def curve_dominates_profile(n: int, k: int, dist: DistributionSpec,
                            trials: int, seed: int,
                            budget: int | None = None) -> DominationResult:
    """Sample planted instances and measure how often the first-moment
    curve dominates the whole overlap profile (Bernoulli planting only:
    that is the setting of the statement being instrumented)."""
    if dist.kind != BERNOULLI_HALF:
        raise HypothesisViolatedError(
            "curve domination is stated for Bernoulli planting")
    evaluated = dominated = excluded = 0
    per_z: dict[int, tuple[int, int]] = {}
    for t in range(trials):
        m = plant_clique(sample_disorder(n, dist, trial_seed(seed, t)), k)
        prof = psi_profile(m, k, budget=budget)
        for z, psi, gamma, exact in zip(prof.z_values, prof.psi_values,
                                        prof.gamma_values, prof.exact_flags):
            if not exact or gamma is None:
                excluded += 1
                continue
            evaluated += 1
            ok = psi <= gamma + _DOM_TOL
            dominated += ok
            a, b = per_z.get(z, (0, 0))
            per_z[z] = (a + ok, b + 1)
    freq = dominated / evaluated if evaluated else 0.0
    return DominationResult(frequency=freq, evaluated=evaluated,
                            dominated=dominated, excluded=excluded,
                            per_z=per_z)


def _induced_matrix(matrix: DisorderMatrix, vertices) -> DisorderMatrix:
    idx = np.asarray(sorted(vertices), dtype=np.int64)
    m = len(idx)
    flat = np.empty(m * (m - 1) // 2)
    W = matrix.dense()
    t = 0
    for a in range(m):
        for b in range(a + 1, m):
            flat[t] = W[idx[a], idx[b]]
            t += 1
    return DisorderMatrix(m, flat, matrix.spec, matrix.seed)


@dataclass(frozen=True)
class DecompositionResult:
    lhs: float
    rhs: float
    holds: bool
    exact: bool


def decomposition_lower_bound(matrix: DisorderMatrix, k: int, m: int,
                              a_n: float,
                              budget: int | None = None) -> DecompositionResult:
    """Check psi_K(m) >= C(m,2) [+ psi_m(PC) off the Bernoulli path]
    + psi_{K-m}(G0) + (K-m)m/2 - a_n sqrt((K-m)m)/2, with G0 the
    disorder induced on the non-clique vertices.

    The planted-clique internal term psi_m(PC) appears only for
    non-Bernoulli planting, where inside weights are random; Bernoulli
    planting forces them, so C(m,2) already is the inside value.
    """
    if matrix.planted is None:
        raise MissingPlantError("decomposition needs a planted matrix")
    if not 0 < m <= k:
        raise DomainError(f"need 0 < m <= K, got m={m}")
    kpc = matrix.planted.k
    n = matrix.n

    exact = True
    lhs_sol = psi_overlap(matrix, k, m, budget=budget)
    exact &= lhs_sol.exact

    rhs = float(comb(m, 2))
    if matrix.spec.kind != BERNOULLI_HALF and m >= 2:
        # inside-clique weights carry the planting shift already
        pc = _induced_matrix(matrix, range(kpc))
        pc_sol = psi_exact(pc, m, budget=budget)
        exact &= pc_sol.exact
        rhs += pc_sol.value
    if k - m >= 2:
        g0 = _induced_matrix(matrix, range(kpc, n))
        g0_sol = psi_exact(g0, k - m, budget=budget)
        exact &= g0_sol.exact
        rhs += g0_sol.value
    rhs += (k - m) * m / 2.0 - a_n * sqrt((k - m) * m) / 2.0

    return DecompositionResult(lhs=lhs_sol.value, rhs=rhs,
                               holds=lhs_sol.value >= rhs - _DOM_TOL,
                               exact=exact)


def run_ogp_experiment(config) -> dict:
    """Drive profiles, curve overlays, witness verdicts and the gap
    statistic for `config.trials` planted instances; returns the result
    dict and persists CSV/JSON when the config names output paths.

    CSV columns: seed, z, psi, gamma, exact_flag.  The witness
    parameters come from the curve: the overlap band is the dip
    interval, r2 = min(psi(z_low), psi(floor(K/2))) per instance and
    r1 = r2 - margin, with margin the curve's dip margin.
    """
    from . import results as _results
    from .disorder import distribution_from_name

    n = config.n
    k = config.resolved_k()
    dist = distribution_from_name(config.distribution)
    c0 = config.params.get("c0", DEFAULT_C0)
    epsilon = config.params.get("epsilon", 0.5)

    # at desk scale the curve can be out of regime on the whole window;
    # the experiment still runs, just without curve-derived witnesses
    try:
        dip = dip_locator(n, k, epsilon, c0)
    except DomainError:
        dip = None
    rows = []
    verdicts = []
    gap_stats = []
    for t in range(config.trials):
        seed_t = trial_seed(config.base_seed, t)
        mat = plant_clique(sample_disorder(n, dist, seed_t), k,
                           mu=config.params.get("mu", 0.0))
        prof = psi_profile(mat, k, budget=config.budget)
        for z, psi, gam, exact in zip(prof.z_values, prof.psi_values,
                                      prof.gamma_values, prof.exact_flags):
            rows.append({"seed": seed_t, "z": z, "psi": psi,
                         "gamma": float("nan") if gam is None else gam,
                         "exact_flag": exact})
        lookup = dict(zip(prof.z_values, prof.psi_values))
        anchor_z = dip.z0 if dip is not None else k * k // n
        z_low = min(max(anchor_z, prof.z_values[0]), prof.z_values[-1])
        z_half = min(max(k // 2, prof.z_values[0]), prof.z_values[-1])
        r2 = min(lookup[z_low], lookup[z_half])
        if dip is not None and dip.found:
            band = [p for z, p in lookup.items()
                    if dip.interval_lo <= z <= dip.interval_hi]
            gap_stats.append((r2 - max(band)) if band else float("nan"))
            # half-open band around the dip so zeta1 < zeta2 even for a
            # single-point interval
            params = OgpParameters(zeta1=dip.interval_lo - 0.5,
                                   zeta2=dip.interval_hi + 0.5,
                                   r1=r2 - dip.margin, r2=r2)
            verdicts.append(ogp_witness(prof, params))
        else:
            gap_stats.append(float("nan"))

    summary = {
        "n": n, "k": k, "trials": config.trials,
        "distribution": config.distribution,
        "dip": ({"found": dip.found, "z0": dip.z0,
                 "interval": [dip.interval_lo, dip.interval_hi],
                 "margin": dip.margin, "margin_scaled": dip.margin_scaled}
                if dip is not None else
                {"found": False, "reason": "curve out of regime"}),
        "gap_statistic": {
            "mean": (float(np.mean(finite_gaps))
                     if (finite_gaps := [g for g in gap_stats
                                         if not math.isnan(g)]) else None),
            "positive_fraction": (float(np.mean([g > 0 for g in finite_gaps]))
                                  if finite_gaps else None),
        },
        "witness": {
            "count": len(verdicts),
            "part1": sum(v.part1 for v in verdicts),
            "part2": sum(v.part2 for v in verdicts),
            "indeterminate": sum(v.indeterminate for v in verdicts),
        },
    }
    if config.output_csv:
        _results.write_csv(config.output_csv,
                           ["seed", "z", "psi", "gamma", "exact_flag"], rows)
    if config.output_json:
        _results.write_json(config.output_json, summary)
    return {"rows": rows, "summary": summary}
