"""Command-line interface.

Subcommands: sample, solve, curve, formulas, moments, bounds-check,
ogp, lindeberg, sweep, summarize.  Configs come from --config JSON
files or flags; exit codes are 0 on success, 1 on experiment-level
failure, 2 on usage errors (argparse's convention).
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__, asymptotics, bounds, lindeberg, ogp, results
from .disorder import (
    distribution_from_name,
    load_matrix,
    plant_clique,
    sample_disorder,
    save_matrix,
)
from .errors import DensekError
from .experiment import ExperimentConfig, run_sweep
from .seeds import trial_seed
from .solver import psi_exact, psi_lower_heuristic, psi_overlap

_DISTS = ["bernoulli-half", "rademacher", "gaussian-half-quarter",
          "gaussian-std"]


def _emit(payload, out_path):
    text = json.dumps(payload, indent=2, sort_keys=True)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as f:
            f.write(text + "\n")
    else:
        print(text)


def _cmd_sample(args) -> int:
    spec = distribution_from_name(args.dist)
    m = sample_disorder(args.n, spec, args.seed)
    if args.plant_k:
        m = plant_clique(m, args.plant_k, mu=args.mu)
    save_matrix(m, args.out)
    return 0


def _load_or_sample(args):
    if args.matrix:
        return load_matrix(args.matrix)
    m = sample_disorder(args.n, distribution_from_name(args.dist), args.seed)
    if args.plant_k:
        m = plant_clique(m, args.plant_k, mu=args.mu)
    return m


def _cmd_solve(args) -> int:
    m = _load_or_sample(args)
    if args.heuristic:
        sol = psi_lower_heuristic(m, args.k, restarts=args.restarts,
                                  seed=args.seed)
    elif args.z is not None:
        sol = psi_overlap(m, args.k, args.z, budget=args.budget)
    else:
        sol = psi_exact(m, args.k, budget=args.budget)
    _emit({"vertices": list(sol.vertices), "value": sol.value,
           "exact": sol.exact, "nodes_explored": sol.nodes_explored,
           "budget_exhausted": sol.budget_exhausted}, args.out)
    return 0


def _cmd_curve(args) -> int:
    nan = float("nan")
    rows = [{"z": p.z,
             "gamma": nan if p.gamma is None else p.gamma,
             "gaussian_gamma": (nan if p.gaussian_gamma is None
                                else p.gaussian_gamma),
             "increment": nan if p.increment is None else p.increment}
            for p in asymptotics.moment_curve_points(args.n, args.k)]
    if args.out:
        results.write_csv(args.out, ["z", "gamma", "gaussian_gamma",
                                     "increment"], rows)
    else:
        print("schema_version,z,gamma,gaussian_gamma,increment")
        for r in rows:
            print(",".join([str(results.CSV_SCHEMA_VERSION)]
                           + [results.format_value(r[c])
                              for c in ("z", "gamma", "gaussian_gamma",
                                        "increment")]))
    return 0


def _cmd_formulas(args) -> int:
    est = asymptotics.asymptotic_estimates(args.n, args.k)
    _emit({"n": est.n, "k": est.k, "v": est.v, "l": est.l, "u": est.u,
           "leading": est.leading}, args.out)
    return 0


def _cmd_moments(args) -> int:
    dist = distribution_from_name(args.dist)
    gamma = args.gamma
    if gamma is None:
        gamma = bounds.auto_gamma(args.n, args.k, args.epsilon, dist)
    rep = bounds.second_moment_report(args.n, args.k, gamma, dist)
    first = bounds.first_moment_upper(args.n, args.k, gamma, dist)
    _emit({"n": rep.n, "k": rep.k, "gamma": rep.gamma,
           "distribution": rep.dist_kind,
           "first_moment": rep.first_moment,
           "log_first_moment": first.log_value,
           "first_moment_exact_tail": first.is_exact,
           "a_term": rep.a_term, "b_bar_upper": rep.b_bar_upper,
           "pz_ratio_lower": rep.pz_ratio_lower}, args.out)
    return 0


def _cmd_bounds_check(args) -> int:
    checks = bounds.run_domination_suite(mc_samples=args.mc_samples)
    width = max(len(name) for name, _, _ in checks)
    failed = 0
    for name, ok, detail in checks:
        print(f"{name:<{width}}  {'PASS' if ok else 'FAIL'}  {detail}")
        failed += not ok
    return 1 if failed else 0


def _cmd_ogp(args) -> int:
    with open(args.config, "r", encoding="utf-8") as f:
        config = ExperimentConfig.from_json(f.read())
    out = ogp.run_ogp_experiment(config)
    if not config.output_json:
        _emit(out["summary"], None)
    return 0


def _cmd_lindeberg(args) -> int:
    dist = distribution_from_name(args.dist)
    beta = args.beta if args.beta is not None else \
        lindeberg.default_beta(args.n, args.k)
    if args.mode == "path":
        plan = lindeberg.make_interpolation_plan(args.n, dist, args.seed)
        values = lindeberg.interpolation_path(plan, args.k, beta)
        diffs = values[1:] - values[:-1]
        payload = {"mode": "path", "n": args.n, "k": args.k, "beta": beta,
                   "seed": args.seed, "distribution": args.dist,
                   "values": values.tolist(),
                   "telescoping_residual": abs(float(values[-1] - values[0]
                                                     - diffs.sum()))}
    elif args.mode == "identity":
        m = sample_disorder(args.n, dist, args.seed)
        residual = lindeberg.gibbs_sum_identity(m, args.k, beta)
        payload = {"mode": "identity", "n": args.n, "k": args.k,
                   "beta": beta, "seed": args.seed,
                   "distribution": args.dist,
                   "gibbs_identity_residual": residual}
        if args.n * (args.n - 1) // 2 <= lindeberg.MULTIPLICITY_EDGE_LIMIT:
            x = sample_disorder(args.n, distribution_from_name(
                "gaussian-half-quarter"), trial_seed(args.seed, 0)).weights
            y = sample_disorder(args.n, dist, trial_seed(args.seed, 1)).weights
            lhs, rhs, res = lindeberg.aggregated_multiplicity_check(
                args.n, args.k, beta, x, y)
            payload["multiplicity_lhs"] = lhs
            payload["multiplicity_rhs"] = rhs
            payload["multiplicity_residual"] = res
    else:
        res = lindeberg.universality_gap(args.n, args.k, beta, dist,
                                         args.trials, args.seed)
        payload = {"mode": "gap", "n": args.n, "k": args.k, "beta": beta,
                   "seed": args.seed, "distribution": args.dist,
                   "trials": res.trials, "gap_estimate": res.gap_estimate,
                   "ci_halfwidth": res.ci_halfwidth, "budget": res.budget,
                   "mean_gaussian": res.mean_gaussian,
                   "mean_target": res.mean_target}
    _emit(payload, args.out)
    return 0


def _cmd_sweep(args) -> int:
    with open(args.config, "r", encoding="utf-8") as f:
        config = ExperimentConfig.from_json(f.read())
    out = run_sweep(config)
    if not config.output_json:
        _emit(out["summary"], None)
    return 0


def _cmd_summarize(args) -> int:
    _emit(results.summarize(args.results), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="densek",
                                description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def add_instance_flags(sp):
        sp.add_argument("--matrix", help="path to a saved matrix")
        sp.add_argument("--n", type=int)
        sp.add_argument("--dist", choices=_DISTS,
                        default="gaussian-half-quarter")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--plant-k", type=int, default=0)
        sp.add_argument("--mu", type=float, default=0.0)

    sp = sub.add_parser("sample", help="sample a disorder matrix to a file")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--dist", choices=_DISTS, default="gaussian-half-quarter")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--plant-k", type=int, default=0)
    sp.add_argument("--mu", type=float, default=0.0)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=_cmd_sample)

    sp = sub.add_parser("solve", help="exact or heuristic densest K-set")
    add_instance_flags(sp)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--z", type=int, help="restrict to planted overlap z")
    sp.add_argument("--budget", type=int)
    sp.add_argument("--heuristic", action="store_true")
    sp.add_argument("--restarts", type=int, default=8)
    sp.add_argument("--out")
    sp.set_defaults(func=_cmd_solve)

    sp = sub.add_parser("curve", help="first-moment curve CSV")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--out")
    sp.set_defaults(func=_cmd_curve)

    sp = sub.add_parser("formulas", help="V/L/U and the leading prediction")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--out")
    sp.set_defaults(func=_cmd_formulas)

    sp = sub.add_parser("moments", help="first/second moment report")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--gamma", type=float,
                    help="threshold multiplier; omit for the auto choice")
    sp.add_argument("--epsilon", type=float, default=0.1,
                    help="vanishing-sequence scalar for auto gamma")
    sp.add_argument("--dist", choices=_DISTS, default="rademacher")
    sp.add_argument("--out")
    sp.set_defaults(func=_cmd_moments)

    sp = sub.add_parser("bounds-check", help="bound domination table")
    sp.add_argument("--mc-samples", type=int, default=200_000)
    sp.set_defaults(func=_cmd_bounds_check)

    sp = sub.add_parser("ogp", help="overlap-gap experiment from a config")
    sp.add_argument("--config", required=True)
    sp.set_defaults(func=_cmd_ogp)

    sp = sub.add_parser("lindeberg", help="smooth-max interpolation tools")
    sp.add_argument("mode", choices=["path", "identity", "gap"])
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--beta", type=float)
    sp.add_argument("--dist", choices=_DISTS, default="bernoulli-half")
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")
    sp.set_defaults(func=_cmd_lindeberg)

    sp = sub.add_parser("sweep", help="seeded Monte Carlo sweep from a config")
    sp.add_argument("--config", required=True)
    sp.set_defaults(func=_cmd_sweep)

    sp = sub.add_parser("summarize", help="summary JSON for a results CSV")
    sp.add_argument("results")
    sp.add_argument("--out")
    sp.set_defaults(func=_cmd_summarize)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "solve" and not args.matrix and args.n is None:
        parser.error("solve needs --matrix or --n")
    try:
        return args.func(args)
    except (DensekError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
