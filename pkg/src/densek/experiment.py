"""Experiment configuration, seeded sweeps, and parallel execution.

An ExperimentConfig serializes to a canonical JSON schema (unknown
fields rejected, alpha and explicit K mutually exclusive).  run_sweep
executes one seeded trial per row with trial-level parallelism; results
are keyed by trial index and written in index order, so the worker
count never affects the output bytes.  Per-trial seeds come from the
documented splitmix64 mixer in densek.seeds.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from . import __version__, results
from .disorder import distribution_from_name, sample_disorder
from .errors import SchemaError
from .seeds import trial_seed
from .solver import psi_exact, psi_lower_heuristic

CONFIG_SCHEMA_VERSION = 1
WORKERS_ENV = "DENSEK_WORKERS"

_CONFIG_FIELDS = {
    "schema_version", "kind", "n", "k", "alpha", "distribution", "trials",
    "base_seed", "budget", "threads", "output_csv", "output_json", "params",
}
_KINDS = ("solve", "curve", "moments", "ogp", "lindeberg", "sweep",
          "formulas", "bounds-check")


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    n: int
    k: int | None = None
    alpha: float | None = None
    distribution: str = "gaussian-half-quarter"
    trials: int = 0
    base_seed: int = 0
    budget: int | None = None
    threads: int | None = None
    output_csv: str | None = None
    output_json: str | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise SchemaError(f"unknown experiment kind {self.kind!r}")
        if (self.k is None) == (self.alpha is None):
            raise SchemaError("exactly one of k and alpha must be given")
        if self.n < 2:
            raise SchemaError("need n >= 2")
        if self.trials < 0:
            raise SchemaError("trials must be nonnegative")

    def resolved_k(self) -> int:
        if self.k is not None:
            return self.k
        return math.ceil(self.n ** self.alpha)

    def to_json(self) -> str:
        doc = {"schema_version": CONFIG_SCHEMA_VERSION, "kind": self.kind,
               "n": self.n, "k": self.k, "alpha": self.alpha,
               "distribution": self.distribution, "trials": self.trials,
               "base_seed": self.base_seed, "budget": self.budget,
               "threads": self.threads, "output_csv": self.output_csv,
               "output_json": self.output_json, "params": self.params}
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        doc = json.loads(text)
        if not isinstance(doc, dict):
            raise SchemaError("config must be a JSON object")
        unknown = set(doc) - _CONFIG_FIELDS
        if unknown:
            raise SchemaError(f"unknown config fields: {sorted(unknown)}")
        version = doc.pop("schema_version", CONFIG_SCHEMA_VERSION)
        if version != CONFIG_SCHEMA_VERSION:
            raise SchemaError(f"unknown config schema version {version}")
        return cls(**doc)

    def config_hash(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()[:16]


def worker_count(config: ExperimentConfig) -> int:
    if config.threads:
        return max(1, config.threads)
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return max(1, os.cpu_count() or 1)


@dataclass(frozen=True)
class RunRecord:
    """One persisted trial: replaying (config, trial) reproduces the
    integer outputs bit-identically and the floats within 1e-9."""

    config_hash: str
    trial: int
    seed: int
    outputs: dict
    code_version: str


def replay_trial(config: "ExperimentConfig", index: int) -> RunRecord:
    """Recompute the record for one sweep trial from scratch."""
    row = _sweep_trial((config.to_json(), index))
    return RunRecord(config_hash=config.config_hash(), trial=index,
                     seed=row["seed"], outputs=row,
                     code_version=__version__)


def _sweep_trial(args) -> dict:
    """One seeded trial: sample, exact solve, derived statistics.
    Module-level so process pools can pickle it."""
    cfg_json, index = args
    config = ExperimentConfig.from_json(cfg_json)
    n = config.n
    k = config.resolved_k()
    seed = trial_seed(config.base_seed, index)
    try:
        dist = distribution_from_name(config.distribution)
        matrix = sample_disorder(n, dist, seed)
        sol = psi_exact(matrix, k, budget=config.budget)
        heur = psi_lower_heuristic(
            matrix, k, restarts=int(config.params.get("restarts", 4)),
            seed=seed)
        denom = k ** 1.5 * math.sqrt(math.log(n / k)) / 2.0 if n > k else float("nan")
        ratio = (sol.value - k * k / 4.0) / denom if denom else float("nan")
        return {"trial": index, "seed": seed, "n": n, "k": k,
                "psi": sol.value, "exact": sol.exact,
                "nodes": sol.nodes_explored, "heuristic": heur.value,
                "centered_ratio": ratio, "status": "ok", "message": ""}
    except Exception as e:  # partial failure is recorded, not fatal
        return {"trial": index, "seed": seed, "n": n, "k": k,
                "psi": float("nan"), "exact": False, "nodes": 0,
                "heuristic": float("nan"), "centered_ratio": float("nan"),
                "status": "error", "message": str(e)}


SWEEP_COLUMNS = ["trial", "seed", "n", "k", "psi", "exact", "nodes",
                 "heuristic", "centered_ratio", "status", "message"]


def run_sweep(config: ExperimentConfig) -> dict:
    """One CSV row per trial plus a JSON summary.

    The summary includes the finite-size check statistic
    (mean psi - K^2/4) / (K^{3/2} sqrt(log(n/K)) / 2) whose drift toward
    1 tracks the leading-order prediction.
    """
    if config.output_csv:
        parent = os.path.dirname(os.path.abspath(config.output_csv))
        while parent and not os.path.isdir(parent):
            parent = os.path.dirname(parent)
        if not parent or not os.access(parent, os.W_OK):
            raise OSError(f"output path not writable: {config.output_csv}")
    started = time.time()
    cfg_json = config.to_json()
    tasks = [(cfg_json, i) for i in range(config.trials)]
    nworkers = worker_count(config)
    if nworkers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=nworkers) as pool:
            rows = list(pool.map(_sweep_trial, tasks))
    else:
        rows = [_sweep_trial(t) for t in tasks]
    rows.sort(key=lambda r: r["trial"])

    n, k = config.n, config.resolved_k()
    ok_rows = [r for r in rows if r["status"] == "ok"]
    psis = [r["psi"] for r in ok_rows]
    summary = {
        "config_hash": config.config_hash(),
        "code_version": __version__,
        "kind": config.kind,
        "n": n, "k": k,
        "trials": config.trials,
        "completed": len(ok_rows),
        "wall_clock_seconds": None,  # filled below
        "mean_psi": (sum(psis) / len(psis)) if psis else None,
    }
    if psis and n > k:
        denom = k ** 1.5 * math.sqrt(math.log(n / k)) / 2.0
        mean_psi = sum(psis) / len(psis)
        var = (sum((p - mean_psi) ** 2 for p in psis) / (len(psis) - 1)
               if len(psis) > 1 else 0.0)
        summary["psi_standard_error"] = math.sqrt(var / len(psis))
        summary["centered_ratio_of_mean"] = (mean_psi - k * k / 4.0) / denom
    summary["wall_clock_seconds"] = time.time() - started

    if config.output_csv:
        results.write_csv(config.output_csv, SWEEP_COLUMNS, rows)
    if config.output_json:
        results.write_json(config.output_json, summary)
    return {"rows": rows, "summary": summary}
