"""Seeded Monte Carlo experiment runner with CSV/JSON emission.

A cell is one (setup, n, d, correlation-or-mask-rate, eps, error) choice; a
trial generates one contaminated dataset and runs every requested method on
it, scoring against the true coefficients under the population covariance.
Per-trial seeds are derived by hashing the cell identity, so any degree of
parallelism produces byte-identical output after the final sort.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ._rounding import floor_int
from .regression import (
    GdConfig,
    RegressorPair,
    aasd,
    best_mom,
    divisors,
    fit_least_squares,
    loss_l2,
    mom_regression,
    plug_in,
)
from .synthdata import (
    OUTLIER_RESPONSE,
    Dataset,
    ErrorDist,
    RngSeed,
    contaminate_a,
    contaminate_b,
    gen_setup_a,
    gen_setup_b,
)

__all__ = [
    "METHODS",
    "DEFAULT_EPS_GRID",
    "ExperimentConfig",
    "TrialRecord",
    "SummaryStats",
    "trial_seed",
    "trim_count",
    "default_mom_blocks",
    "run_trial",
    "run_cell",
    "run_experiment",
    "summarize",
    "delta_percent",
    "emit",
    "load_records_json",
    "table_grid_configs",
]

METHODS = ("TM-AASD", "TM-PlugIn", "OLS", "MoM", "Best-MoM")

DEFAULT_EPS_GRID = (0.0, 0.025, 0.05, 0.075, 0.1, 0.2, 0.3, 0.4)

# RngSeed stream indices: data generation, contamination, MoM shuffling,
# iterate initialization.
_STREAM_DATA = 0
_STREAM_CONTAM = 1
_STREAM_MOM = 2
_STREAM_INIT = 3

INIT_RULES = ("random", "zeros")

TRIALS_HEADER = "setup,n,d,rho_or_p,eps,error_dist,method,trial,seed,loss"
SUMMARY_HEADER = (
    "setup,n,d,rho_or_p,eps,error_dist,method,mean,std,min,q1,median,q3,max"
)


@dataclass(frozen=True)
class ExperimentConfig:
    """One fully seeded experimental grid.

    ``rho`` applies to Setup A, ``p`` to Setup B. The trimming rule is
    k = floor(eps*n) + trim_extra; the true coefficient vector is all ones.
    Best-MoM's oracle access to the true coefficients makes it an
    infeasible baseline, recorded as such in emitted metadata.

    ``init_rule`` picks the iterate pair every descent method starts from:
    "random" draws a seeded standard-normal pair per trial, "zeros" uses
    the zero pair. An exactly equal pair makes every loss difference tie,
    so the first active set of the refit heuristic is decided purely by
    tie-breaking and keeps contaminated rows; the random default avoids
    that degeneracy while staying fully reproducible.
    """

    setup: str
    n: int
    d: int = 20
    rho: float = 0.0
    p: float = 0.3
    error_dist: ErrorDist = field(default_factory=ErrorDist.normal)
    eps_grid: Tuple[float, ...] = DEFAULT_EPS_GRID
    methods: Tuple[str, ...] = METHODS
    trials: int = 240
    base_seed: int = 0
    trim_extra: int = 5
    mom_blocks: Optional[int] = None
    outlier_response: float = OUTLIER_RESPONSE
    gd: GdConfig = field(default_factory=GdConfig)
    plugin_iters: int = 2
    init_rule: str = "random"

    def __post_init__(self) -> None:
        if self.init_rule not in INIT_RULES:
            raise ValueError(f"init_rule must be one of {INIT_RULES}")
        if self.setup not in ("A", "B"):
            raise ValueError(f"setup must be 'A' or 'B', got {self.setup!r}")
        if self.n < 1 or self.d < 1:
            raise ValueError("n and d must be positive integers")
        if self.trials < 1:
            raise ValueError("trials must be a positive integer")
        if any(not 0.0 <= e < 0.5 for e in self.eps_grid):
            raise ValueError("every eps must lie in [0, 1/2)")
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            raise ValueError(f"unknown methods {unknown}; choose from {METHODS}")
        if self.setup == "A" and not 0.0 <= self.rho < 1.0:
            raise ValueError(f"rho must lie in [0, 1), got {self.rho}")
        if self.setup == "B" and not 0.0 < self.p <= 1.0:
            raise ValueError(f"p must lie in (0, 1], got {self.p}")
        if self.setup == "B" and self.error_dist.kind != "normal":
            raise ValueError("Setup B uses standard normal errors only")

    @property
    def rho_or_p(self) -> float:
        return self.rho if self.setup == "A" else self.p

    @property
    def beta_star(self) -> np.ndarray:
        return np.ones(self.d)


@dataclass(frozen=True)
class TrialRecord:
    """One (cell, method, trial) outcome. wall_time is informational only:
    it is excluded from emitted files and from equality comparisons."""

    setup: str
    n: int
    d: int
    rho_or_p: float
    eps: float
    error_dist: str
    method: str
    trial: int
    seed: int
    loss: float
    wall_time: float = field(default=0.0, compare=False)

    @property
    def cell_key(self) -> tuple:
        return (self.setup, self.n, self.d, self.rho_or_p, self.eps, self.error_dist)

    @property
    def sort_key(self) -> tuple:
        return self.cell_key + (self.method, self.trial)


@dataclass(frozen=True)
class SummaryStats:
    """Loss summary over the trials of one (cell, method) group."""

    mean: float
    std: float
    min: float
    q1: float
    median: float
    q3: float
    max: float

    @classmethod
    def from_losses(cls, losses) -> "SummaryStats":
        arr = np.asarray(losses, dtype=float)
        if arr.size == 0:
            raise ValueError("cannot summarize an empty group")
        std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
        q1, med, q3 = (float(q) for q in np.percentile(arr, [25.0, 50.0, 75.0]))
        return cls(
            mean=float(arr.mean()),
            std=std,
            min=float(arr.min()),
            q1=q1,
            median=med,
            q3=q3,
            max=float(arr.max()),
        )


def trial_seed(
    base_seed: int,
    setup: str,
    n: int,
    d: int,
    rho_or_p: float,
    eps: float,
    error_label: str,
    trial: int,
) -> int:
    """64-bit per-trial seed from a hash of the cell identity.

    Distinct (cell, trial) pairs get distinct seeds without coordination,
    which keeps parallel scheduling irrelevant to the output.
    """
    key = "|".join(
        [
            str(int(base_seed)),
            setup,
            str(int(n)),
            str(int(d)),
            "%.17g" % rho_or_p,
            "%.17g" % eps,
            error_label,
            str(int(trial)),
        ]
    )
    digest = hashlib.sha256(key.encode("ascii")).digest()
    return int.from_bytes(digest[:8], "big")


def trim_count(eps: float, n: int, extra: int = 5) -> int:
    """Benchmark trimming rule: k = floor(eps*n) + extra."""
    return floor_int(eps * n) + extra


def default_mom_blocks(eps: float, n: int) -> int:
    """Bucket count for the plain MoM method: min(n, 2 floor(eps*n) + 5)."""
    return min(n, 2 * floor_int(eps * n) + 5)


def _make_trial_data(config: ExperimentConfig, eps: float, seed: int) -> Dataset:
    beta = config.beta_star
    if config.setup == "A":
        clean = gen_setup_a(
            config.n, config.d, config.rho, config.error_dist, beta,
            RngSeed(seed, _STREAM_DATA),
        )
        return contaminate_a(
            clean, eps, RngSeed(seed, _STREAM_CONTAM), config.outlier_response
        )
    clean, mask = gen_setup_b(
        config.n, config.d, config.p, beta, RngSeed(seed, _STREAM_DATA)
    )
    return contaminate_b(clean, mask, eps, RngSeed(seed, _STREAM_CONTAM))


def _initial_pair(config: ExperimentConfig, seed: int) -> RegressorPair:
    if config.init_rule == "zeros":
        return RegressorPair.zeros(config.d)
    gen = RngSeed(seed, _STREAM_INIT).generator()
    return RegressorPair(
        gen.standard_normal(config.d), gen.standard_normal(config.d)
    )


def _fit_method(
    method: str,
    data: Dataset,
    config: ExperimentConfig,
    eps: float,
    seed: int,
) -> np.ndarray:
    k = trim_count(eps, config.n, config.trim_extra)
    init = _initial_pair(config, seed)
    if method == "OLS":
        return fit_least_squares(data.X, data.y)
    if method == "TM-AASD":
        return aasd(data, k, config.gd, init).beta_m
    if method == "TM-PlugIn":
        return plug_in(data, k, init, config.plugin_iters).beta_m
    if method == "MoM":
        blocks = config.mom_blocks or default_mom_blocks(eps, config.n)
        return mom_regression(
            data, blocks, config.gd, init, RngSeed(seed, _STREAM_MOM)
        ).beta_m
    if method == "Best-MoM":
        _, pair = best_mom(
            data,
            divisors(config.n),
            config.gd,
            init,
            RngSeed(seed, _STREAM_MOM),
            data.beta_star,
            data.pop_cov,
        )
        return pair.beta_m
    raise ValueError(f"unknown method {method!r}")


def run_trial(config: ExperimentConfig, eps: float, trial: int) -> List[TrialRecord]:
    """All requested methods on one shared contaminated dataset.

    A solver failure is recorded as an infinite-loss marker row rather than
    aborting the cell.
    """
    seed = trial_seed(
        config.base_seed, config.setup, config.n, config.d,
        config.rho_or_p, eps, config.error_dist.label, trial,
    )
    data = _make_trial_data(config, eps, seed)
    records = []
    for method in config.methods:
        start = time.perf_counter()
        try:
            beta_hat = _fit_method(method, data, config, eps, seed)
            loss = loss_l2(beta_hat, data.beta_star, data.pop_cov)
        except Exception:
            loss = math.inf
        records.append(
            TrialRecord(
                setup=config.setup,
                n=config.n,
                d=config.d,
                rho_or_p=config.rho_or_p,
                eps=eps,
                error_dist=config.error_dist.label,
                method=method,
                trial=trial,
                seed=seed,
                loss=loss,
                wall_time=time.perf_counter() - start,
            )
        )
    return records


def _run_trial_task(args) -> List[TrialRecord]:
    config, eps, trial = args
    return run_trial(config, eps, trial)


def run_cell(
    config: ExperimentConfig, eps: float, workers: int = 1
) -> List[TrialRecord]:
    """All trials of one cell; trials are independent work units."""
    if not 0.0 <= eps < 0.5:
        raise ValueError(f"eps must lie in [0, 1/2), got {eps}")
    if workers <= 1 or config.trials == 1:
        groups = [run_trial(config, eps, t) for t in range(config.trials)]
    else:
        tasks = [(config, eps, t) for t in range(config.trials)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunk = max(1, config.trials // (4 * workers))
            groups = list(pool.map(_run_trial_task, tasks, chunksize=chunk))
    records = [rec for group in groups for rec in group]
    records.sort(key=lambda r: r.sort_key)
    return records


def run_experiment(config: ExperimentConfig, workers: int = 1) -> List[TrialRecord]:
    """Every cell of the config's eps grid, sorted for emission."""
    records: List[TrialRecord] = []
    for eps in config.eps_grid:
        records.extend(run_cell(config, eps, workers=workers))
    records.sort(key=lambda r: r.sort_key)
    return records


def summarize(records: Sequence[TrialRecord]) -> Dict[tuple, SummaryStats]:
    """SummaryStats per (cell, method) group, keyed by cell_key + (method,)."""
    groups: Dict[tuple, List[float]] = {}
    for rec in records:
        groups.setdefault(rec.cell_key + (rec.method,), []).append(rec.loss)
    return {
        key: SummaryStats.from_losses(losses)
        for key, losses in sorted(groups.items())
    }


def delta_percent(aasd_mean: float, plugin_mean: float) -> float:
    """Relative change of the plug-in statistic against the descent one."""
    return 100.0 * (plugin_mean - aasd_mean) / aasd_mean


def _fmt(value) -> str:
    if isinstance(value, float):
        return "%.17g" % value
    return str(value)


def emit(
    records: Sequence[TrialRecord],
    stats: Dict[tuple, SummaryStats],
    path,
    format: str = "csv",
) -> List[str]:
    """Write trials and summary files under ``path``; returns written paths.

    CSV columns follow the fixed headers; floats carry 17 significant
    digits; rows are sorted by (cell, method, trial). JSON carries the same
    fields and round-trips through load_records_json.
    """
    if format not in ("csv", "json"):
        raise ValueError(f"format must be 'csv' or 'json', got {format!r}")
    os.makedirs(path, exist_ok=True)
    ordered = sorted(records, key=lambda r: r.sort_key)
    written = []
    if format == "csv":
        trials_path = os.path.join(path, "trials.csv")
        _write_text(trials_path, _trials_csv(ordered))
        summary_path = os.path.join(path, "summary.csv")
        _write_text(summary_path, _summary_csv(stats))
        written = [trials_path, summary_path]
    else:
        trials_path = os.path.join(path, "trials.json")
        _write_text(trials_path, _records_json(ordered))
        summary_path = os.path.join(path, "summary.json")
        _write_text(summary_path, _summary_json(stats))
        written = [trials_path, summary_path]
    return written


def _write_text(path: str, text: str) -> None:
    try:
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"failed to write {path}: {exc}") from exc


def _trials_csv(records: Sequence[TrialRecord]) -> str:
    lines = [TRIALS_HEADER]
    for r in records:
        lines.append(
            ",".join(
                [
                    r.setup,
                    str(r.n),
                    str(r.d),
                    _fmt(r.rho_or_p),
                    _fmt(r.eps),
                    r.error_dist,
                    r.method,
                    str(r.trial),
                    str(r.seed),
                    _fmt(r.loss),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def _summary_csv(stats: Dict[tuple, SummaryStats]) -> str:
    lines = [SUMMARY_HEADER]
    for key in sorted(stats):
        setup, n, d, rho_or_p, eps, error_dist, method = key
        s = stats[key]
        lines.append(
            ",".join(
                [
                    setup,
                    str(n),
                    str(d),
                    _fmt(rho_or_p),
                    _fmt(eps),
                    error_dist,
                    method,
                    _fmt(s.mean),
                    _fmt(s.std),
                    _fmt(s.min),
                    _fmt(s.q1),
                    _fmt(s.median),
                    _fmt(s.q3),
                    _fmt(s.max),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def _records_json(records: Sequence[TrialRecord]) -> str:
    rows = [
        {
            "setup": r.setup,
            "n": r.n,
            "d": r.d,
            "rho_or_p": r.rho_or_p,
            "eps": r.eps,
            "error_dist": r.error_dist,
            "method": r.method,
            "trial": r.trial,
            "seed": r.seed,
            "loss": r.loss,
        }
        for r in records
    ]
    return json.dumps(rows, sort_keys=True, separators=(",", ":")) + "\n"


def _summary_json(stats: Dict[tuple, SummaryStats]) -> str:
    rows = []
    for key in sorted(stats):
        setup, n, d, rho_or_p, eps, error_dist, method = key
        s = stats[key]
        rows.append(
            {
                "setup": setup,
                "n": n,
                "d": d,
                "rho_or_p": rho_or_p,
                "eps": eps,
                "error_dist": error_dist,
                "method": method,
                "mean": s.mean,
                "std": s.std,
                "min": s.min,
                "q1": s.q1,
                "median": s.median,
                "q3": s.q3,
                "max": s.max,
            }
        )
    return json.dumps(rows, sort_keys=True, separators=(",", ":")) + "\n"


def load_records_json(path) -> List[TrialRecord]:
    """Read back records emitted as JSON (wall_time is not serialized)."""
    with open(path, "r", encoding="ascii") as fh:
        rows = json.load(fh)
    return [TrialRecord(**row) for row in rows]


def table_grid_configs(
    trials: int = 240,
    base_seed: int = 0,
    gd: Optional[GdConfig] = None,
) -> List[ExperimentConfig]:
    """The algorithm-comparison grid: Setup A, rho = 0, n in {120, 360},
    eps in {0.05, 0.2}, normal and Student t errors (nu in {1, 2, 4})."""
    configs = []
    base = ExperimentConfig(
        setup="A",
        n=120,
        d=20,
        rho=0.0,
        eps_grid=(0.05, 0.2),
        methods=("TM-AASD", "TM-PlugIn"),
        trials=trials,
        base_seed=base_seed,
        gd=gd or GdConfig(),
    )
    for n in (120, 360):
        for err in (
            ErrorDist.normal(),
            ErrorDist.student_t(1),
            ErrorDist.student_t(2),
            ErrorDist.student_t(4),
        ):
            configs.append(replace(base, n=n, error_dist=err))
    return configs
