"""Experiment sweeps, edge-list ingestion, and result emission.

Sweeps iterate a (p, gamma) grid with repeated trials. Every cell derives
its own random stream from the master seed through
``numpy.random.SeedSequence(seed, spawn_key=(p_index, gamma_index, trial))``,
so results do not depend on execution order and a rerun with the same
configuration reproduces the output byte for byte. Per-cell failures (for
example a disconnected draw at tiny p) are recorded in their rows and never
abort the sweep.

Timing columns are kept out of the CSV unless explicitly requested, since
wall-clock values would break byte-level reproducibility.
"""

from __future__ import annotations

import csv
import logging
import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .algorithms import RankingResult, ranking_from_scores, svd_nrs, svd_rs
from .baselines import (
    CompletionConfig,
    IncidenceSystem,
    complete_matrix,
    least_squares_rank,
    rowsum_rank,
)
from .errors import (
    ConfigError,
    GraphDisconnectedWarning,
    ParseError,
    SelfLoop,
    SvdRankError,
)
from .linalg import SkewSparseMatrix, component_labels
from .metrics import (
    count_upsets,
    kendall_distance,
    max_displacement,
    pearson_correlation,
    rmse,
    weighted_upsets,
)
from .model import EROParams, MeasurementSet, ScoreVector, build_H, generate_ero, generate_scores
from .theory import BoundParams, ModelStats, l2_bound_svdrs, l2_precondition_holds, \
    l2_bound_svdnrs, nrs_preconditions_hold, nrs_stats, u2_true, u2_true_nrs

log = logging.getLogger(__name__)

ALGORITHMS = ("svd_rs", "svd_nrs", "rowsum", "least_squares")
METRIC_NAMES = ("kendall", "kendall_norm", "correlation", "rmse", "upsets",
                "weighted_upsets", "max_displacement", "theory")
DEFAULT_METRICS = ("kendall", "correlation", "rmse", "upsets", "weighted_upsets")

CSV_COLUMNS = ("agg", "stat", "algorithm", "n", "p", "gamma", "trial", "trials_ok",
               "kendall", "kendall_norm", "correlation", "rmse", "upsets",
               "weighted_upsets", "max_displacement", "u2_sq_err", "u2_sq_bound",
               "bound_precond_ok", "bound_contained", "runtime_ms", "error")


@dataclass(frozen=True)
class ExperimentConfig:
    n: int
    p_grid: tuple[float, ...]
    gamma_grid: tuple[float, ...]
    trials: int = 20
    seed: int = 0
    scores: str = "uniform01"
    gamma_shape: float = 0.5
    gamma_scale: float = 1.0
    algorithms: tuple[str, ...] = ALGORITHMS
    completion: bool = False
    completion_cfg: CompletionConfig = field(default_factory=CompletionConfig)
    metrics: tuple[str, ...] = DEFAULT_METRICS
    epsilon: float = 0.5
    out: str = "results.csv"
    workers: int = 1
    include_timing: bool = False

    def __post_init__(self):
        if self.n < 2:
            raise ConfigError("n must be >= 2")
        if not self.p_grid or not self.gamma_grid:
            raise ConfigError("p_grid and gamma_grid must be nonempty")
        if any(not 0.0 <= p <= 1.0 for p in self.p_grid):
            raise ConfigError("p values must lie in [0, 1]")
        if any(not 0.0 <= g <= 1.0 for g in self.gamma_grid):
            raise ConfigError("gamma values must lie in [0, 1]")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        unknown = set(self.algorithms) - set(ALGORITHMS)
        if unknown or not self.algorithms:
            raise ConfigError(f"unknown algorithms: {sorted(unknown)}")
        unknown = set(self.metrics) - set(METRIC_NAMES)
        if unknown:
            raise ConfigError(f"unknown metrics: {sorted(unknown)}")
        if self.scores not in ("uniform01", "gamma", "linear"):
            raise ConfigError(f"unknown score kind {self.scores!r}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")


@dataclass
class ResultRow:
    algorithm: str
    n: int
    p: float | None = None
    gamma: float | None = None
    trial: int | None = None
    agg: int = 0
    stat: str = ""
    trials_ok: int | None = None
    kendall: float | None = None
    kendall_norm: float | None = None
    correlation: float | None = None
    rmse: float | None = None
    upsets: float | None = None
    weighted_upsets: float | None = None
    max_displacement: float | None = None
    u2_sq_err: float | None = None
    u2_sq_bound: float | None = None
    bound_precond_ok: int | None = None
    bound_contained: int | None = None
    runtime_ms: float | None = None
    error: str = ""


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return format(value, ".12g")
    return str(value)


def write_csv(rows: list[ResultRow], path: str, include_timing: bool = False) -> None:
    columns = [c for c in CSV_COLUMNS if include_timing or c != "runtime_ms"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(getattr(row, col)) for col in columns])


def _run_algorithm(name: str, H: SkewSparseMatrix, seed: int,
                   scale_from: SkewSparseMatrix | None) -> RankingResult:
    if name == "svd_rs":
        return svd_rs(H, seed=seed, scale_from=scale_from)
    if name == "svd_nrs":
        return svd_nrs(H, seed=seed, scale_from=scale_from)
    if name == "rowsum":
        return rowsum_rank(H)
    if name == "least_squares":
        return least_squares_rank(IncidenceSystem.from_matrix(H), H.n)
    raise ConfigError(f"unknown algorithm {name!r}")


def _theory_columns(row: ResultRow, result: RankingResult, scores: ScoreVector,
                    p: float, eta: float, epsilon: float) -> None:
    params = BoundParams(epsilon=epsilon)
    if result.method == "svd_rs":
        target = u2_true(scores)
        stats = ModelStats.from_scores(scores, p, eta)
        bound = l2_bound_svdrs(stats, params, strict=False)
        precond = l2_precondition_holds(stats, params)
    elif result.method == "svd_nrs":
        target = u2_true_nrs(scores, p, eta)
        stats = nrs_stats(scores, p, eta, params)
        bound = l2_bound_svdnrs(stats, strict=False)
        precond = nrs_preconditions_hold(stats)
    else:
        return
    direction = result.direction
    err = min(float(np.sum((direction - target) ** 2)),
              float(np.sum((direction + target) ** 2)))
    row.u2_sq_err = err
    row.u2_sq_bound = bound
    row.bound_precond_ok = int(precond)
    row.bound_contained = int(err <= bound)


def _run_cell(cfg: ExperimentConfig, p_idx: int, g_idx: int, trial: int) -> list[ResultRow]:
    p = cfg.p_grid[p_idx]
    gamma = cfg.gamma_grid[g_idx]
    eta = 1.0 - gamma
    seq = np.random.SeedSequence(entropy=cfg.seed, spawn_key=(p_idx, g_idx, trial))
    score_seed, ero_seed, algo_seed = (int(s) for s in seq.generate_state(3))
    scores = generate_scores(cfg.scores, cfg.n, seed=score_seed,
                             a=cfg.gamma_shape, b=cfg.gamma_scale)
    mset = generate_ero(scores, EROParams(n=cfg.n, p=p, eta=eta, seed=ero_seed))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", GraphDisconnectedWarning)
        H = build_H(mset)
    H_run, scale_from, completion_error = H, None, ""
    if cfg.completion:
        try:
            comp = complete_matrix(mset, cfg.completion_cfg)
            H_run, scale_from = comp.to_sparse(), H
            if not comp.converged:
                completion_error = "completion NotConverged"
        except SvdRankError as exc:
            completion_error = f"completion {type(exc).__name__}: {exc}"

    true_perm = ranking_from_scores(scores.values)
    rows = []
    for name in cfg.algorithms:
        row = ResultRow(algorithm=name, n=cfg.n, p=p, gamma=gamma, trial=trial,
                        error=completion_error)
        start = time.perf_counter()
        try:
            result = _run_algorithm(name, H_run, algo_seed, scale_from)
            row.runtime_ms = (time.perf_counter() - start) * 1e3
            est = result.score_estimate
            if "kendall" in cfg.metrics:
                row.kendall = float(kendall_distance(true_perm, result.permutation))
            if "kendall_norm" in cfg.metrics:
                row.kendall_norm = float(kendall_distance(true_perm, result.permutation,
                                                          normalized=True))
            if "correlation" in cfg.metrics:
                row.correlation = pearson_correlation(scores.values, est)
            if "rmse" in cfg.metrics:
                row.rmse = rmse(scores.values, est)
            if "upsets" in cfg.metrics:
                row.upsets = float(count_upsets(H, est))
            if "weighted_upsets" in cfg.metrics:
                row.weighted_upsets = weighted_upsets(H, est)
            if "max_displacement" in cfg.metrics:
                row.max_displacement = float(max_displacement(true_perm, result.permutation))
            if "theory" in cfg.metrics and eta > 0 and p > 0:
                _theory_columns(row, result, scores, p, eta, cfg.epsilon)
        except SvdRankError as exc:
            row.error = (row.error + "; " if row.error else "") + \
                f"{type(exc).__name__}: {exc}"
        rows.append(row)
    return rows


def _aggregate(rows: list[ResultRow], cfg: ExperimentConfig) -> list[ResultRow]:
    metric_fields = ("kendall", "kendall_norm", "correlation", "rmse", "upsets",
                     "weighted_upsets", "max_displacement", "u2_sq_err", "u2_sq_bound")
    out = []
    for p in cfg.p_grid:
        for gamma in cfg.gamma_grid:
            for name in cfg.algorithms:
                ok = [r for r in rows
                      if r.algorithm == name and r.p == p and r.gamma == gamma
                      and not r.error]
                for stat, fn in (("mean", np.mean), ("std", np.std)):
                    agg = ResultRow(algorithm=name, n=cfg.n, p=p, gamma=gamma,
                                    agg=1, stat=stat, trials_ok=len(ok))
                    for metric in metric_fields:
                        vals = [getattr(r, metric) for r in ok
                                if getattr(r, metric) is not None]
                        if vals:
                            setattr(agg, metric, float(fn(vals)))
                    out.append(agg)
    return out


def run_sweep(cfg: ExperimentConfig) -> list[ResultRow]:
    """Run the full (p, gamma, trial) grid and return raw plus aggregate rows.

    Deterministic for a given configuration regardless of worker count; raw
    rows are ordered by (p, gamma, trial, algorithm) and aggregate rows
    (flagged ``agg=1``) follow.
    """
    cells = [(pi, gi, t)
             for pi in range(len(cfg.p_grid))
             for gi in range(len(cfg.gamma_grid))
             for t in range(cfg.trials)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            chunks = list(pool.map(_run_cell_star, [(cfg, *c) for c in cells]))
    else:
        chunks = [_run_cell(cfg, *c) for c in cells]
    rows = [row for chunk in chunks for row in chunk]
    rows.extend(_aggregate(rows, cfg))
    return rows


def _run_cell_star(args):
    return _run_cell(*args)


def ingest_edge_list(path: str, fmt: str = "csv_triples", one_indexed: bool = False,
                     n: int | None = None) -> MeasurementSet:
    """Read rows ``i,j,value`` into a measurement set.

    Reversed orientations fold antisymmetrically ((j, i, v) counts as
    (i, j, -v)) and duplicate pairs are summed, which matches how repeated
    matches accumulate point differences. Self-loops are rejected. The item
    count is inferred from the largest index unless given.
    """
    if fmt != "csv_triples":
        raise ConfigError(f"unknown edge-list format {fmt!r}")
    totals: dict[tuple[int, int], float] = {}
    max_idx = -1
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, raw in enumerate(csv.reader(fh), start=1):
            if not raw or (len(raw) == 1 and not raw[0].strip()):
                continue
            if raw[0].lstrip().startswith("#"):
                continue
            if len(raw) != 3:
                raise ParseError(f"expected 3 fields, got {len(raw)}", lineno)
            try:
                i, j = int(raw[0]), int(raw[1])
                value = float(raw[2])
            except ValueError as exc:
                raise ParseError(str(exc), lineno) from exc
            if one_indexed:
                i, j = i - 1, j - 1
            if i < 0 or j < 0:
                raise ParseError("negative index", lineno)
            if i == j:
                raise SelfLoop(f"self-loop on node {i}", lineno)
            if not math.isfinite(value):
                raise ParseError("non-finite value", lineno)
            key, signed = ((i, j), value) if i < j else ((j, i), -value)
            totals[key] = totals.get(key, 0.0) + signed
            max_idx = max(max_idx, i, j)
    size = n if n is not None else max_idx + 1
    if size < 2:
        raise ConfigError("edge list defines fewer than 2 nodes")
    if max_idx >= size:
        raise ConfigError(f"index {max_idx} out of range for n={size}")
    keys = sorted(totals)
    rows = np.array([k[0] for k in keys], dtype=np.int64)
    cols = np.array([k[1] for k in keys], dtype=np.int64)
    values = np.array([totals[k] for k in keys], dtype=np.float64)
    return MeasurementSet(n=size, rows=rows, cols=cols, values=values)


def prune_and_restrict(m: MeasurementSet, min_degree: int = 0) -> tuple[MeasurementSet, np.ndarray]:
    """Drop low-degree nodes, then keep the largest connected component.

    Returns the reindexed measurement set and the array mapping new index to
    original node id.
    """
    rows, cols, values = m.rows, m.cols, m.values
    if min_degree > 0:
        deg = (np.bincount(rows, minlength=m.n) + np.bincount(cols, minlength=m.n))
        keep_node = deg >= min_degree
        dropped = int(np.count_nonzero(~keep_node))
        if dropped:
            log.warning("pruning %d nodes with degree < %d", dropped, min_degree)
        keep_edge = keep_node[rows] & keep_node[cols]
        rows, cols, values = rows[keep_edge], cols[keep_edge], values[keep_edge]
    else:
        keep_node = np.ones(m.n, dtype=bool)
    labels = component_labels(m.n, rows, cols)
    labels[~keep_node] = -1
    kept_labels = labels[keep_node]
    if kept_labels.size == 0:
        raise ConfigError("no nodes survive pruning")
    counts = np.bincount(kept_labels)
    main = int(np.argmax(counts))
    if counts[main] < kept_labels.size:
        log.warning("graph disconnected after pruning; keeping largest component "
                    "(%d of %d nodes)", counts[main], int(kept_labels.size))
    node_keep = labels == main
    mapping = np.flatnonzero(node_keep)
    new_index = np.full(m.n, -1, dtype=np.int64)
    new_index[mapping] = np.arange(mapping.size)
    keep_edge = node_keep[rows] & node_keep[cols]
    return (MeasurementSet(n=int(mapping.size), rows=new_index[rows[keep_edge]],
                           cols=new_index[cols[keep_edge]], values=values[keep_edge]),
            mapping)


def evaluate_real(m: MeasurementSet, algorithms: tuple[str, ...] = ALGORITHMS,
                  completion: CompletionConfig | None = None, min_degree: int = 0,
                  seed: int = 0) -> list[ResultRow]:
    """Run algorithms on real measurements and report ground-truth-free metrics.

    Upsets and weighted upsets are always computed against the (pruned)
    measured offsets, not against completed entries. A seeded random-scores
    baseline row is included for calibration; its expected upsets are about
    half the comparable pairs.
    """
    pruned, _ = prune_and_restrict(m, min_degree=min_degree)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", GraphDisconnectedWarning)
        H = build_H(pruned)
    H_run, scale_from = H, None
    completion_error = ""
    if completion is not None:
        try:
            comp = complete_matrix(pruned, completion)
            H_run, scale_from = comp.to_sparse(), H
            if not comp.converged:
                completion_error = "completion NotConverged"
        except SvdRankError as exc:
            completion_error = f"completion {type(exc).__name__}: {exc}"

    rows = []
    for name in algorithms:
        row = ResultRow(algorithm=name, n=pruned.n, error=completion_error)
        start = time.perf_counter()
        try:
            result = _run_algorithm(name, H_run, seed, scale_from)
            row.runtime_ms = (time.perf_counter() - start) * 1e3
            row.upsets = float(count_upsets(H, result.score_estimate))
            row.weighted_upsets = weighted_upsets(H, result.score_estimate)
        except SvdRankError as exc:
            row.error = (row.error + "; " if row.error else "") + \
                f"{type(exc).__name__}: {exc}"
        rows.append(row)
    random_scores = np.random.default_rng(seed).random(pruned.n)
    rows.append(ResultRow(algorithm="random", n=pruned.n,
                          upsets=float(count_upsets(H, random_scores)),
                          weighted_upsets=weighted_upsets(H, random_scores)))
    return rows


_CONFIG_SCHEMA = {
    "n": int,
    "scores": str,
    "gamma_shape": float,
    "gamma_scale": float,
    "p_grid": "float_list",
    "gamma_grid": "float_list",
    "trials": int,
    "seed": int,
    "algorithms": "str_list",
    "completion": "flag",
    "metrics": "str_list",
    "epsilon": float,
    "out": str,
    "workers": int,
    "include_timing": "flag",
    "completion_step": float,
    "completion_threshold": float,
    "completion_decay": float,
    "completion_max_iter": int,
    "completion_tol": float,
}


def parse_config_text(text: str) -> ExperimentConfig:
    """Parse the flat ``key = value`` sweep-configuration format.

    Lines are ``key = value`` with ``#`` comments; list values are
    comma-separated. Unknown keys are an error and are listed explicitly.
    """
    raw: dict[str, str] = {}
    unknown = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in stripped.split("=", 1))
        if key not in _CONFIG_SCHEMA:
            unknown.append(key)
            continue
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value
    if unknown:
        raise ConfigError(f"unknown configuration keys: {', '.join(sorted(unknown))}")

    def convert(key: str, kind):
        value = raw[key]
        try:
            if kind == "flag":
                low = value.lower()
                if low in ("on", "true", "1", "yes"):
                    return True
                if low in ("off", "false", "0", "no"):
                    return False
                raise ValueError(f"bad flag {value!r}")
            if kind == "float_list":
                return tuple(float(v) for v in value.split(","))
            if kind == "str_list":
                return tuple(v.strip() for v in value.split(",") if v.strip())
            return kind(value)
        except ValueError as exc:
            raise ConfigError(f"key {key!r}: {exc}") from exc

    parsed = {k: convert(k, _CONFIG_SCHEMA[k]) for k in raw}
    if "n" not in parsed or "p_grid" not in parsed or "gamma_grid" not in parsed:
        raise ConfigError("config requires at least: n, p_grid, gamma_grid")
    comp_kwargs = {}
    for knob in ("step", "threshold", "decay", "max_iter", "tol"):
        key = f"completion_{knob}"
        if key in parsed:
            comp_kwargs[knob] = parsed.pop(key)
    if comp_kwargs:
        parsed["completion_cfg"] = CompletionConfig(**comp_kwargs)
    return ExperimentConfig(**parsed)


def load_config(path: str) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config_text(fh.read())
