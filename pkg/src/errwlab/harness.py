"""Reproducible Monte Carlo experiments over walk replicas.

Replica r always consumes the stream keyed by (master seed, r), replicas
are processed in fixed chunks of 64, and aggregation runs in chunk order;
worker count therefore cannot change any number in the result.  Heavy
per-replica work happens inside vectorized batches, so parallelism here
buys wall-clock time on multicore hosts, not correctness.
"""

from __future__ import annotations

import hashlib
import math
import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields as dataclass_fields
from typing import List, Optional

import numpy as np

from ._meta import PACKAGE_VERSION
from .cycles import CycleGraph, MIN_CYCLE_LENGTH, make_cycle
from .errors import SchemaError, SummabilityError
from .numerics import KahanAccumulator
from .timeline import run_timeline, sample_clocks
from .walk import (
    replica_generator,
    simulate_batch,
    terminal_streak,
    detect_branching_vertex,
)
from .weights import FAILS, HOLDS, WeightFunction, weight_from_config

CHUNK_REPLICAS = 64

ENGINES = ("discrete", "timeline")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a replica needs, serializable and hash-stable."""

    cycle_length: int
    weight: dict
    horizon: int
    replicas: int
    seed: int
    initial_counts: object = 0
    start_vertex: int = 0
    attraction_window: int = 100
    branch_tail_fraction: float = 0.5
    engine: str = "discrete"
    clock_tolerance: float = 1e-9
    label: Optional[str] = None

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        """Validate a config mapping, collecting every problem found."""
        errors: List[str] = []
        if not isinstance(data, dict):
            raise SchemaError([f"config must be a mapping, got {type(data).__name__}"])
        known = {f.name for f in dataclass_fields(cls)}
        for key in sorted(set(data) - known):
            errors.append(f"unknown key {key!r}")
        for key in ("cycle_length", "weight", "horizon", "replicas", "seed"):
            if key not in data:
                errors.append(f"missing required key {key!r}")

        def want_int(key, minimum, default=None):
            v = data.get(key, default)
            if v is None:
                return None
            if isinstance(v, bool) or not isinstance(v, int):
                errors.append(f"{key} must be an integer, got {v!r}")
                return None
            if v < minimum:
                errors.append(f"{key} must be >= {minimum}, got {v}")
                return None
            return v

        length = want_int("cycle_length", MIN_CYCLE_LENGTH)
        horizon = want_int("horizon", 0)
        replicas = want_int("replicas", 1)
        seed = want_int("seed", 0)
        window = want_int("attraction_window", 2, cls.attraction_window)
        start = want_int("start_vertex", 0, cls.start_vertex)
        if length is not None and start is not None and start >= length:
            errors.append(
                f"start_vertex {start} not a vertex of a {length}-cycle"
            )

        weight_cfg = data.get("weight")
        if weight_cfg is not None:
            try:
                weight_from_config(weight_cfg)
            except ValueError as exc:
                errors.append(f"weight: {exc}")

        counts = data.get("initial_counts", 0)
        if isinstance(counts, bool) or not (
            isinstance(counts, int)
            or (
                isinstance(counts, list)
                and all(
                    isinstance(c, int) and not isinstance(c, bool) for c in counts
                )
            )
        ):
            errors.append(
                f"initial_counts must be an integer or list of integers, got {counts!r}"
            )
        else:
            flat = [counts] if isinstance(counts, int) else counts
            if any(c < 0 for c in flat):
                errors.append("initial_counts entries must be >= 0")
            if (
                isinstance(counts, list)
                and length is not None
                and len(counts) != length
            ):
                errors.append(
                    f"initial_counts has {len(counts)} entries for a {length}-cycle"
                )

        frac = data.get("branch_tail_fraction", cls.branch_tail_fraction)
        if isinstance(frac, bool) or not isinstance(frac, (int, float)):
            errors.append(f"branch_tail_fraction must be a number, got {frac!r}")
        elif not 0.0 < float(frac) < 1.0:
            errors.append(f"branch_tail_fraction must be in (0, 1), got {frac}")

        engine = data.get("engine", cls.engine)
        if engine not in ENGINES:
            errors.append(
                f"engine must be one of {'/'.join(ENGINES)}, got {engine!r}"
            )

        tol = data.get("clock_tolerance", cls.clock_tolerance)
        if isinstance(tol, bool) or not isinstance(tol, (int, float)):
            errors.append(f"clock_tolerance must be a number, got {tol!r}")
        elif not float(tol) > 0.0:
            errors.append(f"clock_tolerance must be > 0, got {tol}")

        label = data.get("label")
        if label is not None and not isinstance(label, str):
            errors.append(f"label must be a string, got {label!r}")

        if errors:
            raise SchemaError(errors)
        return cls(
            cycle_length=length,
            weight=dict(weight_cfg),
            horizon=horizon,
            replicas=replicas,
            seed=seed,
            initial_counts=counts if isinstance(counts, int) else list(counts),
            start_vertex=start,
            attraction_window=window,
            branch_tail_fraction=float(frac),
            engine=engine,
            clock_tolerance=float(tol),
            label=label,
        )

    def to_dict(self) -> dict:
        out = {
            "cycle_length": self.cycle_length,
            "weight": dict(self.weight),
            "horizon": self.horizon,
            "replicas": self.replicas,
            "seed": self.seed,
            "initial_counts": self.initial_counts,
            "start_vertex": self.start_vertex,
            "attraction_window": self.attraction_window,
            "branch_tail_fraction": self.branch_tail_fraction,
            "engine": self.engine,
            "clock_tolerance": self.clock_tolerance,
        }
        if self.label is not None:
            out["label"] = self.label
        return out

    def graph(self) -> CycleGraph:
        return make_cycle(self.cycle_length)

    def weight_fn(self) -> WeightFunction:
        return weight_from_config(self.weight)


def config_hash(config_dict: dict) -> str:
    from .io import canonical_json

    return hashlib.sha256(canonical_json(config_dict).encode("utf-8")).hexdigest()


@dataclass
class ExperimentResult:
    """Per-replica summaries plus aggregates, with full provenance.

    Sentinel -1 in the edge/vertex/onset columns means "none".  Aggregate
    proportions carry binomial standard errors sqrt(p(1-p)/R).
    """

    config: dict
    config_hash: str
    package_version: str
    surrogate: dict
    notes: List[str]
    replica_ids: List[int]
    attracted_edge: List[int]
    onset_step: List[int]
    branching_vertex: List[int]
    final_balance: List[float]
    parity_residual: List[float]
    truncated: List[bool]
    aggregates: dict

    def as_dict(self) -> dict:
        return {
            "schema": "errwlab.result.v1",
            "config": self.config,
            "config_hash": self.config_hash,
            "package_version": self.package_version,
            "surrogate": self.surrogate,
            "notes": list(self.notes),
            "replicas": {
                "replica": list(self.replica_ids),
                "attracted_edge": list(self.attracted_edge),
                "onset_step": list(self.onset_step),
                "branching_vertex": list(self.branching_vertex),
                "final_balance": list(self.final_balance),
                "parity_residual": list(self.parity_residual),
                "truncated": list(self.truncated),
            },
            "aggregates": dict(self.aggregates),
        }


def proportion_standard_error(p_hat: float, n: int) -> float:
    return math.sqrt(p_hat * (1.0 - p_hat) / n)


def _final_balance_from_counts(
    weight: WeightFunction, counts: np.ndarray
) -> np.ndarray:
    """Alternating sum of reciprocal prefix sums at final counts, one value
    per replica row.  Uses the pathwise identity; the identity itself is
    validated elsewhere by dual-route traces."""
    l = counts.shape[1]
    alt = np.asarray([1.0 if i % 2 == 0 else -1.0 for i in range(l)])
    prefix_sums = weight.reciprocal_sum_array(int(counts.max()))
    return prefix_sums[counts] @ alt


def _chunk_discrete(cfg: ExperimentConfig, offset: int, count: int) -> dict:
    graph = cfg.graph()
    weight = cfg.weight_fn()
    n = cfg.horizon
    tail_len = int(cfg.branch_tail_fraction * n)
    snapshot = n - tail_len if n else None
    batch = simulate_batch(
        graph,
        weight,
        cfg.start_vertex,
        cfg.initial_counts,
        n,
        cfg.seed,
        count,
        replica_offset=offset,
        snapshot_step=snapshot,
    )
    if 2 <= cfg.attraction_window <= n:
        attracted = batch.attracted_edges(cfg.attraction_window)
        onsets = batch.attraction_onsets(cfg.attraction_window)
    else:
        attracted = np.full(count, -1, dtype=np.int64)
        onsets = np.full(count, -1, dtype=np.int64)
    branching = (
        batch.branching_vertices()
        if batch.snapshot_counts is not None
        else np.full(count, -1, dtype=np.int64)
    )
    balance = _final_balance_from_counts(weight, batch.final_counts)
    return {
        "attracted_edge": attracted,
        "onset_step": onsets,
        "branching_vertex": branching,
        "final_balance": balance,
        "parity_residual": np.full(count, math.nan),
        "truncated": np.zeros(count, dtype=bool),
    }


def _chunk_timeline(cfg: ExperimentConfig, offset: int, count: int) -> dict:
    graph = cfg.graph()
    weight = cfg.weight_fn()
    counts0 = (
        (cfg.initial_counts,) * graph.length
        if isinstance(cfg.initial_counts, int)
        else tuple(cfg.initial_counts)
    )
    attracted = np.full(count, -1, dtype=np.int64)
    onsets = np.full(count, -1, dtype=np.int64)
    branching = np.full(count, -1, dtype=np.int64)
    balance = np.empty(count)
    parity = np.full(count, math.nan)
    truncated = np.zeros(count, dtype=bool)
    final_counts = np.empty((count, graph.length), dtype=np.int64)

    for i in range(count):
        rng = replica_generator(cfg.seed, offset + i)
        clocks = sample_clocks(weight, counts0, cfg.clock_tolerance, rng)
        run = run_timeline(clocks, graph, cfg.start_vertex, cfg.horizon)
        traj = run.discrete()
        n = traj.n_steps
        truncated[i] = run.truncation is not None
        final_counts[i] = traj.final_counts
        if 2 <= cfg.attraction_window <= n:
            streak = terminal_streak(traj.edges)
            if streak >= cfg.attraction_window:
                attracted[i] = int(traj.edges[-1])
                onsets[i] = n - streak
        if n:
            b = detect_branching_vertex(traj, cfg.branch_tail_fraction)
            branching[i] = -1 if b is None else b
        if graph.is_even:
            even = math.fsum(run.line_erased[0::2])
            odd = math.fsum(run.line_erased[1::2])
            worst = max(abs(even - run.elapsed), abs(odd - run.elapsed))
            # Stored relative to elapsed time; a zero-length run is exact.
            parity[i] = worst / run.elapsed if run.elapsed > 0.0 else 0.0
    balance[:] = _final_balance_from_counts(weight, final_counts)
    return {
        "attracted_edge": attracted,
        "onset_step": onsets,
        "branching_vertex": branching,
        "final_balance": balance,
        "parity_residual": parity,
        "truncated": truncated,
    }


def _run_chunk(cfg_dict: dict, offset: int, count: int) -> dict:
    cfg = ExperimentConfig.from_dict(cfg_dict)
    if cfg.engine == "discrete":
        return _chunk_discrete(cfg, offset, count)
    return _chunk_timeline(cfg, offset, count)


def run_experiment(cfg: ExperimentConfig, parallelism: int = 1) -> ExperimentResult:
    """Run all replicas and aggregate.

    parallelism is a worker count, nothing more; results are identical at
    any value because replica streams and reduction order are fixed.
    """
    if parallelism < 1:
        raise ValueError(f"parallelism must be >= 1, got {parallelism}")
    cfg_dict = cfg.to_dict()
    tasks = [
        (offset, min(CHUNK_REPLICAS, cfg.replicas - offset))
        for offset in range(0, cfg.replicas, CHUNK_REPLICAS)
    ]
    if parallelism == 1 or len(tasks) == 1:
        chunks = [_run_chunk(cfg_dict, off, cnt) for off, cnt in tasks]
    else:
        ctx = multiprocessing.get_context("fork")
        with ProcessPoolExecutor(
            max_workers=min(parallelism, len(tasks)), mp_context=ctx
        ) as pool:
            futures = [
                pool.submit(_run_chunk, cfg_dict, off, cnt) for off, cnt in tasks
            ]
            chunks = [f.result() for f in futures]

    def gather(key):
        return np.concatenate([c[key] for c in chunks])

    attracted = gather("attracted_edge")
    onsets = gather("onset_step")
    branching = gather("branching_vertex")
    balance = gather("final_balance")
    parity = gather("parity_residual")
    truncated = gather("truncated")

    r = cfg.replicas
    attracted_mask = attracted >= 0
    frac = float(np.mean(attracted_mask))
    onset_hits = onsets[attracted_mask]
    branch_frac = float(np.mean(branching >= 0))
    parity_finite = parity[np.isfinite(parity)]

    aggregates = {
        "replicas": r,
        "attracted_fraction": frac,
        "attracted_fraction_se": proportion_standard_error(frac, r),
        "onset_mean": float(np.mean(onset_hits)) if len(onset_hits) else math.nan,
        "onset_median": float(np.median(onset_hits)) if len(onset_hits) else math.nan,
        "branching_fraction": branch_frac,
        "branching_fraction_se": proportion_standard_error(branch_frac, r),
        "final_balance_mean": float(np.mean(balance)),
        "final_balance_std": float(np.std(balance)),
        "parity_residual_max": (
            float(np.max(parity_finite)) if len(parity_finite) else math.nan
        ),
        "truncated_count": int(np.sum(truncated)),
    }

    notes = []
    if cfg.cycle_length % 2 == 1:
        notes.append(
            "odd cycle: attraction figures are finite-horizon observations, "
            "not limit statements"
        )
    if cfg.attraction_window > cfg.horizon:
        notes.append(
            "attraction window exceeds horizon; no replica can qualify as attracted"
        )

    surrogate = {
        "attraction_detector": "all of the last attraction_window traversals "
        "on one edge",
        "attraction_window": cfg.attraction_window,
        "horizon": cfg.horizon,
        "branch_tail_fraction": cfg.branch_tail_fraction,
    }

    return ExperimentResult(
        config=cfg_dict,
        config_hash=config_hash(cfg_dict),
        package_version=PACKAGE_VERSION,
        surrogate=surrogate,
        notes=notes,
        replica_ids=list(range(r)),
        attracted_edge=[int(x) for x in attracted],
        onset_step=[int(x) for x in onsets],
        branching_vertex=[int(x) for x in branching],
        final_balance=[float(x) for x in balance],
        parity_residual=[float(x) for x in parity],
        truncated=[bool(x) for x in truncated],
        aggregates=aggregates,
    )


def edge_trap_probability(
    weight: WeightFunction,
    trap_initial_count: int,
    competitor_count: int,
    tol: float = 1e-12,
) -> float:
    """Probability that the walk repeats its first edge forever, with both
    competing edges frozen at competitor_count.

    The infinite product of per-return win probabilities, truncated once
    the certified log-space remainder drops below tol (relative).  A
    divergent reciprocal series makes the product zero and is reported as
    exactly that.
    """
    if trap_initial_count < 0 or competitor_count < 0:
        raise ValueError("counts must be >= 0")
    if not tol > 0.0:
        raise ValueError(f"tolerance must be > 0, got {tol}")
    report = weight.classify()
    if report.verdict == FAILS:
        return 0.0
    if report.verdict != HOLDS:
        raise SummabilityError(
            f"trap probability needs a summability verdict: {report.certificate}"
        )
    w_comp = weight.eval(competitor_count)
    cutoff = weight.reciprocal_tail_cutoff(tol / w_comp)
    acc = KahanAccumulator()
    a = trap_initial_count
    for k in range(a + 1, max(cutoff, a + 1)):
        acc.add(-math.log1p(w_comp * weight.reciprocal(k)))
    return math.exp(acc.value)


def edge_trap_frequency(
    weight: WeightFunction,
    length: int,
    horizon: int,
    replicas: int,
    seed: int,
) -> dict:
    """Monte Carlo frequency of never leaving the first edge, from the
    all-zero start on a cycle of the given length."""
    graph = make_cycle(length)
    batch = simulate_batch(
        graph, weight, 0, 0, horizon, seed, replicas
    )
    stayed = batch.terminal_streaks == horizon
    p_hat = float(np.mean(stayed))
    return {
        "frequency": p_hat,
        "standard_error": proportion_standard_error(p_hat, replicas),
        "replicas": replicas,
        "horizon": horizon,
        "seed": seed,
    }


@dataclass
class ComparisonReport:
    """Side-by-side aggregates of one even-length and one odd-length
    experiment with matched weights, horizon, and replica count.  Purely
    descriptive; the notes carry the odd-cycle caveat."""

    even_result: ExperimentResult
    odd_result: ExperimentResult

    def as_dict(self) -> dict:
        even = self.even_result.as_dict()
        odd = self.odd_result.as_dict()
        side_by_side = {}
        for key in sorted(
            set(even["aggregates"]) | set(odd["aggregates"])
        ):
            side_by_side[key] = {
                "even": even["aggregates"].get(key),
                "odd": odd["aggregates"].get(key),
            }
        return {
            "schema": "errwlab.comparison.v1",
            "even": even,
            "odd": odd,
            "side_by_side": side_by_side,
        }


def compare_parities(
    even_cfg: ExperimentConfig,
    odd_cfg: ExperimentConfig,
    parallelism: int = 1,
) -> ComparisonReport:
    problems = []
    if even_cfg.cycle_length % 2 != 0:
        problems.append(
            f"first config must have even length, got {even_cfg.cycle_length}"
        )
    if odd_cfg.cycle_length % 2 != 1:
        problems.append(
            f"second config must have odd length, got {odd_cfg.cycle_length}"
        )
    if even_cfg.weight != odd_cfg.weight:
        problems.append("weight configs differ")
    if even_cfg.horizon != odd_cfg.horizon:
        problems.append(
            f"horizons differ: {even_cfg.horizon} vs {odd_cfg.horizon}"
        )
    if even_cfg.replicas != odd_cfg.replicas:
        problems.append(
            f"replica counts differ: {even_cfg.replicas} vs {odd_cfg.replicas}"
        )
    if problems:
        raise SchemaError(problems)
    return ComparisonReport(
        even_result=run_experiment(even_cfg, parallelism),
        odd_result=run_experiment(odd_cfg, parallelism),
    )
