"""Reciprocal-weight flow diagnostics for walk trajectories.

Each vertex carries a signed flow: departures to the right add the
reciprocal weight of the traversed edge's count, departures to the left
subtract it.  The alternating combination of these flows (plus a constant
offset from the initial counts) is, pathwise, exactly the alternating sum
of reciprocal prefix sums evaluated at the current edge counts.  The trace
computes both sides by genuinely different routes so their agreement means
something.  The same flows are conditionally drift-free one step ahead;
the tree enumerator verifies that exactly, and the stopping scan checks
the overshoot bound that makes the drift-free property usable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Optional, Tuple

import numpy as np

from .circulant import alternating_vector, rational_nullspace
from .cycles import CycleGraph
from .errors import InsufficientSampleError
from .walk import BatchWalkResult, CountsLike, Trajectory, WalkState, normalize_counts
from .weights import WeightFunction

_MAX_ENUM_DEPTH = 10


def _alt_signs(length: int) -> np.ndarray:
    return np.asarray(alternating_vector(length), dtype=np.float64)


@dataclass
class MartingaleTrace:
    """Per-step flow diagnostics along one trajectory.

    balance[n] is the alternating flow combination including the initial
    offset; alternating_prefix[n] is the independently accumulated
    alternating sum of reciprocal prefix sums at the step-n edge counts.
    On even cycles these are the same number up to float noise; on odd
    cycles the balance is still well defined but carries no cancellation
    structure, so traces are tagged diagnostic-only there.
    """

    graph: CycleGraph
    weight: WeightFunction
    initial_offset: float
    outflow_right: np.ndarray
    outflow_left: np.ndarray
    vertex_flow: np.ndarray
    balance: np.ndarray
    alternating_prefix: np.ndarray
    counts_min: np.ndarray
    tail_variance: np.ndarray

    @property
    def n_steps(self) -> int:
        return len(self.balance) - 1

    @property
    def diagnostic_only(self) -> bool:
        return not self.graph.is_even

    def identity_residual(self) -> float:
        """max over steps of |balance - alternating_prefix|."""
        return float(np.max(np.abs(self.balance - self.alternating_prefix)))

    def to_csv(self, path) -> None:
        l = self.graph.length
        with open(path, "w", encoding="utf-8") as fh:
            flow_cols = ",".join(f"flow{i}" for i in range(l))
            fh.write(f"step,balance,{flow_cols},tail_variance\n")
            for n in range(len(self.balance)):
                flows = ",".join(repr(float(f)) for f in self.vertex_flow[n])
                fh.write(
                    f"{n},{self.balance[n]!r},{flows},{self.tail_variance[n]!r}\n"
                )


def balance_trace(
    trajectory: Trajectory,
    weight: WeightFunction,
    tail_tol: float = 1e-12,
) -> MartingaleTrace:
    """Compute the full flow trace of a trajectory.

    The balance side accumulates signed reciprocal increments step by
    step; the prefix side gathers compensated prefix sums at every step's
    count vector.  No arithmetic is shared between the two beyond the
    integer counts themselves.
    """
    g = trajectory.graph
    l = g.length
    n_steps = trajectory.n_steps
    counts_t = trajectory.counts_over_time()
    max_count = int(counts_t.max())

    v = np.asarray(trajectory.vertices[:n_steps], dtype=np.int64)
    e = np.asarray(trajectory.edges, dtype=np.int64)
    c_before = counts_t[np.arange(n_steps), e]
    rvals = weight.reciprocal_array(c_before)
    right = e == v

    outflow_right = np.zeros((n_steps + 1, l))
    outflow_left = np.zeros((n_steps + 1, l))
    for i in range(l):
        at_i = v == i
        outflow_right[1:, i] = np.cumsum(np.where(at_i & right, rvals, 0.0))
        outflow_left[1:, i] = np.cumsum(np.where(at_i & ~right, rvals, 0.0))
    vertex_flow = outflow_right - outflow_left

    alt = _alt_signs(l)
    prefix_sums = weight.reciprocal_sum_array(max_count)
    initial_offset = float(
        np.dot(alt, prefix_sums[np.asarray(trajectory.initial_counts, dtype=np.int64)])
    )
    balance = initial_offset + vertex_flow @ alt
    alternating_prefix = prefix_sums[counts_t] @ alt

    counts_min = counts_t.min(axis=1)
    tv_table = weight.tail_variance_array(int(counts_min.max()), tail_tol)
    tail_variance = tv_table[counts_min]

    return MartingaleTrace(
        graph=g,
        weight=weight,
        initial_offset=initial_offset,
        outflow_right=outflow_right,
        outflow_left=outflow_left,
        vertex_flow=vertex_flow,
        balance=balance,
        alternating_prefix=alternating_prefix,
        counts_min=counts_min,
        tail_variance=tail_variance,
    )


def batch_identity_residual(
    batch: BatchWalkResult,
    weight: WeightFunction,
    chunk: int = 64,
) -> float:
    """max |balance - alternating_prefix| over a recorded batch, all steps,
    all replicas.  The batch must have been run with record=True."""
    if batch.edges is None or batch.vertices is None:
        raise ValueError("batch was run without trajectory recording")
    g = batch.graph
    l = g.length
    n = batch.horizon
    alt = _alt_signs(l)
    x0 = np.asarray(batch.initial_counts, dtype=np.int64)
    offset0 = None
    worst = 0.0
    for lo in range(0, batch.replicas, chunk):
        hi = min(lo + chunk, batch.replicas)
        e = batch.edges[lo:hi].astype(np.int64)
        v = batch.vertices[lo:hi, :n].astype(np.int64)
        r = hi - lo
        one_hot = np.zeros((r, n, l), dtype=np.int32)
        rows = np.arange(r)[:, None]
        cols = np.arange(n)[None, :]
        one_hot[rows, cols, e] = 1
        counts_t = np.concatenate(
            [np.zeros((r, 1, l), dtype=np.int32), np.cumsum(one_hot, axis=1)],
            axis=1,
        ) + x0.astype(np.int32)

        c_before = np.take_along_axis(
            counts_t[:, :n, :], e[:, :, None], axis=2
        )[:, :, 0]
        rvals = weight.reciprocal_array(c_before)
        sign = np.where(v % 2 == 0, 1.0, -1.0) * np.where(e == v, 1.0, -1.0)
        if offset0 is None:
            prefix_probe = weight.reciprocal_sum_array(int(counts_t.max()))
            offset0 = float(np.dot(alt, prefix_probe[x0]))
        balance = offset0 + np.concatenate(
            [np.zeros((r, 1)), np.cumsum(sign * rvals, axis=1)], axis=1
        )

        prefix_sums = weight.reciprocal_sum_array(int(counts_t.max()))
        prefix_side = prefix_sums[counts_t] @ alt
        worst = max(worst, float(np.max(np.abs(balance - prefix_side))))
    return worst


@dataclass
class EnumerationReport:
    """Exact one-step drift audit over the full probability tree."""

    depth: int
    internal_nodes: int
    exact: bool
    max_flow_increment: float
    max_balance_increment: float
    max_compensator_residual: float

    @property
    def drift_free(self) -> bool:
        tol = 0.0 if self.exact else 1e-12
        return (
            self.max_flow_increment <= tol
            and self.max_balance_increment <= tol
            and self.max_compensator_residual <= tol
        )


def enumerate_increment_check(
    graph: CycleGraph,
    weight: WeightFunction,
    initial_counts: CountsLike,
    start_vertex: int,
    depth: int,
) -> EnumerationReport:
    """Walk the full probability tree to `depth` and measure, at every
    internal node: the conditional increment of each vertex flow, of the
    alternating balance, and of balance^2 minus its accumulated
    conditional second moments.  All three are zero for a drift-free flow;
    with rational weights the zeros are exact.
    """
    if not 1 <= depth <= _MAX_ENUM_DEPTH:
        raise ValueError(
            f"enumeration depth must be in 1..{_MAX_ENUM_DEPTH}, got {depth}"
        )
    graph.check_vertex(start_vertex)
    counts0 = normalize_counts(graph, initial_counts)
    max_count = max(counts0) + depth + 1
    exact = all(weight.eval_fraction(k) is not None for k in range(max_count))

    def weigh(count):
        return weight.eval_fraction(count) if exact else weight.eval(count)

    def recip(count):
        return 1 / weigh(count) if exact else weight.reciprocal(count)

    alt = alternating_vector(graph.length)
    zero = Fraction(0) if exact else 0.0
    stats = {
        "flow": zero,
        "balance": zero,
        "compensator": zero,
        "nodes": 0,
    }

    def descend(v: int, counts: tuple, balance, level: int):
        if level == depth:
            return
        stats["nodes"] += 1
        left, right = graph.incident_edges(v)
        wl, wr = weigh(counts[left]), weigh(counts[right])
        total = wl + wr
        p_left, p_right = wl / total, wr / total
        rl, rr = recip(counts[left]), recip(counts[right])

        # Vertex flow at v: +rr with p_right, -rl with p_left.
        flow_drift = p_right * rr - p_left * rl
        balance_drift = alt[v] * flow_drift
        second_moment = p_right * rr * rr + p_left * rl * rl

        d_right = balance + alt[v] * rr
        d_left = balance - alt[v] * rl
        sq_drift = (
            p_right * d_right * d_right
            + p_left * d_left * d_left
            - balance * balance
            - second_moment
        )

        stats["flow"] = max(stats["flow"], abs(flow_drift))
        stats["balance"] = max(stats["balance"], abs(balance_drift))
        stats["compensator"] = max(stats["compensator"], abs(sq_drift))

        for edge, prob, nxt_balance in (
            (right, p_right, d_right),
            (left, p_left, d_left),
        ):
            if prob == 0:
                continue
            nxt = list(counts)
            nxt[edge] += 1
            descend(
                graph.step_across(v, edge), tuple(nxt), nxt_balance, level + 1
            )

    start_balance = zero
    if exact:
        start_balance = sum(
            Fraction(alt[i]) * _prefix_sum_fraction(weight, counts0[i])
            for i in range(graph.length)
        )
    else:
        start_balance = float(
            sum(
                alt[i] * weight.reciprocal_sum(counts0[i])
                for i in range(graph.length)
            )
        )
    descend(start_vertex, counts0, start_balance, 0)

    return EnumerationReport(
        depth=depth,
        internal_nodes=stats["nodes"],
        exact=exact,
        max_flow_increment=float(stats["flow"]),
        max_balance_increment=float(stats["balance"]),
        max_compensator_residual=float(stats["compensator"]),
    )


def _prefix_sum_fraction(weight: WeightFunction, count: int) -> Fraction:
    total = Fraction(0)
    for k in range(count):
        total += 1 / weight.eval_fraction(k)
    return total


def increment_second_moment(state: WalkState, weight: WeightFunction) -> float:
    """Conditional second moment of the next balance increment."""
    left, right = state.graph.incident_edges(state.vertex)
    cl, cr = state.counts[left], state.counts[right]
    p_right = weight.right_step_probability(cl, cr)
    rl, rr = weight.reciprocal(cl), weight.reciprocal(cr)
    return p_right * rr * rr + (1.0 - p_right) * rl * rl


def stopping_constant(epsilon: float) -> Fraction:
    """(1+eps)^2 / (1 + (1+eps)^2), the contraction factor of the
    level-crossing argument; 36/37 at the default eps = 5."""
    if not epsilon > 0:
        raise ValueError(f"threshold must be > 0, got {epsilon}")
    one_plus = 1 + Fraction(epsilon)
    sq = one_plus * one_plus
    return sq / (1 + sq)


@dataclass
class StoppingRecord:
    """First exit of |balance| from a level set anchored at one step."""

    anchor: int
    epsilon: float
    level: float
    anchor_tail_variance: float
    stop_index: Optional[int]
    stop_value: float
    overshoot_bound: float
    overshoot_ok: Optional[bool]
    reciprocal_bound_ok: bool

    @property
    def stopped(self) -> bool:
        return self.stop_index is not None


def stopping_time_scan(
    trace: MartingaleTrace, anchor: int, epsilon: float = 5.0
) -> StoppingRecord:
    """Scan for the first step at or after `anchor` where |balance| exceeds
    epsilon * sqrt(tail variance at anchor); audit the overshoot bound."""
    if not 0 <= anchor <= trace.n_steps:
        raise ValueError(
            f"anchor must be in 0..{trace.n_steps}, got {anchor}"
        )
    if not epsilon > 0:
        raise ValueError(f"threshold must be > 0, got {epsilon}")
    tail_var = float(trace.tail_variance[anchor])
    level = epsilon * math.sqrt(tail_var)
    bound = (1.0 + epsilon) * math.sqrt(tail_var)

    above = np.nonzero(np.abs(trace.balance[anchor:]) > level)[0]
    if len(above) == 0:
        stop_index: Optional[int] = None
        stop_value = math.nan
        overshoot_ok: Optional[bool] = None
    else:
        stop_index = anchor + int(above[0])
        stop_value = float(trace.balance[stop_index])
        overshoot_ok = abs(stop_value) <= bound

    recip = trace.weight.reciprocal(int(trace.counts_min[anchor]))
    return StoppingRecord(
        anchor=anchor,
        epsilon=epsilon,
        level=level,
        anchor_tail_variance=tail_var,
        stop_index=stop_index,
        stop_value=stop_value,
        overshoot_bound=bound,
        overshoot_ok=overshoot_ok,
        reciprocal_bound_ok=recip <= math.sqrt(tail_var),
    )


@dataclass
class RankCheckReport:
    """Which linear combinations of vertex flows are degenerate.

    A combination beta annihilates every observed one-step direction
    exactly when the transposed incidence matrix, restricted to observed
    vertices, kills beta.  With every vertex observed that restriction is
    the full matrix: kernel dimension 1 (the alternating vector) on even
    cycles, 0 on odd ones.
    """

    cycle_length: int
    observed_vertices: Tuple[int, ...]
    kernel_dimension: int
    kernel_basis: Tuple[Tuple[int, ...], ...]

    @property
    def rank(self) -> int:
        return self.cycle_length - self.kernel_dimension

    @property
    def alternating_kernel(self) -> bool:
        if self.kernel_dimension != 1:
            return False
        basis = list(self.kernel_basis[0])
        alt = alternating_vector(self.cycle_length)
        return basis == alt or basis == [-x for x in alt]


def linear_combination_rank_check(
    length: int, observed_vertices: Iterable[int]
) -> RankCheckReport:
    """Kernel of the observed-restriction of the transposed incidence map.

    Requires full vertex coverage: a missing vertex leaves directions
    unconstrained and any verdict would overclaim.
    """
    observed = sorted(set(int(v) for v in observed_vertices))
    for v in observed:
        if not 0 <= v < length:
            raise ValueError(f"vertex {v} not on a {length}-cycle")
    missing = [v for v in range(length) if v not in observed]
    if missing:
        raise InsufficientSampleError(
            f"sampled states never visit vertices {missing}; "
            f"rank check needs full coverage"
        )
    # Row v of the constraint system: beta[v-1] + beta[v] = 0.
    rows: List[List[int]] = []
    for v in observed:
        row = [0] * length
        row[(v - 1) % length] += 1
        row[v] += 1
        rows.append(row)
    basis = rational_nullspace(rows)
    return RankCheckReport(
        cycle_length=length,
        observed_vertices=tuple(observed),
        kernel_dimension=len(basis),
        kernel_basis=tuple(tuple(b) for b in basis),
    )


def observed_vertices_from_trajectory(trajectory: Trajectory) -> Tuple[int, ...]:
    return tuple(sorted(set(int(v) for v in trajectory.vertices)))
