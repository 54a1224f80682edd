"""Discrete-time reinforced walk on a cycle.

The walk sits on a vertex and jumps across one of its two incident edges;
the jump probability of an edge is proportional to the weight of its
traversal count.  One uniform draw decides each step: the right edge
(index == current vertex) is traversed exactly when u < p_right.  The
batched sampler advances many replicas in lockstep under per-replica
counter-based streams and reproduces the scalar sampler bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence, Union

import numpy as np

from .cycles import CycleGraph
from .weights import WeightFunction

CountsLike = Union[int, Sequence[int]]

_BLOCK_STEPS = 4096


def normalize_counts(graph: CycleGraph, initial_counts: CountsLike) -> tuple:
    """Expand a scalar or per-edge sequence into a validated count tuple."""
    if isinstance(initial_counts, (int, np.integer)):
        counts = (int(initial_counts),) * graph.length
    else:
        counts = tuple(int(c) for c in initial_counts)
    if len(counts) != graph.length:
        raise ValueError(
            f"need {graph.length} edge counts, got {len(counts)}"
        )
    for e, c in enumerate(counts):
        if c < 0:
            raise ValueError(f"initial count of edge {e} must be >= 0, got {c}")
    return counts


class TransitionLaw(NamedTuple):
    """One-step jump law at a vertex: the two incident edges and their
    probabilities.  p_left + p_right == 1 up to one ulp."""

    left_edge: int
    right_edge: int
    p_left: float
    p_right: float


@dataclass(frozen=True)
class WalkState:
    """Position plus per-edge traversal counts after some number of steps."""

    graph: CycleGraph
    vertex: int
    counts: tuple
    initial_counts: tuple
    step: int

    def __post_init__(self):
        g = self.graph
        g.check_vertex(self.vertex)
        if len(self.counts) != g.length or len(self.initial_counts) != g.length:
            raise ValueError(
                f"count vectors must have length {g.length}, got "
                f"{len(self.counts)} and {len(self.initial_counts)}"
            )
        for e in g.edges:
            if not 0 <= self.initial_counts[e] <= self.counts[e]:
                raise ValueError(
                    f"edge {e}: counts must satisfy 0 <= initial <= current, "
                    f"got initial {self.initial_counts[e]}, current {self.counts[e]}"
                )
        traversals = sum(self.counts) - sum(self.initial_counts)
        if traversals != self.step:
            raise ValueError(
                f"count excess {traversals} does not match step count {self.step}"
            )

    @classmethod
    def initial(
        cls, graph: CycleGraph, vertex: int, initial_counts: CountsLike = 0
    ) -> "WalkState":
        counts = normalize_counts(graph, initial_counts)
        return cls(graph, vertex, counts, counts, 0)


@dataclass
class Trajectory:
    """A finite walk: vertex sequence, traversed edge sequence, final counts.

    vertices has length n_steps + 1 (the start vertex included); edges has
    length n_steps.  seed_info is free-form provenance carried into
    reports.
    """

    graph: CycleGraph
    start_vertex: int
    initial_counts: tuple
    vertices: np.ndarray
    edges: np.ndarray
    final_counts: np.ndarray
    seed_info: Optional[dict] = field(default=None)

    @property
    def n_steps(self) -> int:
        return len(self.edges)

    def edge_occurrences(self) -> np.ndarray:
        return np.bincount(self.edges, minlength=self.graph.length).astype(np.int64)

    def final_state(self) -> WalkState:
        return WalkState(
            self.graph,
            int(self.vertices[-1]),
            tuple(int(c) for c in self.final_counts),
            self.initial_counts,
            self.n_steps,
        )

    def counts_over_time(self) -> np.ndarray:
        """(n_steps + 1, l) integer array of per-edge counts after each step."""
        l = self.graph.length
        one_hot = np.zeros((self.n_steps, l), dtype=np.int64)
        if self.n_steps:
            one_hot[np.arange(self.n_steps), self.edges] = 1
        out = np.vstack(
            [np.zeros(l, dtype=np.int64), np.cumsum(one_hot, axis=0)]
        )
        return out + np.asarray(self.initial_counts, dtype=np.int64)

    def to_csv(self, path) -> None:
        """Write (step, vertex, edge) rows; step 0 carries the start vertex
        and an empty edge field."""
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("step,vertex,edge\n")
            fh.write(f"0,{int(self.vertices[0])},\n")
            for n in range(self.n_steps):
                fh.write(f"{n + 1},{int(self.vertices[n + 1])},{int(self.edges[n])}\n")


def transition_distribution(state: WalkState, weight: WeightFunction) -> TransitionLaw:
    """Jump law at the current vertex, weights evaluated at current counts."""
    left, right = state.graph.incident_edges(state.vertex)
    p_right = weight.right_step_probability(
        state.counts[left], state.counts[right]
    )
    return TransitionLaw(left, right, 1.0 - p_right, p_right)


def step(state: WalkState, weight: WeightFunction, rng: np.random.Generator) -> WalkState:
    """Advance one step, consuming exactly one uniform from rng."""
    law = transition_distribution(state, weight)
    u = rng.random()
    edge = law.right_edge if u < law.p_right else law.left_edge
    counts = list(state.counts)
    counts[edge] += 1
    return WalkState(
        state.graph,
        state.graph.step_across(state.vertex, edge),
        tuple(counts),
        state.initial_counts,
        state.step + 1,
    )


def simulate(
    graph: CycleGraph,
    weight: WeightFunction,
    start_vertex: int,
    initial_counts: CountsLike,
    horizon: int,
    rng: np.random.Generator,
    seed_info: Optional[dict] = None,
) -> Trajectory:
    """Run the walk for exactly `horizon` steps.

    The rng is injected, never constructed here; replaying the same stream
    replays the identical trajectory.  Draw contract matches step(): one
    uniform per step, right edge iff u < p_right.
    """
    if horizon < 0:
        raise ValueError(f"horizon must be >= 0, got {horizon}")
    graph.check_vertex(start_vertex)
    counts0 = normalize_counts(graph, initial_counts)

    l = graph.length
    counts = np.asarray(counts0, dtype=np.int64)
    vertices = np.empty(horizon + 1, dtype=np.int16)
    edges = np.empty(horizon, dtype=np.int16)
    vertices[0] = v = start_vertex
    for n in range(horizon):
        left = (v - 1) % l
        p_right = weight.right_step_probability(counts[left], counts[v])
        if rng.random() < p_right:
            edge, v = v, (v + 1) % l
        else:
            edge, v = left, (v - 1) % l
        counts[edge] += 1
        edges[n] = edge
        vertices[n + 1] = v
    return Trajectory(graph, start_vertex, counts0, vertices, edges, counts, seed_info)


def terminal_streak(edges: np.ndarray) -> int:
    """Length of the maximal constant run at the end of an edge sequence."""
    n = len(edges)
    if n == 0:
        return 0
    changes = np.nonzero(edges[1:] != edges[:-1])[0]
    if len(changes) == 0:
        return n
    return n - (int(changes[-1]) + 1)


def detect_attraction(trajectory: Trajectory, window: int) -> Optional[int]:
    """The single edge filling the last `window` traversals, if any.

    A finite-horizon surrogate: a positive answer says the walk spent its
    entire recent past on one edge, nothing more.
    """
    n = trajectory.n_steps
    if window < 2:
        raise ValueError(f"attraction window must be >= 2, got {window}")
    if window > n:
        raise ValueError(f"attraction window {window} exceeds trajectory length {n}")
    if terminal_streak(trajectory.edges) >= window:
        return int(trajectory.edges[-1])
    return None


def detect_branching_vertex(
    trajectory: Trajectory, tail_fraction: float
) -> Optional[int]:
    """A vertex both of whose incident edges appear in the trajectory tail
    while at least one other edge does not.

    The tail is the last floor(tail_fraction * n_steps) steps.  When
    several vertices qualify the smallest index is returned.
    """
    if not 0.0 < tail_fraction < 1.0:
        raise ValueError(f"tail fraction must be in (0, 1), got {tail_fraction}")
    n = trajectory.n_steps
    tail_len = int(tail_fraction * n)
    if tail_len == 0:
        return None
    tail_counts = np.bincount(
        trajectory.edges[n - tail_len :], minlength=trajectory.graph.length
    )
    return _branching_from_tail_counts(tail_counts, trajectory.graph.length)


def _branching_from_tail_counts(tail_counts: np.ndarray, l: int) -> Optional[int]:
    if not (tail_counts == 0).any():
        return None
    for j in range(l):
        if tail_counts[(j - 1) % l] > 0 and tail_counts[j] > 0:
            others = [e for e in range(l) if e not in ((j - 1) % l, j)]
            if any(tail_counts[e] == 0 for e in others):
                return j
    return None


@dataclass
class BatchWalkResult:
    """Lockstep simulation of many replicas; arrays indexed by replica.

    Replica r uses the stream seeded by SeedSequence(master_seed,
    spawn_key=(replica_offset + r,)), so a batch may be split into chunks
    without changing any replica's trajectory.
    """

    graph: CycleGraph
    horizon: int
    replicas: int
    master_seed: int
    replica_offset: int
    initial_counts: tuple
    start_vertex: int
    final_vertices: np.ndarray
    final_counts: np.ndarray
    last_edges: np.ndarray
    terminal_streaks: np.ndarray
    vertices: Optional[np.ndarray] = None
    edges: Optional[np.ndarray] = None
    snapshot_step: Optional[int] = None
    snapshot_counts: Optional[np.ndarray] = None

    def attracted_edges(self, window: int) -> np.ndarray:
        """Per-replica attracting edge under the window surrogate, -1 if none."""
        if window < 2:
            raise ValueError(f"attraction window must be >= 2, got {window}")
        if window > self.horizon:
            raise ValueError(
                f"attraction window {window} exceeds horizon {self.horizon}"
            )
        hit = self.terminal_streaks >= window
        return np.where(hit, self.last_edges, -1).astype(np.int64)

    def attraction_onsets(self, window: int) -> np.ndarray:
        """Step at which the terminal one-edge run began, -1 where not attracted."""
        hit = self.attracted_edges(window) >= 0
        return np.where(hit, self.horizon - self.terminal_streaks, -1).astype(np.int64)

    def branching_vertices(self) -> np.ndarray:
        """Per-replica branching vertex from tail counts, -1 if none.

        Requires the batch to have been run with a snapshot; the tail is
        everything after the snapshot step.
        """
        if self.snapshot_counts is None:
            raise ValueError("batch was run without a tail snapshot")
        tail = self.final_counts - self.snapshot_counts
        l = self.graph.length
        out = np.full(self.replicas, -1, dtype=np.int64)
        for r in range(self.replicas):
            j = _branching_from_tail_counts(tail[r], l)
            if j is not None:
                out[r] = j
        return out


def _replica_generators(
    master_seed: int, replica_offset: int, replicas: int
) -> list:
    return [
        np.random.Generator(
            np.random.Philox(
                np.random.SeedSequence(master_seed, spawn_key=(replica_offset + r,))
            )
        )
        for r in range(replicas)
    ]


def replica_generator(master_seed: int, replica: int) -> np.random.Generator:
    """The exact stream batch replica `replica` consumes; scalar simulate
    with this generator reproduces that replica bit for bit."""
    return _replica_generators(master_seed, replica, 1)[0]


def simulate_batch(
    graph: CycleGraph,
    weight: WeightFunction,
    start_vertex: int,
    initial_counts: CountsLike,
    horizon: int,
    master_seed: int,
    replicas: int,
    replica_offset: int = 0,
    record: bool = False,
    snapshot_step: Optional[int] = None,
    block_steps: int = _BLOCK_STEPS,
) -> BatchWalkResult:
    """Advance `replicas` independent walks in lockstep.

    Uniforms are drawn in blocks per replica; the draw sequence each
    replica sees is identical to the scalar sampler's, so results do not
    depend on block size, chunking, or scheduling.
    """
    if horizon < 0:
        raise ValueError(f"horizon must be >= 0, got {horizon}")
    if replicas < 1:
        raise ValueError(f"replica count must be >= 1, got {replicas}")
    if block_steps < 1:
        raise ValueError(f"block size must be >= 1, got {block_steps}")
    if snapshot_step is not None and not 0 <= snapshot_step <= horizon:
        raise ValueError(
            f"snapshot step must be in [0, {horizon}], got {snapshot_step}"
        )
    graph.check_vertex(start_vertex)
    counts0 = normalize_counts(graph, initial_counts)

    l = graph.length
    gens = _replica_generators(master_seed, replica_offset, replicas)
    idx = np.arange(replicas)
    pos = np.full(replicas, start_vertex, dtype=np.int64)
    counts = np.tile(np.asarray(counts0, dtype=np.int64), (replicas, 1))
    last_edge = np.full(replicas, -1, dtype=np.int64)
    streak = np.zeros(replicas, dtype=np.int64)

    vertices_rec = edges_rec = None
    if record:
        vertices_rec = np.empty((replicas, horizon + 1), dtype=np.int16)
        edges_rec = np.empty((replicas, horizon), dtype=np.int16)
        vertices_rec[:, 0] = pos
    snapshot = None
    if snapshot_step == 0:
        snapshot = counts.copy()

    uniforms = np.empty((replicas, min(block_steps, max(horizon, 1))))
    t = 0
    while t < horizon:
        span = min(block_steps, horizon - t)
        for r, gen in enumerate(gens):
            uniforms[r, :span] = gen.random(span)
        for s in range(span):
            left = (pos - 1) % l
            p_right = weight.right_step_probability_array(
                counts[idx, left], counts[idx, pos]
            )
            go_right = uniforms[:, s] < p_right
            edge = np.where(go_right, pos, left)
            counts[idx, edge] += 1
            pos = np.where(go_right, pos + 1, pos - 1) % l
            streak = np.where(edge == last_edge, streak + 1, 1)
            last_edge = edge
            if record:
                edges_rec[:, t + s] = edge
                vertices_rec[:, t + s + 1] = pos
            if snapshot_step == t + s + 1:
                snapshot = counts.copy()
        t += span

    return BatchWalkResult(
        graph=graph,
        horizon=horizon,
        replicas=replicas,
        master_seed=master_seed,
        replica_offset=replica_offset,
        initial_counts=counts0,
        start_vertex=start_vertex,
        final_vertices=pos,
        final_counts=counts,
        last_edges=last_edge,
        terminal_streaks=streak,
        vertices=vertices_rec,
        edges=edges_rec,
        snapshot_step=snapshot_step,
        snapshot_counts=snapshot,
    )
