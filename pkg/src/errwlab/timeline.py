"""Continuous-time construction of the reinforced walk.

Each edge carries a time-line: a sequence of dots separated by positive
gaps.  Sitting at a vertex, the walk erases both incident lines at rate 1
from their current residuals; the line whose next dot is reached first
determines the jump, and the losing line keeps its partially erased gap.
With independent exponential gaps of rate W(count) this reproduces the
discrete walk's law at the jump times; with prescribed gaps it is a fully
deterministic dynamical system.  Both modes share one erasure engine, and
exact simultaneous dots resolve to the smaller edge index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from .cycles import CycleGraph
from .errors import ClockUnderflowError, SummabilityError
from .numerics import KahanAccumulator
from .walk import CountsLike, Trajectory, normalize_counts
from .weights import HOLDS, WeightFunction

RANDOM = "random-exponential"
PRESCRIBED = "deterministic-driver"


@dataclass(frozen=True)
class TruncationEvent:
    """A line ran out of dots mid-run; the run stops here, honestly."""

    line: int
    consumed_dots: int
    at_jump: int
    elapsed: float


class ClockFamily:
    """Per-edge gap sequences, either sampled lazily or prescribed.

    Random mode draws gap k of line i as an exponential with mean
    1/W(X0_i + k), lazily in the order the erasure procedure first asks
    for them, from the single generator handed in.  Each line is capped at
    the dot index past which the certified expected tail of gap means is
    below tol; asking beyond the cap reports exhaustion (None).

    Prescribed mode serves finite gap lists verbatim plus a declared tail
    mass that exists only as bookkeeping: dots beyond the lists are
    exhaustion, never extrapolation.
    """

    def __init__(
        self,
        mode: str,
        n_lines: int,
        *,
        weight: Optional[WeightFunction] = None,
        initial_counts: Optional[tuple] = None,
        tol: Optional[float] = None,
        rng: Optional[np.random.Generator] = None,
        caps: Optional[Sequence[int]] = None,
        gap_lists: Optional[Sequence[Sequence[float]]] = None,
        tail_mass: Optional[Sequence[float]] = None,
    ):
        if mode not in (RANDOM, PRESCRIBED):
            raise ValueError(f"unknown clock mode {mode!r}")
        if n_lines < 3:
            raise ValueError(f"need at least 3 lines, got {n_lines}")
        self.mode = mode
        self.n_lines = n_lines
        self.weight = weight
        self.initial_counts = initial_counts
        self.tol = tol
        self._rng = rng
        if mode == RANDOM:
            if weight is None or initial_counts is None or rng is None or caps is None:
                raise ValueError("random clocks need weight, counts, rng, and caps")
            self._caps = tuple(int(c) for c in caps)
            self._gaps = [[] for _ in range(n_lines)]
        else:
            if gap_lists is None:
                raise ValueError("prescribed clocks need gap lists")
            if len(gap_lists) != n_lines:
                raise ValueError(
                    f"need {n_lines} gap lists, got {len(gap_lists)}"
                )
            self._gaps = []
            for i, gaps in enumerate(gap_lists):
                line = [float(g) for g in gaps]
                for n, g in enumerate(line):
                    if not math.isfinite(g) or g <= 0.0:
                        raise ValueError(
                            f"line {i} gap {n} must be finite and > 0, got {g}"
                        )
                self._gaps.append(line)
            self._caps = tuple(len(g) for g in self._gaps)
            if tail_mass is None:
                tail_mass = (0.0,) * n_lines
            tm = tuple(float(t) for t in tail_mass)
            if len(tm) != n_lines:
                raise ValueError(f"need {n_lines} tail masses, got {len(tm)}")
            for i, t in enumerate(tm):
                if not math.isfinite(t) or t < 0.0:
                    raise ValueError(
                        f"line {i} tail mass must be finite and >= 0, got {t}"
                    )
            self.tail_mass = tm

    def dot_budget(self, line: int) -> int:
        return self._caps[line]

    def next_gap(self, line: int, index: int) -> Optional[float]:
        """Gap `index` of `line`, or None past the cap (exhaustion)."""
        if index >= self._caps[line]:
            return None
        gaps = self._gaps[line]
        if self.mode == PRESCRIBED:
            return gaps[index]
        while len(gaps) <= index:
            k = self.initial_counts[line] + len(gaps)
            scale = self.weight.reciprocal(k)
            gap = float(self._rng.exponential(scale)) if scale > 0.0 else 0.0
            if gap <= 0.0:
                raise ClockUnderflowError(
                    f"line {line} gap {len(gaps)} degenerated to {gap} "
                    f"(weight at count {k} out of float range)"
                )
            gaps.append(gap)
        return gaps[index]

    def materialized(self, line: int) -> tuple:
        """Gaps drawn (or prescribed) so far on one line."""
        return tuple(self._gaps[line])

    def as_prescribed(self) -> "ClockFamily":
        """Freeze the materialized gaps into a replayable prescribed family.

        Replay matches the original run as long as it consumes no dot that
        was never materialized.
        """
        return ClockFamily(
            PRESCRIBED,
            self.n_lines,
            gap_lists=[list(g) for g in self._gaps],
        )

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "n_lines": self.n_lines,
            "gap_lists": [list(g) for g in self._gaps],
            "caps": list(self._caps),
        }


def sample_clocks(
    weight: WeightFunction,
    initial_counts: Sequence[int],
    tol: float,
    rng: np.random.Generator,
) -> ClockFamily:
    """Build a lazily sampled exponential clock family.

    Refuses weights whose reciprocal series is not certified convergent:
    without that, the expected total length of a line is infinite and no
    truncation is honest.
    """
    counts = tuple(int(c) for c in initial_counts)
    if len(counts) < 3:
        raise ValueError(f"need at least 3 lines of counts, got {len(counts)}")
    if any(c < 0 for c in counts):
        raise ValueError("initial counts must be >= 0")
    if not (tol > 0.0):
        raise ValueError(f"truncation tolerance must be > 0, got {tol}")
    report = weight.classify()
    if report.verdict != HOLDS:
        raise SummabilityError(
            f"clock truncation impossible: {report.certificate}"
        )
    cutoff = weight.reciprocal_tail_cutoff(tol)
    caps = [max(0, cutoff - c) for c in counts]
    return ClockFamily(
        RANDOM,
        len(counts),
        weight=weight,
        initial_counts=counts,
        tol=tol,
        rng=rng,
        caps=caps,
    )


def prescribed_clocks(
    gap_lists: Sequence[Sequence[float]],
    tail_mass: Optional[Sequence[float]] = None,
) -> ClockFamily:
    return ClockFamily(
        PRESCRIBED, len(gap_lists), gap_lists=gap_lists, tail_mass=tail_mass
    )


@dataclass
class TimelineRun:
    """Outcome of an erasure run: jump times, path, and time accounting.

    occupation[i] is the total time spent waiting at vertex i; line_erased[e]
    is the total erosion of line e, which by construction equals the time
    the walk spent at either endpoint of e.  Their totals tie together:
    sum(occupation) == elapsed, and each jump time is the elapsed value at
    that jump.
    """

    graph: CycleGraph
    start_vertex: int
    initial_counts: tuple
    max_jumps: int
    jump_times: np.ndarray
    vertices: np.ndarray
    edges: np.ndarray
    occupation: np.ndarray
    line_erased: np.ndarray
    elapsed: float
    consumed: np.ndarray
    residuals: np.ndarray
    truncation: Optional[TruncationEvent] = field(default=None)

    @property
    def n_jumps(self) -> int:
        return len(self.edges)

    def discrete(self) -> Trajectory:
        """The embedded discrete trajectory (vertex at each jump)."""
        final = np.asarray(self.initial_counts, dtype=np.int64) + np.bincount(
            self.edges, minlength=self.graph.length
        )
        return Trajectory(
            graph=self.graph,
            start_vertex=self.start_vertex,
            initial_counts=self.initial_counts,
            vertices=self.vertices.astype(np.int16),
            edges=self.edges.astype(np.int16),
            final_counts=final,
            seed_info={"engine": "timeline"},
        )

    def to_csv(self, path) -> None:
        """Write (jump, time, vertex, edge) rows; jump 0 is the start."""
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("jump,time,vertex,edge\n")
            fh.write(f"0,0,{int(self.vertices[0])},\n")
            for k in range(self.n_jumps):
                fh.write(
                    f"{k + 1},{self.jump_times[k]!r},"
                    f"{int(self.vertices[k + 1])},{int(self.edges[k])}\n"
                )


def run_timeline(
    clocks: ClockFamily,
    graph: CycleGraph,
    start_vertex: int,
    max_jumps: int,
) -> TimelineRun:
    """Run the erasure procedure for at most max_jumps jumps.

    An exhausted line stops the run with an explicit truncation event in
    the result; the procedure never invents dots beyond the family.
    """
    if clocks.n_lines != graph.length:
        raise ValueError(
            f"clock family has {clocks.n_lines} lines, graph has {graph.length} edges"
        )
    if max_jumps < 0:
        raise ValueError(f"max jumps must be >= 0, got {max_jumps}")
    graph.check_vertex(start_vertex)

    l = graph.length
    residual: list = [None] * l
    consumed = [0] * l
    erased = [KahanAccumulator() for _ in range(l)]
    occupation = [KahanAccumulator() for _ in range(l)]
    elapsed = KahanAccumulator()
    jump_times: list = []
    vertices = [start_vertex]
    edges: list = []
    truncation = None

    v = start_vertex
    for jump in range(max_jumps):
        a, b = graph.incident_edges(v)
        stop = False
        for line in (a, b):
            if residual[line] is None:
                gap = clocks.next_gap(line, consumed[line])
                if gap is None:
                    truncation = TruncationEvent(
                        line, consumed[line], jump, elapsed.value
                    )
                    stop = True
                    break
                residual[line] = gap
        if stop:
            break

        ra, rb = residual[a], residual[b]
        if ra < rb:
            winner, duration = a, ra
        elif rb < ra:
            winner, duration = b, rb
        else:
            # Simultaneous dots: traverse the smaller edge index.
            winner, duration = min(a, b), ra
        loser = b if winner == a else a

        elapsed.add(duration)
        occupation[v].add(duration)
        erased[a].add(duration)
        erased[b].add(duration)
        residual[loser] = residual[loser] - duration
        residual[winner] = None
        consumed[winner] += 1

        v = graph.step_across(v, winner)
        jump_times.append(elapsed.value)
        vertices.append(v)
        edges.append(winner)

    initial = (
        clocks.initial_counts
        if clocks.initial_counts is not None
        else (0,) * l
    )
    return TimelineRun(
        graph=graph,
        start_vertex=start_vertex,
        initial_counts=tuple(initial),
        max_jumps=max_jumps,
        jump_times=np.asarray(jump_times, dtype=np.float64),
        vertices=np.asarray(vertices, dtype=np.int16),
        edges=np.asarray(edges, dtype=np.int16),
        occupation=np.asarray([acc.value for acc in occupation]),
        line_erased=np.asarray([acc.value for acc in erased]),
        elapsed=elapsed.value,
        consumed=np.asarray(consumed, dtype=np.int64),
        residuals=np.asarray(
            [math.nan if r is None else r for r in residual]
        ),
        truncation=truncation,
    )


def parity_boundary_sums(run: TimelineRun) -> tuple:
    """Total erosion of even-indexed lines and of odd-indexed lines.

    On an even cycle the two incident edges of any vertex have opposite
    index parity, so each parity class erodes at rate exactly 1 whenever
    the walk is anywhere: both sums equal the elapsed time, pathwise.  On
    an odd cycle the wrap-around edge breaks the parity split, so the
    request is rejected.
    """
    if not run.graph.is_even:
        raise ValueError(
            f"parity boundary sums need an even cycle, got length {run.graph.length}"
        )
    even = math.fsum(run.line_erased[0::2])
    odd = math.fsum(run.line_erased[1::2])
    return even, odd


def sample_line_total(
    weight: WeightFunction,
    start_count: int,
    tol: float,
    rng: np.random.Generator,
) -> float:
    """One sample of a line's total truncated length: the sum of its
    exponential gaps from start_count up to the certified cutoff."""
    if start_count < 0:
        raise ValueError(f"start count must be >= 0, got {start_count}")
    cutoff = weight.reciprocal_tail_cutoff(tol)
    acc = KahanAccumulator()
    for k in range(start_count, cutoff):
        acc.add(rng.exponential(weight.reciprocal(k)))
    return acc.value


@dataclass
class CouplingReport:
    """Chi-square comparison of timeline prefixes against exact path law."""

    prefix_len: int
    replicas: int
    statistic: float
    p_value: float
    dof: int
    observed: dict
    expected: dict

    def passed(self, significance: float = 0.001) -> bool:
        return self.p_value > significance


def exact_prefix_distribution(
    graph: CycleGraph,
    weight: WeightFunction,
    start_vertex: int,
    initial_counts: CountsLike,
    prefix_len: int,
) -> dict:
    """Exact law of the first prefix_len traversed edges of the discrete
    walk, as {edge tuple: probability}.

    Probabilities are exact rationals when the weight family supports
    rational evaluation, floats otherwise.
    """
    if prefix_len < 0:
        raise ValueError(f"prefix length must be >= 0, got {prefix_len}")
    if prefix_len > 20:
        raise ValueError(
            f"prefix length {prefix_len} enumerates 2^{prefix_len} paths; refusing"
        )
    graph.check_vertex(start_vertex)
    counts0 = normalize_counts(graph, initial_counts)
    exact = all(
        weight.eval_fraction(c + k) is not None
        for c in set(counts0)
        for k in range(prefix_len + 1)
    )

    def weigh(count: int):
        if exact:
            return weight.eval_fraction(count)
        return weight.eval(count)

    out: dict = {}

    def descend(v: int, counts: tuple, path: tuple, prob):
        if len(path) == prefix_len:
            out[path] = out.get(path, Fraction(0) if exact else 0.0) + prob
            return
        left, right = graph.incident_edges(v)
        wl, wr = weigh(counts[left]), weigh(counts[right])
        total = wl + wr
        for edge, w in ((left, wl), (right, wr)):
            nxt = list(counts)
            nxt[edge] += 1
            descend(
                graph.step_across(v, edge),
                tuple(nxt),
                path + (edge,),
                prob * w / total,
            )

    one = Fraction(1) if exact else 1.0
    descend(start_vertex, counts0, (), one)
    return out


def coupling_check(
    weight: WeightFunction,
    graph: CycleGraph,
    start_vertex: int,
    initial_counts: CountsLike,
    prefix_len: int,
    replicas: int,
    rng: np.random.Generator,
    clock_tol: float = 1e-9,
) -> CouplingReport:
    """Compare timeline-run prefixes against the exact discrete law.

    Each replica builds a fresh clock family from the shared rng, runs
    prefix_len jumps, and contributes one observed edge sequence.  The
    report carries the chi-square statistic over all possible sequences.
    """
    if replicas < 1:
        raise ValueError(f"replica count must be >= 1, got {replicas}")
    counts0 = normalize_counts(graph, initial_counts)
    expected = exact_prefix_distribution(
        graph, weight, start_vertex, counts0, prefix_len
    )

    observed: dict = {path: 0 for path in expected}
    for _ in range(replicas):
        clocks = sample_clocks(weight, counts0, clock_tol, rng)
        run = run_timeline(clocks, graph, start_vertex, prefix_len)
        if run.n_jumps < prefix_len:
            raise RuntimeError(
                f"timeline run truncated at {run.n_jumps} < {prefix_len} jumps; "
                f"tighten the clock tolerance"
            )
        observed[tuple(int(e) for e in run.edges)] += 1

    statistic = 0.0
    for path, p in expected.items():
        exp_count = float(p) * replicas
        diff = observed[path] - exp_count
        statistic += diff * diff / exp_count
    dof = len(expected) - 1
    p_value = float(stats.chi2.sf(statistic, dof))
    return CouplingReport(
        prefix_len=prefix_len,
        replicas=replicas,
        statistic=statistic,
        p_value=p_value,
        dof=dof,
        observed={path: obs for path, obs in observed.items()},
        expected={path: float(p) for path, p in expected.items()},
    )
