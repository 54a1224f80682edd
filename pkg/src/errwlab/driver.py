"""Deterministic drivers for the time-line dynamics.

A driver prescribes every gap on every line, turning the erasure procedure
into a deterministic dynamical system whose occupation vector can be
edited surgically.  The one nontrivial edit implemented here delays the
walk's first departure from a chosen vertex by r: bump the two gaps that
are active on that vertex's incident lines at the moment of first arrival.
Both races at that stay see the same +r, so every outcome downstream is
unchanged and exactly r of extra waiting lands on the chosen vertex.
Which two gap entries are active depends on how the vertex is first
reached, hence the three-case edit in delay_first_departure.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .circulant import boundary_totals
from .cycles import CycleGraph
from .timeline import TimelineRun, prescribed_clocks, run_timeline


@dataclass(frozen=True)
class Driver:
    """Finite prescribed gap lists per line, plus declared tail mass.

    The tail mass is bookkeeping for the (summable) remainder that a
    truncation dropped; the dynamics never touch it.  Runs that consume a
    line past its list end stop with a truncation event.
    """

    gap_lists: tuple
    tail_mass: tuple
    start_vertex: int

    def __post_init__(self):
        if len(self.gap_lists) < 3:
            raise ValueError(
                f"driver needs at least 3 lines, got {len(self.gap_lists)}"
            )
        if len(self.tail_mass) != len(self.gap_lists):
            raise ValueError(
                f"driver has {len(self.gap_lists)} lines but "
                f"{len(self.tail_mass)} tail masses"
            )
        for i, gaps in enumerate(self.gap_lists):
            for n, g in enumerate(gaps):
                if not math.isfinite(g) or g <= 0.0:
                    raise ValueError(
                        f"driver line {i} gap {n} must be finite and > 0, got {g}"
                    )
        for i, t in enumerate(self.tail_mass):
            if not math.isfinite(t) or t < 0.0:
                raise ValueError(
                    f"driver line {i} tail mass must be finite and >= 0, got {t}"
                )
        if not 0 <= self.start_vertex < len(self.gap_lists):
            raise ValueError(
                f"start vertex {self.start_vertex} not a vertex of a "
                f"{len(self.gap_lists)}-cycle"
            )

    @classmethod
    def build(
        cls,
        gap_lists: Sequence[Sequence[float]],
        start_vertex: int,
        tail_mass: Optional[Sequence[float]] = None,
    ) -> "Driver":
        lists = tuple(tuple(float(g) for g in gaps) for gaps in gap_lists)
        if tail_mass is None:
            tail_mass = (0.0,) * len(lists)
        return cls(lists, tuple(float(t) for t in tail_mass), int(start_vertex))

    @property
    def n_lines(self) -> int:
        return len(self.gap_lists)

    def line_total(self, line: int) -> float:
        """Declared total length of a line: listed gaps plus tail mass."""
        return math.fsum(self.gap_lists[line]) + self.tail_mass[line]

    def to_dict(self) -> dict:
        return {
            "start_vertex": self.start_vertex,
            "gap_lists": [list(g) for g in self.gap_lists],
            "tail_mass": list(self.tail_mass),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "Driver":
        extra = set(data) - {"start_vertex", "gap_lists", "tail_mass"}
        if extra:
            raise ValueError(f"unknown driver keys {sorted(extra)}")
        return cls.build(
            data["gap_lists"], data["start_vertex"], data.get("tail_mass")
        )

    @classmethod
    def from_json(cls, text: str) -> "Driver":
        return cls.from_dict(json.loads(text))


def make_random_driver(
    n_lines: int,
    gaps_per_line: int,
    rng: np.random.Generator,
    start_vertex: int = 0,
) -> Driver:
    """Random strictly positive gap lists (unit-mean exponentials), for
    fixtures and torture tests."""
    if gaps_per_line < 1:
        raise ValueError(f"need at least 1 gap per line, got {gaps_per_line}")
    lists = []
    for _ in range(n_lines):
        gaps = rng.exponential(1.0, size=gaps_per_line)
        if (gaps <= 0.0).any():
            raise FloatingPointError("degenerate zero gap drawn")
        lists.append(gaps.tolist())
    return Driver.build(lists, start_vertex)


@dataclass
class OccupationReport:
    """Per-vertex waiting times y, per-edge boundary times z, coverage flag.

    z is accumulated by the run as line erosion, independently of y; the
    incidence relation z == boundary_totals(y) is a property to check, not
    a definition.
    """

    occupation: np.ndarray
    boundary: np.ndarray
    visited_all: bool

    def incidence_residual(self) -> float:
        """max |z - M y|: how far the two accumulations disagree."""
        predicted = boundary_totals(len(self.occupation), self.occupation)
        return float(np.max(np.abs(self.boundary - predicted)))


@dataclass
class DrivenWalkResult:
    report: OccupationReport
    run: TimelineRun

    @property
    def truncated(self) -> bool:
        return self.run.truncation is not None


def run_driven_walk(
    driver: Driver, graph: CycleGraph, max_jumps: int
) -> DrivenWalkResult:
    """Deterministic erasure run of the driver, with occupation accounting."""
    if driver.n_lines != graph.length:
        raise ValueError(
            f"driver has {driver.n_lines} lines, graph has {graph.length} edges"
        )
    clocks = prescribed_clocks(driver.gap_lists, driver.tail_mass)
    run = run_timeline(clocks, graph, driver.start_vertex, max_jumps)
    visited_all = len(set(int(v) for v in run.vertices)) == graph.length
    report = OccupationReport(
        occupation=run.occupation.copy(),
        boundary=run.line_erased.copy(),
        visited_all=visited_all,
    )
    return DrivenWalkResult(report=report, run=run)


def first_visit_jump(run: TimelineRun, vertex: int) -> Optional[int]:
    """Index of the jump after which the walk first stands on vertex, 0 for
    the start vertex, None if never visited."""
    hits = np.nonzero(run.vertices == vertex)[0]
    if len(hits) == 0:
        return None
    return int(hits[0])


def delay_first_departure(
    driver: Driver,
    graph: CycleGraph,
    vertex: int,
    delay: float,
    base_run: TimelineRun,
) -> Driver:
    """Driver whose walk waits `delay` longer at its first stay at `vertex`.

    The two bumped entries are the gaps active on the vertex's incident
    lines when it is first reached, read off the base run:

      - start vertex: gap 0 of both incident lines;
      - first reached across its left edge: gap 1 of the left line (its
        gap 0 was just consumed by the arrival), gap 0 of the right line;
      - otherwise (first reached across its right edge, or never reached):
        gap 0 of the left line, gap 1 of the right line.

    When the base walk never departs from `vertex`, the bumped gaps are
    never consumed and the perturbed walk is identical.
    """
    if not delay > 0.0:
        raise ValueError(f"delay must be > 0, got {delay}")
    graph.check_vertex(vertex)
    if driver.n_lines != graph.length:
        raise ValueError(
            f"driver has {driver.n_lines} lines, graph has {graph.length} edges"
        )
    if base_run.start_vertex != driver.start_vertex:
        raise ValueError(
            f"base run starts at {base_run.start_vertex}, driver at "
            f"{driver.start_vertex}"
        )

    left, right = graph.incident_edges(vertex)
    if vertex == driver.start_vertex:
        bumps = ((left, 0), (right, 0))
    else:
        first = first_visit_jump(base_run, vertex)
        if first is not None and int(base_run.edges[first - 1]) == left:
            bumps = ((left, 1), (right, 0))
        else:
            bumps = ((left, 0), (right, 1))

    lists = [list(gaps) for gaps in driver.gap_lists]
    for line, index in bumps:
        if index >= len(lists[line]):
            raise ValueError(
                f"driver line {line} has only {len(lists[line])} gaps; "
                f"cannot bump gap {index}"
            )
        lists[line][index] += delay
    return Driver.build(lists, driver.start_vertex, driver.tail_mass)
