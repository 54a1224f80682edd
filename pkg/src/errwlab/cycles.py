"""Cycle graphs with modular edge indexing.

Vertices are 0..l-1 and edge i joins vertices i and i+1 (mod l), so every
vertex v sits on exactly two edges: edge v-1 (toward v-1) and edge v
(toward v+1). All incidence queries reduce to index arithmetic mod l.
"""

from __future__ import annotations

from dataclasses import dataclass

MIN_CYCLE_LENGTH = 3


@dataclass(frozen=True)
class CycleGraph:
    """Cycle of ``length`` vertices; immutable, safe to share."""

    length: int

    def __post_init__(self) -> None:
        if self.length < MIN_CYCLE_LENGTH:
            raise ValueError(
                f"cycle length must be >= {MIN_CYCLE_LENGTH}, got {self.length}"
            )

    @property
    def vertices(self) -> range:
        return range(self.length)

    @property
    def edges(self) -> range:
        return range(self.length)

    def check_vertex(self, v: int) -> int:
        if not 0 <= v < self.length:
            raise ValueError(f"vertex {v} out of range for cycle of length {self.length}")
        return v

    def incident_edges(self, v: int) -> tuple[int, int]:
        """The two edges at vertex v, as (edge toward v-1, edge toward v+1)."""
        self.check_vertex(v)
        return ((v - 1) % self.length, v)

    def edge_between(self, v: int, w: int) -> int | None:
        """Edge index joining v and w, or None if they are not adjacent."""
        self.check_vertex(v)
        self.check_vertex(w)
        if (v + 1) % self.length == w:
            return v
        if (w + 1) % self.length == v:
            return w
        return None

    def edge_endpoints(self, e: int) -> tuple[int, int]:
        if not 0 <= e < self.length:
            raise ValueError(f"edge {e} out of range for cycle of length {self.length}")
        return (e, (e + 1) % self.length)

    def step_across(self, v: int, e: int) -> int:
        """Vertex reached from v by traversing incident edge e."""
        left, right = self.incident_edges(v)
        if e == right:
            return (v + 1) % self.length
        if e == left:
            return (v - 1) % self.length
        raise ValueError(f"edge {e} is not incident to vertex {v}")

    @property
    def is_even(self) -> bool:
        return self.length % 2 == 0


def make_cycle(length: int) -> CycleGraph:
    return CycleGraph(length)
