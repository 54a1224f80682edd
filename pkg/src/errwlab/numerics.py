"""Small numerical helpers shared across the package."""

from __future__ import annotations

import math


class KahanAccumulator:
    """Compensated (Neumaier) running sum.

    Keeps a correction term alongside the running total so that adding many
    small terms to a large total does not silently drop their low bits.
    Needed because the identity checks in this package are asserted to 1e-9
    over sums of 10^4..10^6 terms.
    """

    __slots__ = ("total", "correction")

    def __init__(self, value: float = 0.0) -> None:
        self.total = float(value)
        self.correction = 0.0

    def add(self, value: float) -> None:
        t = self.total + value
        if abs(self.total) >= abs(value):
            self.correction += (self.total - t) + value
        else:
            self.correction += (value - t) + self.total
        self.total = t

    @property
    def value(self) -> float:
        return self.total + self.correction

    def copy(self) -> "KahanAccumulator":
        out = KahanAccumulator()
        out.total = self.total
        out.correction = self.correction
        return out


def kahan_sum(terms) -> float:
    acc = KahanAccumulator()
    for t in terms:
        acc.add(t)
    return acc.value


def stable_sigmoid(x: float) -> float:
    """1 / (1 + exp(-x)) without overflow for large |x|."""
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)
