"""Reinforcement weight families.

A weight function maps an edge traversal count k >= 0 to a positive weight
W(k).  The walk engines only consume weights through the small interface
here: pointwise evaluation, jump probabilities, and compensated prefix sums
of 1/W(k) and 1/W(k)^2 with certified tail bounds.

Three families are provided.  Polynomial growth (k+1)^p, geometric growth
b^k, and an explicit table of values with an optional parametric tail.  A
table without a declared tail is only usable up to its length and its
summability verdict is "unknown".
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import SummabilityError, TailTruncationError
from .numerics import KahanAccumulator

# Classification verdicts for the reciprocal series sum(1/W(k)).
HOLDS = "holds"
FAILS = "fails"
UNKNOWN = "unknown"

# Above this exponent a polynomial weight can overflow float range at
# realistic traversal counts, so jump probabilities go through log space.
_POWER_LOG_THRESHOLD = 50.0

# Prefix sums are cached one Python float per term; past a couple of
# million terms the cache cost dwarfs any plausible use, so certified
# summation refuses rather than grinding.
_DEFAULT_TERM_BUDGET = 2_000_000


@dataclass(frozen=True)
class SummabilityReport:
    """Outcome of classifying sum(1/W(k)): a verdict and a short reason."""

    verdict: str
    certificate: str

    @property
    def strongly_reinforcing(self) -> bool:
        return self.verdict == HOLDS


def _sigmoid_array(x: np.ndarray) -> np.ndarray:
    # Branch on sign so neither exp() argument is large and positive.
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0.0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


class _PrefixCache:
    """Compensated prefix sums of a nonnegative term sequence, grown lazily.

    prefix(n) = sum of term(k) for k < n, so prefix(0) == 0.  The partial
    sums are cached; growing the cache is guarded by a lock so families can
    be shared across threads.
    """

    def __init__(self, term):
        self._term = term
        self._sums = [0.0]
        self._acc = KahanAccumulator()
        self._lock = threading.Lock()
        self._snapshot = np.zeros(1)

    def value(self, n: int) -> float:
        if n < 0:
            raise ValueError(f"prefix length must be >= 0, got {n}")
        if n >= len(self._sums):
            self._grow(n)
        return self._sums[n]

    def array(self, n: int) -> np.ndarray:
        """Prefix sums for lengths 0..n inclusive as a read-only array."""
        self.value(n)
        with self._lock:
            if len(self._snapshot) < len(self._sums):
                self._snapshot = np.array(self._sums)
                self._snapshot.flags.writeable = False
        return self._snapshot[: n + 1]

    def _grow(self, n: int) -> None:
        with self._lock:
            while len(self._sums) <= n:
                # Appending the prefix of length L == len(self._sums) adds
                # the term with index L - 1.
                self._acc.add(self._term(len(self._sums) - 1))
                self._sums.append(self._acc.value)


class WeightFunction:
    """Interface shared by all weight families."""

    family = "abstract"

    # Subclasses set this; True routes jump probabilities through log space.
    _prob_via_logs = False

    def __init__(self):
        self._recip_cache = _PrefixCache(self._reciprocal)
        self._sq_cache = _PrefixCache(self._squared_reciprocal)

    # -- pointwise -----------------------------------------------------

    def eval(self, k: int) -> float:
        """W(k).  Raises OverflowError when the value leaves float range."""
        self._check_count(k)
        return self._eval(k)

    def log_eval(self, k: int) -> float:
        """log W(k), finite even where eval() would overflow."""
        self._check_count(k)
        return self._log_eval(k)

    def eval_fraction(self, k: int) -> Optional[Fraction]:
        """Exact rational W(k) when the family parameters allow it."""
        self._check_count(k)
        return self._eval_fraction(k)

    def eval_array(self, counts: np.ndarray) -> np.ndarray:
        counts = np.asarray(counts)
        if counts.size and int(counts.min()) < 0:
            raise ValueError("traversal counts must be >= 0")
        return self._eval_array(counts)

    def log_eval_array(self, counts: np.ndarray) -> np.ndarray:
        counts = np.asarray(counts)
        if counts.size and int(counts.min()) < 0:
            raise ValueError("traversal counts must be >= 0")
        return self._log_eval_array(counts)

    def reciprocal(self, k: int) -> float:
        """1/W(k), computed directly so huge weights underflow to 0.0
        instead of overflowing on the way."""
        self._check_count(k)
        return self._reciprocal(k)

    def reciprocal_array(self, counts: np.ndarray) -> np.ndarray:
        counts = np.asarray(counts)
        if counts.size and int(counts.min()) < 0:
            raise ValueError("traversal counts must be >= 0")
        return self._reciprocal_array(counts)

    # -- jump probabilities --------------------------------------------

    def right_step_probability_array(
        self, counts_left: np.ndarray, counts_right: np.ndarray
    ) -> np.ndarray:
        """P(traverse right edge) for paired count arrays.

        W(c_right) / (W(c_left) + W(c_right)), evaluated directly for
        slowly growing families and through a stable sigmoid of the log
        ratio where direct evaluation could overflow.
        """
        if self._prob_via_logs:
            diff = self.log_eval_array(counts_right) - self.log_eval_array(counts_left)
            return _sigmoid_array(np.asarray(diff, dtype=np.float64))
        wl = self.eval_array(counts_left)
        wr = self.eval_array(counts_right)
        return wr / (wl + wr)

    def right_step_probability(self, count_left: int, count_right: int) -> float:
        # Deliberately routed through the array path: the scalar walk and
        # the batched walk must see bit-identical probabilities.
        out = self.right_step_probability_array(
            np.asarray([count_left]), np.asarray([count_right])
        )
        return float(out[0])

    # -- reciprocal prefix sums ----------------------------------------

    def reciprocal_sum(self, n: int) -> float:
        """sum of 1/W(k) for k < n (compensated, cached)."""
        return self._recip_cache.value(n)

    def reciprocal_sum_array(self, n: int) -> np.ndarray:
        """Prefix sums of 1/W for lengths 0..n inclusive."""
        return self._recip_cache.array(n)

    def squared_reciprocal_sum(self, n: int) -> float:
        """sum of 1/W(k)^2 for k < n."""
        return self._sq_cache.value(n)

    def squared_reciprocal_sum_array(self, n: int) -> np.ndarray:
        return self._sq_cache.array(n)

    # -- certified tails ------------------------------------------------

    def reciprocal_tail_bound(self, m: int) -> float:
        """Certified upper bound on sum_{k >= m} 1/W(k); inf if none."""
        if m < 0:
            raise ValueError(f"tail start must be >= 0, got {m}")
        return self._recip_tail_bound(m)

    def squared_reciprocal_tail_bound(self, m: int) -> float:
        if m < 0:
            raise ValueError(f"tail start must be >= 0, got {m}")
        return self._sq_tail_bound(m)

    def reciprocal_tail_cutoff(self, tol: float) -> int:
        """Smallest index m with a certified bound sum_{k >= m} 1/W(k) < tol.

        Raises SummabilityError when no finite cutoff exists (divergent or
        undecided reciprocal series).
        """
        if not (tol > 0.0):
            raise ValueError(f"tolerance must be > 0, got {tol}")
        return self._recip_tail_cutoff(tol)

    def reciprocal_sum_total(
        self, tol: float, max_terms: int = _DEFAULT_TERM_BUDGET
    ) -> float:
        """sum_{k >= 0} 1/W(k), truncated with certified remainder < tol.

        Raises SummabilityError if the series is divergent or undecided,
        and TailTruncationError if reaching the tolerance would need more
        than max_terms terms (slowly converging polynomial families can be
        astronomically expensive at tight tolerances).
        """
        if not (tol > 0.0):
            raise ValueError(f"tolerance must be > 0, got {tol}")
        report = self.classify()
        if report.verdict != HOLDS:
            raise SummabilityError(
                f"total reciprocal sum undefined: {report.certificate}"
            )
        cutoff = self._recip_tail_cutoff(tol)
        if cutoff > max_terms:
            raise TailTruncationError(
                f"reciprocal sum to tolerance {tol:g} needs {cutoff} terms, "
                f"budget is {max_terms}",
                required_terms=cutoff,
            )
        return self.reciprocal_sum(cutoff)

    def tail_variance(
        self, m: int, tol: float = 1e-12, max_terms: int = _DEFAULT_TERM_BUDGET
    ) -> float:
        """sum_{k >= m} 1/W(k)^2, truncated with certified remainder < tol.

        Monotone nonincreasing in m by construction: both endpoints come
        from the same cached prefix sequence.  Near-critical families can
        push the certified cutoff beyond any sane budget; that raises
        TailTruncationError instead of silently eating memory.
        """
        if m < 0:
            raise ValueError(f"tail start must be >= 0, got {m}")
        cutoff = self._guarded_sq_cutoff(m, tol, max_terms)
        return self.squared_reciprocal_sum(cutoff) - self.squared_reciprocal_sum(m)

    def tail_variance_array(
        self,
        max_m: int,
        tol: float = 1e-12,
        max_terms: int = _DEFAULT_TERM_BUDGET,
    ) -> np.ndarray:
        """tail_variance(m, tol) for every m in 0..max_m, vectorized."""
        if max_m < 0:
            raise ValueError(f"max tail start must be >= 0, got {max_m}")
        cutoff = self._guarded_sq_cutoff(max_m, tol, max_terms)
        prefix = self.squared_reciprocal_sum_array(cutoff)
        return prefix[cutoff] - prefix[: max_m + 1]

    def _guarded_sq_cutoff(self, m: int, tol: float, max_terms: int) -> int:
        if not (tol > 0.0):
            raise ValueError(f"tolerance must be > 0, got {tol}")
        cutoff = max(self._sq_tail_cutoff(tol), m)
        if cutoff > max_terms:
            raise TailTruncationError(
                f"squared-reciprocal tail to tolerance {tol:g} needs "
                f"{cutoff} terms, budget is {max_terms}",
                required_terms=cutoff,
            )
        return cutoff

    # -- family hooks ---------------------------------------------------

    def classify(self) -> SummabilityReport:
        raise NotImplementedError

    def describe(self) -> dict:
        """Config-shaped description, inverse of weight_from_config()."""
        raise NotImplementedError

    def _eval(self, k: int) -> float:
        raise NotImplementedError

    def _log_eval(self, k: int) -> float:
        raise NotImplementedError

    def _eval_fraction(self, k: int) -> Optional[Fraction]:
        raise NotImplementedError

    def _eval_array(self, counts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _log_eval_array(self, counts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _reciprocal(self, k: int) -> float:
        raise NotImplementedError

    def _reciprocal_array(self, counts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _squared_reciprocal(self, k: int) -> float:
        raise NotImplementedError

    def _recip_tail_bound(self, m: int) -> float:
        raise NotImplementedError

    def _sq_tail_bound(self, m: int) -> float:
        raise NotImplementedError

    def _recip_tail_cutoff(self, tol: float) -> int:
        raise NotImplementedError

    def _sq_tail_cutoff(self, tol: float) -> int:
        raise NotImplementedError

    @staticmethod
    def _check_count(k: int) -> None:
        if k < 0:
            raise ValueError(f"traversal count must be >= 0, got {k}")


class PowerWeight(WeightFunction):
    """W(k) = (k+1)^exponent with exponent > 0.

    Reciprocals form a p-series, so the strong reinforcement condition
    holds exactly when exponent > 1.  Tail bounds come from the integral
    comparison sum_{k >= m} (k+1)^{-p} <= m^{1-p} / (p-1) for m >= 1.
    """

    family = "power"

    def __init__(self, exponent: float):
        exponent = float(exponent)
        if not math.isfinite(exponent) or exponent <= 0.0:
            raise ValueError(f"power exponent must be finite and > 0, got {exponent}")
        self.exponent = exponent
        self._prob_via_logs = exponent > _POWER_LOG_THRESHOLD
        self._integer_exponent = exponent == int(exponent)
        super().__init__()

    def classify(self) -> SummabilityReport:
        p = self.exponent
        if p > 1.0:
            return SummabilityReport(
                HOLDS,
                f"p-series of reciprocals with exponent {p:g} > 1 converges "
                f"by integral comparison",
            )
        return SummabilityReport(
            FAILS,
            f"p-series of reciprocals with exponent {p:g} <= 1 diverges",
        )

    def describe(self) -> dict:
        return {"family": "power", "exponent": self.exponent}

    def _eval(self, k: int) -> float:
        return math.pow(k + 1, self.exponent)

    def _log_eval(self, k: int) -> float:
        return self.exponent * math.log1p(k)

    def _eval_fraction(self, k: int) -> Optional[Fraction]:
        if self._integer_exponent:
            return Fraction((k + 1) ** int(self.exponent))
        return None

    def _eval_array(self, counts: np.ndarray) -> np.ndarray:
        return np.power(counts + 1.0, self.exponent)

    def _log_eval_array(self, counts: np.ndarray) -> np.ndarray:
        return self.exponent * np.log1p(counts.astype(np.float64))

    def _reciprocal(self, k: int) -> float:
        return math.pow(k + 1, -self.exponent)

    def _reciprocal_array(self, counts: np.ndarray) -> np.ndarray:
        return np.power(counts + 1.0, -self.exponent)

    def _squared_reciprocal(self, k: int) -> float:
        return math.pow(k + 1, -2.0 * self.exponent)

    def _recip_tail_bound(self, m: int) -> float:
        return self._p_series_tail(m, self.exponent)

    def _sq_tail_bound(self, m: int) -> float:
        return self._p_series_tail(m, 2.0 * self.exponent)

    @staticmethod
    def _p_series_tail(m: int, p: float) -> float:
        if p <= 1.0:
            return math.inf
        if m == 0:
            # First term is 1, remaining tail starts at m = 1.
            return 1.0 + 1.0 / (p - 1.0)
        return math.pow(m, 1.0 - p) / (p - 1.0)

    def _recip_tail_cutoff(self, tol: float) -> int:
        return self._p_series_cutoff(tol, self.exponent)

    def _sq_tail_cutoff(self, tol: float) -> int:
        return self._p_series_cutoff(tol, 2.0 * self.exponent)

    @staticmethod
    def _p_series_cutoff(tol: float, p: float) -> int:
        if p <= 1.0:
            raise SummabilityError(
                f"p-series tail with exponent {p:g} <= 1 has no finite cutoff"
            )
        # Invert m^{1-p}/(p-1) < tol, double past any rounding in the
        # inversion, then bisect back to the smallest certified index.
        m = math.pow(tol * (p - 1.0), -1.0 / (p - 1.0))
        hi = max(1, int(math.ceil(m)))
        while PowerWeight._p_series_tail(hi, p) >= tol:
            hi *= 2
        lo = max(1, hi // 2)
        while lo < hi:
            mid = (lo + hi) // 2
            if PowerWeight._p_series_tail(mid, p) < tol:
                hi = mid
            else:
                lo = mid + 1
        return hi


class ExponentialWeight(WeightFunction):
    """W(k) = base^k with base > 1.

    Reciprocals form a geometric series with ratio 1/base, so the strong
    reinforcement condition always holds and every tail is exact:
    sum_{k >= m} base^{-k} = base^{-m} * base / (base - 1).
    """

    family = "exponential"
    _prob_via_logs = True

    def __init__(self, base: float):
        base = float(base)
        if not math.isfinite(base) or base <= 1.0:
            raise ValueError(f"exponential base must be finite and > 1, got {base}")
        self.base = base
        self._log_base = math.log(base)
        self._integer_base = base == int(base)
        super().__init__()

    def classify(self) -> SummabilityReport:
        return SummabilityReport(
            HOLDS,
            f"geometric series of reciprocals with ratio {1.0 / self.base:g} < 1 "
            f"converges",
        )

    def describe(self) -> dict:
        return {"family": "exponential", "base": self.base}

    def _eval(self, k: int) -> float:
        try:
            return math.pow(self.base, k)
        except OverflowError:
            raise OverflowError(
                f"weight base {self.base:g} at count {k} exceeds float range; "
                f"use log_eval"
            ) from None

    def _log_eval(self, k: int) -> float:
        return k * self._log_base

    def _eval_fraction(self, k: int) -> Optional[Fraction]:
        if self._integer_base:
            return Fraction(int(self.base) ** k)
        return None

    def _eval_array(self, counts: np.ndarray) -> np.ndarray:
        out = np.power(self.base, counts.astype(np.float64))
        if not np.all(np.isfinite(out)):
            raise OverflowError(
                f"weight base {self.base:g} exceeds float range at count "
                f"{int(counts.max())}; use log_eval_array"
            )
        return out

    def _log_eval_array(self, counts: np.ndarray) -> np.ndarray:
        return counts.astype(np.float64) * self._log_base

    def _reciprocal(self, k: int) -> float:
        return math.pow(self.base, -k)

    def _reciprocal_array(self, counts: np.ndarray) -> np.ndarray:
        # Underflows to 0.0 for huge counts, which is the correct limit
        # for every consumer of reciprocals.
        return np.power(self.base, -counts.astype(np.float64))

    def _squared_reciprocal(self, k: int) -> float:
        return math.pow(self.base, -2 * k)

    def _recip_tail_bound(self, m: int) -> float:
        return self._geometric_tail(m, self.base)

    def _sq_tail_bound(self, m: int) -> float:
        return self._geometric_tail(m, self.base * self.base)

    @staticmethod
    def _geometric_tail(m: int, b: float) -> float:
        return math.pow(b, -m) * b / (b - 1.0)

    def _recip_tail_cutoff(self, tol: float) -> int:
        return self._geometric_cutoff(tol, self.base)

    def _sq_tail_cutoff(self, tol: float) -> int:
        return self._geometric_cutoff(tol, self.base * self.base)

    @staticmethod
    def _geometric_cutoff(tol: float, b: float) -> int:
        # Smallest m with b^{-m} * b/(b-1) < tol.
        m = math.log(b / ((b - 1.0) * tol)) / math.log(b)
        cutoff = max(0, int(math.ceil(m)))
        while ExponentialWeight._geometric_tail(cutoff, b) >= tol:
            cutoff += 1
        return cutoff


class TableWeight(WeightFunction):
    """Explicit weights for counts below len(values), optional tail beyond.

    With tail=None the function is undefined past the table and the
    summability verdict is "unknown"; operations needing a certified tail
    refuse rather than guess.
    """

    family = "table"

    def __init__(self, values: Sequence[float], tail: Optional[WeightFunction] = None):
        vals = [float(v) for v in values]
        if not vals:
            raise ValueError("weight table must not be empty")
        for i, v in enumerate(vals):
            if not math.isfinite(v) or v <= 0.0:
                raise ValueError(
                    f"weight table entry {i} must be finite and > 0, got {v}"
                )
        if tail is not None and not isinstance(tail, WeightFunction):
            raise TypeError(f"table tail must be a weight function, got {type(tail)!r}")
        self.values = tuple(vals)
        self.tail = tail
        self._values_np = np.array(vals)
        self._prob_via_logs = tail is not None and tail._prob_via_logs
        super().__init__()

    def classify(self) -> SummabilityReport:
        n = len(self.values)
        if self.tail is None:
            return SummabilityReport(
                UNKNOWN,
                f"no tail declared beyond the {n} tabulated values; "
                f"summability undecided",
            )
        inner = self.tail.classify()
        return SummabilityReport(
            inner.verdict,
            f"finite prefix of {n} tabulated values, then: {inner.certificate}",
        )

    def describe(self) -> dict:
        return {
            "family": "table",
            "values": list(self.values),
            "tail": None if self.tail is None else self.tail.describe(),
        }

    def _past_end(self, k: int):
        raise SummabilityError(
            f"table weight has {len(self.values)} values and no tail; "
            f"count {k} is out of range"
        )

    def _eval(self, k: int) -> float:
        if k < len(self.values):
            return self.values[k]
        if self.tail is None:
            self._past_end(k)
        return self.tail.eval(k)

    def _log_eval(self, k: int) -> float:
        if k < len(self.values):
            return math.log(self.values[k])
        if self.tail is None:
            self._past_end(k)
        return self.tail.log_eval(k)

    def _eval_fraction(self, k: int) -> Optional[Fraction]:
        if k < len(self.values):
            # Floats are exact dyadic rationals, so this is lossless.
            return Fraction(self.values[k])
        if self.tail is None:
            self._past_end(k)
        return self.tail.eval_fraction(k)

    def _eval_array(self, counts: np.ndarray) -> np.ndarray:
        return self._piecewise(counts, self._values_np, lambda c: self.tail.eval_array(c))

    def _log_eval_array(self, counts: np.ndarray) -> np.ndarray:
        return self._piecewise(
            counts, np.log(self._values_np), lambda c: self.tail.log_eval_array(c)
        )

    def _piecewise(self, counts: np.ndarray, table: np.ndarray, tail_fn) -> np.ndarray:
        counts = np.asarray(counts)
        out = np.empty(counts.shape, dtype=np.float64)
        small = counts < len(self.values)
        out[small] = table[counts[small]]
        rest = ~small
        if np.any(rest):
            if self.tail is None:
                self._past_end(int(counts[rest].min()))
            out[rest] = tail_fn(counts[rest])
        return out

    def _reciprocal(self, k: int) -> float:
        if k < len(self.values):
            return 1.0 / self.values[k]
        if self.tail is None:
            self._past_end(k)
        return self.tail.reciprocal(k)

    def _reciprocal_array(self, counts: np.ndarray) -> np.ndarray:
        return self._piecewise(
            counts, 1.0 / self._values_np, lambda c: self.tail.reciprocal_array(c)
        )

    def _squared_reciprocal(self, k: int) -> float:
        r = self._reciprocal(k)
        return r * r

    def _table_recip_rest(self, m: int, squared: bool) -> float:
        acc = KahanAccumulator()
        for k in range(m, len(self.values)):
            r = 1.0 / self.values[k]
            acc.add(r * r if squared else r)
        return acc.value

    def _recip_tail_bound(self, m: int) -> float:
        if self.tail is None:
            return math.inf
        n = len(self.values)
        if m >= n:
            return self.tail.reciprocal_tail_bound(m)
        return self._table_recip_rest(m, squared=False) + self.tail.reciprocal_tail_bound(n)

    def _sq_tail_bound(self, m: int) -> float:
        if self.tail is None:
            return math.inf
        n = len(self.values)
        if m >= n:
            return self.tail.squared_reciprocal_tail_bound(m)
        return self._table_recip_rest(m, squared=True) + self.tail.squared_reciprocal_tail_bound(n)

    def _no_tail_cutoff(self):
        raise SummabilityError(
            f"table weight with {len(self.values)} values has no tail; "
            f"no certified truncation exists"
        )

    def _recip_tail_cutoff(self, tol: float) -> int:
        if self.tail is None:
            self._no_tail_cutoff()
        return max(len(self.values), self.tail._recip_tail_cutoff(tol))

    def _sq_tail_cutoff(self, tol: float) -> int:
        if self.tail is None:
            self._no_tail_cutoff()
        return max(len(self.values), self.tail._sq_tail_cutoff(tol))


def weight_from_config(config: dict) -> WeightFunction:
    """Build a weight function from its config mapping.

    The mapping must carry a "family" key plus exactly the parameters of
    that family; unknown keys are rejected so typos cannot silently fall
    back to defaults.
    """
    if not isinstance(config, dict):
        raise ValueError(f"weight config must be a mapping, got {type(config).__name__}")
    family = config.get("family")
    if family == "power":
        _require_keys(config, {"family", "exponent"}, set())
        return PowerWeight(_require_number(config, "exponent"))
    if family == "exponential":
        _require_keys(config, {"family", "base"}, set())
        return ExponentialWeight(_require_number(config, "base"))
    if family == "table":
        _require_keys(config, {"family", "values"}, {"tail"})
        values = config.get("values")
        if not isinstance(values, (list, tuple)):
            raise ValueError("table weight config needs a list under 'values'")
        tail_cfg = config.get("tail")
        tail = None if tail_cfg is None else weight_from_config(tail_cfg)
        return TableWeight(values, tail)
    raise ValueError(
        f"unknown weight family {family!r}; expected power, exponential, or table"
    )


def _require_keys(config: dict, required: set, optional: set) -> None:
    extra = set(config) - required - optional
    missing = required - set(config)
    problems = []
    if missing:
        problems.append(f"missing keys {sorted(missing)}")
    if extra:
        problems.append(f"unknown keys {sorted(extra)}")
    if problems:
        raise ValueError(
            f"weight family {config.get('family')!r}: " + ", ".join(problems)
        )


def _require_number(config: dict, key: str) -> float:
    v = config[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValueError(f"weight parameter {key!r} must be a number, got {v!r}")
    return float(v)
