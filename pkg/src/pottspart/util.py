"""Small numeric helpers shared across modules."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable


def log_sum_exp(values: Iterable[float]) -> float:
    """log(sum(exp(v) for v in values)), stable under large magnitudes.

    Values are consumed in the order given; the reduction is deterministic.
    Returns -inf for an empty sequence.
    """
    vals = list(values)
    if not vals:
        return float("-inf")
    m = max(vals)
    if math.isinf(m):
        return m
    return m + math.log(math.fsum(math.exp(v - m) for v in vals))


class OnlineLogSumExp:
    """Streaming log-sum-exp accumulator with O(1) memory.

    Deterministic for a fixed insertion order.
    """

    def __init__(self) -> None:
        self._max = float("-inf")
        self._sum = 0.0  # sum of exp(v - self._max) over added values

    def add(self, value: float) -> None:
        if value <= self._max:
            self._sum += math.exp(value - self._max)
        else:
            if math.isinf(self._max):
                self._sum = 1.0
            else:
                self._sum = self._sum * math.exp(self._max - value) + 1.0
            self._max = value

    def result(self) -> float:
        if math.isinf(self._max):
            return float("-inf")
        return self._max + math.log(self._sum)


def as_fraction(x: int | float | Fraction) -> Fraction:
    """Lift a number to an exact Fraction (floats convert exactly)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if math.isnan(x) or math.isinf(x):
            raise ValueError(f"cannot convert {x!r} to a rational")
        return Fraction(x)
    raise TypeError(f"unsupported numeric type: {type(x).__name__}")
