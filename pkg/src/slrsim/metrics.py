"""Precision, recall and F-measure over visited/selected counts.

Values are exact rationals internally; rounding to two decimals happens
only when formatting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import InconsistentCounts

NAN_TOKEN = "NAN"


@dataclass(frozen=True)
class Metrics:
    hits: int
    visited: int
    oracle_size: int

    @property
    def precision_fraction(self) -> Fraction | None:
        if self.visited == 0:
            return None
        return Fraction(100 * self.hits, self.visited)

    @property
    def recall_fraction(self) -> Fraction:
        return Fraction(100 * self.hits, self.oracle_size)

    @property
    def f_measure_fraction(self) -> Fraction:
        # 2PR/(P+R) with P=100h/v, R=100h/n reduces to 200h/(v+n); 0 when h=0
        if self.hits == 0:
            return Fraction(0)
        return Fraction(200 * self.hits, self.visited + self.oracle_size)

    @property
    def precision(self) -> float:
        frac = self.precision_fraction
        return math.nan if frac is None else float(frac)

    @property
    def recall(self) -> float:
        return float(self.recall_fraction)

    @property
    def f_measure(self) -> float:
        return float(self.f_measure_fraction)

    @property
    def precision_is_nan(self) -> bool:
        return self.visited == 0

    def to_json(self) -> dict:
        return {
            "precision": None if self.precision_is_nan else self.precision,
            "precision_nan": self.precision_is_nan,
            "recall": self.recall,
            "f_measure": self.f_measure,
            "hits": self.hits,
            "visited": self.visited,
            "oracle_size": self.oracle_size,
        }

    def summary(self) -> str:
        return (
            f"P={format_percent(self.precision_fraction)} "
            f"R={format_percent(self.recall_fraction)} "
            f"F={format_percent(self.f_measure_fraction)}"
        )


def compute_metrics(hits: int, visited: int, oracle_size: int) -> Metrics:
    for name, value in (("hits", hits), ("visited", visited), ("oracle_size", oracle_size)):
        if not isinstance(value, int) or isinstance(value, bool) or value < 0:
            raise InconsistentCounts(f"{name} must be a non-negative integer, got {value!r}")
    if oracle_size == 0:
        raise InconsistentCounts("oracle_size must be positive")
    if hits > visited:
        raise InconsistentCounts(f"hits ({hits}) exceed visited ({visited})")
    if hits > oracle_size:
        raise InconsistentCounts(f"hits ({hits}) exceed oracle size ({oracle_size})")
    return Metrics(hits, visited, oracle_size)


def round_half_up(value: Fraction, places: int = 2) -> Fraction:
    scale = 10**places
    return Fraction(math.floor(value * scale + Fraction(1, 2)), scale)


def format_percent(value: Fraction | None, places: int = 2) -> str:
    """Render a percentage with half-up rounding; ``None`` renders as NAN."""
    if value is None:
        return NAN_TOKEN
    rounded = round_half_up(Fraction(value), places)
    scale = 10**places
    whole, frac = divmod(rounded.numerator * (scale // rounded.denominator), scale)
    if places == 0:
        return str(whole)
    return f"{whole}.{frac:0{places}d}"


def format_ratio(numerator: int, denominator: int) -> str:
    """``"46.67 (7/15)"`` style cell; NAN when the denominator is zero."""
    if denominator == 0:
        return f"{NAN_TOKEN} ({numerator}/{denominator})"
    return f"{format_percent(Fraction(100 * numerator, denominator))} ({numerator}/{denominator})"
