"""Corpus-level analyses: per-source performance, indexed recall, source
overlap, and side-by-side strategy comparison."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .corpus import Corpus, IndexStatus
from .engine import StrategyOutcome, StrategySpec, run_strategy
from .errors import EmptyOracle
from .metrics import Metrics, compute_metrics


def _oracle(corpus: Corpus) -> frozenset[str]:
    oracle = corpus.oracle
    if not oracle:
        raise EmptyOracle("the corpus has no selected papers")
    return oracle


@dataclass(frozen=True)
class LibraryRow:
    source: str
    metrics: Metrics


def library_performance(corpus: Corpus) -> list[LibraryRow]:
    """Precision/recall/F of each source's query results, sources in name order."""
    oracle = _oracle(corpus)
    rows = []
    for source in corpus.source_names():
        visited = corpus.returned_by(source)
        rows.append(LibraryRow(source, compute_metrics(len(visited & oracle), len(visited), len(oracle))))
    return rows


@dataclass(frozen=True)
class IndexedRow:
    source: str
    indexed: int
    not_indexed: int
    unknown: int
    oracle_size: int

    @property
    def recall_fraction(self) -> Fraction:
        return Fraction(100 * self.indexed, self.oracle_size)


def indexed_recall(corpus: Corpus) -> list[IndexedRow]:
    """Share of oracle papers each source indexes at all (title lookup).

    A paper the source returned counts as indexed there. Unknown lookups
    are counted separately and never in the numerator; papers with no
    lookup recorded for a source count as unknown.
    """
    oracle = _oracle(corpus)
    rows = []
    for source in corpus.source_names():
        counts = {IndexStatus.YES: 0, IndexStatus.NO: 0, IndexStatus.UNKNOWN: 0}
        for pid in oracle:
            paper = corpus.papers[pid]
            if source in paper.returned_by:
                counts[IndexStatus.YES] += 1
            else:
                counts[paper.indexed_in.get(source, IndexStatus.UNKNOWN)] += 1
        rows.append(
            IndexedRow(
                source,
                counts[IndexStatus.YES],
                counts[IndexStatus.NO],
                counts[IndexStatus.UNKNOWN],
                len(oracle),
            )
        )
    return rows


@dataclass(frozen=True)
class OverlapMatrix:
    """Row-contains-column overlap of the selected papers each source returned.

    ``cells[(r, c)]`` is ``(|S_r & S_c|, |S_c|)`` for r != c; a zero
    denominator means NAN. ``diagonal[r]`` is ``(unique_r, |S_r|)``.
    """

    sources: tuple[str, ...]
    cells: dict[tuple[str, str], tuple[int, int]]
    diagonal: dict[str, tuple[int, int]]

    def ratio(self, row: str, col: str) -> Fraction | None:
        num, den = self.cells[(row, col)]
        return None if den == 0 else Fraction(num, den)


def overlap_matrix(corpus: Corpus) -> OverlapMatrix:
    oracle = corpus.oracle
    sources = tuple(corpus.source_names())
    selected_by = {s: corpus.returned_by(s) & oracle for s in sources}
    cells = {}
    diagonal = {}
    for r in sources:
        others = frozenset().union(*(selected_by[s] for s in sources if s != r))
        diagonal[r] = (len(selected_by[r] - others), len(selected_by[r]))
        for c in sources:
            if c != r:
                cells[(r, c)] = (len(selected_by[r] & selected_by[c]), len(selected_by[c]))
    return OverlapMatrix(sources, cells, diagonal)


@dataclass(frozen=True)
class ComparisonRow:
    name: str
    outcome: StrategyOutcome

    @property
    def metrics(self) -> Metrics:
        return self.outcome.final_metrics


def strategy_comparison(corpus: Corpus, specs: Iterable[tuple[str, StrategySpec]]) -> list[ComparisonRow]:
    """Run each named strategy independently; rows keep input order."""
    return [ComparisonRow(name, run_strategy(corpus, spec)) for name, spec in specs]
