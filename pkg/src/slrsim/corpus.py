"""Domain types for a review corpus: sources, papers, citations.

A corpus is built single-threaded through :func:`register_paper` and
:func:`add_citation`, then treated as read-only by every simulation.
"""

from __future__ import annotations

import unicodedata
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Iterable, Iterator

from .errors import (
    ConflictingIndexEvidence,
    DuplicateId,
    EmptyTitle,
    SelfCitation,
    UnknownPaper,
    UnknownSource,
)


class SourceKind(str, Enum):
    PUBLISHER_LIBRARY = "publisher-library"
    INDEX_DATABASE = "index-database"
    SEARCH_ENGINE = "search-engine"


class IndexStatus(str, Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Source:
    name: str
    kind: SourceKind = SourceKind.PUBLISHER_LIBRARY

    def __post_init__(self):
        if not self.name:
            raise ValueError("source name must be non-empty")
        object.__setattr__(self, "kind", SourceKind(self.kind))


@lru_cache(maxsize=1 << 16)
def normalize_title(title: str) -> str:
    """Return the duplicate-detection form of a title.

    Casefolds, strips diacritics and collapses every run of
    non-alphanumeric characters to one space.

    >>> normalize_title("Café-Based Search")
    'cafe based search'
    """
    # decompose on both sides of casefolding: compatibility forms such as
    # mathematical letters only become plain (uppercase) letters after NFKD
    folded = unicodedata.normalize("NFKD", title).casefold()
    decomposed = unicodedata.normalize("NFKD", folded)
    stripped = "".join(c for c in decomposed if not unicodedata.combining(c))
    out = []
    for ch in stripped:
        out.append(ch if ch.isalnum() else " ")
    return " ".join("".join(out).split())


@dataclass
class Paper:
    """One deduplicated study and its provenance tags."""

    id: str
    title: str = ""
    year: int | None = None
    authors: list[str] = field(default_factory=list)
    venue: str | None = None
    doi: str | None = None
    selected: bool = False
    returned_by: set[str] = field(default_factory=set)
    indexed_in: dict[str, IndexStatus] = field(default_factory=dict)
    ranks: dict[str, int] = field(default_factory=dict)
    stub: bool = False

    def __post_init__(self):
        if not self.id:
            raise ValueError("paper id must be non-empty")
        self.returned_by = set(self.returned_by)
        self.indexed_in = {s: IndexStatus(v) for s, v in self.indexed_in.items()}
        self.ranks = dict(self.ranks)
        self.authors = list(self.authors)

    @property
    def normalized_title(self) -> str:
        return normalize_title(self.title)

    def duplicate_key_matches(self, other: Paper) -> bool:
        # empty titles (untitled stubs) never match anything
        if not self.normalized_title or self.normalized_title != other.normalized_title:
            return False
        if self.year is None or other.year is None:
            return True
        return self.year == other.year


class CitationGraph:
    """Directed citation edges ``citing -> cited`` with both adjacency directions."""

    def __init__(self, edges: Iterable[tuple[str, str]] = ()):
        self._refs: dict[str, set[str]] = defaultdict(set)
        self._citers: dict[str, set[str]] = defaultdict(set)
        self._count = 0
        for citing, cited in edges:
            self.add(citing, cited)

    def add(self, citing: str, cited: str) -> bool:
        """Insert an edge; returns False if it was already present."""
        if cited in self._refs.get(citing, ()):
            return False
        self._refs[citing].add(cited)
        self._citers[cited].add(citing)
        self._count += 1
        return True

    def references(self, paper_id: str) -> frozenset[str]:
        """Out-neighbors: the papers ``paper_id`` cites."""
        return frozenset(self._refs.get(paper_id, ()))

    def citers(self, paper_id: str) -> frozenset[str]:
        """In-neighbors: the papers citing ``paper_id``."""
        return frozenset(self._citers.get(paper_id, ()))

    @property
    def edges(self) -> frozenset[tuple[str, str]]:
        return frozenset((a, b) for a, bs in self._refs.items() for b in bs)

    def __iter__(self) -> Iterator[tuple[str, str]]:
        return iter(sorted(self.edges))

    def __len__(self) -> int:
        return self._count

    def __contains__(self, edge: object) -> bool:
        if not isinstance(edge, tuple) or len(edge) != 2:
            return False
        return edge[1] in self._refs.get(edge[0], ())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CitationGraph):
            return NotImplemented
        return self.edges == other.edges

    def __repr__(self) -> str:
        return f"CitationGraph({len(self)} edges)"


@dataclass
class Corpus:
    sources: dict[str, Source] = field(default_factory=dict)
    papers: dict[str, Paper] = field(default_factory=dict)
    graph: CitationGraph = field(default_factory=CitationGraph)

    def add_source(self, name: str, kind: SourceKind | str = SourceKind.PUBLISHER_LIBRARY) -> Source:
        source = Source(name, SourceKind(kind))
        existing = self.sources.get(name)
        if existing is not None and existing != source:
            raise ValueError(f"source {name!r} already declared as {existing.kind.value}")
        self.sources[name] = source
        return source

    def add_paper(self, paper: Paper) -> None:
        """Insert without deduplication (used by loaders); ids must be fresh."""
        if paper.id in self.papers:
            raise DuplicateId(f"paper id {paper.id!r} already in corpus")
        self.papers[paper.id] = paper

    @property
    def oracle(self) -> frozenset[str]:
        return frozenset(pid for pid, p in self.papers.items() if p.selected)

    def returned_by(self, source: str) -> frozenset[str]:
        if source not in self.sources:
            raise UnknownSource(source)
        return frozenset(pid for pid, p in self.papers.items() if source in p.returned_by)

    def source_names(self) -> list[str]:
        return sorted(self.sources)

    def find_duplicate(self, candidate: Paper) -> str | None:
        """Id of the first registered paper sharing the candidate's duplicate key."""
        stub_match = None
        for pid, paper in self.papers.items():
            if paper.duplicate_key_matches(candidate):
                if not paper.stub:
                    return pid
                if stub_match is None:
                    stub_match = pid
        return stub_match


def _merge_index(existing: IndexStatus | None, incoming: IndexStatus, paper_id: str, source: str) -> IndexStatus:
    if existing is None or existing == incoming:
        return incoming
    if IndexStatus.UNKNOWN in (existing, incoming):
        return incoming if existing == IndexStatus.UNKNOWN else existing
    raise ConflictingIndexEvidence(
        f"paper {paper_id!r} is marked both indexed and not indexed in {source!r}"
    )


def _check_provenance(paper: Paper, label: str) -> None:
    for source in paper.returned_by:
        if paper.indexed_in.get(source) == IndexStatus.NO:
            raise ConflictingIndexEvidence(
                f"paper {label!r} returned by {source!r} but marked not indexed there"
            )


def _merge_into(target: Paper, incoming: Paper) -> None:
    indexed = dict(target.indexed_in)
    for source, status in incoming.indexed_in.items():
        indexed[source] = _merge_index(indexed.get(source), status, target.id, source)
    merged = Paper(
        id=target.id,
        title=target.title,
        returned_by=target.returned_by | incoming.returned_by,
        indexed_in=indexed,
    )
    # returned-by implies indexed; check the merged view before mutating anything
    _check_provenance(merged, target.id)

    if target.stub and not incoming.stub:
        target.stub = False
        target.title = incoming.title
        target.year = incoming.year
        target.authors = list(incoming.authors)
        target.venue = incoming.venue
        target.doi = incoming.doi
    target.returned_by = merged.returned_by
    target.indexed_in = indexed
    for source, rank in incoming.ranks.items():
        target.ranks[source] = min(rank, target.ranks.get(source, rank))
    target.selected = target.selected or incoming.selected


def register_paper(corpus: Corpus, candidate: Paper) -> tuple[str, bool]:
    """Add ``candidate`` unless a duplicate exists, in which case merge provenance.

    Returns ``(paper_id, was_duplicate)``. A candidate whose id names an
    untitled stub fills in that stub.
    """
    if not candidate.normalized_title:
        raise EmptyTitle(f"paper {candidate.id!r} has an empty title")
    for source in candidate.returned_by | set(candidate.indexed_in) | set(candidate.ranks):
        if source not in corpus.sources:
            raise UnknownSource(source)
    _check_provenance(candidate, candidate.id)

    match = corpus.find_duplicate(candidate)
    if match is None:
        existing = corpus.papers.get(candidate.id)
        if existing is not None and existing.stub and not existing.normalized_title:
            match = candidate.id
    if match is not None:
        _merge_into(corpus.papers[match], candidate)
        return match, True

    if candidate.id in corpus.papers:
        raise DuplicateId(f"paper id {candidate.id!r} already used by a different paper")
    corpus.papers[candidate.id] = Paper(
        id=candidate.id,
        title=candidate.title,
        year=candidate.year,
        authors=list(candidate.authors),
        venue=candidate.venue,
        doi=candidate.doi,
        selected=candidate.selected and not candidate.stub,
        returned_by=set(candidate.returned_by),
        indexed_in=dict(candidate.indexed_in),
        ranks=dict(candidate.ranks),
        stub=candidate.stub,
    )
    return candidate.id, False


def add_citation(corpus: Corpus, citing: str, cited: str, *, create_stubs: bool = True) -> bool:
    """Record ``citing -> cited``. Unknown cited ids become stubs when allowed.

    Returns True if the edge is new.
    """
    if citing == cited:
        raise SelfCitation(f"paper {citing!r} cannot cite itself")
    if citing not in corpus.papers:
        raise UnknownPaper(citing)
    if cited not in corpus.papers:
        if not create_stubs:
            raise UnknownPaper(cited)
        corpus.papers[cited] = Paper(id=cited, stub=True)
    return corpus.graph.add(citing, cited)


@dataclass(frozen=True, order=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    code: str
    message: str
    paper: str | None = None
    source: str | None = None

    def __str__(self) -> str:
        return f"{self.severity}: [{self.code}] {self.message}"


def validate(corpus: Corpus) -> list[Diagnostic]:
    """Collect every invariant violation (errors) and suspicious pattern (warnings)."""
    out: list[Diagnostic] = []

    def error(code, message, paper=None, source=None):
        out.append(Diagnostic("error", code, message, paper, source))

    def warning(code, message, paper=None, source=None):
        out.append(Diagnostic("warning", code, message, paper, source))

    for name, src in corpus.sources.items():
        if not name or name != src.name:
            error("source-name", f"source registered as {name!r} is named {src.name!r}", source=name)

    for pid in sorted(corpus.papers):
        p = corpus.papers[pid]
        if pid != p.id:
            error("paper-id", f"paper registered as {pid!r} carries id {p.id!r}", paper=pid)
        if not p.stub and not p.normalized_title:
            error("empty-title", f"paper {pid!r} has an empty title", paper=pid)
        for s in sorted(p.returned_by | set(p.indexed_in) | set(p.ranks)):
            if s not in corpus.sources:
                error("unknown-source", f"paper {pid!r} refers to undeclared source {s!r}", pid, s)
        for s in sorted(p.returned_by):
            if p.indexed_in.get(s) == IndexStatus.NO:
                error(
                    "index-conflict",
                    f"paper {pid!r} is returned by {s!r} but marked not indexed in {s!r}",
                    pid,
                    s,
                )
        for s, rank in sorted(p.ranks.items()):
            if s not in p.returned_by:
                error("rank-without-hit", f"paper {pid!r} has a rank for {s!r} but was not returned by it", pid, s)
            if not isinstance(rank, int) or isinstance(rank, bool) or rank < 1:
                error("bad-rank", f"paper {pid!r} has non-positive rank {rank!r} for {s!r}", pid, s)
        if p.stub and (p.selected or p.returned_by):
            error("stub-provenance", f"stub paper {pid!r} must be unselected and returned by no source", pid)
        if p.selected and not p.returned_by and not corpus.graph.citers(pid) and not corpus.graph.references(pid):
            warning("unreachable-selected", f"selected paper {pid!r} has no provenance at all", pid)

    for citing, cited in sorted(corpus.graph.edges):
        if citing == cited:
            error("self-citation", f"paper {citing!r} cites itself", citing)
        for end in (citing, cited):
            if end not in corpus.papers:
                error("dangling-edge", f"citation {citing!r} -> {cited!r} refers to missing paper {end!r}", end)

    seen: dict[str, list[Paper]] = defaultdict(list)
    for pid in sorted(corpus.papers):
        p = corpus.papers[pid]
        if p.stub or not p.normalized_title:
            continue
        for other in seen[p.normalized_title]:
            if other.duplicate_key_matches(p):
                error("duplicate", f"papers {other.id!r} and {pid!r} share a duplicate key", pid)
        seen[p.normalized_title].append(p)

    if not corpus.oracle:
        error("empty-oracle", "no paper is selected; the corpus cannot be simulated")
    return out
