"""Search-strategy simulation over a read-only corpus.

Database search picks every paper a set of sources returned. Snowballing
then grows the selected set along citation edges: backward steps follow a
paper's references, forward steps follow the papers citing it. Only
selected papers are expanded, every paper is visited at most once per run,
and a direction stops once a step yields no newly selected paper.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable

from .corpus import Corpus
from .errors import (
    EmptyOracle,
    InvalidSpec,
    IterationCapExceeded,
    MissingRanks,
    UnknownPaper,
    UnknownSource,
)
from .metrics import Metrics, compute_metrics

DEFAULT_MAX_ITERATIONS = 50
DEFAULT_SEED_CAP = 60

BACKWARD = "backward"
FORWARD = "forward"


class SnowballMode(str, Enum):
    ITERATIVE = "iterative"
    PARALLEL = "parallel"
    SEQ_BS_THEN_FS = "bs-then-fs"
    SEQ_FS_THEN_BS = "fs-then-bs"
    BS_ONLY = "bs-only"
    FS_ONLY = "fs-only"
    NONE = "none"

    @classmethod
    def parse(cls, text: str) -> SnowballMode:
        key = text.strip().lower()
        if key in _MODE_ALIASES:
            return _MODE_ALIASES[key]
        try:
            return cls(key)
        except ValueError:
            valid = ", ".join(m.value for m in cls)
            raise InvalidSpec(f"unknown snowball mode {text!r}; valid modes: {valid}") from None


_MODE_ALIASES = {
    "bs*fs": SnowballMode.ITERATIVE,
    "bs||fs": SnowballMode.PARALLEL,
    "bs+fs": SnowballMode.SEQ_BS_THEN_FS,
    "fs+bs": SnowballMode.SEQ_FS_THEN_BS,
    "bs": SnowballMode.BS_ONLY,
    "fs": SnowballMode.FS_ONLY,
}


@dataclass(frozen=True)
class FromDbSelected:
    """Seed with whatever the database search over ``db_sources`` selected."""


@dataclass(frozen=True)
class ExplicitList:
    ids: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "ids", tuple(self.ids))


@dataclass(frozen=True)
class RankedSource:
    """Seed with the top ``cap`` results of one ranked source."""

    source: str
    cap: int = DEFAULT_SEED_CAP

    def __post_init__(self):
        if not isinstance(self.cap, int) or isinstance(self.cap, bool) or self.cap < 1:
            raise InvalidSpec(f"seed cap must be a positive integer, got {self.cap!r}")


Seed = FromDbSelected | ExplicitList | RankedSource


@dataclass(frozen=True)
class StrategySpec:
    db_sources: frozenset[str] = frozenset()
    seed: Seed = field(default_factory=FromDbSelected)
    mode: SnowballMode = SnowballMode.NONE
    max_iterations: int = DEFAULT_MAX_ITERATIONS

    def __post_init__(self):
        object.__setattr__(self, "db_sources", frozenset(self.db_sources))
        object.__setattr__(self, "mode", SnowballMode(self.mode))
        if not isinstance(self.max_iterations, int) or self.max_iterations < 1:
            raise InvalidSpec(f"max_iterations must be a positive integer, got {self.max_iterations!r}")
        if isinstance(self.seed, FromDbSelected):
            if not self.db_sources:
                raise InvalidSpec("a database-search seed needs at least one source")
        elif self.db_sources:
            raise InvalidSpec("db_sources are only meaningful with a database-search seed")


@dataclass(frozen=True)
class IterationRecord:
    """One row of a run trace.

    ``accum_*`` describe the state after this record. Directional records in
    parallel mode describe that direction's own run; union records always
    describe the combined state.
    """

    index: int
    phase: str  # seed | backward | forward | union
    new_visited: tuple[str, ...]
    new_selected: tuple[str, ...]
    accum_visited: int
    accum_selected: int
    metrics: Metrics

    def to_json(self) -> dict:
        return {
            "index": self.index,
            "phase": self.phase,
            "new_visited": list(self.new_visited),
            "new_selected": list(self.new_selected),
            "accum_visited": self.accum_visited,
            "accum_selected": self.accum_selected,
            "metrics": self.metrics.to_json(),
        }


# (citing, cited, direction that discovered the new endpoint)
Traversal = tuple[str, str, str]


@dataclass(frozen=True)
class SnowballResult:
    visited: frozenset[str]
    selected: frozenset[str]
    trace: tuple[IterationRecord, ...]
    traversals: frozenset[Traversal] = frozenset()


@dataclass(frozen=True)
class StrategyOutcome:
    spec: StrategySpec
    visited: frozenset[str]
    selected: frozenset[str]
    trace: tuple[IterationRecord, ...]
    final_metrics: Metrics
    seed_visited: frozenset[str] = frozenset()
    seed_selected: frozenset[str] = frozenset()
    traversals: frozenset[Traversal] = frozenset()


def _ordered(ids: Iterable[str]) -> tuple[str, ...]:
    return tuple(sorted(ids))


def _require_oracle(corpus: Corpus) -> frozenset[str]:
    oracle = corpus.oracle
    if not oracle:
        raise EmptyOracle("the corpus has no selected papers")
    return oracle


def _record(index, phase, new_visited, new_selected, visited_count, selected_count, oracle_size) -> IterationRecord:
    return IterationRecord(
        index=index,
        phase=phase,
        new_visited=_ordered(new_visited),
        new_selected=_ordered(new_selected),
        accum_visited=visited_count,
        accum_selected=selected_count,
        metrics=compute_metrics(selected_count, visited_count, oracle_size),
    )


def db_search(corpus: Corpus, sources: Iterable[str]) -> StrategyOutcome:
    """Visit every paper returned by any of ``sources``."""
    sources = frozenset(sources)
    for s in sorted(sources):
        if s not in corpus.sources:
            raise UnknownSource(s)
    oracle = _require_oracle(corpus)
    visited = frozenset(pid for pid, p in corpus.papers.items() if p.returned_by & sources)
    selected = visited & oracle
    seed_record = _record(0, "seed", visited, selected, len(visited), len(selected), len(oracle))
    spec = StrategySpec(db_sources=sources, seed=FromDbSelected()) if sources else StrategySpec(seed=ExplicitList())
    return StrategyOutcome(
        spec=spec,
        visited=visited,
        selected=selected,
        trace=(seed_record,),
        final_metrics=seed_record.metrics,
        seed_visited=visited,
        seed_selected=selected,
    )


def _step(corpus: Corpus, frontier: Iterable[str], visited: set[str] | frozenset[str], direction: str):
    found: set[str] = set()
    edges: set[Traversal] = set()
    graph = corpus.graph
    for f in frontier:
        if direction == BACKWARD:
            for cited in graph.references(f):
                if cited not in visited:
                    found.add(cited)
                    edges.add((f, cited, BACKWARD))
        else:
            for citing in graph.citers(f):
                if citing not in visited:
                    found.add(citing)
                    edges.add((citing, f, FORWARD))
    return found, edges


def backward_candidates(corpus: Corpus, frontier: Iterable[str], already_visited: Iterable[str]) -> frozenset[str]:
    """References of the frontier papers that were not visited yet."""
    return frozenset(_step(corpus, frontier, frozenset(already_visited), BACKWARD)[0])


def forward_candidates(corpus: Corpus, frontier: Iterable[str], already_visited: Iterable[str]) -> frozenset[str]:
    """Papers citing the frontier that were not visited yet."""
    return frozenset(_step(corpus, frontier, frozenset(already_visited), FORWARD)[0])


class _Run:
    """Mutable accumulator for one snowball run."""

    def __init__(self, corpus, oracle, visited, selected, max_iterations):
        self.corpus = corpus
        self.oracle = oracle
        self.visited = set(visited)
        self.selected = set(selected)
        self.traversals: set[Traversal] = set()
        self.trace: list[IterationRecord] = []
        self.max_iterations = max_iterations

    def record(self, index, phase, new_visited, new_selected, visited_count=None, selected_count=None):
        self.trace.append(
            _record(
                index,
                phase,
                new_visited,
                new_selected,
                len(self.visited) if visited_count is None else visited_count,
                len(self.selected) if selected_count is None else selected_count,
                len(self.oracle),
            )
        )

    def result(self) -> SnowballResult:
        return SnowballResult(
            frozenset(self.visited), frozenset(self.selected), tuple(self.trace), frozenset(self.traversals)
        )

    def overflow(self, what: str) -> IterationCapExceeded:
        return IterationCapExceeded(
            f"{what} still selecting papers after {self.max_iterations} iterations", partial=self.result()
        )

    def close(self, direction: str, frontier: set[str], start_index: int) -> int:
        """Expand one direction to its fixpoint; one record per productive step."""
        index = start_index
        steps = 0
        while frontier:
            if steps == self.max_iterations:
                raise self.overflow(f"{direction} snowballing")
            found, edges = _step(self.corpus, frontier, self.visited, direction)
            steps += 1
            new_selected = found & self.oracle
            self.visited |= found
            self.selected |= new_selected
            self.traversals |= edges
            if found:
                index += 1
                self.record(index, direction, found, new_selected)
            frontier = new_selected
        return index


def _iterative(run: _Run, frontier: set[str]) -> None:
    index = 0
    while frontier:
        if index == run.max_iterations:
            raise run.overflow("iterative snowballing")
        backward, b_edges = _step(run.corpus, frontier, run.visited, BACKWARD)
        forward, f_edges = _step(run.corpus, frontier, run.visited, FORWARD)
        index += 1
        found = backward | forward
        new_selected = found & run.oracle
        if found:
            b_sel, f_sel = backward & run.oracle, forward & run.oracle
            run.record(index, BACKWARD, backward, b_sel, len(run.visited | backward), len(run.selected | b_sel))
            run.record(index, FORWARD, forward, f_sel, len(run.visited | forward), len(run.selected | f_sel))
        run.visited |= found
        run.selected |= new_selected
        run.traversals |= b_edges | f_edges
        if found:
            run.record(index, "union", found, new_selected)
        frontier = new_selected


def _parallel(run: _Run, seed_selected, seed_visited) -> None:
    branches = {}
    for direction in (BACKWARD, FORWARD):
        branch = _Run(run.corpus, run.oracle, seed_visited, seed_selected, run.max_iterations)
        try:
            branch.close(direction, set(seed_selected), 0)
        except IterationCapExceeded as exc:
            run.visited |= branch.visited
            run.selected |= branch.selected
            run.traversals |= branch.traversals
            raise run.overflow(f"parallel {direction} snowballing") from exc
        branches[direction] = branch

    b_trace, f_trace = branches[BACKWARD].trace, branches[FORWARD].trace
    prev_visited, prev_selected = set(seed_visited), set(seed_selected)
    b_vis, b_sel = set(seed_visited), set(seed_selected)
    f_vis, f_sel = set(seed_visited), set(seed_selected)
    for i in range(max(len(b_trace), len(f_trace))):
        if i < len(b_trace):
            run.trace.append(b_trace[i])
            b_vis |= set(b_trace[i].new_visited)
            b_sel |= set(b_trace[i].new_selected)
        if i < len(f_trace):
            run.trace.append(f_trace[i])
            f_vis |= set(f_trace[i].new_visited)
            f_sel |= set(f_trace[i].new_selected)
        union_visited, union_selected = b_vis | f_vis, b_sel | f_sel
        run.visited, run.selected = union_visited, union_selected
        run.record(i + 1, "union", union_visited - prev_visited, union_selected - prev_selected)
        prev_visited, prev_selected = set(union_visited), set(union_selected)
    for branch in branches.values():
        run.traversals |= branch.traversals


def snowball(
    corpus: Corpus,
    seed_selected: Iterable[str],
    seed_visited: Iterable[str],
    mode: SnowballMode | str,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
) -> SnowballResult:
    """Run one snowballing mode from a seed.

    The returned trace excludes the seed itself. ``selected`` is the seed
    selection plus every newly visited oracle paper.
    """
    mode = SnowballMode(mode)
    seed_selected = frozenset(seed_selected)
    seed_visited = frozenset(seed_visited)
    oracle = _require_oracle(corpus)
    for pid in sorted(seed_visited | seed_selected):
        if pid not in corpus.papers:
            raise UnknownPaper(pid)
    if not seed_selected <= oracle:
        raise InvalidSpec("seed_selected must be a subset of the oracle")
    if not seed_selected <= seed_visited:
        raise InvalidSpec("seed_selected must be a subset of seed_visited")
    if max_iterations < 1:
        raise InvalidSpec("max_iterations must be positive")

    run = _Run(corpus, oracle, seed_visited, seed_selected, max_iterations)
    if mode is SnowballMode.ITERATIVE:
        _iterative(run, set(seed_selected))
    elif mode is SnowballMode.PARALLEL:
        _parallel(run, seed_selected, seed_visited)
    elif mode is SnowballMode.BS_ONLY:
        run.close(BACKWARD, set(seed_selected), 0)
    elif mode is SnowballMode.FS_ONLY:
        run.close(FORWARD, set(seed_selected), 0)
    elif mode in (SnowballMode.SEQ_BS_THEN_FS, SnowballMode.SEQ_FS_THEN_BS):
        first, second = (
            (BACKWARD, FORWARD) if mode is SnowballMode.SEQ_BS_THEN_FS else (FORWARD, BACKWARD)
        )
        index = run.close(first, set(seed_selected), 0)
        # second phase restarts from everything selected so far
        run.close(second, set(run.selected), index)
    return run.result()


def _resolve_seed(corpus: Corpus, spec: StrategySpec, oracle: frozenset[str]):
    seed = spec.seed
    if isinstance(seed, FromDbSelected):
        outcome = db_search(corpus, spec.db_sources)
        return outcome.seed_visited, outcome.seed_selected
    if isinstance(seed, ExplicitList):
        for pid in seed.ids:
            if pid not in corpus.papers:
                raise UnknownPaper(pid)
        visited = frozenset(seed.ids)
        return visited, visited & oracle
    if isinstance(seed, RankedSource):
        if seed.source not in corpus.sources:
            raise UnknownSource(seed.source)
        returned = sorted(corpus.returned_by(seed.source))
        missing = [pid for pid in returned if seed.source not in corpus.papers[pid].ranks]
        if missing:
            raise MissingRanks(
                f"{len(missing)} paper(s) returned by {seed.source!r} carry no rank, e.g. {missing[0]!r}"
            )
        visited = frozenset(pid for pid in returned if corpus.papers[pid].ranks[seed.source] <= seed.cap)
        return visited, visited & oracle
    raise InvalidSpec(f"unsupported seed rule {seed!r}")


def run_strategy(corpus: Corpus, spec: StrategySpec) -> StrategyOutcome:
    """Resolve the seed, snowball it per ``spec.mode`` and score against the oracle."""
    oracle = _require_oracle(corpus)
    seed_visited, seed_selected = _resolve_seed(corpus, spec, oracle)
    seed_record = _record(0, "seed", seed_visited, seed_selected, len(seed_visited), len(seed_selected), len(oracle))

    if spec.mode is SnowballMode.NONE:
        result = SnowballResult(seed_visited, seed_selected, ())
    else:
        try:
            result = snowball(corpus, seed_selected, seed_visited, spec.mode, spec.max_iterations)
        except IterationCapExceeded as exc:
            partial = exc.partial
            exc.partial = _outcome(spec, partial, seed_record, seed_visited, seed_selected, oracle)
            raise
    return _outcome(spec, result, seed_record, seed_visited, seed_selected, oracle)


def _outcome(spec, result, seed_record, seed_visited, seed_selected, oracle) -> StrategyOutcome:
    return StrategyOutcome(
        spec=spec,
        visited=result.visited,
        selected=result.selected,
        trace=(seed_record, *result.trace),
        final_metrics=compute_metrics(len(result.selected), len(result.visited), len(oracle)),
        seed_visited=frozenset(seed_visited),
        seed_selected=frozenset(seed_selected),
        traversals=result.traversals,
    )


@dataclass(frozen=True)
class Complementarity:
    bs_selected: tuple[str, ...]
    fs_selected: tuple[str, ...]
    overlap: tuple[str, ...]
    bs_only: tuple[str, ...]
    fs_only: tuple[str, ...]

    def counts(self) -> dict[str, int]:
        return {
            "bs_selected": len(self.bs_selected),
            "fs_selected": len(self.fs_selected),
            "overlap": len(self.overlap),
            "bs_only": len(self.bs_only),
            "fs_only": len(self.fs_only),
        }


def complementarity(
    corpus: Corpus,
    seed_selected: Iterable[str],
    seed_visited: Iterable[str],
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
) -> Complementarity:
    """Run backward-only and forward-only snowballing and split their findings."""
    seed_selected = frozenset(seed_selected)
    seed_visited = frozenset(seed_visited)
    if not seed_selected:
        return Complementarity((), (), (), (), ())
    bs = snowball(corpus, seed_selected, seed_visited, SnowballMode.BS_ONLY, max_iterations)
    fs = snowball(corpus, seed_selected, seed_visited, SnowballMode.FS_ONLY, max_iterations)
    bs_sel = bs.selected - seed_visited - seed_selected
    fs_sel = fs.selected - seed_visited - seed_selected
    return Complementarity(
        bs_selected=_ordered(bs_sel),
        fs_selected=_ordered(fs_sel),
        overlap=_ordered(bs_sel & fs_sel),
        bs_only=_ordered(bs_sel - fs_sel),
        fs_only=_ordered(fs_sel - bs_sel),
    )


# --- strategy documents -------------------------------------------------------

PRESET_NAMES = ("db", "sb", "db-full", "scopus-iter", "scopus-par", "scopus-bsfs", "scopus-fsbs")

PRESET_LABELS = {
    "db": "DB Search",
    "sb": "SB Search (BS*FS)",
    "db-full": "DB Search + BS*FS",
    "scopus-iter": "Scopus + BS*FS",
    "scopus-par": "Scopus + BS||FS",
    "scopus-bsfs": "Scopus + BS+FS",
    "scopus-fsbs": "Scopus + FS+BS",
}


def preset(
    name: str,
    corpus: Corpus,
    *,
    hub: str = "Scopus",
    seed_source: str = "Google Scholar",
    seed_cap: int = DEFAULT_SEED_CAP,
) -> StrategySpec:
    """Expand one of the seven named strategies against a corpus' sources."""
    all_sources = frozenset(corpus.sources)
    if name == "db":
        return StrategySpec(all_sources, FromDbSelected(), SnowballMode.NONE)
    if name == "sb":
        return StrategySpec(frozenset(), RankedSource(seed_source, seed_cap), SnowballMode.ITERATIVE)
    if name == "db-full":
        return StrategySpec(all_sources, FromDbSelected(), SnowballMode.ITERATIVE)
    hub_modes = {
        "scopus-iter": SnowballMode.ITERATIVE,
        "scopus-par": SnowballMode.PARALLEL,
        "scopus-bsfs": SnowballMode.SEQ_BS_THEN_FS,
        "scopus-fsbs": SnowballMode.SEQ_FS_THEN_BS,
    }
    if name in hub_modes:
        return StrategySpec(frozenset({hub}), FromDbSelected(), hub_modes[name])
    raise InvalidSpec(f"unknown preset {name!r}; valid presets: {', '.join(PRESET_NAMES)}")


def spec_to_json(spec: StrategySpec) -> dict:
    seed = spec.seed
    if isinstance(seed, FromDbSelected):
        seed_doc = {"kind": "db"}
    elif isinstance(seed, ExplicitList):
        seed_doc = {"kind": "explicit", "ids": list(seed.ids)}
    else:
        seed_doc = {"kind": "ranked", "source": seed.source, "cap": seed.cap}
    return {
        "db_sources": sorted(spec.db_sources),
        "seed": seed_doc,
        "mode": spec.mode.value,
        "max_iterations": spec.max_iterations,
    }


def spec_from_json(doc: dict) -> StrategySpec:
    if not isinstance(doc, dict):
        raise InvalidSpec("a strategy must be a JSON object")
    seed_doc = doc.get("seed", {"kind": "db"})
    if not isinstance(seed_doc, dict):
        raise InvalidSpec("seed must be an object")
    kind = seed_doc.get("kind")
    if kind == "db":
        seed: Seed = FromDbSelected()
    elif kind == "explicit":
        ids = seed_doc.get("ids", [])
        if not isinstance(ids, list) or not all(isinstance(i, str) for i in ids):
            raise InvalidSpec("explicit seed ids must be a list of strings")
        seed = ExplicitList(tuple(ids))
    elif kind == "ranked":
        if not isinstance(seed_doc.get("source"), str):
            raise InvalidSpec("ranked seed needs a source name")
        seed = RankedSource(seed_doc["source"], seed_doc.get("cap", DEFAULT_SEED_CAP))
    else:
        raise InvalidSpec(f"unknown seed kind {kind!r}; valid kinds: db, explicit, ranked")
    sources = doc.get("db_sources", [])
    if not isinstance(sources, list) or not all(isinstance(s, str) for s in sources):
        raise InvalidSpec("db_sources must be a list of source names")
    mode = doc.get("mode", "none")
    if not isinstance(mode, str):
        raise InvalidSpec("mode must be a string")
    return StrategySpec(
        db_sources=frozenset(sources),
        seed=seed,
        mode=SnowballMode.parse(mode),
        max_iterations=doc.get("max_iterations", DEFAULT_MAX_ITERATIONS),
    )


def check_spec_sources(corpus: Corpus, spec: StrategySpec) -> None:
    for s in sorted(spec.db_sources):
        if s not in corpus.sources:
            raise UnknownSource(s)
    if isinstance(spec.seed, RankedSource) and spec.seed.source not in corpus.sources:
        raise UnknownSource(spec.seed.source)


def load_spec_file(doc, corpus: Corpus) -> list[tuple[str, StrategySpec]]:
    """Parse a strategy file: ``{"strategies": [{"name": ..., ...}, ...]}``.

    An entry may name a ``preset`` instead of spelling the strategy out.
    Every entry is checked before any is returned.
    """
    if isinstance(doc, dict):
        entries = doc.get("strategies")
    else:
        entries = doc
    if not isinstance(entries, list):
        raise InvalidSpec("strategy file must hold a list under 'strategies'")
    named: list[tuple[str, StrategySpec]] = []
    seen: set[str] = set()
    for i, entry in enumerate(entries):
        if not isinstance(entry, dict) or not isinstance(entry.get("name"), str) or not entry["name"]:
            raise InvalidSpec(f"strategy #{i} needs a non-empty name")
        name = entry["name"]
        if name in seen:
            raise InvalidSpec(f"duplicate strategy name {name!r}")
        seen.add(name)
        try:
            if "preset" in entry:
                opts = {k: entry[k] for k in ("hub", "seed_source", "seed_cap") if k in entry}
                spec = preset(entry["preset"], corpus, **opts)
            else:
                spec = spec_from_json(entry)
            check_spec_sources(corpus, spec)
        except (InvalidSpec, UnknownSource) as exc:
            raise InvalidSpec(f"strategy {name!r}: {exc}") from exc
        named.append((name, spec))
    return named
