"""Loading data into a corpus and writing it back out."""

from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import dataclass, replace
from typing import Iterable

import jsonschema

from .bibtex import BibEntry
from .corpus import (
    Corpus,
    IndexStatus,
    Paper,
    SourceKind,
    add_citation,
    normalize_title,
    register_paper,
)
from .errors import EmptyTitle, SchemaError, SlrsimError, UnknownPaper


@dataclass
class ImportStats:
    new: int = 0
    merged: int = 0
    edges: int = 0
    stubs: int = 0

    def __str__(self) -> str:
        return f"new={self.new} merged={self.merged} edges={self.edges} stubs={self.stubs}"


def _clean(value: str) -> str:
    return " ".join(value.replace("{", "").replace("}", "").split())


def entry_to_paper(entry: BibEntry, paper_id: str | None = None) -> Paper:
    """Map a reference-list entry to an unselected paper without provenance."""
    f = entry.fields
    year_text = f.get("year", "").strip()
    authors = [_clean(a) for a in f.get("author", "").split(" and ") if _clean(a)]
    return Paper(
        id=paper_id or entry.cite_key,
        title=_clean(f.get("title", "")),
        year=int(year_text) if year_text.isdigit() else None,
        authors=authors,
        venue=_clean(f.get("journal") or f.get("booktitle") or "") or None,
        doi=_clean(f.get("doi", "")) or None,
    )


def _fresh_id(corpus: Corpus, base: str) -> str:
    if base not in corpus.papers:
        return base
    n = 2
    while f"{base}~{n}" in corpus.papers:
        n += 1
    return f"{base}~{n}"


def _with_key(exc: SlrsimError, key: str) -> SlrsimError:
    exc.cite_key = key
    exc.args = (f"entry {key!r}: {exc.args[0] if exc.args else exc}",) + exc.args[1:]
    return exc


def import_references(corpus: Corpus, citing: str, entries: Iterable[BibEntry]) -> ImportStats:
    """Register each reference (deduplicated) and add ``citing -> reference``."""
    entries = list(entries)
    if citing not in corpus.papers:
        raise UnknownPaper(citing)
    for entry in entries:
        if not normalize_title(_clean(entry.fields.get("title", ""))):
            raise _with_key(EmptyTitle("empty title"), entry.cite_key)

    stats = ImportStats()
    for entry in entries:
        candidate = entry_to_paper(entry)
        try:
            match = corpus.find_duplicate(candidate)
            if match is None and entry.cite_key in corpus.papers:
                existing = corpus.papers[entry.cite_key]
                if not (existing.stub and not existing.normalized_title):
                    candidate = entry_to_paper(entry, _fresh_id(corpus, entry.cite_key))
            pid, dup = register_paper(corpus, candidate)
            if dup:
                stats.merged += 1
            else:
                stats.new += 1
            if add_citation(corpus, citing, pid):
                stats.edges += 1
        except SlrsimError as exc:
            raise _with_key(exc, entry.cite_key)
    return stats


def _title_lookup(corpus: Corpus, title: str) -> str | None:
    probe = Paper(id="?", title=title)
    if not probe.normalized_title:
        return None
    return corpus.find_duplicate(probe)


def _title_id(title: str) -> str:
    return "t:" + normalize_title(title).replace(" ", "-")


def import_citers(
    corpus: Corpus,
    rows: Iterable[tuple[str, str]],
    *,
    create_stubs: bool = True,
    resolve_titles: bool = False,
) -> ImportStats:
    """Add recorded forward-citation rows ``(citing, cited)``.

    Cited keys must resolve to known papers; unresolved citing keys become
    stubs. With ``resolve_titles`` a key that is not a paper id is treated
    as a title and registered (deduplicated) instead.
    """
    rows = list(rows)

    def resolve_cited(key: str) -> str:
        if key in corpus.papers:
            return key
        if resolve_titles:
            found = _title_lookup(corpus, key)
            if found is not None:
                return found
        raise UnknownPaper(key)

    for _, cited in rows:
        resolve_cited(cited)
    if not create_stubs and not resolve_titles:
        for citing, _ in rows:
            if citing not in corpus.papers:
                raise UnknownPaper(citing)

    stats = ImportStats()
    for citing, cited in rows:
        cited_id = resolve_cited(cited)
        if citing in corpus.papers:
            citing_id = citing
        elif resolve_titles and normalize_title(citing):
            citing_id, dup = register_paper(corpus, Paper(id=_fresh_id(corpus, _title_id(citing)), title=citing))
            if dup:
                stats.merged += 1
            else:
                stats.new += 1
        elif create_stubs:
            corpus.papers[citing] = Paper(id=citing, stub=True)
            citing_id = citing
            stats.new += 1
            stats.stubs += 1
        else:
            raise UnknownPaper(citing)
        if add_citation(corpus, citing_id, cited_id, create_stubs=False):
            stats.edges += 1
    return stats


CITERS_HEADER = ["citing_id", "cited_id"]


def read_citers_csv(text: str) -> list[tuple[str, str]]:
    """Parse a two-column citer CSV with the mandatory header."""
    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaError("/0", "missing header 'citing_id,cited_id'") from None
    if [h.strip() for h in header] != CITERS_HEADER:
        raise SchemaError("/0", f"header must be 'citing_id,cited_id', got {','.join(header)!r}")
    rows = []
    for n, row in enumerate(reader, start=1):
        if not row:
            continue
        if len(row) != 2 or not row[0] or not row[1]:
            raise SchemaError(f"/{n}", "each row needs exactly two non-empty columns")
        rows.append((row[0], row[1]))
    return rows


def merge_corpus(target: Corpus, other: Corpus) -> ImportStats:
    """Register every paper and citation of ``other`` into ``target``."""
    stats = ImportStats()
    for name in other.source_names():
        target.add_source(name, other.sources[name].kind)
    id_map: dict[str, str] = {}
    for pid in sorted(other.papers):
        p = other.papers[pid]
        if p.stub:
            continue
        clash = target.papers.get(pid)
        if clash is not None and target.find_duplicate(p) is None and not (clash.stub and not clash.normalized_title):
            p = replace(p, id=_fresh_id(target, pid))
        pid_new, dup = register_paper(target, p)
        id_map[pid] = pid_new
        stats.merged += dup
        stats.new += not dup
    for pid in sorted(other.papers):
        if other.papers[pid].stub and pid not in target.papers:
            target.papers[pid] = Paper(id=pid, stub=True)
            stats.new += 1
            stats.stubs += 1
        id_map.setdefault(pid, pid)
    for citing, cited in sorted(other.graph.edges):
        if add_citation(target, id_map[citing], id_map[cited]):
            stats.edges += 1
    return stats


# --- JSON corpus file --------------------------------------------------------

CORPUS_SCHEMA = {
    "type": "object",
    "required": ["sources", "papers", "citations"],
    "additionalProperties": False,
    "properties": {
        "sources": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "kind"],
                "additionalProperties": False,
                "properties": {
                    "name": {"type": "string", "minLength": 1},
                    "kind": {"enum": [k.value for k in SourceKind]},
                },
            },
        },
        "papers": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "title", "authors", "selected", "returned_by"],
                "additionalProperties": False,
                "properties": {
                    "id": {"type": "string", "minLength": 1},
                    "title": {"type": "string"},
                    "year": {"type": ["integer", "null"]},
                    "authors": {"type": "array", "items": {"type": "string"}},
                    "venue": {"type": ["string", "null"]},
                    "doi": {"type": ["string", "null"]},
                    "selected": {"type": "boolean"},
                    "stub": {"type": "boolean"},
                    "returned_by": {"type": "array", "items": {"type": "string"}},
                    "indexed_in": {
                        "type": "object",
                        "additionalProperties": {"enum": [s.value for s in IndexStatus]},
                    },
                    "ranks": {
                        "type": "object",
                        "additionalProperties": {"type": "integer", "minimum": 1},
                    },
                },
            },
        },
        "citations": {
            "type": "array",
            "items": {
                "type": "array",
                "minItems": 2,
                "maxItems": 2,
                "items": {"type": "string", "minLength": 1},
            },
        },
    },
}

_VALIDATOR = jsonschema.Draft202012Validator(CORPUS_SCHEMA)


def _pointer(path: Iterable) -> str:
    return "".join("/" + str(p).replace("~", "~0").replace("/", "~1") for p in path)


def corpus_to_json(corpus: Corpus) -> dict:
    papers = []
    for pid in sorted(corpus.papers):
        p = corpus.papers[pid]
        papers.append(
            {
                "id": p.id,
                "title": p.title,
                "year": p.year,
                "authors": list(p.authors),
                "venue": p.venue,
                "doi": p.doi,
                "selected": p.selected,
                "stub": p.stub,
                "returned_by": sorted(p.returned_by),
                "indexed_in": {s: p.indexed_in[s].value for s in sorted(p.indexed_in)},
                "ranks": {s: p.ranks[s] for s in sorted(p.ranks)},
            }
        )
    return {
        "sources": [{"name": n, "kind": corpus.sources[n].kind.value} for n in corpus.source_names()],
        "papers": papers,
        "citations": [[a, b] for a, b in sorted(corpus.graph.edges)],
    }


def dumps_corpus(corpus: Corpus) -> str:
    return json.dumps(corpus_to_json(corpus), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def corpus_from_json(doc) -> Corpus:
    """Build a corpus from a parsed JSON document, checking schema and references.

    Semantic invariants (index conflicts, duplicate titles, ...) are left to
    :func:`slrsim.corpus.validate` so they can be reported, not rejected.
    """
    errors = list(_VALIDATOR.iter_errors(doc))
    if errors:
        # first offending element in document order
        err = min(errors, key=lambda e: ([(isinstance(p, str), str(p).zfill(12)) for p in e.absolute_path], e.message))
        raise SchemaError(_pointer(err.absolute_path), err.message)

    corpus = Corpus()
    for i, src in enumerate(doc["sources"]):
        if src["name"] in corpus.sources:
            raise SchemaError(f"/sources/{i}/name", f"duplicate source {src['name']!r}")
        corpus.add_source(src["name"], src["kind"])
    for i, raw in enumerate(doc["papers"]):
        base = f"/papers/{i}"
        if raw["id"] in corpus.papers:
            raise SchemaError(f"{base}/id", f"duplicate paper id {raw['id']!r}")
        for field_name in ("returned_by",):
            for j, s in enumerate(raw[field_name]):
                if s not in corpus.sources:
                    raise SchemaError(f"{base}/{field_name}/{j}", f"undeclared source {s!r}")
        if len(set(raw["returned_by"])) != len(raw["returned_by"]):
            raise SchemaError(f"{base}/returned_by", "duplicate source in returned_by")
        for field_name in ("indexed_in", "ranks"):
            for s in raw.get(field_name) or {}:
                if s not in corpus.sources:
                    raise SchemaError(_pointer([*base.strip("/").split("/"), field_name, s]), f"undeclared source {s!r}")
        corpus.add_paper(
            Paper(
                id=raw["id"],
                title=raw["title"],
                year=raw.get("year"),
                authors=raw["authors"],
                venue=raw.get("venue"),
                doi=raw.get("doi"),
                selected=raw["selected"],
                returned_by=set(raw["returned_by"]),
                indexed_in=raw.get("indexed_in") or {},
                ranks=raw.get("ranks") or {},
                stub=raw.get("stub", False),
            )
        )
    for i, (citing, cited) in enumerate(doc["citations"]):
        for end in (citing, cited):
            if end not in corpus.papers:
                raise SchemaError(f"/citations/{i}", f"citation refers to undeclared paper {end!r}")
        if citing == cited:
            raise SchemaError(f"/citations/{i}", f"paper {citing!r} cites itself")
        if not corpus.graph.add(citing, cited):
            raise SchemaError(f"/citations/{i}", f"duplicate citation {citing!r} -> {cited!r}")
    return corpus


def loads_corpus(text: str) -> Corpus:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("", f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return corpus_from_json(doc)


def load_corpus(path: str | os.PathLike) -> Corpus:
    with open(path, encoding="utf-8") as fh:
        return loads_corpus(fh.read())


def save_corpus(corpus: Corpus, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_corpus(corpus))
