"""Command-line entry point: ``slrsim <command> ...``.

Exit codes: 0 success, 1 domain error (invalid corpus or strategy),
2 I/O or parse failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import analytics, engine, report
from .bibtex import parse_bibtex
from .corpus import Corpus, validate
from .engine import ExplicitList, FromDbSelected, RankedSource, SnowballMode, StrategySpec
from .errors import IterationCapExceeded, ParseError, SchemaError, SlrsimError
from .ingest import (
    dumps_corpus,
    import_citers,
    import_references,
    load_corpus,
    merge_corpus,
    read_citers_csv,
)

EXIT_OK, EXIT_DOMAIN, EXIT_IO = 0, 1, 2


class _Fail(Exception):
    def __init__(self, code: int, message: str):
        self.code = code
        super().__init__(message)


def _use_color(stream) -> bool:
    return not os.environ.get("SLRSIM_NO_COLOR") and hasattr(stream, "isatty") and stream.isatty()


def _paint(text: str, code: str, stream) -> str:
    return f"\x1b[{code}m{text}\x1b[0m" if _use_color(stream) else text


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise _Fail(EXIT_IO, f"cannot read {path}: {exc}") from None


def _emit(text: str, out: str | None) -> None:
    if out:
        try:
            Path(out).write_text(text, encoding="utf-8", newline="")
        except OSError as exc:
            raise _Fail(EXIT_IO, f"cannot write {out}: {exc}") from None
    else:
        sys.stdout.write(text)


def _load(path: str, *, check: bool = True) -> Corpus:
    try:
        corpus = load_corpus(path)
    except OSError as exc:
        raise _Fail(EXIT_IO, f"cannot read {path}: {exc.strerror or exc}") from None
    except SchemaError as exc:
        raise _Fail(EXIT_IO, f"{path}: {exc}") from None
    if check:
        errors = [d for d in validate(corpus) if d.severity == "error"]
        if errors:
            lines = "\n".join(str(d) for d in errors)
            raise _Fail(EXIT_DOMAIN, f"{path} is not simulation-ready:\n{lines}")
    return corpus


def _split_list(values: list[str] | None) -> list[str]:
    out: list[str] = []
    for v in values or []:
        out.extend(s.strip() for s in v.split(",") if s.strip())
    return out


def _add_spec_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("strategy")
    g.add_argument("--preset", help=f"named strategy: {', '.join(engine.PRESET_NAMES)}")
    g.add_argument("--spec", help="strategy file; pick an entry with --name")
    g.add_argument("--name", help="strategy name inside --spec")
    g.add_argument("--db-sources", action="append", metavar="NAMES", help="comma-separated sources searched for the seed")
    g.add_argument("--seed-source", help="seed with the top results of this ranked source")
    g.add_argument("--seed-cap", type=int, default=engine.DEFAULT_SEED_CAP, help="rank cap for --seed-source (default %(default)s)")
    g.add_argument("--seed-ids", help="comma-separated explicit seed paper ids (may be empty)")
    g.add_argument("--mode", default="none", help="snowball mode: " + ", ".join(m.value for m in SnowballMode))
    g.add_argument("--max-iterations", type=int, default=engine.DEFAULT_MAX_ITERATIONS)
    g.add_argument("--hub", default="Scopus", help="hub source for the scopus-* presets")


def _spec_from_args(args, corpus: Corpus) -> tuple[str, StrategySpec]:
    if args.preset:
        spec = engine.preset(args.preset, corpus, hub=args.hub, seed_source=args.seed_source or "Google Scholar", seed_cap=args.seed_cap)
        spec = replace(spec, max_iterations=args.max_iterations)
        engine.check_spec_sources(corpus, spec)
        return engine.PRESET_LABELS[args.preset], spec
    if args.spec:
        try:
            doc = json.loads(_read_text(args.spec))
        except json.JSONDecodeError as exc:
            raise _Fail(EXIT_IO, f"{args.spec}: invalid JSON: {exc}") from None
        named = engine.load_spec_file(doc, corpus)
        if args.name is None:
            if len(named) != 1:
                raise _Fail(EXIT_DOMAIN, f"{args.spec} holds {len(named)} strategies; choose one with --name")
            return named[0]
        for name, spec in named:
            if name == args.name:
                return name, spec
        raise _Fail(EXIT_DOMAIN, f"no strategy named {args.name!r} in {args.spec}")

    mode = SnowballMode.parse(args.mode)
    sources = frozenset(_split_list(args.db_sources))
    if args.seed_ids is not None:
        seed = ExplicitList(tuple(_split_list([args.seed_ids])))
    elif args.seed_source:
        seed = RankedSource(args.seed_source, args.seed_cap)
    else:
        seed = FromDbSelected()
    spec = StrategySpec(sources, seed, mode, args.max_iterations)
    engine.check_spec_sources(corpus, spec)
    return "inline", spec


def _metrics_line(outcome: engine.StrategyOutcome) -> str:
    return f"{outcome.final_metrics.summary()} visited={len(outcome.visited)} selected={len(outcome.selected)}"


# --- commands --------------------------------------------------------------


def cmd_validate(args) -> int:
    corpus = _load(args.corpus, check=False)
    diagnostics = validate(corpus)
    for d in diagnostics:
        color = "31" if d.severity == "error" else "33"
        print(_paint(str(d), color, sys.stdout))
    n_err = sum(d.severity == "error" for d in diagnostics)
    if not diagnostics:
        print(f"ok: {len(corpus.papers)} papers, {len(corpus.graph)} citations, {len(corpus.oracle)} selected")
    return EXIT_DOMAIN if n_err else EXIT_OK


def cmd_simulate(args) -> int:
    corpus = _load(args.corpus)
    _, spec = _spec_from_args(args, corpus)
    try:
        outcome = engine.run_strategy(corpus, spec)
    except IterationCapExceeded as exc:
        if args.out and exc.partial is not None:
            _emit(report.render_trace(exc.partial.trace), args.out)
        raise
    if args.out:
        _emit(report.render_trace(outcome.trace), args.out)
    if args.table:
        sys.stdout.write(report.render_table(report.trace_table(outcome.trace), args.table))
    print(_metrics_line(outcome))
    return EXIT_OK


def cmd_compare(args) -> int:
    corpus = _load(args.corpus)
    try:
        doc = json.loads(_read_text(args.spec_file))
    except json.JSONDecodeError as exc:
        raise _Fail(EXIT_IO, f"{args.spec_file}: invalid JSON: {exc}") from None
    named = engine.load_spec_file(doc, corpus)
    rows = analytics.strategy_comparison(corpus, named)
    _emit(report.render_table(report.comparison_table(rows), args.format), args.out)
    return EXIT_OK


def cmd_presets(args) -> int:
    corpus = _load(args.corpus)
    entries = []
    for name in engine.PRESET_NAMES:
        spec = engine.preset(name, corpus, hub=args.hub, seed_source=args.seed_source, seed_cap=args.seed_cap)
        entries.append({"name": engine.PRESET_LABELS[name], **engine.spec_to_json(spec)})
    _emit(json.dumps({"strategies": entries}, indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_libraries(args) -> int:
    corpus = _load(args.corpus)
    table = report.library_table(analytics.library_performance(corpus))
    _emit(report.render_table(table, args.format), args.out)
    return EXIT_OK


def cmd_indexed(args) -> int:
    corpus = _load(args.corpus)
    table = report.indexed_table(analytics.indexed_recall(corpus))
    _emit(report.render_table(table, args.format), args.out)
    return EXIT_OK


def cmd_matrix(args) -> int:
    corpus = _load(args.corpus)
    table = report.overlap_table(analytics.overlap_matrix(corpus))
    _emit(report.render_table(table, args.format), args.out)
    return EXIT_OK


def cmd_complementarity(args) -> int:
    corpus = _load(args.corpus)
    if not (args.preset or args.spec or args.db_sources or args.seed_source or args.seed_ids is not None):
        args.db_sources = [",".join(corpus.source_names())]
    args.mode = "none"
    _, spec = _spec_from_args(args, corpus)
    seed = engine.run_strategy(corpus, StrategySpec(spec.db_sources, spec.seed, SnowballMode.NONE, spec.max_iterations))
    result = engine.complementarity(corpus, seed.seed_selected, seed.seed_visited, spec.max_iterations)
    _emit(report.render_venn(result, args.format), args.out)
    return EXIT_OK


def cmd_graph(args) -> int:
    corpus = _load(args.corpus)
    _, spec = _spec_from_args(args, corpus)
    outcome = engine.run_strategy(corpus, spec)
    _emit(report.render_citation_graph(corpus, outcome, all_edges=args.all_edges), args.out)
    return EXIT_OK


def _finish_ingest(args, corpus: Corpus, stats) -> int:
    text = dumps_corpus(corpus)
    if args.in_place:
        _emit(text, args.corpus)
    else:
        _emit(text, args.out)
    print(f"ingested: {stats}", file=sys.stderr)
    return EXIT_OK


def cmd_ingest_bibtex(args) -> int:
    corpus = _load(args.corpus, check=False)
    try:
        entries = parse_bibtex(_read_text(args.bibfile))
    except ParseError as exc:
        raise _Fail(EXIT_IO, f"{args.bibfile}: {exc}") from None
    return _finish_ingest(args, corpus, import_references(corpus, args.citing, entries))


def cmd_ingest_citers(args) -> int:
    corpus = _load(args.corpus, check=False)
    try:
        rows = read_citers_csv(_read_text(args.csvfile))
    except SchemaError as exc:
        raise _Fail(EXIT_IO, f"{args.csvfile}: row {exc}") from None
    stats = import_citers(corpus, rows, create_stubs=not args.no_stubs, resolve_titles=args.resolve_titles)
    return _finish_ingest(args, corpus, stats)


def cmd_ingest_corpus(args) -> int:
    corpus = _load(args.corpus, check=False)
    other = _load(args.other, check=False)
    return _finish_ingest(args, corpus, merge_corpus(corpus, other))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slrsim",
        description="Simulate database-search, snowballing and hybrid review strategies over a recorded corpus.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("validate", help="check a corpus file for invariant violations")
    p.add_argument("corpus")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("simulate", help="run one strategy and print its final metrics")
    p.add_argument("corpus")
    _add_spec_flags(p)
    p.add_argument("--out", help="write the iteration trace (JSON) here")
    p.add_argument("--table", choices=report.TABLE_FORMATS, help="also print per-iteration metrics")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="run every strategy of a strategy file side by side")
    p.add_argument("corpus")
    p.add_argument("spec_file")
    p.add_argument("--format", choices=report.TABLE_FORMATS, default="markdown")
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("presets", help="write the seven named strategies as an explicit strategy file")
    p.add_argument("corpus")
    p.add_argument("--hub", default="Scopus")
    p.add_argument("--seed-source", default="Google Scholar")
    p.add_argument("--seed-cap", type=int, default=engine.DEFAULT_SEED_CAP)
    p.add_argument("--out")
    p.set_defaults(func=cmd_presets)

    for name, func, help_text in (
        ("libraries", cmd_libraries, "precision/recall/F of each source's query results"),
        ("indexed", cmd_indexed, "share of selected papers each source indexes"),
        ("matrix", cmd_matrix, "row-contains-column overlap of sources' selected papers"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("corpus")
        p.add_argument("--format", choices=report.TABLE_FORMATS, default="markdown")
        p.add_argument("--out")
        p.set_defaults(func=func)

    p = sub.add_parser("complementarity", help="split backward-only and forward-only snowballing findings")
    p.add_argument("corpus")
    _add_spec_flags(p)
    p.add_argument("--format", choices=("json", "markdown"), default="json")
    p.add_argument("--out")
    p.set_defaults(func=cmd_complementarity)

    p = sub.add_parser("graph", help="DOT citation graph of a simulated strategy")
    p.add_argument("corpus")
    _add_spec_flags(p)
    p.add_argument("--all-edges", action="store_true", help="draw every citation among visited papers")
    p.add_argument("--out")
    p.set_defaults(func=cmd_graph)

    ingest = sub.add_parser("ingest", help="add reference lists, citer rows or another corpus")
    isub = ingest.add_subparsers(dest="kind", required=True, metavar="KIND")
    for kind, func, help_text in (
        ("bibtex", cmd_ingest_bibtex, "register a paper's BibTeX reference list"),
        ("citers", cmd_ingest_citers, "add recorded citer rows (CSV: citing_id,cited_id)"),
        ("corpus", cmd_ingest_corpus, "merge another corpus file"),
    ):
        p = isub.add_parser(kind, help=help_text)
        p.add_argument("corpus")
        if kind == "bibtex":
            p.add_argument("bibfile")
            p.add_argument("--citing", required=True, help="id of the paper whose reference list this is")
        elif kind == "citers":
            p.add_argument("csvfile")
            p.add_argument("--no-stubs", action="store_true", help="reject unknown citing ids instead of creating stubs")
            p.add_argument("--resolve-titles", action="store_true", help="treat unknown keys as titles and register them")
        else:
            p.add_argument("other")
        where = p.add_mutually_exclusive_group()
        where.add_argument("--out", help="write the updated corpus here (default: stdout)")
        where.add_argument("--in-place", action="store_true", help="overwrite the input corpus file")
        p.set_defaults(func=func)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _Fail as exc:
        print(f"slrsim: {exc}", file=sys.stderr)
        return exc.code
    except (ParseError, SchemaError) as exc:
        print(f"slrsim: {exc}", file=sys.stderr)
        return EXIT_IO
    except SlrsimError as exc:
        print(f"slrsim: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
