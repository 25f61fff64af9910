"""Rendering of analysis tables, run traces, citation graphs and BS/FS splits.

Every renderer is a pure function of its input: no timestamps, no
environment data, stable ordering.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Union

from .analytics import ComparisonRow, IndexedRow, LibraryRow, OverlapMatrix
from .corpus import Corpus
from .engine import Complementarity, IterationRecord, StrategyOutcome
from .errors import UnsupportedFormat
from .metrics import Metrics, format_percent, round_half_up

TABLE_FORMATS = ("csv", "markdown", "json")


@dataclass(frozen=True)
class Ratio:
    """A percentage shown with its raw fraction, e.g. ``46.67 (7/15)``."""

    numerator: int
    denominator: int
    show_percent: bool = True

    @property
    def percent(self) -> Fraction | None:
        if self.denominator == 0:
            return None
        return Fraction(100 * self.numerator, self.denominator)

    def text(self) -> str:
        if not self.show_percent:
            return f"{self.numerator}/{self.denominator}"
        return f"{format_percent(self.percent)} ({self.numerator}/{self.denominator})"

    def to_json(self) -> dict:
        pct = self.percent
        return {
            "percent": None if pct is None else float(round_half_up(pct)),
            "nan": pct is None,
            "numerator": self.numerator,
            "denominator": self.denominator,
        }


@dataclass(frozen=True)
class Percent:
    value: Fraction | None

    def text(self) -> str:
        return format_percent(self.value)

    def to_json(self) -> dict:
        return {
            "percent": None if self.value is None else float(round_half_up(self.value)),
            "nan": self.value is None,
        }


Cell = Union[str, int, Ratio, Percent]


@dataclass
class Table:
    columns: list[str]
    rows: list[list[Cell]] = field(default_factory=list)


def _text(cell: Cell) -> str:
    if isinstance(cell, (Ratio, Percent)):
        return cell.text()
    return str(cell)


def _json_cell(cell: Cell):
    if isinstance(cell, (Ratio, Percent)):
        return cell.to_json()
    return cell


def _md_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace("|", "\\|").replace("\n", " ")


def render_table(table: Table, fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(table.columns)
        for row in table.rows:
            writer.writerow([_text(c) for c in row])
        return buf.getvalue()
    if fmt == "markdown":
        lines = [
            "| " + " | ".join(_md_escape(c) for c in table.columns) + " |",
            "|" + "|".join(" --- " for _ in table.columns) + "|",
        ]
        for row in table.rows:
            lines.append("| " + " | ".join(_md_escape(_text(c)) for c in row) + " |")
        return "\n".join(lines) + "\n"
    if fmt == "json":
        doc = {
            "columns": list(table.columns),
            "rows": [{col: _json_cell(c) for col, c in zip(table.columns, row)} for row in table.rows],
        }
        return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"
    raise UnsupportedFormat(f"cannot render a table as {fmt!r}; use one of {', '.join(TABLE_FORMATS)}")


def _metric_cells(m: Metrics) -> list[Cell]:
    return [Ratio(m.hits, m.visited), Ratio(m.hits, m.oracle_size), Percent(m.f_measure_fraction)]


def library_table(rows: Iterable[LibraryRow]) -> Table:
    return Table(
        ["source", "precision", "recall", "f_measure"],
        [[r.source, *_metric_cells(r.metrics)] for r in rows],
    )


def indexed_table(rows: Iterable[IndexedRow]) -> Table:
    return Table(
        ["source", "indexed_recall", "indexed", "not_indexed", "unknown"],
        [[r.source, Ratio(r.indexed, r.oracle_size), r.indexed, r.not_indexed, r.unknown] for r in rows],
    )


def overlap_table(matrix: OverlapMatrix) -> Table:
    rows = []
    for r in matrix.sources:
        row: list[Cell] = [r]
        for c in matrix.sources:
            if r == c:
                row.append(Ratio(*matrix.diagonal[r], show_percent=False))
            else:
                row.append(Ratio(*matrix.cells[(r, c)]))
        rows.append(row)
    return Table(["row contains column", *matrix.sources], rows)


def comparison_table(rows: Iterable[ComparisonRow]) -> Table:
    return Table(
        ["strategy", "precision", "recall", "f_measure", "visited", "selected"],
        [
            [r.name, *_metric_cells(r.metrics), len(r.outcome.visited), len(r.outcome.selected)]
            for r in rows
        ],
    )


def trace_table(trace: Iterable[IterationRecord]) -> Table:
    """Per-iteration accumulated metrics, one row per trace record."""
    return Table(
        ["iteration", "state", "precision", "recall", "f_measure"],
        [[rec.index, rec.phase, *_metric_cells(rec.metrics)] for rec in trace],
    )


def render_trace(trace: Iterable[IterationRecord]) -> str:
    return json.dumps([rec.to_json() for rec in trace], indent=2, ensure_ascii=False) + "\n"


# --- DOT -----------------------------------------------------------------------

NODE_STYLE = {
    "seed-selected": "#1f78b4",
    "snowball-selected": "#33a02c",
    "visited-unselected": "#d9d9d9",
    "stub": "#ffffff",
}


def _dot_id(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def _dot_attrs(attrs: dict[str, str]) -> str:
    return ", ".join(f"{k}={_dot_id(attrs[k])}" for k in sorted(attrs))


def node_class(corpus: Corpus, outcome: StrategyOutcome, pid: str) -> str:
    if pid in outcome.selected:
        return "seed-selected" if pid in outcome.seed_selected else "snowball-selected"
    paper = corpus.papers.get(pid)
    if paper is not None and paper.stub:
        return "stub"
    return "visited-unselected"


def render_citation_graph(corpus: Corpus, outcome: StrategyOutcome, *, all_edges: bool = False) -> str:
    """DOT graph of the papers a run visited.

    By default only the edges whose traversal discovered a paper are drawn;
    ``all_edges`` draws every citation among visited papers instead.
    """
    lines = [
        "digraph citations {",
        '  graph [rankdir="LR"];',
        '  node [shape="box", style="filled"];',
    ]
    for pid in sorted(outcome.visited):
        cls = node_class(corpus, outcome, pid)
        attrs = {"class": cls, "fillcolor": NODE_STYLE[cls], "label": pid}
        paper = corpus.papers.get(pid)
        if paper is not None and paper.title:
            attrs["tooltip"] = paper.title
        if cls == "stub":
            attrs["style"] = "dashed"
        lines.append(f"  {_dot_id(pid)} [{_dot_attrs(attrs)}];")
    if all_edges:
        edges = sorted(
            (a, b) for a, b in corpus.graph.edges if a in outcome.visited and b in outcome.visited
        )
        for a, b in edges:
            lines.append(f"  {_dot_id(a)} -> {_dot_id(b)};")
    else:
        for a, b, direction in sorted(outcome.traversals):
            lines.append(f"  {_dot_id(a)} -> {_dot_id(b)} [{_dot_attrs({'discovery': direction})}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def render_venn(result: Complementarity, fmt: str) -> str:
    """Counts and members of the backward-only / both / forward-only regions."""
    if fmt == "json":
        doc = {
            "bs_only": len(result.bs_only),
            "overlap": len(result.overlap),
            "fs_only": len(result.fs_only),
            "bs_selected": len(result.bs_selected),
            "fs_selected": len(result.fs_selected),
            "members": {
                "bs_only": list(result.bs_only),
                "overlap": list(result.overlap),
                "fs_only": list(result.fs_only),
            },
        }
        return json.dumps(doc, indent=2) + "\n"
    if fmt == "markdown":
        table = Table(
            ["region", "count", "papers"],
            [
                ["backward only", len(result.bs_only), ", ".join(result.bs_only)],
                ["both", len(result.overlap), ", ".join(result.overlap)],
                ["forward only", len(result.fs_only), ", ".join(result.fs_only)],
            ],
        )
        return render_table(table, "markdown")
    raise UnsupportedFormat(f"cannot render a BS/FS split as {fmt!r}; use json or markdown")
