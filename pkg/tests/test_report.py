import json

import pytest

from dot_reader import read_dot
from slrsim import Corpus, FromDbSelected, Paper, SnowballMode, StrategySpec, add_citation, complementarity, register_paper, run_strategy
from slrsim.analytics import library_performance
from slrsim.engine import Complementarity
from slrsim.errors import UnsupportedFormat
from slrsim.report import (
    Percent,
    Ratio,
    Table,
    library_table,
    render_citation_graph,
    render_table,
    render_trace,
    render_venn,
    trace_table,
)


@pytest.fixture
def five():
    corpus = Corpus()
    corpus.add_source("Scopus")
    for pid in "ABCDE":
        register_paper(
            corpus,
            Paper(pid, title=f'Paper "{pid}"', selected=pid in "ABCE", returned_by={"Scopus"} if pid == "A" else set()),
        )
    for a, b in [("A", "B"), ("B", "E"), ("C", "A"), ("D", "C")]:
        add_citation(corpus, a, b)
    return corpus


def test_ratio_cells():
    assert Ratio(7, 15).text() == "46.67 (7/15)"
    assert Ratio(0, 0).text() == "NAN (0/0)"
    assert Ratio(2, 3, show_percent=False).text() == "2/3"
    assert Ratio(0, 0).to_json() == {"percent": None, "nan": True, "numerator": 0, "denominator": 0}
    assert Percent(None).text() == "NAN"


def test_markdown_metrics_row():
    table = Table(["source", "precision"], [["Scopus", Ratio(7, 15)]])
    assert render_table(table, "markdown") == "| source | precision |\n| --- | --- |\n| Scopus | 46.67 (7/15) |\n"


def test_empty_table_is_header_only():
    table = Table(["strategy", "precision"])
    assert render_table(table, "csv") == "strategy,precision\r\n"
    assert json.loads(render_table(table, "json")) == {"columns": ["strategy", "precision"], "rows": []}


def test_csv_quoting_and_markdown_escaping():
    table = Table(["name", "n"], [['a, "b"', 1], ["x|y", 2]])
    assert render_table(table, "csv") == 'name,n\r\n"a, ""b""",1\r\nx|y,2\r\n'
    assert "| x\\|y | 2 |" in render_table(table, "markdown")


def test_unsupported_format():
    with pytest.raises(UnsupportedFormat):
        render_table(Table(["a"]), "html")
    with pytest.raises(UnsupportedFormat):
        render_venn(complementarity_empty(), "svg")


def complementarity_empty():
    return Complementarity((), (), (), (), ())


def test_rendering_is_deterministic(five):
    outcome = run_strategy(five, StrategySpec({"Scopus"}, FromDbSelected(), SnowballMode.ITERATIVE))
    for fmt in ("csv", "markdown", "json"):
        a = render_table(trace_table(outcome.trace), fmt)
        assert a == render_table(trace_table(outcome.trace), fmt)
    assert render_trace(outcome.trace) == render_trace(outcome.trace)
    assert render_citation_graph(five, outcome) == render_citation_graph(five, outcome)
    lib = render_table(library_table(library_performance(five)), "json")
    assert json.loads(lib)["rows"][0]["precision"] == {"percent": 100.0, "nan": False, "numerator": 1, "denominator": 1}


def test_trace_json_fields(five):
    outcome = run_strategy(five, StrategySpec({"Scopus"}, mode=SnowballMode.PARALLEL))
    doc = json.loads(render_trace(outcome.trace))
    assert doc[0]["phase"] == "seed"
    assert set(doc[0]) == {"index", "phase", "new_visited", "new_selected", "accum_visited", "accum_selected", "metrics"}
    assert doc[-1]["accum_visited"] == 5


def test_parallel_graph(five):
    outcome = run_strategy(five, StrategySpec({"Scopus"}, mode=SnowballMode.PARALLEL))
    graph = read_dot(render_citation_graph(five, outcome))
    classes = {pid: attrs["class"] for pid, attrs in graph["nodes"].items()}
    assert classes == {
        "A": "seed-selected",
        "B": "snowball-selected",
        "C": "snowball-selected",
        "D": "visited-unselected",
        "E": "snowball-selected",
    }
    assert [(a, b, attrs["discovery"]) for a, b, attrs in graph["edges"]] == [
        ("A", "B", "backward"),
        ("B", "E", "backward"),
        ("C", "A", "forward"),
        ("D", "C", "forward"),
    ]
    assert graph["nodes"]["A"]["tooltip"] == 'Paper "A"'


def test_seed_only_graph_has_no_edges(five):
    outcome = run_strategy(five, StrategySpec({"Scopus"}))
    graph = read_dot(render_citation_graph(five, outcome))
    assert list(graph["nodes"]) == ["A"] and graph["edges"] == []


def test_all_edges_graph_and_stubs(five):
    add_citation(five, "E", "stub1")
    outcome = run_strategy(five, StrategySpec({"Scopus"}, mode=SnowballMode.BS_ONLY))
    graph = read_dot(render_citation_graph(five, outcome, all_edges=True))
    assert graph["nodes"]["stub1"]["class"] == "stub"
    assert graph["nodes"]["stub1"]["style"] == "dashed"
    assert [(a, b) for a, b, _ in graph["edges"]] == [("A", "B"), ("B", "E"), ("E", "stub1")]


def test_venn(five):
    result = complementarity(five, {"A"}, {"A"})
    doc = json.loads(render_venn(result, "json"))
    assert (doc["bs_only"], doc["overlap"], doc["fs_only"]) == (2, 0, 1)
    assert doc["members"] == {"bs_only": ["B", "E"], "overlap": [], "fs_only": ["C"]}
    empty = json.loads(render_venn(complementarity_empty(), "json"))
    assert (empty["bs_only"], empty["overlap"], empty["fs_only"]) == (0, 0, 0)
    assert "| backward only | 2 | B, E |" in render_venn(result, "markdown")


def test_dot_reader_rejects_garbage():
    with pytest.raises(ValueError):
        read_dot("digraph g { a -> ; }")
    with pytest.raises(ValueError):
        read_dot("graph g { }")
