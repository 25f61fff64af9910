import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gen import random_case
from slrsim import (
    Corpus,
    ExplicitList,
    FromDbSelected,
    Paper,
    RankedSource,
    SnowballMode,
    StrategySpec,
    add_citation,
    backward_candidates,
    complementarity,
    db_search,
    forward_candidates,
    register_paper,
    run_strategy,
    snowball,
)
from slrsim.engine import PRESET_NAMES, load_spec_file, preset, spec_from_json, spec_to_json
from slrsim.errors import (
    EmptyOracle,
    InvalidSpec,
    IterationCapExceeded,
    MissingRanks,
    UnknownPaper,
    UnknownSource,
)


@pytest.fixture
def five():
    """A cites B, B cites E, C cites A, D cites C; oracle {A,B,C,E}; Scopus returns A."""
    corpus = Corpus()
    corpus.add_source("Scopus")
    for pid in "ABCDE":
        register_paper(
            corpus,
            Paper(pid, title=f"Paper {pid}", selected=pid in "ABCE", returned_by={"Scopus"} if pid == "A" else set()),
        )
    for a, b in [("A", "B"), ("B", "E"), ("C", "A"), ("D", "C")]:
        add_citation(corpus, a, b)
    return corpus


def rows(trace):
    return [(r.index, r.phase, "".join(r.new_visited), "".join(r.new_selected), r.accum_visited, r.accum_selected) for r in trace]


def test_candidates(five):
    assert backward_candidates(five, set(), set()) == frozenset()
    assert forward_candidates(five, set(), set()) == frozenset()
    assert forward_candidates(five, {"A"}, {"A"}) == {"C"}
    assert forward_candidates(five, {"D"}, {"D"}) == frozenset()
    corpus = Corpus()
    for pid in "ABC":
        register_paper(corpus, Paper(pid, title=pid))
    add_citation(corpus, "A", "B")
    add_citation(corpus, "A", "C")
    add_citation(corpus, "B", "A")
    assert backward_candidates(corpus, {"A"}, {"C"}) == {"B"}
    assert backward_candidates(corpus, {"A"}, {"A", "B", "C"}) == frozenset()


@pytest.mark.parametrize(
    "mode, visited, selected",
    [
        ("bs-only", "ABE", "ABE"),
        ("fs-only", "ACD", "AC"),
        ("parallel", "ABCDE", "ABCE"),
        ("iterative", "ABCDE", "ABCE"),
        ("bs-then-fs", "ABCDE", "ABCE"),
        ("fs-then-bs", "ABCDE", "ABCE"),
        ("none", "A", "A"),
    ],
)
def test_five_paper_modes(five, mode, visited, selected):
    result = snowball(five, {"A"}, {"A"}, mode)
    assert result.visited == set(visited)
    assert result.selected == set(selected)


def test_iterative_trace(five):
    assert rows(snowball(five, {"A"}, {"A"}, "iterative").trace) == [
        (1, "backward", "B", "B", 2, 2),
        (1, "forward", "C", "C", 2, 2),
        (1, "union", "BC", "BC", 3, 3),
        (2, "backward", "E", "E", 4, 4),
        (2, "forward", "D", "", 4, 3),
        (2, "union", "DE", "E", 5, 4),
    ]


def test_parallel_trace_keeps_branch_counts(five):
    assert rows(snowball(five, {"A"}, {"A"}, "parallel").trace) == [
        (1, "backward", "B", "B", 2, 2),
        (1, "forward", "C", "C", 2, 2),
        (1, "union", "BC", "BC", 3, 3),
        (2, "backward", "E", "E", 3, 3),
        (2, "forward", "D", "", 3, 2),
        (2, "union", "DE", "E", 5, 4),
    ]


def test_sequential_traces(five):
    assert rows(snowball(five, {"A"}, {"A"}, "bs-then-fs").trace) == [
        (1, "backward", "B", "B", 2, 2),
        (2, "backward", "E", "E", 3, 3),
        (3, "forward", "C", "C", 4, 4),
        (4, "forward", "D", "", 5, 4),
    ]
    assert rows(snowball(five, {"A"}, {"A"}, "fs-then-bs").trace) == [
        (1, "forward", "C", "C", 2, 2),
        (2, "forward", "D", "", 3, 2),
        (3, "backward", "B", "B", 4, 3),
        (4, "backward", "E", "E", 5, 4),
    ]


def test_sequential_second_phase_starts_from_all_selected():
    # A cites B; C cites B. Backward from A finds B, forward from B then finds C.
    corpus = Corpus()
    for pid in "ABC":
        register_paper(corpus, Paper(pid, title=pid, selected=True))
    add_citation(corpus, "A", "B")
    add_citation(corpus, "C", "B")
    assert snowball(corpus, {"A"}, {"A"}, "bs-then-fs").selected == {"A", "B", "C"}
    assert snowball(corpus, {"A"}, {"A"}, "parallel").selected == {"A", "B"}


def test_empty_seed(five):
    for mode in SnowballMode:
        result = snowball(five, set(), {"D"}, mode)
        assert result.visited == {"D"} and result.selected == frozenset() and result.trace == ()


def test_snowball_preconditions(five):
    with pytest.raises(InvalidSpec):
        snowball(five, {"D"}, {"D"}, "iterative")
    with pytest.raises(InvalidSpec):
        snowball(five, {"A"}, set(), "iterative")
    with pytest.raises(UnknownPaper):
        snowball(five, set(), {"Q"}, "iterative")


def chain(n):
    corpus = Corpus()
    corpus.add_source("S")
    for i in range(n):
        register_paper(corpus, Paper(f"c{i:02d}", title=f"Chain {i}", selected=True, returned_by={"S"} if i == 0 else set()))
    for i in range(n - 1):
        add_citation(corpus, f"c{i:02d}", f"c{i + 1:02d}")
    return corpus


@pytest.mark.parametrize("mode", ["iterative", "bs-only", "parallel", "bs-then-fs"])
def test_iteration_cap_reports_partial_result(mode):
    corpus = chain(10)
    with pytest.raises(IterationCapExceeded) as info:
        snowball(corpus, {"c00"}, {"c00"}, mode, max_iterations=3)
    partial = info.value.partial
    assert {"c01", "c02", "c03"} <= partial.selected
    assert "c05" not in partial.visited
    assert snowball(corpus, {"c00"}, {"c00"}, mode, max_iterations=10).selected == set(corpus.papers)


def test_iteration_cap_through_run_strategy():
    corpus = chain(6)
    spec = StrategySpec({"S"}, FromDbSelected(), SnowballMode.BS_ONLY, max_iterations=2)
    with pytest.raises(IterationCapExceeded) as info:
        run_strategy(corpus, spec)
    partial = info.value.partial
    assert partial.trace[0].phase == "seed"
    assert partial.final_metrics.hits == len(partial.selected) == 3


def test_db_search(five):
    five.add_source("ACM")
    five.papers["B"].returned_by.add("ACM")
    five.papers["D"].returned_by.add("ACM")
    out = db_search(five, {"ACM"})
    assert out.visited == {"B", "D"} and out.selected == {"B"}
    empty = db_search(five, set())
    assert empty.visited == frozenset() and empty.selected == frozenset()
    with pytest.raises(UnknownSource):
        db_search(five, {"Nowhere"})


def test_run_strategy_examples(five):
    spec = StrategySpec({"Scopus"}, FromDbSelected(), SnowballMode.PARALLEL)
    out = run_strategy(five, spec)
    assert out.visited == set("ABCDE") and out.selected == set("ABCE")
    assert out.final_metrics.summary() == "P=80.00 R=100.00 F=88.89"
    assert out.trace[0].phase == "seed" and out.trace[-1].phase == "union"
    assert len(out.traversals) == 4

    oracle_seed = run_strategy(five, StrategySpec(seed=ExplicitList(tuple("ABCE"))))
    assert oracle_seed.final_metrics.summary() == "P=100.00 R=100.00 F=100.00"

    empty = run_strategy(five, StrategySpec(seed=ExplicitList(()), mode=SnowballMode.PARALLEL))
    assert empty.final_metrics.summary() == "P=NAN R=0.00 F=0.00"


def test_ranked_seed():
    corpus = Corpus()
    corpus.add_source("GS", "search-engine")
    for i, sel in enumerate([True, False, True, True], start=1):
        register_paper(corpus, Paper(f"g{i}", title=f"G {i}", selected=sel, returned_by={"GS"}, ranks={"GS": i}))
    out = run_strategy(corpus, StrategySpec(seed=RankedSource("GS", 2)))
    assert out.visited == {"g1", "g2"} and out.selected == {"g1"}
    corpus.papers["g4"].ranks = {}
    with pytest.raises(MissingRanks):
        run_strategy(corpus, StrategySpec(seed=RankedSource("GS", 2)))
    with pytest.raises(UnknownSource):
        run_strategy(corpus, StrategySpec(seed=RankedSource("Nope", 2)))


def test_empty_oracle_rejected():
    corpus = Corpus()
    corpus.add_source("S")
    register_paper(corpus, Paper("a", title="A", returned_by={"S"}))
    with pytest.raises(EmptyOracle):
        run_strategy(corpus, StrategySpec({"S"}))


def test_spec_validation():
    with pytest.raises(InvalidSpec):
        StrategySpec(frozenset(), FromDbSelected())
    with pytest.raises(InvalidSpec):
        StrategySpec({"S"}, ExplicitList(("a",)))
    with pytest.raises(InvalidSpec):
        StrategySpec({"S"}, max_iterations=0)
    with pytest.raises(InvalidSpec):
        RankedSource("GS", 0)


@pytest.mark.parametrize(
    "text, mode",
    [("BS*FS", "iterative"), ("bs||fs", "parallel"), ("bs+fs", "bs-then-fs"), ("FS+BS", "fs-then-bs"), ("none", "none")],
)
def test_mode_aliases(text, mode):
    assert SnowballMode.parse(text).value == mode


def test_unknown_mode_lists_valid_ones():
    with pytest.raises(InvalidSpec, match="valid modes: iterative, parallel"):
        SnowballMode.parse("sideways")


def test_complementarity(five):
    result = complementarity(five, {"A"}, {"A"})
    assert (result.bs_selected, result.fs_selected, result.overlap) == (("B", "E"), ("C",), ())
    assert result.counts() == {"bs_selected": 2, "fs_selected": 1, "overlap": 0, "bs_only": 2, "fs_only": 1}
    assert complementarity(five, set(), set()).counts() == dict.fromkeys(result.counts(), 0)


def test_presets_expand(five):
    five.add_source("Google Scholar", "search-engine")
    specs = {name: preset(name, five) for name in PRESET_NAMES}
    assert specs["db"] == StrategySpec(frozenset({"Scopus", "Google Scholar"}))
    assert specs["sb"].seed == RankedSource("Google Scholar", 60)
    assert specs["scopus-par"] == StrategySpec({"Scopus"}, mode=SnowballMode.PARALLEL)
    with pytest.raises(InvalidSpec):
        preset("everything", five)


def test_spec_json_round_trip():
    for spec in [
        StrategySpec({"A", "B"}, mode=SnowballMode.ITERATIVE, max_iterations=7),
        StrategySpec(seed=ExplicitList(("x", "y")), mode=SnowballMode.SEQ_FS_THEN_BS),
        StrategySpec(seed=RankedSource("GS", 12), mode=SnowballMode.BS_ONLY),
    ]:
        assert spec_from_json(spec_to_json(spec)) == spec


def test_spec_file_is_all_or_nothing(five):
    good = {"name": "db", "db_sources": ["Scopus"], "seed": {"kind": "db"}, "mode": "none"}
    assert [n for n, _ in load_spec_file({"strategies": [good, {"name": "p", "preset": "scopus-iter"}]}, five)] == ["db", "p"]
    assert load_spec_file({"strategies": []}, five) == []
    with pytest.raises(InvalidSpec, match="duplicate"):
        load_spec_file({"strategies": [good, good]}, five)
    with pytest.raises(InvalidSpec, match="Nowhere"):
        load_spec_file({"strategies": [good, {**good, "name": "x", "db_sources": ["Nowhere"]}]}, five)
    with pytest.raises(InvalidSpec):
        load_spec_file({"strategies": [{"name": "m", "mode": "wobble", "db_sources": ["Scopus"]}]}, five)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(list(SnowballMode)))
def test_enlarging_the_seed_never_shrinks_results(seed, mode):
    rng = random.Random(seed)
    case = random_case(rng, max_papers=20, max_edges=50)
    extra = {pid for pid in case.oracle if rng.random() < 0.5}
    small = snowball(case.corpus, case.seed_selected, case.seed_visited, mode)
    big = snowball(case.corpus, case.seed_selected | extra, case.seed_visited | extra, mode)
    assert small.selected <= big.selected
    assert small.visited <= big.visited


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(list(SnowballMode)))
def test_trace_is_consistent_with_result(seed, mode):
    case = random_case(random.Random(seed), max_papers=20, max_edges=50)
    result = snowball(case.corpus, case.seed_selected, case.seed_visited, mode)
    again = snowball(case.corpus, case.seed_selected, case.seed_visited, mode)
    assert result == again
    combined = [r for r in result.trace if r.phase == "union"] if mode in (SnowballMode.ITERATIVE, SnowballMode.PARALLEL) else list(result.trace)
    counts = [(r.accum_visited, r.accum_selected) for r in combined]
    assert counts == sorted(counts)
    if combined:
        assert counts[-1] == (len(result.visited), len(result.selected))
    for r in result.trace:
        assert list(r.new_visited) == sorted(r.new_visited)
        assert set(r.new_selected) <= set(r.new_visited) & case.oracle
