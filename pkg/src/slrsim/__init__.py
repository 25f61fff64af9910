"""Simulate and score systematic-review search strategies over a citation corpus."""

from .analytics import (
    indexed_recall,
    library_performance,
    overlap_matrix,
    strategy_comparison,
)
from .bibtex import BibEntry, parse_bibtex
from .corpus import (
    CitationGraph,
    Corpus,
    IndexStatus,
    Paper,
    Source,
    SourceKind,
    add_citation,
    normalize_title,
    register_paper,
    validate,
)
from .engine import (
    ExplicitList,
    FromDbSelected,
    RankedSource,
    SnowballMode,
    StrategySpec,
    backward_candidates,
    complementarity,
    db_search,
    forward_candidates,
    run_strategy,
    snowball,
)
from .ingest import import_citers, import_references, load_corpus, save_corpus
from .metrics import Metrics, compute_metrics

__version__ = "0.1.0"
