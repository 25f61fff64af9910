"""Exception hierarchy shared by all slrsim modules."""

from __future__ import annotations


class SlrsimError(Exception):
    """Base class for every domain error raised by slrsim."""


class CorpusError(SlrsimError):
    pass


class EmptyTitle(CorpusError):
    pass


class ConflictingIndexEvidence(CorpusError):
    """A paper is recorded as both indexed and not indexed by one source."""


class SelfCitation(CorpusError):
    pass


class UnknownPaper(CorpusError):
    def __init__(self, paper_id: str, message: str | None = None):
        self.paper_id = paper_id
        super().__init__(message or f"unknown paper {paper_id!r}")


class DuplicateId(CorpusError):
    pass


class UnknownSource(SlrsimError):
    def __init__(self, source: str):
        self.source = source
        super().__init__(f"unknown source {source!r}")


class EmptyOracle(SlrsimError):
    pass


class ParseError(SlrsimError):
    """Malformed input text, positioned at a 1-based line and column."""

    def __init__(self, message: str, line: int, column: int):
        self.line = line
        self.column = column
        self.reason = message
        super().__init__(f"line {line}, column {column}: {message}")


class UnbalancedBraces(ParseError):
    pass


class UnsupportedMacro(ParseError):
    pass


class SchemaError(SlrsimError):
    """Corpus or strategy document violates its schema; ``pointer`` is a JSON pointer."""

    def __init__(self, pointer: str, message: str):
        self.pointer = pointer
        self.reason = message
        super().__init__(f"{pointer or '/'}: {message}")


class InvalidSpec(SlrsimError):
    pass


class MissingRanks(InvalidSpec):
    pass


class IterationCapExceeded(SlrsimError):
    """The iteration cap was hit while the frontier was still non-empty.

    ``partial`` holds whatever the run accumulated before stopping.
    """

    def __init__(self, message: str, partial=None):
        self.partial = partial
        super().__init__(message)


class InconsistentCounts(SlrsimError, ValueError):
    pass


class UnsupportedFormat(SlrsimError):
    pass
