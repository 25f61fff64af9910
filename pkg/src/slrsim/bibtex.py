"""A strict parser for the BibTeX subset found in exported reference lists.

Supported: ``@type{key, name = {value} | "value" | 123, ...}`` (parentheses
may replace the outer braces), nested braces inside values, and skipped
``@comment`` / ``@preamble`` blocks. ``@string`` definitions and bare macro
references are rejected rather than expanded. Text between entries is
ignored, as BibTeX itself does.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ParseError, UnbalancedBraces, UnsupportedMacro

_IDENT_START = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ")
_NAME_CHARS = _IDENT_START | set("0123456789_-:.+/")
_KEY_STOP = set(",{}()\"=#% \t\r\n")


@dataclass
class BibEntry:
    entry_type: str
    cite_key: str
    fields: dict[str, str] = field(default_factory=dict)
    line: int = 0


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.n = len(text)

    def position(self, pos: int | None = None) -> tuple[int, int]:
        pos = self.pos if pos is None else pos
        line = self.text.count("\n", 0, pos) + 1
        column = pos - (self.text.rfind("\n", 0, pos) + 1) + 1
        return line, column

    def fail(self, message: str, pos: int | None = None, cls=ParseError):
        line, column = self.position(pos)
        return cls(message, line, column)

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < self.n else ""

    def skip_ws(self) -> None:
        while self.pos < self.n and self.text[self.pos].isspace():
            self.pos += 1

    def expect(self, chars: str, what: str) -> str:
        ch = self.peek()
        if not ch or ch not in chars:
            found = "end of input" if not ch else repr(ch)
            raise self.fail(f"expected {what}, found {found}")
        self.pos += 1
        return ch

    def name(self, what: str) -> str:
        start = self.pos
        while self.pos < self.n and self.text[self.pos] in _NAME_CHARS:
            self.pos += 1
        if self.pos == start:
            raise self.fail(f"expected {what}")
        return self.text[start : self.pos]

    def braced(self) -> str:
        """Consume ``{...}`` starting at the opening brace; return the inside."""
        open_pos = self.pos
        self.pos += 1
        depth = 1
        start = self.pos
        while self.pos < self.n:
            ch = self.text[self.pos]
            if ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0:
                    self.pos += 1
                    return self.text[start : self.pos - 1]
            self.pos += 1
        raise self.fail("unterminated '{'", open_pos, UnbalancedBraces)

    def quoted(self) -> str:
        open_pos = self.pos
        self.pos += 1
        depth = 0
        start = self.pos
        while self.pos < self.n:
            ch = self.text[self.pos]
            if ch == "{":
                depth += 1
            elif ch == "}":
                if depth == 0:
                    raise self.fail("unmatched '}' inside quoted value", cls=UnbalancedBraces)
                depth -= 1
            elif ch == '"' and depth == 0:
                self.pos += 1
                return self.text[start : self.pos - 1]
            self.pos += 1
        if depth:
            raise self.fail("unterminated '{' inside quoted value", open_pos, UnbalancedBraces)
        raise self.fail("unterminated quoted value", open_pos)

    def skip_group(self, close: str) -> None:
        """Skip a ``@comment``/``@preamble`` body, tracking brace balance."""
        open_pos = self.pos
        self.pos += 1
        depth = 0
        while self.pos < self.n:
            ch = self.text[self.pos]
            if ch == "{":
                depth += 1
            elif ch == "}":
                if depth == 0:
                    if close == "}":
                        self.pos += 1
                        return
                    raise self.fail("unmatched '}'", cls=UnbalancedBraces)
                depth -= 1
            elif ch == close and depth == 0:
                self.pos += 1
                return
            self.pos += 1
        raise self.fail("unterminated block", open_pos, UnbalancedBraces)


def _value(sc: _Scanner) -> str:
    ch = sc.peek()
    if ch == "{":
        return sc.braced()
    if ch == '"':
        return sc.quoted()
    if ch.isdigit() and ch.isascii():
        start = sc.pos
        while sc.pos < sc.n and sc.text[sc.pos].isdigit() and sc.text[sc.pos].isascii():
            sc.pos += 1
        return sc.text[start : sc.pos]
    if ch in _IDENT_START:
        start = sc.pos
        macro = sc.name("macro name")
        raise sc.fail(f"macro reference {macro!r} is not supported", start, UnsupportedMacro)
    found = "end of input" if not ch else repr(ch)
    raise sc.fail(f"expected a field value, found {found}")


def _entry(sc: _Scanner, entry_type: str, entry_line: int) -> BibEntry:
    close = "}" if sc.expect("{(", "'{' or '('") == "{" else ")"
    sc.skip_ws()
    key_start = sc.pos
    while sc.pos < sc.n and sc.text[sc.pos] not in _KEY_STOP:
        sc.pos += 1
    key = sc.text[key_start : sc.pos]
    if not key:
        raise sc.fail("expected a citation key")
    sc.skip_ws()
    entry = BibEntry(entry_type, key, {}, entry_line)
    if sc.peek() == close:
        sc.pos += 1
        return entry
    sc.expect(",", f"',' or {close!r} after citation key")
    while True:
        sc.skip_ws()
        if sc.peek() == close:
            sc.pos += 1
            return entry
        name_pos = sc.pos
        name = sc.name("a field name").casefold()
        if name in entry.fields:
            raise sc.fail(f"duplicate field {name!r}", name_pos)
        sc.skip_ws()
        sc.expect("=", "'=' after field name")
        sc.skip_ws()
        entry.fields[name] = _value(sc)
        sc.skip_ws()
        if sc.peek() == "#":
            raise sc.fail("string concatenation is not supported", cls=UnsupportedMacro)
        if sc.peek() == close:
            sc.pos += 1
            return entry
        sc.expect(",", f"',' or {close!r} after field value")


def _decode(data: bytes) -> str:
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        line = data.count(b"\n", 0, exc.start) + 1
        column = exc.start - (data.rfind(b"\n", 0, exc.start) + 1) + 1
        raise ParseError("invalid UTF-8 byte sequence", line, column) from None


def parse_bibtex(text: str | bytes) -> list[BibEntry]:
    """Parse BibTeX text into entries in file order.

    Raises :class:`ParseError` (or a subclass) carrying a 1-based line and
    column on malformed input.
    """
    if isinstance(text, (bytes, bytearray)):
        text = _decode(bytes(text))
    sc = _Scanner(text)
    entries: list[BibEntry] = []
    while True:
        at = text.find("@", sc.pos)
        if at < 0:
            return entries
        sc.pos = at + 1
        entry_line = sc.position(at)[0]
        sc.skip_ws()
        if sc.peek() not in _IDENT_START:
            raise sc.fail("expected an entry type after '@'")
        entry_type = sc.name("an entry type").casefold()
        sc.skip_ws()
        if entry_type == "string":
            raise sc.fail("@string macro definitions are not supported", at, UnsupportedMacro)
        if entry_type in ("comment", "preamble"):
            ch = sc.peek()
            if ch not in ("{", "("):
                raise sc.fail(f"expected '{{' or '(' after @{entry_type}")
            sc.skip_group("}" if ch == "{" else ")")
            continue
        entries.append(_entry(sc, entry_type, entry_line))
