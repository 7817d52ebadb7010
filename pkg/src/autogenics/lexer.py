"""Comment-aware lexing for Python and Java source text.

A character-level scanner that finds the inline-comment marker on each line
(`#` for Python, `//` for Java) while respecting string literals: single,
double, and triple quotes for Python; double-quoted strings and single-quoted
char literals with backslash escapes for Java. Triple-quoted Python strings
span lines; an unterminated single-line literal is treated as running to the
end of its line (best effort, with a diagnostic).

CRLF line endings are normalised to LF before scanning.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .model import Language

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ScannedLine:
    """One source line split at its comment marker.

    `code` is everything before the marker, byte-identical to the input;
    `comment` is the text after the marker (marker excluded), or None when
    the line has no comment.
    """

    raw: str
    code: str
    comment: str | None

    @property
    def is_standalone_comment(self) -> bool:
        return self.comment is not None and not self.code.strip()

    @property
    def is_blank(self) -> bool:
        return self.comment is None and not self.raw.strip()


_PY_TRIPLES = ("'''", '"""')


def _scan_python_line(line: str, state: str | None) -> tuple[str, str | None, str | None]:
    """Return (code, comment, next_state) for one line given the open-string state."""
    i = 0
    n = len(line)
    while i < n:
        ch = line[i]
        if state is None:
            if ch == "#":
                return line[:i], line[i + 1 :], None
            if ch in "'\"":
                triple = ch * 3
                if line[i : i + 3] == triple:
                    state = triple
                    i += 3
                    continue
                state = ch
                i += 1
                continue
            i += 1
            continue
        # Inside a string literal.
        if ch == "\\":
            if i + 1 >= n:
                # Backslash-newline: a short literal legally continues on the
                # next line; a triple-quoted one was continuing anyway.
                return line, None, state
            i += 2
            continue
        if state in _PY_TRIPLES:
            if line[i : i + 3] == state:
                state = None
                i += 3
                continue
            i += 1
            continue
        if ch == state:
            state = None
        i += 1
    if state is not None and state not in _PY_TRIPLES:
        logger.warning("unterminated string literal: %r", line)
        state = None
    return line, None, state


def _scan_java_line(line: str, state: str | None) -> tuple[str, str | None, str | None]:
    i = 0
    n = len(line)
    while i < n:
        ch = line[i]
        if state is None:
            if ch == "/" and line[i : i + 2] == "//":
                return line[:i], line[i + 2 :], None
            if ch in "'\"":
                state = ch
                i += 1
                continue
            i += 1
            continue
        if ch == "\\":
            i += 2
            continue
        if ch == state:
            state = None
        i += 1
    if state is not None:
        logger.warning("unterminated literal: %r", line)
        state = None
    return line, None, state


def scan_lines(text: str, language: Language) -> list[ScannedLine]:
    """Split source text into per-line (code, comment) pairs."""
    scan = _scan_python_line if language is Language.PYTHON else _scan_java_line
    text = text.replace("\r\n", "\n").replace("\r", "\n")
    state: str | None = None
    out: list[ScannedLine] = []
    for raw in text.split("\n"):
        code, comment, state = scan(raw, state)
        out.append(ScannedLine(raw=raw, code=code, comment=comment))
    return out


def strip_comments(code: str, language: Language) -> str:
    """Remove inline comments and the lines they leave blank.

    On a line with a comment, trailing whitespace freed by the removal is
    trimmed; lines without comments keep their bytes. Lines that become blank
    (including pure comment lines) are dropped.
    """
    kept: list[str] = []
    for line in scan_lines(code, language):
        if line.comment is None:
            kept.append(line.raw)
            continue
        remainder = line.code.rstrip()
        if remainder:
            kept.append(remainder)
    return "\n".join(kept)
