"""Answer-record ingestion: eligibility, HTML extraction, corpus files.

Answers arrive as line-delimited JSON. An answer is kept when it was accepted
by the asker and its body holds exactly one ``<pre><code>`` block; the block
becomes a Snippet tagged with language, LOC, and LOC quartile. Question text
(title plus tag-stripped body) is preserved separately for context-aware
generation.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass
from html.parser import HTMLParser
from pathlib import Path
from typing import Iterable

from .model import AnswerRecord, Language, Snippet, parse_rfc3339
from .quartiles import count_loc, quartile_of

logger = logging.getLogger(__name__)

# Tags that never receive a closing tag; they must not enter the open-tag
# stack or they would break parent tracking on sloppy markup.
_VOID_TAGS = frozenset(
    {"area", "base", "br", "col", "embed", "hr", "img", "input",
     "link", "meta", "param", "source", "track", "wbr"}
)

_BLOCK_TAGS = frozenset(
    {"p", "div", "br", "hr", "li", "ul", "ol", "pre", "blockquote", "table",
     "tr", "h1", "h2", "h3", "h4", "h5", "h6", "section", "article"}
)


class _CodeBlockExtractor(HTMLParser):
    """Collect the text of every ``<code>`` that sits directly under ``<pre>``."""

    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self._stack: list[str] = []
        self._capture_depth: int | None = None
        self._buffer: list[str] = []
        self.blocks: list[str] = []

    def handle_starttag(self, tag: str, attrs) -> None:
        if tag in _VOID_TAGS:
            return
        if tag == "code" and self._capture_depth is None and self._stack and self._stack[-1] == "pre":
            self._capture_depth = len(self._stack) + 1
            self._buffer = []
        self._stack.append(tag)

    def handle_endtag(self, tag: str) -> None:
        if tag in _VOID_TAGS or tag not in self._stack:
            return
        while self._stack:
            depth = len(self._stack)
            popped = self._stack.pop()
            if self._capture_depth is not None and depth == self._capture_depth:
                self.blocks.append("".join(self._buffer))
                self._capture_depth = None
                self._buffer = []
            if popped == tag:
                break

    def handle_data(self, data: str) -> None:
        if self._capture_depth is not None:
            self._buffer.append(data)

    def close(self) -> None:
        super().close()
        if self._capture_depth is not None:  # unclosed <code>: keep what we saw
            self.blocks.append("".join(self._buffer))
            self._capture_depth = None
            self._buffer = []


def extract_code_blocks(html: str) -> list[str]:
    """Return pre>code block texts in document order, entities decoded."""
    parser = _CodeBlockExtractor()
    try:
        parser.feed(html)
        parser.close()
    except Exception as exc:  # html.parser rarely throws; never crash on input
        logger.warning("unparseable HTML (%s); no code blocks extracted", exc)
        return []
    return parser.blocks


class _TextExtractor(HTMLParser):
    """Flatten HTML to text: prose whitespace-collapsed, pre>code verbatim."""

    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self._stack: list[str] = []
        self._capture_depth: int | None = None
        self._code: list[str] = []
        self._prose: list[str] = []
        self.segments: list[str] = []

    def _flush_prose(self) -> None:
        text = " ".join("".join(self._prose).split())
        self._prose = []
        if text:
            self.segments.append(text)

    def handle_starttag(self, tag: str, attrs) -> None:
        if tag in _BLOCK_TAGS:
            self._flush_prose()
        if tag in _VOID_TAGS:
            return
        if tag == "code" and self._capture_depth is None and self._stack and self._stack[-1] == "pre":
            self._capture_depth = len(self._stack) + 1
            self._code = []
        self._stack.append(tag)

    def handle_startendtag(self, tag: str, attrs) -> None:
        if tag in _BLOCK_TAGS:
            self._flush_prose()

    def handle_endtag(self, tag: str) -> None:
        if tag in _BLOCK_TAGS:
            self._flush_prose()
        if tag in _VOID_TAGS or tag not in self._stack:
            return
        while self._stack:
            depth = len(self._stack)
            popped = self._stack.pop()
            if self._capture_depth is not None and depth == self._capture_depth:
                self.segments.append("".join(self._code))
                self._capture_depth = None
                self._code = []
            if popped == tag:
                break

    def handle_data(self, data: str) -> None:
        if self._capture_depth is not None:
            self._code.append(data)
        else:
            self._prose.append(data)

    def close(self) -> None:
        super().close()
        if self._capture_depth is not None:
            self.segments.append("".join(self._code))
            self._capture_depth = None
        self._flush_prose()


def html_to_text(html: str) -> str:
    """Strip tags and decode entities; keep pre>code content verbatim."""
    parser = _TextExtractor()
    try:
        parser.feed(html)
        parser.close()
    except Exception as exc:
        logger.warning("unparseable HTML (%s); returning empty text", exc)
        return ""
    return "\n".join(parser.segments)


def question_text(record: AnswerRecord) -> str:
    """Title plus flattened question body; title alone when the body is empty."""
    body = html_to_text(record.question_body_html)
    title = record.question_title.strip()
    if not body:
        return title
    return f"{title}\n{body}"


def is_eligible(record: AnswerRecord) -> bool:
    """Accepted answers whose body holds exactly one pre>code block."""
    if not record.is_accepted:
        return False
    return len(extract_code_blocks(record.answer_body_html)) == 1


def detect_language(record: AnswerRecord) -> Language | None:
    """Classify by tags; None when neither or both languages match.

    A tag counts toward a language when it equals the language name or starts
    with it plus a hyphen ("python-3.x", "java-8"). "javascript" matches
    neither rule.
    """
    matched: set[Language] = set()
    for tag in record.tags:
        if tag == "python" or tag.startswith("python-"):
            matched.add(Language.PYTHON)
        elif tag == "java" or tag.startswith("java-"):
            matched.add(Language.JAVA)
    if len(matched) == 1:
        return next(iter(matched))
    return None


def snippet_id_for(question_id: str, answer_id: str, index: int) -> str:
    """Deterministic id: re-ingesting the same input reproduces the corpus."""
    key = f"{question_id}\x1f{answer_id}\x1f{index}".encode("utf-8")
    return hashlib.sha256(key).hexdigest()[:16]


def build_snippet(record: AnswerRecord, code: str, language: Language, index: int = 0) -> Snippet:
    loc = count_loc(code)
    return Snippet(
        snippet_id=snippet_id_for(record.question_id, record.answer_id, index),
        code=code,
        language=language,
        loc=loc,
        quartile=quartile_of(loc, language),
        question_id=record.question_id,
        answer_id=record.answer_id,
    )


@dataclass(frozen=True)
class IngestReport:
    snippets: tuple[Snippet, ...]
    total_records: int
    ineligible: int
    unknown_language: int
    blank_code: int


def ingest_records(records: Iterable[AnswerRecord]) -> IngestReport:
    """Filter records by eligibility and language; extract one snippet each."""
    snippets: list[Snippet] = []
    total = ineligible = unknown = blank = 0
    for record in records:
        total += 1
        if not is_eligible(record):
            ineligible += 1
            continue
        language = detect_language(record)
        if language is None:
            unknown += 1
            continue
        code = extract_code_blocks(record.answer_body_html)[0]
        if not code.strip():
            blank += 1
            logger.warning("answer %s: code block is blank; skipped", record.answer_id)
            continue
        snippets.append(build_snippet(record, code, language))
    return IngestReport(
        snippets=tuple(snippets),
        total_records=total,
        ineligible=ineligible,
        unknown_language=unknown,
        blank_code=blank,
    )


_REQUIRED_FIELDS = {
    "answer_id": str,
    "question_id": str,
    "question_title": str,
    "question_body_html": str,
    "answer_body_html": str,
    "is_accepted": bool,
    "tags": list,
    "created_at": str,
}


def parse_answer_json(data: dict) -> AnswerRecord:
    for name, expected in _REQUIRED_FIELDS.items():
        if name not in data:
            raise ValueError(f"missing field {name!r}")
        if not isinstance(data[name], expected):
            raise ValueError(f"field {name!r} must be {expected.__name__}")
    if not all(isinstance(t, str) for t in data["tags"]):
        raise ValueError("tags must be strings")
    return AnswerRecord(
        answer_id=data["answer_id"],
        question_id=data["question_id"],
        question_title=data["question_title"],
        question_body_html=data["question_body_html"],
        answer_body_html=data["answer_body_html"],
        is_accepted=data["is_accepted"],
        tags=tuple(data["tags"]),
        created_at=parse_rfc3339(data["created_at"]),
    )


def load_answers(path: Path) -> tuple[list[AnswerRecord], int]:
    """Read answer records from a JSONL file; returns (records, skipped)."""
    records: list[AnswerRecord] = []
    skipped = 0
    with path.open("r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                data = json.loads(line)
                if not isinstance(data, dict):
                    raise ValueError("record must be a JSON object")
                records.append(parse_answer_json(data))
            except ValueError as exc:
                skipped += 1
                logger.warning("%s:%d: skipping record (%s)", path, lineno, exc)
    return records, skipped


def write_corpus(snippets: Iterable[Snippet], path: Path) -> int:
    """Write snippets as JSONL, sorted by snippet_id for determinism."""
    ordered = sorted(snippets, key=lambda s: s.snippet_id)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        for snippet in ordered:
            handle.write(json.dumps(snippet.to_json_dict()) + "\n")
    return len(ordered)


def read_corpus(path: Path) -> list[Snippet]:
    """Load a corpus file, re-checking LOC and quartile consistency."""
    snippets: list[Snippet] = []
    with path.open("r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                snippet = Snippet.from_json_dict(json.loads(line))
            except (ValueError, KeyError, TypeError) as exc:
                raise ValueError(f"{path}:{lineno}: invalid snippet ({exc})") from exc
            if snippet.loc != count_loc(snippet.code):
                raise ValueError(
                    f"{path}:{lineno}: stored loc {snippet.loc} != recount "
                    f"{count_loc(snippet.code)}"
                )
            if snippet.quartile is not None and snippet.quartile != quartile_of(
                snippet.loc, snippet.language
            ):
                raise ValueError(f"{path}:{lineno}: quartile inconsistent with loc")
            snippets.append(snippet)
    return snippets
