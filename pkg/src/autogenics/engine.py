"""Comment generation pipeline: prompt, verify, filter, map.

The flow for one snippet is: (optionally) distill the question into a context
blurb, prompt the model, unwrap the response, check that the code itself
survived untouched, drop noisy comments on self-evident statements, and emit
a structured comment map. A response that alters the code is retried and, if
it keeps failing, replaced by the pristine original so callers never render
modified code.
"""

from __future__ import annotations

import logging
import re
import threading
from dataclasses import dataclass, field
from enum import Enum

from . import prompts
from .gateway import Gateway
from .lexer import scan_lines, strip_comments
from .model import Language, Snippet

logger = logging.getLogger(__name__)


class Mode(str, Enum):
    PLAIN = "plain"
    CONTEXT_AWARE = "context_aware"


class Preservation(str, Enum):
    VERIFIED = "verified"
    REPAIRED = "repaired"  # verified only after a retry
    FAILED = "failed"


class Placement(str, Enum):
    TRAILING = "trailing"
    PRECEDING = "preceding"


@dataclass(frozen=True)
class CommentEntry:
    """One generated comment, anchored to a 1-based original code line."""

    line: int
    text: str
    placement: Placement

    def to_json_dict(self) -> dict:
        return {"line": self.line, "text": self.text, "placement": self.placement.value}


@dataclass(frozen=True)
class AnnotatedSnippet:
    original: Snippet
    raw_llm_output: str
    annotated_code: str
    comments: tuple[CommentEntry, ...]
    mode: Mode
    preservation: Preservation
    context_used: str | None = None

    def to_json_dict(self) -> dict:
        return {
            "snippet_id": self.original.snippet_id,
            "annotated_code": self.annotated_code,
            "comments": [c.to_json_dict() for c in self.comments],
            "mode": self.mode.value,
            "preservation": self.preservation.value,
            "context": self.context_used,
            "raw_llm_output": self.raw_llm_output,
        }


# --- Noise patterns -------------------------------------------------------

@dataclass(frozen=True)
class NoisePattern:
    """A statement group whose inline comments count as noise."""

    group: str
    keywords: tuple[str, ...]
    language_scope: frozenset[Language]


_BOTH = frozenset({Language.PYTHON, Language.JAVA})
_JAVA_ONLY = frozenset({Language.JAVA})

# var/let/const are not Java keywords in the classic sense but are kept under
# the Java scope as listed; they chiefly target other C-family languages.
DEFAULT_NOISE_PATTERNS: tuple[NoisePattern, ...] = (
    NoisePattern(
        group="import_print",
        keywords=("print()", "import", "from [module] import",
                  "System.out.print", "System.out.println"),
        language_scope=_BOTH,
    ),
    NoisePattern(
        group="function_class_def",
        keywords=("def", "class", "public class", "private class", "protected class"),
        language_scope=_BOTH,
    ),
    NoisePattern(
        group="access_modifier",
        keywords=("public", "private", "protected"),
        language_scope=_JAVA_ONLY,
    ),
    NoisePattern(
        group="control_flow_keyword",
        keywords=("return", "break", "continue"),
        language_scope=_BOTH,
    ),
    NoisePattern(
        group="control_structure",
        keywords=("if", "for", "while", "else", "elif", "switch", "case", "default"),
        language_scope=_BOTH,
    ),
    NoisePattern(
        group="variable_declaration",
        keywords=("var", "let", "const", "int", "float", "double", "String", "boolean"),
        language_scope=_JAVA_ONLY,
    ),
)

_WORD_BOUNDARY = r"(?![A-Za-z0-9_])"


def _keyword_regex(keyword: str) -> str:
    if keyword == "print()":
        return r"print[ \t]*\("
    if keyword == "from [module] import":
        return r"from" + _WORD_BOUNDARY + r".*?(?<![A-Za-z0-9_.])import" + _WORD_BOUNDARY
    words = [re.escape(w) for w in keyword.split(" ")]
    return r"[ \t]+".join(words) + _WORD_BOUNDARY


def _compile_matchers(
    patterns: tuple[NoisePattern, ...]
) -> dict[Language, re.Pattern[str]]:
    per_language: dict[Language, list[str]] = {lang: [] for lang in Language}
    for pattern in patterns:
        for language in pattern.language_scope:
            per_language[language].extend(_keyword_regex(k) for k in pattern.keywords)
    return {
        lang: re.compile(r"[ \t]*(?:" + "|".join(parts) + r")")
        for lang, parts in per_language.items()
        if parts
    }


_DEFAULT_MATCHERS = _compile_matchers(DEFAULT_NOISE_PATTERNS)


def is_noise_statement(
    code_line: str,
    language: Language,
    patterns: tuple[NoisePattern, ...] = DEFAULT_NOISE_PATTERNS,
) -> bool:
    """True when the line's first token (after indentation) is a noise keyword.

    Matching is token-anchored, not substring: `importer = 1` does not match
    `import`.
    """
    if patterns is DEFAULT_NOISE_PATTERNS:
        matcher = _DEFAULT_MATCHERS.get(language)
    else:
        matcher = _compile_matchers(patterns).get(language)
    return bool(matcher and matcher.match(code_line))


def filter_noise(
    annotated: str,
    language: Language,
    patterns: tuple[NoisePattern, ...] = DEFAULT_NOISE_PATTERNS,
) -> str:
    """Remove comments attached to noise statements.

    On a matching code line the trailing comment is dropped; the contiguous
    block of standalone comment lines immediately above it (any indentation)
    is dropped too. Comments on non-matching lines are preserved byte for
    byte.
    """
    lines = scan_lines(annotated, language)
    drop: set[int] = set()
    strip_trailing: set[int] = set()
    for i, line in enumerate(lines):
        if not line.code.strip():
            continue
        if not is_noise_statement(line.code, language, patterns):
            continue
        if line.comment is not None:
            strip_trailing.add(i)
        j = i - 1
        while j >= 0 and lines[j].is_standalone_comment:
            drop.add(j)
            j -= 1

    out: list[str] = []
    for i, line in enumerate(lines):
        if i in drop:
            continue
        if i in strip_trailing:
            out.append(line.code.rstrip())
        else:
            out.append(line.raw)
    return "\n".join(out)


# --- Preservation ---------------------------------------------------------

_WS_RUN = re.compile(r"[ \t]+")


def _normalize(text: str, language: Language) -> list[str]:
    """Comment-stripped, whitespace-collapsed, blank-free line sequence."""
    normalized = []
    for line in strip_comments(text, language).split("\n"):
        line = _WS_RUN.sub(" ", line).rstrip()
        if line:
            normalized.append(line)
    return normalized


def verify_preservation(original: str, annotated: str, language: Language) -> Preservation:
    """Verified iff the annotated text, comments aside, matches the original.

    Both sides are compared after stripping comments (the original may carry
    its own), trimming trailing whitespace, collapsing runs of spaces/tabs to
    one space, and dropping blank lines.
    """
    if _normalize(annotated, language) == _normalize(original, language):
        return Preservation.VERIFIED
    return Preservation.FAILED


# --- Response parsing -----------------------------------------------------

_FENCE_OPEN = re.compile(r"^```[ \t]*[A-Za-z0-9_+.-]*[ \t]*$", re.M)


def parse_llm_response(raw: str) -> str:
    """Unwrap a model response into bare code.

    The first fenced block wins when one is present (an unclosed fence runs
    to the end of the text). Without a fence the response is trimmed, and one
    leading prose line is dropped if it ends in a sentence period and has no
    colon - a documented heuristic for chatty responses.
    """
    if not raw or not raw.strip():
        raise ValueError("empty response")
    text = raw.replace("\r\n", "\n").replace("\r", "\n")

    fence = _FENCE_OPEN.search(text)
    if fence:
        body_start = text.index("\n", fence.start()) + 1 if "\n" in text[fence.start():] else len(text)
        close = text.find("\n```", body_start - 1)
        if close == -1:
            return text[body_start:].strip("\n")
        return text[body_start:close]

    text = text.strip()
    lines = text.split("\n")
    first = lines[0].rstrip()
    if len(lines) > 1 and first.endswith(".") and ":" not in first:
        return "\n".join(lines[1:]).strip()
    return text


# --- Comment mapping ------------------------------------------------------

def map_comments(annotated: str, original: str, language: Language) -> list[CommentEntry]:
    """Align generated comments to 1-based original code lines.

    Requires the annotated text to verify against the original; alignment is
    then positional over non-blank, comment-stripped lines. Trailing comments
    map to their own line; standalone comment lines map to the next code
    line, with consecutive ones merged into a single newline-joined entry.
    """
    if verify_preservation(original, annotated, language) is Preservation.FAILED:
        raise ValueError("annotated code does not preserve the original")

    original_line_numbers = [
        i + 1 for i, line in enumerate(scan_lines(original, language)) if line.code.strip()
    ]
    entries: list[CommentEntry] = []
    pending_groups: list[list[str]] = []
    group_open = False
    position = 0
    for line in scan_lines(annotated, language):
        if line.code.strip():
            lineno = original_line_numbers[position]
            position += 1
            for group in pending_groups:
                entries.append(
                    CommentEntry(line=lineno, text="\n".join(group), placement=Placement.PRECEDING)
                )
            pending_groups = []
            group_open = False
            if line.comment is not None and line.comment.strip():
                entries.append(
                    CommentEntry(line=lineno, text=line.comment.strip(), placement=Placement.TRAILING)
                )
        elif line.is_standalone_comment:
            if line.comment.strip():
                if not group_open:
                    pending_groups.append([])
                    group_open = True
                pending_groups[-1].append(line.comment.strip())
        else:
            group_open = False  # blank line separates comment groups
    if pending_groups:
        logger.warning("discarding %d comment group(s) with no following code line", len(pending_groups))
    return entries


# --- Pipeline -------------------------------------------------------------

class CommentEngine:
    """Drives generation against a gateway and post-processes the output.

    The question-context blurb is cached per key (question id or text hash)
    for the lifetime of the engine so several snippets from one question do
    not re-spend quota on context extraction.
    """

    def __init__(
        self,
        gateway: Gateway,
        patterns: tuple[NoisePattern, ...] = DEFAULT_NOISE_PATTERNS,
        preservation_retries: int = 2,
    ) -> None:
        self._gateway = gateway
        self._patterns = patterns
        self._preservation_retries = preservation_retries
        self._context_cache: dict[str, str] = {}
        self._cache_lock = threading.Lock()

    @property
    def gateway(self) -> Gateway:
        return self._gateway

    def extract_context(self, question: str, cache_key: str | None = None) -> str:
        """Distill a question's text into a context blurb, with caching."""
        if cache_key is not None:
            with self._cache_lock:
                cached = self._context_cache.get(cache_key)
            if cached is not None:
                return cached
        context = self._gateway.complete(prompts.build_context_prompt(question)).text
        if cache_key is not None:
            with self._cache_lock:
                self._context_cache[cache_key] = context
        return context

    def generate(
        self,
        snippet: Snippet,
        question: str | None = None,
        mode: Mode = Mode.PLAIN,
        context_key: str | None = None,
    ) -> AnnotatedSnippet:
        """Run the full pipeline for one snippet."""
        context: str | None = None
        if mode is Mode.CONTEXT_AWARE:
            if not question or not question.strip():
                raise ValueError("context-aware mode requires the question text")
            context = self.extract_context(question, cache_key=context_key or snippet.question_id)
            prompt = prompts.build_context_aware_prompt(snippet.code, context)
        else:
            prompt = prompts.build_generation_prompt(snippet.code)

        raw = ""
        candidate = ""
        attempts = 1 + self._preservation_retries
        for attempt in range(1, attempts + 1):
            raw = self._gateway.complete(prompt).text
            candidate = parse_llm_response(raw)
            if verify_preservation(snippet.code, candidate, snippet.language) is Preservation.VERIFIED:
                preservation = Preservation.VERIFIED if attempt == 1 else Preservation.REPAIRED
                filtered = filter_noise(candidate, snippet.language, self._patterns)
                comments = map_comments(filtered, snippet.code, snippet.language)
                return AnnotatedSnippet(
                    original=snippet,
                    raw_llm_output=raw,
                    annotated_code=filtered,
                    comments=tuple(comments),
                    mode=mode,
                    preservation=preservation,
                    context_used=context,
                )
            logger.warning(
                "snippet %s: response altered the code (attempt %d/%d)",
                snippet.snippet_id, attempt, attempts,
            )

        return AnnotatedSnippet(
            original=snippet,
            raw_llm_output=raw,
            annotated_code=snippet.code,
            comments=(),
            mode=mode,
            preservation=Preservation.FAILED,
            context_used=context,
        )
