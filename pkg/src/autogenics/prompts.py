"""Prompt template loading and rendering.

Templates live as UTF-8 data files under ``autogenics/templates/`` so golden
tests can diff them directly. Rendering substitutes every placeholder in a
single simultaneous pass: placeholder-shaped text inside user input is never
re-expanded.
"""

from __future__ import annotations

import re
from importlib import resources

PLACEHOLDER_CODE = "{CODE_SNIPPET}"
PLACEHOLDER_QUESTION = "{QUESTION_DESCRIPTION}"
PLACEHOLDER_CONTEXT = "{CODE_CONTEXT}"

TEMPLATE_FILES = {
    "generation": "generation.txt",
    "context_extraction": "context_extraction.txt",
    "context_aware": "context_aware.txt",
}

_PLACEHOLDER_RE = re.compile(r"\{CODE_SNIPPET\}|\{QUESTION_DESCRIPTION\}|\{CODE_CONTEXT\}")

_cache: dict[str, str] = {}


def template_text(kind: str) -> str:
    """Return the raw template body (trailing newline stripped)."""
    if kind not in TEMPLATE_FILES:
        raise KeyError(f"unknown template kind: {kind!r}")
    if kind not in _cache:
        text = (
            resources.files("autogenics")
            .joinpath("templates", TEMPLATE_FILES[kind])
            .read_text(encoding="utf-8")
        )
        if text.endswith("\n"):
            text = text[:-1]
        _cache[kind] = text
    return _cache[kind]


def render(template: str, values: dict[str, str]) -> str:
    """Substitute each placeholder exactly once, in one pass.

    Every placeholder present in the template must have a value, appear
    exactly once, and no values may be supplied for absent placeholders.
    """
    found = _PLACEHOLDER_RE.findall(template)
    if sorted(found) != sorted(values):
        raise ValueError(
            f"template placeholders {sorted(found)} do not match values {sorted(values)}"
        )
    return _PLACEHOLDER_RE.sub(lambda m: values[m.group(0)], template)


def _require(name: str, value: str) -> str:
    if not value or not value.strip():
        raise ValueError(f"{name} must be non-empty")
    return value


def build_generation_prompt(code: str) -> str:
    """Render the plain inline-comment generation prompt for a code snippet."""
    _require("code", code)
    return render(template_text("generation"), {PLACEHOLDER_CODE: code})


def build_context_prompt(question: str) -> str:
    """Render the question-context extraction prompt."""
    _require("question", question)
    return render(template_text("context_extraction"), {PLACEHOLDER_QUESTION: question})


def build_context_aware_prompt(code: str, context: str) -> str:
    """Render the context-aware generation prompt for a snippet plus context."""
    _require("code", code)
    _require("context", context)
    return render(
        template_text("context_aware"),
        {PLACEHOLDER_CODE: code, PLACEHOLDER_CONTEXT: context},
    )
