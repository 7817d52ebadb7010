"""Core domain types shared across the toolkit."""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum


class Language(str, Enum):
    PYTHON = "python"
    JAVA = "java"

    @classmethod
    def parse(cls, value: str) -> "Language":
        try:
            return cls(value.strip().lower())
        except ValueError:
            raise ValueError(f"unsupported language: {value!r}") from None


class Quartile(str, Enum):
    Q1 = "Q1"
    Q2 = "Q2"
    Q3 = "Q3"
    Q4 = "Q4"


def parse_rfc3339(value: str) -> datetime:
    """Parse an RFC 3339 timestamp ("Z" suffix accepted) into an aware datetime."""
    text = value.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    return datetime.fromisoformat(text)


@dataclass(frozen=True)
class AnswerRecord:
    """One Q&A answer together with its question's title, body, and tags.

    Tags are normalised to lowercase and deduplicated (order preserved).
    """

    answer_id: str
    question_id: str
    question_title: str
    question_body_html: str
    answer_body_html: str
    is_accepted: bool
    tags: tuple[str, ...] = field(default=())
    created_at: datetime | None = None

    def __post_init__(self) -> None:
        if not self.answer_id:
            raise ValueError("answer_id must be non-empty")
        if not self.question_id:
            raise ValueError("question_id must be non-empty")
        seen: dict[str, None] = {}
        for tag in self.tags:
            seen.setdefault(tag.strip().lower(), None)
        object.__setattr__(self, "tags", tuple(seen))


@dataclass(frozen=True)
class Snippet:
    """A code snippet extracted from an answer body.

    `loc` counts non-blank lines; `quartile` is the LOC stratum assigned by
    the reference bins for the snippet's language (see the quartiles module).
    """

    snippet_id: str
    code: str
    language: Language
    loc: int
    quartile: Quartile | None
    question_id: str
    answer_id: str

    def __post_init__(self) -> None:
        if not self.code.strip():
            raise ValueError("snippet code must be non-empty")
        if self.loc < 1:
            raise ValueError("loc must be >= 1")

    def to_json_dict(self) -> dict:
        return {
            "snippet_id": self.snippet_id,
            "code": self.code,
            "language": self.language.value,
            "loc": self.loc,
            "quartile": self.quartile.value if self.quartile else None,
            "question_id": self.question_id,
            "answer_id": self.answer_id,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "Snippet":
        return cls(
            snippet_id=data["snippet_id"],
            code=data["code"],
            language=Language.parse(data["language"]),
            loc=int(data["loc"]),
            quartile=Quartile(data["quartile"]) if data.get("quartile") else None,
            question_id=data["question_id"],
            answer_id=data["answer_id"],
        )
