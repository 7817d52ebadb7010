"""Rating bookkeeping: Likert records, per-quartile aggregates, Cohen's kappa.

Human raters score generated comments 1-5 on four metrics. Aggregation rolls
the scores up per (language, quartile, metric) cell; inter-rater agreement is
measured with Cohen's kappa after binarizing scores into low (1-3) and high
(4-5) bands.
"""

from __future__ import annotations

import csv
import logging
import statistics
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .model import Language, Quartile, Snippet

logger = logging.getLogger(__name__)


class Metric(str, Enum):
    ACCURACY = "accuracy"
    ADEQUACY = "adequacy"
    CONCISENESS = "conciseness"
    USEFULNESS = "usefulness"

    @classmethod
    def parse(cls, value: str) -> "Metric":
        try:
            return cls(value.strip().lower())
        except ValueError:
            raise ValueError(f"unknown metric: {value!r}") from None


class Band(str, Enum):
    LOW = "low"
    HIGH = "high"


@dataclass(frozen=True)
class LikertRecord:
    snippet_id: str
    rater_id: str
    metric: Metric
    score: int

    def __post_init__(self) -> None:
        if not self.snippet_id:
            raise ValueError("snippet_id must be non-empty")
        if not self.rater_id:
            raise ValueError("rater_id must be non-empty")
        if not isinstance(self.score, int) or not 1 <= self.score <= 5:
            raise ValueError(f"score must be an integer in [1, 5], got {self.score!r}")


@dataclass(frozen=True)
class AggregateRow:
    language: Language
    quartile: Quartile
    metric: Metric
    mean: float
    median: float
    count: int


def binarize(score: int) -> Band:
    """Map a 1-5 score into the low (1-3) / high (4-5) bands."""
    if not isinstance(score, int) or not 1 <= score <= 5:
        raise ValueError(f"score must be an integer in [1, 5], got {score!r}")
    return Band.LOW if score <= 3 else Band.HIGH


def cohen_kappa(a: Sequence[int], b: Sequence[int]) -> float:
    """Agreement between two raters' scores after binarization.

    kappa = (p0 - pe) / (1 - pe) with p0 the observed agreement fraction and
    pe the chance agreement from the raters' marginals. When both raters are
    constant and identical pe is 1 and the ratio is undefined; agreement is
    total, so 1.0 is returned with a diagnostic.
    """
    if len(a) != len(b):
        raise ValueError(f"rater lists differ in length: {len(a)} vs {len(b)}")
    if not a:
        raise ValueError("rater lists must be non-empty")
    bands_a = [binarize(s) for s in a]
    bands_b = [binarize(s) for s in b]
    n = len(bands_a)
    agree = sum(1 for x, y in zip(bands_a, bands_b) if x == y)
    p0 = Fraction(agree, n)
    pe = Fraction(0)
    for band in Band:
        pe += Fraction(bands_a.count(band), n) * Fraction(bands_b.count(band), n)
    if pe == 1:
        logger.info("both raters constant and identical; kappa defined as 1 by convention")
        return 1.0
    return float((p0 - pe) / (1 - pe))


def _snippet_index(corpus: Iterable[Snippet] | Mapping[str, Snippet]) -> Mapping[str, Snippet]:
    if isinstance(corpus, Mapping):
        return corpus
    return {s.snippet_id: s for s in corpus}


_METRIC_ORDER = list(Metric)
_QUARTILE_ORDER = list(Quartile)
_LANGUAGE_ORDER = list(Language)


def aggregate(
    records: Sequence[LikertRecord],
    corpus: Iterable[Snippet] | Mapping[str, Snippet],
) -> list[AggregateRow]:
    """Mean and median per (language, quartile, metric) cell.

    Every record must point at a corpus snippet that carries a quartile
    label; unknown snippet ids are reported together in one error.
    """
    index = _snippet_index(corpus)
    unknown = sorted({r.snippet_id for r in records if r.snippet_id not in index})
    if unknown:
        raise ValueError(f"unknown snippet ids: {', '.join(unknown)}")
    cells: dict[tuple[Language, Quartile, Metric], list[int]] = {}
    for record in records:
        snippet = index[record.snippet_id]
        if snippet.quartile is None:
            raise ValueError(f"snippet {snippet.snippet_id} has no quartile label")
        key = (snippet.language, snippet.quartile, record.metric)
        cells.setdefault(key, []).append(record.score)

    rows: list[AggregateRow] = []
    for language in _LANGUAGE_ORDER:
        for quartile in _QUARTILE_ORDER:
            for metric in _METRIC_ORDER:
                scores = cells.get((language, quartile, metric))
                if not scores:
                    continue
                rows.append(
                    AggregateRow(
                        language=language,
                        quartile=quartile,
                        metric=metric,
                        mean=float(statistics.mean(scores)),
                        median=float(statistics.median(scores)),
                        count=len(scores),
                    )
                )
    return rows


RATINGS_HEADER = ["snippet_id", "rater_id", "metric", "score"]


def load_ratings_csv(path: Path) -> list[LikertRecord]:
    """Read a ratings file, enforcing the header and key uniqueness."""
    records: list[LikertRecord] = []
    seen: set[tuple[str, str, Metric]] = set()
    with path.open("r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty ratings file") from None
        if header != RATINGS_HEADER:
            raise ValueError(
                f"{path}: header must be {','.join(RATINGS_HEADER)!r}, got {','.join(header)!r}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 4:
                raise ValueError(f"{path}:{lineno}: expected 4 fields, got {len(row)}")
            snippet_id, rater_id, metric_raw, score_raw = (cell.strip() for cell in row)
            try:
                score = int(score_raw)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: score must be an integer") from None
            record = LikertRecord(
                snippet_id=snippet_id,
                rater_id=rater_id,
                metric=Metric.parse(metric_raw),
                score=score,
            )
            key = (record.snippet_id, record.rater_id, record.metric)
            if key in seen:
                raise ValueError(f"{path}:{lineno}: duplicate rating for {key}")
            seen.add(key)
            records.append(record)
    return records


def write_aggregate_csv(rows: Sequence[AggregateRow], path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["language", "quartile", "metric", "mean", "median", "count"])
        for row in rows:
            writer.writerow(
                [row.language.value, row.quartile.value, row.metric.value,
                 f"{row.mean:.4f}", f"{row.median:.4f}", row.count]
            )


def format_table(rows: Sequence[AggregateRow]) -> str:
    """Fixed-width table of aggregate rows for terminal display."""
    header = ("language", "quartile", "metric", "mean", "median", "n")
    body = [
        (row.language.value, row.quartile.value, row.metric.value,
         f"{row.mean:.2f}", f"{row.median:.2f}", str(row.count))
        for row in rows
    ]
    widths = [max(len(h), *(len(r[i]) for r in body)) if body else len(h)
              for i, h in enumerate(header)]
    lines = [
        "  ".join(h.ljust(widths[i]) for i, h in enumerate(header)),
        "  ".join("-" * w for w in widths),
    ]
    for r in body:
        lines.append("  ".join(r[i].ljust(widths[i]) for i in range(len(header))))
    return "\n".join(lines)
