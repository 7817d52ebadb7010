"""LOC counting, quartile binning, boundary derivation, and stratified sampling.

The reference bins reproduce the published corpus strata:

    Q1: 1-2 LOC, Q2: 3-7 LOC (both languages)
    Q3: 8-14 (Python) / 8-16 (Java)
    Q4: 15-695 (Python) / 17-997 (Java), open-ended above the observed maxima

`derive_boundaries` exists for new corpora; its tie rule is documented on the
function. Sampling uses MT19937 (`random.Random`) so a given seed reproduces
the same selection on every platform.
"""

from __future__ import annotations

import json
import logging
import math
import random
from dataclasses import dataclass
from typing import Iterable, Sequence, TYPE_CHECKING

from .model import Language, Quartile

if TYPE_CHECKING:
    from .model import Snippet

logger = logging.getLogger(__name__)

_QUARTILES = (Quartile.Q1, Quartile.Q2, Quartile.Q3, Quartile.Q4)


def count_loc(code: str) -> int:
    """Count lines containing at least one non-whitespace character.

    Carriage returns are stripped before splitting on line feeds.
    """
    lines = code.replace("\r", "").split("\n")
    loc = sum(1 for line in lines if line.strip())
    if loc == 0:
        raise ValueError("empty snippet")
    return loc


@dataclass(frozen=True)
class QuartileTable:
    """Four ascending, disjoint LOC ranges plus per-quartile member counts.

    A bound of None marks an empty quartile (possible for degenerate derived
    tables). The last non-empty range is open-ended upward when classifying.
    """

    language: Language | None
    bounds: tuple[tuple[int, int] | None, ...]
    counts: tuple[int, int, int, int] = (0, 0, 0, 0)

    def __post_init__(self) -> None:
        if len(self.bounds) != 4:
            raise ValueError("a quartile table needs exactly four ranges")
        previous_hi = 0
        for rng in self.bounds:
            if rng is None:
                continue
            lo, hi = rng
            if lo > hi or lo <= previous_hi:
                raise ValueError(f"ranges must be ascending and disjoint: {self.bounds}")
            previous_hi = hi

    def quartile_for(self, loc: int) -> Quartile:
        """Classify a LOC value; values beyond the top range clamp to it."""
        if loc < 1:
            raise ValueError("loc must be >= 1")
        nonempty = [(q, rng) for q, rng in zip(_QUARTILES, self.bounds) if rng]
        if not nonempty:
            raise ValueError("table has no ranges")
        for q, (lo, hi) in nonempty:
            if lo <= loc <= hi:
                return q
        if loc < nonempty[0][1][0]:
            return nonempty[0][0]
        return nonempty[-1][0]

    def to_json_dict(self) -> dict:
        return {
            "language": self.language.value if self.language else None,
            "bounds": [list(rng) if rng else None for rng in self.bounds],
            "counts": list(self.counts),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)


REFERENCE_TABLES: dict[Language, QuartileTable] = {
    Language.PYTHON: QuartileTable(
        language=Language.PYTHON,
        bounds=((1, 2), (3, 7), (8, 14), (15, 695)),
        counts=(121065, 135144, 101011, 112302),
    ),
    Language.JAVA: QuartileTable(
        language=Language.JAVA,
        bounds=((1, 2), (3, 7), (8, 16), (17, 997)),
        counts=(98883, 108164, 93513, 92258),
    ),
}


def quartile_of(loc: int, language: Language) -> Quartile:
    """Assign the reference quartile for a LOC value in the given language."""
    if loc < 1:
        raise ValueError("loc must be >= 1")
    return REFERENCE_TABLES[language].quartile_for(loc)


def derive_boundaries(locs: Iterable[int], language: Language | None = None) -> QuartileTable:
    """Derive quartile ranges from an observed LOC multiset.

    Rule: sort the values; the upper cut ranks of Q1-Q3 start at ceil(n/4),
    ceil(n/2), and ceil(3n/4). Each cut is first pushed past the previous cut
    (so a quartile is only empty once the values are exhausted), then extended
    upward while the value at the cut equals the next one, so equal LOC values
    never straddle a boundary. Range lower bounds continue from the previous
    upper bound + 1; Q1 starts at the minimum observed value.
    """
    values = sorted(locs)
    n = len(values)
    if n < 4:
        raise ValueError("need at least 4 LOC values to derive quartiles")
    if any(v < 1 for v in values):
        raise ValueError("loc values must be >= 1")

    cut_ranks = [math.ceil(n / 4), math.ceil(n / 2), math.ceil(3 * n / 4)]
    ends: list[int] = []
    previous = 0
    for rank in cut_ranks:
        if previous >= n:
            ends.append(previous)
            continue
        cut = min(max(rank, previous + 1), n)
        while cut < n and values[cut - 1] == values[cut]:
            cut += 1
        ends.append(cut)
        previous = cut
    ends.append(n)

    bounds: list[tuple[int, int] | None] = []
    counts: list[int] = []
    start = 0
    previous_hi = values[0] - 1
    for end in ends:
        taken = values[start:end]
        if taken:
            bounds.append((previous_hi + 1, taken[-1]))
            previous_hi = taken[-1]
        else:
            bounds.append(None)
        counts.append(len(taken))
        start = end

    empty = [q.value for q, rng in zip(_QUARTILES, bounds) if rng is None]
    if empty:
        logger.warning(
            "degenerate LOC distribution: quartile(s) %s are empty", ", ".join(empty)
        )
    return QuartileTable(language=language, bounds=tuple(bounds), counts=tuple(counts))


def sample_stratified(
    corpus: Sequence["Snippet"], n_per_quartile: int, seed: int
) -> list["Snippet"]:
    """Draw up to `n_per_quartile` snippets from each quartile, seeded.

    Quartiles are processed in Q1..Q4 order; within each, members keep corpus
    order before a seeded shuffle, so the same (corpus, seed) always yields
    the same sample. A quartile with fewer members than requested is exhausted
    with a warning.
    """
    if not corpus:
        raise ValueError("empty corpus")
    if n_per_quartile < 0:
        raise ValueError("n_per_quartile must be >= 0")
    if n_per_quartile == 0:
        return []

    rng = random.Random(seed)
    sample: list[Snippet] = []
    for quartile in _QUARTILES:
        members = [s for s in corpus if s.quartile == quartile]
        if not members:
            continue
        rng.shuffle(members)
        if len(members) < n_per_quartile:
            logger.warning(
                "quartile %s exhausted: requested %d, only %d available",
                quartile.value,
                n_per_quartile,
                len(members),
            )
        sample.extend(members[:n_per_quartile])
    return sample
