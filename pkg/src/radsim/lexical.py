"""Tokenization and from-definition ROUGE-1/2/L and sentence BLEU.

All four metrics share one tokenizer so comparisons stay internally
consistent. For a pair (a, b) the caller treats a as candidate and b as
reference; ROUGE F1 is symmetric under that choice, BLEU is not.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .errors import InvalidN

# lowercase maximal runs of alphanumerics; underscore and everything else splits
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


@dataclass(frozen=True)
class MetricScore:
    precision: float
    recall: float
    f1: float


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    """Multiset of contiguous n-token windows; empty when len(tokens) < n."""
    if n < 1:
        raise InvalidN(f"n must be >= 1, got {n}")
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def rouge_n(candidate: Sequence[str], reference: Sequence[str], n: int) -> MetricScore:
    """Clipped n-gram overlap: P over candidate grams, R over reference grams."""
    cand = ngram_counts(candidate, n)
    ref = ngram_counts(reference, n)
    overlap = sum(min(count, ref[gram]) for gram, count in cand.items())
    cand_total = sum(cand.values())
    ref_total = sum(ref.values())
    precision = overlap / cand_total if cand_total else 0.0
    recall = overlap / ref_total if ref_total else 0.0
    return MetricScore(precision, recall, _f1(precision, recall))


def _lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    # single-row DP; prev holds the row for a[:i]
    prev = [0] * (len(b) + 1)
    for i in range(1, len(a) + 1):
        current = [0] * (len(b) + 1)
        for j in range(1, len(b) + 1):
            if a[i - 1] == b[j - 1]:
                current[j] = prev[j - 1] + 1
            else:
                current[j] = max(prev[j], current[j - 1])
        prev = current
    return prev[len(b)]


def rouge_l(candidate: Sequence[str], reference: Sequence[str]) -> MetricScore:
    lcs = _lcs_length(candidate, reference)
    precision = lcs / len(candidate) if candidate else 0.0
    recall = lcs / len(reference) if reference else 0.0
    return MetricScore(precision, recall, _f1(precision, recall))


def bleu(
    candidate: Sequence[str],
    reference: Sequence[str],
    max_n: int = 4,
    smoothing: bool = False,
    epsilon: float = 1e-9,
) -> float:
    """Sentence BLEU: uniform geometric mean of clipped n-gram precisions
    times brevity penalty min(1, exp(1 - |ref|/|cand|)).

    Without smoothing any zero precision zeroes the score; with smoothing
    zero precisions are replaced by epsilon. An empty candidate scores 0.
    """
    if max_n < 1:
        raise InvalidN(f"max_n must be >= 1, got {max_n}")
    if not candidate:
        return 0.0
    precisions: list[float] = []
    for n in range(1, max_n + 1):
        cand = ngram_counts(candidate, n)
        ref = ngram_counts(reference, n)
        total = sum(cand.values())
        overlap = sum(min(count, ref[gram]) for gram, count in cand.items())
        precisions.append(overlap / total if total else 0.0)
    if smoothing:
        precisions = [epsilon if p == 0.0 else p for p in precisions]
    elif any(p == 0.0 for p in precisions):
        return 0.0
    brevity = min(1.0, math.exp(1.0 - len(reference) / len(candidate)))
    return brevity * math.exp(math.fsum(math.log(p) for p in precisions) / max_n)
