"""Pair scoring, mean-difference aggregation, and hexagonal binning.

The scores file is the contract between the score and report stages:
reals carry 10 significant digits, absent ground truth is an empty cell,
and the report stage works from the parsed file rather than in-memory
values, so both stages agree bit-for-bit on what was scored.
"""

from __future__ import annotations

import concurrent.futures
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from . import lexical
from .errors import (
    MissingEncoding,
    MissingLabelSet,
    NoValidPairs,
    TooFewValues,
    ZeroVector,
)
from .gtsim import EncodedFindingVector, cosine

log = logging.getLogger(__name__)

METHODS = ("GPT_sim", "ROUGE_1_F1", "ROUGE_2_F1", "ROUGE_L_F1", "BLEU")
SOURCES = ("CheXpert", "NegBio")

SCORES_HEADER = "a_id,b_id,gt_chexpert,gt_negbio,gpt_sim,rouge1_f1,rouge2_f1,rougel_f1,bleu"


def fmt_real(value: float) -> str:
    return format(value, ".10g")


@dataclass(frozen=True)
class MetricOptions:
    bleu_max_n: int = 4
    bleu_smoothing: bool = False
    bleu_epsilon: float = 1e-9
    difference_mode: str = "absolute"


@dataclass(frozen=True)
class PairInputs:
    """Everything score_pair needs about one report, precomputed once."""

    report_id: str
    tokens: tuple[str, ...]
    embedding: tuple[float, ...] | None
    encoded: Mapping[str, EncodedFindingVector]


@dataclass(frozen=True)
class PairScore:
    a_id: str
    b_id: str
    gt_chexpert: float | None
    gt_negbio: float | None
    gpt_sim: float
    rouge1_f1: float
    rouge2_f1: float
    rougel_f1: float
    bleu: float

    def gt(self, source: str) -> float | None:
        return self.gt_chexpert if source == "CheXpert" else self.gt_negbio

    def predicted(self, method: str) -> float:
        return {
            "GPT_sim": self.gpt_sim,
            "ROUGE_1_F1": self.rouge1_f1,
            "ROUGE_2_F1": self.rouge2_f1,
            "ROUGE_L_F1": self.rougel_f1,
            "BLEU": self.bleu,
        }[method]


@dataclass(frozen=True)
class SummaryCell:
    method: str
    source: str
    mean_difference: float
    used: int
    excluded: int


@dataclass(frozen=True)
class HexBin:
    col: int
    row: int
    x: float
    y: float
    count: int


@dataclass(frozen=True)
class HexbinLayer:
    method: str
    source: str
    radius: float
    band: tuple[float, float]
    bins: tuple[HexBin, ...]


def score_pair(a: PairInputs, b: PairInputs, options: MetricOptions = MetricOptions()) -> PairScore:
    """All five similarity scores for one ordered pair; a is the candidate
    and b the reference for the lexical metrics. Ground truth is absent
    where a zero encoding makes cosine undefined."""
    if a.embedding is None or b.embedding is None:
        missing = a.report_id if a.embedding is None else b.report_id
        raise MissingLabelSet(f"no label embedding for {missing!r}")
    gt: dict[str, float | None] = {}
    for source in SOURCES:
        if source not in a.encoded or source not in b.encoded:
            missing = a.report_id if source not in a.encoded else b.report_id
            raise MissingEncoding(f"no {source} encoding for {missing!r}")
        try:
            gt[source] = cosine(a.encoded[source].values, b.encoded[source].values)
        except ZeroVector:
            gt[source] = None
    return PairScore(
        a_id=a.report_id,
        b_id=b.report_id,
        gt_chexpert=gt["CheXpert"],
        gt_negbio=gt["NegBio"],
        gpt_sim=cosine(a.embedding, b.embedding),
        rouge1_f1=lexical.rouge_n(a.tokens, b.tokens, 1).f1,
        rouge2_f1=lexical.rouge_n(a.tokens, b.tokens, 2).f1,
        rougel_f1=lexical.rouge_l(a.tokens, b.tokens).f1,
        bleu=lexical.bleu(
            a.tokens, b.tokens, options.bleu_max_n, options.bleu_smoothing, options.bleu_epsilon
        ),
    )


def run_all(
    pairs: Sequence[tuple[str, str]],
    inputs: Mapping[str, PairInputs],
    options: MetricOptions = MetricOptions(),
    parallelism: int = 4,
) -> tuple[list[PairScore], list[tuple[tuple[str, str], str]]]:
    """Score every pair; output order follows pair order regardless of
    evaluation order. Per-pair failures are collected, not fatal."""

    def worker(pair: tuple[str, str]) -> PairScore | Exception:
        try:
            return score_pair(inputs[pair[0]], inputs[pair[1]], options)
        except Exception as exc:  # noqa: BLE001 - aggregated per-pair
            return exc

    scores: list[PairScore] = []
    failures: list[tuple[tuple[str, str], str]] = []
    with concurrent.futures.ThreadPoolExecutor(max_workers=max(1, parallelism)) as pool:
        for pair, outcome in zip(pairs, pool.map(worker, pairs)):
            if isinstance(outcome, Exception):
                log.warning("scoring %s failed: %s", pair, outcome)
                failures.append((pair, str(outcome)))
            else:
                scores.append(outcome)
    return scores, failures


def write_scores_csv(path: str | Path, scores: Sequence[PairScore]) -> None:
    lines = [SCORES_HEADER]
    for s in scores:
        lines.append(
            ",".join(
                [
                    s.a_id,
                    s.b_id,
                    "" if s.gt_chexpert is None else fmt_real(s.gt_chexpert),
                    "" if s.gt_negbio is None else fmt_real(s.gt_negbio),
                    fmt_real(s.gpt_sim),
                    fmt_real(s.rouge1_f1),
                    fmt_real(s.rouge2_f1),
                    fmt_real(s.rougel_f1),
                    fmt_real(s.bleu),
                ]
            )
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_scores_csv(path: str | Path) -> list[PairScore]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != SCORES_HEADER:
        raise NoValidPairs(f"{path} is not a scores file (bad header)")
    scores = []
    for line in lines[1:]:
        if not line:
            continue
        cells = line.split(",")
        scores.append(
            PairScore(
                a_id=cells[0],
                b_id=cells[1],
                gt_chexpert=float(cells[2]) if cells[2] else None,
                gt_negbio=float(cells[3]) if cells[3] else None,
                gpt_sim=float(cells[4]),
                rouge1_f1=float(cells[5]),
                rouge2_f1=float(cells[6]),
                rougel_f1=float(cells[7]),
                bleu=float(cells[8]),
            )
        )
    return scores


def _mean(values: Sequence[float]) -> float:
    return math.fsum(values) / len(values)


def mean_differences(
    scores: Sequence[PairScore], source: str, mode: str = "absolute"
) -> list[SummaryCell]:
    """One summary cell per method: mean |predicted - gt| (or signed mean)
    over the pairs whose ground truth is present for this source."""
    if mode not in ("absolute", "signed"):
        raise ValueError(f"unknown difference mode {mode!r}")
    present = [s for s in scores if s.gt(source) is not None]
    if not present:
        raise NoValidPairs(f"no pairs with {source} ground truth")
    excluded = len(scores) - len(present)
    cells = []
    for method in METHODS:
        diffs = [
            abs(s.predicted(method) - s.gt(source)) if mode == "absolute" else s.predicted(method) - s.gt(source)
            for s in present
        ]
        cells.append(SummaryCell(method, source, _mean(diffs), len(present), excluded))
    return cells


def percentile_band(values: Sequence[float], lo: float = 5.0, hi: float = 95.0) -> tuple[float, float]:
    """(P_lo, P_hi) with linear interpolation between order statistics."""
    if len(values) < 2:
        raise TooFewValues(f"percentile band needs >= 2 values, got {len(values)}")

    ordered = sorted(values)

    def point(q: float) -> float:
        h = (len(ordered) - 1) * q / 100.0
        low = math.floor(h)
        high = min(low + 1, len(ordered) - 1)
        return ordered[low] + (h - low) * (ordered[high] - ordered[low])

    return point(lo), point(hi)


# Pointy-top hexagonal lattice with circumradius `radius`: columns are
# sqrt(3)*radius apart, rows 1.5*radius apart, odd rows offset by half a
# column. Nearest-center assignment compares the two sublattice candidates.

def _hex_center(col: int, row: int, radius: float) -> tuple[float, float]:
    dx = math.sqrt(3.0) * radius
    return (col + 0.5 * (row & 1)) * dx, row * 1.5 * radius


def _assign_hex(x: float, y: float, radius: float) -> tuple[int, int]:
    dx = math.sqrt(3.0) * radius
    k_even = round(y / (3.0 * radius))
    col_even = round(x / dx)
    ex, ey = col_even * dx, 3.0 * radius * k_even
    k_odd = round((y - 1.5 * radius) / (3.0 * radius))
    col_odd = round((x - 0.5 * dx) / dx)
    ox, oy = (col_odd + 0.5) * dx, 3.0 * radius * k_odd + 1.5 * radius
    d_even = (x - ex) ** 2 + (y - ey) ** 2
    d_odd = (x - ox) ** 2 + (y - oy) ** 2
    if d_odd < d_even:
        return col_odd, 2 * k_odd + 1
    return col_even, 2 * k_even


def hexbin(
    scores: Sequence[PairScore],
    method: str,
    source: str,
    radius: float = 0.05,
    min_count: int = 100,
) -> HexbinLayer:
    """Bin (gt, predicted) points onto the lattice; emit bins with count
    strictly above min_count, sorted by (row, col). The percentile band
    comes from the same points' ground-truth values."""
    points = [(s.gt(source), s.predicted(method)) for s in scores if s.gt(source) is not None]
    if not points:
        raise NoValidPairs(f"no pairs with {source} ground truth")
    band = percentile_band([x for x, _ in points])
    counts: dict[tuple[int, int], int] = {}
    for x, y in points:
        key = _assign_hex(x, y, radius)
        counts[key] = counts.get(key, 0) + 1
    bins = []
    for (col, row), count in sorted(counts.items(), key=lambda item: (item[0][1], item[0][0])):
        if count > min_count:
            cx, cy = _hex_center(col, row, radius)
            bins.append(HexBin(col, row, cx, cy, count))
    return HexbinLayer(method, source, radius, band, tuple(bins))
