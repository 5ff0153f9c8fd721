#!/usr/bin/env python3
"""Standalone oracle for the fixture pipeline; freezes the golden files.

Recomputes the whole fixture run (filter, split, mock labels, hashed
embeddings, metrics, aggregation, hexbin, rendering) from first principles
using only the standard library, then writes

    tests/golden/scores.csv
    tests/golden/summary.md
    tests/golden/hexbin_<method>_<source>.svg

The acceptance suite compares the installed package's pipeline output
against these files byte for byte, so this script is the authority on the
output contracts:

* floats in CSV artifacts are rendered with ``format(v, ".10g")``; absent
  ground truth renders as an empty cell; rows end with ``\\n``
* the report stage consumes the persisted scores.csv, so every aggregate
  is computed from the 10-significant-digit values, not in-memory floats
* dot products and squared norms use ``math.fsum`` (exact summation, so
  results do not depend on iteration order); cosine = dot/(||u||*||v||),
  clamped to [-1, 1]
* BLEU composes as bp * exp(fsum(ln p_i) / max_n) with p_i = clipped/total
  (0 when total is 0); bp = min(1, exp(1 - |ref|/|cand|)); empty candidate
  or any zero precision gives 0 when smoothing is off
* group split: retained ids sorted, shuffled by random.Random(seed), first
  half is group A; pair order is row-major A x B in shuffled group order
* percentiles interpolate linearly between order statistics
* hexbin: pointy-top lattice with circumradius r, column pitch sqrt(3)*r,
  row pitch 1.5*r, odd rows offset by half a column; a point joins the
  nearest of the two sublattice candidates, even-row candidate on ties;
  bins are emitted sorted by (row, col) with count > min_count
* SVG: 660x640 canvas, margins L80/R30/T45/B45 (550x550 plot area), data
  range [-1, 1]^2, pixel coordinates at 2 decimals, opacity 0.15..1.0
  linear in ln(count), one element per line in a fixed order

Run it from anywhere; paths resolve relative to the repository root.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import random
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

ROOT = Path(__file__).resolve().parents[1]
GOLDEN = ROOT / "tests" / "golden"

METHODS = ("GPT_sim", "ROUGE_1_F1", "ROUGE_2_F1", "ROUGE_L_F1", "BLEU")
SOURCES = ("CheXpert", "NegBio")


def g10(value: float) -> str:
    return format(value, ".10g")


# ----------------------------------------------------------------------
# corpus


def read_csv_rows(path: Path) -> tuple[list[str], list[dict[str, str]]]:
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        return list(reader.fieldnames or []), list(reader)


def solely_no_finding(row: dict[str, str], schema: list[str], no_finding: str) -> bool:
    if row[no_finding].strip() != "1.0":
        return False
    for name in schema:
        if name == no_finding:
            continue
        if row[name].strip() not in ("", "0.0"):
            return False
    return True


# ----------------------------------------------------------------------
# mock labeling + hashed embedding


def scan_labels(text: str, lexicon: list[tuple[str, str]]) -> list[str]:
    lower = text.lower()
    labels: list[str] = []
    for pattern, label in lexicon:
        if pattern in lower and label not in labels:
            labels.append(label)
    return labels


def tokenize(text: str) -> list[str]:
    tokens = []
    current = []
    for ch in text.lower():
        if ch.isalnum() and ch != "_":
            current.append(ch)
        elif current:
            tokens.append("".join(current))
            current = []
    if current:
        tokens.append("".join(current))
    return tokens


def hashed_embed(text: str, dim: int, seed: int) -> list[float]:
    vec = [0.0] * dim
    for token in tokenize(text):
        digest = hashlib.sha256(f"{seed}:{token}".encode("utf-8")).digest()
        vec[int.from_bytes(digest[:8], "big") % dim] += 1.0
    norm = math.sqrt(math.fsum(v * v for v in vec))
    if norm == 0.0:
        raise ValueError("zero vector from hashing")
    return [v / norm for v in vec]


def cosine(u: list[float], v: list[float]) -> float:
    dot = math.fsum(a * b for a, b in zip(u, v))
    nu = math.sqrt(math.fsum(a * a for a in u))
    nv = math.sqrt(math.fsum(b * b for b in v))
    return max(-1.0, min(1.0, dot / (nu * nv)))


# ----------------------------------------------------------------------
# lexical metrics, brute force


def gram_counts(tokens: list[str], n: int) -> dict[tuple[str, ...], int]:
    counts: dict[tuple[str, ...], int] = {}
    for i in range(len(tokens) - n + 1):
        gram = tuple(tokens[i : i + n])
        counts[gram] = counts.get(gram, 0) + 1
    return counts


def clipped_overlap(cand: list[str], ref: list[str], n: int) -> tuple[int, int, int]:
    cand_counts = gram_counts(cand, n)
    ref_counts = gram_counts(ref, n)
    overlap = 0
    for gram, count in cand_counts.items():
        overlap += min(count, ref_counts.get(gram, 0))
    return overlap, sum(cand_counts.values()), sum(ref_counts.values())


def rouge_n_f1(cand: list[str], ref: list[str], n: int) -> float:
    overlap, cand_total, ref_total = clipped_overlap(cand, ref, n)
    p = overlap / cand_total if cand_total else 0.0
    r = overlap / ref_total if ref_total else 0.0
    return 0.0 if p + r == 0.0 else 2.0 * p * r / (p + r)


def lcs_len(a: list[str], b: list[str]) -> int:
    memo: dict[tuple[int, int], int] = {}

    def rec(i: int, j: int) -> int:
        if i == len(a) or j == len(b):
            return 0
        key = (i, j)
        if key not in memo:
            if a[i] == b[j]:
                memo[key] = 1 + rec(i + 1, j + 1)
            else:
                memo[key] = max(rec(i + 1, j), rec(i, j + 1))
        return memo[key]

    sys.setrecursionlimit(10000 + len(a) * len(b))
    return rec(0, 0)


def rouge_l_f1(cand: list[str], ref: list[str]) -> float:
    lcs = lcs_len(cand, ref)
    p = lcs / len(cand) if cand else 0.0
    r = lcs / len(ref) if ref else 0.0
    return 0.0 if p + r == 0.0 else 2.0 * p * r / (p + r)


def bleu(cand: list[str], ref: list[str], max_n: int) -> float:
    if not cand:
        return 0.0
    precisions = []
    for n in range(1, max_n + 1):
        overlap, cand_total, _ = clipped_overlap(cand, ref, n)
        precisions.append(overlap / cand_total if cand_total else 0.0)
    if any(p == 0.0 for p in precisions):
        return 0.0
    bp = min(1.0, math.exp(1.0 - len(ref) / len(cand)))
    return bp * math.exp(math.fsum(math.log(p) for p in precisions) / max_n)


# ----------------------------------------------------------------------
# aggregation + hexbin


def mean(values: list[float]) -> float:
    return math.fsum(values) / len(values)


def percentile(sorted_values: list[float], q: float) -> float:
    h = (len(sorted_values) - 1) * q / 100.0
    lo = math.floor(h)
    hi = min(lo + 1, len(sorted_values) - 1)
    return sorted_values[lo] + (h - lo) * (sorted_values[hi] - sorted_values[lo])


def hex_center(col: int, row: int, radius: float) -> tuple[float, float]:
    dx = math.sqrt(3.0) * radius
    return (col + 0.5 * (row & 1)) * dx, row * 1.5 * radius


def assign_hex(x: float, y: float, radius: float) -> tuple[int, int]:
    dx = math.sqrt(3.0) * radius
    # even-row sublattice: centers (i*dx, 3r*k)
    k_a = round(y / (3.0 * radius))
    i_a = round(x / dx)
    ax, ay = i_a * dx, 3.0 * radius * k_a
    # odd-row sublattice: centers ((i+0.5)*dx, 3r*k + 1.5r)
    k_b = round((y - 1.5 * radius) / (3.0 * radius))
    i_b = round((x - 0.5 * dx) / dx)
    bx, by = (i_b + 0.5) * dx, 3.0 * radius * k_b + 1.5 * radius
    da = (x - ax) ** 2 + (y - ay) ** 2
    db = (x - bx) ** 2 + (y - by) ** 2
    if db < da:
        return i_b, 2 * k_b + 1
    return i_a, 2 * k_a


def hexbin_counts(points: list[tuple[float, float]], radius: float) -> dict[tuple[int, int], int]:
    counts: dict[tuple[int, int], int] = {}
    for x, y in points:
        key = assign_hex(x, y, radius)
        counts[key] = counts.get(key, 0) + 1
    return counts


# ----------------------------------------------------------------------
# SVG rendering contract

SVG_W, SVG_H = 660, 640
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 80, 30, 45, 45
PLOT_W = SVG_W - MARGIN_L - MARGIN_R
PLOT_H = SVG_H - MARGIN_T - MARGIN_B


def px(x: float) -> float:
    return MARGIN_L + (x + 1.0) / 2.0 * PLOT_W


def py(y: float) -> float:
    return MARGIN_T + (1.0 - (y + 1.0) / 2.0) * PLOT_H


def f2(v: float) -> str:
    return format(v, ".2f")


def render_svg(
    title: str,
    bins: list[tuple[int, int, int]],
    radius: float,
    band: tuple[float, float],
) -> str:
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_W}" height="{SVG_H}" '
        f'viewBox="0 0 {SVG_W} {SVG_H}">',
        f"<title>{title}</title>",
        f'<rect x="{f2(MARGIN_L)}" y="{f2(MARGIN_T)}" width="{f2(PLOT_W)}" '
        f'height="{f2(PLOT_H)}" fill="none" stroke="#444444" stroke-width="1"/>',
    ]
    ticks = [i * 0.25 for i in range(-4, 5)]
    bottom = MARGIN_T + PLOT_H
    for v in ticks:
        x = px(v)
        lines.append(
            f'<line x1="{f2(x)}" y1="{f2(bottom)}" x2="{f2(x)}" y2="{f2(bottom + 6)}" '
            f'stroke="#444444" stroke-width="1"/>'
        )
        lines.append(
            f'<text x="{f2(x)}" y="{f2(bottom + 20)}" font-size="11" '
            f'text-anchor="middle" fill="#222222">{format(v, "g")}</text>'
        )
    for v in ticks:
        y = py(v)
        lines.append(
            f'<line x1="{f2(MARGIN_L - 6)}" y1="{f2(y)}" x2="{f2(MARGIN_L)}" y2="{f2(y)}" '
            f'stroke="#444444" stroke-width="1"/>'
        )
        lines.append(
            f'<text x="{f2(MARGIN_L - 8)}" y="{f2(y + 4)}" font-size="11" '
            f'text-anchor="end" fill="#222222">{format(v, "g")}</text>'
        )
    lines.append(
        f'<text x="{f2(MARGIN_L + PLOT_W / 2)}" y="{f2(SVG_H - 8)}" font-size="13" '
        f'text-anchor="middle" fill="#000000">GT similarity</text>'
    )
    y_mid = MARGIN_T + PLOT_H / 2
    lines.append(
        f'<text x="22.00" y="{f2(y_mid)}" font-size="13" text-anchor="middle" '
        f'fill="#000000" transform="rotate(-90 22.00 {f2(y_mid)})">predicted similarity</text>'
    )
    counts = [count for _, _, count in bins]
    log_min = math.log(min(counts))
    log_max = math.log(max(counts))
    for col, row, count in bins:
        cx, cy = hex_center(col, row, radius)
        points = []
        for angle in (90, 150, 210, 270, 330, 30):
            rad = math.radians(angle)
            vx = cx + radius * math.cos(rad)
            vy = cy + radius * math.sin(rad)
            points.append(f"{f2(px(vx))},{f2(py(vy))}")
        if log_max == log_min:
            opacity = 1.0
        else:
            opacity = 0.15 + 0.85 * (math.log(count) - log_min) / (log_max - log_min)
        d = "M " + " L ".join(points) + " Z"
        lines.append(f'<path d="{d}" fill="#1f77b4" fill-opacity="{format(opacity, ".3f")}"/>')
    lo, hi = band
    lines.append(
        f'<line x1="{f2(px(lo))}" y1="{f2(py(lo))}" x2="{f2(px(hi))}" y2="{f2(py(hi))}" '
        f'stroke="#333333" stroke-width="1.5" stroke-dasharray="6,4"/>'
    )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------------------
# pipeline


def main() -> None:
    config = tomllib.loads((ROOT / "run.toml").read_text(encoding="utf-8"))
    seed = config["seed"]
    dim = config["embedding"]["dim"]
    hash_seed = config["embedding"]["hash_seed"]
    max_n = config["metrics"]["bleu_max_n"]
    radius = config["report"]["hex_radius"]
    min_count = config["report"]["min_count"]

    header, report_rows = read_csv_rows(ROOT / config["paths"]["reports"])
    assert header == ["report_id", "text"]
    texts = {row["report_id"]: row["text"].replace("\r\n", "\n").replace("\r", "\n") for row in report_rows}

    label_files = {}
    for source, key in (("CheXpert", "chexpert"), ("NegBio", "negbio")):
        columns, rows = read_csv_rows(ROOT / config["paths"][key])
        schema = [c for c in columns if c != "report_id"]
        label_files[source] = (schema, {row["report_id"]: row for row in rows})

    schema = label_files["CheXpert"][0]
    no_finding = "No Finding"

    retained = []
    for row in report_rows:
        rid = row["report_id"]
        chex = label_files["CheXpert"][1][rid]
        negb = label_files["NegBio"][1][rid]
        if solely_no_finding(chex, schema, no_finding) and solely_no_finding(negb, schema, no_finding):
            continue
        retained.append(rid)

    ids = sorted(retained)
    random.Random(seed).shuffle(ids)
    half = len(ids) // 2
    group_a, group_b = ids[:half], ids[half : 2 * half]
    pairs = [(a, b) for a in group_a for b in group_b]

    lexicon = [
        (entry["pattern"], entry["label"])
        for entry in json.loads((ROOT / config["chat"]["lexicon"]).read_text(encoding="utf-8"))["lexicon"]
    ]
    joined = {rid: "; ".join(scan_labels(texts[rid], lexicon)) for rid in ids}
    embeddings = {rid: hashed_embed(joined[rid], dim, hash_seed) for rid in ids}
    tokens = {rid: tokenize(texts[rid]) for rid in ids}

    encoded: dict[tuple[str, str], list[float]] = {}
    cell_map = {"1.0": 1.0, "0.0": 0.0, "-1.0": -1.0, "": -2.0}
    for source in SOURCES:
        for rid in ids:
            row = label_files[source][1][rid]
            encoded[(source, rid)] = [cell_map[row[name].strip()] for name in schema]

    def gt(a: str, b: str, source: str) -> float | None:
        u, v = encoded[(source, a)], encoded[(source, b)]
        if math.fsum(x * x for x in u) == 0.0 or math.fsum(x * x for x in v) == 0.0:
            return None
        return cosine(u, v)

    rows_out = []
    for a, b in pairs:
        gt_c = gt(a, b, "CheXpert")
        gt_n = gt(a, b, "NegBio")
        sim = cosine(embeddings[a], embeddings[b])
        rows_out.append(
            [
                a,
                b,
                "" if gt_c is None else g10(gt_c),
                "" if gt_n is None else g10(gt_n),
                g10(sim),
                g10(rouge_n_f1(tokens[a], tokens[b], 1)),
                g10(rouge_n_f1(tokens[a], tokens[b], 2)),
                g10(rouge_l_f1(tokens[a], tokens[b])),
                g10(bleu(tokens[a], tokens[b], max_n)),
            ]
        )

    GOLDEN.mkdir(parents=True, exist_ok=True)
    scores_lines = ["a_id,b_id,gt_chexpert,gt_negbio,gpt_sim,rouge1_f1,rouge2_f1,rougel_f1,bleu"]
    scores_lines += [",".join(row) for row in rows_out]
    scores_text = "\n".join(scores_lines) + "\n"
    (GOLDEN / "scores.csv").write_text(scores_text, encoding="utf-8")

    # The report stage works from the persisted file: parse back.
    parsed = []
    for row in rows_out:
        parsed.append(
            {
                "gt": {"CheXpert": float(row[2]) if row[2] else None, "NegBio": float(row[3]) if row[3] else None},
                "pred": {
                    "GPT_sim": float(row[4]),
                    "ROUGE_1_F1": float(row[5]),
                    "ROUGE_2_F1": float(row[6]),
                    "ROUGE_L_F1": float(row[7]),
                    "BLEU": float(row[8]),
                },
            }
        )

    md = ["# Mean differences vs ground truth", "", "| Method | CheXpert | NegBio |", "| --- | --- | --- |"]
    per_source_counts = {}
    for source in SOURCES:
        present = [p for p in parsed if p["gt"][source] is not None]
        per_source_counts[source] = (len(present), len(parsed) - len(present))
    for method in METHODS:
        cells = []
        for source in SOURCES:
            diffs = [
                abs(p["pred"][method] - p["gt"][source]) for p in parsed if p["gt"][source] is not None
            ]
            cells.append(format(mean(diffs), ".4f"))
        md.append(f"| {method} | {cells[0]} | {cells[1]} |")
    md.append("")
    for source in SOURCES:
        used, excluded = per_source_counts[source]
        md.append(f"{source}: {used} pairs used, {excluded} excluded.")
    (GOLDEN / "summary.md").write_text("\n".join(md) + "\n", encoding="utf-8")

    for method in METHODS:
        for source in SOURCES:
            points = [
                (p["gt"][source], p["pred"][method]) for p in parsed if p["gt"][source] is not None
            ]
            gts = sorted(x for x, _ in points)
            band = (percentile(gts, 5.0), percentile(gts, 95.0))
            counts = hexbin_counts(points, radius)
            bins = sorted(
                ((col, row, count) for (col, row), count in counts.items() if count > min_count),
                key=lambda item: (item[1], item[0]),
            )
            svg = render_svg(f"{method} vs GT ({source})", bins, radius, band)
            name = f"hexbin_{method.lower()}_{source.lower()}.svg"
            (GOLDEN / name).write_text(svg, encoding="utf-8")

    print(
        json.dumps(
            {
                "retained": len(retained),
                "pairs": len(pairs),
                "group_a": group_a,
                "group_b": group_b,
            }
        )
    )


if __name__ == "__main__":
    main()
