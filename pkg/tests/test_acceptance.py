"""Acceptance suite: one test per numbered criterion.

Each test carries a `criterion` marker; the conftest summary hook prints
one pass/fail line per criterion after the run. Everything here runs
offline with the mock chat provider and the hashed embedding fallback.
"""

import itertools
import json
import random
import time

import pytest
from click.testing import CliRunner

import radsim.cli as cli_mod
from radsim import lexical
from radsim.cli import main as cli_main
from radsim.corpus import FindingSchema, cross_pairs, load_finding_vectors, split_groups
from radsim.errors import ZeroVector
from radsim.gtsim import cosine, encode_vector
from radsim.harness import SOURCES, _hex_center, hexbin, mean_differences, read_scores_csv

from . import oracles
from .conftest import FIXTURES, GOLDEN
from .test_harness import make_score

CURATED_PAIRS = [
    ([], []),
    ([], ["no"]),
    (["no"], []),
    (["no"], ["no"]),
    (["no"], ["acute"]),
    (["no", "no", "no"], ["no"]),
    (["no"], ["no", "no", "no"]),
    (["clear", "lungs"], ["lungs", "clear"]),
    (["no", "acute", "disease"], ["no", "acute", "process"]),
    (["small", "left", "pleural", "effusion"], ["small", "left", "pleural", "effusion"]),
    (["small", "left", "pleural", "effusion"], ["large", "right", "pleural", "effusion"]),
    (["heart", "size", "is", "normal"], ["the", "heart", "is", "normal", "in", "size"]),
    (["a", "b", "a", "b", "a"], ["b", "a", "b", "a", "b"]),
    (["a", "a", "b", "b"], ["a", "b", "a", "b"]),
    (["w1", "w2", "w3", "w4", "w5", "w6"], ["w1", "w3", "w5"]),
    (["w1", "w3", "w5"], ["w1", "w2", "w3", "w4", "w5", "w6"]),
    (["x"], ["y", "y", "y", "y", "y", "y", "y", "y"]),
    (["no", "evidence", "of", "pneumonia"], ["pneumonia", "of", "evidence", "no"]),
    (["t1", "t1", "t1", "t1"], ["t1", "t1"]),
    (["lungs", "are", "clear", "bilaterally"], ["lungs", "are", "grossly", "clear"]),
]


def assert_metrics_match_oracle(cand, ref):
    tol = 1e-9
    assert abs(lexical.rouge_n(cand, ref, 1).f1 - oracles.rouge_n_f1(cand, ref, 1)) < tol
    assert abs(lexical.rouge_n(cand, ref, 2).f1 - oracles.rouge_n_f1(cand, ref, 2)) < tol
    assert abs(lexical.rouge_l(cand, ref).f1 - oracles.rouge_l_f1(cand, ref)) < tol
    assert abs(lexical.bleu(cand, ref) - oracles.bleu_score(cand, ref)) < tol


@pytest.mark.criterion(1)
def test_criterion_1_metric_oracle_equivalence():
    started = time.monotonic()
    sequences = [
        list(seq)
        for length in range(6)
        for seq in itertools.product("ab", repeat=length)
    ]
    assert len(sequences) == 63
    for cand in sequences:
        for ref in sequences:
            assert_metrics_match_oracle(cand, ref)
    for cand, ref in CURATED_PAIRS:
        assert_metrics_match_oracle(cand, ref)
    assert time.monotonic() - started < 5.0


@pytest.mark.criterion(2)
def test_criterion_2_encoding_fidelity():
    schema = FindingSchema()
    vectors = load_finding_vectors(FIXTURES / "chexpert.csv", schema, "CheXpert")[:10]
    assert len(vectors) == 10
    import csv

    with (FIXTURES / "chexpert.csv").open(encoding="utf-8", newline="") as fh:
        raw_rows = list(csv.DictReader(fh))[:10]
    cell_value = {"1.0": 1.0, "0.0": 0.0, "-1.0": -1.0, "": -2.0}
    for fv, raw in zip(vectors, raw_rows):
        encoded = encode_vector(fv, schema)
        expected = tuple(cell_value[(raw[name] or "").strip()] for name in schema.names)
        assert encoded.values == expected
        assert set(encoded.values) <= {1.0, 0.0, -1.0, -2.0}


@pytest.mark.criterion(3)
def test_criterion_3_cosine_property_suite():
    rng = random.Random(20240814)
    checked = 0
    while checked < 1000:
        dim = rng.randint(2, 24)
        u = [rng.uniform(-3, 3) for _ in range(dim)]
        v = [rng.uniform(-3, 3) for _ in range(dim)]
        try:
            forward = cosine(u, v)
        except ZeroVector:
            continue
        assert forward == cosine(v, u)
        assert -1.0 <= forward <= 1.0
        assert abs(cosine(u, u) - 1.0) < 1e-12
        scale = rng.uniform(0.1, 50.0)
        assert abs(cosine([scale * x for x in u], v) - forward) < 1e-12
        checked += 1


@pytest.mark.criterion(4)
def test_criterion_4_pair_count_reproduction(golden_run):
    synthetic = [f"s{i:03d}" for i in range(500)]
    pair_set = cross_pairs(split_groups(synthetic, seed=11))
    assert len(pair_set.group_a) == 250
    assert len(pair_set.group_b) == 250
    assert len(pair_set.pairs) == 62_500
    assert len(set(pair_set.pairs)) == 62_500

    scores = read_scores_csv(golden_run.out / "scores.csv")
    assert len(scores) == 324
    manifest = json.loads((golden_run.out / "manifest.json").read_text(encoding="utf-8"))
    assert len(manifest["group_a"]) == 18 and len(manifest["group_b"]) == 18


@pytest.mark.criterion(5)
def test_criterion_5_end_to_end_golden_run(golden_run):
    golden_names = ["scores.csv", "summary.md"] + sorted(
        p.name for p in GOLDEN.glob("hexbin_*.svg")
    )
    assert len(golden_names) == 12
    for name in golden_names:
        produced = (golden_run.out / name).read_bytes()
        expected = (GOLDEN / name).read_bytes()
        assert produced == expected, f"{name} differs from the golden file"
    assert golden_run.total_seconds < 60.0


@pytest.mark.criterion(6)
def test_criterion_6_paper_direction_property(golden_run):
    scores = read_scores_csv(golden_run.out / "scores.csv")
    for source in SOURCES:
        cells = {cell.method: cell.mean_difference for cell in mean_differences(scores, source)}
        assert cells["GPT_sim"] < cells["BLEU"], source
        assert cells["GPT_sim"] < cells["ROUGE_2_F1"], source


@pytest.mark.criterion(7)
def test_criterion_7_hexbin_correctness():
    radius = 0.05
    populations = {(0, 0): 150, (1, 0): 101, (0, 2): 100, (-2, 1): 50}
    scores = []
    for (col, row), count in populations.items():
        x, y = _hex_center(col, row, radius)
        scores.extend(make_score(x, None, value=y) for _ in range(count))

    everything = hexbin(scores, "BLEU", "CheXpert", radius=radius, min_count=0)
    assert sum(b.count for b in everything.bins) == sum(populations.values())
    assert {(b.col, b.row): b.count for b in everything.bins} == populations
    for b in everything.bins:
        assert (b.x, b.y) == _hex_center(b.col, b.row, radius)

    filtered = hexbin(scores, "BLEU", "CheXpert", radius=radius, min_count=100)
    kept = {(b.col, b.row): b.count for b in filtered.bins}
    assert kept == {(0, 0): 150, (1, 0): 101}


@pytest.mark.criterion(8)
def test_criterion_8_cache_soundness(golden_run, monkeypatch):
    built = {}
    real_chat, real_embed = cli_mod.build_chat_provider, cli_mod.build_embedder

    def chat_spy(config):
        built["chat"] = real_chat(config)
        return built["chat"]

    def embed_spy(config):
        built["embed"] = real_embed(config)
        return built["embed"]

    monkeypatch.setattr(cli_mod, "build_chat_provider", chat_spy)
    monkeypatch.setattr(cli_mod, "build_embedder", embed_spy)

    cache_before = {p.name: p.read_bytes() for p in sorted(golden_run.cache.iterdir())}
    runner = CliRunner()

    result = runner.invoke(cli_main, ["label", "--config", str(golden_run.config)])
    assert result.exit_code == 0
    assert built["chat"].calls == 0

    result = runner.invoke(cli_main, ["score", "--config", str(golden_run.config)])
    assert result.exit_code == 0
    assert built["chat"].calls == 0
    assert built["embed"].batch_calls == 0

    cache_after = {p.name: p.read_bytes() for p in sorted(golden_run.cache.iterdir())}
    assert cache_after == cache_before
