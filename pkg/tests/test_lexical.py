import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from radsim import lexical
from radsim.errors import InvalidN

from . import oracles

tokens = st.lists(st.sampled_from(["a", "b", "c", "lung", "clear", "5mm"]), max_size=8)


class TestTokenize:
    def test_sentence(self):
        assert lexical.tokenize("No acute cardiopulmonary process.") == [
            "no",
            "acute",
            "cardiopulmonary",
            "process",
        ]

    def test_empty(self):
        assert lexical.tokenize("") == []

    def test_digits_kept_punctuation_splits(self):
        assert lexical.tokenize("T2-weighted, 5mm") == ["t2", "weighted", "5mm"]

    def test_underscore_splits(self):
        assert lexical.tokenize("a_b") == ["a", "b"]

    def test_punctuation_only(self):
        assert lexical.tokenize("..., --- !!") == []


class TestNgramCounts:
    def test_unigrams(self):
        assert lexical.ngram_counts(["a", "b", "a"], 1) == {("a",): 2, ("b",): 1}

    def test_bigrams(self):
        assert lexical.ngram_counts(["a", "b", "a"], 2) == {("a", "b"): 1, ("b", "a"): 1}

    def test_window_longer_than_sequence(self):
        assert lexical.ngram_counts(["a"], 2) == {}

    def test_invalid_n(self):
        with pytest.raises(InvalidN):
            lexical.ngram_counts(["a"], 0)


class TestRougeN:
    def test_identity(self):
        score = lexical.rouge_n(["a", "b", "c"], ["a", "b", "c"], 2)
        assert score == lexical.MetricScore(1.0, 1.0, 1.0)

    def test_disjoint(self):
        assert lexical.rouge_n(["a"], ["b"], 1) == lexical.MetricScore(0.0, 0.0, 0.0)

    def test_hand_counted_unigram_case(self):
        score = lexical.rouge_n(["a", "b", "c"], ["a", "b", "d"], 1)
        assert score.precision == pytest.approx(2 / 3, abs=1e-12)
        assert score.recall == pytest.approx(2 / 3, abs=1e-12)
        assert score.f1 == pytest.approx(2 / 3, abs=1e-12)

    def test_clipping(self):
        # candidate repeats "a" three times; reference has it once
        score = lexical.rouge_n(["a", "a", "a"], ["a", "b"], 1)
        assert score.precision == pytest.approx(1 / 3, abs=1e-12)
        assert score.recall == pytest.approx(1 / 2, abs=1e-12)

    def test_empty_candidate(self):
        assert lexical.rouge_n([], ["a"], 1) == lexical.MetricScore(0.0, 0.0, 0.0)


class TestRougeL:
    def test_identity(self):
        assert lexical.rouge_l(["x", "y"], ["x", "y"]) == lexical.MetricScore(1.0, 1.0, 1.0)

    def test_swap_in_middle(self):
        score = lexical.rouge_l(["a", "b", "c", "d"], ["a", "c", "b", "d"])
        assert score.precision == pytest.approx(0.75, abs=1e-12)
        assert score.recall == pytest.approx(0.75, abs=1e-12)
        assert score.f1 == pytest.approx(0.75, abs=1e-12)

    def test_empty_candidate(self):
        assert lexical.rouge_l([], ["a"]) == lexical.MetricScore(0.0, 0.0, 0.0)


class TestBleu:
    def test_identity(self):
        assert lexical.bleu(["a", "b", "c", "d"], ["a", "b", "c", "d"]) == 1.0

    def test_no_common_fourgram_zeroes_score(self):
        assert lexical.bleu(["a", "b", "c", "x"], ["a", "b", "c", "y"]) == 0.0

    def test_hand_computed_case(self):
        cand = "the cat sat on the mat".split()
        ref = "the cat sat on a mat".split()
        # clipped overlaps: 5 of 6 unigrams, 3 of 5 bigrams, 2 of 4
        # trigrams, 1 of 3 4-grams; equal lengths so no brevity penalty
        expected = (5 / 6 * 3 / 5 * 2 / 4 * 1 / 3) ** 0.25
        assert lexical.bleu(cand, ref) == pytest.approx(expected, abs=1e-12)

    def test_brevity_penalty(self):
        # candidate half as long as reference: bp = exp(1 - 2) = e^-1
        score = lexical.bleu(["a", "b"], ["a", "b", "c", "d"], max_n=2)
        p1, p2 = 2 / 2, 1 / 1
        assert score == pytest.approx(math.exp(-1.0) * (p1 * p2) ** 0.5, abs=1e-12)

    def test_smoothing_keeps_score_positive(self):
        cand, ref = ["a", "b", "c", "x"], ["a", "b", "c", "y"]
        assert lexical.bleu(cand, ref, smoothing=True) > 0.0
        assert lexical.bleu(cand, ref, smoothing=True, epsilon=1e-3) > lexical.bleu(
            cand, ref, smoothing=True, epsilon=1e-9
        )

    def test_empty_candidate(self):
        assert lexical.bleu([], ["a"]) == 0.0

    def test_invalid_max_n(self):
        with pytest.raises(InvalidN):
            lexical.bleu(["a"], ["a"], max_n=0)


class TestProperties:
    @given(tokens, tokens, st.integers(1, 3))
    @settings(max_examples=150, deadline=None)
    def test_scores_within_unit_interval(self, cand, ref, n):
        for value in (
            lexical.rouge_n(cand, ref, n).f1,
            lexical.rouge_l(cand, ref).f1,
            lexical.bleu(cand, ref, max_n=n),
            lexical.bleu(cand, ref, max_n=n, smoothing=True),
        ):
            assert 0.0 <= value <= 1.0

    @given(tokens, tokens, st.integers(1, 3))
    @settings(max_examples=150, deadline=None)
    def test_f1_symmetric_under_swap(self, cand, ref, n):
        forward = lexical.rouge_n(cand, ref, n)
        backward = lexical.rouge_n(ref, cand, n)
        assert forward.f1 == backward.f1
        assert forward.precision == backward.recall
        assert lexical.rouge_l(cand, ref).f1 == lexical.rouge_l(ref, cand).f1

    @given(tokens.filter(bool), st.integers(1, 3))
    @settings(max_examples=100, deadline=None)
    def test_self_similarity(self, seq, n):
        if len(seq) >= n:
            assert lexical.rouge_n(seq, seq, n).f1 == 1.0
        assert lexical.rouge_l(seq, seq).f1 == 1.0

    @given(tokens, tokens)
    @settings(max_examples=100, deadline=None)
    def test_matches_brute_force_oracle(self, cand, ref):
        assert lexical.rouge_n(cand, ref, 1).f1 == pytest.approx(
            oracles.rouge_n_f1(cand, ref, 1), abs=1e-9
        )
        assert lexical.rouge_l(cand, ref).f1 == pytest.approx(
            oracles.rouge_l_f1(cand, ref), abs=1e-9
        )
        assert lexical.bleu(cand, ref) == pytest.approx(oracles.bleu_score(cand, ref), abs=1e-9)
