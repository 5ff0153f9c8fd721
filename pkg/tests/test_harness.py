import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from radsim.errors import MissingEncoding, MissingLabelSet, NoValidPairs, TooFewValues
from radsim.gtsim import EncodedFindingVector
from radsim.harness import (
    METHODS,
    MetricOptions,
    PairInputs,
    PairScore,
    _assign_hex,
    _hex_center,
    fmt_real,
    hexbin,
    mean_differences,
    percentile_band,
    read_scores_csv,
    run_all,
    score_pair,
    write_scores_csv,
)


def encoded(*values, source="CheXpert"):
    return EncodedFindingVector("r", source, tuple(float(v) for v in values))


def pair_inputs(report_id, text_tokens, embedding, chex, negbio):
    return PairInputs(
        report_id,
        tuple(text_tokens),
        embedding,
        {"CheXpert": encoded(*chex), "NegBio": encoded(*negbio, source="NegBio")},
    )


A = pair_inputs("a", ["no", "acute", "cardiopulmonary", "process", "seen"], (1.0, 0.0), [1, 0, 1], [1, 0])
B = pair_inputs("b", ["no", "acute", "cardiopulmonary", "disease", "seen"], (0.0, 1.0), [0, 1, 1], [0, 1])


def make_score(gt_c, gt_n, value=0.5, a_id="a", b_id="b"):
    return PairScore(a_id, b_id, gt_c, gt_n, value, value, value, value, value)


class TestScorePair:
    def test_identical_inputs_score_one_everywhere(self):
        score = score_pair(A, A)
        for method in METHODS:
            assert score.predicted(method) == pytest.approx(1.0), method
        assert score.gt_chexpert == pytest.approx(1.0)
        assert score.gt_negbio == pytest.approx(1.0)

    def test_disjoint_pair(self):
        score = score_pair(A, B)
        assert score.gt_negbio == pytest.approx(0.0)
        assert 0.0 < score.rouge1_f1 < 1.0
        assert score.a_id == "a" and score.b_id == "b"

    def test_zero_encoding_leaves_gt_absent(self):
        zero = pair_inputs("z", ["words"], (1.0, 0.0), [0, 0, 0], [1, 0])
        score = score_pair(zero, A)
        assert score.gt_chexpert is None
        assert score.gt_negbio is not None

    def test_missing_embedding_raises(self):
        broken = pair_inputs("x", ["words"], None, [1, 0, 0], [1, 0])
        with pytest.raises(MissingLabelSet):
            score_pair(broken, A)

    def test_missing_source_encoding_raises(self):
        partial = PairInputs("p", ("t",), (1.0, 0.0), {"CheXpert": encoded(1, 0, 0)})
        with pytest.raises(MissingEncoding):
            score_pair(partial, A)


class TestRunAll:
    INPUTS = {"a": A, "b": B}

    def test_output_order_matches_pair_order(self):
        pairs = [("a", "b"), ("b", "a"), ("a", "a")]
        scores, failures = run_all(pairs, self.INPUTS)
        assert failures == []
        assert [(s.a_id, s.b_id) for s in scores] == pairs

    def test_parallelism_does_not_change_results(self):
        pairs = [("a", "b"), ("b", "a"), ("a", "a"), ("b", "b")] * 5
        serial, _ = run_all(pairs, self.INPUTS, parallelism=1)
        wide, _ = run_all(pairs, self.INPUTS, parallelism=8)
        assert serial == wide

    def test_per_pair_failures_are_collected(self):
        broken = dict(self.INPUTS)
        broken["c"] = pair_inputs("c", ["t"], None, [1, 0, 0], [1, 0])
        scores, failures = run_all([("a", "c"), ("a", "b")], broken)
        assert len(scores) == 1 and len(failures) == 1
        assert failures[0][0] == ("a", "c")


class TestScoresCsv:
    def test_round_trip_preserves_values(self, tmp_path):
        path = tmp_path / "scores.csv"
        scores, _ = run_all([("a", "b"), ("a", "a")], {"a": A, "b": B})
        write_scores_csv(path, scores)
        parsed = read_scores_csv(path)
        assert len(parsed) == 2
        for original, loaded in zip(scores, parsed):
            assert loaded.a_id == original.a_id
            assert loaded.bleu == pytest.approx(original.bleu, abs=1e-9)

    def test_absent_gt_is_empty_cell(self, tmp_path):
        path = tmp_path / "scores.csv"
        write_scores_csv(path, [make_score(None, 0.25)])
        line = path.read_text(encoding="utf-8").splitlines()[1]
        assert line.split(",")[2] == ""
        assert read_scores_csv(path)[0].gt_chexpert is None

    def test_ten_significant_digits(self):
        assert fmt_real(1 / 3) == "0.3333333333"
        assert fmt_real(1.0) == "1"

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "scores.csv"
        path.write_text("nope\n", encoding="utf-8")
        with pytest.raises(NoValidPairs):
            read_scores_csv(path)

    def test_reparsed_values_are_writeback_stable(self, tmp_path):
        """Formatting at 10 significant digits is a fixed point: writing
        the parsed file again reproduces it byte for byte."""
        first = tmp_path / "one.csv"
        scores, _ = run_all([("a", "b"), ("b", "a")], {"a": A, "b": B})
        write_scores_csv(first, scores)
        second = tmp_path / "two.csv"
        write_scores_csv(second, read_scores_csv(first))
        assert first.read_bytes() == second.read_bytes()


class TestMeanDifferences:
    def test_perfect_predictions_give_zero(self):
        scores = [make_score(0.5, 0.5), make_score(0.5, 0.5)]
        for cell in mean_differences(scores, "CheXpert"):
            assert cell.mean_difference == 0.0
            assert cell.used == 2 and cell.excluded == 0

    def test_absolute_mode(self):
        scores = [make_score(0.2, None), make_score(0.8, None)]
        cells = mean_differences(scores, "CheXpert")
        assert cells[0].mean_difference == pytest.approx(0.3)
        assert cells[0].excluded == 0

    def test_signed_mode_cancels(self):
        scores = [make_score(0.2, None), make_score(0.8, None)]
        cells = mean_differences(scores, "CheXpert", mode="signed")
        assert cells[0].mean_difference == pytest.approx(0.0)

    def test_absent_gt_rows_counted_excluded(self):
        scores = [make_score(0.5, None), make_score(None, None)]
        cells = mean_differences(scores, "CheXpert")
        assert cells[0].used == 1 and cells[0].excluded == 1

    def test_no_usable_pairs_raises(self):
        with pytest.raises(NoValidPairs):
            mean_differences([make_score(None, None)], "CheXpert")

    def test_unknown_mode_rejected(self):
        with pytest.raises(ValueError):
            mean_differences([make_score(0.5, None)], "CheXpert", mode="median")

    def test_cell_order_follows_methods(self):
        cells = mean_differences([make_score(0.5, 0.5)], "NegBio")
        assert [c.method for c in cells] == list(METHODS)


class TestPercentileBand:
    def test_uniform_1_to_100(self):
        lo, hi = percentile_band([float(v) for v in range(1, 101)])
        assert lo == pytest.approx(5.95)
        assert hi == pytest.approx(95.05)

    def test_two_values_interpolate(self):
        lo, hi = percentile_band([0.0, 1.0])
        assert lo == pytest.approx(0.05)
        assert hi == pytest.approx(0.95)

    def test_constant_values(self):
        assert percentile_band([0.4, 0.4, 0.4]) == (0.4, 0.4)

    def test_order_invariant(self):
        values = [0.9, 0.1, 0.5, 0.3, 0.7]
        assert percentile_band(values) == percentile_band(sorted(values))

    def test_too_few_values(self):
        with pytest.raises(TooFewValues):
            percentile_band([1.0])

    @given(st.lists(st.floats(0, 1), min_size=2, max_size=40))
    @settings(max_examples=60, deadline=None)
    def test_band_inside_range(self, values):
        lo, hi = percentile_band(values)
        assert min(values) <= lo <= hi <= max(values)


class TestHexAssignment:
    def test_center_geometry(self):
        dx = math.sqrt(3.0) * 0.05
        assert _hex_center(0, 0, 0.05) == (0.0, 0.0)
        assert _hex_center(2, 0, 0.05) == pytest.approx((2 * dx, 0.0))
        assert _hex_center(0, 1, 0.05) == pytest.approx((0.5 * dx, 0.075))
        assert _hex_center(0, 2, 0.05) == pytest.approx((0.0, 0.15))

    def test_point_at_center_maps_to_that_bin(self):
        for col, row in [(0, 0), (1, 0), (-2, 1), (3, 2), (0, -3)]:
            x, y = _hex_center(col, row, 0.05)
            assert _assign_hex(x, y, 0.05) == (col, row)

    @given(st.floats(-1, 1), st.floats(-1, 1))
    @settings(max_examples=120, deadline=None)
    def test_assignment_is_nearest_center(self, x, y):
        col, row = _assign_hex(x, y, 0.05)
        cx, cy = _hex_center(col, row, 0.05)
        chosen = math.hypot(x - cx, y - cy)
        # no lattice center in a generous neighborhood may be closer
        for other_col in range(col - 2, col + 3):
            for other_row in range(row - 2, row + 3):
                ox, oy = _hex_center(other_col, other_row, 0.05)
                assert chosen <= math.hypot(x - ox, y - oy) + 1e-12


class TestHexbin:
    def test_counts_conserved(self):
        scores = [make_score(0.1 * i % 1.0, None, value=(0.07 * i) % 1.0) for i in range(200)]
        layer = hexbin(scores, "BLEU", "CheXpert", min_count=0)
        assert sum(b.count for b in layer.bins) == 200

    def test_min_count_threshold_is_strict(self):
        # 150 points in one hex, 50 in another far away
        scores = [make_score(0.0, None, value=0.0)] * 150 + [make_score(0.9, None, value=0.9)] * 50
        layer = hexbin(scores, "BLEU", "CheXpert", min_count=100)
        assert len(layer.bins) == 1
        assert layer.bins[0].count == 150
        both = hexbin(scores, "BLEU", "CheXpert", min_count=49)
        assert {b.count for b in both.bins} == {150, 50}
        neither = hexbin(scores, "BLEU", "CheXpert", min_count=150)
        assert neither.bins == ()

    def test_bins_sorted_row_major(self):
        scores = [make_score((i % 13) / 13.0, None, value=((7 * i) % 13) / 13.0) for i in range(120)]
        layer = hexbin(scores, "BLEU", "CheXpert", min_count=0)
        keys = [(b.row, b.col) for b in layer.bins]
        assert keys == sorted(keys)

    def test_band_comes_from_gt_values(self):
        scores = [make_score(v / 100.0, None, value=0.5) for v in range(1, 101)]
        layer = hexbin(scores, "BLEU", "CheXpert", min_count=0)
        assert layer.band == pytest.approx((0.0595, 0.9505))

    def test_absent_gt_points_dropped(self):
        scores = [make_score(0.5, None)] * 3 + [make_score(None, 0.5)] * 2
        layer = hexbin(scores, "BLEU", "CheXpert", min_count=0)
        assert sum(b.count for b in layer.bins) == 3

    def test_no_points_raises(self):
        with pytest.raises(NoValidPairs):
            hexbin([make_score(None, None)], "BLEU", "CheXpert")

    @given(
        st.lists(
            st.tuples(st.floats(0, 1, width=32), st.floats(0, 1, width=32)),
            min_size=2,
            max_size=80,
        )
    )
    @settings(max_examples=40, deadline=None)
    def test_conservation_property(self, points):
        scores = [make_score(gt, None, value=pred) for gt, pred in points]
        layer = hexbin(scores, "GPT_sim", "CheXpert", min_count=0)
        assert sum(b.count for b in layer.bins) == len(points)

    def test_layer_identity(self):
        layer = hexbin([make_score(0.5, None)] * 2, "ROUGE_1_F1", "CheXpert", min_count=0)
        assert (layer.method, layer.source, layer.radius) == ("ROUGE_1_F1", "CheXpert", 0.05)


class TestMetricOptions:
    def test_bleu_options_flow_through(self):
        tight = MetricOptions(bleu_max_n=1)
        score = score_pair(A, B, tight)
        loose = score_pair(A, B)
        assert score.bleu != loose.bleu
