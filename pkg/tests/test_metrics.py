"""Rank AUC, ROC curve construction, threshold accuracy, and link statistics."""

from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blinklink import (
    ConfusionMatrix,
    DegenerateLabelsError,
    LinkStats,
    accuracy_at,
    decode_single,
    decode_stream,
    link_stats,
    rank_auc,
    roc_auc,
)
from tests.conftest import noiseless_scores


def pair_counting_auc(scores, labels) -> float:
    """Brute-force AUC: fraction of (positive, negative) pairs ranked
    correctly, ties worth half."""
    pos = [s for s, l in zip(scores, labels) if l]
    neg = [s for s, l in zip(scores, labels) if not l]
    credit = 0.0
    for p, n in itertools.product(pos, neg):
        if p > n:
            credit += 1.0
        elif p == n:
            credit += 0.5
    return credit / (len(pos) * len(neg))


class TestRankAuc:
    def test_perfectly_separable(self):
        assert rank_auc([0.1, 0.2, 0.8, 0.9], [False, False, True, True]) == 1.0

    def test_perfectly_inverted(self):
        assert rank_auc([0.9, 0.8, 0.1, 0.2], [False, False, True, True]) == 0.0

    def test_all_tied_scores_give_chance(self):
        assert rank_auc([0.5] * 6, [True, False, True, False, True, False]) == 0.5

    def test_half_credit_for_ties(self):
        # One tied pair out of two -> 0.5 + 0.25.
        assert rank_auc([0.3, 0.3, 0.7], [False, True, True]) == 0.75

    def test_matches_pair_counting_on_random_instances(self):
        rng = np.random.default_rng(123)
        for _ in range(25):
            n = int(rng.integers(2, 60))
            scores = rng.choice([0.0, 0.25, 0.5, 0.75, 1.0], size=n)
            labels = rng.integers(0, 2, size=n).astype(bool)
            if labels.all() or not labels.any():
                labels[0] = ~labels[0]
            assert rank_auc(scores, labels) == pair_counting_auc(scores, labels)

    @settings(max_examples=60, deadline=None)
    @given(
        st.lists(
            st.tuples(
                st.sampled_from([0.0, 0.1, 0.5, 0.5, 0.9, 1.0]), st.booleans()
            ),
            min_size=2,
            max_size=40,
        ).filter(lambda rows: len({l for _, l in rows}) == 2)
    )
    def test_pair_counting_property(self, rows):
        scores = [s for s, _ in rows]
        labels = [l for _, l in rows]
        assert rank_auc(scores, labels) == pair_counting_auc(scores, labels)

    def test_invariant_under_monotone_transform(self):
        rng = np.random.default_rng(7)
        scores = rng.random(200)
        labels = rng.integers(0, 2, size=200).astype(bool)
        base = rank_auc(scores, labels)
        assert rank_auc(np.sqrt(scores), labels) == pytest.approx(base)
        assert rank_auc(scores**3 + 2, labels) == pytest.approx(base)

    def test_single_class_raises(self):
        with pytest.raises(DegenerateLabelsError):
            rank_auc([0.1, 0.9], [True, True])
        with pytest.raises(DegenerateLabelsError):
            rank_auc([0.1, 0.9], [False, False])

    def test_empty_input_raises(self):
        with pytest.raises(DegenerateLabelsError):
            rank_auc([], [])


class TestRocCurve:
    def test_curve_spans_unit_square(self):
        rng = np.random.default_rng(5)
        scores = rng.random(300)
        labels = scores + rng.normal(0, 0.3, 300) > 0.5
        curve = roc_auc(scores, labels)
        points = np.asarray(curve.points)
        assert tuple(points[0]) == (0.0, 0.0)
        assert tuple(points[-1]) == (1.0, 1.0)

    def test_curve_is_monotone(self):
        rng = np.random.default_rng(6)
        scores = rng.random(500)
        labels = rng.integers(0, 2, 500).astype(bool)
        points = np.asarray(roc_auc(scores, labels).points)
        assert np.all(np.diff(points[:, 0]) >= 0)
        assert np.all(np.diff(points[:, 1]) >= 0)

    def test_area_under_curve_matches_auc_field(self):
        rng = np.random.default_rng(8)
        scores = rng.random(400)
        labels = scores + rng.normal(0, 0.4, 400) > 0.5
        curve = roc_auc(scores, labels)
        points = np.asarray(curve.points)
        assert np.trapezoid(points[:, 1], points[:, 0]) == pytest.approx(curve.auc)

    def test_auc_field_equals_rank_auc(self):
        rng = np.random.default_rng(9)
        scores = rng.choice([0.0, 0.5, 1.0], 200)
        labels = rng.integers(0, 2, 200).astype(bool)
        assert roc_auc(scores, labels).auc == pytest.approx(rank_auc(scores, labels))

    def test_separable_curve_hits_corner(self):
        curve = roc_auc([0.1, 0.2, 0.8, 0.9], [False, False, True, True])
        assert curve.auc == 1.0
        assert (0.0, 1.0) in [tuple(p) for p in curve.points]

    def test_thresholds_align_with_points(self):
        curve = roc_auc([0.1, 0.4, 0.6, 0.9], [False, True, False, True])
        assert len(curve.thresholds) == len(curve.points)
        # First threshold is above every score so nothing is flagged positive.
        assert curve.thresholds[0] > 0.9


class TestAccuracy:
    def test_threshold_half_on_clean_scores(self):
        acc, matrix = accuracy_at([0.9, 0.8, 0.1, 0.2], [True, True, False, False])
        assert acc == 1.0
        assert matrix == ConfusionMatrix(tp=2, fp=0, tn=2, fn=0)

    def test_matrix_counts_recompute_accuracy(self):
        rng = np.random.default_rng(21)
        scores = rng.random(500)
        labels = rng.integers(0, 2, 500).astype(bool)
        acc, m = accuracy_at(scores, labels, threshold=0.4)
        assert m.tp + m.fp + m.tn + m.fn == 500
        assert acc == (m.tp + m.tn) / 500
        predicted = scores >= 0.4
        assert m.tp == int(np.sum(predicted & labels))
        assert m.fp == int(np.sum(predicted & ~labels))

    def test_empty_input_raises(self):
        with pytest.raises(ValueError):
            accuracy_at([], [])

    def test_length_mismatch_raises(self):
        with pytest.raises(ValueError):
            accuracy_at([0.5], [True, False])


class TestLinkStats:
    def test_perfect_link(self):
        sent = [0xA5, 0x53, 0x00]
        reports = decode_stream(noiseless_scores(sent))
        stats = link_stats(sent, reports)
        assert stats.messages_ok == 3
        assert stats.messages_total == 3
        assert stats.bit_errors == 0
        assert stats.bits_total == 36
        assert stats.message_success_rate == 1.0
        assert stats.ber == 0.0

    def test_no_reports_is_total_loss(self):
        stats = link_stats([1, 2, 3], [])
        assert stats.messages_ok == 0
        assert stats.messages_total == 3
        assert stats.bits_total == 0
        assert stats.message_success_rate == 0.0

    def test_single_flipped_payload_bit(self):
        reports = decode_stream(noiseless_scores([0xA5]))
        stats = link_stats([0xA4], reports)
        assert stats.bit_errors == 1
        assert stats.messages_ok == 0
        assert stats.messages_total == 1

    def test_positional_alignment(self):
        # Reports match sent messages by position, not by content.
        reports = decode_stream(noiseless_scores([5, 6]))
        stats = link_stats([6, 5], reports)
        assert stats.messages_ok == 0

    def test_stats_accumulate(self):
        a = LinkStats(bit_errors=1, bits_total=24, messages_ok=1, messages_total=2)
        b = LinkStats(bit_errors=0, bits_total=12, messages_ok=1, messages_total=1)
        total = a + b
        assert total == LinkStats(
            bit_errors=1, bits_total=36, messages_ok=2, messages_total=3
        )
        assert total.ber == pytest.approx(1 / 36)
        assert total.message_success_rate == pytest.approx(2 / 3)

    def test_zero_denominators(self):
        empty = LinkStats(bit_errors=0, bits_total=0, messages_ok=0, messages_total=0)
        assert empty.ber == 0.0
        assert empty.message_success_rate == 0.0
