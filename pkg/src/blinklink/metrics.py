"""Classifier and link quality metrics: ROC/AUC, thresholded accuracy, BER.

AUC uses the rank statistic (Mann-Whitney with half credit for ties), which
equals the trapezoidal area under the threshold-swept ROC curve.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np
from scipy import stats

from .codec import EmptyInputError, LineCodeConfig, encode_packet

if TYPE_CHECKING:  # pragma: no cover
    from .decoder import DecodeReport


class DegenerateLabelsError(ValueError):
    """ROC analysis needs at least one positive and one negative label."""


@dataclass(frozen=True)
class RocCurve:
    """Threshold-swept operating points plus the area under them."""

    points: np.ndarray        # (k, 2) rows of (false_positive_rate, true_positive_rate)
    thresholds: np.ndarray    # (k,) score cutoffs, +inf first
    auc: float

    def __post_init__(self):
        for name in ("points", "thresholds"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def accuracy(self) -> float:
        return (self.tp + self.tn) / self.total if self.total else 0.0


@dataclass(frozen=True)
class LinkStats:
    """Bit- and message-level outcome counts for one or more link runs."""

    bit_errors: int
    bits_total: int
    messages_ok: int
    messages_total: int

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits_total if self.bits_total else 0.0

    @property
    def message_success_rate(self) -> float:
        return self.messages_ok / self.messages_total if self.messages_total else 0.0

    def __add__(self, other: "LinkStats") -> "LinkStats":
        return LinkStats(
            self.bit_errors + other.bit_errors,
            self.bits_total + other.bits_total,
            self.messages_ok + other.messages_ok,
            self.messages_total + other.messages_total,
        )


def _validate_classes(scores: np.ndarray, labels: np.ndarray) -> None:
    if scores.shape != labels.shape:
        raise ValueError("scores and labels must have equal length")
    if not labels.any() or labels.all():
        raise DegenerateLabelsError("need both positive and negative labels")


def rank_auc(scores: Sequence[float], labels: Sequence[bool]) -> float:
    """AUC via average ranks: P(score_pos > score_neg) + 0.5 P(equal)."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=bool)
    _validate_classes(scores, labels)
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    ranks = stats.rankdata(scores)  # average rank on ties
    u = float(ranks[labels].sum()) - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * n_neg)


def roc_auc(scores: Sequence[float], labels: Sequence[bool]) -> RocCurve:
    """Full ROC curve from a descending threshold sweep, ties grouped."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=bool)
    _validate_classes(scores, labels)
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos

    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_labels = labels[order]
    # Keep one operating point per distinct score: the last index of each group.
    group_end = np.nonzero(np.diff(sorted_scores))[0]
    group_end = np.concatenate([group_end, [scores.size - 1]])

    tp = np.cumsum(sorted_labels)[group_end]
    fp = np.cumsum(~sorted_labels)[group_end]
    fpr = np.concatenate([[0.0], fp / n_neg])
    tpr = np.concatenate([[0.0], tp / n_pos])
    thresholds = np.concatenate([[np.inf], sorted_scores[group_end]])
    return RocCurve(
        points=np.column_stack([fpr, tpr]),
        thresholds=thresholds,
        auc=rank_auc(scores, labels),
    )


def accuracy_at(
    scores: Sequence[float], labels: Sequence[bool], threshold: float = 0.5
) -> tuple[float, ConfusionMatrix]:
    """Binarize at a threshold (score >= threshold -> positive) and count."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=bool)
    if scores.shape != labels.shape:
        raise ValueError("scores and labels must have equal length")
    if scores.size == 0:
        raise EmptyInputError("no scores to evaluate")
    pred = scores >= threshold
    cm = ConfusionMatrix(
        tp=int((pred & labels).sum()),
        fp=int((pred & ~labels).sum()),
        tn=int((~pred & ~labels).sum()),
        fn=int((~pred & labels).sum()),
    )
    return cm.accuracy, cm


def link_stats(
    sent: Sequence[int],
    reports: Sequence["DecodeReport"],
    line_code: LineCodeConfig | None = None,
) -> LinkStats:
    """Score decoded reports against the transmitted payload sequence.

    Alignment is positional: report i is judged against sent[i].  A message
    counts as delivered only by an ok report carrying the exact payload.
    Bit errors compare each aligned report's thresholded bits with the bits
    of the packet that was actually transmitted; unmatched trailing sent
    messages add to messages_total but contribute no bits.
    """
    line_code = line_code or LineCodeConfig()
    bit_errors = 0
    bits_total = 0
    messages_ok = 0
    for i, payload in enumerate(sent):
        if i >= len(reports):
            continue
        report = reports[i]
        expected = encode_packet(payload, line_code).bits
        got = [int(d.value) for d in report.bits]
        n = min(len(expected), len(got))
        bits_total += n
        bit_errors += sum(1 for k in range(n) if expected[k] != got[k])
        if report.status == "ok" and report.payload == payload:
            messages_ok += 1
    return LinkStats(
        bit_errors=bit_errors,
        bits_total=bits_total,
        messages_ok=messages_ok,
        messages_total=len(sent),
    )
