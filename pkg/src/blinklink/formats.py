"""Text interchange formats between the pipeline stages.

* waveform text: header line ``fps=<real>``, then one ``0``/``1`` per frame
* score trace CSV: columns ``frame_index,score,truth`` (truth may be empty)
* decode reports: one JSON object per line
* stats / sweep tables: CSV

All writers format floats with repr, so equal inputs produce byte-identical
files on every platform.
"""

from __future__ import annotations

import csv
import json
from typing import IO, Iterable, Sequence

import numpy as np

from .channel import FrameScores
from .codec import LedWaveform
from .decoder import BitDecision, ClockEstimate, DecodeReport
from .metrics import LinkStats


def write_waveform(waveform: LedWaveform, stream: IO[str]) -> None:
    stream.write(f"fps={waveform.fps!r}\n")
    stream.write("".join("1\n" if frame else "0\n" for frame in waveform.frames))


def read_waveform(stream: IO[str]) -> LedWaveform:
    header = stream.readline().strip()
    if not header.startswith("fps="):
        raise ValueError(f"waveform text must start with 'fps=', got {header!r}")
    fps = float(header[4:])
    frames = []
    for line in stream:
        line = line.strip()
        if not line:
            continue
        if line not in ("0", "1"):
            raise ValueError(f"waveform lines must be 0 or 1, got {line!r}")
        frames.append(line == "1")
    return LedWaveform(np.asarray(frames, dtype=bool), fps)


def write_scores_csv(scores: FrameScores, stream: IO[str]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["frame_index", "score", "truth"])
    truth = scores.truth
    for i, score in enumerate(scores.scores):
        writer.writerow([i, repr(float(score)), "" if truth is None else int(truth[i])])


def read_scores_csv(stream: IO[str], fps: float = 30.0) -> FrameScores:
    reader = csv.reader(stream)
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != ["frame_index", "score", "truth"]:
        raise ValueError(f"expected header frame_index,score,truth, got {header!r}")
    values: list[float] = []
    truth: list[bool] = []
    has_truth = None
    for row in reader:
        if not row:
            continue
        if len(row) != 3:
            raise ValueError(f"expected 3 columns, got {row!r}")
        values.append(float(row[1]))
        cell = row[2].strip()
        if has_truth is None:
            has_truth = cell != ""
        if (cell != "") != has_truth:
            raise ValueError("truth column must be filled for all rows or none")
        if has_truth:
            truth.append(bool(int(cell)))
    return FrameScores(
        scores=np.asarray(values, dtype=np.float64),
        fps=fps,
        truth=np.asarray(truth, dtype=bool) if has_truth else None,
    )


def report_to_dict(report: DecodeReport) -> dict:
    clock = report.clock
    return {
        "payload": report.payload,
        "status": report.status,
        "packet_start": None if clock is None else int(clock.packet_start),
        "frames_per_bit": None if clock is None else float(clock.frames_per_bit),
        "correlation": None if clock is None else float(clock.correlation),
        "bits": [
            {"value": bool(d.value), "mean": d.mean_score, "confidence": d.confidence}
            for d in report.bits
        ],
    }


def report_from_dict(data: dict) -> DecodeReport:
    clock = None
    if data.get("packet_start") is not None:
        clock = ClockEstimate(
            packet_start=int(data["packet_start"]),
            frames_per_bit=float(data["frames_per_bit"]),
            correlation=float(data["correlation"]),
        )
    bits = tuple(
        BitDecision(
            value=bool(b["value"]),
            mean_score=float(b["mean"]),
            confidence=float(b["confidence"]),
        )
        for b in data["bits"]
    )
    payload = data.get("payload")
    return DecodeReport(
        payload=None if payload is None else int(payload),
        bits=bits,
        clock=clock,
        status=str(data["status"]),
    )


def write_reports_jsonl(
    reports: Iterable[DecodeReport | dict], stream: IO[str]
) -> None:
    for report in reports:
        record = report if isinstance(report, dict) else report_to_dict(report)
        stream.write(json.dumps(record) + "\n")


def read_reports_jsonl(stream: IO[str]) -> list[dict]:
    return [json.loads(line) for line in stream if line.strip()]


_STATS_COLUMNS = [
    "trial", "bit_errors", "bits_total", "ber",
    "messages_ok", "messages_total", "message_success_rate",
]


def _stats_row(label: str | int, stats: LinkStats) -> list:
    return [
        label, stats.bit_errors, stats.bits_total, repr(stats.ber),
        stats.messages_ok, stats.messages_total, repr(stats.message_success_rate),
    ]


def write_stats_csv(
    trial_stats: Sequence[LinkStats], aggregate: LinkStats, stream: IO[str]
) -> None:
    """Per-trial rows plus a final row labeled ``all``."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(_STATS_COLUMNS)
    for trial, stats in enumerate(trial_stats):
        writer.writerow(_stats_row(trial, stats))
    writer.writerow(_stats_row("all", aggregate))


_SWEEP_COLUMNS = [
    "parameter", "value", "bit_errors", "bits_total", "ber",
    "messages_ok", "messages_total", "message_success_rate",
]


def write_sweep_csv(points: Sequence, stream: IO[str]) -> None:
    """One row per sweep point; ``points`` holds SweepPoint-like objects."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(_SWEEP_COLUMNS)
    for point in points:
        stats = point.stats
        writer.writerow([
            point.parameter, repr(float(point.value)),
            stats.bit_errors, stats.bits_total, repr(stats.ber),
            stats.messages_ok, stats.messages_total, repr(stats.message_success_rate),
        ])


def write_roc_csv(curve, stream: IO[str]) -> None:
    """Columns fpr,tpr,threshold; the first threshold is inf."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["fpr", "tpr", "threshold"])
    for (fpr, tpr), threshold in zip(curve.points, curve.thresholds):
        writer.writerow([repr(float(fpr)), repr(float(tpr)), repr(float(threshold))])
