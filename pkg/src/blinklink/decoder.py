"""Bit-clock recovery and packet decoding from per-frame score streams.

The only timing anchor the protocol guarantees is the start flag: an idle
run followed by the start pattern, which always carries a rising edge.  The
decoder slides a {-1,+1} template of that flag over the centered scores
(s -> 2s-1) and accepts the earliest offset whose normalized correlation
clears ``min_correlation``, maximizing locally around it so score noise on
the flag cannot drag the lock forward.  The frames-per-bit estimate is then
refined over a +/-5% grid by re-correlating stretched templates.  Bits are
read by averaging each recovered bit window and thresholding the mean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .channel import FrameScores
from .codec import PAYLOAD_BITS, FramingError, LineCodeConfig, decode_packet

STATUS_OK = "ok"
STATUS_FRAMING_ERROR = "framing_error"
STATUS_LOW_CONFIDENCE = "low_confidence"

# Stretch factors tried when refining frames_per_bit, nominal first so a
# clean lock is never displaced by an equal-scoring stretched match.
_REFINE_SCALES = np.linspace(0.95, 1.05, 21)
_EXACT_MATCH = 1.0 - 1e-9

# The start bits alone must also correlate.  Without this gate a window of
# pure idle can score 0.75 against the whole-packet template: the idle and
# stop sections agree, the payload section does not vote, and the two start
# sections cancel.  Over idle the start bits correlate near 0, at a true
# flag near 1 - 2p, so 0.5 separates them cleanly.
_FLAG_GATE = 0.5

# Once a packet is locked, the next flag sits one cadence ahead give or take
# a frame or two of rate-estimate error, so a small window there may accept
# on a halved correlation floor.  Without this prior, a healthy flag that
# noise happens to dent below min_correlation hands the lock to the nearest
# payload pattern that mimics framing; runs of counting payloads keep such a
# fake grid valid for dozens of packets, corrupting them all.
_TRACK_FLOOR = 0.5
_TRACK_JITTER = 6


class NoSyncError(RuntimeError):
    """No start flag found above the correlation floor."""

    def __init__(self, message: str, best_offset: int | None = None,
                 best_correlation: float | None = None):
        super().__init__(message)
        self.best_offset = best_offset
        self.best_correlation = best_correlation


class TruncatedError(RuntimeError):
    """Stream ends before the packet does; carries the bits read so far."""

    def __init__(self, message: str, decisions: tuple["BitDecision", ...] = ()):
        super().__init__(message)
        self.decisions = decisions


@dataclass(frozen=True)
class DecoderConfig:
    threshold: float = 0.5
    line_code: LineCodeConfig = field(default_factory=LineCodeConfig)
    min_correlation: float = 0.75
    search_step: int = 1

    def __post_init__(self):
        if not 0.0 < self.threshold < 1.0:
            raise ValueError(f"threshold must be in (0,1), got {self.threshold}")
        if not 0.0 < self.min_correlation <= 1.0:
            raise ValueError(
                f"min_correlation must be in (0,1], got {self.min_correlation}"
            )
        if self.search_step < 1:
            raise ValueError(f"search_step must be >= 1, got {self.search_step}")


@dataclass(frozen=True)
class ClockEstimate:
    packet_start: int         # frame index of the first start bit
    frames_per_bit: float
    correlation: float

    def __post_init__(self):
        if self.packet_start < 0:
            raise ValueError("packet_start must be >= 0")
        if not self.frames_per_bit > 0:
            raise ValueError("frames_per_bit must be positive")


@dataclass(frozen=True)
class BitDecision:
    value: bool
    mean_score: float
    confidence: float         # |2*mean_score - 1|


@dataclass(frozen=True)
class DecodeReport:
    payload: int | None
    bits: tuple[BitDecision, ...]
    clock: ClockEstimate | None
    status: str


def _round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


def _sections_to_template(
    lengths: list[float], levels: list[float]
) -> tuple[np.ndarray, np.ndarray]:
    """Expand (real-valued section length, level) pairs into a frame template.

    Cumulative edges are rounded half-up, matching the bit-window slicing,
    so template and windows stay consistent under refinement.  Returns
    (template, rounded section edges).
    """
    edges = np.concatenate([[0.0], np.cumsum(lengths)])
    rounded = np.asarray([_round_half_up(e) for e in edges])
    counts = np.maximum(np.diff(rounded), 0)
    return np.repeat(np.asarray(levels), counts), rounded


@lru_cache(maxsize=512)
def _build_template(
    line_code: LineCodeConfig, scale: float
) -> tuple[np.ndarray, np.ndarray]:
    """Start-flag matched filter (idle run + start pattern) at a stretch factor."""
    fpb = line_code.frames_per_bit * scale
    lengths = [line_code.idle_frames * scale]
    levels = [-1.0]
    for bit in line_code.start_pattern:
        lengths.append(fpb)
        levels.append(1.0 if bit else -1.0)
    return _sections_to_template(lengths, levels)


@lru_cache(maxsize=512)
def _build_refine_template(
    line_code: LineCodeConfig, scale: float
) -> tuple[np.ndarray, np.ndarray]:
    """Whole-packet framing template: payload bits weighted zero.

    The two-bit start flag alone cannot pin the bit rate to better than a
    few percent through score noise; the stop bits and the idle gaps sit 10
    to 14 bit periods out, where a rate error shows up as a visible shift.
    Payload sections carry weight 0 so the template is payload-agnostic.
    """
    fpb = line_code.frames_per_bit * scale
    lengths = [line_code.idle_frames * scale]
    levels = [-1.0]
    for bit in line_code.start_pattern:
        lengths.append(fpb)
        levels.append(1.0 if bit else -1.0)
    lengths.append(PAYLOAD_BITS * fpb)
    levels.append(0.0)
    for bit in line_code.stop_pattern:
        lengths.append(fpb)
        levels.append(1.0 if bit else -1.0)
    lengths.append(line_code.idle_frames * scale)
    levels.append(-1.0)
    return _sections_to_template(lengths, levels)


def start_flag_template(config: DecoderConfig | None = None) -> np.ndarray:
    """The idle + start-pattern matched filter in {-1,+1} frame levels."""
    config = config or DecoderConfig()
    return _build_template(config.line_code, 1.0)[0]


def _correlations(x: np.ndarray, template: np.ndarray, lo: int, hi: int,
                  step: int = 1) -> np.ndarray:
    """Cosine similarity of template against x[o:o+len] for o in range(lo, hi, step).

    Zero-weighted template frames are excluded from both sides of the
    normalization, so they neither vote nor dilute.  Templates are piecewise
    constant, so windowed dots and norms reduce to cumulative-sum
    differences over the constant sections.
    """
    length = template.size
    bounds = np.flatnonzero(np.diff(template)) + 1
    starts = np.concatenate([[0], bounds])
    ends = np.concatenate([bounds, [length]])
    span = x[lo : hi - 1 + length]
    sums = np.concatenate([[0.0], np.cumsum(span)])
    sums_sq = np.concatenate([[0.0], np.cumsum(span * span)])
    rel = np.arange(0, hi - lo, step)
    dots = np.zeros(rel.size)
    norms_sq = np.zeros(rel.size)
    support = 0
    for s, e in zip(starts, ends):
        level = template[s]
        if level == 0.0:
            continue
        dots += level * (sums[rel + e] - sums[rel + s])
        norms_sq += sums_sq[rel + e] - sums_sq[rel + s]
        support += e - s
    norms = np.sqrt(norms_sq * support)
    out = np.zeros(dots.size)
    np.divide(dots, norms, out=out, where=norms > 0)
    return out


def _flag_gates(x: np.ndarray, template: np.ndarray, edges: np.ndarray,
                line_code: LineCodeConfig, lo: int, hi: int,
                step: int = 1) -> np.ndarray:
    """Correlation of only the start-bit sections, per template offset."""
    i0 = int(edges[1])
    i1 = int(edges[1 + len(line_code.start_pattern)])
    return _correlations(x, template[i0:i1], lo + i0, hi + i0, step)


def _scan(x: np.ndarray, base: int, config: DecoderConfig,
          template: np.ndarray, edges: np.ndarray) -> tuple[int, float]:
    """Earliest offset >= base whose correlation clears the floor.

    Scans in growing chunks; after the first crossing, takes the local
    argmax over the next two bit periods so the lock lands on the flag's
    peak rather than its rising shoulder.
    """
    last = x.size - template.size
    if last < base:
        raise NoSyncError("stream shorter than the start-flag template")
    line_code = config.line_code
    step = config.search_step
    peak_span = max(2 * line_code.frames_per_bit, 4)
    best_c, best_o = -2.0, base
    lo, chunk = base, 384
    while lo <= last:
        hi = min(lo + chunk, last + 1)
        c = _correlations(x, template, lo, hi, step)
        if c.size:
            j = int(np.argmax(c))
            if c[j] > best_c:
                best_c, best_o = float(c[j]), lo + j * step
            above = np.flatnonzero(c >= config.min_correlation)
            if above.size:
                gates = _flag_gates(x, template, edges, line_code, lo, hi, step)
                passing = above[gates[above] >= _FLAG_GATE]
                if passing.size:
                    first = lo + int(passing[0]) * step
                    win_hi = min(first + peak_span, last) + 1
                    if step == 1 and win_hi <= hi:
                        window = slice(first - lo, win_hi - lo)
                        local, lgates = c[window], gates[window]
                    else:
                        local = _correlations(x, template, first, win_hi)
                        lgates = _flag_gates(
                            x, template, edges, line_code, first, win_hi
                        )
                    masked = np.where(lgates >= _FLAG_GATE, local, -2.0)
                    k = int(np.argmax(masked))
                    return first + k, float(local[k])
        lo = hi
        chunk = min(chunk * 4, 65536)
    raise NoSyncError(
        f"no start flag with correlation >= {config.min_correlation} "
        f"(best {best_c:.3f} at offset {best_o})",
        best_offset=best_o,
        best_correlation=best_c,
    )


def _refine(x: np.ndarray, peak: int, peak_corr: float, base: int,
            config: DecoderConfig) -> tuple[int, float, float]:
    """Re-correlate stretched templates around the peak; returns
    (packet_start, frames_per_bit, correlation)."""
    line_code = config.line_code
    nominal = float(line_code.frames_per_bit)
    if peak_corr >= _EXACT_MATCH:
        # Perfect lock; no stretch can strictly improve a correlation of 1.
        _, edges = _build_template(line_code, 1.0)
        return peak + int(edges[1]), nominal, peak_corr

    best: tuple[float, int, float] | None = None
    order = np.argsort(np.abs(_REFINE_SCALES - 1.0), kind="stable")
    for scale in _REFINE_SCALES[order]:
        template, edges = _build_refine_template(line_code, float(scale))
        lo = max(base, peak - line_code.frames_per_bit)
        hi = min(peak + line_code.frames_per_bit, x.size - template.size) + 1
        if hi <= lo:
            continue
        c = _correlations(x, template, lo, hi)
        gates = _flag_gates(x, template, edges, line_code, lo, hi)
        c = np.where(gates >= _FLAG_GATE, c, -2.0)
        j = int(np.argmax(c))
        if c[j] > -2.0 and (best is None or c[j] > best[0]):
            best = (float(c[j]), lo + j + int(edges[1]), nominal * float(scale))
    if best is None:
        # Too close to the stream end for the whole-packet template; keep
        # the flag lock as-is.
        _, edges = _build_template(line_code, 1.0)
        return peak + int(edges[1]), nominal, peak_corr
    corr, start, fpb = best
    return start, fpb, corr


def _clamp_correlation(c: float) -> float:
    return min(1.0, max(-1.0, c))


def _recover(x: np.ndarray, base: int, config: DecoderConfig) -> ClockEstimate:
    """Find the next packet starting at or near ``base``.

    The scan matches the whole-packet framing template: payload sequences
    can impersonate the two-bit start flag (any 1,0 after a run of zeros
    does), but nothing inside a packet also reproduces the stop bits and
    the idle gaps at the right distances.  The template leads with the idle
    gap, which is shared with the previous packet's tail, so the scan may
    begin up to one idle length before ``base``.  The final packet of a
    stream cut short mid-packet is rescued by a flag-only scan over the
    tail the long template cannot reach.
    """
    full, full_edges = _build_refine_template(config.line_code, 1.0)
    scan_lo = max(base - int(full_edges[1]), 0)
    try:
        peak, peak_corr = _scan(x, scan_lo, config, full, full_edges)
    except NoSyncError:
        flag, flag_edges = _build_template(config.line_code, 1.0)
        tail_lo = max(scan_lo, x.size - full.size + 1)
        if x.size - flag.size < tail_lo:
            raise
        peak, peak_corr = _scan(x, tail_lo, config, flag, flag_edges)
    start, fpb, corr = _refine(x, peak, peak_corr, scan_lo, config)
    return ClockEstimate(
        packet_start=start,
        frames_per_bit=fpb,
        correlation=_clamp_correlation(corr),
    )


def _track(x: np.ndarray, prev: ClockEstimate,
           config: DecoderConfig) -> ClockEstimate | None:
    """Look for the next flag where the previous lock predicts it.

    Returns None when nothing in the predicted window clears _TRACK_FLOOR,
    in which case the caller falls back to the open scan.
    """
    line_code = config.line_code
    full, edges = _build_refine_template(line_code, 1.0)
    scale = prev.frames_per_bit / line_code.frames_per_bit
    cadence = (line_code.frames_per_packet + line_code.idle_frames) * scale
    predicted = _round_half_up(prev.packet_start + cadence) - int(edges[1])
    lo = max(predicted - _TRACK_JITTER, 0)
    hi = min(predicted + _TRACK_JITTER + 1, x.size - full.size + 1)
    if hi <= lo:
        return None
    c = _correlations(x, full, lo, hi)
    gates = _flag_gates(x, full, edges, line_code, lo, hi)
    masked = np.where(gates >= _FLAG_GATE, c, -2.0)
    j = int(np.argmax(masked))
    if masked[j] < _TRACK_FLOOR:
        return None
    start, fpb, corr = _refine(x, lo + j, float(c[j]), lo, config)
    return ClockEstimate(
        packet_start=start,
        frames_per_bit=fpb,
        correlation=_clamp_correlation(corr),
    )


def recover_clock(scores: FrameScores, config: DecoderConfig | None = None) -> ClockEstimate:
    """Locate the first start flag and estimate the bit clock.

    Raises NoSyncError when nothing in the stream correlates with the
    framing template above ``min_correlation`` (an all-idle stream scores
    0.5).
    """
    config = config or DecoderConfig()
    x = np.asarray(scores.scores) * 2.0 - 1.0
    return _recover(x, 0, config)


def bit_edges(clock: ClockEstimate, line_code: LineCodeConfig) -> np.ndarray:
    """Frame indices of the recovered bit boundaries (packet_bits + 1 edges)."""
    edges = clock.packet_start + clock.frames_per_bit * np.arange(line_code.packet_bits + 1)
    return np.floor(edges + 0.5).astype(np.intp)


def estimate_bits(scores: FrameScores, clock: ClockEstimate,
                  config: DecoderConfig | None = None) -> tuple[BitDecision, ...]:
    """Average each bit window and threshold the mean (ties decide 1).

    Windows cut short by the end of the stream are averaged over whatever
    frames exist; a window with fewer than half a bit period available
    raises TruncatedError carrying the decisions made so far.
    """
    config = config or DecoderConfig()
    values = np.asarray(scores.scores)
    edges = np.clip(bit_edges(clock, config.line_code), 0, values.size)
    counts = np.diff(edges)
    span = values[edges[0] : edges[-1]]
    sums = np.concatenate([[0.0], np.cumsum(span)])[edges - edges[0]]
    decisions: list[BitDecision] = []
    for k, count in enumerate(counts):
        if count < clock.frames_per_bit / 2.0:
            raise TruncatedError(
                f"bit {k} window has {count} of {clock.frames_per_bit:.2f} frames",
                decisions=tuple(decisions),
            )
        mean = min(1.0, max(0.0, (sums[k + 1] - sums[k]) / count))
        decisions.append(
            BitDecision(
                value=bool(mean >= config.threshold),
                mean_score=float(mean),
                confidence=abs(2.0 * mean - 1.0),
            )
        )
    return tuple(decisions)


def decode_stream(scores: FrameScores, config: DecoderConfig | None = None) -> list[DecodeReport]:
    """Decode every packet in the stream, in order.

    Per-packet failures surface as report statuses, never exceptions: a
    framing mismatch emits a framing_error report and re-syncs one bit
    period later; a packet cut off by the stream end emits a low_confidence
    report.  The loop ends when no further start flag is found.
    """
    config = config or DecoderConfig()
    line_code = config.line_code
    x = np.asarray(scores.scores) * 2.0 - 1.0
    reports: list[DecodeReport] = []
    base = 0
    claimed_end = 0
    track: ClockEstimate | None = None
    while True:
        clock = _track(x, track, config) if track is not None else None
        if clock is not None and clock.packet_start < claimed_end:
            clock = None
        if clock is None:
            try:
                clock = _recover(x, base, config)
            except NoSyncError:
                break
            if clock.packet_start < claimed_end:
                # Bit runs inside a payload can reproduce the idle-plus-flag
                # shape, so a sync landing within an already reported packet
                # is the payload masquerading as framing, not a new packet.
                base = max(base, clock.packet_start) + 1
                continue
        reports.extend(_skipped_packet_reports(scores, clock, claimed_end, line_code))
        # Consume with the rate estimate capped at nominal: overshooting
        # into the next idle gap would hide the following start flag, while
        # undershooting merely rescans a few frames.
        stride = min(clock.frames_per_bit, float(line_code.frames_per_bit))
        packet_end = clock.packet_start + _round_half_up(line_code.packet_bits * stride)
        try:
            decisions = estimate_bits(scores, clock, config)
        except TruncatedError as err:
            reports.append(DecodeReport(None, err.decisions, clock, STATUS_LOW_CONFIDENCE))
            break
        claimed_end = packet_end
        try:
            payload = decode_packet([int(d.value) for d in decisions], line_code)
        except FramingError:
            reports.append(DecodeReport(None, decisions, clock, STATUS_FRAMING_ERROR))
            base = clock.packet_start + max(1, _round_half_up(clock.frames_per_bit))
            track = None
            continue
        reports.append(DecodeReport(payload, decisions, clock, STATUS_OK))
        base = packet_end
        track = clock
    return reports


# A gap is suspicious when it spans most of a packet cadence and carries
# clearly more LED-on energy than idle noise would (a packet is on for at
# least 2 of its 12 bits; the calibrated channel misfires on ~5% of frames).
_GAP_CADENCE_FRACTION = 0.75
_GAP_ON_FRACTION = 0.10


def _skipped_packet_reports(
    scores: FrameScores, clock: ClockEstimate, last_end: int,
    line_code: LineCodeConfig,
) -> list[DecodeReport]:
    """Placeholder reports for packets the scan could not lock onto.

    When noise dents a start flag below the correlation floor, the scan
    lands on the next packet instead.  The unclaimed frames between the
    previous packet's end and the newly found flag still show transmit
    energy, so packets that must have been there are reported as
    low_confidence placeholders, keeping reports aligned with stream order.
    """
    cadence = line_code.frames_per_packet + line_code.idle_frames
    flag_pos = max(clock.packet_start - line_code.idle_frames, 0)
    gap = flag_pos - last_end
    if gap < _GAP_CADENCE_FRACTION * cadence:
        return []
    region = scores.scores[last_end:flag_pos]
    if region.size == 0 or float(np.mean(region >= 0.5)) < _GAP_ON_FRACTION:
        return []
    missed = max(1, _round_half_up(gap / cadence))
    return [
        DecodeReport(payload=None, bits=(), clock=None, status=STATUS_LOW_CONFIDENCE)
        for _ in range(missed)
    ]


def decode_single(scores: FrameScores, config: DecoderConfig | None = None) -> DecodeReport:
    """First report of decode_stream, or a no-payload report when the
    stream holds no packet at all."""
    reports = decode_stream(scores, config)
    if reports:
        return reports[0]
    return DecodeReport(payload=None, bits=(), clock=None, status=STATUS_LOW_CONFIDENCE)
