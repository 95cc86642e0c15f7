"""SVG rendering of one decoded packet: score dots over bit-clock bands.

The figure shows every per-frame score as a dot (the raw classifier
output), vertical bands at the recovered bit boundaries (the bit clock),
and per-bit mean ticks; dots and ticks are colored by bit role (start /
payload / stop).  Plain SVG text is emitted directly so output is
deterministic and dependency-free.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .channel import FrameScores
from .codec import LineCodeConfig
from .decoder import DecodeReport, _round_half_up

ROLE_COLORS = {"start": "#2ca02c", "payload": "#1f77b4", "stop": "#d62728"}
BAND_FILLS = ("#ffffff", "#e8e8e8")

_WIDTH, _HEIGHT = 900, 340
_LEFT, _RIGHT, _TOP, _BOTTOM = 56, 16, 40, 36


def _bit_role(index: int, line_code: LineCodeConfig) -> str:
    if index < len(line_code.start_pattern):
        return "start"
    if index < len(line_code.start_pattern) + 8:
        return "payload"
    return "stop"


def emit_trace(
    report: DecodeReport,
    scores: FrameScores,
    path: str | Path,
    line_code: LineCodeConfig | None = None,
) -> None:
    """Write the packet trace for one report to an SVG file.

    The report must carry a clock estimate and at least one bit decision;
    a report that never synchronized cannot be drawn and raises ValueError
    before any file is touched.
    """
    if report.clock is None:
        raise ValueError("report has no clock estimate; nothing to draw")
    if not report.bits:
        raise ValueError("report has no bit decisions; nothing to draw")
    line_code = line_code or LineCodeConfig()

    clock = report.clock
    n_bits = len(report.bits)
    edges = np.asarray(
        [
            _round_half_up(clock.packet_start + clock.frames_per_bit * k)
            for k in range(n_bits + 1)
        ],
        dtype=np.intp,
    )
    lo_frame, hi_frame = int(edges[0]), min(int(edges[-1]), len(scores))

    plot_w = _WIDTH - _LEFT - _RIGHT
    plot_h = _HEIGHT - _TOP - _BOTTOM
    span = max(hi_frame - lo_frame, 1)

    def x_of(frame: float) -> float:
        return _LEFT + (frame - lo_frame) / span * plot_w

    def y_of(score: float) -> float:
        return _TOP + (1.0 - score) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="#ffffff"/>',
    ]

    for k in range(n_bits):
        x0, x1 = x_of(edges[k]), x_of(edges[k + 1])
        parts.append(
            f'<rect class="band" x="{x0:.2f}" y="{_TOP}" width="{x1 - x0:.2f}" '
            f'height="{plot_h}" fill="{BAND_FILLS[k % 2]}"/>'
        )

    for level in (0.0, 0.5, 1.0):
        y = y_of(level)
        dash = ' stroke-dasharray="4 3"' if level == 0.5 else ""
        parts.append(
            f'<line class="grid" x1="{_LEFT}" y1="{y:.2f}" x2="{_LEFT + plot_w}" '
            f'y2="{y:.2f}" stroke="#999999" stroke-width="1"{dash}/>'
        )
        parts.append(
            f'<text x="{_LEFT - 8}" y="{y + 4:.2f}" text-anchor="end" '
            f'font-size="12" fill="#333333">{level:g}</text>'
        )

    for k, decision in enumerate(report.bits):
        color = ROLE_COLORS[_bit_role(k, line_code)]
        x0, x1 = x_of(edges[k]), x_of(edges[k + 1])
        y = y_of(decision.mean_score)
        parts.append(
            f'<line class="bitmean" x1="{x0:.2f}" y1="{y:.2f}" x2="{x1:.2f}" '
            f'y2="{y:.2f}" stroke="{color}" stroke-width="2"/>'
        )
        parts.append(
            f'<text class="bitvalue" x="{(x0 + x1) / 2:.2f}" y="{_TOP - 8}" '
            f'text-anchor="middle" font-size="13" fill="{color}">'
            f"{int(decision.value)}</text>"
        )

    values = scores.scores
    for frame in range(lo_frame, hi_frame):
        band = int(np.searchsorted(edges, frame, side="right")) - 1
        band = min(max(band, 0), n_bits - 1)
        color = ROLE_COLORS[_bit_role(band, line_code)]
        parts.append(
            f'<circle class="dot" cx="{x_of(frame + 0.5):.2f}" '
            f'cy="{y_of(float(values[frame])):.2f}" r="2.5" fill="{color}"/>'
        )

    payload = "-" if report.payload is None else f"0x{report.payload:02X}"
    parts.append(
        f'<text x="{_LEFT}" y="20" font-size="14" fill="#111111">'
        f"payload={payload} status={report.status} "
        f"corr={clock.correlation:.3f} frames/bit={clock.frames_per_bit:.2f}</text>"
    )
    for frame in (lo_frame, hi_frame):
        parts.append(
            f'<text x="{x_of(frame):.2f}" y="{_HEIGHT - 12}" text-anchor="middle" '
            f'font-size="12" fill="#333333">{frame}</text>'
        )
    parts.append("</svg>")

    Path(path).write_text("\n".join(parts) + "\n", encoding="utf-8")
