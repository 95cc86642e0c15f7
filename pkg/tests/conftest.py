"""Shared fixtures and helpers for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from blinklink import (
    ChannelConfig,
    FlipModel,
    FrameScores,
    LedWaveform,
    LineCodeConfig,
    encode_message_stream,
    sample_scores,
)


def noiseless_scores(payloads, line_code: LineCodeConfig | None = None) -> FrameScores:
    """Encode payloads and pass them through a zero-noise channel."""
    waveform = encode_message_stream(payloads, line_code)
    channel = ChannelConfig(score_model=FlipModel(p=0.0), seed=0)
    return sample_scores(waveform, channel)


def scores_from_frames(frames, fps: float = 30.0) -> FrameScores:
    """Wrap a raw 0/1 frame sequence as a score stream (scores == frames)."""
    arr = np.asarray(frames, dtype=float)
    return FrameScores(scores=arr, fps=fps, truth=arr >= 0.5)


@pytest.fixture
def line_code() -> LineCodeConfig:
    return LineCodeConfig()


@pytest.fixture
def clean_single_packet() -> FrameScores:
    return noiseless_scores([0xA5])
