"""blinklink: LED-blink optical link toolkit.

Encode byte messages into self-clocking blink waveforms, push them through
a calibrated surrogate of a per-frame LED classifier, recover the bit clock
on the receive side, and measure the link: classifier AUC/accuracy, bit and
message error rates, parameter sweeps.  A FastAPI service wraps the core
and the ``blinklink`` CLI drives it.
"""

__version__ = "0.1.0"

from .channel import (
    CALIBRATION_SEED,
    BetaModel,
    CalibrationError,
    ChannelConfig,
    FlipModel,
    FrameScores,
    ScoreModel,
    apply_timing,
    calibrate_score_model,
    evaluate_score_model,
    resample_frames,
    sample_scores,
)
from .codec import (
    PACKET_BITS,
    PAYLOAD_BITS,
    SOS_PAYLOAD,
    EmptyInputError,
    FramingError,
    LedWaveform,
    LengthError,
    LineCodeConfig,
    LineCodeError,
    Packet,
    bits_to_byte,
    byte_to_bits,
    decode_packet,
    encode_message_stream,
    encode_packet,
    packet_to_waveform,
)
from .decoder import (
    STATUS_FRAMING_ERROR,
    STATUS_LOW_CONFIDENCE,
    STATUS_OK,
    BitDecision,
    ClockEstimate,
    DecodeReport,
    DecoderConfig,
    NoSyncError,
    TruncatedError,
    decode_single,
    decode_stream,
    estimate_bits,
    recover_clock,
    start_flag_template,
)
from .ecc import (
    STATUS_CLEAN,
    STATUS_CORRECTED,
    STATUS_UNCORRECTABLE,
    EccResult,
    ecc_decode,
    ecc_encode,
)
from .experiments import (
    ExperimentConfig,
    ExperimentResult,
    SweepPoint,
    SweepSpec,
    override_config,
    resolve_payload_set,
    run_experiment,
    run_sweep,
)
from .metrics import (
    ConfusionMatrix,
    DegenerateLabelsError,
    LinkStats,
    RocCurve,
    accuracy_at,
    link_stats,
    rank_auc,
    roc_auc,
)
from .tracefig import emit_trace

__all__ = [
    "__version__",
    # codec
    "LineCodeConfig", "Packet", "LedWaveform", "SOS_PAYLOAD", "PACKET_BITS",
    "PAYLOAD_BITS", "encode_packet", "decode_packet", "packet_to_waveform",
    "encode_message_stream", "byte_to_bits", "bits_to_byte",
    "LineCodeError", "FramingError", "LengthError", "EmptyInputError",
    # channel
    "FrameScores", "FlipModel", "BetaModel", "ScoreModel", "ChannelConfig",
    "apply_timing", "sample_scores", "resample_frames",
    "calibrate_score_model", "evaluate_score_model",
    "CalibrationError", "CALIBRATION_SEED",
    # decoder
    "DecoderConfig", "ClockEstimate", "BitDecision", "DecodeReport",
    "recover_clock", "estimate_bits", "decode_stream", "decode_single",
    "start_flag_template", "NoSyncError", "TruncatedError",
    "STATUS_OK", "STATUS_FRAMING_ERROR", "STATUS_LOW_CONFIDENCE",
    # ecc
    "EccResult", "ecc_encode", "ecc_decode",
    "STATUS_CLEAN", "STATUS_CORRECTED", "STATUS_UNCORRECTABLE",
    # metrics
    "RocCurve", "ConfusionMatrix", "LinkStats", "roc_auc", "rank_auc",
    "accuracy_at", "link_stats", "DegenerateLabelsError",
    # experiments
    "ExperimentConfig", "ExperimentResult", "SweepSpec", "SweepPoint",
    "run_experiment", "run_sweep", "resolve_payload_set", "override_config",
    # trace
    "emit_trace",
]
