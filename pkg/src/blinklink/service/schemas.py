"""Request/response models; the JSON mirrors the experiment config files.

Every config-like model has a ``to_config`` bridge into the core
dataclasses, so validation lives here and the core stays pydantic-free.
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..channel import BetaModel, ChannelConfig, FlipModel, ScoreModel
from ..codec import LineCodeConfig
from ..decoder import DecoderConfig
from ..experiments import ExperimentConfig, resolve_payload_set
from ..metrics import LinkStats


class _Params(BaseModel):
    model_config = ConfigDict(extra="forbid")


class LineCodeParams(_Params):
    start_pattern: list[int] = [1, 0]
    stop_pattern: list[int] = [0, 1]
    bit_order: Literal["msb", "lsb"] = "msb"
    frames_per_bit: int = Field(default=12, ge=1)
    fps: float = Field(default=30.0, gt=0)
    idle_frames: int = Field(default=24, ge=0)

    def to_config(self) -> LineCodeConfig:
        return LineCodeConfig(
            start_pattern=tuple(self.start_pattern),
            stop_pattern=tuple(self.stop_pattern),
            bit_order=self.bit_order,
            frames_per_bit=self.frames_per_bit,
            fps=self.fps,
            idle_frames=self.idle_frames,
        )


class ScoreModelParams(_Params):
    kind: Literal["flip", "beta"]
    p: float | None = Field(default=None, ge=0.0, le=1.0)
    a_on: float | None = Field(default=None, gt=0.0)
    b_on: float | None = Field(default=None, gt=0.0)

    @model_validator(mode="after")
    def _fields_match_kind(self):
        if self.kind == "flip":
            if self.p is None or self.a_on is not None or self.b_on is not None:
                raise ValueError("flip model takes exactly the field p")
        else:
            if self.a_on is None or self.b_on is None or self.p is not None:
                raise ValueError("beta model takes exactly the fields a_on, b_on")
        return self

    def to_model(self) -> ScoreModel:
        if self.kind == "flip":
            return FlipModel(p=self.p)
        return BetaModel(a_on=self.a_on, b_on=self.b_on)


class ChannelParams(_Params):
    score_model: ScoreModelParams
    drift: float = Field(default=1.0, ge=0.9, le=1.1)
    drop_prob: float = Field(default=0.0, ge=0.0, lt=1.0)
    lead_offset: int = Field(default=0, ge=0)
    seed: int = Field(default=0, ge=0, lt=2**64)

    def to_config(self) -> ChannelConfig:
        return ChannelConfig(
            score_model=self.score_model.to_model(),
            drift=self.drift,
            drop_prob=self.drop_prob,
            lead_offset=self.lead_offset,
            seed=self.seed,
        )


class DecoderParams(_Params):
    threshold: float = Field(default=0.5, gt=0.0, lt=1.0)
    min_correlation: float = Field(default=0.75, gt=0.0, le=1.0)
    search_step: int = Field(default=1, ge=1)

    def to_config(self, line_code: LineCodeConfig) -> DecoderConfig:
        return DecoderConfig(
            threshold=self.threshold,
            line_code=line_code,
            min_correlation=self.min_correlation,
            search_step=self.search_step,
        )


class SosCount(_Params):
    sos: int = Field(ge=1)


PayloadSet = Literal["range"] | list[int] | SosCount


def payloads_from(payload_set: PayloadSet) -> tuple[int, ...]:
    if isinstance(payload_set, SosCount):
        return resolve_payload_set({"sos": payload_set.sos})
    return resolve_payload_set(payload_set)


class ExperimentParams(_Params):
    channel: ChannelParams
    payload_set: PayloadSet
    line_code: LineCodeParams = LineCodeParams()
    decoder: DecoderParams = DecoderParams()
    trials: int = Field(default=1, ge=1)

    def to_config(self) -> ExperimentConfig:
        line_code = self.line_code.to_config()
        return ExperimentConfig(
            channel=self.channel.to_config(),
            payloads=payloads_from(self.payload_set),
            line_code=line_code,
            decoder=self.decoder.to_config(line_code),
            trials=self.trials,
            output_dir=None,
        )


class BitOut(BaseModel):
    value: bool
    mean: float
    confidence: float


class ReportOut(BaseModel):
    payload: int | None
    status: str
    packet_start: int | None
    frames_per_bit: float | None
    correlation: float | None
    bits: list[BitOut]
    datum: int | None = None
    ecc_status: str | None = None
    corrected_bit: int | None = None


class LinkStatsOut(BaseModel):
    bit_errors: int
    bits_total: int
    ber: float
    messages_ok: int
    messages_total: int
    message_success_rate: float

    @classmethod
    def from_stats(cls, stats: LinkStats) -> "LinkStatsOut":
        return cls(
            bit_errors=stats.bit_errors,
            bits_total=stats.bits_total,
            ber=stats.ber,
            messages_ok=stats.messages_ok,
            messages_total=stats.messages_total,
            message_success_rate=stats.message_success_rate,
        )


class EncodeRequest(_Params):
    payload_set: PayloadSet
    line_code: LineCodeParams = LineCodeParams()
    ecc: bool = False


class EncodeResponse(BaseModel):
    fps: float
    frames: list[int]


class SimulateRequest(_Params):
    frames: list[int]
    fps: float = Field(default=30.0, gt=0)
    channel: ChannelParams


class SimulateResponse(BaseModel):
    fps: float
    scores: list[float]
    truth: list[int]


class DecodeRequest(_Params):
    scores: list[float]
    fps: float = Field(default=30.0, gt=0)
    line_code: LineCodeParams = LineCodeParams()
    decoder: DecoderParams = DecoderParams()
    ecc: bool = False


class DecodeResponse(BaseModel):
    reports: list[ReportOut]


class ExperimentRequest(_Params):
    config: ExperimentParams
    include_reports: bool = False


class ExperimentResponse(BaseModel):
    stats: LinkStatsOut
    trials: list[LinkStatsOut]
    reports: list[list[ReportOut]] | None = None


class SweepRequest(_Params):
    parameter: Literal["flip_p", "drift", "drop_prob"]
    grid: list[float]
    base: ExperimentParams
    point_overrides: list[dict] | None = None


class SweepPointOut(BaseModel):
    parameter: str
    value: float
    stats: LinkStatsOut


class SweepResponse(BaseModel):
    points: list[SweepPointOut]


class RocRequest(_Params):
    scores: list[float]
    labels: list[bool]


class RocResponse(BaseModel):
    auc: float
    points: list[tuple[float, float]]
    thresholds: list[float | None]  # None stands for the leading +inf cutoff


class CalibrateRequest(_Params):
    target_auc: float = Field(gt=0.5, lt=1.0)
    target_acc: float = Field(gt=0.5, lt=1.0)
    tol: float = Field(default=0.005, gt=0.0)
    samples_per_class: int = Field(default=100_000, ge=100_000)


class CalibrateResponse(BaseModel):
    kind: Literal["beta"]
    a_on: float
    b_on: float
    auc: float
    accuracy: float


class HealthResponse(BaseModel):
    status: Literal["ok"]
    version: str
