"""FastAPI app exposing the codec, channel, decoder, and experiment harness.

The service is stateless and purely computational: it never touches the
filesystem, so callers (the CLI among them) own all file I/O.  Domain
validation errors surface as HTTP 400 with a detail string; schema
violations are FastAPI's usual 422.
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..channel import (
    CALIBRATION_SEED,
    CalibrationError,
    FrameScores,
    calibrate_score_model,
    evaluate_score_model,
    sample_scores,
)
from ..codec import LedWaveform, encode_message_stream
from ..decoder import DecodeReport, decode_stream
from ..ecc import ecc_encode, ecc_decode
from ..experiments import SweepSpec, run_experiment, run_sweep
from ..formats import report_to_dict
from ..metrics import roc_auc
from . import schemas


def _report_out(report: DecodeReport, ecc: bool) -> schemas.ReportOut:
    out = schemas.ReportOut(**report_to_dict(report))
    if ecc and report.status == "ok":
        result = ecc_decode(report.payload)
        out.datum = result.data
        out.ecc_status = result.status
        out.corrected_bit = result.corrected_bit
    return out


def _prepare_overrides(raw: list[dict] | None) -> tuple[dict, ...] | None:
    """Turn JSON override values into core objects where needed."""
    if raw is None:
        return None
    prepared = []
    for point in raw:
        converted = {}
        for path, value in point.items():
            if path.endswith("score_model") and isinstance(value, dict):
                value = schemas.ScoreModelParams(**value).to_model()
            converted[path] = value
        prepared.append(converted)
    return tuple(prepared)


def create_app() -> FastAPI:
    app = FastAPI(title="blinklink", version=__version__)

    @app.exception_handler(ValueError)
    async def _value_error(request: Request, exc: ValueError) -> JSONResponse:
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(CalibrationError)
    async def _calibration_error(request: Request, exc: CalibrationError) -> JSONResponse:
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/health", response_model=schemas.HealthResponse)
    def health() -> schemas.HealthResponse:
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.post("/encode", response_model=schemas.EncodeResponse)
    def encode(request: schemas.EncodeRequest) -> schemas.EncodeResponse:
        payloads = schemas.payloads_from(request.payload_set)
        if request.ecc:
            payloads = tuple(ecc_encode(value) for value in payloads)
        waveform = encode_message_stream(payloads, request.line_code.to_config())
        return schemas.EncodeResponse(
            fps=waveform.fps, frames=[int(frame) for frame in waveform.frames]
        )

    @app.post("/simulate", response_model=schemas.SimulateResponse)
    def simulate(request: schemas.SimulateRequest) -> schemas.SimulateResponse:
        if any(frame not in (0, 1) for frame in request.frames):
            raise ValueError("frames must be 0 or 1")
        waveform = LedWaveform(np.asarray(request.frames, dtype=bool), request.fps)
        scores = sample_scores(waveform, request.channel.to_config())
        return schemas.SimulateResponse(
            fps=scores.fps,
            scores=[float(s) for s in scores.scores],
            truth=[int(t) for t in scores.truth],
        )

    @app.post("/decode", response_model=schemas.DecodeResponse)
    def decode(request: schemas.DecodeRequest) -> schemas.DecodeResponse:
        frame_scores = FrameScores(
            scores=np.asarray(request.scores, dtype=np.float64), fps=request.fps
        )
        config = request.decoder.to_config(request.line_code.to_config())
        reports = decode_stream(frame_scores, config)
        return schemas.DecodeResponse(
            reports=[_report_out(report, request.ecc) for report in reports]
        )

    @app.post("/experiment", response_model=schemas.ExperimentResponse)
    def experiment(request: schemas.ExperimentRequest) -> schemas.ExperimentResponse:
        result = run_experiment(request.config.to_config())
        reports = None
        if request.include_reports:
            reports = [
                [_report_out(report, False) for report in trial]
                for trial in result.reports
            ]
        return schemas.ExperimentResponse(
            stats=schemas.LinkStatsOut.from_stats(result.stats),
            trials=[schemas.LinkStatsOut.from_stats(s) for s in result.trial_stats],
            reports=reports,
        )

    @app.post("/sweep", response_model=schemas.SweepResponse)
    def sweep(request: schemas.SweepRequest) -> schemas.SweepResponse:
        spec = SweepSpec(
            parameter=request.parameter,
            grid=tuple(request.grid),
            base=request.base.to_config(),
            point_overrides=_prepare_overrides(request.point_overrides),
            output_dir=None,
        )
        points = run_sweep(spec)
        return schemas.SweepResponse(
            points=[
                schemas.SweepPointOut(
                    parameter=point.parameter,
                    value=point.value,
                    stats=schemas.LinkStatsOut.from_stats(point.stats),
                )
                for point in points
            ]
        )

    @app.post("/roc", response_model=schemas.RocResponse)
    def roc(request: schemas.RocRequest) -> schemas.RocResponse:
        curve = roc_auc(request.scores, request.labels)
        return schemas.RocResponse(
            auc=curve.auc,
            points=[(float(fpr), float(tpr)) for fpr, tpr in curve.points],
            thresholds=[
                None if np.isinf(t) else float(t) for t in curve.thresholds
            ],
        )

    @app.post("/calibrate", response_model=schemas.CalibrateResponse)
    def calibrate(request: schemas.CalibrateRequest) -> schemas.CalibrateResponse:
        model = calibrate_score_model(
            request.target_auc,
            request.target_acc,
            request.tol,
            samples_per_class=request.samples_per_class,
        )
        auc, accuracy = evaluate_score_model(
            model, request.samples_per_class, seed=CALIBRATION_SEED
        )
        return schemas.CalibrateResponse(
            kind="beta", a_on=model.a_on, b_on=model.b_on, auc=auc, accuracy=accuracy
        )

    return app


app = create_app()
