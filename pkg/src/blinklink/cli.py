"""Command-line front end; a thin client over the HTTP service.

Every subcommand builds a JSON request, posts it to the service (an
in-process app by default, or a remote one with --server), and handles the
file side: reading waveform/score inputs, writing CSV/JSONL/SVG outputs.
No decoding or simulation happens in this module.

Exit codes: 0 success, 1 validation or usage error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import sys
import warnings
from pathlib import Path
from typing import IO, Iterator

import httpx
import numpy as np

from . import __version__
from .channel import FrameScores
from .codec import LedWaveform, LineCodeConfig
from .experiments import ExperimentResult, SweepPoint, write_experiment_files
from .formats import (
    read_scores_csv,
    read_waveform,
    report_from_dict,
    report_to_dict,
    write_reports_jsonl,
    write_roc_csv,
    write_scores_csv,
    write_sweep_csv,
    write_waveform,
)
from .metrics import LinkStats, RocCurve
from .tracefig import emit_trace

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_VALIDATION):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; this CLI reserves 2 for I/O.
    def error(self, message):
        self.print_usage(sys.stderr)
        raise CliError(f"{self.prog}: {message}")


class ServiceClient:
    """POSTs to a remote server, or straight into the app in-process."""

    def __init__(self, server: str | None = None):
        if server:
            self._client = httpx.Client(base_url=server, timeout=None)
        else:
            with warnings.catch_warnings():
                # The bundled test client import warns about its own
                # httpx pin; irrelevant to in-process use.
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient

            from .service import create_app

            self._client = TestClient(create_app())

    def post(self, path: str, payload: dict) -> dict:
        response = self._client.post(path, json=payload)
        if response.status_code >= 400:
            try:
                detail = response.json().get("detail", response.text)
            except ValueError:
                detail = response.text
            raise CliError(f"{path}: {detail}")
        return response.json()

    def close(self) -> None:
        self._client.close()


@contextlib.contextmanager
def _open_in(path: str | None) -> Iterator[IO[str]]:
    if path in (None, "-"):
        yield sys.stdin
    else:
        with open(path, "r", encoding="utf-8") as fp:
            yield fp


@contextlib.contextmanager
def _open_out(path: str | None) -> Iterator[IO[str]]:
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fp:
            yield fp


def _parse_set(expr: str) -> tuple[list[str], object]:
    path, sep, raw = expr.partition("=")
    if not sep or not path:
        raise CliError(f"--set needs dotted.path=value, got {expr!r}")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw  # unquoted strings pass through as-is
    return path.split("."), value


def _load_config(args) -> dict:
    config: dict = {}
    if getattr(args, "config", None):
        with _open_in(args.config) as fp:
            try:
                config = json.load(fp)
            except json.JSONDecodeError as err:
                raise CliError(f"config is not valid JSON: {err}")
        if not isinstance(config, dict):
            raise CliError("config must be a JSON object")
    for expr in getattr(args, "set", None) or []:
        parts, value = _parse_set(expr)
        node = config
        for key in parts[:-1]:
            node = node.setdefault(key, {})
            if not isinstance(node, dict):
                raise CliError(f"--set path {'.'.join(parts)} crosses a non-object")
        node[parts[-1]] = value
    return config


def _payload_int(text: str) -> int:
    try:
        return int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")


def _line_code_config(config: dict) -> LineCodeConfig:
    section = dict(config.get("line_code", {}))
    if "start_pattern" in section:
        section["start_pattern"] = tuple(section["start_pattern"])
    if "stop_pattern" in section:
        section["stop_pattern"] = tuple(section["stop_pattern"])
    return LineCodeConfig(**section)


def _cmd_encode(args, client: ServiceClient) -> int:
    config = _load_config(args)
    if args.payload:
        payload_set: object = list(args.payload)
    elif args.all:
        payload_set = "range"
    elif args.sos:
        payload_set = {"sos": args.sos}
    else:
        payload_set = config.get("payload_set")
    if payload_set is None:
        raise CliError("no payloads: use --payload/--all/--sos or a config payload_set")
    request = {
        "payload_set": payload_set,
        "line_code": config.get("line_code", {}),
        "ecc": args.ecc,
    }
    data = client.post("/encode", request)
    waveform = LedWaveform(np.asarray(data["frames"], dtype=bool), data["fps"])
    with _open_out(args.output) as fp:
        write_waveform(waveform, fp)
    return EXIT_OK


def _channel_section(args, config: dict) -> dict:
    channel = dict(config.get("channel", {}))
    if args.flip_p is not None and args.beta is not None:
        raise CliError("--flip-p and --beta are mutually exclusive")
    if args.flip_p is not None:
        channel["score_model"] = {"kind": "flip", "p": args.flip_p}
    elif args.beta is not None:
        channel["score_model"] = {"kind": "beta", "a_on": args.beta[0], "b_on": args.beta[1]}
    channel.setdefault("score_model", {"kind": "flip", "p": 0.0})
    for name in ("drift", "drop_prob", "lead_offset", "seed"):
        value = getattr(args, name)
        if value is not None:
            channel[name] = value
    return channel


def _cmd_simulate(args, client: ServiceClient) -> int:
    config = _load_config(args)
    with _open_in(args.input) as fp:
        waveform = read_waveform(fp)
    request = {
        "frames": [int(frame) for frame in waveform.frames],
        "fps": waveform.fps,
        "channel": _channel_section(args, config),
    }
    data = client.post("/simulate", request)
    scores = FrameScores(
        scores=np.asarray(data["scores"], dtype=np.float64),
        fps=data["fps"],
        truth=np.asarray(data["truth"], dtype=bool),
    )
    with _open_out(args.output) as fp:
        write_scores_csv(scores, fp)
    return EXIT_OK


def _cmd_decode(args, client: ServiceClient) -> int:
    config = _load_config(args)
    line_code = _line_code_config(config)
    with _open_in(args.input) as fp:
        scores = read_scores_csv(fp, fps=line_code.fps)
    request = {
        "scores": [float(s) for s in scores.scores],
        "fps": scores.fps,
        "line_code": config.get("line_code", {}),
        "decoder": config.get("decoder", {}),
        "ecc": args.ecc,
    }
    data = client.post("/decode", request)

    rows = []
    for raw in data["reports"]:
        row = report_to_dict(report_from_dict(raw))
        if args.ecc:
            row["datum"] = raw.get("datum")
            row["ecc_status"] = raw.get("ecc_status")
            row["corrected_bit"] = raw.get("corrected_bit")
        rows.append(row)
    with _open_out(args.output) as fp:
        write_reports_jsonl(rows, fp)

    if args.trace_svg:
        synced = next((r for r in data["reports"] if r["packet_start"] is not None), None)
        if synced is None:
            raise CliError("no synchronized report; cannot render a trace")
        emit_trace(report_from_dict(synced), scores, args.trace_svg, line_code)
    return EXIT_OK


def _link_stats_from(data: dict) -> LinkStats:
    return LinkStats(
        bit_errors=data["bit_errors"],
        bits_total=data["bits_total"],
        messages_ok=data["messages_ok"],
        messages_total=data["messages_total"],
    )


def _experiment_request(config: dict) -> dict:
    sections = ("line_code", "channel", "decoder", "payload_set", "trials")
    missing = [k for k in ("channel", "payload_set") if k not in config]
    if missing:
        raise CliError(f"experiment config lacks required sections: {', '.join(missing)}")
    return {key: config[key] for key in sections if key in config}


def _cmd_experiment(args, client: ServiceClient) -> int:
    config = _load_config(args)
    if not config:
        raise CliError("experiment needs --config (and/or --set) describing the run")
    output_dir = args.output_dir or config.get("output_dir")
    request = {"config": _experiment_request(config), "include_reports": True}
    data = client.post("/experiment", request)

    stats = _link_stats_from(data["stats"])
    result = ExperimentResult(
        stats=stats,
        trial_stats=tuple(_link_stats_from(t) for t in data["trials"]),
        reports=tuple(
            tuple(report_from_dict(raw) for raw in trial) for trial in data["reports"]
        ),
    )
    if output_dir:
        write_experiment_files(result, Path(output_dir))
    print(
        f"messages {stats.messages_ok}/{stats.messages_total} "
        f"success={stats.message_success_rate!r} ber={stats.ber!r}"
    )
    return EXIT_OK


def _cmd_sweep(args, client: ServiceClient) -> int:
    config = _load_config(args)
    for key in ("parameter", "grid", "base"):
        if key not in config:
            raise CliError(f"sweep config lacks required key: {key}")
    output_dir = args.output_dir or config.get("output_dir")
    request = {
        "parameter": config["parameter"],
        "grid": config["grid"],
        "base": _experiment_request(config["base"]),
    }
    if config.get("point_overrides") is not None:
        request["point_overrides"] = config["point_overrides"]
    data = client.post("/sweep", request)
    points = [
        SweepPoint(
            parameter=raw["parameter"],
            value=raw["value"],
            stats=_link_stats_from(raw["stats"]),
        )
        for raw in data["points"]
    ]
    if output_dir:
        directory = Path(output_dir)
        directory.mkdir(parents=True, exist_ok=True)
        with (directory / "sweep.csv").open("w", encoding="utf-8", newline="") as fp:
            write_sweep_csv(points, fp)
    else:
        write_sweep_csv(points, sys.stdout)
    return EXIT_OK


def _cmd_roc(args, client: ServiceClient) -> int:
    with _open_in(args.input) as fp:
        scores = read_scores_csv(fp)
    if scores.truth is None:
        raise CliError("roc needs the truth column filled in the score CSV")
    data = client.post(
        "/roc",
        {
            "scores": [float(s) for s in scores.scores],
            "labels": [bool(t) for t in scores.truth],
        },
    )
    print(f"auc={data['auc']!r}")
    curve = RocCurve(
        points=np.asarray(data["points"], dtype=np.float64),
        thresholds=np.asarray(
            [np.inf if t is None else t for t in data["thresholds"]], dtype=np.float64
        ),
        auc=data["auc"],
    )
    with _open_out(args.output) as fp:
        write_roc_csv(curve, fp)
    return EXIT_OK


def _cmd_calibrate(args, client: ServiceClient) -> int:
    request = {
        "target_auc": args.auc,
        "target_acc": args.acc,
        "tol": args.tol,
        "samples_per_class": args.samples,
    }
    data = client.post("/calibrate", request)
    print(json.dumps({"kind": "beta", "a_on": data["a_on"], "b_on": data["b_on"]}))
    print(f"auc={data['auc']!r} accuracy={data['accuracy']!r}", file=sys.stderr)
    return EXIT_OK


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="FILE", help="JSON config file")
    parser.add_argument(
        "--set",
        metavar="PATH=VALUE",
        action="append",
        help="override a config field by dotted path (value parsed as JSON)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="blinklink", description=__doc__)
    parser.add_argument("--version", action="version", version=f"blinklink {__version__}")
    parser.add_argument("--server", metavar="URL", help="use a remote service instead of in-process")
    commands = parser.add_subparsers(dest="command", required=True)

    encode = commands.add_parser("encode", help="payload bytes to LED waveform text")
    _add_config_flags(encode)
    encode.add_argument("--payload", type=_payload_int, action="append",
                        help="payload byte (repeatable; 0x.. accepted)")
    encode.add_argument("--all", action="store_true", help="all payloads 0x00..0xFF")
    encode.add_argument("--sos", type=int, metavar="N", help="the SOS byte, N times")
    encode.add_argument("--ecc", action="store_true",
                        help="treat payloads as 4-bit data, SECDED-encoded")
    encode.add_argument("-o", "--output", metavar="FILE", help="waveform text (default stdout)")

    simulate = commands.add_parser("simulate", help="waveform text to score CSV")
    _add_config_flags(simulate)
    simulate.add_argument("-i", "--input", metavar="FILE", help="waveform text (default stdin)")
    simulate.add_argument("--flip-p", type=float, help="flip score model probability")
    simulate.add_argument("--beta", type=float, nargs=2, metavar=("A_ON", "B_ON"),
                          help="beta score model parameters")
    simulate.add_argument("--drift", type=float, help="frames-per-bit multiplier")
    simulate.add_argument("--drop-prob", dest="drop_prob", type=float,
                          help="per-frame drop probability")
    simulate.add_argument("--lead-offset", dest="lead_offset", type=int,
                          help="idle frames prepended")
    simulate.add_argument("--seed", type=int, help="channel seed")
    simulate.add_argument("-o", "--output", metavar="FILE", help="score CSV (default stdout)")

    decode = commands.add_parser("decode", help="score CSV to decode reports JSONL")
    _add_config_flags(decode)
    decode.add_argument("-i", "--input", metavar="FILE", help="score CSV (default stdin)")
    decode.add_argument("--ecc", action="store_true",
                        help="decode payload bytes as SECDED codewords")
    decode.add_argument("--trace-svg", metavar="FILE",
                        help="render the first synchronized packet as SVG")
    decode.add_argument("-o", "--output", metavar="FILE", help="reports JSONL (default stdout)")

    experiment = commands.add_parser("experiment", help="run a configured link experiment")
    _add_config_flags(experiment)
    experiment.add_argument("-o", "--output-dir", metavar="DIR",
                            help="where stats.csv and reports.jsonl go")

    sweep = commands.add_parser("sweep", help="run experiments over a parameter grid")
    _add_config_flags(sweep)
    sweep.add_argument("-o", "--output-dir", metavar="DIR", help="where sweep.csv goes")

    roc = commands.add_parser("roc", help="ROC curve and AUC from a score CSV with truth")
    roc.add_argument("-i", "--input", metavar="FILE", help="score CSV (default stdin)")
    roc.add_argument("-o", "--output", metavar="FILE", help="curve points CSV (default stdout)")

    calibrate = commands.add_parser("calibrate", help="fit a beta score model to AUC/accuracy targets")
    calibrate.add_argument("--auc", type=float, required=True, help="target AUC")
    calibrate.add_argument("--acc", type=float, required=True, help="target accuracy at 0.5")
    calibrate.add_argument("--tol", type=float, default=0.005, help="tolerance (default 0.005)")
    calibrate.add_argument("--samples", type=int, default=100_000,
                           help="samples per class (default 100000)")

    return parser


_HANDLERS = {
    "encode": _cmd_encode,
    "simulate": _cmd_simulate,
    "decode": _cmd_decode,
    "experiment": _cmd_experiment,
    "sweep": _cmd_sweep,
    "roc": _cmd_roc,
    "calibrate": _cmd_calibrate,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    client = None
    try:
        args = parser.parse_args(argv)
        client = ServiceClient(args.server)
        return _HANDLERS[args.command](args, client)
    except CliError as err:
        print(f"error: {err}", file=sys.stderr)
        return err.code
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_IO
    except httpx.HTTPError as err:
        print(f"error: cannot reach service: {err}", file=sys.stderr)
        return EXIT_IO
    finally:
        if client is not None:
            client.close()


if __name__ == "__main__":
    sys.exit(main())
