"""Config-driven link experiments: encode, impair, decode, score, repeat.

A single config fixes everything, including the channel seed, so every run
is replayable and its output files are byte-identical across machines.
Trials reuse the config with seed + trial_index, keeping them independent
but individually reconstructable.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Sequence

from .channel import ChannelConfig, FlipModel, sample_scores
from .codec import SOS_PAYLOAD, LineCodeConfig, encode_message_stream
from .decoder import DecodeReport, DecoderConfig, decode_stream
from .formats import report_to_dict, write_reports_jsonl, write_stats_csv, write_sweep_csv
from .metrics import LinkStats, link_stats

logger = logging.getLogger(__name__)

SWEEP_PARAMETERS = ("flip_p", "drift", "drop_prob")


def resolve_payload_set(value) -> tuple[int, ...]:
    """Expand the three payload-set forms into an explicit byte tuple.

    Accepts an explicit list of byte values, the string ``"range"`` for
    0x00..0xFF, or ``{"sos": n}`` for the distress byte repeated n times.
    """
    if value == "range":
        return tuple(range(256))
    if isinstance(value, Mapping):
        if set(value) != {"sos"}:
            raise ValueError(f"payload-set mapping must be {{'sos': n}}, got {value!r}")
        count = int(value["sos"])
        if count < 1:
            raise ValueError("sos repeat count must be >= 1")
        return (SOS_PAYLOAD,) * count
    if isinstance(value, (str, bytes)):
        raise ValueError(f"unknown payload-set form {value!r}")
    return tuple(int(v) for v in value)


@dataclass(frozen=True)
class ExperimentConfig:
    channel: ChannelConfig
    payloads: tuple[int, ...]
    line_code: LineCodeConfig = field(default_factory=LineCodeConfig)
    decoder: DecoderConfig = field(default_factory=DecoderConfig)
    trials: int = 1
    output_dir: Path | None = None

    def __post_init__(self):
        payloads = resolve_payload_set(self.payloads)
        if not payloads:
            raise ValueError("payload set must be non-empty")
        if any(not 0 <= p <= 0xFF for p in payloads):
            raise ValueError("payloads must be bytes (0..255)")
        object.__setattr__(self, "payloads", payloads)
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        # The decoder must speak the experiment's line code; wire it through
        # so a config cannot silently carry two diverging framings.
        object.__setattr__(
            self, "decoder", replace(self.decoder, line_code=self.line_code)
        )
        if self.output_dir is not None:
            object.__setattr__(self, "output_dir", Path(self.output_dir))


@dataclass(frozen=True)
class ExperimentResult:
    stats: LinkStats
    trial_stats: tuple[LinkStats, ...]
    reports: tuple[tuple[DecodeReport, ...], ...]  # indexed [trial][packet]


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Run all trials of one experiment; write output files if configured."""
    waveform = encode_message_stream(config.payloads, config.line_code)
    trial_stats: list[LinkStats] = []
    all_reports: list[tuple[DecodeReport, ...]] = []
    for trial in range(config.trials):
        channel = replace(config.channel, seed=config.channel.seed + trial)
        scores = sample_scores(waveform, channel)
        reports = tuple(decode_stream(scores, config.decoder))
        all_reports.append(reports)
        trial_stats.append(link_stats(config.payloads, reports, config.line_code))

    aggregate = LinkStats(
        bit_errors=sum(s.bit_errors for s in trial_stats),
        bits_total=sum(s.bits_total for s in trial_stats),
        messages_ok=sum(s.messages_ok for s in trial_stats),
        messages_total=sum(s.messages_total for s in trial_stats),
    )
    result = ExperimentResult(
        stats=aggregate,
        trial_stats=tuple(trial_stats),
        reports=tuple(all_reports),
    )
    if config.output_dir is not None:
        write_experiment_files(result, config.output_dir)
    return result


def write_experiment_files(result: ExperimentResult, output_dir: Path) -> None:
    """reports.jsonl (one object per report, tagged by trial) and stats.csv."""
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    with (output_dir / "reports.jsonl").open("w", encoding="utf-8") as fp:
        write_reports_jsonl(
            (
                {"trial": trial, **report_to_dict(report)}
                for trial, reports in enumerate(result.reports)
                for report in reports
            ),
            fp,
        )
    with (output_dir / "stats.csv").open("w", encoding="utf-8", newline="") as fp:
        write_stats_csv(result.trial_stats, result.stats, fp)


@dataclass(frozen=True)
class SweepSpec:
    """One channel parameter swept over a grid, everything else from base."""

    parameter: str
    grid: tuple[float, ...]
    base: ExperimentConfig
    point_overrides: tuple[Mapping[str, object], ...] | None = None
    output_dir: Path | None = None

    def __post_init__(self):
        if self.parameter not in SWEEP_PARAMETERS:
            raise ValueError(
                f"parameter must be one of {SWEEP_PARAMETERS}, got {self.parameter!r}"
            )
        grid = tuple(float(v) for v in self.grid)
        if not grid:
            raise ValueError("grid must be non-empty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("grid values must be strictly increasing")
        object.__setattr__(self, "grid", grid)
        if self.point_overrides is not None and len(self.point_overrides) != len(grid):
            raise ValueError("point_overrides must align with the grid")
        if self.output_dir is not None:
            object.__setattr__(self, "output_dir", Path(self.output_dir))


@dataclass(frozen=True)
class SweepPoint:
    parameter: str
    value: float
    stats: LinkStats


def override_config(config, path: str, value):
    """Functional update of a nested frozen dataclass via a dotted path."""
    head, _, rest = path.partition(".")
    if not rest:
        return replace(config, **{head: value})
    return replace(config, **{head: override_config(getattr(config, head), rest, value)})


def _config_for_point(spec: SweepSpec, index: int) -> ExperimentConfig:
    value = spec.grid[index]
    config = spec.base
    if spec.parameter == "flip_p":
        config = override_config(config, "channel.score_model", FlipModel(p=value))
    else:
        config = override_config(config, f"channel.{spec.parameter}", value)
    if spec.point_overrides is not None:
        for path, override in spec.point_overrides[index].items():
            config = override_config(config, path, override)
    return replace(config, output_dir=None)


def _warn_if_not_monotone(spec: SweepSpec, points: Sequence[SweepPoint]) -> None:
    # Success should fall as the flip probability rises; flag increases that
    # exceed 3 sigma of the binomial sampling noise.
    for prev, cur in zip(points, points[1:]):
        n_prev, n_cur = prev.stats.messages_total, cur.stats.messages_total
        s_prev, s_cur = prev.stats.message_success_rate, cur.stats.message_success_rate
        if not (n_prev and n_cur) or s_cur <= s_prev:
            continue
        noise = math.sqrt(
            s_prev * (1 - s_prev) / n_prev + s_cur * (1 - s_cur) / n_cur
        )
        if s_cur - s_prev > 3.0 * noise:
            logger.warning(
                "success rate rose from %.4f to %.4f between flip_p=%g and %g, "
                "beyond sampling noise",
                s_prev, s_cur, prev.value, cur.value,
            )


def run_sweep(spec: SweepSpec) -> tuple[SweepPoint, ...]:
    """One experiment per grid value; writes sweep.csv when configured."""
    points = tuple(
        SweepPoint(
            parameter=spec.parameter,
            value=spec.grid[i],
            stats=run_experiment(_config_for_point(spec, i)).stats,
        )
        for i in range(len(spec.grid))
    )
    if spec.parameter == "flip_p":
        _warn_if_not_monotone(spec, points)
    if spec.output_dir is not None:
        spec.output_dir.mkdir(parents=True, exist_ok=True)
        with (spec.output_dir / "sweep.csv").open("w", encoding="utf-8", newline="") as fp:
            write_sweep_csv(points, fp)
    return points
