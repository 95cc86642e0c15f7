"""Self-clocking LED line code: byte payloads framed into fixed-rate blink waveforms.

A packet is 12 bits: a start pattern (2 bits), one payload byte, and a stop
pattern (2 bits).  Each bit is held on the LED for a fixed number of camera
frames, so the frame rate and the hold length set the bit rate; the defaults
(30 fps, 12 frames per bit) give 2.5 bit/s and a 4.8 s packet.  Between
packets the LED stays dark for an idle gap, and the gap followed by the
start pattern is the synchronization flag the receiver locks onto.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

# Payload byte reserved for the distress broadcast.  ASCII 'S': a transmitter
# that can only blink repeats this byte back to back.
SOS_PAYLOAD = 0x53

PAYLOAD_BITS = 8
PACKET_BITS = 12


class LineCodeError(ValueError):
    """Base class for framing and validation failures."""


class LengthError(LineCodeError):
    """Bit sequence has the wrong length for one packet."""


class FramingError(LineCodeError):
    """Start or stop pattern does not match the configured line code."""

    def __init__(self, message: str, position: str):
        super().__init__(message)
        self.position = position  # "start" or "stop"


class EmptyInputError(LineCodeError):
    """Nothing to encode or measure."""


@dataclass(frozen=True)
class LineCodeConfig:
    """Framing and timing parameters shared by transmitter and receiver."""

    start_pattern: tuple[int, ...] = (1, 0)
    stop_pattern: tuple[int, ...] = (0, 1)
    bit_order: str = "msb"
    frames_per_bit: int = 12
    fps: float = 30.0
    idle_frames: int = 24

    def __post_init__(self):
        object.__setattr__(self, "start_pattern", tuple(int(b) for b in self.start_pattern))
        object.__setattr__(self, "stop_pattern", tuple(int(b) for b in self.stop_pattern))
        for name in ("start_pattern", "stop_pattern"):
            bits = getattr(self, name)
            if not bits or any(b not in (0, 1) for b in bits):
                raise ValueError(f"{name} must be a non-empty tuple of 0/1, got {bits!r}")
        if self.start_pattern[0] != 1:
            # The flag is an idle run followed by the start pattern; without a
            # rising edge at the boundary the flag cannot be located.
            raise ValueError("start_pattern must begin with 1")
        if self.bit_order not in ("msb", "lsb"):
            raise ValueError(f"bit_order must be 'msb' or 'lsb', got {self.bit_order!r}")
        if self.frames_per_bit < 1:
            raise ValueError(f"frames_per_bit must be >= 1, got {self.frames_per_bit}")
        if not self.fps > 0:
            raise ValueError(f"fps must be positive, got {self.fps}")
        if self.idle_frames < 0:
            raise ValueError(f"idle_frames must be >= 0, got {self.idle_frames}")

    @property
    def packet_bits(self) -> int:
        return len(self.start_pattern) + PAYLOAD_BITS + len(self.stop_pattern)

    @property
    def frames_per_packet(self) -> int:
        return self.packet_bits * self.frames_per_bit

    @property
    def bit_rate(self) -> float:
        """Line rate in bit/s (start and stop bits included)."""
        return self.fps / self.frames_per_bit

    @property
    def packet_seconds(self) -> float:
        return self.frames_per_packet / self.fps


@dataclass(frozen=True)
class Packet:
    """One framed unit: start bits + payload bits + stop bits."""

    bits: tuple[int, ...]
    config: LineCodeConfig = field(default_factory=LineCodeConfig)

    def __post_init__(self):
        object.__setattr__(self, "bits", tuple(int(b) for b in self.bits))
        if len(self.bits) != self.config.packet_bits:
            raise LengthError(
                f"packet needs {self.config.packet_bits} bits, got {len(self.bits)}"
            )
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("packet bits must be 0 or 1")

    @property
    def start_bits(self) -> tuple[int, ...]:
        return self.bits[: len(self.config.start_pattern)]

    @property
    def payload_bits(self) -> tuple[int, ...]:
        lo = len(self.config.start_pattern)
        return self.bits[lo : lo + PAYLOAD_BITS]

    @property
    def stop_bits(self) -> tuple[int, ...]:
        return self.bits[len(self.config.start_pattern) + PAYLOAD_BITS :]


@dataclass(frozen=True)
class LedWaveform:
    """Per-frame LED state as seen by an ideal camera."""

    frames: np.ndarray
    fps: float

    def __post_init__(self):
        frames = np.asarray(self.frames, dtype=bool)
        frames.flags.writeable = False
        object.__setattr__(self, "frames", frames)
        if frames.ndim != 1:
            raise ValueError("frames must be one-dimensional")
        if not self.fps > 0:
            raise ValueError(f"fps must be positive, got {self.fps}")

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def duration(self) -> float:
        """Length in seconds."""
        return len(self.frames) / self.fps


def byte_to_bits(value: int, bit_order: str = "msb") -> tuple[int, ...]:
    """Split a byte into 8 bits in transmission order."""
    if not 0 <= value <= 0xFF:
        raise ValueError(f"payload must be one byte (0..255), got {value}")
    if bit_order == "msb":
        return tuple((value >> (PAYLOAD_BITS - 1 - i)) & 1 for i in range(PAYLOAD_BITS))
    if bit_order == "lsb":
        return tuple((value >> i) & 1 for i in range(PAYLOAD_BITS))
    raise ValueError(f"bit_order must be 'msb' or 'lsb', got {bit_order!r}")


def bits_to_byte(bits: Sequence[int], bit_order: str = "msb") -> int:
    """Inverse of :func:`byte_to_bits`."""
    if len(bits) != PAYLOAD_BITS:
        raise LengthError(f"payload needs {PAYLOAD_BITS} bits, got {len(bits)}")
    value = 0
    for i, b in enumerate(bits):
        if b not in (0, 1):
            raise ValueError(f"payload bits must be 0 or 1, got {b!r}")
        shift = PAYLOAD_BITS - 1 - i if bit_order == "msb" else i
        value |= int(b) << shift
    return value


def encode_packet(payload: int, config: LineCodeConfig | None = None) -> Packet:
    """Frame one payload byte into a packet bit sequence."""
    config = config or LineCodeConfig()
    bits = config.start_pattern + byte_to_bits(payload, config.bit_order) + config.stop_pattern
    return Packet(bits, config)


def decode_packet(bits: Sequence[int], config: LineCodeConfig | None = None) -> int:
    """Strip framing from one packet worth of bits and return the payload byte.

    Raises LengthError on a wrong bit count and FramingError when the start
    or stop pattern does not match.
    """
    config = config or LineCodeConfig()
    bits = tuple(int(b) for b in bits)
    if len(bits) != config.packet_bits:
        raise LengthError(f"packet needs {config.packet_bits} bits, got {len(bits)}")
    n_start = len(config.start_pattern)
    if bits[:n_start] != config.start_pattern:
        raise FramingError(
            f"start pattern mismatch: got {bits[:n_start]}, want {config.start_pattern}",
            position="start",
        )
    if bits[n_start + PAYLOAD_BITS :] != config.stop_pattern:
        raise FramingError(
            f"stop pattern mismatch: got {bits[n_start + PAYLOAD_BITS:]}, "
            f"want {config.stop_pattern}",
            position="stop",
        )
    return bits_to_byte(bits[n_start : n_start + PAYLOAD_BITS], config.bit_order)


def packet_to_waveform(packet: Packet) -> LedWaveform:
    """Expand packet bits into per-frame LED states (no idle padding)."""
    config = packet.config
    frames = np.repeat(np.asarray(packet.bits, dtype=bool), config.frames_per_bit)
    return LedWaveform(frames, config.fps)


def encode_message_stream(
    payloads: Iterable[int], config: LineCodeConfig | None = None
) -> LedWaveform:
    """Encode a sequence of payload bytes into one waveform.

    The stream is idle (dark), then each packet follows an idle gap:
    idle, packet, idle, packet, ..., idle.  One payload with the defaults
    is 24 + 144 + 24 = 192 frames.
    """
    config = config or LineCodeConfig()
    payloads = list(payloads)
    if not payloads:
        raise EmptyInputError("need at least one payload byte")
    idle = np.zeros(config.idle_frames, dtype=bool)
    parts: list[np.ndarray] = [idle]
    for value in payloads:
        parts.append(packet_to_waveform(encode_packet(value, config)).frames)
        parts.append(idle)
    return LedWaveform(np.concatenate(parts), config.fps)
