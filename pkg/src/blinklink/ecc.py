"""Extended Hamming(8,4) SECDED for the payload byte.

One packet payload carries a single protected nibble: 4 data bits, 3 Hamming
parity bits, and 1 overall parity bit.  Any single bit flip is corrected and
any double flip is detected as uncorrectable.  Bit positions follow the
classic 1-indexed layout with parity at the powers of two:

    position:  1   2   3   4   5   6   7   8
    role:      p1  p2  d3  p4  d2  d1  d0  p8

Position 1 is packed into the most significant bit of the byte.
"""

from __future__ import annotations

from dataclasses import dataclass

DATA_POSITIONS = (3, 5, 6, 7)     # d3 (nibble MSB) first
PARITY_POSITIONS = (1, 2, 4)
OVERALL_POSITION = 8

STATUS_CLEAN = "clean"
STATUS_CORRECTED = "corrected"
STATUS_UNCORRECTABLE = "uncorrectable"


@dataclass(frozen=True)
class EccResult:
    """Outcome of decoding one codeword byte."""

    data: int | None              # recovered nibble, None when uncorrectable
    status: str                   # clean | corrected | uncorrectable
    corrected_bit: int | None = None   # 1-indexed position of the repaired bit


def _get(byte: int, position: int) -> int:
    return (byte >> (8 - position)) & 1


def _set(byte: int, position: int, bit: int) -> int:
    mask = 1 << (8 - position)
    return (byte | mask) if bit else (byte & ~mask)


def ecc_encode(data: int) -> int:
    """Encode a nibble (0..15) into an 8-bit codeword."""
    if not 0 <= data <= 0xF:
        raise ValueError(f"data must be a nibble (0..15), got {data}")
    word = 0
    for i, pos in enumerate(DATA_POSITIONS):
        word = _set(word, pos, (data >> (3 - i)) & 1)
    for p in PARITY_POSITIONS:
        # Parity p covers every position whose index has bit p set.
        cover = sum(_get(word, pos) for pos in DATA_POSITIONS if pos & p)
        word = _set(word, p, cover & 1)
    overall = sum(_get(word, pos) for pos in range(1, 8)) & 1
    return _set(word, OVERALL_POSITION, overall)


def _extract_data(word: int) -> int:
    value = 0
    for i, pos in enumerate(DATA_POSITIONS):
        value |= _get(word, pos) << (3 - i)
    return value


def ecc_decode(byte: int) -> EccResult:
    """Decode one codeword byte, correcting a single flip if present."""
    if not 0 <= byte <= 0xFF:
        raise ValueError(f"codeword must be one byte (0..255), got {byte}")
    syndrome = 0
    for p in PARITY_POSITIONS:
        check = sum(_get(byte, pos) for pos in range(1, 8) if pos & p) & 1
        if check:
            syndrome |= p
    overall_odd = bool(sum(_get(byte, pos) for pos in range(1, 9)) & 1)

    if syndrome == 0 and not overall_odd:
        return EccResult(data=_extract_data(byte), status=STATUS_CLEAN)
    if overall_odd:
        # Exactly one flip: at position `syndrome`, or at the overall parity
        # bit itself when the syndrome is zero.
        position = syndrome if syndrome != 0 else OVERALL_POSITION
        repaired = _set(byte, position, 1 - _get(byte, position))
        return EccResult(
            data=_extract_data(repaired),
            status=STATUS_CORRECTED,
            corrected_bit=position,
        )
    # Non-zero syndrome with even overall parity: two flips, beyond repair.
    return EccResult(data=None, status=STATUS_UNCORRECTABLE)
