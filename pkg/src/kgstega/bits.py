"""Bit-level plumbing: MSB-first byte packing and a padding-aware cursor."""

from __future__ import annotations

from typing import Iterable, Sequence


def bytes_to_bits(data: bytes) -> list[int]:
    """Expand bytes into a list of 0/1 ints, MSB-first within each byte."""
    out = []
    for byte in data:
        for shift in range(7, -1, -1):
            out.append((byte >> shift) & 1)
    return out


def bits_to_bytes(bits: Sequence[int]) -> bytes:
    """Pack bits (MSB-first) into bytes, zero-padding the final partial byte."""
    buf = bytearray()
    cur = 0
    n = 0
    for bit in bits:
        cur = (cur << 1) | (bit & 1)
        n += 1
        if n == 8:
            buf.append(cur)
            cur = 0
            n = 0
    if n:
        buf.append(cur << (8 - n))
    return bytes(buf)


def int_to_bits(value: int, width: int) -> list[int]:
    """Big-endian fixed-width bit expansion of a non-negative int."""
    if value < 0 or value >= (1 << width):
        raise ValueError(f"{value} does not fit in {width} bits")
    return [(value >> shift) & 1 for shift in range(width - 1, -1, -1)]


def bits_to_int(bits: Iterable[int]) -> int:
    value = 0
    for bit in bits:
        value = (value << 1) | (bit & 1)
    return value


class BitCursor:
    """Read-once view over a bit sequence that pads with zeros past the end.

    ``take`` never fails: once the real bits run out it returns padding
    zeros flagged as such, and ``consumed`` keeps counting only real bits.
    """

    __slots__ = ("_bits", "_pos")

    def __init__(self, bits: Sequence[int]):
        self._bits = list(bits)
        self._pos = 0

    def take(self) -> tuple[int, bool]:
        """Return ``(bit, is_payload)``; padding zeros report ``False``."""
        if self._pos < len(self._bits):
            bit = self._bits[self._pos]
            self._pos += 1
            return bit, True
        return 0, False

    @property
    def consumed(self) -> int:
        """Number of real (non-padding) bits taken so far."""
        return min(self._pos, len(self._bits))

    @property
    def remaining(self) -> int:
        return max(len(self._bits) - self._pos, 0)

    def exhausted(self) -> bool:
        return self._pos >= len(self._bits)
