"""Byte-oriented range coder with explicit carry handling.

State is a 32-bit (low, range) pair renormalized one byte at a time; carries
are resolved by buffering the last unsettled byte plus a run of 0xFF bytes and
flushing them once the carry is known (the run flips to 0x00 on carry). Symbol
probabilities come from an integer histogram whose frequencies sum to 2^16.
"""
from __future__ import annotations

from bisect import bisect_right

import numpy as np

from .errors import StreamFormatError

_TOP = 1 << 24
_MASK = 0xFFFFFFFF
TOTAL_BITS = 16
TOTAL = 1 << TOTAL_BITS


class RangeEncoder:
    def __init__(self):
        self.low = 0
        self.range = _MASK
        self._cache = 0
        self._ff_run = 0
        self._first = True
        self._out = bytearray()

    def _shift_low(self):
        hi = self.low >> 24
        if self.low < 0xFF000000 or self.low > _MASK:
            carry = self.low >> 32
            if self._first:
                self._first = False
            else:
                self._out.append((self._cache + carry) & 0xFF)
            fill = (0xFF + carry) & 0xFF
            self._out.extend([fill] * self._ff_run)
            self._ff_run = 0
            self._cache = hi & 0xFF
        else:
            self._ff_run += 1
        self.low = (self.low << 8) & _MASK

    def encode(self, cum_low, freq, total=TOTAL):
        r = self.range // total
        self.low += r * cum_low
        if cum_low + freq >= total:
            self.range -= r * cum_low
        else:
            self.range = r * freq
        while self.range < _TOP:
            self._shift_low()
            self.range = (self.range << 8) & _MASK

    def finish(self):
        for _ in range(5):
            self._shift_low()
        return bytes(self._out)


class RangeDecoder:
    def __init__(self, data: bytes):
        self._data = data
        self._pos = 0
        self.range = _MASK
        self.code = 0
        for _ in range(4):
            self.code = ((self.code << 8) | self._next_byte()) & _MASK

    def _next_byte(self):
        if self._pos < len(self._data):
            b = self._data[self._pos]
            self._pos += 1
            return b
        raise StreamFormatError("range-coded payload truncated")

    def decode_value(self, total=TOTAL):
        self._r = self.range // total
        return min(self.code // self._r, total - 1)

    def consume(self, cum_low, freq, total=TOTAL):
        r = self._r
        self.code -= r * cum_low
        if cum_low + freq >= total:
            self.range -= r * cum_low
        else:
            self.range = r * freq
        while self.range < _TOP:
            self.code = ((self.code << 8) | self._next_byte()) & _MASK
            self.range = (self.range << 8) & _MASK


def encode_symbols(symbols, frequencies) -> bytes:
    """Range-code non-negative integer symbols under an integer histogram.

    frequencies[s] is the weight of symbol s; weights must sum to 2^16 and every
    occurring symbol must have a positive weight.
    """
    freqs = np.asarray(frequencies, dtype=np.int64)
    if freqs.sum() != TOTAL:
        raise StreamFormatError(f"histogram must sum to {TOTAL}, got {freqs.sum()}")
    cum = np.concatenate([[0], np.cumsum(freqs)])
    symbols = np.asarray(symbols, dtype=np.int64)
    if symbols.size and (symbols.min() < 0 or symbols.max() >= freqs.size):
        raise StreamFormatError("symbol outside histogram span")
    if symbols.size and np.any(freqs[symbols] == 0):
        raise StreamFormatError("symbol with zero histogram weight")

    enc = RangeEncoder()
    cum_l = cum.tolist()
    freq_l = freqs.tolist()
    for s in symbols.tolist():
        enc.encode(cum_l[s], freq_l[s])
    return enc.finish()


def decode_symbols(payload: bytes, frequencies, count: int) -> np.ndarray:
    """Inverse of encode_symbols; returns exactly `count` symbols."""
    freqs = np.asarray(frequencies, dtype=np.int64)
    if freqs.sum() != TOTAL:
        raise StreamFormatError(f"histogram must sum to {TOTAL}, got {freqs.sum()}")
    if count == 0:
        return np.zeros(0, dtype=np.int64)
    cum = np.concatenate([[0], np.cumsum(freqs)])
    cum_l = cum.tolist()
    freq_l = freqs.tolist()
    dec = RangeDecoder(payload)
    out = np.empty(count, dtype=np.int64)
    for i in range(count):
        v = dec.decode_value()
        s = bisect_right(cum_l, v) - 1
        dec.consume(cum_l[s], freq_l[s])
        out[i] = s
    return out
