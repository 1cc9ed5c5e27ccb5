"""Rate modeling and the coded representation of motion grids.

Training side: additive-uniform-noise quantization surrogate, a per-channel
learned monotone CDF (three composed positive-weight affine layers with a tanh
bend, squashed by a sigmoid), and a differentiable bits-per-element estimate.
Coding side: scalar quantization, a 2^16-normalized symbol histogram, and the
range coder; the histogram travels in the bitstream instead of model weights.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, StreamFormatError
from . import rangecoder
from .motion import MotionGrid

PMF_FLOOR = 1e-9
MOTION_MAGIC = b"4DMV"
MOTION_VERSION = 1

_HIDDEN = 3


def _softplus(x):
    return np.logaddexp(0.0, x)


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def _inv_softplus(y):
    return float(np.log(np.expm1(y)))


@dataclass
class EntropyModel:
    """Independent monotone CDF per channel, initialized to the standard logistic.

    Parameters are stacked along the leading channel axis. Monotonicity holds
    for every parameter setting: weights pass through softplus and the bend
    h -> h + tanh(a)*tanh(h) has strictly positive slope.
    """

    w1: np.ndarray  # (C, H, 1)
    b1: np.ndarray  # (C, H)
    a1: np.ndarray  # (C, H)
    w2: np.ndarray  # (C, H, H)
    b2: np.ndarray  # (C, H)
    a2: np.ndarray  # (C, H)
    w3: np.ndarray  # (C, 1, H)
    b3: np.ndarray  # (C, 1)
    a3: np.ndarray  # (C, 1)

    @staticmethod
    def create(n_channels: int) -> "EntropyModel":
        c, h = n_channels, _HIDDEN
        return EntropyModel(
            w1=np.full((c, h, 1), _inv_softplus(1.0)),
            b1=np.zeros((c, h)),
            a1=np.zeros((c, h)),
            w2=np.full((c, h, h), _inv_softplus(1.0 / h)),
            b2=np.zeros((c, h)),
            a2=np.zeros((c, h)),
            w3=np.full((c, 1, h), _inv_softplus(1.0 / h)),
            b3=np.zeros((c, 1)),
            a3=np.zeros((c, 1)),
        )

    @property
    def n_channels(self):
        return self.w1.shape[0]

    def param_list(self):
        return [(name, getattr(self, name)) for name in
                ("w1", "b1", "a1", "w2", "b2", "a2", "w3", "b3", "a3")]

    def copy(self):
        return EntropyModel(**{k: v.copy() for k, v in self.param_list()})


def _layer_forward(x, w, b, a):
    """x: (C, D_in, N) -> (C, D_out, N) with cached intermediates."""
    u = _softplus(w) @ x + b[:, :, None]
    t = np.tanh(u)
    ta = np.tanh(a)[:, :, None]
    return u + ta * t, (x, u, t, ta)


def _layer_backward(d_out, cache, w, a):
    x, u, t, ta = cache
    d_u = d_out * (1.0 + ta * (1.0 - t * t))
    d_a = (d_out * t).sum(axis=2) * (1.0 - np.tanh(a) ** 2)
    d_b = d_u.sum(axis=2)
    sp = _softplus(w)
    d_w = np.einsum("con,cin->coi", d_u, x) * _sigmoid(w)
    d_x = np.einsum("coi,con->cin", sp, d_u)
    return d_x, d_w, d_b, d_a


def _cdf_forward(model: EntropyModel, x):
    """x: (C, N) -> CDF values (C, N) plus caches for backprop."""
    h0 = x[:, None, :]
    h1, c1 = _layer_forward(h0, model.w1, model.b1, model.a1)
    h2, c2 = _layer_forward(h1, model.w2, model.b2, model.a2)
    h3, c3 = _layer_forward(h2, model.w3, model.b3, model.a3)
    y = _sigmoid(h3[:, 0, :])
    return y, (c1, c2, c3, y)


def _cdf_backward(model: EntropyModel, d_y, caches):
    c1, c2, c3, y = caches
    d_h3 = (d_y * y * (1.0 - y))[:, None, :]
    d_h2, d_w3, d_b3, d_a3 = _layer_backward(d_h3, c3, model.w3, model.a3)
    d_h1, d_w2, d_b2, d_a2 = _layer_backward(d_h2, c2, model.w2, model.a2)
    d_h0, d_w1, d_b1, d_a1 = _layer_backward(d_h1, c1, model.w1, model.a1)
    grads = {
        "w1": d_w1, "b1": d_b1, "a1": d_a1,
        "w2": d_w2, "b2": d_b2, "a2": d_a2,
        "w3": d_w3, "b3": d_b3, "a3": d_a3,
    }
    return d_h0[:, 0, :], grads


def cdf_eval(model: EntropyModel, x):
    """CDF values for (C, N) inputs (or (N,) with a single-channel model)."""
    x = np.asarray(x, dtype=np.float64)
    squeeze = x.ndim == 1
    if squeeze:
        x = x[None]
    y, _ = _cdf_forward(model, x)
    return y[0] if squeeze else y


def pmf(model: EntropyModel, y_hat, channel=0):
    """Probability of the unit bin around y_hat: CDF(y+1/2) - CDF(y-1/2)."""
    y_hat = np.asarray(y_hat, dtype=np.float64)
    flat = np.atleast_1d(y_hat).ravel()
    x = np.stack([flat + 0.5, flat - 0.5])  # (2, N) evaluated on one channel
    sub = EntropyModel(**{k: v[channel : channel + 1] for k, v in model.param_list()})
    hi = cdf_eval(sub, x[0][None])[0]
    lo = cdf_eval(sub, x[1][None])[0]
    p = np.maximum(hi - lo, PMF_FLOOR)
    return p.reshape(y_hat.shape) if y_hat.ndim else float(p[0])


def grid_channel_split(levels):
    """Flatten grid levels into per-channel 1-D arrays, coarse level first."""
    out = []
    for lv in levels:
        for c in range(lv.shape[3]):
            out.append(lv[..., c].ravel())
    return out


def grid_channel_join(values, template_levels):
    """Inverse of grid_channel_split given arrays shaped like template_levels."""
    out = []
    i = 0
    for lv in template_levels:
        rebuilt = np.empty_like(lv)
        for c in range(lv.shape[3]):
            rebuilt[..., c] = values[i].reshape(lv.shape[:3])
            i += 1
        out.append(rebuilt)
    return out


def simulate_quantize(x, q, rng):
    """Additive uniform noise of one quantization bin: x + U(-1/(2q), 1/(2q)).

    The surrogate is treated as identity for gradients (noise is a constant).
    """
    if q <= 0:
        raise InvalidInputError("quantization scale must be positive")
    x = np.asarray(x, dtype=np.float64)
    return x + rng.uniform(-0.5 / q, 0.5 / q, size=x.shape)


def rate_loss(model: EntropyModel, scaled_levels):
    """Mean bits per element of noisy scaled grid values under the model.

    scaled_levels: list of grid-level arrays already multiplied by the
    quantization scale. Returns (bits_per_element, per-level gradients,
    parameter gradient dict).
    """
    channels = grid_channel_split(scaled_levels)
    if len(channels) != model.n_channels:
        raise InvalidInputError(
            f"grid has {len(channels)} channels, model has {model.n_channels}"
        )
    sizes = [v.size for v in channels]
    n_total = sum(sizes)
    width = max(sizes)

    # pad ragged channels; padded tail gets zero gradient via the mask
    x = np.zeros((len(channels), width))
    mask = np.zeros((len(channels), width))
    for i, v in enumerate(channels):
        x[i, : v.size] = v
        mask[i, : v.size] = 1.0

    y_hi, cache_hi = _cdf_forward(model, x + 0.5)
    y_lo, cache_lo = _cdf_forward(model, x - 0.5)
    p = y_hi - y_lo
    clamped = p < PMF_FLOOR
    p = np.maximum(p, PMF_FLOOR)
    bits = -(np.log2(p) * mask).sum() / n_total

    d_p = np.where(clamped, 0.0, -mask / (p * np.log(2.0) * n_total))
    d_x_hi, g_hi = _cdf_backward(model, d_p, cache_hi)
    d_x_lo, g_lo = _cdf_backward(model, -d_p, cache_lo)
    d_x = (d_x_hi + d_x_lo) * mask
    param_grads = {k: g_hi[k] + g_lo[k] for k in g_hi}

    d_channels = [d_x[i, :s] for i, s in enumerate(sizes)]
    d_levels = grid_channel_join(d_channels, scaled_levels)
    return bits, d_levels, param_grads


def quantize(values, q):
    """Scalar quantization floor(q*v + 0.5); symbols must fit in 32 bits."""
    if q <= 0:
        raise InvalidInputError("quantization scale must be positive")
    sym = np.floor(q * np.asarray(values, dtype=np.float64) + 0.5)
    if sym.size and (sym.max() >= 2**31 or sym.min() < -(2**31)):
        raise InvalidInputError("quantized symbols overflow 32-bit range")
    return sym.astype(np.int64)


def dequantize(symbols, min_symbol, q):
    """(shifted symbols + min_symbol) / q."""
    return (np.asarray(symbols, dtype=np.float64) + min_symbol) / q


@dataclass
class SymbolHistogram:
    """Integer frequencies over [0, span), scaled to sum to 2^16, floor 1 where present."""

    frequencies: np.ndarray  # (span,) int64

    def __post_init__(self):
        self.frequencies = np.asarray(self.frequencies, dtype=np.int64)
        if self.frequencies.sum() != rangecoder.TOTAL:
            raise InvalidInputError("histogram frequencies must sum to 2^16")

    @property
    def span(self):
        return self.frequencies.size

    @staticmethod
    def from_symbols(symbols) -> "SymbolHistogram":
        symbols = np.asarray(symbols, dtype=np.int64)
        if symbols.size == 0:
            return SymbolHistogram(np.array([rangecoder.TOTAL], dtype=np.int64))
        if symbols.min() < 0:
            raise InvalidInputError("histogram input must be non-negative")
        counts = np.bincount(symbols).astype(np.int64)
        occurring = counts > 0
        n_occ = int(occurring.sum())
        if n_occ > rangecoder.TOTAL:
            raise InvalidInputError("too many distinct symbols for a 2^16 histogram")
        freqs = np.zeros_like(counts)
        budget = rangecoder.TOTAL - n_occ
        scaled = counts[occurring] * budget // symbols.size
        freqs[occurring] = 1 + scaled
        # distribute the rounding remainder over the heaviest symbols
        deficit = rangecoder.TOTAL - int(freqs.sum())
        order = np.argsort(-counts, kind="stable")
        occ_order = order[occurring[order]]
        i = 0
        while deficit > 0:
            freqs[occ_order[i % occ_order.size]] += 1
            deficit -= 1
            i += 1
        return SymbolHistogram(freqs)

    def probabilities(self):
        return self.frequencies / rangecoder.TOTAL


def range_encode(symbols, hist: SymbolHistogram) -> bytes:
    return rangecoder.encode_symbols(symbols, hist.frequencies)


def range_decode(payload: bytes, hist: SymbolHistogram, count: int) -> np.ndarray:
    return rangecoder.decode_symbols(payload, hist.frequencies, count)


def _pack_histogram(hist: SymbolHistogram) -> bytes:
    # a lone symbol carries all 2^16 mass; store mod 2^16 and rebuild on read
    stored = (hist.frequencies & 0xFFFF).astype("<u2")
    return struct.pack("<I", hist.span) + stored.tobytes()


def _unpack_histogram(buf, offset):
    (span,) = struct.unpack_from("<I", buf, offset)
    offset += 4
    stored = np.frombuffer(buf, dtype="<u2", count=span, offset=offset).astype(np.int64)
    offset += 2 * span
    if span == 1:
        stored = np.array([rangecoder.TOTAL], dtype=np.int64)
    return SymbolHistogram(stored), offset


def encode_motion_grid(grid: MotionGrid, q: float) -> bytes:
    """Quantize and range-code a motion grid into a self-describing bitstream."""
    flat = np.concatenate([lv.ravel() for lv in grid.levels])
    symbols = quantize(flat, q)
    min_symbol = int(symbols.min()) if symbols.size else 0
    shifted = symbols - min_symbol
    hist = SymbolHistogram.from_symbols(shifted)
    payload = range_encode(shifted, hist)

    head = bytearray()
    head += MOTION_MAGIC
    head += struct.pack("<H", MOTION_VERSION)
    head += struct.pack("<f", q)
    head += struct.pack("<i", min_symbol)
    head += struct.pack("<Q", flat.size)
    head += struct.pack("<H", len(grid.levels))
    for lv in grid.levels:
        head += struct.pack("<II", lv.shape[0], lv.shape[3])
    head += _pack_histogram(hist)
    head += struct.pack("<Q", len(payload))
    return bytes(head) + payload


def decode_motion_bitstream(buf: bytes, aabb) -> tuple[MotionGrid, float]:
    """Reconstruct the dequantized grid; exact inverse of encode in symbol space."""
    try:
        if buf[:4] != MOTION_MAGIC:
            raise StreamFormatError("bad motion bitstream magic")
        offset = 4
        (version,) = struct.unpack_from("<H", buf, offset)
        offset += 2
        if version != MOTION_VERSION:
            raise StreamFormatError(f"unsupported motion bitstream version {version}")
        (q,) = struct.unpack_from("<f", buf, offset)
        offset += 4
        (min_symbol,) = struct.unpack_from("<i", buf, offset)
        offset += 4
        (count,) = struct.unpack_from("<Q", buf, offset)
        offset += 8
        (n_levels,) = struct.unpack_from("<H", buf, offset)
        offset += 2
        shapes = []
        for _ in range(n_levels):
            r, c = struct.unpack_from("<II", buf, offset)
            offset += 8
            shapes.append((r, c))
        hist, offset = _unpack_histogram(buf, offset)
        (payload_len,) = struct.unpack_from("<Q", buf, offset)
        offset += 8
        payload = buf[offset : offset + payload_len]
        if len(payload) != payload_len:
            raise StreamFormatError("motion payload truncated")
    except struct.error as exc:
        raise StreamFormatError(f"malformed motion bitstream header: {exc}") from exc

    if sum(r**3 * c for r, c in shapes) != count:
        raise StreamFormatError("element count does not match grid shape")
    shifted = range_decode(payload, hist, count)
    values = dequantize(shifted, min_symbol, q)
    levels = []
    pos = 0
    for r, c in shapes:
        n = r**3 * c
        levels.append(values[pos : pos + n].reshape(r, r, r, c))
        pos += n
    return MotionGrid(levels, aabb), float(q)
