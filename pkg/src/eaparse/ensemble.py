"""Probability-space model ensembling and bilinear resizing.

Averaging class probabilities, not logits: softmax is scale-sensitive, so
models with different logit temperatures would dominate a logit average.
Members trained at different resolutions are bilinearly resized to a common
grid first.
"""

from __future__ import annotations

import numpy as np

from .errors import ChannelMismatch, EmptyInput, InvalidRaster
from .tensorio import ensure_logits


def softmax_map(logits) -> np.ndarray:
    """Per-pixel softmax of a (C, H, W) logits tensor, in float64."""
    lg = ensure_logits(logits).astype(np.float64)
    z = np.exp(lg - lg.max(axis=0, keepdims=True))
    return z / z.sum(axis=0, keepdims=True)


def resize_bilinear(tensor, out_height: int, out_width: int) -> np.ndarray:
    """Bilinear resize of a (C, H, W) float tensor with half-pixel centers.

    Source coordinates are (dst + 0.5) * scale - 0.5, clamped to the valid
    range, matching the align_corners=False convention. A same-size call
    returns a bit-identical copy.
    """
    a = np.asarray(tensor, dtype=np.float64)
    if a.ndim != 3:
        raise InvalidRaster(f"expected a (C, H, W) tensor, got shape {a.shape}")
    c, h, w = a.shape
    if out_height < 1 or out_width < 1:
        raise InvalidRaster("output size must be at least 1 x 1")
    if (h, w) == (out_height, out_width):
        return a.copy()

    def axis_coords(n_src: int, n_dst: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        src = (np.arange(n_dst, dtype=np.float64) + 0.5) * (n_src / n_dst) - 0.5
        src = np.clip(src, 0.0, n_src - 1.0)
        lo = np.floor(src).astype(np.int64)
        hi = np.minimum(lo + 1, n_src - 1)
        return lo, hi, src - lo

    r0, r1, fr = axis_coords(h, out_height)
    c0, c1, fc = axis_coords(w, out_width)
    fr = fr[:, None]
    fc = fc[None, :]
    top = a[:, r0][:, :, c0] * (1 - fc) + a[:, r0][:, :, c1] * fc
    bot = a[:, r1][:, :, c0] * (1 - fc) + a[:, r1][:, :, c1] * fc
    return top * (1 - fr) + bot * fr


def ensemble_probabilities(
    logits_list, out_height: int | None = None, out_width: int | None = None
) -> np.ndarray:
    """Mean class-probability map of several logit tensors.

    Members must share the channel count; spatial sizes may differ and are
    resized to (out_height, out_width), defaulting to the first member's
    grid. Averaging follows the order of the input list, so the result is
    deterministic for a fixed argument order.
    """
    tensors = [ensure_logits(t) for t in logits_list]
    if not tensors:
        raise EmptyInput("ensemble needs at least one member")
    c = tensors[0].shape[0]
    for t in tensors[1:]:
        if t.shape[0] != c:
            raise ChannelMismatch(f"members disagree on classes: {c} vs {t.shape[0]}")
    oh = out_height if out_height is not None else tensors[0].shape[1]
    ow = out_width if out_width is not None else tensors[0].shape[2]

    acc = np.zeros((c, oh, ow), dtype=np.float64)
    for t in tensors:
        acc += resize_bilinear(softmax_map(t), oh, ow)
    return acc / len(tensors)


def ensemble_argmax(
    logits_list, out_height: int | None = None, out_width: int | None = None
) -> np.ndarray:
    """Argmax label map of the ensembled probabilities; ties go to the lowest id."""
    probs = ensemble_probabilities(logits_list, out_height, out_width)
    return probs.argmax(axis=0).astype(np.uint8)
