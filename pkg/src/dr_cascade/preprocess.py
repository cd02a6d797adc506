"""Deterministic fundus preprocessing for the two tiers.

Images are ``numpy`` arrays of shape ``(height, width, 3)``, dtype ``uint8``,
RGB order. Normalized tensors are ``float32`` arrays of shape ``(side, side, 3)``.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

from .errors import InputTooLarge, NonSquareInput

IMAGENET_MEAN = (0.485, 0.456, 0.406)
IMAGENET_STD = (0.229, 0.224, 0.225)

FOREGROUND_THRESHOLD = 10
TIER1_SIDE = 512
TIER2_SIDE = 392


class CropBox(NamedTuple):
    """Half-open box in pixel coordinates: columns [x0, x1), rows [y0, y1)."""

    x0: int
    y0: int
    x1: int
    y1: int


def check_image(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected (H, W, 3) image, got shape {img.shape}")
    if img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError("image must be at least 1x1")
    if img.dtype != np.uint8:
        raise ValueError(f"expected uint8 image, got {img.dtype}")
    return img


def autocrop_fundus(img: np.ndarray, intensity_threshold: int = FOREGROUND_THRESHOLD) -> tuple[np.ndarray, CropBox]:
    """Crop to the bounding box of pixels whose red channel is strictly above the threshold.

    An image with no foreground is returned unchanged with the full-frame box.
    """
    img = check_image(img)
    if not 0 <= intensity_threshold <= 255:
        raise ValueError("intensity_threshold must be in [0, 255]")
    h, w = img.shape[:2]
    mask = img[:, :, 0] > intensity_threshold
    rows = np.flatnonzero(mask.any(axis=1))
    if rows.size == 0:
        return img, CropBox(0, 0, w, h)
    cols = np.flatnonzero(mask.any(axis=0))
    box = CropBox(int(cols[0]), int(rows[0]), int(cols[-1]) + 1, int(rows[-1]) + 1)
    return img[box.y0:box.y1, box.x0:box.x1], box


def _sample_positions(n_in: int, n_out: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    # half-pixel centers, no corner alignment, clamped at the edges
    src = (np.arange(n_out, dtype=np.float64) + 0.5) * (n_in / n_out) - 0.5
    src = np.clip(src, 0.0, n_in - 1)
    lo = np.floor(src).astype(np.intp)
    hi = np.minimum(lo + 1, n_in - 1)
    return lo, hi, src - lo


def resize_bilinear(img: np.ndarray, width: int, height: int) -> np.ndarray:
    """Bilinear resize to exactly ``width`` x ``height``, rounding back to uint8."""
    img = check_image(img)
    if width < 1 or height < 1:
        raise ValueError("target size must be positive")
    in_h, in_w = img.shape[:2]
    if (in_w, in_h) == (width, height):
        return img.copy()
    y0, y1, fy = _sample_positions(in_h, height)
    x0, x1, fx = _sample_positions(in_w, width)
    # gather in uint8 first; converting the whole source would be costly for 4k inputs
    top_rows, bottom_rows = img[y0], img[y1]
    fx = fx[None, :, None]
    top = top_rows[:, x0] * (1.0 - fx) + top_rows[:, x1] * fx
    bottom = bottom_rows[:, x0] * (1.0 - fx) + bottom_rows[:, x1] * fx
    fy = fy[:, None, None]
    out = top * (1.0 - fy) + bottom * fy
    return np.clip(np.floor(out + 0.5), 0, 255).astype(np.uint8)


def _round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5))


def resize_preserve_aspect(img: np.ndarray, target_long_side: int) -> np.ndarray:
    img = check_image(img)
    if target_long_side < 1:
        raise ValueError("target_long_side must be >= 1")
    h, w = img.shape[:2]
    long_side, short_side = max(w, h), min(w, h)
    new_short = max(1, _round_half_up(short_side * target_long_side / long_side))
    if w >= h:
        return resize_bilinear(img, target_long_side, new_short)
    return resize_bilinear(img, new_short, target_long_side)


def pad_to_canvas(img: np.ndarray, side: int) -> np.ndarray:
    """Center ``img`` on a zero ``side`` x ``side`` canvas; odd leftovers go right/bottom."""
    img = check_image(img)
    h, w = img.shape[:2]
    if w > side or h > side:
        raise InputTooLarge(f"{w}x{h} image does not fit a {side}x{side} canvas")
    top, left = (side - h) // 2, (side - w) // 2
    out = np.zeros((side, side, 3), dtype=np.uint8)
    out[top:top + h, left:left + w] = img
    return out


def normalize_channels(
    img: np.ndarray,
    mean: Sequence[float] = IMAGENET_MEAN,
    std: Sequence[float] = IMAGENET_STD,
) -> np.ndarray:
    img = check_image(img)
    if img.shape[0] != img.shape[1]:
        raise NonSquareInput(f"cannot normalize a {img.shape[1]}x{img.shape[0]} image")
    mean_arr = np.asarray(mean, dtype=np.float64)
    std_arr = np.asarray(std, dtype=np.float64)
    if mean_arr.shape != (3,) or std_arr.shape != (3,):
        raise ValueError("mean and std need exactly 3 components")
    if np.any(std_arr <= 0):
        raise ValueError("std components must be > 0")
    out = (img.astype(np.float64) / 255.0 - mean_arr) / std_arr
    return out.astype(np.float32)


def tier1_preprocess(img: np.ndarray) -> np.ndarray:
    """Edge pipeline: red-channel autocrop, long side to 512, zero-pad to 512x512, normalize."""
    cropped, _ = autocrop_fundus(img, FOREGROUND_THRESHOLD)
    resized = resize_preserve_aspect(cropped, TIER1_SIDE)
    return normalize_channels(pad_to_canvas(resized, TIER1_SIDE))


def tier2_preprocess(img: np.ndarray) -> np.ndarray:
    """Cloud pipeline: autocrop, direct bilinear resize to 392x392 (aspect not kept), normalize."""
    cropped, _ = autocrop_fundus(img, FOREGROUND_THRESHOLD)
    return normalize_channels(resize_bilinear(cropped, TIER2_SIDE, TIER2_SIDE))
