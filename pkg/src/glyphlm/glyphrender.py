"""Token text -> standardized square visual vector.

A token is rendered by horizontally concatenating the glyph bitmaps of its
characters (height 16, width the sum of glyph widths), resized to H x H with
bilinear interpolation, binarized at a threshold, and flattened row-major
into an H^2 bit vector.

The resize uses the half-pixel-center convention: output pixel (i, j)
samples the source at ((i + 0.5) * h / H - 0.5, (j + 0.5) * w / H - 0.5),
clamped to the borders, blending the four surrounding source pixels.  The
sampling weights depend only on (source size, H), so they are precomputed
as a pair of sparse interpolation matrices; single-image and batched
resizes share them and produce identical results.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .fontstore import GLYPH_HEIGHT, GlyphStore

MAX_RENDER_GLYPHS = 8  # longer tokens render from their first 8 characters
DEFAULT_THRESHOLD = 0.5


@dataclass(frozen=True)
class TokenImage:
    """Standardized token visual: H x H gray intensities and the bit vector."""

    side: int
    gray: np.ndarray     # (side, side) float64 in [0, 1]
    binary: np.ndarray   # (side * side,) uint8, 1 where gray >= threshold


def render_token(text: str, store: GlyphStore, max_glyphs: int = MAX_RENDER_GLYPHS) -> np.ndarray:
    """Concatenate glyph bitmaps of `text` into one (16, total_width) array."""
    if not text:
        raise ValueError("cannot render empty token text")
    cells = [store.glyph(ord(c)).pixels for c in text[:max_glyphs]]
    return np.concatenate(cells, axis=1)


@lru_cache(maxsize=256)
def _interp_matrix(src_size: int, dst_size: int) -> np.ndarray:
    """(dst, src) matrix applying 1-D half-pixel-center bilinear sampling."""
    s = (np.arange(dst_size) + 0.5) * src_size / dst_size - 0.5
    lo = np.floor(s).astype(np.int64)
    frac = s - lo
    lo_c = np.clip(lo, 0, src_size - 1)
    hi_c = np.clip(lo + 1, 0, src_size - 1)
    w = np.zeros((dst_size, src_size))
    rows = np.arange(dst_size)
    np.add.at(w, (rows, lo_c), 1.0 - frac)
    np.add.at(w, (rows, hi_c), frac)
    return w


def resize_bilinear(src: np.ndarray, out_side: int) -> np.ndarray:
    """Resize a 2-D intensity image to out_side x out_side."""
    if out_side < 1:
        raise ValueError("output side must be >= 1")
    src = np.asarray(src, dtype=np.float64)
    if src.ndim != 2 or src.size == 0:
        raise ValueError("source must be a non-empty 2-D array")
    h, w = src.shape
    wy = _interp_matrix(h, out_side)
    wx = _interp_matrix(w, out_side)
    return wy @ src @ wx.T


def resize_bilinear_batch(batch: np.ndarray, out_side: int) -> np.ndarray:
    """Resize a (N, h, w) stack of same-size images to (N, out_side, out_side)."""
    batch = np.asarray(batch, dtype=np.float64)
    if batch.ndim != 3:
        raise ValueError("batch must be (N, h, w)")
    _, h, w = batch.shape
    wy = _interp_matrix(h, out_side)
    wx = _interp_matrix(w, out_side)
    return np.matmul(np.matmul(wy, batch), wx.T)


def render_standardized(text: str, store: GlyphStore, out_side: int,
                        threshold: float = DEFAULT_THRESHOLD) -> TokenImage:
    """Render, resize, and binarize one token.  Empty text gives a blank image."""
    if text:
        gray = resize_bilinear(render_token(text, store), out_side)
    else:
        gray = np.zeros((out_side, out_side))
    binary = (gray >= threshold).astype(np.uint8).reshape(-1)
    return TokenImage(side=out_side, gray=gray, binary=binary)


def token_raw_vector(text: str, store: GlyphStore, out_side: int,
                     threshold: float = DEFAULT_THRESHOLD) -> np.ndarray:
    """The H^2 binary feature vector of a token (row-major flatten)."""
    return render_standardized(text, store, out_side, threshold).binary


def ink_density(bits: np.ndarray) -> float:
    """Fraction of on pixels in a raw vector or bitmap."""
    arr = np.asarray(bits)
    return float(arr.mean()) if arr.size else 0.0


def write_pgm(path, gray: np.ndarray):
    """Write an intensity image as binary PGM (P5), for visual inspection."""
    arr = np.asarray(gray, dtype=np.float64)
    px = np.clip(np.rint(arr * 255.0), 0, 255).astype(np.uint8)
    h, w = px.shape
    with open(path, "wb") as fh:
        fh.write(f"P5 {w} {h} 255\n".encode("ascii"))
        fh.write(px.tobytes())


def dump_token_images(vocab, store: GlyphStore, out_side: int, out_dir,
                      threshold: float = DEFAULT_THRESHOLD):
    """Debug dump: one PGM per token, filename = token id in hex."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for entry in vocab.entries:
        img = render_standardized(entry.text, store, out_side, threshold)
        write_pgm(out / f"{entry.id:04x}.pgm", img.gray)
