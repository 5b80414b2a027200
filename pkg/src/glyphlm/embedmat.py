"""Assemble, freeze, and persist the V x d_model embedding matrix.

Pipeline per token: text -> raw H^2 bit vector -> PCA projection -> L2
normalization.  The PCA model is fit once over the raw vectors of the whole
vocabulary.  Tokens whose raw vector is all zero (blank renders: spaces,
escape tokens with empty text) keep an all-zero embedding row rather than
being centered and normalized; every other row has unit norm.

The random-bitmap baseline replaces each token's raw vector with H^2
Bernoulli(0.5) bits drawn from the Philox 4x64-10 counter-based generator
keyed by (seed, token_id), then runs the identical PCA + normalize path.
Philox is fully specified and seedable, so the ablation is reproducible
across machines and implementations.

File format (little-endian, bit-exact round-trip):

    magic       4 bytes  b"BVVE"
    version     u32
    V           u64
    d_model     u32
    H           u32
    provenance  u8       0=visual 1=random_bitmap 2=learned
    frozen      u8
    vocab_hash  32 bytes (SHA-256 of the vocabulary JSONL)
    pca_mean    D   f64  (D = H^2)
    pca_comps   k*D f64  (k = d_model, row-major)
    rows        V*d_model f32 (row-major)
"""

from __future__ import annotations

import hashlib
import struct
import warnings
from dataclasses import dataclass

import numpy as np

from . import pca as _pca
from .fontstore import GlyphStore
from .formats import (
    BadMagicError,
    FileFormatError,
    TruncatedFileError,
    VersionMismatchError,
)
from .glyphrender import (
    DEFAULT_THRESHOLD,
    MAX_RENDER_GLYPHS,
    render_token,
    resize_bilinear_batch,
)
from .univoc import Vocab, vocab_to_jsonl

MAGIC = b"BVVE"
FORMAT_VERSION = 1

PROVENANCE_VISUAL = "visual"
PROVENANCE_RANDOM = "random_bitmap"
PROVENANCE_LEARNED = "learned"
_PROVENANCE_CODES = {PROVENANCE_VISUAL: 0, PROVENANCE_RANDOM: 1, PROVENANCE_LEARNED: 2}
_PROVENANCE_NAMES = {v: k for k, v in _PROVENANCE_CODES.items()}

_HEADER = struct.Struct("<4sIQIIBB")

EmbeddingFormatError = FileFormatError


@dataclass
class EmbeddingMatrix:
    rows: np.ndarray            # (V, d_model) float32
    provenance: str
    frozen: bool
    resolution: int             # H, source bitmap side
    vocab_hash: bytes           # 32-byte SHA-256 of the vocab JSONL
    pca_mean: np.ndarray        # (D,) float64
    pca_components: np.ndarray  # (d_model, D) float64

    @property
    def v_size(self) -> int:
        return self.rows.shape[0]

    @property
    def d_model(self) -> int:
        return self.rows.shape[1]


def vocab_digest(vocab: Vocab) -> bytes:
    """SHA-256 over the canonical JSONL serialization of the vocabulary."""
    return hashlib.sha256(vocab_to_jsonl(vocab).encode("utf-8")).digest()


def raw_visual_matrix(vocab: Vocab, store: GlyphStore, out_side: int,
                      threshold: float = DEFAULT_THRESHOLD) -> np.ndarray:
    """(V, H^2) uint8 matrix of standardized raw vectors for every token.

    Tokens are rendered in width groups so same-size bitmaps resize in one
    batched call; the result is identical to per-token rendering.
    """
    v = vocab.size
    out = np.zeros((v, out_side * out_side), dtype=np.uint8)
    groups: dict[int, tuple[list[int], list[np.ndarray]]] = {}
    for entry in vocab.entries:
        if not entry.text:
            continue  # blank raw vector stays zero
        bitmap = render_token(entry.text, store, MAX_RENDER_GLYPHS)
        ids, mats = groups.setdefault(bitmap.shape[1], ([], []))
        ids.append(entry.id)
        mats.append(bitmap)
    for _, (ids, mats) in sorted(groups.items()):
        gray = resize_bilinear_batch(np.stack(mats), out_side)
        bits = (gray >= threshold).astype(np.uint8)
        out[np.array(ids)] = bits.reshape(len(ids), -1)
    return out


def random_bitmap_matrix(v_size: int, seed: int, out_side: int) -> np.ndarray:
    """(V, H^2) Bernoulli(0.5) bits, Philox keyed by (seed, token_id)."""
    d = out_side * out_side
    out = np.empty((v_size, d), dtype=np.uint8)
    for tid in range(v_size):
        gen = np.random.Generator(
            np.random.Philox(key=np.array([seed, tid], dtype=np.uint64))
        )
        out[tid] = gen.integers(0, 2, size=d, dtype=np.uint8)
    return out


def _project_and_normalize(raw: np.ndarray, d_model: int):
    model = _pca.fit(raw.astype(np.float64), d_model)
    projected = model.transform(raw.astype(np.float64))
    norms = np.linalg.norm(projected, axis=1)
    blank = ~raw.any(axis=1)
    rows = np.zeros_like(projected)
    live = ~blank & (norms > 0)
    rows[live] = projected[live] / norms[live, None]
    return rows.astype(np.float32), model


def build_visual_embeddings(vocab: Vocab, store: GlyphStore, out_side: int,
                            d_model: int) -> EmbeddingMatrix:
    """Render + PCA-project + normalize the whole vocabulary, frozen."""
    _check_dims(out_side, d_model)
    raw = raw_visual_matrix(vocab, store, out_side)
    rows, model = _project_and_normalize(raw, d_model)
    return EmbeddingMatrix(
        rows=rows,
        provenance=PROVENANCE_VISUAL,
        frozen=True,
        resolution=out_side,
        vocab_hash=vocab_digest(vocab),
        pca_mean=model.mean,
        pca_components=model.components,
    )


def build_random_embeddings(vocab: Vocab, seed: int, out_side: int,
                            d_model: int) -> EmbeddingMatrix:
    """Random-bitmap ablation baseline: noise bitmaps through the same path."""
    _check_dims(out_side, d_model)
    raw = random_bitmap_matrix(vocab.size, seed, out_side)
    rows, model = _project_and_normalize(raw, d_model)
    return EmbeddingMatrix(
        rows=rows,
        provenance=PROVENANCE_RANDOM,
        frozen=True,
        resolution=out_side,
        vocab_hash=vocab_digest(vocab),
        pca_mean=model.mean,
        pca_components=model.components,
    )


def _check_dims(out_side: int, d_model: int):
    if d_model > out_side * out_side:
        raise ValueError(
            f"d_model={d_model} exceeds raw dimensionality H^2={out_side * out_side}"
        )


# -- persistence ------------------------------------------------------------


def save_embeddings(matrix: EmbeddingMatrix, path):
    v, d = matrix.rows.shape
    dim = matrix.resolution * matrix.resolution
    header = _HEADER.pack(
        MAGIC,
        FORMAT_VERSION,
        v,
        d,
        matrix.resolution,
        _PROVENANCE_CODES[matrix.provenance],
        1 if matrix.frozen else 0,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(matrix.vocab_hash)
        fh.write(np.ascontiguousarray(matrix.pca_mean, dtype="<f8").tobytes())
        assert matrix.pca_components.shape == (d, dim)
        fh.write(np.ascontiguousarray(matrix.pca_components, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(matrix.rows, dtype="<f4").tobytes())


def load_embeddings(path, vocab: Vocab | None = None) -> EmbeddingMatrix:
    """Load a BVVE file; warns if `vocab` is given and its hash differs."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _HEADER.size + 32:
        raise TruncatedFileError(f"file too short for header: {len(blob)} bytes")
    magic, version, v, d, side, prov_code, frozen = _HEADER.unpack_from(blob, 0)
    if magic != MAGIC:
        raise BadMagicError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != FORMAT_VERSION:
        raise VersionMismatchError(f"unsupported version {version}")
    if prov_code not in _PROVENANCE_NAMES:
        raise EmbeddingFormatError(f"unknown provenance code {prov_code}")
    off = _HEADER.size
    vocab_hash = blob[off : off + 32]
    off += 32
    dim = side * side
    need = off + dim * 8 + d * dim * 8 + v * d * 4
    if len(blob) < need:
        raise TruncatedFileError(f"expected {need} bytes, file has {len(blob)}")
    if len(blob) > need:
        raise EmbeddingFormatError(f"trailing data: {len(blob) - need} extra bytes")
    mean = np.frombuffer(blob, dtype="<f8", count=dim, offset=off).copy()
    off += dim * 8
    comps = np.frombuffer(blob, dtype="<f8", count=d * dim, offset=off)
    comps = comps.reshape(d, dim).copy()
    off += d * dim * 8
    rows = np.frombuffer(blob, dtype="<f4", count=v * d, offset=off)
    rows = rows.reshape(v, d).copy()

    matrix = EmbeddingMatrix(
        rows=rows,
        provenance=_PROVENANCE_NAMES[prov_code],
        frozen=bool(frozen),
        resolution=side,
        vocab_hash=vocab_hash,
        pca_mean=mean,
        pca_components=comps,
    )
    if vocab is not None and vocab_digest(vocab) != vocab_hash:
        warnings.warn(
            "embedding file vocab_hash does not match the supplied vocabulary",
            stacklevel=2,
        )
    return matrix


# -- diagnostics ------------------------------------------------------------


def row_norm_stats(matrix: EmbeddingMatrix) -> dict:
    norms = np.linalg.norm(matrix.rows.astype(np.float64), axis=1)
    zero = norms == 0.0
    live = norms[~zero]
    return {
        "zero_rows": int(zero.sum()),
        "min_norm": float(live.min()) if live.size else 0.0,
        "max_norm": float(live.max()) if live.size else 0.0,
        "mean_norm": float(live.mean()) if live.size else 0.0,
    }


def density_length_stats(vocab: Vocab, store: GlyphStore, out_side: int):
    """(char_lengths, ink_densities, pearson_r) over all multi-character tokens."""
    raw = raw_visual_matrix(vocab, store, out_side)
    ids = [e.id for e in vocab.entries if len(e.text) >= 2]
    lengths = np.array([len(vocab.entries[i].text) for i in ids], dtype=np.float64)
    densities = raw[ids].mean(axis=1)
    return lengths, densities, pearson(lengths, densities)


def pearson(x: np.ndarray, y: np.ndarray) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size < 2 or x.std() == 0.0 or y.std() == 0.0:
        return 0.0
    return float(np.corrcoef(x, y)[0, 1])
