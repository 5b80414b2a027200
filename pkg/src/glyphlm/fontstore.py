"""Bitmap font loading from GNU Unifont `.hex` files.

The `.hex` format is one glyph per line, ``CODEPOINT:PAYLOAD``, where the
codepoint is 4-6 uppercase hex digits and the payload is 32 hex digits
(8x16 glyph) or 64 hex digits (16x16 glyph).  Bits are MSB-first within
each row, rows run top to bottom.  Lines starting with ``#`` are comments.

A loaded GlyphStore is immutable and answers every Unicode scalar value:
codepoints missing from the file fall back to a hollow-rectangle notdef
glyph, so lookups never fail.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

GLYPH_HEIGHT = 16
_HEX_DIGITS = set("0123456789abcdefABCDEF")


class FontError(Exception):
    """Base class for font parsing and loading failures."""


class HexLineError(FontError):
    """A single `.hex` line is malformed."""


class FontLoadError(FontError):
    """The font source as a whole is unusable (e.g. no glyphs)."""


@dataclass(frozen=True)
class GlyphBitmap:
    """Monochrome glyph, ``pixels`` is a (16, width) uint8 array, 1 = ink."""

    width: int
    height: int
    pixels: np.ndarray

    def __post_init__(self):
        if self.width not in (8, 16):
            raise ValueError(f"glyph width must be 8 or 16, got {self.width}")
        if self.height != GLYPH_HEIGHT:
            raise ValueError(f"glyph height must be {GLYPH_HEIGHT}")
        if self.pixels.shape != (self.height, self.width):
            raise ValueError(
                f"pixel array shape {self.pixels.shape} does not match "
                f"{(self.height, self.width)}"
            )

    def __eq__(self, other):
        if not isinstance(other, GlyphBitmap):
            return NotImplemented
        return (
            self.width == other.width
            and self.height == other.height
            and np.array_equal(self.pixels, other.pixels)
        )

    def to_hex_payload(self) -> str:
        """Serialize back to the uppercase hex payload of a `.hex` line."""
        bits = np.packbits(self.pixels.astype(np.uint8), axis=1)
        return bits.tobytes().hex().upper()

    @property
    def ink_fraction(self) -> float:
        return float(self.pixels.mean())


def _notdef_bitmap() -> GlyphBitmap:
    # hollow 8x16 rectangle: 1-pixel border on all four sides
    px = np.zeros((GLYPH_HEIGHT, 8), dtype=np.uint8)
    px[0, :] = 1
    px[-1, :] = 1
    px[:, 0] = 1
    px[:, -1] = 1
    return GlyphBitmap(width=8, height=GLYPH_HEIGHT, pixels=px)


NOTDEF = _notdef_bitmap()


def parse_hex_line(line: str) -> tuple[int, GlyphBitmap]:
    """Parse one ``CODEPOINT:PAYLOAD`` line into (codepoint, GlyphBitmap).

    Raises HexLineError for a missing separator, a malformed codepoint,
    a payload of the wrong length, or non-hex payload characters.
    """
    line = line.strip()
    if not line or line.startswith("#"):
        raise HexLineError("empty or comment line")
    sep = line.find(":")
    if sep < 0:
        raise HexLineError(f"missing ':' separator: {line[:40]!r}")
    cp_text, payload = line[:sep], line[sep + 1 :]
    if not (4 <= len(cp_text) <= 6) or any(c not in _HEX_DIGITS for c in cp_text):
        raise HexLineError(f"malformed codepoint field {cp_text!r}")
    cp = int(cp_text, 16)
    if cp > 0x10FFFF:
        raise HexLineError(f"codepoint U+{cp:X} out of Unicode range")
    if len(payload) not in (32, 64):
        raise HexLineError(
            f"payload must be 32 or 64 hex chars, got {len(payload)}"
        )
    if any(c not in _HEX_DIGITS for c in payload):
        raise HexLineError("payload contains non-hex characters")
    width = 8 if len(payload) == 32 else 16
    raw = bytes.fromhex(payload)
    bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8))
    pixels = bits.reshape(GLYPH_HEIGHT, width)
    return cp, GlyphBitmap(width=width, height=GLYPH_HEIGHT, pixels=pixels)


@dataclass
class LoadStats:
    lines_total: int = 0
    glyphs_loaded: int = 0
    lines_skipped: int = 0
    duplicates: int = 0


@dataclass
class GlyphStore:
    """Codepoint -> GlyphBitmap table with a notdef fallback.

    Immutable after load; safe for concurrent reads.
    """

    _glyphs: dict[int, GlyphBitmap]
    notdef: GlyphBitmap = field(default_factory=lambda: NOTDEF)
    stats: LoadStats = field(default_factory=LoadStats)

    def glyph(self, cp: int) -> GlyphBitmap:
        """Total lookup: returns the stored bitmap or notdef. Never fails."""
        if not (0 <= cp <= 0x10FFFF):
            raise ValueError(f"not a Unicode codepoint: {cp}")
        return self._glyphs.get(cp, self.notdef)

    def __contains__(self, cp: int) -> bool:
        return cp in self._glyphs

    def __len__(self) -> int:
        return len(self._glyphs)

    def codepoints(self) -> list[int]:
        return sorted(self._glyphs)

    def __eq__(self, other):
        if not isinstance(other, GlyphStore):
            return NotImplemented
        if set(self._glyphs) != set(other._glyphs):
            return False
        return all(self._glyphs[cp] == other._glyphs[cp] for cp in self._glyphs)


def load_font(source) -> GlyphStore:
    """Load a `.hex` font from a path, text stream, or byte stream.

    Comment and blank lines are skipped; malformed lines are counted and
    skipped; duplicate codepoints resolve last-wins.  Raises FontLoadError
    if the source yields no glyphs at all.
    """
    if isinstance(source, (str, bytes)) and not isinstance(source, bytes):
        fh = open(source, "r", encoding="utf-8")
        close = True
    elif isinstance(source, bytes):
        fh = io.StringIO(source.decode("utf-8"))
        close = False
    elif isinstance(source, io.TextIOBase):
        fh = source
        close = False
    else:
        fh = io.TextIOWrapper(source, encoding="utf-8")
        close = False

    glyphs: dict[int, GlyphBitmap] = {}
    stats = LoadStats()
    try:
        for raw_line in fh:
            line = raw_line.strip()
            if not line or line.startswith("#"):
                continue
            stats.lines_total += 1
            try:
                cp, bitmap = parse_hex_line(line)
            except HexLineError:
                stats.lines_skipped += 1
                continue
            if cp in glyphs:
                stats.duplicates += 1
            glyphs[cp] = bitmap
    finally:
        if close:
            fh.close()

    if not glyphs:
        raise FontLoadError("no glyphs parsed from font source")
    stats.glyphs_loaded = len(glyphs)
    return GlyphStore(_glyphs=glyphs, stats=stats)
