"""Unicode-centric tokenizer with identity codepoint mapping and n-gram slots.

Built-in profiles (V = 65536 or 131072) lay out token IDs as:

* ``0x0000-0xFFFF``: identity mapping to BMP codepoints, except
* ``0xD800-0xDFFF``: surrogate-escape tokens; codepoints above the BMP are
  emitted as a UTF-16-style high/low pair of these IDs, and
* ``0xE000-0xF8FF``: the private-use range, reassigned to the first 6400
  n-grams in list order (unfilled slots keep their identity mapping), and
* ``0x10000-0x1FFFF`` (profile V=131072 only): 65536 further n-gram slots.

Encoding is leftmost-longest greedy over a trie of the n-gram texts;
characters that match no n-gram fall back to their codepoint ID.  Decoding
concatenates entry texts, reconstituting surrogate-escape pairs into scalar
characters, and is the exact inverse of encode on its image.

One deliberate coverage gap: a private-use character whose ID slot has been
reassigned to an n-gram cannot be represented and encodes to U+FFFD.  All
other valid Unicode text (no unpaired surrogates) round-trips exactly.

Externally supplied vocabularies (``import_external_vocab``) carry arbitrary
token texts at arbitrary IDs; the same greedy rule applies, but text that is
not covered by any token raises EncodeError since such vocabularies have no
universal fallback.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass

KIND_CODEPOINT = "codepoint"
KIND_NGRAM = "ngram"
KIND_SURROGATE = "surrogate_escape"
KIND_SPECIAL = "special"

V_64K = 65536
V_128K = 131072
PROFILE_SIZES = (V_64K, V_128K)

SURROGATE_START = 0xD800
SURROGATE_END = 0xDFFF
HIGH_SURROGATE_START = 0xD800
LOW_SURROGATE_START = 0xDC00
PUA_START = 0xE000
PUA_END = 0xF8FF
PUA_SLOTS = PUA_END - PUA_START + 1  # 6400
PLANE1_START = 0x10000
REPLACEMENT_ID = 0xFFFD

PAD_ID = 0  # U+0000 doubles as the padding token by convention

NGRAM_MIN_LEN = 2
NGRAM_MAX_LEN = 8


class VocabError(ValueError):
    """Vocabulary construction failed (capacity, duplicates, illegal text)."""


class EncodeError(ValueError):
    """Text cannot be represented by this vocabulary."""


class DecodeError(ValueError):
    """Token ID sequence is not decodable (bad ID or unpaired surrogate)."""


@dataclass(frozen=True)
class TokenEntry:
    id: int
    kind: str
    text: str


def _surrogate_pair(cp: int) -> tuple[int, int]:
    # UTF-16 encoding of a supplementary-plane codepoint
    v = cp - 0x10000
    return HIGH_SURROGATE_START + (v >> 10), LOW_SURROGATE_START + (v & 0x3FF)


def _from_surrogate_pair(hi: int, lo: int) -> int:
    return 0x10000 + ((hi - HIGH_SURROGATE_START) << 10) + (lo - LOW_SURROGATE_START)


class _Trie:
    """Longest-match index over n-gram texts."""

    __slots__ = ("root",)

    def __init__(self):
        self.root: dict = {}

    def add(self, text: str, token_id: int):
        node = self.root
        for ch in text:
            node = node.setdefault(ch, {})
        node[""] = token_id

    def longest_match(self, text: str, start: int) -> tuple[int, int] | None:
        """Return (token_id, match_length) for the longest match at start."""
        node = self.root
        best = None
        i = start
        n = len(text)
        while i < n:
            node = node.get(text[i])
            if node is None:
                break
            i += 1
            tid = node.get("")
            if tid is not None:
                best = (tid, i - start)
        return best


class Vocab:
    """Immutable token vocabulary; build via build_vocab / import_external_vocab."""

    def __init__(self, entries: list[TokenEntry], profile: dict, _internal=False):
        if not _internal:
            raise TypeError("use build_vocab() or import_external_vocab()")
        self.entries = entries
        self.profile = profile
        self._trie = _Trie()
        self._has_fallback = bool(profile.get("identity_fallback", False))
        texts_seen: dict[str, int] = {}
        for e in entries:
            if e.kind in (KIND_CODEPOINT, KIND_NGRAM):
                if e.text in texts_seen:
                    raise VocabError(
                        f"duplicate token text {e.text!r} at ids "
                        f"{texts_seen[e.text]} and {e.id}"
                    )
                texts_seen[e.text] = e.id
            if e.kind == KIND_NGRAM:
                self._trie.add(e.text, e.id)
            elif e.kind == KIND_CODEPOINT and not self._has_fallback:
                # imported vocab: identity singles are only reachable via the trie
                self._trie.add(e.text, e.id)

    @property
    def size(self) -> int:
        return len(self.entries)

    @property
    def ngram_count(self) -> int:
        return sum(1 for e in self.entries if e.kind == KIND_NGRAM)

    def entry(self, token_id: int) -> TokenEntry:
        if not (0 <= token_id < self.size):
            raise DecodeError(f"token id {token_id} out of range [0, {self.size})")
        return self.entries[token_id]

    # -- encoding ----------------------------------------------------------

    def encode(self, text: str) -> list[int]:
        """Greedy leftmost-longest tokenization of `text`."""
        out: list[int] = []
        trie = self._trie
        fallback = self._has_fallback
        i = 0
        n = len(text)
        while i < n:
            m = trie.longest_match(text, i)
            if m is not None:
                out.append(m[0])
                i += m[1]
                continue
            cp = ord(text[i])
            if SURROGATE_START <= cp <= SURROGATE_END:
                raise EncodeError(
                    f"input contains a lone surrogate U+{cp:04X} at position {i}"
                )
            if not fallback:
                raise EncodeError(
                    f"no token covers {text[i]!r} at position {i} "
                    "(imported vocabulary without universal fallback)"
                )
            if cp <= 0xFFFF:
                entry = self.entries[cp]
                if entry.kind == KIND_CODEPOINT:
                    out.append(cp)
                else:
                    # private-use slot reassigned to an n-gram: not representable
                    out.append(REPLACEMENT_ID)
            else:
                hi, lo = _surrogate_pair(cp)
                out.append(hi)
                out.append(lo)
            i += 1
        return out

    def decode(self, ids) -> str:
        """Inverse of encode on its image; raises DecodeError on bad input."""
        parts: list[str] = []
        pending_high: int | None = None
        for tid in ids:
            tid = int(tid)
            entry = self.entry(tid)
            if entry.kind == KIND_SURROGATE:
                if pending_high is None:
                    if tid >= LOW_SURROGATE_START:
                        raise DecodeError(f"low surrogate id 0x{tid:04X} without high")
                    pending_high = tid
                else:
                    if tid < LOW_SURROGATE_START:
                        raise DecodeError(f"high surrogate id 0x{tid:04X} after high")
                    parts.append(chr(_from_surrogate_pair(pending_high, tid)))
                    pending_high = None
                continue
            if pending_high is not None:
                raise DecodeError(f"high surrogate id 0x{pending_high:04X} unpaired")
            parts.append(entry.text)
        if pending_high is not None:
            raise DecodeError(f"high surrogate id 0x{pending_high:04X} at end of input")
        return "".join(parts)

    def __eq__(self, other):
        if not isinstance(other, Vocab):
            return NotImplemented
        return self.entries == other.entries and self.profile == other.profile


def _validate_ngram(text: str, seen: set[str]):
    if not (NGRAM_MIN_LEN <= len(text) <= NGRAM_MAX_LEN):
        raise VocabError(
            f"n-gram {text!r} has length {len(text)}, "
            f"allowed {NGRAM_MIN_LEN}..{NGRAM_MAX_LEN}"
        )
    if any(SURROGATE_START <= ord(c) <= SURROGATE_END for c in text):
        raise VocabError(f"n-gram {text!r} contains a surrogate codepoint")
    if text in seen:
        raise VocabError(f"duplicate n-gram {text!r}")
    seen.add(text)


def build_vocab(ngram_list, v_size: int = V_64K) -> Vocab:
    """Build a profile vocabulary with the identity + n-gram ID layout.

    N-grams are assigned in list order: the first 6400 into the private-use
    range 0xE000-0xF8FF, the rest (profile V=131072 only) from 0x10000 up.
    """
    if v_size not in PROFILE_SIZES:
        raise VocabError(f"profile size must be one of {PROFILE_SIZES}, got {v_size}")
    ngram_list = list(ngram_list)
    capacity = PUA_SLOTS + (v_size - PLANE1_START if v_size > V_64K else 0)
    if len(ngram_list) > capacity:
        raise VocabError(
            f"{len(ngram_list)} n-grams exceed capacity {capacity} for V={v_size}"
        )
    seen: set[str] = set()
    for t in ngram_list:
        _validate_ngram(t, seen)

    entries: list[TokenEntry] = []
    for tid in range(0x10000):
        if SURROGATE_START <= tid <= SURROGATE_END:
            entries.append(TokenEntry(tid, KIND_SURROGATE, ""))
        elif PUA_START <= tid <= PUA_END and tid - PUA_START < len(ngram_list):
            entries.append(TokenEntry(tid, KIND_NGRAM, ngram_list[tid - PUA_START]))
        else:
            entries.append(TokenEntry(tid, KIND_CODEPOINT, chr(tid)))
    for tid in range(0x10000, v_size):
        k = PUA_SLOTS + (tid - PLANE1_START)
        if k < len(ngram_list):
            entries.append(TokenEntry(tid, KIND_NGRAM, ngram_list[k]))
        else:
            entries.append(TokenEntry(tid, KIND_SPECIAL, ""))

    profile = {
        "v_size": v_size,
        "ngram_capacity": capacity,
        "identity_fallback": True,
    }
    return Vocab(entries, profile, _internal=True)


def import_external_vocab(token_texts) -> Vocab:
    """Wrap an id-ordered list of token texts as a Vocab.

    Entries keep the external texts verbatim.  A text is codepoint-kind only
    when it is a single character whose codepoint equals its position; all
    other texts are n-gram-kind regardless of length.  Encode/decode use the
    same greedy rule, without the identity/surrogate fallback.
    """
    token_texts = list(token_texts)
    if len(token_texts) > 2**21:
        raise VocabError(f"external vocabulary too large: {len(token_texts)}")
    entries = []
    for tid, text in enumerate(token_texts):
        if not isinstance(text, str) or text == "":
            raise VocabError(f"empty or non-string token text at id {tid}")
        kind = KIND_CODEPOINT if (len(text) == 1 and ord(text) == tid) else KIND_NGRAM
        entries.append(TokenEntry(tid, kind, text))
    profile = {
        "v_size": len(entries),
        "ngram_capacity": len(entries),
        "identity_fallback": False,
    }
    return Vocab(entries, profile, _internal=True)


def avg_chars_per_token(vocab: Vocab, corpus: str) -> float:
    """Scalar character count divided by encoded token count."""
    if not corpus:
        raise ValueError("corpus is empty")
    return len(corpus) / len(vocab.encode(corpus))


def mine_ngrams(corpus: str, top_k: int, min_len: int = NGRAM_MIN_LEN,
                max_len: int = NGRAM_MAX_LEN) -> list[str]:
    """Top-k most frequent substrings of length min_len..max_len.

    Plain occurrence counting over every substring position.  Ties break by
    text ordering so the result is deterministic for a given corpus.
    """
    if not (1 <= min_len <= max_len):
        raise ValueError("need 1 <= min_len <= max_len")
    counts: Counter[str] = Counter()
    n = len(corpus)
    for length in range(min_len, max_len + 1):
        for i in range(n - length + 1):
            counts[corpus[i : i + length]] += 1
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return [t for t, _ in ranked[:top_k]]


# -- persistence (JSON Lines, one token object per line) -------------------


def save_vocab(vocab: Vocab, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(vocab_to_jsonl(vocab))


def vocab_to_jsonl(vocab: Vocab) -> str:
    lines = [
        json.dumps({"id": e.id, "kind": e.kind, "text": e.text}, ensure_ascii=False)
        for e in vocab.entries
    ]
    return "\n".join(lines) + "\n"


def load_vocab(path) -> Vocab:
    entries: list[TokenEntry] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            entries.append(TokenEntry(int(obj["id"]), obj["kind"], obj["text"]))
    if not entries:
        raise VocabError("vocabulary file contains no tokens")
    if [e.id for e in entries] != list(range(len(entries))):
        raise VocabError("vocabulary file ids are not dense and ordered")
    # reconstruct the profile from the entry layout
    has_surrogates = any(e.kind == KIND_SURROGATE for e in entries)
    profile = {
        "v_size": len(entries),
        "ngram_capacity": PUA_SLOTS + max(0, len(entries) - PLANE1_START)
        if has_surrogates
        else len(entries),
        "identity_fallback": has_surrogates,
    }
    return Vocab(entries, profile, _internal=True)
