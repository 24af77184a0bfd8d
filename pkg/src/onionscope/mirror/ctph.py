"""Context-triggered piecewise hashing (Kornblum's spamsum construction).

A 7-byte rolling hash picks piece boundaries; every piece contributes one
base-64 symbol taken from an FNV-style hash of its bytes. Two signatures are
produced, at the block size and at twice the block size, so digests whose
block sizes differ by a factor of two remain comparable.

The rolling value is a pure function of the last seven bytes, so boundary
detection is vectorized with numpy; only the per-piece FNV fold runs in a
Python loop.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = ["FuzzyHash", "ctph_hash", "ctph_compare", "compare_digests", "lcs_length",
           "indel_distance", "eliminate_sequences", "score_strings"]

ROLLING_WINDOW = 7
MIN_BLOCKSIZE = 3
SPAMSUM_LENGTH = 64
HASH_PRIME = 0x01000193
HASH_INIT = 0x28021967
B64 = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/"
_MASK = 0xFFFFFFFF


@dataclass(frozen=True)
class FuzzyHash:
    block_size: int
    sig1: str
    sig2: str

    def __str__(self) -> str:
        return f"{self.block_size}:{self.sig1}:{self.sig2}"

    @classmethod
    def parse(cls, text: str) -> "FuzzyHash":
        bs, sig1, sig2 = text.strip().split(":", 2)
        return cls(int(bs), sig1, sig2.split(",", 1)[0])


def _rolling_values(data: bytes) -> np.ndarray:
    """Rolling hash after each byte, identical to the incremental update."""
    n = len(data)
    c = np.frombuffer(data, dtype=np.uint8).astype(np.uint64)
    pad = np.concatenate([np.zeros(ROLLING_WINDOW, dtype=np.uint64), c])
    h1 = np.zeros(n, dtype=np.uint64)
    h2 = np.zeros(n, dtype=np.uint64)
    h3 = np.zeros(n, dtype=np.uint64)
    for age in range(ROLLING_WINDOW):
        lagged = pad[ROLLING_WINDOW - age: ROLLING_WINDOW - age + n]
        h1 += lagged
        h2 += np.uint64(ROLLING_WINDOW - age) * lagged
        h3 ^= (lagged << np.uint64(5 * age)) & np.uint64(_MASK)
    return (h1 + h2 + h3) & np.uint64(_MASK)


def _fold(data: bytes, start: int, end: int, h: int = HASH_INIT) -> int:
    for b in data[start:end]:
        h = ((h * HASH_PRIME) & _MASK) ^ b
    return h


def _signature(data: bytes, triggers: np.ndarray, roll_end: int, limit: int) -> str:
    """Spamsum signature given the trigger positions for one block size.

    The first ``limit - 1`` triggers close a piece each. After that the last
    symbol keeps tracking the running hash and is finalized at the end of the
    input when the rolling value is non-zero.
    """
    out = []
    start = 0
    closing = triggers[: limit - 1]
    for pos in closing:
        end = int(pos) + 1
        out.append(B64[_fold(data, start, end) % 64])
        start = end
    if len(triggers) >= limit:
        tail_end = len(data) if roll_end != 0 else int(triggers[-1]) + 1
        out.append(B64[_fold(data, start, tail_end) % 64])
    elif roll_end != 0:
        out.append(B64[_fold(data, start, len(data)) % 64])
    return "".join(out)


def ctph_hash(data: bytes | str) -> FuzzyHash:
    """Fuzzy hash of ``data``; deterministic, empty input allowed."""
    if isinstance(data, str):
        data = data.encode("utf-8")
    n = len(data)
    bs = MIN_BLOCKSIZE
    while bs * SPAMSUM_LENGTH < n:
        bs *= 2
    if n == 0:
        return FuzzyHash(bs, "", "")
    roll = _rolling_values(data)
    roll_end = int(roll[-1])

    def triggers(size):
        return np.flatnonzero(roll % np.uint64(size) == np.uint64(size - 1))

    t1 = triggers(bs)
    # shrink the block size while the first signature would stay under half length
    while bs > MIN_BLOCKSIZE and min(len(t1), SPAMSUM_LENGTH - 1) < SPAMSUM_LENGTH // 2:
        bs //= 2
        t1 = triggers(bs)
    t2 = triggers(2 * bs)
    sig1 = _signature(data, t1, roll_end, SPAMSUM_LENGTH)
    sig2 = _signature(data, t2, roll_end, SPAMSUM_LENGTH // 2)
    return FuzzyHash(bs, sig1, sig2)


# -- comparison -------------------------------------------------------------

@lru_cache(maxsize=1 << 16)
def eliminate_sequences(sig: str) -> str:
    """Collapse runs of more than three identical symbols down to three."""
    out = []
    for i, ch in enumerate(sig):
        if i >= 3 and ch == sig[i - 1] == sig[i - 2] == sig[i - 3]:
            continue
        out.append(ch)
    return "".join(out)


def lcs_length(a: str, b: str) -> int:
    """Longest common subsequence length, bit-parallel over ``a``."""
    if not a or not b:
        return 0
    masks: dict[str, int] = {}
    for i, ch in enumerate(a):
        masks[ch] = masks.get(ch, 0) | (1 << i)
    full = (1 << len(a)) - 1
    v = full
    for ch in b:
        u = v & masks.get(ch, 0)
        v = ((v + u) | (v - u)) & full
    return len(a) - bin(v).count("1")


def indel_distance(a: str, b: str) -> int:
    """Edit distance with insert/delete cost 1 and substitution cost 2."""
    return len(a) + len(b) - 2 * lcs_length(a, b)


@lru_cache(maxsize=1 << 16)
def _windows(sig: str) -> frozenset:
    return frozenset(sig[i:i + ROLLING_WINDOW] for i in range(len(sig) - ROLLING_WINDOW + 1))


def _has_common_substring(a: str, b: str) -> bool:
    if len(a) < ROLLING_WINDOW or len(b) < ROLLING_WINDOW:
        return False
    return not _windows(a).isdisjoint(_windows(b))


def score_strings(a: str, b: str, block_size: int) -> int:
    if len(a) > SPAMSUM_LENGTH or len(b) > SPAMSUM_LENGTH:
        return 0
    if not _has_common_substring(a, b):
        return 0
    dist = indel_distance(a, b)
    scaled = (dist * SPAMSUM_LENGTH) // (len(a) + len(b))
    scaled = (100 * scaled) // SPAMSUM_LENGTH
    if scaled >= 100:
        return 0
    score = 100 - scaled
    # small block sizes: cap so short matches cannot claim high similarity
    if block_size >= (99 + ROLLING_WINDOW) // ROLLING_WINDOW * MIN_BLOCKSIZE:
        return score
    cap = block_size // MIN_BLOCKSIZE * min(len(a), len(b))
    return min(score, cap)


def ctph_compare(a: FuzzyHash, b: FuzzyHash) -> int:
    """Similarity 0..100 between two fuzzy hashes; symmetric."""
    ba, bb = a.block_size, b.block_size
    if ba != bb and ba != 2 * bb and bb != 2 * ba:
        return 0
    a1, a2 = eliminate_sequences(a.sig1), eliminate_sequences(a.sig2)
    b1, b2 = eliminate_sequences(b.sig1), eliminate_sequences(b.sig2)
    if ba == bb:
        if a1 and a1 == b1 and a2 == b2:
            return 100
        return max(score_strings(a1, b1, ba), score_strings(a2, b2, 2 * ba))
    if ba == 2 * bb:
        return score_strings(a1, b2, ba)
    return score_strings(a2, b1, bb)


def compare_digests(a: str, b: str) -> int:
    return ctph_compare(FuzzyHash.parse(a), FuzzyHash.parse(b))
