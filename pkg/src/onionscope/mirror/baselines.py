"""SimHash and MinHash near-duplicate baselines over word tokens."""
from __future__ import annotations

import hashlib
import re
from collections import Counter

import numpy as np

__all__ = [
    "tokenize_words", "shingles", "simhash", "simhash_sim", "minhash", "minhash_sim",
    "SIMHASH_THRESHOLD", "MINHASH_THRESHOLD", "MINHASH_PERMUTATIONS", "SHINGLE_SIZE",
]

SIMHASH_THRESHOLD = 0.8
MINHASH_THRESHOLD = 0.4
MINHASH_PERMUTATIONS = 128
SHINGLE_SIZE = 4

_WORD = re.compile(r"\w+", re.UNICODE)
_PRIME = (1 << 31) - 1
_MAX = np.uint64(_PRIME)


def tokenize_words(text: str | bytes) -> list[str]:
    if isinstance(text, bytes):
        text = text.decode("utf-8", errors="replace")
    return _WORD.findall(text.lower())


def _h64(token: str) -> int:
    return int.from_bytes(hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest(), "little")


def simhash(text: str | bytes) -> int:
    """64-bit fingerprint; each word votes on every bit with its frequency."""
    counts = Counter(tokenize_words(text))
    if not counts:
        return 0
    hashes = np.array([_h64(t) for t in counts], dtype=np.uint64)
    weights = np.array(list(counts.values()), dtype=np.int64)
    bits = ((hashes[:, None] >> np.arange(64, dtype=np.uint64)) & np.uint64(1)).astype(np.int64)
    votes = (weights[:, None] * (2 * bits - 1)).sum(axis=0)
    return int(sum(1 << i for i in np.flatnonzero(votes > 0)))


def simhash_sim(a: int, b: int) -> float:
    return 1.0 - bin(a ^ b).count("1") / 64.0


def shingles(text: str | bytes, k: int = SHINGLE_SIZE) -> set[str]:
    words = tokenize_words(text)
    if not words:
        return set()
    if len(words) < k:
        return {" ".join(words)}
    return {" ".join(words[i:i + k]) for i in range(len(words) - k + 1)}


def _permutations(n: int, seed: int = 1) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    a = rng.integers(1, _PRIME, size=n, dtype=np.uint64)
    b = rng.integers(0, _PRIME, size=n, dtype=np.uint64)
    return a, b


_PERMS = _permutations(MINHASH_PERMUTATIONS)


def minhash(text: str | bytes, num_perm: int = MINHASH_PERMUTATIONS) -> np.ndarray:
    """Signature of per-permutation minima of ``(a*x + b) mod p`` over shingle hashes."""
    a, b = _PERMS if num_perm == MINHASH_PERMUTATIONS else _permutations(num_perm)
    sh = shingles(text)
    if not sh:
        return np.full(num_perm, _MAX, dtype=np.uint64)
    x = np.array([_h64(s) % _PRIME for s in sorted(sh)], dtype=np.uint64)
    values = (a[None, :] * x[:, None] + b[None, :]) % _MAX
    return values.min(axis=0)


def minhash_sim(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.mean(a == b))
