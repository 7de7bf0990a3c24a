"""
Deterministic pseudo-random numbers for sampled searches.

xoshiro256** seeded through splitmix64. The algorithm name is echoed in every
report's configuration so a sampled run can be reproduced from its seed.
Named substreams (``split``) keep independent sampling phases from shifting
each other when one phase draws more numbers. A substream is seeded from the
hash, not from the parent generator's state: the first 8 bytes (big-endian) of
SHA-256 over the UTF-8 text ``"{seed}:{tag}"``, fed through splitmix64 like any
other seed.
"""

import hashlib
from typing import List, Sequence, Tuple, TypeVar


DEFAULT_SEED = 0
PRNG_ALGORITHM = "xoshiro256**"

_MASK = (1 << 64) - 1

T = TypeVar("T")


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK


def _splitmix64(state: int) -> Tuple[int, int]:
    state = (state + 0x9E3779B97F4A7C15) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return state, z ^ (z >> 31)


class Xoshiro256:
    """xoshiro256** generator with named substreams."""

    def __init__(self, seed: int = DEFAULT_SEED):
        self.seed = seed
        state = seed & _MASK
        words = []
        for _ in range(4):
            state, value = _splitmix64(state)
            words.append(value)
        self._s = words

    def split(self, tag: str) -> "Xoshiro256":
        """Independent generator for a named substream."""
        digest = hashlib.sha256(f"{self.seed}:{tag}".encode("utf-8")).digest()
        return Xoshiro256(int.from_bytes(digest[:8], byteorder="big"))

    def next_u64(self) -> int:
        s = self._s
        result = (_rotl((s[1] * 5) & _MASK, 7) * 9) & _MASK
        t = (s[1] << 17) & _MASK
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def randbelow(self, n: int) -> int:
        """
        Uniform integer in [0, n).

        Raises:
            ValueError: If n is not positive
        """
        if n <= 0:
            raise ValueError("n must be positive")
        # Rejection sampling keeps the draw unbiased
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def randint(self, a: int, b: int) -> int:
        """Uniform integer in [a, b] inclusive."""
        if a > b:
            raise ValueError("a must be <= b")
        return a + self.randbelow(b - a + 1)

    def choice(self, items: Sequence[T]) -> T:
        return items[self.randbelow(len(items))]

    def shuffle(self, items: List[T]) -> List[T]:
        """Fisher-Yates shuffle in place; returns the list."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]
        return items

    def sample(self, population: Sequence[T], k: int) -> List[T]:
        """k distinct items in draw order."""
        pool = list(population)
        if k > len(pool):
            raise ValueError("sample larger than population")
        return self.shuffle(pool)[:k]
