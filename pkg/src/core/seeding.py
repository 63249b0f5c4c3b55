"""
Seed derivation and splittable random streams

One master seed per run; every sub-stream seed is blake2b(master, tag, indices)
truncated to 63 bits.
"""

import hashlib
from typing import List, Sequence, TypeVar

import numpy as np

T = TypeVar("T")

_SEED_BITS = 63


def derive_seed(master: int, tag: str, *indices: int) -> int:
    """Derive a reproducible sub-seed from a master seed, a module tag and indices"""
    h = hashlib.blake2b(digest_size=8)
    h.update(str(int(master)).encode("ascii"))
    h.update(b"\x1f")
    h.update(tag.encode("utf-8"))
    for idx in indices:
        h.update(b"\x1f")
        h.update(str(int(idx)).encode("ascii"))
    return int.from_bytes(h.digest(), "big") & ((1 << _SEED_BITS) - 1)


class SeedStream:
    """numpy Generator bound to a derivable seed"""

    def __init__(self, seed: int):
        self._seed = int(seed)
        self.rng = np.random.default_rng(self._seed)

    @property
    def seed(self) -> int:
        return self._seed

    def child(self, tag: str, *indices: int) -> "SeedStream":
        """Split off an independent stream keyed by tag and indices"""
        return SeedStream(derive_seed(self._seed, tag, *indices))

    def integers(self, low: int, high: int) -> int:
        return int(self.rng.integers(low, high))

    def random(self) -> float:
        return float(self.rng.random())

    def permutation(self, n: int) -> List[int]:
        return [int(v) for v in self.rng.permutation(n)]

    def choice(self, items: Sequence[T]) -> T:
        return items[int(self.rng.integers(0, len(items)))]

    def shuffle(self, items: list) -> None:
        order = self.rng.permutation(len(items))
        items[:] = [items[i] for i in order]
