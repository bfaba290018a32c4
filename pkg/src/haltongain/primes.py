"""Prime bases for Halton-type constructions.

Coordinate j of a Halton sequence works in base b_j, the j-th prime.  This
module produces those bases with a segmented sieve and caches the result for
the lifetime of the process.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ["MAX_DIMENSION", "PrimeBasis", "first_primes", "nth_prime"]

MAX_DIMENSION = 10_000_000

_SEGMENT = 1 << 20

# Grows monotonically; never shrinks, never mutated in place by callers.
_cache: list[int] = []


def _sieve_limit(count: int) -> int:
    # p_j <= j(ln j + ln ln j) for j >= 6; below that a fixed bound suffices.
    if count < 6:
        return 16
    x = float(count)
    return int(x * (math.log(x) + math.log(math.log(x)))) + 16


def _small_sieve(limit: int) -> np.ndarray:
    """All primes <= limit, by plain Eratosthenes on a boolean array."""
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return np.flatnonzero(flags)


def _extend_cache(count: int) -> None:
    if len(_cache) >= count:
        return
    limit = _sieve_limit(count)
    base = _small_sieve(math.isqrt(limit) + 1)
    found: list[int] = []
    lo = 2
    while lo <= limit and len(found) < count:
        hi = min(lo + _SEGMENT, limit + 1)
        flags = np.ones(hi - lo, dtype=bool)
        for p in base.tolist():
            if p * p >= hi:
                break
            start = max(p * p, ((lo + p - 1) // p) * p)
            flags[start - lo :: p] = False
        if lo <= 1:
            flags[: 2 - lo] = False
        found.extend((np.flatnonzero(flags) + lo).tolist())
        lo = hi
    if len(found) < count:
        # The analytic bound cannot fail for count >= 6, but stay defensive.
        raise RuntimeError(f"sieve bound too small for {count} primes")
    _cache.clear()
    _cache.extend(found)


@dataclass(frozen=True)
class PrimeBasis:
    """The first d primes, in increasing order, as Halton bases.

    ``bases[0]`` is the base of coordinate 1.  Use :meth:`base` for the
    1-based coordinate indexing used throughout this package.
    """

    dimension: int
    bases: tuple[int, ...] = field(repr=False)

    def base(self, j: int) -> int:
        """Base of coordinate j (1-based)."""
        if not 1 <= j <= self.dimension:
            raise ValueError(f"coordinate {j} outside 1..{self.dimension}")
        return self.bases[j - 1]

    def __len__(self) -> int:
        return self.dimension

    def __repr__(self) -> str:  # avoid dumping a million bases
        head = ", ".join(str(b) for b in self.bases[:6])
        tail = ", ..." if self.dimension > 6 else ""
        return f"PrimeBasis(dimension={self.dimension}, bases=({head}{tail}))"


def first_primes(d: int) -> PrimeBasis:
    """Basis of the first d primes.  Sieved once per process, then cached."""
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    if d > MAX_DIMENSION:
        raise ValueError(f"dimension {d} exceeds supported cap {MAX_DIMENSION}")
    _extend_cache(d)
    return PrimeBasis(d, tuple(_cache[:d]))


def nth_prime(j: int) -> int:
    """The j-th prime (1-based): nth_prime(1) = 2."""
    if j < 1:
        raise ValueError(f"prime index must be >= 1, got {j}")
    if j > MAX_DIMENSION:
        raise ValueError(f"prime index {j} exceeds supported cap {MAX_DIMENSION}")
    _extend_cache(j)
    return _cache[j - 1]
