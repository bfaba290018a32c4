"""Halton points, their digit expansions, and elementary-interval strata.

The i-th point's coordinate j is the base-b_j radical inverse of i: write
i = sum_l a_l * b^(l-1) and reflect the digits about the radix point,
x = sum_l a_l * b^(-l).  All structural logic here (strata, residue tests)
works on the digits directly; floats are a derived view.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .primes import PrimeBasis

__all__ = [
    "MAX_INDEX",
    "PrecisionError",
    "DigitVector",
    "PointSet",
    "default_precision",
    "digits_of",
    "radical_inverse",
    "halton_points",
    "stratum_index",
    "residue_match",
    "stratum_counts",
    "stratum_occupancy",
]

# Point indices are 64-bit; the default digit precision is chosen to match.
MAX_INDEX = 1 << 64
_PRECISION_CAP = 64


class PrecisionError(ValueError):
    """A digit expansion cannot represent the requested index or level."""


def default_precision(base: int) -> int:
    """Smallest D with base**D >= 2**64, capped at 64 digits."""
    d, p = 0, 1
    while p < MAX_INDEX and d < _PRECISION_CAP:
        p *= base
        d += 1
    return d


@dataclass(frozen=True)
class DigitVector:
    """Base-b digits of one coordinate, least significant first.

    digits[l-1] is the coefficient of b**(-l) in the coordinate value,
    equivalently the coefficient of b**(l-1) in the point index.
    """

    base: int
    digits: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.base < 2:
            raise ValueError(f"base must be >= 2, got {self.base}")
        if any(not 0 <= a < self.base for a in self.digits):
            raise ValueError("digit out of range for base")

    @property
    def precision(self) -> int:
        return len(self.digits)

    def index(self) -> int:
        """Reconstruct the integer whose expansion these digits are."""
        i = 0
        for a in reversed(self.digits):
            i = i * self.base + a
        return i

    def fraction(self) -> Fraction:
        """Exact coordinate value sum_l digits[l] * base**(-l)."""
        return Fraction(_num(self), self.base ** len(self.digits))

    def float(self) -> float:
        return _realize(_num(self), self.base, len(self.digits))


def _num(x: DigitVector) -> int:
    """Numerator of the coordinate over base**precision.

    Digit l weighs base**(precision - l): the first stored digit is the most
    significant of the fraction.
    """
    num = 0
    for a in x.digits:
        num = num * x.base + a
    return num


def _realize(num: int, base: int, precision: int, tail: float = 0.0) -> float:
    """Float view of num/base**precision (+ tail in the same units), kept < 1."""
    den = base**precision
    x = num / den
    if tail:
        x += tail / den
    if x >= 1.0:
        x = 1.0 - 2.0**-53
    return x


def digits_of(i: int, base: int, precision: int) -> DigitVector:
    """First `precision` base-b digits of i, least significant first.

    Refuses to drop significant digits: requires base**precision > i.
    """
    if i < 0:
        raise ValueError(f"index must be >= 0, got {i}")
    if precision < 1:
        raise ValueError(f"precision must be >= 1, got {precision}")
    if i >= base**precision:
        raise PrecisionError(
            f"{precision} base-{base} digits cannot represent index {i}"
        )
    digits = []
    rem = i
    for _ in range(precision):
        rem, a = divmod(rem, base)
        digits.append(a)
    return DigitVector(base, tuple(digits))


def radical_inverse(i: int, base: int) -> Fraction:
    """Reflect the base-b digits of i about the radix point; exact value."""
    if i < 0:
        raise ValueError(f"index must be >= 0, got {i}")
    if base < 2:
        raise ValueError(f"base must be >= 2, got {base}")
    num, den = 0, 1
    rem = i
    while rem:
        rem, a = divmod(rem, base)
        num = num * base + a
        den *= base
    return Fraction(num, den)


@dataclass(frozen=True)
class PointSet:
    """Consecutive Halton points with digits and realized floats.

    `digits[p][c]` is the DigitVector of point `start + p`, coordinate c+1;
    `coords[p][c]` the matching float in [0,1).  `bases[c]` is that
    coordinate's base (columns may be scrambled or reordered, so the base
    travels with the column rather than with a PrimeBasis).
    """

    start: int
    count: int
    bases: tuple[int, ...]
    digits: tuple[tuple[DigitVector, ...], ...]
    coords: tuple[tuple[float, ...], ...]

    @property
    def dimension(self) -> int:
        return len(self.bases)


def _column_order(basis: PrimeBasis, permutation: Sequence[int] | None) -> list[int]:
    if permutation is None:
        return list(range(1, basis.dimension + 1))
    order = list(permutation)
    if sorted(order) != list(range(1, basis.dimension + 1)):
        raise ValueError("permutation must rearrange coordinates 1..d")
    return order


def halton_points(
    basis: PrimeBasis,
    start: int,
    count: int,
    precision: Mapping[int, int] | None = None,
    permutation: Sequence[int] | None = None,
) -> PointSet:
    """Points start, ..., start+count-1 of the Halton sequence over `basis`.

    `precision` overrides the per-coordinate digit count (keyed by 1-based
    coordinate); `permutation` reorders which base feeds which output column
    (entry t is the basis coordinate used for column t).
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    if start < 0:
        raise ValueError(f"start must be >= 0, got {start}")
    if start + count > MAX_INDEX:
        raise ValueError("index range exceeds 64-bit point indices")
    order = _column_order(basis, permutation)
    col_bases = tuple(basis.base(j) for j in order)
    col_prec = []
    for t, j in enumerate(order):
        p = default_precision(col_bases[t])
        if precision is not None and j in precision:
            p = precision[j]
            if p < 1:
                raise ValueError(f"precision override for coordinate {j} must be >= 1")
        col_prec.append(p)
    rows_d = []
    rows_x = []
    for p in range(count):
        i = start + p
        dv = tuple(digits_of(i, b, pr) for b, pr in zip(col_bases, col_prec))
        rows_d.append(dv)
        rows_x.append(tuple(_realize(_num(v), v.base, v.precision) for v in dv))
    return PointSet(start, count, col_bases, tuple(rows_d), tuple(rows_x))


def stratum_index(point: Sequence[DigitVector], levels: Sequence[int]) -> tuple[int, ...]:
    """Which level-k elementary box the point falls in.

    Coordinate j with level k_j contributes floor(b^k_j * x_j), read off the
    first k_j digits most significant first.  Level 0 contributes 0.
    """
    if len(levels) != len(point):
        raise ValueError("one level per coordinate required")
    out = []
    for dv, k in zip(point, levels):
        if k < 0:
            raise ValueError(f"level must be >= 0, got {k}")
        if k > dv.precision:
            raise PrecisionError(
                f"level {k} needs more digits than the stored {dv.precision}"
            )
        # digit l (1-based) carries weight b**(k-l)
        r = 0
        for l in range(1, k + 1):
            r = r * dv.base + dv.digits[l - 1]
        out.append(r)
    return tuple(out)


def residue_match(i: int, i2: int, base: int, r: int) -> bool:
    """Whether points i and i2 share their level-r interval in this base.

    floor(b^r * x_i) == floor(b^r * x_i2) holds exactly when
    i == i2 (mod b^r); this is the digit-level statement of that fact.
    """
    if r < 0:
        raise ValueError(f"level must be >= 0, got {r}")
    return (i - i2) % base**r == 0


def _stratum_of_index(i: int, bases: Sequence[int], levels: Sequence[int]) -> tuple[int, ...]:
    out = []
    for b, k in zip(bases, levels):
        rem = i % b**k
        r = 0
        for l in range(1, k + 1):
            rem, a = divmod(rem, b)
            r += a * b ** (k - l)
        out.append(r)
    return tuple(out)


def stratum_counts(
    basis: PrimeBasis,
    start: int,
    batch: int,
    levels: Sequence[int],
) -> dict[tuple[int, ...], int]:
    """Occupancy of every level-k box over one batch of consecutive indices.

    Works on index arithmetic alone (the first k_j digits of point i depend
    only on i mod b_j^k_j), so no floats are involved.
    """
    if batch < 1:
        raise ValueError(f"batch must be >= 1, got {batch}")
    if len(levels) != basis.dimension:
        raise ValueError("one level per coordinate required")
    bases = [basis.base(j) for j in range(1, basis.dimension + 1)]
    counts: dict[tuple[int, ...], int] = {}
    for i in range(start, start + batch):
        key = _stratum_of_index(i, bases, levels)
        counts[key] = counts.get(key, 0) + 1
    return counts


def stratum_occupancy(
    points: PointSet, levels: Sequence[int]
) -> dict[tuple[int, ...], int]:
    """Occupancy of level-k boxes for an existing (possibly scrambled) set."""
    counts: dict[tuple[int, ...], int] = {}
    for row in points.digits:
        key = stratum_index(row, levels)
        counts[key] = counts.get(key, 0) + 1
    return counts
