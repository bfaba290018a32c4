"""Digit scrambling for Halton points.

Two randomizations are provided, both acting digit-wise in each coordinate's
own base:

* nested: every digit position gets its own uniform permutation of Z_b,
  chosen independently for each distinct prefix of more significant digits;
* linear: a random lower-triangular digit matrix with nonzero diagonal plus
  a uniform digital shift, out_s = (sum_{t<=s} L[s][t] x_t + e_s) mod b.

All randomness is counter-based: a (seed, replicate, coordinate, node) key
deterministically yields the permutation or matrix row, so replicates need
no sequential state and any subset of digits can be scrambled without
generating the rest.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Literal, Mapping, MutableMapping, Sequence

from .halton import DigitVector, PointSet, _num, _realize

__all__ = [
    "Kind",
    "ScrambleSpec",
    "LinearScramble",
    "PermutationNode",
    "KeyedStream",
    "permutation_node",
    "draw_linear_scramble",
    "nested_scramble_digits",
    "linear_scramble_digits",
    "randomize",
]

Kind = Literal["none", "nested", "linear"]

_KINDS = ("none", "nested", "linear")


@dataclass(frozen=True)
class ScrambleSpec:
    """What to apply and under which random key.

    `precision` optionally caps the number of output digits per 1-based
    coordinate; unlisted coordinates keep their stored precision.  Distinct
    replicates give independent randomizations under the same seed.
    """

    kind: Kind
    seed: int = 0
    replicate: int = 0
    precision: Mapping[int, int] | None = None

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"kind must be one of {_KINDS}, got {self.kind!r}")
        if not 0 <= self.seed < 1 << 64:
            raise ValueError("seed must fit in 64 bits")
        if self.replicate < 0:
            raise ValueError("replicate must be >= 0")


def _encode(part) -> bytes:
    if isinstance(part, str):
        raw = part.encode()
        return b"s" + len(raw).to_bytes(4, "big") + raw
    if isinstance(part, int):
        raw = part.to_bytes((part.bit_length() + 7) // 8 or 1, "big")
        return b"i" + len(raw).to_bytes(4, "big") + raw
    if isinstance(part, tuple):
        out = b"t" + len(part).to_bytes(4, "big")
        return out + b"".join(_encode(p) for p in part)
    raise TypeError(f"cannot key a stream on {type(part).__name__}")


class KeyedStream:
    """Deterministic byte stream: blake2b over a structured key plus counter.

    The key parts are length-prefixed, so distinct part tuples can never
    collide.  Draws are rejection-sampled from 64-bit chunks, hence unbiased.
    """

    __slots__ = ("_key", "_counter", "_buf", "_pos")

    def __init__(self, *parts) -> None:
        h = hashlib.blake2b(digest_size=32)
        for p in parts:
            h.update(_encode(p))
        self._key = h.digest()
        self._counter = 0
        self._buf = b""
        self._pos = 0

    def _chunk(self) -> int:
        if self._pos >= len(self._buf):
            self._buf = hashlib.blake2b(
                self._key + self._counter.to_bytes(8, "big"), digest_size=32
            ).digest()
            self._counter += 1
            self._pos = 0
        v = int.from_bytes(self._buf[self._pos : self._pos + 8], "big")
        self._pos += 8
        return v

    def next_uint(self, bound: int) -> int:
        """Uniform draw from range(bound)."""
        if bound < 1:
            raise ValueError("bound must be >= 1")
        if bound == 1:
            return 0
        limit = (1 << 64) - ((1 << 64) % bound)
        while True:
            v = self._chunk()
            if v < limit:
                return v % bound

    def unit_float(self) -> float:
        """Uniform draw from [0, 1) with 53 random bits."""
        return (self._chunk() >> 11) / (1 << 53)

    def permutation(self, size: int) -> tuple[int, ...]:
        """Uniform permutation of range(size), by Fisher-Yates."""
        table = list(range(size))
        for i in range(size - 1, 0, -1):
            j = self.next_uint(i + 1)
            table[i], table[j] = table[j], table[i]
        return tuple(table)


@dataclass(frozen=True)
class PermutationNode:
    """The uniform permutation scrambling digit len(prefix)+1 below `prefix`."""

    base: int
    prefix: tuple[int, ...]
    table: tuple[int, ...]


@dataclass(frozen=True)
class LinearScramble:
    """Lower-triangular digit matrix and shift for one coordinate.

    rows[s-1] holds (L[s][1], ..., L[s][s]) with L[s][s] != 0; shift[s-1]
    is e_s.  Rows are generated independently, so a depth-D' truncation of a
    depth-D scramble matches the directly drawn depth-D' one.
    """

    base: int
    rows: tuple[tuple[int, ...], ...]
    shift: tuple[int, ...]

    def __post_init__(self) -> None:
        for s, row in enumerate(self.rows, start=1):
            if len(row) != s:
                raise ValueError(f"row {s} must have {s} entries")
            if row[-1] % self.base == 0:
                raise ValueError(f"diagonal entry of row {s} must be nonzero")
        if len(self.shift) != len(self.rows):
            raise ValueError("one shift entry per row required")
        if any(not 0 <= e < self.base for e in self.shift):
            raise ValueError("shift entries must be digits in the base")

    @property
    def depth(self) -> int:
        return len(self.rows)


def permutation_node(
    spec: ScrambleSpec, coordinate: int, base: int, prefix: tuple[int, ...]
) -> PermutationNode:
    """Permutation for the digit following `prefix` in this coordinate."""
    stream = KeyedStream(spec.seed, "perm", spec.replicate, coordinate, prefix)
    return PermutationNode(base, prefix, stream.permutation(base))


def draw_linear_scramble(
    spec: ScrambleSpec, coordinate: int, base: int, depth: int
) -> LinearScramble:
    """Matrix rows 1..depth and shift for this coordinate under `spec`."""
    rows = []
    shift = []
    for s in range(1, depth + 1):
        stream = KeyedStream(spec.seed, "row", spec.replicate, coordinate, s)
        diag = 1 + stream.next_uint(base - 1)
        off = tuple(stream.next_uint(base) for _ in range(s - 1))
        rows.append(off + (diag,))
        shift.append(stream.next_uint(base))
    return LinearScramble(base, tuple(rows), tuple(shift))


def nested_scramble_digits(
    x: DigitVector,
    coordinate: int,
    spec: ScrambleSpec,
    depth: int | None = None,
    cache: MutableMapping[tuple[int, tuple[int, ...]], tuple[int, ...]] | None = None,
) -> DigitVector:
    """Apply the nested scramble to one coordinate's digits.

    Digit s is permuted by the node at the input prefix (x_1, ..., x_{s-1}),
    so points agreeing to depth s-1 share that node.  Pass a dict as `cache`
    to reuse nodes across the points of one replicate.
    """
    if depth is None:
        depth = x.precision
    out = []
    prefix: tuple[int, ...] = ()
    for s in range(depth):
        a = x.digits[s] if s < x.precision else 0
        key = (coordinate, prefix)
        table = cache.get(key) if cache is not None else None
        if table is None:
            table = permutation_node(spec, coordinate, x.base, prefix).table
            if cache is not None:
                cache[key] = table
        out.append(table[a])
        prefix = prefix + (a,)
    return DigitVector(x.base, tuple(out))


def linear_scramble_digits(
    x: DigitVector, scramble: LinearScramble, depth: int | None = None
) -> DigitVector:
    """Apply a drawn linear scramble to one coordinate's digits."""
    if x.base != scramble.base:
        raise ValueError("scramble and digits disagree on the base")
    if depth is None:
        depth = min(x.precision, scramble.depth)
    if depth > scramble.depth:
        raise ValueError(f"scramble holds only {scramble.depth} rows")
    b = x.base
    out = []
    for s in range(1, depth + 1):
        row = scramble.rows[s - 1]
        acc = scramble.shift[s - 1]
        for t in range(s):
            a = x.digits[t] if t < x.precision else 0
            acc += row[t] * a
        out.append(acc % b)
    return DigitVector(b, tuple(out))


def _out_precision(spec: ScrambleSpec, column: int, stored: int) -> int:
    if spec.precision is not None and column in spec.precision:
        p = spec.precision[column]
        if p < 1:
            raise ValueError(f"precision override for coordinate {column} must be >= 1")
        return p
    return stored


def randomize(points: PointSet, spec: ScrambleSpec) -> PointSet:
    """Scramble every coordinate of every point; kind "none" is identity.

    Nested realization adds one uniform tail draw per (point, coordinate) at
    the level below the last scrambled digit: the tail digits of a nested
    scramble are independent uniforms, and a single draw in [0,1) scaled by
    b**-D has exactly that law.  Linear tails are zero, matching the zero
    input digits beyond the stored precision.
    """
    if spec.kind == "none":
        return points
    caches: list[dict] = [dict() for _ in points.bases]
    linears: list[LinearScramble | None] = [None] * len(points.bases)
    rows_d = []
    rows_x = []
    for p in range(points.count):
        i = points.start + p
        new_row = []
        new_x = []
        for c, x in enumerate(points.digits[p]):
            column = c + 1
            depth = _out_precision(spec, column, x.precision)
            if spec.kind == "nested":
                y = nested_scramble_digits(x, column, spec, depth, caches[c])
                tail = KeyedStream(
                    spec.seed, "tail", spec.replicate, column, i
                ).unit_float()
                new_x.append(_realize(_num(y), y.base, y.precision, tail))
            else:
                L = linears[c]
                if L is None or L.depth < depth:
                    L = draw_linear_scramble(spec, column, x.base, depth)
                    linears[c] = L
                y = linear_scramble_digits(x, L, depth)
                new_x.append(_realize(_num(y), y.base, y.precision))
            new_row.append(y)
        rows_d.append(tuple(new_row))
        rows_x.append(tuple(new_x))
    return PointSet(
        points.start, points.count, points.bases, tuple(rows_d), tuple(rows_x)
    )
