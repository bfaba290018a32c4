"""Randomized-QMC experiments that exhibit the gain law.

A Haar-style integrand at (u, k) reads one digit per coordinate in u:
f(x) = prod_{j in u} eta_j(digit k_j+1 of x_j), with each per-coordinate
table eta_j summing to zero over Z_b.  Such an f is mean zero with plain MC
variance sigma^2/n, and under either digit scramble the variance of the
replicate mean over n consecutive Halton points equals G_{u,k}(n) times
that, which is what these estimators measure.

Evaluation works on digits, never on float coordinates, so the check is
exact where the theory says it should be (a complete cycle gives every
replicate mean exactly zero).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .gains import CoordSubset
from .halton import DigitVector
from .primes import PrimeBasis
from .scramble import (
    KeyedStream,
    ScrambleSpec,
    draw_linear_scramble,
    linear_scramble_digits,
    nested_scramble_digits,
)

__all__ = [
    "HaarIntegrand",
    "EstimateSummary",
    "make_haar",
    "evaluate",
    "rqmc_estimate",
    "mc_estimate",
]

_MAX_COUNT = 1 << 53  # counts stay exactly representable as floats


@dataclass(frozen=True)
class HaarIntegrand:
    """Digit-reading product integrand pinned to one variance component.

    `tables[t]` is eta for coordinate u.indices[t] over its base
    `bases[t]`; `levels[t]` is that coordinate's k.  sigma2 is the exact
    integrand variance prod_j (1/b_j) sum_c eta_j(c)^2.
    """

    u: CoordSubset
    levels: tuple[int, ...]
    bases: tuple[int, ...]
    tables: tuple[tuple[Fraction, ...], ...]
    sigma2: Fraction


def make_haar(
    u: CoordSubset | Sequence[int],
    levels: Sequence[int],
    basis: PrimeBasis,
    tables: Sequence[Sequence[int | Fraction]] | None = None,
) -> HaarIntegrand:
    """Build an integrand; default table per coordinate is b*[c = b-1] - 1.

    Each table must have one entry per digit value, sum to zero, and not be
    identically zero.
    """
    u = CoordSubset.of(u)
    if not len(u):
        raise ValueError("integrand needs a nonempty coordinate subset")
    levels = tuple(levels)
    if len(levels) != len(u):
        raise ValueError("one level per subset member required")
    if any(k < 0 for k in levels):
        raise ValueError("levels must be >= 0")
    bases = tuple(basis.base(j) for j in u.indices)
    if tables is None:
        tables = [[-1] * (b - 1) + [b - 1] for b in bases]
    if len(tables) != len(u):
        raise ValueError("one table per subset member required")
    frozen = []
    sigma2 = Fraction(1)
    for b, table in zip(bases, tables):
        row = tuple(Fraction(x) for x in table)
        if len(row) != b:
            raise ValueError(f"table needs {b} entries for base {b}")
        if sum(row) != 0:
            raise ValueError("table must sum to zero over the digit values")
        ss = sum(x * x for x in row)
        if ss == 0:
            raise ValueError("table must not be identically zero")
        sigma2 *= Fraction(ss, b)
        frozen.append(row)
    return HaarIntegrand(u, levels, bases, tuple(frozen), sigma2)


def evaluate(f: HaarIntegrand, point: Sequence[DigitVector]) -> float:
    """f at one point given per-coordinate digits (full dimension or u-only).

    Coordinate u.indices[t] must sit at position u.indices[t]-1 when the
    full point is passed, or at position t when only the u coordinates are.
    """
    if len(point) == len(f.u):
        rows = point
    else:
        rows = [point[j - 1] for j in f.u.indices]
    out = 1.0
    for t, dv in enumerate(rows):
        k = f.levels[t]
        if dv.precision < k + 1:
            raise ValueError(
                f"digit {k + 1} required but only {dv.precision} stored"
            )
        out *= float(f.tables[t][dv.digits[k]])
    return out


@dataclass(frozen=True)
class EstimateSummary:
    """Replicated estimate of a mean and the implied variance gain."""

    n: int
    replicates: int
    means: tuple[float, ...]
    mean: float
    variance: float
    sigma2: float
    mc_variance: float
    empirical_gain: float
    gain_se: float


def _summarize(n: int, means: list[float], sigma2: float) -> EstimateSummary:
    r = len(means)
    grand = math.fsum(means) / r
    variance = (
        math.fsum((m - grand) ** 2 for m in means) / (r - 1) if r > 1 else 0.0
    )
    mc_variance = sigma2 / n
    gain = n * variance / sigma2
    # Normal-theory dispersion of a variance ratio over r replicates.
    gain_se = gain * math.sqrt(2.0 / (r - 1)) if r > 1 else 0.0
    return EstimateSummary(
        n, r, tuple(means), grand, variance, sigma2, mc_variance, gain, gain_se
    )


def _digit_prefix(i: int, base: int, depth: int) -> tuple[int, ...]:
    # Leading digits only; deeper digits cannot influence the first `depth`
    # scrambled outputs of either kind.
    out = []
    rem = i
    for _ in range(depth):
        rem, a = divmod(rem, base)
        out.append(a)
    return tuple(out)


def rqmc_estimate(
    f: HaarIntegrand,
    basis: PrimeBasis,
    n: int,
    replicates: int,
    spec: ScrambleSpec,
    start: int = 0,
) -> EstimateSummary:
    """Replicate means of f over n scrambled Halton points.

    Replicate r reuses `spec` with its replicate field set to
    spec.replicate + r, so a fixed (seed, spec) reproduces the summary
    bit for bit and replicates are independent.  Only the digits f reads
    are scrambled; coordinates outside u never influence f.
    """
    if n < 1 or n > _MAX_COUNT:
        raise ValueError(f"point count must be in 1..2^53, got {n}")
    if replicates < 1:
        raise ValueError(f"replicates must be >= 1, got {replicates}")
    if spec.kind == "none":
        raise ValueError("variance experiments need a randomizing scramble")
    depths = [k + 1 for k in f.levels]
    inputs = [
        [
            DigitVector(b, _digit_prefix(start + p, b, depth))
            for b, depth in zip(f.bases, depths)
        ]
        for p in range(n)
    ]
    coords = list(f.u.indices)
    means = []
    for r in range(replicates):
        rspec = ScrambleSpec(spec.kind, spec.seed, spec.replicate + r)
        if spec.kind == "linear":
            scrambles = [
                draw_linear_scramble(rspec, c, b, depth)
                for c, b, depth in zip(coords, f.bases, depths)
            ]
            values = []
            for row in inputs:
                point = [
                    linear_scramble_digits(dv, L) for dv, L in zip(row, scrambles)
                ]
                values.append(evaluate(f, point))
        else:
            cache: dict = {}
            values = []
            for row in inputs:
                point = [
                    nested_scramble_digits(dv, c, rspec, cache=cache)
                    for dv, c in zip(row, coords)
                ]
                values.append(evaluate(f, point))
        means.append(math.fsum(values) / n)
    return _summarize(n, means, float(f.sigma2))


def mc_estimate(
    f: HaarIntegrand,
    n: int,
    replicates: int,
    seed: int = 0,
) -> EstimateSummary:
    """Plain Monte Carlo baseline: n iid uniform points per replicate.

    Draws the digits f reads directly (the digits of a uniform coordinate
    are iid uniform over Z_b), from the same keyed stream family as the
    scrambles under a distinct tag.
    """
    if n < 1 or n > _MAX_COUNT:
        raise ValueError(f"point count must be in 1..2^53, got {n}")
    if replicates < 1:
        raise ValueError(f"replicates must be >= 1, got {replicates}")
    depths = [k + 1 for k in f.levels]
    means = []
    for r in range(replicates):
        streams = [
            KeyedStream(seed, "mc", r, c) for c in f.u.indices
        ]
        values = []
        for _ in range(n):
            out = 1.0
            for t, (b, depth) in enumerate(zip(f.bases, depths)):
                digit = 0
                for _ in range(depth):  # draw in digit order for determinism
                    digit = streams[t].next_uint(b)
                out *= float(f.tables[t][digit])
            values.append(out)
        means.append(math.fsum(values) / n)
    return _summarize(n, means, float(f.sigma2))
