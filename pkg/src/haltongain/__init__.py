"""Scrambled Halton sequences and their exact variance gain coefficients.

The package splits into small layers: prime bases (`primes`), digit-exact
point generation and strata (`halton`), nested and linear digit scrambles
(`scramble`), exact rational gain coefficients with worst-case searches and
dimension bounds (`gains`), replicated variance experiments (`rqmc`), and a
CLI (`cli`).
"""

from .gains import (
    CoordSubset,
    GainQuery,
    GainSummary,
    SubsetTerm,
    bounds_table,
    gain_bruteforce,
    gain_curve,
    gain_exact,
    gamma_at_n,
    gamma_max,
    global_bounds,
    global_bounds_exact,
    lower_bound_n_star,
    oracle_check,
    residue_pair_count,
    subset_terms,
    upper_bound_u,
    upper_bound_u_exact,
)
from .halton import (
    DigitVector,
    PointSet,
    PrecisionError,
    default_precision,
    digits_of,
    halton_points,
    radical_inverse,
    residue_match,
    stratum_counts,
    stratum_index,
    stratum_occupancy,
)
from .primes import MAX_DIMENSION, PrimeBasis, first_primes, nth_prime
from .rqmc import (
    EstimateSummary,
    HaarIntegrand,
    evaluate,
    make_haar,
    mc_estimate,
    rqmc_estimate,
)
from .scramble import (
    KeyedStream,
    LinearScramble,
    PermutationNode,
    ScrambleSpec,
    draw_linear_scramble,
    linear_scramble_digits,
    nested_scramble_digits,
    permutation_node,
    randomize,
)

__version__ = "0.1.0"
