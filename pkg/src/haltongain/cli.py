"""Command-line front end.

Subcommands map one-to-one onto the library: point/prime generation, exact
gain evaluation, worst-case searches, bound tables, variance experiments,
and the stock figures.  Tabular output is CSV with a header row and LF line
endings; structured output is a single JSON object carrying a config echo,
so identical invocations produce identical bytes.

Exit codes: 0 on success, 1 on bad arguments, 2 when an internal
consistency check fails (for example the two gain routes disagreeing).
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from contextlib import contextmanager
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

from . import gains, rqmc
from .halton import halton_points
from .primes import first_primes
from .scramble import ScrambleSpec, randomize

__all__ = ["RunConfig", "dispatch", "main"]


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; this tool reserves 2 for
    # internal check failures, so remap argument problems to 1.
    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


@dataclass(frozen=True)
class RunConfig:
    """Everything a run depends on; echoed into output for exact replay."""

    command: str
    seed: int = 0
    fmt: str = "csv"
    out: str | None = None
    threads: int = 1
    params: dict[str, Any] = field(default_factory=dict)

    def echo(self) -> dict[str, Any]:
        body: dict[str, Any] = {"command": self.command, "seed": self.seed}
        body.update(self.params)
        return body


def _parse_ints(text: str, flag: str) -> tuple[int, ...]:
    try:
        return tuple(int(p) for p in text.split(",") if p != "")
    except ValueError:
        raise ValueError(f"{flag} expects comma-separated integers, got {text!r}")


@contextmanager
def _open_out(path: str | None):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _emit_json(cfg: RunConfig, body: dict[str, Any]) -> None:
    doc = {"config": cfg.echo()}
    doc.update(body)
    with _open_out(cfg.out) as fh:
        fh.write(json.dumps(doc) + "\n")


def _f17(x: float) -> str:
    return format(x, ".17g")


def _rat(x: Fraction) -> dict[str, Any]:
    return {"num": x.numerator, "den": x.denominator, "float": float(x)}


def _build_parser() -> _Parser:
    parser = _Parser(prog="haltongain", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: _Parser) -> None:
        p.add_argument("--seed", type=int, default=0, help="PRF seed (default 0)")
        p.add_argument("--format", choices=("csv", "json"), default=None)
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument(
            "--threads", type=int, default=os.cpu_count() or 1,
            help="worker bound for partitioned searches",
        )

    p = sub.add_parser("primes", help="first d prime bases")
    p.add_argument("--d", type=int, required=True)
    common(p)

    p = sub.add_parser("points", help="consecutive (optionally scrambled) points")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--start", type=int, default=0)
    p.add_argument("--scramble", choices=("none", "nested", "linear"), default="none")
    p.add_argument("--replicate", type=int, default=0)
    common(p)

    p = sub.add_parser("gain", help="one exact gain value")
    p.add_argument("--u", required=True, help="coordinate subset, e.g. 1,2")
    p.add_argument("--k", required=True, help="levels aligned with --u, e.g. 0,0")
    p.add_argument("--n", type=int, required=True)
    common(p)

    p = sub.add_parser("gain-curve", help="gain as a function of n")
    p.add_argument("--u", required=True)
    p.add_argument("--k", required=True)
    p.add_argument("--n-max", type=int, required=True)
    common(p)

    p = sub.add_parser("gamma", help="worst gain over all n for u = 1..d")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n-cap", type=int, default=None)
    common(p)

    p = sub.add_parser("bounds", help="dimension sandwich table")
    p.add_argument("--d-max", type=int, required=True)
    common(p)

    p = sub.add_parser("variance", help="replicated variance experiment")
    p.add_argument("--u", required=True)
    p.add_argument("--k", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--reps", type=int, required=True)
    p.add_argument("--scramble", choices=("nested", "linear"), default="nested")
    common(p)

    p = sub.add_parser("oracle-check", help="closed form vs brute force grid")
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--n-max", type=int, default=90)
    p.add_argument("--k-max", type=int, default=1)
    common(p)

    p = sub.add_parser("figure", help="data behind the stock figures")
    p.add_argument("which", choices=("1", "2", "3"))
    p.add_argument("--d-max", type=int, default=1_000_000, help="figure 1 range")
    p.add_argument("--n-max", type=int, default=1000, help="figure 3 range")
    common(p)

    return parser


def _cmd_primes(cfg: RunConfig) -> int:
    basis = first_primes(cfg.params["d"])
    if cfg.fmt == "json":
        _emit_json(cfg, {"d": basis.dimension, "primes": list(basis.bases)})
        return 0
    with _open_out(cfg.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["j", "prime"])
        for j, b in enumerate(basis.bases, start=1):
            w.writerow([j, b])
    return 0


def _cmd_points(cfg: RunConfig) -> int:
    d, n, start = cfg.params["d"], cfg.params["n"], cfg.params["start"]
    kind, replicate = cfg.params["scramble"], cfg.params["replicate"]
    basis = first_primes(d)
    points = halton_points(basis, start, n)
    if kind != "none":
        points = randomize(points, ScrambleSpec(kind, cfg.seed, replicate))
    if cfg.fmt == "json":
        _emit_json(
            cfg,
            {"start": start, "n": n,
             "points": [[_f17(x) for x in row] for row in points.coords]},
        )
        return 0
    with _open_out(cfg.out) as fh:
        if kind != "none":
            # randomized runs carry their key in the header for replay
            fh.write("# config: " + json.dumps(cfg.echo()) + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["i"] + [f"x{j}" for j in range(1, d + 1)])
        for p, row in enumerate(points.coords):
            w.writerow([start + p] + [_f17(x) for x in row])
    return 0


def _gain_query(cfg: RunConfig) -> gains.GainQuery:
    u = _parse_ints(cfg.params["u"], "--u")
    k = _parse_ints(cfg.params["k"], "--k")
    if not u:
        raise ValueError("--u must name at least one coordinate")
    basis = first_primes(max(u))
    return gains.GainQuery.build(u, k, cfg.params["n"], basis)


def _cmd_gain(cfg: RunConfig) -> int:
    q = _gain_query(cfg)
    g = gains.gain_exact(q)
    if cfg.fmt == "json":
        _emit_json(cfg, {"gain": f"{g.numerator}/{g.denominator}", **{
            "gain_" + k: v for k, v in _rat(g).items()}})
        return 0
    if cfg.fmt == "csv":
        with _open_out(cfg.out) as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["n", "gain_num", "gain_den", "gain_float"])
            w.writerow([q.n, g.numerator, g.denominator, _f17(float(g))])
        return 0
    with _open_out(cfg.out) as fh:
        fh.write(f"{g.numerator}/{g.denominator} ({_f17(float(g))})\n")
    return 0


def _cmd_gain_curve(cfg: RunConfig) -> int:
    u = _parse_ints(cfg.params["u"], "--u")
    k = _parse_ints(cfg.params["k"], "--k")
    n_max = cfg.params["n_max"]
    basis = first_primes(max(u) if u else 1)
    curve = gains.gain_curve(u, k, basis, n_max)
    if cfg.fmt == "json":
        _emit_json(
            cfg,
            {"gains": [
                {"n": n, **_rat(g)} for n, g in enumerate(curve, start=1)]},
        )
        return 0
    with _open_out(cfg.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "gain_num", "gain_den", "gain_float"])
        for n, g in enumerate(curve, start=1):
            w.writerow([n, g.numerator, g.denominator, _f17(float(g))])
    return 0


def _cmd_gamma(cfg: RunConfig) -> int:
    d = cfg.params["d"]
    summary = gains.gamma_max(
        d, n_cap=cfg.params["n_cap"], threads=max(1, cfg.threads)
    )
    g = summary.gamma
    _emit_json(
        cfg,
        {
            "d": d,
            "gamma": f"{g.numerator}/{g.denominator}",
            "gamma_num": g.numerator,
            "gamma_den": g.denominator,
            "gamma_float": float(g),
            "argmax_n": summary.argmax_n,
            "lower_bound": float(summary.lower),
            "upper_bound": float(summary.upper),
        },
    )
    return 0


def _cmd_bounds(cfg: RunConfig) -> int:
    d_max = cfg.params["d_max"]
    with _open_out(cfg.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["d", "lower", "upper", "guide"])
        for d, lower, upper, guide in gains.bounds_table(d_max):
            w.writerow([d, _f17(lower), _f17(upper), _f17(guide)])
    return 0


def _cmd_variance(cfg: RunConfig) -> int:
    u = _parse_ints(cfg.params["u"], "--u")
    k = _parse_ints(cfg.params["k"], "--k")
    n, reps = cfg.params["n"], cfg.params["reps"]
    kind = cfg.params["scramble"]
    basis = first_primes(max(u) if u else 1)
    expected = gains.gain_exact(gains.GainQuery.build(u, k, n, basis))
    f = rqmc.make_haar(u, k, basis)
    summary = rqmc.rqmc_estimate(f, basis, n, reps, ScrambleSpec(kind, cfg.seed))
    if summary.gain_se > 0:
        z = (summary.empirical_gain - float(expected)) / summary.gain_se
    else:
        z = 0.0
    _emit_json(
        cfg,
        {
            "n": n,
            "R": reps,
            "mean": summary.mean,
            "var": summary.variance,
            "sigma2": summary.sigma2,
            "empirical_gain": summary.empirical_gain,
            "expected_gain_num": expected.numerator,
            "expected_gain_den": expected.denominator,
            "z_score": z,
        },
    )
    return 0


def _cmd_oracle_check(cfg: RunConfig) -> int:
    d, n_max, k_max = cfg.params["d"], cfg.params["n_max"], cfg.params["k_max"]
    mismatches = gains.oracle_check(d, n_max, k_max)
    with _open_out(cfg.out) as fh:
        if mismatches:
            for u, k, n, a, b in mismatches:
                fh.write(
                    f"MISMATCH u={u} k={k} n={n}: closed form {a}, brute {b}\n"
                )
            fh.write(f"{len(mismatches)} disagreements\n")
            return 2
        fh.write(
            f"closed form and brute force agree for d={d}, "
            f"levels <= {k_max}, n <= {n_max}\n"
        )
    return 0


_FIG2_LEVELS = ((0, 0), (0, 1), (1, 0), (1, 1))


def _curve_rows(cfg: RunConfig, rows) -> int:
    with _open_out(cfg.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["u", "k", "n", "gain_num", "gain_den", "gain_float"])
        for u, k, n, g in rows:
            w.writerow(
                [
                    ",".join(map(str, u)),
                    ",".join(map(str, k)),
                    n,
                    g.numerator,
                    g.denominator,
                    _f17(float(g)),
                ]
            )
    return 0


def _cmd_figure(cfg: RunConfig) -> int:
    which = cfg.params["which"]
    if which == "1":
        sub = RunConfig("bounds", cfg.seed, "csv", cfg.out, cfg.threads,
                        {"d_max": cfg.params["d_max"]})
        return _cmd_bounds(sub)
    if which == "2":
        basis = first_primes(2)
        rows = []
        for levels in _FIG2_LEVELS:
            curve = gains.gain_curve((1, 2), levels, basis, 36)
            rows.extend(
                ((1, 2), levels, n, g) for n, g in enumerate(curve, start=1)
            )
        return _curve_rows(cfg, rows)
    basis = first_primes(3)
    n_max = cfg.params["n_max"]
    rows = []
    full = gains.CoordSubset((1, 2, 3))
    for u in full.subsets():
        if not len(u):
            continue
        bases = tuple(basis.base(j) for j in u.indices)
        for levels in gains._level_vectors(bases, n_max - 1):
            prod = 1
            for b, k in zip(bases, levels):
                prod *= b**k
            curve = gains.gain_curve(u, levels, basis, n_max)
            # the curve only starts once a full level cell fits below n
            rows.extend(
                (u.indices, levels, n, g)
                for n, g in enumerate(curve, start=1)
                if prod < n
            )
    rows.sort(key=lambda row: (row[2], len(row[0]), row[0], row[1]))
    return _curve_rows(cfg, rows)


_HANDLERS = {
    "primes": _cmd_primes,
    "points": _cmd_points,
    "gain": _cmd_gain,
    "gain-curve": _cmd_gain_curve,
    "gamma": _cmd_gamma,
    "bounds": _cmd_bounds,
    "variance": _cmd_variance,
    "oracle-check": _cmd_oracle_check,
    "figure": _cmd_figure,
}

_DEFAULT_FMT = {"gain": "text", "gamma": "json", "variance": "json"}


def dispatch(argv: Sequence[str] | None = None) -> int:
    """Parse argv and run one subcommand; returns the exit code."""
    args = _build_parser().parse_args(argv)
    opts = vars(args)
    command = opts.pop("command")
    seed = opts.pop("seed")
    fmt = opts.pop("format")
    out = opts.pop("out")
    threads = opts.pop("threads")
    if fmt is None:
        fmt = _DEFAULT_FMT.get(command, "csv")
    if seed < 0 or seed >= 1 << 64:
        raise ValueError("--seed must fit in 64 bits")
    if threads < 1:
        raise ValueError("--threads must be >= 1")
    cfg = RunConfig(command, seed, fmt, out, threads, opts)
    return _HANDLERS[command](cfg)


def main(argv: Sequence[str] | None = None) -> int:
    try:
        return dispatch(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except BrokenPipeError:
        return 0
    except (ValueError, OverflowError) as exc:
        print(f"haltongain: error: {exc}", file=sys.stderr)
        return 1
    except RuntimeError as exc:
        print(f"haltongain: internal check failed: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
