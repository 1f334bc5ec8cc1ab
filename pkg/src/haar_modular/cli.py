"""Command-line interface: ``haar-modular <command> ...``.

Exit codes: 0 success, 1 internal or verification failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from contextlib import contextmanager

from . import __version__
from .counting import corner_fiber_bounds, exact_corner_dist, order_gl
from .errors import HaarModularError
from .rings import factorize, parse_ring
from .sampling import RngStream, sample_truncated
from .stats import convergence_sweep
from .verify import SUITES, run_suite

SEED_ENV = "HAAR_MODULAR_SEED"
DEFAULT_SEED = 0


class UsageError(Exception):
    pass


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _parse_n_list(text: str) -> list[int]:
    """``2..10`` (inclusive range) or ``4,8,16,24``."""
    try:
        if ".." in text:
            lo, hi = text.split("..")
            return list(range(int(lo), int(hi) + 1))
        return [int(v) for v in text.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad N list {text!r}") from None


def _ring(text: str):
    try:
        return parse_ring(text)
    except HaarModularError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


@contextmanager
def _output(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


def _emit(obj, path: str | None) -> None:
    with _output(path) as fh:
        fh.write(json.dumps(obj, indent=2) + "\n")


def cmd_factor(args) -> int:
    fac = factorize(args.m)
    _emit({"m": fac.m, "factors": [[p, r] for p, r in fac.factors]}, args.out)
    return 0


def cmd_count(args) -> int:
    _emit({"ring": args.ring.to_dict(), "N": str(args.n), "order": str(order_gl(args.ring, args.n))}, args.out)
    return 0


def cmd_sample(args) -> int:
    s = args.n if args.s is None else args.s
    if args.draws < 1:
        raise UsageError("--draws must be >= 1")
    seed = _default_seed() if args.seed is None else args.seed
    batch = sample_truncated(args.ring, args.n, s, args.draws, RngStream(seed))
    with _output(args.out) as fh:
        batch.write_jsonl(fh)
    return 0


def cmd_dist(args) -> int:
    s = args.n if args.s is None else args.s
    _emit(exact_corner_dist(args.ring, args.n, s, args.method).to_dict(), args.out)
    return 0


def cmd_bounds(args) -> int:
    _emit(corner_fiber_bounds(args.p, args.n, args.s, args.r).to_dict(), args.out)
    return 0


def cmd_sweep(args) -> int:
    seed = _default_seed() if args.seed is None else args.seed
    if args.threads < 1:
        raise UsageError("--threads must be >= 1")
    result = convergence_sweep(args.ring, args.s, args.n, args.mode, args.draws, seed, threads=args.threads)
    with _output(args.out) as fh:
        fh.write(result.to_csv() if args.format == "csv" else result.to_json())
    return 0


def cmd_verify(args) -> int:
    results = run_suite(args.suite)
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    failed = sum(not ok for _, ok, _ in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="haar-modular", description="Haar random matrices over Z/mZ, F_q and finite local rings.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=func)
        return p

    def ring_arg(p):
        p.add_argument("--ring", type=_ring, required=True, help="zm:<m> | fq:<p>:<n>[:poly=c0,..] | local_pp:<p>:<r> | local_tp:<p>:<n>:<k>")

    def out_arg(p):
        p.add_argument("--out", help="output file (default: stdout)")

    p = add("factor", cmd_factor, "prime factorization of m")
    p.add_argument("m", type=int)
    out_arg(p)

    p = add("count", cmd_count, "order of GL_N(ring)")
    ring_arg(p)
    p.add_argument("--n", type=int, required=True)
    out_arg(p)

    p = add("sample", cmd_sample, "corners of Haar draws, as JSON lines")
    ring_arg(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--s", type=int, help="corner size (default: N)")
    p.add_argument("--draws", type=int, required=True)
    p.add_argument("--seed", type=int, help=f"default: ${SEED_ENV} or {DEFAULT_SEED}")
    out_arg(p)

    p = add("dist", cmd_dist, "exact corner law")
    ring_arg(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--s", type=int, help="corner size (default: N)")
    p.add_argument("--method", choices=["enumerate", "formula"], default="enumerate")
    out_arg(p)

    p = add("bounds", cmd_bounds, "corner fiber bounds and probability-ratio bounds")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--r", type=int, default=1)
    out_arg(p)

    p = add("sweep", cmd_sweep, "TV distance to uniform across N")
    ring_arg(p)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--n", type=_parse_n_list, required=True, help="2..10 or 4,8,16")
    p.add_argument("--mode", choices=["exact", "mc"], default="exact")
    p.add_argument("--draws", type=int, default=10**5)
    p.add_argument("--seed", type=int, help=f"default: ${SEED_ENV} or {DEFAULT_SEED}")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    out_arg(p)

    p = add("verify", cmd_verify, "run invariant suites")
    p.add_argument("--suite", choices=[*SUITES, "all"], default="all")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, HaarModularError) as exc:
        print(f"haar-modular: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # internal failure
        logging.getLogger(__name__).exception("internal error")
        print(f"haar-modular: internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
