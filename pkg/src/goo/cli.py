"""Command-line surface.

Machine-readable results go to stdout; progress and diagnostics go to
stderr. Exit codes: 0 success, 2 verified counterexample, 64 usage,
65 data corruption, 74 I/O failure, 130 interrupted.
"""

import argparse
import os
import sys
from pathlib import Path

from . import analytics, goldbach, hypotheses, oracle, sieve, store

EX_OK = 0
EX_COUNTEREXAMPLE = 2
EX_USAGE = 64
EX_CORRUPT = 65
EX_IO = 74
EX_INTERRUPT = 130

DATA_DIR_ENV = "GOO_DATA_DIR"
DESK_LIMIT = 10**18


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # route argparse's own failures to exit 64
        raise UsageError(message)


def _parse_number(text: str) -> int:
    """Integer, allowing scientific notation like 1e12 or 6.25e8."""
    try:
        return int(text)
    except ValueError:
        pass
    try:
        value = float(text)
    except ValueError:
        raise UsageError(f"not a number: {text!r}") from None
    if value != int(value):
        raise UsageError(f"not an integer: {text!r}")
    return int(value)


def _data_dir(explicit) -> Path:
    if explicit:
        return Path(explicit)
    env = os.environ.get(DATA_DIR_ENV)
    if env:
        return Path(env)
    raise UsageError(f"--data/--out required (or set {DATA_DIR_ENV})")


def build_parser() -> _Parser:
    top = _Parser(prog="goo", description=__doc__)
    sub = top.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("sieve", parents=[], help="sieve all values below a bound")
    p.add_argument("--limit", required=True, help="bound on a^2+1, e.g. 1e12")
    p.add_argument("--segment", default=str(1 << 20), help="segment length")
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p.add_argument("--resume", action="store_true")
    p.add_argument("--quiet", action="store_true")

    p = sub.add_parser("verify", help="check the decomposition property")
    p.add_argument("--data", default=None)
    p.add_argument("--champions", default=None, help="write champion CSV here")
    p.add_argument("--window", default=str(1 << 16))
    p.add_argument("--bitset-bound", default=str(1 << 31))
    p.add_argument("--quiet", action="store_true")

    p = sub.add_parser("count", help="counts against both density models")
    p.add_argument("--data", default=None)
    p.add_argument("--at", required=True, help="points, e.g. 1e6,1e9,1e12")
    p.add_argument("--csv", default=None, help="also write CSV here")

    p = sub.add_parser("cq", help="recompute the density constant")
    p.add_argument("--prime-limit", default="1e6")

    p = sub.add_parser("hyp", help="polynomial family tools")
    hyp_sub = p.add_subparsers(dest="hyp_command", metavar="check|scan")
    c = hyp_sub.add_parser("check", help="local obstruction test")
    c.add_argument("--poly", action="append", required=True, metavar="SPEC")
    s = hyp_sub.add_parser("scan", help="simultaneous prime arguments")
    s.add_argument("--poly", action="append", required=True, metavar="SPEC")
    s.add_argument("--limit", required=True)
    s.add_argument("--csv", default=None)

    p = sub.add_parser("oracle", help="brute-force spot checks")
    o_sub = p.add_subparsers(dest="oracle_command", metavar="a|prime|j")
    a = o_sub.add_parser("a", help="enumerate members directly")
    a.add_argument("--limit", required=True)
    pr = o_sub.add_parser("prime", help="deterministic primality")
    pr.add_argument("n")
    j = o_sub.add_parser("j", help="decomposition offsets, quadratic time")
    j.add_argument("--limit", required=True)

    return top


def _progress_writer(quiet: bool):
    if quiet:
        return None
    return lambda msg: print(msg, file=sys.stderr, flush=True)


def _cmd_sieve(args) -> int:
    bound = _parse_number(args.limit)
    if bound > DESK_LIMIT:
        raise UsageError(f"--limit above {DESK_LIMIT:.0e} is not supported here")
    seg = _parse_number(args.segment)
    try:
        config = sieve.SieveConfig(
            bound_b=bound, segment_len=seg, thread_count=max(1, args.threads)
        )
    except ValueError as e:
        raise UsageError(str(e)) from None
    out = _data_dir(args.out)
    st = sieve.run_pipeline(
        config, out, resume=args.resume, progress=_progress_writer(args.quiet)
    )
    total = sum(e.count for e in st.manifest.entries_of(store.KIND_A))
    print(f"values {total}")
    print(f"limit {st.manifest.bound_b}")
    print(f"segments {len(st.manifest.entries)}")
    return EX_OK


def _cmd_verify(args) -> int:
    st = store.SegmentStore.open(_data_dir(args.data))
    if not st.manifest.complete:
        raise store.ManifestError("run is incomplete; finish it with sieve --resume")
    config = goldbach.VerifierConfig(
        window_len=_parse_number(args.window),
        member_bound=_parse_number(args.bitset_bound),
    )
    try:
        report = goldbach.verify_stream(
            st.read_a_stream(),
            config=config,
            store=st,
            progress=_progress_writer(args.quiet),
        )
    except goldbach.CounterexampleFound as e:
        print(f"counterexample member {e.n} value {e.a_n}")
        return EX_COUNTEREXAMPLE
    print(report.summary())
    if report.champions:
        print()
        print(goldbach.format_champion_table(goldbach.champion_table(report.champions)))
    if args.champions:
        with open(args.champions, "w", encoding="utf-8") as fh:
            goldbach.write_champions_csv(report.champions, fh)
    return EX_OK


def _cmd_count(args) -> int:
    st = store.SegmentStore.open(_data_dir(args.data))
    points = [_parse_number(s) for s in args.at.split(",") if s.strip()]
    if not points:
        raise UsageError("--at needs at least one point")
    limit = store.x_limit(st.manifest.bound_b)
    try:
        rows = analytics.count_table(
            st.read_a_stream(), points, covered_to=limit
        )
    except (analytics.StreamTooShortError, ValueError) as e:
        raise UsageError(str(e)) from None
    print(analytics.format_count_table(rows))
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(analytics.count_table_csv(rows))
    return EX_OK


def _cmd_cq(args) -> int:
    limit = _parse_number(args.prime_limit)
    computed = analytics.compute_cq(limit)
    stored = analytics.DEFAULT_HL_CONSTANT
    print(f"stored   {stored:.13f}")
    print(f"computed {computed:.13f}  (odd primes to {limit})")
    print(f"delta    {abs(computed - stored):.3e}")
    return EX_OK


def _cmd_hyp(args) -> int:
    if args.hyp_command not in ("check", "scan"):
        raise UsageError("hyp needs a subcommand: check or scan")
    try:
        polys = [hypotheses.parse_polynomial(s) for s in args.poly]
    except ValueError as e:
        raise UsageError(str(e)) from None
    if args.hyp_command == "check":
        bad = hypotheses.bunyakovsky_check(polys)
        if bad is None:
            print("satisfied")
        else:
            print(f"violated {bad}")
        return EX_OK
    limit = _parse_number(args.limit)
    try:
        result = hypotheses.simultaneous_prime_scan(polys, limit)
    except (ValueError, hypotheses.ValueOverflowError) as e:
        raise UsageError(str(e)) from None
    print(f"hits {result.count}")
    for cp in result.checkpoints:
        print(f"through {cp.y}: {cp.hits} hits, shape constant {cp.fitted_constant:.4f}")
    shown = ", ".join(str(y) for y in result.hits[:20])
    more = "" if result.count <= 20 else f", ... ({result.count - 20} more)"
    print(f"y: {shown}{more}")
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(hypotheses.scan_csv(result))
    return EX_OK


def _cmd_oracle(args) -> int:
    if args.oracle_command == "a":
        limit = _parse_number(args.limit)
        try:
            for a in oracle.brute_a(limit):
                print(a)
        except ValueError as e:
            raise UsageError(str(e)) from None
        return EX_OK
    if args.oracle_command == "prime":
        n = _parse_number(args.n)
        print("prime" if oracle.is_prime_64(n) else "composite")
        return EX_OK
    if args.oracle_command == "j":
        limit = _parse_number(args.limit)
        try:
            members = oracle.brute_a(limit)
        except ValueError as e:
            raise UsageError(str(e)) from None
        for n in range(2, len(members) + 1):
            print(f"{n},{members[n - 1]},{oracle.brute_j(members, n)}")
        return EX_OK
    raise UsageError("oracle needs a subcommand: a, prime, or j")


def dispatch(argv) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        raise UsageError("a command is required")
    handler = {
        "sieve": _cmd_sieve,
        "verify": _cmd_verify,
        "count": _cmd_count,
        "cq": _cmd_cq,
        "hyp": _cmd_hyp,
        "oracle": _cmd_oracle,
    }[args.command]
    return handler(args)


def main(argv=None) -> int:
    try:
        return dispatch(sys.argv[1:] if argv is None else list(argv))
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EX_USAGE
    except store.StoreError as e:
        print(f"data error: {e}", file=sys.stderr)
        return EX_CORRUPT
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return EX_IO
    except KeyboardInterrupt:
        print("interrupted", file=sys.stderr)
        return EX_INTERRUPT


if __name__ == "__main__":
    sys.exit(main())
