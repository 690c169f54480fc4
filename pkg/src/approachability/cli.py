"""Command-line entry point: ``approachability {calibrate,reduce,verify,olo}``.

Exit status is 0 on success, 1 when a checked inequality fails or a halfspace
is not satisfiable, and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import harness
from .reductions import BoundViolation, HalfspaceUnsatisfiable


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def build_parser():
    p = _Parser(prog="approachability", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("calibrate", help="run the calibrated forecaster")
    c.add_argument("--m", type=int, default=10, help="grid size, eps = 1/m")
    c.add_argument("--T", type=int, default=None, help="number of rounds (default: until input ends, or 10000)")
    c.add_argument("--seed", type=int, default=None)
    c.add_argument("--adversary", default="iid:0.5",
                   help="iid:P | opposite | worst | fixed:PATH | fixed:0,1,...")
    c.add_argument("--input", default=None, help="outcome stream, one 0/1 per line ('-' for stdin)")
    c.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    c.add_argument("--eta-schedule", choices=("anytime", "fixed"), default="anytime")

    r = sub.add_parser("reduce", help="run one reduction and check its inequality every round")
    r.add_argument("--direction", choices=("a2o", "o2a"), required=True)
    r.add_argument("--game", default="diagonal",
                   help="o2a: builtin (calibration, diagonal, unreachable) or a game file")
    r.add_argument("--target", default=None, help="o2a: target file overriding the game's target")
    r.add_argument("--body", default="simplex:3", help="a2o: decision set, e.g. simplex:3 or cube:2")
    r.add_argument("--m", type=int, default=10, help="grid size of the builtin calibration game")
    r.add_argument("--T", type=int, default=1000)
    r.add_argument("--tol", type=float, default=1e-6)
    r.add_argument("--seed", type=int, default=None)
    r.add_argument("--adversary", default="iid:0.5", help="iid:P | worst | uniform")
    r.add_argument("--format", choices=("csv", "jsonl", "summary"), default="summary")

    v = sub.add_parser("verify", help="run the invariant suite")
    v.add_argument("--seed", type=int, default=None)

    o = sub.add_parser("olo", help="standalone OGD run against random losses")
    o.add_argument("--body", default="cube:11")
    o.add_argument("--T", type=int, default=10_000)
    o.add_argument("--seed", type=int, default=None)
    o.add_argument("--losses", choices=("pm1", "uniform"), default="pm1")
    o.add_argument("--eta-schedule", choices=("anytime", "fixed"), default="anytime")
    o.add_argument("--format", choices=("csv", "jsonl", "summary"), default="summary")
    return p


def _emit(record, fmt, out):
    if fmt == "summary":
        out.write(json.dumps(record.summary(), indent=2, default=harness._jsonable) + "\n")
    else:
        out.write(harness.render(record, fmt))


def _report_checks(record, err):
    for c in record.checks:
        status = "PASS" if c.passed else "FAIL"
        err.write(f"{status} {c.name}: {c.lhs:.6g} <= {c.rhs:.6g}\n")
    return 0 if record.passed else 1


def cmd_calibrate(args, out, err):
    adversary = args.adversary
    T = args.T
    if args.input is not None:
        stream = sys.stdin if args.input == "-" else open(args.input, encoding="utf-8")
        adversary = harness.FixedSequence(harness.read_outcomes(stream))
        T = T if T is not None else sys.maxsize
    elif T is None:
        T = 10_000
    if T < 1:
        raise UsageError("--T must be >= 1")
    record = harness.run_calibration(args.m, T, adversary, args.seed, args.eta_schedule)
    _emit(record, args.format, out)
    return _report_checks(record, err)


def cmd_reduce(args, out, err):
    if args.T < 1:
        raise UsageError("--T must be >= 1")
    record = harness.run_reduction_check(args.direction, args.game, args.target, args.T, args.adversary,
                                         args.tol, args.seed, args.body, args.m)
    _emit(record, args.format, out)
    return _report_checks(record, err)


def cmd_verify(args, out, err):
    seed = harness.default_seed() if args.seed is None else args.seed
    ok = True
    for name, passed, detail in harness.verify_suite(seed):
        ok &= bool(passed)
        out.write(f"{'PASS' if passed else 'FAIL'} {name} [{detail}]\n")
    return 0 if ok else 1


def cmd_olo(args, out, err):
    record = harness.run_olo(args.body, args.T, args.seed, args.losses, args.eta_schedule)
    _emit(record, args.format, out)
    return _report_checks(record, err)


COMMANDS = {"calibrate": cmd_calibrate, "reduce": cmd_reduce, "verify": cmd_verify, "olo": cmd_olo}


def main(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args, out, err)
    except UsageError as exc:
        err.write(f"{exc}\n")
        return 2
    except HalfspaceUnsatisfiable as exc:
        err.write(f"FAIL {exc}\n")
        return 1
    except BoundViolation as exc:
        err.write(f"FAIL {exc}\n")
        return 1
    except (ValueError, OSError) as exc:
        err.write(f"error: {exc}\n")
        return 2


def cli_main(argv=None):
    return main(argv)


if __name__ == "__main__":
    sys.exit(main())
