"""``qcopy`` command-line interface.

Exit codes: 0 success, 1 usage, 2 parse/semantic error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import sys

from . import dsl, sweep
from .device import DeviceSpec, load_device
from .pulse import StepTooLarge, UnknownCarrier, serialize_schedule

EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_RUNTIME = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read(path: str) -> str:
    with open(path) as fh:
        return fh.read()


def _device(path: str | None) -> DeviceSpec:
    return load_device(path) if path else DeviceSpec()


def cmd_parse(args) -> int:
    sys.stdout.write(dsl.pretty_print(dsl.parse(_read(args.file))))
    return 0


def cmd_compile(args) -> int:
    ast = dsl.parse(_read(args.file))
    for phi, sched in dsl.compile(ast, _device(args.device)):
        sys.stdout.write(f"# phi={phi!r}\n")
        sys.stdout.write(serialize_schedule(sched))
    return 0


def cmd_run(args) -> int:
    cfg = sweep.RunConfig(
        backend=args.backend,
        shots=args.shots,
        seed=args.seed,
        dt=args.dt,
        device=_device(args.device),
        use_readout=args.readout,
    )
    result = sweep.run_sweep(_read(args.file), cfg)
    text = sweep.to_csv(result)
    if args.output == "-":
        sys.stdout.write(text)
    else:
        with open(args.output, "w", newline="") as fh:
            fh.write(text)
    return 0


def cmd_report(args) -> int:
    result = sweep.from_csv(_read(args.csv))
    sys.stdout.write(sweep.report(result).text())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qcopy", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("parse", help="parse a program and print its canonical form")
    p.add_argument("file")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("compile", help="print the pulse schedule for every swept phase")
    p.add_argument("file")
    p.add_argument("--device", help="key=value device config file")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("run", help="execute a sweep and write CSV")
    p.add_argument("file")
    p.add_argument("--backend", choices=sweep.BACKENDS, default="ideal")
    p.add_argument("--shots", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dt", type=float, help="integration step in us (default pulse duration/2000)")
    p.add_argument("--device", help="key=value device config file")
    p.add_argument("--readout", action="store_true", help="classify shots through simulated IQ readout")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("report", help="summarize a sweep CSV")
    p.add_argument("csv")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (dsl.DslError, sweep.MalformedCsv) as exc:
        print(f"qcopy: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (OSError, ValueError, StepTooLarge, UnknownCarrier) as exc:
        print(f"qcopy: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
