"""Command-line front end: seeded, reproducible sweeps emitting CSV + JSON.

Exit codes: 0 success, 2 configuration/validation error, 1 runtime error.
"""

import argparse
import sys

from . import __version__
from .harness import ConfigError, build_config, execute, load_config_file

_SUBCOMMANDS = ("lyapunov", "classical-otoc", "quantum-otoc", "compare",
                "return-times", "sweep")


def _parse_float_list(text: str):
    return [float(tok) for tok in text.split(",") if tok.strip()]


def _parse_int_list(text: str):
    return [int(tok) for tok in text.split(",") if tok.strip()]


def _parse_window(text: str):
    lo, hi = text.split(":")
    return (int(lo), int(hi))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trimap",
        description="Round-off triangle map laboratory: Lyapunov exponents, "
                    "classical/quantum OTOCs, and quantum-classical comparison.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in _SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", metavar="PATH",
                       help="flat key = value file; CLI flags override it")
        p.add_argument("--seed", type=int, metavar="U64")
        p.add_argument("--threads", type=int, metavar="N")
        p.add_argument("--out", metavar="DIR")
        p.add_argument("--alpha", type=float, metavar="F")
        p.add_argument("--beta", type=float, metavar="F")
        p.add_argument("--r", type=_parse_float_list, metavar="F[,F...]",
                       help="round-off radius (comma list for sweeps)")
        p.add_argument("--hbar-exp", type=_parse_int_list, metavar="N[,N...]",
                       help="hbar = 2^-N / pi (comma list for sweeps)")
        p.add_argument("--dim", type=_parse_int_list, metavar="D[,D...]",
                       help="Hilbert dimension(s); alternative to --hbar-exp")
        p.add_argument("--steps", type=int, metavar="T")
        p.add_argument("--centers", type=int, metavar="N")
        p.add_argument("--samples", type=int, metavar="M")
        p.add_argument("--scheme", choices=("al", "la", "ll"))
        p.add_argument("--prefactor", choices=("on", "off"))
        p.add_argument("--fit-window", type=_parse_window, metavar="A:B")
        p.add_argument("--t0", type=_parse_int_list, metavar="T[,T...]")
        p.add_argument("--companion-r", type=float, metavar="F")
        p.add_argument("--seam-margin", type=float, metavar="F")
        p.add_argument("--max-dim", type=int, metavar="D")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        file_values = load_config_file(args.config) if args.config else {}
        overrides = {}
        for key, value in vars(args).items():
            if key in ("subcommand", "config") or value is None:
                continue
            if key == "prefactor":
                value = value == "on"
            if key == "scheme":
                value = value.upper()
            overrides[key] = value
        config = build_config(file_values, overrides)
        csv_path, meta_path = execute(args.subcommand, config)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure
        print(f"runtime error: {exc}", file=sys.stderr)
        return 1
    print(csv_path)
    print(meta_path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
