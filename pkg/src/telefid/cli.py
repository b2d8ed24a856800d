"""``telefid`` command line.

Exit codes: 0 ok, 1 usage or config error, 2 numerical failure at one or
more grid points (or a failed ``verify``).

Figure presets report the fidelity averaged over the inputs H, V, +, -,
each weighted over the accepted readouts {1001, 0110} by readout
probability.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from .errors import ConfigError, TelefidError
from .sweep import (
    PRESETS,
    SweepRow,
    compare_experiment,
    gnuplot_script,
    load_config,
    preset,
    rows_to_csv,
    run_sweeps,
)
from .verify import MAX_TOTAL_LIMIT, verify

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _preset_name(text: str) -> str:
    if text not in PRESETS:
        listing = "\n".join(f"  {k:<11} {desc}" for k, (_, desc) in PRESETS.items())
        raise argparse.ArgumentTypeError(f"unknown preset {text!r}; available presets:\n{listing}")
    return text


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--jobs", type=int, default=1, metavar="N", help="worker processes (default 1)")
    common.add_argument("--quiet", action="store_true", help="suppress the human-readable summary")

    parser = _Parser(
        prog="telefid",
        description="Teleportation fidelity with SPDC sources and threshold detectors.",
        epilog=(
            "Fidelity columns are per-input fidelities weighted over the accepted readouts "
            "(default 1001, 0110) by readout probability; f_avg is their unweighted mean."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sweep", parents=[common], help="run a sweep from a config file")
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--out", type=Path, help="CSV path (overrides 'output' in the config)")
    p.add_argument("--gnuplot", type=Path, metavar="PATH", help="also write a gnuplot script")

    listing = ", ".join(PRESETS)
    p = sub.add_parser("preset", parents=[common], help=f"run a built-in preset ({listing})")
    p.add_argument("name", type=_preset_name, metavar="NAME", help=f"one of: {listing}")
    p.add_argument("--out", type=Path, help="CSV path (default: stdout)")
    p.add_argument("--gnuplot", type=Path, metavar="PATH", help="also write a gnuplot script")

    p = sub.add_parser("verify", parents=[common], help="check closed forms against the Fock oracle")
    p.add_argument("--max-total", type=int, default=9, metavar="N",
                   help=f"oracle photon cap over all six modes (1..{MAX_TOTAL_LIMIT}, default 9)")
    p.add_argument("--chi", type=_float_list, help="chi values for the probability/state grid")
    p.add_argument("--fid-chi", type=_float_list, help="chi values for the fidelity grid")
    p.add_argument("--eta", type=_float_list, help="eta values for the fidelity grid")
    p.add_argument("--zeta-dc", type=_float_list, help="zeta_dc values for the fidelity grid")

    p = sub.add_parser("compare-experiment", parents=[common],
                       help="model vs the 100 km experiment's reported fidelity")
    p.add_argument("--distance", type=float, help="override the channel length in km")
    p.add_argument("--config", type=Path, help="use this config instead of the experiment preset")
    return parser


def _summarize(rows: list[SweepRow]) -> str:
    lines = []
    for series in dict.fromkeys(r.series for r in rows):
        group = [r for r in rows if r.series == series]
        ok = [r for r in group if r.status == "ok"]
        label = series or "sweep"
        if not ok:
            lines.append(f"{label}: no successful points ({len(group)} failed)")
            continue
        best = max(ok, key=lambda r: r.f_avg)
        failed = len(group) - len(ok)
        tail = f", {failed} failed" if failed else ""
        lines.append(
            f"{label}: {len(group)} points{tail}; max f_avg {best.f_avg:.4f} "
            f"at {best.swept_param}={best.value:g}"
        )
    return "\n".join(lines)


def _emit(rows, out, gnuplot, quiet) -> int:
    text = rows_to_csv(rows)
    if out is not None:
        out.write_text(text)
    else:
        sys.stdout.write(text)
    if gnuplot is not None:
        target = str(out) if out is not None else "telefid.csv"
        gnuplot.write_text(gnuplot_script(target, rows))
    if not quiet:
        print(_summarize(rows), file=sys.stderr)
    return EXIT_NUMERIC if any(r.status != "ok" for r in rows) else EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.jobs < 1:
        parser.error("--jobs must be >= 1")
    try:
        if args.command == "sweep":
            config = load_config(args.config)
            out = args.out or (Path(config.output_path) if config.output_path else None)
            return _emit(run_sweeps([config], args.jobs), out, args.gnuplot, args.quiet)
        if args.command == "preset":
            return _emit(run_sweeps(preset(args.name), args.jobs), args.out, args.gnuplot, args.quiet)
        if args.command == "verify":
            if not 1 <= args.max_total <= MAX_TOTAL_LIMIT:
                parser.error(f"--max-total must lie in [1, {MAX_TOTAL_LIMIT}]")
            kwargs = {}
            for arg, key in (("chi", "state_chis"), ("fid_chi", "fid_chis"),
                             ("eta", "fid_etas"), ("zeta_dc", "fid_zetas")):
                if getattr(args, arg):
                    kwargs[key] = getattr(args, arg)
            report = verify(args.max_total, **kwargs)
            if not args.quiet or not report.passed:
                print(report.summary())
            return EXIT_OK if report.passed else EXIT_NUMERIC
        if args.command == "compare-experiment":
            config = load_config(args.config) if args.config else None
            result = compare_experiment(config, distance=args.distance)
            if not args.quiet:
                print(result.summary())
            else:
                print(f"{result.model:.12g}")
            return EXIT_OK
    except ConfigError as exc:
        print(f"telefid: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"telefid: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TelefidError as exc:
        print(f"telefid: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
