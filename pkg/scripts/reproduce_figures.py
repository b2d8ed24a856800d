#!/usr/bin/env python3
"""Run every figure preset and write one CSV (plus gnuplot script) per preset."""

import argparse
import sys
import time
from pathlib import Path

from telefid.sweep import PRESETS, gnuplot_script, preset, rows_to_csv, run_sweeps


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", type=Path, default=Path("figures"))
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("names", nargs="*", default=[n for n in PRESETS if n.startswith("fig")])
    args = parser.parse_args(argv)

    args.out_dir.mkdir(parents=True, exist_ok=True)
    failed = 0
    for name in args.names:
        start = time.perf_counter()
        rows = run_sweeps(preset(name), args.jobs)
        csv_path = args.out_dir / f"{name}.csv"
        csv_path.write_text(rows_to_csv(rows))
        (args.out_dir / f"{name}.gp").write_text(gnuplot_script(csv_path.name, rows))
        bad = sum(r.status != "ok" for r in rows)
        failed += bad
        print(f"{name}: {len(rows)} rows, {bad} failed, {time.perf_counter() - start:.1f} s -> {csv_path}")
    return 2 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
