"""Completion time and burst tables vs common erasure probability (two GEO receivers, M=5).

Writes one CSV row per (pe, method) for the exact optimizer, both heuristics and
an ideal-field Monte Carlo check of the optimal table.

    python scripts/fig4_sweep.py --out fig4.csv --runs 2000
"""

import argparse
import sys

from rlnc_tdd import cli
from rlnc_tdd.model import config_text, fig4_params, parse_config_text


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="fig4.csv")
    ap.add_argument("--runs", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=cli.DEFAULT_SEED)
    ap.add_argument("--step", type=float, default=0.05)
    args = ap.parse_args()

    kv = parse_config_text(config_text(fig4_params()))
    values = cli.sweep_values(0.0, 0.8, args.step)
    rows = cli.sweep_rows(kv, "pe", values, ("optimal", "worst_link", "combined", "simulate"),
                          runs=args.runs, seed=args.seed)
    cols = list(cli.SWEEP_COLUMNS[:5]) + [f"N_{i}" for i in range(1, 6)] + list(cli.SWEEP_COLUMNS[5:])
    with open(args.out, "w", newline="") as fh:
        cli.write_csv(rows, cols, fh)
    for r in rows:
        if r["method"] != "simulate":
            print(f"pe={r['value']:>5} {r['method']:>10} T={r['mean_time']} "
                  f"N_1={r.get('N_1')} N_5={r.get('N_5')}")
    print(f"wrote {args.out}", file=sys.stderr)


if __name__ == "__main__":
    main()
