"""Network coding vs Round-Robin (TDD and full duplex) on the two-receiver GEO link."""

import argparse

from rlnc_tdd import cli
from rlnc_tdd.model import config_text, fig4_params, parse_config_text


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="fig5.csv")
    ap.add_argument("--step", type=float, default=0.05)
    args = ap.parse_args()

    kv = parse_config_text(config_text(fig4_params()))
    values = cli.sweep_values(0.0, 0.8, args.step)
    rows = cli.sweep_rows(kv, "pe", values, ("optimal", "worst_link", "rr_full_duplex", "rr_tdd"))
    cols = list(cli.SWEEP_COLUMNS[:5]) + [f"N_{i}" for i in range(1, 6)] + list(cli.SWEEP_COLUMNS[5:])
    with open(args.out, "w", newline="") as fh:
        cli.write_csv(rows, cols, fh)

    print(f"{'pe':>5} {'NC opt':>9} {'RR-FD lo':>9} {'RR-FD hi':>9} {'RR-TDD':>9}")
    by_pe = {}
    for r in rows:
        by_pe.setdefault(r["value"], {})[r["method"]] = r
    for pe, d in by_pe.items():
        print(f"{pe:>5} {float(d['optimal']['mean_time']):9.4f} "
              f"{float(d['rr_full_duplex']['bound_lower']):9.4f} "
              f"{float(d['rr_full_duplex']['bound_upper']):9.4f} "
              f"{float(d['rr_tdd']['mean_time']):9.4f}")


if __name__ == "__main__":
    main()
